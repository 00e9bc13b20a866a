// Eigen must come before httplib: <resolv.h> defines a `_res` macro that
// collides with Eigen parameter names.
#include "tampers/victim.hpp"

#include <atomic>
#include <regex>

#include <httplib.h>
#include <json.hpp>

#include "tampers/error.hpp"

namespace tampers {

namespace {

using json = nlohmann::json;

class RemoteClassifier final : public Classifier {
 public:
  explicit RemoteClassifier(RemoteOptions opts) : opts_(std::move(opts)) {
    static const std::regex kUrl(R"(^(https?://[^/\s?#]+)(/[^\s?#]*)?$)");
    std::smatch m;
    if (!std::regex_match(opts_.endpoint, m, kUrl))
      throw Error(ErrorKind::ConfigError, "invalid victim endpoint '" + opts_.endpoint + "'");
    origin_ = m[1].str();
    base_path_ = m[2].str();
    while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (origin_.rfind("https://", 0) == 0)
      throw Error(ErrorKind::ConfigError, "this build has no TLS support for " + opts_.endpoint);
#endif
    if (opts_.max_batch == 0) throw Error(ErrorKind::ConfigError, "max_batch must be positive");
    num_classes_ = opts_.expected_classes;
  }

  int num_classes() const override { return num_classes_.load(); }
  std::string backend() const override { return "remote"; }

 protected:
  std::vector<Prediction> do_classify(std::span<const std::string> texts) override {
    std::vector<Prediction> out;
    out.reserve(texts.size());
    for (std::size_t start = 0; start < texts.size(); start += opts_.max_batch) {
      auto chunk = texts.subspan(start, std::min(opts_.max_batch, texts.size() - start));
      auto preds = post(chunk);
      for (auto& p : preds) out.push_back(std::move(p));
    }
    return out;
  }

 private:
  std::vector<Prediction> post(std::span<const std::string> texts) {
    json body = {{"texts", json::array()}};
    for (const auto& t : texts) body["texts"].push_back(t);

    // One client per request; httplib clients are not meant to be shared
    // across threads.
    httplib::Client client(origin_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(opts_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(opts_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    const std::string path = base_path_ + "/v1/classify";
    auto res = client.Post(path, body.dump(), "application/json");
    if (!res)
      throw Error(ErrorKind::TransportError,
                  opts_.endpoint + ": " + httplib::to_string(res.error()));
    if (res->status != 200)
      throw Error(ErrorKind::TransportError,
                  opts_.endpoint + ": HTTP status " + std::to_string(res->status));

    json reply;
    try {
      reply = json::parse(res->body);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::ProtocolError, std::string("response is not JSON: ") + e.what());
    }
    if (!reply.is_object() || !reply.contains("probs") || !reply["probs"].is_array())
      throw Error(ErrorKind::ProtocolError, "response lacks a 'probs' array");
    const auto& rows = reply["probs"];
    if (rows.size() != texts.size())
      throw Error(ErrorKind::ProtocolError, "expected " + std::to_string(texts.size()) +
                                                " probability vectors, got " +
                                                std::to_string(rows.size()));

    std::vector<Prediction> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
      if (!row.is_array() || row.empty())
        throw Error(ErrorKind::ProtocolError, "probability vector is not a non-empty array");
      const int k = static_cast<int>(row.size());
      int expected = 0;
      if (!num_classes_.compare_exchange_strong(expected, k) && expected != k)
        throw Error(ErrorKind::ProtocolError, "expected " + std::to_string(expected) +
                                                  " classes, got " + std::to_string(k));
      Prediction p{Eigen::VectorXd(k)};
      for (int i = 0; i < k; ++i) {
        if (!row[static_cast<std::size_t>(i)].is_number())
          throw Error(ErrorKind::ProtocolError, "non-numeric probability");
        p.probs(i) = row[static_cast<std::size_t>(i)].get<double>();
      }
      // Validated, never renormalized.
      if (!p.is_valid(1e-6))
        throw Error(ErrorKind::ProtocolError, "probabilities do not form a distribution");
      out.push_back(std::move(p));
    }
    return out;
  }

  RemoteOptions opts_;
  std::string origin_;
  std::string base_path_;
  std::atomic<int> num_classes_{0};
};

}  // namespace

ClassifierHandle make_remote(const RemoteOptions& options) {
  return std::make_shared<RemoteClassifier>(options);
}

}  // namespace tampers

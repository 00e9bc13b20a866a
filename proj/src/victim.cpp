#include "tampers/victim.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tampers/error.hpp"
#include "tampers/text.hpp"

namespace tampers {

int Prediction::label() const {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < probs.size(); ++i)
    if (probs(i) > probs(best)) best = i;
  return static_cast<int>(best);
}

bool Prediction::is_valid(double tol) const {
  if (probs.size() == 0) return false;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    double p = probs(i);
    if (!std::isfinite(p) || p < -tol || p > 1.0 + tol) return false;
  }
  return std::abs(probs.sum() - 1.0) <= tol;
}

std::vector<Prediction> Classifier::classify_batch(std::span<const std::string> texts) {
  if (texts.empty()) return {};
  ledger_.add(texts.size());
  auto out = do_classify(texts);
  if (out.size() != texts.size())
    throw Error(ErrorKind::ProtocolError, "backend returned " + std::to_string(out.size()) +
                                              " predictions for " + std::to_string(texts.size()) +
                                              " texts");
  return out;
}

Prediction Classifier::classify(const std::string& text) {
  return classify_batch(std::span<const std::string>(&text, 1)).front();
}

LinearClassifier::LinearClassifier(std::unordered_map<std::string, Eigen::VectorXd> weights,
                                   Eigen::VectorXd bias)
    : weights_(std::move(weights)), bias_(std::move(bias)) {
  if (bias_.size() < 2) throw Error(ErrorKind::ConfigError, "linear victim needs >= 2 classes");
  if (!bias_.allFinite()) throw Error(ErrorKind::ConfigError, "non-finite bias");
  for (const auto& [word, row] : weights_) {
    if (row.size() != bias_.size())
      throw Error(ErrorKind::DimensionMismatch, "weight row for '" + word + "' has " +
                                                    std::to_string(row.size()) + " entries");
    if (!row.allFinite()) throw Error(ErrorKind::ConfigError, "non-finite weight for '" + word + "'");
  }
}

Eigen::VectorXd LinearClassifier::logits(const std::string& text) const {
  Eigen::VectorXd z = bias_;
  Text tokens;
  try {
    tokens = tokenize(text);
  } catch (const Error&) {
    return z;
  }
  for (const auto& tok : tokens.tokens) {
    if (!tok.is_word) continue;
    auto it = weights_.find(tok.normal);
    if (it != weights_.end()) z += it->second;
  }
  return z;
}

std::vector<Prediction> LinearClassifier::do_classify(std::span<const std::string> texts) {
  std::vector<Prediction> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    Eigen::VectorXd z = logits(text);
    Eigen::VectorXd e = (z.array() - z.maxCoeff()).exp().matrix();
    out.push_back(Prediction{e / e.sum()});
  }
  return out;
}

ClassifierHandle make_builtin_linear(const std::unordered_map<std::string, double>& weights,
                                     double bias) {
  std::unordered_map<std::string, Eigen::VectorXd> rows;
  for (const auto& [word, w] : weights) rows.emplace(ascii_lower(word), Eigen::Vector2d(0.0, w));
  return std::make_shared<LinearClassifier>(std::move(rows), Eigen::Vector2d(0.0, bias));
}

ClassifierHandle make_builtin_softmax(const std::unordered_map<std::string, Eigen::VectorXd>& weights,
                                      const Eigen::VectorXd& bias) {
  std::unordered_map<std::string, Eigen::VectorXd> rows;
  for (const auto& [word, w] : weights) rows.emplace(ascii_lower(word), w);
  return std::make_shared<LinearClassifier>(std::move(rows), bias);
}

ClassifierHandle load_builtin_linear(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open victim weights " + path);

  std::unordered_map<std::string, std::vector<double>> rows;
  std::vector<double> bias;
  std::size_t width = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string word;
    if (!(fields >> word) || word.front() == '#') continue;
    std::vector<double> values;
    std::string tok;
    while (fields >> tok) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v))
        throw Error(ErrorKind::ParseError, path + ":" + std::to_string(line_no) + ": bad weight '" + tok + "'");
      values.push_back(v);
    }
    if (values.empty())
      throw Error(ErrorKind::ParseError, path + ":" + std::to_string(line_no) + ": no weights");
    if (width == 0) width = values.size();
    if (values.size() != width)
      throw Error(ErrorKind::DimensionMismatch, path + ":" + std::to_string(line_no) +
                                                    ": expected " + std::to_string(width) + " weights");
    if (word == "__bias__")
      bias = std::move(values);
    else
      rows.emplace(ascii_lower(word), std::move(values));
  }
  if (width == 0) throw Error(ErrorKind::ParseError, path + ": no weights");
  if (bias.empty()) bias.assign(width, 0.0);

  if (width == 1) {
    std::unordered_map<std::string, double> binary;
    for (const auto& [word, v] : rows) binary.emplace(word, v.front());
    return make_builtin_linear(binary, bias.front());
  }
  std::unordered_map<std::string, Eigen::VectorXd> multi;
  for (const auto& [word, v] : rows)
    multi.emplace(word, Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  return make_builtin_softmax(multi, Eigen::Map<const Eigen::VectorXd>(bias.data(), static_cast<Eigen::Index>(bias.size())));
}

ClassifierHandle make_victim(const std::string& descriptor, const RemoteOptions& remote_defaults) {
  static constexpr std::string_view kLinear = "builtin:linear:";
  if (descriptor.rfind(kLinear, 0) == 0) return load_builtin_linear(descriptor.substr(kLinear.size()));
  if (descriptor.rfind("http://", 0) == 0 || descriptor.rfind("https://", 0) == 0) {
    RemoteOptions opts = remote_defaults;
    opts.endpoint = descriptor;
    return make_remote(opts);
  }
  throw Error(ErrorKind::ConfigError,
              "victim must be builtin:linear:<path> or an http(s) URL, got '" + descriptor + "'");
}

}  // namespace tampers

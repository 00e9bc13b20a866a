#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace tampers {

/// Class probability vector returned by a victim.
struct Prediction {
  Eigen::VectorXd probs;

  /// argmax, lowest index on ties.
  int label() const;
  double prob(int cls) const { return probs(cls); }
  /// True when probs form a distribution within `tol`.
  bool is_valid(double tol = 1e-6) const;
};

/// Counts every text submitted to a victim. Safe to bump from several threads.
class QueryLedger {
 public:
  void add(std::uint64_t n) noexcept { total_.fetch_add(n, std::memory_order_relaxed); }
  std::uint64_t total() const noexcept { return total_.load(std::memory_order_relaxed); }

 private:
  std::atomic<std::uint64_t> total_{0};
};

/// The black-box classifier. Only probability vectors cross this boundary.
class Classifier {
 public:
  virtual ~Classifier() = default;

  /// One prediction per text, order-aligned. Advances the ledger by
  /// texts.size(). Throws TransportError / ProtocolError on backend faults.
  std::vector<Prediction> classify_batch(std::span<const std::string> texts);
  Prediction classify(const std::string& text);

  /// 0 while unknown (a remote backend learns it from its first response).
  virtual int num_classes() const = 0;
  virtual std::string backend() const = 0;

  const QueryLedger& ledger() const noexcept { return ledger_; }

 protected:
  virtual std::vector<Prediction> do_classify(std::span<const std::string> texts) = 0;

 private:
  QueryLedger ledger_;
};

using ClassifierHandle = std::shared_ptr<Classifier>;

/// Bag-of-words linear model: logits = bias + sum of per-word rows over word
/// tokens, probs = softmax(logits). Words are matched by their lowercased form.
class LinearClassifier final : public Classifier {
 public:
  LinearClassifier(std::unordered_map<std::string, Eigen::VectorXd> weights, Eigen::VectorXd bias);

  int num_classes() const override { return static_cast<int>(bias_.size()); }
  std::string backend() const override { return "builtin-linear"; }

  Eigen::VectorXd logits(const std::string& text) const;

 protected:
  std::vector<Prediction> do_classify(std::span<const std::string> texts) override;

 private:
  std::unordered_map<std::string, Eigen::VectorXd> weights_;
  Eigen::VectorXd bias_;
};

/// Binary victim with probs [1 - σ(logit), σ(logit)],
/// logit = bias + Σ weights[word].
ClassifierHandle make_builtin_linear(const std::unordered_map<std::string, double>& weights,
                                     double bias);

/// k-class softmax victim; every weight row and the bias have length k.
ClassifierHandle make_builtin_softmax(const std::unordered_map<std::string, Eigen::VectorXd>& weights,
                                      const Eigen::VectorXd& bias);

/// Reads `word v1 [v2 ...]` rows (reserved word `__bias__`). One value per
/// row builds the binary model, k values the k-class model.
ClassifierHandle load_builtin_linear(const std::string& path);

struct RemoteOptions {
  std::string endpoint;
  std::chrono::milliseconds timeout{30000};
  std::size_t max_batch = 64;
  // 0 = learn from the first response.
  int expected_classes = 0;
};

/// Client for `POST {endpoint}/v1/classify`.
ClassifierHandle make_remote(const RemoteOptions& options);

/// Resolves `builtin:linear:<path>` or an http(s) URL.
ClassifierHandle make_victim(const std::string& descriptor, const RemoteOptions& remote_defaults = {});

}  // namespace tampers

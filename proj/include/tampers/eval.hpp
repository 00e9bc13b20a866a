#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tampers/attack.hpp"
#include "tampers/lexicon.hpp"
#include "tampers/text.hpp"
#include "tampers/victim.hpp"

namespace tampers {

/// perturbed / N over word tokens. Throws DegenerateText when N == 0.
double perturbation_rate(std::size_t perturbed_count, std::size_t word_count);

/// Lowercased word forms of `text` with `subs` applied, one per token.
std::vector<std::string> adversarial_words(const Text& text, const SubstitutionMap& subs);

/// Stand-in for a sentence encoder: cosine between the mean embedded
/// content-word vectors of the two texts. When either side has no embedded
/// content word the result is 1 for identical token sequences, else 0.
double semantic_similarity(const Text& original, std::span<const std::string> adversarial,
                           const EmbeddingTable& embeddings);

/// Pluggable similarity metric for the benchmark.
class SimilarityBackend {
 public:
  virtual ~SimilarityBackend() = default;
  virtual double similarity(const Text& original, std::span<const std::string> adversarial) const = 0;
};

class EmbeddingMeanSimilarity final : public SimilarityBackend {
 public:
  explicit EmbeddingMeanSimilarity(const EmbeddingTable& embeddings) : embeddings_(embeddings) {}
  double similarity(const Text& original, std::span<const std::string> adversarial) const override {
    return semantic_similarity(original, adversarial, embeddings_);
  }

 private:
  const EmbeddingTable& embeddings_;
};

enum class Method { Tampers, GreedyOnly, Random };

std::string_view to_string(Method method) noexcept;
/// "tampers", "greedy-only", "random". Throws ConfigError otherwise.
Method parse_method(std::string_view name);
/// Comma-separated list; throws ConfigError when empty.
std::vector<Method> parse_methods(std::string_view list);

/// Random-substitution baseline: visits content words in a random order,
/// substituting a random candidate and checking after each step. Restarts
/// from the original text up to `max_passes` times or until the budget runs out.
AttackOutcome random_attack(const Text& text, Classifier& classifier,
                            std::span<const CandidateSet> candidates, const AttackConfig& config,
                            std::size_t max_passes);

struct Sample {
  std::string id;
  std::string text;
  int label = 0;
};

/// JSONL `{"id": "...", "text": "...", "label": 0}` per line.
std::vector<Sample> load_dataset(const std::string& path);

/// Stable across platforms: hash(base_seed, run_index, sample_id).
std::uint64_t derive_seed(std::uint64_t base_seed, std::size_t run, std::string_view sample_id);

struct SampleReport {
  std::string id;
  std::size_t run = 0;
  Method method = Method::Tampers;
  std::uint64_t seed = 0;
  AttackStatus status = AttackStatus::Failure;
  bool success = false;
  std::string failure;
  int label = 0;
  std::size_t perturbed_count = 0;
  std::size_t initial_count = 0;
  std::size_t word_count = 0;
  double perturbation_rate = 0.0;
  std::uint64_t queries = 0;
  double semantic_similarity = 0.0;
  std::size_t restored_count = 0;
  std::size_t generations_used = 0;
  double wall_time_ms = 0.0;
  std::string adversarial;
  SubstitutionMap substitutions;
};

/// Every field but wall_time_ms, which lives in the timing stream.
nlohmann::json to_json(const SampleReport& report);
nlohmann::json timing_json(const SampleReport& report);

struct AggregateReport {
  Method method = Method::Tampers;
  std::optional<std::size_t> run;  // nullopt for the across-run mean
  std::size_t total = 0;           // excludes attack errors
  std::size_t correct = 0;
  std::size_t successes = 0;
  std::size_t failures = 0;
  std::size_t skipped = 0;
  std::size_t errors = 0;
  double original_accuracy = 0.0;
  double attacked_accuracy = 0.0;
  double success_rate = 0.0;
  double mean_perturbation_rate = 0.0;
  double mean_semantic_similarity = 0.0;
  double mean_queries = 0.0;
  double mean_wall_time_ms = 0.0;
};

nlohmann::json to_json(const AggregateReport& report);

/// Samples with status Error are dropped from every denominator and only
/// counted. Perturbation and similarity means cover successes, plus
/// failures when `include_failed`.
AggregateReport aggregate(std::span<const SampleReport> samples, Method method,
                          std::optional<std::size_t> run, bool include_failed = false);

/// Field-wise mean of per-run aggregates; counts are summed.
AggregateReport mean_over_runs(std::span<const AggregateReport> runs);

struct BenchmarkConfig {
  AttackConfig attack;
  std::size_t runs = 1;
  std::vector<Method> methods{Method::Tampers};
  std::size_t jobs = 1;
  bool include_failed = false;
  std::size_t random_passes = 10;

  void validate() const;
};

struct BenchmarkInputs {
  Classifier* victim = nullptr;
  const CandidateLexicon* lexicon = nullptr;
  const EmbeddingTable* embeddings = nullptr;
  const PosTagger* tagger = nullptr;
  const StopwordList* stopwords = nullptr;
  const SimilarityBackend* similarity = nullptr;  // defaults to embedding mean
};

/// Optional output streams; lines are written in (run, sample, method) order
/// as soon as every earlier sample is done.
struct ReportStreams {
  std::ostream* samples = nullptr;
  std::ostream* timing = nullptr;
};

struct BenchmarkResult {
  std::vector<SampleReport> samples;
  std::vector<AggregateReport> per_run;  // run-major, then method
  std::vector<AggregateReport> mean;     // one per method
};

/// Attacks every sample with every method, `runs` times with derived seeds.
BenchmarkResult run_benchmark(std::span<const Sample> dataset, const BenchmarkInputs& inputs,
                              const BenchmarkConfig& config, const ReportStreams& streams = {});

/// Attacks one already-tagged sample with one method and fills a report.
SampleReport attack_sample(const Text& text, std::span<const CandidateSet> candidates,
                           Classifier& victim, const SimilarityBackend& similarity,
                           const BenchmarkConfig& config, Method method, std::size_t run,
                           std::uint64_t seed);

}  // namespace tampers

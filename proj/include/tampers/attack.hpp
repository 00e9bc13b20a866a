#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tampers/lexicon.hpp"
#include "tampers/text.hpp"
#include "tampers/victim.hpp"

namespace tampers {

using Rng = std::mt19937_64;

struct GaConfig {
  static constexpr double kEliteFraction = 0.2;
  static constexpr double kParentFraction = 0.5;

  std::size_t population = 10;
  std::size_t generations = 100;
  double mutation = 0.05;
  // Plant the last fooling assignment (restricted to the reduced list) in
  // generation 0. Off in paper-faithful mode.
  bool seed_with_greedy = true;

  std::size_t elite_count() const;
  std::size_t parent_pool() const;
  void validate() const;
};

struct AttackConfig {
  std::size_t z = 50;
  GaConfig ga;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> query_budget;
  // false = stop after the greedy reduction (the greedy-only ablation).
  bool iterative = true;

  void validate() const;
};

/// Thrown by QuerySession when a batch would overrun the query budget.
class BudgetExhausted : public std::runtime_error {
 public:
  BudgetExhausted() : std::runtime_error("query budget exhausted") {}
};

/// Per-attack view of a victim: counts this attack's queries and enforces
/// its budget. The shared classifier ledger keeps counting globally.
class QuerySession {
 public:
  QuerySession(Classifier& classifier, std::optional<std::uint64_t> budget = std::nullopt)
      : classifier_(classifier), budget_(budget) {}

  std::vector<Prediction> classify(std::span<const std::string> texts);
  Prediction classify(const std::string& text);
  /// Counted but never refused; used for the final soundness check.
  Prediction verify(const std::string& text);

  std::uint64_t queries() const noexcept { return queries_; }
  std::uint64_t batches() const noexcept { return batches_; }
  Classifier& classifier() noexcept { return classifier_; }

 private:
  Classifier& classifier_;
  std::optional<std::uint64_t> budget_;
  std::uint64_t queries_ = 0;
  std::uint64_t batches_ = 0;
};

struct ImportanceRecord {
  static constexpr double kNoCandidates = -std::numeric_limits<double>::infinity();

  std::size_t position = 0;
  double score = kNoCandidates;
  std::optional<std::string> best_candidate;
  std::size_t best_index = 0;
};

/// Largest drop in P(y_true) over all single substitutions at `set.position`,
/// evaluated in one batch. Ties go to the higher-ranked candidate.
ImportanceRecord importance_score(const Text& text, const CandidateSet& set, QuerySession& session,
                                  int y_true, double p_true);

struct VulnerableEntry {
  std::size_t position = 0;
  std::string word;
  double score = 0.0;
};

/// Substituted positions in descending importance; entries[0] is w*_(1).
struct VulnerableList {
  std::vector<VulnerableEntry> entries;

  std::size_t size() const noexcept { return entries.size(); }
  SubstitutionMap substitutions() const;
};

struct ReductionResult {
  bool success = false;
  // "exhausted", "no-candidates", "budget", "misclassified"
  std::string failure;
  std::vector<ImportanceRecord> ranking;
  VulnerableList vulnerable;
  std::string adversarial;
  // Greedy steps whose flip check was issued.
  std::size_t flip_checks = 0;
};

/// Greedy search-space reduction over precomputed candidate sets (indexed by
/// token position). `p_true` is P(y_true | original).
ReductionResult search_space_reduction(const Text& text, std::span<const CandidateSet> candidates,
                                       QuerySession& session, int y_true, double p_true);

/// Convenience form: classifies the original once, builds candidates, then
/// runs the reduction.
ReductionResult search_space_reduction(const Text& text, QuerySession& session,
                                       const CandidateLexicon& lexicon,
                                       const EmbeddingTable& embeddings, std::size_t z);

/// h: 1 when the prediction is not y_true, else the drop in P(y_true).
double fitness(const Prediction& prediction, double p_true_orig, int y_true);

/// Gene i indexes into the candidate set of the i-th reduced position.
struct Chromosome {
  std::vector<std::uint32_t> genes;
  double fitness = std::numeric_limits<double>::quiet_NaN();
  bool fooled = false;

  bool evaluated() const noexcept { return fitness == fitness; }
  friend bool operator==(const Chromosome& a, const Chromosome& b) { return a.genes == b.genes; }
};

using Generation = std::vector<Chromosome>;

/// One GA round's search space: the reduced vulnerable positions and their
/// candidate sets, over a fixed original text.
struct GaProblem {
  const Text* text = nullptr;
  std::vector<std::size_t> positions;
  std::vector<const CandidateSet*> candidates;
  int y_true = 0;
  double p_true_orig = 0.0;

  SubstitutionMap substitutions(const Chromosome& c) const;
  std::string render(const Chromosome& c) const;
  /// Encodes a map covering exactly `positions`; nullopt if some word is not
  /// in its candidate set.
  std::optional<Chromosome> encode(const SubstitutionMap& subs) const;
};

Generation ga_init(const GaProblem& problem, std::size_t population, Rng& rng);

/// Scores every unevaluated chromosome in one batch.
void evaluate(const GaProblem& problem, Generation& generation, QuerySession& session);

/// Index of the fittest chromosome, earliest on ties.
std::size_t best_index(const Generation& generation);

/// Elites first (verbatim, in fitness order), then freshly evaluated children.
Generation ga_step(const Generation& generation, const GaProblem& problem, const GaConfig& config,
                   QuerySession& session, Rng& rng);

struct GaResult {
  std::optional<Chromosome> best;  // set iff a fooling chromosome was found
  std::size_t generations_used = 0;
  bool budget_exhausted = false;
};

GaResult ga_run(const GaProblem& problem, const GaConfig& config, QuerySession& session, Rng& rng,
                const std::optional<Chromosome>& seed = std::nullopt);

struct IterativeResult {
  SubstitutionMap substitutions;
  std::string adversarial;
  std::size_t restored_count = 0;
  std::size_t generations_used = 0;
  std::size_t rounds = 0;
};

/// Restores w*_(K), w*_(K-1), ... one at a time, re-attacking the shrunken
/// list with the GA, and keeps the last fooling assignment.
IterativeResult iterative_search(const Text& text, const ReductionResult& reduction,
                                 std::span<const CandidateSet> candidates, const GaConfig& config,
                                 QuerySession& session, Rng& rng, int y_true, double p_true);

enum class AttackStatus { Success, Failure, Skipped, Error };

std::string_view to_string(AttackStatus status) noexcept;

struct AttackOutcome {
  AttackStatus status = AttackStatus::Failure;
  bool success = false;
  std::string failure;  // empty on success
  std::string original;
  std::string adversarial;
  SubstitutionMap substitutions;
  std::size_t perturbed_count = 0;
  std::size_t initial_count = 0;  // K from the greedy step
  std::size_t word_count = 0;     // N
  std::uint64_t queries = 0;
  std::size_t generations_used = 0;
  std::size_t restored_count = 0;
  int y_true = 0;
  int final_label = 0;
  double p_true_orig = 0.0;
};

/// Full pipeline: greedy reduction, iterative restore, one verifying query.
/// Uses text.label as y_true, or the victim's prediction if unlabeled.
AttackOutcome attack(const Text& text, Classifier& classifier, const CandidateLexicon& lexicon,
                     const EmbeddingTable& embeddings, const AttackConfig& config);

/// Same, over precomputed candidate sets.
AttackOutcome attack(const Text& text, Classifier& classifier,
                     std::span<const CandidateSet> candidates, const AttackConfig& config);

}  // namespace tampers

#include "tampers/attack.hpp"

#include <algorithm>
#include <numeric>

#include "tampers/error.hpp"

namespace tampers {

// --- configuration ---------------------------------------------------------

// Integer ceilings: ceil(0.2 M) and ceil(0.5 M) without floating-point drift.
std::size_t GaConfig::elite_count() const { return (population + 4) / 5; }
std::size_t GaConfig::parent_pool() const { return (population + 1) / 2; }

void GaConfig::validate() const {
  if (population == 0) throw Error(ErrorKind::ConfigError, "population must be positive");
  if (generations == 0) throw Error(ErrorKind::ConfigError, "generations must be positive");
  if (!(mutation >= 0.0 && mutation <= 1.0))
    throw Error(ErrorKind::ConfigError, "mutation probability must lie in [0, 1]");
  if (population > elite_count() && parent_pool() < 2)
    throw Error(ErrorKind::ConfigError,
                "population " + std::to_string(population) + " leaves a parent pool of one");
}

void AttackConfig::validate() const {
  if (z == 0) throw Error(ErrorKind::ConfigError, "z must be positive");
  ga.validate();
}

std::string_view to_string(AttackStatus status) noexcept {
  switch (status) {
    case AttackStatus::Success: return "success";
    case AttackStatus::Failure: return "failure";
    case AttackStatus::Skipped: return "skipped";
    case AttackStatus::Error: return "error";
  }
  return "error";
}

// --- query session ---------------------------------------------------------

std::vector<Prediction> QuerySession::classify(std::span<const std::string> texts) {
  if (budget_ && queries_ + texts.size() > *budget_) throw BudgetExhausted();
  auto out = classifier_.classify_batch(texts);
  queries_ += texts.size();
  ++batches_;
  return out;
}

Prediction QuerySession::classify(const std::string& text) {
  return classify(std::span<const std::string>(&text, 1)).front();
}

Prediction QuerySession::verify(const std::string& text) {
  auto out = classifier_.classify(text);
  ++queries_;
  ++batches_;
  return out;
}

// --- greedy reduction ------------------------------------------------------

ImportanceRecord importance_score(const Text& text, const CandidateSet& set, QuerySession& session,
                                  int y_true, double p_true) {
  ImportanceRecord rec;
  rec.position = set.position;
  if (set.empty()) return rec;

  std::vector<std::string> variants;
  variants.reserve(set.size());
  for (const auto& cand : set.words) variants.push_back(render(text, {{set.position, cand}}));
  auto preds = session.classify(variants);

  for (std::size_t i = 0; i < preds.size(); ++i) {
    double drop = p_true - preds[i].prob(y_true);
    if (!rec.best_candidate || drop > rec.score) {
      rec.score = drop;
      rec.best_candidate = set.words[i];
      rec.best_index = i;
    }
  }
  return rec;
}

SubstitutionMap VulnerableList::substitutions() const {
  SubstitutionMap out;
  for (const auto& e : entries) out.emplace(e.position, e.word);
  return out;
}

ReductionResult search_space_reduction(const Text& text, std::span<const CandidateSet> candidates,
                                       QuerySession& session, int y_true, double p_true) {
  ReductionResult result;
  try {
    for (const auto& set : candidates) {
      if (set.empty() || set.position >= text.tokens.size() || !text.tokens[set.position].is_content)
        continue;
      result.ranking.push_back(importance_score(text, set, session, y_true, p_true));
    }
    if (result.ranking.empty()) {
      result.failure = "no-candidates";
      return result;
    }
    std::stable_sort(result.ranking.begin(), result.ranking.end(),
                     [](const ImportanceRecord& a, const ImportanceRecord& b) {
                       if (a.score != b.score) return a.score > b.score;
                       return a.position < b.position;
                     });

    SubstitutionMap subs;
    for (const auto& rec : result.ranking) {
      subs[rec.position] = *rec.best_candidate;
      result.vulnerable.entries.push_back({rec.position, *rec.best_candidate, rec.score});
      result.adversarial = render(text, subs);
      auto pred = session.classify(result.adversarial);
      ++result.flip_checks;
      if (pred.label() != y_true) {
        result.success = true;
        return result;
      }
    }
    result.failure = "exhausted";
  } catch (const BudgetExhausted&) {
    result.failure = "budget";
  }
  return result;
}

ReductionResult search_space_reduction(const Text& text, QuerySession& session,
                                       const CandidateLexicon& lexicon,
                                       const EmbeddingTable& embeddings, std::size_t z) {
  auto candidates = build_all_candidates(text, lexicon, embeddings, z);
  Prediction original;
  try {
    original = session.classify(render(text));
  } catch (const BudgetExhausted&) {
    ReductionResult r;
    r.failure = "budget";
    return r;
  }
  const int y_true = text.label.value_or(original.label());
  if (original.label() != y_true) {
    ReductionResult r;
    r.failure = "misclassified";
    return r;
  }
  return search_space_reduction(text, candidates, session, y_true, original.prob(y_true));
}

// --- genetic search --------------------------------------------------------

double fitness(const Prediction& prediction, double p_true_orig, int y_true) {
  if (prediction.label() != y_true) return 1.0;
  return p_true_orig - prediction.prob(y_true);
}

SubstitutionMap GaProblem::substitutions(const Chromosome& c) const {
  SubstitutionMap out;
  for (std::size_t i = 0; i < positions.size(); ++i)
    out.emplace(positions[i], candidates[i]->words[c.genes[i]]);
  return out;
}

std::string GaProblem::render(const Chromosome& c) const {
  return tampers::render(*text, substitutions(c));
}

std::optional<Chromosome> GaProblem::encode(const SubstitutionMap& subs) const {
  if (subs.size() != positions.size()) return std::nullopt;
  Chromosome c;
  c.genes.reserve(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    auto it = subs.find(positions[i]);
    if (it == subs.end()) return std::nullopt;
    const auto& words = candidates[i]->words;
    auto w = std::find(words.begin(), words.end(), it->second);
    if (w == words.end()) return std::nullopt;
    c.genes.push_back(static_cast<std::uint32_t>(w - words.begin()));
  }
  return c;
}

namespace {

std::uint32_t draw_gene(const CandidateSet& set, Rng& rng) {
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(set.size() - 1));
  return pick(rng);
}

std::vector<std::size_t> fitness_order(const Generation& generation) {
  std::vector<std::size_t> order(generation.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return generation[a].fitness > generation[b].fitness;
  });
  return order;
}

}  // namespace

Generation ga_init(const GaProblem& problem, std::size_t population, Rng& rng) {
  Generation gen(population);
  for (auto& c : gen) {
    c.genes.reserve(problem.positions.size());
    for (const auto* set : problem.candidates) c.genes.push_back(draw_gene(*set, rng));
  }
  return gen;
}

void evaluate(const GaProblem& problem, Generation& generation, QuerySession& session) {
  std::vector<std::size_t> pending;
  std::vector<std::string> texts;
  for (std::size_t i = 0; i < generation.size(); ++i) {
    if (generation[i].evaluated()) continue;
    pending.push_back(i);
    texts.push_back(problem.render(generation[i]));
  }
  if (pending.empty()) return;
  auto preds = session.classify(texts);
  for (std::size_t j = 0; j < pending.size(); ++j) {
    Chromosome& c = generation[pending[j]];
    c.fitness = fitness(preds[j], problem.p_true_orig, problem.y_true);
    c.fooled = preds[j].label() != problem.y_true;
  }
}

std::size_t best_index(const Generation& generation) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < generation.size(); ++i)
    if (generation[i].fitness > generation[best].fitness) best = i;
  return best;
}

Generation ga_step(const Generation& generation, const GaProblem& problem, const GaConfig& config,
                   QuerySession& session, Rng& rng) {
  const std::size_t m = generation.size();
  const std::size_t elites = std::min(config.elite_count(), m);
  const std::size_t pool = std::min(config.parent_pool(), m);
  const auto order = fitness_order(generation);

  Generation next;
  next.reserve(m);
  for (std::size_t i = 0; i < elites; ++i) next.push_back(generation[order[i]]);

  std::uniform_int_distribution<std::size_t> pick_parent(0, pool - 1);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = elites; i < m; ++i) {
    const Chromosome& p = generation[order[pick_parent(rng)]];
    const Chromosome& q = generation[order[pick_parent(rng)]];
    Chromosome child;
    child.genes.resize(problem.positions.size());
    for (std::size_t g = 0; g < child.genes.size(); ++g) {
      child.genes[g] = coin(rng) == 0 ? p.genes[g] : q.genes[g];
      if (config.mutation > 0.0 && unit(rng) < config.mutation)
        child.genes[g] = draw_gene(*problem.candidates[g], rng);
    }
    next.push_back(std::move(child));
  }
  evaluate(problem, next, session);
  return next;
}

GaResult ga_run(const GaProblem& problem, const GaConfig& config, QuerySession& session, Rng& rng,
                const std::optional<Chromosome>& seed) {
  GaResult result;
  try {
    Generation gen = ga_init(problem, config.population, rng);
    if (seed && config.seed_with_greedy && !gen.empty()) {
      gen.front() = *seed;
      gen.front().fitness = std::numeric_limits<double>::quiet_NaN();
    }
    evaluate(problem, gen, session);
    if (auto b = best_index(gen); gen[b].fooled) {
      result.best = gen[b];
      return result;
    }
    for (std::size_t g = 1; g <= config.generations; ++g) {
      gen = ga_step(gen, problem, config, session, rng);
      result.generations_used = g;
      if (auto b = best_index(gen); gen[b].fooled) {
        result.best = gen[b];
        return result;
      }
    }
  } catch (const BudgetExhausted&) {
    result.budget_exhausted = true;
  }
  return result;
}

// --- iterative restore -----------------------------------------------------

IterativeResult iterative_search(const Text& text, const ReductionResult& reduction,
                                 std::span<const CandidateSet> candidates, const GaConfig& config,
                                 QuerySession& session, Rng& rng, int y_true, double p_true) {
  IterativeResult result;
  result.substitutions = reduction.vulnerable.substitutions();
  result.adversarial = reduction.adversarial;
  const std::size_t k_total = reduction.vulnerable.size();
  if (k_total <= 1) return result;

  for (std::size_t k = k_total; k >= 1; --k) {
    // Restore w*_(k); the GA searches the k-1 more vulnerable positions.
    const std::size_t remaining = k - 1;
    // The untouched original is correctly classified, so an empty list
    // cannot fool the victim.
    if (remaining == 0) break;

    GaProblem problem;
    problem.text = &text;
    problem.y_true = y_true;
    problem.p_true_orig = p_true;
    SubstitutionMap restricted;
    for (std::size_t i = 0; i < remaining; ++i) {
      const auto pos = reduction.vulnerable.entries[i].position;
      problem.positions.push_back(pos);
      problem.candidates.push_back(&candidates[pos]);
      restricted.emplace(pos, result.substitutions.at(pos));
    }

    ++result.rounds;
    auto run = ga_run(problem, config, session, rng, problem.encode(restricted));
    result.generations_used += run.generations_used;
    if (!run.best) break;
    result.substitutions = problem.substitutions(*run.best);
    result.adversarial = problem.render(*run.best);
    ++result.restored_count;
  }
  return result;
}

// --- pipeline --------------------------------------------------------------

AttackOutcome attack(const Text& text, Classifier& classifier,
                     std::span<const CandidateSet> candidates, const AttackConfig& config) {
  config.validate();
  AttackOutcome out;
  out.original = render(text);
  out.adversarial = out.original;
  out.word_count = text.word_count();

  QuerySession session(classifier, config.query_budget);
  Prediction original;
  try {
    original = session.classify(out.original);
  } catch (const BudgetExhausted&) {
    out.failure = "budget";
    out.queries = session.queries();
    return out;
  }
  const int k = static_cast<int>(original.probs.size());
  out.y_true = text.label.value_or(original.label());
  if (out.y_true < 0 || out.y_true >= k)
    throw Error(ErrorKind::ConfigError, "label " + std::to_string(out.y_true) +
                                            " outside [0, " + std::to_string(k) + ")");
  out.final_label = original.label();
  out.p_true_orig = original.prob(out.y_true);
  if (original.label() != out.y_true) {
    out.status = AttackStatus::Skipped;
    out.failure = "misclassified";
    out.queries = session.queries();
    return out;
  }

  auto reduction = search_space_reduction(text, candidates, session, out.y_true, out.p_true_orig);
  out.initial_count = reduction.vulnerable.size();
  if (!reduction.success) {
    out.failure = reduction.failure;
    if (!reduction.adversarial.empty()) out.adversarial = reduction.adversarial;
    out.substitutions = reduction.vulnerable.substitutions();
    out.perturbed_count = out.substitutions.size();
    out.queries = session.queries();
    return out;
  }

  out.substitutions = reduction.vulnerable.substitutions();
  out.adversarial = reduction.adversarial;
  if (config.iterative) {
    Rng rng(config.seed);
    auto refined = iterative_search(text, reduction, candidates, config.ga, session, rng,
                                    out.y_true, out.p_true_orig);
    out.substitutions = std::move(refined.substitutions);
    out.adversarial = std::move(refined.adversarial);
    out.restored_count = refined.restored_count;
    out.generations_used = refined.generations_used;
  }
  out.perturbed_count = out.substitutions.size();

  auto check = session.verify(out.adversarial);
  out.final_label = check.label();
  out.queries = session.queries();
  if (check.label() != out.y_true) {
    out.status = AttackStatus::Success;
    out.success = true;
  } else {
    out.failure = "verification";
  }
  return out;
}

AttackOutcome attack(const Text& text, Classifier& classifier, const CandidateLexicon& lexicon,
                     const EmbeddingTable& embeddings, const AttackConfig& config) {
  config.validate();
  auto candidates = build_all_candidates(text, lexicon, embeddings, config.z);
  return attack(text, classifier, candidates, config);
}

}  // namespace tampers

// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Builtin victims only.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "tampers/attack.hpp"
#include "tampers/cli.hpp"
#include "tampers/eval.hpp"
#include "toy_world.hpp"

using namespace tampers;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// --- perturbation arithmetic ----------------------------------------------

Verdict perturbation_arithmetic() {
  constexpr double kTol = 0.01;  // percentage points
  struct Row {
    std::size_t k, n;
    double printed;
  } rows[] = {{1, 17, 5.88}, {5, 17, 29.4}};
  Verdict v{true, ""};
  for (const auto& r : rows) {
    const double pct = 100.0 * perturbation_rate(r.k, r.n);
    const double diff = std::abs(pct - r.printed);
    v.pass = v.pass && diff <= kTol;
    v.detail += std::to_string(r.k) + "/" + std::to_string(r.n) + "=" + fmt("%.4f%%", pct) +
                " vs " + fmt("%g", r.printed) + " (|d|=" + fmt("%.4f", diff) + "pp) ";
  }
  v.detail += "tol " + fmt("%g", kTol) + "pp";
  return v;
}

// --- oracle soundness and monotone improvement ----------------------------

struct InstanceRun {
  oracle::Instance inst;
  AttackOutcome full;
  AttackOutcome greedy;
};

std::vector<InstanceRun>& random_runs() {
  static std::vector<InstanceRun> runs = [] {
    std::vector<InstanceRun> out;
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 200; ++i) {
      InstanceRun r{oracle::random_instance(rng), {}, {}};
      AttackConfig cfg;
      cfg.seed = static_cast<std::uint64_t>(i);
      r.full = attack(r.inst.text, *r.inst.victim, r.inst.candidates, cfg);
      cfg.iterative = false;
      r.greedy = attack(r.inst.text, *r.inst.victim, r.inst.candidates, cfg);
      out.push_back(std::move(r));
    }
    return out;
  }();
  return runs;
}

Verdict oracle_soundness() {
  const auto start = Clock::now();
  auto& runs = random_runs();
  std::size_t successes = 0, unsound = 0, reachable = 0, bound_violations = 0, strict = 0,
              frozen_violations = 0, enumerated = 0, multi = 0;
  for (auto& r : runs) {
    const auto& inst = r.inst;
    if (!r.full.success) continue;
    ++successes;
    // Fresh call on the returned string.
    if (inst.victim->classify(r.full.adversarial).label() == inst.y_true ||
        !oracle::fools(inst, r.full.substitutions))
      ++unsound;

    // Greedy's list L in importance order comes from the greedy-only run.
    QuerySession session(*inst.victim);
    const double p0 = inst.victim->classify(render(inst.text)).prob(inst.y_true);
    auto red = search_space_reduction(inst.text, inst.candidates, session, inst.y_true, p0);
    const std::size_t k = red.vulnerable.size();
    if (k < 2) continue;
    ++multi;
    // The first restore round searches L minus its last entry, with every
    // remaining position substituted.
    std::vector<std::size_t> prefix;
    for (std::size_t i = 0; i + 1 < k; ++i) prefix.push_back(red.vulnerable.entries[i].position);
    auto e = oracle::enumerate(inst, prefix);
    enumerated += e.assignments;
    if (e.full_fooling) {
      ++reachable;
      if (r.full.perturbed_count > k) ++bound_violations;
      if (r.full.perturbed_count < k) ++strict;
    } else if (r.full.substitutions != red.vulnerable.substitutions()) {
      // No round can succeed, so the greedy result must come back as is.
      ++frozen_violations;
    }
  }
  const double secs = seconds_since(start);
  Verdict v;
  v.pass = unsound == 0 && bound_violations == 0 && frozen_violations == 0 && secs < 30.0;
  v.detail = std::to_string(runs.size()) + " instances, " + std::to_string(successes) +
             " successes, " + std::to_string(unsound) + " unsound, " + std::to_string(multi) +
             " with K>=2, " + std::to_string(reachable) +
             " with a reachable shorter fooling prefix (" + std::to_string(strict) +
             " improved, " + std::to_string(bound_violations) + " above K), " +
             std::to_string(frozen_violations) + " changed without a shorter option, " +
             std::to_string(enumerated) + " assignments enumerated, " + fmt("%.2fs", secs);
  return v;
}

Verdict monotone_improvement() {
  const auto start = Clock::now();
  auto& runs = random_runs();
  std::size_t compared = 0, violations = 0;
  for (const auto& r : runs) {
    if (!r.greedy.success) continue;
    ++compared;
    if (!r.full.success || r.full.perturbed_count > r.greedy.perturbed_count) ++violations;
  }
  std::mt19937_64 rng(77);
  std::size_t family = 0, strict = 0;
  for (int i = 0; i < 20; ++i) {
    auto inst = oracle::redundancy_instance(rng);
    AttackConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(i);
    auto full = attack(inst.text, *inst.victim, inst.candidates, cfg);
    cfg.iterative = false;
    auto greedy = attack(inst.text, *inst.victim, inst.candidates, cfg);
    ++family;
    if (!full.success || !greedy.success || full.perturbed_count > greedy.perturbed_count)
      ++violations;
    if (full.success && full.perturbed_count < greedy.perturbed_count) ++strict;
  }
  Verdict v;
  v.pass = violations == 0 && strict >= 1;
  v.detail = std::to_string(compared) + " random + " + std::to_string(family) +
             " redundancy instances, " + std::to_string(violations) + " violations, " +
             std::to_string(strict) + "/" + std::to_string(family) +
             " redundancy instances strictly improved, " + fmt("%.2fs", seconds_since(start));
  return v;
}

// --- GA bookkeeping -------------------------------------------------------

Verdict ga_bookkeeping() {
  std::mt19937_64 make(5);
  oracle::Instance inst;
  do inst = oracle::random_instance(make);
  while (inst.text.content_positions().size() < 3);

  GaProblem p;
  p.text = &inst.text;
  p.positions = inst.text.content_positions();
  for (auto pos : p.positions) p.candidates.push_back(&inst.candidates[pos]);
  p.y_true = inst.y_true;
  p.p_true_orig = inst.victim->classify(render(inst.text)).prob(inst.y_true);

  GaConfig cfg;  // M = 10
  QuerySession session(*inst.victim);
  Rng rng(99);
  Generation gen = ga_init(p, cfg.population, rng);
  evaluate(p, gen, session);

  std::size_t bad_size = 0, bad_elites = 0, bad_queries = 0;
  for (int step = 0; step < 100; ++step) {
    // Independent fitness ranking, earliest first on ties.
    std::vector<std::size_t> order(gen.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return gen[a].fitness > gen[b].fitness; });
    const auto before = session.queries();
    Generation next = ga_step(gen, p, cfg, session, rng);
    if (next.size() != 10) ++bad_size;
    for (std::size_t e = 0; e < 2; ++e)
      if (next[e].genes != gen[order[e]].genes || next[e].fitness != gen[order[e]].fitness)
        ++bad_elites;
    if (session.queries() - before != 8) ++bad_queries;
    gen = std::move(next);
  }
  Verdict v;
  v.pass = cfg.elite_count() == 2 && bad_size == 0 && bad_elites == 0 && bad_queries == 0;
  v.detail = "M=10, elites=" + std::to_string(cfg.elite_count()) + ", 100 steps: " +
             std::to_string(bad_size) + " wrong sizes, " + std::to_string(bad_elites) +
             " elite mismatches, " + std::to_string(bad_queries) + " steps not issuing 8 queries";
  return v;
}

// --- fitness contract ------------------------------------------------------

Verdict fitness_contract() {
  std::mt19937_64 rng(123);
  std::gamma_distribution<double> g(0.7, 1.0);
  std::size_t trials = 0, violations = 0;
  for (int t = 0; t < 10000; ++t) {
    const int k = 2 + static_cast<int>(rng() % 5);
    Eigen::VectorXd probs(k);
    for (int i = 0; i < k; ++i) probs(i) = g(rng);
    if (t % 10 == 0) probs(1) = probs(0);  // exercise argmax ties
    probs /= probs.sum();
    Prediction pred{probs};
    const int y = static_cast<int>(rng() % static_cast<unsigned>(k));
    int argmax = 0;
    for (int i = 1; i < k; ++i)
      if (probs(i) > probs(argmax)) argmax = i;
    const bool misclassified = argmax != y;
    const double orig = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    ++trials;
    if ((fitness(pred, orig, y) == 1.0) != misclassified) ++violations;
    if (!misclassified && fitness(pred, probs(y), y) != 0.0) ++violations;
    if (!misclassified && fitness(pred, orig, y) != orig - probs(y)) ++violations;
  }
  Verdict v;
  v.pass = violations == 0;
  v.detail = std::to_string(trials) + " random predictions, " + std::to_string(violations) +
             " violations";
  return v;
}

// --- determinism ----------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

int run_cli(const std::vector<std::string>& args, std::string* out = nullptr) {
  std::vector<const char*> argv{"tampers"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out) *out = o.str() + e.str();
  return code;
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("tampers-acceptance-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Verdict determinism() {
  const auto start = Clock::now();
  const fs::path dir = scratch("determinism");
  toy::WorldOptions opts;
  opts.samples = 50;
  toy::write_world(toy::make_world(opts), dir / "world");
  const auto w = (dir / "world").string() + "/";
  auto bench = [&](const std::string& out) {
    return run_cli({"benchmark", "--dataset", w + "dataset.jsonl", "--lexicon", w + "thesaurus.tsv",
                    "--embeddings", w + "embeddings.txt", "--pos-lexicon", w + "pos.tsv",
                    "--victim", "builtin:linear:" + w + "victim.weights", "--methods",
                    "tampers,greedy-only,random", "--seed", "17", "--out", out});
  };
  const int a = bench((dir / "a").string());
  const int b = bench((dir / "b").string());
  const std::string sa = slurp(dir / "a" / "samples.jsonl");
  const std::string sb = slurp(dir / "b" / "samples.jsonl");
  const double secs = seconds_since(start);
  Verdict v;
  v.pass = a == 0 && b == 0 && !sa.empty() && sa == sb && secs < 10.0;
  v.detail = "50 samples x 3 methods, " + std::to_string(std::count(sa.begin(), sa.end(), '\n')) +
             " lines, " + (sa == sb ? "byte-identical" : "DIFFERENT") + ", " + fmt("%.2fs", secs);
  return v;
}

// --- toy benchmark direction ---------------------------------------------

Verdict toy_direction() {
  const auto start = Clock::now();
  toy::World world = toy::make_world();
  auto victim = world.victim();
  BenchmarkInputs in;
  in.victim = victim.get();
  in.lexicon = &world.lexicon;
  in.embeddings = &world.embeddings;
  in.tagger = &world.tagger;

  BenchmarkConfig cfg;
  cfg.methods = {Method::Tampers, Method::GreedyOnly, Method::Random};
  cfg.attack.seed = 1;
  cfg.attack.query_budget = 150;
  cfg.random_passes = 1000;
  auto res = run_benchmark(world.dataset, in, cfg);
  const auto& t = res.mean[0];
  const auto& g = res.mean[1];
  const auto& r = res.mean[2];
  std::size_t redundant = 0;
  for (const auto& s : res.samples)
    if (s.method == Method::Tampers && s.success && s.restored_count > 0) ++redundant;

  const double secs = seconds_since(start);
  const bool perturb_ok = redundant == 0 ? t.mean_perturbation_rate <= g.mean_perturbation_rate
                                         : t.mean_perturbation_rate < g.mean_perturbation_rate;
  Verdict v;
  v.pass = world.dataset.size() == 200 && t.success_rate >= g.success_rate && perturb_ok &&
           r.success_rate < t.success_rate && secs < 120.0;
  v.detail = std::to_string(world.dataset.size()) + " samples, " +
             std::to_string(world.thesaurus_size()) + "-word thesaurus, budget 150: success " +
             fmt("%.2f%%", 100 * t.success_rate) + " / " + fmt("%.2f%%", 100 * g.success_rate) +
             " / " + fmt("%.2f%%", 100 * r.success_rate) +
             " (tampers / greedy-only / random), perturb " +
             fmt("%.2f%%", 100 * t.mean_perturbation_rate) + " vs " +
             fmt("%.2f%%", 100 * g.mean_perturbation_rate) + ", " + std::to_string(redundant) +
             " samples shortened, " + fmt("%.2fs", secs);
  return v;
}

// --- query accounting ----------------------------------------------------

Verdict query_accounting() {
  // Fixed fixture: four content words with candidate sets of sizes 3, 2, 2, 1;
  // flips on the second greedy step.
  auto inner = make_builtin_linear({{"good", 2.0}, {"harmless", 0.5}, {"fine", 1.5}, {"great", 1.8},
                                    {"pedigree", 0.5}, {"lineage", -0.7}, {"heritage", 0.2}},
                                   0.0);
  oracle::RecordingClassifier victim(inner);
  Text text = oracle::make_text(
      "A good film with a solid pedigree both in front of and, more specifically, behind the "
      "camera.",
      {"good", "film", "pedigree", "camera"}, 1);
  CandidateLexicon lex;
  lex.add("good", Pos::Adjective, {"harmless", "fine", "great"});
  lex.add("film", Pos::Adjective, {"movie", "picture"});
  lex.add("pedigree", Pos::Adjective, {"lineage", "heritage"});
  lex.add("camera", Pos::Adjective, {"lens"});
  QuerySession session(victim);
  auto red = search_space_reduction(text, session, lex, EmbeddingTable{}, 50);
  const std::uint64_t expected = 1 + (3 + 2 + 2 + 1) + red.flip_checks;
  bool fixture_ok = red.success && red.flip_checks == 2 && session.queries() == expected &&
                    session.queries() == 11;

  // Ledger against batch sizes over whole attacks on random instances.
  std::mt19937_64 rng(31);
  std::size_t mismatches = 0;
  for (int i = 0; i < 100; ++i) {
    auto inst = oracle::random_instance(rng);
    oracle::RecordingClassifier rec(inst.victim);
    AttackConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(i);
    auto out = attack(inst.text, rec, inst.candidates, cfg);
    const auto sum = std::accumulate(rec.sizes.begin(), rec.sizes.end(), std::uint64_t{0});
    if (sum != rec.ledger().total() || out.queries != rec.ledger().total()) ++mismatches;
  }
  const auto fixture_sum =
      std::accumulate(victim.sizes.begin(), victim.sizes.end(), std::uint64_t{0});
  Verdict v;
  v.pass = fixture_ok && mismatches == 0 && fixture_sum == victim.ledger().total();
  v.detail = "fixture: " + std::to_string(session.queries()) + " queries = 1 + 8 + " +
             std::to_string(red.flip_checks) + " flip checks, ledger " +
             std::to_string(victim.ledger().total()) + "; 100 random attacks, " +
             std::to_string(mismatches) + " ledger mismatches";
  return v;
}

// --- throughput -----------------------------------------------------------

Verdict throughput() {
  toy::World world = toy::make_world();
  auto victim = world.victim();
  // Glue toy sentences together and cut at exactly 200 words.
  std::string raw;
  std::size_t words = 0;
  for (const auto& s : world.dataset) {
    for (const auto& tok : tokenize(s.text).tokens) {
      if (!tok.is_word) continue;
      raw += (raw.empty() ? "" : " ") + tok.surface;
      if (++words == 200) break;
    }
    if (words == 200) break;
  }
  Text text = pos_tag(tokenize(raw), world.tagger);
  const auto start = Clock::now();
  AttackConfig cfg;
  cfg.seed = 3;
  auto out = attack(text, *victim, world.lexicon, world.embeddings, cfg);
  const double secs = seconds_since(start);
  Verdict v;
  v.pass = text.word_count() == 200 && secs < 5.0;
  v.detail = std::to_string(text.word_count()) + " words, " +
             std::to_string(text.content_positions().size()) + " content, status " +
             std::string(to_string(out.status)) + ", K=" + std::to_string(out.initial_count) +
             " -> " + std::to_string(out.perturbed_count) + ", " + std::to_string(out.queries) +
             " queries, " + fmt("%.3fs", secs);
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Verdict()> check;
  } criteria[] = {
      {"perturbation-arithmetic", perturbation_arithmetic},
      {"oracle-soundness", oracle_soundness},
      {"monotone-improvement", monotone_improvement},
      {"ga-bookkeeping", ga_bookkeeping},
      {"fitness-contract", fitness_contract},
      {"determinism", determinism},
      {"toy-benchmark-direction", toy_direction},
      {"query-accounting", query_accounting},
      {"throughput", throughput},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << (v.pass ? "PASS " : "FAIL ") << c.name << ": " << v.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}

#include "tampers/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include "tampers/error.hpp"

namespace tampers {

using nlohmann::json;

double perturbation_rate(std::size_t perturbed_count, std::size_t word_count) {
  if (word_count == 0) throw Error(ErrorKind::DegenerateText, "text has no word tokens");
  return static_cast<double>(perturbed_count) / static_cast<double>(word_count);
}

std::vector<std::string> adversarial_words(const Text& text, const SubstitutionMap& subs) {
  std::vector<std::string> out;
  out.reserve(text.tokens.size());
  for (std::size_t i = 0; i < text.tokens.size(); ++i) {
    auto it = subs.find(i);
    out.push_back(it == subs.end() ? text.tokens[i].normal : ascii_lower(it->second));
  }
  return out;
}

double semantic_similarity(const Text& original, std::span<const std::string> adversarial,
                           const EmbeddingTable& embeddings) {
  bool identical = adversarial.size() == original.tokens.size();
  for (std::size_t i = 0; identical && i < adversarial.size(); ++i)
    identical = adversarial[i] == original.tokens[i].normal;
  if (identical) return 1.0;

  const Eigen::Index dim = embeddings.dim();
  Eigen::VectorXd sum_orig = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd sum_adv = Eigen::VectorXd::Zero(dim);
  std::size_t n_orig = 0;
  std::size_t n_adv = 0;
  const std::size_t n = std::min(adversarial.size(), original.tokens.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!original.tokens[i].is_content) continue;
    if (auto v = embeddings.find(original.tokens[i].normal)) {
      sum_orig += v->transpose();
      ++n_orig;
    }
    if (auto v = embeddings.find(adversarial[i])) {
      sum_adv += v->transpose();
      ++n_adv;
    }
  }
  if (n_orig == 0 || n_adv == 0) return 0.0;
  const double sim = cosine(sum_orig / static_cast<double>(n_orig), sum_adv / static_cast<double>(n_adv));
  return std::clamp(sim, -1.0, 1.0);
}

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::Tampers: return "tampers";
    case Method::GreedyOnly: return "greedy-only";
    case Method::Random: return "random";
  }
  return "tampers";
}

Method parse_method(std::string_view name) {
  if (name == "tampers") return Method::Tampers;
  if (name == "greedy-only" || name == "greedy") return Method::GreedyOnly;
  if (name == "random") return Method::Random;
  throw Error(ErrorKind::ConfigError, "unknown method '" + std::string(name) + "'");
}

std::vector<Method> parse_methods(std::string_view list) {
  std::vector<Method> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    auto comma = list.find(',', start);
    auto item = list.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) {
      Method m = parse_method(item);
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw Error(ErrorKind::ConfigError, "methods list is empty");
  return out;
}

AttackOutcome random_attack(const Text& text, Classifier& classifier,
                            std::span<const CandidateSet> candidates, const AttackConfig& config,
                            std::size_t max_passes) {
  config.validate();
  AttackOutcome out;
  out.original = render(text);
  out.adversarial = out.original;
  out.word_count = text.word_count();

  QuerySession session(classifier, config.query_budget);
  Rng rng(config.seed);
  try {
    auto original = session.classify(out.original);
    out.y_true = text.label.value_or(original.label());
    out.final_label = original.label();
    if (out.y_true < 0 || out.y_true >= static_cast<int>(original.probs.size()))
      throw Error(ErrorKind::ConfigError, "label outside the victim's classes");
    out.p_true_orig = original.prob(out.y_true);
    if (original.label() != out.y_true) {
      out.status = AttackStatus::Skipped;
      out.failure = "misclassified";
      out.queries = session.queries();
      return out;
    }

    std::vector<std::size_t> positions;
    for (const auto& set : candidates)
      if (!set.empty() && set.position < text.tokens.size() && text.tokens[set.position].is_content)
        positions.push_back(set.position);
    if (positions.empty()) {
      out.failure = "no-candidates";
      out.queries = session.queries();
      return out;
    }

    out.failure = "exhausted";
    for (std::size_t pass = 0; pass < std::max<std::size_t>(max_passes, 1); ++pass) {
      std::shuffle(positions.begin(), positions.end(), rng);
      SubstitutionMap subs;
      for (auto pos : positions) {
        const auto& words = candidates[pos].words;
        std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
        subs[pos] = words[pick(rng)];
        auto rendered = render(text, subs);
        auto pred = session.classify(rendered);
        out.substitutions = subs;
        out.adversarial = rendered;
        if (pred.label() != out.y_true) {
          out.failure.clear();
          break;
        }
      }
      if (out.failure.empty()) break;
    }
  } catch (const BudgetExhausted&) {
    out.failure = "budget";
  }
  out.perturbed_count = out.substitutions.size();
  out.initial_count = out.perturbed_count;
  if (out.failure.empty()) {
    auto check = session.verify(out.adversarial);
    out.final_label = check.label();
    if (check.label() != out.y_true) {
      out.status = AttackStatus::Success;
      out.success = true;
    } else {
      out.failure = "verification";
    }
  }
  out.queries = session.queries();
  return out;
}

std::vector<Sample> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open dataset " + path);
  std::vector<Sample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::ParseError, where + ": " + e.what());
    }
    if (!row.is_object() || !row.contains("text") || !row["text"].is_string() ||
        !row.contains("label") || !row["label"].is_number_integer())
      throw Error(ErrorKind::ParseError, where + ": expected {\"id\", \"text\", \"label\"}");
    Sample s;
    s.text = row["text"].get<std::string>();
    s.label = row["label"].get<int>();
    if (row.contains("id"))
      s.id = row["id"].is_string() ? row["id"].get<std::string>() : row["id"].dump();
    else
      s.id = std::to_string(out.size());
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base_seed, std::size_t run, std::string_view sample_id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : sample_id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(splitmix64(base_seed) ^ static_cast<std::uint64_t>(run)) ^ h);
}

json to_json(const SampleReport& r) {
  json subs = json::object();
  for (const auto& [pos, word] : r.substitutions) subs[std::to_string(pos)] = word;
  return json{{"run", r.run},
              {"method", to_string(r.method)},
              {"id", r.id},
              {"seed", r.seed},
              {"status", to_string(r.status)},
              {"success", r.success},
              {"failure", r.failure},
              {"label", r.label},
              {"perturbed_count", r.perturbed_count},
              {"initial_count", r.initial_count},
              {"N", r.word_count},
              {"perturbation_rate", r.perturbation_rate},
              {"queries", r.queries},
              {"semantic_similarity", r.semantic_similarity},
              {"restored_count", r.restored_count},
              {"generations_used", r.generations_used},
              {"adversarial", r.adversarial},
              {"substitutions", subs}};
}

json timing_json(const SampleReport& r) {
  return json{{"run", r.run}, {"method", to_string(r.method)}, {"id", r.id}, {"wall_time_ms", r.wall_time_ms}};
}

json to_json(const AggregateReport& a) {
  json out{{"method", to_string(a.method)},
           {"total", a.total},
           {"correct", a.correct},
           {"successes", a.successes},
           {"failures", a.failures},
           {"skipped", a.skipped},
           {"errors", a.errors},
           {"original_accuracy", a.original_accuracy},
           {"attacked_accuracy", a.attacked_accuracy},
           {"success_rate", a.success_rate},
           {"mean_perturbation_rate", a.mean_perturbation_rate},
           {"mean_semantic_similarity", a.mean_semantic_similarity},
           {"mean_queries", a.mean_queries},
           {"mean_wall_time_ms", a.mean_wall_time_ms}};
  if (a.run) out["run"] = *a.run;
  return out;
}

AggregateReport aggregate(std::span<const SampleReport> samples, Method method,
                          std::optional<std::size_t> run, bool include_failed) {
  AggregateReport a;
  a.method = method;
  a.run = run;
  double pert = 0.0, sim = 0.0, queries = 0.0, wall = 0.0;
  std::size_t n_means = 0;
  for (const auto& s : samples) {
    if (s.method != method || (run && s.run != *run)) continue;
    switch (s.status) {
      case AttackStatus::Error: ++a.errors; continue;
      case AttackStatus::Skipped: ++a.skipped; break;
      case AttackStatus::Success: ++a.successes; break;
      case AttackStatus::Failure: ++a.failures; break;
    }
    ++a.total;
    wall += s.wall_time_ms;
    if (s.status == AttackStatus::Skipped) continue;
    queries += static_cast<double>(s.queries);
    if (s.success || (include_failed && s.status == AttackStatus::Failure)) {
      pert += s.perturbation_rate;
      sim += s.semantic_similarity;
      ++n_means;
    }
  }
  a.correct = a.successes + a.failures;
  if (a.total > 0) {
    a.original_accuracy = static_cast<double>(a.correct) / static_cast<double>(a.total);
    a.attacked_accuracy = static_cast<double>(a.failures) / static_cast<double>(a.total);
    a.mean_wall_time_ms = wall / static_cast<double>(a.total);
  }
  if (a.correct > 0) {
    a.success_rate = static_cast<double>(a.successes) / static_cast<double>(a.correct);
    a.mean_queries = queries / static_cast<double>(a.correct);
  }
  if (n_means > 0) {
    a.mean_perturbation_rate = pert / static_cast<double>(n_means);
    a.mean_semantic_similarity = sim / static_cast<double>(n_means);
  }
  return a;
}

AggregateReport mean_over_runs(std::span<const AggregateReport> runs) {
  AggregateReport m;
  if (runs.empty()) return m;
  m.method = runs.front().method;
  const double k = static_cast<double>(runs.size());
  for (const auto& r : runs) {
    m.total += r.total;
    m.correct += r.correct;
    m.successes += r.successes;
    m.failures += r.failures;
    m.skipped += r.skipped;
    m.errors += r.errors;
    m.original_accuracy += r.original_accuracy / k;
    m.attacked_accuracy += r.attacked_accuracy / k;
    m.success_rate += r.success_rate / k;
    m.mean_perturbation_rate += r.mean_perturbation_rate / k;
    m.mean_semantic_similarity += r.mean_semantic_similarity / k;
    m.mean_queries += r.mean_queries / k;
    m.mean_wall_time_ms += r.mean_wall_time_ms / k;
  }
  return m;
}

void BenchmarkConfig::validate() const {
  attack.validate();
  if (runs == 0) throw Error(ErrorKind::ConfigError, "runs must be positive");
  if (jobs == 0) throw Error(ErrorKind::ConfigError, "jobs must be positive");
  if (methods.empty()) throw Error(ErrorKind::ConfigError, "methods list is empty");
}

SampleReport attack_sample(const Text& text, std::span<const CandidateSet> candidates,
                           Classifier& victim, const SimilarityBackend& similarity,
                           const BenchmarkConfig& config, Method method, std::size_t run,
                           std::uint64_t seed) {
  SampleReport r;
  r.id = text.id;
  r.run = run;
  r.method = method;
  r.seed = seed;
  r.label = text.label.value_or(0);
  r.word_count = text.word_count();

  AttackConfig cfg = config.attack;
  cfg.seed = seed;
  cfg.iterative = method == Method::Tampers;

  const auto start = std::chrono::steady_clock::now();
  try {
    AttackOutcome out = method == Method::Random
                            ? random_attack(text, victim, candidates, cfg, config.random_passes)
                            : attack(text, victim, candidates, cfg);
    r.status = out.status;
    r.success = out.success;
    r.failure = out.failure;
    r.perturbed_count = out.perturbed_count;
    r.initial_count = out.initial_count;
    r.queries = out.queries;
    r.restored_count = out.restored_count;
    r.generations_used = out.generations_used;
    r.adversarial = out.adversarial;
    r.substitutions = out.substitutions;
    r.perturbation_rate = perturbation_rate(out.perturbed_count, r.word_count);
    if (out.status != AttackStatus::Skipped) {
      auto words = adversarial_words(text, out.substitutions);
      r.semantic_similarity = similarity.similarity(text, words);
    }
  } catch (const Error& e) {
    r.status = AttackStatus::Error;
    r.success = false;
    r.failure = e.what();
  }
  r.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

BenchmarkResult run_benchmark(std::span<const Sample> dataset, const BenchmarkInputs& inputs,
                              const BenchmarkConfig& config, const ReportStreams& streams) {
  config.validate();
  if (!inputs.victim || !inputs.lexicon || !inputs.embeddings || !inputs.tagger)
    throw Error(ErrorKind::ConfigError, "benchmark inputs are incomplete");
  const StopwordList& stopwords = inputs.stopwords ? *inputs.stopwords : StopwordList::english();
  EmbeddingMeanSimilarity default_similarity(*inputs.embeddings);
  const SimilarityBackend& similarity = inputs.similarity ? *inputs.similarity : default_similarity;

  const std::size_t n = dataset.size();
  const std::size_t units = n * config.runs;
  std::vector<std::vector<SampleReport>> results(units);
  std::vector<char> done(units, 0);
  std::size_t next_to_write = 0;
  std::mutex mu;
  std::atomic<std::size_t> cursor{0};

  auto process = [&](std::size_t unit) {
    const std::size_t run = unit / (n == 0 ? 1 : n);
    const Sample& sample = dataset[unit % n];
    const std::uint64_t seed = derive_seed(config.attack.seed, run, sample.id);
    std::vector<SampleReport> reports;
    Text text;
    std::vector<CandidateSet> candidates;
    std::string prep_error;
    try {
      text = pos_tag(tokenize(sample.text), *inputs.tagger, stopwords);
      text.label = sample.label;
      text.id = sample.id;
      candidates = build_all_candidates(text, *inputs.lexicon, *inputs.embeddings, config.attack.z);
    } catch (const Error& e) {
      prep_error = e.what();
    }
    for (Method m : config.methods) {
      if (!prep_error.empty()) {
        SampleReport r;
        r.id = sample.id;
        r.run = run;
        r.method = m;
        r.seed = seed;
        r.label = sample.label;
        r.status = AttackStatus::Error;
        r.failure = prep_error;
        reports.push_back(std::move(r));
        continue;
      }
      reports.push_back(attack_sample(text, candidates, *inputs.victim, similarity, config, m, run, seed));
    }

    std::lock_guard lock(mu);
    results[unit] = std::move(reports);
    done[unit] = 1;
    while (next_to_write < units && done[next_to_write]) {
      for (const auto& r : results[next_to_write]) {
        if (streams.samples) *streams.samples << to_json(r).dump() << '\n';
        if (streams.timing) *streams.timing << timing_json(r).dump() << '\n';
      }
      if (streams.samples) streams.samples->flush();
      if (streams.timing) streams.timing->flush();
      ++next_to_write;
    }
  };

  auto worker = [&] {
    for (std::size_t u = cursor++; u < units; u = cursor++) process(u);
  };
  const std::size_t jobs = std::min(config.jobs, std::max<std::size_t>(units, 1));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  BenchmarkResult out;
  for (auto& rs : results)
    for (auto& r : rs) out.samples.push_back(std::move(r));
  for (std::size_t run = 0; run < config.runs; ++run)
    for (Method m : config.methods)
      out.per_run.push_back(aggregate(out.samples, m, run, config.include_failed));
  for (Method m : config.methods) {
    std::vector<AggregateReport> runs;
    for (const auto& a : out.per_run)
      if (a.method == m) runs.push_back(a);
    out.mean.push_back(mean_over_runs(runs));
  }
  return out;
}

}  // namespace tampers

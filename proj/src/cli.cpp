#include "tampers/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "tampers/error.hpp"

namespace tampers::cli {

using nlohmann::json;
namespace fs = std::filesystem;

void RunConfig::validate() const {
  auto positive = [](std::int64_t v, const char* name) {
    if (v <= 0) throw Error(ErrorKind::ConfigError, std::string("--") + name + " must be positive");
  };
  positive(z, "z");
  positive(pop, "pop");
  positive(gens, "gens");
  positive(runs, "runs");
  positive(jobs, "jobs");
  positive(random_passes, "random-passes");
  positive(timeout_ms, "timeout");
  positive(max_batch, "max-batch");
  if (!(mutation >= 0.0 && mutation <= 1.0))
    throw Error(ErrorKind::ConfigError, "--mutation must lie in [0, 1]");
  benchmark_config().validate();
}

BenchmarkConfig RunConfig::benchmark_config() const {
  BenchmarkConfig b;
  b.attack.z = static_cast<std::size_t>(z);
  b.attack.ga.population = static_cast<std::size_t>(pop);
  b.attack.ga.generations = static_cast<std::size_t>(gens);
  b.attack.ga.mutation = mutation;
  b.attack.ga.seed_with_greedy = !paper_faithful;
  b.attack.seed = seed;
  if (budget > 0) b.attack.query_budget = budget;
  b.runs = static_cast<std::size_t>(runs);
  b.methods = parse_methods(methods);
  b.jobs = static_cast<std::size_t>(jobs);
  b.include_failed = include_failed;
  b.random_passes = static_cast<std::size_t>(random_passes);
  return b;
}

json to_json(const RunConfig& c) {
  return json{{"dataset", c.dataset},       {"lexicon", c.lexicon},
              {"embeddings", c.embeddings}, {"pos_lexicon", c.pos_lexicon},
              {"stopwords", c.stopwords},   {"out", c.out},
              {"victim", c.victim},         {"z", c.z},
              {"pop", c.pop},               {"gens", c.gens},
              {"mutation", c.mutation},     {"seed", c.seed},
              {"budget", c.budget},         {"runs", c.runs},
              {"methods", c.methods},       {"jobs", c.jobs},
              {"paper_faithful", c.paper_faithful},
              {"include_failed", c.include_failed},
              {"random_passes", c.random_passes},
              {"timeout_ms", c.timeout_ms}, {"max_batch", c.max_batch}};
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key) && !j[key].is_null()) field = j[key].get<std::decay_t<decltype(field)>>();
  };
  try {
    get("dataset", c.dataset);
    get("lexicon", c.lexicon);
    get("embeddings", c.embeddings);
    get("pos_lexicon", c.pos_lexicon);
    get("stopwords", c.stopwords);
    get("out", c.out);
    get("victim", c.victim);
    get("z", c.z);
    get("pop", c.pop);
    get("gens", c.gens);
    get("mutation", c.mutation);
    get("seed", c.seed);
    get("budget", c.budget);
    get("runs", c.runs);
    get("methods", c.methods);
    get("jobs", c.jobs);
    get("paper_faithful", c.paper_faithful);
    get("include_failed", c.include_failed);
    get("random_passes", c.random_passes);
    get("timeout_ms", c.timeout_ms);
    get("max_batch", c.max_batch);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("bad config value: ") + e.what());
  }
  return c;
}

namespace {

struct Resources {
  CandidateLexicon lexicon;
  EmbeddingTable embeddings;
  LexiconTagger tagger;
  StopwordList stopwords;
};

void require_file(const std::string& path, const char* flag) {
  if (path.empty()) throw Error(ErrorKind::ConfigError, std::string("--") + flag + " is required");
  if (!fs::is_regular_file(path))
    throw Error(ErrorKind::IoError, std::string("--") + flag + ": no such file " + path);
}

std::string resolve_victim(const RunConfig& c) {
  if (!c.victim.empty()) return c.victim;
  if (const char* env = std::getenv("TAMPERS_VICTIM_URL"); env && *env) return env;
  throw Error(ErrorKind::ConfigError, "no victim: pass --victim or set TAMPERS_VICTIM_URL");
}

Resources load_resources(const RunConfig& c) {
  Resources r{load_lexicon(c.lexicon), load_embeddings(c.embeddings),
              LexiconTagger::load(c.pos_lexicon),
              c.stopwords.empty() ? StopwordList::english() : StopwordList::load(c.stopwords)};
  return r;
}

ClassifierHandle open_victim(const RunConfig& c) {
  RemoteOptions opts;
  opts.timeout = std::chrono::milliseconds(c.timeout_ms);
  opts.max_batch = static_cast<std::size_t>(c.max_batch);
  return make_victim(c.victim, opts);
}

std::string marked_diff(const Text& text, const SubstitutionMap& subs) {
  SubstitutionMap marks;
  for (const auto& [pos, word] : subs) {
    std::string cap = word;
    const auto& surface = text.tokens[pos].surface;
    if (!cap.empty() && !surface.empty() && std::isupper(static_cast<unsigned char>(surface.front())))
      cap.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(cap.front())));
    marks.emplace(pos, "[" + surface + " -> " + cap + "]");
  }
  return render(text, marks);
}

std::string percent(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << v * 100.0 << "%";
  return s.str();
}

int cmd_attack(RunConfig c, const std::string& raw, std::optional<int> label, std::ostream& out) {
  c.validate();
  c.victim = resolve_victim(c);
  require_file(c.lexicon, "lexicon");
  require_file(c.embeddings, "embeddings");
  require_file(c.pos_lexicon, "pos-lexicon");
  if (!c.stopwords.empty()) require_file(c.stopwords, "stopwords");

  Resources res = load_resources(c);
  auto victim = open_victim(c);
  Text text = pos_tag(tokenize(raw), res.tagger, res.stopwords);
  text.label = label;
  text.id = "cli";

  AttackConfig cfg = c.benchmark_config().attack;
  auto outcome = attack(text, *victim, res.lexicon, res.embeddings, cfg);

  out << "original:    " << outcome.original << "\n";
  out << "adversarial: " << marked_diff(text, outcome.substitutions) << "\n";
  out << "status:      " << to_string(outcome.status);
  if (!outcome.failure.empty()) out << " (" << outcome.failure << ")";
  out << "\n";
  if (outcome.word_count > 0)
    out << "perturbed:   " << outcome.perturbed_count << "/" << outcome.word_count << " words ("
        << percent(perturbation_rate(outcome.perturbed_count, outcome.word_count)) << "), greedy K="
        << outcome.initial_count << ", restored " << outcome.restored_count << "\n";
  out << "label:       " << outcome.y_true << " -> " << outcome.final_label << "\n";
  out << "queries:     " << outcome.queries << "\n";
  return outcome.success ? kExitSuccess : kExitAttackFailed;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  f << j.dump(2) << '\n';
}

int cmd_benchmark(RunConfig c, std::ostream& out) {
  c.validate();
  require_file(c.dataset, "dataset");
  require_file(c.lexicon, "lexicon");
  require_file(c.embeddings, "embeddings");
  require_file(c.pos_lexicon, "pos-lexicon");
  if (!c.stopwords.empty()) require_file(c.stopwords, "stopwords");
  auto dataset = load_dataset(c.dataset);
  c.victim = resolve_victim(c);

  Resources res = load_resources(c);
  auto victim = open_victim(c);
  const BenchmarkConfig bc = c.benchmark_config();

  fs::create_directories(c.out);
  const fs::path dir(c.out);
  write_json(dir / "aggregate.json", json{{"config", to_json(c)}, {"complete", false}});
  std::ofstream samples(dir / "samples.jsonl");
  std::ofstream timing(dir / "timing.jsonl");
  if (!samples || !timing) throw Error(ErrorKind::IoError, "cannot write reports under " + c.out);

  BenchmarkInputs inputs{victim.get(), &res.lexicon, &res.embeddings, &res.tagger, &res.stopwords, nullptr};
  auto result = run_benchmark(dataset, inputs, bc, {&samples, &timing});

  json runs = json::array();
  for (const auto& a : result.per_run) runs.push_back(to_json(a));
  json mean = json::array();
  for (const auto& a : result.mean) mean.push_back(to_json(a));
  write_json(dir / "aggregate.json", json{{"config", to_json(c)},
                                          {"samples", dataset.size()},
                                          {"victim_queries", victim->ledger().total()},
                                          {"runs", runs},
                                          {"mean", mean},
                                          {"complete", true}});

  out << std::left << std::setw(13) << "method" << std::right << std::setw(10) << "orig.acc"
      << std::setw(13) << "attacked.acc" << std::setw(10) << "success" << std::setw(10) << "perturb"
      << std::setw(12) << "similarity" << std::setw(11) << "queries" << std::setw(8) << "errors"
      << "\n";
  for (const auto& a : result.mean) {
    out << std::left << std::setw(13) << to_string(a.method) << std::right << std::setw(10)
        << percent(a.original_accuracy) << std::setw(13) << percent(a.attacked_accuracy)
        << std::setw(10) << percent(a.success_rate) << std::setw(10)
        << percent(a.mean_perturbation_rate) << std::setw(12)
        << percent(a.mean_semantic_similarity) << std::setw(11) << std::fixed
        << std::setprecision(1) << a.mean_queries << std::setw(8) << a.errors << "\n";
  }
  if (bc.runs > 1) out << "(mean over " << bc.runs << " runs; per-run values in aggregate.json)\n";
  out << "reports written to " << c.out << "\n";
  return kExitSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Word-substitution adversarial attacks against black-box text classifiers"};
  app.require_subcommand(1);

  RunConfig flags;
  std::string config_path;
  std::string text;
  int label = -1;

  auto add_common = [&](CLI::App* sub) {
    std::vector<CLI::Option*> opts;
    sub->add_option("--config", config_path, "JSON config (or aggregate.json) to start from");
    opts.push_back(sub->add_option("--lexicon", flags.lexicon, "thesaurus TSV"));
    opts.push_back(sub->add_option("--embeddings", flags.embeddings, "word vectors"));
    opts.push_back(sub->add_option("--pos-lexicon", flags.pos_lexicon, "POS lexicon TSV"));
    opts.push_back(sub->add_option("--stopwords", flags.stopwords, "stopword list"));
    opts.push_back(sub->add_option("--victim", flags.victim, "builtin:linear:<path> or URL"));
    opts.push_back(sub->add_option("--z", flags.z, "candidates per word"));
    opts.push_back(sub->add_option("--pop", flags.pop, "GA population size"));
    opts.push_back(sub->add_option("--gens", flags.gens, "GA generations"));
    opts.push_back(sub->add_option("--mutation", flags.mutation, "per-position mutation probability"));
    opts.push_back(sub->add_option("--seed", flags.seed, "base RNG seed"));
    opts.push_back(sub->add_option("--budget", flags.budget, "query budget per sample (0 = unlimited)"));
    opts.push_back(sub->add_flag("--paper-faithful", flags.paper_faithful,
                                 "do not seed GA generation 0 with the last fooling assignment"));
    opts.push_back(sub->add_option("--timeout", flags.timeout_ms, "remote victim timeout (ms)"));
    opts.push_back(sub->add_option("--max-batch", flags.max_batch, "remote victim batch size"));
    return opts;
  };

  auto* attack_cmd = app.add_subcommand("attack", "attack a single text");
  auto attack_opts = add_common(attack_cmd);
  attack_cmd->add_option("text", text, "raw input text")->required();
  auto* label_opt = attack_cmd->add_option("--label", label, "true label (default: victim prediction)");

  auto* bench_cmd = app.add_subcommand("benchmark", "attack a JSONL dataset and write reports");
  auto bench_opts = add_common(bench_cmd);
  bench_opts.push_back(bench_cmd->add_option("--dataset", flags.dataset, "JSONL dataset"));
  bench_opts.push_back(bench_cmd->add_option("--runs", flags.runs, "repeat runs with derived seeds"));
  bench_opts.push_back(bench_cmd->add_option("--methods", flags.methods, "tampers,greedy-only,random"));
  bench_opts.push_back(bench_cmd->add_option("--jobs", flags.jobs, "samples attacked in parallel"));
  bench_opts.push_back(bench_cmd->add_option("--out", flags.out, "report directory"));
  bench_opts.push_back(bench_cmd->add_flag("--include-failed", flags.include_failed,
                                           "include failed attacks in perturbation means"));
  bench_opts.push_back(bench_cmd->add_option("--random-passes", flags.random_passes,
                                             "restarts for the random baseline"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitSuccess : kExitError;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw Error(ErrorKind::IoError, "cannot open config " + config_path);
      json j;
      try {
        j = json::parse(f);
      } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, config_path + ": " + e.what());
      }
      cfg = run_config_from_json(j.contains("config") ? j["config"] : j);
    }
    // Explicit flags override the config file.
    auto overlay = [&](const std::vector<CLI::Option*>& opts) {
      for (auto* o : opts) {
        if (o->count() == 0) continue;
        const std::string name = o->get_name();
        if (name == "--lexicon") cfg.lexicon = flags.lexicon;
        else if (name == "--embeddings") cfg.embeddings = flags.embeddings;
        else if (name == "--pos-lexicon") cfg.pos_lexicon = flags.pos_lexicon;
        else if (name == "--stopwords") cfg.stopwords = flags.stopwords;
        else if (name == "--victim") cfg.victim = flags.victim;
        else if (name == "--z") cfg.z = flags.z;
        else if (name == "--pop") cfg.pop = flags.pop;
        else if (name == "--gens") cfg.gens = flags.gens;
        else if (name == "--mutation") cfg.mutation = flags.mutation;
        else if (name == "--seed") cfg.seed = flags.seed;
        else if (name == "--budget") cfg.budget = flags.budget;
        else if (name == "--paper-faithful") cfg.paper_faithful = flags.paper_faithful;
        else if (name == "--timeout") cfg.timeout_ms = flags.timeout_ms;
        else if (name == "--max-batch") cfg.max_batch = flags.max_batch;
        else if (name == "--dataset") cfg.dataset = flags.dataset;
        else if (name == "--runs") cfg.runs = flags.runs;
        else if (name == "--methods") cfg.methods = flags.methods;
        else if (name == "--jobs") cfg.jobs = flags.jobs;
        else if (name == "--out") cfg.out = flags.out;
        else if (name == "--include-failed") cfg.include_failed = flags.include_failed;
        else if (name == "--random-passes") cfg.random_passes = flags.random_passes;
      }
    };

    if (attack_cmd->parsed()) {
      overlay(attack_opts);
      std::optional<int> y;
      if (label_opt->count() > 0) y = label;
      return cmd_attack(cfg, text, y, out);
    }
    overlay(bench_opts);
    return cmd_benchmark(cfg, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace tampers::cli

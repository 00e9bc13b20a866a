#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "tampers/eval.hpp"

namespace tampers::cli {

/// Everything a CLI run depends on. Embedded in the aggregate report so a run
/// can be replayed with `--config <aggregate.json>`.
struct RunConfig {
  std::string dataset;
  std::string lexicon;
  std::string embeddings;
  std::string pos_lexicon;
  std::string stopwords;  // empty = built-in English list
  std::string out = "tampers-out";
  std::string victim;     // builtin:linear:<path> | http(s)://...
  std::int64_t z = 50;
  std::int64_t pop = 10;
  std::int64_t gens = 100;
  double mutation = 0.05;
  std::uint64_t seed = 0;
  std::uint64_t budget = 0;  // 0 = unlimited
  std::int64_t runs = 1;
  std::string methods = "tampers";
  std::int64_t jobs = 1;
  bool paper_faithful = false;
  bool include_failed = false;
  std::int64_t random_passes = 10;
  std::int64_t timeout_ms = 30000;
  std::int64_t max_batch = 64;

  /// Throws ConfigError on the first invalid numeric field.
  void validate() const;
  BenchmarkConfig benchmark_config() const;
};

nlohmann::json to_json(const RunConfig& config);
/// Missing keys keep their defaults.
RunConfig run_config_from_json(const nlohmann::json& j);

enum ExitCode : int { kExitSuccess = 0, kExitError = 1, kExitAttackFailed = 2 };

/// Entry point shared by the `tampers` binary and the CLI tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tampers::cli

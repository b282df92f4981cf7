#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gprl/oracle.hpp"
#include "gprl/policy_sim.hpp"

namespace gprl::cli {

inline constexpr const char* kVersion = "gprl 1.0.0";

// Exit-code contract shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Parse failure in a config or data file; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + message),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Parses the flat `key = value` scenario config grammar (one pair per line,
// `#` comments, strict key set).  Throws ParseError on any violation.
ScenarioConfig parse_config_text(const std::string& text);
ScenarioConfig parse_config_file(const std::string& path);

// Applies a single sweepable `key = value` override to a parsed config.
// Throws ParseError (line 0) on unknown key or bad value.
void apply_override(ScenarioConfig& config, const std::string& key,
                    const std::string& value);

// Trajectory CSV (schema: step,D,beta,engaged,m_1..k,alpha_1..k,
// exploit_mass,mean_quality_1..k,kl_to_ref,loss), byte-deterministic.
std::string trajectory_csv(const std::vector<StepRecord>& records,
                           std::size_t k);

// Fully resolved manifest JSON for a run.
std::string manifest_json(const ScenarioConfig& config,
                          const std::vector<std::string>& output_files,
                          const std::string& status);

// Embedding file support for `score`: header `# k=<int>`, then one record
// per line: id plus 2k comma-separated reals.  Throws ParseError.
struct EmbeddingRecord {
  std::string id;
  PreferenceEmbedding embedding;
};
std::vector<EmbeddingRecord> parse_embedding_file(const std::string& path);

// Subcommands.  Each returns an exit code per the contract above and prints
// diagnostics to stderr.
int cmd_scenario(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed_override);
int cmd_sweep(const std::string& config_path, const std::string& sweep_key,
              const std::vector<std::string>& sweep_values,
              const std::string& out_dir,
              std::optional<std::uint64_t> seed_override);
int cmd_score(const std::string& embeddings_path,
              const std::optional<std::vector<double>>& weights,
              double epsilon, const std::string& out_path);
int cmd_verify(std::uint64_t seed, std::uint64_t trials);

}  // namespace gprl::cli

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gprl/cli.hpp"

namespace {

// Splits "key=v1,v2,..." into the key and its value list.
bool parse_sweep_spec(const std::string& spec, std::string& key,
                      std::vector<std::string>& values) {
  const std::size_t eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) return false;
  key = spec.substr(0, eq);
  std::string rest = spec.substr(eq + 1);
  std::size_t pos = 0;
  while (pos <= rest.size()) {
    const std::size_t comma = rest.find(',', pos);
    const std::string value = rest.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (value.empty()) return false;
    values.push_back(value);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return !values.empty();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GPRL preference-RL library and deterministic simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", sweep_spec, embeddings_path,
              out_path = "scores.csv";
  std::optional<std::uint64_t> seed_override;
  std::uint64_t verify_seed = 20240601;
  std::uint64_t trials = 1000;
  std::vector<double> weights;
  double epsilon = 1e-8;

  CLI::App* scenario = app.add_subcommand("scenario", "run one scenario");
  scenario->add_option("--config", config_path, "scenario config file")
      ->required();
  scenario->add_option("--out", out_dir, "output directory");
  scenario->add_option("--seed", seed_override, "seed override");

  CLI::App* sweep = app.add_subcommand("sweep", "run a one-key sweep");
  sweep->add_option("--config", config_path, "scenario config file")
      ->required();
  sweep->add_option("--sweep", sweep_spec, "sweep spec key=v1,v2,...")
      ->required();
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--seed", seed_override, "seed override");

  CLI::App* score = app.add_subcommand("score", "score an embedding file");
  score->add_option("--config", embeddings_path, "embedding file")
      ->required();
  score->add_option("--out", out_path, "output CSV path");
  score->add_option("--weights", weights, "aggregation weights")
      ->delimiter(',');
  score->add_option("--epsilon", epsilon, "normalization epsilon");

  CLI::App* verify = app.add_subcommand("verify", "run the oracle suite");
  verify->add_option("--seed", verify_seed, "oracle seed");
  verify->add_option("--trials", trials, "cases per check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return gprl::cli::kExitUsage;
  }

  if (scenario->parsed()) {
    return gprl::cli::cmd_scenario(config_path, out_dir, seed_override);
  }
  if (sweep->parsed()) {
    std::string key;
    std::vector<std::string> values;
    if (!parse_sweep_spec(sweep_spec, key, values)) {
      std::cerr << "invalid --sweep spec, expected key=v1,v2,...\n";
      return gprl::cli::kExitUsage;
    }
    return gprl::cli::cmd_sweep(config_path, key, values, out_dir,
                                seed_override);
  }
  if (score->parsed()) {
    std::optional<std::vector<double>> w;
    if (!weights.empty()) w = weights;
    return gprl::cli::cmd_score(embeddings_path, w, epsilon, out_path);
  }
  return gprl::cli::cmd_verify(verify_seed, trials);
}

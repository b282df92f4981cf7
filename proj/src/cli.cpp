#include "gprl/cli.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

namespace gprl::cli {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string trim(const std::string& s) {
  std::size_t begin = 0, end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) {
    ++begin;
  }
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) {
    --end;
  }
  return s.substr(begin, end - begin);
}

double parse_real(const std::string& value, const std::string& key,
                  std::size_t line) {
  const std::string v = trim(value);
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) {
    throw ParseError("key '" + key + "': expected a real, got '" + v + "'",
                     line);
  }
  return x;
}

std::uint64_t parse_uint(const std::string& value, const std::string& key,
                         std::size_t line) {
  const std::string v = trim(value);
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || v[0] == '-' || end != v.c_str() + v.size()) {
    throw ParseError(
        "key '" + key + "': expected an unsigned integer, got '" + v + "'",
        line);
  }
  return x;
}

// Tracks which keys appeared so scenario-dependent defaults can be resolved
// after the whole file is read.
struct ParseState {
  bool controller_set = false;
};

void apply_pair(ScenarioConfig& config, ParseState& state,
                const std::string& key, const std::string& value,
                std::size_t line) {
  const std::string v = trim(value);
  if (key == "scenario") {
    if (v == "healthy") {
      config.kind = ScenarioKind::healthy;
    } else if (v == "hacked") {
      config.kind = ScenarioKind::hacked;
    } else if (v == "corrected") {
      config.kind = ScenarioKind::corrected;
    } else {
      throw ParseError("key 'scenario': expected healthy|hacked|corrected, "
                       "got '" + v + "'", line);
    }
  } else if (key == "k") {
    config.k = parse_uint(v, key, line);
  } else if (key == "g") {
    config.g = parse_uint(v, key, line);
  } else if (key == "m") {
    config.m = parse_uint(v, key, line);
  } else if (key == "steps") {
    config.steps = parse_uint(v, key, line);
  } else if (key == "seed") {
    config.seed = parse_uint(v, key, line);
  } else if (key == "learning_rate") {
    config.learning_rate = parse_real(v, key, line);
  } else if (key == "clip_epsilon") {
    config.clip_epsilon = parse_real(v, key, line);
  } else if (key == "temperature") {
    config.temperature = parse_real(v, key, line);
  } else if (key == "angle_scale") {
    config.angle_scale = parse_real(v, key, line);
  } else if (key == "tau") {
    config.controller.tau = parse_real(v, key, line);
  } else if (key == "gamma") {
    config.controller.gamma = parse_real(v, key, line);
  } else if (key == "kappa") {
    config.controller.kappa = parse_real(v, key, line);
  } else if (key == "beta0") {
    config.controller.beta_0 = parse_real(v, key, line);
  } else if (key == "beta_max") {
    config.controller.beta_max = parse_real(v, key, line);
  } else if (key == "delta") {
    config.controller.delta = parse_real(v, key, line);
  } else if (key == "controller") {
    if (v == "on") {
      config.controller_enabled = true;
    } else if (v == "off") {
      config.controller_enabled = false;
    } else {
      throw ParseError("key 'controller': expected on|off, got '" + v + "'",
                       line);
    }
    state.controller_set = true;
  } else if (key == "normalization") {
    if (v == "per_dim") {
      config.normalization = Normalization::per_dim;
    } else if (v == "global") {
      config.normalization = Normalization::global;
    } else {
      throw ParseError("key 'normalization': expected per_dim|global, got '" +
                       v + "'", line);
    }
  } else if (key == "baseline") {
    if (v == "gprl") {
      config.baseline = BaselineMode::gprl;
    } else if (v == "grpo_scalar") {
      config.baseline = BaselineMode::grpo_scalar;
    } else {
      throw ParseError("key 'baseline': expected gprl|grpo_scalar, got '" + v +
                       "'", line);
    }
  } else if (key == "exploit_axis") {
    const std::uint64_t axis = parse_uint(v, key, line);  // 1-based in files
    if (axis == 0) {
      throw ParseError("key 'exploit_axis': axes are numbered from 1", line);
    }
    config.exploit_axis = static_cast<std::size_t>(axis - 1);
  } else {
    throw ParseError("unknown key '" + key + "'", line);
  }
}

void finalize(ScenarioConfig& config, const ParseState& state) {
  if (!state.controller_set) {
    config.controller_enabled = config.kind == ScenarioKind::corrected;
  }
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), 0);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << data;
}

// Runs one scenario into `dir`, writing trajectory.csv and manifest.json;
// returns the records for summary use.
std::vector<StepRecord> run_into(const ScenarioConfig& config,
                                 const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::vector<std::string> outputs = {"trajectory.csv",
                                            "manifest.json"};
  write_file(dir / "manifest.json",
             manifest_json(config, outputs, "running"));
  std::vector<StepRecord> records = run_scenario(config);
  write_file(dir / "trajectory.csv", trajectory_csv(records, config.k));
  write_file(dir / "manifest.json",
             manifest_json(config, outputs, "complete"));
  return records;
}

void print_report(const oracle::OracleReport& report) {
  std::cout << report.name << ": cases=" << report.case_count
            << " max_abs_error=" << fmt(report.max_abs_error)
            << " max_rel_error=" << fmt(report.max_rel_error) << " "
            << (report.passed() ? "PASS" : "FAIL") << "\n";
  for (const std::string& f : report.failures) {
    std::cout << "  failure: " << f << "\n";
  }
}

}  // namespace

ScenarioConfig parse_config_text(const std::string& text) {
  ScenarioConfig config;
  ParseState state;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("expected 'key = value', got '" + line + "'", line_no);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", line_no);
    apply_pair(config, state, key, value, line_no);
  }
  finalize(config, state);
  return config;
}

ScenarioConfig parse_config_file(const std::string& path) {
  return parse_config_text(read_file(path));
}

void apply_override(ScenarioConfig& config, const std::string& key,
                    const std::string& value) {
  ParseState state;
  state.controller_set = true;  // keep the already-resolved controller flag
  apply_pair(config, state, key, value, 0);
  if (key == "scenario") {
    // Re-resolve the controller default for the new scenario kind.
    config.controller_enabled = config.kind == ScenarioKind::corrected;
  }
  finalize(config, state);
}

std::string trajectory_csv(const std::vector<StepRecord>& records,
                           std::size_t k) {
  std::ostringstream out;
  out << "step,D,beta,engaged";
  for (std::size_t l = 1; l <= k; ++l) out << ",m_" << l;
  for (std::size_t l = 1; l <= k; ++l) out << ",alpha_" << l;
  out << ",exploit_mass";
  for (std::size_t l = 1; l <= k; ++l) out << ",mean_quality_" << l;
  out << ",kl_to_ref,loss\n";
  for (const StepRecord& r : records) {
    out << r.step << ',' << fmt(r.drift) << ',' << fmt(r.beta) << ','
        << (r.engaged ? 1 : 0);
    for (double m : r.multipliers) out << ',' << fmt(m);
    for (double a : r.alpha) out << ',' << fmt(a);
    out << ',' << fmt(r.exploit_mass);
    for (double q : r.mean_quality) out << ',' << fmt(q);
    out << ',' << fmt(r.kl_to_ref) << ',' << fmt(r.loss) << '\n';
  }
  return out.str();
}

std::string manifest_json(const ScenarioConfig& config,
                          const std::vector<std::string>& output_files,
                          const std::string& status) {
  nlohmann::json cfg;
  switch (config.kind) {
    case ScenarioKind::healthy: cfg["scenario"] = "healthy"; break;
    case ScenarioKind::hacked: cfg["scenario"] = "hacked"; break;
    case ScenarioKind::corrected: cfg["scenario"] = "corrected"; break;
  }
  cfg["k"] = config.k;
  cfg["g"] = config.g;
  cfg["m"] = config.m;
  cfg["steps"] = config.steps;
  cfg["seed"] = config.seed;
  cfg["learning_rate"] = config.learning_rate;
  cfg["clip_epsilon"] = config.clip_epsilon;
  cfg["temperature"] = config.temperature;
  cfg["angle_scale"] = config.angle_scale;
  cfg["tau"] = config.controller.tau;
  cfg["gamma"] = config.controller.gamma;
  cfg["kappa"] = config.controller.kappa;
  cfg["beta0"] = config.controller.beta_0;
  cfg["beta_max"] = config.controller.beta_max;
  cfg["delta"] = config.controller.delta;
  cfg["controller"] = config.controller_enabled ? "on" : "off";
  cfg["normalization"] =
      config.normalization == Normalization::per_dim ? "per_dim" : "global";
  cfg["baseline"] =
      config.baseline == BaselineMode::gprl ? "gprl" : "grpo_scalar";
  cfg["exploit_axis"] = config.exploit_axis + 1;  // 1-based in files

  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["seed"] = config.seed;
  manifest["status"] = status;
  manifest["outputs"] = output_files;
  manifest["config"] = cfg;
  return manifest.dump(2) + "\n";
}

std::vector<EmbeddingRecord> parse_embedding_file(const std::string& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  std::size_t k = 0;
  bool have_header = false;
  std::vector<EmbeddingRecord> records;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (!have_header) {
      if (line.rfind("# k=", 0) != 0) {
        throw ParseError("expected header '# k=<int>'", line_no);
      }
      k = static_cast<std::size_t>(
          parse_uint(line.substr(4), "k", line_no));
      if (k == 0) throw ParseError("header k must be positive", line_no);
      have_header = true;
      continue;
    }
    if (line[0] == '#') continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream fs(line);
    while (std::getline(fs, field, ',')) fields.push_back(trim(field));
    if (fields.size() != 2 * k + 1) {
      throw ParseError("expected " + std::to_string(2 * k + 1) +
                       " fields, got " + std::to_string(fields.size()),
                       line_no);
    }
    std::vector<double> components(2 * k);
    for (std::size_t i = 0; i < 2 * k; ++i) {
      components[i] = parse_real(fields[i + 1], "component", line_no);
    }
    try {
      records.push_back(
          EmbeddingRecord{fields[0], PreferenceEmbedding(components)});
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  if (!have_header) throw ParseError("missing header '# k=<int>'", 1);
  return records;
}

int cmd_scenario(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed_override) {
  try {
    ScenarioConfig config = parse_config_file(config_path);
    if (seed_override) config.seed = *seed_override;
    run_into(config, out_dir);
    return kExitOk;
  } catch (const ParseError& e) {
    std::cerr << config_path << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_sweep(const std::string& config_path, const std::string& sweep_key,
              const std::vector<std::string>& sweep_values,
              const std::string& out_dir,
              std::optional<std::uint64_t> seed_override) {
  try {
    const ScenarioConfig base = parse_config_file(config_path);
    if (sweep_values.empty()) {
      throw ParseError("sweep needs at least one value", 0);
    }
    std::ostringstream summary;
    summary << "value,final_D,max_D,final_exploit_mass,"
               "mean_aggregate_advantage\n";
    for (const std::string& value : sweep_values) {
      ScenarioConfig config = base;
      apply_override(config, sweep_key, value);
      if (seed_override) config.seed = *seed_override;
      const std::filesystem::path dir =
          std::filesystem::path(out_dir) / (sweep_key + "_" + value);
      const std::vector<StepRecord> records = run_into(config, dir);
      double max_d = 0.0, advantage_sum = 0.0;
      for (const StepRecord& r : records) {
        max_d = std::max(max_d, r.drift);
        advantage_sum += r.mean_advantage;
      }
      const StepRecord& last = records.back();
      summary << value << ',' << fmt(last.drift) << ',' << fmt(max_d) << ','
              << fmt(last.exploit_mass) << ','
              << fmt(advantage_sum / static_cast<double>(records.size()))
              << '\n';
    }
    write_file(std::filesystem::path(out_dir) / "summary.csv", summary.str());
    return kExitOk;
  } catch (const ParseError& e) {
    std::cerr << config_path << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_score(const std::string& embeddings_path,
              const std::optional<std::vector<double>>& weights,
              double epsilon, const std::string& out_path) {
  try {
    const std::vector<EmbeddingRecord> records =
        parse_embedding_file(embeddings_path);
    if (records.size() < 2) {
      throw ParseError("need at least two embedding records", 0);
    }
    std::vector<PreferenceEmbedding> group;
    group.reserve(records.size());
    for (const EmbeddingRecord& r : records) group.push_back(r.embedding);
    const std::size_t k = group[0].k();
    std::vector<double> w(k, 1.0);
    if (weights) {
      if (weights->size() != k) {
        throw ParseError("--weights length must equal k=" + std::to_string(k),
                         0);
      }
      w = *weights;
    }
    const PopulationScores scores = population_scores(score_tensor(group));
    AdvantageProfile profile = normalize_per_dimension(scores, epsilon);
    aggregate_advantage(profile, w);

    std::ostringstream out;
    out << "id";
    for (std::size_t l = 1; l <= k; ++l) out << ",s_hat_" << l;
    for (std::size_t l = 1; l <= k; ++l) out << ",A_" << l;
    out << ",A_aggregate\n";
    for (std::size_t i = 0; i < group.size(); ++i) {
      out << records[i].id;
      for (std::size_t l = 0; l < k; ++l) out << ',' << fmt(scores.s_hat[i][l]);
      for (std::size_t l = 0; l < k; ++l) {
        out << ',' << fmt(profile.per_dim[i][l]);
      }
      out << ',' << fmt(profile.aggregate[i]) << '\n';
    }
    write_file(out_path, out.str());

    // Zero-sum self-check: every column and the aggregate sum to ~0.
    std::cerr << "prop1 column sums:";
    for (std::size_t l = 0; l < k; ++l) {
      double sum = 0.0;
      for (std::size_t i = 0; i < group.size(); ++i) {
        sum += profile.per_dim[i][l];
      }
      std::cerr << ' ' << fmt(sum);
    }
    double agg_sum = 0.0;
    for (double a : profile.aggregate) agg_sum += a;
    std::cerr << " aggregate " << fmt(agg_sum) << "\n";
    return kExitOk;
  } catch (const ParseError& e) {
    std::cerr << embeddings_path << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_verify(std::uint64_t seed, std::uint64_t trials) {
  try {
    Rng rng(seed);
    std::vector<oracle::OracleReport> reports;
    reports.push_back(oracle::scores_check(trials, rng));
    reports.push_back(oracle::pipeline_check(trials, rng));
    reports.push_back(oracle::gradient_check(std::min<std::uint64_t>(
                                                 trials, 100),
                                             rng));
    for (std::size_t k : {2, 3, 6}) {
      reports.push_back(oracle::prop2_search(trials, k, rng));
    }
    bool all_pass = true;
    for (const oracle::OracleReport& r : reports) {
      print_report(r);
      all_pass = all_pass && r.passed();
    }
    return all_pass ? kExitOk : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace gprl::cli

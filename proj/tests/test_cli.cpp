#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>

#include "gprl/cli.hpp"

using namespace gprl;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gprl_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("config parsing resolves defaults and rejects unknown keys") {
  const ScenarioConfig config = cli::parse_config_text(
      "# a comment\n"
      "scenario = corrected\n"
      "k = 3\n"
      "g = 8\n"
      "seed = 7  # trailing comment\n"
      "tau = 0.25\n");
  CHECK(config.kind == ScenarioKind::corrected);
  CHECK(config.seed == 7);
  CHECK(config.controller.tau == 0.25);
  CHECK(config.controller_enabled);  // corrected defaults controller on
  CHECK(config.steps == 500);        // untouched default

  CHECK_THROWS_WITH_AS(cli::parse_config_text("taau = 0.2\n"),
                       doctest::Contains("taau"), cli::ParseError);
  try {
    cli::parse_config_text("k = 3\ntaau = 0.2\n");
    CHECK(false);
  } catch (const cli::ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(cli::parse_config_text("k = banana\n"), cli::ParseError);
  CHECK_THROWS_AS(cli::parse_config_text("scenario corrected\n"),
                  cli::ParseError);
  // Invariant violations surface as parse errors too.
  CHECK_THROWS_AS(
      cli::parse_config_text("scenario = hacked\ncontroller = on\n"),
      cli::ParseError);
  // exploit_axis is 1-based in files.
  const ScenarioConfig axis = cli::parse_config_text("exploit_axis = 2\n");
  CHECK(axis.exploit_axis == 1);
  CHECK_THROWS_AS(cli::parse_config_text("exploit_axis = 0\n"),
                  cli::ParseError);
}

TEST_CASE("apply_override mirrors the config grammar") {
  ScenarioConfig config = cli::parse_config_text("scenario = healthy\n");
  cli::apply_override(config, "g", "16");
  CHECK(config.g == 16);
  cli::apply_override(config, "tau", "inf");
  CHECK(std::isinf(config.controller.tau));
  CHECK_THROWS_AS(cli::apply_override(config, "bogus", "1"), cli::ParseError);
}

TEST_CASE("cmd_scenario writes deterministic outputs") {
  const fs::path dir = temp_dir("scenario");
  const fs::path cfg = dir / "run.cfg";
  write(cfg, "scenario = healthy\nsteps = 40\nseed = 3\nm = 24\n");

  const fs::path out1 = dir / "out1";
  const fs::path out2 = dir / "out2";
  CHECK(cli::cmd_scenario(cfg.string(), out1.string(), std::nullopt) == 0);
  CHECK(cli::cmd_scenario(cfg.string(), out2.string(), std::nullopt) == 0);

  const std::string csv1 = slurp(out1 / "trajectory.csv");
  CHECK(csv1 == slurp(out2 / "trajectory.csv"));
  CHECK(slurp(out1 / "manifest.json") == slurp(out2 / "manifest.json"));

  // Header matches the documented schema for k = 3.
  std::istringstream lines(csv1);
  std::string header;
  std::getline(lines, header);
  CHECK(header ==
        "step,D,beta,engaged,m_1,m_2,m_3,alpha_1,alpha_2,alpha_3,"
        "exploit_mass,mean_quality_1,mean_quality_2,mean_quality_3,"
        "kl_to_ref,loss");
  // 40 data rows.
  int rows = 0;
  std::string line;
  while (std::getline(lines, line)) rows += line.empty() ? 0 : 1;
  CHECK(rows == 40);

  const std::string manifest = slurp(out1 / "manifest.json");
  CHECK(manifest.find("\"status\": \"complete\"") != std::string::npos);
  CHECK(manifest.find("\"scenario\": \"healthy\"") != std::string::npos);

  // Malformed config: exit 2.
  const fs::path bad = dir / "bad.cfg";
  write(bad, "taau = 0.2\n");
  CHECK(cli::cmd_scenario(bad.string(), (dir / "out3").string(),
                          std::nullopt) == 2);
  // Missing config file: runtime failure.
  CHECK(cli::cmd_scenario((dir / "missing.cfg").string(),
                          (dir / "out4").string(), std::nullopt) == 1);
}

TEST_CASE("cmd_sweep runs one subdirectory per value") {
  const fs::path dir = temp_dir("sweep");
  const fs::path cfg = dir / "run.cfg";
  write(cfg, "scenario = corrected\nsteps = 30\nseed = 3\nm = 24\n");

  const fs::path out = dir / "out";
  CHECK(cli::cmd_sweep(cfg.string(), "g", {"2", "4", "8"}, out.string(),
                       std::nullopt) == 0);
  CHECK(fs::exists(out / "g_2" / "trajectory.csv"));
  CHECK(fs::exists(out / "g_4" / "trajectory.csv"));
  CHECK(fs::exists(out / "g_8" / "trajectory.csv"));

  const std::string summary = slurp(out / "summary.csv");
  std::istringstream lines(summary);
  std::string header;
  std::getline(lines, header);
  CHECK(header ==
        "value,final_D,max_D,final_exploit_mass,mean_aggregate_advantage");
  std::string row;
  std::vector<std::string> rows;
  while (std::getline(lines, row)) {
    if (!row.empty()) rows.push_back(row);
  }
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].rfind("2,", 0) == 0);  // summary rows follow value order
  CHECK(rows[1].rfind("4,", 0) == 0);
  CHECK(rows[2].rfind("8,", 0) == 0);

  // tau = inf never engages the controller.
  const fs::path out2 = dir / "out_tau";
  CHECK(cli::cmd_sweep(cfg.string(), "tau", {"inf"}, out2.string(),
                       std::nullopt) == 0);
  const std::string traj = slurp(out2 / "tau_inf" / "trajectory.csv");
  std::istringstream tl(traj);
  std::getline(tl, header);
  while (std::getline(tl, row)) {
    if (row.empty()) continue;
    // engaged is the 4th column.
    std::istringstream cells(row);
    std::string cell;
    for (int c = 0; c < 4; ++c) std::getline(cells, cell, ',');
    CHECK(cell == "0");
  }

  CHECK(cli::cmd_sweep(cfg.string(), "bogus", {"1"}, out.string(),
                       std::nullopt) == 2);
}

TEST_CASE("cmd_score scores an embedding file") {
  const fs::path dir = temp_dir("score");
  const fs::path embeddings = dir / "group.csv";
  write(embeddings,
        "# k=1\n"
        "a, 1.0, 0.0\n"
        "b, 0.0, 1.0\n");
  const fs::path out = dir / "scores.csv";
  CHECK(cli::cmd_score(embeddings.string(), std::nullopt, 1e-8,
                       out.string()) == 0);
  const std::string csv = slurp(out);
  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "id,s_hat_1,A_1,A_aggregate");
  std::string row_a, row_b;
  std::getline(lines, row_a);
  std::getline(lines, row_b);
  CHECK(row_a.rfind("a,-1,", 0) == 0);
  CHECK(row_b.rfind("b,1,", 0) == 0);

  // Identical embeddings: zero-sigma convention zeroes every advantage.
  const fs::path same = dir / "same.csv";
  write(same,
        "# k=1\n"
        "a, 1.0, 0.0\n"
        "b, 1.0, 0.0\n");
  CHECK(cli::cmd_score(same.string(), std::nullopt, 1e-8,
                       (dir / "same_out.csv").string()) == 0);
  const std::string same_csv = slurp(dir / "same_out.csv");
  CHECK(same_csv.find("a,0,0,0") != std::string::npos);
  CHECK(same_csv.find("b,0,0,0") != std::string::npos);

  // Format violations exit 2 with the offending line.
  const fs::path bad = dir / "bad.csv";
  write(bad,
        "# k=1\n"
        "a, 1.0\n");
  CHECK(cli::cmd_score(bad.string(), std::nullopt, 1e-8,
                       (dir / "bad_out.csv").string()) == 2);
  const fs::path noheader = dir / "noheader.csv";
  write(noheader, "a, 1.0, 0.0\n");
  CHECK(cli::cmd_score(noheader.string(), std::nullopt, 1e-8,
                       (dir / "nh_out.csv").string()) == 2);
  // Weight length mismatch is a usage error.
  std::vector<double> wrong = {1.0, 2.0};
  CHECK(cli::cmd_score(embeddings.string(), wrong, 1e-8,
                       (dir / "w_out.csv").string()) == 2);
}

TEST_CASE("cmd_verify passes with the default oracle suite") {
  CHECK(cli::cmd_verify(20240601, 200) == 0);
}

TEST_CASE("embedding parser enforces the record grammar") {
  const fs::path dir = temp_dir("embed");
  const fs::path good = dir / "good.csv";
  write(good,
        "# k=2\n"
        "x, 0.5, 0.5, 0.5, 0.5\n"
        "y, 0.70710678118654752, 0.0, 0.70710678118654752, 0.0\n");
  const auto records = cli::parse_embedding_file(good.string());
  REQUIRE(records.size() == 2);
  CHECK(records[0].id == "x");
  CHECK(records[0].embedding.k() == 2);

  // Non-unit rows are rejected with their line number.
  const fs::path off = dir / "off.csv";
  write(off,
        "# k=1\n"
        "x, 1.0, 1.0\n");
  try {
    cli::parse_embedding_file(off.string());
    CHECK(false);
  } catch (const cli::ParseError& e) {
    CHECK(e.line() == 2);
  }
}

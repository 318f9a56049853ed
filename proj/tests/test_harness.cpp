#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <json.hpp>

#include "singheat/harness.hpp"
#include "test_support.hpp"

using namespace singheat;
namespace fs = std::filesystem;

namespace {

const char* kCoarse = R"(
[problem]
potential = time_power(c=0.5, beta=1)
atom = [0, 1]
[grid]
a = -4
b = 4
h = 0.04
t_min = 0.0009765625
per_octave = 2
[probes]
point = [0]
point = [1]
psi_times = 0.1, 0.01
[sweeps]
k_list = 100, 10000, 1000000
[trace]
cell_sizes = 0.25
half_width = 0.5
)";

std::string csv_cell(const std::string& text, const std::string& row_prefix, std::size_t col) {
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line))
    if (line.rfind(row_prefix, 0) == 0) {
      std::stringstream ls(line);
      std::string cell;
      for (std::size_t i = 0; i <= col; ++i) std::getline(ls, cell, ',');
      return cell;
    }
  return "";
}

}  // namespace

TEST_CASE("subcommand list and unknown names") {
  CHECK(subcommand_names().size() == 9);
  testing_support::TempDir dir("harness-unknown");
  RunOptions o;
  o.output_dir = dir.path.string();
  CHECK_THROWS_AS(run_subcommand("bogus", parse_config(""), o), ConfigError);
  CHECK_FALSE(fs::exists(dir.path / "bogus"));
}

TEST_CASE("output directory precedence") {
  auto cfg = parse_config("[output]\ndir = from-config\n");
  ::unsetenv(kOutputDirEnv);
  CHECK(resolve_output_dir(cfg, {}) == "from-config");
  ::setenv(kOutputDirEnv, "from-env", 1);
  CHECK(resolve_output_dir(cfg, {}) == "from-env");
  RunOptions o;
  o.output_dir = "from-flag";
  CHECK(resolve_output_dir(cfg, o) == "from-flag");
  ::unsetenv(kOutputDirEnv);
}

TEST_CASE("classify reports a non-admissible Dirac for c/t") {
  testing_support::TempDir dir("harness-classify");
  RunOptions o;
  o.output_dir = dir.path.string();
  const auto r = run_subcommand("classify", parse_config(kCoarse), o);
  const auto summary = testing_support::slurp(dir.path / "classify" / "classify_summary.csv");
  CHECK(summary.find("not admissible / divergent") != std::string::npos);
  // every trail referenced from the report exists
  const auto report = testing_support::slurp(dir.path / "classify" / "classify.csv");
  std::stringstream ss(report);
  std::string line;
  std::getline(ss, line);
  std::size_t linked = 0;
  while (std::getline(ss, line)) {
    const auto pos = line.find("trails/");
    if (pos == std::string::npos) continue;
    CHECK(fs::exists(dir.path / "classify" / line.substr(pos, line.find(',', pos) - pos)));
    ++linked;
  }
  CHECK(linked > 0);
  // a negative classification is a finding, not a failed check
  CHECK(r.failures == 0);
  CHECK(r.status == 0);
}

TEST_CASE("manifest records inputs, seed, versions and outputs") {
  testing_support::TempDir dir("harness-manifest");
  RunOptions o;
  o.output_dir = dir.path.string();
  o.allow_inconclusive = true;
  const auto r = run_subcommand("psi", parse_config(kCoarse), o);
  const auto m = nlohmann::json::parse(testing_support::slurp(dir.path / "psi" / "manifest.json"));
  CHECK(m["subcommand"] == "psi");
  CHECK(m["seed"] == 20240607);
  CHECK(m["libraries"].contains("boost"));
  CHECK(m["libraries"].contains("eigen"));
  CHECK(m["config"]["entries"].size() == parse_config(kCoarse).entries.size());
  CHECK(m["outputs"].size() + 1 == r.files.size());
  for (const auto& f : r.files) CHECK(fs::exists(dir.path / "psi" / f));
  CHECK(csv_cell(testing_support::slurp(dir.path / "psi" / "singular_poles.csv"), "0,", 1) == "singular");
}

TEST_CASE("solve, reduce and trace write their evidence") {
  testing_support::TempDir dir("harness-solve");
  RunOptions o;
  o.output_dir = dir.path.string();
  o.allow_inconclusive = true;
  const auto cfg = parse_config(kCoarse);
  run_subcommand("solve", cfg, o);
  CHECK(fs::exists(dir.path / "solve" / "field" / "index.csv"));
  CHECK(fs::exists(dir.path / "solve" / "field" / "t_0.csv"));
  CHECK(fs::exists(dir.path / "solve" / "sweeps.csv"));
  run_subcommand("reduce", cfg, o);
  const auto red = testing_support::slurp(dir.path / "reduce" / "reduce.csv");
  CHECK(std::abs(std::stod(csv_cell(red, "m_star", 2))) <= 0.05);
  const auto tr = run_subcommand("trace", cfg, o);
  CHECK(fs::exists(dir.path / "trace" / "trace.csv"));
  CHECK(tr.failures == 0);
}

TEST_CASE("reruns are bit-identical") {
  testing_support::TempDir dir("harness-determinism");
  RunOptions a, b;
  a.output_dir = (dir.path / "a").string();
  b.output_dir = (dir.path / "b").string();
  a.allow_inconclusive = b.allow_inconclusive = true;
  const auto cfg = parse_config(kCoarse);
  const auto ra = run_subcommand("capacity", cfg, a);
  const auto rb = run_subcommand("capacity", cfg, b);
  REQUIRE(ra.files == rb.files);
  for (const auto& f : ra.files)
    CHECK(testing_support::slurp(fs::path(ra.output_dir) / f) == testing_support::slurp(fs::path(rb.output_dir) / f));
}

#include <doctest.h>

#include <cmath>

#include "singheat/config.hpp"
#include "test_support.hpp"

using namespace singheat;

TEST_CASE("defaults without any keys") {
  const auto cfg = parse_config("");
  CHECK(cfg.dim == 1);
  CHECK(cfg.T == 1.0);
  CHECK(cfg.potential.is_zero());
  CHECK(cfg.measure.is_zero());
  CHECK(cfg.probes.size() == 1);
  CHECK(cfg.output_dir == "singheat-out");
}

TEST_CASE("full schema") {
  const auto cfg = parse_config(R"ini(
# comment
[problem]
dim = 2
T = 0.5
potential = "hardy(c=1, gamma=1)"
atom = [0, 0, 1]
atom = [1, 0, 0.5]
init_exponent = 0.25
[grid]
a = -4
b = 4
h = 0.05
t_min = 0.01
per_octave = 2
[probes]
point = [0, 0]
point = [1, 1]
R = 1
psi_times = 0.1, 0.01
[sweeps]
R_list = 1, 2
k_list = 1, 10
delta_list = 0.1, 0.01
lambda_levels = 0.1, 0.01
[kernel]
sigma = 0.2
k = 100
[trace]
cell_sizes = 0.5, 0.25
half_width = 1
candidate = [0, 0, 1]
[tolerances]
monotone_abs = 1e-5
monotone_rel = 0.02
drift = 0.05
trace = 0.03
residual = 0.04
[output]
dir = out
seed = 7
)ini");
  CHECK(cfg.dim == 2);
  CHECK(cfg.T == 0.5);
  CHECK(cfg.grid.T == 0.5);
  CHECK(cfg.measure.total_mass() == doctest::Approx(1.5));
  CHECK(cfg.grid.ratio == doctest::Approx(std::pow(2.0, -0.5)));
  CHECK(cfg.probes.size() == 2);
  CHECK(cfg.probes[1][1] == 1.0);
  CHECK(cfg.psi_times.size() == 2);
  CHECK(cfg.k_list == std::vector<double>{1, 10});
  CHECK(cfg.candidates.size() == 1);
  CHECK(cfg.sigma == 0.2);
  CHECK(cfg.kernel_k == 100);
  CHECK(cfg.init_exponent == 0.25);
  CHECK(cfg.residual_tol == 0.04);
  CHECK(cfg.seed == 7);
  CHECK(cfg.output_dir == "out");
  CHECK(cfg.entries.size() == 31);
  CHECK(cfg.entries.front().first == "problem.dim");
}

TEST_CASE("invalid configs raise ConfigError") {
  const char* bad[] = {
      "[problem]\nunknown = 1\n",
      "[problem]\nT = 1\nT = 2\n",
      "[problem]\nT = abc\n",
      "[problem]\ndim = 4\n",
      "[problem]\natom = [0, -1]\n",
      "[problem]\natom = [0, 0, 1]\n",
      "[problem]\npotential = hardy(c=1)\n",
      "[sweeps]\nk_list = 10, 1\n",
      "[sweeps]\ndelta_list = 0.01, 0.1\n",
      "[sweeps]\nR_list = 1.003\n",
      "[tolerances]\ndrift = 0\n",
      "[probes]\npsi_times = 2\n",
      "[grid]\nh = 0.03\n",
      "[grid]\nratio = 0.5\nper_octave = 2\n",
      "[output]\nseed = -1\n",
      "not a key value line\n",
  };
  for (const char* text : bad) {
    CAPTURE(text);
    CHECK_THROWS_AS(parse_config(text), ConfigError);
  }
}

TEST_CASE("files resolve relative to the config") {
  testing_support::TempDir dir("config");
  dir.file("d.csv", "x,value\n0.05,1\n0.15,1\n");
  dir.file("v.csv", "x,t,value\n0,0.5,1\n0,1,1\n1,0.5,1\n1,1,1\n");
  const auto path = dir.file("run.ini", "[problem]\ndensity_file = d.csv\npotential = custom(file=v.csv)\n");
  const auto cfg = load_config(path);
  CHECK(cfg.measure.total_mass() == doctest::Approx(0.2));
  CHECK(cfg.potential.eval(Point{0.5}, 0.75) == doctest::Approx(1.0));
  CHECK(cfg.source == path);
  CHECK_THROWS_AS(load_config((dir.path / "missing.ini").string()), ConfigError);
  CHECK_THROWS_AS(parse_config("[problem]\ndensity_file = nowhere.csv\n", dir.path.string()), ConfigError);
}

TEST_CASE("number lists") {
  CHECK(parse_number_list("1, 2.5,3e-1") == std::vector<double>{1, 2.5, 0.3});
  CHECK(parse_number_list("[1, 2]") == std::vector<double>{1, 2});
  CHECK_THROWS_AS(parse_number_list("1,,2"), ConfigError);
}

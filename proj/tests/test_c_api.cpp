// Exercises the shared library through its C interface only.
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

#include "singheat/singheat.h"
#include "test_support.hpp"

namespace fs = std::filesystem;

TEST_CASE("version and subcommands") {
  CHECK(std::strlen(sh_version()) > 0);
  CHECK(sh_subcommand_count() == 9);
  CHECK(std::string(sh_subcommand_name(0)) == "classify");
  CHECK(sh_subcommand_name(99) == nullptr);
}

TEST_CASE("config errors carry status and message") {
  sh_config* cfg = nullptr;
  CHECK(sh_config_load("/nonexistent/run.ini", &cfg) == SH_ERR_CONFIG);
  CHECK(cfg == nullptr);
  CHECK(std::strlen(sh_last_error()) > 0);
  CHECK(sh_config_parse("[problem]\nbogus = 1\n", nullptr, &cfg) == SH_ERR_CONFIG);
  CHECK(std::string(sh_last_error()).find("bogus") != std::string::npos);
  CHECK(sh_config_parse(nullptr, nullptr, &cfg) == SH_ERR_ARGUMENT);
  CHECK(sh_config_parse("", nullptr, &cfg) == SH_OK);
  CHECK(std::string(sh_last_error()).empty());
  sh_config_free(cfg);
}

TEST_CASE("running a subcommand") {
  testing_support::TempDir dir("capi");
  sh_config* cfg = nullptr;
  REQUIRE(sh_config_parse("[problem]\npotential = time_power(c=1, beta=0.5)\natom = [0, 1]\n", nullptr, &cfg) == SH_OK);
  sh_result* res = nullptr;
  CHECK(sh_run(cfg, "nope", 0, dir.path.c_str(), &res) == SH_ERR_CONFIG);
  CHECK(res == nullptr);
  REQUIRE(sh_run(cfg, "capacity", 0, dir.path.c_str(), &res) == SH_OK);
  CHECK(sh_result_exit_status(res) == 0);
  CHECK(sh_result_failures(res) == 0);
  CHECK(sh_result_checks(res) > 0);
  CHECK(fs::path(sh_result_output_dir(res)) == dir.path / "capacity");
  REQUIRE(sh_result_file_count(res) > 0);
  for (size_t i = 0; i < sh_result_file_count(res); ++i)
    CHECK(fs::exists(fs::path(sh_result_output_dir(res)) / sh_result_file(res, i)));
  CHECK(sh_result_line_count(res) > 0);
  CHECK(sh_result_line(res, 1000) == nullptr);
  sh_result_free(res);
  sh_config_free(cfg);
}

TEST_CASE("potential and kernel helpers") {
  sh_potential* v = nullptr;
  REQUIRE(sh_potential_parse("time_power(c=0.5, beta=1)", 1, &v) == SH_OK);
  double x[1] = {0.3}, out = 0.0;
  CHECK(sh_potential_eval(v, x, 0.25, &out) == SH_OK);
  CHECK(out == doctest::Approx(2.0));
  CHECK(sh_potential_eval(v, x, 0.0, &out) == SH_ERR_DOMAIN);
  sh_potential_free(v);
  CHECK(sh_potential_parse("bad(", 1, &v) == SH_ERR_CONFIG);
  double origin[3] = {0, 0, 0};
  CHECK(sh_heat_kernel(origin, 3, 1.0, &out) == SH_OK);
  CHECK(out == doctest::Approx(std::pow(4.0 * M_PI, -1.5)));
  CHECK(sh_heat_kernel(origin, 4, 1.0, &out) == SH_ERR_DOMAIN);
}

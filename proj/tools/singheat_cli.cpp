// Command-line front end. Talks to the library only through the C API.
#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <vector>

#include "singheat/singheat.h"

namespace {

int report_error(sh_status code) {
  std::fprintf(stderr, "singheat: %s\n", sh_last_error());
  // Config problems exit with 2; everything else that stops a run counts as a numerical failure.
  return code == SH_ERR_CONFIG || code == SH_ERR_ARGUMENT ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> names;
  for (size_t i = 0; i < sh_subcommand_count(); ++i) names.emplace_back(sh_subcommand_name(i));

  CLI::App app{"Experiments with absorption-type heat equations driven by a config file."};
  app.set_version_flag("--version", std::string(sh_version()));
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  bool allow_inconclusive = false;
  bool quiet = false;
  for (const auto& name : names) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("-c,--config", config_path, "experiment config file")->required();
    sub->add_option("-o,--output", output_dir, "base output directory (overrides SINGHEAT_OUTPUT_DIR and the config)");
    sub->add_flag("--allow-inconclusive", allow_inconclusive, "exit 0 even when some verdicts are inconclusive");
    sub->add_flag("-q,--quiet", quiet, "print only the output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string subcommand = app.get_subcommands().front()->get_name();

  sh_config* cfg = nullptr;
  if (sh_status s = sh_config_load(config_path.c_str(), &cfg); s != SH_OK) return report_error(s);

  sh_result* result = nullptr;
  const sh_status s = sh_run(cfg, subcommand.c_str(), allow_inconclusive ? 1 : 0,
                             output_dir.empty() ? nullptr : output_dir.c_str(), &result);
  sh_config_free(cfg);
  if (s != SH_OK) return report_error(s);

  if (!quiet)
    for (size_t i = 0; i < sh_result_line_count(result); ++i) std::printf("%s\n", sh_result_line(result, i));
  std::printf("%s: %zu checks, %zu failed, %zu inconclusive; outputs in %s\n", subcommand.c_str(),
              sh_result_checks(result), sh_result_failures(result), sh_result_inconclusive(result),
              sh_result_output_dir(result));
  const int status = sh_result_exit_status(result);
  sh_result_free(result);
  return status;
}

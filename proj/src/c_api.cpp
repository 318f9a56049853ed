#include "singheat/singheat.h"

#include <exception>
#include <new>
#include <string>

#include "singheat/config.hpp"
#include "singheat/harness.hpp"
#include "singheat/kernel.hpp"
#include "singheat/potentials.hpp"

struct sh_config {
  singheat::ExperimentConfig cfg;
};

struct sh_result {
  singheat::RunSummary summary;
};

struct sh_potential {
  singheat::Potential v;
};

namespace {

thread_local std::string last_error;

sh_status fail(sh_status code, const std::string& msg) {
  last_error = msg;
  return code;
}

/// Maps library exceptions to status codes; every entry point funnels through here.
template <class F>
sh_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return SH_OK;
  } catch (const singheat::ConfigError& e) {
    return fail(SH_ERR_CONFIG, e.what());
  } catch (const singheat::DomainError& e) {
    return fail(SH_ERR_DOMAIN, e.what());
  } catch (const singheat::NumericalError& e) {
    return fail(SH_ERR_NUMERICAL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SH_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SH_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SH_ERR_INTERNAL, "unknown exception");
  }
}

const char* item(const std::vector<std::string>& v, std::size_t i) { return i < v.size() ? v[i].c_str() : nullptr; }

}  // namespace

extern "C" {

const char* sh_version(void) { return "0.1.0"; }

const char* sh_last_error(void) { return last_error.c_str(); }

sh_status sh_config_load(const char* path, sh_config** out) {
  if (!path || !out) return fail(SH_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new sh_config{singheat::load_config(path)}; });
}

sh_status sh_config_parse(const char* text, const char* base_dir, sh_config** out) {
  if (!text || !out) return fail(SH_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new sh_config{singheat::parse_config(text, base_dir ? base_dir : ".")}; });
}

void sh_config_free(sh_config* cfg) { delete cfg; }

size_t sh_subcommand_count(void) { return singheat::subcommand_names().size(); }

const char* sh_subcommand_name(size_t index) { return item(singheat::subcommand_names(), index); }

sh_status sh_run(const sh_config* cfg, const char* subcommand, int allow_inconclusive, const char* output_dir,
                 sh_result** out) {
  if (!cfg || !subcommand || !out) return fail(SH_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    singheat::RunOptions opts;
    opts.allow_inconclusive = allow_inconclusive != 0;
    if (output_dir) opts.output_dir = output_dir;
    *out = new sh_result{singheat::run_subcommand(subcommand, cfg->cfg, opts)};
  });
}

void sh_result_free(sh_result* result) { delete result; }

int sh_result_exit_status(const sh_result* r) { return r ? r->summary.status : SH_ERR_ARGUMENT; }
size_t sh_result_checks(const sh_result* r) { return r ? r->summary.checks : 0; }
size_t sh_result_failures(const sh_result* r) { return r ? r->summary.failures : 0; }
size_t sh_result_inconclusive(const sh_result* r) { return r ? r->summary.inconclusive : 0; }
const char* sh_result_output_dir(const sh_result* r) { return r ? r->summary.output_dir.c_str() : nullptr; }
size_t sh_result_file_count(const sh_result* r) { return r ? r->summary.files.size() : 0; }
const char* sh_result_file(const sh_result* r, size_t i) { return r ? item(r->summary.files, i) : nullptr; }
size_t sh_result_line_count(const sh_result* r) { return r ? r->summary.lines.size() : 0; }
const char* sh_result_line(const sh_result* r, size_t i) { return r ? item(r->summary.lines, i) : nullptr; }

sh_status sh_potential_parse(const char* text, int dim, sh_potential** out) {
  if (!text || !out) return fail(SH_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new sh_potential{singheat::Potential::parse(text, dim)}; });
}

void sh_potential_free(sh_potential* v) { delete v; }

sh_status sh_potential_eval(const sh_potential* v, const double* x, double t, double* out) {
  if (!v || !x || !out) return fail(SH_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    singheat::Point p{};
    for (int i = 0; i < v->v.dim(); ++i) p[i] = x[i];
    *out = v->v.eval(p, t);
  });
}

sh_status sh_heat_kernel(const double* x, int n, double t, double* out) {
  if (!x || !out) return fail(SH_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    singheat::check_dim(n);
    singheat::Point p{};
    for (int i = 0; i < n; ++i) p[i] = x[i];
    *out = singheat::heat_kernel(p, t, n);
  });
}

}  // extern "C"

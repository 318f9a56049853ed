#include "singheat/harness.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>

#include "csv.hpp"
#include "singheat/classify.hpp"
#include "singheat/kernel.hpp"
#include "singheat/solver.hpp"
#include "singheat/trace.hpp"
#include "singheat/validate.hpp"

namespace singheat {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

/// Collects the files of one run and the tallies behind the exit status.
class Run {
 public:
  Run(std::string name, const ExperimentConfig& cfg, std::string dir) : name_(std::move(name)), cfg_(cfg) {
    summary.output_dir = std::move(dir);
    fs::remove_all(summary.output_dir);
    fs::create_directories(summary.output_dir);
  }

  const ExperimentConfig& cfg() const { return cfg_; }
  int dim() const { return cfg_.dim; }

  std::string path(const std::string& rel) {
    const fs::path p = fs::path(summary.output_dir) / rel;
    fs::create_directories(p.parent_path());
    summary.files.push_back(rel);
    return p.string();
  }

  /// Writes the trail and returns its relative path, for the `trail` column of a report row.
  std::string trail(const QuadratureTrail& t, const std::string& stem) {
    const std::string rel = "trails/" + stem + ".csv";
    t.write_csv(path(rel));
    return rel;
  }

  /// One CSV per snapshot (coordinates and value) plus an index with times and masses.
  std::string field(const Field& f, const std::string& stem) {
    const int n = f.grid.dim;
    std::vector<std::string> head;
    for (int k = 0; k < n; ++k) head.push_back("x" + std::to_string(k + 1));
    head.push_back("u");
    csv::Writer index(path(stem + "/index.csv"));
    index.header({"snapshot", "t", "file", "mass", "absorbed_mass", "sup"});
    for (std::size_t j = 0; j < f.times.size(); ++j) {
      const std::string rel = stem + "/t_" + std::to_string(j) + ".csv";
      csv::Writer w(path(rel));
      w.header(head);
      for (std::size_t i = 0; i < f.node_count(); ++i) {
        const Point x = f.grid.node(i);
        std::string row;
        for (int k = 0; k < n; ++k) row += format_double(x[k]) + ",";
        w.row(row + format_double(f.values[j][i]));
      }
      double sup = 0.0;
      for (double v : f.values[j]) sup = std::max(sup, v);
      index.row(j, f.times[j], rel, f.mass(j), f.absorbed_mass(j), sup);
    }
    return stem + "/index.csv";
  }

  std::string coords(const Point& p) const {
    std::string s;
    for (int k = 0; k < dim(); ++k) s += (k ? " " : "") + format_double(p[k]);
    return s;
  }

  void check(bool ok) {
    ++summary.checks;
    if (!ok) ++summary.failures;
  }
  void verdict(Outcome o) {
    ++summary.checks;
    if (o == Outcome::inconclusive) ++summary.inconclusive;
  }
  void inconclusive(bool yes) {
    ++summary.checks;
    if (yes) ++summary.inconclusive;
  }
  void line(std::string s) { summary.lines.push_back(std::move(s)); }

  void finish(const RunOptions& opts) {
    nlohmann::ordered_json m;
    m["tool"] = "singheat";
    m["version"] = kVersion;
    m["subcommand"] = name_;
    m["config"]["source"] = cfg_.source;
    nlohmann::ordered_json entries = nlohmann::ordered_json::array();
    for (const auto& [k, v] : cfg_.entries) entries.push_back({k, v});
    m["config"]["entries"] = entries;
    m["resolved"]["dim"] = cfg_.dim;
    m["resolved"]["T"] = format_double(cfg_.T);
    m["resolved"]["potential"] = cfg_.potential.describe();
    m["resolved"]["atoms"] = cfg_.measure.atoms().size();
    m["resolved"]["density"] = cfg_.measure.density().has_value();
    m["resolved"]["total_mass"] = format_double(cfg_.measure.total_mass());
    m["resolved"]["grid"] = {{"a", format_double(cfg_.grid.a)},         {"b", format_double(cfg_.grid.b)},
                             {"h", format_double(cfg_.grid.h)},         {"ratio", format_double(cfg_.grid.ratio)},
                             {"t_min", format_double(cfg_.grid.t_min)}};
    m["seed"] = cfg_.seed;
    m["allow_inconclusive"] = opts.allow_inconclusive;
    m["libraries"] = {{"boost", BOOST_LIB_VERSION},
                      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                    std::to_string(EIGEN_MINOR_VERSION)}};
    m["counts"] = {{"checks", summary.checks}, {"failures", summary.failures}, {"inconclusive", summary.inconclusive}};
    m["outputs"] = summary.files;
    const fs::path p = fs::path(summary.output_dir) / "manifest.json";
    std::ofstream(p) << m.dump(2) << '\n';
    summary.files.push_back("manifest.json");
    summary.status = summary.failures > 0 || (summary.inconclusive > 0 && !opts.allow_inconclusive) ? 1 : 0;
  }

  RunSummary summary;

 private:
  std::string name_;
  const ExperimentConfig& cfg_;
};

std::string label(const std::string& prefix, std::size_t i) { return prefix + "_" + std::to_string(i); }

/// Rows for a classification report: one per probe, each linked to its trail file.
void write_report(Run& run, csv::Writer& w, const ClassificationReport& rep, const std::string& stem) {
  for (std::size_t i = 0; i < rep.probes.size(); ++i) {
    const auto& p = rep.probes[i];
    const std::string trail = p.trail.values.empty() ? std::string("-") : run.trail(p.trail, label(stem, i));
    w.row(rep.criterion, p.label, run.coords(p.point), p.value, p.weighted, to_string(p.verdict), trail,
          p.note.empty() ? std::string("-") : p.note);
  }
}

void write_constants(csv::Writer& w, const ClassificationReport& rep) {
  w.row(rep.criterion, std::string("verdict"), to_string(rep.verdict), rep.note.empty() ? std::string("-") : rep.note);
  for (const auto& [k, v] : rep.constants) w.row(rep.criterion, k, format_double(v), std::string("-"));
}

const std::vector<std::string> kReportHeader{"criterion", "probe", "point", "value", "weighted", "verdict", "trail", "note"};
const std::vector<std::string> kConstHeader{"criterion", "name", "value", "note"};

Field initial_field(const ExperimentConfig& cfg) {
  if (cfg.init_exponent == 0.0) return step_solve(cfg.potential, cfg.grid, cfg.measure, cfg.grid.t_min, cfg.T);
  // A Dirac start carries no damping for non-integrable V, so the power-weighted profile is used as is.
  const auto init = initial_profile(cfg.grid, cfg.measure, cfg.grid.t_min,
                                    std::pow(cfg.grid.t_min, -cfg.init_exponent), true);
  Field f = step_solve(cfg.potential, cfg.grid, init, cfg.grid.t_min, cfg.T);
  f.source = cfg.measure;
  f.provenance += "; start t_min^-" + format_double(cfg.init_exponent) + " H[mu]";
  return f;
}

void classify_cmd(Run& run) {
  const auto& c = run.cfg();
  const auto adm = admissibility(c.potential, c.measure, c.R, c.T);
  const auto sub = subcritical_check(c.potential, c.R, c.T, c.probes);
  StrongSubcriticalOptions so;
  so.seed = c.seed;
  const auto strong = strong_subcritical_sufficient(c.potential, c.T, c.probes, c.lambda_levels, so);
  csv::Writer w(run.path("classify.csv"));
  w.header(kReportHeader);
  write_report(run, w, adm, "admissibility");
  write_report(run, w, sub, "subcritical");
  write_report(run, w, strong, "strong_subcritical");
  csv::Writer s(run.path("classify_summary.csv"));
  s.header(kConstHeader);
  const std::string adm_text = adm.verdict == Outcome::divergent ? "not admissible / divergent"
                               : adm.verdict == Outcome::pass    ? "admissible / converged"
                                                                 : "inconclusive";
  s.row(std::string("admissibility"), std::string("classification"), adm_text, std::string("-"));
  for (const auto* r : {&adm, &sub, &strong}) {
    write_constants(s, *r);
    run.verdict(r->verdict);
  }
  run.line("admissibility: " + adm_text);
  run.line("subcritical: " + to_string(sub.verdict));
  run.line("strong subcritical (sufficient condition): " + to_string(strong.verdict));
}

void scan_cmd(Run& run) {
  const auto& c = run.cfg();
  const auto rep = singular_scan(c.potential, c.T, c.probes);
  csv::Writer w(run.path("scan.csv"));
  w.header(kReportHeader);
  write_report(run, w, rep, "scan");
  csv::Writer s(run.path("scan_summary.csv"));
  s.header(kConstHeader);
  write_constants(s, rep);
  run.verdict(rep.verdict);
  run.check(rep.verdict != Outcome::fail);
  run.line("singular probes: " + format_double(rep.constant("singular_probes")) + " of " +
           std::to_string(rep.probes.size()));
}

void capacity_cmd(Run& run) {
  const auto& c = run.cfg();
  std::vector<TestFunction> family{{"constant on the grid box", c.grid.box(), 1.0},
                                   {"constant on the cube of half-width R", Box::cube(c.dim, -c.R, c.R), 1.0}};
  const auto rep = capacity_dual_check(c.potential, c.T, c.probes, family);
  csv::Writer w(run.path("capacity.csv"));
  w.header(kReportHeader);
  write_report(run, w, rep, "capacity");
  csv::Writer s(run.path("capacity_summary.csv"));
  s.header(kConstHeader);
  write_constants(s, rep);
  run.verdict(rep.verdict);
  run.check(rep.verdict != Outcome::fail);
  run.line("capacity: " + format_double(rep.constant("capacity")));
  if (rep.has("best_bound")) run.line("best dual bound: " + format_double(rep.constant("best_bound")));
}

void psi_cmd(Run& run) {
  const auto& c = run.cfg();
  csv::Writer w(run.path("psi.csv"));
  w.header({"point", "t", "psi", "verdict", "trail"});
  csv::Writer s(run.path("singular_poles.csv"));
  s.header({"point", "verdict", "trail"});
  for (std::size_t p = 0; p < c.probes.size(); ++p) {
    for (std::size_t j = 0; j < c.psi_times.size(); ++j) {
      const auto tr = psi_trail(c.potential, c.probes[p], c.psi_times[j], c.T);
      const double v = tr.divergent() ? kInfinity : tr.value;
      w.row(run.coords(c.probes[p]), c.psi_times[j], v, to_string(tr.verdict),
            run.trail(tr, "psi_" + std::to_string(p) + "_" + std::to_string(j)));
      run.inconclusive(tr.verdict == Verdict::inconclusive);
    }
    const auto f = pole_criterion(c.potential, c.probes[p], c.T);
    s.row(run.coords(c.probes[p]), to_string(f.verdict), run.trail(f.trail, label("pole", p)));
    run.inconclusive(f.verdict == Singularity::inconclusive);
    run.line("point " + run.coords(c.probes[p]) + ": " + to_string(f.verdict));
  }
}

void write_sweep(Run& run, csv::Writer& w, const std::string& scheme, const SweepResult& r) {
  for (std::size_t i = 0; i < r.parameters.size(); ++i) {
    const auto& f = r.members[i];
    const std::size_t last = f.times.size() - 1;
    w.row(scheme, r.parameters[i], f.mass(last), f.absorbed_mass(last), r.monotone.ok ? "monotone" : "violated",
          r.monotone.worst, r.converged ? "converged" : "not yet converged",
          r.monotone.witness.empty() ? std::string("-") : r.monotone.witness);
  }
  run.check(r.monotone.ok);
  run.inconclusive(!r.converged);
  run.line(scheme + ": " + (r.monotone.ok ? "monotone" : "monotonicity violated") + ", " +
           (r.converged ? "converged" : "not yet converged"));
}

void solve_cmd(Run& run) {
  const auto& c = run.cfg();
  const Field u = initial_field(c);
  const std::string index = run.field(u, "field");
  const auto cmp = comparison_check(u, c.measure, c.monotone_abs, c.monotone_rel);
  csv::Writer s(run.path("solve.csv"));
  s.header({"quantity", "value", "evidence"});
  s.row(std::string("final_mass"), u.mass(u.times.size() - 1), index);
  s.row(std::string("absorbed_mass"), u.absorbed_mass(u.times.size() - 1), index);
  s.row(std::string("comparison_worst"), cmp.worst, index);
  if (c.init_exponent == 0.0) run.check(cmp.ok);
  run.line("solved " + std::to_string(u.times.size()) + " snapshots; comparison " + (cmp.ok ? "holds" : "violated"));

  SweepOptions so;
  so.abs_tol = c.monotone_abs;
  so.rel_tol = c.monotone_rel;
  so.throw_on_violation = false;
  csv::Writer w(run.path("sweeps.csv"));
  w.header({"scheme", "parameter", "final_mass", "absorbed_mass", "monotone", "worst", "limit", "witness"});
  if (!c.R_list.empty()) write_sweep(run, w, "exhaustion", solve_exhaustion(c.potential, c.measure, c.R_list, c.grid, so));
  if (!c.k_list.empty())
    write_sweep(run, w, "level_truncation", solve_level_truncation(c.potential, c.measure, c.k_list, c.grid, so));
  if (!c.delta_list.empty())
    write_sweep(run, w, "time_truncation", solve_time_truncation(c.potential, c.measure, c.delta_list, c.grid, so));
}

void reduce_cmd(Run& run) {
  const auto& c = run.cfg();
  SweepOptions so;
  so.abs_tol = c.monotone_abs;
  so.rel_tol = c.monotone_rel;
  const auto r = reduce(c.potential, c.measure, c.grid, c.k_list, so, c.drift_tol);
  const std::string index = run.field(r.u_star, "u_star");
  csv::Writer w(run.path("reduce.csv"));
  w.header({"quantity", "t", "value", "evidence"});
  for (std::size_t i = 0; i < r.probe_times.size(); ++i)
    w.row(std::string("mass_balance"), r.probe_times[i], r.probe_masses[i], index);
  w.row(std::string("m_star"), 0.0, r.m_star, index);
  w.row(std::string("drift"), 0.0, r.drift, index);
  w.row(std::string("initial_layer"), 0.0, r.layer, index);
  const double total = c.measure.total_mass();
  if (total > 0.0) {
    // The truncated member's own early absorption includes what the limit removes at t = 0, so
    // the layer is taken from the limit potential.
    const auto d = duhamel_residual(r.u_star, c.potential, c.measure.scaled(r.m_star / total), {}, {}, r.layer);
    w.row(std::string("duhamel_residual"), d.worst_t, d.residual, index);
    run.check(d.residual <= c.residual_tol);
    run.line("Duhamel residual against the reduced measure: " + format_double(d.residual));
  }
  csv::Writer s(run.path("reduce_summary.csv"));
  s.header({"verdict", "sweep", "note"});
  s.row(to_string(r.verdict), r.sweep_converged ? "converged" : "not yet converged",
        r.note.empty() ? std::string("-") : r.note);
  run.verdict(r.verdict);
  run.line("m* = " + format_double(r.m_star) + " (drift " + format_double(r.drift) + ", " + to_string(r.verdict) + ")");
}

void kernel_cmd(Run& run) {
  const auto& c = run.cfg();
  // Below about five nodes per standard deviation the grid overshoots the kernel bulk.
  const double sigma = c.sigma > 0.0 ? c.sigma : std::max(std::sqrt(2.0 * c.grid.t_min), 5.0 * c.grid.h);
  const auto est = kernel_estimate(c.potential, c.probes.front(), c.grid, sigma, c.kernel_k);
  const std::string index = run.field(est.field, "kernel");
  RepresentationOptions ro;
  ro.source = c.probes.front();
  ro.sigma = sigma;
  ro.k = c.kernel_k;
  const auto rep = representation_check(c.potential, c.grid, ro);
  csv::Writer w(run.path("kernel.csv"));
  w.header({"quantity", "value", "evidence"});
  w.row(std::string("sigma"), sigma, index);
  w.row(std::string("k"), est.k, index);
  w.row(std::string("max_ratio_to_free_kernel"), est.max_ratio, index);
  w.row(std::string("c_fit"), rep.c_fit, index);
  w.row(std::string("gamma_fit"), rep.gamma_fit, index);
  w.row(std::string("c1"), rep.c1, index);
  w.row(std::string("gamma1"), rep.gamma1, index);
  w.row(std::string("c2"), rep.c2, index);
  w.row(std::string("gamma2"), rep.gamma2, index);
  w.row(std::string("probes"), static_cast<double>(rep.probes), index);
  w.row(std::string("envelope_ok"), rep.envelope_ok ? 1.0 : 0.0, rep.witness.empty() ? index : rep.witness);
  run.check(rep.envelope_ok);
  run.check(est.max_ratio <= 1.01);
  run.line("kernel ratio to the free kernel: " + format_double(est.max_ratio) + "; envelope " +
           (rep.envelope_ok ? "holds" : "violated: " + rep.witness));
}

void trace_cmd(Run& run) {
  const auto& c = run.cfg();
  const Field u = initial_field(c);
  TraceOptions to;
  to.cell_sizes = c.cell_sizes;
  to.half_width = c.trace_half_width;
  const auto tr = initial_trace(u, c.potential, to);
  csv::Writer w(run.path("trace.csv"));
  std::vector<std::string> head;
  for (int k = 0; k < c.dim; ++k) head.push_back("lo" + std::to_string(k + 1));
  for (int k = 0; k < c.dim; ++k) head.push_back("hi" + std::to_string(k + 1));
  for (const char* h : {"verdict", "mass", "mass_method", "exponent", "blowup", "size_verdicts", "trail"}) head.push_back(h);
  w.header(head);
  for (std::size_t i = 0; i < tr.cells.size(); ++i) {
    const auto& cell = tr.cells[i];
    std::string row;
    for (int k = 0; k < c.dim; ++k) row += format_double(cell.cell.lo[k]) + ",";
    for (int k = 0; k < c.dim; ++k) row += format_double(cell.cell.hi[k]) + ",";
    std::string sizes;
    for (std::size_t s = 0; s < cell.size_verdicts.size(); ++s) sizes += (s ? " " : "") + to_string(cell.size_verdicts[s]);
    w.row(row + to_string(cell.cls), cell.mass, cell.mass_method, cell.exponent, cell.blowup ? 1 : 0, sizes,
          run.trail(cell.trail, label("cell", i)));
    run.inconclusive(cell.cls == CellClass::inconclusive);
  }
  const auto lb = trace_lower_bound_check(u, tr, c.potential, c.trace_tol);
  const auto C1 = c.potential.c1_bound(c.T);
  HarnackOptions ho;
  ho.min_time_fraction = 0.1;
  const auto h = harnack_audit(u, C1.value_or(0.0), ho);
  csv::Writer s(run.path("trace_summary.csv"));
  s.header({"quantity", "value", "note"});
  s.row(std::string("regular_cells"), static_cast<double>(tr.count(CellClass::regular)), std::string("trace.csv"));
  s.row(std::string("singular_cells"), static_cast<double>(tr.count(CellClass::singular)), std::string("trace.csv"));
  s.row(std::string("inconclusive_cells"), static_cast<double>(tr.count(CellClass::inconclusive)), std::string("trace.csv"));
  s.row(std::string("lower_bound_excess"), lb.max_excess, std::string(lb.ok ? "u dominates" : "violated"));
  s.row(std::string("harnack_constant"), h.constant, h.witness.empty() ? std::string("-") : h.witness);
  run.check(lb.ok);
  run.line("cells: " + std::to_string(tr.count(CellClass::regular)) + " regular, " +
           std::to_string(tr.count(CellClass::singular)) + " singular, " +
           std::to_string(tr.count(CellClass::inconclusive)) + " inconclusive");
  if (c.candidates.empty() || tr.count(CellClass::singular) == 0) return;
  const auto sw = sweep_trace(u, c.potential, c.candidates, c.k_list, to, c.trace_tol);
  csv::Writer sv(run.path("sweep.csv"));
  sv.header({"candidate", "m_star", "cell", "gamma", "candidate_mass", "nu_s"});
  for (std::size_t k = 0; k < sw.candidates.size(); ++k)
    for (std::size_t i = 0; i < sw.candidates[k].gamma.size(); ++i)
      sv.row(k, sw.candidates[k].m_star, i, sw.candidates[k].gamma[i], sw.candidates[k].mu_cells[i], sw.nu_s[i]);
  bool below = true;
  for (const auto& cand : sw.candidates) below = below && cand.below_candidate;
  run.check(below);
  run.check(sw.nested_monotone);
  run.line(std::string("sweep: swept traces ") + (below ? "below" : "above") + " their candidates; nesting " +
           (sw.nested_monotone ? "respected" : "violated"));
}

void validate_cmd(Run& run) {
  const auto results = run_oracle_suite();
  csv::Writer w(run.path("validate.csv"));
  w.header({"module", "check", "value", "expected", "tolerance", "result", "detail"});
  std::size_t passed = 0;
  for (const auto& r : results) {
    w.row(r.module, r.name, r.value, r.expected, r.tolerance, r.passed ? "pass" : "FAIL",
          r.detail.empty() ? std::string("-") : r.detail);
    run.check(r.passed);
    if (r.passed) ++passed;
    else run.line("FAIL " + r.module + ": " + r.name + " (" + format_double(r.value) + ") " + r.detail);
  }
  run.line(std::to_string(passed) + " of " + std::to_string(results.size()) + " oracle checks passed");
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names{"classify", "scan",   "capacity", "psi",     "solve",
                                              "reduce",   "kernel", "trace",    "validate"};
  return names;
}

std::string resolve_output_dir(const ExperimentConfig& cfg, const RunOptions& opts) {
  if (!opts.output_dir.empty()) return opts.output_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return cfg.output_dir;
}

RunSummary run_subcommand(const std::string& name, const ExperimentConfig& cfg, const RunOptions& opts) {
  static const std::map<std::string, void (*)(Run&)> table{
      {"classify", classify_cmd}, {"scan", scan_cmd},     {"capacity", capacity_cmd},
      {"psi", psi_cmd},           {"solve", solve_cmd},   {"reduce", reduce_cmd},
      {"kernel", kernel_cmd},     {"trace", trace_cmd},   {"validate", validate_cmd}};
  const auto it = table.find(name);
  if (it == table.end()) throw ConfigError("unknown subcommand '" + name + "'");
  Run run(name, cfg, (fs::path(resolve_output_dir(cfg, opts)) / name).string());
  it->second(run);
  run.finish(opts);
  return run.summary;
}

}  // namespace singheat

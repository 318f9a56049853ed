#include "singheat/config.hpp"

#include <boost/program_options/parsers.hpp>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace singheat {

namespace po = boost::program_options;
namespace fs = std::filesystem;

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string unquote(std::string s) {
  s = trim(std::move(s));
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

double to_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument("trailing characters");
    if (!std::isfinite(v)) throw std::invalid_argument("not finite");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": not a finite number: '" + text + "'");
  }
}

std::string resolve(const std::string& base, const std::string& file) {
  fs::path p(file);
  if (p.is_relative()) p = fs::path(base) / p;
  if (!fs::exists(p)) throw ConfigError("referenced file does not exist: '" + p.string() + "'");
  return p.lexically_normal().string();
}

/// custom(file=x.csv) -> custom(file=<base>/x.csv)
std::string resolve_potential_files(const std::string& spec, const std::string& base) {
  const auto pos = spec.find("file=");
  if (pos == std::string::npos) return spec;
  const auto start = pos + 5;
  auto end = spec.find_first_of(",)", start);
  if (end == std::string::npos) end = spec.size();
  const std::string file = trim(spec.substr(start, end - start));
  return spec.substr(0, start) + resolve(base, file) + spec.substr(end);
}

Point to_point(const std::string& key, const std::vector<double>& v, int dim) {
  if (static_cast<int>(v.size()) != dim)
    throw ConfigError(key + ": expected " + std::to_string(dim) + " coordinates, got " + std::to_string(v.size()));
  Point p{};
  for (int i = 0; i < dim; ++i) p[i] = v[i];
  return p;
}

Atom to_atom(const std::string& key, const std::vector<double>& v, int dim) {
  if (static_cast<int>(v.size()) != dim + 1)
    throw ConfigError(key + ": expected " + std::to_string(dim) + " coordinates and a weight");
  Atom a;
  for (int i = 0; i < dim; ++i) a.x[i] = v[i];
  a.weight = v[dim];
  if (!(a.weight > 0.0)) throw ConfigError(key + ": atom weights must be > 0");
  return a;
}

const std::set<std::string> kKnownKeys = {
    "problem.dim",        "problem.T",           "problem.potential",  "problem.atom",
    "problem.density_file", "problem.init_exponent", "grid.a",          "grid.b",
    "grid.h",             "grid.t_min",          "grid.ratio",         "grid.per_octave",
    "probes.point",       "probes.R",            "probes.psi_times",   "sweeps.R_list",
    "sweeps.k_list",      "sweeps.delta_list",   "sweeps.lambda_levels", "kernel.sigma",
    "kernel.k",           "trace.cell_sizes",    "trace.half_width",   "trace.candidate",
    "tolerances.monotone_abs", "tolerances.monotone_rel", "tolerances.drift", "tolerances.trace",
    "tolerances.residual", "output.dir",         "output.seed"};

const std::set<std::string> kRepeatable = {"problem.atom", "probes.point", "trace.candidate"};

ExperimentConfig build(std::istream& in, const std::string& source, const std::string& base) {
  ExperimentConfig cfg;
  cfg.source = source;
  po::parsed_options parsed(nullptr);
  try {
    parsed = po::parse_config_file(in, po::options_description(), true);
  } catch (const po::error& e) {
    throw ConfigError(source + ": " + e.what());
  }

  std::multimap<std::string, std::string> kv;
  for (const auto& opt : parsed.options) {
    const std::string& key = opt.string_key;
    if (!kKnownKeys.count(key)) throw ConfigError(source + ": unknown key '" + key + "'");
    const std::string value = opt.value.empty() ? std::string() : opt.value.front();
    if (!kRepeatable.count(key) && kv.count(key)) throw ConfigError(source + ": duplicate key '" + key + "'");
    kv.emplace(key, value);
    cfg.entries.emplace_back(key, value);
  }
  auto get = [&](const std::string& key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  auto number = [&](const std::string& key, double& target) {
    if (const auto* v = get(key)) target = to_number(key, *v);
  };
  auto list = [&](const std::string& key, std::vector<double>& target) {
    if (const auto* v = get(key)) {
      try {
        target = parse_number_list(*v);
      } catch (const ConfigError& e) {
        throw ConfigError(key + ": " + e.what());
      }
    }
  };
  auto all = [&](const std::string& key) {
    std::vector<std::vector<double>> out;
    auto [lo, hi] = kv.equal_range(key);
    for (auto it = lo; it != hi; ++it) out.push_back(parse_number_list(it->second));
    return out;
  };

  if (const auto* v = get("problem.dim")) {
    const double d = to_number("problem.dim", *v);
    if (d != 1.0 && d != 2.0 && d != 3.0) throw ConfigError("problem.dim must be 1, 2 or 3");
    cfg.dim = static_cast<int>(d);
  }
  const int n = cfg.dim;
  number("problem.T", cfg.T);
  if (!(cfg.T > 0.0)) throw ConfigError("problem.T must be > 0");
  if (const auto* v = get("problem.potential")) cfg.potential_spec = unquote(*v);
  try {
    cfg.potential = Potential::parse(resolve_potential_files(cfg.potential_spec, base), n);
  } catch (const Error& e) {
    throw ConfigError(std::string("problem.potential: ") + e.what());
  }
  number("problem.init_exponent", cfg.init_exponent);

  std::vector<Atom> atoms;
  for (const auto& v : all("problem.atom")) atoms.push_back(to_atom("problem.atom", v, n));
  std::optional<Density> density;
  if (const auto* v = get("problem.density_file")) {
    try {
      density = Density::from_csv(resolve(base, unquote(*v)), n);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(std::string("problem.density_file: ") + e.what());
    }
  }
  try {
    cfg.measure = Measure(n, std::move(atoms), std::move(density));
    if (!std::isfinite(mT_norm(cfg.measure, cfg.T))) throw ConfigError("measure outside the class for this T");
  } catch (const DomainError& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }

  cfg.grid.dim = n;
  cfg.grid.T = cfg.T;
  number("grid.a", cfg.grid.a);
  number("grid.b", cfg.grid.b);
  number("grid.h", cfg.grid.h);
  number("grid.t_min", cfg.grid.t_min);
  if (get("grid.ratio") && get("grid.per_octave")) throw ConfigError("grid: give ratio or per_octave, not both");
  number("grid.ratio", cfg.grid.ratio);
  if (const auto* v = get("grid.per_octave")) {
    const double m = to_number("grid.per_octave", *v);
    if (!(m >= 1.0) || m != std::floor(m)) throw ConfigError("grid.per_octave must be a positive integer");
    cfg.grid.ratio = std::pow(2.0, -1.0 / m);
  }
  try {
    cfg.grid.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }

  for (const auto& v : all("probes.point")) cfg.probes.push_back(to_point("probes.point", v, n));
  if (cfg.probes.empty()) cfg.probes.push_back(Point{});
  number("probes.R", cfg.R);
  if (!(cfg.R > 0.0)) throw ConfigError("probes.R must be > 0");
  list("probes.psi_times", cfg.psi_times);
  if (cfg.psi_times.empty())
    for (int j = 1; j <= 4; ++j) cfg.psi_times.push_back(cfg.T * std::pow(10.0, -j));
  for (double t : cfg.psi_times)
    if (!(t > 0.0 && t < cfg.T)) throw ConfigError("probes.psi_times must lie in (0, T)");

  list("sweeps.R_list", cfg.R_list);
  list("sweeps.k_list", cfg.k_list);
  list("sweeps.delta_list", cfg.delta_list);
  list("sweeps.lambda_levels", cfg.lambda_levels);
  for (std::size_t i = 1; i < cfg.R_list.size(); ++i)
    if (!(cfg.R_list[i] > cfg.R_list[i - 1])) throw ConfigError("sweeps.R_list must increase");
  for (std::size_t i = 1; i < cfg.k_list.size(); ++i)
    if (!(cfg.k_list[i] > cfg.k_list[i - 1])) throw ConfigError("sweeps.k_list must increase");
  for (std::size_t i = 1; i < cfg.delta_list.size(); ++i)
    if (!(cfg.delta_list[i] < cfg.delta_list[i - 1])) throw ConfigError("sweeps.delta_list must decrease");
  for (double k : cfg.k_list)
    if (!(k > 0.0)) throw ConfigError("sweeps.k_list entries must be > 0");
  for (double R : cfg.R_list) {
    if (!(R > 0.0)) throw ConfigError("sweeps.R_list entries must be > 0");
    const double q = R / cfg.grid.h;
    if (std::abs(q - std::round(q)) > 1e-9 * q || R > std::min(-cfg.grid.a, cfg.grid.b) + 1e-12)
      throw ConfigError("sweeps.R_list entries must be multiples of h inside the grid box");
  }
  for (double d : cfg.delta_list)
    if (!(d > 0.0)) throw ConfigError("sweeps.delta_list entries must be > 0");
  if (cfg.lambda_levels.empty()) throw ConfigError("sweeps.lambda_levels must not be empty");
  for (double l : cfg.lambda_levels)
    if (!(l > 0.0)) throw ConfigError("sweeps.lambda_levels entries must be > 0");

  number("kernel.sigma", cfg.sigma);
  number("kernel.k", cfg.kernel_k);
  if (cfg.sigma < 0.0 || !(cfg.kernel_k > 0.0)) throw ConfigError("kernel: sigma >= 0 and k > 0 required");

  list("trace.cell_sizes", cfg.cell_sizes);
  number("trace.half_width", cfg.trace_half_width);
  if (cfg.cell_sizes.empty()) throw ConfigError("trace.cell_sizes must not be empty");
  for (double s : cfg.cell_sizes)
    if (!(s > 0.0)) throw ConfigError("trace.cell_sizes entries must be > 0");
  for (const auto& v : all("trace.candidate")) cfg.candidates.push_back(Measure(n, {to_atom("trace.candidate", v, n)}));

  number("tolerances.monotone_abs", cfg.monotone_abs);
  number("tolerances.monotone_rel", cfg.monotone_rel);
  number("tolerances.drift", cfg.drift_tol);
  number("tolerances.trace", cfg.trace_tol);
  number("tolerances.residual", cfg.residual_tol);
  for (double t : {cfg.monotone_abs, cfg.monotone_rel, cfg.drift_tol, cfg.trace_tol, cfg.residual_tol})
    if (!(t > 0.0)) throw ConfigError("tolerances must be positive");

  if (const auto* v = get("output.dir")) cfg.output_dir = unquote(*v);
  if (cfg.output_dir.empty()) throw ConfigError("output.dir must not be empty");
  if (const auto* v = get("output.seed")) {
    const double s = to_number("output.seed", *v);
    if (s < 0.0 || s != std::floor(s)) throw ConfigError("output.seed must be a nonnegative integer");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  return cfg;
}

}  // namespace

std::vector<double> parse_number_list(const std::string& text) {
  std::string s = trim(text);
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') throw ConfigError("unbalanced brackets in '" + text + "'");
    s = s.substr(1, s.size() - 2);
  }
  std::vector<double> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_number("list entry", item));
  return out;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  const std::string base = fs::path(path).parent_path().string();
  return build(in, path, base.empty() ? "." : base);
}

ExperimentConfig parse_config(const std::string& text, const std::string& base_dir) {
  std::istringstream in(text);
  return build(in, "<text>", base_dir);
}

}  // namespace singheat

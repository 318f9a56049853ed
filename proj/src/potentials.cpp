#include "singheat/potentials.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "csv.hpp"

namespace singheat {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// int_a^b c s^-beta ds, a >= 0.
double power_integral(double c, double beta, double a, double b) {
  if (b <= a || c == 0.0) return 0.0;
  if (beta == 0.0) return c * (b - a);
  if (a == 0.0 && beta >= 1.0) return kInfinity;
  if (beta == 1.0) return c * std::log(b / a);
  return c * (std::pow(b, 1.0 - beta) - std::pow(a, 1.0 - beta)) / (1.0 - beta);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\"");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\"");
  return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("potential parameter '" + key + "' is not a number: '" + text + "'");
  }
}

}  // namespace

double Tabulated::eval(const Point& x, double t, int dim) const {
  const std::size_t naxes = axes.size();
  std::array<std::size_t, kMaxDim + 1> lo_idx{};
  std::array<double, kMaxDim + 1> frac{};
  for (std::size_t k = 0; k < naxes; ++k) {
    const auto& ax = axes[k];
    double q = k < static_cast<std::size_t>(dim) ? x[k] : t;
    if (k < static_cast<std::size_t>(dim)) {
      if (q < ax.front() || q > ax.back()) return 0.0;
    } else {
      q = std::clamp(q, ax.front(), ax.back());
    }
    if (ax.size() == 1) {
      lo_idx[k] = 0;
      frac[k] = 0.0;
      continue;
    }
    auto it = std::upper_bound(ax.begin(), ax.end(), q);
    std::size_t i = it == ax.begin() ? 0 : static_cast<std::size_t>(it - ax.begin()) - 1;
    i = std::min(i, ax.size() - 2);
    lo_idx[k] = i;
    frac[k] = (q - ax[i]) / (ax[i + 1] - ax[i]);
  }
  double acc = 0.0;
  for (std::size_t corner = 0; corner < (std::size_t{1} << naxes); ++corner) {
    double w = 1.0;
    std::size_t flat = 0;
    for (std::size_t k = 0; k < naxes; ++k) {
      const bool up = (corner >> k) & 1u;
      if (up && axes[k].size() == 1) {
        w = 0.0;
        break;
      }
      w *= up ? frac[k] : 1.0 - frac[k];
      flat = flat * axes[k].size() + lo_idx[k] + (up ? 1 : 0);
    }
    if (w != 0.0) acc += w * values[flat];
  }
  return acc;
}

double Tabulated::max_value() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

Tabulated Tabulated::from_csv(const std::string& path, int dim) {
  check_dim(dim);
  const auto table = csv::read_numeric(path);
  const std::size_t ncol = static_cast<std::size_t>(dim) + 2;
  if (table.header.size() != ncol)
    throw ConfigError("potential table '" + path + "' must have columns x1..xn, t, value");
  Tabulated tab;
  tab.source = path;
  std::vector<std::set<double>> uniq(dim + 1);
  for (const auto& row : table.rows)
    for (int k = 0; k <= dim; ++k) uniq[k].insert(row[k]);
  std::size_t total = 1;
  for (const auto& u : uniq) {
    tab.axes.emplace_back(u.begin(), u.end());
    total *= u.size();
  }
  if (total != table.rows.size())
    throw ConfigError("potential table '" + path + "' is not a complete regular grid");
  if (tab.axes.back().front() <= 0.0)
    throw ConfigError("potential table '" + path + "' must use times t > 0");
  tab.values.assign(total, 0.0);
  for (const auto& row : table.rows) {
    std::size_t flat = 0;
    for (int k = 0; k <= dim; ++k) {
      const auto& ax = tab.axes[k];
      const auto i = static_cast<std::size_t>(std::lower_bound(ax.begin(), ax.end(), row[k]) - ax.begin());
      flat = flat * ax.size() + i;
    }
    const double v = row[dim + 1];
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ConfigError("potential table '" + path + "' has a negative or non-finite value");
    tab.values[flat] = v;
  }
  return tab;
}

Potential::Potential(int dim, Kind kind) : dim_(dim), kind_(std::move(kind)) {
  check_dim(dim);
  std::visit(Overloaded{
                 [](const TimePower& p) {
                   if (!(p.c >= 0.0) || !(p.beta >= 0.0))
                     throw DomainError("time_power needs c >= 0 and beta >= 0");
                 },
                 [](const Hardy& p) {
                   if (!(p.c >= 0.0) || !(p.gamma >= 0.0))
                     throw DomainError("hardy needs c >= 0 and gamma >= 0");
                 },
                 [](const ProductPower& p) {
                   if (!(p.c >= 0.0) || !(p.beta >= 0.0) || !(p.gamma >= 0.0))
                     throw DomainError("product needs c, beta, gamma >= 0");
                 },
                 [dim](const BoundedBump& p) {
                   if (!(p.c >= 0.0)) throw DomainError("bounded_bump needs c >= 0");
                   if (p.box.dim != dim || p.box.empty())
                     throw DomainError("bounded_bump box must be nonempty and match the dimension");
                 },
                 [dim](const Tabulated& p) {
                   if (p.axes.size() != static_cast<std::size_t>(dim) + 1)
                     throw DomainError("tabulated potential has wrong number of axes");
                 },
             },
             kind_);
}

Potential Potential::parse(std::string_view spec, int dim) {
  const std::string s = trim(spec);
  if (s == "zero" || s == "0") return zero(dim);
  const auto open = s.find('(');
  const auto close = s.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw ConfigError("cannot parse potential '" + s + "'");
  const std::string name = trim(s.substr(0, open));
  std::map<std::string, std::string> args;
  std::stringstream ss(s.substr(open + 1, close - open - 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("potential argument '" + trim(item) + "' needs key=value");
    args[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
  }
  auto take = [&](const std::string& key) {
    auto it = args.find(key);
    if (it == args.end()) throw ConfigError("potential '" + name + "' is missing '" + key + "'");
    const double v = parse_number(key, it->second);
    args.erase(it);
    return v;
  };
  auto finish = [&](Potential p) {
    if (!args.empty()) throw ConfigError("potential '" + name + "' has unknown argument '" + args.begin()->first + "'");
    return p;
  };
  try {
    if (name == "time_power") {
      const double c = take("c");
      const double beta = take("beta");
      return finish(time_power(dim, c, beta));
    }
    if (name == "hardy") {
      const double c = take("c");
      const double gamma = take("gamma");
      return finish(hardy(dim, c, gamma));
    }
    if (name == "product") {
      const double c = take("c");
      const double beta = take("beta");
      const double gamma = take("gamma");
      return finish(product(dim, c, beta, gamma));
    }
    if (name == "bounded_bump") {
      const double c = take("c");
      const double lo = take("lo");
      const double hi = take("hi");
      return finish(bump(dim, c, Box::cube(dim, lo, hi)));
    }
    if (name == "custom") {
      auto it = args.find("file");
      if (it == args.end()) throw ConfigError("custom potential needs file=<csv>");
      const std::string file = it->second;
      args.erase(it);
      return finish(Potential(dim, Tabulated::from_csv(file, dim)));
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid potential: ") + e.what());
  }
  throw ConfigError("unknown potential kind '" + name + "'");
}

double Potential::base_eval(const Point& x, double t) const {
  return std::visit(Overloaded{
                        [&](const TimePower& p) { return p.c == 0.0 ? 0.0 : p.c * std::pow(t, -p.beta); },
                        [&](const Hardy& p) {
                          if (p.c == 0.0) return 0.0;
                          if (p.gamma == 0.0) return p.c;
                          const double r2 = norm2(x, dim_);
                          return r2 == 0.0 ? kInfinity : p.c * std::pow(r2, -0.5 * p.gamma);
                        },
                        [&](const ProductPower& p) {
                          if (p.c == 0.0) return 0.0;
                          const double r2 = norm2(x, dim_);
                          if (p.gamma > 0.0 && r2 == 0.0) return kInfinity;
                          return p.c * std::pow(t, -p.beta) * (p.gamma > 0.0 ? std::pow(r2, -0.5 * p.gamma) : 1.0);
                        },
                        [&](const BoundedBump& p) { return p.box.contains(x) ? p.c : 0.0; },
                        [&](const Tabulated& p) { return p.eval(x, t, dim_); },
                    },
                    kind_);
}

double Potential::eval(const Point& x, double t) const {
  if (!(t > 0.0)) throw DomainError("potential evaluated at t <= 0");
  if (t <= cut_) return 0.0;
  return std::min(base_eval(x, t), cap_);
}

Potential Potential::level_truncate(double k) const {
  if (!(k > 0.0)) throw DomainError("level_truncate: k must be > 0");
  Potential p = *this;
  p.cap_ = std::min(cap_, k);
  return p;
}

Potential Potential::time_truncate(double delta) const {
  if (!(delta > 0.0)) throw DomainError("time_truncate: delta must be > 0");
  Potential p = *this;
  p.cut_ = std::max(cut_, delta);
  return p;
}

bool Potential::is_zero() const {
  return std::visit([](const auto& p) {
    if constexpr (std::is_same_v<std::decay_t<decltype(p)>, Tabulated>) return p.max_value() == 0.0;
    else return p.c == 0.0;
  }, kind_);
}

bool Potential::space_independent() const {
  if (is_zero()) return true;
  if (std::holds_alternative<TimePower>(kind_)) return true;
  if (const auto* h = std::get_if<Hardy>(&kind_)) return h->gamma == 0.0;
  if (const auto* q = std::get_if<ProductPower>(&kind_)) return q->gamma == 0.0;
  return false;
}

bool Potential::singular_at_origin() const {
  if (is_zero() || cap_ < kInfinity) return false;
  if (const auto* h = std::get_if<Hardy>(&kind_)) return h->gamma > 0.0;
  if (const auto* q = std::get_if<ProductPower>(&kind_)) return q->gamma > 0.0;
  return false;
}

bool Potential::singular_at_t0() const {
  if (is_zero() || cap_ < kInfinity || cut_ > 0.0) return false;
  if (const auto* p = std::get_if<TimePower>(&kind_)) return p->beta > 0.0;
  if (const auto* q = std::get_if<ProductPower>(&kind_)) return q->beta > 0.0;
  return false;
}

double Potential::time_profile(double t) const {
  if (!space_independent()) throw DomainError("time_profile needs a space-independent potential");
  return eval(Point{}, t);
}

double Potential::time_integral(double a, double b) const {
  if (!space_independent()) throw DomainError("time_integral needs a space-independent potential");
  if (!(a >= 0.0) || !(b >= a)) throw DomainError("time_integral: need 0 <= a <= b");
  if (is_zero()) return 0.0;
  double c = 0.0, beta = 0.0;
  if (const auto* p = std::get_if<TimePower>(&kind_)) {
    c = p->c;
    beta = p->beta;
  } else if (const auto* h = std::get_if<Hardy>(&kind_)) {
    c = h->c;
  } else if (const auto* q = std::get_if<ProductPower>(&kind_)) {
    c = q->c;
    beta = q->beta;
  }
  a = std::max(a, cut_);
  if (b <= a) return 0.0;
  if (!(cap_ < kInfinity)) return power_integral(c, beta, a, b);
  if (beta == 0.0) return std::min(c, cap_) * (b - a);
  // c s^-beta exceeds the cap for s < s_star.
  const double s_star = std::pow(c / cap_, 1.0 / beta);
  const double capped = cap_ * std::max(0.0, std::min(b, s_star) - a);
  return capped + power_integral(c, beta, std::max(a, s_star), b);
}

std::optional<double> Potential::c1_bound(double T) const {
  if (!(T > 0.0)) throw DomainError("c1_bound: T must be > 0");
  if (is_zero() || cut_ >= T) return 0.0;
  const double k = cap_;
  return std::visit(
      Overloaded{
          [&](const TimePower& p) -> std::optional<double> {
            if (p.beta <= 1.0) return std::min(p.c * std::pow(T, 1.0 - p.beta), k * T);
            if (!(k < kInfinity)) return std::nullopt;
            const double s_star = std::pow(p.c / k, 1.0 / p.beta);
            return k * std::min(s_star, T);
          },
          [&](const Hardy& p) -> std::optional<double> {
            if (p.gamma == 0.0) return std::min(p.c, k) * T;
            if (k < kInfinity) return k * T;
            return std::nullopt;
          },
          [&](const ProductPower& p) -> std::optional<double> {
            if (k < kInfinity) return k * T;
            if (p.gamma == 0.0 && p.beta <= 1.0) return p.c * std::pow(T, 1.0 - p.beta);
            return std::nullopt;
          },
          [&](const BoundedBump& p) -> std::optional<double> { return std::min(p.c, k) * T; },
          [&](const Tabulated& p) -> std::optional<double> { return std::min(p.max_value(), k) * T; },
      },
      kind_);
}

std::string Potential::describe() const {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const TimePower& p) { os << "time_power(c=" << format_double(p.c) << ", beta=" << format_double(p.beta) << ")"; },
                 [&](const Hardy& p) { os << "hardy(c=" << format_double(p.c) << ", gamma=" << format_double(p.gamma) << ")"; },
                 [&](const ProductPower& p) {
                   os << "product(c=" << format_double(p.c) << ", beta=" << format_double(p.beta)
                      << ", gamma=" << format_double(p.gamma) << ")";
                 },
                 [&](const BoundedBump& p) {
                   os << "bounded_bump(c=" << format_double(p.c) << ", lo=" << format_double(p.box.lo[0])
                      << ", hi=" << format_double(p.box.hi[0]) << ")";
                 },
                 [&](const Tabulated& p) { os << "custom(file=" << p.source << ")"; },
             },
             kind_);
  if (cap_ < kInfinity) os << " cap=" << format_double(cap_);
  if (cut_ > 0.0) os << " cut=" << format_double(cut_);
  return os.str();
}

}  // namespace singheat

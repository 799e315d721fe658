#ifndef SCHROLIP_POTENTIALS_HPP
#define SCHROLIP_POTENTIALS_HPP

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"
#include "grid.hpp"
#include "quadrature.hpp"

namespace schrolip {

enum class PotentialKind { zero, hermite, radial_power, tabulated };

// Radial potential V(x) = v(|x|) in dimension n with reverse Hoelder exponent q.
struct PotentialDescriptor {
  PotentialKind kind = PotentialKind::zero;
  int dim = 1;
  double power = 2.0;        // radial_power exponent a (hermite: 2)
  double coefficient = 1.0;  // V = coefficient * |x|^a for power kinds
  std::optional<double> rh_exponent;  // empty means "all q"
  std::vector<double> radii, samples;  // tabulated kind
  std::string source;

  static PotentialDescriptor zero(int n) {
    PotentialDescriptor v;
    v.kind = PotentialKind::zero;
    v.dim = n;
    v.power = 0.0;
    v.coefficient = 0.0;
    return v;
  }
  static PotentialDescriptor hermite(int n) {
    PotentialDescriptor v;
    v.kind = PotentialKind::hermite;
    v.dim = n;
    return v;
  }
  static PotentialDescriptor radial_power(int n, double a, double c = 1.0) {
    if (!(a > 0.0)) throw std::invalid_argument("radial-power exponent must be positive");
    if (!(c > 0.0)) throw std::invalid_argument("radial-power coefficient must be positive");
    PotentialDescriptor v;
    v.kind = PotentialKind::radial_power;
    v.dim = n;
    v.power = a;
    v.coefficient = c;
    return v;
  }
  static PotentialDescriptor tabulated(int n, std::vector<double> r, std::vector<double> val,
                                       std::optional<double> q = std::nullopt) {
    if (r.size() < 2 || r.size() != val.size()) throw std::invalid_argument("tabulated potential needs >= 2 (radius,value) rows");
    for (size_t i = 0; i < r.size(); ++i) {
      if (val[i] < 0.0 || !std::isfinite(val[i])) throw std::invalid_argument("tabulated potential values must be finite and nonnegative");
      if (r[i] < 0.0 || (i > 0 && !(r[i] > r[i - 1]))) throw std::invalid_argument("tabulated radii must be nonnegative and strictly increasing");
    }
    PotentialDescriptor v;
    v.kind = PotentialKind::tabulated;
    v.dim = n;
    v.radii = std::move(r);
    v.samples = std::move(val);
    v.rh_exponent = q;
    if (q && !(*q > 0.5 * n)) throw std::invalid_argument("reverse Hoelder exponent must exceed n/2");
    return v;
  }

  bool is_power_kind() const { return kind == PotentialKind::hermite || kind == PotentialKind::radial_power; }
  double exponent() const { return kind == PotentialKind::hermite ? 2.0 : power; }

  // Profile v(r), r >= 0. Tabulated: linear interpolation, constant beyond the last radius.
  double operator()(double r) const {
    switch (kind) {
      case PotentialKind::zero: return 0.0;
      case PotentialKind::hermite:
      case PotentialKind::radial_power: return coefficient * std::pow(r, exponent());
      case PotentialKind::tabulated: {
        if (r <= radii.front()) return samples.front();
        if (r >= radii.back()) return samples.back();
        size_t j = size_t(std::upper_bound(radii.begin(), radii.end(), r) - radii.begin());
        double t = (r - radii[j - 1]) / (radii[j] - radii[j - 1]);
        return samples[j - 1] + t * (samples[j] - samples[j - 1]);
      }
    }
    return 0.0;
  }

  double at(const std::vector<double>& x) const {
    double s = 0.0;
    for (double c : x) s += c * c;
    return (*this)(std::sqrt(s));
  }

  bool beyond_table(double r) const { return kind == PotentialKind::tabulated && r > radii.back(); }

  std::string name() const {
    switch (kind) {
      case PotentialKind::zero: return "zero";
      case PotentialKind::hermite: return "hermite";
      case PotentialKind::radial_power: {
        std::ostringstream os;
        os << "radial:" << power;
        return os.str();
      }
      case PotentialKind::tabulated: return "table:" + source;
    }
    return "zero";
  }

  // s^2 V(s x), still a descriptor of the same kind for power potentials.
  PotentialDescriptor rescaled(double s) const {
    if (kind == PotentialKind::zero) return *this;
    if (!is_power_kind()) throw std::invalid_argument("rescaling is only closed-form for power potentials");
    PotentialDescriptor v = *this;
    v.coefficient = coefficient * s * s * std::pow(s, exponent());
    return v;
  }
};

// Tabulated profile from CSV with header `radius,value`.
inline PotentialDescriptor load_radial_table(std::istream& is, int n, std::optional<double> q = std::nullopt) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("potential table: empty input");
  auto head = split_csv_line(line);
  if (head.size() != 2 || head[0] != "radius" || head[1] != "value")
    throw std::invalid_argument("potential table: header must be radius,value");
  std::vector<double> r, v;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != 2) throw std::invalid_argument("potential table line " + std::to_string(lineno) + ": expected 2 columns");
    try {
      r.push_back(std::stod(cells[0]));
      v.push_back(std::stod(cells[1]));
    } catch (...) {
      throw std::invalid_argument("potential table line " + std::to_string(lineno) + ": not a number");
    }
  }
  return PotentialDescriptor::tabulated(n, std::move(r), std::move(v), q);
}

inline PotentialDescriptor load_radial_table(const std::string& path, int n, std::optional<double> q = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open potential table: " + path);
  auto v = load_radial_table(in, n, q);
  v.source = path;
  return v;
}

// Parses "zero", "hermite", "radial:a" or "table:path".
inline PotentialDescriptor parse_potential(const std::string& spec, int n) {
  if (spec == "zero") return PotentialDescriptor::zero(n);
  if (spec == "hermite") return PotentialDescriptor::hermite(n);
  if (spec.rfind("radial:", 0) == 0) {
    double a;
    try {
      a = std::stod(spec.substr(7));
    } catch (...) {
      throw std::invalid_argument("bad radial exponent in potential spec: " + spec);
    }
    return PotentialDescriptor::radial_power(n, a);
  }
  if (spec.rfind("table:", 0) == 0) return load_radial_table(spec.substr(6), n);
  throw std::invalid_argument("unknown potential '" + spec + "' (expected zero, hermite, radial:a, table:path)");
}

namespace detail {

// integral over [lo, hi] of c |y|^p dy.
inline double power_segment(double c, double p, double lo, double hi) {
  auto F = [p](double u) { return (u < 0 ? -1.0 : 1.0) * std::pow(std::abs(u), p + 1.0) / (p + 1.0); };
  return c * (F(hi) - F(lo));
}

// integral over the ball B(x, r) of g(|y|), g radial, via radial x polar-angle Gauss-Legendre.
template <class G>
double off_center_ball_integral(const G& g, int n, double xr, double r) {
  const int per_panel = 64;
  std::vector<double> breaks{0.0};
  for (int d = 6; d >= 1; --d) breaks.push_back(r * std::pow(10.0, -d));
  breaks.push_back(r);
  if (xr > 0.0 && xr < r) breaks.push_back(xr);
  std::sort(breaks.begin(), breaks.end());
  auto ang = gauss_legendre(per_panel, 0.0, pi);
  double angular_area = sphere_area(n - 1);  // area of S^{n-2}
  double total = 0.0;
  for (size_t b = 0; b + 1 < breaks.size(); ++b) {
    if (breaks[b + 1] <= breaks[b]) continue;
    auto rad = gauss_legendre(per_panel, breaks[b], breaks[b + 1]);
    for (int i = 0; i < per_panel; ++i) {
      double s = rad.nodes[i], inner = 0.0;
      for (int j = 0; j < per_panel; ++j) {
        double th = ang.nodes[j];
        double d2 = xr * xr + s * s + 2.0 * xr * s * std::cos(th);
        inner += ang.weights[j] * std::pow(std::sin(th), n - 2) * g(std::sqrt(std::max(0.0, d2)));
      }
      total += rad.weights[i] * std::pow(s, n - 1) * angular_area * inner;
    }
  }
  return total;
}

// Breakpoints of a piecewise-linear profile inside [lo, hi] (1D, in |y|).
inline std::vector<double> table_breaks_1d(const PotentialDescriptor& v, double lo, double hi) {
  std::vector<double> b{lo, hi};
  if (lo < 0.0 && hi > 0.0) b.push_back(0.0);
  for (double r : v.radii) {
    if (r > lo && r < hi) b.push_back(r);
    if (-r > lo && -r < hi) b.push_back(-r);
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

}  // namespace detail

// integral over B(x, r) of V(y)^p dy.
inline double ball_integral(const PotentialDescriptor& V, const std::vector<double>& x, double r, double p = 1.0) {
  if (!(r > 0.0)) return 0.0;
  int n = V.dim;
  double xr = 0.0;
  for (double c : x) xr += c * c;
  xr = std::sqrt(xr);
  if (V.kind == PotentialKind::zero) return 0.0;
  if (V.is_power_kind()) {
    double c = std::pow(V.coefficient, p), a = V.exponent() * p;
    if (n == 1) return detail::power_segment(c, a, xr - r, xr + r);
    if (xr == 0.0) return c * sphere_area(n) * std::pow(r, a + n) / (a + n);
    if (V.kind == PotentialKind::hermite && p == 1.0)
      return V.coefficient * (xr * xr * ball_volume(n, r) + sphere_area(n) * std::pow(r, n + 2) / (n + 2));
    return detail::off_center_ball_integral([&](double s) { return c * std::pow(s, a); }, n, xr, r);
  }
  auto g = [&](double s) { return std::pow(V(s), p); };
  if (n == 1) {
    auto b = detail::table_breaks_1d(V, xr - r, xr + r);
    double total = 0.0;
    for (size_t i = 0; i + 1 < b.size(); ++i) {
      auto q = gauss_legendre(p == 1.0 ? 2 : 24, b[i], b[i + 1]);
      for (size_t j = 0; j < q.nodes.size(); ++j) total += q.weights[j] * g(std::abs(q.nodes[j]));
    }
    return total;
  }
  if (xr == 0.0) {
    std::vector<double> b{0.0, r};
    for (double t : V.radii)
      if (t > 0.0 && t < r) b.push_back(t);
    std::sort(b.begin(), b.end());
    double total = 0.0;
    for (size_t i = 0; i + 1 < b.size(); ++i) {
      auto q = gauss_legendre(24, b[i], b[i + 1]);
      for (size_t j = 0; j < q.nodes.size(); ++j) total += q.weights[j] * std::pow(q.nodes[j], n - 1) * g(q.nodes[j]);
    }
    return sphere_area(n) * total;
  }
  return detail::off_center_ball_integral(g, n, xr, r);
}

// rho(x) = sup{r : r^{2-n} int_{B(x,r)} V <= 1}, by bracketing from r = 1 and 80 bisection steps.
inline Radius critical_radius(const PotentialDescriptor& V, const std::vector<double>& x) {
  if (V.kind == PotentialKind::zero) return Radius::infinite();
  int n = V.dim;
  double xr = 0.0;
  for (double c : x) xr += c * c;
  xr = std::sqrt(xr);
  auto psi = [&](double r) { return std::pow(r, 2.0 - n) * ball_integral(V, x, r) - 1.0; };
  double lo = 1.0, hi = 1.0;
  if (psi(1.0) < 0.0) {
    int steps = 0;
    while (psi(hi) < 0.0) {
      lo = hi;
      hi *= 2.0;
      if (V.beyond_table(xr + hi) && V.samples.back() == 0.0)
        throw truncation_error("critical radius exceeds the tabulated radial range");
      if (++steps > 1000) return Radius::infinite();
    }
  } else {
    int steps = 0;
    while (psi(lo) >= 0.0) {
      hi = lo;
      lo *= 0.5;
      if (++steps > 1000) throw std::runtime_error("critical radius bracket failed to close");
    }
  }
  for (int i = 0; i < 80; ++i) {
    double mid = 0.5 * (lo + hi);
    if (psi(mid) < 0.0) lo = mid;
    else hi = mid;
  }
  double rho = 0.5 * (lo + hi);
  if (V.beyond_table(xr + rho)) throw truncation_error("critical radius exceeds the tabulated radial range");
  return Radius::finite(rho);
}

// Caches rho by |x|; all supported potentials are radial.
class CriticalRadiusField {
 public:
  explicit CriticalRadiusField(PotentialDescriptor V) : V_(std::move(V)) {}

  Radius operator()(const std::vector<double>& x) const {
    double r = 0.0;
    for (double c : x) r += c * c;
    r = std::sqrt(r);
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (auto it = cache_.find(r); it != cache_.end()) return it->second;
    }
    std::vector<double> p(V_.dim, 0.0);
    p[0] = r;
    Radius rho = critical_radius(V_, p);
    std::lock_guard<std::mutex> lock(mu_);
    cache_.emplace(r, rho);
    return rho;
  }

  std::vector<Radius> on_grid(const Grid& g) const {
    std::vector<Radius> out(g.size());
    for (size_t i = 0; i < g.size(); ++i) out[i] = (*this)(g.point(i));
    return out;
  }

  const PotentialDescriptor& potential() const { return V_; }
  double bisection_relative_width() const { return std::ldexp(1.0, -80); }

 private:
  PotentialDescriptor V_;
  mutable std::mutex mu_;
  mutable std::map<double, Radius> cache_;
};

struct Ball {
  std::vector<double> center;
  double radius;
};

// Max over balls of (avg V^q)^{1/q} / avg V. 0/0 gives 1; returns +inf when avg V = 0 < avg V^q.
inline double reverse_holder_estimate(const PotentialDescriptor& V, double q, const std::vector<Ball>& balls) {
  if (!(q > 0.5 * V.dim)) throw std::invalid_argument("reverse Hoelder exponent must exceed n/2");
  double worst = 0.0;
  for (const auto& b : balls) {
    if (!(b.radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
    double cr = 0.0;
    for (double c : b.center) cr += c * c;
    if (V.beyond_table(std::sqrt(cr) + b.radius)) throw truncation_error("ball exceeds the tabulated radial range");
    double vol = ball_volume(V.dim, b.radius);
    double a1 = ball_integral(V, b.center, b.radius) / vol;
    double aq = std::pow(ball_integral(V, b.center, b.radius, q) / vol, 1.0 / q);
    double ratio;
    if (a1 == 0.0) ratio = aq == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    else ratio = aq / a1;
    worst = std::max(worst, ratio);
  }
  return worst;
}

struct RhoComparisonReport {
  double C = 1.0;
  double k0 = 1.0;
  size_t pairs = 0;
  std::vector<size_t> violations;  // indices of pairs that no (C, k0) can accommodate
  bool passes() const { return violations.empty(); }
};

// Smallest C (then smallest k0 on a 0.01 grid in [1, 20]) such that
// C^{-1} rho(x)(1+d/rho(x))^{-k0} <= rho(z) <= C rho(x)(1+d/rho(x))^{k0/(1+k0)} on all pairs.
inline RhoComparisonReport rho_comparison_check(const PotentialDescriptor& V,
                                                const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs) {
  RhoComparisonReport rep;
  rep.pairs = pairs.size();
  CriticalRadiusField field(V);
  struct Sample { double rx, rz, d; };
  std::vector<Sample> s;
  for (size_t i = 0; i < pairs.size(); ++i) {
    Radius a = field(pairs[i].first), b = field(pairs[i].second);
    if (a.unbounded != b.unbounded) { rep.violations.push_back(i); continue; }
    if (a.unbounded) continue;
    double d = 0.0;
    for (size_t c = 0; c < pairs[i].first.size(); ++c) d += std::pow(pairs[i].first[c] - pairs[i].second[c], 2);
    s.push_back({a.value, b.value, std::sqrt(d)});
  }
  double bestC = std::numeric_limits<double>::infinity(), bestk = 1.0;
  for (int step = 0; step <= 1900; ++step) {
    double k0 = 1.0 + 0.01 * step, C = 1.0;
    for (const auto& p : s) {
      double base = 1.0 + p.d / p.rx;
      C = std::max(C, p.rx * std::pow(base, -k0) / p.rz);
      C = std::max(C, p.rz / (p.rx * std::pow(base, k0 / (1.0 + k0))));
    }
    if (C < bestC * (1.0 - 1e-12)) { bestC = C; bestk = k0; }
  }
  rep.C = s.empty() ? 1.0 : bestC;
  rep.k0 = bestk;
  return rep;
}

namespace detail {

// int V(z) omega_y(x - z) dz with omega_y the heat kernel (4 pi y)^{-n/2} e^{-|u|^2/4y}.
inline double gaussian_average(const PotentialDescriptor& V, const std::vector<double>& x, double y) {
  int n = V.dim;
  double xr = 0.0;
  for (double c : x) xr += c * c;
  xr = std::sqrt(xr);
  if (V.kind == PotentialKind::zero) return 0.0;
  if (V.kind == PotentialKind::hermite) return V.coefficient * (xr * xr + 2.0 * n * y);
  if (V.is_power_kind() && xr == 0.0) {
    double a = V.exponent();
    return V.coefficient * std::pow(4.0 * y, 0.5 * a) * std::tgamma(0.5 * (n + a)) / std::tgamma(0.5 * n);
  }
  double S = 16.0 * std::sqrt(y);
  auto kern = [&](double s) { return std::pow(4.0 * pi * y, -0.5 * n) * std::exp(-s * s / (4.0 * y)); };
  if (n == 1) {
    double total = 0.0;
    const int panels = 32;
    for (int p = 0; p < panels; ++p) {
      auto q = gauss_legendre(16, -S + 2.0 * S * p / panels, -S + 2.0 * S * (p + 1) / panels);
      for (size_t j = 0; j < q.nodes.size(); ++j) total += q.weights[j] * kern(q.nodes[j]) * V(std::abs(xr + q.nodes[j]));
    }
    return total;
  }
  auto ang = gauss_legendre(64, 0.0, pi);
  double total = 0.0;
  const int panels = 32;
  for (int p = 0; p < panels; ++p) {
    auto rad = gauss_legendre(16, S * p / panels, S * (p + 1) / panels);
    for (size_t i = 0; i < rad.nodes.size(); ++i) {
      double s = rad.nodes[i], inner = 0.0;
      for (size_t j = 0; j < ang.nodes.size(); ++j) {
        double th = ang.nodes[j];
        double d2 = xr * xr + s * s + 2.0 * xr * s * std::cos(th);
        inner += ang.weights[j] * std::pow(std::sin(th), n - 2) * V(std::sqrt(std::max(0.0, d2)));
      }
      total += rad.weights[i] * std::pow(s, n - 1) * kern(s) * sphere_area(n - 1) * inner;
    }
  }
  return total;
}

}  // namespace detail

struct SmoothingReport {
  std::vector<double> ys, lhs, ratios;
  std::vector<double> rejected_ys;  // samples with y > rho(x)^2
  double C = 0.0;
  double worst_ratio = 0.0;  // after fitting C, always <= 1
  double fitted_exponent = 0.0;
  double bound_exponent = 0.0;  // -n/(2q); q = infinity when V is RH_q for all q
  std::string profile = "gaussian";
};

// Fits C in int V(z) omega_y(x-z) dz <= C y^{-1} (sqrt(y)/rho(x))^{2-n/q} for y <= rho(x)^2.
inline SmoothingReport potential_smoothing_check(const PotentialDescriptor& V, const std::vector<double>& x,
                                                 const std::vector<double>& y_samples) {
  SmoothingReport rep;
  Radius rho = critical_radius(V, x);
  double q_inv = V.rh_exponent ? 1.0 / *V.rh_exponent : 0.0;
  double e = 2.0 - V.dim * q_inv;
  rep.bound_exponent = -1.0 + 0.5 * e;
  for (double y : y_samples) {
    if (!(y > 0.0)) throw std::invalid_argument("smoothing samples must be positive");
    if (!rho.unbounded && y > rho.value * rho.value) { rep.rejected_ys.push_back(y); continue; }
    double l = detail::gaussian_average(V, x, y);
    double shape = rho.unbounded ? 0.0 : std::pow(y, -1.0) * std::pow(std::sqrt(y) / rho.value, e);
    rep.ys.push_back(y);
    rep.lhs.push_back(l);
    rep.ratios.push_back(l == 0.0 ? 0.0 : (shape > 0.0 ? l / shape : std::numeric_limits<double>::infinity()));
  }
  for (double r : rep.ratios) rep.C = std::max(rep.C, r);
  if (rep.C > 0.0 && std::isfinite(rep.C))
    for (double r : rep.ratios) rep.worst_ratio = std::max(rep.worst_ratio, r / rep.C);
  std::vector<double> lx, ly;
  for (size_t i = 0; i < rep.ys.size(); ++i)
    if (rep.lhs[i] > 0.0) { lx.push_back(std::log(rep.ys[i])); ly.push_back(std::log(rep.lhs[i])); }
  if (lx.size() >= 2) rep.fitted_exponent = least_squares_line(lx, ly).slope;
  return rep;
}

}  // namespace schrolip

#endif  // SCHROLIP_POTENTIALS_HPP

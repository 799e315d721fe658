#ifndef SCHROLIP_POISSON_HPP
#define SCHROLIP_POISSON_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "common.hpp"
#include "grid.hpp"
#include "heat.hpp"
#include "jet.hpp"

namespace schrolip {

// Nodes for P_y f = int_0^inf (y / (2 sqrt(pi))) e^{-y^2/(4 tau)} tau^{-3/2} W_tau f dtau,
// midpoint in ln(tau) over [y_min^2/400, 1e12 max(y_max^2, 1)], plus a closing weight
// erf(y / (2 sqrt(tau_max))) carried by W_{tau_max} f.
struct SubordinationQuadrature {
  double y_min = 0.0, y_max = 0.0;
  double tau_min = 0.0, tau_max = 0.0;
  std::vector<double> tau, du_weight;  // du_weight = tau_i * du

  SubordinationQuadrature() = default;
  SubordinationQuadrature(double ylo, double yhi) : y_min(ylo), y_max(yhi) {
    if (!(ylo > 0.0) || yhi < ylo) throw std::invalid_argument("subordination window must satisfy 0 < y_min <= y_max");
    tau_min = ylo * ylo / 400.0;
    tau_max = 1e12 * std::max(yhi * yhi, 1.0);
    int n = std::max(256, int(std::ceil(8.0 * std::log(tau_max / tau_min))));
    double u0 = std::log(tau_min), du = (std::log(tau_max) - u0) / n;
    for (int i = 0; i < n; ++i) {
      double t = std::exp(u0 + (i + 0.5) * du);
      tau.push_back(t);
      du_weight.push_back(t * du);
    }
  }

  size_t size() const { return tau.size(); }

  // d^k/dy^k of the node weights; the last entry multiplies W_{tau_max} f.
  std::vector<double> weights(double y, int k) const {
    constexpr double inv_two_sqrt_pi = 0.28209479177387814;
    Jet Y = Jet::variable(k, y);
    Jet Y2 = Y * Y;
    std::vector<double> w(tau.size() + 1);
    for (size_t i = 0; i < tau.size(); ++i) {
      double t = tau[i];
      Jet v = Y * exp(Y2 * (-0.25 / t)) * (inv_two_sqrt_pi * std::pow(t, -1.5) * du_weight[i]);
      w[i] = v.derivative(k);
    }
    w.back() = erf(Y * (0.5 / std::sqrt(tau_max))).derivative(k);
    return w;
  }

  double mass(double y) const {
    double s = 0.0;
    for (double w : weights(y, 0)) s += w;
    return s;
  }
};

enum class PoissonPath { quadrature, spectral };

// Poisson validity window: [h, 4R] for quadrature regimes, (0, 4R] for spectral.
inline std::pair<double, double> poisson_window(const SemigroupEngine& e) {
  double lo = e.regime() == Regime::spectral ? 0.0 : e.grid().spacing();
  return {lo, 4.0 * e.grid().extent};
}

inline void check_poisson_y(const SemigroupEngine& e, double y) {
  auto [lo, hi] = poisson_window(e);
  if (!(y > 0.0) || y < lo || y > hi)
    throw std::invalid_argument("y = " + std::to_string(y) + " outside the Poisson validity window [" +
                                std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

// Caches W_tau f on a node set so that many (y, k) evaluations share the heat applications.
class PoissonSampler {
 public:
  PoissonSampler(const SemigroupEngine& e, const GridFunction& f, double y_lo, double y_hi, int i0, int i1)
      : quad_(y_lo, y_hi), i0_(std::max(i0, 0)), i1_(std::min(i1, e.grid().points)) {
    for (double t : quad_.tau) cache_.push_back(e.apply_range(f, t, 0, i0_, i1_));
    cache_.push_back(e.apply_range(f, quad_.tau_max, 0, i0_, i1_));
  }

  std::vector<double> evaluate(double y, int k) const {
    auto w = quad_.weights(y, k);
    std::vector<double> out(i1_ - i0_, 0.0);
    for (size_t n = 0; n < w.size(); ++n) {
      double wn = w[n];
      if (wn == 0.0) continue;
      const auto& c = cache_[n];
      for (size_t i = 0; i < out.size(); ++i) out[i] += wn * c[i];
    }
    return out;
  }

  const SubordinationQuadrature& quadrature() const { return quad_; }

 private:
  SubordinationQuadrature quad_;
  int i0_, i1_;
  std::vector<std::vector<double>> cache_;
};

inline GridFunction poisson_derivative(const SemigroupEngine& e, const GridFunction& f, double y, int k,
                                       PoissonPath path = PoissonPath::quadrature) {
  if (k < 0 || k > 4) throw std::invalid_argument("Poisson derivative order must lie in 0..4");
  check_poisson_y(e, y);
  if (path == PoissonPath::spectral) {
    auto g = [y, k](double lam) {
      double s = std::sqrt(std::max(lam, 0.0));
      return std::pow(-s, k) * std::exp(-s * y);
    };
    GridFunction r = e.spectral_apply(f, g);
    r.continuous = true;
    return r;
  }
  PoissonSampler s(e, f, y, y, 0, e.grid().points);
  GridFunction r = f.with_values(s.evaluate(y, k));
  r.continuous = true;
  return r;
}

inline GridFunction apply_poisson(const SemigroupEngine& e, const GridFunction& f, double y,
                                  PoissonPath path = PoissonPath::quadrature) {
  return poisson_derivative(e, f, y, 0, path);
}

// d^k/dy^k P_y(x, z) by subordination of kernel values (closed-form regimes) or eigen-expansion.
inline double poisson_kernel(const SemigroupEngine& e, const std::vector<double>& x, const std::vector<double>& z,
                             double y, int k) {
  if (e.regime() == Regime::spectral) {
    const Grid& g = e.grid();
    double h = g.spacing();
    int i = int(std::llround((x[0] + g.extent) / h)), j = int(std::llround((z[0] + g.extent) / h));
    if (i <= 0 || j <= 0 || i >= g.points - 1 || j >= g.points - 1) return 0.0;
    const auto& lam = e.eigenvalues();
    const auto& U = e.eigenvectors();
    double s = 0.0;
    for (int m = 0; m < lam.size(); ++m) {
      double r = std::sqrt(std::max(lam(m), 0.0));
      s += std::pow(-r, k) * std::exp(-r * y) * U(i - 1, m) * U(j - 1, m);
    }
    return s / h;
  }
  SubordinationQuadrature q(y, y);
  auto w = q.weights(y, k);
  double s = 0.0;
  for (size_t n = 0; n < q.size(); ++n) s += w[n] * e.kernel(x, z, q.tau[n], 0);
  s += w.back() * e.kernel(x, z, q.tau_max, 0);
  return s;
}

struct PoissonBoundReport {
  size_t samples = 0;
  int k = 0;
  double N = 0.0;
  double C = 0.0;
  double worst_ratio = 0.0;
  bool passes = false;
};

// k = 0: P_y <= C y / (d^2+y^2)^{(n+1)/2} B^{-N};  k >= 1: |d^k P_y| <= C (d^2+y^2)^{-(n+k)/2} B^{-N},
// B = 1 + sqrt(d^2+y^2)/rho(x) + sqrt(d^2+y^2)/rho(z).
inline PoissonBoundReport poisson_kernel_bound_check(const SemigroupEngine& e, const std::vector<KernelSample>& samples,
                                                     int k, double N) {
  PoissonBoundReport rep;
  rep.samples = samples.size();
  rep.k = k;
  rep.N = N;
  int n = e.grid().dim;
  std::vector<double> ratio;
  for (const auto& s : samples) {
    double val = std::abs(poisson_kernel(e, s.x, s.z, s.y, k));
    double d2 = 0.0;
    for (size_t c = 0; c < s.x.size(); ++c) d2 += std::pow(s.x[c] - s.z[c], 2);
    double r = std::sqrt(d2 + s.y * s.y);
    double B = 1.0 + r * (e.rho(s.x).inverse_power(1.0) + e.rho(s.z).inverse_power(1.0));
    double bound = (k == 0 ? s.y * std::pow(r, -(n + 1.0)) : std::pow(r, -double(n + k))) * std::pow(B, -N);
    ratio.push_back(val == 0.0 ? 0.0 : (bound > 0.0 ? val / bound : std::numeric_limits<double>::infinity()));
  }
  for (double r : ratio) rep.C = std::max(rep.C, r);
  rep.passes = std::isfinite(rep.C);
  if (rep.passes && rep.C > 0.0)
    for (double r : ratio) rep.worst_ratio = std::max(rep.worst_ratio, r / rep.C);
  return rep;
}

struct PoissonSizeReport {
  double value = 0.0;  // grid quadrature plus tail
  double tail = 0.0;
  bool diverges = false;
};

// M^P[f] = int |f| / (1+|x|)^{n+1}; diverges when the declared growth exponent is >= 1 outside the box.
inline PoissonSizeReport poisson_size_norm(const GridFunction& f) {
  PoissonSizeReport rep;
  const Grid& g = f.grid;
  int n = g.dim;
  std::vector<double> w(f.values.size());
  for (size_t i = 0; i < w.size(); ++i) w[i] = std::abs(f.values[i]) / std::pow(1.0 + g.radius(i), n + 1);
  double inside = integrate(f.with_values(std::move(w)));
  double R = g.extent;
  if (f.tail == Tail::affine) {
    if (n != 1) throw std::invalid_argument("affine tails are defined for n = 1");
    int P = g.points;
    double h = g.spacing();
    double sR = (f.values[P - 1] - f.values[P - 2]) / h, sL = (f.values[1] - f.values[0]) / h;
    if (sR != 0.0 || sL != 0.0) {
      rep.diverges = true;
    } else {
      rep.tail = (std::abs(f.values[P - 1]) + std::abs(f.values[0])) / (1.0 + R);
    }
  } else if (!f.vanishes_at_boundary()) {
    if (f.growth_exponent >= 1.0) rep.diverges = true;
    else rep.tail = sphere_area(n) * f.growth_constant() * std::pow(1.0 + R, f.growth_exponent - 1.0) / (1.0 - f.growth_exponent);
  }
  rep.value = rep.diverges ? std::numeric_limits<double>::infinity() : inside + rep.tail;
  return rep;
}

struct VanishingReport {
  std::vector<double> ys;
  std::vector<std::vector<double>> norms;  // norms[l][j] = sup |d_y^l P_y f| on |x| <= R/2
  std::vector<Verdict> decays;             // per l in {0, 1, 2}
  std::vector<double> small_y, small_y_errors;  // |P_y f - f| along y = 2^{-j}
  bool converges_to_f = false;
};

inline VanishingReport poisson_vanishing_check(const SemigroupEngine& e, const GridFunction& f) {
  auto size = poisson_size_norm(f);
  if (size.diverges) throw hypothesis_error("Poisson vanishing check needs M^P[f] finite");
  VanishingReport rep;
  auto [i0, i1] = interior_band(e.grid());
  auto [lo, hi] = poisson_window(e);
  for (double y = 1.0; y <= hi; y *= 2.0) rep.ys.push_back(y);
  double ylo_small = std::max(lo, std::sqrt(e.reliable_window().first));
  PoissonSampler big(e, f, std::min(1.0, ylo_small), rep.ys.back(), i0, i1);
  double fnorm = 0.0;
  for (int i = i0; i < i1; ++i) fnorm = std::max(fnorm, std::abs(f.values[i]));
  // decaying: zero continuation and boundary samples negligible against the peak
  double fpeak = sup_norm(f), edge = 0.0;
  for (size_t i = 0; i < f.values.size(); ++i) {
    auto idx = f.grid.multi_index(i);
    for (int d = 0; d < f.grid.dim; ++d)
      if (idx[d] == 0 || idx[d] == f.grid.points - 1) edge = std::max(edge, std::abs(f.values[i]));
  }
  bool decaying_f = f.tail == Tail::zero && edge <= 1e-12 * fpeak;
  // the subordinator mass is exact to about 1e-10, so smaller norms are quadrature noise
  const double noise = 1e-9 * std::max(fnorm, 1e-300);
  rep.norms.assign(3, {});
  for (int l = 0; l <= 2; ++l) {
    for (double y : rep.ys) rep.norms[l].push_back(band_sup(big.evaluate(y, l)));
    const auto& v = rep.norms[l];
    double peak = *std::max_element(v.begin(), v.end());
    Verdict d;
    if (l == 0 && !decaying_f) d = Verdict::not_applicable;
    else if (peak <= noise || v.back() <= noise) d = Verdict::pass;
    else d = v.back() <= 0.1 * peak ? Verdict::pass : Verdict::fail;
    rep.decays.push_back(d);
  }
  for (int j = 1;; ++j) {
    double y = std::ldexp(1.0, -j);
    if (y < ylo_small) break;
    rep.small_y.push_back(y);
  }
  if (!rep.small_y.empty()) {
    PoissonSampler small(e, f, rep.small_y.back(), rep.small_y.front(), i0, i1);
    for (double y : rep.small_y) {
      auto p = small.evaluate(y, 0);
      double err = 0.0;
      for (int i = i0; i < i1; ++i) err = std::max(err, std::abs(p[i - i0] - f.values[i]));
      rep.small_y_errors.push_back(err);
    }
    rep.converges_to_f = rep.small_y_errors.back() <= rep.small_y_errors.front();
  }
  return rep;
}

}  // namespace schrolip

#endif  // SCHROLIP_POISSON_HPP

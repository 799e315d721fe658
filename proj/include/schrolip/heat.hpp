#ifndef SCHROLIP_HEAT_HPP
#define SCHROLIP_HEAT_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "common.hpp"
#include "grid.hpp"
#include "jet.hpp"
#include "potentials.hpp"

namespace schrolip {

enum class Regime { gaussian, mehler, spectral };
enum class SpectralMethod { dvr, finite_difference };

inline std::string to_string(Regime r) {
  switch (r) {
    case Regime::gaussian: return "gaussian";
    case Regime::mehler: return "mehler";
    case Regime::spectral: return "spectral";
  }
  return "gaussian";
}

// Per-call diagnostics of a semigroup application.
struct ApplyInfo {
  double truncation_bound = 0.0;  // bound on kernel mass times f outside the box
  bool below_resolution = false;  // y under the quadrature floor; first-order expansion returned
};

// Evaluates W_y = exp(-yL) and its y-derivatives on a 1D grid.
//
// gaussian and mehler kernels have the form exp(L(t) - c1 (x^2+z^2) - c2 (x-z)^2),
// so a kernel sum is diag x Toeplitz x diag; t-derivatives come from jets.
// spectral diagonalizes -d2/dx2 + V on the interior nodes with Dirichlet walls.
class SemigroupEngine {
 public:
  static SemigroupEngine gaussian(const Grid& g) {
    return SemigroupEngine(Regime::gaussian, PotentialDescriptor::zero(g.dim), g);
  }
  static SemigroupEngine mehler(const Grid& g) {
    return SemigroupEngine(Regime::mehler, PotentialDescriptor::hermite(g.dim), g);
  }
  static SemigroupEngine spectral(const PotentialDescriptor& V, const Grid& g,
                                  SpectralMethod method = SpectralMethod::dvr) {
    SemigroupEngine e(Regime::spectral, V, g);
    e.method_ = method;
    e.build_spectral();
    return e;
  }
  // gaussian for V = 0, mehler for hermite, spectral otherwise.
  static SemigroupEngine for_potential(const PotentialDescriptor& V, const Grid& g) {
    if (V.kind == PotentialKind::zero) return gaussian(g);
    if (V.kind == PotentialKind::hermite && V.coefficient == 1.0) return mehler(g);
    return spectral(V, g);
  }

  Regime regime() const { return regime_; }
  const Grid& grid() const { return grid_; }
  const PotentialDescriptor& potential() const { return V_; }
  SpectralMethod spectral_method() const { return method_; }

  double lowest_eigenvalue() const {
    switch (regime_) {
      case Regime::gaussian: return 0.0;
      case Regime::mehler: return double(grid_.dim);
      case Regime::spectral: return evals_(0);
    }
    return 0.0;
  }

  // [10 h^2, (R/4)^2]
  std::pair<double, double> reliable_window() const {
    double h = grid_.spacing();
    return {10.0 * h * h, std::pow(grid_.extent / 4.0, 2)};
  }

  // Below this y the quadrature kernel is unresolved by the grid.
  double resolution_floor() const {
    double h = grid_.spacing();
    return regime_ == Regime::spectral ? 0.0 : 0.5 * h * h;
  }

  Radius rho(const std::vector<double>& x) const { return rho_->operator()(x); }
  const CriticalRadiusField& rho_field() const { return *rho_; }

  const Eigen::VectorXd& eigenvalues() const { require_spectral(); return evals_; }
  const Eigen::MatrixXd& eigenvectors() const { require_spectral(); return evecs_; }

  // d^k/dy^k W_y(x, z). Spectral regime needs grid points.
  double kernel(const std::vector<double>& x, const std::vector<double>& z, double y, int k = 0) const {
    if (!(y > 0.0)) throw std::invalid_argument("kernel: y must be positive");
    if (k < 0 || k > jet_max_order) throw std::invalid_argument("kernel: derivative order out of range");
    if (regime_ == Regime::spectral) {
      int i = grid_index(x[0]), j = grid_index(z[0]);
      if (i <= 0 || j <= 0 || i >= grid_.points - 1 || j >= grid_.points - 1) return 0.0;
      double s = 0.0;
      for (int m = 0; m < evals_.size(); ++m)
        s += std::pow(-evals_(m), k) * std::exp(-evals_(m) * y) * evecs_(i - 1, m) * evecs_(j - 1, m);
      return s / grid_.spacing();
    }
    auto J = kernel_jets(y, k);
    Jet e(k, 0.0);
    for (size_t d = 0; d < x.size(); ++d) {
      double diff = x[d] - z[d];
      e = e + J.L - J.c1 * (x[d] * x[d] + z[d] * z[d]) - J.c2 * (diff * diff);
    }
    return exp(e).derivative(k);
  }

  // d^k/dy^k W_y f at grid indices [i0, i1).
  std::vector<double> apply_range(const GridFunction& f, double y, int k, int i0, int i1,
                                  ApplyInfo* info = nullptr) const {
    check_input(f, y, k);
    int P = grid_.points;
    i0 = std::max(i0, 0);
    i1 = std::min(i1, P);
    std::vector<double> out(std::max(0, i1 - i0), 0.0);
    if (regime_ == Regime::spectral) {
      auto g = [k, y](double lam) { return std::pow(-lam, k) * std::exp(-lam * y); };
      auto full = spectral_values(f, g);
      for (int i = i0; i < i1; ++i) out[i - i0] = full[i];
      return out;
    }
    if (y < resolution_floor()) {
      // First order in y: f - y L f with the 3-point Laplacian.
      if (k > 0) throw std::invalid_argument("heat derivative requested below the grid resolution floor h^2/2");
      const double h2 = grid_.spacing() * grid_.spacing();
      for (int i = i0; i < i1; ++i) {
        double lap = 0.0;
        if (i > 0 && i + 1 < P) lap = (f.values[i + 1] - 2.0 * f.values[i] + f.values[i - 1]) / h2;
        else if (f.tail == Tail::zero) lap = ((i > 0 ? f.values[i - 1] : 0.0) + (i + 1 < P ? f.values[i + 1] : 0.0) - 2.0 * f.values[i]) / h2;
        out[i - i0] = f.values[i] + y * (lap - V_(std::abs(grid_.coord(i))) * f.values[i]);
      }
      if (info) info->below_resolution = true;
      return out;
    }
    quadrature_apply(f, y, k, i0, i1, out);
    if (f.tail == Tail::affine) add_affine_tails(f, y, k, i0, i1, out);
    if (info) info->truncation_bound = truncation_bound(f, y);
    return out;
  }

  GridFunction apply(const GridFunction& f, double y, int k = 0, ApplyInfo* info = nullptr) const {
    auto v = apply_range(f, y, k, 0, grid_.points, info);
    GridFunction g = f.with_values(std::move(v));
    g.continuous = true;
    return g;
  }

  // g(L) f through the eigen-expansion (spectral regime).
  std::vector<double> spectral_values(const GridFunction& f, const std::function<double(double)>& g) const {
    require_spectral();
    int M = int(evals_.size());
    Eigen::VectorXd fi(M);
    for (int i = 0; i < M; ++i) fi(i) = f.values[i + 1];
    Eigen::VectorXd c = evecs_.transpose() * fi;
    for (int m = 0; m < M; ++m) c(m) *= g(evals_(m));
    Eigen::VectorXd r = evecs_ * c;
    std::vector<double> out(grid_.points, 0.0);
    for (int i = 0; i < M; ++i) out[i + 1] = r(i);
    return out;
  }

  GridFunction spectral_apply(const GridFunction& f, const std::function<double(double)>& g) const {
    return f.with_values(spectral_values(f, g));
  }

  // Bound on the contribution of f outside the box to W_y f on |x| <= R/2.
  double truncation_bound(const GridFunction& f, double y) const {
    if (f.tail == Tail::affine || f.vanishes_at_boundary()) return 0.0;
    double R = grid_.extent;
    return f.growth_constant() * std::pow(1.0 + R, f.growth_exponent) * std::erfc(0.5 * R / (2.0 * std::sqrt(y)));
  }

 private:
  struct KernelJets {
    Jet L, c1, c2;
  };

  SemigroupEngine(Regime r, PotentialDescriptor V, Grid g)
      : regime_(r), V_(std::move(V)), grid_(g), rho_(std::make_shared<CriticalRadiusField>(V_)) {
    if (V_.dim != g.dim) throw std::invalid_argument("potential and grid dimensions differ");
  }

  void require_spectral() const {
    if (regime_ != Regime::spectral) throw std::logic_error("spectral data requested from a closed-form regime");
  }

  int grid_index(double x) const {
    double k = (x + grid_.extent) / grid_.spacing();
    int i = int(std::llround(k));
    if (std::abs(k - i) > 1e-6) throw std::invalid_argument("spectral kernel is only defined at grid points");
    return i;
  }

  void check_input(const GridFunction& f, double y, int k) const {
    if (grid_.dim != 1) throw std::invalid_argument("semigroup application is implemented for n = 1 grids");
    if (!(f.grid == grid_)) throw std::invalid_argument("function grid differs from engine grid");
    if (!(y > 0.0)) throw std::invalid_argument("y must be positive");
    if (k < 0 || k > jet_max_order) throw std::invalid_argument("derivative order out of range");
  }

  KernelJets kernel_jets(double t0, int k) const {
    Jet t = Jet::variable(k, t0);
    KernelJets J;
    if (regime_ == Regime::gaussian) {
      J.L = log(t * (4.0 * pi)) * (-0.5);
      J.c1 = Jet(k, 0.0);
      J.c2 = 0.25 / t;
    } else {
      Jet e2 = exp(t * (-2.0));
      Jet omq = one_minus_exp_neg(t * 4.0);
      J.c2 = e2 / omq;
      J.c1 = one_minus_exp_neg(t * 2.0) / (1.0 + e2) * 0.5;
      J.L = (log(omq) + t * 2.0 + std::log(pi)) * (-0.5);
    }
    return J;
  }

  void quadrature_apply(const GridFunction& f, double y, int k, int i0, int i1, std::vector<double>& out) const {
    const int P = grid_.points;
    const double h = grid_.spacing();
    const auto& v = f.values;
    int jlo = 0, jhi = P - 1;
    while (jlo < P && v[jlo] == 0.0) ++jlo;
    while (jhi >= 0 && v[jhi] == 0.0) --jhi;
    if (jlo > jhi) return;

    KernelJets J = kernel_jets(y, k);
    const bool diag = regime_ != Regime::gaussian;
    const int nm = diag ? k + 1 : 1;  // orders carried by exp(-c1 z^2)

    // g_m(j) = [exp(-c1 z_j^2)]_m w_j f_j
    std::vector<std::vector<double>> g(nm, std::vector<double>(P, 0.0));
    for (int j = jlo; j <= jhi; ++j) {
      double w = (j == 0 || j == P - 1) ? 0.5 * h : h;
      double z = grid_.coord(j);
      if (diag) {
        Jet d = exp(J.c1 * (-z * z));
        for (int m = 0; m < nm; ++m) g[m][j] = d.c[m] * w * v[j];
      } else {
        g[0][j] = w * v[j];
      }
    }

    // T_l(d) = [exp(L - c2 (d h)^2)]_l, truncated where it underflows.
    int dmax = P - 1;
    double reach = std::sqrt(750.0 / J.c2.value()) / h + 2.0;
    if (reach < dmax) dmax = int(reach);
    std::vector<std::vector<double>> T(k + 1, std::vector<double>(dmax + 1));
    for (int d = 0; d <= dmax; ++d) {
      double r = d * h;
      Jet e = exp(J.L - J.c2 * (r * r));
      for (int l = 0; l <= k; ++l) T[l][d] = e.c[l];
    }

    // S_p(i) = sum_{l+m=p} sum_j T_l(|i-j|) g_m(j)
    std::vector<std::vector<double>> S(k + 1, std::vector<double>(i1 - i0, 0.0));
    for (int l = 0; l <= k; ++l)
      for (int m = 0; m < nm && l + m <= k; ++m) {
        const double* Tl = T[l].data();
        const double* gm = g[m].data();
        auto& Sp = S[l + m];
        for (int i = i0; i < i1; ++i) {
          int a = std::max(jlo, i - dmax), b = std::min(jhi, i + dmax);
          double s = 0.0;
          for (int j = a; j <= std::min(i, b); ++j) s += Tl[i - j] * gm[j];
          for (int j = std::max(i + 1, a); j <= b; ++j) s += Tl[j - i] * gm[j];
          Sp[i - i0] += s;
        }
      }

    double kfact = 1.0;
    for (int i = 2; i <= k; ++i) kfact *= i;
    for (int i = i0; i < i1; ++i) {
      double acc;
      if (diag) {
        double x = grid_.coord(i);
        Jet d = exp(J.c1 * (-x * x));
        acc = 0.0;
        for (int q = 0; q <= k; ++q) acc += d.c[q] * S[k - q][i - i0];
      } else {
        acc = S[k][i - i0];
      }
      out[i - i0] += kfact * acc;
    }
  }

  // Exact integrals of the kernel against the affine continuation of f beyond +-R.
  void add_affine_tails(const GridFunction& f, double y, int k, int i0, int i1, std::vector<double>& out) const {
    const int P = grid_.points;
    const double h = grid_.spacing(), R = grid_.extent;
    const auto& v = f.values;
    double sR = (v[P - 1] - v[P - 2]) / h, sL = (v[1] - v[0]) / h;
    double aR = v[P - 1] - sR * R, bR = sR;  // f = aR + bR z for z > R
    double aL = v[0] + sL * R, bL = sL;      // f = aL + bL z for z < -R
    KernelJets J = kernel_jets(y, k);
    Jet a = J.c1 + J.c2, b = J.c2 * 2.0;
    Jet sa = sqrt(a);
    constexpr double sqrt_pi = 1.7724538509055160;
    // int_R^inf exp(L - a x^2 - a u^2 + s b x u) (alpha + beta u) du
    auto tail = [&](double x, double s, double alpha, double beta) {
      Jet mu = b * (s * x) / (a * 2.0);
      Jet pref = exp(J.L - a * (x * x) + a * mu * mu);
      Jet w = R - mu;
      Jet gauss = (alpha + beta * mu) * (sqrt_pi / 2.0) * erfc(sa * w) / sa;
      Jet edge = exp(-(a * w * w)) * beta / (a * 2.0);
      return pref * (gauss + edge);
    };
    for (int i = i0; i < i1; ++i) {
      double x = grid_.coord(i);
      Jet t = Jet(k, 0.0);
      if (aR != 0.0 || bR != 0.0) t = t + tail(x, 1.0, aR, bR);
      // z = -u, u > R: f = aL - bL u
      if (aL != 0.0 || bL != 0.0) t = t + tail(x, -1.0, aL, -bL);
      // Euler-Maclaurin end term of the box trapezoid: -(h^2/12)(g'(R) - g'(-R)), g = K(x,.) f
      auto gprime = [&](double z, double fz, double slope) {
        Jet K = exp(J.L - J.c1 * (x * x + z * z) - J.c2 * ((x - z) * (x - z)));
        return K * (((J.c2 * (x - z)) * 2.0 - (J.c1 * z) * 2.0) * fz + slope);
      };
      t = t - (gprime(R, v[P - 1], sR) - gprime(-R, v[0], sL)) * (h * h / 12.0);
      out[i - i0] += t.derivative(k);
    }
  }

  void build_spectral() {
    if (grid_.dim != 1) throw std::invalid_argument("spectral regime is implemented for n = 1");
    int P = grid_.points, M = P - 2;
    double h = grid_.spacing();
    Eigen::VectorXd pot(M);
    for (int i = 0; i < M; ++i) pot(i) = V_(std::abs(grid_.coord(i + 1)));
    if (method_ == SpectralMethod::finite_difference) {
      Eigen::VectorXd diag = pot.array() + 2.0 / (h * h);
      Eigen::VectorXd off = Eigen::VectorXd::Constant(M - 1, -1.0 / (h * h));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
      es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
      evals_ = es.eigenvalues();
      evecs_ = es.eigenvectors();
    } else {
      // Sine basis: -d2/dx2 = U diag((k pi / 2R)^2) U^T on the interior nodes.
      Eigen::MatrixXd U(M, M);
      double norm = std::sqrt(2.0 / (M + 1));
      for (int i = 0; i < M; ++i)
        for (int m = 0; m < M; ++m) U(i, m) = norm * std::sin(pi * double(i + 1) * double(m + 1) / (M + 1));
      Eigen::VectorXd kin(M);
      for (int m = 0; m < M; ++m) kin(m) = std::pow((m + 1) * pi / (2.0 * grid_.extent), 2);
      Eigen::MatrixXd H = U * kin.asDiagonal() * U.transpose();
      H.diagonal() += pot;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
      evals_ = es.eigenvalues();
      evecs_ = es.eigenvectors();
    }
  }

  Regime regime_;
  PotentialDescriptor V_;
  Grid grid_;
  SpectralMethod method_ = SpectralMethod::dvr;
  std::shared_ptr<CriticalRadiusField> rho_;
  Eigen::VectorXd evals_;
  Eigen::MatrixXd evecs_;
};

inline GridFunction apply_heat(const SemigroupEngine& e, const GridFunction& f, double y, ApplyInfo* info = nullptr) {
  return e.apply(f, y, 0, info);
}

inline GridFunction heat_derivative(const SemigroupEngine& e, const GridFunction& f, double y, int k,
                                    ApplyInfo* info = nullptr) {
  if (k < 1 || k > 5) throw std::invalid_argument("heat derivative order must lie in 1..5");
  return e.apply(f, y, k, info);
}

// Index range of the interior band |x| <= R/2.
inline std::pair<int, int> interior_band(const Grid& g) {
  int c = g.center(), half = (g.points - 1) / 4;
  return {c - half, c + half + 1};
}

inline double band_sup(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline std::vector<double> dyadic_samples(double y0, int count) {
  std::vector<double> ys;
  for (int j = 0; j < count; ++j) ys.push_back(y0 * std::ldexp(1.0, j));
  return ys;
}

struct KernelSample {
  std::vector<double> x, z;
  double y;
};

struct HeatDerivativeBoundReport {
  size_t samples = 0;
  int k = 0;
  double M = 0.0;
  double c = 0.0;  // Gaussian rate in e^{-|x-z|^2/(c y)}
  double C = 0.0;
  double worst_ratio = 0.0;
  bool passes = false;
  std::vector<std::pair<double, double>> constant_by_c;
};

inline std::vector<double> trial_gaussian_rates() { return {4.5, 5.0, 6.0, 8.0, 10.0, 12.0, 16.0, 24.0, 32.0}; }

// Fits C_k in |d_y^k W_y(x,z)| <= C_k e^{-|x-z|^2/(cy)} y^{-k-n/2} (1+sqrt(y)/rho(x)+sqrt(y)/rho(z))^{-M}.
inline HeatDerivativeBoundReport kernel_bound_check(const SemigroupEngine& e, const std::vector<KernelSample>& samples,
                                                    int k, double M) {
  HeatDerivativeBoundReport rep;
  rep.samples = samples.size();
  rep.k = k;
  rep.M = M;
  int n = e.grid().dim;
  // Ratios are formed in log space; the Gaussian factor underflows long before the kernel does.
  std::vector<double> val(samples.size()), log_shape0(samples.size()), dist2(samples.size());
  double peak = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    val[i] = std::abs(e.kernel(s.x, s.z, s.y, k));
    peak = std::max(peak, val[i]);
    double d2 = 0.0;
    for (size_t c = 0; c < s.x.size(); ++c) d2 += std::pow(s.x[c] - s.z[c], 2);
    dist2[i] = d2;
    double br = 1.0 + std::sqrt(s.y) * (e.rho(s.x).inverse_power(1.0) + e.rho(s.z).inverse_power(1.0));
    log_shape0[i] = (-k - 0.5 * n) * std::log(s.y) - M * std::log(br);
  }
  // eigen-expansion entries below roundoff of the largest entry carry no information
  double noise = e.regime() == Regime::spectral ? 1e-12 * peak : 0.0;
  auto log_ratio = [&](size_t i, double c) { return std::log(val[i]) - log_shape0[i] + dist2[i] / (c * samples[i].y); };
  rep.C = std::numeric_limits<double>::infinity();
  for (double c : trial_gaussian_rates()) {
    double logC = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < samples.size(); ++i)
      if (val[i] > noise) logC = std::max(logC, log_ratio(i, c));
    double C = std::exp(logC);
    rep.constant_by_c.push_back({c, C});
    if (C < rep.C) { rep.C = C; rep.c = c; }
  }
  rep.passes = std::isfinite(rep.C);
  if (rep.passes && rep.C > 0.0)
    for (size_t i = 0; i < samples.size(); ++i)
      if (val[i] > noise) rep.worst_ratio = std::max(rep.worst_ratio, std::exp(log_ratio(i, rep.c) - std::log(rep.C)));
  return rep;
}

struct ConvergenceReport {
  std::vector<double> ys, errors;
  double rate = 0.0;  // fitted exponent of error vs y
  bool converges = false;
};

// ||W_y f - f|| on |x| <= R/2 along y = 2^{-j} down to the reliable floor.
inline ConvergenceReport pointwise_convergence_check(const SemigroupEngine& e, const GridFunction& f) {
  if (!f.continuous) throw std::invalid_argument("pointwise convergence check needs a continuous function");
  ConvergenceReport rep;
  auto [i0, i1] = interior_band(e.grid());
  double floor = e.reliable_window().first;
  for (int j = 1; std::ldexp(1.0, -j) >= floor; ++j) {
    double y = std::ldexp(1.0, -j);
    auto w = e.apply_range(f, y, 0, i0, i1);
    double err = 0.0;
    for (int i = i0; i < i1; ++i) err = std::max(err, std::abs(w[i - i0] - f.values[i]));
    rep.ys.push_back(y);
    rep.errors.push_back(err);
  }
  std::vector<double> lx, ly;
  for (size_t i = 0; i < rep.ys.size(); ++i)
    if (rep.errors[i] > 1e-13) { lx.push_back(std::log(rep.ys[i])); ly.push_back(std::log(rep.errors[i])); }
  if (lx.size() >= 2) rep.rate = least_squares_line(lx, ly).slope;
  double largest = 0.0;
  for (double x : rep.errors) largest = std::max(largest, x);
  rep.converges = largest <= 1e-12 || (rep.rate > 0.0 && rep.errors.back() < rep.errors.front());
  return rep;
}

struct PerturbationReport {
  GridFunction difference;  // d_t W~_t f - d_t W_t f at the requested t
  std::vector<double> ts, norms;
  double slope = 0.0;
};

// Compares the classical and Schroedinger heat derivatives.
inline PerturbationReport perturbation_difference(const SemigroupEngine& eV, const GridFunction& f, double t) {
  auto [lo, hi] = eV.reliable_window();
  if (t < lo || t > hi) throw std::invalid_argument("t outside the reliable window [10h^2, (R/4)^2]");
  SemigroupEngine e0 = SemigroupEngine::gaussian(eV.grid());
  PerturbationReport rep;
  rep.difference = heat_derivative(e0, f, t, 1) - heat_derivative(eV, f, t, 1);
  auto [i0, i1] = interior_band(eV.grid());
  for (double s : dyadic_samples(lo, 8)) {
    if (s > hi) break;
    auto a = e0.apply_range(f, s, 1, i0, i1), b = eV.apply_range(f, s, 1, i0, i1);
    for (size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    rep.ts.push_back(s);
    rep.norms.push_back(band_sup(a));
  }
  std::vector<double> lx, ly;
  for (size_t i = 0; i < rep.ts.size(); ++i)
    if (rep.norms[i] > 0.0) { lx.push_back(std::log(rep.ts[i])); ly.push_back(std::log(rep.norms[i])); }
  rep.slope = lx.size() >= 2 ? least_squares_line(lx, ly).slope : 0.0;
  return rep;
}

// sup on |x| <= R/2 of W~_t f - W_t f - int_0^t W~_{t-s} V W_s f ds (composite midpoint in s).
inline double kato_trotter_residual(const SemigroupEngine& eV, const GridFunction& f, double t, int nodes) {
  if (nodes < 1) throw std::invalid_argument("need at least one s-node");
  if (!(t > 0.0)) throw std::invalid_argument("t must be positive");
  SemigroupEngine e0 = SemigroupEngine::gaussian(eV.grid());
  const Grid& g = eV.grid();
  auto lhs = apply_heat(e0, f, t) - apply_heat(eV, f, t);
  std::vector<double> acc(g.points, 0.0);
  double ds = t / nodes;
  for (int i = 0; i < nodes; ++i) {
    double s = (i + 0.5) * ds;
    auto ws = apply_heat(eV, f, s);
    for (int j = 0; j < g.points; ++j) ws.values[j] *= eV.potential()(std::abs(g.coord(j)));
    ws.tail = Tail::zero;
    auto term = apply_heat(e0, ws, t - s);
    for (int j = 0; j < g.points; ++j) acc[j] += ds * term.values[j];
  }
  auto [i0, i1] = interior_band(g);
  double r = 0.0;
  for (int j = i0; j < i1; ++j) r = std::max(r, std::abs(lhs.values[j] - acc[j]));
  return r;
}

struct WeightedDerivativeReport {
  Verdict status = Verdict::indeterminate;
  std::string note;
  std::vector<double> ys, norms;
  double bound_exponent = 0.0;  // -(m/2+j)+alpha/2
  double fitted_slope = 0.0;
  double C = 0.0;
  double worst_ratio = 0.0;
};

// Checks ||rho^{-m} d_y^j W_y f|| <= C y^{-(m/2+j)+alpha/2} over the dyadic heat window.
inline WeightedDerivativeReport weighted_derivative_check(const SemigroupEngine& e, const GridFunction& f, double alpha,
                                                          int j, int m) {
  int k = int(std::floor(alpha / 2.0)) + 1;
  if (0.5 * m + j < k) throw hypothesis_error("weighted derivative check requires m/2 + j >= [alpha/2] + 1");
  WeightedDerivativeReport rep;
  rep.bound_exponent = -(0.5 * m + j) + 0.5 * alpha;
  if (m > 0 && e.potential().kind == PotentialKind::zero) {
    rep.status = Verdict::not_applicable;
    rep.note = "rho unbounded";
    return rep;
  }
  auto [i0, i1] = interior_band(e.grid());
  std::vector<double> w(i1 - i0);
  for (int i = i0; i < i1; ++i) w[i - i0] = e.rho({e.grid().coord(i)}).inverse_power(m);
  auto [lo, hi] = e.reliable_window();
  for (double y : dyadic_samples(lo, 8)) {
    if (y > hi) break;
    auto d = j == 0 ? e.apply_range(f, y, 0, i0, i1) : e.apply_range(f, y, j, i0, i1);
    for (size_t i = 0; i < d.size(); ++i) d[i] *= w[i];
    rep.ys.push_back(y);
    rep.norms.push_back(band_sup(d));
  }
  std::vector<double> lx, ly;
  for (size_t i = 0; i < rep.ys.size(); ++i) {
    rep.C = std::max(rep.C, rep.norms[i] * std::pow(rep.ys[i], -rep.bound_exponent));
    if (rep.norms[i] > 0.0) { lx.push_back(std::log(rep.ys[i])); ly.push_back(std::log(rep.norms[i])); }
  }
  if (rep.C > 0.0)
    for (size_t i = 0; i < rep.ys.size(); ++i)
      rep.worst_ratio = std::max(rep.worst_ratio, rep.norms[i] * std::pow(rep.ys[i], -rep.bound_exponent) / rep.C);
  rep.fitted_slope = lx.size() >= 2 ? least_squares_line(lx, ly).slope : 0.0;
  rep.status = lx.size() < 2 ? Verdict::pass : margin_verdict(rep.fitted_slope - rep.bound_exponent, 0.1);
  return rep;
}

// Kernel entries d_y^k W_y(x, z) over grid points as `x,z,value`, every stride-th node.
inline void export_kernel_csv(const SemigroupEngine& e, double y, int k, int stride, std::ostream& os) {
  const Grid& g = e.grid();
  if (stride < 1) throw std::invalid_argument("stride must be positive");
  os << "x,z,value\n";
  char buf[96];
  for (int i = 0; i < g.points; i += stride)
    for (int j = 0; j < g.points; j += stride) {
      double x = g.coord(i), z = g.coord(j);
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", x, z, e.kernel({x}, {z}, y, k));
      os << buf;
    }
}

}  // namespace schrolip

#endif  // SCHROLIP_HEAT_HPP

#ifndef SCHROLIP_LIPSCHITZ_HPP
#define SCHROLIP_LIPSCHITZ_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "common.hpp"
#include "grid.hpp"
#include "heat.hpp"
#include "poisson.hpp"
#include "potentials.hpp"

namespace schrolip {

inline constexpr double heat_slope_tolerance = 0.05;
inline constexpr double poisson_slope_tolerance = 0.1;
inline constexpr int heat_order_cap = 5;
inline constexpr int poisson_order_cap = 3;

inline int heat_order(double alpha) { return int(std::floor(alpha / 2.0)) + 1; }
inline int poisson_order(double alpha) { return int(std::floor(alpha)) + 1; }

struct SmoothnessParams {
  double alpha = 0.0;
  int k_heat = 1;
  int k_poisson = 1;
  bool admissible = true;  // alpha <= 2 - n/q (q finite) or alpha < 2 (all q)
  std::string range;

  static SmoothnessParams make(double alpha, const PotentialDescriptor& V) {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    SmoothnessParams p;
    p.alpha = alpha;
    p.k_heat = heat_order(alpha);
    p.k_poisson = poisson_order(alpha);
    if (V.rh_exponent) {
      double top = 2.0 - V.dim / *V.rh_exponent;
      p.admissible = alpha <= top;
      std::ostringstream os;
      os << "0 < alpha <= 2 - n/q = " << top;
      p.range = os.str();
    } else {
      p.admissible = alpha < 2.0;
      p.range = "0 < alpha < 2 (V in RH_q for every q)";
    }
    return p;
  }
};

// Log-log fit of sup |d^k T_y f| over the band |x| <= R/2 at dyadic samples.
struct ScalingFit {
  int order = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  double y_min = 0.0, y_max = 0.0;
  int samples = 0;
  bool degenerate = false;  // derivative vanishes: infinitely smooth
  bool clipped = false;     // slope clipped into [-k, 0]
  double raw_slope = 0.0;
  std::vector<double> ys, norms;

  // S estimate max_j y_j^{k - a} norms_j; a = alpha/2 (heat) or alpha (Poisson).
  double size_estimate(double a) const {
    double s = 0.0;
    for (size_t j = 0; j < ys.size(); ++j) s = std::max(s, std::pow(ys[j], order - a) * norms[j]);
    return s;
  }
};

// Heat-time window: `samples` dyadic points starting at y_min (default 10 h^2).
struct FitWindow {
  double y_min = 0.0;
  int samples = 8;
};

namespace detail {

inline ScalingFit finish_fit(ScalingFit fit, double scale) {
  double top = 0.0;
  for (size_t j = 0; j < fit.ys.size(); ++j) top = std::max(top, fit.norms[j] * std::pow(fit.ys[j], fit.order));
  fit.samples = int(fit.ys.size());
  fit.y_min = fit.ys.front();
  fit.y_max = fit.ys.back();
  if (scale == 0.0 || top <= 1e-9 * scale) {
    fit.degenerate = true;
    return fit;
  }
  std::vector<double> lx, ly;
  for (size_t j = 0; j < fit.ys.size(); ++j) {
    lx.push_back(std::log(fit.ys[j]));
    ly.push_back(std::log(std::max(fit.norms[j], 1e-300)));
  }
  auto line = least_squares_line(lx, ly);
  fit.raw_slope = line.slope;
  fit.slope = std::clamp(line.slope, -double(fit.order), 0.0);
  fit.clipped = fit.slope != line.slope;
  fit.intercept = line.intercept;
  fit.residual = line.residual;
  return fit;
}

inline double band_scale(const GridFunction& f) {
  auto [i0, i1] = interior_band(f.grid);
  double s = 0.0;
  for (int i = i0; i < i1; ++i) s = std::max(s, std::abs(f.values[i]));
  return s;
}

}  // namespace detail

inline FitWindow resolve_window(const SemigroupEngine& e, FitWindow w) {
  auto [lo, hi] = e.reliable_window();
  if (w.y_min <= 0.0) w.y_min = lo;
  if (w.samples < 8) throw std::invalid_argument("a scaling fit needs at least 8 dyadic samples");
  if (w.y_min < lo * (1.0 - 1e-12) || w.y_min * std::ldexp(1.0, w.samples - 1) > hi * (1.0 + 1e-12))
    throw std::invalid_argument("fit window outside the reliable heat window [10h^2, (R/4)^2]");
  return w;
}

inline ScalingFit heat_scaling_fit(const SemigroupEngine& e, const GridFunction& f, int k, FitWindow window = {}) {
  if (k < 1 || k > heat_order_cap) throw std::invalid_argument("heat fit order must lie in 1..5");
  window = resolve_window(e, window);
  auto [i0, i1] = interior_band(e.grid());
  ScalingFit fit;
  fit.order = k;
  for (double y : dyadic_samples(window.y_min, window.samples)) {
    fit.ys.push_back(y);
    fit.norms.push_back(band_sup(e.apply_range(f, y, k, i0, i1)));
  }
  return detail::finish_fit(std::move(fit), detail::band_scale(f));
}

// Poisson samples y_j = sqrt(tau_j) for the dyadic heat-time window tau_j.
inline ScalingFit poisson_scaling_fit(const SemigroupEngine& e, const GridFunction& f, int k, FitWindow window = {}) {
  if (k < 1 || k > poisson_order_cap) throw std::invalid_argument("Poisson fit order must lie in 1..3");
  window = resolve_window(e, window);
  auto [i0, i1] = interior_band(e.grid());
  std::vector<double> ys;
  for (double t : dyadic_samples(window.y_min, window.samples)) ys.push_back(std::sqrt(t));
  PoissonSampler sampler(e, f, ys.front(), ys.back(), i0, i1);
  ScalingFit fit;
  fit.order = k;
  for (double y : ys) {
    fit.ys.push_back(y);
    fit.norms.push_back(band_sup(sampler.evaluate(y, k)));
  }
  return detail::finish_fit(std::move(fit), detail::band_scale(f));
}

// M^L_alpha[f] = sup |rho^{-alpha} f|; zero with a flag when rho is unbounded.
struct WeightedSize {
  double value = 0.0;
  bool rho_unbounded = false;
};

inline WeightedSize weighted_size(const GridFunction& f, double alpha, const CriticalRadiusField& rho) {
  WeightedSize w;
  for (size_t i = 0; i < f.values.size(); ++i) {
    Radius r = rho(f.grid.point(i));
    if (r.unbounded) { w.rho_unbounded = true; continue; }
    w.value = std::max(w.value, std::abs(f.values[i]) * r.inverse_power(alpha));
  }
  return w;
}

inline double zygmund_seminorm(const GridFunction& f, double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw std::invalid_argument("Zygmund seminorm needs alpha in (0,2]");
  return second_difference_sup(f, alpha);
}

inline double first_difference_seminorm(const GridFunction& f, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("first-difference seminorm needs alpha in (0,1]");
  return first_difference_sup(f, alpha);
}

// M~_alpha[f] = sup (1+|x|)^{-alpha} |f|.
inline double polynomial_size(const GridFunction& f, double alpha) {
  const Grid& g = f.grid;
  return sup_norm(f, [&](const std::vector<double>& x) {
    double r = 0.0;
    for (double c : x) r += c * c;
    return std::pow(1.0 + std::sqrt(r), -alpha);
  });
}

// Growth of N_alpha from the 2x-coarsened grid to the grid: e = log2(N_fine / N_coarse).
struct RefinementTrend {
  double fine = 0.0, coarse = 0.0, exponent = 0.0;
  Verdict membership = Verdict::indeterminate;  // pass = bounded, fail = growing
};

inline RefinementTrend zygmund_refinement_trend(const GridFunction& f, double alpha) {
  RefinementTrend t;
  t.fine = zygmund_seminorm(f, alpha);
  t.coarse = zygmund_seminorm(coarsen(f), alpha);
  if (t.fine == 0.0 && t.coarse == 0.0) t.exponent = 0.0;
  else if (t.coarse == 0.0) t.exponent = std::numeric_limits<double>::infinity();
  else t.exponent = std::log2(t.fine / t.coarse);
  if (t.exponent <= 0.15) t.membership = Verdict::pass;
  else if (t.exponent >= 0.25) t.membership = Verdict::fail;
  else t.membership = Verdict::indeterminate;
  return t;
}

inline Verdict combine_legs(const std::vector<Verdict>& legs, bool* consistent = nullptr) {
  std::vector<Verdict> used;
  for (Verdict v : legs)
    if (v != Verdict::not_applicable) used.push_back(v);
  bool all_pass = !used.empty(), all_fail = !used.empty();
  for (Verdict v : used) {
    all_pass = all_pass && v == Verdict::pass;
    all_fail = all_fail && v == Verdict::fail;
  }
  if (consistent) *consistent = all_pass || all_fail;
  if (used.empty()) return Verdict::not_applicable;
  return all_pass ? Verdict::pass : all_fail ? Verdict::fail : Verdict::indeterminate;
}

struct EquivalenceRecord {
  SmoothnessParams params;
  WeightedSize m_l;
  RefinementTrend zygmund;
  ScalingFit heat, poisson;
  int poisson_fit_order = 0;
  double heat_predicted = 0.0, poisson_predicted = 0.0;
  double heat_margin = 0.0, poisson_margin = 0.0;
  PoissonSizeReport m_p;
  Verdict seminorm_leg = Verdict::indeterminate;
  Verdict heat_leg = Verdict::indeterminate;
  Verdict poisson_leg = Verdict::indeterminate;
  Verdict verdict = Verdict::indeterminate;
  bool legs_consistent = false;
  std::vector<std::string> notes;
};

inline Verdict slope_membership(const ScalingFit& fit, double predicted, double tol, double* margin) {
  if (fit.degenerate) { *margin = 0.0; return Verdict::pass; }
  *margin = fit.slope - predicted;
  return margin_verdict(*margin, tol);
}

struct SlopeTolerances {
  double heat = heat_slope_tolerance;
  double poisson = poisson_slope_tolerance;
};

inline EquivalenceRecord verify_space_equivalence(const SemigroupEngine& e, const GridFunction& f, double alpha,
                                                  FitWindow window = {}, SlopeTolerances tol = {}) {
  EquivalenceRecord r;
  r.params = SmoothnessParams::make(alpha, e.potential());
  if (!r.params.admissible) throw hypothesis_error("alpha outside the admissible range " + r.params.range);
  r.m_l = weighted_size(f, alpha, e.rho_field());
  if (r.m_l.rho_unbounded) r.notes.push_back("rho unbounded: M^L_alpha uses the zero-weight convention");
  r.zygmund = zygmund_refinement_trend(f, alpha);
  r.seminorm_leg = r.zygmund.membership;

  int kh = std::min(r.params.k_heat, heat_order_cap);
  r.heat = heat_scaling_fit(e, f, kh, window);
  r.heat_predicted = -kh + 0.5 * alpha;
  r.heat_leg = slope_membership(r.heat, r.heat_predicted, tol.heat, &r.heat_margin);

  r.m_p = poisson_size_norm(f);
  if (r.m_p.diverges) {
    r.poisson_leg = Verdict::not_applicable;
    r.notes.push_back("Poisson size condition fails; Poisson leg not applicable");
  } else {
    r.poisson_fit_order = std::min(std::max(r.params.k_poisson, 2), poisson_order_cap);
    r.poisson = poisson_scaling_fit(e, f, r.poisson_fit_order, window);
    r.poisson_predicted = -r.poisson_fit_order + alpha;
    r.poisson_leg = slope_membership(r.poisson, r.poisson_predicted, tol.poisson, &r.poisson_margin);
  }
  r.verdict = combine_legs({r.seminorm_leg, r.heat_leg, r.poisson_leg}, &r.legs_consistent);
  return r;
}

struct DerivativeTransferReport {
  ScalingFit fit;
  double predicted = 0.0;
  double margin = 0.0;
  Verdict verdict = Verdict::indeterminate;
};

// Differentiates f and checks the heat fit of df at level alpha - 1.
inline DerivativeTransferReport derivative_transfer_check(const SemigroupEngine& e, const GridFunction& f, double alpha,
                                                          FitWindow window = {}) {
  if (!(alpha > 1.0 && alpha < 2.0)) throw hypothesis_error("derivative transfer needs 1 < alpha < 2");
  DerivativeTransferReport rep;
  auto df = centered_derivative(f, 0);
  int k = heat_order(alpha - 1.0);
  rep.fit = heat_scaling_fit(e, df, k, window);
  rep.predicted = -k + 0.5 * (alpha - 1.0);
  rep.verdict = slope_membership(rep.fit, rep.predicted, poisson_slope_tolerance, &rep.margin);
  return rep;
}

struct SeminormReport {
  double alpha = 0.0;
  std::optional<double> M_L_alpha, N_alpha, M_tilde_alpha, M_P, S_W_alpha, S_P_alpha, first_diff_lipschitz;
  std::optional<ScalingFit> heat_fit, poisson_fit;
  std::map<std::string, Verdict> verdicts;
  std::vector<std::string> notes;
};

inline SeminormReport seminorm_report(const SemigroupEngine& e, const GridFunction& f, double alpha,
                                      FitWindow window = {}, SlopeTolerances tol = {}) {
  SeminormReport rep;
  rep.alpha = alpha;
  auto rec = verify_space_equivalence(e, f, alpha, window, tol);
  if (!rec.m_l.rho_unbounded) rep.M_L_alpha = rec.m_l.value;
  else rep.M_L_alpha = 0.0;
  rep.N_alpha = rec.zygmund.fine;
  rep.M_tilde_alpha = polynomial_size(f, alpha);
  if (!rec.m_p.diverges) rep.M_P = rec.m_p.value;
  rep.heat_fit = rec.heat;
  rep.S_W_alpha = rec.heat.size_estimate(0.5 * alpha);
  if (!rec.m_p.diverges) {
    rep.poisson_fit = rec.poisson;
    rep.S_P_alpha = rec.poisson.size_estimate(alpha);
  }
  if (alpha <= 1.0) rep.first_diff_lipschitz = first_difference_seminorm(f, alpha);
  rep.verdicts["seminorm_leg"] = rec.seminorm_leg;
  rep.verdicts["heat_leg"] = rec.heat_leg;
  rep.verdicts["poisson_leg"] = rec.poisson_leg;
  rep.verdicts["identities"] = rec.verdict;
  rep.notes = rec.notes;
  return rep;
}

}  // namespace schrolip

#endif  // SCHROLIP_LIPSCHITZ_HPP

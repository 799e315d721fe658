#ifndef SCHROLIP_COMMON_HPP
#define SCHROLIP_COMMON_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace schrolip {

inline constexpr double pi = 3.14159265358979323846;

// Raised when a computation would need data outside the discretized domain.
struct truncation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a theorem's hypotheses are not met by the configuration.
struct hypothesis_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A length that may be unbounded (e.g. the critical radius of V = 0).
// Never carried as a floating-point infinity inside arithmetic.
struct Radius {
  double value = 0.0;
  bool unbounded = false;

  static Radius infinite() { return {0.0, true}; }
  static Radius finite(double v) { return {v, false}; }

  // r^{-p}, with the convention 1/inf = 0.
  double inverse_power(double p) const { return unbounded ? 0.0 : std::pow(value, -p); }
};

enum class Verdict { pass, fail, indeterminate, not_applicable };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "PASS";
    case Verdict::fail: return "FAIL";
    case Verdict::indeterminate: return "INDETERMINATE";
    case Verdict::not_applicable: return "NOT-APPLICABLE";
  }
  return "INDETERMINATE";
}

// Three-valued comparison of a measured margin against a tolerance.
// margin >= -tol is membership; within tol/5 of the edge is undecided.
inline Verdict margin_verdict(double margin, double tol) {
  double band = tol / 5.0;
  if (margin >= -tol + band) return Verdict::pass;
  if (margin <= -tol - band) return Verdict::fail;
  return Verdict::indeterminate;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // max absolute deviation from the line
};

inline LineFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("line fit needs at least two points");
  double n = double(x.size()), sx = 0, sy = 0;
  for (size_t i = 0; i < x.size(); ++i) { sx += x[i]; sy += y[i]; }
  double mx = sx / n, my = sy / n, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (size_t i = 0; i < x.size(); ++i)
    f.residual = std::max(f.residual, std::abs(y[i] - (f.intercept + f.slope * x[i])));
  return f;
}

// Surface area of the unit sphere S^{n-1} in R^n.
inline double sphere_area(int n) {
  return 2.0 * std::pow(pi, 0.5 * n) / std::tgamma(0.5 * n);
}

inline double ball_volume(int n, double r) {
  return sphere_area(n) * std::pow(r, n) / n;
}

}  // namespace schrolip

#endif  // SCHROLIP_COMMON_HPP

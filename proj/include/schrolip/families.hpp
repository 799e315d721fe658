#ifndef SCHROLIP_FAMILIES_HPP
#define SCHROLIP_FAMILIES_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "common.hpp"
#include "grid.hpp"

namespace schrolip {

// L2-normalized Hermite function h_k by the three-term recurrence.
inline double hermite_function(int k, double x) {
  if (k < 0) throw std::invalid_argument("Hermite index must be nonnegative");
  double h0 = std::pow(pi, -0.25) * std::exp(-0.5 * x * x);
  if (k == 0) return h0;
  double hm = h0, h = std::sqrt(2.0) * x * h0;
  for (int j = 1; j < k; ++j) {
    double next = std::sqrt(2.0 / (j + 1)) * x * h - std::sqrt(double(j) / (j + 1)) * hm;
    hm = h;
    h = next;
  }
  return h;
}

// C-infinity step: 0 for u <= 0, 1 for u >= 1.
inline double smoothstep(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  double a = std::exp(-1.0 / u), b = std::exp(-1.0 / (1.0 - u));
  return a / (a + b);
}

// 1 on |x| <= R/16, 0 beyond R/2.
inline double flat_top_cutoff(double r, double R) {
  double lo = R / 16.0, hi = R / 2.0;
  return 1.0 - smoothstep((r - lo) / (hi - lo));
}

inline double euclid(const std::vector<double>& x) {
  double s = 0.0;
  for (double c : x) s += c * c;
  return std::sqrt(s);
}

// Builtin test functions: abs-pow:s, hermite-hk:k, hermite-h0, const:c,
// xlogx, x-bump, step-bump, zero.
inline GridFunction builtin_function(const std::string& spec, const Grid& g) {
  auto colon = spec.find(':');
  std::string name = spec.substr(0, colon);
  std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  double R = g.extent;
  auto number = [&](const char* what) {
    try {
      size_t used = 0;
      double v = std::stod(arg, &used);
      if (used != arg.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw std::invalid_argument("function '" + spec + "': expected " + what + " after ':'");
    }
  };
  if (name == "abs-pow") {
    double s = number("an exponent s");
    if (!(s > 0.0)) throw std::invalid_argument("abs-pow needs s > 0");
    return GridFunction::sample(g, [&](const std::vector<double>& x) {
      return std::pow(std::abs(x[0]), s) * flat_top_cutoff(euclid(x), R);
    }, s);
  }
  if (name == "hermite-h0" || name == "hermite-hk") {
    int k = 0;
    if (name == "hermite-hk") {
      double v = number("an index k");
      if (v < 0 || v != std::floor(v)) throw std::invalid_argument("hermite-hk needs a nonnegative integer index");
      k = int(v);
    }
    return GridFunction::sample(g, [&](const std::vector<double>& x) {
      double p = hermite_function(k, x[0]);
      for (size_t d = 1; d < x.size(); ++d) p *= hermite_function(0, x[d]);
      return p;
    });
  }
  if (name == "const") {
    double c = number("a constant c");
    return GridFunction::sample(g, [&](const std::vector<double>&) { return c; }, 0.0, Tail::affine);
  }
  if (name == "xlogx") {
    return GridFunction::sample(g, [&](const std::vector<double>& x) {
      double t = std::abs(x[0]);
      return t == 0.0 ? 0.0 : x[0] * std::log(t) * flat_top_cutoff(euclid(x), R);
    }, 1.0);
  }
  if (name == "x-bump") {
    return GridFunction::sample(g, [&](const std::vector<double>& x) {
      return x[0] * flat_top_cutoff(euclid(x), R);
    }, 1.0);
  }
  if (name == "step-bump") {
    GridFunction f = GridFunction::sample(g, [&](const std::vector<double>& x) {
      return (x[0] >= 0.0 ? 1.0 : 0.0) * flat_top_cutoff(euclid(x), R);
    });
    f.continuous = false;
    return f;
  }
  if (name == "zero") return GridFunction::zeros(g);
  throw std::invalid_argument("unknown function '" + spec +
                              "' (abs-pow:s, hermite-hk:k, hermite-h0, const:c, xlogx, x-bump, step-bump, zero)");
}

}  // namespace schrolip

#endif  // SCHROLIP_FAMILIES_HPP

#ifndef SCHROLIP_JET_HPP
#define SCHROLIP_JET_HPP

// Truncated Taylor series in one variable. c[k] holds f^{(k)}(t0)/k!.
// Used for exact t- and y-derivatives of closed-form kernels and weights.

#include <array>
#include <cmath>
#include <stdexcept>

namespace schrolip {

inline constexpr int jet_max_order = 8;

struct Jet {
  int order = 0;
  std::array<double, jet_max_order + 1> c{};

  Jet() = default;
  Jet(int n, double value) : order(n) {
    if (n < 0 || n > jet_max_order) throw std::invalid_argument("jet order out of range");
    c[0] = value;
  }

  static Jet variable(int n, double t0) {
    Jet j(n, t0);
    if (n >= 1) j.c[1] = 1.0;
    return j;
  }

  double value() const { return c[0]; }

  // k-th derivative at the expansion point.
  double derivative(int k) const {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return c[k] * f;
  }
};

inline Jet operator+(Jet a, const Jet& b) {
  for (int k = 0; k <= a.order; ++k) a.c[k] += b.c[k];
  return a;
}
inline Jet operator-(Jet a, const Jet& b) {
  for (int k = 0; k <= a.order; ++k) a.c[k] -= b.c[k];
  return a;
}
inline Jet operator-(Jet a) {
  for (int k = 0; k <= a.order; ++k) a.c[k] = -a.c[k];
  return a;
}
inline Jet operator+(Jet a, double s) { a.c[0] += s; return a; }
inline Jet operator+(double s, Jet a) { a.c[0] += s; return a; }
inline Jet operator-(Jet a, double s) { a.c[0] -= s; return a; }
inline Jet operator-(double s, const Jet& a) { return s + (-a); }
inline Jet operator*(Jet a, double s) {
  for (int k = 0; k <= a.order; ++k) a.c[k] *= s;
  return a;
}
inline Jet operator*(double s, Jet a) { return a * s; }
inline Jet operator/(Jet a, double s) { return a * (1.0 / s); }

inline Jet operator*(const Jet& a, const Jet& b) {
  Jet r(a.order, 0.0);
  for (int k = 0; k <= a.order; ++k) {
    double s = 0.0;
    for (int j = 0; j <= k; ++j) s += a.c[j] * b.c[k - j];
    r.c[k] = s;
  }
  return r;
}

inline Jet operator/(const Jet& a, const Jet& b) {
  Jet q(a.order, 0.0);
  for (int k = 0; k <= a.order; ++k) {
    double s = a.c[k];
    for (int j = 0; j < k; ++j) s -= q.c[j] * b.c[k - j];
    q.c[k] = s / b.c[0];
  }
  return q;
}
inline Jet operator/(double s, const Jet& b) { return Jet(b.order, s) / b; }

inline Jet exp(const Jet& a) {
  Jet e(a.order, std::exp(a.c[0]));
  for (int k = 1; k <= a.order; ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j) s += j * a.c[j] * e.c[k - j];
    e.c[k] = s / k;
  }
  return e;
}

inline Jet log(const Jet& a) {
  Jet l(a.order, std::log(a.c[0]));
  for (int k = 1; k <= a.order; ++k) {
    double s = a.c[k];
    for (int j = 1; j < k; ++j) s -= (double(j) / k) * l.c[j] * a.c[k - j];
    l.c[k] = s / a.c[0];
  }
  return l;
}

inline Jet pow(const Jet& a, double p) {
  Jet b(a.order, std::pow(a.c[0], p));
  for (int k = 1; k <= a.order; ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j) s += (p * j - (k - j)) * a.c[j] * b.c[k - j];
    b.c[k] = s / (k * a.c[0]);
  }
  return b;
}

inline Jet sqrt(const Jet& a) { return pow(a, 0.5); }

// Integrates g = d/da F(a) along a: F_k = (1/k) sum_j j a_j g_{k-j}.
inline Jet compose_integral(double f0, const Jet& a, const Jet& g) {
  Jet r(a.order, f0);
  for (int k = 1; k <= a.order; ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j) s += j * a.c[j] * g.c[k - j];
    r.c[k] = s / k;
  }
  return r;
}

inline Jet erfc(const Jet& a) {
  constexpr double two_over_sqrt_pi = 1.1283791670955126;
  Jet g = exp(-(a * a)) * (-two_over_sqrt_pi);
  return compose_integral(std::erfc(a.c[0]), a, g);
}

inline Jet erf(const Jet& a) {
  constexpr double two_over_sqrt_pi = 1.1283791670955126;
  Jet g = exp(-(a * a)) * two_over_sqrt_pi;
  return compose_integral(std::erf(a.c[0]), a, g);
}

inline Jet sinh(const Jet& a) {
  Jet s(a.order, std::sinh(a.c[0]));
  Jet ch(a.order, std::cosh(a.c[0]));
  for (int k = 1; k <= a.order; ++k) {
    double ss = 0.0, cc = 0.0;
    for (int j = 1; j <= k; ++j) {
      ss += j * a.c[j] * ch.c[k - j];
      cc += j * a.c[j] * s.c[k - j];
    }
    s.c[k] = ss / k;
    ch.c[k] = cc / k;
  }
  return s;
}

inline Jet cosh(const Jet& a) {
  Jet s(a.order, std::sinh(a.c[0]));
  Jet ch(a.order, std::cosh(a.c[0]));
  for (int k = 1; k <= a.order; ++k) {
    double ss = 0.0, cc = 0.0;
    for (int j = 1; j <= k; ++j) {
      ss += j * a.c[j] * ch.c[k - j];
      cc += j * a.c[j] * s.c[k - j];
    }
    s.c[k] = ss / k;
    ch.c[k] = cc / k;
  }
  return ch;
}

// 1 - exp(-a) without cancellation in the constant term.
inline Jet one_minus_exp_neg(const Jet& a) {
  Jet e = exp(-a);
  Jet r = -e;
  r.c[0] = -std::expm1(-a.c[0]);
  return r;
}

}  // namespace schrolip

#endif  // SCHROLIP_JET_HPP

#ifndef SCHROLIP_GRID_HPP
#define SCHROLIP_GRID_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "common.hpp"

namespace schrolip {

// Uniform tensor grid on [-R, R]^n with an odd number of points per axis.
struct Grid {
  int dim = 1;
  double extent = 1.0;
  int points = 3;

  Grid() = default;
  Grid(int n, double R, int p) : dim(n), extent(R), points(p) {
    if (n < 1) throw std::invalid_argument("grid dimension must be positive");
    if (!(R > 0.0)) throw std::invalid_argument("grid extent must be positive");
    if (p < 3 || p % 2 == 0) throw std::invalid_argument("points per axis must be odd and >= 3");
  }

  double spacing() const { return 2.0 * extent / (points - 1); }
  double coord(int i) const { return (i - (points - 1) / 2) * spacing(); }
  int center() const { return points / 2; }

  size_t size() const {
    size_t s = 1;
    for (int d = 0; d < dim; ++d) s *= size_t(points);
    return s;
  }

  // Axis 0 varies slowest.
  std::vector<int> multi_index(size_t flat) const {
    std::vector<int> idx(dim);
    for (int d = dim - 1; d >= 0; --d) {
      idx[d] = int(flat % points);
      flat /= points;
    }
    return idx;
  }

  size_t flat_index(const std::vector<int>& idx) const {
    size_t f = 0;
    for (int d = 0; d < dim; ++d) f = f * points + size_t(idx[d]);
    return f;
  }

  std::vector<double> point(size_t flat) const {
    auto idx = multi_index(flat);
    std::vector<double> x(dim);
    for (int d = 0; d < dim; ++d) x[d] = coord(idx[d]);
    return x;
  }

  double radius(size_t flat) const {
    auto x = point(flat);
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
  }

  bool coarsenable() const { return (points - 1) % 2 == 0 && (points - 1) / 2 + 1 >= 3; }
  Grid coarsened() const { return Grid(dim, extent, (points - 1) / 2 + 1); }
  Grid refined() const { return Grid(dim, extent, 2 * (points - 1) + 1); }

  bool operator==(const Grid& o) const {
    return dim == o.dim && extent == o.extent && points == o.points;
  }
};

// How a sampled function continues outside the box.
enum class Tail { zero, affine };

struct GridFunction {
  Grid grid;
  std::vector<double> values;
  double growth_exponent = 0.0;  // asserted |f(x)| <= C (1+|x|)^gamma
  Tail tail = Tail::zero;
  bool continuous = true;  // false when the samples encode a jump

  GridFunction() = default;
  GridFunction(Grid g, std::vector<double> v, double gamma = 0.0, Tail t = Tail::zero)
      : grid(g), values(std::move(v)), growth_exponent(gamma), tail(t) {
    if (values.size() != grid.size()) throw std::invalid_argument("value count does not match grid");
    if (gamma < 0.0) throw std::invalid_argument("growth exponent must be nonnegative");
    for (double x : values)
      if (!std::isfinite(x)) throw std::invalid_argument("grid function values must be finite");
  }

  static GridFunction zeros(const Grid& g) { return GridFunction(g, std::vector<double>(g.size(), 0.0)); }

  static GridFunction sample(const Grid& g, const std::function<double(const std::vector<double>&)>& fn,
                             double gamma = 0.0, Tail t = Tail::zero) {
    std::vector<double> v(g.size());
    for (size_t i = 0; i < g.size(); ++i) v[i] = fn(g.point(i));
    return GridFunction(g, std::move(v), gamma, t);
  }

  // The constant C of the declared growth bound, measured on the grid.
  double growth_constant() const {
    double c = 0.0;
    for (size_t i = 0; i < values.size(); ++i)
      c = std::max(c, std::abs(values[i]) / std::pow(1.0 + grid.radius(i), growth_exponent));
    return c;
  }

  // True when f vanishes on the outermost layer, so the zero tail is exact.
  bool vanishes_at_boundary() const {
    if (tail != Tail::zero) return false;
    for (size_t i = 0; i < values.size(); ++i) {
      auto idx = grid.multi_index(i);
      for (int d = 0; d < grid.dim; ++d)
        if ((idx[d] == 0 || idx[d] == grid.points - 1) && values[i] != 0.0) return false;
    }
    return true;
  }

  GridFunction with_values(std::vector<double> v) const {
    GridFunction g = *this;
    g.values = std::move(v);
    return g;
  }
};

inline GridFunction operator+(const GridFunction& a, const GridFunction& b) {
  std::vector<double> v(a.values.size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = a.values[i] + b.values[i];
  return a.with_values(std::move(v));
}
inline GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  std::vector<double> v(a.values.size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = a.values[i] - b.values[i];
  return a.with_values(std::move(v));
}
inline GridFunction operator*(double c, const GridFunction& a) {
  std::vector<double> v(a.values);
  for (double& x : v) x *= c;
  return a.with_values(std::move(v));
}

// Tensor-product trapezoidal rule over the box.
inline double integrate(const GridFunction& f) {
  const Grid& g = f.grid;
  double h = g.spacing(), s = 0.0;
  for (size_t i = 0; i < f.values.size(); ++i) {
    auto idx = g.multi_index(i);
    double w = 1.0;
    for (int d = 0; d < g.dim; ++d) w *= (idx[d] == 0 || idx[d] == g.points - 1) ? 0.5 * h : h;
    s += w * f.values[i];
  }
  return s;
}

using PointWeight = std::function<double(const std::vector<double>&)>;

inline double sup_norm(const GridFunction& f, const PointWeight& weight = nullptr) {
  double m = 0.0;
  for (size_t i = 0; i < f.values.size(); ++i) {
    double w = weight ? weight(f.grid.point(i)) : 1.0;
    m = std::max(m, std::abs(w * f.values[i]));
  }
  return m;
}

// Enumerates nonzero shift vectors (up to sign) with Euclidean length <= max_len, in grid units.
inline std::vector<std::vector<int>> half_space_shifts(const Grid& g, double max_len) {
  int m = int(std::floor(max_len / g.spacing() + 1e-9));
  std::vector<std::vector<int>> out;
  std::vector<int> z(g.dim, -m);
  auto first_nonzero_positive = [](const std::vector<int>& v) {
    for (int c : v)
      if (c != 0) return c > 0;
    return false;
  };
  while (true) {
    double len2 = 0.0;
    for (int c : z) len2 += double(c) * c;
    if (len2 > 0 && len2 <= double(m) * m + 1e-9 && first_nonzero_positive(z)) out.push_back(z);
    int d = g.dim - 1;
    while (d >= 0 && z[d] == m) { z[d] = -m; --d; }
    if (d < 0) break;
    ++z[d];
  }
  return out;
}

// N_alpha on the grid: max over on-grid x, x+-z of |f(x+z)+f(x-z)-2f(x)| / |z|^alpha, |z| <= max_shift.
inline double second_difference_sup(const GridFunction& f, double alpha, double max_shift = -1.0) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw std::invalid_argument("second_difference_sup: alpha must lie in (0,2]");
  const Grid& g = f.grid;
  double h = g.spacing();
  if (max_shift < 0.0) max_shift = 0.5 * g.extent;
  const auto& v = f.values;
  double best = 0.0;
  if (g.dim == 1) {
    int P = g.points, M = int(std::floor(max_shift / h + 1e-9));
    for (int m = 1; m <= M && 2 * m < P; ++m) {
      double s = 0.0;
      for (int i = m; i + m < P; ++i) s = std::max(s, std::abs(v[i + m] + v[i - m] - 2.0 * v[i]));
      best = std::max(best, s / std::pow(m * h, alpha));
    }
    return best;
  }
  for (const auto& z : half_space_shifts(g, max_shift)) {
    double len = 0.0;
    for (int c : z) len += double(c) * c;
    len = std::sqrt(len) * h;
    double s = 0.0;
    for (size_t i = 0; i < v.size(); ++i) {
      auto idx = g.multi_index(i);
      std::vector<int> p = idx, q = idx;
      bool ok = true;
      for (int d = 0; d < g.dim && ok; ++d) {
        p[d] += z[d];
        q[d] -= z[d];
        ok = p[d] >= 0 && p[d] < g.points && q[d] >= 0 && q[d] < g.points;
      }
      if (ok) s = std::max(s, std::abs(v[g.flat_index(p)] + v[g.flat_index(q)] - 2.0 * v[i]));
    }
    best = std::max(best, s / std::pow(len, alpha));
  }
  return best;
}

// max over on-grid pairs of |f(x-z)-f(x)| / |z|^alpha (all shifts that stay in the box).
inline double first_difference_sup(const GridFunction& f, double alpha) {
  const Grid& g = f.grid;
  double h = g.spacing();
  const auto& v = f.values;
  double best = 0.0;
  if (g.dim == 1) {
    int P = g.points;
    for (int m = 1; m < P; ++m) {
      double s = 0.0;
      for (int i = 0; i + m < P; ++i) s = std::max(s, std::abs(v[i + m] - v[i]));
      best = std::max(best, s / std::pow(m * h, alpha));
    }
    return best;
  }
  for (const auto& z : half_space_shifts(g, 2.0 * g.extent * std::sqrt(double(g.dim)))) {
    double len = 0.0;
    for (int c : z) len += double(c) * c;
    len = std::sqrt(len) * h;
    double s = 0.0;
    for (size_t i = 0; i < v.size(); ++i) {
      auto idx = g.multi_index(i);
      bool ok = true;
      for (int d = 0; d < g.dim && ok; ++d) {
        idx[d] += z[d];
        ok = idx[d] >= 0 && idx[d] < g.points;
      }
      if (ok) s = std::max(s, std::abs(v[g.flat_index(idx)] - v[i]));
    }
    best = std::max(best, s / std::pow(len, alpha));
  }
  return best;
}

// Every other sample along each axis.
inline GridFunction coarsen(const GridFunction& f) {
  if (!f.grid.coarsenable()) throw std::invalid_argument("grid cannot be coarsened");
  Grid c = f.grid.coarsened();
  std::vector<double> v(c.size());
  for (size_t i = 0; i < v.size(); ++i) {
    auto idx = c.multi_index(i);
    for (int& k : idx) k *= 2;
    v[i] = f.values[f.grid.flat_index(idx)];
  }
  GridFunction g = f;
  g.grid = c;
  g.values = std::move(v);
  return g;
}

// Fourth-order centered difference along an axis; second order one node from
// the edge and one-sided first order on the boundary layer.
inline GridFunction centered_derivative(const GridFunction& f, int axis = 0) {
  const Grid& g = f.grid;
  if (axis < 0 || axis >= g.dim) throw std::invalid_argument("derivative axis out of range");
  double h = g.spacing();
  std::vector<double> out(f.values.size());
  for (size_t i = 0; i < out.size(); ++i) {
    auto idx = g.multi_index(i);
    int k = idx[axis], P = g.points;
    auto at = [&](int off) {
      auto j = idx;
      j[axis] = k + off;
      return f.values[g.flat_index(j)];
    };
    if (k >= 2 && k + 2 < P)
      out[i] = (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h);
    else if (k >= 1 && k + 1 < P)
      out[i] = (at(1) - at(-1)) / (2.0 * h);
    else if (k == 0)
      out[i] = (at(1) - at(0)) / h;
    else
      out[i] = (at(0) - at(-1)) / h;
  }
  GridFunction d = f.with_values(std::move(out));
  d.growth_exponent = std::max(0.0, f.growth_exponent - 1.0);
  return d;
}

inline void write_csv(const GridFunction& f, std::ostream& os) {
  for (int d = 0; d < f.grid.dim; ++d) os << "x" << (d + 1) << ",";
  os << "value\n";
  char buf[64];
  for (size_t i = 0; i < f.values.size(); ++i) {
    auto x = f.grid.point(i);
    for (double c : x) {
      std::snprintf(buf, sizeof buf, "%.17g,", c);
      os << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g\n", f.values[i]);
    os << buf;
  }
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    cells.push_back(cell);
  }
  return cells;
}

// Reads `x1,...,xn,value`; rows may come in any order but must fill a uniform grid.
inline GridFunction read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("grid CSV: empty input");
  auto header = split_csv_line(line);
  int n = int(header.size()) - 1;
  if (n < 1 || header.back() != "value") throw std::invalid_argument("grid CSV: header must be x1,...,xn,value");
  for (int d = 0; d < n; ++d)
    if (header[d] != "x" + std::to_string(d + 1)) throw std::invalid_argument("grid CSV: header must be x1,...,xn,value");
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (int(cells.size()) != n + 1)
      throw std::invalid_argument("grid CSV line " + std::to_string(lineno) + ": expected " + std::to_string(n + 1) + " columns");
    std::vector<double> r;
    for (auto& c : cells) {
      try {
        r.push_back(std::stod(c));
      } catch (...) {
        throw std::invalid_argument("grid CSV line " + std::to_string(lineno) + ": not a number: " + c);
      }
    }
    rows.push_back(std::move(r));
  }
  double R = 0.0;
  for (auto& r : rows) R = std::max(R, r[0]);
  size_t per_axis = size_t(std::llround(std::pow(double(rows.size()), 1.0 / n)));
  size_t total = 1;
  for (int d = 0; d < n; ++d) total *= per_axis;
  if (total != rows.size()) throw std::invalid_argument("grid CSV: row count is not a full tensor grid");
  Grid g(n, R, int(per_axis));
  std::vector<double> v(g.size(), 0.0);
  std::vector<char> seen(g.size(), 0);
  double h = g.spacing();
  for (auto& r : rows) {
    std::vector<int> idx(n);
    for (int d = 0; d < n; ++d) {
      double k = (r[d] + R) / h;
      idx[d] = int(std::llround(k));
      if (std::abs(k - idx[d]) > 1e-6 || idx[d] < 0 || idx[d] >= g.points)
        throw std::invalid_argument("grid CSV: coordinates are not on a uniform symmetric grid");
    }
    size_t f = g.flat_index(idx);
    if (seen[f]) throw std::invalid_argument("grid CSV: duplicate grid point");
    seen[f] = 1;
    v[f] = r[n];
  }
  return GridFunction(g, std::move(v));
}

}  // namespace schrolip

#endif  // SCHROLIP_GRID_HPP

#include <catch_amalgamated.hpp>

#include <cmath>

#include <schrolip/families.hpp>
#include <schrolip/lipschitz.hpp>
#include <schrolip/poisson.hpp>

using namespace schrolip;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double band_error(const GridFunction& a, const GridFunction& b) {
  auto [i0, i1] = interior_band(a.grid);
  double e = 0.0;
  for (int i = i0; i < i1; ++i) e = std::max(e, std::abs(a.values[i] - b.values[i]));
  return e;
}

const SemigroupEngine& spectral_x2() {
  static const SemigroupEngine e = SemigroupEngine::spectral(PotentialDescriptor::radial_power(1, 2.0), Grid(1, 8.0, 513));
  return e;
}

std::vector<KernelSample> kernel_samples() {
  std::vector<KernelSample> s;
  for (double y : {0.05, 0.2, 1.0, 4.0})
    for (double x = -4.0; x <= 4.0; x += 1.0)
      for (double z = -4.0; z <= 4.0; z += 2.0) s.push_back({{x}, {z}, y});
  return s;
}

}  // namespace

TEST_CASE("subordinator weights have unit mass over the validity window") {
  Grid g(1, 4.0, 2049);
  double lo = g.spacing(), hi = 16.0;
  SubordinationQuadrature q(lo, hi);
  for (double y = lo; y <= hi; y *= 1.5) CHECK_THAT(q.mass(y), WithinAbs(1.0, 1e-8));
  CHECK_THROWS_AS(SubordinationQuadrature(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("subordinator weight derivatives match finite differences") {
  SubordinationQuadrature q(0.1, 2.0);
  double y = 0.7, d = 1e-5;
  auto w1 = q.weights(y, 1), wp = q.weights(y + d, 0), wm = q.weights(y - d, 0);
  double worst = 0.0, scale = 0.0;
  for (size_t i = 0; i < w1.size(); ++i) {
    worst = std::max(worst, std::abs(w1[i] - (wp[i] - wm[i]) / (2 * d)));
    scale = std::max(scale, std::abs(w1[i]));
  }
  CHECK(worst < 1e-6 * scale);
}

TEST_CASE("gaussian Poisson of a constant is the constant") {
  Grid g(1, 4.0, 513);
  auto e = SemigroupEngine::gaussian(g);
  auto one = builtin_function("const:1", g);
  for (double y : {0.1, 1.0, 8.0}) {
    auto p = apply_poisson(e, one, y);
    CHECK(band_error(p, one) < 1e-8);
    // interior band only: next to the walls small-tau heat carries O(h^4) trapezoid end terms
    for (int k = 1; k <= 3; ++k) CHECK(band_error(poisson_derivative(e, one, y, k), GridFunction::zeros(g)) < 1e-8);
  }
}

TEST_CASE("mehler Poisson on h0 is e^{-y} h0") {
  Grid g(1, 8.0, 513);
  auto e = SemigroupEngine::mehler(g);
  auto h0 = builtin_function("hermite-h0", g);
  for (double y : {0.1, 0.5, 2.0}) {
    CHECK(band_error(apply_poisson(e, h0, y), std::exp(-y) * h0) < 1e-6);
    CHECK(band_error(poisson_derivative(e, h0, y, 1), -std::exp(-y) * h0) < 1e-6);
  }
  // h1 has eigenvalue 3
  auto h1 = builtin_function("hermite-hk:1", g);
  CHECK(band_error(apply_poisson(e, h1, 0.5), std::exp(-std::sqrt(3.0) * 0.5) * h1) < 1e-6);
}

TEST_CASE("gaussian Poisson matches direct convolution with the Cauchy kernel") {
  Grid g(1, 4.0, 513);
  auto e = SemigroupEngine::gaussian(g);
  auto f = builtin_function("x-bump", g) + builtin_function("abs-pow:1.5", g);
  double h = g.spacing();
  for (double y : {0.1, 0.5, 2.0}) {
    auto p = apply_poisson(e, f, y);
    double worst = 0.0, scale = sup_norm(p);
    for (int i = 0; i < g.points; i += 8) {
      double s = 0.0;
      for (int j = 0; j < g.points; ++j) {
        double d = g.coord(i) - g.coord(j);
        double w = (j == 0 || j == g.points - 1) ? 0.5 * h : h;
        s += w * y / (pi * (d * d + y * y)) * f.values[j];
      }
      worst = std::max(worst, std::abs(p.values[i] - s));
    }
    CHECK(worst <= 1e-4 * scale);
  }
}

TEST_CASE("spectral and subordination paths agree on h0 and h1") {
  const auto& e = spectral_x2();
  for (const char* spec : {"hermite-h0", "hermite-hk:1"}) {
    auto f = builtin_function(spec, e.grid());
    for (double y : {0.1, 0.5, 2.0})
      CHECK(band_error(apply_poisson(e, f, y, PoissonPath::quadrature), apply_poisson(e, f, y, PoissonPath::spectral)) < 1e-5);
  }
}

TEST_CASE("Poisson semigroup law under a confining potential") {
  Grid g(1, 8.0, 513);
  auto f = builtin_function("abs-pow:0.5", g);
  auto e = SemigroupEngine::mehler(g);
  for (auto [a, b] : {std::pair{0.1, 0.3}, std::pair{0.5, 1.0}}) {
    auto two = apply_poisson(e, apply_poisson(e, f, b), a);
    CHECK(band_error(two, apply_poisson(e, f, a + b)) < 1e-4);
  }
}

TEST_CASE("gaussian Poisson semigroup gap is the Cauchy tail cut off by the box") {
  // P_b f has tails b M / (pi z^2) outside [-R, R]; composing on the box drops
  // int_{|z|>R} P_b f(z) P_a(x - z) dz, which is estimated here independently
  Grid g(1, 8.0, 513);
  auto f = builtin_function("abs-pow:0.5", g);
  auto e = SemigroupEngine::gaussian(g);
  double M = integrate(f), R = g.extent;
  auto q = gauss_legendre(200, 0.0, 1.0 / R);
  for (auto [a, b] : {std::pair{0.1, 0.3}, std::pair{0.5, 1.0}}) {
    auto two = apply_poisson(e, apply_poisson(e, f, b), a);
    auto one = apply_poisson(e, f, a + b);
    for (double x : {-4.0, 0.0, 4.0}) {
      double missing = 0.0;
      for (size_t j = 0; j < q.nodes.size(); ++j) {
        double u = q.nodes[j];
        for (double z : {1.0 / u, -1.0 / u})
          missing += q.weights[j] / (u * u) * b * M / (pi * (z * z + b * b)) * a / (pi * ((x - z) * (x - z) + a * a));
      }
      int i = int(std::llround((x + R) / g.spacing()));
      CHECK_THAT(one.values[i] - two.values[i], WithinRel(missing, 0.15));
    }
  }
}

TEST_CASE("Poisson y outside the validity window is rejected") {
  Grid g(1, 4.0, 401);
  auto e = SemigroupEngine::gaussian(g);
  auto f = GridFunction::zeros(g);
  CHECK_THROWS_AS(apply_poisson(e, f, 0.5 * g.spacing()), std::invalid_argument);
  CHECK_THROWS_AS(apply_poisson(e, f, 17.0), std::invalid_argument);
  CHECK_NOTHROW(apply_poisson(e, f, 16.0));
}

TEST_CASE("Poisson kernel bounds") {
  Grid g(1, 8.0, 513);
  auto s = kernel_samples();
  SECTION("gaussian, k = 0, N = 0 is the classical bound") {
    auto rep = poisson_kernel_bound_check(SemigroupEngine::gaussian(g), s, 0, 0.0);
    CHECK(rep.passes);
    // the classical kernel is y / (pi (d^2 + y^2)) in 1D
    CHECK_THAT(rep.C, WithinRel(1.0 / pi, 1e-6));
  }
  SECTION("mehler, k = 0 and k = 1, N = 2 pass") {
    auto e = SemigroupEngine::mehler(g);
    for (int k : {0, 1}) {
      auto rep = poisson_kernel_bound_check(e, s, k, 2.0);
      CHECK(rep.passes);
      CHECK(rep.worst_ratio <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("gaussian Poisson kernel by subordination is the Cauchy kernel") {
  Grid g(1, 4.0, 401);
  auto e = SemigroupEngine::gaussian(g);
  for (double y : {0.05, 1.0, 8.0})
    for (double d : {0.0, 0.7, 3.0}) {
      CHECK_THAT(poisson_kernel(e, {0.0}, {d}, y, 0), WithinRel(y / (pi * (d * d + y * y)), 1e-8));
      // d/dy of y/(pi(d^2+y^2)) = (d^2 - y^2) / (pi (d^2+y^2)^2)
      if (d != y) CHECK_THAT(poisson_kernel(e, {0.0}, {d}, y, 1), WithinRel((d * d - y * y) / (pi * std::pow(d * d + y * y, 2)), 1e-7));
    }
}

TEST_CASE("Poisson size functional") {
  SECTION("constant 1 in 1D integrates (1+|x|)^{-2} to 2") {
    Grid g(1, 8.0, 4001);
    auto rep = poisson_size_norm(builtin_function("const:1", g));
    CHECK_FALSE(rep.diverges);
    CHECK_THAT(rep.tail, WithinRel(2.0 / 9.0, 1e-14));
    CHECK_THAT(rep.value, WithinAbs(2.0, 1e-5));
  }
  SECTION("zero gives zero") {
    Grid g(1, 4.0, 101);
    auto rep = poisson_size_norm(GridFunction::zeros(g));
    CHECK(rep.value == 0.0);
    CHECK_FALSE(rep.diverges);
  }
  SECTION("(1+|x|)^{n+1} diverges") {
    Grid g(1, 4.0, 101);
    auto f = GridFunction::sample(g, [](const std::vector<double>& x) { return std::pow(1.0 + std::abs(x[0]), 2.0); }, 2.0);
    CHECK(poisson_size_norm(f).diverges);
  }
  SECTION("affine growth diverges") {
    Grid g(1, 4.0, 101);
    auto f = GridFunction::sample(g, [](const std::vector<double>& x) { return x[0]; }, 1.0, Tail::affine);
    CHECK(poisson_size_norm(f).diverges);
  }
}

TEST_CASE("Poisson vanishing at infinity") {
  SECTION("h0 under mehler decays like e^{-y}") {
    Grid g(1, 8.0, 513);
    auto rep = poisson_vanishing_check(SemigroupEngine::mehler(g), builtin_function("hermite-h0", g));
    for (Verdict v : rep.decays) CHECK(v == Verdict::pass);
    CHECK_THAT(rep.norms[0][1] / rep.norms[0][0], WithinRel(std::exp(-(rep.ys[1] - rep.ys[0])), 1e-5));
    CHECK(rep.converges_to_f);
  }
  SECTION("constant under gaussian: derivatives vanish, l = 0 not applicable") {
    Grid g(1, 4.0, 401);
    auto rep = poisson_vanishing_check(SemigroupEngine::gaussian(g), builtin_function("const:1", g));
    CHECK(rep.decays[0] == Verdict::not_applicable);
    CHECK(rep.decays[1] == Verdict::pass);
    CHECK(rep.decays[2] == Verdict::pass);
  }
  SECTION("compact bump under gaussian decays like y^{-1}") {
    Grid g(1, 8.0, 513);
    auto f = builtin_function("abs-pow:1", g);
    auto rep = poisson_vanishing_check(SemigroupEngine::gaussian(g), f);
    for (Verdict v : rep.decays) CHECK(v == Verdict::pass);
    // P_y f(0) ~ (int f) / (pi y) for large y
    size_t last = rep.ys.size() - 1;
    CHECK_THAT(rep.norms[0][last] * rep.ys[last] * pi / integrate(f), WithinAbs(1.0, 0.05));
  }
}

TEST_CASE("Poisson scaling fit on the |x| family") {
  Grid g(1, 4.0, 1025);
  auto e = SemigroupEngine::gaussian(g);
  auto absx = GridFunction::sample(g, [](const std::vector<double>& x) { return std::abs(x[0]); }, 1.0, Tail::affine);
  auto fit = poisson_scaling_fit(e, absx, 2);
  CHECK_THAT(fit.slope, WithinAbs(-1.0, 0.1));
  CHECK(fit.samples == 8);
  auto h = builtin_function("hermite-h0", g);
  CHECK_THAT(poisson_scaling_fit(SemigroupEngine::mehler(g), h, 1).slope, WithinAbs(0.0, 0.1));
  auto affine = GridFunction::sample(g, [](const std::vector<double>& x) { return 1.0 - 0.5 * x[0]; }, 1.0, Tail::affine);
  CHECK(poisson_scaling_fit(e, affine, 2).degenerate);
}

TEST_CASE("Poisson slope transfer when the heat fit passes") {
  Grid g(1, 4.0, 2049);
  auto e = SemigroupEngine::mehler(g);
  for (double s : {0.5, 1.0, 1.5}) {
    auto f = builtin_function("abs-pow:" + std::to_string(s), g);
    auto heat = heat_scaling_fit(e, f, heat_order(s));
    if (std::abs(heat.slope - (-heat_order(s) + 0.5 * s)) > heat_slope_tolerance) continue;
    int kp = std::max(poisson_order(s), 2);
    CHECK(poisson_scaling_fit(e, f, kp).slope >= -kp + s - 0.1);
  }
}

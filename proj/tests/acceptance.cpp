// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <schrolip/cli.hpp>
#include <schrolip/families.hpp>
#include <schrolip/heat.hpp>
#include <schrolip/lipschitz.hpp>
#include <schrolip/operators.hpp>
#include <schrolip/poisson.hpp>
#include <schrolip/potentials.hpp>
#include <schrolip/report.hpp>

using namespace schrolip;

namespace {

// tolerances
constexpr double eigen_rel_tol = 1e-4;
constexpr double eigen_seconds = 30.0;
constexpr double cross_tol = 1e-5;
constexpr double cross_seconds = 60.0;
constexpr double rho_tol = 1e-6;
constexpr double rho_band_ratio = 4.0;
constexpr double heat_slope_tol = 0.05;
constexpr double poisson_slope_tol = 0.1;
constexpr double scaling_seconds = 300.0;
constexpr double moment_rel_tol = 0.01;
constexpr double poisson_closed_tol = 1e-4;
constexpr double perturbation_floor = -0.75 - 0.1;
constexpr double kato_trotter_tol = 1e-4;
constexpr double kato_trotter_order_tol = 0.3;
constexpr double class_tol = 0.1;
constexpr double identity_tol = 1e-8;
constexpr double first_diff_growth = 2.0;
constexpr double zygmund_bounded = 0.15;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double max_rel(const std::vector<double>& got, const std::vector<double>& want) {
  double d = 0.0, s = 0.0;
  for (size_t i = 0; i < got.size(); ++i) {
    d = std::max(d, std::abs(got[i] - want[i]));
    s = std::max(s, std::abs(want[i]));
  }
  return s > 0.0 ? d / s : d;
}

std::vector<double> scaled(const GridFunction& f, double c) {
  std::vector<double> v = f.values;
  for (double& x : v) x *= c;
  return v;
}

int failures = 0;

void report(int n, bool ok, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", n, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

void eigenfunction_suite() {
  auto t0 = std::chrono::steady_clock::now();
  Grid g(1, 8.0, 513);
  auto e = SemigroupEngine::mehler(g);
  double worst = 0.0;
  std::string where;
  auto track = [&](double err, const std::string& what) {
    if (err > worst) { worst = err; where = what; }
  };
  std::vector<OperatorSpec> ops = {
      OperatorSpec::bessel(1.0), OperatorSpec::bessel(2.0),
      OperatorSpec::frac_integral(1.0), OperatorSpec::frac_integral(2.0),
      OperatorSpec::frac_laplacian(1.0), OperatorSpec::frac_laplacian(0.5),
      OperatorSpec::multiplier(MultiplierSymbol::constant(1.0)),
      OperatorSpec::multiplier(MultiplierSymbol::indicator(0.7)),
      OperatorSpec::multiplier(MultiplierSymbol::table({0.0, 0.5, 2.0}, {1.0, 0.3, -0.5}))};
  for (int k = 0; k <= 4; ++k) {
    auto f = builtin_function("hermite-hk:" + std::to_string(k), g);
    double lam = 2.0 * k + 1.0;
    for (double y : {0.1, 0.5, 2.0})
      track(max_rel(apply_heat(e, f, y).values, scaled(f, std::exp(-lam * y))), "heat k=" + std::to_string(k));
    for (double y : {0.25, 1.0})
      track(max_rel(apply_poisson(e, f, y).values, scaled(f, std::exp(-y * std::sqrt(lam)))), "poisson k=" + std::to_string(k));
    for (const auto& op : ops)
      track(max_rel(apply_operator(e, op, f).f.values, scaled(f, operator_symbol(op, lam))),
            to_string(op.kind) + " k=" + std::to_string(k));
  }
  double t = seconds_since(t0);
  report(1, worst <= eigen_rel_tol && t < eigen_seconds,
         fmt("worst relative error %.2e", worst) + " (" + where + ")" + fmt(", %.1f s", t));
}

void cross_regime() {
  auto t0 = std::chrono::steady_clock::now();
  Grid g(1, 8.0, 513);
  auto em = SemigroupEngine::mehler(g);
  auto es = SemigroupEngine::spectral(PotentialDescriptor::hermite(1), g);
  double kernel_err = 0.0, apply_err = 0.0;
  std::vector<GridFunction> fs = {builtin_function("hermite-h0", g), builtin_function("hermite-hk:3", g),
                                  builtin_function("abs-pow:1.5", g)};
  for (double y : {0.05, 0.1, 0.3, 1.0, 2.0}) {
    std::vector<double> a, b;
    for (int i = 64; i < 449; i += 8)
      for (int j = 64; j < 449; j += 8) {
        std::vector<double> x{g.coord(i)}, z{g.coord(j)};
        a.push_back(es.kernel(x, z, y));
        b.push_back(em.kernel(x, z, y));
      }
    kernel_err = std::max(kernel_err, max_rel(a, b));
    for (const auto& f : fs) apply_err = std::max(apply_err, max_rel(apply_heat(es, f, y).values, apply_heat(em, f, y).values));
  }
  double t = seconds_since(t0);
  report(2, kernel_err <= cross_tol && apply_err <= cross_tol && t < cross_seconds,
         fmt("kernel %.2e", kernel_err) + fmt(", semigroup %.2e", apply_err) + fmt(", %.1f s", t));
}

void critical_radius_check() {
  double want = std::pow(5.0 / (4.0 * pi), 0.25);
  Radius r = critical_radius(PotentialDescriptor::radial_power(3, 2.0), {0.0, 0.0, 0.0});
  double err = std::abs(r.value - want);
  auto H = PotentialDescriptor::hermite(3);
  double lo = 1e300, hi = 0.0;
  for (int i = 0; i <= 100; ++i) {
    double x = 0.1 * i;
    double p = critical_radius(H, {x, 0.0, 0.0}).value * (1.0 + x);
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  report(3, !r.unbounded && err <= rho_tol && hi / lo < rho_band_ratio,
         fmt("|rho(0) - (5/4pi)^(1/4)| = %.1e", err) + fmt(", rho(1+|x|) in [%.4f", lo) + fmt(", %.4f]", hi) +
             fmt(" ratio %.3f", hi / lo));
}

void scaling_suite() {
  auto t0 = std::chrono::steady_clock::now();
  Grid g(1, 4.0, 2049);
  bool ok = true;
  std::string detail;
  for (int reg = 0; reg < 2; ++reg) {
    auto e = reg ? SemigroupEngine::mehler(g) : SemigroupEngine::gaussian(g);
    for (double s : {0.5, 1.0, 1.5}) {
      auto f = builtin_function("abs-pow:" + std::to_string(s), g);
      auto in = verify_space_equivalence(e, f, s);
      auto out = verify_space_equivalence(e, f, s + 0.4);
      double dh = in.heat.slope - in.heat_predicted, dp = in.poisson.slope - in.poisson_predicted;
      bool here = std::abs(dh) <= heat_slope_tol && std::abs(dp) <= poisson_slope_tol && in.verdict == Verdict::pass &&
                  out.verdict == Verdict::fail;
      ok = ok && here;
      char buf[200];
      std::snprintf(buf, sizeof buf, "%s%s s=%.1f dheat=%+.3f dpoisson=%+.3f %s/%s", detail.empty() ? "" : "; ",
                    to_string(e.regime()).c_str(), s, dh, dp, to_string(in.verdict).c_str(), to_string(out.verdict).c_str());
      detail += buf;
    }
  }
  double t = seconds_since(t0);
  report(4, ok && t < scaling_seconds, detail + fmt("; %.1f s", t));
}

void classical_oracle() {
  Grid g(1, 4.0, 2049);
  auto e = SemigroupEngine::gaussian(g);
  auto absx = GridFunction::sample(g, [](const std::vector<double>& x) { return std::abs(x[0]); }, 1.0, Tail::affine);
  auto [lo, hi] = e.reliable_window();
  int c = g.points / 2;
  double worst = 0.0;
  for (double y : dyadic_samples(lo, 8)) {
    double got = e.apply_range(absx, y, 1, c, c + 1)[0];
    worst = std::max(worst, std::abs(got * std::sqrt(pi * y) - 1.0));
  }
  // subordinated Poisson vs direct convolution with y / (pi (x^2 + y^2))
  auto bump = builtin_function("x-bump", g) + builtin_function("abs-pow:1.5", g);
  double h = g.spacing(), perr = 0.0;
  for (double y : {std::sqrt(10.0) * h, 0.1, 0.5, 2.0, 8.0}) {
    auto p = apply_poisson(e, bump, y);
    std::vector<double> direct(g.points, 0.0);
    for (int i = 0; i < g.points; ++i) {
      double s = 0.0;
      for (int j = 0; j < g.points; ++j) {
        double d = g.coord(i) - g.coord(j);
        s += h * y / (pi * (d * d + y * y)) * bump.values[j];
      }
      direct[i] = s;
    }
    perr = std::max(perr, max_rel(p.values, direct));
  }
  report(5, worst <= moment_rel_tol && perr <= poisson_closed_tol,
         fmt("max |d_y W|x|(0) sqrt(pi y) - 1| = %.2e", worst) + fmt(", Poisson vs closed form %.2e", perr));
}

void perturbation() {
  Grid g(1, 4.0, 2049);
  auto e = SemigroupEngine::mehler(g);
  auto f = builtin_function("abs-pow:0.5", g);
  auto rep = perturbation_difference(e, f, e.reliable_window().second);
  Grid gk(1, 8.0, 513);
  auto ek = SemigroupEngine::mehler(gk);
  auto h0 = builtin_function("hermite-h0", gk);
  double r16 = kato_trotter_residual(ek, h0, 0.5, 16), r32 = kato_trotter_residual(ek, h0, 0.5, 32),
         r64 = kato_trotter_residual(ek, h0, 0.5, 64);
  double order = std::log2(r32 / r64);
  bool ok = rep.slope >= perturbation_floor && r64 <= kato_trotter_tol && std::abs(order - 2.0) <= kato_trotter_order_tol;
  report(6, ok, fmt("decay exponent %.3f", rep.slope) + fmt(", Kato-Trotter residual %.2e at 64 nodes", r64) +
                    fmt(" (16: %.2e", r16) + fmt(", 32: %.2e", r32) + fmt("), observed order %.2f", order));
}

void regularity_shifts() {
  Grid g(1, 4.0, 4097);
  auto e = SemigroupEngine::mehler(g);
  auto f05 = builtin_function("abs-pow:0.5", g), f15 = builtin_function("abs-pow:1.5", g),
       f12 = builtin_function("abs-pow:1.2", g);
  auto class_of = [&](const GridFunction& out, double predicted) {
    return fitted_class(heat_scaling_fit(e, out, std::min(heat_order(predicted) + 1, heat_order_cap)));
  };
  double b = class_of(bessel_potential(e, f05, 1.0).f, 1.5);
  double l = class_of(fractional_laplacian(e, f15, 0.5).f, 1.0);
  double rc = class_of(riesz_transform(e, f12, 0, true).f, 1.2);
  double ra = class_of(riesz_transform(e, f12, 0, false).f, 1.2);
  double m = class_of(laplace_multiplier(e, f12, MultiplierSymbol::indicator(1.0)).f, 1.2);
  double id = max_rel(laplace_multiplier(e, f12, MultiplierSymbol::constant(1.0)).f.values, f12.values);
  bool ok = std::abs(b - 1.5) <= class_tol && std::abs(l - 1.0) <= class_tol && std::abs(rc - 1.2) <= class_tol &&
            std::abs(ra - 1.2) <= class_tol && std::abs(m - 1.2) <= class_tol && id <= identity_tol;
  report(7, ok, fmt("bessel %.3f", b) + fmt(", fraclap %.3f", l) + fmt(", riesz calderon %.3f", rc) +
                    fmt(", riesz adjoint %.3f", ra) + fmt(", multiplier %.3f", m) + fmt(", a=1 identity %.1e", id));
}

void separation() {
  Grid g(1, 4.0, 2049);
  auto w = builtin_function("xlogx", g);
  auto trend = zygmund_refinement_trend(w, 1.0);
  double fine = first_difference_seminorm(w, 1.0), coarse = first_difference_seminorm(coarsen(w), 1.0);
  double growth = fine / coarse;
  auto e = SemigroupEngine::mehler(g);
  auto rec = verify_space_equivalence(e, builtin_function("abs-pow:0.5", g), 1.9);
  bool legs = rec.seminorm_leg == Verdict::fail && rec.heat_leg == Verdict::fail && rec.poisson_leg == Verdict::fail &&
              rec.legs_consistent && rec.verdict == Verdict::fail;
  bool ok = trend.exponent <= zygmund_bounded && growth >= first_diff_growth && legs;
  report(8, ok, fmt("N_1 growth exponent %.3f", trend.exponent) + fmt(", first-difference ratio %.3f", growth) +
                    fmt(" (needs >= %.1f)", first_diff_growth) + ", f_0.5 at 1.9: " + to_string(rec.seminorm_leg) + "/" +
                    to_string(rec.heat_leg) + "/" + to_string(rec.poisson_leg));
}

void determinism() {
  std::vector<std::string> args = {"seminorm", "--alpha", "0.5", "--f", "abs-pow:0.5", "--grid-points", "1025"};
  std::ostringstream a, b, ea, eb;
  int ca = run_cli(args, a, ea), cb = run_cli(args, b, eb);
  bool same = ca == 0 && cb == 0 && a.str() == b.str() && !a.str().empty();
  Grid g(1, 4.0, 1025);
  auto e = SemigroupEngine::mehler(g);
  auto f = builtin_function("abs-pow:0.5", g);
  std::stringstream csv;
  write_csv(f, csv);
  auto back = read_csv(csv);
  auto e2 = SemigroupEngine::mehler(back.grid);
  std::string j1 = to_json(seminorm_report(e, f, 0.5)).dump();
  std::string j2 = to_json(seminorm_report(e2, back, 0.5)).dump();
  report(9, same && j1 == j2,
         std::string("rerun bytes ") + (same ? "identical" : "differ") + ", CSV round trip " + (j1 == j2 ? "identical" : "differs"));
}

}  // namespace

int main() {
  std::vector<std::function<void()>> suite = {eigenfunction_suite, cross_regime, critical_radius_check,
                                              scaling_suite, classical_oracle, perturbation,
                                              regularity_shifts, separation, determinism};
  for (size_t i = 0; i < suite.size(); ++i) {
    try {
      suite[i]();
    } catch (const std::exception& ex) {
      report(int(i) + 1, false, std::string("threw: ") + ex.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, suite.size());
  return failures == 0 ? 0 : 1;
}

#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include <schrolip/families.hpp>
#include <schrolip/operators.hpp>

using namespace schrolip;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const Grid& grid8() {
  static const Grid g(1, 8.0, 513);
  return g;
}

const SemigroupEngine& mehler8() {
  static const SemigroupEngine e = SemigroupEngine::mehler(grid8());
  return e;
}

double band_error(const std::vector<double>& got, const std::vector<double>& want) {
  auto [i0, i1] = interior_band(grid8());
  double d = 0.0, s = 0.0;
  for (int i = i0; i < i1; ++i) {
    d = std::max(d, std::abs(got[i] - want[i]));
    s = std::max(s, std::abs(want[i]));
  }
  return d / s;
}

std::vector<double> scaled(const GridFunction& f, double c) {
  std::vector<double> v(f.values);
  for (double& x : v) x *= c;
  return v;
}

// lambda int_0^inf e^{-s lambda} a(s) ds by brute-force Gauss-Legendre on [0, 60/lambda],
// panels split at the symbol's breakpoints
double symbol_oracle(const MultiplierSymbol& a, double lam, std::vector<double> cuts) {
  cuts.insert(cuts.begin(), 0.0);
  cuts.push_back(std::max(60.0 / lam, cuts.back() + 1.0));
  double total = 0.0;
  const int panels = 200;
  for (size_t c = 0; c + 1 < cuts.size(); ++c) {
    double lo = cuts[c], w = (cuts[c + 1] - lo) / panels;
    for (int p = 0; p < panels; ++p) {
      auto q = gauss_legendre(8, lo + w * p, lo + w * (p + 1));
      for (size_t i = 0; i < q.nodes.size(); ++i) total += q.weights[i] * lam * std::exp(-lam * q.nodes[i]) * a(q.nodes[i]);
    }
  }
  return total;
}

}  // namespace

TEST_CASE("operators act on Hermite functions by their eigenvalue symbol") {
  const auto& e = mehler8();
  for (int k : {0, 1, 2}) {
    auto f = builtin_function("hermite-hk:" + std::to_string(k), grid8());
    double lam = 2.0 * k + 1.0;
    CAPTURE(k);
    CHECK(band_error(bessel_potential(e, f, 1.0).f.values, scaled(f, 1.0 / std::sqrt(1.0 + lam))) < 1e-5);
    CHECK(band_error(fractional_integral(e, f, 1.5).f.values, scaled(f, std::pow(lam, -0.75))) < 1e-5);
    CHECK(band_error(fractional_laplacian(e, f, 0.5).f.values, scaled(f, std::pow(lam, 0.25))) < 1e-5);
    CHECK(band_error(fractional_laplacian(e, f, 3.0).f.values, scaled(f, std::pow(lam, 1.5))) < 1e-4);
    CHECK(band_error(laplace_multiplier(e, f, MultiplierSymbol::indicator(0.4)).f.values,
                     scaled(f, -std::expm1(-0.4 * lam))) < 1e-8);
  }
}

TEST_CASE("operator_symbol values") {
  CHECK(operator_symbol(OperatorSpec::bessel(2.0), 3.0) == 0.25);
  CHECK_THAT(operator_symbol(OperatorSpec::frac_integral(1.0), 4.0), WithinRel(0.5, 1e-15));
  CHECK_THAT(operator_symbol(OperatorSpec::frac_laplacian(1.0), 4.0), WithinRel(2.0, 1e-15));
  CHECK(operator_symbol(OperatorSpec::multiplier(MultiplierSymbol::constant(0.3)), 7.0) == 0.3);
  CHECK_THROWS_AS(operator_symbol(OperatorSpec::riesz(true), 1.0), std::invalid_argument);
}

TEST_CASE("fractional Laplacian constant: quadrature against the Gamma closed form") {
  for (double beta : {0.3, 0.5, 1.0, 1.5, 1.9, 2.5, 3.0, 3.7, 5.0}) {
    int m = int(std::floor(beta / 2.0)) + 1;
    CAPTURE(beta, m);
    CHECK_THAT(fractional_laplacian_constant(beta, m), WithinRel(fractional_laplacian_constant_closed(beta, m), 1e-8));
  }
  // m = 1, beta = 1: Gamma(-1/2) (-1) = 2 sqrt(pi)
  CHECK_THAT(fractional_laplacian_constant(1.0, 1), WithinRel(2.0 * std::sqrt(pi), 1e-8));
  CHECK_THROWS_AS(fractional_laplacian_constant(2.0, 1), std::invalid_argument);
}

TEST_CASE("fractional integral inverts the fractional Laplacian") {
  const auto& e = mehler8();
  auto f = builtin_function("abs-pow:1.5", grid8());
  for (double beta : {0.5, 1.0}) {
    auto back = fractional_integral(e, fractional_laplacian(e, f, beta).f, beta).f;
    CAPTURE(beta);
    CHECK(band_error(back.values, f.values) < 1e-3);
  }
}

TEST_CASE("Bessel potential is positive and contractive") {
  const auto& e = mehler8();
  for (const char* name : {"abs-pow:0.5", "step-bump", "hermite-h0"}) {
    auto f = builtin_function(name, grid8());
    auto g = bessel_potential(e, f, 1.0).f;
    CAPTURE(name);
    CHECK(sup_norm(g) <= sup_norm(f) * (1.0 + 1e-9));
    double lo = 0.0;
    for (double v : g.values) lo = std::min(lo, v);
    CHECK(lo >= -1e-10 * sup_norm(f));
  }
}

TEST_CASE("Riesz transforms of h0") {
  const auto& e = mehler8();
  auto h0 = builtin_function("hermite-h0", grid8());
  auto h1 = builtin_function("hermite-hk:1", grid8());
  // d h0 = -h1/sqrt2 and L^{-1/2} h1 = h1/sqrt3
  auto adj = riesz_transform(e, h0, 0, false).f;
  CHECK(band_error(adj.values, scaled(h1, -1.0 / std::sqrt(6.0))) < 1e-4);
  // L^{-1/2} h0 = h0, then d h0 = -h1/sqrt2
  auto cal = riesz_transform(e, h0, 0, true).f;
  CHECK(band_error(cal.values, scaled(h1, -1.0 / std::sqrt(2.0))) < 1e-4);
}

TEST_CASE("512 time nodes are converged") {
  const auto& e = mehler8();
  auto f = builtin_function("abs-pow:0.5", grid8());
  CHECK(operator_node_convergence(e, OperatorSpec::bessel(1.0), f) < 1e-6);
  CHECK(operator_node_convergence(e, OperatorSpec::frac_laplacian(0.5), f) < 1e-6);
}

TEST_CASE("multiplier symbol parsing") {
  CHECK(parse_symbol("const:2.5")(10.0) == 2.5);
  auto ind = parse_symbol("indicator:0.5");
  CHECK(ind(0.5) == 1.0);
  CHECK(ind(0.51) == 0.0);
  CHECK(ind.sup() == 1.0);
  CHECK_THROWS_AS(parse_symbol("indicator:0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_symbol("const:abc"), std::invalid_argument);
  CHECK_THROWS_AS(parse_symbol("ramp:1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_symbol("table:/nonexistent/sym.csv"), std::invalid_argument);
}

TEST_CASE("multiplier symbol tables") {
  std::istringstream ok("s,value\n0,1\n0.5,0.3\n\n2,-0.5\n");
  auto a = load_symbol_table(ok, "sym.csv");
  CHECK(a(0.25) == Catch::Approx(0.65));
  CHECK(a(5.0) == -0.5);
  CHECK(a.sup() == 1.0);
  CHECK(a.source == "table:sym.csv");

  auto fails_with = [](const std::string& text, const std::string& msg) {
    std::istringstream in(text);
    CHECK_THROWS_WITH(load_symbol_table(in, "sym.csv"), ContainsSubstring(msg));
  };
  fails_with("", "empty");
  fails_with("t,value\n0,1\n", "sym.csv:1:");
  fails_with("s,value\n0,1\n1,2,3\n", "sym.csv:3:");
  fails_with("s,value\n0,1\nx,2\n", "sym.csv:3: not a number");
  fails_with("s,value\n0,1\n0,2\n", "strictly increasing");
  fails_with("s,value\n0,1\n", ">= 2 rows");
}

TEST_CASE("multiplier symbol value matches direct integration") {
  auto table = MultiplierSymbol::table({0.2, 0.5, 2.0}, {1.0, 0.3, -0.5});
  for (double lam : {0.5, 1.0, 3.0, 9.0}) {
    CAPTURE(lam);
    CHECK_THAT(multiplier_symbol_value(table, lam), WithinAbs(symbol_oracle(table, lam, {0.2, 0.5, 2.0}), 1e-12));
    CHECK_THAT(multiplier_symbol_value(MultiplierSymbol::indicator(0.7), lam),
               WithinAbs(symbol_oracle(MultiplierSymbol::indicator(0.7), lam, {0.7}), 1e-12));
  }
}

TEST_CASE("multiplier with a table symbol on Hermite functions") {
  const auto& e = mehler8();
  auto a = MultiplierSymbol::table({0.0, 0.5, 2.0}, {1.0, 0.3, -0.5});
  for (int k : {0, 2}) {
    auto f = builtin_function("hermite-hk:" + std::to_string(k), grid8());
    CAPTURE(k);
    CHECK(band_error(laplace_multiplier(e, f, a).f.values, scaled(f, multiplier_symbol_value(a, 2.0 * k + 1.0))) < 1e-6);
  }
}

TEST_CASE("divergent time integrals are flagged") {
  Grid g(1, 8.0, 257);
  auto e = SemigroupEngine::gaussian(g);
  SECTION("fractional integral of a constant under V = 0") {
    auto out = fractional_integral(e, builtin_function("const:1", g), 1.0);
    CHECK(out.diverges);
    REQUIRE_FALSE(out.notes.empty());
  }
  SECTION("multiplier on an unbounded affine tail") {
    auto f = GridFunction::sample(g, [](const std::vector<double>& x) { return x[0]; }, 1.0, Tail::affine);
    auto out = laplace_multiplier(e, f, MultiplierSymbol::constant(1.0));
    CHECK(out.diverges);
  }
  SECTION("Bessel potential never diverges") {
    CHECK_FALSE(bessel_potential(e, builtin_function("const:1", g), 1.0).diverges);
  }
  SECTION("constant symbol kills a constant: W_inf 1 = 1 when V = 0") {
    auto out = laplace_multiplier(e, builtin_function("const:1", g), MultiplierSymbol::constant(1.0));
    CHECK_FALSE(out.diverges);
    CHECK(sup_norm(out.f) < 1e-12);
  }
}

TEST_CASE("regularity shift hypotheses") {
  const auto& e = mehler8();
  CHECK_THROWS_AS(shift_hypotheses(e, OperatorSpec::frac_laplacian(1.0), 0.5), hypothesis_error);
  CHECK_THROWS_AS(shift_hypotheses(e, OperatorSpec::frac_laplacian(1.0), 1.0), hypothesis_error);
  CHECK(shift_hypotheses(e, OperatorSpec::frac_laplacian(0.5), 1.0));
  CHECK_THROWS_AS(shift_hypotheses(e, OperatorSpec::riesz(false), 1.0), hypothesis_error);
  CHECK(shift_hypotheses(e, OperatorSpec::riesz(false), 1.5));
  CHECK_THROWS_AS(shift_hypotheses(e, OperatorSpec::riesz(true), 1.0), hypothesis_error);
  CHECK(shift_hypotheses(e, OperatorSpec::riesz(true), 0.5));
  CHECK_THROWS_AS(OperatorSpec::bessel(0.0), std::invalid_argument);
}

TEST_CASE("empty Riesz range for the configured q is NA") {
  // n = 1, q = 1: the d L^{-1/2} range (0, 1 - n/q] is empty
  Grid g(1, 8.0, 129);
  auto V = PotentialDescriptor::tabulated(1, {0.0, 20.0}, {1.0, 401.0}, 1.0);
  auto e = SemigroupEngine::spectral(V, g);
  CHECK_FALSE(shift_hypotheses(e, OperatorSpec::riesz(true), 0.5));
  auto r = regularity_shift_check(e, OperatorSpec::riesz(true), builtin_function("hermite-h0", g), 0.5);
  CHECK(r.verdict == Verdict::not_applicable);
  // the other Riesz range is (1, 1] and also empty
  CHECK_FALSE(shift_hypotheses(e, OperatorSpec::riesz(false), 1.0));
}

TEST_CASE("Bessel potential lifts |x|^{1/2} by beta") {
  Grid g(1, 4.0, 1025);
  auto e = SemigroupEngine::mehler(g);
  auto r = regularity_shift_check(e, OperatorSpec::bessel(1.0), builtin_function("abs-pow:0.5", g), 0.5);
  CHECK(r.alpha_out == 1.5);
  CHECK(r.input_verdict == Verdict::pass);
  CHECK_THAT(r.output_class, WithinAbs(1.5, 0.1));
  CHECK(r.verdict == Verdict::pass);
}

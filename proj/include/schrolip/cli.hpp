#ifndef SCHROLIP_CLI_HPP
#define SCHROLIP_CLI_HPP

#include <algorithm>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "config.hpp"
#include "families.hpp"
#include "heat.hpp"
#include "lipschitz.hpp"
#include "operators.hpp"
#include "poisson.hpp"
#include "potentials.hpp"
#include "report.hpp"

namespace schrolip {

enum ExitCode { exit_pass = 0, exit_fail = 1, exit_undecided = 2, exit_usage = 3 };

inline int exit_code(Verdict v) {
  switch (v) {
    case Verdict::pass: return exit_pass;
    case Verdict::fail: return exit_fail;
    default: return exit_undecided;
  }
}

// Thrown for numerical divergence; becomes exit 1 with a structured payload.
struct divergence_error : std::runtime_error {
  std::vector<std::string> notes;
  divergence_error(const std::string& what, std::vector<std::string> n) : std::runtime_error(what), notes(std::move(n)) {}
};

namespace cli_detail {

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Everything a command needs, built from the configuration.
struct Setup {
  RunConfiguration cfg;
  Grid grid;
  PotentialDescriptor V;
  GridFunction f;
  std::string hash;
  std::vector<std::string> notes;
  std::unique_ptr<SemigroupEngine> engine;

  FitWindow window;
  SlopeTolerances tol;
};

inline PotentialDescriptor build_potential(const RunConfiguration& c, int dim, std::string& hashed) {
  std::string spec = c.str("potential");
  PotentialDescriptor V;
  if (spec.rfind("table:", 0) == 0) {
    std::string path = spec.substr(6);
    hashed += "potential-table\n" + slurp(path);
    std::optional<double> q;
    if (c.has("rh-q")) q = c.positive("rh-q");
    V = load_radial_table(path, dim, q);
  } else {
    V = parse_potential(spec, dim);
    if (c.has("rh-q")) throw std::invalid_argument("rh-q applies to table potentials only");
  }
  return V;
}

inline Setup build(const RunConfiguration& cfg, bool need_engine, bool need_function) {
  Setup s;
  s.cfg = cfg;
  std::string hashed = "config\n" + cfg.canonical_text();
  int dim = cfg.integer("dim");
  if (dim < 1 || dim > 3) throw std::invalid_argument("dim must be 1, 2 or 3");
  s.grid = Grid(dim, cfg.positive("grid-extent"), cfg.integer("grid-points"));
  if (std::pow(double(s.grid.points), dim) > 2e7) throw std::invalid_argument("grid too large for desk scale");
  if (need_function) {
    std::string fs = cfg.str("f");
    if (fs.rfind("csv:", 0) == 0) {
      std::string path = fs.substr(4);
      std::string bytes = slurp(path);
      hashed += "function-csv\n" + bytes;
      std::istringstream in(bytes);
      s.f = read_csv(in);
      if (!(s.f.grid == s.grid)) {
        s.grid = s.f.grid;
        s.notes.push_back("grid taken from the function CSV");
      }
    } else {
      s.f = builtin_function(fs, s.grid);
    }
  }
  s.V = build_potential(cfg, s.grid.dim, hashed);
  if (need_engine) {
    if (s.grid.dim != 1) throw std::invalid_argument("semigroup commands need dim = 1");
    std::string r = cfg.str("regime");
    if (r == "auto") {
      s.engine = std::make_unique<SemigroupEngine>(SemigroupEngine::for_potential(s.V, s.grid));
    } else if (r == "gaussian") {
      if (s.V.kind != PotentialKind::zero) throw std::invalid_argument("regime gaussian needs potential zero");
      s.engine = std::make_unique<SemigroupEngine>(SemigroupEngine::gaussian(s.grid));
    } else if (r == "mehler") {
      if (s.V.kind != PotentialKind::hermite) throw std::invalid_argument("regime mehler needs potential hermite");
      s.engine = std::make_unique<SemigroupEngine>(SemigroupEngine::mehler(s.grid));
    } else if (r == "spectral" || r == "spectral-fd") {
      s.engine = std::make_unique<SemigroupEngine>(SemigroupEngine::spectral(
          s.V, s.grid, r == "spectral" ? SpectralMethod::dvr : SpectralMethod::finite_difference));
    } else {
      throw std::invalid_argument("unknown regime '" + r + "' (auto, gaussian, mehler, spectral, spectral-fd)");
    }
    // fit window, clipped into the reliable range
    auto [lo, hi] = s.engine->reliable_window();
    s.window.y_min = lo;
    if (cfg.has("y-min")) {
      double y0 = cfg.positive("y-min");
      if (y0 < lo) s.notes.push_back("y-min clipped up to the reliable floor 10h^2");
      s.window.y_min = std::max(y0, lo);
    }
    double top = hi;
    if (cfg.has("y-max")) {
      double y1 = cfg.positive("y-max");
      if (y1 > hi) s.notes.push_back("y-max clipped down to (R/4)^2");
      top = std::min(y1, hi);
    }
    int n = int(std::floor(std::log2(top / s.window.y_min) + 1e-9)) + 1;
    if (!cfg.has("y-max")) n = 8;
    if (n < 8) {
      if (s.window.y_min * 128.0 > hi * (1.0 + 1e-12)) throw std::invalid_argument("y-window cannot hold 8 dyadic samples inside [10h^2, (R/4)^2]");
      s.notes.push_back("y-window widened to 8 dyadic samples");
      n = 8;
    }
    s.window.samples = n;
  }
  s.tol.heat = cfg.positive("tol-heat");
  s.tol.poisson = cfg.positive("tol-poisson");
  s.hash = git_blob_hash(hashed);
  return s;
}

inline std::string format(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline Json with_notes(Json j, const std::vector<std::string>& notes) {
  if (!notes.empty()) {
    Json n = j.contains("notes") ? j["notes"] : Json::array();
    for (const auto& s : notes) n.push_back(s);
    j["notes"] = n;
  }
  return j;
}

struct Outcome {
  Json payload;
  Verdict verdict = Verdict::pass;
};

inline double alpha_of(const Setup& s) {
  if (!s.cfg.has("alpha")) throw std::invalid_argument("this command needs --alpha");
  return s.cfg.positive("alpha");
}

inline double beta_of(const Setup& s) {
  if (!s.cfg.has("beta")) throw std::invalid_argument("this command needs --beta");
  return s.cfg.positive("beta");
}

inline int axis_of(const Setup& s) {
  int i = s.cfg.integer("i");
  if (i < 1 || i > s.grid.dim) throw std::invalid_argument("--i must lie in 1..n");
  return i - 1;
}

inline OperatorSpec riesz_spec(const Setup& s) {
  std::string v = s.cfg.str("variant");
  if (v != "calderon" && v != "adjoint") throw std::invalid_argument("--variant must be calderon or adjoint");
  return OperatorSpec::riesz(v == "calderon", axis_of(s));
}

inline Outcome shift_outcome(const Setup& s, const OperatorSpec& spec, const std::string& theorem) {
  auto r = regularity_shift_check(*s.engine, spec, s.f, alpha_of(s), s.window);
  Json j = to_json(r);
  j["theorem"] = theorem;
  return {j, r.verdict};
}

using Checker = std::function<Outcome(const Setup&)>;

inline const std::map<std::string, Checker>& registry() {
  static const std::map<std::string, Checker> r = {
      {"identities",
       [](const Setup& s) {
         auto rec = verify_space_equivalence(*s.engine, s.f, alpha_of(s), s.window, s.tol);
         return Outcome{to_json(rec), rec.verdict};
       }},
      {"identities4",
       [](const Setup& s) {
         auto mp = poisson_size_norm(s.f);
         if (mp.diverges) throw hypothesis_error("identities4 needs the Poisson size condition M^P[f] < inf");
         auto rec = verify_space_equivalence(*s.engine, s.f, alpha_of(s), s.window, s.tol);
         return Outcome{to_json(rec), rec.verdict};
       }},
      {"nuevostein",
       [](const Setup& s) {
         if (s.engine->potential().kind != PotentialKind::zero)
           throw hypothesis_error("nuevostein concerns the classical heat semigroup: use --potential zero");
         double a = alpha_of(s);
         if (!(a < 2.0)) throw hypothesis_error("nuevostein needs 0 < alpha < 2");
         auto rec = verify_space_equivalence(*s.engine, s.f, a, s.window, s.tol);
         Json j = to_json(rec);
         j["M_tilde_alpha"] = polynomial_size(s.f, a);
         return Outcome{j, rec.verdict};
       }},
      {"tam2",
       [](const Setup& s) {
         double a = alpha_of(s);
         int k = std::min(heat_order(a), heat_order_cap);
         auto fit = heat_scaling_fit(*s.engine, s.f, k, s.window);
         double margin = 0.0;
         Verdict deriv = slope_membership(fit, -k + 0.5 * a, s.tol.heat, &margin);
         // on the grid both size conditions reduce to finite recorded constants
         double growth = s.f.growth_constant();
         auto ml = weighted_size(s.f, a, s.engine->rho_field());
         Verdict size = std::isfinite(growth) ? Verdict::pass : Verdict::fail;
         Verdict weighted = std::isfinite(ml.value) ? Verdict::pass : Verdict::fail;
         bool c1 = false, c2 = false;
         Verdict first = combine_legs({size, deriv}, &c1), second = combine_legs({weighted, deriv}, &c2);
         Json j;
         j["alpha"] = a;
         j["k"] = k;
         j["heat_size_condition"] = {{"growth_exponent", s.f.growth_exponent},
                                     {"growth_constant", growth},
                                     {"verdict", to_string(size)}};
         j["M_L_alpha"] = {{"value", ml.value}, {"rho_unbounded", ml.rho_unbounded}, {"verdict", to_string(weighted)}};
         j["derivative_bound"] = {{"predicted_slope", -k + 0.5 * a}, {"margin", margin}, {"fit", to_json(fit)},
                                  {"verdict", to_string(deriv)}};
         j["statement_size_and_derivative"] = to_string(first);
         j["statement_weighted_and_derivative"] = to_string(second);
         j["statements_agree"] = first == second;
         Verdict v = first == second ? first : Verdict::indeterminate;
         j["verdict"] = to_string(v);
         return Outcome{j, v};
       }},
      {"schau",
       [](const Setup& s) {
         std::string op = s.cfg.str("op");
         if (op != "bessel" && op != "fracint") throw std::invalid_argument("--op must be bessel or fracint");
         double b = beta_of(s);
         return shift_outcome(s, op == "bessel" ? OperatorSpec::bessel(b) : OperatorSpec::frac_integral(b), "schau");
       }},
      {"holder",
       [](const Setup& s) {
         double a = alpha_of(s), b = beta_of(s);
         if (!(b < a)) throw hypothesis_error("holder needs 0 < beta < alpha");
         return shift_outcome(s, OperatorSpec::frac_laplacian(b), "holder");
       }},
      {"triesz", [](const Setup& s) { return shift_outcome(s, riesz_spec(s), "triesz"); }},
      {"multiplicador",
       [](const Setup& s) {
         return shift_outcome(s, OperatorSpec::multiplier(parse_symbol(s.cfg.str("a"))), "multiplicador");
       }},
      {"comparacion",
       [](const Setup& s) {
         double a = alpha_of(s);
         auto params = SmoothnessParams::make(a, s.engine->potential());
         if (!params.admissible) throw hypothesis_error("comparacion needs " + params.range);
         double t = s.cfg.has("t") ? s.cfg.positive("t") : s.engine->reliable_window().second;
         auto rep = perturbation_difference(*s.engine, s.f, t);
         auto ml = weighted_size(s.f, a, s.engine->rho_field());
         double predicted = -1.0 + 0.5 * a;
         bool zero = std::all_of(rep.norms.begin(), rep.norms.end(), [](double v) { return v == 0.0; });
         Verdict v = zero ? Verdict::pass : margin_verdict(rep.slope - predicted, 0.1);
         Json j;
         j["alpha"] = a;
         j["t"] = t;
         j["M_L_alpha"] = ml.value;
         j["ts"] = rep.ts;
         j["norms"] = rep.norms;
         j["fitted_slope"] = rep.slope;
         j["predicted_slope"] = predicted;
         j["difference_sup_at_t"] = sup_norm(rep.difference);
         j["verdict"] = to_string(v);
         return Outcome{j, v};
       }},
  };
  return r;
}

inline std::string registry_names() {
  std::string s;
  for (const auto& [k, v] : registry()) s += (s.empty() ? "" : ", ") + k;
  return s;
}

inline void write_values_csv(const GridFunction& f, std::ostream& out) { write_csv(f, out); }

}  // namespace cli_detail

// Runs one command; stdout gets only the payload, stderr the notes.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;
  CLI::App app{"semigroup laboratory for L = -Laplacian + V", "schrolip"};
  app.require_subcommand(1);
  std::map<std::string, std::string> flags;
  std::string config_path;
  app.add_option("--config", config_path, "key = value configuration file (flags win)");
  for (const auto& k : config_keys())
    app.add_option("--" + k.name, flags[k.name], k.help);

  auto* rho = app.add_subcommand("rho", "critical radius table along the first axis");
  auto* seminorm = app.add_subcommand("seminorm", "seminorm report for f at alpha");
  auto* verify = app.add_subcommand("verify", "run a theorem checker");
  std::string theorem;
  verify->add_option("theorem", theorem, "theorem name")->required();
  auto* op = app.add_subcommand("op", "apply an operator to f");
  std::string op_kind;
  op->add_option("kind", op_kind, "bessel | fracint | fraclap | riesz | multiplier")->required();
  auto* semigroup = app.add_subcommand("semigroup", "raw W_y f or P_y f samples");
  for (auto* sub : {rho, seminorm, verify, op, semigroup}) sub->fallthrough();

  std::string command = "?";
  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    err << app.help();
    return exit_pass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  }

  try {
    RunConfiguration cfg;
    if (!config_path.empty()) cfg = RunConfiguration::load(config_path);
    for (const auto& k : config_keys())
      if (app.count("--" + k.name) > 0) cfg.set(k.name, flags[k.name]);
    std::string fmt = cfg.str("output");
    if (fmt != "json" && fmt != "csv") throw std::invalid_argument("--output must be json or csv");
    bool json = fmt == "json";

    auto emit = [&](const std::string& cmd, const Setup& s, Json payload) {
      payload = with_notes(std::move(payload), s.notes);
      out << envelope(cmd, s.cfg, s.hash, payload).dump(2) << "\n";
      for (const auto& n : s.notes) err << "note: " << n << "\n";
    };

    if (rho->parsed()) {
      command = "rho";
      Setup s = build(cfg, false, false);
      CriticalRadiusField field(s.V);
      std::vector<std::pair<double, Radius>> rows;
      int c = s.grid.points / 2;
      for (int i = c; i < s.grid.points; ++i) {
        std::vector<double> x(s.grid.dim, 0.0);
        x[0] = s.grid.coord(i);
        rows.push_back({x[0], field(x)});
      }
      bool monotone = true;
      for (size_t i = 1; i < rows.size(); ++i)
        if (!rows[i].second.unbounded && rows[i].second.value > rows[i - 1].second.value * (1.0 + 1e-12)) monotone = false;
      std::optional<RhoComparisonReport> cmp;
      if (cfg.flag("compare")) {
        std::vector<std::pair<std::vector<double>, std::vector<double>>> pairs;
        for (auto& a : rows)
          for (auto& b : rows) {
            std::vector<double> x(s.grid.dim, 0.0), z(s.grid.dim, 0.0);
            x[0] = a.first;
            z[0] = b.first;
            pairs.push_back({x, z});
          }
        cmp = rho_comparison_check(s.V, pairs);
      }
      if (json) {
        Json table = Json::array();
        for (auto& [x, r] : rows) table.push_back({{"x", x}, {"rho", radius_json(r)}});
        Json p;
        p["potential"] = s.V.name();
        p["dim"] = s.grid.dim;
        p["rows"] = table;
        p["nonincreasing"] = monotone;
        if (cmp)
          p["comparison"] = {{"C", cmp->C}, {"k0", cmp->k0}, {"pairs", cmp->pairs}, {"violations", cmp->violations.size()}};
        emit("rho", s, p);
      } else {
        out << "x,rho\n";
        for (auto& [x, r] : rows) out << format(x) << "," << (r.unbounded ? "unbounded" : format(r.value)) << "\n";
        if (cmp) err << "comparison: C = " << cmp->C << ", k0 = " << cmp->k0 << ", violations = " << cmp->violations.size() << "\n";
      }
      return exit_pass;
    }

    if (seminorm->parsed()) {
      command = "seminorm";
      Setup s = build(cfg, true, true);
      auto rep = seminorm_report(*s.engine, s.f, alpha_of(s), s.window, s.tol);
      if (json) {
        emit("seminorm", s, to_json(rep));
      } else {
        out << "quantity,value\n";
        auto row = [&](const char* name, const std::optional<double>& v) {
          out << name << "," << (v ? format(*v) : "") << "\n";
        };
        row("M_L_alpha", rep.M_L_alpha);
        row("N_alpha", rep.N_alpha);
        row("M_tilde_alpha", rep.M_tilde_alpha);
        row("M_P", rep.M_P);
        row("S_W_alpha", rep.S_W_alpha);
        row("S_P_alpha", rep.S_P_alpha);
        row("first_diff_lipschitz", rep.first_diff_lipschitz);
        if (rep.heat_fit) row("heat_slope", rep.heat_fit->slope);
        if (rep.poisson_fit) row("poisson_slope", rep.poisson_fit->slope);
        for (const auto& [k, v] : rep.verdicts) out << "verdict_" << k << "," << to_string(v) << "\n";
        for (const auto& n : s.notes) err << "note: " << n << "\n";
      }
      return exit_pass;
    }

    if (verify->parsed()) {
      command = "verify";
      auto it = registry().find(theorem);
      if (it == registry().end()) {
        err << "error: unknown theorem '" << theorem << "'; registry: " << registry_names() << "\n";
        return exit_usage;
      }
      Setup s = build(cfg, true, true);
      Outcome o = it->second(s);
      if (json) {
        Json p;
        p["theorem"] = theorem;
        for (auto i = o.payload.begin(); i != o.payload.end(); ++i) p[i.key()] = i.value();
        emit("verify", s, p);
      } else {
        out << "theorem,verdict\n" << theorem << "," << to_string(o.verdict) << "\n";
      }
      err << theorem << ": " << to_string(o.verdict) << "\n";
      return exit_code(o.verdict);
    }

    if (op->parsed()) {
      command = "op";
      Setup s = build(cfg, true, true);
      OperatorSpec spec;
      if (op_kind == "bessel") spec = OperatorSpec::bessel(beta_of(s));
      else if (op_kind == "fracint") spec = OperatorSpec::frac_integral(beta_of(s));
      else if (op_kind == "fraclap") spec = OperatorSpec::frac_laplacian(beta_of(s));
      else if (op_kind == "riesz") spec = riesz_spec(s);
      else if (op_kind == "multiplier") spec = OperatorSpec::multiplier(parse_symbol(cfg.str("a")));
      else throw std::invalid_argument("unknown operator '" + op_kind + "' (bessel, fracint, fraclap, riesz, multiplier)");
      auto res = apply_operator(*s.engine, spec, s.f);
      if (res.diverges) throw divergence_error(to_string(spec.kind) + " diverges", res.notes);
      std::optional<ShiftRecord> check;
      if (cfg.flag("check")) check = regularity_shift_check(*s.engine, spec, s.f, alpha_of(s), s.window);
      for (const auto& n : res.notes) s.notes.push_back(n);
      if (json) {
        Json p;
        p["operator"] = to_json(spec);
        p["tail_estimate"] = res.tail_estimate;
        std::vector<double> xs;
        for (int i = 0; i < s.grid.points; ++i) xs.push_back(s.grid.coord(i));
        p["x"] = xs;
        p["values"] = res.f.values;
        if (check) p["check"] = to_json(*check);
        emit("op", s, p);
      } else {
        write_values_csv(res.f, out);
        for (const auto& n : s.notes) err << "note: " << n << "\n";
        if (check) err << "regularity shift: " << to_string(check->verdict) << "\n";
      }
      return check ? exit_code(check->verdict) : exit_pass;
    }

    if (semigroup->parsed()) {
      command = "semigroup";
      Setup s = build(cfg, true, true);
      if (!cfg.has("y")) throw std::invalid_argument("semigroup needs --y");
      double y = cfg.positive("y");
      int k = cfg.has("k") ? cfg.integer("k") : 0;
      std::string which = cfg.str("semigroup");
      GridFunction r;
      if (which == "heat") r = k == 0 ? apply_heat(*s.engine, s.f, y) : heat_derivative(*s.engine, s.f, y, k);
      else if (which == "poisson") r = poisson_derivative(*s.engine, s.f, y, k);
      else throw std::invalid_argument("--semigroup must be heat or poisson");
      if (json) {
        Json p;
        p["semigroup"] = which;
        p["y"] = y;
        p["k"] = k;
        std::vector<double> xs;
        for (int i = 0; i < s.grid.points; ++i) xs.push_back(s.grid.coord(i));
        p["x"] = xs;
        p["values"] = r.values;
        emit("semigroup", s, p);
      } else {
        write_values_csv(r, out);
      }
      return exit_pass;
    }
  } catch (const divergence_error& e) {
    Json j;
    j["schema_version"] = schema_version;
    j["command"] = command;
    j["error"] = "divergence";
    j["message"] = e.what();
    j["notes"] = e.notes;
    out << j.dump(2) << "\n";
    err << "error: " << e.what() << "\n";
    return exit_fail;
  } catch (const hypothesis_error& e) {
    err << "rejected: " << e.what() << "\n";
    return exit_usage;
  } catch (const truncation_error& e) {
    err << "error: " << e.what() << "\n";
    return exit_fail;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  }
  return exit_usage;
}

}  // namespace schrolip

#endif  // SCHROLIP_CLI_HPP

#ifndef SCHROLIP_REPORT_HPP
#define SCHROLIP_REPORT_HPP

#include <cstdio>
#include <stdexcept>
#include <string>

#include <json.hpp>
#include <openssl/evp.h>

#include "config.hpp"
#include "lipschitz.hpp"
#include "operators.hpp"

namespace schrolip {

using Json = nlohmann::ordered_json;

inline constexpr int schema_version = 1;

// sha1("blob <size>\0<content>") in hex, as git hashes a file.
inline std::string git_blob_hash(const std::string& content) {
  std::string blob = "blob " + std::to_string(content.size());
  blob.push_back('\0');
  blob += content;
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), md, &len, EVP_sha1(), nullptr) != 1)
    throw std::runtime_error("SHA-1 digest failed");
  std::string hex;
  char buf[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

inline Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json radius_json(const Radius& r) { return r.unbounded ? Json("unbounded") : Json(r.value); }

inline Json to_json(const ScalingFit& fit) {
  Json j;
  j["order"] = fit.order;
  j["slope"] = fit.slope;
  j["raw_slope"] = fit.raw_slope;
  j["intercept"] = fit.intercept;
  j["residual"] = fit.residual;
  j["window"] = {{"y_min", fit.y_min}, {"y_max", fit.y_max}};
  j["samples"] = fit.samples;
  j["clipped"] = fit.clipped;
  j["infinitely_smooth"] = fit.degenerate;
  j["ys"] = fit.ys;
  j["norms"] = fit.norms;
  return j;
}

inline Json to_json(const EquivalenceRecord& r) {
  Json j;
  j["alpha"] = r.params.alpha;
  j["k_heat"] = r.params.k_heat;
  j["k_poisson"] = r.params.k_poisson;
  j["admissible_range"] = r.params.range;
  j["M_L_alpha"] = r.m_l.value;
  j["rho_unbounded"] = r.m_l.rho_unbounded;
  j["seminorm_leg"] = {{"N_alpha", r.zygmund.fine},
                       {"N_alpha_coarse", r.zygmund.coarse},
                       {"growth_exponent", number_or_null(r.zygmund.exponent)},
                       {"verdict", to_string(r.seminorm_leg)}};
  j["heat_leg"] = {{"predicted_slope", r.heat_predicted},
                   {"margin", r.heat_margin},
                   {"fit", to_json(r.heat)},
                   {"verdict", to_string(r.heat_leg)}};
  Json p;
  p["M_P"] = r.m_p.diverges ? Json(nullptr) : Json(r.m_p.value);
  p["M_P_diverges"] = r.m_p.diverges;
  if (r.poisson_leg != Verdict::not_applicable) {
    p["predicted_slope"] = r.poisson_predicted;
    p["margin"] = r.poisson_margin;
    p["fit"] = to_json(r.poisson);
  }
  p["verdict"] = to_string(r.poisson_leg);
  j["poisson_leg"] = p;
  j["legs_consistent"] = r.legs_consistent;
  j["notes"] = r.notes;
  j["verdict"] = to_string(r.verdict);
  return j;
}

inline Json optional_json(const std::optional<double>& v) { return v ? number_or_null(*v) : Json(nullptr); }

inline Json to_json(const SeminormReport& r) {
  Json j;
  j["alpha"] = r.alpha;
  j["M_L_alpha"] = optional_json(r.M_L_alpha);
  j["N_alpha"] = optional_json(r.N_alpha);
  j["M_tilde_alpha"] = optional_json(r.M_tilde_alpha);
  j["M_P"] = optional_json(r.M_P);
  j["S_W_alpha"] = optional_json(r.S_W_alpha);
  j["S_P_alpha"] = optional_json(r.S_P_alpha);
  j["first_diff_lipschitz"] = optional_json(r.first_diff_lipschitz);
  j["heat_fit"] = r.heat_fit ? to_json(*r.heat_fit) : Json(nullptr);
  j["poisson_fit"] = r.poisson_fit ? to_json(*r.poisson_fit) : Json(nullptr);
  Json v = Json::object();
  for (const auto& [k, verdict] : r.verdicts) v[k] = to_string(verdict);
  j["verdicts"] = v;
  j["notes"] = r.notes;
  return j;
}

inline Json to_json(const OperatorSpec& s) {
  Json j;
  j["kind"] = to_string(s.kind);
  switch (s.kind) {
    case OperatorKind::bessel:
    case OperatorKind::frac_integral:
    case OperatorKind::frac_laplacian: j["beta"] = s.beta; break;
    case OperatorKind::riesz_calderon:
    case OperatorKind::riesz_adjoint: j["i"] = s.axis + 1; break;
    case OperatorKind::laplace_multiplier:
      j["a"] = s.symbol.source;
      j["a_sup"] = s.symbol.sup();
      break;
  }
  return j;
}

inline Json to_json(const ShiftRecord& r) {
  Json j;
  j["operator"] = to_json(r.spec);
  j["alpha_in"] = r.alpha_in;
  j["alpha_out"] = r.alpha_out;
  if (r.verdict == Verdict::not_applicable && r.input_fit.samples == 0) {
    j["notes"] = r.notes;
    j["verdict"] = to_string(r.verdict);
    return j;
  }
  j["input"] = {{"fitted_class", number_or_null(r.input_class)},
                {"fit", to_json(r.input_fit)},
                {"verdict", to_string(r.input_verdict)}};
  j["diverges"] = r.diverges;
  if (!r.diverges) j["output"] = {{"fitted_class", number_or_null(r.output_class)}, {"fit", to_json(r.output_fit)}};
  j["notes"] = r.notes;
  j["verdict"] = to_string(r.verdict);
  return j;
}

inline Json config_json(const RunConfiguration& c) {
  Json j = Json::object();
  for (const auto& [k, v] : c.resolved()) j[k] = v;
  return j;
}

// Report envelope: version, command, verbatim configuration, input hash, then the payload.
inline Json envelope(const std::string& command, const RunConfiguration& c, const std::string& input_hash,
                     const Json& payload) {
  Json j;
  j["schema_version"] = schema_version;
  j["command"] = command;
  j["config"] = config_json(c);
  j["input_hash"] = input_hash;
  for (auto it = payload.begin(); it != payload.end(); ++it) j[it.key()] = it.value();
  return j;
}

}  // namespace schrolip

#endif  // SCHROLIP_REPORT_HPP

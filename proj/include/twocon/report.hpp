#ifndef TWOCON_REPORT_HPP
#define TWOCON_REPORT_HPP

// JSON views of decompositions, gain certificates, certification reports and
// sweeps. Matrices are {"rows", "cols", "data"} with data row-major.

#include <cmath>
#include <string>

#include <json.hpp>

#include "twocon/compound.hpp"
#include "twocon/gains.hpp"
#include "twocon/smallgain.hpp"
#include "twocon/sweep.hpp"

namespace twocon {

inline nlohmann::json number_json(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return nullptr;
  return v > 0 ? "inf" : "-inf";
}

inline nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json data = nlohmann::json::array();
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) data.push_back(number_json(m(r, c)));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline nlohmann::json decomposition_json(const ModularDecomposition& d) {
  return {{"n1", d.n1},
          {"n2", d.n2},
          {"A11_compound", matrix_json(d.a11c2)},
          {"A22_compound", matrix_json(d.a22c2)},
          {"kron_sum", matrix_json(d.ksum)},
          {"B1", matrix_json(d.b1)},
          {"B2", matrix_json(d.b2)},
          {"G1", matrix_json(d.g1)},
          {"G2", matrix_json(d.g2)},
          {"Acal", matrix_json(d.assemble())},
          {"permutation", d.perm}};
}

inline nlohmann::json gain_json(const GainCertificate& g) {
  nlohmann::json j = {{"kind", to_string(g.kind)},
                      {"gamma", number_json(g.gamma)},
                      {"P", matrix_json(g.P)},
                      {"vertex_count", g.vertex_count},
                      {"solver", {{"status", sdp::to_string(g.status)},
                                  {"max_violation", number_json(g.max_violation)},
                                  {"newton_steps", g.newton_steps}}}};
  if (g.kind == GainKind::Partitioned) {
    j["eta1sq"] = number_json(g.eta1sq);
    j["eta2sq"] = number_json(g.eta2sq);
  }
  return j;
}

inline nlohmann::json report_json(const CertificationReport& r) {
  nlohmann::json j = {{"method", to_string(r.method)},
                      {"verdict", to_string(r.verdict)},
                      {"condition_value", number_json(r.condition_value)},
                      {"vertex_count", r.vertex_count}};
  nlohmann::json gains = nlohmann::json::object();
  if (r.gamma1) gains["gamma1"] = gain_json(*r.gamma1);
  if (r.gamma2) gains["gamma2"] = gain_json(*r.gamma2);
  if (r.gamma12) gains["gamma12"] = gain_json(*r.gamma12);
  j["gains"] = std::move(gains);
  if (r.partitioned) {
    const auto& p = *r.partitioned;
    j["partitioned"] = {{"eta1sq", number_json(p.eta1sq)},
                        {"eta2sq", number_json(p.eta2sq)},
                        {"objective", number_json(p.objective)},
                        {"P12", matrix_json(p.P12)},
                        {"solver", {{"status", sdp::to_string(p.status)},
                                    {"max_violation", number_json(p.max_violation)},
                                    {"newton_steps", p.newton_steps}}}};
  }
  nlohmann::json mult = nlohmann::json::object();
  if (!std::isnan(r.lambda1)) mult["lambda1"] = r.lambda1;
  if (!std::isnan(r.lambda2)) mult["lambda2"] = r.lambda2;
  if (!std::isnan(r.sigma)) mult["sigma"] = r.sigma;
  if (!std::isnan(r.lambda)) {
    mult["lambda"] = r.lambda;
    mult["lambda_window"] = {number_json(r.lambda_window.first), number_json(r.lambda_window.second)};
  }
  if (!mult.empty()) j["multipliers"] = std::move(mult);
  if (r.lyapunov) j["certificate"] = matrix_json(*r.lyapunov);
  if (!r.message.empty()) j["message"] = r.message;
  return j;
}

inline nlohmann::json bisect_json(const SweepResult& s) {
  nlohmann::json pts = nlohmann::json::array();
  for (std::size_t i = 0; i < s.parameter_grid.size(); ++i)
    pts.push_back({{"param", s.parameter_grid[i]},
                   {"condition_value", number_json(s.condition_values[i])},
                   {"verdict", to_string(s.verdicts[i])}});
  nlohmann::json j = {{"method", to_string(s.method)},
                      {"threshold", s.threshold ? number_json(*s.threshold) : nlohmann::json(nullptr)},
                      {"bracket", {number_json(s.bracket.first), number_json(s.bracket.second)}},
                      {"tolerance_achieved", number_json(s.tolerance_achieved)},
                      {"evaluations", std::move(pts)}};
  if (!s.flags.empty()) j["flags"] = s.flags;
  return j;
}

}  // namespace twocon

#endif  // TWOCON_REPORT_HPP

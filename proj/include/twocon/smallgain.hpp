#ifndef TWOCON_SMALLGAIN_HPP
#define TWOCON_SMALLGAIN_HPP

// Small-gain certification of 2-contraction for two-block interconnections.
//
// Every certified report carries an explicit quadratic certificate: the
// block-diagonal matrix Pcal = blockdiag(., ., .) in the stacked ordering
// (X11, vec X12, X22), built from the gain certificates with the multiplier
// choices below, such that Acal^T Pcal + Pcal Acal < 0 at every vertex.
//
//   partitioned route:  Pcal = blockdiag(l1 P1, P12, l2 P2),
//                       l_i = eta_i~ + sigma,
//                       sigma = (1 - Gamma1) / (2 (gamma1^2 + gamma2^2))
//   single-gain route:  Pcal = blockdiag(P1, l P12, P2),
//                       l = sqrt((gamma1^2 + gamma2^2) / gamma12^2)
//
// The direct route searches one P for the full compound matrices instead.

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "twocon/compound.hpp"
#include "twocon/errors.hpp"
#include "twocon/gains.hpp"
#include "twocon/sdp.hpp"

namespace twocon {

// A finite family of partitioned matrices whose convex hull contains the
// Jacobian over a forward-invariant region.
class PolytopicModel {
 public:
  PolytopicModel() = default;

  explicit PolytopicModel(std::vector<PartitionedMatrix> vertices, std::string description = {})
      : vertices_(std::move(vertices)), description_(std::move(description)) {
    if (vertices_.empty()) throw InvalidModel("a polytopic model needs at least one vertex");
    const Index n1 = vertices_.front().n1(), n2 = vertices_.front().n2();
    for (const auto& v : vertices_)
      if (v.n1() != n1 || v.n2() != n2) throw InvalidModel("all vertices must share the partition (n1, n2)");
  }

  static PolytopicModel linear(const PartitionedMatrix& a, std::string description = {}) {
    return PolytopicModel({a}, std::move(description));
  }

  const std::vector<PartitionedMatrix>& vertices() const noexcept { return vertices_; }
  const std::string& description() const noexcept { return description_; }
  Index n1() const { return vertices_.front().n1(); }
  Index n2() const { return vertices_.front().n2(); }
  Index dim() const { return n1() + n2(); }

  std::optional<double> parameter;
  std::vector<std::pair<double, double>> invariant_box;  // empty if not given

  std::vector<ModularDecomposition> decompositions() const {
    std::vector<ModularDecomposition> out;
    out.reserve(vertices_.size());
    for (const auto& v : vertices_) out.push_back(decompose(v));
    return out;
  }

 private:
  std::vector<PartitionedMatrix> vertices_;
  std::string description_;
};

enum class Method { Thm1, Thm2, Thm3, Thm4, Direct, N3Special };
enum class Verdict { Certified, NotCertified, Unknown };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::Thm1: return "thm1";
    case Method::Thm2: return "thm2";
    case Method::Thm3: return "thm3";
    case Method::Thm4: return "thm4";
    case Method::Direct: return "direct";
    case Method::N3Special: return "n3";
  }
  return "?";
}

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Certified: return "certified";
    case Verdict::NotCertified: return "not_certified";
    case Verdict::Unknown: return "unknown";
  }
  return "?";
}

struct CertifyOptions {
  double eps = 0.01;      // P >= eps I in every gain LMI
  double margin = 1e-6;   // "< 1" is tested as "<= 1 - margin"
  double verify_margin = 1e-9;
  sdp::SolverOptions solver{};

  GainOptions gain_options() const { return GainOptions{eps, solver}; }
};

struct CertificationReport {
  Method method = Method::Thm1;
  Verdict verdict = Verdict::Unknown;
  // Gamma1 = g1^2 eta1~ + g2^2 eta2~ (partitioned), Gamma2 = g12^2 (g1^2 + g2^2)
  // (single gain), g12 * g_s (n = 3), or the largest eigenvalue of
  // V^[2]T P + P V^[2] over the vertices (direct).
  double condition_value = std::numeric_limits<double>::quiet_NaN();
  std::optional<GainCertificate> gamma1;
  std::optional<GainCertificate> gamma2;
  std::optional<GainCertificate> gamma12;
  std::optional<PartitionedGainResult> partitioned;
  // Pcal in the stacked ordering, or P in skew-vector ordering for Direct.
  std::optional<Matrix> lyapunov;
  double lambda1 = std::numeric_limits<double>::quiet_NaN();
  double lambda2 = std::numeric_limits<double>::quiet_NaN();
  double lambda = std::numeric_limits<double>::quiet_NaN();
  double sigma = std::numeric_limits<double>::quiet_NaN();
  // Admissible multiplier window (single-gain and n = 3 routes).
  std::pair<double, double> lambda_window{std::numeric_limits<double>::quiet_NaN(),
                                          std::numeric_limits<double>::quiet_NaN()};
  std::size_t vertex_count = 0;
  std::string message;
};

namespace detail {

inline Matrix block_diag(const std::vector<Matrix>& blocks) {
  Index n = 0;
  for (const auto& b : blocks) n += b.rows();
  Matrix out = Matrix::Zero(n, n);
  Index off = 0;
  for (const auto& b : blocks) {
    out.block(off, off, b.rows(), b.rows()) = b;
    off += b.rows();
  }
  return out;
}

inline double max_sym_eig(const Matrix& m) {
  if (m.rows() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

inline double min_sym_eig(const Matrix& m) {
  if (m.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

template <class F>
CertificationReport guarded(Method method, F&& body) {
  CertificationReport r;
  r.method = method;
  try {
    body(r);
  } catch (const NoFiniteGain& e) {
    r.verdict = Verdict::NotCertified;
    r.message = e.what();
  } catch (const Infeasible& e) {
    r.verdict = Verdict::NotCertified;
    r.message = e.what();
  } catch (const NumericalFailure& e) {
    r.verdict = Verdict::Unknown;
    r.message = e.what();
  }
  return r;
}

}  // namespace detail

bool verify_certificate(const CertificationReport& report, const PolytopicModel& model,
                        double margin = 1e-9);

namespace detail {

inline void finalize(CertificationReport& r, const PolytopicModel& model, const CertifyOptions& opts) {
  if (r.verdict != Verdict::Certified) return;
  if (!verify_certificate(r, model, opts.verify_margin)) {
    r.verdict = Verdict::Unknown;
    r.message = "assembled certificate failed eigenvalue verification";
  }
}

}  // namespace detail

// Partitioned-gain route (linear: one vertex; polytopic: shared P12).
inline CertificationReport certify_thm1(const PolytopicModel& model, const CertifyOptions& opts = {}) {
  const Method method = model.vertices().size() == 1 ? Method::Thm1 : Method::Thm3;
  auto r = detail::guarded(method, [&](CertificationReport& r) {
    const auto ds = model.decompositions();
    r.vertex_count = ds.size();
    const auto go = opts.gain_options();
    r.gamma1 = gamma1(ds, go);
    r.gamma2 = gamma2(ds, go);
    const double g1sq = r.gamma1->gamma * r.gamma1->gamma;
    const double g2sq = r.gamma2->gamma * r.gamma2->gamma;
    r.partitioned = partitioned_gains_minimize(std::span<const ModularDecomposition>(ds), g1sq, g2sq, go);
    r.condition_value = r.partitioned->objective;
    if (!(r.condition_value <= 1.0 - opts.margin)) {
      r.verdict = Verdict::NotCertified;
      r.message = "small-gain objective not below 1";
      return;
    }
    const double denom = g1sq + g2sq;
    r.sigma = denom > 0.0 ? (1.0 - r.condition_value) / (2.0 * denom) : 1.0;
    r.lambda1 = r.partitioned->eta1sq + r.sigma;
    r.lambda2 = r.partitioned->eta2sq + r.sigma;
    r.lyapunov = detail::block_diag({r.lambda1 * r.gamma1->P, r.partitioned->P12, r.lambda2 * r.gamma2->P});
    r.verdict = Verdict::Certified;
  });
  detail::finalize(r, model, opts);
  return r;
}

namespace detail {

inline std::pair<double, double> lambda_window(double gsum_sq, double g12sq) {
  return {gsum_sq, g12sq > 0.0 ? 1.0 / g12sq : std::numeric_limits<double>::infinity()};
}

inline double pick_lambda(std::pair<double, double> w) {
  const auto [lo, hi] = w;
  if (lo > 0.0 && std::isfinite(hi)) return std::sqrt(lo * hi);
  if (lo > 0.0) return 2.0 * lo;
  if (std::isfinite(hi)) return 0.5 * hi;
  return 1.0;
}

}  // namespace detail

// Single-gain route: gamma12 * sqrt(gamma1^2 + gamma2^2) < 1.
inline CertificationReport certify_thm2(const PolytopicModel& model, const CertifyOptions& opts = {}) {
  const Method method = model.vertices().size() == 1 ? Method::Thm2 : Method::Thm4;
  auto r = detail::guarded(method, [&](CertificationReport& r) {
    const auto ds = model.decompositions();
    r.vertex_count = ds.size();
    const auto go = opts.gain_options();
    r.gamma1 = gamma1(ds, go);
    r.gamma2 = gamma2(ds, go);
    r.gamma12 = gamma12(ds, go);
    const double gsum = r.gamma1->gamma * r.gamma1->gamma + r.gamma2->gamma * r.gamma2->gamma;
    const double g12sq = r.gamma12->gamma * r.gamma12->gamma;
    r.condition_value = g12sq * gsum;
    if (!(std::sqrt(r.condition_value) <= 1.0 - opts.margin)) {
      r.verdict = Verdict::NotCertified;
      r.message = "gamma12 * sqrt(gamma1^2 + gamma2^2) not below 1";
      return;
    }
    r.lambda_window = detail::lambda_window(gsum, g12sq);
    r.lambda = detail::pick_lambda(r.lambda_window);
    r.lyapunov = detail::block_diag({r.gamma1->P, r.lambda * r.gamma12->P, r.gamma2->P});
    r.verdict = Verdict::Certified;
  });
  detail::finalize(r, model, opts);
  return r;
}

// n = 3: one subsystem is scalar and its compound block is empty; the
// condition reduces to gamma12 * gamma_s < 1 with gamma_s the gain of the
// single nonempty compound block.
inline CertificationReport certify_n3(const PolytopicModel& model, const CertifyOptions& opts = {}) {
  if (model.dim() != 3) throw InvalidModel("certify_n3 needs a 3-dimensional model");
  auto r = detail::guarded(Method::N3Special, [&](CertificationReport& r) {
    const auto ds = model.decompositions();
    r.vertex_count = ds.size();
    const auto go = opts.gain_options();
    r.gamma1 = gamma1(ds, go);
    r.gamma2 = gamma2(ds, go);
    r.gamma12 = gamma12(ds, go);
    const double gs = model.n1() == 2 ? r.gamma1->gamma : r.gamma2->gamma;
    r.condition_value = r.gamma12->gamma * gs;
    if (!(r.condition_value <= 1.0 - opts.margin)) {
      r.verdict = Verdict::NotCertified;
      r.message = "gamma12 * gamma_s not below 1";
      return;
    }
    r.lambda_window = detail::lambda_window(gs * gs, r.gamma12->gamma * r.gamma12->gamma);
    r.lambda = detail::pick_lambda(r.lambda_window);
    r.lyapunov = detail::block_diag({r.gamma1->P, r.lambda * r.gamma12->P, r.gamma2->P});
    r.verdict = Verdict::Certified;
  });
  detail::finalize(r, model, opts);
  return r;
}

// Monolithic baseline: one P >= I with V^[2]T P + P V^[2] <= 0 at every vertex.
// Certified only when the inequality holds strictly.
inline CertificationReport certify_direct(const PolytopicModel& model, const CertifyOptions& opts = {}) {
  auto r = detail::guarded(Method::Direct, [&](CertificationReport& r) {
    const Index m = choose2(model.dim());
    std::vector<Matrix> compounds;
    for (const auto& v : model.vertices()) {
      const Matrix c = second_additive_compound(v.entries());
      const bool seen = std::any_of(compounds.begin(), compounds.end(), [&](const Matrix& o) { return o == c; });
      if (!seen) compounds.push_back(c);
    }
    r.vertex_count = model.vertices().size();
    sdp::LmiProblem prob;
    const auto p = prob.add_symmetric("P", m);
    prob.add_lmi(m, sdp::Sense::PosSemidef, "P >= I")
        .term(0, 0, Matrix::Identity(m, m), p, Matrix::Identity(m, m))
        .constant(0, 0, -Matrix::Identity(m, m));
    for (const auto& c : compounds) prob.add_lmi(m, sdp::Sense::NegSemidef, "compound").lyapunov(0, p, c);
    const auto sol = prob.solve(opts.solver);
    if (sol.status == sdp::Status::Infeasible) {
      r.verdict = Verdict::NotCertified;
      r.message = "no common P >= I";
      r.condition_value = sol.phase_one_margin;
      return;
    }
    if (!sdp::succeeded(sol.status)) throw NumericalFailure("direct LMI: " + sol.message);
    const Matrix pv = sol.matrix("P");
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& c : compounds) worst = std::max(worst, detail::max_sym_eig(c.transpose() * pv + pv * c));
    r.condition_value = worst;
    r.lyapunov = pv;
    if (!(worst < -opts.verify_margin)) {
      r.verdict = Verdict::NotCertified;
      r.message = "only non-strictly feasible";
      return;
    }
    r.verdict = Verdict::Certified;
  });
  detail::finalize(r, model, opts);
  return r;
}

// Independent re-check of a certified report: at every vertex rebuild the
// block matrix Acal and test max eig(Acal^T Pcal + Pcal Acal) < -margin, and
// equivalently max eig(A2^T (S Pcal S^T) + (S Pcal S^T) A2) < -margin with
// A2 the full second additive compound. Also requires Pcal > 0.
inline bool verify_certificate(const CertificationReport& report, const PolytopicModel& model, double margin) {
  if (report.verdict != Verdict::Certified || !report.lyapunov) return false;
  const Matrix& pc = *report.lyapunov;
  const Index m = choose2(model.dim());
  if (pc.rows() != m || pc.cols() != m) return false;
  if (!(detail::min_sym_eig(pc) > 0.0)) return false;
  for (const auto& v : model.vertices()) {
    const ModularDecomposition d = decompose(v);
    const Matrix s = permutation_to_compound(d);
    const Matrix a2 = second_additive_compound(v.entries());
    // Direct certificates live in skew-vector ordering; modular ones in stacked ordering.
    const Matrix stacked = report.method == Method::Direct ? Matrix(s.transpose() * pc * s) : pc;
    const Matrix lex = report.method == Method::Direct ? pc : Matrix(s * pc * s.transpose());
    const Matrix acal = d.assemble();
    if (!(detail::max_sym_eig(acal.transpose() * stacked + stacked * acal) < -margin)) return false;
    if (!(detail::max_sym_eig(a2.transpose() * lex + lex * a2) < -margin)) return false;
  }
  return true;
}

// Runs the requested method; Thm1/Thm3 and Thm2/Thm4 are the same procedures
// (the vertex count decides the label).
inline CertificationReport certify(const PolytopicModel& model, Method method, const CertifyOptions& opts = {}) {
  switch (method) {
    case Method::Thm1:
    case Method::Thm3: return certify_thm1(model, opts);
    case Method::Thm2:
    case Method::Thm4: return certify_thm2(model, opts);
    case Method::Direct: return certify_direct(model, opts);
    case Method::N3Special: return certify_n3(model, opts);
  }
  throw InvalidParameter("unknown method");
}

}  // namespace twocon

#endif  // TWOCON_SMALLGAIN_HPP

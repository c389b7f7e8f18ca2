#ifndef TWOCON_GAINS_HPP
#define TWOCON_GAINS_HPP

// L2-type gains of the modular subsystems, certified by bounded-real LMIs
//
//   [ A^T P + P A + I   P B      ]
//   [ B^T P            -gamma^2 I ]  <= 0,     P >= eps I,
//
// with one constant P shared by every replica (A_i, B_i) of a polytopic
// family. gamma^2 enters linearly, so the minimal gain is a linear SDP.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "twocon/compound.hpp"
#include "twocon/errors.hpp"
#include "twocon/sdp.hpp"

namespace twocon {

enum class GainKind { Plain, Gamma1, Gamma2, Gamma12, Partitioned };

inline const char* to_string(GainKind k) {
  switch (k) {
    case GainKind::Plain: return "gamma";
    case GainKind::Gamma1: return "gamma1";
    case GainKind::Gamma2: return "gamma2";
    case GainKind::Gamma12: return "gamma12";
    case GainKind::Partitioned: return "partitioned";
  }
  return "?";
}

struct GainOptions {
  double eps = 0.01;  // P >= eps I
  sdp::SolverOptions solver{};
};

// A certified gain: for Plain/Gamma* kinds `gamma` is set; for Partitioned
// the pair (eta1sq, eta2sq) holds the squared partitioned gains.
struct GainCertificate {
  GainKind kind = GainKind::Plain;
  double gamma = 0.0;
  double eta1sq = 0.0;
  double eta2sq = 0.0;
  Matrix P;
  std::size_t vertex_count = 0;
  sdp::Status status = sdp::Status::Optimal;
  double max_violation = 0.0;
  int newton_steps = 0;
};

// One replica (A_i, B_i) of a (possibly polytopic) input-driven system.
struct LinearSystem {
  Matrix a;
  Matrix b;
};

namespace detail {

inline std::vector<LinearSystem> unique_replicas(std::span<const LinearSystem> systems) {
  std::vector<LinearSystem> out;
  for (const auto& s : systems) {
    const bool seen = std::any_of(out.begin(), out.end(), [&](const LinearSystem& o) {
      return o.a.rows() == s.a.rows() && o.b.cols() == s.b.cols() && o.a == s.a && o.b == s.b;
    });
    if (!seen) out.push_back(s);
  }
  return out;
}

inline void check_family(std::span<const LinearSystem> systems) {
  if (systems.empty()) throw InvalidParameter("gain computation needs at least one replica");
  const Index n = systems.front().a.rows(), m = systems.front().b.cols();
  for (const auto& s : systems) {
    if (s.a.rows() != s.a.cols()) throw NonSquare("state matrix must be square");
    if (s.a.rows() != n || s.b.rows() != n || s.b.cols() != m)
      throw DimensionMismatch("replicas must share dimensions");
  }
}

// Largest eigenvalue of the bounded-real block at (P, g) over all replicas.
inline double bounded_real_residual(std::span<const LinearSystem> systems, const Matrix& p,
                                    const std::vector<double>& gsq_per_channel_group,
                                    const std::vector<Index>& group_sizes) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& s : systems) {
    const Index n = s.a.rows(), m = s.b.cols();
    Matrix blk = Matrix::Zero(n + m, n + m);
    blk.topLeftCorner(n, n) = s.a.transpose() * p + p * s.a + Matrix::Identity(n, n);
    blk.topRightCorner(n, m) = p * s.b;
    blk.bottomLeftCorner(m, n) = s.b.transpose() * p;
    Index off = n;
    for (std::size_t g = 0; g < group_sizes.size(); ++g) {
      blk.block(off, off, group_sizes[g], group_sizes[g]) -=
          gsq_per_channel_group[g] * Matrix::Identity(group_sizes[g], group_sizes[g]);
      off += group_sizes[g];
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(blk, Eigen::EigenvaluesOnly);
    worst = std::max(worst, es.eigenvalues().maxCoeff());
  }
  return worst;
}

inline void throw_on_failure(const sdp::SdpSolution& sol, const std::string& what) {
  if (sol.status == sdp::Status::Infeasible)
    throw NoFiniteGain(what + ": no common certificate P >= eps I exists");
  if (!sdp::succeeded(sol.status)) throw NumericalFailure(what + ": " + sol.message);
}

}  // namespace detail

// Minimal gamma such that one common P >= eps I satisfies the bounded-real
// LMI at every replica. Throws NoFiniteGain when no finite gamma works.
inline GainCertificate min_gain(std::span<const LinearSystem> systems, const GainOptions& opts = {},
                                GainKind kind = GainKind::Plain) {
  detail::check_family(systems);
  const auto reps = detail::unique_replicas(systems);
  const Index n = reps.front().a.rows(), m = reps.front().b.cols();

  GainCertificate cert;
  cert.kind = kind;
  cert.vertex_count = reps.size();
  if (n == 0) {
    cert.P = Matrix(0, 0);
    return cert;
  }
  const bool zero_input = std::all_of(reps.begin(), reps.end(), [](const LinearSystem& s) {
    return s.b.size() == 0 || s.b.cwiseAbs().maxCoeff() == 0.0;
  });

  sdp::LmiProblem prob;
  const auto p = prob.add_symmetric("P", n);
  prob.add_lmi(n, sdp::Sense::PosSemidef, "P >= eps I")
      .term(0, 0, Matrix::Identity(n, n), p, Matrix::Identity(n, n))
      .constant(0, 0, -opts.eps * Matrix::Identity(n, n));
  if (zero_input) {
    // gamma = 0; only the Lyapunov part remains.
    for (const auto& s : reps)
      prob.add_lmi(n, sdp::Sense::NegSemidef, "lyapunov").lyapunov(0, p, s.a).constant(0, 0, Matrix::Identity(n, n));
    const auto sol = prob.solve(opts.solver);
    detail::throw_on_failure(sol, to_string(kind));
    cert.P = sol.matrix("P");
    cert.status = sol.status;
    cert.newton_steps = sol.newton_steps;
    cert.max_violation = std::max(0.0, detail::bounded_real_residual(reps, cert.P, {0.0}, {m}));
    return cert;
  }

  const auto g = prob.add_scalar("gamma_sq", 0.0);
  for (const auto& s : reps) {
    prob.add_lmi(n + m, sdp::Sense::NegSemidef, "bounded real")
        .lyapunov(0, p, s.a)
        .constant(0, 0, Matrix::Identity(n, n))
        .term(0, n, Matrix::Identity(n, n), p, s.b)
        .scalar(n, n, g, -Matrix::Identity(m, m));
  }
  prob.minimize(g);
  const auto sol = prob.solve(opts.solver);
  detail::throw_on_failure(sol, to_string(kind));
  const double gsq = std::max(0.0, sol.scalar("gamma_sq"));
  cert.gamma = std::sqrt(gsq);
  cert.P = sol.matrix("P");
  cert.status = sol.status;
  cert.newton_steps = sol.newton_steps;
  cert.max_violation = std::max(0.0, detail::bounded_real_residual(reps, cert.P, {gsq}, {m}));
  return cert;
}

// Single linear system (A, B): minimal gamma and its certificate.
inline GainCertificate min_gain_squared(const Matrix& a, const Matrix& b, const GainOptions& opts = {}) {
  const LinearSystem sys{a, b};
  return min_gain(std::span<const LinearSystem>(&sys, 1), opts, GainKind::Plain);
}

inline std::vector<LinearSystem> gamma1_family(std::span<const ModularDecomposition> ds) {
  std::vector<LinearSystem> out;
  for (const auto& d : ds) out.push_back({d.a11c2, d.b1});
  return out;
}

inline std::vector<LinearSystem> gamma2_family(std::span<const ModularDecomposition> ds) {
  std::vector<LinearSystem> out;
  for (const auto& d : ds) out.push_back({d.a22c2, d.b2});
  return out;
}

inline std::vector<LinearSystem> gamma12_family(std::span<const ModularDecomposition> ds) {
  std::vector<LinearSystem> out;
  for (const auto& d : ds) {
    Matrix g(d.size12(), d.size1() + d.size2());
    g << d.g1, d.g2;
    out.push_back({d.ksum, g});
  }
  return out;
}

// Gain of the X11 subsystem (A11^[2], B1), common P1 across vertices.
inline GainCertificate gamma1(std::span<const ModularDecomposition> ds, const GainOptions& opts = {}) {
  const auto fam = gamma1_family(ds);
  return min_gain(fam, opts, GainKind::Gamma1);
}

// Gain of the X22 subsystem (A22^[2], B2), common P2 across vertices.
inline GainCertificate gamma2(std::span<const ModularDecomposition> ds, const GainOptions& opts = {}) {
  const auto fam = gamma2_family(ds);
  return min_gain(fam, opts, GainKind::Gamma2);
}

// Gain of the coupling subsystem (A11 (+) A22, [G1 G2]), common P12.
inline GainCertificate gamma12(std::span<const ModularDecomposition> ds, const GainOptions& opts = {}) {
  const auto fam = gamma12_family(ds);
  return min_gain(fam, opts, GainKind::Gamma12);
}

// A replica of a two-input system x' = A x + B1 u1 + B2 u2.
struct TwoInputSystem {
  Matrix a;
  Matrix b1;
  Matrix b2;
};

inline std::vector<TwoInputSystem> coupling_family(std::span<const ModularDecomposition> ds) {
  std::vector<TwoInputSystem> out;
  for (const auto& d : ds) {
    const bool seen = std::any_of(out.begin(), out.end(), [&](const TwoInputSystem& o) {
      return o.a == d.ksum && o.b1 == d.g1 && o.b2 == d.g2;
    });
    if (!seen) out.push_back({d.ksum, d.g1, d.g2});
  }
  return out;
}

namespace detail {

inline void add_partitioned_lmi(sdp::LmiProblem& prob, const TwoInputSystem& s, sdp::MatrixVar p,
                                const sdp::ScalarVar* e1, const sdp::ScalarVar* e2, double e1_fixed,
                                double e2_fixed) {
  const Index n = s.a.rows(), m1 = s.b1.cols(), m2 = s.b2.cols();
  auto& c = prob.add_lmi(n + m1 + m2, sdp::Sense::NegSemidef, "partitioned gain");
  c.lyapunov(0, p, s.a).constant(0, 0, Matrix::Identity(n, n));
  if (m1 > 0) c.term(0, n, Matrix::Identity(n, n), p, s.b1);
  if (m2 > 0) c.term(0, n + m1, Matrix::Identity(n, n), p, s.b2);
  if (m1 > 0) {
    if (e1) c.scalar(n, n, *e1, -Matrix::Identity(m1, m1));
    else c.constant(n, n, -e1_fixed * Matrix::Identity(m1, m1));
  }
  if (m2 > 0) {
    if (e2) c.scalar(n + m1, n + m1, *e2, -Matrix::Identity(m2, m2));
    else c.constant(n + m1, n + m1, -e2_fixed * Matrix::Identity(m2, m2));
  }
}

inline double partitioned_residual(std::span<const TwoInputSystem> reps, const Matrix& p, double e1,
                                   double e2) {
  std::vector<LinearSystem> flat;
  for (const auto& s : reps) {
    Matrix b(s.b1.rows(), s.b1.cols() + s.b2.cols());
    b << s.b1, s.b2;
    flat.push_back({s.a, b});
  }
  return bounded_real_residual(flat, p, {e1, e2}, {reps.front().b1.cols(), reps.front().b2.cols()});
}

}  // namespace detail

struct PartitionedFeasibility {
  bool feasible = false;
  sdp::Status status = sdp::Status::Infeasible;
  Matrix P;  // empty when infeasible
};

// Does some P >= eps I certify partitioned gains (eta1^2, eta2^2) = (eta1sq,
// eta2sq) at every replica?
inline PartitionedFeasibility partitioned_gain_feasible(std::span<const TwoInputSystem> systems,
                                                        double eta1sq, double eta2sq,
                                                        const GainOptions& opts = {}) {
  if (eta1sq < 0 || eta2sq < 0 || !(opts.eps > 0)) throw InvalidParameter("need eta^2 >= 0 and eps > 0");
  if (systems.empty()) throw InvalidParameter("need at least one replica");
  const Index n = systems.front().a.rows();
  sdp::LmiProblem prob;
  const auto p = prob.add_symmetric("P", n);
  prob.add_lmi(n, sdp::Sense::PosSemidef, "P >= eps I")
      .term(0, 0, Matrix::Identity(n, n), p, Matrix::Identity(n, n))
      .constant(0, 0, -opts.eps * Matrix::Identity(n, n));
  for (const auto& s : systems) detail::add_partitioned_lmi(prob, s, p, nullptr, nullptr, eta1sq, eta2sq);
  const auto sol = prob.solve(opts.solver);
  if (sol.status == sdp::Status::NumericalFailure) throw NumericalFailure("partitioned gain: " + sol.message);
  PartitionedFeasibility out;
  out.status = sol.status;
  out.feasible = sdp::succeeded(sol.status);
  if (out.feasible) out.P = sol.matrix("P");
  return out;
}

inline PartitionedFeasibility partitioned_gain_feasible(const Matrix& a, const Matrix& b1, const Matrix& b2,
                                                        double eta1sq, double eta2sq,
                                                        const GainOptions& opts = {}) {
  const TwoInputSystem s{a, b1, b2};
  return partitioned_gain_feasible(std::span<const TwoInputSystem>(&s, 1), eta1sq, eta2sq, opts);
}

// Optimum of  min gamma1^2 eta1~ + gamma2^2 eta2~  over P12 >= eps I and the
// partitioned-gain LMI replicas. eta~ are the squared partitioned gains.
struct PartitionedGainResult {
  double eta1sq = 0.0;
  double eta2sq = 0.0;
  double objective = 0.0;  // gamma1^2 eta1sq + gamma2^2 eta2sq
  Matrix P12;
  std::size_t vertex_count = 0;
  sdp::Status status = sdp::Status::Optimal;
  double max_violation = 0.0;
  int newton_steps = 0;
};

inline PartitionedGainResult partitioned_gains_minimize(std::span<const TwoInputSystem> systems,
                                                        double gamma1sq, double gamma2sq,
                                                        const GainOptions& opts = {}) {
  if (systems.empty()) throw InvalidParameter("need at least one replica");
  if (!(opts.eps > 0)) throw InvalidParameter("eps must be positive");
  const Index n = systems.front().a.rows();
  sdp::LmiProblem prob;
  const auto p = prob.add_symmetric("P12", n);
  const auto e1 = prob.add_scalar("eta1sq", 0.0);
  const auto e2 = prob.add_scalar("eta2sq", 0.0);
  prob.add_lmi(n, sdp::Sense::PosSemidef, "P12 >= eps I")
      .term(0, 0, Matrix::Identity(n, n), p, Matrix::Identity(n, n))
      .constant(0, 0, -opts.eps * Matrix::Identity(n, n));
  for (const auto& s : systems) detail::add_partitioned_lmi(prob, s, p, &e1, &e2, 0.0, 0.0);
  // A zero weight would leave eta~ free inside the search box; a tiny weight
  // keeps it at its smallest certified value.
  constexpr double kFloor = 1e-8;
  prob.minimize(e1, std::max(gamma1sq, kFloor));
  prob.minimize(e2, std::max(gamma2sq, kFloor));
  const auto sol = prob.solve(opts.solver);
  if (sol.status == sdp::Status::Infeasible)
    throw Infeasible("no P12 >= eps I satisfies the partitioned-gain replicas");
  if (!sdp::succeeded(sol.status)) throw NumericalFailure("partitioned gains: " + sol.message);

  PartitionedGainResult r;
  r.eta1sq = std::max(0.0, sol.scalar("eta1sq"));
  r.eta2sq = std::max(0.0, sol.scalar("eta2sq"));
  r.objective = gamma1sq * r.eta1sq + gamma2sq * r.eta2sq;
  r.P12 = sol.matrix("P12");
  r.vertex_count = systems.size();
  r.status = sol.status;
  r.newton_steps = sol.newton_steps;
  r.max_violation = std::max(0.0, detail::partitioned_residual(systems, r.P12, r.eta1sq, r.eta2sq));
  return r;
}

inline PartitionedGainResult partitioned_gains_minimize(std::span<const ModularDecomposition> ds,
                                                        double gamma1sq, double gamma2sq,
                                                        const GainOptions& opts = {}) {
  const auto fam = coupling_family(ds);
  return partitioned_gains_minimize(std::span<const TwoInputSystem>(fam), gamma1sq, gamma2sq, opts);
}

}  // namespace twocon

#endif  // TWOCON_GAINS_HPP

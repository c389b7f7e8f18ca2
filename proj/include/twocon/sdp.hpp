#ifndef TWOCON_SDP_HPP
#define TWOCON_SDP_HPP

// A small dense semidefinite-programming layer for linear matrix inequalities
// in symmetric matrix unknowns and scalar unknowns.
//
// Problems are posed in "dual form": every constraint is an affine symmetric
// matrix function G(y) = G0 + sum_i y_i G_i of the flattened unknown vector y
// that must be positive semidefinite (negative-semidefinite constraints are
// negated on entry). They are solved by a two-phase log-barrier path-following
// method:
//
//   phase I   minimize s  s.t.  G_k(y) + s I >= 0,  s >= -1
//   phase II  minimize c^T y  s.t.  G_k(y) > 0   (started from phase I)
//
// A problem whose phase-I optimum s* exceeds the feasibility tolerance is
// reported Infeasible: no point inside the search box satisfies all
// constraints to within that tolerance. Unknowns are confined to the box
// |y_i| <= SolverOptions::box so that every barrier problem is bounded.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "twocon/compound.hpp"
#include "twocon/errors.hpp"

namespace twocon::sdp {

enum class Status { Optimal, Feasible, Infeasible, NumericalFailure };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Feasible: return "feasible";
    case Status::Infeasible: return "infeasible";
    case Status::NumericalFailure: return "numerical_failure";
  }
  return "?";
}

inline bool succeeded(Status s) { return s == Status::Optimal || s == Status::Feasible; }

struct SolverOptions {
  double feasibility_tol = 1e-7;  // phase-I margin / violation tolerance
  double gap_tol = 1e-7;          // relative duality-gap target for phase II
  double box = 1e6;               // bound on every flattened unknown
  double mu = 20.0;               // barrier parameter growth per outer step
  int max_newton = 4000;          // total Newton steps over both phases
  Index max_cone_dim = 200;       // cap on the summed constraint dimension
  int verbosity = 0;
  std::ostream* log = nullptr;
};

enum class Sense { NegSemidef, PosSemidef };

struct MatrixVar {
  std::size_t id = 0;
  Index dim = 0;
};

struct ScalarVar {
  std::size_t id = 0;
};

class LmiProblem;

// Builder for one symmetric block constraint. Terms placed at an
// off-diagonal position (r, c) are mirrored to (c, r) as their transpose.
class LmiConstraint {
 public:
  LmiConstraint(const LmiProblem* owner, Index dim, Sense sense, std::string label)
      : owner_(owner), dim_(dim), sense_(sense), label_(std::move(label)),
        constant_(Matrix::Zero(dim, dim)) {}

  Index dim() const noexcept { return dim_; }
  Sense sense() const noexcept { return sense_; }
  const std::string& label() const noexcept { return label_; }

  // Constant block at (r, c).
  LmiConstraint& constant(Index r, Index c, const Matrix& m);
  // coeff * s * M at (r, c) for a scalar unknown s.
  LmiConstraint& scalar(Index r, Index c, ScalarVar s, const Matrix& m);
  // left * P * right at (r, c) for a symmetric unknown P.
  LmiConstraint& term(Index r, Index c, const Matrix& left, MatrixVar p, const Matrix& right);
  // A^T P + P A on the diagonal block starting at r.
  LmiConstraint& lyapunov(Index r, MatrixVar p, const Matrix& a);

  // Value of the affine expression (in its declared sense) at y.
  Matrix evaluate(const Vector& y) const;

 private:
  friend class LmiProblem;
  void place(Index r, Index c, Matrix& target, const Matrix& m) const;
  Matrix& coefficient(Index flat);

  const LmiProblem* owner_;
  Index dim_;
  Sense sense_;
  std::string label_;
  Matrix constant_;
  std::map<Index, Matrix> coeffs_;
};

class SdpSolution;

class LmiProblem {
 public:
  LmiProblem() = default;
  LmiProblem(const LmiProblem&) = delete;
  LmiProblem& operator=(const LmiProblem&) = delete;

  MatrixVar add_symmetric(std::string name, Index dim) {
    if (dim < 0) throw InvalidProblem("negative dimension for '" + name + "'");
    check_name(name);
    vars_.push_back({std::move(name), dim, true, flat_size_, std::nullopt});
    flat_size_ += dim * (dim + 1) / 2;
    return MatrixVar{vars_.size() - 1, dim};
  }

  ScalarVar add_scalar(std::string name, std::optional<double> lower_bound = std::nullopt) {
    check_name(name);
    vars_.push_back({std::move(name), 1, false, flat_size_, lower_bound});
    flat_size_ += 1;
    return ScalarVar{vars_.size() - 1};
  }

  LmiConstraint& add_lmi(Index dim, Sense sense, std::string label = {}) {
    if (dim < 0) throw InvalidProblem("negative constraint dimension");
    constraints_.emplace_back(this, dim, sense, std::move(label));
    return constraints_.back();
  }

  // Adds coeff * s to the (minimized) objective.
  void minimize(ScalarVar s, double coeff = 1.0) {
    check_scalar(s);
    objective_[vars_[s.id].offset] += coeff;
  }

  bool is_feasibility() const {
    return std::all_of(objective_.begin(), objective_.end(),
                       [](const auto& kv) { return kv.second == 0.0; });
  }

  Index flat_size() const noexcept { return flat_size_; }
  const std::deque<LmiConstraint>& constraints() const noexcept { return constraints_; }

  // Flat index of entry (a, b) of a symmetric unknown.
  Index flat_index(MatrixVar p, Index a, Index b) const {
    check_matrix(p);
    if (a > b) std::swap(a, b);
    if (a < 0 || b >= p.dim) throw InvalidProblem("matrix variable index out of range");
    // Row-wise upper triangle: rows 0..a-1 hold sum_{r<a} (dim - r) entries.
    const Index before = a * p.dim - a * (a - 1) / 2;
    return vars_[p.id].offset + before + (b - a);
  }

  Index flat_index(ScalarVar s) const {
    check_scalar(s);
    return vars_[s.id].offset;
  }

  Matrix matrix_value(MatrixVar p, const Vector& y) const {
    Matrix out(p.dim, p.dim);
    for (Index a = 0; a < p.dim; ++a)
      for (Index b = a; b < p.dim; ++b) out(a, b) = out(b, a) = y(flat_index(p, a, b));
    return out;
  }

  SdpSolution solve(const SolverOptions& opts = {}) const;

 private:
  friend class LmiConstraint;
  friend class SdpSolution;

  struct VarInfo {
    std::string name;
    Index dim;
    bool is_matrix;
    Index offset;
    std::optional<double> lower;
  };

  void check_name(const std::string& name) const {
    for (const auto& v : vars_)
      if (v.name == name) throw InvalidProblem("duplicate variable '" + name + "'");
  }
  void check_matrix(MatrixVar p) const {
    if (p.id >= vars_.size() || !vars_[p.id].is_matrix || vars_[p.id].dim != p.dim)
      throw InvalidProblem("undeclared matrix variable");
  }
  void check_scalar(ScalarVar s) const {
    if (s.id >= vars_.size() || vars_[s.id].is_matrix)
      throw InvalidProblem("undeclared scalar variable");
  }

  std::vector<VarInfo> vars_;
  std::deque<LmiConstraint> constraints_;
  std::map<Index, double> objective_;
  Index flat_size_ = 0;
};

// Result of LmiProblem::solve. Values are re-validated against the original
// constraints when the solution is built.
class SdpSolution {
 public:
  Status status = Status::NumericalFailure;
  std::optional<double> objective_value;
  double max_constraint_violation = std::numeric_limits<double>::infinity();
  double phase_one_margin = std::numeric_limits<double>::quiet_NaN();
  int newton_steps = 0;
  std::string message;
  Vector y;
  std::map<std::string, Matrix> values;

  const Matrix& matrix(const std::string& name) const {
    auto it = values.find(name);
    if (it == values.end()) throw InvalidProblem("no value for '" + name + "'");
    return it->second;
  }
  double scalar(const std::string& name) const { return matrix(name)(0, 0); }
};

// ---------------------------------------------------------------------------

inline void LmiConstraint::place(Index r, Index c, Matrix& target, const Matrix& m) const {
  if (r < 0 || c < 0 || r + m.rows() > dim_ || c + m.cols() > dim_)
    throw InvalidProblem("term does not fit in constraint '" + label_ + "'");
  if (r == c && m.rows() == m.cols()) {
    target.block(r, c, m.rows(), m.cols()) += m;
    return;
  }
  // Off-diagonal placement must not overlap its mirror image.
  const bool overlap = r < c + m.cols() && c < r + m.rows();
  if (overlap) throw InvalidProblem("off-diagonal term overlaps its transpose in '" + label_ + "'");
  target.block(r, c, m.rows(), m.cols()) += m;
  target.block(c, r, m.cols(), m.rows()) += m.transpose();
}

inline Matrix& LmiConstraint::coefficient(Index flat) {
  auto it = coeffs_.find(flat);
  if (it == coeffs_.end()) it = coeffs_.emplace(flat, Matrix::Zero(dim_, dim_)).first;
  return it->second;
}

inline LmiConstraint& LmiConstraint::constant(Index r, Index c, const Matrix& m) {
  place(r, c, constant_, m);
  return *this;
}

inline LmiConstraint& LmiConstraint::scalar(Index r, Index c, ScalarVar s, const Matrix& m) {
  place(r, c, coefficient(owner_->flat_index(s)), m);
  return *this;
}

inline LmiConstraint& LmiConstraint::term(Index r, Index c, const Matrix& left, MatrixVar p,
                                          const Matrix& right) {
  owner_->check_matrix(p);
  if (left.cols() != p.dim || right.rows() != p.dim)
    throw InvalidProblem("term dimensions do not match variable in '" + label_ + "'");
  for (Index a = 0; a < p.dim; ++a) {
    for (Index b = a; b < p.dim; ++b) {
      Matrix basis = left.col(a) * right.row(b);
      if (a != b) basis += left.col(b) * right.row(a);
      if (basis.cwiseAbs().maxCoeff() == 0.0) continue;
      place(r, c, coefficient(owner_->flat_index(p, a, b)), basis);
    }
  }
  return *this;
}

inline LmiConstraint& LmiConstraint::lyapunov(Index r, MatrixVar p, const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() != p.dim)
    throw InvalidProblem("lyapunov term dimension mismatch in '" + label_ + "'");
  const Matrix eye = Matrix::Identity(p.dim, p.dim);
  term(r, r, a.transpose(), p, eye);
  term(r, r, eye, p, a);
  return *this;
}

inline Matrix LmiConstraint::evaluate(const Vector& y) const {
  Matrix g = constant_;
  for (const auto& [flat, m] : coeffs_) g += y(flat) * m;
  return g;
}

namespace detail {

// One PSD block of the barrier problem: G(z) = g0 + sum z_i g_i (+ s I in phase I).
struct Block {
  Matrix g0;
  std::vector<std::pair<Index, Matrix>> terms;
};

// a^T z + b >= 0
struct Linear {
  std::vector<std::pair<Index, double>> a;
  double b = 0.0;
};

struct BarrierProblem {
  Index n = 0;
  std::vector<Block> blocks;
  std::vector<Linear> linear;
  Vector c;

  Index barrier_degree() const {
    Index m = static_cast<Index>(linear.size());
    for (const auto& b : blocks) m += b.g0.rows();
    return m;
  }

  Matrix block_value(const Block& b, const Vector& z) const {
    Matrix g = b.g0;
    for (const auto& [i, m] : b.terms) g += z(i) * m;
    return g;
  }

  // -sum log det G_k - sum log(slack); +inf outside the domain.
  double barrier(const Vector& z) const {
    double phi = 0.0;
    for (const auto& b : blocks) {
      Eigen::LLT<Matrix> llt(block_value(b, z));
      if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
      const auto& l = llt.matrixLLT();
      for (Index i = 0; i < l.rows(); ++i) {
        const double d = l(i, i);
        if (!(d > 0.0)) return std::numeric_limits<double>::infinity();
        phi -= 2.0 * std::log(d);
      }
    }
    for (const auto& lin : linear) {
      double r = lin.b;
      for (const auto& [i, a] : lin.a) r += a * z(i);
      if (!(r > 0.0)) return std::numeric_limits<double>::infinity();
      phi -= std::log(r);
    }
    return phi;
  }

  // Gradient and Hessian of the barrier at z (assumed interior).
  bool derivatives(const Vector& z, Vector& grad, Matrix& hess) const {
    grad.setZero(n);
    hess.setZero(n, n);
    std::vector<Matrix> w;
    for (const auto& b : blocks) {
      Eigen::LLT<Matrix> llt(block_value(b, z));
      if (llt.info() != Eigen::Success) return false;
      const Matrix ginv = llt.solve(Matrix::Identity(b.g0.rows(), b.g0.rows()));
      w.clear();
      w.reserve(b.terms.size());
      for (const auto& [i, m] : b.terms) {
        w.push_back(ginv * m);
        grad(i) -= w.back().trace();
      }
      for (std::size_t p = 0; p < b.terms.size(); ++p) {
        for (std::size_t q = p; q < b.terms.size(); ++q) {
          const double h = w[p].cwiseProduct(w[q].transpose()).sum();
          const Index i = b.terms[p].first, j = b.terms[q].first;
          hess(i, j) += h;
          if (p != q) hess(j, i) += h;
        }
      }
    }
    for (const auto& lin : linear) {
      double r = lin.b;
      for (const auto& [i, a] : lin.a) r += a * z(i);
      if (!(r > 0.0)) return false;
      for (const auto& [i, a] : lin.a) {
        grad(i) -= a / r;
        for (const auto& [j, aj] : lin.a) hess(i, j) += a * aj / (r * r);
      }
    }
    return true;
  }
};

enum class PathResult { Converged, EarlyExit, Stalled, IterationLimit };

struct PathState {
  Vector z;
  int newton_steps = 0;
  double centered_gap = std::numeric_limits<double>::infinity();  // m/t at the last centered point
};

// Newton direction for H dz = -g. Falls back to a clipped eigen-decomposition
// when the (diagonally scaled) Hessian is numerically indefinite.
inline bool newton_direction(const Matrix& hess, const Vector& g, Vector& dz) {
  const Vector scale = hess.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  const Matrix hs = scale.asDiagonal() * hess * scale.asDiagonal();
  const Vector gs = scale.asDiagonal() * g;
  Eigen::LLT<Matrix> llt(hs);
  if (llt.info() == Eigen::Success) {
    dz = -(scale.asDiagonal() * llt.solve(gs));
    if (dz.allFinite() && -g.dot(dz) >= 0.0) return true;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(hs);
  if (es.info() != Eigen::Success) return false;
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  Vector inv = es.eigenvalues();
  for (Index i = 0; i < inv.size(); ++i) inv(i) = inv(i) > 1e-14 * top ? 1.0 / inv(i) : 0.0;
  dz = -(scale.asDiagonal() * (es.eigenvectors() * (inv.asDiagonal() * (es.eigenvectors().transpose() * gs))));
  return dz.allFinite();
}

// Barrier path following from a strictly interior z. `early_exit` is checked
// after every Newton step.
template <class EarlyExit>
PathResult follow_path(const BarrierProblem& bp, PathState& st, double abs_gap_tol,
                       double rel_gap_tol, const SolverOptions& opts, EarlyExit early_exit) {
  const double m = static_cast<double>(bp.barrier_degree());
  double t = 1.0;
  Vector grad(bp.n), dz(bp.n), gfull(bp.n);
  Matrix hess(bp.n, bp.n);
  for (;;) {
    // Centering by damped Newton.
    for (int inner = 0;; ++inner) {
      if (st.newton_steps >= opts.max_newton) return PathResult::IterationLimit;
      if (!bp.derivatives(st.z, grad, hess)) return PathResult::Stalled;
      gfull = t * bp.c + grad;
      if (!newton_direction(hess, gfull, dz)) return PathResult::Stalled;
      const double decrement = -gfull.dot(dz);
      ++st.newton_steps;
      if (!(decrement >= 0.0)) return PathResult::Stalled;
      if (decrement * 0.5 <= 1e-9) break;
      if (inner > 200) {
        if (decrement <= 1e-6) break;
        return PathResult::Stalled;
      }
      // Damped Newton step for a self-concordant barrier: 1/(1+lambda) keeps
      // the iterate interior in exact arithmetic; backtrack on domain only.
      const double lambda = std::sqrt(decrement);
      double alpha = lambda > 0.25 ? 1.0 / (1.0 + lambda) : 1.0;
      while (!std::isfinite(bp.barrier(st.z + alpha * dz))) {
        alpha *= 0.5;
        if (alpha < 1e-16) return PathResult::Stalled;
      }
      st.z += alpha * dz;
      if (opts.verbosity > 1 && opts.log)
        *opts.log << "    t=" << t << " newton=" << st.newton_steps << " dec=" << decrement
                  << " alpha=" << alpha << " obj=" << bp.c.dot(st.z) << "\n";
      if (early_exit(st.z)) return PathResult::EarlyExit;
    }
    if (early_exit(st.z)) return PathResult::EarlyExit;
    st.centered_gap = m / t;
    const double obj = bp.c.dot(st.z);
    if (st.centered_gap <= abs_gap_tol || st.centered_gap <= rel_gap_tol * std::max(1.0, std::abs(obj)))
      return PathResult::Converged;
    t *= opts.mu;
  }
}

// Drops rows/columns that vanish identically in every coefficient.
inline Block compress(const Matrix& g0, const std::map<Index, Matrix>& coeffs) {
  const Index d = g0.rows();
  std::vector<Index> keep;
  for (Index i = 0; i < d; ++i) {
    bool nonzero = g0.row(i).cwiseAbs().maxCoeff() > 0.0;
    for (const auto& [flat, m] : coeffs) {
      if (nonzero) break;
      nonzero = m.row(i).cwiseAbs().maxCoeff() > 0.0;
    }
    if (nonzero) keep.push_back(i);
  }
  const Index k = static_cast<Index>(keep.size());
  auto take = [&](const Matrix& m) {
    Matrix out(k, k);
    for (Index a = 0; a < k; ++a)
      for (Index b = 0; b < k; ++b) out(a, b) = m(keep[a], keep[b]);
    return out;
  };
  Block blk;
  blk.g0 = take(g0);
  for (const auto& [flat, m] : coeffs) {
    Matrix t = take(m);
    if (t.cwiseAbs().maxCoeff() > 0.0) blk.terms.emplace_back(flat, std::move(t));
  }
  return blk;
}

inline double min_eig(const Matrix& m) {
  if (m.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace detail

inline SdpSolution LmiProblem::solve(const SolverOptions& opts) const {
  const Index n = flat_size_;
  std::vector<detail::Block> blocks;
  Index cone_dim = 0;
  for (const auto& con : constraints_) {
    const double sign = con.sense_ == Sense::PosSemidef ? 1.0 : -1.0;
    const double scale = std::max(1.0, con.constant_.cwiseAbs().maxCoeff());
    auto check_sym = [&](const Matrix& m) {
      if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale * std::max(1.0, m.cwiseAbs().maxCoeff()))
        throw InvalidProblem("constraint '" + con.label_ + "' is not symmetric");
    };
    check_sym(con.constant_);
    std::map<Index, Matrix> coeffs;
    for (const auto& [flat, m] : con.coeffs_) {
      check_sym(m);
      coeffs.emplace(flat, sign * 0.5 * (m + m.transpose()));
    }
    detail::Block blk = detail::compress(sign * 0.5 * (con.constant_ + con.constant_.transpose()), coeffs);
    cone_dim += blk.g0.rows();
    if (blk.g0.rows() > 0) blocks.push_back(std::move(blk));
  }
  for (const auto& v : vars_) {
    if (!v.lower) continue;
    detail::Block blk;
    blk.g0 = Matrix::Constant(1, 1, -*v.lower);
    blk.terms.emplace_back(v.offset, Matrix::Constant(1, 1, 1.0));
    blocks.push_back(std::move(blk));
    cone_dim += 1;
  }
  if (cone_dim > opts.max_cone_dim)
    throw InvalidProblem("total cone dimension " + std::to_string(cone_dim) + " exceeds cap " +
                         std::to_string(opts.max_cone_dim));

  SdpSolution sol;
  auto finish = [&](const Vector& y, Status status, std::string msg) {
    sol.y = y;
    sol.status = status;
    sol.message = std::move(msg);
    for (const auto& v : vars_) {
      if (v.is_matrix)
        sol.values[v.name] = matrix_value(MatrixVar{static_cast<std::size_t>(&v - vars_.data()), v.dim}, y);
      else
        sol.values[v.name] = Matrix::Constant(1, 1, y(v.offset));
    }
    double viol = 0.0;
    for (const auto& con : constraints_) {
      const Matrix g = con.evaluate(y);
      const double e = con.sense_ == Sense::PosSemidef ? detail::min_eig(g) : detail::min_eig(-g);
      viol = std::max(viol, -e);
    }
    for (const auto& v : vars_)
      if (v.lower) viol = std::max(viol, *v.lower - y(v.offset));
    sol.max_constraint_violation = viol;
    if (!is_feasibility() && succeeded(status)) {
      double obj = 0.0;
      for (const auto& [i, c] : objective_) obj += c * y(i);
      sol.objective_value = obj;
    }
    if (succeeded(status) && viol > opts.feasibility_tol) {
      sol.status = Status::NumericalFailure;
      sol.message += " (re-validation violation " + std::to_string(viol) + ")";
    }
    return sol;
  };

  // Phase I over z = (y, s).
  detail::BarrierProblem p1;
  p1.n = n + 1;
  p1.c = Vector::Zero(n + 1);
  p1.c(n) = 1.0;
  for (const auto& b : blocks) {
    detail::Block shifted = b;
    shifted.terms.emplace_back(n, Matrix::Identity(b.g0.rows(), b.g0.rows()));
    p1.blocks.push_back(std::move(shifted));
  }
  for (Index i = 0; i < n; ++i) {
    p1.linear.push_back({{{i, 1.0}}, opts.box});
    p1.linear.push_back({{{i, -1.0}}, opts.box});
  }
  p1.linear.push_back({{{n, 1.0}}, 1.0});

  detail::PathState st;
  st.z = Vector::Zero(n + 1);
  double worst = 0.0;
  for (const auto& b : blocks) worst = std::max(worst, -detail::min_eig(b.g0));
  st.z(n) = worst + 1.0;

  if (blocks.empty()) return finish(Vector::Zero(n), is_feasibility() ? Status::Feasible : Status::Optimal, "no constraints");

  const bool feasibility = is_feasibility();
  const double exit_margin = 1e-4;
  auto r1 = detail::follow_path(p1, st, 0.1 * opts.feasibility_tol, 0.0, opts, [&](const Vector& z) {
    return !feasibility && z(n) < -exit_margin;
  });
  sol.newton_steps = st.newton_steps;
  const double s = st.z(n);
  sol.phase_one_margin = s;
  const Vector y1 = st.z.head(n);
  if (opts.verbosity > 0 && opts.log)
    *opts.log << "  phase I: s=" << s << " newton=" << st.newton_steps << "\n";

  if (r1 == detail::PathResult::Stalled || r1 == detail::PathResult::IterationLimit) {
    if (s > opts.feasibility_tol) return finish(y1, Status::NumericalFailure, "phase I stalled");
    // A stalled phase I that already reached the feasible side still yields a usable point.
    if (s >= 0.0 || feasibility) return finish(y1, Status::Feasible, "phase I stalled at feasible point");
  }
  if (s > opts.feasibility_tol) return finish(y1, Status::Infeasible, "phase I margin " + std::to_string(s));
  if (feasibility) return finish(y1, Status::Feasible, "phase I margin " + std::to_string(s));
  if (s >= 0.0) return finish(y1, Status::Feasible, "no strictly feasible point; objective not optimized");

  // Phase II.
  detail::BarrierProblem p2;
  p2.n = n;
  p2.blocks = blocks;
  p2.c = Vector::Zero(n);
  for (const auto& [i, c] : objective_) p2.c(i) = c;
  for (Index i = 0; i < n; ++i) {
    p2.linear.push_back({{{i, 1.0}}, opts.box});
    p2.linear.push_back({{{i, -1.0}}, opts.box});
  }
  detail::PathState st2;
  st2.z = y1;
  st2.newton_steps = st.newton_steps;
  auto r2 = detail::follow_path(p2, st2, 0.0, opts.gap_tol, opts, [](const Vector&) { return false; });
  sol.newton_steps = st2.newton_steps;
  if (opts.verbosity > 0 && opts.log)
    *opts.log << "  phase II: obj=" << p2.c.dot(st2.z) << " newton=" << st2.newton_steps << "\n";
  switch (r2) {
    case detail::PathResult::Converged:
    case detail::PathResult::EarlyExit:
      return finish(st2.z, Status::Optimal, "converged");
    case detail::PathResult::Stalled:
      // Precision limit reached near the optimum: accept when the last
      // centered point already certifies a small duality gap.
      if (st2.centered_gap <= 1e-5 * std::max(1.0, std::abs(p2.c.dot(st2.z))))
        return finish(st2.z, Status::Optimal, "converged to gap " + std::to_string(st2.centered_gap));
      return finish(st2.z, Status::NumericalFailure, "phase II stalled");
    case detail::PathResult::IterationLimit:
      return finish(st2.z, Status::NumericalFailure, "phase II iteration limit");
  }
  return sol;
}

}  // namespace twocon::sdp

#endif  // TWOCON_SDP_HPP

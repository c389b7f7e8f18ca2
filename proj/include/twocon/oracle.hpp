#ifndef TWOCON_ORACLE_HPP
#define TWOCON_ORACLE_HPP

// Brute-force cross-checks, independent of the LMI machinery.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "twocon/compound.hpp"
#include "twocon/errors.hpp"

namespace twocon::oracle {

// Max real part of the spectrum < -1e-9.
inline bool hurwitz(const Matrix& a, double margin = 1e-9) {
  if (a.rows() != a.cols()) throw NonSquare("hurwitz expects a square matrix");
  if (a.rows() == 0) return true;
  Eigen::EigenSolver<Matrix> es(a, false);
  return es.eigenvalues().real().maxCoeff() < -margin;
}

namespace detail {

inline Matrix rk4_matrix_step(const Matrix& a, const Matrix& x, double h) {
  auto f = [&](const Matrix& m) -> Matrix { return a * m + m * a.transpose(); };
  const Matrix k1 = f(x);
  const Matrix k2 = f(x + 0.5 * h * k1);
  const Matrix k3 = f(x + 0.5 * h * k2);
  const Matrix k4 = f(x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline Vector rk4_linear_step(const Matrix& a, const Vector& z, double h) {
  const Vector k1 = a * z;
  const Vector k2 = a * (z + 0.5 * h * k1);
  const Vector k3 = a * (z + 0.5 * h * k2);
  const Vector k4 = a * (z + h * k3);
  return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Rebuilds X from the stacked modular state (vec X11, vec X12, vec X22).
inline Matrix rebuild(const Vector& z, Index n1, Index n2) {
  Matrix x = Matrix::Zero(n1 + n2, n1 + n2);
  Index k = 0;
  for (Index i = 0; i < n1; ++i)
    for (Index j = i + 1; j < n1; ++j, ++k) {
      x(i, j) = z(k);
      x(j, i) = -z(k);
    }
  for (Index i = 0; i < n1; ++i)
    for (Index j = 0; j < n2; ++j, ++k) {
      x(i, n1 + j) = z(k);
      x(n1 + j, i) = -z(k);
    }
  for (Index i = 0; i < n2; ++i)
    for (Index j = i + 1; j < n2; ++j, ++k) {
      x(n1 + i, n1 + j) = z(k);
      x(n1 + j, n1 + i) = -z(k);
    }
  return x;
}

inline Vector flatten(const Matrix& x, Index n1, Index n2) {
  Vector z(choose2(n1 + n2));
  Index k = 0;
  for (Index i = 0; i < n1; ++i)
    for (Index j = i + 1; j < n1; ++j) z(k++) = x(i, j);
  for (Index i = 0; i < n1; ++i)
    for (Index j = 0; j < n2; ++j) z(k++) = x(i, n1 + j);
  for (Index i = 0; i < n2; ++i)
    for (Index j = i + 1; j < n2; ++j) z(k++) = x(n1 + i, n1 + j);
  return z;
}

}  // namespace detail

// Integrates Xdot = A X + X A^T directly and the modular system
// zdot = Acal z, and returns the largest relative deviation between X(t)
// and the matrix rebuilt from z(t) over the time grid.
inline double matrix_ode_check(const PartitionedMatrix& a, const Matrix& x0, double t_end, Index steps = 1000) {
  const Index n = a.dim();
  if (x0.rows() != n || x0.cols() != n) throw DimensionMismatch("X0 must be n x n");
  if ((x0 + x0.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, x0.cwiseAbs().maxCoeff()))
    throw NotSkewSymmetric("X0 must be skew-symmetric");
  const ModularDecomposition d = decompose(a);
  const Matrix acal = d.assemble();
  const Matrix& am = a.entries();
  const double h = t_end / static_cast<double>(steps);
  Matrix x = x0;
  Vector z = detail::flatten(x0, a.n1(), a.n2());
  double worst = 0.0;
  for (Index s = 0; s < steps; ++s) {
    x = detail::rk4_matrix_step(am, x, h);
    z = detail::rk4_linear_step(acal, z, h);
    const double scale = x.cwiseAbs().maxCoeff();
    const double diff = (x - detail::rebuild(z, a.n1(), a.n2())).cwiseAbs().maxCoeff();
    if (diff > 0.0) worst = std::max(worst, diff / std::max(scale, std::numeric_limits<double>::min()));
  }
  return worst;
}

// sup over frequency of the largest singular value of (jw I - A)^{-1} B, the
// gain certified by the bounded-real LMI with unit state weighting. Infinite
// for non-Hurwitz A.
inline double schur_gain(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols()) throw NonSquare("schur_gain expects square A");
  if (b.rows() != a.rows()) throw DimensionMismatch("B must have as many rows as A");
  if (b.size() == 0 || b.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  if (!hurwitz(a)) return std::numeric_limits<double>::infinity();
  using CMatrix = Eigen::MatrixXcd;
  const Index n = a.rows();
  const CMatrix ac = a.cast<std::complex<double>>(), bc = b.cast<std::complex<double>>();
  auto sigma = [&](double w) {
    CMatrix m = std::complex<double>(0.0, w) * CMatrix::Identity(n, n) - ac;
    const CMatrix g = m.fullPivLu().solve(bc);
    Eigen::JacobiSVD<CMatrix> svd(g);
    return svd.singularValues()(0);
  };
  constexpr int grid = 2000;
  const double lw0 = -3.0, lw1 = 3.0;
  double best = sigma(0.0);
  int best_i = -1;
  for (int i = 0; i < grid; ++i) {
    const double w = std::pow(10.0, lw0 + (lw1 - lw0) * i / (grid - 1));
    const double s = sigma(w);
    if (s > best) {
      best = s;
      best_i = i;
    }
  }
  if (best_i < 0) return best;
  // Golden-section refinement on log w between the neighbouring grid points.
  auto lw = [&](int i) { return lw0 + (lw1 - lw0) * std::clamp(i, 0, grid - 1) / (grid - 1); };
  double lo = lw(best_i - 1), hi = lw(best_i + 1);
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - r * (hi - lo), d = lo + r * (hi - lo);
  double fc = sigma(std::pow(10.0, c)), fd = sigma(std::pow(10.0, d));
  for (int it = 0; it < 60; ++it) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - r * (hi - lo);
      fc = sigma(std::pow(10.0, c));
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + r * (hi - lo);
      fd = sigma(std::pow(10.0, d));
    }
  }
  return std::max({best, fc, fd});
}

}  // namespace twocon::oracle

#endif  // TWOCON_ORACLE_HPP

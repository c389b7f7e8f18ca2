#ifndef TWOCON_COMPOUND_HPP
#define TWOCON_COMPOUND_HPP

// Vectorization operators, Kronecker constructions and second additive
// compound matrices, including the modular (two-block) decomposition of the
// compound variational dynamics.
//
// Conventions:
//  * vec() is ROW-major: vec(X)[i*n + j] = X(i, j). With this ordering
//    vec(A X B^T) = (A kron B) vec(X).
//  * The skew vector of an n x n skew-symmetric X lists x_ij, i < j, in
//    lexicographic order (1,2), (1,3), ..., (1,n), (2,3), ..., (n-1,n).
//  * Indices in the public API are 0-based.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "twocon/errors.hpp"

namespace twocon {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// n choose 2, with choose2(0) == choose2(1) == 0.
constexpr Index choose2(Index n) noexcept { return n < 2 ? 0 : n * (n - 1) / 2; }

// A square matrix with a declared two-block partition (n1, n2).
class PartitionedMatrix {
 public:
  PartitionedMatrix() = default;

  PartitionedMatrix(Matrix entries, Index n1, Index n2)
      : entries_(std::move(entries)), n1_(n1), n2_(n2) {
    if (entries_.rows() != entries_.cols()) {
      throw NonSquare("partitioned matrix must be square, got " +
                      std::to_string(entries_.rows()) + "x" +
                      std::to_string(entries_.cols()));
    }
    if (n1_ < 1 || n2_ < 1 || n1_ + n2_ != entries_.rows()) {
      throw InvalidPartition("n1=" + std::to_string(n1_) + ", n2=" +
                             std::to_string(n2_) + " does not tile a " +
                             std::to_string(entries_.rows()) + "x" +
                             std::to_string(entries_.rows()) + " matrix");
    }
  }

  const Matrix& entries() const noexcept { return entries_; }
  Index n1() const noexcept { return n1_; }
  Index n2() const noexcept { return n2_; }
  Index dim() const noexcept { return n1_ + n2_; }

  Matrix a11() const { return entries_.topLeftCorner(n1_, n1_); }
  Matrix a12() const { return entries_.topRightCorner(n1_, n2_); }
  Matrix a21() const { return entries_.bottomLeftCorner(n2_, n1_); }
  Matrix a22() const { return entries_.bottomRightCorner(n2_, n2_); }

  friend bool operator==(const PartitionedMatrix& a, const PartitionedMatrix& b) {
    return a.n1_ == b.n1_ && a.n2_ == b.n2_ && a.entries_ == b.entries_;
  }

 private:
  Matrix entries_;
  Index n1_ = 0;
  Index n2_ = 0;
};

// Position of the pair (i, j), i < j, inside the skew vector.
class SkewIndexMap {
 public:
  explicit SkewIndexMap(Index n) : n_(n) {
    if (n < 1) throw InvalidDimension("skew index map needs n >= 1");
    pairs_.reserve(static_cast<std::size_t>(choose2(n)));
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) pairs_.emplace_back(i, j);
  }

  Index n() const noexcept { return n_; }
  Index size() const noexcept { return choose2(n_); }
  const std::vector<std::pair<Index, Index>>& pairs() const noexcept { return pairs_; }

  // k(i,j) = |i-j| + C(n,2) - C(n+1-min(i,j), 2) in 1-based form; returned
  // 0-based. Symmetric in (i, j).
  Index position(Index i, Index j) const {
    if (i == j || i < 0 || j < 0 || i >= n_ || j >= n_)
      throw InvalidDimension("no skew position for (" + std::to_string(i) + "," +
                             std::to_string(j) + ")");
    const Index lo = std::min(i, j) + 1;
    const Index diff = i > j ? i - j : j - i;
    return diff + choose2(n_) - choose2(n_ + 1 - lo) - 1;
  }

 private:
  Index n_;
  std::vector<std::pair<Index, Index>> pairs_;
};

// Row-major stacking of an m x n matrix.
inline Vector vec_row(const Matrix& x) {
  Vector out(x.size());
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.cols(); ++j) out(i * x.cols() + j) = x(i, j);
  return out;
}

// Inverse of vec_row for an m x n target.
inline Matrix unvec_row(const Vector& v, Index m, Index n) {
  if (v.size() != m * n) throw DimensionMismatch("unvec_row: length mismatch");
  Matrix x(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) x(i, j) = v(i * n + j);
  return x;
}

// Upper-triangle entries of a skew-symmetric matrix in lexicographic pair order.
inline Vector vec_skew(const Matrix& x, double tol = 1e-10) {
  if (x.rows() != x.cols()) throw NonSquare("vec_skew expects a square matrix");
  const double asym = (x + x.transpose()).cwiseAbs().rowwise().sum().maxCoeff();
  if (x.size() > 0 && !(asym <= tol)) {
    throw NotSkewSymmetric("||X + X^T||_inf = " + std::to_string(asym));
  }
  const Index n = x.rows();
  Vector out(choose2(n));
  Index k = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) out(k++) = x(i, j);
  return out;
}

// Skew-symmetric n x n matrix whose skew vector is `v`.
inline Matrix unvec_skew(const Vector& v, Index n) {
  if (v.size() != choose2(n)) throw DimensionMismatch("unvec_skew: length mismatch");
  Matrix x = Matrix::Zero(n, n);
  Index k = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      x(i, j) = v(k);
      x(j, i) = -v(k);
      ++k;
    }
  return x;
}

namespace detail {

// M_n and L_n, also defined for n = 1 (empty skew vector).
inline Matrix skew_to_vec(Index n) {
  const SkewIndexMap map(n);
  Matrix m = Matrix::Zero(n * n, map.size());
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      m(i * n + j, map.position(i, j)) = (j > i) ? 1.0 : -1.0;
    }
  return m;
}

inline Matrix vec_to_skew(Index n) {
  const SkewIndexMap map(n);
  Matrix l = Matrix::Zero(map.size(), n * n);
  for (const auto& [i, j] : map.pairs()) l(map.position(i, j), i * n + j) = 1.0;
  return l;
}

}  // namespace detail

// M_n: vec_row(X) = M_n * vec_skew(X) for skew-symmetric X.
inline Matrix build_M(Index n) {
  if (n < 2) throw InvalidDimension("build_M needs n >= 2, got " + std::to_string(n));
  return detail::skew_to_vec(n);
}

// L_n: vec_skew(X) = L_n * vec_row(X) for skew-symmetric X.
inline Matrix build_L(Index n) {
  if (n < 2) throw InvalidDimension("build_L needs n >= 2, got " + std::to_string(n));
  return detail::vec_to_skew(n);
}

// H_{n1,n2}: vec_row(X^T) = H * vec_row(X) for X of size n1 x n2.
inline Matrix build_H(Index n1, Index n2) {
  if (n1 < 1 || n2 < 1) throw InvalidDimension("build_H needs positive dimensions");
  Matrix h = Matrix::Zero(n1 * n2, n1 * n2);
  for (Index i = 0; i < n1; ++i)
    for (Index j = 0; j < n2; ++j) h(j * n1 + i, i * n2 + j) = 1.0;
  return h;
}

// Kronecker product.
inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Kronecker sum A (+) B = A kron I_q + I_p kron B, so that
// vec_row(A X + X B^T) = (A (+) B) vec_row(X).
inline Matrix kron_sum(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols())
    throw NonSquare("kron_sum expects square operands");
  return kron(a, Matrix::Identity(b.rows(), b.rows())) +
         kron(Matrix::Identity(a.rows(), a.rows()), b);
}

namespace detail {

inline Matrix compound2(const Matrix& a) {
  const Index n = a.rows();
  if (n < 2) return Matrix(0, 0);
  return vec_to_skew(n) * kron_sum(a, a) * skew_to_vec(n);
}

}  // namespace detail

// Second additive compound A^[2] = L_n (A (+) A) M_n.
inline Matrix second_additive_compound(const Matrix& a) {
  if (a.rows() != a.cols()) throw NonSquare("second_additive_compound expects a square matrix");
  if (a.rows() < 2) throw InvalidDimension("second_additive_compound needs n >= 2");
  return detail::compound2(a);
}

// The coupled linear system governing (X11 skew, vec X12, X22 skew):
//
//   d/dt X11 = A11^[2] X11 + B1 vec X12
//   d/dt X12 = (A11 (+) A22) vec X12 + G1 X11 + G2 X22
//   d/dt X22 = A22^[2] X22 + B2 vec X12
//
// Blocks tied to a 1-dimensional subsystem have zero rows/columns.
struct ModularDecomposition {
  Index n1 = 0;
  Index n2 = 0;
  Matrix a11c2;  // C(n1,2) x C(n1,2)
  Matrix a22c2;  // C(n2,2) x C(n2,2)
  Matrix ksum;   // n1*n2 x n1*n2
  Matrix b1;     // C(n1,2) x n1*n2
  Matrix b2;     // C(n2,2) x n1*n2
  Matrix g1;     // n1*n2 x C(n1,2)
  Matrix g2;     // n1*n2 x C(n2,2)
  // perm[s] = position in the lexicographic skew vector of A^[2] for the
  // s-th entry of the stacked state (X11, vec X12, X22).
  std::vector<Index> perm;

  Index size1() const noexcept { return choose2(n1); }
  Index size12() const noexcept { return n1 * n2; }
  Index size2() const noexcept { return choose2(n2); }
  Index total() const noexcept { return choose2(n1 + n2); }

  // Block matrix [[A11^[2], B1, 0], [G1, A11 (+) A22, G2], [0, B2, A22^[2]]].
  Matrix assemble() const {
    const Index s1 = size1(), s12 = size12(), s2 = size2();
    Matrix out = Matrix::Zero(total(), total());
    out.block(0, 0, s1, s1) = a11c2;
    out.block(0, s1, s1, s12) = b1;
    out.block(s1, 0, s12, s1) = g1;
    out.block(s1, s1, s12, s12) = ksum;
    out.block(s1, s1 + s12, s12, s2) = g2;
    out.block(s1 + s12, s1, s2, s12) = b2;
    out.block(s1 + s12, s1 + s12, s2, s2) = a22c2;
    return out;
  }
};

namespace detail {

inline std::vector<Index> stacked_to_lex(Index n1, Index n2) {
  const SkewIndexMap map(n1 + n2);
  std::vector<Index> perm;
  perm.reserve(static_cast<std::size_t>(map.size()));
  for (Index i = 0; i < n1; ++i)
    for (Index j = i + 1; j < n1; ++j) perm.push_back(map.position(i, j));
  for (Index i = 0; i < n1; ++i)
    for (Index j = 0; j < n2; ++j) perm.push_back(map.position(i, n1 + j));
  for (Index i = 0; i < n2; ++i)
    for (Index j = i + 1; j < n2; ++j) perm.push_back(map.position(n1 + i, n1 + j));
  return perm;
}

}  // namespace detail

// Split the compound dynamics of a partitioned matrix into its modular blocks.
inline ModularDecomposition decompose(const PartitionedMatrix& a) {
  const Index n1 = a.n1(), n2 = a.n2();
  if (n1 < 1 || n2 < 1 || n1 + n2 < 3)
    throw InvalidPartition("decompose needs n1, n2 >= 1 and n1 + n2 >= 3");
  const Matrix a11 = a.a11(), a12 = a.a12(), a21 = a.a21(), a22 = a.a22();
  const Matrix i1 = Matrix::Identity(n1, n1), i2 = Matrix::Identity(n2, n2);
  const Matrix l1 = detail::vec_to_skew(n1), l2 = detail::vec_to_skew(n2);
  const Matrix m1 = detail::skew_to_vec(n1), m2 = detail::skew_to_vec(n2);

  ModularDecomposition d;
  d.n1 = n1;
  d.n2 = n2;
  d.a11c2 = detail::compound2(a11);
  d.a22c2 = detail::compound2(a22);
  d.ksum = kron_sum(a11, a22);
  // X12 A12^T - A12 X12^T, with vec(X12^T) = H_{n1,n2} vec(X12).
  d.b1 = l1 * kron(i1, a12) - l1 * kron(a12, i1) * build_H(n1, n2);
  // A21 X12 - X12^T A21^T.
  d.b2 = l2 * kron(a21, i2) - l2 * kron(i2, a21) * build_H(n1, n2);
  d.g1 = kron(i1, a21) * m1;
  d.g2 = kron(a12, i2) * m2;
  d.perm = detail::stacked_to_lex(n1, n2);
  return d;
}

// Permutation matrix S with S^T A^[2] S equal to the assembled block matrix.
// S maps the stacked ordering (X11, vec X12, X22) to the skew-vector ordering.
inline Matrix permutation_to_compound(const ModularDecomposition& d) {
  const Index m = d.total();
  Matrix s = Matrix::Zero(m, m);
  for (Index k = 0; k < m; ++k) s(d.perm[static_cast<std::size_t>(k)], k) = 1.0;
  return s;
}

}  // namespace twocon

#endif  // TWOCON_COMPOUND_HPP

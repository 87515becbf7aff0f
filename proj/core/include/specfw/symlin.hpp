#pragma once

// Dense symmetric linear algebra used by the spectrahedron solvers:
// eigensolvers, pseudo-inverse maintenance, least squares in the image of a
// PSD matrix and the Euclidean projection onto the probability simplex.
//
// Storage is Eigen's dense column-major matrix; every factorization and
// update below is implemented here.

#include <functional>
#include <optional>

#include <Eigen/Core>

#include "specfw/random.hpp"

namespace specfw {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Symmetric n x n matrix.  Entry (i, j) and (j, i) are bitwise equal: the
/// constructor symmetrizes its argument and every mutating member restores
/// exact symmetry.
class SymMat {
 public:
  SymMat() = default;
  explicit SymMat(Index n);
  explicit SymMat(const Mat& m);
  explicit SymMat(Mat&& m);

  static SymMat zero(Index n) { return SymMat(n); }
  static SymMat identity(Index n);
  static SymMat diagonal(const Vec& d);
  /// w * v v^T
  static SymMat outer(const Vec& v, double w = 1.0);

  Index dim() const noexcept { return m_.rows(); }
  const Mat& mat() const noexcept { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }

  double trace() const { return m_.trace(); }
  double frobenius() const { return m_.norm(); }
  /// <A, B> = Tr(A B)
  double dot(const SymMat& other) const;
  double quad(const Vec& v) const { return v.dot(m_ * v); }

  SymMat& add_outer(const Vec& v, double w);
  SymMat& operator+=(const SymMat& o);
  SymMat& operator-=(const SymMat& o);
  SymMat& operator*=(double a);

  friend SymMat operator+(SymMat a, const SymMat& b) { return a += b; }
  friend SymMat operator-(SymMat a, const SymMat& b) { return a -= b; }
  friend SymMat operator*(SymMat a, double s) { return a *= s; }
  friend SymMat operator*(double s, SymMat a) { return a *= s; }
  friend SymMat operator/(SymMat a, double s) { return a *= 1.0 / s; }
  friend Vec operator*(const SymMat& a, const Vec& v) { return a.m_ * v; }

 private:
  void mirror_lower();
  Mat m_;
};

struct EigPair {
  double value = 0.0;
  Vec vector;
  /// ||A v - value v||_2
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Implicit symmetric operator y = A x.
class LinOp {
 public:
  using Apply = std::function<void(const Vec& x, Vec& y)>;

  LinOp(Index n, Apply apply) : n_(n), apply_(std::move(apply)) {}

  /// Wraps a matrix by reference; `a` must outlive the operator.
  static LinOp dense(const SymMat& a);

  Index dim() const noexcept { return n_; }
  void apply(const Vec& x, Vec& y) const { apply_(x, y); }
  Vec operator()(const Vec& x) const {
    Vec y(n_);
    apply_(x, y);
    return y;
  }

 private:
  Index n_;
  Apply apply_;
};

struct EigenOptions {
  double tol = 1e-10;
  /// Lanczos steps; 0 means 10 * n.
  int max_iters = 0;
};

/// Algebraically largest eigenpair by Lanczos with full reorthogonalization.
/// Converged when ||A v - value v|| <= tol * max(1, |value|).  When the step
/// budget runs out the best Ritz pair is returned with converged = false.
EigPair leading_eigenpair(const LinOp& op, Rng& rng, const EigenOptions& opts = {});
/// Same, starting the Krylov sequence from `start` (need not be normalized).
EigPair leading_eigenpair(const LinOp& op, const Vec& start, Rng& rng,
                          const EigenOptions& opts = {});

struct SymEigen {
  Vec values;   // descending
  Mat vectors;  // orthonormal columns, vectors.col(i) pairs with values(i)
};

/// Householder tridiagonalization followed by implicit QL.  Throws
/// NonConvergence if a QL sweep stalls.
SymEigen full_eigendecomposition(const SymMat& a);

/// Eigen-decomposition of the symmetric tridiagonal matrix with diagonal
/// `diag` and off-diagonal `offdiag` (size diag.size() - 1).
SymEigen tridiagonal_eigendecomposition(const Vec& diag, const Vec& offdiag);

/// Pseudo-inverse from the eigen-decomposition with eigenvalues below
/// rel_cutoff * max|lambda| treated as zero.
SymMat pinv_via_eigen(const SymMat& a, double rel_cutoff = 1e-11);

/// Case split of the rank-one pseudo-inverse update B = A + s c c^T.
enum class RankOneCase {
  OutsideImage,  // c not in Im(A)
  InsideImage,   // c in Im(A), 1 + s c^T A^+ c != 0
  Singular,      // c in Im(A), 1 + s c^T A^+ c == 0
};

struct PinvUpdateOptions {
  double membership_tol = 1e-8;
  /// |zeta| <= zeta_tol * (1 + |s c^T A^+ c|) selects the singular case.
  double zeta_tol = 1e-10;
  /// Skip classification and use this branch.
  std::optional<RankOneCase> force;
  /// Orthogonal projector onto Im(A).  When set, the outside case takes
  /// u = c - Pi c instead of c - A A^+ c, which carries A^+'s error.
  const SymMat* proj = nullptr;
};

RankOneCase classify_rank_one_update(const SymMat& a_pinv, const SymMat& a, const Vec& c,
                                     double s, const PinvUpdateOptions& opts = {});

/// (A + s c c^T)^+ from A^+ in O(n^2).  s == 0 returns a_pinv.
SymMat pinv_rank_one_update(const SymMat& a_pinv, const SymMat& a, const Vec& c, double s,
                            const PinvUpdateOptions& opts = {});

/// (a A)^+ = A^+ / a.  Throws ZeroScale for a == 0.
SymMat pinv_scale(const SymMat& a_pinv, double a);

/// ||(I - A A^+) c|| <= tol * max(1, ||c||)
bool image_membership(const SymMat& a, const SymMat& a_pinv, const Vec& c, double tol = 1e-8);

struct LeastSquaresResult {
  Vec y;
  /// ||A (A y - v)||, the normal-equation residual.
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// min_y ||A y - v|| for PSD A by CGLS started at 0, so y stays in Im(A) and
/// equals A^+ v at convergence when v is in Im(A).
LeastSquaresResult least_squares_in_image(const SymMat& a, const Vec& v, double tol = 1e-12,
                                          int max_iters = 0);

/// Euclidean projection onto {x >= 0, sum x = 1}.
Vec project_to_simplex(const Vec& w);

}  // namespace specfw

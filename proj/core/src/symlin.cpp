#include "specfw/symlin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "specfw/error.hpp"

namespace specfw {

// ---------------------------------------------------------------------------
// SymMat

SymMat::SymMat(Index n) : m_(Mat::Zero(n, n)) {
  if (n < 1) throw Error(ErrorCode::InvalidShape, "SymMat dimension must be positive");
}

SymMat::SymMat(const Mat& m) : SymMat(Mat(m)) {}

SymMat::SymMat(Mat&& m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() < 1)
    throw Error(ErrorCode::DimensionMismatch, "SymMat requires a non-empty square matrix");
  const Index n = m_.rows();
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) {
      const double v = 0.5 * (m_(i, j) + m_(j, i));
      m_(i, j) = v;
      m_(j, i) = v;
    }
}

SymMat SymMat::identity(Index n) { return SymMat(Mat(Mat::Identity(n, n))); }

SymMat SymMat::diagonal(const Vec& d) { return SymMat(Mat(d.asDiagonal())); }

SymMat SymMat::outer(const Vec& v, double w) {
  SymMat out(v.size());
  return out.add_outer(v, w);
}

double SymMat::dot(const SymMat& other) const {
  if (other.dim() != dim()) throw Error(ErrorCode::DimensionMismatch, "SymMat::dot");
  return m_.cwiseProduct(other.m_).sum();
}

void SymMat::mirror_lower() {
  const Index n = m_.rows();
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) m_(j, i) = m_(i, j);
}

SymMat& SymMat::add_outer(const Vec& v, double w) {
  if (v.size() != dim()) throw Error(ErrorCode::DimensionMismatch, "SymMat::add_outer");
  const Index n = m_.rows();
  for (Index j = 0; j < n; ++j) {
    const double wj = w * v(j);
    for (Index i = j; i < n; ++i) m_(i, j) += wj * v(i);
  }
  mirror_lower();
  return *this;
}

SymMat& SymMat::operator+=(const SymMat& o) {
  if (o.dim() != dim()) throw Error(ErrorCode::DimensionMismatch, "SymMat::operator+=");
  m_ += o.m_;
  return *this;
}

SymMat& SymMat::operator-=(const SymMat& o) {
  if (o.dim() != dim()) throw Error(ErrorCode::DimensionMismatch, "SymMat::operator-=");
  m_ -= o.m_;
  return *this;
}

SymMat& SymMat::operator*=(double a) {
  m_ *= a;
  return *this;
}

LinOp LinOp::dense(const SymMat& a) {
  const SymMat* p = &a;
  return LinOp(a.dim(), [p](const Vec& x, Vec& y) { y.noalias() = p->mat() * x; });
}

// ---------------------------------------------------------------------------
// Householder tridiagonalization + implicit QL (EISPACK tred2 / tql2).

namespace {

constexpr int kMaxQlSweeps = 60;

// Reduces the symmetric matrix held in v to tridiagonal form.  On return v
// holds the accumulated orthogonal transform, d the diagonal and e(1..n-1)
// the sub-diagonal (e(0) = 0).
void householder_tridiagonalize(Mat& v, Vec& d, Vec& e) {
  const Index n = v.rows();
  d.resize(n);
  e.resize(n);
  for (Index j = 0; j < n; ++j) d(j) = v(n - 1, j);

  for (Index i = n - 1; i > 0; --i) {
    double scale = 0.0;
    double h = 0.0;
    for (Index k = 0; k < i; ++k) scale += std::abs(d(k));
    if (scale == 0.0) {
      e(i) = d(i - 1);
      for (Index j = 0; j < i; ++j) {
        d(j) = v(i - 1, j);
        v(i, j) = 0.0;
        v(j, i) = 0.0;
      }
    } else {
      for (Index k = 0; k < i; ++k) {
        d(k) /= scale;
        h += d(k) * d(k);
      }
      double f = d(i - 1);
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e(i) = scale * g;
      h -= f * g;
      d(i - 1) = f - g;
      for (Index j = 0; j < i; ++j) e(j) = 0.0;

      for (Index j = 0; j < i; ++j) {
        f = d(j);
        v(j, i) = f;
        g = e(j) + v(j, j) * f;
        for (Index k = j + 1; k <= i - 1; ++k) {
          g += v(k, j) * d(k);
          e(k) += v(k, j) * f;
        }
        e(j) = g;
      }
      f = 0.0;
      for (Index j = 0; j < i; ++j) {
        e(j) /= h;
        f += e(j) * d(j);
      }
      const double hh = f / (h + h);
      for (Index j = 0; j < i; ++j) e(j) -= hh * d(j);
      for (Index j = 0; j < i; ++j) {
        f = d(j);
        g = e(j);
        for (Index k = j; k <= i - 1; ++k) v(k, j) -= (f * e(k) + g * d(k));
        d(j) = v(i - 1, j);
        v(i, j) = 0.0;
      }
    }
    d(i) = h;
  }

  for (Index i = 0; i < n - 1; ++i) {
    v(n - 1, i) = v(i, i);
    v(i, i) = 1.0;
    const double h = d(i + 1);
    if (h != 0.0) {
      for (Index k = 0; k <= i; ++k) d(k) = v(k, i + 1) / h;
      for (Index j = 0; j <= i; ++j) {
        double g = 0.0;
        for (Index k = 0; k <= i; ++k) g += v(k, i + 1) * v(k, j);
        for (Index k = 0; k <= i; ++k) v(k, j) -= g * d(k);
      }
    }
    for (Index k = 0; k <= i; ++k) v(k, i + 1) = 0.0;
  }
  for (Index j = 0; j < n; ++j) {
    d(j) = v(n - 1, j);
    v(n - 1, j) = 0.0;
  }
  v(n - 1, n - 1) = 1.0;
  e(0) = 0.0;
}

// Implicit QL on the tridiagonal (d, e) with e(i) coupling rows i-1 and i.
// Rotations are accumulated into v.
void tridiagonal_ql(Vec& d, Vec& e, Mat& v) {
  const Index n = d.size();
  for (Index i = 1; i < n; ++i) e(i - 1) = e(i);
  e(n - 1) = 0.0;

  double f = 0.0;
  double tst1 = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  for (Index l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d(l)) + std::abs(e(l)));
    Index m = l;
    while (m < n - 1 && std::abs(e(m)) > eps * tst1) ++m;

    if (m > l) {
      int sweeps = 0;
      do {
        if (++sweeps > kMaxQlSweeps)
          throw Error(ErrorCode::NonConvergence, "implicit QL did not converge");
        double g = d(l);
        double p = (d(l + 1) - g) / (2.0 * e(l));
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d(l) = e(l) / (p + r);
        d(l + 1) = e(l) * (p + r);
        const double dl1 = d(l + 1);
        double h = g - d(l);
        for (Index i = l + 2; i < n; ++i) d(i) -= h;
        f += h;

        p = d(m);
        double c = 1.0, c2 = 1.0, c3 = 1.0;
        const double el1 = e(l + 1);
        double s = 0.0, s2 = 0.0;
        for (Index i = m - 1; i >= l; --i) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e(i);
          h = c * p;
          r = std::hypot(p, e(i));
          e(i + 1) = s * r;
          s = e(i) / r;
          c = p / r;
          p = c * d(i) - s * g;
          d(i + 1) = h + s * (c * g + s * d(i));
          for (Index k = 0; k < v.rows(); ++k) {
            h = v(k, i + 1);
            v(k, i + 1) = s * v(k, i) + c * h;
            v(k, i) = c * v(k, i) - s * h;
          }
        }
        p = -s * s2 * c3 * el1 * e(l) / dl1;
        e(l) = s * p;
        d(l) = c * p;
      } while (std::abs(e(l)) > eps * tst1);
    }
    d(l) += f;
    e(l) = 0.0;
  }
}

SymEigen sorted_descending(const Vec& d, const Mat& v) {
  const Index n = d.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return d(a) > d(b); });
  SymEigen out{Vec(n), Mat(v.rows(), n)};
  for (Index i = 0; i < n; ++i) {
    out.values(i) = d(order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace

SymEigen full_eigendecomposition(const SymMat& a) {
  Mat v = a.mat();
  Vec d, e;
  householder_tridiagonalize(v, d, e);
  tridiagonal_ql(d, e, v);
  return sorted_descending(d, v);
}

SymEigen tridiagonal_eigendecomposition(const Vec& diag, const Vec& offdiag) {
  const Index k = diag.size();
  if (k < 1 || offdiag.size() != k - 1)
    throw Error(ErrorCode::DimensionMismatch, "tridiagonal_eigendecomposition");
  Vec d = diag;
  Vec e(k);
  e(0) = 0.0;
  for (Index i = 1; i < k; ++i) e(i) = offdiag(i - 1);
  Mat v = Mat::Identity(k, k);
  tridiagonal_ql(d, e, v);
  return sorted_descending(d, v);
}

SymMat pinv_via_eigen(const SymMat& a, double rel_cutoff) {
  const SymEigen eig = full_eigendecomposition(a);
  const double top = eig.values.cwiseAbs().maxCoeff();
  SymMat out(a.dim());
  if (top == 0.0) return out;
  for (Index i = 0; i < eig.values.size(); ++i)
    if (std::abs(eig.values(i)) > rel_cutoff * top)
      out.add_outer(eig.vectors.col(i), 1.0 / eig.values(i));
  return out;
}

// ---------------------------------------------------------------------------
// Lanczos

namespace {

struct Ritz {
  double value;
  Vec coeffs;  // in the Lanczos basis
};

Ritz top_ritz(const std::vector<double>& alpha, const std::vector<double>& beta) {
  const Index k = static_cast<Index>(alpha.size());
  Vec diag = Eigen::Map<const Vec>(alpha.data(), k);
  Vec off = Eigen::Map<const Vec>(beta.data(), k - 1);
  const SymEigen t = tridiagonal_eigendecomposition(diag, off);
  return {t.values(0), t.vectors.col(0)};
}

// Orthogonalizes w against the first k columns of q, twice.
void reorthogonalize(const Mat& q, Index k, Vec& w) {
  if (k == 0) return;
  for (int pass = 0; pass < 2; ++pass) {
    const Vec coeff = q.leftCols(k).transpose() * w;
    w.noalias() -= q.leftCols(k) * coeff;
  }
}

bool check_due(Index k) { return k < 8 || k % 4 == 0; }

}  // namespace

EigPair leading_eigenpair(const LinOp& op, Rng& rng, const EigenOptions& opts) {
  return leading_eigenpair(op, gaussian_vector(op.dim(), rng), rng, opts);
}

EigPair leading_eigenpair(const LinOp& op, const Vec& start, Rng& rng,
                          const EigenOptions& opts) {
  const Index n = op.dim();
  if (start.size() != n) throw Error(ErrorCode::DimensionMismatch, "leading_eigenpair start");
  if (!(opts.tol > 0.0)) throw Error(ErrorCode::InvalidConfig, "eigensolver tol must be > 0");
  const int max_steps = opts.max_iters > 0 ? opts.max_iters : static_cast<int>(10 * n);

  Mat q(n, n);
  std::vector<double> alpha;
  std::vector<double> beta;
  alpha.reserve(static_cast<std::size_t>(n));
  beta.reserve(static_cast<std::size_t>(n));

  Vec cur = start;
  double nrm = cur.norm();
  while (!(nrm > 0.0) || !std::isfinite(nrm)) {
    cur = gaussian_vector(n, rng);
    nrm = cur.norm();
  }
  cur /= nrm;

  EigPair best;
  best.residual = std::numeric_limits<double>::infinity();
  Vec w(n), av(n);
  double anorm = 0.0;

  auto finish = [&](const Ritz& ritz, Index k, int steps) {
    EigPair p;
    p.vector = q.leftCols(k) * ritz.coeffs;
    p.vector.normalize();
    op.apply(p.vector, av);
    p.value = p.vector.dot(av);
    p.residual = (av - p.value * p.vector).norm();
    p.iterations = steps;
    p.converged = p.residual <= opts.tol * std::max(1.0, std::abs(p.value));
    return p;
  };

  int steps = 0;
  for (Index k = 0;; ++k) {
    q.col(k) = cur;
    op.apply(cur, w);
    ++steps;
    const double a = cur.dot(w);
    alpha.push_back(a);
    w -= a * cur;
    if (k > 0) w -= beta.back() * q.col(k - 1);
    reorthogonalize(q, k + 1, w);
    const double b = w.norm();
    anorm = std::max({anorm, std::abs(a), b});

    const bool basis_full = (k + 1 == n);
    const bool breakdown = b <= 1e-13 * std::max(anorm, 1e-300);
    const bool out_of_budget = steps >= max_steps;

    if (basis_full || breakdown || out_of_budget || check_due(k + 1)) {
      const Ritz ritz = top_ritz(alpha, beta);
      const double estimate = b * std::abs(ritz.coeffs(k));
      const double target = opts.tol * std::max(1.0, std::abs(ritz.value));
      if (estimate <= target || basis_full || breakdown || out_of_budget) {
        EigPair p = finish(ritz, k + 1, steps);
        if (p.residual < best.residual) best = p;
        if (p.converged || basis_full || out_of_budget) return best;
      }
    }

    if (breakdown) {
      // Krylov space is invariant but the Ritz pair is not accurate enough:
      // continue from a fresh direction orthogonal to the basis.
      Vec fresh = gaussian_vector(n, rng);
      reorthogonalize(q, k + 1, fresh);
      const double fn = fresh.norm();
      if (!(fn > 0.0)) return best;
      beta.push_back(0.0);
      cur = fresh / fn;
    } else {
      beta.push_back(b);
      cur = w / b;
    }
  }
}

// ---------------------------------------------------------------------------
// Pseudo-inverse updates

namespace {

// Pseudo-inverse of a nonzero vector viewed as an n x 1 (or 1 x n) matrix:
// x^+ = x^T / ||x||^2.
Vec vector_pinv(const Vec& x) { return x / x.squaredNorm(); }

Mat outer(const Vec& a, const Vec& b) { return a * b.transpose(); }

}  // namespace

RankOneCase classify_rank_one_update(const SymMat& a_pinv, const SymMat& a, const Vec& c,
                                     double s, const PinvUpdateOptions& opts) {
  if (opts.force) return *opts.force;
  if (!image_membership(a, a_pinv, c, opts.membership_tol)) return RankOneCase::OutsideImage;
  const double sck = s * c.dot(a_pinv * c);
  const double zeta = 1.0 + sck;
  if (std::abs(zeta) <= opts.zeta_tol * (1.0 + std::abs(sck))) return RankOneCase::Singular;
  return RankOneCase::InsideImage;
}

SymMat pinv_rank_one_update(const SymMat& a_pinv, const SymMat& a, const Vec& c, double s,
                            const PinvUpdateOptions& opts) {
  const Index n = a.dim();
  if (a_pinv.dim() != n || c.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "pinv_rank_one_update");
  if (s == 0.0) return a_pinv;

  // B = A + c d^T with d = s c.  Row vectors of the general update are kept
  // as column Vecs holding their transpose.
  const Vec d = s * c;
  const Vec k = a_pinv * c;                 // A^+ c
  const Vec h = a_pinv * d;                 // (d^T A^+)^T
  const Vec u = opts.proj ? Vec(c - *opts.proj * c) : Vec(c - a * k);  // (I - A A^+) c
  const Vec v = d - a * h;                  // ((d^T (I - A^+ A))^T
  const double zeta = 1.0 + d.dot(k);

  const RankOneCase which = classify_rank_one_update(a_pinv, a, c, s, opts);
  Mat b = a_pinv.mat();
  switch (which) {
    case RankOneCase::OutsideImage: {
      // A^+ - k u^+ - v^+ h + zeta v^+ u^+
      const Vec up = vector_pinv(u);
      const Vec vp = vector_pinv(v);
      b -= outer(k, up);
      b -= outer(vp, h);
      b += zeta * outer(vp, up);
      break;
    }
    case RankOneCase::InsideImage: {
      // A^+ - k h^T / zeta.  For c in Im(A) the general form's v is rounding
      // noise, and its terms scale that noise by ||A^+||^2.
      b -= (1.0 / zeta) * outer(k, h);
      break;
    }
    case RankOneCase::Singular: {
      // A^+ - k k^+ A^+ - A^+ h^+ h + (k^+ A^+ h^+) k h
      const Vec kp = vector_pinv(k);
      const Vec hp = vector_pinv(h);
      const Vec apk = a_pinv * kp;   // (k^+ A^+)^T
      const Vec aph = a_pinv * hp;   // A^+ h^+
      b -= outer(k, apk);
      b -= outer(aph, h);
      b += kp.dot(aph) * outer(k, h);
      break;
    }
  }
  return SymMat(std::move(b));
}

SymMat pinv_scale(const SymMat& a_pinv, double a) {
  if (a == 0.0) throw Error(ErrorCode::ZeroScale, "pinv_scale requires a != 0");
  return a_pinv * (1.0 / a);
}

bool image_membership(const SymMat& a, const SymMat& a_pinv, const Vec& c, double tol) {
  if (a.dim() != c.size() || a_pinv.dim() != c.size())
    throw Error(ErrorCode::DimensionMismatch, "image_membership");
  const Vec r = c - a * (a_pinv * c);
  return r.norm() <= tol * std::max(1.0, c.norm());
}

// ---------------------------------------------------------------------------

LeastSquaresResult least_squares_in_image(const SymMat& a, const Vec& v, double tol,
                                          int max_iters) {
  const Index n = a.dim();
  if (v.size() != n) throw Error(ErrorCode::DimensionMismatch, "least_squares_in_image");
  const int budget = max_iters > 0 ? max_iters : static_cast<int>(4 * n + 10);

  // CGLS on min ||A y - v|| (A symmetric, so A^T = A).
  LeastSquaresResult out;
  out.y = Vec::Zero(n);
  Vec r = v;              // v - A y
  Vec s = a * r;          // A^T r
  Vec p = s;
  double gamma = s.squaredNorm();
  const double target = tol * std::max(1.0, std::sqrt(gamma));
  out.residual = std::sqrt(gamma);
  out.converged = out.residual <= target;
  Vec q(n);
  for (int it = 0; it < budget && !out.converged; ++it) {
    q.noalias() = a.mat() * p;
    const double qq = q.squaredNorm();
    if (!(qq > 0.0)) break;
    const double alpha = gamma / qq;
    out.y += alpha * p;
    r -= alpha * q;
    s.noalias() = a.mat() * r;
    const double gamma_new = s.squaredNorm();
    out.iterations = it + 1;
    out.residual = std::sqrt(gamma_new);
    out.converged = out.residual <= target;
    p = s + (gamma_new / gamma) * p;
    gamma = gamma_new;
  }
  return out;
}

Vec project_to_simplex(const Vec& w) {
  const Index n = w.size();
  if (n == 0) return w;
  std::vector<double> sorted(w.data(), w.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cum = 0.0;
  double theta = 0.0;
  for (Index j = 0; j < n; ++j) {
    cum += sorted[static_cast<std::size_t>(j)];
    const double t = (cum - 1.0) / static_cast<double>(j + 1);
    if (sorted[static_cast<std::size_t>(j)] - t > 0.0) theta = t;
  }
  Vec x = (w.array() - theta).cwiseMax(0.0);
  // Remove the rounding left in the sum.
  const double total = x.sum();
  if (total > 0.0) x /= total;
  return x;
}

}  // namespace specfw

#pragma once

// Independent reference computations for the tests.  Nothing here calls the
// library's numerical routines.

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "specfw/random.hpp"

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

struct Eig {
  Vec values;  // descending
  Mat vectors;
};

/// Cyclic Jacobi rotations until the off-diagonal mass is negligible.
inline Eig jacobi_eig(Mat a) {
  const Index n = a.rows();
  Mat v = Mat::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Index p = 0; p < n; ++p)
      for (Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off <= 1e-32 * std::max(1.0, a.squaredNorm())) break;
    for (Index p = 0; p < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Index i, Index j) { return a(i, i) > a(j, j); });
  Eig e{Vec(n), Mat(n, n)};
  for (Index i = 0; i < n; ++i) {
    e.values(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    e.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return e;
}

/// Pseudo-inverse with eigenvalues below rel_cutoff * max|lambda| dropped.
inline Mat pinv(const Mat& a, double rel_cutoff = 1e-11) {
  const Eig e = jacobi_eig(a);
  const double top = e.values.cwiseAbs().maxCoeff();
  Mat p = Mat::Zero(a.rows(), a.cols());
  for (Index i = 0; i < e.values.size(); ++i)
    if (std::abs(e.values(i)) > rel_cutoff * top)
      p += e.vectors.col(i) * e.vectors.col(i).transpose() / e.values(i);
  return p;
}

/// Pseudo-inverse of the best rank-r approximation (top r eigenpairs).
inline Mat pinv_top(const Mat& a, int r) {
  const Eig e = jacobi_eig(a);
  Mat p = Mat::Zero(a.rows(), a.cols());
  for (Index i = 0; i < r; ++i) p += e.vectors.col(i) * e.vectors.col(i).transpose() / e.values(i);
  return p;
}

inline int rank(const Mat& a, double rel_cutoff = 1e-9) {
  const Eig e = jacobi_eig(a);
  const double top = e.values.cwiseAbs().maxCoeff();
  int r = 0;
  for (Index i = 0; i < e.values.size(); ++i)
    if (std::abs(e.values(i)) > rel_cutoff * std::max(top, 1e-300)) ++r;
  return r;
}

inline double min_eigenvalue(const Mat& a) { return jacobi_eig(a).values.minCoeff(); }

/// Simplex projection by enumerating every support set: on a support S the
/// KKT point is x_S = w_S - (sum w_S - 1)/|S|; keep the nearest feasible one.
inline Vec simplex_kkt(const Vec& w) {
  const Index n = w.size();
  Vec best;
  double best_d = INFINITY;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    double sum = 0.0;
    int k = 0;
    for (Index i = 0; i < n; ++i)
      if (mask & (1u << i)) {
        sum += w(i);
        ++k;
      }
    const double shift = (sum - 1.0) / k;
    Vec x = Vec::Zero(n);
    bool ok = true;
    for (Index i = 0; i < n; ++i)
      if (mask & (1u << i)) {
        x(i) = w(i) - shift;
        if (x(i) < -1e-15) ok = false;
      }
    if (!ok) continue;
    const double d = (x - w).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = x;
    }
  }
  return best;
}

/// Minimizer of phi over `points` equally spaced samples of [0, theta_max].
inline std::pair<double, double> grid_min(const std::function<double(double)>& phi,
                                          double theta_max, int points) {
  double bt = 0.0, bv = phi(0.0);
  for (int i = 1; i < points; ++i) {
    const double t = theta_max * i / (points - 1);
    const double v = phi(t);
    if (v < bv) {
      bv = v;
      bt = t;
    }
  }
  return {bt, bv};
}

/// Central difference of t -> f(x + t d) at 0.
inline double central_difference(const std::function<double(const Mat&)>& f, const Mat& x,
                                 const Mat& d, double eps) {
  return (f(x + eps * d) - f(x - eps * d)) / (2.0 * eps);
}

inline Mat random_symmetric(Index n, specfw::Rng& rng) {
  std::normal_distribution<double> g;
  Mat a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j <= i; ++j) a(i, j) = a(j, i) = g(rng);
  return a;
}

/// Trace-one PSD matrix of the given rank with eigenvalues bounded away
/// from zero.
inline Mat random_feasible(Index n, Index r, specfw::Rng& rng) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.2, 1.0);
  Mat q(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) q(i, j) = g(rng);
  // Orthonormal columns by Gram-Schmidt.
  for (Index j = 0; j < r; ++j) {
    for (Index k = 0; k < j; ++k) q.col(j) -= q.col(k).dot(q.col(j)) * q.col(k);
    q.col(j).normalize();
  }
  Vec s(r);
  for (Index j = 0; j < r; ++j) s(j) = u(rng);
  s /= s.sum();
  Mat x = Mat::Zero(n, n);
  for (Index j = 0; j < r; ++j) x += s(j) * q.col(j) * q.col(j).transpose();
  return x;
}

/// Orthonormal basis of the column space, from the Jacobi eigenvectors.
inline Mat image_basis(const Mat& x, double rel_cutoff = 1e-9) {
  const Eig e = jacobi_eig(x);
  const double top = e.values.cwiseAbs().maxCoeff();
  Index r = 0;
  while (r < e.values.size() && e.values(r) > rel_cutoff * top) ++r;
  return e.vectors.leftCols(r);
}

}  // namespace oracle

#include "specfw/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "specfw/error.hpp"

namespace specfw {

SymMat LowRankDirection::dense(const SymMat& x) const {
  SymMat d = x * base_coeff;
  for (const auto& [w, v] : terms) d.add_outer(v, w);
  return d;
}

Evaluation ObjectiveOracle::evaluate(const SymMat& x) const {
  return Evaluation{x, value(x), gradient(x), Vec()};
}

Evaluation ObjectiveOracle::evaluate_step(const Evaluation&, const LowRankDirection&, double,
                                          const SymMat& x_new) const {
  return evaluate(x_new);
}

std::optional<Quadratic> ObjectiveOracle::directional(const SymMat&, const SymMat&) const {
  return std::nullopt;
}

std::optional<Quadratic> ObjectiveOracle::directional(const Evaluation& at,
                                                      const LowRankDirection& dir) const {
  return directional(at.x, dir.dense(at.x));
}

std::optional<Quadratic> LinearOracle::directional(const SymMat& base, const SymMat& dir) const {
  return Quadratic{0.0, c_.dot(dir), c_.dot(base)};
}

double DistanceOracle::value(const SymMat& x) const {
  const double d = (x - target_).frobenius();
  return 0.5 * d * d;
}

std::optional<Quadratic> DistanceOracle::directional(const SymMat& base, const SymMat& dir) const {
  const SymMat r = base - target_;
  return Quadratic{0.5 * dir.dot(dir), r.dot(dir), 0.5 * r.dot(r)};
}

LineSearchResult minimize_quadratic(const Quadratic& q, double theta_max) {
  double theta = 0.0;
  if (q.a > 0.0) {
    theta = std::clamp(-q.b / (2.0 * q.a), 0.0, theta_max);
  } else if (q(theta_max) < q.c) {
    theta = theta_max;
  }
  const double change = (q.a * theta + q.b) * theta;
  if (!(change <= 0.0)) return {0.0, q.c, 0.0};
  return {theta, q.c + change, change};
}

LineSearchResult golden_section(const std::function<double(double)>& phi, double theta_max,
                                double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0;
  double hi = theta_max;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = phi(x1);
  double f2 = phi(x2);
  while (hi - lo > tol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = phi(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = phi(x2);
    }
    if (x2 <= x1) break;
  }
  const double f0 = phi(0.0);
  LineSearchResult best{0.0, f0, 0.0};
  for (double t : {x1, x2, theta_max}) {
    const double v = phi(t);
    if (v < best.value) best = {t, v, v - f0};
  }
  return best;
}

LineSearchResult line_search(const ObjectiveOracle& oracle, const SymMat& base, const SymMat& dir,
                             double theta_max, double tol) {
  if (!(theta_max > 0.0)) throw Error(ErrorCode::InvalidConfig, "line search needs theta_max > 0");
  if (const auto q = oracle.directional(base, dir)) return minimize_quadratic(*q, theta_max);
  return golden_section([&](double t) { return oracle.value(base + dir * t); }, theta_max, tol);
}

LineSearchResult line_search(const ObjectiveOracle& oracle, const Evaluation& at,
                             const LowRankDirection& dir, double theta_max, double tol) {
  if (!(theta_max > 0.0)) throw Error(ErrorCode::InvalidConfig, "line search needs theta_max > 0");
  if (const auto q = oracle.directional(at, dir)) return minimize_quadratic(*q, theta_max);
  const SymMat d = dir.dense(at.x);
  return golden_section([&](double t) { return oracle.value(at.x + d * t); }, theta_max, tol);
}

LineSearchResult value_along(const ObjectiveOracle& oracle, const Evaluation& at,
                             const LowRankDirection& dir, double theta) {
  if (const auto q = oracle.directional(at, dir)) {
    const double change = (q->a * theta + q->b) * theta;
    return {theta, q->c + change, change};
  }
  const double v = oracle.value(at.x + dir.dense(at.x) * theta);
  return {theta, v, v - at.value};
}

}  // namespace specfw

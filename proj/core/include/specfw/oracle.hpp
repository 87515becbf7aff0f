#pragma once

// Smooth convex objectives over symmetric matrices and one-dimensional line
// searches along segments X + theta D.

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "specfw/symlin.hpp"

namespace specfw {

/// phi(theta) = a theta^2 + b theta + c
struct Quadratic {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double operator()(double theta) const { return (a * theta + b) * theta + c; }
};

/// Objective value and gradient at a point.  `cache` holds oracle-specific
/// per-point data that makes directional queries cheap.
struct Evaluation {
  SymMat x;
  double value = 0.0;
  SymMat gradient;
  Vec cache;
};

/// D = base_coeff * X + sum_j w_j v_j v_j^T, with X the evaluation point.
/// Every step direction of the solvers has this shape.
struct LowRankDirection {
  double base_coeff = 0.0;
  std::vector<std::pair<double, Vec>> terms;

  SymMat dense(const SymMat& x) const;
};

class ObjectiveOracle {
 public:
  virtual ~ObjectiveOracle() = default;

  virtual Index dim() const = 0;
  /// Smoothness constant used by the pairwise rule and the envelope checks.
  virtual double beta() const = 0;
  virtual double value(const SymMat& x) const = 0;
  virtual SymMat gradient(const SymMat& x) const = 0;

  virtual Evaluation evaluate(const SymMat& x) const;
  /// Evaluation at x_new == at.x + theta dir.  Oracles with per-point caches
  /// override this to update the cache instead of recomputing it.
  virtual Evaluation evaluate_step(const Evaluation& at, const LowRankDirection& dir,
                                   double theta, const SymMat& x_new) const;
  /// Exact coefficients of theta -> f(base + theta dir) when f is quadratic
  /// along lines; nullopt otherwise.
  virtual std::optional<Quadratic> directional(const SymMat& base, const SymMat& dir) const;
  /// Same query for a low-rank direction at an evaluated point.
  virtual std::optional<Quadratic> directional(const Evaluation& at,
                                               const LowRankDirection& dir) const;
};

/// f(X) = <C, X>.
class LinearOracle final : public ObjectiveOracle {
 public:
  explicit LinearOracle(SymMat c, double beta = 1.0) : c_(std::move(c)), beta_(beta) {}

  Index dim() const override { return c_.dim(); }
  double beta() const override { return beta_; }
  double value(const SymMat& x) const override { return c_.dot(x); }
  SymMat gradient(const SymMat&) const override { return c_; }
  std::optional<Quadratic> directional(const SymMat& base, const SymMat& dir) const override;
  using ObjectiveOracle::directional;

 private:
  SymMat c_;
  double beta_;
};

/// f(X) = 1/2 ||X - T||_F^2, smooth with beta = 1.
class DistanceOracle final : public ObjectiveOracle {
 public:
  explicit DistanceOracle(SymMat target) : target_(std::move(target)) {}

  Index dim() const override { return target_.dim(); }
  double beta() const override { return 1.0; }
  double value(const SymMat& x) const override;
  SymMat gradient(const SymMat& x) const override { return x - target_; }
  std::optional<Quadratic> directional(const SymMat& base, const SymMat& dir) const override;
  using ObjectiveOracle::directional;

 private:
  SymMat target_;
};

struct LineSearchResult {
  double theta = 0.0;
  double value = 0.0;
  /// phi(theta) - phi(0), computed without cancellation against phi(0) when
  /// coefficients are available.
  double change = 0.0;
};

/// argmin of q over [0, theta_max]: vertex clamped to the interval, with
/// phi(theta*) <= phi(0) guaranteed.
LineSearchResult minimize_quadratic(const Quadratic& q, double theta_max);

/// Golden-section search on [0, theta_max] down to interval width tol.  Falls
/// back to theta = 0 when no probe improves on phi(0).
LineSearchResult golden_section(const std::function<double(double)>& phi, double theta_max,
                                double tol);

/// argmin over theta in [0, theta_max] of f(base + theta dir).
LineSearchResult line_search(const ObjectiveOracle& oracle, const SymMat& base, const SymMat& dir,
                             double theta_max, double tol = 1e-12);
LineSearchResult line_search(const ObjectiveOracle& oracle, const Evaluation& at,
                             const LowRankDirection& dir, double theta_max, double tol = 1e-12);

/// f(at.x + theta dir) as a LineSearchResult at the given theta, exact when
/// the oracle supplies coefficients.
LineSearchResult value_along(const ObjectiveOracle& oracle, const Evaluation& at,
                             const LowRankDirection& dir, double theta);

}  // namespace specfw

#pragma once

// Feasible iterate on the spectrahedron {X PSD, Tr X = 1} together with its
// pseudo-inverse, the projector onto Im(X) and the tracked rank.  Every step
// updates X^+ and the projector in O(n^2) via rank-one pseudo-inverse
// updates; refresh() recomputes them from an eigen-decomposition.

#include "specfw/symlin.hpp"

namespace specfw {

/// Eigenvalues at or below this fraction of lambda_1(X) do not count towards
/// the rank and are excluded from the pseudo-inverse on refresh.
inline constexpr double kRankCutoff = 1e-13;
/// ||v - Pi v|| at or below this means v is treated as lying in Im(X).
inline constexpr double kImageTol = 1e-8;
/// Feasibility slack for trace and smallest eigenvalue.
inline constexpr double kFeasibilityTol = 1e-9;
/// Drop steps need lambda < 1 - kDropMargin.
inline constexpr double kDropMargin = 1e-12;

class IterateState {
 public:
  const SymMat& x() const noexcept { return x_; }
  const SymMat& pinv() const noexcept { return pinv_; }
  const SymMat& proj() const noexcept { return proj_; }
  int rank() const noexcept { return rank_; }
  int iter_since_refresh() const noexcept { return since_refresh_; }
  Index dim() const noexcept { return x_.dim(); }

  friend IterateState init_state(const SymMat& x0);
  friend IterateState refresh(const IterateState& s);
  friend IterateState apply_drop(const IterateState& s, const Vec& v, double lambda);
  friend IterateState apply_convex_step(const IterateState& s, const Vec& v, double eta);
  friend IterateState apply_away_step(const IterateState& s, const Vec& v, double eta);
  friend IterateState apply_pairwise_step(const IterateState& s, const Vec& u_minus,
                                          const Vec& u_plus, double gamma);
  /// Test hook: a state with arbitrary fields, bypassing all checks.
  static IterateState unchecked(SymMat x, SymMat pinv, SymMat proj, int rank);

 private:
  IterateState(SymMat x, SymMat pinv, SymMat proj, int rank, int since_refresh)
      : x_(std::move(x)),
        pinv_(std::move(pinv)),
        proj_(std::move(proj)),
        rank_(rank),
        since_refresh_(since_refresh) {}

  SymMat x_;
  SymMat pinv_;
  SymMat proj_;
  int rank_ = 0;
  int since_refresh_ = 0;
};

/// Throws InfeasibleInput unless |Tr X0 - 1| <= 1e-9 and lambda_min >= -1e-9.
IterateState init_state(const SymMat& x0);

/// Recomputes X^+, the projector and the rank from the eigen-decomposition.
IterateState refresh(const IterateState& s);

/// (v^T X^+ v)^{-1}: the largest lambda keeping X - lambda v v^T PSD.
/// Throws NotInImage when ||Pi v - v|| > 1e-6.
double max_removal_coeff(const IterateState& s, const Vec& v);

/// X' = (X - lambda v v^T) / (1 - lambda) with lambda = max_removal_coeff.
/// Throws DegenerateStep when lambda >= 1 - 1e-12.
IterateState apply_drop(const IterateState& s, const Vec& v, double lambda);

/// X' = (1 - eta) X + eta v v^T.
IterateState apply_convex_step(const IterateState& s, const Vec& v, double eta);

/// X' = (X - eta v v^T) / (1 - eta) for 0 <= eta < max_removal_coeff.
/// Throws StepTooLarge otherwise.
IterateState apply_away_step(const IterateState& s, const Vec& v, double eta);

/// X' = X + gamma (u+ u+^T - u- u-^T) with gamma = max_removal_coeff(u-).
IterateState apply_pairwise_step(const IterateState& s, const Vec& u_minus, const Vec& u_plus,
                                 double gamma);

/// Pi z / ||Pi z|| for a standard Gaussian z: uniform on the unit sphere of Im(X).
Vec sample_unit_in_image(const IterateState& s, Rng& rng);

struct ConsistencyResiduals {
  double reconstruction = 0.0;   // ||X X^+ X - X||_F
  double pinv_identity = 0.0;    // ||X^+ X X^+ - X^+||_F / max(1, ||X^+||_F)
  double proj_vs_pinv = 0.0;     // ||Pi - X X^+||_F
  double proj_idempotent = 0.0;  // ||Pi^2 - Pi||_F
  /// n eps ||X||_F ||X^+||_F: the size of these residuals from rounding in
  /// the products alone, which grows with the condition number of X on its
  /// image even for an exact pseudo-inverse.
  double rounding = 0.0;

  double worst() const;
  /// worst() beyond the rounding level; this is what counts as drift.
  double excess() const;
};

ConsistencyResiduals consistency_residuals(const IterateState& s);

struct Feasibility {
  double trace_error = 0.0;  // |Tr X - 1|
  double min_eigenvalue = 0.0;
  bool ok(double tol = kFeasibilityTol) const {
    return trace_error <= tol && min_eigenvalue >= -tol;
  }
};

Feasibility feasibility(const SymMat& x);

/// Number of eigenvalues above kRankCutoff * lambda_1.
int numerical_rank(const SymMat& x);

}  // namespace specfw

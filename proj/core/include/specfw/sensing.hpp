#pragma once

// Matrix sensing over the spectrahedron:
//   f(X) = 1/2 sum_i (a_i^T (tau X) a_i - b_i)^2
// with Gaussian measurement vectors and a low-rank ground truth.

#include <cstdint>
#include <filesystem>
#include <memory>

#include "specfw/solver.hpp"

namespace specfw {

struct SensingProblem {
  Index n = 0;
  Index m = 0;
  Index r_star = 0;
  double tau = 0.5;
  bool noise = true;
  std::uint64_t seed = 0;
  Mat a;  // m x n, row i is a_i
  Vec b;
  SymMat x_sharp;
};

/// Gaussian U (n x r_star) scaled to unit Frobenius norm, X# = U U^T (so
/// Tr X# = 1), Gaussian a_i, b#_i = a_i^T X# a_i and, with noise,
/// b = b# + (||b#|| / 2) v for v uniform on the unit sphere of R^m.
/// Throws InvalidShape unless n >= r_star >= 1 and m >= 1.
SensingProblem generate_problem(Index n, Index r_star, Index m, double tau, bool noise,
                                std::uint64_t seed);

/// beta = n^2 / 2, the working smoothness constant used in the experiments.
double default_beta(Index n);
/// tau^2 sum_i ||a_i||^4, a certified smoothness constant.
double certified_beta(const SensingProblem& p);
/// tau^2 sum_i (a_i^T D a_i)^2 / ||D||_F^2: the exact curvature along D.
double curvature_along(const SensingProblem& p, const SymMat& d);

class SensingOracle final : public ObjectiveOracle {
 public:
  explicit SensingOracle(std::shared_ptr<const SensingProblem> problem, double beta = 0.0);

  const SensingProblem& problem() const noexcept { return *p_; }
  Index dim() const override { return p_->n; }
  double beta() const override { return beta_; }
  double value(const SymMat& x) const override;
  SymMat gradient(const SymMat& x) const override;

  /// One pass for value and gradient; caches q_i = a_i^T X a_i.
  Evaluation evaluate(const SymMat& x) const override;
  /// Evaluation at x_new = at.x + theta dir, reusing the cached q_i.
  Evaluation evaluate_step(const Evaluation& at, const LowRankDirection& dir, double theta,
                           const SymMat& x_new) const override;

  std::optional<Quadratic> directional(const SymMat& base, const SymMat& dir) const override;
  std::optional<Quadratic> directional(const Evaluation& at,
                                       const LowRankDirection& dir) const override;

  /// a_i^T D a_i for every i.
  Vec quadratic_forms(const SymMat& d) const;
  Vec quadratic_forms(const Evaluation& at, const LowRankDirection& dir) const;

 private:
  Evaluation finish(const SymMat& x, Vec q) const;

  std::shared_ptr<const SensingProblem> p_;
  double beta_;
};

/// Empirical check of f(Y) <= f(X) + <grad f(X), Y - X> + beta/2 ||Y - X||^2
/// on random feasible pairs (vertex pairs and random-rank points).
struct SmoothnessReport {
  int samples = 0;
  int violations = 0;
  /// Largest curvature tau^2 sum_i (a_i^T D a_i)^2 / ||D||^2 seen, D = Y - X.
  double max_curvature = 0.0;
};

SmoothnessReport smoothness_check(const SensingOracle& oracle, double beta, int samples,
                                  std::uint64_t seed);

/// Reference solution for a sensing instance: the planted X# when it is
/// feasible and its dual gap already meets cfg.gap_tol, otherwise a long
/// run from initial_vertex().
ReferenceSolution sensing_reference(const SensingOracle& oracle, SolverConfig cfg);

/// Eigengap of grad f(X_ref) at position n - r_star (eigenvalues descending)
/// and the r_star-th largest eigenvalue of X_ref.
struct ComplementarityReport {
  double delta = 0.0;
  double lambda_rstar = 0.0;
};

ComplementarityReport measure_strict_complementarity(const ObjectiveOracle& oracle,
                                                     const SymMat& x_ref, Index r_star);

/// Binary little-endian container; every field round-trips bit-exactly.
void write_problem(const SensingProblem& p, const std::filesystem::path& path);
SensingProblem read_problem(const std::filesystem::path& path);

}  // namespace specfw

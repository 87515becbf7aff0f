#pragma once

// Frank-Wolfe over the spectrahedron with drop, away and randomized pairwise
// steps.  Each iteration either drops a rank-one component of X, or takes the
// best of a Frank-Wolfe, an away and a pairwise candidate.

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "specfw/oracle.hpp"
#include "specfw/state.hpp"

namespace specfw {

enum class StepKind { Drop, FW, Away, Pairwise, Block };

std::string_view to_string(StepKind kind);
std::optional<StepKind> parse_step_kind(std::string_view s);

/// Which step types an iteration may use.
struct StepRules {
  bool drop = true;
  bool away = true;
  bool pairwise = true;
  /// false: pairwise removes the in-image maximizer instead of a random direction.
  bool random_pairwise = true;
};

struct SolverConfig {
  double beta = 1.0;
  int max_iters = 1000;
  double gap_tol = 0.0;
  double zeta = 1.0;
  std::uint64_t seed = 0;
  double line_search_tol = 1e-12;
  int refresh_period = 50;
  /// Consistency residual (beyond rounding) above which the state is rebuilt.
  double drift_tol = 1e-8;
  /// In-image and pairwise eigensolves.
  EigenOptions eig{1e-13, 0};
  /// Frank-Wolfe vertex eigensolve, which also sets the dual gap.  At an
  /// optimum the r* smallest eigenvalues of the gradient cluster, and a
  /// residual of 1e-10 |lambda| leaves a Ritz value inside the cluster.
  EigenOptions vertex_eig{1e-13, 0};
  StepRules rules{};

  /// Throws InvalidConfig on beta <= 0, zeta <= 0, gap_tol < 0 or max_iters < 1.
  void validate() const;
};

struct TraceRow {
  int iter = 0;
  double f_value = 0.0;
  double dual_gap = 0.0;
  StepKind step_kind = StepKind::FW;
  int rank = 0;
  /// Rank-one eigenvector computations spent by this step and so far.
  int rank1_updates = 0;
  long long rank1_updates_cum = 0;
  double elapsed = 0.0;
  /// Some eigensolve of this iteration stopped above its tolerance.
  bool eig_flag = false;
  /// Pseudo-inverse/projector residual beyond rounding level of the state
  /// carried forward, after any refresh.
  double drift = 0.0;
};

struct StepCandidate {
  StepKind kind = StepKind::FW;
  IterateState next;
  double f_value = 0.0;
  /// f_value - f(X_t); candidates are ranked on this.
  double change = 0.0;
  LowRankDirection dir;
  double theta = 0.0;
  int rank1_updates = 1;
};

/// An iterate with its evaluation and the Frank-Wolfe vertex of its gradient
/// (leading eigenpair of -grad), which yields the dual gap and the next FW
/// direction.
struct SolverPoint {
  IterateState state;
  Evaluation eval;
  EigPair fw;
  double gap = 0.0;
};

/// argmax of v^T grad v over unit v in Im(X), as the leading eigenvector of
/// M = Pi grad Pi + (1 + zeta) ||grad||_F Pi applied implicitly.  The
/// returned value is v^T grad v.
EigPair in_image_max_eigvec(const IterateState& state, const SymMat& grad, double zeta, Rng& rng,
                            const EigenOptions& opts = {});

/// Leading eigenvector of beta gamma u- u-^T - grad.
EigPair pairwise_plus_direction(const SymMat& grad, const Vec& u_minus, double beta, double gamma,
                                Rng& rng, const EigenOptions& opts = {});

/// Leading eigenpair of -grad.
EigPair fw_vertex(const SymMat& grad, Rng& rng, const EigenOptions& opts = {});

/// <X, grad> - lambda_min(grad).
double dual_gap(const SymMat& x, const SymMat& grad, Rng& rng, const EigenOptions& opts = {});
double dual_gap(const SymMat& x, const SymMat& grad, const EigPair& fw);

SolverPoint make_point(IterateState state, const ObjectiveOracle& oracle, const SolverConfig& cfg,
                       int iter);

struct IterationResult {
  SolverPoint point;
  TraceRow row;
};

/// One iteration from `at`; `iter` (1-based) keys the random streams.
IterationResult iterate_once(const SolverPoint& at, const ObjectiveOracle& oracle,
                             const SolverConfig& cfg, int iter);
IterationResult iterate_once(const IterateState& state, const ObjectiveOracle& oracle,
                             const SolverConfig& cfg, int iter);

/// Called after every iteration with the row and the new iterate.
using IterateObserver = std::function<void(const TraceRow&, const SymMat&)>;

struct SolveResult {
  SymMat x;
  std::vector<TraceRow> trace;
  double initial_f = 0.0;
  double initial_gap = 0.0;
  int initial_rank = 0;
  bool converged = false;
};

/// Iterates until dual_gap <= gap_tol or max_iters.  Bit-identical for equal
/// inputs.
SolveResult solve(const SymMat& x0, const ObjectiveOracle& oracle, const SolverConfig& cfg,
                  const IterateObserver& observer = {});

/// v v^T for the leading eigenvector v of -grad f(I/n).
SymMat initial_vertex(const ObjectiveOracle& oracle);

struct ReferenceSolution {
  SymMat x;
  double f = 0.0;
  double gap = 0.0;
  int iterations = 0;
  bool budget_exceeded = false;
};

/// Long high-accuracy run used as the f* proxy.  Returns the certified final
/// iterate, or the lowest-f iterate with budget_exceeded set when gap_tol is
/// not reached.
ReferenceSolution reference_solution(const ObjectiveOracle& oracle, const SymMat& x0,
                                     SolverConfig cfg);

}  // namespace specfw

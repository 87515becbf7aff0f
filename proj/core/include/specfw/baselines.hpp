#pragma once

// Comparison methods: Frank-Wolfe with line search, Block-FW and the
// ablations of the main solver.

#include <optional>
#include <string_view>

#include "specfw/solver.hpp"

namespace specfw {

enum class Algo { Alg1, FW, BlockFW, Alg1Away, Alg1NoDrop, Alg1Det };

std::string_view to_string(Algo algo);
std::optional<Algo> parse_algo(std::string_view s);

struct BaselineConfig {
  Algo algo = Algo::Alg1;
  /// Block-FW rank.
  int r = 1;
  /// Block-FW step size.
  double eta = 0.3;
  SolverConfig solver{};

  /// Checks the solver fields, and 1 <= r <= n, eta in (0, 1] for Block-FW.
  void validate(Index n) const;
};

/// Step rules of the ablations: away drops the drop branch and the pairwise
/// step, nodrop drops the drop branch, det replaces the random pairwise
/// direction by the in-image maximizer.
StepRules rules_for(Algo algo);

/// One Frank-Wolfe step with exact line search over eta in [0, 1].
SymMat fw_step(const SymMat& x, const ObjectiveOracle& oracle, Rng& rng,
               const EigenOptions& opts = {});

/// (1 - eta) X + eta V with V the simplex projection, in the eigenbasis, of
/// the top-r eigenpairs of X - grad / (eta beta).
SymMat block_fw_step(const SymMat& x, const SymMat& grad, int r, double eta, double beta);

/// Runs any algorithm from x0; the solver variants go through solve().
SolveResult run_algorithm(const SymMat& x0, const ObjectiveOracle& oracle,
                          const BaselineConfig& cfg, const IterateObserver& observer = {});

}  // namespace specfw

#pragma once

// Experiment driver behind the command-line tool: instance families, runs
// against a reference solution, averaged traces and the invariant checker.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "specfw/baselines.hpp"
#include "specfw/sensing.hpp"
#include "specfw/trace_io.hpp"

namespace specfw {

struct RunSpec {
  Algo algo = Algo::Alg1;
  Index n = 20;
  Index r_star = 2;
  double m_factor = 15.0;
  double tau = 0.5;
  bool noise = true;
  /// Solver randomness (pairwise sampling).
  std::uint64_t seed = 0;
  /// Instance family; kept apart from `seed` so that runs with different
  /// solver seeds see the same instances.
  std::uint64_t instance_seed = 0;
  int repeats = 1;
  int max_iters = 300;
  double gap_tol = 0.0;
  /// Defaults to n^2 / 2.
  std::optional<double> beta;
  /// Block-FW rank; 0 means r_star.
  int block_r = 0;
  double block_eta = 0.3;
  std::filesystem::path out;

  Index m() const;
  double effective_beta() const;
  /// Throws InvalidConfig (or InvalidShape for the instance fields).
  void validate() const;
  /// Same instance family: n, r_star, m, tau, noise, instance_seed, repeats.
  bool same_instances(const RunSpec& other) const;
};

/// Instance of repeat k.
SensingProblem make_instance(const RunSpec& spec, int k);
BaselineConfig baseline_config(const RunSpec& spec, int k);

inline constexpr double kReferenceGapTol = 1e-11;
inline constexpr int kReferenceBudget = 5000;

/// Reference at gap 1e-11 with the run's beta.
ReferenceSolution reference_for(const SensingOracle& oracle, const RunSpec& spec);

struct RepeatResult {
  SolveResult run;
  ReferenceSolution ref;
  std::vector<CsvRow> rows;
};

struct SolveOutput {
  std::vector<RepeatResult> repeats;
  std::vector<CsvRow> averaged;
};

/// Runs every repeat; when spec.out is set writes `<out>` (averaged) and one
/// `<stem>.rep<k><ext>` per repeat.
SolveOutput run_solve(const RunSpec& spec);

struct CompareOutput {
  std::vector<Algo> algos;
  /// Averaged rows per algorithm.
  std::vector<std::vector<CsvRow>> averaged;
};

/// Runs each spec on shared instances and references.  Throws
/// MismatchedInstances unless all specs describe the same instance family.
CompareOutput run_compare(const std::vector<RunSpec>& specs);

/// Columns: iter, then <algo>_f_value, <algo>_log10_error and
/// <algo>_rank1_updates_cum per algorithm, so the table can be keyed by
/// iteration or by rank-one updates.
void write_compare_csv(const CompareOutput& out, const std::filesystem::path& path);

enum class Fault { None, Trace, Psd, Monotone };
std::optional<Fault> parse_fault(std::string_view s);

struct Violation {
  std::string invariant;
  int repeat = 0;
  int iter = 0;
  std::string detail;
};

struct VerifyReport {
  std::vector<Violation> violations;
  /// max_t (f_t - f*)(t - rank(X_1) + 4) / (8 beta) over all repeats.
  double envelope_ratio = 0.0;
  double envelope_beta = 0.0;
  /// True when the working beta failed the smoothness sanity check and the
  /// envelope used tau^2 sum ||a_i||^4 instead.
  bool envelope_fallback = false;
  bool ok() const { return violations.empty(); }
};

/// Checks feasibility, monotonicity, the drop budget, the sublinear envelope,
/// pseudo-inverse drift and the gap certificate on every iterate.  `fault`
/// corrupts the observed iterates to exercise the checker.
VerifyReport run_verify(const RunSpec& spec, Fault fault = Fault::None);

// Trace indexing: row `iter` = k holds X_{k+1}, the iterate after k steps
// from X_1 = x0.

/// Drop steps after k steps may not exceed (k + rank(X_1) - 1) / 2.
bool drop_budget_ok(int drops, int k, int rank_x1);
/// (f - f*)(t - rank(X_1) + 4) / (8 beta) with t = k + 1; meaningful for
/// t >= rank(X_1) + 2.
double envelope_ratio(double f, double f_star, int k, int rank_x1, double beta);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Least-squares line; r2 = 1 for a constant y.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
/// Fit of log10_error against iter over the last `fraction` of rows.
LineFit fit_tail(const std::vector<CsvRow>& rows, double fraction);

/// First row with log10_error <= log10(level), or nullopt.  On averaged rows
/// this is where the mean log-error curve crosses the level.
std::optional<CsvRow> first_reach(const std::vector<CsvRow>& rows, double level);

}  // namespace specfw

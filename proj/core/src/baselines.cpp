#include "specfw/baselines.hpp"

#include <chrono>

#include "specfw/error.hpp"

namespace specfw {

namespace {

constexpr std::uint64_t kBaselineEigenKey = 0xb45e11e5eedULL;

struct Point {
  SymMat x;
  Evaluation eval;
  EigPair fw;
  double gap = 0.0;
};

Point make_baseline_point(SymMat x, Evaluation eval, const SolverConfig& cfg, int iter) {
  Rng rng = make_rng(kBaselineEigenKey, 0, static_cast<std::uint64_t>(iter));
  EigPair fw = fw_vertex(eval.gradient, rng, cfg.vertex_eig);
  const double gap = dual_gap(x, eval.gradient, fw);
  return Point{std::move(x), std::move(eval), std::move(fw), gap};
}

template <typename Step>
SolveResult run_loop(const SymMat& x0, const ObjectiveOracle& oracle, const SolverConfig& cfg,
                     const IterateObserver& observer, StepKind kind, int updates_per_step,
                     Step step) {
  const auto start = std::chrono::steady_clock::now();
  Point point = make_baseline_point(x0, oracle.evaluate(x0), cfg, 0);
  SolveResult out;
  out.initial_f = point.eval.value;
  out.initial_gap = point.gap;
  out.initial_rank = numerical_rank(x0);
  out.converged = point.gap <= cfg.gap_tol;
  long long updates = 0;
  for (int t = 1; t <= cfg.max_iters && !out.converged; ++t) {
    auto [x, eval] = step(point);
    point = make_baseline_point(std::move(x), std::move(eval), cfg, t);
    updates += updates_per_step;
    TraceRow row;
    row.iter = t;
    row.f_value = point.eval.value;
    row.dual_gap = point.gap;
    row.step_kind = kind;
    row.rank = numerical_rank(point.x);
    row.rank1_updates = updates_per_step;
    row.rank1_updates_cum = updates;
    row.eig_flag = !point.fw.converged;
    row.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (observer) observer(row, point.x);
    out.trace.push_back(row);
    out.converged = row.dual_gap <= cfg.gap_tol;
  }
  out.x = point.x;
  return out;
}

}  // namespace

std::string_view to_string(Algo algo) {
  switch (algo) {
    case Algo::Alg1: return "alg1";
    case Algo::FW: return "fw";
    case Algo::BlockFW: return "blockfw";
    case Algo::Alg1Away: return "alg1-away";
    case Algo::Alg1NoDrop: return "alg1-nodrop";
    case Algo::Alg1Det: return "alg1-det";
  }
  return "?";
}

std::optional<Algo> parse_algo(std::string_view s) {
  for (Algo a : {Algo::Alg1, Algo::FW, Algo::BlockFW, Algo::Alg1Away, Algo::Alg1NoDrop,
                 Algo::Alg1Det})
    if (to_string(a) == s) return a;
  return std::nullopt;
}

void BaselineConfig::validate(Index n) const {
  solver.validate();
  if (algo == Algo::BlockFW) {
    if (r < 1 || r > n) throw Error(ErrorCode::InvalidConfig, "Block-FW needs 1 <= r <= n");
    if (!(eta > 0.0 && eta <= 1.0))
      throw Error(ErrorCode::InvalidConfig, "Block-FW needs eta in (0, 1]");
  }
}

StepRules rules_for(Algo algo) {
  StepRules rules;
  switch (algo) {
    case Algo::Alg1Away:
      rules.drop = false;
      rules.pairwise = false;
      break;
    case Algo::Alg1NoDrop:
      rules.drop = false;
      break;
    case Algo::Alg1Det:
      rules.random_pairwise = false;
      break;
    default:
      break;
  }
  return rules;
}

SymMat fw_step(const SymMat& x, const ObjectiveOracle& oracle, Rng& rng, const EigenOptions& opts) {
  const Evaluation e = oracle.evaluate(x);
  const EigPair v = fw_vertex(e.gradient, rng, opts);
  const LowRankDirection dir{-1.0, {{1.0, v.vector}}};
  const LineSearchResult ls = line_search(oracle, e, dir, 1.0);
  SymMat next = x * (1.0 - ls.theta);
  return next.add_outer(v.vector, ls.theta);
}

SymMat block_fw_step(const SymMat& x, const SymMat& grad, int r, double eta, double beta) {
  const Index n = x.dim();
  if (r < 1 || r > n) throw Error(ErrorCode::InvalidConfig, "Block-FW needs 1 <= r <= n");
  const SymMat m = x - grad / (eta * beta);
  const SymEigen eig = full_eigendecomposition(m);
  const Vec sigma = project_to_simplex(eig.values.head(r));
  SymMat v(n);
  for (int i = 0; i < r; ++i)
    if (sigma(i) > 0.0) v.add_outer(eig.vectors.col(i), sigma(i));
  return x * (1.0 - eta) + v * eta;
}

SolveResult run_algorithm(const SymMat& x0, const ObjectiveOracle& oracle,
                          const BaselineConfig& cfg, const IterateObserver& observer) {
  cfg.validate(oracle.dim());
  const SolverConfig& sc = cfg.solver;
  switch (cfg.algo) {
    case Algo::FW:
      return run_loop(x0, oracle, sc, observer, StepKind::FW, 1, [&](const Point& p) {
        const LowRankDirection dir{-1.0, {{1.0, p.fw.vector}}};
        const LineSearchResult ls = line_search(oracle, p.eval, dir, 1.0, sc.line_search_tol);
        SymMat next = p.x * (1.0 - ls.theta);
        next.add_outer(p.fw.vector, ls.theta);
        Evaluation e = oracle.evaluate_step(p.eval, dir, ls.theta, next);
        return std::pair{std::move(next), std::move(e)};
      });
    case Algo::BlockFW:
      return run_loop(x0, oracle, sc, observer, StepKind::Block, cfg.r, [&](const Point& p) {
        SymMat next = block_fw_step(p.x, p.eval.gradient, cfg.r, cfg.eta, sc.beta);
        Evaluation e = oracle.evaluate(next);
        return std::pair{std::move(next), std::move(e)};
      });
    default: {
      SolverConfig variant = sc;
      variant.rules = rules_for(cfg.algo);
      return solve(x0, oracle, variant, observer);
    }
  }
}

}  // namespace specfw

#include "specfw/solver.hpp"

#include <chrono>
#include <cmath>

#include "specfw/error.hpp"

namespace specfw {

namespace {

// Eigensolver start vectors come from a fixed key so that runs differing only
// in `seed` differ only through the pairwise sampling.
constexpr std::uint64_t kEigenKey = 0x5eed0f0e16e45e11ULL;
constexpr std::uint64_t kStreamInImage = 1;
constexpr std::uint64_t kStreamPairwisePlus = 2;
constexpr std::uint64_t kStreamVertex = 3;
constexpr std::uint64_t kStreamSample = 4;

constexpr double kAwayThetaCap = 1e6;
constexpr double kDropSlack = 1e-14;

}  // namespace

std::string_view to_string(StepKind kind) {
  switch (kind) {
    case StepKind::Drop: return "drop";
    case StepKind::FW: return "fw";
    case StepKind::Away: return "away";
    case StepKind::Pairwise: return "pairwise";
    case StepKind::Block: return "block";
  }
  return "?";
}

std::optional<StepKind> parse_step_kind(std::string_view s) {
  for (StepKind k : {StepKind::Drop, StepKind::FW, StepKind::Away, StepKind::Pairwise,
                     StepKind::Block})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

void SolverConfig::validate() const {
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidConfig, "beta must be positive");
  if (!(zeta > 0.0)) throw Error(ErrorCode::InvalidConfig, "zeta must be positive");
  if (!(gap_tol >= 0.0)) throw Error(ErrorCode::InvalidConfig, "gap_tol must be non-negative");
  if (max_iters < 1) throw Error(ErrorCode::InvalidConfig, "max_iters must be at least 1");
  if (refresh_period < 1) throw Error(ErrorCode::InvalidConfig, "refresh_period must be >= 1");
}

EigPair in_image_max_eigvec(const IterateState& state, const SymMat& grad, double zeta, Rng& rng,
                            const EigenOptions& opts) {
  if (state.rank() < 1) throw Error(ErrorCode::InvalidConfig, "in-image eigenvector needs rank >= 1");
  if (grad.dim() != state.dim()) throw Error(ErrorCode::DimensionMismatch, "gradient size");
  const SymMat& proj = state.proj();
  const double shift = (1.0 + zeta) * std::max(grad.frobenius(), 1e-300);
  const LinOp m(state.dim(), [&](const Vec& x, Vec& y) {
    const Vec px = proj * x;
    y = proj * (grad * px) + shift * px;
  });
  const Vec start = sample_unit_in_image(state, rng);
  EigPair e = leading_eigenpair(m, start, rng, opts);
  Vec v = proj * e.vector;
  const double nv = v.norm();
  if (nv > 0.0) v /= nv;
  e.vector = std::move(v);
  e.value = grad.quad(e.vector);
  return e;
}

EigPair pairwise_plus_direction(const SymMat& grad, const Vec& u_minus, double beta, double gamma,
                                Rng& rng, const EigenOptions& opts) {
  if (!(gamma > 0.0) || !(beta > 0.0))
    throw Error(ErrorCode::InvalidConfig, "pairwise direction needs beta, gamma > 0");
  const double w = beta * gamma;
  const LinOp op(grad.dim(), [&](const Vec& x, Vec& y) {
    y = (w * u_minus.dot(x)) * u_minus - grad * x;
  });
  return leading_eigenpair(op, rng, opts);
}

EigPair fw_vertex(const SymMat& grad, Rng& rng, const EigenOptions& opts) {
  const LinOp op(grad.dim(), [&](const Vec& x, Vec& y) { y = -(grad * x); });
  return leading_eigenpair(op, rng, opts);
}

double dual_gap(const SymMat& x, const SymMat& grad, const EigPair& fw) {
  return x.dot(grad) + fw.value;
}

double dual_gap(const SymMat& x, const SymMat& grad, Rng& rng, const EigenOptions& opts) {
  return dual_gap(x, grad, fw_vertex(grad, rng, opts));
}

SolverPoint make_point(IterateState state, const ObjectiveOracle& oracle, const SolverConfig& cfg,
                       int iter) {
  Evaluation eval = oracle.evaluate(state.x());
  Rng rng = make_rng(kEigenKey, kStreamVertex, static_cast<std::uint64_t>(iter));
  EigPair fw = fw_vertex(eval.gradient, rng, cfg.vertex_eig);
  const double gap = dual_gap(state.x(), eval.gradient, fw);
  return SolverPoint{std::move(state), std::move(eval), std::move(fw), gap};
}

IterationResult iterate_once(const SolverPoint& at, const ObjectiveOracle& oracle,
                             const SolverConfig& cfg, int iter) {
  const IterateState& s = at.state;
  const Evaluation& e = at.eval;
  const SymMat& g = e.gradient;
  const double f0 = e.value;
  const auto key = static_cast<std::uint64_t>(iter);
  bool flagged = !at.fw.converged;

  // The pairwise sample is drawn before any candidate is built so that the
  // random stream does not depend on which branches run.
  std::optional<Vec> sampled;
  if (cfg.rules.pairwise && cfg.rules.random_pairwise) {
    Rng sample_rng = make_rng(cfg.seed, kStreamSample, key);
    sampled = sample_unit_in_image(s, sample_rng);
  }

  Rng in_image_rng = make_rng(kEigenKey, kStreamInImage, key);
  const EigPair vm = in_image_max_eigvec(s, g, cfg.zeta, in_image_rng, cfg.eig);
  flagged = flagged || !vm.converged;
  const Vec& v_minus = vm.vector;
  const double lambda = max_removal_coeff(s, v_minus);
  // A rank-one X = w w^T gives lambda = 1 exactly; a computed value below 1
  // there is pseudo-inverse drift, and dividing by 1 - lambda would amplify it.
  const bool removable = s.rank() > 1 && lambda < 1.0 - kDropMargin;
  const LowRankDirection away_dir{1.0, {{-1.0, v_minus}}};

  std::optional<StepCandidate> best;
  if (cfg.rules.drop && removable) {
    const double theta = lambda / (1.0 - lambda);
    const LineSearchResult drop = value_along(oracle, e, away_dir, theta);
    if (drop.change <= kDropSlack * std::abs(f0))
      best = StepCandidate{StepKind::Drop, apply_drop(s, v_minus, lambda), drop.value, drop.change,
                           away_dir, theta, 1};
  }

  if (!best) {
    // Frank-Wolfe: X + eta (v+ v+^T - X), eta in [0, 1].
    const Vec& v_plus = at.fw.vector;
    LowRankDirection fw_dir{-1.0, {{1.0, v_plus}}};
    const LineSearchResult fw = line_search(oracle, e, fw_dir, 1.0, cfg.line_search_tol);
    best = StepCandidate{StepKind::FW, apply_convex_step(s, v_plus, fw.theta), fw.value, fw.change,
                         std::move(fw_dir), fw.theta, 1};

    // Away: X + theta (X - v- v-^T); theta at the drop endpoint is a drop.
    if (cfg.rules.away && removable) {
      const double drop_theta = lambda / (1.0 - lambda);
      const double theta_max = std::min(drop_theta, kAwayThetaCap);
      const LineSearchResult away = line_search(oracle, e, away_dir, theta_max, cfg.line_search_tol);
      if (away.change < best->change) {
        if (away.theta >= drop_theta) {
          best = StepCandidate{StepKind::Drop, apply_drop(s, v_minus, lambda), away.value,
                               away.change, away_dir, away.theta, 1};
        } else {
          const double eta = away.theta / (1.0 + away.theta);
          best = StepCandidate{StepKind::Away, apply_away_step(s, v_minus, eta), away.value,
                               away.change, away_dir, away.theta, 1};
        }
      }
    }

    // Pairwise: X + gamma (u+ u+^T - u- u-^T).
    if (cfg.rules.pairwise) {
      const Vec u_minus = sampled ? *sampled : v_minus;
      const double gamma = max_removal_coeff(s, u_minus);
      Rng plus_rng = make_rng(kEigenKey, kStreamPairwisePlus, key);
      const EigPair up = pairwise_plus_direction(g, u_minus, cfg.beta, gamma, plus_rng, cfg.eig);
      flagged = flagged || !up.converged;
      LowRankDirection pw_dir{0.0, {{1.0, up.vector}, {-1.0, u_minus}}};
      const LineSearchResult pw = value_along(oracle, e, pw_dir, gamma);
      if (pw.change < best->change)
        best = StepCandidate{StepKind::Pairwise, apply_pairwise_step(s, u_minus, up.vector, gamma),
                             pw.value, pw.change, std::move(pw_dir), gamma, 2};
    }
  }

  StepCandidate& step = *best;
  double drift = consistency_residuals(step.next).excess();
  IterateState next = std::move(step.next);
  const bool rebuild = next.iter_since_refresh() >= cfg.refresh_period || !(drift <= cfg.drift_tol);
  if (rebuild) {
    next = refresh(next);
    drift = consistency_residuals(next).excess();
  }

  Evaluation eval = rebuild ? oracle.evaluate(next.x())
                            : oracle.evaluate_step(e, step.dir, step.theta, next.x());
  Rng vertex_rng = make_rng(kEigenKey, kStreamVertex, key);
  EigPair fw = fw_vertex(eval.gradient, vertex_rng, cfg.vertex_eig);
  const double gap = dual_gap(next.x(), eval.gradient, fw);

  TraceRow row;
  row.iter = iter;
  row.f_value = eval.value;
  row.dual_gap = gap;
  row.step_kind = step.kind;
  row.rank = next.rank();
  row.rank1_updates = step.rank1_updates;
  row.eig_flag = flagged;
  row.drift = drift;
  return IterationResult{SolverPoint{std::move(next), std::move(eval), std::move(fw), gap}, row};
}

IterationResult iterate_once(const IterateState& state, const ObjectiveOracle& oracle,
                             const SolverConfig& cfg, int iter) {
  return iterate_once(make_point(state, oracle, cfg, iter - 1), oracle, cfg, iter);
}

SolveResult solve(const SymMat& x0, const ObjectiveOracle& oracle, const SolverConfig& cfg,
                  const IterateObserver& observer) {
  cfg.validate();
  if (x0.dim() != oracle.dim()) throw Error(ErrorCode::DimensionMismatch, "x0 vs oracle size");
  const auto start = std::chrono::steady_clock::now();
  SolverPoint point = make_point(init_state(x0), oracle, cfg, 0);

  SolveResult out;
  out.initial_f = point.eval.value;
  out.initial_gap = point.gap;
  out.initial_rank = point.state.rank();
  out.converged = point.gap <= cfg.gap_tol;
  long long updates = 0;
  for (int t = 1; t <= cfg.max_iters && !out.converged; ++t) {
    IterationResult r = iterate_once(point, oracle, cfg, t);
    updates += r.row.rank1_updates;
    r.row.rank1_updates_cum = updates;
    r.row.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    point = std::move(r.point);
    if (observer) observer(r.row, point.state.x());
    out.trace.push_back(r.row);
    out.converged = r.row.dual_gap <= cfg.gap_tol;
  }
  out.x = point.state.x();
  return out;
}

SymMat initial_vertex(const ObjectiveOracle& oracle) {
  const Index n = oracle.dim();
  const SymMat center = SymMat::identity(n) / static_cast<double>(n);
  Rng rng = make_rng(kEigenKey, kStreamVertex, ~0ULL);
  const EigPair v = fw_vertex(oracle.gradient(center), rng);
  return SymMat::outer(v.vector);
}

ReferenceSolution reference_solution(const ObjectiveOracle& oracle, const SymMat& x0,
                                     SolverConfig cfg) {
  ReferenceSolution ref;
  ref.x = x0;
  ref.f = oracle.value(x0);
  ref.gap = INFINITY;
  const SolveResult r = solve(x0, oracle, cfg, [&](const TraceRow& row, const SymMat& x) {
    if (row.f_value < ref.f) {
      ref.f = row.f_value;
      ref.x = x;
      ref.gap = row.dual_gap;
    }
  });
  if (r.trace.empty()) {
    ref.gap = r.initial_gap;
  } else if (r.converged) {
    // The certified iterate, even if an earlier one is lower by rounding.
    ref.x = r.x;
    ref.f = r.trace.back().f_value;
    ref.gap = r.trace.back().dual_gap;
  }
  ref.iterations = static_cast<int>(r.trace.size());
  ref.budget_exceeded = !r.converged;
  return ref;
}

}  // namespace specfw

#include "specfw/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "specfw/error.hpp"

namespace specfw {

namespace {

constexpr std::uint64_t kInstanceFamily = 0x66616d696c79ULL;
constexpr std::uint64_t kSolverFamily = 0x736f6c766572ULL;
constexpr std::uint64_t kReferenceSeed = 0x7265666572656eULL;
constexpr int kSmoothnessSamples = 64;

constexpr double kFeasTol = 1e-9;
constexpr double kMonotoneSlack = 1e-12;
constexpr double kEnvelopeSlack = 1e-6;
constexpr double kGapSlack = 1e-9;

std::uint64_t derive(std::uint64_t base, std::uint64_t family, int k) {
  Rng rng = make_rng(base, family, static_cast<std::uint64_t>(k));
  return rng();
}

bool has_descent_guarantee(Algo algo) { return algo != Algo::BlockFW; }

bool tracks_pinv(Algo algo) {
  return algo == Algo::Alg1 || algo == Algo::Alg1Away || algo == Algo::Alg1NoDrop ||
         algo == Algo::Alg1Det;
}

SymMat corrupt(const SymMat& x, Fault fault) {
  switch (fault) {
    case Fault::Trace:
      return x * 1.01;
    case Fault::Psd: {
      // Push the smallest eigenvalue to -1e-6 and keep the trace.
      const SymEigen e = full_eigendecomposition(x);
      const Index n = x.dim();
      const double c = e.values(n - 1) + 1e-6;
      SymMat y = x;
      y.add_outer(e.vectors.col(n - 1), -c);
      y.add_outer(e.vectors.col(0), c);
      return y;
    }
    default:
      return x;
  }
}

}  // namespace

Index RunSpec::m() const {
  return static_cast<Index>(std::llround(m_factor * static_cast<double>(n * r_star)));
}

double RunSpec::effective_beta() const { return beta ? *beta : default_beta(n); }

void RunSpec::validate() const {
  if (n < 1 || r_star < 1 || r_star > n)
    throw Error(ErrorCode::InvalidShape, "need n >= rank >= 1");
  if (!(m_factor > 0.0) || m() < 1) throw Error(ErrorCode::InvalidShape, "m-factor too small");
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidConfig, "tau must be positive");
  if (repeats < 1) throw Error(ErrorCode::InvalidConfig, "repeats must be at least 1");
  baseline_config(*this, 0).validate(n);
}

bool RunSpec::same_instances(const RunSpec& o) const {
  return n == o.n && r_star == o.r_star && m() == o.m() && tau == o.tau && noise == o.noise &&
         instance_seed == o.instance_seed && repeats == o.repeats;
}

SensingProblem make_instance(const RunSpec& spec, int k) {
  return generate_problem(spec.n, spec.r_star, spec.m(), spec.tau, spec.noise,
                          derive(spec.instance_seed, kInstanceFamily, k));
}

BaselineConfig baseline_config(const RunSpec& spec, int k) {
  BaselineConfig cfg;
  cfg.algo = spec.algo;
  cfg.r = spec.block_r > 0 ? spec.block_r : static_cast<int>(spec.r_star);
  cfg.eta = spec.block_eta;
  cfg.solver.beta = spec.effective_beta();
  cfg.solver.max_iters = spec.max_iters;
  cfg.solver.gap_tol = spec.gap_tol;
  cfg.solver.seed = derive(spec.seed, kSolverFamily, k);
  cfg.solver.rules = rules_for(spec.algo);
  return cfg;
}

ReferenceSolution reference_for(const SensingOracle& oracle, const RunSpec& spec) {
  SolverConfig cfg;
  cfg.beta = spec.effective_beta();
  cfg.gap_tol = kReferenceGapTol;
  cfg.max_iters = kReferenceBudget;
  cfg.seed = kReferenceSeed;
  return sensing_reference(oracle, cfg);
}

SolveOutput run_solve(const RunSpec& spec) {
  spec.validate();
  SolveOutput out;
  std::vector<std::vector<CsvRow>> all;
  for (int k = 0; k < spec.repeats; ++k) {
    const auto problem = std::make_shared<const SensingProblem>(make_instance(spec, k));
    const SensingOracle oracle(problem, spec.effective_beta());
    RepeatResult rep;
    rep.ref = reference_for(oracle, spec);
    rep.run = run_algorithm(initial_vertex(oracle), oracle, baseline_config(spec, k));
    rep.rows = to_csv_rows(rep.run.trace, rep.ref.f);
    all.push_back(rep.rows);
    out.repeats.push_back(std::move(rep));
  }
  out.averaged = average_rows(all);
  if (!spec.out.empty()) {
    for (int k = 0; k < spec.repeats; ++k)
      write_csv(out.repeats[static_cast<std::size_t>(k)].rows, repeat_path(spec.out, k));
    write_csv(out.averaged, spec.out);
  }
  return out;
}

CompareOutput run_compare(const std::vector<RunSpec>& specs) {
  if (specs.empty()) throw Error(ErrorCode::InvalidConfig, "compare needs at least one algorithm");
  for (const RunSpec& s : specs) {
    s.validate();
    if (!s.same_instances(specs.front()))
      throw Error(ErrorCode::MismatchedInstances, "compared runs must share instance parameters");
  }
  const RunSpec& base = specs.front();
  std::vector<std::vector<std::vector<CsvRow>>> runs(specs.size());
  for (int k = 0; k < base.repeats; ++k) {
    const auto problem = std::make_shared<const SensingProblem>(make_instance(base, k));
    const SensingOracle ref_oracle(problem, base.effective_beta());
    const ReferenceSolution ref = reference_for(ref_oracle, base);
    for (std::size_t a = 0; a < specs.size(); ++a) {
      const SensingOracle oracle(problem, specs[a].effective_beta());
      const SolveResult r =
          run_algorithm(initial_vertex(oracle), oracle, baseline_config(specs[a], k));
      runs[a].push_back(to_csv_rows(r.trace, ref.f));
    }
  }
  CompareOutput out;
  for (std::size_t a = 0; a < specs.size(); ++a) {
    out.algos.push_back(specs[a].algo);
    out.averaged.push_back(average_rows(runs[a]));
  }
  return out;
}

void write_compare_csv(const CompareOutput& out, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  f << "iter";
  for (Algo a : out.algos) {
    const std::string name(to_string(a));
    f << ',' << name << "_f_value," << name << "_log10_error," << name << "_rank1_updates_cum";
  }
  f << '\n';
  std::size_t len = 0;
  for (const auto& rows : out.averaged) len = std::max(len, rows.size());
  for (std::size_t t = 0; t < len; ++t) {
    f << t + 1;
    for (const auto& rows : out.averaged) {
      if (rows.empty()) {
        f << ",,,";
        continue;
      }
      const CsvRow& r = rows[std::min(t, rows.size() - 1)];
      f << ',' << format_real(r.f_value) << ',' << format_real(r.log10_error) << ','
        << format_real(r.rank1_updates_cum);
    }
    f << '\n';
  }
  if (!f) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

std::optional<Fault> parse_fault(std::string_view s) {
  if (s == "none") return Fault::None;
  if (s == "trace") return Fault::Trace;
  if (s == "psd") return Fault::Psd;
  if (s == "monotone") return Fault::Monotone;
  return std::nullopt;
}

bool drop_budget_ok(int drops, int k, int rank_x1) { return 2 * drops <= k + rank_x1 - 1; }

double envelope_ratio(double f, double f_star, int k, int rank_x1, double beta) {
  const int t = k + 1;
  return (f - f_star) * static_cast<double>(t - rank_x1 + 4) / (8.0 * beta);
}

VerifyReport run_verify(const RunSpec& spec, Fault fault) {
  spec.validate();
  constexpr int kFaultIter = 5;
  VerifyReport rep;
  for (int k = 0; k < spec.repeats; ++k) {
    const auto problem = std::make_shared<const SensingProblem>(make_instance(spec, k));
    const SensingOracle oracle(problem, spec.effective_beta());
    const ReferenceSolution ref = reference_for(oracle, spec);
    const SmoothnessReport smooth = smoothness_check(
        oracle, oracle.beta(), kSmoothnessSamples, derive(spec.instance_seed, kInstanceFamily, k));
    const bool fallback = smooth.violations > 0;
    const double beta_env = fallback ? certified_beta(*problem) : oracle.beta();
    rep.envelope_fallback = rep.envelope_fallback || fallback;
    rep.envelope_beta = std::max(rep.envelope_beta, beta_env);

    const SymMat x0 = initial_vertex(oracle);
    const BaselineConfig cfg = baseline_config(spec, k);
    const int r1 = numerical_rank(x0);
    double f_prev = oracle.value(x0);
    int drops = 0;
    auto flag = [&](const char* name, int iter, const std::string& detail) {
      rep.violations.push_back(Violation{name, k, iter, detail});
    };

    run_algorithm(x0, oracle, cfg, [&](const TraceRow& row, const SymMat& x_in) {
      const int it = row.iter;
      const bool faulty = it == kFaultIter;
      const SymMat x = faulty ? corrupt(x_in, fault) : x_in;
      const double f = faulty && fault == Fault::Monotone ? row.f_value + 1.0 : row.f_value;

      const Feasibility feas = feasibility(x);
      if (feas.trace_error > kFeasTol)
        flag("feasibility.trace", it, "|Tr X - 1| = " + std::to_string(feas.trace_error));
      if (feas.min_eigenvalue < -kFeasTol)
        flag("feasibility.psd", it, "lambda_min = " + std::to_string(feas.min_eigenvalue));

      if (has_descent_guarantee(spec.algo)) {
        if (f > f_prev + kMonotoneSlack * std::max(1.0, std::abs(f_prev)))
          flag("monotonicity", it, "f rose by " + std::to_string(f - f_prev));
        const int t = it + 1;
        if (t >= r1 + 2) {
          const double ratio = envelope_ratio(f, ref.f, it, r1, beta_env);
          rep.envelope_ratio = std::max(rep.envelope_ratio, ratio);
          if (ratio > 1.0 + kEnvelopeSlack)
            flag("envelope", it, "ratio " + std::to_string(ratio));
        }
      }
      f_prev = f;

      if (row.step_kind == StepKind::Drop) ++drops;
      if (!drop_budget_ok(drops, it, r1))
        flag("drop_budget", it, std::to_string(drops) + " drops");

      if (tracks_pinv(spec.algo) && !(row.drift <= cfg.solver.drift_tol))
        flag("pinv_drift", it, "residual " + std::to_string(row.drift));

      if (row.dual_gap < f - ref.f - kGapSlack)
        flag("gap_certificate", it,
             "gap " + std::to_string(row.dual_gap) + " below error " + std::to_string(f - ref.f));
    });
  }
  return rep;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw Error(ErrorCode::InvalidShape, "line fit needs two or more matching points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorCode::InvalidShape, "line fit needs distinct x values");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

LineFit fit_tail(const std::vector<CsvRow>& rows, double fraction) {
  const auto count = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(rows.size())));
  const std::size_t first = rows.size() - std::min(rows.size(), count);
  std::vector<double> x, y;
  for (std::size_t i = first; i < rows.size(); ++i) {
    x.push_back(rows[i].iter);
    y.push_back(rows[i].log10_error);
  }
  return fit_line(x, y);
}

std::optional<CsvRow> first_reach(const std::vector<CsvRow>& rows, double level) {
  const double target = std::log10(level);
  for (const CsvRow& r : rows)
    if (r.log10_error <= target) return r;
  return std::nullopt;
}

}  // namespace specfw

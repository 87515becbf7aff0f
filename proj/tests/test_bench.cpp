#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "specfw/bench.hpp"
#include "specfw/error.hpp"

using namespace specfw;

namespace {

RunSpec small_spec(Algo algo) {
  RunSpec s;
  s.algo = algo;
  s.n = 12;
  s.r_star = 2;
  s.m_factor = 15;
  s.seed = 4;
  s.instance_seed = 4;
  s.max_iters = 60;
  return s;
}

std::filesystem::path temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "specfw_test_bench";
  std::filesystem::create_directories(dir);
  return dir;
}

bool has_violation(const VerifyReport& r, const std::string& name) {
  for (const Violation& v : r.violations)
    if (v.invariant == name) return true;
  return false;
}

}  // namespace

TEST(RunSpec, DerivedQuantitiesAndValidation) {
  RunSpec s;
  s.n = 60;
  s.r_star = 5;
  EXPECT_EQ(s.m(), 15 * 60 * 5);
  EXPECT_EQ(s.effective_beta(), 1800.0);
  s.beta = 7.0;
  EXPECT_EQ(s.effective_beta(), 7.0);

  RunSpec bad = s;
  bad.r_star = 61;
  try {
    bad.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidShape);
  }
  bad = s;
  bad.repeats = 0;
  EXPECT_THROW(bad.validate(), Error);
  bad = s;
  bad.algo = Algo::BlockFW;
  bad.block_eta = 0.0;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(RunSpec, SameInstancesIgnoresSolverFields) {
  RunSpec a = small_spec(Algo::Alg1), b = small_spec(Algo::FW);
  b.seed = 99;
  b.max_iters = 5;
  EXPECT_TRUE(a.same_instances(b));
  b.instance_seed = 5;
  EXPECT_FALSE(a.same_instances(b));
}

TEST(MakeInstance, RepeatsDifferAndAreReproducible) {
  const RunSpec s = small_spec(Algo::Alg1);
  EXPECT_EQ(make_instance(s, 0).a, make_instance(s, 0).a);
  EXPECT_NE(make_instance(s, 0).a, make_instance(s, 1).a);
  RunSpec other = s;
  other.seed = 1234;
  EXPECT_EQ(make_instance(other, 0).a, make_instance(s, 0).a);
  EXPECT_NE(baseline_config(other, 0).solver.seed, baseline_config(s, 0).solver.seed);
}

TEST(BaselineConfigFromRunSpec, BlockRankDefaultsToRStar) {
  RunSpec s = small_spec(Algo::BlockFW);
  EXPECT_EQ(baseline_config(s, 0).r, 2);
  s.block_r = 4;
  EXPECT_EQ(baseline_config(s, 0).r, 4);
  EXPECT_EQ(baseline_config(s, 0).eta, 0.3);
}

TEST(RunSolve, WritesPerRepeatAndAveragedFiles) {
  RunSpec s = small_spec(Algo::Alg1);
  s.repeats = 3;
  s.out = temp_dir() / "solve.csv";
  const SolveOutput out = run_solve(s);
  ASSERT_EQ(out.repeats.size(), 3u);
  const auto averaged = read_csv(s.out);
  ASSERT_EQ(averaged.size(), out.averaged.size());
  std::vector<std::vector<CsvRow>> reps;
  for (int k = 0; k < 3; ++k) {
    reps.push_back(read_csv(repeat_path(s.out, k)));
    EXPECT_LE(reps.back().size(), 60u);
    double prev = INFINITY;
    for (const CsvRow& r : reps.back()) {
      EXPECT_LE(r.f_value, prev + 1e-12 * std::max(1.0, std::abs(prev)));
      prev = r.f_value;
    }
  }
  for (std::size_t t = 0; t < averaged.size(); ++t) {
    double mean = 0.0;
    for (const auto& rep : reps) mean += rep[std::min(t, rep.size() - 1)].log10_error;
    EXPECT_NEAR(averaged[t].log10_error, mean / 3.0, 1e-12);
  }
}

TEST(RunSolve, OutputIsDeterministicApartFromTiming) {
  RunSpec s = small_spec(Algo::Alg1);
  s.out = temp_dir() / "det_a.csv";
  run_solve(s);
  s.out = temp_dir() / "det_b.csv";
  run_solve(s);
  const auto a = read_csv(temp_dir() / "det_a.csv");
  const auto b = read_csv(temp_dir() / "det_b.csv");
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CsvRow x = a[i], y = b[i];
    x.elapsed_s = y.elapsed_s = 0.0;
    EXPECT_EQ(format_row(x), format_row(y));
  }
}

TEST(RunSolve, DeterministicVariantIgnoresSeed) {
  RunSpec s = small_spec(Algo::Alg1Det);
  s.seed = 1;
  const SolveOutput a = run_solve(s);
  s.seed = 2;
  const SolveOutput b = run_solve(s);
  ASSERT_EQ(a.averaged.size(), b.averaged.size());
  for (std::size_t i = 0; i < a.averaged.size(); ++i) {
    CsvRow x = a.averaged[i], y = b.averaged[i];
    x.elapsed_s = y.elapsed_s = 0.0;
    EXPECT_EQ(format_row(x), format_row(y));
  }
}

TEST(RunCompare, SharedInstancesAndWideCsv) {
  std::vector<RunSpec> specs = {small_spec(Algo::Alg1), small_spec(Algo::FW), small_spec(Algo::BlockFW)};
  const CompareOutput out = run_compare(specs);
  ASSERT_EQ(out.averaged.size(), 3u);
  // Block-FW spends r rank-one updates per iteration, FW one.
  EXPECT_EQ(out.averaged[1].back().rank1_updates_cum, 60.0);
  EXPECT_EQ(out.averaged[2].back().rank1_updates_cum, 120.0);

  const auto path = temp_dir() / "compare.csv";
  write_compare_csv(out, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header,
            "iter,alg1_f_value,alg1_log10_error,alg1_rank1_updates_cum,fw_f_value,fw_log10_error,"
            "fw_rank1_updates_cum,blockfw_f_value,blockfw_log10_error,blockfw_rank1_updates_cum");
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, 60);

  specs[1].tau = 1.0;
  try {
    run_compare(specs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MismatchedInstances);
  }
}

TEST(RunVerify, DefaultInstancePasses) {
  for (Algo algo : {Algo::Alg1, Algo::FW, Algo::BlockFW, Algo::Alg1Det}) {
    const VerifyReport r = run_verify(small_spec(algo));
    for (const Violation& v : r.violations) ADD_FAILURE() << v.invariant << " at " << v.iter << ": " << v.detail;
    EXPECT_TRUE(r.ok());
    if (algo != Algo::BlockFW) {
      EXPECT_GT(r.envelope_ratio, 0.0);
      EXPECT_LE(r.envelope_ratio, 1.0 + 1e-6);
    }
  }
}

TEST(RunVerify, InjectedFaultsAreNamed) {
  const RunSpec s = small_spec(Algo::Alg1);
  EXPECT_TRUE(has_violation(run_verify(s, Fault::Trace), "feasibility.trace"));
  EXPECT_TRUE(has_violation(run_verify(s, Fault::Psd), "feasibility.psd"));
  EXPECT_TRUE(has_violation(run_verify(s, Fault::Monotone), "monotonicity"));
  EXPECT_EQ(parse_fault("psd"), Fault::Psd);
  EXPECT_FALSE(parse_fault("nope").has_value());
}

TEST(DropBudget, Boundary) {
  // After k steps from a rank-one start at most k/2 drops.
  EXPECT_TRUE(drop_budget_ok(0, 1, 1));
  EXPECT_FALSE(drop_budget_ok(1, 1, 1));
  EXPECT_TRUE(drop_budget_ok(1, 2, 1));
  EXPECT_TRUE(drop_budget_ok(2, 2, 3));
  EXPECT_FALSE(drop_budget_ok(3, 2, 3));
}

TEST(EnvelopeRatio, Arithmetic) {
  // t = k + 1 = 10, rank(X_1) = 1: (f - f*)(10 - 1 + 4) / (8 beta).
  EXPECT_DOUBLE_EQ(envelope_ratio(3.0, 1.0, 9, 1, 2.0), 2.0 * 13.0 / 16.0);
}

TEST(FitLine, ExactLineAndNoise) {
  const LineFit f = fit_line({1, 2, 3, 4}, {1, -1, -3, -5});
  EXPECT_DOUBLE_EQ(f.slope, -2.0);
  EXPECT_DOUBLE_EQ(f.intercept, 3.0);
  EXPECT_DOUBLE_EQ(f.r2, 1.0);
  EXPECT_EQ(fit_line({1, 2, 3}, {4, 4, 4}).r2, 1.0);
  EXPECT_LT(fit_line({1, 2, 3, 4}, {0, 1, 0, 1}).r2, 0.5);
  EXPECT_THROW(fit_line({1}, {1}), Error);
  EXPECT_THROW(fit_line({1, 1}, {1, 2}), Error);
}

TEST(FitTail, UsesLastFraction) {
  std::vector<CsvRow> rows(10);
  for (int i = 0; i < 10; ++i) {
    rows[i].iter = i + 1;
    rows[i].log10_error = i < 4 ? 0.0 : -1.0 * (i + 1);
  }
  const LineFit f = fit_tail(rows, 0.6);
  EXPECT_NEAR(f.slope, -1.0, 1e-12);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
}

TEST(FirstReach, FindsCrossing) {
  std::vector<CsvRow> rows(5);
  for (int i = 0; i < 5; ++i) {
    rows[i].iter = i + 1;
    rows[i].log10_error = -2.0 * i;
  }
  ASSERT_TRUE(first_reach(rows, 1e-5).has_value());
  EXPECT_EQ(first_reach(rows, 1e-5)->iter, 4);
  EXPECT_FALSE(first_reach(rows, 1e-9).has_value());
}

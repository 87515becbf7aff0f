#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <memory>

#include "oracles.hpp"
#include "specfw/bench.hpp"
#include "specfw/error.hpp"
#include "specfw/sensing.hpp"

using namespace specfw;

namespace {

std::shared_ptr<const SensingProblem> problem(Index n, Index r, Index m, std::uint64_t seed,
                                              double tau = 0.5, bool noise = true) {
  return std::make_shared<const SensingProblem>(generate_problem(n, r, m, tau, noise, seed));
}

/// 1/2 sum_i (tau a_i^T X a_i - b_i)^2 term by term.
double direct_value(const SensingProblem& p, const Mat& x) {
  double s = 0.0;
  for (Index i = 0; i < p.m; ++i) {
    const Vec a = p.a.row(i).transpose();
    const double r = p.tau * a.dot(x * a) - p.b(i);
    s += 0.5 * r * r;
  }
  return s;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("specfw_test_" + name);
}

}  // namespace

TEST(GenerateProblem, ConstructionInvariants) {
  const auto p = problem(4, 1, 30, 123);
  EXPECT_NEAR(p->x_sharp.trace(), 1.0, 1e-12);
  EXPECT_EQ(oracle::rank(p->x_sharp.mat()), 1);
  EXPECT_GE(oracle::min_eigenvalue(p->x_sharp.mat()), -1e-14);
  const auto q = problem(4, 1, 30, 123);
  EXPECT_EQ(p->a, q->a);
  EXPECT_EQ(p->b, q->b);
  EXPECT_EQ(p->x_sharp.mat(), q->x_sharp.mat());
  EXPECT_NE(problem(4, 1, 30, 124)->a, p->a);

  const auto r = problem(20, 5, 100, 9);
  EXPECT_EQ(oracle::rank(r->x_sharp.mat()), 5);
  EXPECT_NEAR(r->x_sharp.trace(), 1.0, 1e-12);
}

TEST(GenerateProblem, NoiseMagnitude) {
  const auto clean = problem(10, 2, 200, 5, 0.5, false);
  const auto noisy = problem(10, 2, 200, 5, 0.5, true);
  const Vec b_sharp = ((clean->a * clean->x_sharp.mat()).cwiseProduct(clean->a)).rowwise().sum();
  EXPECT_LE((clean->b - b_sharp).norm(), 1e-12 * b_sharp.norm());
  EXPECT_NEAR((noisy->b - b_sharp).norm(), 0.5 * b_sharp.norm(), 1e-10 * b_sharp.norm());
}

TEST(GenerateProblem, RejectsBadShapes) {
  for (auto [n, r, m] : std::vector<std::tuple<Index, Index, Index>>{{3, 4, 10}, {3, 0, 10}, {3, 1, 0}}) {
    try {
      generate_problem(n, r, m, 0.5, true, 1);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidShape);
    }
  }
}

TEST(SensingOracle, GroundTruthIsOptimalWithoutNoise) {
  const auto p = problem(8, 2, 200, 6, 1.0, false);
  const SensingOracle f(p);
  EXPECT_LE(f.value(p->x_sharp), 1e-20);
  EXPECT_LE(f.gradient(p->x_sharp).frobenius(), 1e-10);
}

TEST(SensingOracle, SingleMeasurementArithmetic) {
  auto p = std::make_shared<SensingProblem>();
  p->n = 3;
  p->m = 1;
  p->r_star = 1;
  p->tau = 1.0;
  p->a = Mat::Zero(1, 3);
  p->a(0, 0) = 1.0;
  p->b = Vec::Zero(1);
  p->x_sharp = SymMat::outer(Vec::Unit(3, 0));
  const SensingOracle f(p);
  const SymMat x = SymMat::outer(Vec::Unit(3, 0));
  EXPECT_DOUBLE_EQ(f.value(x), 0.5);
  EXPECT_EQ(f.gradient(x).mat(), x.mat());
  EXPECT_EQ(f.beta(), default_beta(3));
}

TEST(SensingOracle, ValueMatchesDirectSum) {
  const auto p = problem(9, 2, 120, 7);
  const SensingOracle f(p);
  Rng rng = make_rng(70, 0);
  for (int k = 0; k < 10; ++k) {
    const Mat x = oracle::random_feasible(9, 1 + k % 4, rng);
    EXPECT_NEAR(f.value(SymMat(x)), direct_value(*p, x), 1e-12 * direct_value(*p, x));
    EXPECT_EQ(f.evaluate(SymMat(x)).value, f.value(SymMat(x)));
  }
  EXPECT_THROW(f.value(SymMat::identity(4)), Error);
}

TEST(SensingOracle, GradientMatchesFiniteDifferences) {
  Rng rng = make_rng(71, 0);
  for (int k = 0; k < 20; ++k) {
    const Index n = 6 + k % 5;
    const auto p = problem(n, 1 + k % 3, 15 * n, 700 + k);
    const SensingOracle f(p);
    const SymMat x(oracle::random_feasible(n, 1 + k % n, rng));
    const SymMat d(oracle::random_symmetric(n, rng));
    const double an = f.gradient(x).dot(d);
    const double fd = oracle::central_difference([&](const Mat& y) { return direct_value(*p, y); },
                                                 x.mat(), d.mat(), 1e-6);
    EXPECT_LE(std::abs(an - fd), 1e-5 * (1.0 + std::abs(an)));
  }
}

TEST(SensingOracle, DirectionalCoefficientsAreExact) {
  const auto p = problem(8, 2, 200, 8);
  const SensingOracle f(p);
  Rng rng = make_rng(72, 0);
  const SymMat base(oracle::random_feasible(8, 3, rng));
  const Quadratic zero = *f.directional(base, SymMat::zero(8));
  EXPECT_EQ(zero.a, 0.0);
  EXPECT_EQ(zero.b, 0.0);
  EXPECT_NEAR(zero.c, f.value(base), 1e-12 * f.value(base));

  const SymMat dir = SymMat::outer(random_unit_vector(8, rng)) - base;
  const Quadratic q = *f.directional(base, dir);
  EXPECT_GE(q.a, 0.0);
  std::uniform_real_distribution<double> theta(-1.0, 2.0);
  for (int k = 0; k < 100; ++k) {
    const double t = theta(rng);
    const double direct = direct_value(*p, (base + dir * t).mat());
    EXPECT_LE(std::abs(q(t) - direct), 1e-10 * std::max(1.0, direct));
  }

  const LineSearchResult exact = minimize_quadratic(q, 1.0);
  const LineSearchResult golden =
      golden_section([&](double t) { return f.value(base + dir * t); }, 1.0, 1e-12);
  // Near a minimum f is flat to rounding over a theta window of width
  // ~sqrt(eps |f| / a), so golden section only resolves theta that far.
  const double window = std::sqrt(1e-15 * std::max(1.0, std::abs(exact.value)) / std::max(q.a, 1e-300));
  EXPECT_NEAR(exact.theta, golden.theta, 1e-8 + window);
  EXPECT_LE(exact.value, f.value(base + dir * golden.theta) + 1e-12 * std::abs(exact.value));
}

TEST(SensingOracle, LowRankQueriesMatchDense) {
  const auto p = problem(10, 2, 300, 9);
  const SensingOracle f(p);
  Rng rng = make_rng(73, 0);
  const SymMat x(oracle::random_feasible(10, 3, rng));
  const Evaluation at = f.evaluate(x);
  const Vec u = random_unit_vector(10, rng), w = random_unit_vector(10, rng);
  for (const LowRankDirection& dir :
       {LowRankDirection{-1.0, {{1.0, u}}}, LowRankDirection{0.0, {{1.0, u}, {-1.0, w}}},
        LowRankDirection{1.0, {{-1.0, w}}}}) {
    const SymMat dense = dir.dense(x);
    const Quadratic a = *f.directional(at, dir);
    const Quadratic b = *f.directional(x, dense);
    EXPECT_NEAR(a.a, b.a, 1e-10 * std::max(1.0, b.a));
    EXPECT_NEAR(a.b, b.b, 1e-10 * std::max(1.0, std::abs(b.b)));
    const SymMat xn = x + dense * 0.2;
    const Evaluation step = f.evaluate_step(at, dir, 0.2, xn);
    const Evaluation fresh = f.evaluate(xn);
    EXPECT_NEAR(step.value, fresh.value, 1e-10 * fresh.value);
    EXPECT_LE((step.gradient.mat() - fresh.gradient.mat()).norm(), 1e-10 * fresh.gradient.frobenius());
  }
}

TEST(SensingOracle, ConvexityProbe) {
  const auto p = problem(8, 2, 200, 10);
  const SensingOracle f(p);
  Rng rng = make_rng(74, 0);
  for (int k = 0; k < 100; ++k) {
    const SymMat x(oracle::random_feasible(8, 1 + k % 8, rng));
    const SymMat y(oracle::random_feasible(8, 1 + (k / 8) % 8, rng));
    EXPECT_LE(f.value((x + y) * 0.5), 0.5 * f.value(x) + 0.5 * f.value(y) + 1e-12);
  }
}

TEST(Smoothness, CertifiedBetaAlwaysHolds) {
  const auto p = problem(12, 2, 360, 11);
  const SensingOracle f(p);
  const SmoothnessReport rep = smoothness_check(f, certified_beta(*p), 200, 1);
  EXPECT_EQ(rep.samples, 200);
  EXPECT_EQ(rep.violations, 0);
  EXPECT_GT(rep.max_curvature, 0.0);
  EXPECT_LE(rep.max_curvature, certified_beta(*p));
}

TEST(Smoothness, CurvatureIsExactSecondDifference) {
  const auto p = problem(7, 2, 100, 12);
  const SensingOracle f(p);
  Rng rng = make_rng(75, 0);
  const SymMat x(oracle::random_feasible(7, 2, rng));
  const SymMat d(oracle::random_symmetric(7, rng));
  const double h = 1e-2;
  const double second = (direct_value(*p, (x + d * h).mat()) - 2.0 * direct_value(*p, x.mat()) +
                         direct_value(*p, (x - d * h).mat())) /
                        (h * h);
  EXPECT_NEAR(curvature_along(*p, d) * d.frobenius() * d.frobenius(), second, 1e-6 * second);
}

TEST(Smoothness, ViolationsAreDetectedForTinyBeta) {
  const auto p = problem(12, 2, 360, 13);
  const SmoothnessReport rep = smoothness_check(SensingOracle(p), 1e-3, 50, 2);
  EXPECT_GT(rep.violations, 0);
}

TEST(Complementarity, DiagonalGradient) {
  Vec d(3);
  d << 2, 1, 0;
  const LinearOracle f(SymMat::diagonal(d));
  const ComplementarityReport rep = measure_strict_complementarity(f, SymMat::outer(Vec::Unit(3, 2)), 1);
  EXPECT_NEAR(rep.delta, 1.0, 1e-14);
  EXPECT_NEAR(rep.lambda_rstar, 1.0, 1e-14);
}

TEST(Complementarity, NoNoiseInstanceHasNoGap) {
  const auto p = problem(20, 3, 600, 14, 1.0, false);
  const SensingOracle f(p);
  const ComplementarityReport rep = measure_strict_complementarity(f, p->x_sharp, 3);
  EXPECT_LE(std::abs(rep.delta), 1e-8);
  EXPECT_GT(rep.lambda_rstar, 0.0);
}

TEST(Complementarity, NoisyInstanceHasPositiveGap) {
  const auto p = problem(15, 2, 450, 15);
  const SensingOracle f(p);
  SolverConfig cfg;
  cfg.beta = f.beta();
  cfg.gap_tol = kReferenceGapTol;
  cfg.max_iters = kReferenceBudget;
  const ReferenceSolution ref = sensing_reference(f, cfg);
  ASSERT_FALSE(ref.budget_exceeded);
  const ComplementarityReport rep = measure_strict_complementarity(f, ref.x, 2);
  EXPECT_GT(rep.delta, 0.0);
  EXPECT_LE(ref.gap, kReferenceGapTol);
}

TEST(SensingReference, SmallInstanceIsCertified) {
  const auto p = problem(6, 1, 90, 16);
  const SensingOracle f(p);
  SolverConfig cfg;
  cfg.beta = f.beta();
  cfg.gap_tol = kReferenceGapTol;
  cfg.max_iters = kReferenceBudget;
  const ReferenceSolution ref = sensing_reference(f, cfg);
  EXPECT_FALSE(ref.budget_exceeded);
  EXPECT_LE(ref.gap, 1e-11);
  EXPECT_NEAR(ref.f, f.value(ref.x), 1e-9 * std::max(1.0, ref.f));
  EXPECT_TRUE(feasibility(ref.x).ok());
}

TEST(SensingReference, NoNoiseUsesGroundTruth) {
  const auto p = problem(10, 2, 200, 17, 1.0, false);
  const SensingOracle f(p);
  SolverConfig cfg;
  cfg.beta = f.beta();
  cfg.gap_tol = kReferenceGapTol;
  const ReferenceSolution ref = sensing_reference(f, cfg);
  EXPECT_EQ(ref.iterations, 0);
  EXPECT_EQ(ref.x.mat(), p->x_sharp.mat());
  EXPECT_LE(ref.f, 1e-20);
}

TEST(ProblemIo, RoundTripIsBitExact) {
  const auto p = problem(7, 2, 50, 18);
  const auto path = temp_file("roundtrip.bin");
  write_problem(*p, path);
  const SensingProblem q = read_problem(path);
  EXPECT_EQ(q.n, p->n);
  EXPECT_EQ(q.m, p->m);
  EXPECT_EQ(q.r_star, p->r_star);
  EXPECT_EQ(q.tau, p->tau);
  EXPECT_EQ(q.noise, p->noise);
  EXPECT_EQ(q.seed, p->seed);
  EXPECT_EQ(q.a, p->a);
  EXPECT_EQ(q.b, p->b);
  EXPECT_EQ(q.x_sharp.mat(), p->x_sharp.mat());
  std::filesystem::remove(path);
}

TEST(ProblemIo, Errors) {
  try {
    read_problem(temp_file("does_not_exist.bin"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
  const auto path = temp_file("garbage.bin");
  std::ofstream(path) << "not an instance";
  EXPECT_THROW(read_problem(path), Error);

  const auto p = problem(5, 1, 20, 19);
  write_problem(*p, path);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 8);
  EXPECT_THROW(read_problem(path), Error);
  std::filesystem::remove(path);
}

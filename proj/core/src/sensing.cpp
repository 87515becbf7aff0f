#include "specfw/sensing.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "specfw/error.hpp"

namespace specfw {

namespace {

constexpr std::uint64_t kInstanceStream = 0x696e7374616e6365ULL;
constexpr char kMagic[8] = {'S', 'P', 'F', 'W', 'S', 'N', 'S', '1'};

static_assert(std::endian::native == std::endian::little,
              "instance files are written in host byte order, which must be little-endian");

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw Error(ErrorCode::IoError, "truncated instance file");
  return v;
}

void put_doubles(std::ofstream& out, const double* data, std::size_t count) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
}

void get_doubles(std::ifstream& in, double* data, std::size_t count) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw Error(ErrorCode::IoError, "truncated instance file");
}

}  // namespace

SensingProblem generate_problem(Index n, Index r_star, Index m, double tau, bool noise,
                                std::uint64_t seed) {
  if (n < 1 || r_star < 1 || r_star > n || m < 1)
    throw Error(ErrorCode::InvalidShape, "need n >= r_star >= 1 and m >= 1");
  Rng rng = make_rng(seed, kInstanceStream);
  std::normal_distribution<double> normal;

  Mat u(n, r_star);
  for (Index j = 0; j < r_star; ++j)
    for (Index i = 0; i < n; ++i) u(i, j) = normal(rng);
  u /= u.norm();

  SensingProblem p;
  p.n = n;
  p.m = m;
  p.r_star = r_star;
  p.tau = tau;
  p.noise = noise;
  p.seed = seed;
  p.x_sharp = SymMat(Mat(u * u.transpose()));
  p.a.resize(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) p.a(i, j) = normal(rng);

  const Mat au = p.a * u;
  const Vec b_sharp = au.rowwise().squaredNorm();
  p.b = b_sharp;
  if (noise) p.b += (0.5 * b_sharp.norm()) * random_unit_vector(m, rng);
  return p;
}

double default_beta(Index n) { return 0.5 * static_cast<double>(n) * static_cast<double>(n); }

double certified_beta(const SensingProblem& p) {
  return p.tau * p.tau * p.a.rowwise().squaredNorm().squaredNorm();
}

double curvature_along(const SensingProblem& p, const SymMat& d) {
  const Vec forms = ((p.a * d.mat()).cwiseProduct(p.a)).rowwise().sum();
  const double dn = d.frobenius();
  return dn > 0.0 ? p.tau * p.tau * forms.squaredNorm() / (dn * dn) : 0.0;
}

SensingOracle::SensingOracle(std::shared_ptr<const SensingProblem> problem, double beta)
    : p_(std::move(problem)), beta_(beta > 0.0 ? beta : default_beta(p_->n)) {}

Vec SensingOracle::quadratic_forms(const SymMat& d) const {
  if (d.dim() != p_->n) throw Error(ErrorCode::DimensionMismatch, "sensing: matrix size");
  return ((p_->a * d.mat()).cwiseProduct(p_->a)).rowwise().sum();
}

Vec SensingOracle::quadratic_forms(const Evaluation& at, const LowRankDirection& dir) const {
  Vec d = Vec::Zero(p_->m);
  if (dir.base_coeff != 0.0) {
    if (at.cache.size() == p_->m)
      d = dir.base_coeff * at.cache;
    else
      d = dir.base_coeff * quadratic_forms(at.x);
  }
  for (const auto& [w, v] : dir.terms) d += w * (p_->a * v).cwiseAbs2();
  return d;
}

double SensingOracle::value(const SymMat& x) const {
  const Vec rho = p_->tau * quadratic_forms(x) - p_->b;
  return 0.5 * rho.squaredNorm();
}

SymMat SensingOracle::gradient(const SymMat& x) const { return evaluate(x).gradient; }

Evaluation SensingOracle::finish(const SymMat& x, Vec q) const {
  const Vec rho = p_->tau * q - p_->b;
  Evaluation e;
  e.x = x;
  e.value = 0.5 * rho.squaredNorm();
  const Mat weighted = rho.asDiagonal() * p_->a;
  Mat g = Mat::Zero(p_->n, p_->n);
  g.triangularView<Eigen::Lower>() = p_->tau * (p_->a.transpose() * weighted);
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  e.gradient = SymMat(std::move(g));
  e.cache = std::move(q);
  return e;
}

Evaluation SensingOracle::evaluate(const SymMat& x) const { return finish(x, quadratic_forms(x)); }

Evaluation SensingOracle::evaluate_step(const Evaluation& at, const LowRankDirection& dir,
                                        double theta, const SymMat& x_new) const {
  if (at.cache.size() != p_->m) return evaluate(x_new);
  return finish(x_new, at.cache + theta * quadratic_forms(at, dir));
}

std::optional<Quadratic> SensingOracle::directional(const SymMat& base, const SymMat& dir) const {
  const Vec rho = p_->tau * quadratic_forms(base) - p_->b;
  const Vec d = quadratic_forms(dir);
  const double t = p_->tau;
  return Quadratic{0.5 * t * t * d.squaredNorm(), t * rho.dot(d), 0.5 * rho.squaredNorm()};
}

std::optional<Quadratic> SensingOracle::directional(const Evaluation& at,
                                                    const LowRankDirection& dir) const {
  const Vec q = at.cache.size() == p_->m ? at.cache : quadratic_forms(at.x);
  const Vec rho = p_->tau * q - p_->b;
  const Vec d = quadratic_forms(at, dir);
  const double t = p_->tau;
  return Quadratic{0.5 * t * t * d.squaredNorm(), t * rho.dot(d), at.value};
}

namespace {

SymMat random_feasible(Index n, Rng& rng) {
  std::uniform_int_distribution<Index> rank_dist(1, n);
  const Index k = rng() % 2 == 0 ? 1 : rank_dist(rng);
  Mat u(n, k);
  for (Index j = 0; j < k; ++j) u.col(j) = gaussian_vector(n, rng);
  Mat x = u * u.transpose();
  x /= x.trace();
  return SymMat(std::move(x));
}

}  // namespace

SmoothnessReport smoothness_check(const SensingOracle& oracle, double beta, int samples,
                                  std::uint64_t seed) {
  const SensingProblem& p = oracle.problem();
  Rng rng = make_rng(seed, kInstanceStream, 1);
  SmoothnessReport rep;
  for (int k = 0; k < samples; ++k) {
    const SymMat x = random_feasible(p.n, rng);
    const SymMat y = random_feasible(p.n, rng);
    const SymMat d = y - x;
    const Evaluation ex = oracle.evaluate(x);
    const double fy = oracle.value(y);
    const double dn2 = d.frobenius() * d.frobenius();
    const double bound = ex.value + ex.gradient.dot(d) + 0.5 * beta * dn2;
    ++rep.samples;
    if (fy > bound + 1e-12 * std::max(1.0, std::abs(fy))) ++rep.violations;
    rep.max_curvature = std::max(rep.max_curvature, curvature_along(p, d));
  }
  return rep;
}

ReferenceSolution sensing_reference(const SensingOracle& oracle, SolverConfig cfg) {
  const SensingProblem& p = oracle.problem();
  const Feasibility feas = feasibility(p.x_sharp);
  if (feas.ok(kFeasibilityTol)) {
    const SolverPoint at = make_point(init_state(p.x_sharp), oracle, cfg, 0);
    if (at.gap <= cfg.gap_tol)
      return ReferenceSolution{p.x_sharp, at.eval.value, at.gap, 0, false};
  }
  return reference_solution(oracle, initial_vertex(oracle), cfg);
}

ComplementarityReport measure_strict_complementarity(const ObjectiveOracle& oracle,
                                                     const SymMat& x_ref, Index r_star) {
  const Index n = oracle.dim();
  if (r_star < 1 || r_star > n) throw Error(ErrorCode::InvalidShape, "r_star out of range");
  ComplementarityReport rep;
  const SymEigen g = full_eigendecomposition(oracle.gradient(x_ref));
  rep.delta = r_star < n ? g.values(n - r_star - 1) - g.values(n - r_star) : 0.0;
  rep.lambda_rstar = full_eigendecomposition(x_ref).values(r_star - 1);
  return rep;
}

void write_problem(const SensingProblem& p, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out.write(kMagic, sizeof(kMagic));
  put<std::int64_t>(out, p.n);
  put<std::int64_t>(out, p.m);
  put<std::int64_t>(out, p.r_star);
  put<double>(out, p.tau);
  put<std::uint8_t>(out, p.noise ? 1 : 0);
  put<std::uint64_t>(out, p.seed);
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> a = p.a;
  put_doubles(out, a.data(), static_cast<std::size_t>(a.size()));
  put_doubles(out, p.b.data(), static_cast<std::size_t>(p.b.size()));
  put_doubles(out, p.x_sharp.mat().data(), static_cast<std::size_t>(p.x_sharp.mat().size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

SensingProblem read_problem(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw Error(ErrorCode::IoError, path.string() + " is not a sensing instance file");
  SensingProblem p;
  p.n = get<std::int64_t>(in);
  p.m = get<std::int64_t>(in);
  p.r_star = get<std::int64_t>(in);
  p.tau = get<double>(in);
  p.noise = get<std::uint8_t>(in) != 0;
  p.seed = get<std::uint64_t>(in);
  if (p.n < 1 || p.m < 1 || p.r_star < 1 || p.r_star > p.n || p.n > (1 << 16) || p.m > (1 << 26))
    throw Error(ErrorCode::IoError, "corrupt instance header in " + path.string());
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> a(p.m, p.n);
  get_doubles(in, a.data(), static_cast<std::size_t>(a.size()));
  p.a = a;
  p.b.resize(p.m);
  get_doubles(in, p.b.data(), static_cast<std::size_t>(p.m));
  Mat xs(p.n, p.n);
  get_doubles(in, xs.data(), static_cast<std::size_t>(xs.size()));
  p.x_sharp = SymMat(std::move(xs));
  return p;
}

}  // namespace specfw

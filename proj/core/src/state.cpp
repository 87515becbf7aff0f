#include "specfw/state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "specfw/error.hpp"

namespace specfw {

namespace {

constexpr double kNotInImageTol = 1e-6;
// Away steps this close to the removal limit lose the O(n^2) update's
// accuracy; they are rebuilt from an eigen-decomposition instead.
constexpr double kAwayConditioning = 1e-8;

void require_unit(const Vec& v, Index n, const char* what) {
  if (v.size() != n) throw Error(ErrorCode::DimensionMismatch, what);
  if (std::abs(v.norm() - 1.0) > 1e-8)
    throw Error(ErrorCode::InvalidConfig, std::string(what) + ": vector must have unit norm");
}

SymMat remove_from_projector(const SymMat& proj, const Vec& z) {
  SymMat out = proj;
  return out.add_outer(z, -1.0 / z.squaredNorm());
}

}  // namespace

double ConsistencyResiduals::worst() const {
  return std::max({reconstruction, pinv_identity, proj_vs_pinv, proj_idempotent});
}

double ConsistencyResiduals::excess() const { return std::max(0.0, worst() - rounding); }

IterateState IterateState::unchecked(SymMat x, SymMat pinv, SymMat proj, int rank) {
  return IterateState(std::move(x), std::move(pinv), std::move(proj), rank, 0);
}

Feasibility feasibility(const SymMat& x) {
  const SymEigen eig = full_eigendecomposition(x);
  return {std::abs(x.trace() - 1.0), eig.values(eig.values.size() - 1)};
}

int numerical_rank(const SymMat& x) {
  const SymEigen eig = full_eigendecomposition(x);
  const double top = eig.values(0);
  if (!(top > 0.0)) return 0;
  int r = 0;
  for (Index i = 0; i < eig.values.size(); ++i)
    if (eig.values(i) > kRankCutoff * top) ++r;
  return r;
}

IterateState init_state(const SymMat& x0) {
  const Feasibility f = feasibility(x0);
  if (!f.ok())
    throw Error(ErrorCode::InfeasibleInput,
                "initial point must have unit trace and be PSD (trace error " +
                    std::to_string(f.trace_error) + ", lambda_min " +
                    std::to_string(f.min_eigenvalue) + ")");
  return refresh(IterateState(x0, SymMat(x0.dim()), SymMat(x0.dim()), 0, 0));
}

IterateState refresh(const IterateState& s) {
  const Index n = s.dim();
  const SymEigen eig = full_eigendecomposition(s.x());
  const double top = eig.values(0);
  SymMat pinv(n);
  SymMat proj(n);
  int rank = 0;
  for (Index i = 0; i < n; ++i) {
    if (!(top > 0.0) || eig.values(i) <= kRankCutoff * top) break;
    const Vec v = eig.vectors.col(i);
    pinv.add_outer(v, 1.0 / eig.values(i));
    proj.add_outer(v, 1.0);
    ++rank;
  }
  return IterateState(s.x(), std::move(pinv), std::move(proj), rank, 0);
}

double max_removal_coeff(const IterateState& s, const Vec& v) {
  if (v.size() != s.dim()) throw Error(ErrorCode::DimensionMismatch, "max_removal_coeff");
  if ((s.proj() * v - v).norm() > kNotInImageTol)
    throw Error(ErrorCode::NotInImage, "direction is not in Im(X)");
  const double q = s.pinv().quad(v);
  if (!(q > 0.0)) throw Error(ErrorCode::NotInImage, "v^T X^+ v must be positive");
  return 1.0 / q;
}

IterateState apply_drop(const IterateState& s, const Vec& v, double lambda) {
  require_unit(v, s.dim(), "apply_drop");
  if (!(lambda < 1.0 - kDropMargin) || !(lambda > 0.0))
    throw Error(ErrorCode::DegenerateStep, "drop step needs 0 < lambda < 1");

  // Y = X - lambda v v^T is singular along z = X^+ v.
  const Vec z = s.pinv() * v;
  SymMat y = s.x();
  y.add_outer(v, -lambda);
  PinvUpdateOptions opts;
  opts.force = RankOneCase::Singular;
  const SymMat y_pinv = pinv_rank_one_update(s.pinv(), s.x(), v, -lambda, opts);

  const double scale = 1.0 / (1.0 - lambda);
  return IterateState(y * scale, pinv_scale(y_pinv, scale), remove_from_projector(s.proj(), z),
                      std::max(s.rank() - 1, 0), s.iter_since_refresh() + 1);
}

IterateState apply_convex_step(const IterateState& s, const Vec& v, double eta) {
  require_unit(v, s.dim(), "apply_convex_step");
  if (!(eta >= 0.0 && eta <= 1.0))
    throw Error(ErrorCode::InvalidConfig, "convex step size must lie in [0, 1]");
  if (eta == 0.0) return s;
  if (eta == 1.0) {
    const SymMat vv = SymMat::outer(v);
    return IterateState(vv, vv, vv, 1, s.iter_since_refresh() + 1);
  }

  const SymMat a = s.x() * (1.0 - eta);
  const SymMat a_pinv = pinv_scale(s.pinv(), 1.0 - eta);
  SymMat x = a;
  x.add_outer(v, eta);

  const Vec z = v - s.proj() * v;
  const bool outside = z.norm() > kImageTol;
  PinvUpdateOptions opts;
  opts.force = outside ? RankOneCase::OutsideImage : RankOneCase::InsideImage;
  opts.proj = &s.proj();
  SymMat pinv = pinv_rank_one_update(a_pinv, a, v, eta, opts);
  SymMat proj = s.proj();
  int rank = s.rank();
  if (outside) {
    proj.add_outer(z, 1.0 / z.squaredNorm());
    ++rank;
  }
  return IterateState(std::move(x), std::move(pinv), std::move(proj), rank,
                      s.iter_since_refresh() + 1);
}

IterateState apply_away_step(const IterateState& s, const Vec& v, double eta) {
  require_unit(v, s.dim(), "apply_away_step");
  if (eta == 0.0) return s;
  const double limit = max_removal_coeff(s, v);
  if (!(eta > 0.0) || !(eta < limit) || !(eta < 1.0))
    throw Error(ErrorCode::StepTooLarge, "away step must satisfy 0 <= eta < (v^T X^+ v)^{-1}");

  SymMat y = s.x();
  y.add_outer(v, -eta);
  const double scale = 1.0 / (1.0 - eta);
  const double zeta = 1.0 - eta / limit;
  if (zeta < kAwayConditioning) {
    IterateState rebuilt(y * scale, s.pinv(), s.proj(), s.rank(), 0);
    return refresh(rebuilt);
  }
  PinvUpdateOptions opts;
  opts.force = RankOneCase::InsideImage;
  const SymMat y_pinv = pinv_rank_one_update(s.pinv(), s.x(), v, -eta, opts);
  return IterateState(y * scale, pinv_scale(y_pinv, scale), s.proj(), s.rank(),
                      s.iter_since_refresh() + 1);
}

IterateState apply_pairwise_step(const IterateState& s, const Vec& u_minus, const Vec& u_plus,
                                 double gamma) {
  require_unit(u_minus, s.dim(), "apply_pairwise_step (u-)");
  require_unit(u_plus, s.dim(), "apply_pairwise_step (u+)");
  if ((s.proj() * u_minus - u_minus).norm() > kNotInImageTol)
    throw Error(ErrorCode::NotInImage, "u- is not in Im(X)");
  if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidConfig, "pairwise step needs gamma > 0");

  // Only exact equality is a no-op: overlap^2 rounds to 1 for vectors still
  // 1e-8 apart, whose update is not negligible.
  if (u_plus == u_minus || u_plus == -u_minus) return s;

  // Remove gamma u- u-^T (a drop along u-), then add gamma u+ u+^T.
  const Vec w = s.pinv() * u_minus;
  SymMat half = s.x();
  half.add_outer(u_minus, -gamma);
  PinvUpdateOptions drop;
  drop.force = RankOneCase::Singular;
  const SymMat half_pinv = pinv_rank_one_update(s.pinv(), s.x(), u_minus, -gamma, drop);
  SymMat proj = remove_from_projector(s.proj(), w);
  int rank = std::max(s.rank() - 1, 0);

  const Vec z = u_plus - proj * u_plus;
  const bool outside = z.norm() > kImageTol;
  PinvUpdateOptions add;
  add.force = outside ? RankOneCase::OutsideImage : RankOneCase::InsideImage;
  add.proj = &proj;
  SymMat pinv = pinv_rank_one_update(half_pinv, half, u_plus, gamma, add);
  if (outside) {
    proj.add_outer(z, 1.0 / z.squaredNorm());
    ++rank;
  }

  SymMat x = s.x();
  x.add_outer(u_plus, gamma);
  x.add_outer(u_minus, -gamma);
  return IterateState(std::move(x), std::move(pinv), std::move(proj), rank,
                      s.iter_since_refresh() + 1);
}

Vec sample_unit_in_image(const IterateState& s, Rng& rng) {
  if (s.rank() < 1) throw Error(ErrorCode::InvalidConfig, "sampling needs rank >= 1");
  for (;;) {
    const Vec z = gaussian_vector(s.dim(), rng);
    const Vec pz = s.proj() * z;
    const double nrm = pz.norm();
    if (nrm >= 1e-12) return pz / nrm;
  }
}

ConsistencyResiduals consistency_residuals(const IterateState& s) {
  const Mat& x = s.x().mat();
  const Mat& p = s.pinv().mat();
  const Mat& pi = s.proj().mat();
  const Mat xp = x * p;
  ConsistencyResiduals r;
  r.reconstruction = (xp * x - x).norm();
  r.pinv_identity = (p * xp - p).norm() / std::max(1.0, p.norm());
  r.proj_vs_pinv = (pi - xp).norm();
  r.proj_idempotent = (pi * pi - pi).norm();
  r.rounding = static_cast<double>(x.rows()) * std::numeric_limits<double>::epsilon() * x.norm() *
               p.norm();
  return r;
}

}  // namespace specfw

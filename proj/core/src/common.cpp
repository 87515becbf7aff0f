#include <cstdint>

#include "specfw/error.hpp"
#include "specfw/random.hpp"

namespace specfw {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::ZeroScale: return "ZeroScale";
    case ErrorCode::InfeasibleInput: return "InfeasibleInput";
    case ErrorCode::NotInImage: return "NotInImage";
    case ErrorCode::DegenerateStep: return "DegenerateStep";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::InvalidShape: return "InvalidShape";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::MismatchedInstances: return "MismatchedInstances";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  auto lo = [](std::uint64_t x) { return static_cast<std::uint32_t>(x & 0xffffffffu); };
  auto hi = [](std::uint64_t x) { return static_cast<std::uint32_t>(x >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(stream), hi(stream), lo(counter), hi(counter)};
  return Rng(seq);
}

Eigen::VectorXd gaussian_vector(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
  return z;
}

Eigen::VectorXd random_unit_vector(Eigen::Index n, Rng& rng) {
  for (;;) {
    Eigen::VectorXd z = gaussian_vector(n, rng);
    const double nrm = z.norm();
    if (nrm > 1e-12) return z / nrm;
  }
}

}  // namespace specfw

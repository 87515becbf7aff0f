#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace specfw {

using Rng = std::mt19937_64;

/// Derives an independent generator for (seed, stream, counter).  Every
/// random draw in the solvers goes through one of these so that the
/// sequence does not depend on evaluation order.
Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter = 0);

Eigen::VectorXd gaussian_vector(Eigen::Index n, Rng& rng);

/// Uniform on the unit sphere of R^n (normalized Gaussian).
Eigen::VectorXd random_unit_vector(Eigen::Index n, Rng& rng);

}  // namespace specfw

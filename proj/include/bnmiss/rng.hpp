#pragma once

#include <cstdint>
#include <random>
#include <span>

#include <Eigen/Dense>

namespace bnmiss {

using Rng = std::mt19937_64;

/// Mixes a stream tag into a master seed (splitmix64 finalizer). Distinct
/// tags give statistically independent child seeds.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Index i with probability weights[i] / sum(weights).
int sample_categorical(Rng& rng, std::span<const double> weights);

double sample_beta(Rng& rng, double alpha, double beta);

/// Symmetric Dirichlet(alpha) vector of length k.
Eigen::VectorXd sample_dirichlet(Rng& rng, int k, double alpha);

}  // namespace bnmiss

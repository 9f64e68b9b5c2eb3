#include "bnmiss/rng.hpp"

#include <stdexcept>

namespace bnmiss {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

int sample_categorical(Rng& rng, std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw std::invalid_argument("sample_categorical: weights sum to zero");
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  int last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = static_cast<int>(i);
    if (u < acc) return last_positive;
  }
  return last_positive;
}

double sample_beta(Rng& rng, double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw std::invalid_argument("sample_beta: shapes must be positive");
  std::gamma_distribution<double> ga(alpha, 1.0);
  std::gamma_distribution<double> gb(beta, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  if (x + y == 0.0) return alpha >= beta ? 1.0 : 0.0;
  return x / (x + y);
}

Eigen::VectorXd sample_dirichlet(Rng& rng, int k, double alpha) {
  if (k < 1 || !(alpha > 0.0)) throw std::invalid_argument("sample_dirichlet: bad arguments");
  std::gamma_distribution<double> g(alpha, 1.0);
  Eigen::VectorXd v(k);
  for (int i = 0; i < k; ++i) v[i] = g(rng);
  const double s = v.sum();
  if (s <= 0.0) {
    v.setConstant(1.0 / k);
  } else {
    v /= s;
  }
  return v;
}

}  // namespace bnmiss

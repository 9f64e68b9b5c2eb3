#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

#include "bnmiss/data_distribution.hpp"
#include "bnmiss/dataset.hpp"
#include "bnmiss/inference.hpp"
#include "bnmiss/network.hpp"

namespace bnmiss {

enum class InferenceEngine { kJointree, kLoopyBp };

struct EmConfig {
  int restarts = 1;
  InferenceEngine engine = InferenceEngine::kJointree;
  /// Initial parameters for the first restart; the rest start from random CPTs.
  std::optional<BayesianNetwork> init;
  /// Relative improvement of the training objective below which a chain stops.
  double threshold = 1e-4;
  int max_iterations = 500;
  /// Wall-clock budget in seconds for the whole call.
  std::optional<double> time_limit;
  std::uint64_t seed = 0;
  double prior = 2.0;
  BpOptions bp;
};

/// Throws std::invalid_argument.
void validate(const EmConfig& config);

struct EmIterationRecord {
  /// Log-likelihood of the data under the parameters entering the iteration.
  double log_likelihood = 0.0;
  /// log_likelihood plus the Dirichlet log-prior of those parameters.
  double objective = 0.0;
  /// Seconds since the start of em_learn.
  double elapsed = 0.0;
};

struct EmTrace {
  std::vector<std::vector<EmIterationRecord>> restarts;
  int best_restart = -1;
  double best_objective = 0.0;
  std::size_t iterations() const;
};

struct EmStep {
  BayesianNetwork params;
  double log_likelihood = 0.0;
  double objective = 0.0;
};

using EmClock = std::chrono::steady_clock;

/// One E-step and M-step. Returns nullopt when `deadline` passes mid-step.
std::optional<EmStep> em_iteration(const BayesianNetwork& params, const DataDistribution& dist,
                                   InferenceEngine engine, double prior, const BpOptions& bp = {},
                                   std::optional<EmClock::time_point> deadline = std::nullopt);
EmStep em_iteration(const BayesianNetwork& params, const IncompleteDataset& data, InferenceEngine engine,
                    double prior);

/// Dirichlet log-prior term Σ (α-1) log θ, dropping zero-weight terms.
double log_prior(const BayesianNetwork& params, double prior);

/// Symmetric Dirichlet(1) draw for every CPT row.
BayesianNetwork random_parameters(const BayesianNetwork& skeleton, std::uint64_t seed);

struct EmResult {
  BayesianNetwork network;
  EmTrace trace;
};

/// Restarted EM with an anytime deadline. Throws DeadlineBeforeFirstIteration
/// when no iteration completes in time.
EmResult em_learn(const BayesianNetwork& skeleton, const DataDistribution& dist, const EmConfig& config);
EmResult em_learn(const BayesianNetwork& skeleton, const IncompleteDataset& data, const EmConfig& config);

}  // namespace bnmiss

#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "bnmiss/data_distribution.hpp"
#include "bnmiss/em.hpp"
#include "bnmiss/estimate.hpp"
#include "bnmiss/network.hpp"

namespace bnmiss {

enum class Learner {
  kListwise,
  kDMcar,
  kFMcar,
  kDMar,
  kFMar,
  kIdMar,
  kIfMar,
  kMnarCross,
  kEmJt,
  kEmBp,
  kFmarEmJt,
};

const char* to_string(Learner learner);
/// Lowercase dashed names: listwise, d-mcar, ..., fmar-em-jt.
std::optional<Learner> parse_learner(std::string_view name);
const std::vector<Learner>& all_learners();
/// Single pass over the data, no inference.
bool is_closed_form(Learner learner);

struct LearnOptions {
  double prior = 2.0;
  AggregationMethod aggregation = AggregationMethod::kInverseVariance;
  /// W_o for the informed learners.
  std::optional<std::vector<int>> informed;
  int em_restarts = 1;
  /// Seconds; applies to the EM learners.
  std::optional<double> time_limit;
  std::uint64_t seed = 0;
  BpOptions bp;
};

struct LearnResult {
  BayesianNetwork network;
  std::optional<EmTrace> trace;
};

/// Throws std::invalid_argument for informed learners without a set,
/// UnsupportedFamily for mnar-cross outside its pattern, and
/// DeadlineBeforeFirstIteration from the EM learners.
LearnResult learn(Learner learner, const BayesianNetwork& skeleton, const DataDistribution& dist,
                  const LearnOptions& options = {});

/// Family estimator used by mnar-cross: families inside {X, Y} come from the
/// cross-mechanism estimate, fully observed families from the data directly.
EstimateTable mnar_cross_family(const DataDistribution& dist, std::span<const int> family);

}  // namespace bnmiss

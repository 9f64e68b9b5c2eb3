#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace bnmiss {

/// Probability table over an ordered scope; the last scope variable varies
/// fastest.
struct EstimateTable {
  std::vector<int> scope;
  std::vector<int> cards;
  Eigen::VectorXd values;
  /// Effective sample count n_eff.
  double support = 0.0;
  double variance = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  std::size_t index(std::span<const int> states) const;
  double operator()(std::span<const int> states) const { return values(static_cast<Eigen::Index>(index(states))); }
};

/// Uniform table over the scope.
EstimateTable uniform_table(std::vector<int> scope, std::vector<int> cards);

/// Same distribution with the scope permuted into `order`.
EstimateTable reorder(const EstimateTable& table, std::span<const int> order);

/// Sums out every scope variable not in `keep`; result follows `keep` order.
EstimateTable marginalize(const EstimateTable& table, std::span<const int> keep);

/// Mean over cells of p(1-p)/max(n,1).
double binomial_variance(const Eigen::Ref<const Eigen::VectorXd>& values, double n);

enum class AggregationMethod { kMean, kMedian, kInverseVariance, kLowestVariance };

const char* to_string(AggregationMethod method);
/// Accepts mean, median, inverse-variance, lowest-variance.
std::optional<AggregationMethod> parse_aggregation(std::string_view name);

struct Candidate {
  EstimateTable table;
  double variance = 0.0;
};

/// Throws EmptyCandidates or ScopeMismatch.
EstimateTable aggregate(std::span<const Candidate> candidates, AggregationMethod method);

namespace detail {

inline constexpr double kVarianceEpsilon = 1e-12;

/// Aggregates equally sized value vectors; writes the result and returns its variance.
double aggregate_values(std::span<const Eigen::VectorXd* const> values, std::span<const double> variances,
                        AggregationMethod method, Eigen::VectorXd& out);

}  // namespace detail

}  // namespace bnmiss

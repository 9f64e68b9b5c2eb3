#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "bnmiss/dataset.hpp"

namespace bnmiss {

/// Values of a mechanism variable R_X.
enum class Mechanism : int { kOb = 0, kUnob = 1 };

/// Value of a proxy X* when X is not recorded.
inline constexpr int kMi = -1;

/// A variable of the augmented domain: the value variable (X for observed
/// variables, the proxy X* for partially observed ones) or the mechanism R_X.
struct AugmentedVariable {
  int variable = 0;
  bool mechanism = false;

  bool operator==(const AugmentedVariable&) const = default;
};

/// Conjunction of assignments over the augmented domain (X_o, X_m*, R).
class Event {
 public:
  /// X = state, or X* = state for a partially observed X (state may be kMi).
  Event& value(int variable, int state);
  Event& mechanism(int variable, Mechanism m);
  Event& observed(int variable) { return mechanism(variable, Mechanism::kOb); }
  Event& unobserved(int variable) { return mechanism(variable, Mechanism::kUnob); }

  const std::vector<std::pair<AugmentedVariable, int>>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

 private:
  std::vector<std::pair<AugmentedVariable, int>> terms_;
};

/// Empirical distribution Pr_D over the augmented dataset, stored as the
/// distinct augmented rows with their multiplicities.
class DataDistribution {
 public:
  std::shared_ptr<const BayesianNetwork> network_ptr() const { return network_; }
  const BayesianNetwork& network() const { return *network_; }
  int num_variables() const { return num_variables_; }
  int cardinality(int v) const { return cards_[v]; }

  /// N, the number of rows.
  std::int64_t size() const { return total_; }
  std::size_t distinct_rows() const { return counts_.size(); }
  /// Proxy values of one distinct row; kMi where the cell was missing.
  std::span<const int> row(std::size_t i) const {
    return {cells_.data() + i * static_cast<std::size_t>(num_variables_), static_cast<std::size_t>(num_variables_)};
  }
  std::int64_t count(std::size_t i) const { return counts_[i]; }
  /// Original (0-based) row indices that collapsed into distinct row i.
  std::span<const std::int64_t> source_rows(std::size_t i) const {
    return {sources_.data() + source_offsets_[i], source_offsets_[i + 1] - source_offsets_[i]};
  }

  bool partially_observed(int v) const { return partial_[v] != 0; }
  const std::vector<int>& observed_variables() const { return observed_; }
  const std::vector<int>& partially_observed_variables() const { return partially_observed_; }

  /// Number of dataset rows visited while building this distribution.
  std::int64_t row_visits() const { return row_visits_; }

 private:
  friend DataDistribution augment(const IncompleteDataset&, std::span<const int>);

  std::shared_ptr<const BayesianNetwork> network_;
  int num_variables_ = 0;
  std::vector<int> cards_;
  std::vector<char> partial_;
  std::vector<int> observed_;
  std::vector<int> partially_observed_;
  std::vector<int> cells_;
  std::vector<std::int64_t> counts_;
  std::vector<std::size_t> source_offsets_;
  std::vector<std::int64_t> sources_;
  std::int64_t total_ = 0;
  std::int64_t row_visits_ = 0;
};

/// One pass over the rows. X_m is inferred from missing cells, extended by
/// the dataset's declared set and by `extra_partially_observed`.
DataDistribution augment(const IncompleteDataset& dataset, std::span<const int> extra_partially_observed = {});

/// Number of rows whose augmented instantiation satisfies `event`.
std::int64_t count_matching(const DataDistribution& dist, const Event& event);

struct ProbabilityEstimate {
  double probability = 0.0;
  std::int64_t support = 0;
};

/// Pr_D(target | given) with support count(given). Throws ZeroSupport.
ProbabilityEstimate estimate_probability(const DataDistribution& dist, const Event& target, const Event& given);

/// Instantiations of `vars` with positive count, in mixed-radix ascending
/// order (first variable most significant; kMi sorts after every state,
/// ob before unob).
std::vector<std::pair<std::vector<int>, std::int64_t>> observed_instantiations(
    const DataDistribution& dist, std::span<const AugmentedVariable> vars);

/// Sorted original row indices whose augmented rows satisfy `given`.
std::vector<std::int64_t> contributing_rows(const DataDistribution& dist, const Event& given);

namespace detail {

// Per-variable constraint codes of a compiled event.
inline constexpr int kAny = -3;
inline constexpr int kObservedCode = -2;
inline constexpr int kMissingCode = -1;

/// Flattens an event to one constraint per variable; returns false when the
/// event is unsatisfiable.
bool compile_event(const DataDistribution& dist, const Event& event, std::vector<int>& out);
bool row_matches(std::span<const int> row, std::span<const int> constraint);

}  // namespace detail

}  // namespace bnmiss

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "bnmiss/data_distribution.hpp"
#include "bnmiss/estimate.hpp"
#include "bnmiss/lattice.hpp"
#include "bnmiss/network.hpp"

namespace bnmiss {

/// Optional informed set W_o; must be a subset of X_o.
using Scope = std::optional<std::vector<int>>;

// Every estimator returns a normalized table over `family` in the given order.

/// Rows with no missing cell at all. Throws ZeroSupport.
EstimateTable listwise_deletion(const DataDistribution& dist, std::span<const int> family);

/// Rows where the family's partially observed members are observed. Throws ZeroSupport.
EstimateTable direct_deletion_mcar(const DataDistribution& dist, std::span<const int> family);

/// Sum over observed instantiations of X_o' (or W_o' for a scope) of the
/// re-weighted conditional. Zero-support conditionals back off by dropping
/// the conditioning variables farthest from the family first, then Y_o.
EstimateTable direct_deletion_mar(const DataDistribution& dist, std::span<const int> family,
                                  const Scope& scope = std::nullopt);

/// Lattice over the whole family with per-node aggregation. Throws
/// ZeroSupport when no row observes any family member.
EstimateTable factored_deletion_mcar(const DataDistribution& dist, std::span<const int> family,
                                     AggregationMethod method = AggregationMethod::kInverseVariance);

/// Lattice over Y_m per observed instantiation of X_o (or W_o ∪ Y_o).
EstimateTable factored_deletion_mar(const DataDistribution& dist, std::span<const int> family,
                                    AggregationMethod method = AggregationMethod::kInverseVariance,
                                    const Scope& scope = std::nullopt);

/// Pr(X, Y) under the cross mechanism (R_X has parent Y, R_Y has parent X).
/// Throws ZeroSupport or DegenerateMechanism.
EstimateTable mnar_cross_estimate(const DataDistribution& dist, int x, int y);

using FamilyEstimator = std::function<EstimateTable(const DataDistribution&, std::span<const int>)>;

/// θ_{x|u} = (c(x,u) + α - 1) / (Σ_x' c(x',u) + |X|(α - 1)) with c = n_eff · p̂.
/// Families with no support fall back to the prior.
BayesianNetwork extract_parameters(const BayesianNetwork& skeleton, const FamilyEstimator& estimator,
                                   const DataDistribution& dist, double prior_concentration);

/// Smoothed CPT from a family count table laid out as parents then child.
Cpt smoothed_cpt(const Eigen::Ref<const Eigen::VectorXd>& counts, int child_cardinality, double prior_concentration);

enum class DeletionEstimator { kListwise, kDirectMcar, kFactoredMcar, kDirectMar, kFactoredMar };

/// Original rows read by the conditional terms of `estimator` for one cell of
/// Pr(family), summed over every weight instantiation.
std::vector<std::int64_t> data_usage(DeletionEstimator estimator, const DataDistribution& dist,
                                     std::span<const int> family, std::span<const int> cell);

/// Rows read by the factor that adds `added` to the already factored
/// variables `factored` (both family members). MAR factors also fix Y_o.
std::vector<std::int64_t> factor_usage(const DataDistribution& dist, std::span<const int> family,
                                       std::span<const int> cell, std::span<const int> factored, int added, bool mar);

/// X_o' (or W_o' for a scope): the variables of the MAR weight term.
std::vector<int> weight_variables(const DataDistribution& dist, std::span<const int> family,
                                  const Scope& scope = std::nullopt);

}  // namespace bnmiss

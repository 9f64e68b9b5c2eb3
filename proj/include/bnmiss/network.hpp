#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "bnmiss/errors.hpp"
#include "bnmiss/rng.hpp"

namespace bnmiss {

/// A discrete variable. Its id is its position in the owning network.
struct Variable {
  std::string name;
  std::vector<std::string> states;

  int cardinality() const { return static_cast<int>(states.size()); }
  /// Index of `label`, or -1.
  int state_index(std::string_view label) const;

  bool operator==(const Variable&) const = default;
};

/// CPT of one variable: row = parent instantiation in mixed-radix order
/// (first parent most significant), column = child state.
using Cpt = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr int kUnassigned = -1;

/// Partial or complete assignment of state indices to variable ids.
class Instantiation {
 public:
  Instantiation() = default;
  explicit Instantiation(std::size_t num_variables) : states_(num_variables, kUnassigned) {}
  explicit Instantiation(std::vector<int> states) : states_(std::move(states)) {}

  std::size_t size() const { return states_.size(); }
  int operator[](std::size_t v) const { return states_[v]; }
  int& operator[](std::size_t v) { return states_[v]; }
  bool assigned(std::size_t v) const { return states_[v] != kUnassigned; }
  bool complete() const;
  std::span<const int> states() const { return states_; }

  bool operator==(const Instantiation&) const = default;

 private:
  std::vector<int> states_;
};

class BayesianNetwork {
 public:
  BayesianNetwork() = default;
  /// Does not validate; call validate() on untrusted input.
  BayesianNetwork(std::string name, std::vector<Variable> variables, std::vector<std::vector<int>> parents,
                  std::vector<Cpt> cpts);

  const std::string& name() const { return name_; }
  int size() const { return static_cast<int>(variables_.size()); }
  const Variable& variable(int v) const { return variables_[v]; }
  const std::vector<Variable>& variables() const { return variables_; }
  int cardinality(int v) const { return variables_[v].cardinality(); }
  const std::vector<int>& parents(int v) const { return parents_[v]; }
  const Cpt& cpt(int v) const { return cpts_[v]; }
  const std::vector<Cpt>& cpts() const { return cpts_; }

  std::optional<int> find(std::string_view name) const;
  /// Throws UnknownVariable.
  int index_of(std::string_view name) const;

  /// Number of parent instantiations of `v`.
  std::size_t parent_configurations(int v) const;
  /// CPT row of `v` selected by the parent states in `inst`.
  std::size_t parent_row(int v, std::span<const int> inst) const;

  std::vector<std::vector<int>> children() const;

  /// Same structure with new parameters.
  BayesianNetwork with_cpts(std::vector<Cpt> cpts) const;

  bool operator==(const BayesianNetwork& other) const;

 private:
  std::string name_;
  std::vector<Variable> variables_;
  std::vector<std::vector<int>> parents_;
  std::vector<Cpt> cpts_;
};

/// Same variables, states and parent lists.
bool same_structure(const BayesianNetwork& a, const BayesianNetwork& b);

/// Throws CycleDetected, CptRowNotNormalized or DimensionMismatch.
void validate(const BayesianNetwork& network);

/// Parents before children; ties broken by ascending id. Throws CycleDetected.
std::vector<int> topological_order(const BayesianNetwork& network);

double joint_probability(const BayesianNetwork& network, const Instantiation& inst);
double log_joint_probability(const BayesianNetwork& network, std::span<const int> states);

/// {X} ∪ parents(X): parents in CPT order followed by X itself.
std::vector<int> family_of(const BayesianNetwork& network, int v);

/// Ancestral sampler reusable across rows; draws from a caller-owned Rng.
class AncestralSampler {
 public:
  explicit AncestralSampler(const BayesianNetwork& network);
  void sample(Rng& rng, std::span<int> out) const;

 private:
  const BayesianNetwork* network_;
  std::vector<int> order_;
};

std::vector<Instantiation> forward_sample(const BayesianNetwork& network, std::uint64_t seed, std::int64_t count);

/// Undirected distances in the moral graph from the nearest member of
/// `sources`; unreachable variables get -1.
std::vector<int> moral_distances(const BayesianNetwork& network, std::span<const int> sources);

struct RandomNetworkOptions {
  int variables = 5;
  int max_parents = 2;
  int min_states = 2;
  int max_states = 2;
  /// Symmetric Dirichlet concentration for CPT rows.
  double concentration = 1.0;
};

/// Random DAG whose parents always have smaller ids, with Dirichlet CPTs.
BayesianNetwork random_network(const RandomNetworkOptions& options, std::uint64_t seed);

}  // namespace bnmiss

#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bnmiss/dataset.hpp"
#include "bnmiss/network.hpp"

namespace bnmiss {

/// Posterior tables per family (parents then child, last fastest, so row-major
/// CPT layout) and per variable.
struct MarginalSet {
  std::vector<Eigen::VectorXd> families;
  std::vector<Eigen::VectorXd> variables;
};

struct InferenceResult {
  MarginalSet marginals;
  double log_evidence = 0.0;
};

/// Total number of inference runs (jointree, loopy BP, brute force) made by
/// this process.
std::int64_t inference_invocations();

/// Clique tree of a network's structure. CPT values are supplied per query, so
/// one tree serves every parameterization of the same DAG.
class Jointree {
 public:
  const std::vector<std::vector<int>>& cliques() const { return cliques_; }
  /// Tree edges as (parent, child) pairs in breadth-first order from clique 0.
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<std::vector<int>>& separators() const { return separators_; }
  /// Clique holding the family of each variable.
  const std::vector<int>& home() const { return home_; }
  const std::vector<int>& elimination_order() const { return elimination_order_; }
  /// Largest clique state-space size.
  double max_clique_states() const;
  /// Largest clique size minus one.
  int width() const;
  const BayesianNetwork& network() const { return network_; }

 private:
  friend Jointree build_jointree(const BayesianNetwork& network);
  friend class JointreeSession;

  BayesianNetwork network_;
  std::vector<std::vector<int>> cliques_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> separators_;
  std::vector<int> home_;
  std::vector<int> elimination_order_;
};

/// Min-fill triangulation (ties by ascending id), maximal cliques joined by a
/// maximum-weight spanning tree on separator size.
Jointree build_jointree(const BayesianNetwork& network);

/// Every variable's cliques form a connected subtree.
bool has_running_intersection(const Jointree& jt);

/// Reusable propagation workspace for one jointree.
class JointreeSession {
 public:
  /// Throws StateSpaceTooLarge above `max_table_entries` per clique.
  explicit JointreeSession(const Jointree& jt, double max_table_entries = 1 << 26);

  /// Calibrates with `params` (same structure as the tree) and evidence
  /// (kUnassigned for unobserved variables). Returns log Pr(evidence).
  /// Throws ZeroProbabilityEvidence.
  double propagate(const BayesianNetwork& params, std::span<const int> evidence);

  /// Adds weight * Pr(family(v) | evidence) for every v into `counts`
  /// (family layout). Valid after propagate().
  void accumulate_families(std::vector<Eigen::VectorXd>& counts, double weight) const;
  MarginalSet marginals() const;

 private:
  struct Edge {
    int parent;
    int child;
    std::size_t separator_size;
    std::vector<std::uint32_t> parent_map;
    std::vector<std::uint32_t> child_map;
  };

  const Jointree* jt_;
  std::vector<Eigen::VectorXd> potentials_;
  std::vector<Eigen::VectorXd> messages_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::uint32_t>> cpt_map_;  // home-clique entry -> CPT flat index
  std::vector<std::size_t> evidence_stride_;           // stride of each variable in its home clique
};

InferenceResult jointree_marginals(const Jointree& jt, const Instantiation& evidence);

struct BpOptions {
  int max_iters = 50;
  double damping = 0.5;
  double tolerance = 1e-6;
};

struct BpResult {
  MarginalSet marginals;
  bool converged = false;
  int iterations = 0;
  /// Bethe approximation of log Pr(evidence).
  double log_evidence = 0.0;
};

/// Sum-product on the factor graph with one factor per CPT; flooding schedule
/// with damped factor-to-variable messages.
BpResult loopy_bp_marginals(const BayesianNetwork& network, const Instantiation& evidence, BpOptions options = {});

inline constexpr int kMaxBruteForceBits = 20;

/// Exact enumeration. Throws StateSpaceTooLarge above 2^20 joint states.
InferenceResult brute_force_marginals(const BayesianNetwork& network, const Instantiation& evidence);

/// (1/N) Σ log Pr(row). Throws ZeroProbabilityInstance, or
/// std::invalid_argument when a cell is missing.
double test_log_likelihood(const BayesianNetwork& network, const IncompleteDataset& test);

/// Σ_X Σ_u P(u) KL(P(X|u) || Q(X|u)) in nats, with P(u) from a jointree over
/// the true network. Throws StructureMismatch.
double kl_divergence(const BayesianNetwork& truth, const BayesianNetwork& learned);
/// Same, reusing prior marginals of `truth`.
double kl_divergence(const BayesianNetwork& truth, const BayesianNetwork& learned, const MarginalSet& prior);

}  // namespace bnmiss

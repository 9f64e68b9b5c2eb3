#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace bnmiss {

/// Subset lattice over an ordered ground set. Node i is the subset whose
/// bitmask is i (bit j = ground[j]); an edge S -> S ∪ {V} adds one variable.
class FactorizationLattice {
 public:
  struct Edge {
    std::uint32_t source;
    std::uint32_t target;
    /// Position of the added variable in the ground set.
    int position;
  };

  FactorizationLattice() = default;
  explicit FactorizationLattice(std::vector<int> ground);

  const std::vector<int>& ground() const { return ground_; }
  int k() const { return static_cast<int>(ground_.size()); }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<std::uint32_t>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  /// Edges into `node`, ordered by the added variable's position.
  std::span<const Edge> incoming(std::uint32_t node) const {
    return {edges_.data() + offsets_[node], offsets_[node + 1] - offsets_[node]};
  }

 private:
  std::vector<int> ground_;
  std::vector<std::uint32_t> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
};

inline constexpr int kMaxLatticeGround = 20;

/// Throws GroundSetTooLarge above kMaxLatticeGround variables.
FactorizationLattice build_lattice(std::vector<int> ground);

}  // namespace bnmiss

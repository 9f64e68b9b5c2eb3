#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bnmiss/data_distribution.hpp"

namespace bnmiss::detail {

/// Compressed trie over the distinct rows of a distribution keyed by a list
/// of fully observed variables. Each node owns a contiguous range of `order`;
/// a leaf groups the rows that agree on every key, and a node's parent drops
/// the trailing keys on which its rows disagree.
class PrefixTree {
 public:
  struct Node {
    std::uint32_t lo = 0;
    std::uint32_t hi = 0;
    int parent = -1;
    bool leaf = false;
  };

  PrefixTree(const DataDistribution& dist, std::span<const int> keys);

  const std::vector<std::uint32_t>& order() const { return order_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  const std::vector<int>& leaves() const { return leaves_; }

 private:
  void packed(const DataDistribution& dist, std::span<const int> keys, const std::vector<int>& shift);
  void partition(const DataDistribution& dist, std::span<const int> keys);

  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::vector<int> leaves_;
};

}  // namespace bnmiss::detail

#include "prefix_tree.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <utility>

namespace bnmiss::detail {

PrefixTree::PrefixTree(const DataDistribution& dist, std::span<const int> keys) {
  const auto rows = static_cast<std::uint32_t>(dist.distinct_rows());
  order_.resize(rows);
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.push_back({0, rows, -1, false});
  if (rows == 0) return;

  // Keys packed into one word, first key in the highest bits.
  const std::size_t k = keys.size();
  std::vector<int> shift(k);
  int bits = 0;
  for (std::size_t i = k; i-- > 0;) {
    shift[i] = bits;
    bits += std::bit_width(static_cast<unsigned>(dist.cardinality(keys[i]) - 1));
  }
  if (bits > 64) {
    partition(dist, keys);
  } else {
    packed(dist, keys, shift);
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].leaf) leaves_.push_back(static_cast<int>(i));
}

void PrefixTree::packed(const DataDistribution& dist, std::span<const int> keys, const std::vector<int>& shift) {
  const auto rows = static_cast<std::uint32_t>(order_.size());
  const int k = static_cast<int>(keys.size());
  std::vector<std::pair<std::uint64_t, std::uint32_t>> coded(rows);
  for (std::uint32_t r = 0; r < rows; ++r) {
    const auto row = dist.row(r);
    std::uint64_t c = 0;
    for (int i = 0; i < k; ++i)
      c |= static_cast<std::uint64_t>(row[keys[static_cast<std::size_t>(i)]]) << shift[static_cast<std::size_t>(i)];
    coded[r] = {c, r};
  }
  std::sort(coded.begin(), coded.end());

  // lcp[i]: leading keys shared by sorted rows i-1 and i.
  std::vector<int> key_of_bit(64, 0);
  for (int b = 0; b < 64; ++b) {
    int key = 0;
    while (key + 1 < k && shift[static_cast<std::size_t>(key)] > b) ++key;
    key_of_bit[static_cast<std::size_t>(b)] = key;
  }
  std::vector<std::uint8_t> lcp(rows, 0);
  for (std::uint32_t i = 0; i < rows; ++i) {
    order_[i] = coded[i].second;
    if (i == 0) continue;
    const std::uint64_t diff = coded[i - 1].first ^ coded[i].first;
    lcp[i] = static_cast<std::uint8_t>(diff == 0 ? k : key_of_bit[static_cast<std::size_t>(63 - std::countl_zero(diff))]);
  }

  std::vector<int> stack{0};
  std::vector<std::uint32_t> cuts;
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    const std::uint32_t lo = nodes_[static_cast<std::size_t>(id)].lo;
    const std::uint32_t hi = nodes_[static_cast<std::size_t>(id)].hi;
    int split = k;
    for (std::uint32_t i = lo + 1; i < hi; ++i) split = std::min<int>(split, lcp[i]);
    if (split == k) {
      nodes_[static_cast<std::size_t>(id)].leaf = true;
      continue;
    }
    cuts.assign(1, lo);
    for (std::uint32_t i = lo + 1; i < hi; ++i)
      if (lcp[i] == split) cuts.push_back(i);
    cuts.push_back(hi);
    for (std::size_t c = cuts.size() - 1; c-- > 0;) {
      nodes_.push_back({cuts[c], cuts[c + 1], id, false});
      stack.push_back(static_cast<int>(nodes_.size()) - 1);
    }
  }
}

// Fallback when the keys do not fit in one word.
void PrefixTree::partition(const DataDistribution& dist, std::span<const int> keys) {
  const auto rows = static_cast<std::uint32_t>(order_.size());
  const int depth_limit = static_cast<int>(keys.size());
  std::vector<std::uint32_t> scratch(rows);
  std::vector<std::uint32_t> bucket;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [id, depth] = stack.back();
    stack.pop_back();
    const std::uint32_t lo = nodes_[static_cast<std::size_t>(id)].lo;
    const std::uint32_t hi = nodes_[static_cast<std::size_t>(id)].hi;
    bool split = false;
    if (hi - lo > 1) {
      while (depth < depth_limit) {
        const int var = keys[static_cast<std::size_t>(depth)];
        const int card = dist.cardinality(var);
        bucket.assign(static_cast<std::size_t>(card) + 1, 0);
        for (std::uint32_t i = lo; i < hi; ++i) ++bucket[static_cast<std::size_t>(dist.row(order_[i])[var]) + 1];
        int nonempty = 0;
        for (int s = 1; s <= card; ++s) nonempty += bucket[static_cast<std::size_t>(s)] > 0;
        if (nonempty == 1) {
          ++depth;
          continue;
        }
        for (int s = 1; s <= card; ++s) bucket[static_cast<std::size_t>(s)] += bucket[static_cast<std::size_t>(s) - 1];
        std::vector<std::uint32_t> cursor(bucket.begin(), bucket.end() - 1);
        for (std::uint32_t i = lo; i < hi; ++i) {
          const std::uint32_t r = order_[i];
          scratch[lo + cursor[static_cast<std::size_t>(dist.row(r)[var])]++] = r;
        }
        std::copy(scratch.begin() + lo, scratch.begin() + hi, order_.begin() + lo);
        for (int s = card - 1; s >= 0; --s) {
          const std::uint32_t b = lo + bucket[static_cast<std::size_t>(s)];
          const std::uint32_t e = lo + bucket[static_cast<std::size_t>(s) + 1];
          if (b == e) continue;
          nodes_.push_back({b, e, id, false});
          stack.emplace_back(static_cast<int>(nodes_.size()) - 1, depth + 1);
        }
        split = true;
        break;
      }
    }
    if (!split) nodes_[static_cast<std::size_t>(id)].leaf = true;
  }
}

}  // namespace bnmiss::detail

#include "bnmiss/estimators.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <memory>
#include <unordered_map>

#include "prefix_tree.hpp"

namespace bnmiss {

namespace {

// Cell indexing over a family in the caller's order, last variable fastest.
struct FamilyLayout {
  std::vector<int> family;
  std::vector<int> cards;
  std::vector<std::size_t> strides;
  std::size_t size = 1;
  std::vector<int> ym_pos;
  std::vector<int> yo_pos;

  FamilyLayout(const DataDistribution& dist, std::span<const int> vars) : family(vars.begin(), vars.end()) {
    std::vector<int> sorted = family;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("family lists a variable twice");
    for (int v : family)
      if (v < 0 || v >= dist.num_variables()) throw UnknownVariable("#" + std::to_string(v));
    cards.resize(family.size());
    strides.resize(family.size());
    for (std::size_t i = family.size(); i-- > 0;) {
      cards[i] = dist.cardinality(family[i]);
      strides[i] = size;
      size *= static_cast<std::size_t>(cards[i]);
    }
    for (std::size_t i = 0; i < family.size(); ++i)
      (dist.partially_observed(family[i]) ? ym_pos : yo_pos).push_back(static_cast<int>(i));
  }

  std::size_t part(std::span<const int> row, const std::vector<int>& positions) const {
    std::size_t idx = 0;
    for (int p : positions)
      idx += strides[static_cast<std::size_t>(p)] * static_cast<std::size_t>(row[family[static_cast<std::size_t>(p)]]);
    return idx;
  }
  std::size_t index(std::span<const int> row) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < family.size(); ++i) idx += strides[i] * static_cast<std::size_t>(row[family[i]]);
    return idx;
  }
  bool ym_observed(std::span<const int> row) const {
    for (int p : ym_pos)
      if (row[family[static_cast<std::size_t>(p)]] == kMi) return false;
    return true;
  }
  std::vector<int> ym_vars() const {
    std::vector<int> out;
    for (int p : ym_pos) out.push_back(family[static_cast<std::size_t>(p)]);
    return out;
  }
};

EstimateTable finalize(const FamilyLayout& layout, Eigen::VectorXd mass, double n_eff) {
  EstimateTable t;
  t.scope = layout.family;
  t.cards = layout.cards;
  const double sum = mass.sum();
  if (sum > 0.0) {
    t.values = mass / sum;
  } else {
    t.values = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(layout.size), 1.0 / static_cast<double>(layout.size));
  }
  t.support = n_eff;
  t.variance = binomial_variance(t.values, n_eff);
  return t;
}

bool complete_row(std::span<const int> row) { return std::find(row.begin(), row.end(), kMi) == row.end(); }

// Y_o ascending, then X_o' (or W_o') by moral distance to the family, ties by id.
std::vector<int> conditioning_keys(const DataDistribution& dist, const FamilyLayout& layout, const Scope& scope) {
  std::vector<int> yo;
  for (int p : layout.yo_pos) yo.push_back(layout.family[static_cast<std::size_t>(p)]);
  std::sort(yo.begin(), yo.end());
  std::vector<int> pool;
  if (scope) {
    for (int w : *scope) {
      if (w < 0 || w >= dist.num_variables() || dist.partially_observed(w))
        throw std::invalid_argument("informed set must contain only fully observed variables");
    }
    pool = *scope;
  } else {
    pool = dist.observed_variables();
  }
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  std::erase_if(pool, [&](int v) { return std::find(layout.family.begin(), layout.family.end(), v) != layout.family.end(); });
  const auto distance = moral_distances(dist.network(), layout.family);
  auto rank = [&](int v) {
    const int d = distance[static_cast<std::size_t>(v)];
    return std::pair(d < 0 ? std::numeric_limits<int>::max() : d, v);
  };
  std::sort(pool.begin(), pool.end(), [&](int a, int b) { return rank(a) < rank(b); });
  yo.insert(yo.end(), pool.begin(), pool.end());
  return yo;
}

// ---------------------------------------------------------------------------
// Lattice machinery shared by the factored estimators.

// Rows projected onto the ground variables; code == cardinality marks missing.
struct ProjectedCounts {
  int k = 0;
  std::vector<int> codes;
  std::vector<double> counts;
};

class MarginalCache {
 public:
  MarginalCache(ProjectedCounts data, const std::vector<int>& cards)
      : data_(std::move(data)), cards_(&cards), tables_(std::size_t{1} << cards.size()) {}

  // M_T: counts of rows observing every member of T, over T's instantiations.
  const Eigen::VectorXd& marginal(std::uint32_t mask) {
    auto& slot = tables_[mask];
    if (slot) return *slot;
    const auto& cards = *cards_;
    const int k = static_cast<int>(cards.size());
    std::size_t size = 1;
    for (int j = 0; j < k; ++j)
      if (mask >> j & 1u) size *= static_cast<std::size_t>(cards[static_cast<std::size_t>(j)]);
    Eigen::VectorXd m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size));
    const std::size_t entries = data_.counts.size();
    for (std::size_t e = 0; e < entries; ++e) {
      const int* code = data_.codes.data() + e * static_cast<std::size_t>(k);
      std::size_t idx = 0;
      bool observed = true;
      for (int j = 0; j < k && observed; ++j) {
        if (!(mask >> j & 1u)) continue;
        if (code[j] == cards[static_cast<std::size_t>(j)]) {
          observed = false;
        } else {
          idx = idx * static_cast<std::size_t>(cards[static_cast<std::size_t>(j)]) + static_cast<std::size_t>(code[j]);
        }
      }
      if (observed) m(static_cast<Eigen::Index>(idx)) += data_.counts[e];
    }
    slot = std::move(m);
    return *slot;
  }

 private:
  ProjectedCounts data_;
  const std::vector<int>* cards_;
  std::vector<std::optional<Eigen::VectorXd>> tables_;
};

ProjectedCounts project(const DataDistribution& dist, const std::vector<int>& ground,
                        std::span<const std::uint32_t> rows) {
  ProjectedCounts out;
  out.k = static_cast<int>(ground.size());
  std::unordered_map<std::uint64_t, std::size_t> index;
  for (std::uint32_t r : rows) {
    const auto row = dist.row(r);
    std::uint64_t key = 0;
    for (int v : ground) {
      const int value = row[v];
      key = key * static_cast<std::uint64_t>(dist.cardinality(v) + 1) +
            static_cast<std::uint64_t>(value == kMi ? dist.cardinality(v) : value);
    }
    auto [it, inserted] = index.try_emplace(key, out.counts.size());
    if (inserted) {
      for (int v : ground) out.codes.push_back(row[v] == kMi ? dist.cardinality(v) : row[v]);
      out.counts.push_back(0.0);
    }
    out.counts[it->second] += static_cast<double>(dist.count(r));
  }
  return out;
}

// Per-edge index maps: for every instantiation t of the target node, the
// instantiation of the source node and the state of the added variable.
struct EdgeLayout {
  std::vector<std::uint32_t> source_of;
  std::vector<int> added_state;
  std::size_t source_size = 1;
  int added_card = 1;
};

struct LatticeLayout {
  FactorizationLattice lattice;
  std::vector<int> cards;
  std::vector<std::size_t> node_size;
  std::vector<EdgeLayout> edges;

  LatticeLayout(std::vector<int> ground, std::vector<int> ground_cards)
      : lattice(std::move(ground)), cards(std::move(ground_cards)) {
    const int k = lattice.k();
    node_size.resize(lattice.node_count());
    for (std::uint32_t mask = 0; mask < lattice.node_count(); ++mask) {
      std::size_t size = 1;
      for (int j = 0; j < k; ++j)
        if (mask >> j & 1u) size *= static_cast<std::size_t>(cards[static_cast<std::size_t>(j)]);
      node_size[mask] = size;
    }
    edges.reserve(lattice.edge_count());
    for (const auto& e : lattice.edges()) {
      EdgeLayout el;
      el.source_size = node_size[e.source];
      el.added_card = cards[static_cast<std::size_t>(e.position)];
      const std::size_t size = node_size[e.target];
      el.source_of.resize(size);
      el.added_state.resize(size);
      std::vector<int> members;
      for (int j = 0; j < k; ++j)
        if (e.target >> j & 1u) members.push_back(j);
      std::vector<int> digits(members.size(), 0);
      for (std::size_t t = 0; t < size; ++t) {
        std::size_t s = 0;
        for (std::size_t m = 0; m < members.size(); ++m) {
          if (members[m] == e.position) {
            el.added_state[t] = digits[m];
          } else {
            s = s * static_cast<std::size_t>(cards[static_cast<std::size_t>(members[m])]) + static_cast<std::size_t>(digits[m]);
          }
        }
        el.source_of[t] = static_cast<std::uint32_t>(s);
        for (std::size_t m = members.size(); m-- > 0;) {
          if (++digits[m] < cards[static_cast<std::size_t>(members[m])]) break;
          digits[m] = 0;
        }
      }
      edges.push_back(std::move(el));
    }
  }
};

struct LatticeResult {
  Eigen::VectorXd values;
  double variance = 0.0;
  double top_support = 0.0;
};

// `chain(level)` yields the marginal cache of the group itself (level 0) and
// of successively coarser groups, or nullptr past the coarsest one.
template <class Chain>
LatticeResult evaluate_lattice(const LatticeLayout& layout, Chain&& chain, AggregationMethod method) {
  const auto& lattice = layout.lattice;
  const std::uint32_t top = static_cast<std::uint32_t>(lattice.node_count() - 1);
  std::vector<Eigen::VectorXd> node_values(lattice.node_count());
  std::vector<double> node_variance(lattice.node_count(), 0.0);
  node_values[0] = Eigen::VectorXd::Ones(1);
  MarginalCache* own = chain(0);
  LatticeResult result;

  std::vector<Eigen::VectorXd> cand_values;
  std::vector<double> cand_variance;
  std::vector<char> cand_valid;
  std::vector<double> n_s;
  std::size_t edge_index = 0;
  for (std::uint32_t mask = 1; mask <= top; ++mask) {
    const auto incoming = lattice.incoming(mask);
    edge_index = static_cast<std::size_t>(incoming.data() - lattice.edges().data());
    cand_values.assign(incoming.size(), Eigen::VectorXd());
    cand_variance.assign(incoming.size(), 0.0);
    cand_valid.assign(incoming.size(), 0);
    const Eigen::VectorXd& m = own->marginal(mask);
    for (std::size_t c = 0; c < incoming.size(); ++c) {
      const auto& edge = incoming[c];
      const EdgeLayout& el = layout.edges[edge_index + c];
      const std::size_t size = static_cast<std::size_t>(m.size());
      n_s.assign(el.source_size, 0.0);
      for (std::size_t t = 0; t < size; ++t) n_s[el.source_of[t]] += m(static_cast<Eigen::Index>(t));
      double edge_support = 0.0;
      for (double n : n_s) edge_support += n;
      if (mask == top) result.top_support = std::max(result.top_support, edge_support);

      Eigen::VectorXd cond(static_cast<Eigen::Index>(size));
      std::vector<double> used_n = n_s;
      for (std::size_t t = 0; t < size; ++t) {
        const double n = n_s[el.source_of[t]];
        cond(static_cast<Eigen::Index>(t)) = n > 0.0 ? m(static_cast<Eigen::Index>(t)) / n : -1.0;
      }
      for (std::size_t s = 0; s < el.source_size; ++s) {
        if (n_s[s] > 0.0) continue;
        bool found = false;
        for (int level = 1; !found; ++level) {
          MarginalCache* coarser = chain(level);
          if (!coarser) break;
          const Eigen::VectorXd& mm = coarser->marginal(mask);
          double n = 0.0;
          for (std::size_t t = 0; t < size; ++t)
            if (el.source_of[t] == s) n += mm(static_cast<Eigen::Index>(t));
          if (n > 0.0) {
            for (std::size_t t = 0; t < size; ++t)
              if (el.source_of[t] == s) cond(static_cast<Eigen::Index>(t)) = mm(static_cast<Eigen::Index>(t)) / n;
            used_n[s] = n;
            found = true;
          }
        }
        if (!found)
          for (std::size_t t = 0; t < size; ++t)
            if (el.source_of[t] == s) cond(static_cast<Eigen::Index>(t)) = 1.0 / el.added_card;
      }
      double var = 0.0;
      for (std::size_t t = 0; t < size; ++t) {
        const double p = cond(static_cast<Eigen::Index>(t));
        var += p * (1.0 - p) / std::max(used_n[el.source_of[t]], 1.0);
      }
      var /= static_cast<double>(std::max<std::size_t>(size, 1));
      const Eigen::VectorXd& source = node_values[edge.source];
      Eigen::VectorXd cand(static_cast<Eigen::Index>(size));
      for (std::size_t t = 0; t < size; ++t)
        cand(static_cast<Eigen::Index>(t)) = cond(static_cast<Eigen::Index>(t)) * source(el.source_of[t]);
      cand_values[c] = std::move(cand);
      cand_variance[c] = var + node_variance[edge.source];
      cand_valid[c] = edge_support > 0.0;
    }
    const bool any_valid = std::find(cand_valid.begin(), cand_valid.end(), 1) != cand_valid.end();
    std::vector<const Eigen::VectorXd*> values;
    std::vector<double> variances;
    for (std::size_t c = 0; c < incoming.size(); ++c) {
      if (any_valid && !cand_valid[c]) continue;
      values.push_back(&cand_values[c]);
      variances.push_back(cand_variance[c]);
    }
    node_variance[mask] = detail::aggregate_values(values, variances, method, node_values[mask]);
  }
  result.values = std::move(node_values[top]);
  result.variance = node_variance[top];
  return result;
}

std::vector<int> sorted_vars(std::vector<int> vars) {
  std::sort(vars.begin(), vars.end());
  return vars;
}

std::vector<int> cards_of(const DataDistribution& dist, const std::vector<int>& vars) {
  std::vector<int> out;
  for (int v : vars) out.push_back(dist.cardinality(v));
  return out;
}

// Family-layout offsets of every instantiation of `ground` (a subset of the family).
std::vector<std::size_t> ground_offsets(const FamilyLayout& layout, const std::vector<int>& ground,
                                        const std::vector<int>& cards) {
  std::size_t size = 1;
  for (int c : cards) size *= static_cast<std::size_t>(c);
  std::vector<std::size_t> stride;
  for (int v : ground) {
    const auto pos = std::find(layout.family.begin(), layout.family.end(), v) - layout.family.begin();
    stride.push_back(layout.strides[static_cast<std::size_t>(pos)]);
  }
  std::vector<std::size_t> out(size);
  std::vector<int> digits(ground.size(), 0);
  for (std::size_t i = 0; i < size; ++i) {
    std::size_t off = 0;
    for (std::size_t j = 0; j < ground.size(); ++j) off += stride[j] * static_cast<std::size_t>(digits[j]);
    out[i] = off;
    for (std::size_t j = ground.size(); j-- > 0;) {
      if (++digits[j] < cards[j]) break;
      digits[j] = 0;
    }
  }
  return out;
}

}  // namespace

EstimateTable listwise_deletion(const DataDistribution& dist, std::span<const int> family) {
  const FamilyLayout layout(dist, family);
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout.size));
  std::int64_t support = 0;
  for (std::size_t i = 0; i < dist.distinct_rows(); ++i) {
    const auto row = dist.row(i);
    if (!complete_row(row)) continue;
    mass(static_cast<Eigen::Index>(layout.index(row))) += static_cast<double>(dist.count(i));
    support += dist.count(i);
  }
  if (support == 0) throw ZeroSupport("listwise deletion: no complete rows");
  return finalize(layout, std::move(mass), static_cast<double>(support));
}

EstimateTable direct_deletion_mcar(const DataDistribution& dist, std::span<const int> family) {
  const FamilyLayout layout(dist, family);
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout.size));
  std::int64_t support = 0;
  for (std::size_t i = 0; i < dist.distinct_rows(); ++i) {
    const auto row = dist.row(i);
    if (!layout.ym_observed(row)) continue;
    mass(static_cast<Eigen::Index>(layout.index(row))) += static_cast<double>(dist.count(i));
    support += dist.count(i);
  }
  if (support == 0) throw ZeroSupport("direct deletion: the family is never fully observed");
  return finalize(layout, std::move(mass), static_cast<double>(support));
}

EstimateTable direct_deletion_mar(const DataDistribution& dist, std::span<const int> family, const Scope& scope) {
  const FamilyLayout layout(dist, family);
  const auto keys = conditioning_keys(dist, layout, scope);
  if (layout.ym_pos.empty()) return direct_deletion_mcar(dist, family);

  const detail::PrefixTree tree(dist, keys);
  const auto& order = tree.order();
  const std::size_t d = order.size();
  // Per distinct row, gathered into tree order: Y_o offset, Y_m offset
  // (npos when a Y_m cell is missing) and count.
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::vector<std::size_t> yo_of(d), ym_of(d);
  for (std::size_t r = 0; r < d; ++r) {
    const auto row = dist.row(r);
    yo_of[r] = layout.part(row, layout.yo_pos);
    ym_of[r] = layout.ym_observed(row) ? layout.part(row, layout.ym_pos) : npos;
  }
  std::vector<std::size_t> yo(d), ym(d);
  std::vector<double> cnt(d);
  std::vector<std::int64_t> count_prefix(d + 1, 0);
  std::vector<std::int64_t> support_prefix(d + 1, 0);
  for (std::size_t i = 0; i < d; ++i) {
    const std::uint32_t r = order[i];
    yo[i] = yo_of[r];
    ym[i] = ym_of[r];
    const std::int64_t c = dist.count(r);
    cnt[i] = static_cast<double>(c);
    count_prefix[i + 1] = count_prefix[i] + c;
    support_prefix[i + 1] = support_prefix[i] + (ym[i] != npos ? c : 0);
  }
  auto support_of = [&](const detail::PrefixTree::Node& n) { return support_prefix[n.hi] - support_prefix[n.lo]; };

  Eigen::VectorXd mass = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout.size));
  std::map<int, std::map<std::size_t, double>> routed;
  std::map<std::size_t, double> uniform;
  for (int leaf : tree.leaves()) {
    const auto& node = tree.node(leaf);
    const double n_g = static_cast<double>(count_prefix[node.hi] - count_prefix[node.lo]);
    const std::int64_t s_g = support_of(node);
    const std::size_t g = yo[node.lo];
    if (s_g > 0) {
      for (std::uint32_t i = node.lo; i < node.hi; ++i)
        if (ym[i] != npos) mass(static_cast<Eigen::Index>(g + ym[i])) += n_g * cnt[i] / static_cast<double>(s_g);
      continue;
    }
    int a = node.parent;
    while (a >= 0 && support_of(tree.node(a)) == 0) a = tree.node(a).parent;
    if (a >= 0) {
      routed[a][g] += n_g;
    } else {
      uniform[g] += n_g;
    }
  }
  for (const auto& [a, weights] : routed) {
    const auto& node = tree.node(a);
    const double s_a = static_cast<double>(support_of(node));
    for (std::uint32_t i = node.lo; i < node.hi; ++i) {
      if (ym[i] == npos) continue;
      for (const auto& [w_yo, w] : weights) mass(static_cast<Eigen::Index>(w_yo + ym[i])) += w * cnt[i] / s_a;
    }
  }
  if (!uniform.empty()) {
    const auto ym_vars = layout.ym_vars();
    const auto offsets = ground_offsets(layout, ym_vars, cards_of(dist, ym_vars));
    for (const auto& [g, w] : uniform)
      for (std::size_t off : offsets) mass(static_cast<Eigen::Index>(g + off)) += w / static_cast<double>(offsets.size());
  }
  return finalize(layout, std::move(mass), static_cast<double>(support_prefix[d]));
}

EstimateTable factored_deletion_mcar(const DataDistribution& dist, std::span<const int> family,
                                     AggregationMethod method) {
  const FamilyLayout layout(dist, family);
  if (layout.family.empty()) throw std::invalid_argument("family must not be empty");
  const auto ground = sorted_vars(layout.family);
  const auto cards = cards_of(dist, ground);
  const LatticeLayout lattice(ground, cards);

  std::vector<std::uint32_t> rows(dist.distinct_rows());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<std::uint32_t>(i);
  MarginalCache cache(project(dist, ground, rows), lattice.cards);
  bool any_observed = false;
  for (int j = 0; j < lattice.lattice.k() && !any_observed; ++j) any_observed = cache.marginal(1u << j).sum() > 0.0;
  if (!any_observed) throw ZeroSupport("factored deletion: no row observes any family member");

  auto chain = [&](int level) -> MarginalCache* { return level == 0 ? &cache : nullptr; };
  LatticeResult result = evaluate_lattice(lattice, chain, method);

  Eigen::VectorXd mass = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout.size));
  const auto offsets = ground_offsets(layout, ground, cards);
  for (std::size_t i = 0; i < offsets.size(); ++i) mass(static_cast<Eigen::Index>(offsets[i])) = result.values(static_cast<Eigen::Index>(i));
  EstimateTable t = finalize(layout, std::move(mass), result.top_support);
  t.variance = result.variance;
  return t;
}

EstimateTable factored_deletion_mar(const DataDistribution& dist, std::span<const int> family,
                                    AggregationMethod method, const Scope& scope) {
  const FamilyLayout layout(dist, family);
  const auto keys = conditioning_keys(dist, layout, scope);
  if (layout.ym_pos.empty()) return direct_deletion_mcar(dist, family);

  const auto ground = sorted_vars(layout.ym_vars());
  const auto cards = cards_of(dist, ground);
  const LatticeLayout lattice(ground, cards);
  const auto offsets = ground_offsets(layout, ground, cards);

  const detail::PrefixTree tree(dist, keys);
  const auto& order = tree.order();
  std::vector<std::unique_ptr<MarginalCache>> caches(tree.nodes().size());
  auto cache_for = [&](int id) -> MarginalCache* {
    auto& slot = caches[static_cast<std::size_t>(id)];
    if (!slot) {
      const auto& n = tree.node(id);
      slot = std::make_unique<MarginalCache>(
          project(dist, ground, std::span<const std::uint32_t>(order.data() + n.lo, n.hi - n.lo)), lattice.cards);
    }
    return slot.get();
  };

  std::int64_t supported = 0;
  for (std::size_t i = 0; i < dist.distinct_rows(); ++i)
    if (layout.ym_observed(dist.row(i))) supported += dist.count(i);

  const double total = static_cast<double>(dist.size());
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout.size));
  double variance = 0.0;
  std::vector<int> path;
  for (int leaf : tree.leaves()) {
    const auto& node = tree.node(leaf);
    path.clear();
    for (int a = leaf; a >= 0; a = tree.node(a).parent) path.push_back(a);
    MarginalCache own(project(dist, ground, std::span<const std::uint32_t>(order.data() + node.lo, node.hi - node.lo)),
                      lattice.cards);
    auto chain = [&](int level) -> MarginalCache* {
      if (level == 0) return &own;
      if (static_cast<std::size_t>(level) >= path.size()) return nullptr;
      return cache_for(path[static_cast<std::size_t>(level)]);
    };
    const LatticeResult result = evaluate_lattice(lattice, chain, method);
    double n_g = 0.0;
    for (std::uint32_t i = node.lo; i < node.hi; ++i) n_g += static_cast<double>(dist.count(order[i]));
    const double w = n_g / total;
    const std::size_t yo = layout.part(dist.row(order[node.lo]), layout.yo_pos);
    for (std::size_t i = 0; i < offsets.size(); ++i)
      mass(static_cast<Eigen::Index>(yo + offsets[i])) += w * result.values(static_cast<Eigen::Index>(i));
    variance += w * w * result.variance;
  }
  EstimateTable t = finalize(layout, std::move(mass), static_cast<double>(supported));
  t.variance = variance;
  return t;
}

EstimateTable mnar_cross_estimate(const DataDistribution& dist, int x, int y) {
  const int pair[] = {x, y};
  const FamilyLayout layout(dist, pair);
  const int cx = layout.cards[0];
  const int cy = layout.cards[1];
  // joint(x, y) over rows with both observed; x_obs(x) rows with X observed; etc.
  Eigen::MatrixXd both = Eigen::MatrixXd::Zero(cx, cy);
  Eigen::VectorXd y_with_ry = Eigen::VectorXd::Zero(cy);  // Y* = y, R_Y = ob
  Eigen::VectorXd x_with_rx = Eigen::VectorXd::Zero(cx);  // X* = x, R_X = ob
  for (std::size_t i = 0; i < dist.distinct_rows(); ++i) {
    const auto row = dist.row(i);
    const double c = static_cast<double>(dist.count(i));
    const int vx = row[x];
    const int vy = row[y];
    if (vx != kMi) x_with_rx(vx) += c;
    if (vy != kMi) y_with_ry(vy) += c;
    if (vx != kMi && vy != kMi) both(vx, vy) += c;
  }
  const double n_both = both.sum();
  if (n_both == 0.0) throw ZeroSupport("cross estimator: X and Y are never observed together");
  const double total = static_cast<double>(dist.size());
  Eigen::VectorXd mass(static_cast<Eigen::Index>(layout.size));
  for (int a = 0; a < cx; ++a) {
    for (int b = 0; b < cy; ++b) {
      if (y_with_ry(b) == 0.0 || x_with_rx(a) == 0.0)
        throw ZeroSupport("cross estimator: a mechanism term has no support");
      // Pr(R_X=ob | Y*=b, R_Y=ob) and Pr(R_Y=ob | X*=a, R_X=ob).
      const double rx_ob = both.col(b).sum() / y_with_ry(b);
      const double ry_ob = both.row(a).sum() / x_with_rx(a);
      if (rx_ob == 0.0 || ry_ob == 0.0) throw DegenerateMechanism("cross estimator: a mechanism term is zero");
      const double joint = (n_both / total) * (both(a, b) / n_both);
      mass(a * cy + b) = joint / (rx_ob * ry_ob);
    }
  }
  return finalize(layout, std::move(mass), total);
}

Cpt smoothed_cpt(const Eigen::Ref<const Eigen::VectorXd>& counts, int child_cardinality, double prior_concentration) {
  const Eigen::Index k = child_cardinality;
  const Eigen::Index rows = counts.size() / k;
  Cpt cpt(rows, k);
  for (Eigen::Index r = 0; r < rows; ++r) {
    Eigen::RowVectorXd num = (counts.segment(r * k, k).array() + (prior_concentration - 1.0)).max(0.0).matrix().transpose();
    const double den = num.sum();
    if (den > 0.0 && std::isfinite(den)) {
      cpt.row(r) = num / den;
    } else {
      cpt.row(r).setConstant(1.0 / static_cast<double>(k));
    }
  }
  return cpt;
}

BayesianNetwork extract_parameters(const BayesianNetwork& skeleton, const FamilyEstimator& estimator,
                                   const DataDistribution& dist, double prior_concentration) {
  if (!(prior_concentration > 0.0)) throw std::invalid_argument("prior concentration must be positive");
  if (dist.num_variables() != skeleton.size()) throw StructureMismatch("data and skeleton have different variables");
  std::vector<Cpt> cpts;
  cpts.reserve(static_cast<std::size_t>(skeleton.size()));
  for (int v = 0; v < skeleton.size(); ++v) {
    const auto family = family_of(skeleton, v);
    std::size_t size = 1;
    for (int u : family) size *= static_cast<std::size_t>(skeleton.cardinality(u));
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size));
    try {
      const EstimateTable table = estimator(dist, family);
      counts = table.values * table.support;
    } catch (const ZeroSupport&) {
    }
    cpts.push_back(smoothed_cpt(counts, skeleton.cardinality(v), prior_concentration));
  }
  return skeleton.with_cpts(std::move(cpts));
}

namespace {

Event cell_event(const FamilyLayout& layout, std::span<const int> cell, std::span<const int> vars) {
  if (cell.size() != layout.family.size()) throw std::invalid_argument("cell does not match the family");
  Event e;
  for (int v : vars) {
    const auto pos = std::find(layout.family.begin(), layout.family.end(), v) - layout.family.begin();
    if (pos == static_cast<std::ptrdiff_t>(layout.family.size()))
      throw std::invalid_argument("variable is not a family member");
    e.value(v, cell[static_cast<std::size_t>(pos)]);
  }
  return e;
}

void merge_rows(std::vector<std::int64_t>& into, const std::vector<std::int64_t>& rows) {
  std::vector<std::int64_t> out;
  std::set_union(into.begin(), into.end(), rows.begin(), rows.end(), std::back_inserter(out));
  into = std::move(out);
}

}  // namespace

std::vector<std::int64_t> factor_usage(const DataDistribution& dist, std::span<const int> family,
                                       std::span<const int> cell, std::span<const int> factored, int added, bool mar) {
  const FamilyLayout layout(dist, family);
  std::vector<int> vars(factored.begin(), factored.end());
  vars.push_back(added);
  if (mar)
    for (int p : layout.yo_pos) vars.push_back(layout.family[static_cast<std::size_t>(p)]);
  return contributing_rows(dist, cell_event(layout, cell, vars));
}

std::vector<std::int64_t> data_usage(DeletionEstimator estimator, const DataDistribution& dist,
                                     std::span<const int> family, std::span<const int> cell) {
  const FamilyLayout layout(dist, family);
  switch (estimator) {
    case DeletionEstimator::kListwise: {
      Event e = cell_event(layout, cell, layout.family);
      for (int v : dist.partially_observed_variables()) e.observed(v);
      return contributing_rows(dist, e);
    }
    case DeletionEstimator::kDirectMcar:
    case DeletionEstimator::kDirectMar:
      return contributing_rows(dist, cell_event(layout, cell, layout.family));
    case DeletionEstimator::kFactoredMcar:
    case DeletionEstimator::kFactoredMar: {
      const bool mar = estimator == DeletionEstimator::kFactoredMar;
      const auto ground = sorted_vars(mar ? layout.ym_vars() : layout.family);
      if (ground.empty()) return contributing_rows(dist, cell_event(layout, cell, layout.family));
      const FactorizationLattice lattice(ground);
      std::vector<std::int64_t> rows;
      for (const auto& edge : lattice.edges()) {
        std::vector<int> factored;
        for (int j = 0; j < lattice.k(); ++j)
          if (edge.source >> j & 1u) factored.push_back(ground[static_cast<std::size_t>(j)]);
        merge_rows(rows, factor_usage(dist, family, cell, factored, ground[static_cast<std::size_t>(edge.position)], mar));
      }
      return rows;
    }
  }
  throw std::invalid_argument("unknown estimator");
}

std::vector<int> weight_variables(const DataDistribution& dist, std::span<const int> family, const Scope& scope) {
  const FamilyLayout layout(dist, family);
  auto keys = conditioning_keys(dist, layout, scope);
  keys.erase(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(layout.yo_pos.size()));
  std::sort(keys.begin(), keys.end());
  return keys;
}

}  // namespace bnmiss

#include "bnmiss/data_distribution.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace bnmiss {

Event& Event::value(int variable, int state) {
  terms_.push_back({AugmentedVariable{variable, false}, state});
  return *this;
}

Event& Event::mechanism(int variable, Mechanism m) {
  terms_.push_back({AugmentedVariable{variable, true}, static_cast<int>(m)});
  return *this;
}

DataDistribution augment(const IncompleteDataset& dataset, std::span<const int> extra_partially_observed) {
  DataDistribution dist;
  dist.network_ = dataset.network_ptr();
  const int n = dataset.columns();
  dist.num_variables_ = n;
  dist.cards_.resize(n);
  for (int v = 0; v < n; ++v) dist.cards_[v] = dataset.network().cardinality(v);
  dist.partial_.assign(n, 0);
  for (int v : dataset.declared_partially_observed()) dist.partial_[v] = 1;
  for (int v : extra_partially_observed) {
    if (v < 0 || v >= n) throw std::invalid_argument("augment: partially observed variable out of range");
    dist.partial_[v] = 1;
  }

  const std::int64_t rows = dataset.rows();
  std::unordered_map<std::string, std::uint32_t> index;
  index.reserve(static_cast<std::size_t>(std::min<std::int64_t>(rows, 1 << 22)));
  std::vector<std::uint32_t> row_id(static_cast<std::size_t>(rows));
  std::string key(static_cast<std::size_t>(n) * 2, '\0');
  const auto& cells = dataset.cells();
  for (std::int64_t r = 0; r < rows; ++r) {
    ++dist.row_visits_;
    const int* src = cells.data() + r * n;
    for (int v = 0; v < n; ++v) {
      const auto code = static_cast<std::uint16_t>(src[v] + 1);
      key[2 * v] = static_cast<char>(code & 0xff);
      key[2 * v + 1] = static_cast<char>(code >> 8);
      if (src[v] == kMissingCell) dist.partial_[v] = 1;
    }
    auto [it, inserted] = index.try_emplace(key, static_cast<std::uint32_t>(dist.counts_.size()));
    if (inserted) {
      dist.cells_.insert(dist.cells_.end(), src, src + n);
      dist.counts_.push_back(0);
    }
    ++dist.counts_[it->second];
    row_id[static_cast<std::size_t>(r)] = it->second;
  }
  dist.total_ = rows;

  const std::size_t distinct = dist.counts_.size();
  dist.source_offsets_.assign(distinct + 1, 0);
  for (std::size_t i = 0; i < distinct; ++i)
    dist.source_offsets_[i + 1] = dist.source_offsets_[i] + static_cast<std::size_t>(dist.counts_[i]);
  dist.sources_.resize(static_cast<std::size_t>(rows));
  std::vector<std::size_t> fill(dist.source_offsets_.begin(), dist.source_offsets_.end() - 1);
  for (std::int64_t r = 0; r < rows; ++r) dist.sources_[fill[row_id[static_cast<std::size_t>(r)]]++] = r;

  for (int v = 0; v < n; ++v) (dist.partial_[v] ? dist.partially_observed_ : dist.observed_).push_back(v);
  return dist;
}

namespace detail {

namespace {

bool merge(int& slot, int code) {
  if (slot == kAny || slot == code) {
    slot = code;
    return true;
  }
  if (slot == kObservedCode && code >= 0) {
    slot = code;
    return true;
  }
  if (code == kObservedCode && slot >= 0) return true;
  return false;
}

}  // namespace

bool compile_event(const DataDistribution& dist, const Event& event, std::vector<int>& out) {
  out.assign(static_cast<std::size_t>(dist.num_variables()), kAny);
  bool satisfiable = true;
  for (const auto& [var, value] : event.terms()) {
    const int v = var.variable;
    if (v < 0 || v >= dist.num_variables()) throw std::invalid_argument("event variable out of range");
    int code;
    if (var.mechanism) {
      if (value != static_cast<int>(Mechanism::kOb) && value != static_cast<int>(Mechanism::kUnob))
        throw std::invalid_argument("mechanism value must be ob or unob");
      if (!dist.partially_observed(v)) {
        // R of a fully observed variable is constantly ob.
        if (value == static_cast<int>(Mechanism::kUnob)) satisfiable = false;
        continue;
      }
      code = value == static_cast<int>(Mechanism::kOb) ? kObservedCode : kMissingCode;
    } else {
      if (value == kMi) {
        if (!dist.partially_observed(v)) {
          satisfiable = false;
          continue;
        }
        code = kMissingCode;
      } else {
        if (value < 0 || value >= dist.cardinality(v)) throw std::invalid_argument("event state out of range");
        code = value;
      }
    }
    if (!merge(out[v], code)) satisfiable = false;
  }
  return satisfiable;
}

bool row_matches(std::span<const int> row, std::span<const int> constraint) {
  for (std::size_t v = 0; v < row.size(); ++v) {
    const int c = constraint[v];
    if (c == kAny) continue;
    if (c == kObservedCode) {
      if (row[v] == kMi) return false;
    } else if (row[v] != c) {
      return false;
    }
  }
  return true;
}

}  // namespace detail

std::int64_t count_matching(const DataDistribution& dist, const Event& event) {
  std::vector<int> constraint;
  if (!detail::compile_event(dist, event, constraint)) return 0;
  std::int64_t n = 0;
  for (std::size_t i = 0; i < dist.distinct_rows(); ++i)
    if (detail::row_matches(dist.row(i), constraint)) n += dist.count(i);
  return n;
}

ProbabilityEstimate estimate_probability(const DataDistribution& dist, const Event& target, const Event& given) {
  for (const auto& [a, va] : target.terms())
    for (const auto& [b, vb] : given.terms())
      if (a == b) throw std::invalid_argument("estimate_probability: target and given share a variable");
  Event joint = given;
  for (const auto& [var, value] : target.terms()) {
    if (var.mechanism) {
      joint.mechanism(var.variable, static_cast<Mechanism>(value));
    } else {
      joint.value(var.variable, value);
    }
  }
  const std::int64_t support = count_matching(dist, given);
  if (support == 0) throw ZeroSupport("conditioning event has no support in the data");
  const std::int64_t hits = count_matching(dist, joint);
  return {static_cast<double>(hits) / static_cast<double>(support), support};
}

std::vector<std::pair<std::vector<int>, std::int64_t>> observed_instantiations(
    const DataDistribution& dist, std::span<const AugmentedVariable> vars) {
  for (const auto& var : vars)
    if (var.variable < 0 || var.variable >= dist.num_variables())
      throw std::invalid_argument("observed_instantiations: variable out of range");
  std::map<std::vector<int>, std::int64_t> table;
  std::vector<int> digits(vars.size());
  for (std::size_t i = 0; i < dist.distinct_rows(); ++i) {
    const auto row = dist.row(i);
    for (std::size_t j = 0; j < vars.size(); ++j) {
      const int value = row[vars[j].variable];
      if (vars[j].mechanism) {
        digits[j] = value == kMi ? 1 : 0;
      } else {
        digits[j] = value == kMi ? dist.cardinality(vars[j].variable) : value;
      }
    }
    table[digits] += dist.count(i);
  }
  std::vector<std::pair<std::vector<int>, std::int64_t>> out;
  out.reserve(table.size());
  for (auto& [key, count] : table) {
    std::vector<int> inst = key;
    for (std::size_t j = 0; j < vars.size(); ++j)
      if (!vars[j].mechanism && inst[j] == dist.cardinality(vars[j].variable)) inst[j] = kMi;
    out.emplace_back(std::move(inst), count);
  }
  if (vars.empty() && out.empty()) out.emplace_back(std::vector<int>{}, 0);
  return out;
}

std::vector<std::int64_t> contributing_rows(const DataDistribution& dist, const Event& given) {
  std::vector<int> constraint;
  std::vector<std::int64_t> out;
  if (!detail::compile_event(dist, given, constraint)) return out;
  for (std::size_t i = 0; i < dist.distinct_rows(); ++i)
    if (detail::row_matches(dist.row(i), constraint)) {
      const auto src = dist.source_rows(i);
      out.insert(out.end(), src.begin(), src.end());
    }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace bnmiss

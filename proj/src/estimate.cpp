#include "bnmiss/estimate.hpp"

#include <algorithm>
#include <numeric>

#include "bnmiss/errors.hpp"

namespace bnmiss {

std::size_t EstimateTable::index(std::span<const int> states) const {
  if (states.size() != cards.size()) throw std::invalid_argument("state count does not match the table scope");
  std::size_t idx = 0;
  for (std::size_t i = 0; i < cards.size(); ++i) {
    if (states[i] < 0 || states[i] >= cards[i]) throw std::invalid_argument("state out of range");
    idx = idx * static_cast<std::size_t>(cards[i]) + static_cast<std::size_t>(states[i]);
  }
  return idx;
}

EstimateTable uniform_table(std::vector<int> scope, std::vector<int> cards) {
  EstimateTable t;
  std::size_t size = 1;
  for (int c : cards) size *= static_cast<std::size_t>(c);
  t.scope = std::move(scope);
  t.cards = std::move(cards);
  t.values = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(size), 1.0 / static_cast<double>(size));
  return t;
}

namespace {

// Calls f(flat index, digits) for every instantiation of `cards`, last digit fastest.
template <class F>
void for_each_instantiation(const std::vector<int>& cards, F&& f) {
  std::size_t size = 1;
  for (int c : cards) size *= static_cast<std::size_t>(c);
  std::vector<int> digits(cards.size(), 0);
  for (std::size_t i = 0; i < size; ++i) {
    f(i, digits);
    for (std::size_t j = cards.size(); j-- > 0;) {
      if (++digits[j] < cards[j]) break;
      digits[j] = 0;
    }
  }
}

std::vector<int> positions_of(const EstimateTable& table, std::span<const int> vars) {
  std::vector<int> pos;
  for (int v : vars) {
    auto it = std::find(table.scope.begin(), table.scope.end(), v);
    if (it == table.scope.end()) throw ScopeMismatch("variable " + std::to_string(v) + " is not in the table scope");
    pos.push_back(static_cast<int>(it - table.scope.begin()));
  }
  return pos;
}

}  // namespace

EstimateTable reorder(const EstimateTable& table, std::span<const int> order) {
  if (order.size() != table.scope.size()) throw ScopeMismatch("reorder needs a permutation of the scope");
  const auto pos = positions_of(table, order);
  EstimateTable out;
  out.scope.assign(order.begin(), order.end());
  for (int p : pos) out.cards.push_back(table.cards[static_cast<std::size_t>(p)]);
  out.values.resize(table.values.size());
  out.support = table.support;
  out.variance = table.variance;
  std::vector<int> source(table.cards.size());
  for_each_instantiation(out.cards, [&](std::size_t i, const std::vector<int>& digits) {
    for (std::size_t j = 0; j < pos.size(); ++j) source[static_cast<std::size_t>(pos[j])] = digits[j];
    out.values(static_cast<Eigen::Index>(i)) = table.values(static_cast<Eigen::Index>(table.index(source)));
  });
  return out;
}

EstimateTable marginalize(const EstimateTable& table, std::span<const int> keep) {
  const auto pos = positions_of(table, keep);
  EstimateTable out;
  out.scope.assign(keep.begin(), keep.end());
  for (int p : pos) out.cards.push_back(table.cards[static_cast<std::size_t>(p)]);
  std::size_t size = 1;
  for (int c : out.cards) size *= static_cast<std::size_t>(c);
  out.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size));
  out.support = table.support;
  out.variance = table.variance;
  for_each_instantiation(table.cards, [&](std::size_t i, const std::vector<int>& digits) {
    std::size_t idx = 0;
    for (std::size_t j = 0; j < pos.size(); ++j)
      idx = idx * static_cast<std::size_t>(out.cards[j]) + static_cast<std::size_t>(digits[static_cast<std::size_t>(pos[j])]);
    out.values(static_cast<Eigen::Index>(idx)) += table.values(static_cast<Eigen::Index>(i));
  });
  return out;
}

double binomial_variance(const Eigen::Ref<const Eigen::VectorXd>& values, double n) {
  if (values.size() == 0) return 0.0;
  return (values.array() * (1.0 - values.array())).mean() / std::max(n, 1.0);
}

const char* to_string(AggregationMethod method) {
  switch (method) {
    case AggregationMethod::kMean:
      return "mean";
    case AggregationMethod::kMedian:
      return "median";
    case AggregationMethod::kInverseVariance:
      return "inverse-variance";
    case AggregationMethod::kLowestVariance:
      return "lowest-variance";
  }
  return "?";
}

std::optional<AggregationMethod> parse_aggregation(std::string_view name) {
  for (auto m : {AggregationMethod::kMean, AggregationMethod::kMedian, AggregationMethod::kInverseVariance,
                 AggregationMethod::kLowestVariance})
    if (name == to_string(m)) return m;
  return std::nullopt;
}

namespace detail {

double aggregate_values(std::span<const Eigen::VectorXd* const> values, std::span<const double> variances,
                        AggregationMethod method, Eigen::VectorXd& out) {
  const std::size_t c = values.size();
  if (c == 0) throw EmptyCandidates("no candidates to aggregate");
  if (c == 1) {
    out = *values[0];
    return variances[0];
  }
  switch (method) {
    case AggregationMethod::kMean: {
      out = *values[0];
      double var = variances[0];
      for (std::size_t i = 1; i < c; ++i) {
        out += *values[i];
        var += variances[i];
      }
      out /= static_cast<double>(c);
      return var / static_cast<double>(c * c);
    }
    case AggregationMethod::kInverseVariance: {
      double total = 0.0;
      out = Eigen::VectorXd::Zero(values[0]->size());
      for (std::size_t i = 0; i < c; ++i) {
        const double w = 1.0 / (variances[i] + kVarianceEpsilon);
        out += w * *values[i];
        total += w;
      }
      out /= total;
      return 1.0 / total;
    }
    case AggregationMethod::kMedian: {
      const Eigen::Index n = values[0]->size();
      out.resize(n);
      std::vector<double> column(c);
      auto median = [](std::vector<double>& xs) {
        std::sort(xs.begin(), xs.end());
        const std::size_t m = xs.size() / 2;
        return xs.size() % 2 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
      };
      for (Eigen::Index j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < c; ++i) column[i] = (*values[i])(j);
        out(j) = median(column);
      }
      const double sum = out.sum();
      if (sum > 0.0) {
        out /= sum;
      } else if (n > 0) {
        out.setConstant(1.0 / static_cast<double>(n));
      }
      std::vector<double> vars(variances.begin(), variances.end());
      return median(vars);
    }
    case AggregationMethod::kLowestVariance: {
      std::size_t best = 0;
      for (std::size_t i = 1; i < c; ++i)
        if (variances[i] < variances[best]) best = i;
      out = *values[best];
      return variances[best];
    }
  }
  throw std::invalid_argument("unknown aggregation method");
}

}  // namespace detail

EstimateTable aggregate(std::span<const Candidate> candidates, AggregationMethod method) {
  if (candidates.empty()) throw EmptyCandidates("no candidates to aggregate");
  const EstimateTable& first = candidates.front().table;
  std::vector<const Eigen::VectorXd*> values;
  std::vector<double> variances;
  double support = 0.0;
  for (const auto& c : candidates) {
    if (c.table.scope != first.scope || c.table.cards != first.cards || c.table.values.size() != first.values.size())
      throw ScopeMismatch("candidates have different scopes");
    values.push_back(&c.table.values);
    variances.push_back(c.variance);
    support = std::max(support, c.table.support);
  }
  EstimateTable out;
  out.scope = first.scope;
  out.cards = first.cards;
  out.variance = detail::aggregate_values(values, variances, method, out.values);
  if (candidates.size() == 1) {
    out.support = first.support;
  } else if (method == AggregationMethod::kLowestVariance) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i)
      if (variances[i] < variances[best]) best = i;
    out.support = candidates[best].table.support;
  } else {
    out.support = support;
  }
  return out;
}

}  // namespace bnmiss

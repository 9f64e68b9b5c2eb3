#include "bnmiss/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <queue>
#include <set>

namespace bnmiss {

int Variable::state_index(std::string_view label) const {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i] == label) return static_cast<int>(i);
  return -1;
}

bool Instantiation::complete() const {
  return std::none_of(states_.begin(), states_.end(), [](int s) { return s == kUnassigned; });
}

BayesianNetwork::BayesianNetwork(std::string name, std::vector<Variable> variables,
                                 std::vector<std::vector<int>> parents, std::vector<Cpt> cpts)
    : name_(std::move(name)), variables_(std::move(variables)), parents_(std::move(parents)), cpts_(std::move(cpts)) {
  if (parents_.size() != variables_.size() || cpts_.size() != variables_.size())
    throw DimensionMismatch("network needs one parent list and one CPT per variable");
}

std::optional<int> BayesianNetwork::find(std::string_view name) const {
  for (int v = 0; v < size(); ++v)
    if (variables_[v].name == name) return v;
  return std::nullopt;
}

int BayesianNetwork::index_of(std::string_view name) const {
  auto v = find(name);
  if (!v) throw UnknownVariable(std::string(name));
  return *v;
}

std::size_t BayesianNetwork::parent_configurations(int v) const {
  std::size_t n = 1;
  for (int p : parents_[v]) n *= static_cast<std::size_t>(cardinality(p));
  return n;
}

std::size_t BayesianNetwork::parent_row(int v, std::span<const int> inst) const {
  std::size_t row = 0;
  for (int p : parents_[v]) row = row * static_cast<std::size_t>(cardinality(p)) + static_cast<std::size_t>(inst[p]);
  return row;
}

std::vector<std::vector<int>> BayesianNetwork::children() const {
  std::vector<std::vector<int>> out(variables_.size());
  for (int v = 0; v < size(); ++v)
    for (int p : parents_[v]) out[p].push_back(v);
  return out;
}

BayesianNetwork BayesianNetwork::with_cpts(std::vector<Cpt> cpts) const {
  return BayesianNetwork(name_, variables_, parents_, std::move(cpts));
}

bool BayesianNetwork::operator==(const BayesianNetwork& other) const {
  if (name_ != other.name_ || !same_structure(*this, other)) return false;
  for (int v = 0; v < size(); ++v) {
    if (cpts_[v].rows() != other.cpts_[v].rows() || cpts_[v].cols() != other.cpts_[v].cols()) return false;
    if (cpts_[v] != other.cpts_[v]) return false;
  }
  return true;
}

bool same_structure(const BayesianNetwork& a, const BayesianNetwork& b) {
  return a.variables() == b.variables() && [&] {
    for (int v = 0; v < a.size(); ++v)
      if (a.parents(v) != b.parents(v)) return false;
    return true;
  }();
}

namespace {

// Kahn's algorithm; on failure returns the variables left with unresolved parents.
std::vector<int> kahn(const BayesianNetwork& network, std::vector<int>* leftover) {
  const int n = network.size();
  std::vector<int> indegree(n, 0);
  const auto children = network.children();
  for (int v = 0; v < n; ++v) indegree[v] = static_cast<int>(network.parents(v).size());
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int v = 0; v < n; ++v)
    if (indegree[v] == 0) ready.push(v);
  std::vector<int> order;
  order.reserve(n);
  while (!ready.empty()) {
    const int v = ready.top();
    ready.pop();
    order.push_back(v);
    for (int c : children[v])
      if (--indegree[c] == 0) ready.push(c);
  }
  if (leftover) {
    leftover->clear();
    for (int v = 0; v < n; ++v)
      if (indegree[v] > 0) leftover->push_back(v);
  }
  return order;
}

std::vector<int> find_cycle(const BayesianNetwork& network, const std::vector<int>& leftover) {
  // Every leftover variable has a leftover parent; walking parents must revisit a node.
  std::vector<char> in_left(network.size(), 0);
  for (int v : leftover) in_left[v] = 1;
  std::vector<int> position(network.size(), -1);
  std::vector<int> path;
  int v = leftover.front();
  while (position[v] < 0) {
    position[v] = static_cast<int>(path.size());
    path.push_back(v);
    for (int p : network.parents(v)) {
      if (in_left[p]) {
        v = p;
        break;
      }
    }
  }
  std::vector<int> cycle(path.begin() + position[v], path.end());
  std::reverse(cycle.begin(), cycle.end());
  return cycle;
}

}  // namespace

void validate(const BayesianNetwork& network) {
  const int n = network.size();
  for (int v = 0; v < n; ++v) {
    const Variable& var = network.variable(v);
    if (var.cardinality() < 2) throw DimensionMismatch("variable '" + var.name + "' needs at least two states");
    std::set<std::string> labels(var.states.begin(), var.states.end());
    if (labels.size() != var.states.size())
      throw DimensionMismatch("variable '" + var.name + "' has duplicate state labels");
    for (int p : network.parents(v)) {
      if (p < 0 || p >= n) throw DimensionMismatch("variable '" + var.name + "' has an out-of-range parent");
      if (p == v) throw CycleDetected({v});
    }
    std::set<int> unique(network.parents(v).begin(), network.parents(v).end());
    if (unique.size() != network.parents(v).size())
      throw DimensionMismatch("variable '" + var.name + "' lists a parent twice");
  }
  for (int v = 0; v < n; ++v) {
    if (network.find(network.variable(v).name) != v)
      throw DimensionMismatch("duplicate variable name '" + network.variable(v).name + "'");
  }
  std::vector<int> leftover;
  kahn(network, &leftover);
  if (!leftover.empty()) throw CycleDetected(find_cycle(network, leftover));

  for (int v = 0; v < n; ++v) {
    const Cpt& cpt = network.cpt(v);
    if (static_cast<std::size_t>(cpt.rows()) != network.parent_configurations(v) ||
        cpt.cols() != network.cardinality(v))
      throw DimensionMismatch("CPT of '" + network.variable(v).name + "' has shape " + std::to_string(cpt.rows()) +
                              "x" + std::to_string(cpt.cols()));
    for (Eigen::Index r = 0; r < cpt.rows(); ++r) {
      if ((cpt.row(r).array() < 0.0).any() || (cpt.row(r).array() > 1.0).any() || !cpt.row(r).allFinite())
        throw CptRowNotNormalized(v, static_cast<std::size_t>(r), cpt.row(r).sum());
      const double sum = cpt.row(r).sum();
      if (std::abs(sum - 1.0) > 1e-9) throw CptRowNotNormalized(v, static_cast<std::size_t>(r), sum);
    }
  }
}

std::vector<int> topological_order(const BayesianNetwork& network) {
  std::vector<int> leftover;
  auto order = kahn(network, &leftover);
  if (!leftover.empty()) throw CycleDetected(find_cycle(network, leftover));
  return order;
}

double joint_probability(const BayesianNetwork& network, const Instantiation& inst) {
  if (static_cast<int>(inst.size()) != network.size())
    throw DimensionMismatch("instantiation size does not match the network");
  std::vector<int> missing;
  for (int v = 0; v < network.size(); ++v)
    if (!inst.assigned(v)) missing.push_back(v);
  if (!missing.empty()) throw IncompleteInstantiation(std::move(missing));
  double p = 1.0;
  for (int v = 0; v < network.size(); ++v) p *= network.cpt(v)(network.parent_row(v, inst.states()), inst[v]);
  return p;
}

double log_joint_probability(const BayesianNetwork& network, std::span<const int> states) {
  double lp = 0.0;
  for (int v = 0; v < network.size(); ++v) lp += std::log(network.cpt(v)(network.parent_row(v, states), states[v]));
  return lp;
}

std::vector<int> family_of(const BayesianNetwork& network, int v) {
  if (v < 0 || v >= network.size()) throw UnknownVariable("#" + std::to_string(v));
  std::vector<int> family = network.parents(v);
  family.push_back(v);
  return family;
}

AncestralSampler::AncestralSampler(const BayesianNetwork& network)
    : network_(&network), order_(topological_order(network)) {}

void AncestralSampler::sample(Rng& rng, std::span<int> out) const {
  for (int v : order_) {
    const auto row = network_->cpt(v).row(static_cast<Eigen::Index>(network_->parent_row(v, out)));
    out[v] = sample_categorical(rng, std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
  }
}

std::vector<Instantiation> forward_sample(const BayesianNetwork& network, std::uint64_t seed, std::int64_t count) {
  if (count < 1) throw std::invalid_argument("forward_sample: count must be positive");
  validate(network);
  AncestralSampler sampler(network);
  Rng rng(seed);
  std::vector<Instantiation> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<int> buffer(network.size());
  for (std::int64_t i = 0; i < count; ++i) {
    sampler.sample(rng, buffer);
    out.emplace_back(buffer);
  }
  return out;
}

std::vector<int> moral_distances(const BayesianNetwork& network, std::span<const int> sources) {
  const int n = network.size();
  std::vector<std::set<int>> adjacent(n);
  for (int v = 0; v < n; ++v) {
    const auto& ps = network.parents(v);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      adjacent[v].insert(ps[i]);
      adjacent[ps[i]].insert(v);
      for (std::size_t j = i + 1; j < ps.size(); ++j) {
        adjacent[ps[i]].insert(ps[j]);
        adjacent[ps[j]].insert(ps[i]);
      }
    }
  }
  std::vector<int> dist(n, -1);
  std::deque<int> queue;
  for (int s : sources) {
    if (dist[s] < 0) {
      dist[s] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int w : adjacent[v]) {
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

BayesianNetwork random_network(const RandomNetworkOptions& options, std::uint64_t seed) {
  if (options.variables < 1 || options.min_states < 2 || options.max_states < options.min_states ||
      options.max_parents < 0)
    throw std::invalid_argument("random_network: bad options");
  Rng rng(seed);
  const int n = options.variables;
  std::vector<Variable> variables(n);
  for (int v = 0; v < n; ++v) {
    variables[v].name = "V" + std::to_string(v);
    const int k = options.min_states + static_cast<int>(rng() % static_cast<std::uint64_t>(
                                                                    options.max_states - options.min_states + 1));
    for (int s = 0; s < k; ++s) variables[v].states.push_back("s" + std::to_string(s));
  }
  std::vector<std::vector<int>> parents(n);
  for (int v = 1; v < n; ++v) {
    const int limit = std::min(options.max_parents, v);
    const int count = static_cast<int>(rng() % static_cast<std::uint64_t>(limit + 1));
    std::vector<int> pool(v);
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < count; ++i) {
      const auto j = i + static_cast<int>(rng() % static_cast<std::uint64_t>(v - i));
      std::swap(pool[i], pool[j]);
      parents[v].push_back(pool[i]);
    }
    std::sort(parents[v].begin(), parents[v].end());
  }
  std::vector<Cpt> cpts(n);
  for (int v = 0; v < n; ++v) {
    std::size_t rows = 1;
    for (int p : parents[v]) rows *= variables[p].states.size();
    const int k = variables[v].cardinality();
    cpts[v].resize(static_cast<Eigen::Index>(rows), k);
    for (std::size_t r = 0; r < rows; ++r)
      cpts[v].row(static_cast<Eigen::Index>(r)) = sample_dirichlet(rng, k, options.concentration).transpose();
  }
  return BayesianNetwork("random", std::move(variables), std::move(parents), std::move(cpts));
}

}  // namespace bnmiss

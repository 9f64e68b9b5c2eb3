#include "bnmiss/missingness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace bnmiss {

MissingnessGraph::MissingnessGraph(std::shared_ptr<const BayesianNetwork> network,
                                   std::vector<MechanismSpec> mechanisms, std::optional<std::vector<int>> informed)
    : network_(std::move(network)), mechanisms_(std::move(mechanisms)), informed_(std::move(informed)) {
  if (!network_) throw std::invalid_argument("missingness graph needs a network");
  std::sort(mechanisms_.begin(), mechanisms_.end(),
            [](const MechanismSpec& a, const MechanismSpec& b) { return a.variable < b.variable; });
  if (informed_) std::sort(informed_->begin(), informed_->end());
}

const MechanismSpec* MissingnessGraph::mechanism(int variable) const {
  auto it = std::lower_bound(mechanisms_.begin(), mechanisms_.end(), variable,
                             [](const MechanismSpec& m, int v) { return m.variable < v; });
  return it != mechanisms_.end() && it->variable == variable ? &*it : nullptr;
}

std::vector<int> MissingnessGraph::partially_observed() const {
  std::vector<int> out;
  for (const auto& m : mechanisms_) out.push_back(m.variable);
  return out;
}

std::vector<int> MissingnessGraph::observed() const {
  std::vector<int> out;
  for (int v = 0; v < network_->size(); ++v)
    if (!mechanism(v)) out.push_back(v);
  return out;
}

bool MissingnessGraph::operator==(const MissingnessGraph& other) const {
  if (!network_ || !other.network_) return network_ == other.network_;
  return *network_ == *other.network_ && mechanisms_ == other.mechanisms_ && informed_ == other.informed_;
}

void validate(const MissingnessGraph& graph) {
  const BayesianNetwork& network = graph.network();
  const int n = network.size();
  for (std::size_t i = 0; i < graph.mechanisms().size(); ++i) {
    const auto& m = graph.mechanisms()[i];
    if (m.variable < 0 || m.variable >= n) throw std::invalid_argument("mechanism variable out of range");
    if (i > 0 && graph.mechanisms()[i - 1].variable == m.variable)
      throw std::invalid_argument("two mechanisms for '" + network.variable(m.variable).name + "'");
    std::size_t rows = 1;
    for (int p : m.parents) {
      if (p < 0 || p >= n) throw std::invalid_argument("mechanism parent out of range");
      rows *= static_cast<std::size_t>(network.cardinality(p));
    }
    if (static_cast<std::size_t>(m.table.rows()) != rows || m.table.cols() != 2)
      throw DimensionMismatch("mechanism table of '" + network.variable(m.variable).name + "' has the wrong shape");
    for (Eigen::Index r = 0; r < m.table.rows(); ++r) {
      const double sum = m.table.row(r).sum();
      if ((m.table.row(r).array() < 0.0).any() || std::abs(sum - 1.0) > 1e-9)
        throw CptRowNotNormalized(m.variable, static_cast<std::size_t>(r), sum);
    }
  }
  if (graph.informed()) {
    for (int w : *graph.informed()) {
      if (w < 0 || w >= n) throw std::invalid_argument("informed variable out of range");
      if (graph.mechanism(w))
        throw std::invalid_argument("informed variable '" + network.variable(w).name + "' is partially observed");
    }
  }
}

const char* to_string(MechanismClass c) {
  switch (c) {
    case MechanismClass::kMcar:
      return "MCAR";
    case MechanismClass::kMar:
      return "MAR";
    case MechanismClass::kMnar:
      return "MNAR";
  }
  return "?";
}

MechanismClass classify(const MissingnessGraph& graph) {
  bool any_parent = false;
  for (const auto& m : graph.mechanisms()) {
    for (int p : m.parents) {
      any_parent = true;
      if (graph.mechanism(p)) return MechanismClass::kMnar;
    }
  }
  return any_parent ? MechanismClass::kMar : MechanismClass::kMcar;
}

int partially_observed_count(double m, int n) {
  if (m < 0.0 || m > 1.0) throw std::invalid_argument("fraction of partially observed variables must be in [0, 1]");
  const int count = static_cast<int>(std::ceil(m * n - 1e-9));
  return std::clamp(count, 0, n);
}

namespace {

enum Stream : std::uint64_t { kSelection = 1, kMechanisms = 2, kData = 3 };

// First `count` entries of a uniform random permutation of `pool`.
std::vector<int> choose(Rng& rng, std::vector<int> pool, int count) {
  for (int i = 0; i < count; ++i) {
    const auto j = static_cast<std::size_t>(i) +
                   static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(pool.size() - static_cast<std::size_t>(i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(count));
  return pool;
}

std::vector<int> select_partially_observed(const BayesianNetwork& network, double m, std::uint64_t seed) {
  const int n = network.size();
  std::vector<int> all(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) all[static_cast<std::size_t>(v)] = v;
  Rng rng(derive_seed(seed, kSelection));
  auto chosen = choose(rng, std::move(all), partially_observed_count(m, n));
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

std::vector<int> complement(int n, const std::vector<int>& sorted) {
  std::vector<int> out;
  for (int v = 0; v < n; ++v)
    if (!std::binary_search(sorted.begin(), sorted.end(), v)) out.push_back(v);
  return out;
}

Cpt beta_table(Rng& rng, const BayesianNetwork& network, const std::vector<int>& parents, BetaShape beta) {
  std::size_t rows = 1;
  for (int p : parents) rows *= static_cast<std::size_t>(network.cardinality(p));
  Cpt table(static_cast<Eigen::Index>(rows), 2);
  for (std::size_t r = 0; r < rows; ++r) {
    const double unob = sample_beta(rng, beta.alpha, beta.beta);
    table(static_cast<Eigen::Index>(r), 0) = 1.0 - unob;
    table(static_cast<Eigen::Index>(r), 1) = unob;
  }
  return table;
}

void check_beta(BetaShape beta) {
  if (!(beta.alpha > 0.0) || !(beta.beta > 0.0)) throw std::invalid_argument("Beta shape parameters must be positive");
}

}  // namespace

IncompleteDataset sample_incomplete(const MissingnessGraph& graph, std::uint64_t seed, std::int64_t rows) {
  if (rows < 0) throw std::invalid_argument("row count must be nonnegative");
  const BayesianNetwork& network = graph.network();
  validate(network);
  validate(graph);
  const AncestralSampler sampler(network);
  Rng rng(seed);
  const int n = network.size();
  IncompleteDataset::Cells cells(static_cast<Eigen::Index>(rows), n);
  std::vector<int> buffer(static_cast<std::size_t>(n));
  std::vector<char> hide(static_cast<std::size_t>(n));
  for (std::int64_t r = 0; r < rows; ++r) {
    sampler.sample(rng, buffer);
    for (const auto& m : graph.mechanisms()) {
      std::size_t row = 0;
      for (int p : m.parents)
        row = row * static_cast<std::size_t>(network.cardinality(p)) + static_cast<std::size_t>(buffer[static_cast<std::size_t>(p)]);
      hide[static_cast<std::size_t>(m.variable)] = uniform01(rng) < m.table(static_cast<Eigen::Index>(row), 1);
    }
    for (int v = 0; v < n; ++v) {
      const bool hidden = graph.mechanism(v) && hide[static_cast<std::size_t>(v)];
      cells(static_cast<Eigen::Index>(r), v) = hidden ? kMissingCell : buffer[static_cast<std::size_t>(v)];
    }
  }
  IncompleteDataset dataset(graph.network_ptr(), std::move(cells));
  dataset.declare_partially_observed(graph.partially_observed());
  return dataset;
}

Simulation simulate_mcar(std::shared_ptr<const BayesianNetwork> network, double m, double q, std::uint64_t seed,
                         std::int64_t rows) {
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("missing probability must be in [0, 1]");
  const auto xm = select_partially_observed(*network, m, seed);
  std::vector<MechanismSpec> mechanisms;
  for (int v : xm) {
    MechanismSpec spec{v, {}, Cpt(1, 2)};
    spec.table << 1.0 - q, q;
    mechanisms.push_back(std::move(spec));
  }
  MissingnessGraph graph(network, std::move(mechanisms));
  auto dataset = sample_incomplete(graph, derive_seed(seed, kData), rows);
  return {std::move(dataset), std::move(graph)};
}

Simulation simulate_mar(std::shared_ptr<const BayesianNetwork> network, double m, int p, BetaShape beta,
                        std::uint64_t seed, std::int64_t rows) {
  check_beta(beta);
  if (p < 0) throw std::invalid_argument("parent count must be nonnegative");
  const auto xm = select_partially_observed(*network, m, seed);
  const auto xo = complement(network->size(), xm);
  if (!xm.empty() && static_cast<int>(xo.size()) < p)
    throw NotEnoughObservedVariables("need " + std::to_string(p) + " observed variables, have " +
                                     std::to_string(xo.size()));
  Rng rng(derive_seed(seed, kMechanisms));
  std::vector<MechanismSpec> mechanisms;
  for (int x : xm) {
    const int source[] = {x};
    const auto dist = moral_distances(*network, source);
    std::map<int, std::vector<int>> bands;
    for (int o : xo) {
      const int d = dist[static_cast<std::size_t>(o)];
      bands[d < 0 ? std::numeric_limits<int>::max() : d].push_back(o);
    }
    std::vector<int> parents;
    for (auto& [d, band] : bands) {
      const int need = p - static_cast<int>(parents.size());
      if (need <= 0) break;
      const int take = std::min(need, static_cast<int>(band.size()));
      const auto picked = choose(rng, band, take);
      parents.insert(parents.end(), picked.begin(), picked.end());
    }
    std::sort(parents.begin(), parents.end());
    Cpt table = beta_table(rng, *network, parents, beta);
    mechanisms.push_back({x, std::move(parents), std::move(table)});
  }
  MissingnessGraph graph(network, std::move(mechanisms));
  auto dataset = sample_incomplete(graph, derive_seed(seed, kData), rows);
  return {std::move(dataset), std::move(graph)};
}

Simulation simulate_informed_mar(std::shared_ptr<const BayesianNetwork> network, double m, int p, BetaShape beta,
                                 int s, std::uint64_t seed, std::int64_t rows) {
  check_beta(beta);
  if (p < 0 || s < 0) throw std::invalid_argument("parent count and informed set size must be nonnegative");
  const auto xm = select_partially_observed(*network, m, seed);
  const auto xo = complement(network->size(), xm);
  if (static_cast<int>(xo.size()) < s)
    throw NotEnoughObservedVariables("informed set of size " + std::to_string(s) + " needs that many observed variables");
  if (p > s) throw NotEnoughObservedVariables("parent count exceeds the informed set size");
  Rng rng(derive_seed(seed, kMechanisms));
  auto wo = choose(rng, xo, s);
  std::sort(wo.begin(), wo.end());
  std::vector<MechanismSpec> mechanisms;
  for (int x : xm) {
    auto parents = choose(rng, wo, p);
    std::sort(parents.begin(), parents.end());
    Cpt table = beta_table(rng, *network, parents, beta);
    mechanisms.push_back({x, std::move(parents), std::move(table)});
  }
  MissingnessGraph graph(network, std::move(mechanisms), wo);
  auto dataset = sample_incomplete(graph, derive_seed(seed, kData), rows);
  return {std::move(dataset), std::move(graph)};
}

Simulation simulate_mnar_cross(std::shared_ptr<const BayesianNetwork> network, int x, int y, BetaShape beta,
                               std::uint64_t seed, std::int64_t rows) {
  check_beta(beta);
  const int n = network->size();
  if (x < 0 || x >= n || y < 0 || y >= n) throw UnknownVariable("#" + std::to_string(x < 0 || x >= n ? x : y));
  if (x == y) throw std::invalid_argument("cross mechanism needs two distinct variables");
  Rng rng(derive_seed(seed, kMechanisms));
  std::vector<MechanismSpec> mechanisms;
  Cpt tx = beta_table(rng, *network, {y}, beta);
  Cpt ty = beta_table(rng, *network, {x}, beta);
  mechanisms.push_back({x, {y}, std::move(tx)});
  mechanisms.push_back({y, {x}, std::move(ty)});
  MissingnessGraph graph(network, std::move(mechanisms));
  auto dataset = sample_incomplete(graph, derive_seed(seed, kData), rows);
  return {std::move(dataset), std::move(graph)};
}

}  // namespace bnmiss

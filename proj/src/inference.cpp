#include "bnmiss/inference.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>

namespace bnmiss {

namespace {

std::atomic<std::int64_t> g_invocations{0};

// For every entry of a table over `vars` (last fastest), the index of the
// projected entry over `sub` (in sub's own order, last fastest).
std::vector<std::uint32_t> projection_map(const BayesianNetwork& net, const std::vector<int>& vars,
                                          const std::vector<int>& sub) {
  std::size_t size = 1;
  for (int v : vars) size *= static_cast<std::size_t>(net.cardinality(v));
  std::vector<std::size_t> sub_stride(vars.size(), 0);
  std::size_t stride = 1;
  for (std::size_t j = sub.size(); j-- > 0;) {
    const auto pos = std::find(vars.begin(), vars.end(), sub[j]) - vars.begin();
    sub_stride[static_cast<std::size_t>(pos)] = stride;
    stride *= static_cast<std::size_t>(net.cardinality(sub[j]));
  }
  std::vector<std::uint32_t> out(size);
  std::vector<int> digits(vars.size(), 0);
  std::size_t idx = 0;
  for (std::size_t i = 0; i < size; ++i) {
    out[i] = static_cast<std::uint32_t>(idx);
    for (std::size_t j = vars.size(); j-- > 0;) {
      idx += sub_stride[j];
      if (++digits[j] < net.cardinality(vars[j])) break;
      idx -= sub_stride[j] * static_cast<std::size_t>(digits[j]);
      digits[j] = 0;
    }
  }
  return out;
}

double table_size(const BayesianNetwork& net, const std::vector<int>& vars) {
  double size = 1.0;
  for (int v : vars) size *= net.cardinality(v);
  return size;
}

void check_evidence(const BayesianNetwork& net, std::span<const int> evidence) {
  if (static_cast<int>(evidence.size()) != net.size()) throw DimensionMismatch("evidence size does not match the network");
  for (int v = 0; v < net.size(); ++v) {
    const int e = evidence[static_cast<std::size_t>(v)];
    if (e != kUnassigned && (e < 0 || e >= net.cardinality(v)))
      throw DimensionMismatch("evidence state out of range for '" + net.variable(v).name + "'");
  }
}

Eigen::VectorXd child_marginal(const Eigen::VectorXd& family, int card) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(card);
  for (Eigen::Index i = 0; i < family.size(); ++i) out(i % card) += family(i);
  return out;
}

}  // namespace

std::int64_t inference_invocations() { return g_invocations.load(); }

double Jointree::max_clique_states() const {
  double best = 0.0;
  for (const auto& c : cliques_) best = std::max(best, table_size(network_, c));
  return best;
}

int Jointree::width() const {
  std::size_t best = 0;
  for (const auto& c : cliques_) best = std::max(best, c.size());
  return static_cast<int>(best) - 1;
}

Jointree build_jointree(const BayesianNetwork& network) {
  Jointree jt;
  jt.network_ = network;
  const int n = network.size();
  std::vector<std::vector<char>> adj(static_cast<std::size_t>(n), std::vector<char>(static_cast<std::size_t>(n), 0));
  auto link = [&](int a, int b) {
    if (a == b) return;
    adj[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = 1;
    adj[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = 1;
  };
  for (int v = 0; v < n; ++v) {
    const auto family = family_of(network, v);
    for (std::size_t i = 0; i < family.size(); ++i)
      for (std::size_t j = i + 1; j < family.size(); ++j) link(family[i], family[j]);
  }

  std::vector<char> gone(static_cast<std::size_t>(n), 0);
  std::vector<std::vector<int>> raw;
  for (int step = 0; step < n; ++step) {
    int best = -1;
    long best_fill = std::numeric_limits<long>::max();
    for (int v = 0; v < n; ++v) {
      if (gone[static_cast<std::size_t>(v)]) continue;
      std::vector<int> nb;
      for (int u = 0; u < n; ++u)
        if (!gone[static_cast<std::size_t>(u)] && adj[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)]) nb.push_back(u);
      long fill = 0;
      for (std::size_t i = 0; i < nb.size(); ++i)
        for (std::size_t j = i + 1; j < nb.size(); ++j)
          fill += !adj[static_cast<std::size_t>(nb[i])][static_cast<std::size_t>(nb[j])];
      if (fill < best_fill) {
        best_fill = fill;
        best = v;
      }
    }
    std::vector<int> clique{best};
    for (int u = 0; u < n; ++u)
      if (!gone[static_cast<std::size_t>(u)] && adj[static_cast<std::size_t>(best)][static_cast<std::size_t>(u)]) clique.push_back(u);
    for (std::size_t i = 1; i < clique.size(); ++i)
      for (std::size_t j = i + 1; j < clique.size(); ++j) link(clique[i], clique[j]);
    gone[static_cast<std::size_t>(best)] = 1;
    jt.elimination_order_.push_back(best);
    std::sort(clique.begin(), clique.end());
    raw.push_back(std::move(clique));
  }

  for (std::size_t i = 0; i < raw.size(); ++i) {
    bool maximal = true;
    for (std::size_t j = 0; j < raw.size() && maximal; ++j) {
      if (i == j) continue;
      const bool contained = std::includes(raw[j].begin(), raw[j].end(), raw[i].begin(), raw[i].end());
      if (contained && (raw[j].size() > raw[i].size() || j < i)) maximal = false;
    }
    if (maximal) jt.cliques_.push_back(raw[i]);
  }

  const int m = static_cast<int>(jt.cliques_.size());
  struct Candidate {
    std::size_t weight;
    int a;
    int b;
  };
  std::vector<Candidate> pairs;
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      std::vector<int> sep;
      std::set_intersection(jt.cliques_[static_cast<std::size_t>(a)].begin(), jt.cliques_[static_cast<std::size_t>(a)].end(),
                            jt.cliques_[static_cast<std::size_t>(b)].begin(), jt.cliques_[static_cast<std::size_t>(b)].end(),
                            std::back_inserter(sep));
      pairs.push_back({sep.size(), a, b});
    }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Candidate& x, const Candidate& y) { return x.weight > y.weight; });
  std::vector<int> root(static_cast<std::size_t>(m));
  std::iota(root.begin(), root.end(), 0);
  auto find = [&](int x) {
    while (root[static_cast<std::size_t>(x)] != x) x = root[static_cast<std::size_t>(x)] = root[static_cast<std::size_t>(root[static_cast<std::size_t>(x)])];
    return x;
  };
  std::vector<std::vector<int>> tree(static_cast<std::size_t>(m));
  for (const auto& p : pairs) {
    const int ra = find(p.a);
    const int rb = find(p.b);
    if (ra == rb) continue;
    root[static_cast<std::size_t>(ra)] = rb;
    tree[static_cast<std::size_t>(p.a)].push_back(p.b);
    tree[static_cast<std::size_t>(p.b)].push_back(p.a);
  }
  if (m > 0) {
    std::vector<char> seen(static_cast<std::size_t>(m), 0);
    std::vector<int> queue{0};
    seen[0] = 1;
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const int c = queue[q];
      auto& nbrs = tree[static_cast<std::size_t>(c)];
      std::sort(nbrs.begin(), nbrs.end());
      for (int d : nbrs) {
        if (seen[static_cast<std::size_t>(d)]) continue;
        seen[static_cast<std::size_t>(d)] = 1;
        queue.push_back(d);
        jt.edges_.emplace_back(c, d);
        std::vector<int> sep;
        std::set_intersection(jt.cliques_[static_cast<std::size_t>(c)].begin(), jt.cliques_[static_cast<std::size_t>(c)].end(),
                              jt.cliques_[static_cast<std::size_t>(d)].begin(), jt.cliques_[static_cast<std::size_t>(d)].end(),
                              std::back_inserter(sep));
        jt.separators_.push_back(std::move(sep));
      }
    }
  }

  jt.home_.assign(static_cast<std::size_t>(n), -1);
  for (int v = 0; v < n; ++v) {
    auto family = family_of(network, v);
    std::sort(family.begin(), family.end());
    for (int c = 0; c < m; ++c) {
      const auto& clique = jt.cliques_[static_cast<std::size_t>(c)];
      if (std::includes(clique.begin(), clique.end(), family.begin(), family.end())) {
        jt.home_[static_cast<std::size_t>(v)] = c;
        break;
      }
    }
    if (jt.home_[static_cast<std::size_t>(v)] < 0) throw std::logic_error("jointree: family not covered by any clique");
  }
  if (!has_running_intersection(jt)) throw std::logic_error("jointree: running intersection property violated");
  return jt;
}

bool has_running_intersection(const Jointree& jt) {
  const int n = jt.network().size();
  for (int v = 0; v < n; ++v) {
    std::vector<char> holds(jt.cliques().size(), 0);
    int count = 0;
    for (std::size_t c = 0; c < jt.cliques().size(); ++c) {
      const auto& clique = jt.cliques()[c];
      if (std::binary_search(clique.begin(), clique.end(), v)) {
        holds[c] = 1;
        ++count;
      }
    }
    int links = 0;
    for (const auto& [a, b] : jt.edges()) links += holds[static_cast<std::size_t>(a)] && holds[static_cast<std::size_t>(b)];
    if (count > 0 && links != count - 1) return false;
  }
  return true;
}

JointreeSession::JointreeSession(const Jointree& jt, double max_table_entries) : jt_(&jt) {
  const BayesianNetwork& net = jt.network();
  for (const auto& c : jt.cliques()) {
    const double size = table_size(net, c);
    if (size > max_table_entries)
      throw StateSpaceTooLarge("jointree clique with " + std::to_string(static_cast<long double>(size)) + " states");
    potentials_.emplace_back(static_cast<Eigen::Index>(size));
  }
  for (std::size_t e = 0; e < jt.edges().size(); ++e) {
    const auto [p, c] = jt.edges()[e];
    const auto& sep = jt.separators()[e];
    Edge edge{p, c, static_cast<std::size_t>(table_size(net, sep)),
              projection_map(net, jt.cliques()[static_cast<std::size_t>(p)], sep),
              projection_map(net, jt.cliques()[static_cast<std::size_t>(c)], sep)};
    messages_.emplace_back(static_cast<Eigen::Index>(edge.separator_size));
    edges_.push_back(std::move(edge));
  }
  for (int v = 0; v < net.size(); ++v) {
    const auto& clique = jt.cliques()[static_cast<std::size_t>(jt.home()[static_cast<std::size_t>(v)])];
    cpt_map_.push_back(projection_map(net, clique, family_of(net, v)));
    std::size_t stride = 1;
    for (std::size_t j = clique.size(); j-- > 0;) {
      if (clique[j] == v) break;
      stride *= static_cast<std::size_t>(net.cardinality(clique[j]));
    }
    evidence_stride_.push_back(stride);
  }
}

double JointreeSession::propagate(const BayesianNetwork& params, std::span<const int> evidence) {
  ++g_invocations;
  const BayesianNetwork& net = jt_->network();
  if (params.size() != net.size()) throw StructureMismatch("parameters do not match the jointree");
  check_evidence(net, evidence);
  if (potentials_.empty()) return 0.0;
  for (auto& p : potentials_) p.setOnes();
  for (int v = 0; v < net.size(); ++v) {
    Eigen::VectorXd& pot = potentials_[static_cast<std::size_t>(jt_->home()[static_cast<std::size_t>(v)])];
    const double* cpt = params.cpt(v).data();
    const auto& map = cpt_map_[static_cast<std::size_t>(v)];
    const int e = evidence[static_cast<std::size_t>(v)];
    const std::size_t stride = evidence_stride_[static_cast<std::size_t>(v)];
    const auto card = static_cast<std::size_t>(net.cardinality(v));
    for (Eigen::Index i = 0; i < pot.size(); ++i) {
      if (e != kUnassigned && (static_cast<std::size_t>(i) / stride) % card != static_cast<std::size_t>(e)) {
        pot(i) = 0.0;
      } else {
        pot(i) *= cpt[map[static_cast<std::size_t>(i)]];
      }
    }
  }
  double log_z = 0.0;
  for (std::size_t k = edges_.size(); k-- > 0;) {
    const Edge& e = edges_[k];
    Eigen::VectorXd& msg = messages_[k];
    const Eigen::VectorXd& child = potentials_[static_cast<std::size_t>(e.child)];
    msg.setZero();
    for (Eigen::Index i = 0; i < child.size(); ++i) msg(e.child_map[static_cast<std::size_t>(i)]) += child(i);
    const double z = msg.sum();
    if (!(z > 0.0)) throw ZeroProbabilityEvidence("evidence has probability zero");
    msg /= z;
    log_z += std::log(z);
    Eigen::VectorXd& parent = potentials_[static_cast<std::size_t>(e.parent)];
    for (Eigen::Index i = 0; i < parent.size(); ++i) parent(i) *= msg(e.parent_map[static_cast<std::size_t>(i)]);
  }
  const double z = potentials_[0].sum();
  if (!(z > 0.0)) throw ZeroProbabilityEvidence("evidence has probability zero");
  potentials_[0] /= z;
  log_z += std::log(z);
  Eigen::VectorXd update;
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const Edge& e = edges_[k];
    const Eigen::VectorXd& parent = potentials_[static_cast<std::size_t>(e.parent)];
    update = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(e.separator_size));
    for (Eigen::Index i = 0; i < parent.size(); ++i) update(e.parent_map[static_cast<std::size_t>(i)]) += parent(i);
    Eigen::VectorXd& child = potentials_[static_cast<std::size_t>(e.child)];
    const Eigen::VectorXd& old = messages_[k];
    for (Eigen::Index i = 0; i < child.size(); ++i) {
      const double o = old(e.child_map[static_cast<std::size_t>(i)]);
      child(i) = o == 0.0 ? 0.0 : child(i) * update(e.child_map[static_cast<std::size_t>(i)]) / o;
    }
    const double s = child.sum();
    if (s > 0.0) child /= s;
  }
  return log_z;
}

void JointreeSession::accumulate_families(std::vector<Eigen::VectorXd>& counts, double weight) const {
  for (std::size_t v = 0; v < cpt_map_.size(); ++v) {
    const Eigen::VectorXd& pot = potentials_[static_cast<std::size_t>(jt_->home()[v])];
    const auto& map = cpt_map_[v];
    Eigen::VectorXd& out = counts[v];
    for (Eigen::Index i = 0; i < pot.size(); ++i) out(map[static_cast<std::size_t>(i)]) += weight * pot(i);
  }
}

MarginalSet JointreeSession::marginals() const {
  const BayesianNetwork& net = jt_->network();
  MarginalSet out;
  for (int v = 0; v < net.size(); ++v) {
    out.families.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.parent_configurations(v)) * net.cardinality(v)));
  }
  accumulate_families(out.families, 1.0);
  for (int v = 0; v < net.size(); ++v)
    out.variables.push_back(child_marginal(out.families[static_cast<std::size_t>(v)], net.cardinality(v)));
  return out;
}

InferenceResult jointree_marginals(const Jointree& jt, const Instantiation& evidence) {
  JointreeSession session(jt);
  InferenceResult result;
  result.log_evidence = session.propagate(jt.network(), evidence.states());
  result.marginals = session.marginals();
  return result;
}

BpResult loopy_bp_marginals(const BayesianNetwork& network, const Instantiation& evidence, BpOptions options) {
  if (options.max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  if (options.damping < 0.0 || options.damping >= 1.0) throw std::invalid_argument("damping must be in [0, 1)");
  check_evidence(network, evidence.states());
  ++g_invocations;
  const int n = network.size();

  // Factor v: family of v with the CPT and v's evidence folded in.
  std::vector<std::vector<int>> scope(static_cast<std::size_t>(n));
  std::vector<Eigen::VectorXd> factor(static_cast<std::size_t>(n));
  std::vector<std::vector<std::pair<int, int>>> var_factors(static_cast<std::size_t>(n));  // (factor, slot)
  for (int v = 0; v < n; ++v) {
    scope[static_cast<std::size_t>(v)] = family_of(network, v);
    const Cpt& cpt = network.cpt(v);
    Eigen::VectorXd f = Eigen::Map<const Eigen::VectorXd>(cpt.data(), cpt.size());
    const int e = evidence[static_cast<std::size_t>(v)];
    if (e != kUnassigned) {
      const int card = network.cardinality(v);
      for (Eigen::Index i = 0; i < f.size(); ++i)
        if (i % card != e) f(i) = 0.0;
    }
    factor[static_cast<std::size_t>(v)] = std::move(f);
    for (std::size_t s = 0; s < scope[static_cast<std::size_t>(v)].size(); ++s)
      var_factors[static_cast<std::size_t>(scope[static_cast<std::size_t>(v)][s])].emplace_back(v, static_cast<int>(s));
  }
  // Per factor slot: messages variable->factor and factor->variable.
  std::vector<std::vector<Eigen::VectorXd>> to_factor(static_cast<std::size_t>(n));
  std::vector<std::vector<Eigen::VectorXd>> to_var(static_cast<std::size_t>(n));
  std::vector<std::vector<std::size_t>> strides(static_cast<std::size_t>(n));
  for (int f = 0; f < n; ++f) {
    const auto& sc = scope[static_cast<std::size_t>(f)];
    std::size_t stride = 1;
    strides[static_cast<std::size_t>(f)].resize(sc.size());
    for (std::size_t s = sc.size(); s-- > 0;) {
      strides[static_cast<std::size_t>(f)][s] = stride;
      stride *= static_cast<std::size_t>(network.cardinality(sc[s]));
    }
    for (int u : sc) {
      const int card = network.cardinality(u);
      to_factor[static_cast<std::size_t>(f)].push_back(Eigen::VectorXd::Constant(card, 1.0 / card));
      to_var[static_cast<std::size_t>(f)].push_back(Eigen::VectorXd::Constant(card, 1.0 / card));
    }
  }
  auto digit = [&](int f, std::size_t s, Eigen::Index i) {
    return static_cast<Eigen::Index>((static_cast<std::size_t>(i) / strides[static_cast<std::size_t>(f)][s]) %
                                     static_cast<std::size_t>(network.cardinality(scope[static_cast<std::size_t>(f)][s])));
  };
  auto normalize = [](Eigen::VectorXd& m) {
    const double s = m.sum();
    if (s > 0.0) {
      m /= s;
    } else {
      m.setConstant(1.0 / static_cast<double>(m.size()));
    }
  };

  BpResult result;
  Eigen::VectorXd fresh;
  for (int iter = 1; iter <= options.max_iters; ++iter) {
    result.iterations = iter;
    for (int v = 0; v < n; ++v) {
      const auto& links = var_factors[static_cast<std::size_t>(v)];
      for (const auto& [f, s] : links) {
        Eigen::VectorXd m = Eigen::VectorXd::Ones(network.cardinality(v));
        for (const auto& [g, t] : links)
          if (g != f) m.array() *= to_var[static_cast<std::size_t>(g)][static_cast<std::size_t>(t)].array();
        normalize(m);
        to_factor[static_cast<std::size_t>(f)][static_cast<std::size_t>(s)] = std::move(m);
      }
    }
    double delta = 0.0;
    for (int f = 0; f < n; ++f) {
      const auto& sc = scope[static_cast<std::size_t>(f)];
      const Eigen::VectorXd& table = factor[static_cast<std::size_t>(f)];
      for (std::size_t s = 0; s < sc.size(); ++s) {
        fresh = Eigen::VectorXd::Zero(network.cardinality(sc[s]));
        for (Eigen::Index i = 0; i < table.size(); ++i) {
          double w = table(i);
          if (w == 0.0) continue;
          for (std::size_t u = 0; u < sc.size() && w != 0.0; ++u)
            if (u != s) w *= to_factor[static_cast<std::size_t>(f)][u](digit(f, u, i));
          fresh(digit(f, s, i)) += w;
        }
        normalize(fresh);
        Eigen::VectorXd& old = to_var[static_cast<std::size_t>(f)][s];
        Eigen::VectorXd next = (1.0 - options.damping) * fresh + options.damping * old;
        normalize(next);
        delta = std::max(delta, (next - old).cwiseAbs().maxCoeff());
        old = std::move(next);
      }
    }
    if (delta < options.tolerance) {
      result.converged = true;
      break;
    }
  }
  for (int v = 0; v < n; ++v) {
    const auto& links = var_factors[static_cast<std::size_t>(v)];
    for (const auto& [f, s] : links) {
      Eigen::VectorXd m = Eigen::VectorXd::Ones(network.cardinality(v));
      for (const auto& [g, t] : links)
        if (g != f) m.array() *= to_var[static_cast<std::size_t>(g)][static_cast<std::size_t>(t)].array();
      normalize(m);
      to_factor[static_cast<std::size_t>(f)][static_cast<std::size_t>(s)] = std::move(m);
    }
  }

  double log_z = 0.0;
  for (int f = 0; f < n; ++f) {
    const auto& sc = scope[static_cast<std::size_t>(f)];
    const Eigen::VectorXd& table = factor[static_cast<std::size_t>(f)];
    Eigen::VectorXd belief(table.size());
    for (Eigen::Index i = 0; i < table.size(); ++i) {
      double w = table(i);
      for (std::size_t u = 0; u < sc.size() && w != 0.0; ++u) w *= to_factor[static_cast<std::size_t>(f)][u](digit(f, u, i));
      belief(i) = w;
    }
    const double z = belief.sum();
    if (!(z > 0.0)) throw ZeroProbabilityEvidence("evidence has probability zero");
    belief /= z;
    for (Eigen::Index i = 0; i < table.size(); ++i)
      if (belief(i) > 0.0) log_z -= belief(i) * std::log(belief(i) / table(i));
    result.marginals.families.push_back(std::move(belief));
  }
  for (int v = 0; v < n; ++v) {
    Eigen::VectorXd b = Eigen::VectorXd::Ones(network.cardinality(v));
    const auto& links = var_factors[static_cast<std::size_t>(v)];
    for (const auto& [g, t] : links) b.array() *= to_var[static_cast<std::size_t>(g)][static_cast<std::size_t>(t)].array();
    normalize(b);
    const double degree = static_cast<double>(links.size());
    for (Eigen::Index i = 0; i < b.size(); ++i)
      if (b(i) > 0.0) log_z += (degree - 1.0) * b(i) * std::log(b(i));
    result.marginals.variables.push_back(std::move(b));
  }
  result.log_evidence = log_z;
  return result;
}

InferenceResult brute_force_marginals(const BayesianNetwork& network, const Instantiation& evidence) {
  check_evidence(network, evidence.states());
  double bits = 0.0;
  for (int v = 0; v < network.size(); ++v) bits += std::log2(static_cast<double>(network.cardinality(v)));
  if (bits > kMaxBruteForceBits + 1e-9)
    throw StateSpaceTooLarge("brute force needs at most 2^" + std::to_string(kMaxBruteForceBits) + " joint states");
  ++g_invocations;
  const int n = network.size();
  InferenceResult result;
  for (int v = 0; v < n; ++v)
    result.marginals.families.push_back(
        Eigen::VectorXd::Zero(static_cast<Eigen::Index>(network.parent_configurations(v)) * network.cardinality(v)));
  std::vector<int> state(static_cast<std::size_t>(n), 0);
  for (int v = 0; v < n; ++v)
    if (evidence.assigned(static_cast<std::size_t>(v))) state[static_cast<std::size_t>(v)] = evidence[static_cast<std::size_t>(v)];
  double total = 0.0;
  std::vector<std::size_t> index(static_cast<std::size_t>(n));
  while (true) {
    double p = 1.0;
    for (int v = 0; v < n && p != 0.0; ++v) {
      const std::size_t row = network.parent_row(v, state);
      index[static_cast<std::size_t>(v)] = row * static_cast<std::size_t>(network.cardinality(v)) +
                                           static_cast<std::size_t>(state[static_cast<std::size_t>(v)]);
      p *= network.cpt(v)(static_cast<Eigen::Index>(row), state[static_cast<std::size_t>(v)]);
    }
    if (p != 0.0) {
      total += p;
      for (int v = 0; v < n; ++v)
        result.marginals.families[static_cast<std::size_t>(v)](static_cast<Eigen::Index>(index[static_cast<std::size_t>(v)])) += p;
    }
    int v = n - 1;
    for (; v >= 0; --v) {
      if (evidence.assigned(static_cast<std::size_t>(v))) continue;
      if (++state[static_cast<std::size_t>(v)] < network.cardinality(v)) break;
      state[static_cast<std::size_t>(v)] = 0;
    }
    if (v < 0) break;
  }
  if (!(total > 0.0)) throw ZeroProbabilityEvidence("evidence has probability zero");
  for (int v = 0; v < n; ++v) {
    result.marginals.families[static_cast<std::size_t>(v)] /= total;
    result.marginals.variables.push_back(child_marginal(result.marginals.families[static_cast<std::size_t>(v)], network.cardinality(v)));
  }
  result.log_evidence = std::log(total);
  return result;
}

double test_log_likelihood(const BayesianNetwork& network, const IncompleteDataset& test) {
  if (test.rows() == 0) throw std::invalid_argument("test set is empty");
  if (test.columns() != network.size()) throw DimensionMismatch("test set does not match the network");
  double sum = 0.0;
  const auto& cells = test.cells();
  for (std::int64_t r = 0; r < test.rows(); ++r) {
    std::span<const int> row(cells.data() + r * test.columns(), static_cast<std::size_t>(test.columns()));
    if (std::find(row.begin(), row.end(), kMissingCell) != row.end())
      throw std::invalid_argument("test set must be fully observed");
    const double lp = log_joint_probability(network, row);
    if (!std::isfinite(lp)) throw ZeroProbabilityInstance(r);
    sum += lp;
  }
  return sum / static_cast<double>(test.rows());
}

double kl_divergence(const BayesianNetwork& truth, const BayesianNetwork& learned) {
  const Jointree jt = build_jointree(truth);
  return kl_divergence(truth, learned, jointree_marginals(jt, Instantiation(static_cast<std::size_t>(truth.size()))).marginals);
}

double kl_divergence(const BayesianNetwork& truth, const BayesianNetwork& learned, const MarginalSet& prior) {
  if (!same_structure(truth, learned)) throw StructureMismatch("networks differ in variables or structure");
  if (prior.families.size() != static_cast<std::size_t>(truth.size()))
    throw StructureMismatch("prior marginals do not match the network");
  double kl = 0.0;
  for (int v = 0; v < truth.size(); ++v) {
    const Cpt& p = truth.cpt(v);
    const Cpt& q = learned.cpt(v);
    const Eigen::VectorXd& family = prior.families[static_cast<std::size_t>(v)];
    for (Eigen::Index u = 0; u < p.rows(); ++u) {
      const double pu = family.segment(u * p.cols(), p.cols()).sum();
      if (pu <= 0.0) continue;
      double row = 0.0;
      for (Eigen::Index x = 0; x < p.cols(); ++x) {
        const double px = p(u, x);
        if (px <= 0.0) continue;
        if (q(u, x) <= 0.0) return std::numeric_limits<double>::infinity();
        row += px * std::log(px / q(u, x));
      }
      kl += pu * row;
    }
  }
  return kl;
}

}  // namespace bnmiss

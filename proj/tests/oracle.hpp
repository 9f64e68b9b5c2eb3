#pragma once

// Reference computations written directly from definitions, sharing no code
// with the library beyond its data types.

#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "bnmiss/network.hpp"

namespace oracle {

using bnmiss::BayesianNetwork;

inline double joint(const BayesianNetwork& net, const std::vector<int>& x) {
  double p = 1.0;
  for (int v = 0; v < net.size(); ++v) {
    std::size_t row = 0;
    for (int u : net.parents(v)) row = row * static_cast<std::size_t>(net.cardinality(u)) + static_cast<std::size_t>(x[static_cast<std::size_t>(u)]);
    p *= net.cpt(v)(static_cast<Eigen::Index>(row), x[static_cast<std::size_t>(v)]);
  }
  return p;
}

inline void for_each_state(const BayesianNetwork& net, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> x(static_cast<std::size_t>(net.size()), 0);
  while (true) {
    f(x);
    int v = net.size() - 1;
    for (; v >= 0; --v) {
      if (++x[static_cast<std::size_t>(v)] < net.cardinality(v)) break;
      x[static_cast<std::size_t>(v)] = 0;
    }
    if (v < 0) return;
  }
}

// Pr(family(v) | evidence), parents then child, last fastest. evidence -1 = free.
inline std::vector<Eigen::VectorXd> family_posteriors(const BayesianNetwork& net, const std::vector<int>& evidence) {
  std::vector<Eigen::VectorXd> out;
  for (int v = 0; v < net.size(); ++v)
    out.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.cpt(v).size())));
  double z = 0.0;
  for_each_state(net, [&](const std::vector<int>& x) {
    for (int v = 0; v < net.size(); ++v)
      if (evidence[static_cast<std::size_t>(v)] >= 0 && evidence[static_cast<std::size_t>(v)] != x[static_cast<std::size_t>(v)]) return;
    const double p = joint(net, x);
    z += p;
    for (int v = 0; v < net.size(); ++v) {
      std::size_t idx = 0;
      for (int u : net.parents(v)) idx = idx * static_cast<std::size_t>(net.cardinality(u)) + static_cast<std::size_t>(x[static_cast<std::size_t>(u)]);
      idx = idx * static_cast<std::size_t>(net.cardinality(v)) + static_cast<std::size_t>(x[static_cast<std::size_t>(v)]);
      out[static_cast<std::size_t>(v)](static_cast<Eigen::Index>(idx)) += p;
    }
  });
  for (auto& t : out) t /= z;
  return out;
}

inline double evidence_probability(const BayesianNetwork& net, const std::vector<int>& evidence) {
  double z = 0.0;
  for_each_state(net, [&](const std::vector<int>& x) {
    for (int v = 0; v < net.size(); ++v)
      if (evidence[static_cast<std::size_t>(v)] >= 0 && evidence[static_cast<std::size_t>(v)] != x[static_cast<std::size_t>(v)]) return;
    z += joint(net, x);
  });
  return z;
}

// KL over the full joint.
inline double joint_kl(const BayesianNetwork& p, const BayesianNetwork& q) {
  double kl = 0.0;
  for_each_state(p, [&](const std::vector<int>& x) {
    const double a = joint(p, x);
    if (a > 0.0) kl += a * std::log(a / joint(q, x));
  });
  return kl;
}

// Maximum-likelihood CPTs from complete rows with a Dirichlet(alpha) MAP.
inline std::vector<bnmiss::Cpt> map_cpts(const BayesianNetwork& net, const std::vector<std::vector<int>>& rows,
                                         double alpha) {
  std::vector<bnmiss::Cpt> out;
  for (int v = 0; v < net.size(); ++v) {
    bnmiss::Cpt c = bnmiss::Cpt::Zero(net.cpt(v).rows(), net.cpt(v).cols());
    for (const auto& x : rows) {
      std::size_t row = 0;
      for (int u : net.parents(v)) row = row * static_cast<std::size_t>(net.cardinality(u)) + static_cast<std::size_t>(x[static_cast<std::size_t>(u)]);
      c(static_cast<Eigen::Index>(row), x[static_cast<std::size_t>(v)]) += 1.0;
    }
    for (Eigen::Index r = 0; r < c.rows(); ++r) {
      double den = 0.0;
      for (Eigen::Index k = 0; k < c.cols(); ++k) den += std::max(c(r, k) + alpha - 1.0, 0.0);
      for (Eigen::Index k = 0; k < c.cols(); ++k)
        c(r, k) = den > 0.0 ? std::max(c(r, k) + alpha - 1.0, 0.0) / den : 1.0 / static_cast<double>(c.cols());
    }
    out.push_back(std::move(c));
  }
  return out;
}

inline double max_abs_diff(const BayesianNetwork& a, const BayesianNetwork& b) {
  double d = 0.0;
  for (int v = 0; v < a.size(); ++v) d = std::max(d, (a.cpt(v) - b.cpt(v)).cwiseAbs().maxCoeff());
  return d;
}

inline double max_abs_diff(const std::vector<bnmiss::Cpt>& a, const BayesianNetwork& b) {
  double d = 0.0;
  for (int v = 0; v < b.size(); ++v) d = std::max(d, (a[static_cast<std::size_t>(v)] - b.cpt(v)).cwiseAbs().maxCoeff());
  return d;
}

}  // namespace oracle

#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "bnmiss/inference.hpp"
#include "bnmiss/model_io.hpp"
#include "bnmiss/rng.hpp"
#include "oracle.hpp"

using namespace bnmiss;

namespace {

BayesianNetwork random_net(int n, int parents, int states, std::uint64_t seed) {
  RandomNetworkOptions opt;
  opt.variables = n;
  opt.max_parents = parents;
  opt.max_states = states;
  return random_network(opt, seed);
}

std::vector<int> random_evidence(const BayesianNetwork& net, std::uint64_t seed) {
  Rng rng(seed);
  const auto full = forward_sample(net, seed, 1)[0];
  std::vector<int> ev(static_cast<std::size_t>(net.size()), kUnassigned);
  for (int v = 0; v < net.size(); ++v)
    if (uniform01(rng) < 0.3) ev[static_cast<std::size_t>(v)] = full[static_cast<std::size_t>(v)];
  return ev;
}

}  // namespace

TEST(Inference, JointreeIsValid) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto net = random_net(10, 3, 3, s);
    const auto jt = build_jointree(net);
    EXPECT_TRUE(has_running_intersection(jt));
    EXPECT_EQ(jt.edges().size() + 1, jt.cliques().size());
    EXPECT_EQ(jt.elimination_order().size(), 10u);
    for (int v = 0; v < net.size(); ++v) {
      const auto& clique = jt.cliques()[static_cast<std::size_t>(jt.home()[static_cast<std::size_t>(v)])];
      for (int u : family_of(net, v)) EXPECT_TRUE(std::binary_search(clique.begin(), clique.end(), u));
    }
  }
}

TEST(Inference, JointreeMatchesEnumerationOracle) {
  for (std::uint64_t s = 0; s < 40; ++s) {
    const auto net = random_net(7, 3, 3, s);
    const auto ev = random_evidence(net, s + 1000);
    const auto truth = oracle::family_posteriors(net, ev);
    const auto jt = build_jointree(net);
    const auto res = jointree_marginals(jt, Instantiation(ev));
    for (int v = 0; v < net.size(); ++v)
      EXPECT_LT((res.marginals.families[static_cast<std::size_t>(v)] - truth[static_cast<std::size_t>(v)]).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(res.log_evidence, std::log(oracle::evidence_probability(net, ev)), 1e-10);
    const auto bf = brute_force_marginals(net, Instantiation(ev));
    for (int v = 0; v < net.size(); ++v)
      EXPECT_LT((bf.marginals.families[static_cast<std::size_t>(v)] - truth[static_cast<std::size_t>(v)]).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(bf.log_evidence, res.log_evidence, 1e-10);
  }
}

TEST(Inference, SessionIsReusableAcrossParameters) {
  const auto net = random_net(8, 2, 2, 3);
  const auto jt = build_jointree(net);
  JointreeSession session(jt);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto ev = random_evidence(net, s);
    session.propagate(net, ev);
    const auto m = session.marginals();
    const auto truth = oracle::family_posteriors(net, ev);
    for (int v = 0; v < net.size(); ++v)
      EXPECT_LT((m.families[static_cast<std::size_t>(v)] - truth[static_cast<std::size_t>(v)]).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Inference, ZeroProbabilityEvidence) {
  std::vector<Variable> vars{{"A", {"0", "1"}}, {"B", {"0", "1"}}};
  Cpt a(1, 2);
  a << 1.0, 0.0;
  Cpt b(2, 2);
  b << 0.5, 0.5, 0.5, 0.5;
  const BayesianNetwork net("z", vars, {{}, {0}}, {a, b});
  const auto jt = build_jointree(net);
  EXPECT_THROW(jointree_marginals(jt, Instantiation(std::vector<int>{1, kUnassigned})), ZeroProbabilityEvidence);
  EXPECT_THROW(brute_force_marginals(net, Instantiation(std::vector<int>{1, kUnassigned})), ZeroProbabilityEvidence);
}

TEST(Inference, StateSpaceLimits) {
  const auto net = random_net(22, 1, 2, 4);
  EXPECT_THROW(brute_force_marginals(net, Instantiation(22)), StateSpaceTooLarge);
  const auto jt = build_jointree(net);
  EXPECT_THROW(JointreeSession(jt, 1.0), StateSpaceTooLarge);
}

TEST(Inference, BeliefPropagationIsExactOnPolytrees) {
  // Chain and tree structures: every variable has at most one parent.
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto net = random_net(8, 1, 3, s);
    const auto ev = random_evidence(net, s + 77);
    BpOptions opt;
    opt.max_iters = 200;
    opt.tolerance = 1e-13;
    const auto bp = loopy_bp_marginals(net, Instantiation(ev), opt);
    EXPECT_TRUE(bp.converged);
    const auto truth = oracle::family_posteriors(net, ev);
    for (int v = 0; v < net.size(); ++v)
      EXPECT_LT((bp.marginals.families[static_cast<std::size_t>(v)] - truth[static_cast<std::size_t>(v)]).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_NEAR(bp.log_evidence, std::log(oracle::evidence_probability(net, ev)), 1e-8);
  }
}

TEST(Inference, BeliefPropagationApproximatesLoopyNetworks) {
  const auto net = random_net(8, 3, 2, 12);
  const auto ev = random_evidence(net, 5);
  const auto bp = loopy_bp_marginals(net, Instantiation(ev));
  const auto truth = oracle::family_posteriors(net, ev);
  for (int v = 0; v < net.size(); ++v) {
    EXPECT_NEAR(bp.marginals.families[static_cast<std::size_t>(v)].sum(), 1.0, 1e-12);
    EXPECT_LT((bp.marginals.families[static_cast<std::size_t>(v)] - truth[static_cast<std::size_t>(v)]).cwiseAbs().maxCoeff(), 0.2);
  }
  EXPECT_THROW(loopy_bp_marginals(net, Instantiation(ev), {0, 0.5, 1e-6}), std::invalid_argument);
}

TEST(Inference, KlDivergenceMatchesJointOracle) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto p = random_net(7, 3, 3, s);
    // Same structure, different parameters.
    std::vector<Cpt> cpts;
    for (int v = 0; v < p.size(); ++v) {
      Rng rng(s * 31 + static_cast<std::uint64_t>(v));
      Cpt c(p.cpt(v).rows(), p.cpt(v).cols());
      for (Eigen::Index r = 0; r < c.rows(); ++r) c.row(r) = sample_dirichlet(rng, static_cast<int>(c.cols()), 1.0).transpose();
      cpts.push_back(c);
    }
    const auto learned = p.with_cpts(cpts);
    EXPECT_NEAR(kl_divergence(p, learned), oracle::joint_kl(p, learned), 1e-10);
    EXPECT_NEAR(kl_divergence(p, p), 0.0, 1e-15);
  }
}

TEST(Inference, KlDivergenceEdgeCases) {
  const auto p = random_net(4, 2, 2, 1);
  EXPECT_THROW(kl_divergence(p, random_net(5, 2, 2, 1)), StructureMismatch);
  auto cpts = p.cpts();
  cpts[0].row(0) << 1.0, 0.0;
  EXPECT_TRUE(std::isinf(kl_divergence(p, p.with_cpts(cpts))));
}

TEST(Inference, TestLogLikelihood) {
  auto net = std::make_shared<const BayesianNetwork>(parse_network(read_file(std::string(BNMISS_DATA) + "/xy.bif")));
  const auto ds = read_dataset("X,Y\nx0,y0\nx1,y1\n", net);
  EXPECT_NEAR(test_log_likelihood(*net, ds), 0.5 * (std::log(0.3 * 0.9) + std::log(0.7 * 0.8)), 1e-15);
  EXPECT_THROW(test_log_likelihood(*net, read_dataset("X,Y\nx0,?\n", net)), std::invalid_argument);
  EXPECT_THROW(test_log_likelihood(*net, read_dataset("X,Y\n", net)), std::invalid_argument);
  auto cpts = net->cpts();
  cpts[1].row(1) << 1.0, 0.0;
  try {
    test_log_likelihood(net->with_cpts(cpts), ds);
    FAIL();
  } catch (const ZeroProbabilityInstance& e) {
    EXPECT_EQ(e.row(), 1);
  }
}

TEST(Inference, InvocationCounter) {
  const auto net = random_net(5, 2, 2, 2);
  const auto before = inference_invocations();
  jointree_marginals(build_jointree(net), Instantiation(5));
  loopy_bp_marginals(net, Instantiation(5));
  brute_force_marginals(net, Instantiation(5));
  EXPECT_EQ(inference_invocations() - before, 3);
}

#include <gtest/gtest.h>

#include <memory>

#include "bnmiss/em.hpp"
#include "bnmiss/estimators.hpp"
#include "bnmiss/missingness.hpp"
#include "oracle.hpp"

using namespace bnmiss;

namespace {

std::shared_ptr<const BayesianNetwork> random_net(int n, std::uint64_t seed) {
  RandomNetworkOptions opt;
  opt.variables = n;
  opt.max_parents = 2;
  opt.max_states = 3;
  return std::make_shared<const BayesianNetwork>(random_network(opt, seed));
}

}  // namespace

TEST(Em, CompleteDataConvergesToClosedForm) {
  auto net = random_net(5, 1);
  const auto rows = forward_sample(*net, 2, 400);
  std::vector<std::vector<int>> raw;
  for (const auto& r : rows) raw.emplace_back(r.states().begin(), r.states().end());
  const auto ds = complete_dataset(net, rows);
  EmConfig cfg;
  cfg.seed = 3;
  for (double prior : {1.0, 2.0}) {
    cfg.prior = prior;
    const auto res = em_learn(*net, ds, cfg);
    EXPECT_LE(res.trace.iterations(), 2u);
    EXPECT_LT(oracle::max_abs_diff(oracle::map_cpts(*net, raw, prior), res.network), 1e-12);
  }
}

TEST(Em, SingleIterationOnCompleteDataIsClosedForm) {
  auto net = random_net(4, 5);
  const auto ds = complete_dataset(net, forward_sample(*net, 6, 100));
  const auto start = random_parameters(*net, 1);
  const auto step = em_iteration(start, ds, InferenceEngine::kJointree, 2.0);
  const auto closed = extract_parameters(*net, direct_deletion_mcar, augment(ds), 2.0);
  EXPECT_LT(oracle::max_abs_diff(step.params, closed), 1e-12);
  const auto again = em_iteration(step.params, ds, InferenceEngine::kJointree, 2.0);
  EXPECT_LT(oracle::max_abs_diff(again.params, step.params), 1e-12);
}

TEST(Em, EmptyDatasetGivesUniform) {
  auto net = random_net(3, 7);
  const IncompleteDataset ds(net, IncompleteDataset::Cells(0, 3));
  const auto res = em_learn(*net, ds, EmConfig{});
  for (int v = 0; v < net->size(); ++v)
    EXPECT_LT((res.network.cpt(v).array() - 1.0 / net->cardinality(v)).abs().maxCoeff(), 1e-15);
}

TEST(Em, LogLikelihoodMatchesEnumeration) {
  auto net = random_net(5, 9);
  const auto sim = simulate_mcar(net, 0.6, 0.5, 4, 50);
  const auto params = random_parameters(*net, 2);
  const auto step = em_iteration(params, sim.dataset, InferenceEngine::kJointree, 1.0);
  double ll = 0.0;
  for (std::int64_t r = 0; r < sim.dataset.rows(); ++r) {
    std::vector<int> ev(static_cast<std::size_t>(net->size()));
    for (int v = 0; v < net->size(); ++v) ev[static_cast<std::size_t>(v)] = sim.dataset(r, v);
    ll += std::log(oracle::evidence_probability(params, ev));
  }
  EXPECT_NEAR(step.log_likelihood, ll, 1e-9);
  EXPECT_DOUBLE_EQ(step.objective, step.log_likelihood);
}

TEST(Em, JointreeObjectiveIsMonotone) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto net = random_net(6, s + 20);
    const auto sim = simulate_mar(net, 0.5, 2, {1.0, 0.5}, s, 500);
    EmConfig cfg;
    cfg.seed = s;
    cfg.threshold = 1e-10;
    cfg.max_iterations = 40;
    const auto res = em_learn(*net, sim.dataset, cfg);
    const auto& trace = res.trace.restarts[0];
    for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_GE(trace[i].objective, trace[i - 1].objective - 1e-9);
  }
}

TEST(Em, DeterministicAndRestartsOnlyImprove) {
  auto net = random_net(5, 30);
  const auto sim = simulate_mcar(net, 0.6, 0.5, 1, 300);
  EmConfig cfg;
  cfg.seed = 8;
  cfg.restarts = 1;
  const auto a = em_learn(*net, sim.dataset, cfg);
  const auto b = em_learn(*net, sim.dataset, cfg);
  EXPECT_EQ(a.network, b.network);
  ASSERT_EQ(a.trace.restarts.size(), b.trace.restarts.size());
  for (std::size_t i = 0; i < a.trace.restarts[0].size(); ++i)
    EXPECT_EQ(a.trace.restarts[0][i].objective, b.trace.restarts[0][i].objective);
  cfg.restarts = 3;
  const auto c = em_learn(*net, sim.dataset, cfg);
  EXPECT_GE(c.trace.best_objective, a.trace.best_objective);
  EXPECT_EQ(c.trace.restarts.size(), 3u);
}

TEST(Em, DeadlineBeforeFirstIteration) {
  auto net = random_net(8, 31);
  const auto sim = simulate_mcar(net, 0.6, 0.5, 1, 20000);
  EmConfig cfg;
  cfg.time_limit = 1e-7;
  EXPECT_THROW(em_learn(*net, sim.dataset, cfg), DeadlineBeforeFirstIteration);
}

TEST(Em, ProvidedInitIsUsed) {
  auto net = random_net(4, 32);
  const auto sim = simulate_mcar(net, 0.5, 0.5, 1, 200);
  EmConfig cfg;
  cfg.init = *net;
  cfg.max_iterations = 1;
  const auto res = em_learn(*net, sim.dataset, cfg);
  const auto step = em_iteration(*net, sim.dataset, InferenceEngine::kJointree, 2.0);
  EXPECT_EQ(res.network, step.params);
  cfg.init = *random_net(5, 1);
  EXPECT_THROW(em_learn(*net, sim.dataset, cfg), StructureMismatch);
}

TEST(Em, BeliefPropagationEngineRuns) {
  auto net = random_net(5, 33);
  const auto sim = simulate_mcar(net, 0.5, 0.5, 1, 200);
  EmConfig cfg;
  cfg.engine = InferenceEngine::kLoopyBp;
  cfg.max_iterations = 5;
  const auto res = em_learn(*net, sim.dataset, cfg);
  EXPECT_NO_THROW(validate(res.network));
}

TEST(Em, ConfigValidation) {
  EmConfig cfg;
  cfg.restarts = 0;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  cfg = {};
  cfg.threshold = 0.0;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  cfg = {};
  cfg.time_limit = 0.0;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
}

#include <gtest/gtest.h>

#include <memory>

#include "bnmiss/data_distribution.hpp"
#include "bnmiss/model_io.hpp"

using namespace bnmiss;

namespace {

std::shared_ptr<const BayesianNetwork> manifest_net() {
  return std::make_shared<const BayesianNetwork>(parse_network(read_file(std::string(BNMISS_TEST_DATA) + "/manifest.bif")));
}

DataDistribution manifest() {
  return augment(read_dataset(read_file(std::string(BNMISS_TEST_DATA) + "/manifest.csv"), manifest_net()));
}

constexpr int X = 0, Y = 1, W = 2, Z = 3;

}  // namespace

TEST(DataDistribution, CollapsesDuplicateRows) {
  auto net = manifest_net();
  IncompleteDataset::Cells cells(4, 4);
  cells << 0, 1, 0, 0, 0, 1, 0, 0, 1, -1, 0, 0, 0, 1, 0, 0;
  const auto dist = augment(IncompleteDataset(net, cells));
  EXPECT_EQ(dist.size(), 4);
  EXPECT_EQ(dist.distinct_rows(), 2u);
  EXPECT_EQ(dist.row_visits(), 4);
  std::int64_t total = 0;
  for (std::size_t i = 0; i < dist.distinct_rows(); ++i) total += dist.count(i);
  EXPECT_EQ(total, 4);
  EXPECT_EQ(dist.partially_observed_variables(), std::vector<int>{Y});
  EXPECT_EQ(dist.observed_variables(), (std::vector<int>{X, W, Z}));
}

TEST(DataDistribution, ExtraPartiallyObservedVariables) {
  auto net = manifest_net();
  IncompleteDataset::Cells cells = IncompleteDataset::Cells::Zero(2, 4);
  const int extra[] = {Z};
  const auto dist = augment(IncompleteDataset(net, cells), extra);
  EXPECT_TRUE(dist.partially_observed(Z));
  EXPECT_FALSE(dist.partially_observed(X));
}

TEST(DataDistribution, CountsEventsOverProxiesAndMechanisms) {
  const auto dist = manifest();
  EXPECT_EQ(dist.size(), 36);
  EXPECT_EQ(count_matching(dist, Event{}), 36);
  EXPECT_EQ(count_matching(dist, Event().observed(X)), 24);
  EXPECT_EQ(count_matching(dist, Event().unobserved(Y)), 12);
  EXPECT_EQ(count_matching(dist, Event().value(Y, kMi)), 12);
  EXPECT_EQ(count_matching(dist, Event().value(X, 1).value(W, 1)), 6);
  EXPECT_EQ(count_matching(dist, Event().value(W, 0)), 18);
  EXPECT_EQ(count_matching(dist, Event().value(Z, 0).value(W, 0)), 9);
  EXPECT_EQ(count_matching(dist, Event().value(X, kMi).observed(X)), 0);
  // W is fully observed, so R_W = unob never happens.
  EXPECT_EQ(count_matching(dist, Event().unobserved(W)), 0);
}

TEST(DataDistribution, ConditionalEstimate) {
  const auto dist = manifest();
  const auto est = estimate_probability(dist, Event().value(X, 1), Event().value(W, 1).observed(X));
  EXPECT_EQ(est.support, 12);
  EXPECT_DOUBLE_EQ(est.probability, 0.5);
  EXPECT_THROW(estimate_probability(dist, Event().value(Y, 1), Event().value(X, kMi).observed(X)), ZeroSupport);
  EXPECT_THROW(estimate_probability(dist, Event().value(X, 1), Event().value(X, 0)), std::invalid_argument);
}

TEST(DataDistribution, ContributingRowsAreZeroBased) {
  const auto dist = manifest();
  EXPECT_EQ(contributing_rows(dist, Event().value(X, 1).value(Y, 1).value(W, 1)),
            (std::vector<std::int64_t>{14, 15}));
}

TEST(DataDistribution, ObservedInstantiationsSortMissingLast) {
  const auto dist = manifest();
  const AugmentedVariable vars[] = {{Y, false}};
  const auto inst = observed_instantiations(dist, vars);
  ASSERT_EQ(inst.size(), 3u);
  EXPECT_EQ(inst[0].first, std::vector<int>{0});
  EXPECT_EQ(inst[0].second, 12);
  EXPECT_EQ(inst[2].first, std::vector<int>{kMi});
  EXPECT_EQ(inst[2].second, 12);
}

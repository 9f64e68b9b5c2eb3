#include <gtest/gtest.h>

#include <array>
#include <map>
#include <memory>
#include <set>

#include "bnmiss/estimators.hpp"
#include "bnmiss/missingness.hpp"
#include "bnmiss/model_io.hpp"
#include "oracle.hpp"

using namespace bnmiss;

namespace {

constexpr int X = 0, Y = 1, W = 2, Z = 3;

DataDistribution manifest() {
  auto net = std::make_shared<const BayesianNetwork>(parse_network(read_file(std::string(BNMISS_TEST_DATA) + "/manifest.bif")));
  return augment(read_dataset(read_file(std::string(BNMISS_TEST_DATA) + "/manifest.csv"), net));
}

std::vector<std::int64_t> one_based(std::vector<std::int64_t> rows) {
  for (auto& r : rows) ++r;
  return rows;
}

std::vector<std::int64_t> range(int lo, int hi) {
  std::vector<std::int64_t> out;
  for (int i = lo; i <= hi; ++i) out.push_back(i);
  return out;
}

// Empirical Pr(family) over the rows where the family is observed.
Eigen::VectorXd empirical(const IncompleteDataset& ds, const std::vector<int>& family) {
  std::size_t size = 1;
  for (int v : family) size *= static_cast<std::size_t>(ds.network().cardinality(v));
  Eigen::VectorXd m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size));
  for (std::int64_t r = 0; r < ds.rows(); ++r) {
    std::size_t idx = 0;
    bool ok = true;
    for (int v : family) {
      if (ds.missing(r, v)) ok = false;
      idx = idx * static_cast<std::size_t>(ds.network().cardinality(v)) + static_cast<std::size_t>(std::max(ds(r, v), 0));
    }
    if (ok) m(static_cast<Eigen::Index>(idx)) += 1.0;
  }
  return m / m.sum();
}

using Key = std::vector<int>;

// Conditional Pr(target | given) by direct counting; given holds (var, value)
// pairs and requires `observed` variables to be recorded.
double cond(const IncompleteDataset& ds, const std::vector<std::pair<int, int>>& target,
            const std::vector<std::pair<int, int>>& given, const std::vector<int>& observed) {
  double num = 0.0, den = 0.0;
  for (std::int64_t r = 0; r < ds.rows(); ++r) {
    bool ok = true;
    for (int v : observed) ok = ok && !ds.missing(r, v);
    for (auto [v, s] : given) ok = ok && ds(r, v) == s;
    if (!ok) continue;
    den += 1.0;
    bool hit = true;
    for (auto [v, s] : target) hit = hit && ds(r, v) == s;
    num += hit;
  }
  return num / den;
}

struct MarFixture {
  std::shared_ptr<const BayesianNetwork> net;
  IncompleteDataset ds;
};

// Five binary variables; A=0 and B=1 are partially observed with MAR
// mechanisms on the observed O1=2 and O2=3; V4 is observed.
MarFixture mar_fixture(std::uint64_t seed, std::int64_t rows) {
  RandomNetworkOptions opt;
  opt.variables = 5;
  opt.max_parents = 2;
  auto net = std::make_shared<const BayesianNetwork>(random_network(opt, seed));
  Cpt ta(2, 2), tb(4, 2);
  ta << 0.8, 0.2, 0.4, 0.6;
  tb << 0.9, 0.1, 0.5, 0.5, 0.7, 0.3, 0.3, 0.7;
  MissingnessGraph g(net, {{0, {2}, ta}, {1, {2, 3}, tb}});
  return {net, sample_incomplete(g, seed + 100, rows)};
}

}  // namespace

TEST(Estimators, CompleteDataCollapse) {
  RandomNetworkOptions opt;
  opt.variables = 5;
  opt.max_parents = 2;
  opt.max_states = 3;
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto net = std::make_shared<const BayesianNetwork>(random_network(opt, s));
    const auto ds = complete_dataset(net, forward_sample(*net, s, 300));
    const auto dist = augment(ds);
    for (int v = 0; v < net->size(); ++v) {
      const auto fam = family_of(*net, v);
      const auto truth = empirical(ds, fam);
      EXPECT_LT((listwise_deletion(dist, fam).values - truth).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT((direct_deletion_mcar(dist, fam).values - truth).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT((factored_deletion_mcar(dist, fam).values - truth).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT((direct_deletion_mar(dist, fam).values - truth).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT((factored_deletion_mar(dist, fam).values - truth).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_EQ(direct_deletion_mar(dist, fam).values, direct_deletion_mcar(dist, fam).values);
    }
  }
}

TEST(Estimators, ExtractParametersMatchesMapOracle) {
  RandomNetworkOptions opt;
  opt.variables = 6;
  opt.max_parents = 3;
  opt.max_states = 3;
  auto net = std::make_shared<const BayesianNetwork>(random_network(opt, 42));
  const auto rows = forward_sample(*net, 1, 200);
  std::vector<std::vector<int>> raw;
  for (const auto& r : rows) raw.emplace_back(r.states().begin(), r.states().end());
  const auto dist = augment(complete_dataset(net, rows));
  for (double alpha : {1.0, 2.0, 3.5}) {
    const auto learned = extract_parameters(*net, direct_deletion_mcar, dist, alpha);
    EXPECT_LT(oracle::max_abs_diff(oracle::map_cpts(*net, raw, alpha), learned), 1e-12);
  }
  EXPECT_THROW(extract_parameters(*net, direct_deletion_mcar, dist, 0.0), std::invalid_argument);
}

TEST(Estimators, ZeroSupportFallsBackToPrior) {
  auto net = std::make_shared<const BayesianNetwork>(parse_network(read_file(std::string(BNMISS_DATA) + "/xy.bif")));
  IncompleteDataset::Cells cells(3, 2);
  cells << 0, -1, 1, -1, 1, -1;
  const auto dist = augment(IncompleteDataset(net, cells));
  const int fam[] = {0, 1};
  EXPECT_THROW(direct_deletion_mcar(dist, fam), ZeroSupport);
  EXPECT_THROW(listwise_deletion(dist, fam), ZeroSupport);
  const auto learned = extract_parameters(*net, direct_deletion_mcar, dist, 2.0);
  EXPECT_DOUBLE_EQ(learned.cpt(1)(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(learned.cpt(0)(0, 1), 3.0 / 5.0);
}

TEST(Estimators, DirectMarMatchesSummationOracle) {
  const auto fx = mar_fixture(3, 20000);
  const auto dist = augment(fx.ds);
  // Family {A, O1}: Y_m = {A}, Y_o = {O1}, X_o' = {O2, V4}.
  const std::vector<int> fam{0, 2};
  const auto est = direct_deletion_mar(dist, fam);
  for (int a = 0; a < 2; ++a)
    for (int o1 = 0; o1 < 2; ++o1) {
      double expect = 0.0;
      for (int o2 = 0; o2 < 2; ++o2)
        for (int v4 = 0; v4 < 2; ++v4) {
          const double w = cond(fx.ds, {{2, o1}, {3, o2}, {4, v4}}, {}, {});
          expect += w * cond(fx.ds, {{0, a}}, {{2, o1}, {3, o2}, {4, v4}}, {0});
        }
      const int cell[] = {a, o1};
      EXPECT_NEAR(est(cell), expect, 1e-12);
    }
  EXPECT_EQ(est.support, static_cast<double>(fx.ds.rows() - [&] {
              std::int64_t m = 0;
              for (std::int64_t r = 0; r < fx.ds.rows(); ++r) m += fx.ds.missing(r, 0);
              return m;
            }()));
}

TEST(Estimators, FactoredMarMatchesTwoPathOracle) {
  const auto fx = mar_fixture(5, 30000);
  const auto dist = augment(fx.ds);
  // Family {A, B}: both partially observed; X_o' = {O1, O2, V4}.
  const std::vector<int> fam{0, 1};
  const auto est = factored_deletion_mar(dist, fam, AggregationMethod::kMean);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      double expect = 0.0;
      for (int o1 = 0; o1 < 2; ++o1)
        for (int o2 = 0; o2 < 2; ++o2)
          for (int v4 = 0; v4 < 2; ++v4) {
            const std::vector<std::pair<int, int>> g{{2, o1}, {3, o2}, {4, v4}};
            auto with = [&](std::pair<int, int> extra) {
              auto out = g;
              out.push_back(extra);
              return out;
            };
            const double path_a = cond(fx.ds, {{0, a}}, g, {0}) * cond(fx.ds, {{1, b}}, with({0, a}), {0, 1});
            const double path_b = cond(fx.ds, {{1, b}}, g, {1}) * cond(fx.ds, {{0, a}}, with({1, b}), {0, 1});
            expect += cond(fx.ds, g, {}, {}) * 0.5 * (path_a + path_b);
          }
      const int cell[] = {a, b};
      EXPECT_NEAR(est(cell), expect, 1e-12);
    }
}

TEST(Estimators, FactoredMcarMatchesTwoPathOracle) {
  const auto fx = mar_fixture(7, 5000);
  const auto dist = augment(fx.ds);
  const std::vector<int> fam{1, 0};  // B then A: layout follows the family order
  const auto est = factored_deletion_mcar(dist, fam, AggregationMethod::kMean);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const double path_a = cond(fx.ds, {{0, a}}, {}, {0}) * cond(fx.ds, {{1, b}}, {{0, a}}, {0, 1});
      const double path_b = cond(fx.ds, {{1, b}}, {}, {1}) * cond(fx.ds, {{0, a}}, {{1, b}}, {0, 1});
      const int cell[] = {b, a};
      EXPECT_NEAR(est(cell), 0.5 * (path_a + path_b), 1e-12);
    }
}

TEST(Estimators, SingleMissingVariableFactoredEqualsDirect) {
  const auto fx = mar_fixture(9, 5000);
  const auto dist = augment(fx.ds);
  const std::vector<int> fam{2, 0, 3};
  EXPECT_LT((factored_deletion_mar(dist, fam).values - direct_deletion_mar(dist, fam).values).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Estimators, DirectMarBacksOffToAncestor) {
  auto net = std::make_shared<const BayesianNetwork>(parse_network(read_file(std::string(BNMISS_DATA) + "/xy.bif")));
  // Y is never observed when X = 1.
  IncompleteDataset::Cells cells(5, 2);
  cells << 0, 0, 0, 1, 0, 1, 1, -1, 1, -1;
  const auto dist = augment(IncompleteDataset(net, cells));
  const int fam[] = {1};
  const auto est = direct_deletion_mar(dist, fam);
  EXPECT_NEAR(est.values(0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(est.values(1), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(est.support, 3.0);
}

TEST(Estimators, DirectMarUniformWhenNothingObserved) {
  auto net = std::make_shared<const BayesianNetwork>(parse_network(read_file(std::string(BNMISS_DATA) + "/xy.bif")));
  IncompleteDataset::Cells cells(2, 2);
  cells << 0, -1, 1, -1;
  const auto dist = augment(IncompleteDataset(net, cells));
  const int fam[] = {0, 1};
  const auto est = direct_deletion_mar(dist, fam);
  EXPECT_NEAR(est.values(0), 0.25, 1e-15);
  EXPECT_NEAR(est.values(3), 0.25, 1e-15);
}

TEST(Estimators, MnarCrossRecoversExactJoint) {
  auto net = std::make_shared<const BayesianNetwork>(parse_network(read_file(std::string(BNMISS_DATA) + "/xy.bif")));
  const double pxy[2][2] = {{0.1, 0.2}, {0.3, 0.4}};
  const double rx_ob[2] = {0.5, 0.8};  // given y
  const double ry_ob[2] = {0.6, 0.9};  // given x
  std::vector<std::array<int, 2>> rows;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int rx = 0; rx < 2; ++rx)
        for (int ry = 0; ry < 2; ++ry) {
          const double p = pxy[x][y] * (rx == 0 ? rx_ob[y] : 1 - rx_ob[y]) * (ry == 0 ? ry_ob[x] : 1 - ry_ob[x]);
          const int n = static_cast<int>(std::lround(p * 10000));
          for (int i = 0; i < n; ++i) rows.push_back({rx == 0 ? x : -1, ry == 0 ? y : -1});
        }
  IncompleteDataset::Cells cells(static_cast<Eigen::Index>(rows.size()), 2);
  for (std::size_t i = 0; i < rows.size(); ++i) cells.row(static_cast<Eigen::Index>(i)) << rows[i][0], rows[i][1];
  const auto dist = augment(IncompleteDataset(net, cells));
  const auto est = mnar_cross_estimate(dist, 0, 1);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) EXPECT_NEAR(est.values(x * 2 + y), pxy[x][y], 1e-12);
  EXPECT_EQ(est.support, 10000.0);
}

TEST(Estimators, MnarCrossDegenerate) {
  auto net = std::make_shared<const BayesianNetwork>(parse_network(read_file(std::string(BNMISS_DATA) + "/xy.bif")));
  IncompleteDataset::Cells cells(2, 2);
  cells << 0, -1, -1, 1;
  EXPECT_THROW(mnar_cross_estimate(augment(IncompleteDataset(net, cells)), 0, 1), ZeroSupport);
}

TEST(Estimators, InformedScopeValidation) {
  const auto dist = manifest();
  const int fam[] = {X, Y};
  EXPECT_EQ(weight_variables(dist, fam), (std::vector<int>{W, Z}));
  EXPECT_EQ(weight_variables(dist, fam, std::vector<int>{W}), std::vector<int>{W});
  EXPECT_THROW(direct_deletion_mar(dist, fam, std::vector<int>{Y}), std::invalid_argument);
}

TEST(Estimators, ManifestUsageListwiseAndDirect) {
  const auto dist = manifest();
  const int fam[] = {X, W};
  const int cell[] = {1, 1};
  EXPECT_EQ(one_based(data_usage(DeletionEstimator::kListwise, dist, fam, cell)),
            (std::vector<std::int64_t>{11, 12, 15, 16}));
  EXPECT_EQ(one_based(data_usage(DeletionEstimator::kDirectMcar, dist, fam, cell)),
            (std::vector<std::int64_t>{11, 12, 15, 16, 23, 24}));
  EXPECT_EQ(data_usage(DeletionEstimator::kFactoredMcar, dist, fam, cell).size(), 24u);
}

TEST(Estimators, ManifestUsageFactoredFactors) {
  const auto dist = manifest();
  const int fam[] = {X, W};
  const int cell[] = {1, 1};
  // Pr(x | w, R_x = ob) reads every w = 1 row; Pr(w | x, R_x = ob) Pr(x | R_x = ob) reads every x = 1 row.
  std::vector<std::int64_t> expect_w{3, 4, 7, 8, 11, 12, 15, 16, 19, 20, 23, 24, 27, 28, 31, 32, 35, 36};
  auto first = factor_usage(dist, fam, cell, {}, W, false);
  EXPECT_EQ(one_based(first), expect_w);
  auto second = factor_usage(dist, fam, cell, {}, X, false);
  EXPECT_EQ(one_based(second), (std::vector<std::int64_t>{9, 10, 11, 12, 13, 14, 15, 16, 21, 22, 23, 24}));
}

TEST(Estimators, ManifestUsageMar) {
  const auto dist = manifest();
  const int fam[] = {X, Y};
  const int cell[] = {1, 1};
  EXPECT_EQ(one_based(data_usage(DeletionEstimator::kDirectMar, dist, fam, cell)), range(13, 16));

  // Pr(y | w, z, R_y = ob), summed over the weight instantiations.
  const int big[] = {X, Y, W, Z};
  std::set<std::int64_t> rows;
  for (int w = 0; w < 2; ++w)
    for (int z = 0; z < 2; ++z) {
      const int c[] = {1, 1, w, z};
      for (auto r : factor_usage(dist, big, c, {}, Y, true)) rows.insert(r + 1);
    }
  std::vector<std::int64_t> expect = range(5, 8);
  for (auto r : range(13, 16)) expect.push_back(r);
  for (auto r : range(29, 32)) expect.push_back(r);
  EXPECT_EQ(std::vector<std::int64_t>(rows.begin(), rows.end()), expect);

  // Informed weight Pr(w = 0) vs the full weight Pr(z = 0, w = 0).
  EXPECT_EQ(contributing_rows(dist, Event().value(W, 0)).size(), 18u);
  EXPECT_EQ(contributing_rows(dist, Event().value(Z, 0).value(W, 0)).size(), 9u);
}

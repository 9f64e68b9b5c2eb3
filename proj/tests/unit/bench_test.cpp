#include <gtest/gtest.h>

#include <memory>
#include <sstream>

#include "bnmiss/bench.hpp"
#include "bnmiss/model_io.hpp"

using namespace bnmiss;

namespace {

const std::string kData = BNMISS_TEST_DATA;

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

LearnerReport report(Learner l, std::int64_t size, int rep, std::optional<double> ll, ReportStatus st = ReportStatus::kOk) {
  LearnerReport r;
  r.learner = l;
  r.size = size;
  r.repetition = rep;
  r.ll = ll;
  r.status = st;
  return r;
}

}  // namespace

TEST(Bench, ParsesConfig) {
  const auto cfg = parse_experiment_config(read_file(kData + "/three.experiment"), kData);
  EXPECT_EQ(cfg.network->size(), 3);
  EXPECT_EQ(cfg.mechanism, MechanismKind::kMar);
  EXPECT_EQ(cfg.sizes, (std::vector<std::int64_t>{200, 2000}));
  EXPECT_EQ(cfg.learners.size(), 4u);
  EXPECT_EQ(cfg.repetitions, 3);
  EXPECT_EQ(cfg.beta.beta, 0.5);
}

TEST(Bench, ConfigErrors) {
  EXPECT_THROW(parse_experiment_config("network = three.bif\nsizes = 10\nlearners = nope\n", kData), ParseError);
  EXPECT_THROW(parse_experiment_config("network = three.bif\nsizes = 100, 10\nlearners = d-mar\n", kData), ParseError);
  EXPECT_THROW(parse_experiment_config("network = three.bif\nbogus = 1\n", kData), ParseError);
  EXPECT_THROW(parse_experiment_config("sizes = 10\n", kData), ParseError);
}

TEST(Bench, SingleLearnerSingleReport) {
  auto cfg = parse_experiment_config(read_file(kData + "/three.experiment"), kData);
  cfg.sizes = {500};
  cfg.learners = {Learner::kDMar};
  cfg.repetitions = 1;
  const auto reports = run_experiment(cfg);
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(reports[0].status, ReportStatus::kOk);
  EXPECT_TRUE(reports[0].ll.has_value());
  EXPECT_TRUE(reports[0].kld.has_value());
  EXPECT_EQ(lines(emit_overview_table(reports, TableFormat::kCsv)), 2u);
}

TEST(Bench, DeterministicExceptTiming) {
  const auto cfg = parse_experiment_config(read_file(kData + "/three.experiment"), kData);
  const auto a = run_experiment(cfg);
  const auto b = run_experiment(cfg);
  ASSERT_EQ(a.size(), b.size());
  ASSERT_EQ(a.size(), 3u * 2u * 4u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].ll, b[i].ll);
    EXPECT_EQ(a[i].kld, b[i].kld);
    EXPECT_EQ(a[i].status, b[i].status);
  }
}

TEST(Bench, OverviewGolden) {
  const auto cfg = parse_experiment_config(read_file(kData + "/three.experiment"), kData);
  const auto reports = run_experiment(cfg);
  EXPECT_EQ(emit_overview_table(reports, TableFormat::kCsv), read_file(kData + "/three.overview.csv"));
  EXPECT_EQ(emit_overview_table(reports, TableFormat::kLatex), read_file(kData + "/three.overview.tex"));
}

TEST(Bench, NoIterationUnderTinyDeadline) {
  ExperimentConfig cfg;
  RandomNetworkOptions opt;
  opt.variables = 30;
  opt.max_parents = 3;
  cfg.network = std::make_shared<const BayesianNetwork>(random_network(opt, 1));
  cfg.sizes = {20000};
  cfg.learners = {Learner::kEmJt, Learner::kDMcar};
  cfg.time_limit = 0.001;
  cfg.test_size = 100;
  cfg.compute_kld = false;
  const auto reports = run_experiment(cfg);
  ASSERT_EQ(reports.size(), 2u);
  EXPECT_EQ(reports[0].status, ReportStatus::kNoIteration);
  EXPECT_FALSE(reports[0].ll.has_value());
  EXPECT_NE(reports[1].status, ReportStatus::kNoIteration);
  const auto tex = emit_overview_table(reports, TableFormat::kLatex);
  EXPECT_NE(tex.find("--"), std::string::npos);
  const auto csv = emit_overview_table(reports, TableFormat::kCsv);
  EXPECT_NE(csv.find("no-iteration"), std::string::npos);
}

TEST(Bench, TablesAndCurves) {
  const std::vector<LearnerReport> one{report(Learner::kDMar, 100, 0, -2.5)};
  EXPECT_EQ(emit_overview_table(one, TableFormat::kCsv), "size,d-mar\n100,-2.5\n");
  EXPECT_EQ(emit_curves(one, CurveMetric::kLlVsSize), "learner,x,mean,stderr\nd-mar,100,-2.5,0\n");

  const std::vector<LearnerReport> two{report(Learner::kDMar, 100, 0, -2.0), report(Learner::kFMar, 100, 0, -3.0)};
  const auto tex = emit_overview_table(two, TableFormat::kLatex);
  EXPECT_NE(tex.find("\\textbf{-2.0000}"), std::string::npos);
  EXPECT_EQ(tex.find("\\textbf{-3.0000}"), std::string::npos);

  std::vector<LearnerReport> grid;
  for (Learner l : {Learner::kDMar, Learner::kFMar, Learner::kDMcar})
    for (std::int64_t n : {10, 100})
      for (int rep = 0; rep < 2; ++rep) grid.push_back(report(l, n, rep, -1.0 - rep));
  grid.push_back(report(Learner::kListwise, 10, 0, std::nullopt, ReportStatus::kTimeout));
  const auto curves = emit_curves(grid, CurveMetric::kLlVsSize);
  EXPECT_EQ(lines(curves), 1u + 3u * 2u);
  EXPECT_NE(curves.find("d-mar,10,-1.5,0.5\n"), std::string::npos);
  EXPECT_EQ(lines(emit_curves(grid, CurveMetric::kKldVsSize)), 1u);
}

TEST(Bench, ReportsCsv) {
  const auto csv = emit_reports_csv({report(Learner::kDMar, 100, 0, -2.5)});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "learner,size,repetition,seconds,ll,kld,status");
  EXPECT_NE(csv.find(",-2.5,,ok"), std::string::npos);
}

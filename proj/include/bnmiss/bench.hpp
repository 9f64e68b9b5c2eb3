#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bnmiss/estimate.hpp"
#include "bnmiss/learners.hpp"
#include "bnmiss/missingness.hpp"
#include "bnmiss/network.hpp"

namespace bnmiss {

enum class MechanismKind { kMcar, kMar, kInformedMar, kMnarCross };

const char* to_string(MechanismKind kind);
std::optional<MechanismKind> parse_mechanism_kind(std::string_view name);

struct ExperimentConfig {
  std::shared_ptr<const BayesianNetwork> network;
  MechanismKind mechanism = MechanismKind::kMcar;
  double m = 0.3;
  double q = 0.7;
  int p = 2;
  BetaShape beta{1.0, 0.5};
  int s = 3;
  /// Variable names for the cross mechanism.
  std::string pair_x;
  std::string pair_y;
  std::vector<std::int64_t> sizes;
  std::vector<Learner> learners;
  /// Seconds per learner call.
  std::optional<double> time_limit;
  int repetitions = 1;
  std::uint64_t seed = 0;
  std::int64_t test_size = 10000;
  int em_restarts = 1;
  AggregationMethod aggregation = AggregationMethod::kInverseVariance;
  double prior = 2.0;
  bool compute_ll = true;
  bool compute_kld = true;
  /// KLD is skipped when the largest jointree clique exceeds this many states.
  double treewidth_budget = 1 << 22;
};

/// Throws std::invalid_argument.
void validate(const ExperimentConfig& config);

/// `key = value` lines, `#` comments. Keys: network, mechanism, m, q, p, beta,
/// s, pair, sizes, learners, time_limit, repetitions, seed, test_size,
/// em_restarts, aggregation, prior, metrics, treewidth_budget. The network
/// path is resolved against `base_dir`. Throws ParseError.
ExperimentConfig parse_experiment_config(std::string_view text, const std::filesystem::path& base_dir);

enum class ReportStatus { kOk, kTimeout, kNoIteration, kFailed };
const char* to_string(ReportStatus status);

struct LearnerReport {
  Learner learner = Learner::kListwise;
  std::int64_t size = 0;
  int repetition = 0;
  double seconds = 0.0;
  std::optional<double> ll;
  std::optional<double> kld;
  ReportStatus status = ReportStatus::kOk;
  std::string message;
};

/// Sorted by repetition, size, then learner order in the config.
std::vector<LearnerReport> run_experiment(const ExperimentConfig& config);

/// learner,size,repetition,seconds,ll,kld,status
std::string emit_reports_csv(const std::vector<LearnerReport>& reports);

enum class TableFormat { kCsv, kLatex };
enum class TableMetric { kLl, kKld };

/// Rows are sizes, columns learners, cells the mean over repetitions with a
/// result. The best cell of each row is bold in LaTeX.
std::string emit_overview_table(const std::vector<LearnerReport>& reports, TableFormat format,
                                TableMetric metric = TableMetric::kLl);

enum class CurveMetric { kKldVsSize, kLlVsSize, kLlVsTime, kKldVsTime };
std::optional<CurveMetric> parse_curve_metric(std::string_view name);

/// learner,x,mean,stderr with one row per learner and x value with data. For
/// the time curves x is the mean wall time at each size.
std::string emit_curves(const std::vector<LearnerReport>& reports, CurveMetric metric);

}  // namespace bnmiss

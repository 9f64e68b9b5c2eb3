#include "bnmiss/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

#include "bnmiss/data_distribution.hpp"
#include "bnmiss/inference.hpp"
#include "bnmiss/model_io.hpp"

namespace bnmiss {

namespace {

std::string fmt(const char* spec, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::string word;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!word.empty()) out.push_back(std::move(word));
      word.clear();
    } else {
      word.push_back(c);
    }
  }
  if (!word.empty()) out.push_back(std::move(word));
  return out;
}

double to_double(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    const double x = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return x;
  } catch (const std::exception&) {
    throw ParseError(line, 1, "expected a number, got '" + s + "'");
  }
}

std::int64_t to_int(const std::string& s, int line) {
  const double x = to_double(s, line);
  if (x != std::floor(x)) throw ParseError(line, 1, "expected an integer, got '" + s + "'");
  return static_cast<std::int64_t>(x);
}

struct Stats {
  double mean = 0.0;
  double stderr_ = 0.0;
  int n = 0;
};

Stats stats(const std::vector<double>& xs) {
  Stats s;
  s.n = static_cast<int>(xs.size());
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= s.n;
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stderr_ = std::sqrt(ss / (s.n - 1)) / std::sqrt(static_cast<double>(s.n));
  }
  return s;
}

std::vector<Learner> learner_order(const std::vector<LearnerReport>& reports) {
  std::vector<Learner> out;
  for (const auto& r : reports)
    if (std::find(out.begin(), out.end(), r.learner) == out.end()) out.push_back(r.learner);
  return out;
}

std::vector<std::int64_t> size_order(const std::vector<LearnerReport>& reports) {
  std::vector<std::int64_t> out;
  for (const auto& r : reports) out.push_back(r.size);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

const char* to_string(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::kMcar:
      return "mcar";
    case MechanismKind::kMar:
      return "mar";
    case MechanismKind::kInformedMar:
      return "informed-mar";
    case MechanismKind::kMnarCross:
      return "mnar-cross";
  }
  return "?";
}

std::optional<MechanismKind> parse_mechanism_kind(std::string_view name) {
  for (auto k : {MechanismKind::kMcar, MechanismKind::kMar, MechanismKind::kInformedMar, MechanismKind::kMnarCross})
    if (name == to_string(k)) return k;
  return std::nullopt;
}

const char* to_string(ReportStatus status) {
  switch (status) {
    case ReportStatus::kOk:
      return "ok";
    case ReportStatus::kTimeout:
      return "timeout";
    case ReportStatus::kNoIteration:
      return "no-iteration";
    case ReportStatus::kFailed:
      return "failed";
  }
  return "?";
}

std::optional<CurveMetric> parse_curve_metric(std::string_view name) {
  if (name == "kld-vs-size") return CurveMetric::kKldVsSize;
  if (name == "ll-vs-size") return CurveMetric::kLlVsSize;
  if (name == "ll-vs-time") return CurveMetric::kLlVsTime;
  if (name == "kld-vs-time") return CurveMetric::kKldVsTime;
  return std::nullopt;
}

void validate(const ExperimentConfig& config) {
  if (!config.network) throw std::invalid_argument("experiment needs a network");
  if (config.sizes.empty()) throw std::invalid_argument("experiment needs at least one dataset size");
  for (std::size_t i = 0; i < config.sizes.size(); ++i) {
    if (config.sizes[i] <= 0) throw std::invalid_argument("dataset sizes must be positive");
    if (i > 0 && config.sizes[i] <= config.sizes[i - 1]) throw std::invalid_argument("dataset sizes must ascend");
  }
  if (config.learners.empty()) throw std::invalid_argument("experiment needs at least one learner");
  if (config.repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
  if (config.test_size < 1) throw std::invalid_argument("test size must be positive");
  if (config.time_limit && !(*config.time_limit > 0.0)) throw std::invalid_argument("time limit must be positive");
  if (config.em_restarts < 1) throw std::invalid_argument("EM restarts must be at least 1");
  if (!(config.prior > 0.0)) throw std::invalid_argument("prior must be positive");
  if (config.m < 0.0 || config.m > 1.0) throw std::invalid_argument("m must be in [0, 1]");
  if (config.mechanism == MechanismKind::kMnarCross) {
    config.network->index_of(config.pair_x);
    config.network->index_of(config.pair_y);
  }
}

ExperimentConfig parse_experiment_config(std::string_view text, const std::filesystem::path& base_dir) {
  ExperimentConfig config;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  std::map<std::string, int> seen;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.resize(hash);
    const std::string content = trim(raw);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) throw ParseError(line, 1, "expected key = value");
    const std::string key = trim(std::string_view(content).substr(0, eq));
    const std::string value = trim(std::string_view(content).substr(eq + 1));
    if (!seen.emplace(key, line).second) throw ParseError(line, 1, "duplicate key '" + key + "'");
    const auto words = split_words(value);
    auto need = [&](std::size_t n) {
      if (words.size() != n)
        throw ParseError(line, static_cast<int>(eq) + 2, "key '" + key + "' takes " + std::to_string(n) + " value(s)");
    };
    if (key == "network") {
      need(1);
      config.network = std::make_shared<const BayesianNetwork>(parse_network(read_file(base_dir / words[0])));
    } else if (key == "mechanism") {
      need(1);
      auto kind = parse_mechanism_kind(words[0]);
      if (!kind) throw ParseError(line, static_cast<int>(eq) + 2, "unknown mechanism '" + words[0] + "'");
      config.mechanism = *kind;
    } else if (key == "m") {
      need(1);
      config.m = to_double(words[0], line);
    } else if (key == "q") {
      need(1);
      config.q = to_double(words[0], line);
    } else if (key == "p") {
      need(1);
      config.p = static_cast<int>(to_int(words[0], line));
    } else if (key == "beta") {
      need(2);
      config.beta = {to_double(words[0], line), to_double(words[1], line)};
    } else if (key == "s") {
      need(1);
      config.s = static_cast<int>(to_int(words[0], line));
    } else if (key == "pair") {
      need(2);
      config.pair_x = words[0];
      config.pair_y = words[1];
    } else if (key == "sizes") {
      if (words.empty()) need(1);
      config.sizes.clear();
      for (const auto& w : words) config.sizes.push_back(to_int(w, line));
    } else if (key == "learners") {
      if (words.empty()) need(1);
      config.learners.clear();
      for (const auto& w : words) {
        auto l = parse_learner(w);
        if (!l) throw ParseError(line, static_cast<int>(eq) + 2, "unknown learner '" + w + "'");
        config.learners.push_back(*l);
      }
    } else if (key == "time_limit") {
      need(1);
      config.time_limit = to_double(words[0], line);
    } else if (key == "repetitions") {
      need(1);
      config.repetitions = static_cast<int>(to_int(words[0], line));
    } else if (key == "seed") {
      need(1);
      config.seed = static_cast<std::uint64_t>(to_int(words[0], line));
    } else if (key == "test_size") {
      need(1);
      config.test_size = to_int(words[0], line);
    } else if (key == "em_restarts") {
      need(1);
      config.em_restarts = static_cast<int>(to_int(words[0], line));
    } else if (key == "aggregation") {
      need(1);
      auto a = parse_aggregation(words[0]);
      if (!a) throw ParseError(line, static_cast<int>(eq) + 2, "unknown aggregation '" + words[0] + "'");
      config.aggregation = *a;
    } else if (key == "prior") {
      need(1);
      config.prior = to_double(words[0], line);
    } else if (key == "metrics") {
      config.compute_ll = config.compute_kld = false;
      for (const auto& w : words) {
        if (w == "ll") {
          config.compute_ll = true;
        } else if (w == "kld") {
          config.compute_kld = true;
        } else if (w != "time") {
          throw ParseError(line, static_cast<int>(eq) + 2, "unknown metric '" + w + "'");
        }
      }
    } else if (key == "treewidth_budget") {
      need(1);
      config.treewidth_budget = to_double(words[0], line);
    } else {
      throw ParseError(line, 1, "unknown key '" + key + "'");
    }
  }
  if (!config.network) throw ParseError(line + 1, 1, "missing key 'network'");
  try {
    validate(config);
  } catch (const std::invalid_argument& e) {
    throw ParseError(line + 1, 1, e.what());
  }
  return config;
}

std::vector<LearnerReport> run_experiment(const ExperimentConfig& config) {
  validate(config);
  const auto net = config.network;
  std::optional<MarginalSet> prior;
  if (config.compute_kld) {
    const Jointree jt = build_jointree(*net);
    if (jt.max_clique_states() <= config.treewidth_budget)
      prior = jointree_marginals(jt, Instantiation(static_cast<std::size_t>(net->size()))).marginals;
  }
  std::vector<LearnerReport> reports;
  for (int rep = 0; rep < config.repetitions; ++rep) {
    const std::uint64_t rep_seed = derive_seed(config.seed, static_cast<std::uint64_t>(rep));
    const auto test = complete_dataset(net, forward_sample(*net, derive_seed(rep_seed, 7), config.test_size));
    for (std::int64_t size : config.sizes) {
      Simulation sim;
      switch (config.mechanism) {
        case MechanismKind::kMcar:
          sim = simulate_mcar(net, config.m, config.q, rep_seed, size);
          break;
        case MechanismKind::kMar:
          sim = simulate_mar(net, config.m, config.p, config.beta, rep_seed, size);
          break;
        case MechanismKind::kInformedMar:
          sim = simulate_informed_mar(net, config.m, config.p, config.beta, config.s, rep_seed, size);
          break;
        case MechanismKind::kMnarCross:
          sim = simulate_mnar_cross(net, net->index_of(config.pair_x), net->index_of(config.pair_y), config.beta,
                                    rep_seed, size);
          break;
      }
      LearnOptions options;
      options.prior = config.prior;
      options.aggregation = config.aggregation;
      options.informed = sim.graph.informed();
      options.em_restarts = config.em_restarts;
      options.time_limit = config.time_limit;
      options.seed = derive_seed(rep_seed, 11);
      for (Learner learner : config.learners) {
        LearnerReport report;
        report.learner = learner;
        report.size = size;
        report.repetition = rep;
        std::optional<BayesianNetwork> learned;
        const auto start = std::chrono::steady_clock::now();
        try {
          const DataDistribution dist = augment(sim.dataset);
          learned = learn(learner, *net, dist, options).network;
        } catch (const DeadlineBeforeFirstIteration& e) {
          report.status = ReportStatus::kNoIteration;
          report.message = e.what();
        } catch (const std::exception& e) {
          report.status = ReportStatus::kFailed;
          report.message = e.what();
        }
        report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (learned && is_closed_form(learner) && config.time_limit && report.seconds > *config.time_limit) {
          report.status = ReportStatus::kTimeout;
          learned.reset();
        }
        if (learned) {
          try {
            if (config.compute_ll) report.ll = test_log_likelihood(*learned, test);
            if (prior) report.kld = kl_divergence(*net, *learned, *prior);
          } catch (const std::exception& e) {
            report.status = ReportStatus::kFailed;
            report.message = e.what();
            report.ll.reset();
            report.kld.reset();
          }
        }
        reports.push_back(std::move(report));
      }
    }
  }
  return reports;
}

std::string emit_reports_csv(const std::vector<LearnerReport>& reports) {
  std::string out = "learner,size,repetition,seconds,ll,kld,status\n";
  for (const auto& r : reports) {
    out += to_string(r.learner);
    out += ',' + std::to_string(r.size) + ',' + std::to_string(r.repetition) + ',' + fmt("%.6f", r.seconds) + ',';
    if (r.ll) out += fmt("%.17g", *r.ll);
    out += ',';
    if (r.kld) out += fmt("%.17g", *r.kld);
    out += ',';
    out += to_string(r.status);
    out += '\n';
  }
  return out;
}

std::string emit_overview_table(const std::vector<LearnerReport>& reports, TableFormat format, TableMetric metric) {
  const auto learners = learner_order(reports);
  const auto sizes = size_order(reports);
  struct Cell {
    std::optional<double> mean;
    ReportStatus status = ReportStatus::kOk;
  };
  auto cell = [&](std::int64_t size, Learner learner) {
    Cell c;
    std::vector<double> xs;
    bool first = true;
    for (const auto& r : reports) {
      if (r.size != size || r.learner != learner) continue;
      const auto& value = metric == TableMetric::kLl ? r.ll : r.kld;
      if (value) {
        xs.push_back(*value);
      } else if (first) {
        c.status = r.status;
        first = false;
      }
    }
    if (!xs.empty()) c.mean = stats(xs).mean;
    return c;
  };
  std::string out;
  if (format == TableFormat::kCsv) {
    out = "size";
    for (auto l : learners) out += std::string(",") + to_string(l);
    out += '\n';
    for (auto size : sizes) {
      out += std::to_string(size);
      for (auto l : learners) {
        const Cell c = cell(size, l);
        out += ',';
        out += c.mean ? fmt("%.6g", *c.mean) : std::string(c.status == ReportStatus::kOk ? "" : to_string(c.status));
      }
      out += '\n';
    }
    return out;
  }
  out = "\\begin{tabular}{r" + std::string(learners.size(), 'r') + "}\n\\hline\nsize";
  for (auto l : learners) out += std::string(" & ") + to_string(l);
  out += " \\\\\n\\hline\n";
  for (auto size : sizes) {
    std::vector<Cell> row;
    std::optional<double> best;
    for (auto l : learners) {
      row.push_back(cell(size, l));
      const auto& m = row.back().mean;
      if (m && (!best || (metric == TableMetric::kLl ? *m > *best : *m < *best))) best = m;
    }
    out += std::to_string(size);
    for (const auto& c : row) {
      out += " & ";
      if (!c.mean) {
        out += "--";
      } else if (*c.mean == *best) {
        out += "\\textbf{" + fmt("%.4f", *c.mean) + "}";
      } else {
        out += fmt("%.4f", *c.mean);
      }
    }
    out += " \\\\\n";
  }
  out += "\\hline\n\\end{tabular}\n";
  return out;
}

std::string emit_curves(const std::vector<LearnerReport>& reports, CurveMetric metric) {
  const bool kld = metric == CurveMetric::kKldVsSize || metric == CurveMetric::kKldVsTime;
  const bool time = metric == CurveMetric::kLlVsTime || metric == CurveMetric::kKldVsTime;
  std::string out = "learner,x,mean,stderr\n";
  for (auto l : learner_order(reports)) {
    for (auto size : size_order(reports)) {
      std::vector<double> values;
      std::vector<double> seconds;
      for (const auto& r : reports) {
        if (r.learner != l || r.size != size) continue;
        const auto& v = kld ? r.kld : r.ll;
        if (!v) continue;
        values.push_back(*v);
        seconds.push_back(r.seconds);
      }
      if (values.empty()) continue;
      const Stats s = stats(values);
      out += to_string(l);
      out += ',' + (time ? fmt("%.6g", stats(seconds).mean) : std::to_string(size)) + ',' + fmt("%.17g", s.mean) +
             ',' + fmt("%.17g", s.stderr_) + '\n';
    }
  }
  return out;
}

}  // namespace bnmiss

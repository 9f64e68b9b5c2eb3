#include "bnmiss/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bnmiss/bench.hpp"
#include "bnmiss/data_distribution.hpp"
#include "bnmiss/inference.hpp"
#include "bnmiss/learners.hpp"
#include "bnmiss/missingness.hpp"
#include "bnmiss/model_io.hpp"

namespace bnmiss {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Names the file in parse errors.
template <class F>
auto with_file(const std::string& path, F&& f) {
  try {
    return f(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.column(), path + ": " + e.message());
  }
}

std::shared_ptr<const BayesianNetwork> load_network(const std::string& path) {
  return std::make_shared<const BayesianNetwork>(with_file(path, [](const std::string& t) { return parse_network(t); }));
}

std::string number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_file(path, text);
  }
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Parameter learning for Bayesian networks from incomplete data", "bnmiss"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Sample an incomplete dataset and its missingness graph");
  std::string sim_network, sim_mechanism = "mcar", sim_out, sim_graph;
  double sim_m = 0.3, sim_q = 0.7;
  int sim_p = 2, sim_s = 3;
  std::vector<double> sim_beta{1.0, 0.5};
  std::vector<std::string> sim_pair;
  std::int64_t sim_size = 0;
  std::uint64_t sim_seed = 0;
  simulate->add_option("--network", sim_network, "Network file")->required();
  simulate->add_option("--mechanism", sim_mechanism, "mcar | mar | informed-mar | mnar-cross")
      ->check(CLI::IsMember({"mcar", "mar", "informed-mar", "mnar-cross"}));
  simulate->add_option("--m", sim_m, "Fraction of partially observed variables");
  simulate->add_option("--q", sim_q, "MCAR missing probability");
  simulate->add_option("--p", sim_p, "Mechanism parents");
  simulate->add_option("--s", sim_s, "Informed set size");
  simulate->add_option("--beta", sim_beta, "Beta shape a b")->expected(2);
  simulate->add_option("--pair", sim_pair, "Cross pair X Y")->expected(2);
  simulate->add_option("--size", sim_size, "Rows")->required()->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim_seed, "Seed")->required();
  simulate->add_option("--out", sim_out, "Dataset output (default stdout)");
  simulate->add_option("--graph", sim_graph, "Missingness graph output");

  // classify
  auto* classify_cmd = app.add_subcommand("classify", "Print MCAR, MAR or MNAR for a missingness graph");
  std::string cls_graph;
  classify_cmd->add_option("--graph", cls_graph, "Missingness graph file")->required();

  // learn
  auto* learn_cmd = app.add_subcommand("learn", "Learn parameters for a network skeleton");
  std::string ln_network, ln_dataset, ln_learner, ln_aggregation = "inverse-variance", ln_out, ln_graph;
  std::optional<double> ln_time;
  std::optional<std::uint64_t> ln_seed;
  double ln_prior = 2.0;
  int ln_restarts = 1;
  learn_cmd->add_option("--network", ln_network, "Network skeleton file")->required();
  learn_cmd->add_option("--dataset", ln_dataset, "Training CSV")->required();
  learn_cmd->add_option("--learner", ln_learner, "Learner name")->required();
  learn_cmd->add_option("--time-limit", ln_time, "Seconds");
  learn_cmd->add_option("--aggregation", ln_aggregation, "mean | median | inverse-variance | lowest-variance");
  learn_cmd->add_option("--prior", ln_prior, "Dirichlet concentration");
  learn_cmd->add_option("--seed", ln_seed, "Seed (EM learners)");
  learn_cmd->add_option("--restarts", ln_restarts, "EM restarts")->check(CLI::PositiveNumber);
  learn_cmd->add_option("--graph", ln_graph, "Missingness graph with the informed set");
  learn_cmd->add_option("--out", ln_out, "Output network (default stdout)");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Test log-likelihood and KLD of a learned network");
  std::string ev_network, ev_learned, ev_dataset;
  evaluate->add_option("--network", ev_network, "True network file")->required();
  evaluate->add_option("--learned", ev_learned, "Learned network file")->required();
  evaluate->add_option("--dataset", ev_dataset, "Fully observed test CSV")->required();

  // bench
  auto* bench = app.add_subcommand("bench", "Run an experiment grid");
  std::string bn_config, bn_out, bn_format = "csv";
  std::optional<std::uint64_t> bn_seed;
  bench->add_option("--config", bn_config, "Experiment config file")->required();
  bench->add_option("--out", bn_out, "Directory for reports, tables and curves");
  bench->add_option("--format", bn_format, "Overview table on stdout: csv | latex")->check(CLI::IsMember({"csv", "latex"}));
  bench->add_option("--seed", bn_seed, "Override the config seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed()) {
      const auto net = load_network(sim_network);
      const auto kind = *parse_mechanism_kind(sim_mechanism);
      const BetaShape beta{sim_beta[0], sim_beta[1]};
      Simulation sim;
      switch (kind) {
        case MechanismKind::kMcar:
          sim = simulate_mcar(net, sim_m, sim_q, sim_seed, sim_size);
          break;
        case MechanismKind::kMar:
          sim = simulate_mar(net, sim_m, sim_p, beta, sim_seed, sim_size);
          break;
        case MechanismKind::kInformedMar:
          sim = simulate_informed_mar(net, sim_m, sim_p, beta, sim_s, sim_seed, sim_size);
          break;
        case MechanismKind::kMnarCross:
          if (sim_pair.size() != 2) throw UsageError("mnar-cross needs --pair X Y");
          sim = simulate_mnar_cross(net, net->index_of(sim_pair[0]), net->index_of(sim_pair[1]), beta, sim_seed,
                                    sim_size);
          break;
      }
      emit(sim_out, write_dataset(sim.dataset), out);
      if (!sim_graph.empty()) write_file(sim_graph, serialize_missingness_graph(sim.graph));
    } else if (classify_cmd->parsed()) {
      const auto graph = with_file(cls_graph, [](const std::string& t) { return parse_missingness_graph(t); });
      out << to_string(classify(graph)) << '\n';
    } else if (learn_cmd->parsed()) {
      const auto learner = parse_learner(ln_learner);
      if (!learner) throw UsageError("unknown learner '" + ln_learner + "'");
      const auto aggregation = parse_aggregation(ln_aggregation);
      if (!aggregation) throw UsageError("unknown aggregation '" + ln_aggregation + "'");
      if (!is_closed_form(*learner) && !ln_seed) throw UsageError(ln_learner + " is randomized and needs --seed");
      if (ln_time && !(*ln_time > 0.0)) throw UsageError("--time-limit must be positive");
      if (!(ln_prior > 0.0)) throw UsageError("--prior must be positive");
      const auto net = load_network(ln_network);
      LearnOptions options;
      options.prior = ln_prior;
      options.aggregation = *aggregation;
      options.time_limit = ln_time;
      options.seed = ln_seed.value_or(0);
      options.em_restarts = ln_restarts;
      if (!ln_graph.empty()) {
        const auto graph = with_file(ln_graph, [](const std::string& t) { return parse_missingness_graph(t); });
        if (!same_structure(graph.network(), *net)) throw StructureMismatch("graph and network differ");
        options.informed = graph.informed();
      }
      if ((*learner == Learner::kIdMar || *learner == Learner::kIfMar) && !options.informed)
        throw UsageError(ln_learner + " needs --graph with an informed set");
      const auto dataset = with_file(ln_dataset, [&](const std::string& t) { return read_dataset(t, net); });
      const auto result = learn(*learner, *net, augment(dataset), options);
      emit(ln_out, serialize_network(result.network), out);
    } else if (evaluate->parsed()) {
      const auto truth = load_network(ev_network);
      const auto learned = load_network(ev_learned);
      const auto test = with_file(ev_dataset, [&](const std::string& t) { return read_dataset(t, truth); });
      const double ll = test_log_likelihood(*learned, test);
      const double kld = kl_divergence(*truth, *learned);
      out << number(ll) << ',' << number(kld) << '\n';
    } else if (bench->parsed()) {
      const std::filesystem::path config_path(bn_config);
      auto config = with_file(bn_config, [&](const std::string& t) {
        return parse_experiment_config(t, config_path.parent_path());
      });
      if (bn_seed) config.seed = *bn_seed;
      const auto reports = run_experiment(config);
      const auto format = bn_format == "latex" ? TableFormat::kLatex : TableFormat::kCsv;
      if (!bn_out.empty()) {
        const std::filesystem::path dir(bn_out);
        std::filesystem::create_directories(dir);
        write_file(dir / "reports.csv", emit_reports_csv(reports));
        write_file(dir / "overview_ll.csv", emit_overview_table(reports, TableFormat::kCsv, TableMetric::kLl));
        write_file(dir / "overview_ll.tex", emit_overview_table(reports, TableFormat::kLatex, TableMetric::kLl));
        if (config.compute_kld) {
          write_file(dir / "overview_kld.csv", emit_overview_table(reports, TableFormat::kCsv, TableMetric::kKld));
          write_file(dir / "overview_kld.tex", emit_overview_table(reports, TableFormat::kLatex, TableMetric::kKld));
        }
        for (const char* name : {"kld-vs-size", "ll-vs-size", "ll-vs-time", "kld-vs-time"})
          write_file(dir / (std::string("curves_") + name + ".csv"), emit_curves(reports, *parse_curve_metric(name)));
      }
      out << emit_overview_table(reports, format, TableMetric::kLl);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DeadlineBeforeFirstIteration& e) {
    err << "deadline: " << e.what() << '\n';
    return kExitDeadline;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace bnmiss

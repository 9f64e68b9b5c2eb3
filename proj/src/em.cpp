#include "bnmiss/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bnmiss/estimators.hpp"

namespace bnmiss {

namespace {

std::vector<Eigen::VectorXd> zero_counts(const BayesianNetwork& net) {
  std::vector<Eigen::VectorXd> counts;
  for (int v = 0; v < net.size(); ++v)
    counts.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.parent_configurations(v)) * net.cardinality(v)));
  return counts;
}

double max_change(const BayesianNetwork& a, const BayesianNetwork& b) {
  double d = 0.0;
  for (int v = 0; v < a.size(); ++v) d = std::max(d, (a.cpt(v) - b.cpt(v)).cwiseAbs().maxCoeff());
  return d;
}

}  // namespace

std::size_t EmTrace::iterations() const {
  std::size_t n = 0;
  for (const auto& r : restarts) n += r.size();
  return n;
}

void validate(const EmConfig& config) {
  if (config.restarts < 1) throw std::invalid_argument("EM needs at least one restart");
  if (!(config.threshold > 0.0)) throw std::invalid_argument("EM threshold must be positive");
  if (config.max_iterations < 1) throw std::invalid_argument("EM needs at least one iteration");
  if (config.time_limit && !(*config.time_limit > 0.0)) throw std::invalid_argument("EM time limit must be positive");
  if (!(config.prior > 0.0)) throw std::invalid_argument("prior concentration must be positive");
}

double log_prior(const BayesianNetwork& params, double prior) {
  if (prior == 1.0) return 0.0;
  double s = 0.0;
  for (const auto& cpt : params.cpts())
    for (Eigen::Index i = 0; i < cpt.size(); ++i)
      if (cpt.data()[i] > 0.0) s += (prior - 1.0) * std::log(cpt.data()[i]);
  return s;
}

BayesianNetwork random_parameters(const BayesianNetwork& skeleton, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Cpt> cpts;
  for (int v = 0; v < skeleton.size(); ++v) {
    Cpt cpt(static_cast<Eigen::Index>(skeleton.parent_configurations(v)), skeleton.cardinality(v));
    for (Eigen::Index r = 0; r < cpt.rows(); ++r) cpt.row(r) = sample_dirichlet(rng, skeleton.cardinality(v), 1.0).transpose();
    cpts.push_back(std::move(cpt));
  }
  return skeleton.with_cpts(std::move(cpts));
}

std::optional<EmStep> em_iteration(const BayesianNetwork& params, const DataDistribution& dist,
                                   InferenceEngine engine, double prior, const BpOptions& bp,
                                   std::optional<EmClock::time_point> deadline) {
  if (dist.num_variables() != params.size()) throw StructureMismatch("data and parameters have different variables");
  const int n = params.size();
  auto counts = zero_counts(params);
  double ll = 0.0;
  std::optional<Jointree> jt;
  std::optional<JointreeSession> session;
  for (std::size_t i = 0; i < dist.distinct_rows(); ++i) {
    if (deadline && EmClock::now() >= *deadline) return std::nullopt;
    const auto row = dist.row(i);
    const double w = static_cast<double>(dist.count(i));
    if (std::find(row.begin(), row.end(), kMi) == row.end()) {
      for (int v = 0; v < n; ++v) {
        const std::size_t idx = params.parent_row(v, row) * static_cast<std::size_t>(params.cardinality(v)) +
                                static_cast<std::size_t>(row[static_cast<std::size_t>(v)]);
        counts[static_cast<std::size_t>(v)](static_cast<Eigen::Index>(idx)) += w;
      }
      const double lp = log_joint_probability(params, row);
      if (!std::isfinite(lp)) throw ZeroProbabilityEvidence("a complete row has probability zero");
      ll += w * lp;
      continue;
    }
    if (engine == InferenceEngine::kJointree) {
      if (!session) {
        jt.emplace(build_jointree(params));
        session.emplace(*jt);
      }
      ll += w * session->propagate(params, row);
      session->accumulate_families(counts, w);
    } else {
      const BpResult r = loopy_bp_marginals(params, Instantiation(std::vector<int>(row.begin(), row.end())), bp);
      ll += w * r.log_evidence;
      for (int v = 0; v < n; ++v) counts[static_cast<std::size_t>(v)] += w * r.marginals.families[static_cast<std::size_t>(v)];
    }
  }
  std::vector<Cpt> cpts;
  for (int v = 0; v < n; ++v) cpts.push_back(smoothed_cpt(counts[static_cast<std::size_t>(v)], params.cardinality(v), prior));
  return EmStep{params.with_cpts(std::move(cpts)), ll, ll + log_prior(params, prior)};
}

EmStep em_iteration(const BayesianNetwork& params, const IncompleteDataset& data, InferenceEngine engine,
                    double prior) {
  return *em_iteration(params, augment(data), engine, prior);
}

EmResult em_learn(const BayesianNetwork& skeleton, const DataDistribution& dist, const EmConfig& config) {
  validate(config);
  if (config.init && !same_structure(*config.init, skeleton))
    throw StructureMismatch("initial parameters do not match the skeleton");
  const auto start = EmClock::now();
  std::optional<EmClock::time_point> deadline;
  if (config.time_limit)
    deadline = start + std::chrono::duration_cast<EmClock::duration>(std::chrono::duration<double>(*config.time_limit));
  auto elapsed = [&] { return std::chrono::duration<double>(EmClock::now() - start).count(); };

  EmResult result;
  std::optional<BayesianNetwork> best;
  double best_objective = -std::numeric_limits<double>::infinity();
  bool stop = false;
  for (int r = 0; r < config.restarts && !stop; ++r) {
    BayesianNetwork params = (r == 0 && config.init)
                                 ? *config.init
                                 : random_parameters(skeleton, derive_seed(config.seed, static_cast<std::uint64_t>(r)));
    auto& records = result.trace.restarts.emplace_back();
    double previous = 0.0;
    for (int it = 0; it < config.max_iterations; ++it) {
      auto step = em_iteration(params, dist, config.engine, config.prior, config.bp, deadline);
      if (!step) {
        stop = true;
        break;
      }
      records.push_back({step->log_likelihood, step->objective, elapsed()});
      // The objective scores the incoming parameters. Under the exact engine
      // the outgoing ones score at least as high, so they are kept instead.
      const bool exact = config.engine == InferenceEngine::kJointree;
      if (step->objective > best_objective || (exact && step->objective >= best_objective - 1e-9)) {
        if (step->objective > best_objective) best_objective = step->objective;
        best = exact ? step->params : params;
        result.trace.best_restart = r;
      }
      const double change = max_change(params, step->params);
      const bool converged = it > 0 && (std::abs(step->objective - previous) <=
                                        config.threshold * std::max(std::abs(previous), 1e-300));
      previous = step->objective;
      params = std::move(step->params);
      if (change < 1e-12 || converged) break;
    }
  }
  if (!best) throw DeadlineBeforeFirstIteration("EM did not finish one iteration before the deadline");
  result.trace.best_objective = best_objective;
  result.network = std::move(*best);
  return result;
}

EmResult em_learn(const BayesianNetwork& skeleton, const IncompleteDataset& data, const EmConfig& config) {
  return em_learn(skeleton, augment(data), config);
}

}  // namespace bnmiss

#include "bnmiss/learners.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <string>

#include "bnmiss/estimators.hpp"

namespace bnmiss {

namespace {

struct Entry {
  Learner learner;
  const char* name;
};

constexpr Entry kNames[] = {
    {Learner::kListwise, "listwise"}, {Learner::kDMcar, "d-mcar"},         {Learner::kFMcar, "f-mcar"},
    {Learner::kDMar, "d-mar"},        {Learner::kFMar, "f-mar"},           {Learner::kIdMar, "id-mar"},
    {Learner::kIfMar, "if-mar"},      {Learner::kMnarCross, "mnar-cross"}, {Learner::kEmJt, "em-jt"},
    {Learner::kEmBp, "em-bp"},        {Learner::kFmarEmJt, "fmar-em-jt"},
};

const std::vector<int>& informed_set(const LearnOptions& options) {
  if (!options.informed) throw std::invalid_argument("informed learners need an informed set");
  return *options.informed;
}

}  // namespace

const char* to_string(Learner learner) {
  for (const auto& e : kNames)
    if (e.learner == learner) return e.name;
  return "?";
}

std::optional<Learner> parse_learner(std::string_view name) {
  for (const auto& e : kNames)
    if (name == e.name) return e.learner;
  return std::nullopt;
}

const std::vector<Learner>& all_learners() {
  static const std::vector<Learner> all = [] {
    std::vector<Learner> out;
    for (const auto& e : kNames) out.push_back(e.learner);
    return out;
  }();
  return all;
}

bool is_closed_form(Learner learner) {
  return learner != Learner::kEmJt && learner != Learner::kEmBp && learner != Learner::kFmarEmJt;
}

EstimateTable mnar_cross_family(const DataDistribution& dist, std::span<const int> family) {
  const auto& xm = dist.partially_observed_variables();
  if (xm.size() != 2) throw UnsupportedFamily("mnar-cross needs exactly two partially observed variables");
  const bool touches = std::any_of(family.begin(), family.end(), [&](int v) { return dist.partially_observed(v); });
  if (!touches) return direct_deletion_mcar(dist, family);
  for (int v : family)
    if (v != xm[0] && v != xm[1])
      throw UnsupportedFamily("family of '" + dist.network().variable(family.back()).name +
                              "' mixes the cross pair with other variables");
  EstimateTable joint = mnar_cross_estimate(dist, xm[0], xm[1]);
  EstimateTable out = marginalize(joint, family);
  out.support = joint.support;
  return out;
}

LearnResult learn(Learner learner, const BayesianNetwork& skeleton, const DataDistribution& dist,
                  const LearnOptions& options) {
  const auto method = options.aggregation;
  auto closed = [&](const FamilyEstimator& estimator) {
    return LearnResult{extract_parameters(skeleton, estimator, dist, options.prior), std::nullopt};
  };
  EmConfig em;
  em.restarts = options.em_restarts;
  em.time_limit = options.time_limit;
  em.seed = options.seed;
  em.prior = options.prior;
  em.bp = options.bp;
  switch (learner) {
    case Learner::kListwise:
      return closed(listwise_deletion);
    case Learner::kDMcar:
      return closed(direct_deletion_mcar);
    case Learner::kFMcar:
      return closed([method](const DataDistribution& d, std::span<const int> f) {
        return factored_deletion_mcar(d, f, method);
      });
    case Learner::kDMar:
      return closed([](const DataDistribution& d, std::span<const int> f) { return direct_deletion_mar(d, f); });
    case Learner::kFMar:
      return closed([method](const DataDistribution& d, std::span<const int> f) {
        return factored_deletion_mar(d, f, method);
      });
    case Learner::kIdMar: {
      Scope scope = informed_set(options);
      return closed([scope](const DataDistribution& d, std::span<const int> f) { return direct_deletion_mar(d, f, scope); });
    }
    case Learner::kIfMar: {
      Scope scope = informed_set(options);
      return closed([method, scope](const DataDistribution& d, std::span<const int> f) {
        return factored_deletion_mar(d, f, method, scope);
      });
    }
    case Learner::kMnarCross:
      return closed(mnar_cross_family);
    case Learner::kEmJt:
    case Learner::kEmBp: {
      em.engine = learner == Learner::kEmJt ? InferenceEngine::kJointree : InferenceEngine::kLoopyBp;
      EmResult r = em_learn(skeleton, dist, em);
      return LearnResult{std::move(r.network), std::move(r.trace)};
    }
    case Learner::kFmarEmJt: {
      const auto start = std::chrono::steady_clock::now();
      em.init = extract_parameters(
          skeleton,
          [method](const DataDistribution& d, std::span<const int> f) { return factored_deletion_mar(d, f, method); },
          dist, options.prior);
      if (options.time_limit) {
        const double used = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const double left = *options.time_limit - used;
        if (!(left > 0.0)) throw DeadlineBeforeFirstIteration("closed-form seeding used the whole time limit");
        em.time_limit = left;
      }
      EmResult r = em_learn(skeleton, dist, em);
      return LearnResult{std::move(r.network), std::move(r.trace)};
    }
  }
  throw std::invalid_argument("unknown learner");
}

}  // namespace bnmiss

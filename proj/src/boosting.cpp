#include "hslab/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "hslab/weak2.hpp"
#include "hslab/weakk.hpp"

namespace hslab {

ExampleOracle::ExampleOracle(TargetFunction f, const DistributionDescriptor& dist,
                             std::uint64_t seed)
    : f_(std::move(f)), dist_(resolve_distribution(dist)), rng_(RngStream::from_seed(seed)) {
  if (f_.n != dist_.desc.n)
    throw std::invalid_argument("oracle: target/distribution dimension mismatch");
}

std::pair<Vec, int> ExampleOracle::draw() {
  Vec x = draw_point(dist_, f_, rng_);
  int y = evaluate_target(f_, x);
  return {std::move(x), y};
}

LabeledSample ExampleOracle::draw_sample(int m) {
  if (m < 1) throw std::invalid_argument("oracle: sample size must be positive");
  LabeledSample s;
  s.n = dist_.desc.n;
  s.points.reserve(static_cast<std::size_t>(m));
  s.labels.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    auto [x, y] = draw();
    s.points.push_back(std::move(x));
    s.labels.push_back(y);
  }
  return s;
}

ExampleOracle make_oracle(const TargetFunction& f, const DistributionDescriptor& dist,
                          std::uint64_t seed) {
  return ExampleOracle(f, dist, seed);
}

SampleWeakLearner make_weak2_learner() {
  return [](const LabeledSample& s, const LearnerParams& p) -> std::optional<Hypothesis> {
    try {
      Weak2Report r = weak_learn_and2(s, p);
      if (!r.success) return std::nullopt;
      return r.hypothesis;
    } catch (const NonConvergence&) {
      // A reweighted resample can be too degenerate to whiten; the caller
      // treats this round as a miss and redraws.
      return std::nullopt;
    }
  };
}

SampleWeakLearner make_weakk_learner(int k) {
  return [k](const LabeledSample& s, const LearnerParams& p) -> std::optional<Hypothesis> {
    try {
      WeakKReport r = weak_learn_anyk(s, k, p);
      if (!r.success) return std::nullopt;
      return r.hypothesis;
    } catch (const NonConvergence&) {
      return std::nullopt;
    }
  };
}

int default_d_vc_weak2(int n) { return n * n; }

int default_d_vc_weakk(int n, int k, double log_base_floor) {
  double big_l = log_floor(n, log_base_floor);
  return n * n * static_cast<int>(std::ceil(std::pow(big_l, k)));
}

std::optional<Hypothesis> weak_learn_over_distribution(ExampleOracle& oracle,
                                                       const SampleWeakLearner& learner,
                                                       int d_vc, double gamma_prime,
                                                       const LearnerParams& params,
                                                       double c_vc) {
  if (!(gamma_prime > 0.0 && gamma_prime < 0.5))
    throw std::invalid_argument("weak_learn_over_distribution: gamma_prime out of (0, 1/2)");
  if (d_vc < 1) throw std::invalid_argument("weak_learn_over_distribution: d_vc must be positive");
  const int m = std::max(
      2, static_cast<int>(std::ceil(c_vc * d_vc / (gamma_prime * gamma_prime))));
  LabeledSample s = oracle.draw_sample(m);
  return learner(s, params);
}

int evaluate_boosted(const BoostedHypothesis& bh, const Vec& x) {
  if (bh.members.empty()) throw std::invalid_argument("boosted hypothesis: no members");
  double score = 0.0;
  for (const auto& m : bh.members)
    score += m.weight * evaluate_hypothesis(m.h, x);
  return sign(score);
}

double boosted_error(const BoostedHypothesis& bh, const LabeledSample& s) {
  if (s.size() == 0) throw std::invalid_argument("boosted_error: empty sample");
  int wrong = 0;
  for (int i = 0; i < s.size(); ++i)
    if (evaluate_boosted(bh, s.points[i]) != s.labels[i]) ++wrong;
  return static_cast<double>(wrong) / s.size();
}

BoostFailure::BoostFailure(const std::string& what, double best, int retries)
    : std::runtime_error(what), best_holdout_error(best), retries_used(retries) {}

namespace {

// One draw from a discrete distribution given its inclusive cumulative sums.
std::size_t weighted_index(const std::vector<double>& cumulative, RngStream& rng) {
  double u = rng.next_unit() * cumulative.back();
  auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
  if (it == cumulative.end()) --it;
  return static_cast<std::size_t>(it - cumulative.begin());
}

struct AttemptOutcome {
  bool completed = false;   // all rounds ran (or early exit); false = round failure
  BoostResult result;
};

AttemptOutcome run_boost_attempt(ExampleOracle& oracle, const SampleWeakLearner& weak,
                                 double epsilon, int rounds_target, int m_work,
                                 const BoostParams& params,
                                 const LearnerParams& learner_params, RngStream rng) {
  AttemptOutcome out;
  BoostResult& res = out.result;

  LabeledSample work = oracle.draw_sample(m_work);
  const int m = work.size();
  std::vector<double> weights(m, 1.0 / m);
  std::vector<double> score(m, 0.0);
  std::vector<int> preds(m, 0);
  std::vector<double> cumulative(m, 0.0);
  const int round_m = std::min(params.round_sample_cap, m);
  double sum_gamma_sq = 0.0;

  for (int t = 0; t < rounds_target; ++t) {
    // Weighted resample for this round's learner input.
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
      acc += weights[i];
      cumulative[i] = acc;
    }

    bool round_ok = false;
    double eps_t = 0.5;
    std::optional<Hypothesis> h;
    int redraws = 0;
    for (; redraws <= params.weak_redraw_budget; ++redraws) {
      LabeledSample round_sample;
      round_sample.n = work.n;
      round_sample.points.reserve(static_cast<std::size_t>(round_m));
      round_sample.labels.reserve(static_cast<std::size_t>(round_m));
      for (int i = 0; i < round_m; ++i) {
        std::size_t idx = weighted_index(cumulative, rng);
        round_sample.points.push_back(work.points[idx]);
        round_sample.labels.push_back(work.labels[idx]);
      }
      LearnerParams lp = learner_params;
      lp.seed = rng.next_u64();
      h = weak(round_sample, lp);
      if (!h) continue;

      double werr = 0.0;
      for (int i = 0; i < m; ++i) {
        preds[i] = evaluate_hypothesis(*h, work.points[i]);
        if (preds[i] != work.labels[i]) werr += weights[i];
      }
      eps_t = werr;
      if (0.5 - eps_t >= params.min_round_advantage) {
        round_ok = true;
        break;
      }
    }
    if (!round_ok) return out;  // attempt aborted; caller may restart

    if (eps_t == 0.0) {
      // Weights are strictly positive, so zero weighted error means the
      // hypothesis is correct on the whole working sample by itself.
      res.hypothesis.members.clear();
      res.hypothesis.members.push_back({std::move(*h), 1.0});
      res.round_stats.push_back({0.0, 0.5, 1.0, redraws});
      res.rounds_run = t + 1;
      res.training_error = 0.0;
      sum_gamma_sq += 0.25;
      res.bound_value = std::exp(-2.0 * sum_gamma_sq);
      res.bound_ok = true;
      out.completed = true;
      return out;
    }

    const double eps_c = std::clamp(eps_t, 1e-12, 0.5 - 1e-12);
    const double alpha = 0.5 * std::log((1.0 - eps_c) / eps_c);
    double z = 0.0;
    for (int i = 0; i < m; ++i) {
      weights[i] *= std::exp(-alpha * work.labels[i] * preds[i]);
      z += weights[i];
      score[i] += alpha * preds[i];
    }
    for (int i = 0; i < m; ++i) weights[i] /= z;

    res.hypothesis.members.push_back({std::move(*h), alpha});
    const double gamma_t = 0.5 - eps_t;
    sum_gamma_sq += gamma_t * gamma_t;
    res.round_stats.push_back({eps_t, gamma_t, alpha, redraws});
    res.rounds_run = t + 1;

    int wrong = 0;
    for (int i = 0; i < m; ++i)
      if (sign(score[i]) != work.labels[i]) ++wrong;
    res.training_error = static_cast<double>(wrong) / m;
    if (res.training_error <= params.train_stop) break;
  }

  res.bound_value = std::exp(-2.0 * sum_gamma_sq);
  res.bound_ok = res.training_error <= res.bound_value + 1e-12;
  out.completed = !res.hypothesis.members.empty();
  (void)epsilon;
  return out;
}

}  // namespace

BoostResult boost(ExampleOracle& oracle, const SampleWeakLearner& weak, double epsilon,
                  double delta, double gamma, const BoostParams& params,
                  const LearnerParams& learner_params) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("boost: epsilon out of (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("boost: delta out of (0,1)");
  if (!(gamma > 0.0 && gamma < 0.5)) throw std::invalid_argument("boost: gamma out of (0, 1/2)");

  const int d_vc = params.d_vc > 0 ? params.d_vc : default_d_vc_weak2(oracle.dim());
  const int rounds_target = static_cast<int>(
      std::ceil(std::log(1.0 / epsilon) / (2.0 * gamma * gamma)));
  const double m_formula =
      params.c_boost * (1.0 / epsilon) *
      (d_vc / (gamma * gamma) + std::log(1.0 / delta));
  const int m_work = std::max(
      2, std::min(params.work_sample_cap, static_cast<int>(std::ceil(m_formula))));

  const RngStream root = RngStream::from_seed(params.seed);
  double best_holdout = 1.0;
  int attempts = 0;
  for (; attempts <= params.retry_budget; ++attempts) {
    AttemptOutcome attempt =
        run_boost_attempt(oracle, weak, epsilon, rounds_target, m_work, params,
                          learner_params, root.derive(static_cast<std::uint64_t>(attempts)));
    if (!attempt.completed) continue;

    LabeledSample holdout = oracle.draw_sample(params.holdout_size);
    attempt.result.holdout_error = boosted_error(attempt.result.hypothesis, holdout);
    best_holdout = std::min(best_holdout, attempt.result.holdout_error);
    if (attempt.result.holdout_error <= epsilon) {
      attempt.result.retries_used = attempts;
      attempt.result.seed = params.seed;
      return std::move(attempt.result);
    }
  }
  throw BoostFailure("boost: holdout validation failed after all retries", best_holdout,
                     attempts);
}

nlohmann::ordered_json boosted_to_json(const BoostedHypothesis& bh) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["type"] = "boosted_hypothesis";
  nlohmann::ordered_json members = nlohmann::ordered_json::array();
  for (const auto& m : bh.members) {
    nlohmann::ordered_json mj;
    mj["weight"] = m.weight;
    mj["hypothesis"] = hypothesis_to_json(m.h);
    members.push_back(std::move(mj));
  }
  j["members"] = std::move(members);
  return j;
}

BoostedHypothesis boosted_from_json(const nlohmann::json& j) {
  if (j.at("schema_version").get<int>() != 1)
    throw std::invalid_argument("boosted hypothesis: unsupported schema_version");
  if (j.at("type").get<std::string>() != "boosted_hypothesis")
    throw std::invalid_argument("boosted hypothesis: wrong record type");
  BoostedHypothesis bh;
  for (const auto& mj : j.at("members")) {
    BoostedHypothesis::Member m;
    m.weight = mj.at("weight").get<double>();
    if (!std::isfinite(m.weight))
      throw std::invalid_argument("boosted hypothesis: non-finite member weight");
    m.h = hypothesis_from_json(mj.at("hypothesis"));
    bh.members.push_back(std::move(m));
  }
  if (bh.members.empty())
    throw std::invalid_argument("boosted hypothesis: no members");
  return bh;
}

void save_boosted_json(const BoostedHypothesis& bh, const std::string& path) {
  write_text_file(path, boosted_to_json(bh).dump(2) + "\n");
}

BoostedHypothesis load_boosted_json(const std::string& path) {
  return boosted_from_json(load_json_file(path));
}

}  // namespace hslab

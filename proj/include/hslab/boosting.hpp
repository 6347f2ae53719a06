#ifndef HSLAB_BOOSTING_HPP
#define HSLAB_BOOSTING_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hslab/core.hpp"
#include "hslab/data.hpp"

namespace hslab {

// Stateful i.i.d. example source: point from the distribution, label from the
// target.
class ExampleOracle {
 public:
  ExampleOracle(TargetFunction f, const DistributionDescriptor& dist, std::uint64_t seed);

  std::pair<Vec, int> draw();
  LabeledSample draw_sample(int m);

  const TargetFunction& target() const { return f_; }
  int dim() const { return dist_.desc.n; }

 private:
  TargetFunction f_;
  ResolvedDistribution dist_;
  RngStream rng_;
};

ExampleOracle make_oracle(const TargetFunction& f, const DistributionDescriptor& dist,
                          std::uint64_t seed);

// A sample-based weak learner: returns a hypothesis or nothing (FAIL).
using SampleWeakLearner =
    std::function<std::optional<Hypothesis>(const LabeledSample&, const LearnerParams&)>;

SampleWeakLearner make_weak2_learner();
SampleWeakLearner make_weakk_learner(int k);

// Default VC-dimension surrogates for the two hypothesis classes.
int default_d_vc_weak2(int n);
int default_d_vc_weakk(int n, int k, double log_base_floor);

// Draws ceil(c_vc * d_vc / gamma_prime^2) examples and runs the weak learner
// once on them.
std::optional<Hypothesis> weak_learn_over_distribution(ExampleOracle& oracle,
                                                       const SampleWeakLearner& learner,
                                                       int d_vc, double gamma_prime,
                                                       const LearnerParams& params,
                                                       double c_vc = 0.5);

struct BoostParams {
  double c_vc = 0.5;
  double c_boost = 4.0;
  int retry_budget = 3;            // full restarts after a failed holdout check
  int holdout_size = 20000;
  int work_sample_cap = 20000;     // cap on the once-drawn working sample
  int round_sample_cap = 20000;    // cap on each round's resampled input
  int weak_redraw_budget = 5;      // per-round redraws on FAIL / no advantage
  double min_round_advantage = 1e-6;  // required working-sample advantage
  double train_stop = 0.0;         // stop early when training error <= this
  std::uint64_t seed = 0;
  int d_vc = -1;                   // <=0: weak2 surrogate n^2
};

struct BoostedHypothesis {
  struct Member {
    Hypothesis h;
    double weight = 0.0;
  };
  std::vector<Member> members;
};

int evaluate_boosted(const BoostedHypothesis& bh, const Vec& x);
double boosted_error(const BoostedHypothesis& bh, const LabeledSample& s);

struct RoundStat {
  double eps_t = 0.0;    // weighted error on the working sample
  double gamma_t = 0.0;  // 1/2 - eps_t
  double alpha_t = 0.0;
  int redraws = 0;
};

struct BoostResult {
  BoostedHypothesis hypothesis;
  int rounds_run = 0;
  double training_error = 0.0;
  double bound_value = 1.0;   // exp(-2 sum gamma_t^2)
  bool bound_ok = true;       // training_error <= bound_value
  double holdout_error = 0.0;
  int retries_used = 0;
  std::vector<RoundStat> round_stats;
  std::uint64_t seed = 0;
};

struct BoostFailure : std::runtime_error {
  double best_holdout_error;
  int retries_used;
  BoostFailure(const std::string& what, double best, int retries);
};

// Multiplicative-weights boosting of a sample-based weak learner to error
// epsilon with confidence delta: T = ceil(ln(1/eps)/(2 gamma^2)) rounds over a
// working sample of size c_boost*(1/eps)*(d_vc/gamma^2 + ln(1/delta)) (capped),
// weighted resampling per round, exact exponential reweighting on the working
// sample, holdout-validated output with bounded restarts. Throws BoostFailure
// when every restart fails its holdout check.
BoostResult boost(ExampleOracle& oracle, const SampleWeakLearner& weak, double epsilon,
                  double delta, double gamma, const BoostParams& params,
                  const LearnerParams& learner_params);

// Persistence (same JSON conventions as the data module).
nlohmann::ordered_json boosted_to_json(const BoostedHypothesis& bh);
BoostedHypothesis boosted_from_json(const nlohmann::json& j);
void save_boosted_json(const BoostedHypothesis& bh, const std::string& path);
BoostedHypothesis load_boosted_json(const std::string& path);

}  // namespace hslab

#endif  // HSLAB_BOOSTING_HPP

#ifndef HSLAB_LEMMALAB_HPP
#define HSLAB_LEMMALAB_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hslab/core.hpp"
#include "hslab/data.hpp"
#include "hslab/weakk.hpp"

namespace hslab {

// One Monte Carlo cell: its parameters, the estimate with a 95% interval, the
// predicted band it is judged against, and the mechanical verdict.
struct LemmaCell {
  nlohmann::ordered_json params;
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  nlohmann::ordered_json band;
  std::string verdict;  // "pass" | "fail" | "inconclusive"
};

struct LemmaReport {
  std::string lemma_id;
  std::vector<LemmaCell> cells;
  std::string verdict;  // worst cell verdict (fail > inconclusive > pass)
};

std::string aggregate_verdict(const std::vector<LemmaCell>& cells);
nlohmann::ordered_json lemma_cell_row(const LemmaReport& r, const LemmaCell& c,
                                      std::uint64_t seed);

// --- Advantage-ratio monotonicity ------------------------------------------
// For unit w and points sharing one in-plane direction, the region-hit ratio
// under lucky guesses must not drop below 1 when w.x >= w.x_ref.
struct MonotonicityConfig {
  std::vector<int> ns = {9, 16};
  std::vector<double> betas = {0.15, 0.3};
  std::vector<double> margins = {0.0, 0.2, 0.5};  // candidate w.x values
  double alpha_cap = 2.0;                         // alpha = min(10*beta, cap)
  long long trials = 100000;
  double slack = 0.03;  // pass iff ci_low >= 1 - slack
  std::uint64_t seed = 0;
};

LemmaReport verify_monotonicity(const MonotonicityConfig& cfg);

// --- Advantage growth rate ---------------------------------------------------
// log of the advantage ratio should grow linearly in n*alpha*beta*(w.x):
// strictly increasing cells with disjoint intervals, fitted slope within a
// band, and the perpendicular reference point hitting at the plain Gaussian
// tail rate.
struct AdvantageBandConfig {
  int n = 16;
  double beta = 0.3;
  double alpha_cap = 2.0;
  std::vector<double> margins = {0.1, 0.2, 0.4};
  long long trials = 100000;
  double slope_lo = 0.1;
  double slope_hi = 10.0;
  std::uint64_t seed = 0;
};

LemmaReport verify_advantage_band(const AdvantageBandConfig& cfg);

// --- Region filtering events -------------------------------------------------
// Probability that a plain Gaussian guess leaves one side both large and pure,
// for a point set with the (1/(4n), 1/(2 sqrt n))-margin w.r.t. w. Event 1 is
// the positive side, event 2 the negative side.
struct FilteringConfig {
  double purity_factor = -1.0;  // <0: 16/n^{4/3}
  double size_floor = -1.0;     // <0: 2^{-2 sqrt(n) ln(n)}
  long long trials = 20000;
  std::uint64_t seed = 0;
};

LemmaReport verify_filtering_simple(const std::vector<Vec>& points, const Vec& w,
                                    const FilteringConfig& cfg);

// --- Reverse Markov ----------------------------------------------------------
// For bounded z <= u with E[z] = kappa*u, Pr[z >= kappa*u/2] >= kappa/2,
// checked exactly on randomly generated atom distributions.
LemmaReport verify_reverse_markov(long long trials, std::uint64_t seed);

// --- Planted chains ----------------------------------------------------------
struct PlantedChainConfig {
  int n = 9;
  int k = 2;
  int m = 4000;
  int runs = 100;
  TargetMode mode = TargetMode::kAndOfK;
  std::uint64_t seed = 0;
  LearnerParams learner;  // seed overridden per run
  FineFilterParams fine;
};

// Aggregated structural audit of instrumented planted runs: leaderboard shape
// at every step, slot qualities non-increasing across slots, update-count
// bounds, fine-filter flag rates, and final impurities.
struct PlantedChainSummary {
  int runs = 0;
  int completed = 0;
  int aborted = 0;
  long long steps_total = 0;
  long long shape_violations = 0;
  long long qual_order_violations = 0;
  int update_bound_violations = 0;
  long long fine1_true = 0, fine2_true = 0, fine3_true = 0;
  std::vector<double> final_impurities;  // one entry per completed run slot 1
};

PlantedChainSummary audit_planted_chains(const PlantedChainConfig& cfg);
LemmaReport verify_planted_chain(const PlantedChainConfig& cfg);

}  // namespace hslab

#endif  // HSLAB_LEMMALAB_HPP

#ifndef HSLAB_WEAKK_HPP
#define HSLAB_WEAKK_HPP

#include <cstdint>
#include <vector>

#include "hslab/core.hpp"
#include "hslab/forster.hpp"

namespace hslab {

// Decreasing region thresholds: beta_i = min(L^{5(k-i+1)}/n^{1/4}, cap_i)
// where L = max(ln n, log_base_floor) and cap_i = 0.9 * 0.95^{i-1}. The raw
// formula explodes at desk n; the per-index decaying cap keeps regions
// nontrivial on the unit sphere while preserving strict decrease. alpha_i =
// 10 * beta_i.
struct BetaSchedule {
  int n = 0;
  int k = 0;
  double big_l = 0.0;
  std::vector<double> betas;
  std::vector<double> alphas;
};

BetaSchedule beta_schedule(int n, int k, const LearnerParams& params);

// u[r-1] = t, u[i] = 0 for all i > r-1 (r is 1-based).
std::vector<int> leaderboard_update(const std::vector<int>& u, int r, int t);

// Nonzero strictly-increasing prefix followed by zeros.
bool leaderboard_shape_ok(const std::vector<int>& u);

// Largest q >= 0 such that at least a p fraction of points has |w.x| >=
// L^q/(2 sqrt(n)), with p = (1/(4n)) exp(-n beta_j^2 tau / L); -1 when even
// q=0 fails (cannot happen on freshly whitened sets). j is 1-based.
int diag_quality(const std::vector<Vec>& points, const Vec& w, int j,
                 const BetaSchedule& schedule);

// Fraction of survivors whose original point sits on the wrong side of the
// original target halfspace that a given step fixed.
double diag_impurity(const std::vector<Vec>& original_points, const Vec& w_original,
                     int side);

// max(imp, e^{-sqrt(n) beta_j^2 L^{qual-1} / 3}).
double diag_mimp(double imp, int j, int qual, const BetaSchedule& schedule);

// Piecewise constant chain classifier: outside V -> b1, failing any stage
// region -> b2, survivor -> b3.
Hypothesis assemble_h_b1b2b3(const Mat& basis, const std::vector<Stage>& stages, int b1,
                             int b2, int b3);

struct WeakKReport {
  bool success = false;          // false = FAIL after budget
  Hypothesis hypothesis;
  int iterations_used = 0;       // outer iterations consumed
  int completed_chains = 0;      // inner loops that reached a full leaderboard
  int aborted_chains = 0;        // empty filter or whitening non-convergence
  double sample_advantage = 0.0; // recounted accuracy minus 1/2
  std::uint64_t seed = 0;
};

// Weak learner for arbitrary functions of k halfspaces over a sample:
// repeated inner chains of (position, guess, side) draws, region filtering,
// and re-whitening; a chain whose leaderboard fills is turned into the best
// h_{b1,b2,b3} and accepted when the recounted accuracy reaches 1/2 +
// gamma_desk.
WeakKReport weak_learn_anyk(const LabeledSample& s, int k, const LearnerParams& params);

// --------------------------------------------------------------------------
// Instrumented planted-luck executor (analysis only; requires the target).
// Each step is constructed to satisfy the good-step rules: position and
// target index by the smallest-(j,a) / next-empty-slot rule, guess drawn
// conditioned on being alpha-lucky for the chosen target, side by the
// high-margin majority. Records everything needed to audit the leaderboard
// and filter diagnostics.
// --------------------------------------------------------------------------

struct PlantedStepRecord {
  int t = 0;
  int r = 0;                    // slot fixed this step (1-based)
  int side = +1;
  int ind = 0;                  // target index the guess aims at (1-based)
  bool lucky = false;           // realized w.g >= alpha
  bool side_majority = false;   // side matches the high-margin majority rule
  bool good = false;            // all good-step conditions realized
  std::vector<int> u_after;
  std::vector<int> qual;        // end-of-step slot qualities (0 for empty)
  std::vector<double> imp;      // end-of-step impurities per slot (0 if empty)
  std::vector<double> mimp;
  bool fine1 = false, fine2 = false, fine3 = false;
  int size_before = 0;
  int size_after = 0;
};

struct PlantedRunTrace {
  bool completed = false;        // leaderboard filled within the step budget
  bool aborted = false;          // empty filter / non-convergence / dead weight
  std::vector<PlantedStepRecord> steps;
};

struct FineFilterParams {
  double c_mimp = 3.0;  // O-constant in the impurity-growth condition
  double c_size = 3.0;  // O-constant in the survivor-size condition
};

PlantedRunTrace run_planted_chain(const LabeledSample& s, const TargetFunction& f,
                                  const LearnerParams& params,
                                  const FineFilterParams& fine = FineFilterParams{});

// Update/reset audit of a u-vector history (one entry per step, post-update):
// u_1 changes at most ceil(L)+1 times overall; between consecutive changes of
// u_j, u_{j+i} changes at most ceil(L^i)+1 times.
bool update_counts_within_bounds(const std::vector<std::vector<int>>& u_history, int k,
                                 double big_l);

}  // namespace hslab

#endif  // HSLAB_WEAKK_HPP

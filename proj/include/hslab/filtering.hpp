#ifndef HSLAB_FILTERING_HPP
#define HSLAB_FILTERING_HPP

#include <vector>

#include "hslab/core.hpp"
#include "hslab/linalg.hpp"
#include "hslab/rng.hpp"

namespace hslab {

// Closed two-sided region family: side=+ keeps {x : g.x >= beta}, side=- keeps
// {x : g.x <= -beta}.
struct Region {
  Vec guess;
  double beta = 0.0;
  int side = +1;
};

bool region_contains(const Region& r, const Vec& x);

LabeledSample region_filter(const LabeledSample& s, const Region& r);

// Indices of s.points inside r, in order.
std::vector<int> region_member_indices(const std::vector<Vec>& points, const Region& r);

// Pr[N(0,1) >= t].
double gaussian_upper_tail(double t);

// Inverse standard normal CDF (Wichura's rational approximations), accurate to
// ~1e-15 over (0,1).
double inv_std_normal_cdf(double p);

// Draw Z ~ N(0,1) conditioned on Z >= a. Inverse-CDF in the stable tail
// parameterization for a <= 8; exponential-proposal rejection beyond, where
// the CDF underflows.
double truncated_std_normal_tail(double a, RngStream& rng);

// g ~ N(0, I/n) conditioned on w.g >= alpha: the component along w is a
// truncated normal, the orthogonal part is unconditioned.
Vec sample_lucky_guess(const Vec& w, double alpha, int n, RngStream& rng);

// Same conditioning with the dimension taken from w and the per-coordinate
// variance kept at 1/variance_n (used inside restricted frames whose variance
// is still governed by the ambient dimension).
Vec sample_lucky_guess_scaled(const Vec& w, double alpha, int variance_n, RngStream& rng);

// t_gamma(z) = (beta - gamma*z1)/sqrt(1-z1^2) * sqrt(n).
double predicted_tail_param(double gamma, double beta, double z1, int n);

// 95% Wilson score interval for hits successes out of trials.
struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};
WilsonInterval wilson_interval(long long hits, long long trials);

struct AdvantageEstimate {
  double ratio = 0.0;
  long long numerator_hits = 0;
  long long denominator_hits = 0;
  long long trials = 0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool degenerate = false;  // denominator never hit; ratio clamped
};

// Monte Carlo estimate of Pr[x in R+^beta(g)] / Pr[x_ref in R+^beta(g)] over
// lucky guesses g (conditioned on w.g >= alpha), with paired draws and Wilson
// intervals on the ratio.
AdvantageEstimate estimate_advantage(const Vec& x, const Vec& x_ref, const Vec& w,
                                     double alpha, double beta, long long trials,
                                     RngStream& rng);

}  // namespace hslab

#endif  // HSLAB_FILTERING_HPP

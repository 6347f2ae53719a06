#ifndef HSLAB_WEAK2_HPP
#define HSLAB_WEAK2_HPP

#include <cstdint>
#include <string>

#include "hslab/core.hpp"
#include "hslab/forster.hpp"

namespace hslab {

struct Weak2Report {
  bool success = false;          // false means FAIL (a value, not an error)
  Hypothesis hypothesis;
  int iterations_used = 0;       // guesses consumed (1-based on success)
  std::string branch;            // "minus" or "plus" on success
  double sample_advantage = 0.0; // recounted accuracy minus 1/2
  std::uint64_t seed = 0;
};

// Region-side classifier: x outside V -> b1; x in V but outside the minus
// region -> b2; inside -> -1.
Hypothesis assemble_h_minus(const ForsterOutput& f, const Vec& g_coords, double beta,
                            int b1, int b2);

// Same shell with the inside branch replaced by sign(w_inner . Ax/|Ax|);
// w_inner_coords is expressed in V-coordinates.
Hypothesis assemble_h_plus(const ForsterOutput& f, const Vec& g_coords, double beta,
                           const Vec& w_inner_coords, int b1, int b2);

// Weak learner for intersections of two origin-centered halfspaces over a
// sample: one whitening pass, then random-guess region filtering, testing the
// constant-inside rule on the minus side and an LP-found halfspace on the
// plus side, over all four outside-value choices. Accepts the first candidate
// whose recounted sample accuracy reaches 1/2 + gamma_desk.
Weak2Report weak_learn_and2(const LabeledSample& s, const LearnerParams& params);

// Effective minimum region fraction: explicit knob if set, otherwise
// max(2^{-sqrt(n)}, 10/kept), always clipped to at least 10/kept.
double effective_size_floor(const LearnerParams& params, int n, int kept);

}  // namespace hslab

#endif  // HSLAB_WEAK2_HPP

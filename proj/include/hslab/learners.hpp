#ifndef HSLAB_LEARNERS_HPP
#define HSLAB_LEARNERS_HPP

#include <optional>

#include "hslab/core.hpp"
#include "hslab/linalg.hpp"

namespace hslab {

struct ConsistencyResult {
  enum class Outcome { kFound, kInfeasible, kBudgetExhausted };
  Outcome outcome = Outcome::kBudgetExhausted;
  Vec weight;            // meaningful only when outcome == kFound
  long long updates = 0;
};

// Perceptron-style search for an origin-centered w with sign(w . x_i) = y_i
// for every pair (sign(0) = +1 semantics). A clean verification pass is the
// exit condition, so a returned weight is consistent by construction.
// Contradictory exact-duplicate points short-circuit to Infeasible.
ConsistencyResult find_consistent_halfspace(const LabeledSample& pairs, long long budget);

// Exhaustive search for a function of at most k halfspaces consistent with
// every point: candidate normals through subsets of up to n-1 points (both
// orientations, tie sides resolved by tilting), crossed with all truth tables.
// Guards: n <= 4, k <= 2, |S| <= 60 (combinatorial cost).
std::optional<TargetFunction> brute_force_learn(const LabeledSample& s, int k);

// +1 on ties.
int majority_label(const LabeledSample& s);
int majority_of(const std::vector<int>& labels);

}  // namespace hslab

#endif  // HSLAB_LEARNERS_HPP

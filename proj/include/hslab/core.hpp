#ifndef HSLAB_CORE_HPP
#define HSLAB_CORE_HPP

#include <cstdint>
#include <vector>

#include "hslab/linalg.hpp"
#include "hslab/rng.hpp"

namespace hslab {

// Sign convention used everywhere, including on boundaries: sign(0) = +1.
inline int sign(double t) { return t >= 0.0 ? +1 : -1; }

struct LabeledSample {
  int n = 0;                    // ambient dimension
  std::vector<Vec> points;
  std::vector<int> labels;      // entries in {-1, +1}

  int size() const { return static_cast<int>(points.size()); }
};

// Origin-centered unless theta != 0; `w` is kept unit-norm.
struct Halfspace {
  Vec w;
  double theta = 0.0;
};

// f(x) = table[idx] where bit i-1 of idx is set iff sign(w_i . x) = +1.
struct TargetFunction {
  int n = 0;
  int k = 0;
  std::vector<Vec> weights;   // k unit vectors
  std::vector<int> table;     // 2^k entries in {-1, +1}
};

// Table index for a vector of per-halfspace signs.
int table_index(const std::vector<int>& signs);

int evaluate_target(const TargetFunction& f, const Vec& x);

// Piecewise classifier produced by the region learners.
//
// Chain semantics: points outside V (relative residual > subspace_tol) get
// outside_subspace_value; points whose transformed image exits any stage's
// region get outside_region_value; survivors get the inner rule (a constant,
// or a halfspace over the final stage's transformed coordinates).
struct Stage {
  Mat transform;   // ambient, invertible; maps a raw point to this stage's frame
  Vec guess;
  double beta = 0.0;
  int side = +1;   // +1: g.x >= beta, -1: g.x <= -beta (both closed)
};

struct Hypothesis {
  enum class Kind { kConstant, kChain };
  enum class Inner { kConstant, kHalfspace };

  Kind kind = Kind::kConstant;
  int constant_value = +1;

  Mat basis;                       // orthonormal rows spanning V
  std::vector<Stage> stages;
  int outside_subspace_value = -1;
  int outside_region_value = -1;
  Inner inner = Inner::kConstant;
  int inner_value = -1;
  Vec inner_weight;                // transformed coordinates (final stage frame)
  double subspace_tol = 1e-8;

  static Hypothesis constant(int value) {
    Hypothesis h;
    h.kind = Kind::kConstant;
    h.constant_value = value;
    return h;
  }
};

// Total on nonzero inputs; throws std::runtime_error if a stage transform
// sends x to zero (degenerate transform).
int evaluate_hypothesis(const Hypothesis& h, const Vec& x);

// Which branch of a chain hypothesis x lands in: 0 = outside the subspace,
// 1 = exits some stage's region, 2 = survives to the inner rule. The b-value
// enumeration in the learners buckets points by this exact classification.
int hypothesis_branch(const Hypothesis& h, const Vec& x);

double accuracy(const Hypothesis& h, const LabeledSample& s);

// (x, h) -> one dimension up: x' = (x, 1), w' = (w, -theta) renormalized.
Vec homogenize_point(const Vec& x);
Halfspace homogenize_halfspace(const Halfspace& h);

// Moves any point sitting exactly on a target boundary by at most 1e-9
// (before renormalization), recomputes every label from f, and leaves
// boundary-free points bit-identical. Output points are unit-norm iff the
// inputs were (offenders are renormalized after the nudge).
LabeledSample perturb_labelsafe(const LabeledSample& s, const TargetFunction& f,
                                std::uint64_t seed);

// Shared knobs for the sample-based learners; the explicit homes for the
// hidden constants in the guarantees.
struct LearnerParams {
  int guess_budget = 20000;
  int inner_steps = 0;            // <= 0: auto ceil(L^k)
  double gamma_desk = 0.01;       // required sample advantage
  long long lp_budget = 200000;   // perceptron update budget
  std::uint64_t seed = 0;
  double log_base_floor = 2.0;    // L = max(ln n, log_base_floor)
  double size_floor = -1.0;       // <0: auto max(2^{-sqrt(n)}, 10/|S'|)
};

LearnerParams default_weak2_params();
LearnerParams default_weakk_params();

// max(ln n, floor).
double log_floor(int n, double floor_value);

}  // namespace hslab

#endif  // HSLAB_CORE_HPP

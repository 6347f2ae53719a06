#include "hslab/weakk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "hslab/filtering.hpp"
#include "hslab/numerics.hpp"

namespace hslab {

BetaSchedule beta_schedule(int n, int k, const LearnerParams& params) {
  if (n < 1) throw std::invalid_argument("beta_schedule: n must be positive");
  if (k < 1) throw std::invalid_argument("beta_schedule: k must be positive");
  BetaSchedule sch;
  sch.n = n;
  sch.k = k;
  sch.big_l = log_floor(n, params.log_base_floor);
  const double n4 = std::pow(static_cast<double>(n), 0.25);
  double cap = 0.9;
  for (int i = 1; i <= k; ++i) {
    double raw = std::pow(sch.big_l, 5.0 * (k - i + 1)) / n4;
    double b = std::min(raw, cap);
    sch.betas.push_back(b);
    sch.alphas.push_back(10.0 * b);
    cap *= 0.95;
  }
  return sch;
}

std::vector<int> leaderboard_update(const std::vector<int>& u, int r, int t) {
  const int k = static_cast<int>(u.size());
  if (r < 1 || r > k) throw std::invalid_argument("leaderboard_update: position out of range");
  std::vector<int> out = u;
  out[r - 1] = t;
  for (int i = r; i < k; ++i) out[i] = 0;
  return out;
}

bool leaderboard_shape_ok(const std::vector<int>& u) {
  bool seen_zero = false;
  int prev = 0;
  for (int v : u) {
    if (v == 0) {
      seen_zero = true;
    } else {
      if (seen_zero || v <= prev) return false;
      prev = v;
    }
  }
  return true;
}

int diag_quality(const std::vector<Vec>& points, const Vec& w, int j,
                 const BetaSchedule& schedule) {
  if (points.empty()) throw std::invalid_argument("diag_quality: empty set");
  if (j < 1 || j > schedule.k) throw std::invalid_argument("diag_quality: bad slot index");
  const double big_l = schedule.big_l;
  const double n = static_cast<double>(schedule.n);
  const double beta = schedule.betas[j - 1];
  int q = -1;
  for (int cand = 0; cand <= 64; ++cand) {
    double tau = std::pow(big_l, cand) / (2.0 * std::sqrt(n));
    double p = (1.0 / (4.0 * n)) * std::exp(-n * beta * beta * tau / big_l);
    if (margin_fraction(points, w, tau) >= p)
      q = cand;
    else
      break;
  }
  return q;
}

double diag_impurity(const std::vector<Vec>& original_points, const Vec& w_original,
                     int side) {
  if (original_points.empty()) throw std::invalid_argument("diag_impurity: empty set");
  int wrong = 0;
  for (const Vec& x : original_points)
    if (sign(dot(w_original, x)) != side) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(original_points.size());
}

double diag_mimp(double imp, int j, int qual, const BetaSchedule& schedule) {
  if (j < 1 || j > schedule.k) throw std::invalid_argument("diag_mimp: bad slot index");
  const double beta = schedule.betas[j - 1];
  const double floor_term = std::exp(-std::sqrt(static_cast<double>(schedule.n)) * beta *
                                     beta * std::pow(schedule.big_l, qual - 1) / 3.0);
  return std::max(imp, floor_term);
}

Hypothesis assemble_h_b1b2b3(const Mat& basis, const std::vector<Stage>& stages, int b1,
                             int b2, int b3) {
  Hypothesis h;
  h.kind = Hypothesis::Kind::kChain;
  h.basis = basis;
  h.stages = stages;
  h.outside_subspace_value = b1;
  h.outside_region_value = b2;
  h.inner = Hypothesis::Inner::kConstant;
  h.inner_value = b3;
  return h;
}

namespace {

struct ChainState {
  std::vector<Vec> points;    // current ambient representations, unit
  std::vector<int> labels;
  std::vector<int> orig;      // indices into the normalized input sample
  Mat basis_first;            // V_1 (the chain hypothesis's subspace test)
  Mat cur_basis;              // current frame basis, rows span V_t
  Mat next_transform;         // ambient map to pair with the next guess
  std::vector<Stage> stages;  // completed (guess-paired) stages
  std::vector<int> u;
  std::vector<Vec> weights;   // transformed target weights (planted runs)
};

ChainState init_chain(const ForsterOutput& fo, int k, const std::vector<Vec>* targets) {
  ChainState st;
  st.basis_first = fo.basis;
  st.cur_basis = fo.basis;
  st.next_transform = fo.ambient_transform();
  st.u.assign(k, 0);
  st.labels = fo.labels;
  st.orig = fo.kept_indices;
  st.points.reserve(fo.transformed.size());
  for (const Vec& z : fo.transformed) st.points.push_back(matvec_t(fo.basis, z));
  if (targets)
    for (const Vec& w : *targets) st.weights.push_back(transform_halfspace(w, fo));
  return st;
}

// One inner step after (r, side, g) are chosen: record the stage, filter the
// survivors, re-whiten, and advance the frame. False = abandon this chain
// (empty region, whitening non-convergence, or a target weight dying in the
// new subspace).
bool advance_chain(ChainState& st, int r, int side, const Vec& g_coords, int t,
                   int n_ambient, double beta) {
  Stage stage;
  stage.transform = st.next_transform;
  stage.guess = matvec_t(st.cur_basis, g_coords);
  stage.beta = beta;
  stage.side = side;
  st.u = leaderboard_update(st.u, r, t);

  LabeledSample filtered;
  filtered.n = n_ambient;
  std::vector<int> filtered_orig;
  for (std::size_t i = 0; i < st.points.size(); ++i) {
    double v = dot(stage.guess, st.points[i]);
    bool inside = side == +1 ? (v >= beta) : (v <= -beta);
    if (inside) {
      filtered.points.push_back(st.points[i]);
      filtered.labels.push_back(st.labels[i]);
      filtered_orig.push_back(st.orig[i]);
    }
  }
  st.stages.push_back(std::move(stage));
  if (filtered.size() == 0) return false;

  ForsterOutput fo;
  try {
    fo = forsterize(filtered);
  } catch (const NonConvergence&) {
    return false;
  }
  std::vector<Vec> new_weights;
  if (!st.weights.empty()) {
    try {
      for (const Vec& w : st.weights) new_weights.push_back(transform_halfspace(w, fo));
    } catch (const DegenerateProjection&) {
      return false;
    }
  }
  st.cur_basis = fo.basis;
  st.next_transform = fo.ambient_transform();
  st.labels = fo.labels;
  st.orig.clear();
  for (int idx : fo.kept_indices) st.orig.push_back(filtered_orig[idx]);
  st.points.clear();
  for (const Vec& z : fo.transformed) st.points.push_back(matvec_t(fo.basis, z));
  st.weights = std::move(new_weights);
  return true;
}

bool all_fixed(const std::vector<int>& u) {
  return std::all_of(u.begin(), u.end(), [](int v) { return v != 0; });
}

int default_inner_steps(const LearnerParams& params, double big_l, int k) {
  if (params.inner_steps > 0) return params.inner_steps;
  return static_cast<int>(std::ceil(std::pow(big_l, k)));
}

}  // namespace

WeakKReport weak_learn_anyk(const LabeledSample& s, int k, const LearnerParams& params) {
  if (s.size() < 2) throw std::invalid_argument("weak_learn_anyk: need at least 2 points");
  if (k < 1) throw std::invalid_argument("weak_learn_anyk: k must be positive");
  WeakKReport report;
  report.seed = params.seed;

  LabeledSample sn;
  sn.n = s.n;
  sn.labels = s.labels;
  sn.points.reserve(s.points.size());
  for (const Vec& x : s.points) sn.points.push_back(normalized(x));

  const BetaSchedule sch = beta_schedule(s.n, k, params);
  const int inner_steps = default_inner_steps(params, sch.big_l, k);
  const double threshold = 0.5 + params.gamma_desk;
  const ForsterOutput first = forsterize(sn);  // shared by every outer iteration
  const int m = sn.size();

  const RngStream root = RngStream::from_seed(params.seed);
  for (int it = 0; it < params.guess_budget; ++it) {
    RngStream rng = root.derive(static_cast<std::uint64_t>(it));
    ChainState st = init_chain(first, k, nullptr);
    for (int t = 1; t <= inner_steps; ++t) {
      if (all_fixed(st.u)) {
        ++report.completed_chains;
        // Bucket every point by branch once; the eight b-choices are then
        // pure arithmetic. The chosen candidate is recounted for real.
        Hypothesis shell = assemble_h_b1b2b3(st.basis_first, st.stages, -1, -1, -1);
        int cnt[3][2] = {{0, 0}, {0, 0}, {0, 0}};
        for (int i = 0; i < m; ++i)
          cnt[hypothesis_branch(shell, sn.points[i])][sn.labels[i] == +1 ? 1 : 0]++;
        int best_hits = -1, best_combo = 0;
        for (int combo = 0; combo < 8; ++combo) {
          int hits = 0;
          for (int br = 0; br < 3; ++br)
            hits += ((combo >> br) & 1) ? cnt[br][1] : cnt[br][0];
          if (hits > best_hits) {
            best_hits = hits;
            best_combo = combo;
          }
        }
        if (static_cast<double>(best_hits) / m >= threshold) {
          Hypothesis h = assemble_h_b1b2b3(st.basis_first, st.stages,
                                           (best_combo & 1) ? +1 : -1,
                                           (best_combo & 2) ? +1 : -1,
                                           (best_combo & 4) ? +1 : -1);
          double acc = accuracy(h, sn);
          if (acc >= threshold) {
            report.success = true;
            report.hypothesis = std::move(h);
            report.iterations_used = it + 1;
            report.sample_advantage = acc - 0.5;
            return report;
          }
        }
        break;  // no agreeing hypothesis: restart the outer loop
      }
      int r = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(k)));
      Vec g = gaussian_vector(st.cur_basis.rows, 1.0 / s.n, rng);
      int side = rng.next_sign();
      if (!advance_chain(st, r, side, g, t, s.n, sch.betas[r - 1])) {
        ++report.aborted_chains;
        break;
      }
    }
  }
  report.iterations_used = params.guess_budget;
  return report;
}

PlantedRunTrace run_planted_chain(const LabeledSample& s, const TargetFunction& f,
                                  const LearnerParams& params,
                                  const FineFilterParams& fine) {
  if (s.n != f.n) throw std::invalid_argument("run_planted_chain: dimension mismatch");
  const int k = f.k;
  PlantedRunTrace trace;

  LabeledSample sn;
  sn.n = s.n;
  sn.labels = s.labels;
  sn.points.reserve(s.points.size());
  for (const Vec& x : s.points) sn.points.push_back(normalized(x));

  const BetaSchedule sch = beta_schedule(s.n, k, params);
  const int inner_steps = default_inner_steps(params, sch.big_l, k);
  const double sqrt_n = std::sqrt(static_cast<double>(s.n));
  RngStream rng = RngStream::from_seed(params.seed);

  ChainState st;
  try {
    const ForsterOutput first = forsterize(sn);
    st = init_chain(first, k, &f.weights);
  } catch (const NonConvergence&) {
    trace.aborted = true;
    return trace;
  } catch (const DegenerateProjection&) {
    trace.aborted = true;
    return trace;
  }

  // Per-slot fix cache: quality of EVERY target against the fixing snapshot
  // (set + transformed weights at the start of the fixing step) never changes
  // until the slot is refixed, so it is computed once here.
  struct SlotFix {
    int time = 0;
    int ind = 0;   // 1-based target index
    int side = +1;
    std::vector<int> quals;  // per target, with this slot's beta
  };
  std::vector<SlotFix> slots(k);
  std::vector<double> prev_mimp(k, 0.0);

  for (int t = 1; t <= inner_steps; ++t) {
    if (all_fixed(st.u)) {
      trace.completed = true;
      break;
    }
    // ---- choose (r, a) by the good-step rule ----
    int nnz = 0;
    for (int v : st.u)
      if (v != 0) ++nnz;
    std::vector<char> is_fixed(k + 1, 0);
    for (int j = 0; j < nnz; ++j) is_fixed[slots[j].ind] = 1;
    int r = -1, a = -1;
    for (int j = 1; j <= nnz && r < 0; ++j) {
      int incumbent = slots[j - 1].quals[slots[j - 1].ind - 1];
      for (int cand = 1; cand <= k; ++cand) {
        if (is_fixed[cand]) continue;
        if (slots[j - 1].quals[cand - 1] > incumbent) {
          r = j;
          a = cand;
          break;
        }
      }
    }
    if (r < 0) {
      r = nnz + 1;
      for (int cand = 1; cand <= k; ++cand)
        if (!is_fixed[cand]) {
          a = cand;
          break;
        }
    }

    // ---- lucky guess for target a in the current frame ----
    const Vec& w_cur = st.weights[a - 1];
    Vec w_coords = normalized(matvec(st.cur_basis, w_cur));
    const double alpha = sch.alphas[r - 1];
    Vec g = sample_lucky_guess_scaled(w_coords, alpha, s.n, rng);
    bool lucky = dot(w_coords, g) >= alpha;

    // ---- side: majority among high-margin points at tau = L^r/(2 sqrt n) ----
    const double tau = std::pow(sch.big_l, r) / (2.0 * sqrt_n);
    int pos = 0, neg = 0;
    for (const Vec& z : st.points) {
      double v = dot(w_cur, z);
      if (v >= tau) ++pos;
      if (v <= -tau) ++neg;
    }
    int side = pos >= neg ? +1 : -1;

    PlantedStepRecord rec;
    rec.t = t;
    rec.r = r;
    rec.side = side;
    rec.ind = a;
    rec.lucky = lucky;
    rec.side_majority = true;  // by construction of side above
    rec.good = lucky;
    rec.size_before = static_cast<int>(st.points.size());

    // Snapshot qualities for the slot being fixed (set and weights at the
    // START of this step, slot-r beta).
    SlotFix fix;
    fix.time = t;
    fix.ind = a;
    fix.side = side;
    fix.quals.resize(k);
    for (int cand = 1; cand <= k; ++cand)
      fix.quals[cand - 1] = diag_quality(st.points, st.weights[cand - 1], r, sch);

    bool ok = advance_chain(st, r, side, g, t, s.n, sch.betas[r - 1]);
    if (!ok) {
      rec.u_after = st.u;  // u was updated before the filter
      trace.steps.push_back(std::move(rec));
      trace.aborted = true;
      return trace;
    }
    slots[r - 1] = std::move(fix);

    // ---- end-of-step diagnostics over the new survivor set ----
    rec.size_after = static_cast<int>(st.points.size());
    rec.u_after = st.u;
    int nnz_after = 0;
    for (int v : st.u)
      if (v != 0) ++nnz_after;
    std::vector<Vec> survivors_orig;
    survivors_orig.reserve(st.orig.size());
    for (int idx : st.orig) survivors_orig.push_back(sn.points[idx]);
    rec.qual.assign(k, 0);
    rec.imp.assign(k, 0.0);
    rec.mimp.assign(k, 0.0);
    for (int j = 1; j <= nnz_after; ++j) {
      const SlotFix& sf = slots[j - 1];
      rec.qual[j - 1] = sf.quals[sf.ind - 1];
      rec.imp[j - 1] = diag_impurity(survivors_orig, f.weights[sf.ind - 1], sf.side);
      rec.mimp[j - 1] = diag_mimp(rec.imp[j - 1], j, rec.qual[j - 1], sch);
    }
    const double beta_r = sch.betas[r - 1];
    rec.fine1 = rec.imp[r - 1] <=
                std::exp(-sqrt_n * beta_r * beta_r *
                         std::pow(sch.big_l, rec.qual[r - 1] - 1) / 3.0);
    rec.fine2 = true;
    for (int j = 1; j < r; ++j) {
      double growth = std::exp(fine.c_mimp * sqrt_n * beta_r * beta_r *
                               std::pow(sch.big_l, rec.qual[j - 1] + 1));
      if (rec.mimp[j - 1] > prev_mimp[j - 1] * growth) rec.fine2 = false;
    }
    rec.fine3 = rec.size_after >= std::exp(-fine.c_size * s.n * beta_r * beta_r) *
                                      rec.size_before;
    prev_mimp = rec.mimp;
    trace.steps.push_back(std::move(rec));
  }
  if (all_fixed(st.u)) trace.completed = true;
  return trace;
}

bool update_counts_within_bounds(const std::vector<std::vector<int>>& u_history, int k,
                                 double big_l) {
  if (k < 1) throw std::invalid_argument("update_counts_within_bounds: bad k");
  const std::size_t steps = u_history.size();
  // change[j][t]: u_{j+1} was updated (new nonzero value) or reset at step t.
  std::vector<std::vector<char>> change(k, std::vector<char>(steps, 0));
  std::vector<int> prev(k, 0);
  for (std::size_t t = 0; t < steps; ++t) {
    const std::vector<int>& u = u_history[t];
    if (static_cast<int>(u.size()) != k)
      throw std::invalid_argument("update_counts_within_bounds: ragged history");
    for (int j = 0; j < k; ++j) {
      bool updated = u[j] != 0 && u[j] != prev[j];
      bool reset = prev[j] != 0 && u[j] == 0;
      change[j][t] = (updated || reset) ? 1 : 0;
      prev[j] = u[j];
    }
  }
  long long total_u1 = 0;
  for (std::size_t t = 0; t < steps; ++t) total_u1 += change[0][t];
  if (total_u1 > static_cast<long long>(std::ceil(big_l)) + 1) return false;
  for (int j = 1; j <= k - 1; ++j) {
    for (int i = 1; j + i <= k; ++i) {
      const long long bound =
          static_cast<long long>(std::ceil(std::pow(big_l, i))) + 1;
      long long count = 0;
      for (std::size_t t = 0; t < steps; ++t) {
        if (change[j - 1][t]) {
          count = 0;  // a u_j change ends every admissible interval
        } else if (change[j + i - 1][t]) {
          if (++count > bound) return false;
        }
      }
    }
  }
  return true;
}

}  // namespace hslab

#include "hslab/core.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "hslab/numerics.hpp"

namespace hslab {

int table_index(const std::vector<int>& signs) {
  if (signs.size() > 30) throw std::invalid_argument("table_index: too many halfspaces");
  int idx = 0;
  for (std::size_t i = 0; i < signs.size(); ++i) {
    if (signs[i] == +1) idx |= (1 << i);
  }
  return idx;
}

int evaluate_target(const TargetFunction& f, const Vec& x) {
  if (static_cast<int>(x.size()) != f.n)
    throw std::invalid_argument("evaluate_target: dimension mismatch");
  if (f.k <= 0 || static_cast<int>(f.weights.size()) != f.k)
    throw std::invalid_argument("evaluate_target: malformed target");
  if (f.table.size() != (std::size_t{1} << f.k))
    throw std::invalid_argument("evaluate_target: table size mismatch");
  std::vector<int> signs(f.k);
  for (int i = 0; i < f.k; ++i) signs[i] = sign(dot(f.weights[i], x));
  return f.table[table_index(signs)];
}

int hypothesis_branch(const Hypothesis& h, const Vec& x) {
  if (h.kind != Hypothesis::Kind::kChain)
    throw std::invalid_argument("hypothesis_branch: not a chain hypothesis");
  if (h.basis.rows > 0) {
    if (subspace_residual(h.basis, x) > h.subspace_tol) return 0;
  }
  Vec cur = x;
  for (const Stage& st : h.stages) {
    Vec y = matvec(st.transform, cur);
    double nrm = norm(y);
    if (nrm == 0.0) throw std::runtime_error("evaluate_hypothesis: stage transform sent point to zero");
    Vec z = scaled(y, 1.0 / nrm);
    double g = dot(st.guess, z);
    bool inside = (st.side == +1) ? (g >= st.beta) : (g <= -st.beta);
    if (!inside) return 1;
    cur = z;
  }
  return 2;
}

namespace {

// Final transformed direction for a chain survivor (branch 2).
Vec chain_image(const Hypothesis& h, const Vec& x) {
  Vec cur = x;
  for (const Stage& st : h.stages) cur = normalized(matvec(st.transform, cur));
  return cur;
}

}  // namespace

int evaluate_hypothesis(const Hypothesis& h, const Vec& x) {
  if (h.kind == Hypothesis::Kind::kConstant) return h.constant_value;
  switch (hypothesis_branch(h, x)) {
    case 0: return h.outside_subspace_value;
    case 1: return h.outside_region_value;
    default: break;
  }
  if (h.inner == Hypothesis::Inner::kConstant) return h.inner_value;
  return sign(dot(h.inner_weight, chain_image(h, x)));
}

double accuracy(const Hypothesis& h, const LabeledSample& s) {
  if (s.size() == 0) throw std::invalid_argument("accuracy: empty sample");
  int hits = 0;
  for (int i = 0; i < s.size(); ++i) {
    if (evaluate_hypothesis(h, s.points[i]) == s.labels[i]) ++hits;
  }
  return static_cast<double>(hits) / s.size();
}

Vec homogenize_point(const Vec& x) {
  Vec out = x;
  out.push_back(1.0);
  return out;
}

Halfspace homogenize_halfspace(const Halfspace& h) {
  Halfspace out;
  out.w = h.w;
  out.w.push_back(-h.theta);
  out.w = normalized(out.w);
  out.theta = 0.0;
  return out;
}

LabeledSample perturb_labelsafe(const LabeledSample& s, const TargetFunction& f,
                                std::uint64_t seed) {
  if (s.n != f.n) throw std::invalid_argument("perturb_labelsafe: dimension mismatch");
  RngStream rng = RngStream::from_seed(seed);
  LabeledSample out;
  out.n = s.n;
  out.points.reserve(s.points.size());
  out.labels.reserve(s.points.size());
  for (int i = 0; i < s.size(); ++i) {
    const Vec& x = s.points[i];
    bool on_boundary = false;
    for (const Vec& w : f.weights) {
      if (dot(w, x) == 0.0) { on_boundary = true; break; }
    }
    Vec y = x;
    if (on_boundary) {
      double keep = norm(x);
      for (int attempt = 0; attempt < 64; ++attempt) {
        y = x;
        Vec d = gaussian_vector(s.n, 1.0, rng);
        double dn = norm(d);
        if (dn == 0.0) continue;
        y = axpy(y, 1e-9 / dn, d);
        // Preserve the original scale so unit-norm samples stay unit-norm.
        double yn = norm(y);
        if (yn > 0.0 && keep > 0.0) y = scaled(y, keep / yn);
        bool clear = true;
        for (const Vec& w : f.weights) {
          if (dot(w, y) == 0.0) { clear = false; break; }
        }
        if (clear) break;
      }
    }
    out.points.push_back(std::move(y));
    out.labels.push_back(evaluate_target(f, out.points.back()));
  }
  return out;
}

LearnerParams default_weak2_params() {
  LearnerParams p;
  p.gamma_desk = 0.01;
  return p;
}

LearnerParams default_weakk_params() {
  LearnerParams p;
  p.gamma_desk = 0.005;
  return p;
}

double log_floor(int n, double floor_value) {
  if (n < 1) throw std::invalid_argument("log_floor: n must be positive");
  return std::max(std::log(static_cast<double>(n)), floor_value);
}

}  // namespace hslab

#include "hslab/learners.hpp"

#include <cstdint>
#include <stdexcept>
#include <unordered_set>

#include "hslab/numerics.hpp"

namespace hslab {

namespace {

bool consistent_at(const Vec& w, const Vec& x, int y) { return sign(dot(w, x)) == y; }

}  // namespace

ConsistencyResult find_consistent_halfspace(const LabeledSample& pairs, long long budget) {
  const int m = pairs.size();
  if (m == 0) throw std::invalid_argument("find_consistent_halfspace: empty input");
  for (int i = 0; i < m; ++i) {
    if (norm(pairs.points[i]) == 0.0)
      throw std::invalid_argument("find_consistent_halfspace: zero point");
  }
  ConsistencyResult res;
  // Identical points with both labels can never be separated (sign is a
  // function of the point); detect them up front.
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      if (pairs.labels[i] != pairs.labels[j] && pairs.points[i] == pairs.points[j]) {
        res.outcome = ConsistencyResult::Outcome::kInfeasible;
        return res;
      }
    }
  }
  Vec w(pairs.n, 0.0);
  for (;;) {
    bool clean = true;
    for (int i = 0; i < m; ++i) {
      if (!consistent_at(w, pairs.points[i], pairs.labels[i])) {
        clean = false;
        w = axpy(w, static_cast<double>(pairs.labels[i]), pairs.points[i]);
        if (++res.updates >= budget) {
          // One last chance: the final update may have fixed everything.
          bool ok = true;
          for (int j = 0; j < m; ++j)
            if (!consistent_at(w, pairs.points[j], pairs.labels[j])) { ok = false; break; }
          if (ok) {
            res.outcome = ConsistencyResult::Outcome::kFound;
            res.weight = std::move(w);
          }
          return res;
        }
      }
    }
    if (clean) {
      res.outcome = ConsistencyResult::Outcome::kFound;
      res.weight = std::move(w);
      return res;
    }
  }
}

namespace {

struct Candidate {
  Vec w;
  std::uint64_t mask;  // bit i set iff sign(w . x_i) = +1
};

std::uint64_t sign_mask(const Vec& w, const std::vector<Vec>& pts) {
  std::uint64_t m = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (sign(dot(w, pts[i])) == +1) m |= (std::uint64_t{1} << i);
  return m;
}

// Append w (normalized) unless its sign pattern over S was already seen.
void add_candidate(const Vec& w, const std::vector<Vec>& pts,
                   std::vector<Candidate>& out, std::unordered_set<std::uint64_t>& seen) {
  double nw = norm(w);
  if (nw == 0.0) return;
  Vec u = scaled(w, 1.0 / nw);
  std::uint64_t m = sign_mask(u, pts);
  if (seen.insert(m).second) out.push_back({std::move(u), m});
}

// All candidate normals: for every subset of < n points, a normal orthogonal
// to its span (both orientations), plus tilted variants realizing each sign
// pattern on the subset's own points. Exhaustive over halfspace dichotomies
// for points in general position.
std::vector<Candidate> candidate_normals(const LabeledSample& s) {
  const int n = s.n;
  const int m = s.size();
  std::vector<Candidate> cands;
  std::unordered_set<std::uint64_t> seen;

  std::vector<int> subset;
  auto handle_subset = [&]() {
    Mat q(0, n);
    if (!subset.empty()) {
      std::vector<Vec> pts;
      for (int idx : subset) pts.push_back(s.points[idx]);
      q = span_basis(pts);
      if (q.rows >= n) return;  // spans everything; no normal direction left
    }
    // First coordinate axis with a nonzero component off span(subset).
    Vec w0;
    for (int axis = 0; axis < n; ++axis) {
      Vec e(n, 0.0);
      e[axis] = 1.0;
      if (q.rows > 0) {
        Vec c = matvec(q, e);
        Vec back = matvec_t(q, c);
        e = axpy(e, -1.0, back);
      }
      if (norm(e) > 1e-9) {
        w0 = normalized(e);
        break;
      }
    }
    if (w0.empty()) return;
    add_candidate(w0, s.points, cands, seen);
    add_candidate(scaled(w0, -1.0), s.points, cands, seen);
    if (subset.empty()) return;

    // Resolve each sign pattern on the subset points by a small tilt into
    // their span; strict signs elsewhere stay put because the tilt is tiny.
    double strict = 0.0;
    bool have_strict = false;
    for (int i = 0; i < m; ++i) {
      double v = std::abs(dot(w0, s.points[i]));
      if (v > 1e-12 && (!have_strict || v < strict)) {
        strict = v;
        have_strict = true;
      }
    }
    const int r = static_cast<int>(subset.size());
    LabeledSample mini;
    mini.n = n;
    for (int idx : subset) mini.points.push_back(s.points[idx]);
    mini.labels.assign(r, +1);
    for (int pat = 0; pat < (1 << r); ++pat) {
      for (int t = 0; t < r; ++t) mini.labels[t] = (pat >> t) & 1 ? +1 : -1;
      ConsistencyResult cr = find_consistent_halfspace(mini, 5000);
      if (cr.outcome != ConsistencyResult::Outcome::kFound) continue;
      double scale = (have_strict ? strict : 1.0) * 1e-6 / (norm(cr.weight) + 1.0);
      Vec w = axpy(w0, scale, cr.weight);
      add_candidate(w, s.points, cands, seen);
      w = axpy(w, -2.0 * scale, cr.weight);  // same tilt off the opposite face
      add_candidate(w, s.points, cands, seen);
    }
  };

  // Subsets in size order, lexicographic within a size, for determinism.
  auto rec = [&](auto&& self, int start, int remaining) -> void {
    if (remaining == 0) {
      handle_subset();
      return;
    }
    for (int i = start; i + remaining <= m; ++i) {
      subset.push_back(i);
      self(self, i + 1, remaining - 1);
      subset.pop_back();
    }
  };
  for (int size = 0; size <= n - 1 && size <= m; ++size) rec(rec, 0, size);
  return cands;
}

// Does any truth table make the cell assignment consistent? Cells are indexed
// by table_index of the per-halfspace signs; emptiness means a free entry.
bool consistent_table(const std::vector<std::uint64_t>& cells, std::uint64_t labels_mask,
                      std::vector<int>& table_out) {
  const int num_cells = static_cast<int>(cells.size());
  for (int table = 0; table < (1 << num_cells); ++table) {
    bool ok = true;
    for (int c = 0; c < num_cells && ok; ++c) {
      bool want_pos = (table >> c) & 1;
      std::uint64_t pos_in_cell = cells[c] & labels_mask;
      if (want_pos)
        ok = pos_in_cell == cells[c];
      else
        ok = pos_in_cell == 0;
    }
    if (ok) {
      table_out.resize(num_cells);
      for (int c = 0; c < num_cells; ++c) table_out[c] = ((table >> c) & 1) ? +1 : -1;
      return true;
    }
  }
  return false;
}

}  // namespace

std::optional<TargetFunction> brute_force_learn(const LabeledSample& s, int k) {
  if (s.n < 1 || s.n > 4) throw std::invalid_argument("brute_force_learn: n must be in [1,4]");
  if (k < 1 || k > 2) throw std::invalid_argument("brute_force_learn: k must be 1 or 2");
  if (s.size() < 1 || s.size() > 60)
    throw std::invalid_argument("brute_force_learn: |S| must be in [1,60]");

  std::vector<Candidate> cands = candidate_normals(s);
  std::uint64_t labels_mask = 0;
  const std::uint64_t all = (s.size() == 64) ? ~std::uint64_t{0}
                                             : ((std::uint64_t{1} << s.size()) - 1);
  for (int i = 0; i < s.size(); ++i)
    if (s.labels[i] == +1) labels_mask |= (std::uint64_t{1} << i);

  std::vector<int> table;
  // Single-halfspace pass first: cheapest consistent explanation wins.
  for (const Candidate& c : cands) {
    std::vector<std::uint64_t> cells = {~c.mask & all, c.mask};  // index = bit of sign +1
    if (consistent_table(cells, labels_mask, table)) {
      TargetFunction f;
      f.n = s.n;
      f.k = 1;
      f.weights = {c.w};
      f.table = table;
      return f;
    }
  }
  if (k < 2) return std::nullopt;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    for (std::size_t j = i + 1; j < cands.size(); ++j) {
      const std::uint64_t m1 = cands[i].mask, m2 = cands[j].mask;
      std::vector<std::uint64_t> cells = {
          ~m1 & ~m2 & all, m1 & ~m2 & all, ~m1 & m2 & all, m1 & m2 & all};
      if (consistent_table(cells, labels_mask, table)) {
        TargetFunction f;
        f.n = s.n;
        f.k = 2;
        f.weights = {cands[i].w, cands[j].w};
        f.table = table;
        return f;
      }
    }
  }
  return std::nullopt;
}

int majority_of(const std::vector<int>& labels) {
  if (labels.empty()) throw std::invalid_argument("majority_of: empty labels");
  long long sum = 0;
  for (int y : labels) sum += y;
  return sum >= 0 ? +1 : -1;
}

int majority_label(const LabeledSample& s) {
  if (s.size() == 0) throw std::invalid_argument("majority_label: empty sample");
  return majority_of(s.labels);
}

}  // namespace hslab

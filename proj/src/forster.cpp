#include "hslab/forster.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <utility>

#include "hslab/numerics.hpp"

namespace hslab {

namespace {

constexpr double kMembershipTol = 1e-8;  // relative residual for "x in V"

Mat scaled_moment(const std::vector<Vec>& unit_points) {
  Mat m = second_moment(unit_points);
  int d = m.rows;
  for (double& v : m.a) v *= static_cast<double>(d);
  return m;
}

}  // namespace

IsotropyCheck radial_isotropy_check(const std::vector<Vec>& unit_points, double eps) {
  if (unit_points.empty()) throw std::invalid_argument("radial_isotropy_check: empty set");
  if (eps <= 0.0) throw std::invalid_argument("radial_isotropy_check: eps must be positive");
  EigenSym eig = sym_eigen(scaled_moment(unit_points));
  IsotropyCheck chk;
  chk.eigenvalues = eig.values;
  chk.hi = eig.values.front();
  chk.lo = eig.values.back();
  chk.isotropic = (chk.lo >= 1.0 - eps) && (chk.hi <= 1.0 + eps);
  return chk;
}

IsotropyCheck radial_isotropy_check(const std::vector<Vec>& points, const Mat& basis,
                                    double eps) {
  std::vector<Vec> coords;
  coords.reserve(points.size());
  for (const Vec& x : points) {
    if (subspace_residual(basis, x) > kMembershipTol)
      throw std::invalid_argument("radial_isotropy_check: point outside subspace");
    coords.push_back(matvec(basis, x));
  }
  return radial_isotropy_check(coords, eps);
}

NonConvergence::NonConvergence(int iterations_, double band_lo_, double band_hi_)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "whitening iteration failed to reach the eigenvalue band after "
           << iterations_ << " iterations (moment spectrum [" << band_lo_ << ", "
           << band_hi_ << "])";
        return os.str();
      }()),
      iterations(iterations_),
      band_lo(band_lo_),
      band_hi(band_hi_) {}

DegenerateProjection::DegenerateProjection(double projection_norm_)
    : std::runtime_error("halfspace projects to (near) zero in the subspace"),
      projection_norm(projection_norm_) {}

Mat ForsterOutput::ambient_transform() const {
  int n = ambient();
  // B^T A B
  Mat ab = matmul(a_coords, basis);            // d x n
  Mat out = matmul(transpose(basis), ab);      // n x n
  // + (I - B^T B)
  Mat btb = matmul(transpose(basis), basis);   // n x n
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) += (i == j ? 1.0 : 0.0) - btb(i, j);
  return out;
}

Vec ForsterOutput::apply_coords(const Vec& x) const {
  Vec c = matvec(basis, x);
  Vec y = matvec(a_coords, c);
  double nrm = norm(y);
  if (nrm == 0.0) throw std::runtime_error("apply_coords: point projects to zero");
  return scaled(y, 1.0 / nrm);
}

namespace {

struct LevelInput {
  std::vector<Vec> points;   // ambient coordinates
  std::vector<int> labels;
  std::vector<int> indices;  // positions in the original sample
};

// One restriction level: whiten within span(points); on stall, find a
// top-eigenvector subspace that still carries enough of the ORIGINAL sample
// mass and recurse on the points near it.
ForsterOutput forsterize_level(const LevelInput& in, double eps, const ForsterParams& params,
                               int m_total, int n_ambient, int depth) {
  if (depth > params.max_depth)
    throw NonConvergence(0, 0.0, 0.0);

  Mat basis = span_basis(in.points, params.rank_tol);
  // A full-dimensional span is the whole space; the canonical basis keeps
  // coordinates bit-identical to ambient points and residuals exactly zero.
  if (basis.rows == basis.cols) basis = Mat::identity(basis.cols);
  const int d = basis.rows;
  const int m = static_cast<int>(in.points.size());

  std::vector<Vec> coords;
  coords.reserve(m);
  for (const Vec& x : in.points) coords.push_back(matvec(basis, x));

  Mat a = Mat::identity(d);
  std::vector<Vec> cur = coords;  // running images a * coords[i]
  const double eps_inner = 0.98 * eps;

  int iterations = 0;
  bool converged = false;
  IsotropyCheck last;
  std::vector<Vec> z(m);
  for (int iter = 0; iter <= params.max_iterations; ++iter) {
    for (int i = 0; i < m; ++i) z[i] = normalized(cur[i]);
    last = radial_isotropy_check(z, eps_inner);
    if (last.isotropic) {
      converged = true;
      iterations = iter;
      break;
    }
    if (iter == params.max_iterations) {
      iterations = iter;
      break;
    }
    // A nearly rank-deficient moment cannot be whitened further; stall now
    // rather than pushing points through a singular inverse square root.
    if (last.lo <= 1e-12 * std::max(1.0, last.hi)) {
      iterations = iter;
      break;
    }
    Mat moment = scaled_moment(z);
    Mat t = inv_sqrt_psd(moment, params.rank_tol);
    for (int i = 0; i < m; ++i) cur[i] = matvec(t, z[i]);
    a = matmul(t, a);
  }

  if (!converged) {
    // Stall: look for a deficient subspace among the leading eigendirections
    // of the current transformed moment that keeps condition (i) intact.
    EigenSym eig = sym_eigen(scaled_moment(z));
    for (int dprime = d - 1; dprime >= 1; --dprime) {
      Mat sub(dprime, d);
      for (int r = 0; r < dprime; ++r)
        for (int c = 0; c < d; ++c) sub(r, c) = eig.vectors(c, r);
      LevelInput next;
      for (int i = 0; i < m; ++i) {
        if (subspace_residual(sub, z[i]) <= params.member_tol) {
          next.points.push_back(in.points[i]);
          next.labels.push_back(in.labels[i]);
          next.indices.push_back(in.indices[i]);
        }
      }
      long long kept = static_cast<long long>(next.points.size());
      if (kept >= 1 && kept * n_ambient >= static_cast<long long>(m_total) * dprime &&
          kept < m) {
        return forsterize_level(next, eps, params, m_total, n_ambient, depth + 1);
      }
    }
    throw NonConvergence(iterations, last.lo, last.hi);
  }

  // Symmetrize via the polar factor: (A^T A)^{1/2} maps directions the same
  // way up to a fixed rotation (so the eigenvalue band is untouched) and makes
  // w -> A^{-1} w exactly sign-compatible with x -> A x.
  Mat ata = matmul(transpose(a), a);
  ForsterOutput out;
  out.basis = std::move(basis);
  out.a_coords = psd_power(ata, 0.5, params.rank_tol);
  out.a_coords_inv = psd_power(ata, -0.5, params.rank_tol);
  out.kept_indices = in.indices;
  out.labels = in.labels;
  out.iterations = iterations;
  out.transformed.reserve(m);
  for (int i = 0; i < m; ++i) {
    Vec y = matvec(out.a_coords, normalized(coords[i]));
    out.transformed.push_back(normalized(y));
  }
  IsotropyCheck final_chk = radial_isotropy_check(out.transformed, eps);
  if (!final_chk.isotropic)
    throw NonConvergence(iterations, final_chk.lo, final_chk.hi);
  return out;
}

}  // namespace

ForsterOutput forsterize(const LabeledSample& s, double eps, const ForsterParams& params) {
  if (s.size() == 0) throw std::invalid_argument("forsterize: empty sample");
  if (eps <= 0.0) throw std::invalid_argument("forsterize: eps must be positive");
  if (static_cast<int>(s.labels.size()) != s.size())
    throw std::invalid_argument("forsterize: labels/points size mismatch");
  LevelInput in;
  in.points = s.points;
  in.labels = s.labels;
  in.indices.resize(s.points.size());
  for (int i = 0; i < s.size(); ++i) {
    if (norm(s.points[i]) == 0.0)
      throw std::invalid_argument("forsterize: zero point in sample");
    in.indices[i] = i;
  }
  return forsterize_level(in, eps, params, s.size(), s.n, 0);
}

LabeledSample forsterized_sample(const ForsterOutput& out) {
  LabeledSample s;
  s.n = out.dim();
  s.points = out.transformed;
  s.labels = out.labels;
  return s;
}

Vec transform_halfspace(const Vec& w, const ForsterOutput& out) {
  Vec p = matvec(out.basis, w);
  double pn = norm(p);
  if (pn <= 1e-10) throw DegenerateProjection(pn);
  Vec wc = normalized(matvec(out.a_coords_inv, p));
  return matvec_t(out.basis, wc);
}

double margin_fraction(const std::vector<Vec>& points, const Vec& w, double tau) {
  if (points.empty()) throw std::invalid_argument("margin_fraction: empty set");
  int hits = 0;
  for (const Vec& x : points)
    if (std::abs(dot(w, x)) >= tau) ++hits;
  return static_cast<double>(hits) / static_cast<double>(points.size());
}

}  // namespace hslab

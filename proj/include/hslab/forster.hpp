#ifndef HSLAB_FORSTER_HPP
#define HSLAB_FORSTER_HPP

#include <stdexcept>
#include <vector>

#include "hslab/core.hpp"
#include "hslab/linalg.hpp"

namespace hslab {

// ---------------------------------------------------------------------------
// Radial isotropy: a set of unit points is (1+eps)-radially isotropic when all
// eigenvalues of dim * (1/m) * sum x x^T lie in [1-eps, 1+eps].
// ---------------------------------------------------------------------------

struct IsotropyCheck {
  bool isotropic = false;
  Vec eigenvalues;   // descending
  double lo = 0.0;   // min eigenvalue of the scaled moment
  double hi = 0.0;   // max eigenvalue
};

// Points given directly in the coordinates of their space (full-dimensional).
IsotropyCheck radial_isotropy_check(const std::vector<Vec>& unit_points, double eps);

// Ambient points against an explicit subspace basis (orthonormal rows).
// Throws std::invalid_argument if any point has relative residual > 1e-8.
IsotropyCheck radial_isotropy_check(const std::vector<Vec>& points, const Mat& basis,
                                    double eps);

inline bool is_radially_isotropic(const std::vector<Vec>& unit_points, double eps) {
  return radial_isotropy_check(unit_points, eps).isotropic;
}

// ---------------------------------------------------------------------------
// Forster transform
// ---------------------------------------------------------------------------

struct ForsterParams {
  int max_iterations = 5000;
  double rank_tol = 1e-9;      // eigenvalue cutoff for span / inverse decisions
  double member_tol = 1e-6;    // residual tolerance for subspace restriction
  int max_depth = 64;          // recursion guard for repeated restriction
};

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(int iterations_, double band_lo_, double band_hi_);
  int iterations;
  double band_lo;   // smallest scaled-moment eigenvalue at the stall
  double band_hi;   // largest
};

class DegenerateProjection : public std::runtime_error {
 public:
  explicit DegenerateProjection(double projection_norm_);
  double projection_norm;
};

struct ForsterOutput {
  Mat basis;                      // d x n, orthonormal rows spanning V
  Mat a_coords;                   // d x d symmetric positive definite map on V
  Mat a_coords_inv;               // its inverse (also symmetric)
  std::vector<Vec> transformed;   // unit d-vectors: A(Bx)/|A(Bx)| per kept point
  std::vector<int> kept_indices;  // positions in the input sample
  std::vector<int> labels;        // carried through unchanged
  int iterations = 0;             // transform applications at the final level

  int dim() const { return basis.rows; }
  int ambient() const { return basis.cols; }

  // Ambient n x n extension B^T A B + (I - B^T B): agrees with the map on V
  // and acts as identity on the orthogonal complement, so it stays invertible.
  Mat ambient_transform() const;

  // d-dim coordinates of the transformed direction of x; throws
  // std::runtime_error if x projects to zero in V.
  Vec apply_coords(const Vec& x) const;
};

// Iterative whitening until the kept points are (1+eps)-radially isotropic
// with respect to V = span of the (possibly restricted) sample. Restricts to a
// mass-carrying subspace and recurses when the iteration stalls; throws
// NonConvergence when no admissible restriction exists.
ForsterOutput forsterize(const LabeledSample& s, double eps = 0.5,
                         const ForsterParams& params = ForsterParams{});

// The transformed sample as a standalone dim()-dimensional LabeledSample.
LabeledSample forsterized_sample(const ForsterOutput& out);

// w' = A^{-1} P_V w, renormalized, returned in ambient coordinates. Throws
// DegenerateProjection when |P_V w| <= 1e-10.
Vec transform_halfspace(const Vec& w, const ForsterOutput& out);

// Fraction of points with |w . x| >= tau. Throws on empty input.
double margin_fraction(const std::vector<Vec>& points, const Vec& w, double tau);

}  // namespace hslab

#endif  // HSLAB_FORSTER_HPP

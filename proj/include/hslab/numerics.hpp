#ifndef HSLAB_NUMERICS_HPP
#define HSLAB_NUMERICS_HPP

#include <vector>

#include "hslab/linalg.hpp"
#include "hslab/rng.hpp"

namespace hslab {

// Eigendecomposition of a symmetric matrix: values descending, vectors(.,j)
// is the unit eigenvector for values[j].
struct EigenSym {
  Vec values;
  Mat vectors;
};

// Cyclic Jacobi rotations; converges when the off-diagonal Frobenius mass
// drops below 1e-12 (relative to max(1, ||M||_F)). Input must be symmetric.
EigenSym sym_eigen(const Mat& m);

// Q f(L) Q^T for a PSD matrix, with eigenvalues <= rank_tol * lambda_max
// treated as zero. Used for the +/-1/2 powers.
Mat psd_power(const Mat& m, double power, double rank_tol = 1e-9);

// M^{-1/2} on the column space of M; zero on its kernel.
// Throws std::invalid_argument when M has no positive eigenvalue.
Mat inv_sqrt_psd(const Mat& m, double rank_tol = 1e-9);

// (1/|S|) sum x x^T.
Mat second_moment(const std::vector<Vec>& points);

// Orthonormal basis (rows) of span(points), eigenvalue-screened at rank_tol.
Mat span_basis(const std::vector<Vec>& points, double rank_tol = 1e-9);

// Relative residual of x against the row space of `basis` (orthonormal rows):
// ||x - P x|| / ||x||, with 0 for the zero vector.
double subspace_residual(const Mat& basis, const Vec& x);

// i.i.d. normal coordinates with the given per-coordinate variance.
Vec gaussian_vector(int dim, double variance, RngStream& rng);

}  // namespace hslab

#endif  // HSLAB_NUMERICS_HPP

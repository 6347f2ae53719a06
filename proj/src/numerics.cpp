#include "hslab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hslab {

namespace {

void require_symmetric(const Mat& m) {
  if (m.rows != m.cols) throw std::invalid_argument("sym_eigen: matrix not square");
  double scale = 0.0;
  for (double v : m.a) scale = std::max(scale, std::fabs(v));
  double tol = 1e-9 * std::max(1.0, scale);
  for (int i = 0; i < m.rows; ++i)
    for (int j = i + 1; j < m.cols; ++j)
      if (std::fabs(m(i, j) - m(j, i)) > tol)
        throw std::invalid_argument("sym_eigen: matrix not symmetric");
}

double off_diagonal_frobenius(const Mat& m) {
  double s = 0.0;
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j)
      if (i != j) s += m(i, j) * m(i, j);
  return std::sqrt(s);
}

}  // namespace

EigenSym sym_eigen(const Mat& m) {
  require_symmetric(m);
  int n = m.rows;
  Mat a = m;
  Mat v = Mat::identity(n);
  if (n == 1) return {Vec{a(0, 0)}, v};

  double target = 1e-12 * std::max(1.0, frobenius_norm(m));
  const int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (off_diagonal_frobenius(a) <= target) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (std::fabs(apq) < 1e-300) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        // Rotate rows/columns p and q of a.
        for (int i = 0; i < n; ++i) {
          double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (int j = 0; j < n; ++j) {
          double apj = a(p, j), aqj = a(q, j);
          a(p, j) = c * apj - s * aqj;
          a(q, j) = s * apj + c * aqj;
        }
        for (int i = 0; i < n; ++i) {
          double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return a(i, i) > a(j, j); });

  EigenSym out;
  out.values.resize(n);
  out.vectors = Mat(n, n);
  for (int j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]);
    for (int i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
  }
  return out;
}

Mat psd_power(const Mat& m, double power, double rank_tol) {
  EigenSym eig = sym_eigen(m);
  int n = m.rows;
  double lmax = 0.0;
  for (double l : eig.values) lmax = std::max(lmax, l);
  if (lmax <= 0.0) throw std::invalid_argument("psd_power: matrix has no positive eigenvalue");
  Vec f(n, 0.0);
  for (int j = 0; j < n; ++j)
    if (eig.values[j] > rank_tol * lmax) f[j] = std::pow(eig.values[j], power);
  Mat out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int l = 0; l < n; ++l) s += eig.vectors(i, l) * f[l] * eig.vectors(j, l);
      out(i, j) = s;
    }
  return out;
}

Mat inv_sqrt_psd(const Mat& m, double rank_tol) { return psd_power(m, -0.5, rank_tol); }

Mat second_moment(const std::vector<Vec>& points) {
  if (points.empty()) throw std::invalid_argument("second_moment: empty point set");
  int n = static_cast<int>(points.front().size());
  Mat m(n, n);
  for (const Vec& x : points) {
    if (static_cast<int>(x.size()) != n)
      throw std::invalid_argument("second_moment: inconsistent dimensions");
    for (int i = 0; i < n; ++i) {
      if (x[i] == 0.0) continue;
      for (int j = 0; j < n; ++j) m(i, j) += x[i] * x[j];
    }
  }
  double inv = 1.0 / static_cast<double>(points.size());
  for (double& v : m.a) v *= inv;
  return m;
}

Mat span_basis(const std::vector<Vec>& points, double rank_tol) {
  Mat moment = second_moment(points);
  EigenSym eig = sym_eigen(moment);
  int n = moment.rows;
  double lmax = 0.0;
  for (double l : eig.values) lmax = std::max(lmax, l);
  if (lmax <= 0.0) throw std::invalid_argument("span_basis: all points are zero");
  int d = 0;
  while (d < n && eig.values[d] > rank_tol * lmax) ++d;
  Mat basis(d, n);
  for (int r = 0; r < d; ++r)
    for (int j = 0; j < n; ++j) basis(r, j) = eig.vectors(j, r);
  return basis;
}

double subspace_residual(const Mat& basis, const Vec& x) {
  double nx = norm(x);
  if (nx == 0.0) return 0.0;
  Vec coords = matvec(basis, x);
  Vec back = matvec_t(basis, coords);
  double r2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double d = x[i] - back[i];
    r2 += d * d;
  }
  return std::sqrt(std::max(r2, 0.0)) / nx;
}

Vec gaussian_vector(int dim, double variance, RngStream& rng) {
  if (dim <= 0) throw std::invalid_argument("gaussian_vector: dim must be positive");
  if (variance < 0.0) throw std::invalid_argument("gaussian_vector: negative variance");
  Vec x(dim, 0.0);
  if (variance == 0.0) return x;
  double sd = std::sqrt(variance);
  for (int i = 0; i < dim; ++i) x[i] = sd * rng.next_gaussian();
  return x;
}

}  // namespace hslab

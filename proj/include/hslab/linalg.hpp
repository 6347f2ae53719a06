#ifndef HSLAB_LINALG_HPP
#define HSLAB_LINALG_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace hslab {

using Vec = std::vector<double>;

// Dense row-major matrix, sized for desk-scale dimensions (n <= a few dozen).
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
};

inline double dot(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) throw std::invalid_argument("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double norm(const Vec& x) { return std::sqrt(dot(x, x)); }

inline Vec scaled(const Vec& x, double c) {
  Vec y = x;
  for (double& v : y) v *= c;
  return y;
}

// x + c*y, in a fresh vector.
inline Vec axpy(const Vec& x, double c, const Vec& y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: dimension mismatch");
  Vec z = x;
  for (std::size_t i = 0; i < z.size(); ++i) z[i] += c * y[i];
  return z;
}

inline Vec normalized(const Vec& x) {
  double nx = norm(x);
  if (nx == 0.0) throw std::invalid_argument("normalized: zero vector");
  return scaled(x, 1.0 / nx);
}

inline Vec matvec(const Mat& m, const Vec& x) {
  if (static_cast<int>(x.size()) != m.cols) throw std::invalid_argument("matvec: dimension mismatch");
  Vec y(m.rows, 0.0);
  for (int i = 0; i < m.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < m.cols; ++j) s += m(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

// m^T x without forming the transpose.
inline Vec matvec_t(const Mat& m, const Vec& x) {
  if (static_cast<int>(x.size()) != m.rows) throw std::invalid_argument("matvec_t: dimension mismatch");
  Vec y(m.cols, 0.0);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) y[j] += m(i, j) * x[i];
  return y;
}

inline Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols != b.rows) throw std::invalid_argument("matmul: dimension mismatch");
  Mat c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int k = 0; k < a.cols; ++k) {
      double v = a(i, k);
      if (v == 0.0) continue;
      for (int j = 0; j < b.cols; ++j) c(i, j) += v * b(k, j);
    }
  return c;
}

inline Mat transpose(const Mat& m) {
  Mat t(m.cols, m.rows);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
  return t;
}

inline double frobenius_norm(const Mat& m) {
  double s = 0.0;
  for (double v : m.a) s += v * v;
  return std::sqrt(s);
}

}  // namespace hslab

#endif  // HSLAB_LINALG_HPP

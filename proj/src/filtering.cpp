#include "hslab/filtering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hslab/numerics.hpp"

namespace hslab {

bool region_contains(const Region& r, const Vec& x) {
  if (r.guess.size() != x.size())
    throw std::invalid_argument("region_contains: dimension mismatch");
  double g = dot(r.guess, x);
  return r.side == +1 ? (g >= r.beta) : (g <= -r.beta);
}

LabeledSample region_filter(const LabeledSample& s, const Region& r) {
  LabeledSample out;
  out.n = s.n;
  for (int i = 0; i < s.size(); ++i) {
    if (region_contains(r, s.points[i])) {
      out.points.push_back(s.points[i]);
      out.labels.push_back(s.labels[i]);
    }
  }
  return out;
}

std::vector<int> region_member_indices(const std::vector<Vec>& points, const Region& r) {
  std::vector<int> idx;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (region_contains(r, points[i])) idx.push_back(static_cast<int>(i));
  return idx;
}

double gaussian_upper_tail(double t) { return 0.5 * std::erfc(t / std::sqrt(2.0)); }

// Wichura's PPND16: max relative error about 1e-15 over the full open interval.
double inv_std_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("inv_std_normal_cdf: p must lie strictly in (0,1)");
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258) * r +
              3.64784832476320460504) * r + 5.76949722146069140550) * r +
            4.63033784615654529590) * r + 1.42343711074968357734) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940) * r +
            2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580) * r +
            5.46378491116411436990) * r + 6.65790464350110377720) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

double truncated_std_normal_tail(double a, RngStream& rng) {
  if (a <= 8.0) {
    // Inverse CDF in tail parameterization: Q(z) uniform on (0, Q(a)].
    // Q(a) >= Q(8) ~ 6e-16 and 1-u >= 2^-53, so the product never underflows.
    double u = rng.next_unit();
    double p = gaussian_upper_tail(a) * (1.0 - u);
    double z = -inv_std_normal_cdf(p);
    return std::max(z, a);
  }
  // Exponential-proposal rejection (efficient precisely where the CDF
  // underflows): propose a + Exp(lambda), accept with exp(-(z-lambda)^2/2).
  const double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    double u1 = 1.0 - rng.next_unit();
    double z = a - std::log(u1) / lambda;
    double u2 = rng.next_unit();
    double diff = z - lambda;
    if (u2 <= std::exp(-0.5 * diff * diff)) return z;
  }
}

Vec sample_lucky_guess(const Vec& w, double alpha, int n, RngStream& rng) {
  if (static_cast<int>(w.size()) != n)
    throw std::invalid_argument("sample_lucky_guess: dimension mismatch");
  return sample_lucky_guess_scaled(w, alpha, n, rng);
}

Vec sample_lucky_guess_scaled(const Vec& w, double alpha, int variance_n, RngStream& rng) {
  const int n = variance_n;
  if (n < 1) throw std::invalid_argument("sample_lucky_guess: variance dimension < 1");
  if (std::abs(norm(w) - 1.0) > 1e-8)
    throw std::invalid_argument("sample_lucky_guess: w must be a unit vector");
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  Vec g = gaussian_vector(static_cast<int>(w.size()), 1.0 / n, rng);
  double along = dot(w, g);
  g = axpy(g, -along, w);  // orthogonal part, unconditioned
  double z = truncated_std_normal_tail(alpha * sqrt_n, rng) / sqrt_n;
  g = axpy(g, z, w);
  // The postcondition w.g >= alpha is contractual; repair the (measure-zero)
  // rounding shortfall explicitly.
  double s = dot(w, g);
  if (s < alpha) g = axpy(g, (alpha - s) * (1.0 + 1e-12) + 1e-300, w);
  return g;
}

double predicted_tail_param(double gamma, double beta, double z1, int n) {
  if (std::abs(z1) >= 1.0)
    throw std::invalid_argument("predicted_tail_param: |z1| must be < 1");
  return (beta - gamma * z1) / std::sqrt(1.0 - z1 * z1) * std::sqrt(static_cast<double>(n));
}

WilsonInterval wilson_interval(long long hits, long long trials) {
  WilsonInterval w;
  if (hits < 0 || hits > std::max<long long>(trials, 0))
    throw std::invalid_argument("wilson_interval: hits out of range");
  if (trials <= 0) return w;
  const double z = 1.959963984540054;
  const double nn = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  w.lo = std::max(0.0, center - half);
  w.hi = std::min(1.0, center + half);
  return w;
}

AdvantageEstimate estimate_advantage(const Vec& x, const Vec& x_ref, const Vec& w,
                                     double alpha, double beta, long long trials,
                                     RngStream& rng) {
  if (trials < 1) throw std::invalid_argument("estimate_advantage: trials must be >= 1");
  const int n = static_cast<int>(w.size());
  AdvantageEstimate est;
  est.trials = trials;
  long long joint = 0;
  for (long long t = 0; t < trials; ++t) {
    Vec g = sample_lucky_guess(w, alpha, n, rng);
    bool hit_x = dot(g, x) >= beta;
    bool hit_ref = dot(g, x_ref) >= beta;
    if (hit_x) ++est.numerator_hits;
    if (hit_ref) ++est.denominator_hits;
    if (hit_x && hit_ref) ++joint;
  }
  const double inf = std::numeric_limits<double>::infinity();
  WilsonInterval wn = wilson_interval(est.numerator_hits, trials);
  WilsonInterval wd = wilson_interval(est.denominator_hits, trials);
  if (est.denominator_hits == 0) {
    est.degenerate = true;
    est.ratio = inf;
    est.ci_low = wd.hi > 0.0 ? wn.lo / wd.hi : 0.0;
    est.ci_high = inf;
    return est;
  }
  est.ratio = static_cast<double>(est.numerator_hits) / est.denominator_hits;
  const double tn = static_cast<double>(trials);
  const double p1 = static_cast<double>(est.numerator_hits) / tn;
  const double p2 = static_cast<double>(est.denominator_hits) / tn;
  const double p12 = static_cast<double>(joint) / tn;
  if (p1 > 0.0 && p1 < 1.0 && p2 < 1.0) {
    // Paired draws: delta method on log(p1/p2) with the joint-hit covariance.
    // Identical inputs make the variance collapse to zero, as it should.
    double var = (1.0 - p1) / (tn * p1) + (1.0 - p2) / (tn * p2) -
                 2.0 * (p12 - p1 * p2) / (tn * p1 * p2);
    var = std::max(var, 0.0);
    const double z = 1.959963984540054;
    const double half = z * std::sqrt(var);
    est.ci_low = est.ratio * std::exp(-half);
    est.ci_high = est.ratio * std::exp(half);
  } else {
    // Degenerate proportions: fall back to the conservative ratio of Wilson
    // bounds.
    est.ci_low = wd.hi > 0.0 ? wn.lo / wd.hi : 0.0;
    est.ci_high = wd.lo > 0.0 ? wn.hi / wd.lo : inf;
  }
  return est;
}

}  // namespace hslab

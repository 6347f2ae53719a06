#include <doctest.h>

#include <cmath>

#include "hslab/data.hpp"
#include "hslab/forster.hpp"
#include "hslab/numerics.hpp"
#include "oracles.hpp"

using namespace hslab;

namespace {

LabeledSample sphere_sample(int n, int m, std::uint64_t seed) {
  TargetFunction f = gen_target(n, 1, TargetMode::kRandom, seed * 31 + 1);
  DistributionDescriptor d;
  d.kind = DistributionDescriptor::Kind::kUniformSphere;
  d.n = n;
  return gen_sample(d, f, m, seed);
}

// Points confined to a planted 2-dimensional subspace of R^n.
LabeledSample plane_sample(int n, int m, std::uint64_t seed) {
  RngStream rng = RngStream::from_seed(seed);
  Vec u = normalized(gaussian_vector(n, 1.0, rng));
  Vec v0 = gaussian_vector(n, 1.0, rng);
  Vec v = normalized(axpy(v0, -dot(v0, u), u));
  LabeledSample s;
  s.n = n;
  for (int i = 0; i < m; ++i) {
    double a = rng.next_gaussian(), b = rng.next_gaussian();
    if (a == 0.0 && b == 0.0) a = 1.0;
    s.points.push_back(normalized(axpy(scaled(u, a), b, v)));
    s.labels.push_back(rng.next_sign());
  }
  return s;
}

}  // namespace

TEST_SUITE("forster") {

TEST_CASE("radial_isotropy_check agrees with an independent spectrum") {
  LabeledSample s = sphere_sample(5, 2000, 3);
  IsotropyCheck c = radial_isotropy_check(s.points, 0.5);
  CHECK(c.isotropic);

  std::vector<double> ref = oracles::eigenvalues_sym(oracles::scaled_second_moment(s.points));
  REQUIRE(c.eigenvalues.size() == ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i)
    CHECK(c.eigenvalues[i] == doctest::Approx(ref[i]).epsilon(1e-9));
  CHECK(c.hi == doctest::Approx(ref.front()).epsilon(1e-12));
  CHECK(c.lo == doctest::Approx(ref.back()).epsilon(1e-12));

  // A deliberately skewed cloud fails a tight band.
  std::vector<Vec> skew;
  RngStream rng = RngStream::from_seed(4);
  for (int i = 0; i < 2000; ++i) {
    Vec g = gaussian_vector(5, 1.0, rng);
    g[0] *= 6.0;
    skew.push_back(normalized(g));
  }
  CHECK_FALSE(radial_isotropy_check(skew, 0.1).isotropic);
}

TEST_CASE("forsterize whitens a full-rank sample in ambient coordinates") {
  LabeledSample s = sphere_sample(6, 800, 11);
  // Make it non-isotropic first so the transform has work to do.
  for (Vec& x : s.points) {
    x[0] *= 4.0;
    x = normalized(x);
  }
  ForsterOutput fo = forsterize(s, 0.5);
  CHECK(fo.dim() == 6);
  CHECK(fo.ambient() == 6);
  CHECK(static_cast<int>(fo.kept_indices.size()) == s.size());
  CHECK(fo.iterations >= 1);

  // Full-rank output keeps the canonical identity basis.
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      CHECK(fo.basis(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));

  for (const Vec& y : fo.transformed)
    CHECK(norm(y) == doctest::Approx(1.0).epsilon(1e-10));

  // Independent spectral verdict on the output.
  std::vector<double> ev =
      oracles::eigenvalues_sym(oracles::scaled_second_moment(fo.transformed));
  CHECK(ev.front() <= 1.5 + 1e-9);
  CHECK(ev.back() >= 0.5 - 1e-9);

  // apply_coords reproduces the stored transformed points.
  for (std::size_t i = 0; i < fo.kept_indices.size(); ++i) {
    Vec y = fo.apply_coords(s.points[fo.kept_indices[i]]);
    for (std::size_t j = 0; j < y.size(); ++j)
      CHECK(y[j] == doctest::Approx(fo.transformed[i][j]).epsilon(1e-9));
  }
}

TEST_CASE("forsterize restricts rank-deficient input to its true span") {
  LabeledSample s = plane_sample(5, 300, 17);
  ForsterOutput fo = forsterize(s, 0.5);
  CHECK(fo.dim() == 2);
  CHECK(fo.ambient() == 5);
  // Nothing needed to be dropped: the whole sample lives in the plane.
  CHECK(static_cast<int>(fo.kept_indices.size()) == s.size());
  std::vector<double> ev =
      oracles::eigenvalues_sym(oracles::scaled_second_moment(fo.transformed));
  CHECK(ev.front() <= 1.5 + 1e-9);
  CHECK(ev.back() >= 0.5 - 1e-9);
}

TEST_CASE("forsterize restricts when one direction hoards the mass") {
  LabeledSample s;
  s.n = 4;
  RngStream rng = RngStream::from_seed(23);
  for (int i = 0; i < 300; ++i) {
    s.points.push_back(Vec{1.0, 0.0, 0.0, 0.0});
    s.labels.push_back(+1);
  }
  for (int i = 0; i < 20; ++i) {
    s.points.push_back(normalized(gaussian_vector(4, 1.0, rng)));
    s.labels.push_back(-1);
  }
  ForsterOutput fo = forsterize(s, 0.5);
  // The atom at e1 forces a restriction; whatever level it stops at must
  // respect the kept-mass invariant kept/|S| >= dim/n.
  CHECK(fo.dim() < 4);
  CHECK(static_cast<long long>(fo.kept_indices.size()) * s.n >=
        static_cast<long long>(s.size()) * fo.dim());
  for (const Vec& y : fo.transformed)
    CHECK(norm(y) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("ambient_transform extends the map by identity") {
  LabeledSample s = plane_sample(5, 200, 29);
  ForsterOutput fo = forsterize(s, 0.5);
  Mat t = fo.ambient_transform();
  REQUIRE(t.rows == 5);
  REQUIRE(t.cols == 5);
  RngStream rng = RngStream::from_seed(31);
  // On V: T x = B^T A (B x).
  Vec x = s.points[0];
  Vec tx = matvec(t, x);
  Vec expect = matvec_t(fo.basis, matvec(fo.a_coords, matvec(fo.basis, x)));
  for (int i = 0; i < 5; ++i) CHECK(tx[i] == doctest::Approx(expect[i]).epsilon(1e-9));
  // Orthogonal complement: T w = w.
  Vec w = gaussian_vector(5, 1.0, rng);
  Vec pw = matvec_t(fo.basis, matvec(fo.basis, w));
  Vec perp = axpy(w, -1.0, pw);
  Vec tperp = matvec(t, perp);
  for (int i = 0; i < 5; ++i) CHECK(tperp[i] == doctest::Approx(perp[i]).epsilon(1e-9));
}

TEST_CASE("transform_halfspace preserves every kept label") {
  for (std::uint64_t seed : {101ull, 102ull}) {
    LabeledSample s = seed % 2 == 0 ? sphere_sample(6, 400, seed) : plane_sample(6, 400, seed);
    ForsterOutput fo = forsterize(s, 0.5);
    RngStream rng = RngStream::from_seed(seed * 7);
    for (int rep = 0; rep < 40; ++rep) {
      Vec w = normalized(gaussian_vector(6, 1.0, rng));
      Vec wp;
      try {
        wp = transform_halfspace(w, fo);
      } catch (const DegenerateProjection&) {
        continue;  // w essentially orthogonal to V; nothing to preserve
      }
      for (std::size_t i = 0; i < fo.kept_indices.size(); ++i) {
        const Vec& x = s.points[fo.kept_indices[i]];
        if (std::abs(dot(w, x)) < 1e-11) continue;  // boundary contact
        // w' lives in ambient coordinates; compare against the transformed
        // point expressed in ambient coordinates as well.
        Vec y_amb = matvec_t(fo.basis, fo.transformed[i]);
        CHECK(sign(dot(w, x)) == sign(dot(wp, y_amb)));
      }
    }
  }
}

TEST_CASE("whitened samples satisfy the margin-mass guarantee") {
  LabeledSample s = sphere_sample(6, 1500, 211);
  ForsterOutput fo = forsterize(s, 0.5);
  const int d = fo.dim();
  const double tau = 1.0 / (2.0 * std::sqrt(static_cast<double>(d)));
  const double floor_mass = 1.0 / (4.0 * d);
  RngStream rng = RngStream::from_seed(212);
  for (int rep = 0; rep < 50; ++rep) {
    Vec w = normalized(gaussian_vector(d, 1.0, rng));
    CHECK(margin_fraction(fo.transformed, w, tau) >= floor_mass);
  }
}

TEST_CASE("margin_fraction counts exactly") {
  std::vector<Vec> pts = {{1.0, 0.0}, {0.3, 0.9}, {0.05, 0.99}};
  Vec w = {1.0, 0.0};
  CHECK(margin_fraction(pts, w, 0.2) == doctest::Approx(2.0 / 3.0));
  CHECK(margin_fraction(pts, w, 0.3) == doctest::Approx(2.0 / 3.0));  // closed
  CHECK(margin_fraction(pts, w, 0.31) == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(margin_fraction({}, w, 0.1), std::invalid_argument);
}

TEST_CASE("forsterized_sample carries the reduced dimension") {
  LabeledSample s = plane_sample(5, 120, 57);
  ForsterOutput fo = forsterize(s, 0.5);
  LabeledSample t = forsterized_sample(fo);
  CHECK(t.n == fo.dim());
  CHECK(t.size() == static_cast<int>(fo.transformed.size()));
  CHECK(t.labels == fo.labels);
}

TEST_CASE("input validation") {
  LabeledSample s = sphere_sample(4, 50, 61);
  CHECK_THROWS_AS(forsterize(s, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(forsterize(s, -0.5), std::invalid_argument);
  LabeledSample bad = s;
  bad.points[3] = Vec{0.0, 0.0, 0.0, 0.0};
  CHECK_THROWS_AS(forsterize(bad, 0.5), std::invalid_argument);
  LabeledSample empty;
  empty.n = 4;
  CHECK_THROWS_AS(forsterize(empty, 0.5), std::invalid_argument);
}

}  // TEST_SUITE

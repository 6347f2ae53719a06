#include <doctest.h>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>

#include "hslab/data.hpp"
#include "hslab/numerics.hpp"
#include "oracles.hpp"

using namespace hslab;

namespace {

std::uint64_t bits(double v) { return std::bit_cast<std::uint64_t>(v); }

double reparse(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  REQUIRE(res.ec == std::errc{});
  REQUIRE(res.ptr == s.data() + s.size());
  return v;
}

DistributionDescriptor uniform(int n) {
  DistributionDescriptor d;
  d.kind = DistributionDescriptor::Kind::kUniformSphere;
  d.n = n;
  return d;
}

}  // namespace

TEST_SUITE("data") {

TEST_CASE("format_double writes shortest exact round-trip decimals") {
  const double cases[] = {0.0,
                          -0.0,
                          1.0 / 3.0,
                          1e-300,
                          std::numeric_limits<double>::max(),
                          0.1,
                          -2.5e-17,
                          123456.789};
  for (double v : cases) {
    std::string s = format_double(v);
    CHECK(bits(reparse(s)) == bits(v));
  }
  CHECK(format_double(-0.0)[0] == '-');
}

TEST_CASE("sample CSV round trip is bit exact") {
  TargetFunction f = gen_target(4, 2, TargetMode::kRandom, 31);
  LabeledSample s = gen_sample(uniform(4), f, 25, 32);
  oracles::TempDir td;
  std::string path = td.file("sample.csv");
  save_sample_csv(s, path);
  LabeledSample back = load_sample_csv(path);
  REQUIRE(back.n == 4);
  REQUIRE(back.size() == 25);
  for (int i = 0; i < 25; ++i) {
    CHECK(back.labels[i] == s.labels[i]);
    for (int j = 0; j < 4; ++j)
      CHECK(bits(back.points[i][j]) == bits(s.points[i][j]));
  }
}

TEST_CASE("sample CSV parsing rejects malformed input with line numbers") {
  oracles::TempDir td;
  auto write_and_load = [&](const std::string& name, const std::string& text) {
    std::string p = td.file(name);
    write_text_file(p, text);
    return load_sample_csv(p);
  };

  // Wrong header column name.
  try {
    write_and_load("h1.csv", "a,b,label\n1,2,1\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 1);
  }
  // Header not ending in `label`.
  CHECK_THROWS_AS(write_and_load("h2.csv", "x1,x2,junk\n1,2,1\n"), ParseError);
  // Bad label value.
  try {
    write_and_load("l1.csv", "x1,label\n0.5,2\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }
  // Wrong field count.
  try {
    write_and_load("c1.csv", "x1,x2,label\n0.5,1\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }
  // Malformed number.
  CHECK_THROWS_AS(write_and_load("n1.csv", "x1,label\nzap,1\n"), ParseError);
  // No data rows.
  CHECK_THROWS_AS(write_and_load("e1.csv", "x1,label\n"), ParseError);
  // CRLF endings and the +1 spelling are accepted.
  LabeledSample crlf = write_and_load("crlf.csv", "x1,x2,label\r\n0.5,-0.25,+1\r\n");
  REQUIRE(crlf.size() == 1);
  CHECK(crlf.labels[0] == +1);
  CHECK(crlf.points[0][0] == 0.5);
  CHECK(crlf.points[0][1] == -0.25);

  CHECK_THROWS_AS(load_sample_csv(td.file("missing.csv")), std::runtime_error);
  LabeledSample empty;
  CHECK_THROWS_AS(save_sample_csv(empty, td.file("x.csv")), std::invalid_argument);
}

TEST_CASE("gen_target produces the advertised truth tables") {
  TargetFunction f_and = gen_target(4, 3, TargetMode::kAndOfK, 7);
  REQUIRE(f_and.table.size() == 8);
  for (std::size_t c = 0; c < 8; ++c)
    CHECK(f_and.table[c] == (c == 7 ? +1 : -1));

  TargetFunction f_par = gen_target(4, 2, TargetMode::kParityOfK, 7);
  CHECK(f_par.table == std::vector<int>{+1, -1, -1, +1});

  TargetFunction f_rnd = gen_target(4, 2, TargetMode::kRandom, 7);
  for (int v : f_rnd.table) CHECK((v == -1 || v == +1));
  TargetFunction f_rnd2 = gen_target(4, 2, TargetMode::kRandom, 7);
  CHECK(f_rnd.table == f_rnd2.table);
  for (int i = 0; i < 2; ++i) CHECK(f_rnd.weights[i] == f_rnd2.weights[i]);

  for (const Vec& w : f_and.weights) {
    CHECK(static_cast<int>(w.size()) == 4);
    CHECK(norm(w) == doctest::Approx(1.0).epsilon(1e-12));
  }

  const std::vector<int> tab = {-1, +1, +1, -1};
  TargetFunction f_fix = gen_target(3, 2, TargetMode::kFixed, 7, &tab);
  CHECK(f_fix.table == tab);

  CHECK_THROWS_AS(gen_target(3, 2, TargetMode::kFixed, 7, nullptr), std::invalid_argument);
  const std::vector<int> short_tab = {-1, +1};
  CHECK_THROWS_AS(gen_target(3, 2, TargetMode::kFixed, 7, &short_tab),
                  std::invalid_argument);
  const std::vector<int> bad_tab = {-1, 0, +1, -1};
  CHECK_THROWS_AS(gen_target(3, 2, TargetMode::kFixed, 7, &bad_tab), std::invalid_argument);
  CHECK_THROWS_AS(gen_target(0, 2, TargetMode::kRandom, 7), std::invalid_argument);
  CHECK_THROWS_AS(gen_target(3, 0, TargetMode::kRandom, 7), std::invalid_argument);
  CHECK_THROWS_AS(gen_target(3, 9, TargetMode::kRandom, 7), std::invalid_argument);
}

TEST_CASE("mode and kind names round trip") {
  for (TargetMode m : {TargetMode::kRandom, TargetMode::kAndOfK, TargetMode::kParityOfK,
                       TargetMode::kFixed})
    CHECK(target_mode_from_name(target_mode_name(m)) == m);
  CHECK_THROWS_AS(target_mode_from_name("bogus"), std::invalid_argument);
  using K = DistributionDescriptor::Kind;
  for (K k : {K::kUniformSphere, K::kGaussianNormalized, K::kClustered,
              K::kBoundaryHugging, K::kFile})
    CHECK(distribution_kind_from_name(distribution_kind_name(k)) == k);
  CHECK_THROWS_AS(distribution_kind_from_name("bogus"), std::invalid_argument);
}

TEST_CASE("sphere and normalized-gaussian draws are unit and deterministic") {
  TargetFunction f = gen_target(5, 1, TargetMode::kRandom, 3);
  for (auto kind : {DistributionDescriptor::Kind::kUniformSphere,
                    DistributionDescriptor::Kind::kGaussianNormalized}) {
    DistributionDescriptor d;
    d.kind = kind;
    d.n = 5;
    ResolvedDistribution rd = resolve_distribution(d);
    RngStream r1 = RngStream::from_seed(99);
    RngStream r2 = RngStream::from_seed(99);
    for (int i = 0; i < 200; ++i) {
      Vec x = draw_point(rd, f, r1);
      CHECK(norm(x) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(x == draw_point(rd, f, r2));
    }
  }
}

TEST_CASE("clustered draws concentrate near their centers") {
  DistributionDescriptor d;
  d.kind = DistributionDescriptor::Kind::kClustered;
  d.n = 5;
  Vec e1(5, 0.0);
  e1[0] = 1.0;
  d.centers = {e1};
  d.spread = 0.1;
  TargetFunction f = gen_target(5, 1, TargetMode::kRandom, 3);
  ResolvedDistribution rd = resolve_distribution(d);
  RngStream rng = RngStream::from_seed(4);
  double mean_dot = 0.0;
  for (int i = 0; i < 300; ++i) {
    Vec x = draw_point(rd, f, rng);
    CHECK(norm(x) == doctest::Approx(1.0).epsilon(1e-12));
    mean_dot += x[0];
  }
  CHECK(mean_dot / 300.0 > 0.9);

  DistributionDescriptor bad = d;
  bad.centers.clear();
  CHECK_THROWS_AS(validate_distribution(bad), std::invalid_argument);
  bad = d;
  bad.centers = {Vec{1.0, 0.0}};
  CHECK_THROWS_AS(validate_distribution(bad), std::invalid_argument);
  bad = d;
  bad.spread = 0.0;
  CHECK_THROWS_AS(validate_distribution(bad), std::invalid_argument);
}

TEST_CASE("boundary-hugging draws sit within the offset of some boundary") {
  DistributionDescriptor d;
  d.kind = DistributionDescriptor::Kind::kBoundaryHugging;
  d.n = 4;
  d.offset = 0.05;
  d.mix_uniform = 0.0;
  TargetFunction f = gen_target(4, 2, TargetMode::kRandom, 11);
  ResolvedDistribution rd = resolve_distribution(d);
  RngStream rng = RngStream::from_seed(12);
  for (int i = 0; i < 200; ++i) {
    Vec x = draw_point(rd, f, rng);
    CHECK(norm(x) == doctest::Approx(1.0).epsilon(1e-10));
    double mind = std::min(std::abs(dot(f.weights[0], x)), std::abs(dot(f.weights[1], x)));
    CHECK(mind <= d.offset);
  }

  DistributionDescriptor bad = d;
  bad.offset = 1.5;
  CHECK_THROWS_AS(validate_distribution(bad), std::invalid_argument);
  bad = d;
  bad.mix_uniform = -0.1;
  CHECK_THROWS_AS(validate_distribution(bad), std::invalid_argument);
  // A boundary draw needs a live target.
  TargetFunction none;
  RngStream r2 = RngStream::from_seed(1);
  CHECK_THROWS_AS(draw_point(rd, none, r2), std::invalid_argument);
}

TEST_CASE("file-backed distributions resample the stored points") {
  TargetFunction f = gen_target(3, 1, TargetMode::kRandom, 21);
  LabeledSample s = gen_sample(uniform(3), f, 12, 22);
  oracles::TempDir td;
  std::string path = td.file("pool.csv");
  save_sample_csv(s, path);

  DistributionDescriptor d;
  d.kind = DistributionDescriptor::Kind::kFile;
  d.n = 3;
  d.path = path;
  ResolvedDistribution rd = resolve_distribution(d);
  REQUIRE(rd.file_points.size() == 12);
  RngStream rng = RngStream::from_seed(23);
  for (int i = 0; i < 50; ++i) {
    Vec x = draw_point(rd, f, rng);
    double best = 1e9;
    for (const Vec& p : rd.file_points) best = std::min(best, norm(axpy(x, -1.0, p)));
    CHECK(best < 1e-12);
  }

  DistributionDescriptor bad = d;
  bad.path = "";
  CHECK_THROWS_AS(validate_distribution(bad), std::invalid_argument);
  bad = d;
  bad.path = td.file("missing.csv");
  CHECK_THROWS_AS(resolve_distribution(bad), std::runtime_error);
  bad = d;
  bad.n = 4;  // file holds 3-dimensional points
  CHECK_THROWS_AS(resolve_distribution(bad), std::invalid_argument);
}

TEST_CASE("gen_sample labels from the target and replays deterministically") {
  TargetFunction f = gen_target(4, 2, TargetMode::kAndOfK, 41);
  LabeledSample a = gen_sample(uniform(4), f, 60, 42);
  LabeledSample b = gen_sample(uniform(4), f, 60, 42);
  REQUIRE(a.size() == 60);
  for (int i = 0; i < 60; ++i) {
    CHECK(a.labels[i] == evaluate_target(f, a.points[i]));
    CHECK(a.points[i] == b.points[i]);
    CHECK(a.labels[i] == b.labels[i]);
  }
  LabeledSample c = gen_sample(uniform(4), f, 60, 43);
  bool any_diff = false;
  for (int i = 0; i < 60 && !any_diff; ++i) any_diff = a.points[i] != c.points[i];
  CHECK(any_diff);

  CHECK_THROWS_AS(gen_sample(uniform(4), f, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen_sample(uniform(5), f, 10, 1), std::invalid_argument);
}

TEST_CASE("matrix JSON round trip preserves shape and bits") {
  Mat m(2, 3);
  m(0, 0) = -0.0;
  m(0, 1) = 1.0 / 3.0;
  m(0, 2) = 2.5;
  m(1, 0) = -1e-300;
  m(1, 1) = 7.0;
  m(1, 2) = 0.1;
  nlohmann::ordered_json j = mat_to_json(m);
  Mat back = mat_from_json(j);
  REQUIRE(back.rows == 2);
  REQUIRE(back.cols == 3);
  for (int i = 0; i < 2; ++i)
    for (int c = 0; c < 3; ++c)
      CHECK(bits(back(i, c)) == bits(m(i, c)));

  nlohmann::json bad = j;
  bad["data"] = std::vector<double>{1.0, 2.0};
  CHECK_THROWS_AS(mat_from_json(bad), std::invalid_argument);
  bad = j;
  bad["rows"] = -1;
  CHECK_THROWS_AS(mat_from_json(bad), std::exception);
}

TEST_CASE("target JSON round trip and validation") {
  TargetFunction f = gen_target(3, 2, TargetMode::kRandom, 5);
  nlohmann::ordered_json j = target_to_json(f);
  TargetFunction back = target_from_json(j);
  CHECK(target_to_json(back).dump() == j.dump());
  CHECK(back.n == 3);
  CHECK(back.k == 2);

  oracles::TempDir td;
  std::string path = td.file("target.json");
  save_target_json(f, path);
  TargetFunction loaded = load_target_json(path);
  CHECK(target_to_json(loaded).dump() == j.dump());

  nlohmann::json bad = j;
  bad["schema_version"] = 2;
  CHECK_THROWS_AS(target_from_json(bad), std::invalid_argument);
  bad = j;
  bad["type"] = "other";
  CHECK_THROWS_AS(target_from_json(bad), std::invalid_argument);
  bad = j;
  bad["k"] = 3;  // weights/table no longer match
  CHECK_THROWS_AS(target_from_json(bad), std::invalid_argument);
  bad = j;
  bad["table"] = std::vector<int>{1, -1, 1};
  CHECK_THROWS_AS(target_from_json(bad), std::invalid_argument);
  bad = j;
  bad["table"] = std::vector<int>{1, -1, 2, -1};
  CHECK_THROWS_AS(target_from_json(bad), std::invalid_argument);
  bad = j;
  bad["weights"][0] = std::vector<double>{1.0, 0.0};
  CHECK_THROWS_AS(target_from_json(bad), std::invalid_argument);
}

TEST_CASE("hypothesis JSON round trip for every kind") {
  Hypothesis hc = Hypothesis::constant(-1);
  nlohmann::ordered_json jc = hypothesis_to_json(hc);
  Hypothesis hc_back = hypothesis_from_json(jc);
  CHECK(hypothesis_to_json(hc_back).dump() == jc.dump());
  CHECK(evaluate_hypothesis(hc_back, Vec{1.0, 2.0}) == -1);

  Hypothesis h;
  h.kind = Hypothesis::Kind::kChain;
  h.basis = Mat(2, 3);
  h.basis(0, 0) = 1.0;
  h.basis(1, 1) = 1.0;
  Stage st;
  st.transform = Mat::identity(3);
  st.guess = Vec{0.6, 0.8, 0.0};
  st.beta = 0.25;
  st.side = -1;
  h.stages = {st};
  h.outside_subspace_value = -1;
  h.outside_region_value = +1;
  h.inner = Hypothesis::Inner::kHalfspace;
  h.inner_value = -1;
  h.inner_weight = Vec{0.5, -0.5, 0.25};
  nlohmann::ordered_json j = hypothesis_to_json(h);
  Hypothesis back = hypothesis_from_json(j);
  CHECK(hypothesis_to_json(back).dump() == j.dump());

  RngStream rng = RngStream::from_seed(8);
  for (int i = 0; i < 20; ++i) {
    Vec x = normalized(gaussian_vector(3, 1.0, rng));
    CHECK(evaluate_hypothesis(back, x) == evaluate_hypothesis(h, x));
  }

  oracles::TempDir td;
  std::string path = td.file("hyp.json");
  save_hypothesis_json(h, path);
  Hypothesis loaded = load_hypothesis_json(path);
  CHECK(hypothesis_to_json(loaded).dump() == j.dump());

  nlohmann::json bad = j;
  bad["stages"][0]["side"] = 0;
  CHECK_THROWS_AS(hypothesis_from_json(bad), std::invalid_argument);
  bad = j;
  bad["stages"][0]["guess"] = std::vector<double>{1.0, 0.0};
  CHECK_THROWS_AS(hypothesis_from_json(bad), std::invalid_argument);
  bad = j;
  bad["inner"] = "weird";
  CHECK_THROWS_AS(hypothesis_from_json(bad), std::invalid_argument);
  bad = j;
  bad["inner_weight"] = std::vector<double>{};
  CHECK_THROWS_AS(hypothesis_from_json(bad), std::invalid_argument);
  bad = j;
  bad["kind"] = "mystery";
  CHECK_THROWS_AS(hypothesis_from_json(bad), std::invalid_argument);
  bad = jc;
  bad["constant_value"] = 0;
  CHECK_THROWS_AS(hypothesis_from_json(bad), std::invalid_argument);
}

TEST_CASE("low-level file helpers") {
  oracles::TempDir td;
  CHECK_THROWS_AS(load_json_file(td.file("missing.json")), std::runtime_error);
  std::string p = td.file("mangled.json");
  write_text_file(p, "{not json");
  CHECK_THROWS(load_json_file(p));
  std::string q = td.file("roundtrip.txt");
  write_text_file(q, "line1\nline2\n");
  CHECK(read_text_file(q) == "line1\nline2\n");
  CHECK_THROWS_AS(read_text_file(td.file("nope.txt")), std::runtime_error);
}

}  // TEST_SUITE

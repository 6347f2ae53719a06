#include "hslab/data.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>
#include <utility>

#include "hslab/numerics.hpp"

namespace hslab {

void validate_distribution(const DistributionDescriptor& dist) {
  if (dist.n < 1) throw std::invalid_argument("distribution: n must be positive");
  switch (dist.kind) {
    case DistributionDescriptor::Kind::kUniformSphere:
    case DistributionDescriptor::Kind::kGaussianNormalized:
      break;
    case DistributionDescriptor::Kind::kClustered:
      if (dist.centers.empty())
        throw std::invalid_argument("clustered distribution: no centers");
      for (const Vec& c : dist.centers)
        if (static_cast<int>(c.size()) != dist.n)
          throw std::invalid_argument("clustered distribution: center dimension mismatch");
      if (!(dist.spread > 0.0))
        throw std::invalid_argument("clustered distribution: spread must be positive");
      break;
    case DistributionDescriptor::Kind::kBoundaryHugging:
      if (!(dist.offset > 0.0 && dist.offset < 1.0))
        throw std::invalid_argument("boundary distribution: offset must be in (0,1)");
      if (dist.mix_uniform < 0.0 || dist.mix_uniform > 1.0)
        throw std::invalid_argument("boundary distribution: mix_uniform must be in [0,1]");
      break;
    case DistributionDescriptor::Kind::kFile:
      if (dist.path.empty())
        throw std::invalid_argument("file distribution: empty path");
      break;
  }
}

std::string distribution_kind_name(DistributionDescriptor::Kind kind) {
  switch (kind) {
    case DistributionDescriptor::Kind::kUniformSphere: return "uniform_sphere";
    case DistributionDescriptor::Kind::kGaussianNormalized: return "gaussian_normalized";
    case DistributionDescriptor::Kind::kClustered: return "clustered";
    case DistributionDescriptor::Kind::kBoundaryHugging: return "boundary_hugging";
    case DistributionDescriptor::Kind::kFile: return "file";
  }
  throw std::logic_error("distribution_kind_name: unreachable");
}

DistributionDescriptor::Kind distribution_kind_from_name(const std::string& name) {
  if (name == "uniform_sphere") return DistributionDescriptor::Kind::kUniformSphere;
  if (name == "gaussian_normalized") return DistributionDescriptor::Kind::kGaussianNormalized;
  if (name == "clustered") return DistributionDescriptor::Kind::kClustered;
  if (name == "boundary_hugging") return DistributionDescriptor::Kind::kBoundaryHugging;
  if (name == "file") return DistributionDescriptor::Kind::kFile;
  throw std::invalid_argument("unknown distribution kind: " + name);
}

ResolvedDistribution resolve_distribution(const DistributionDescriptor& dist) {
  validate_distribution(dist);
  ResolvedDistribution out;
  out.desc = dist;
  if (dist.kind == DistributionDescriptor::Kind::kFile) {
    LabeledSample s = load_sample_csv(dist.path);
    if (s.n != dist.n)
      throw std::invalid_argument("file distribution: file dimension " +
                                  std::to_string(s.n) + " != descriptor n " +
                                  std::to_string(dist.n));
    out.file_points = std::move(s.points);
  }
  return out;
}

std::string target_mode_name(TargetMode mode) {
  switch (mode) {
    case TargetMode::kRandom: return "random";
    case TargetMode::kAndOfK: return "and_of_k";
    case TargetMode::kParityOfK: return "parity_of_k";
    case TargetMode::kFixed: return "fixed";
  }
  throw std::logic_error("target_mode_name: unreachable");
}

TargetMode target_mode_from_name(const std::string& name) {
  if (name == "random") return TargetMode::kRandom;
  if (name == "and_of_k") return TargetMode::kAndOfK;
  if (name == "parity_of_k") return TargetMode::kParityOfK;
  if (name == "fixed") return TargetMode::kFixed;
  throw std::invalid_argument("unknown target mode: " + name);
}

TargetFunction gen_target(int n, int k, TargetMode mode, std::uint64_t seed,
                          const std::vector<int>* fixed_table) {
  if (n < 1) throw std::invalid_argument("gen_target: n must be positive");
  if (k < 1 || k > 8) throw std::invalid_argument("gen_target: k must be in [1,8]");
  TargetFunction f;
  f.n = n;
  f.k = k;
  RngStream rng = RngStream::from_seed(seed);
  for (int i = 0; i < k; ++i)
    f.weights.push_back(normalized(gaussian_vector(n, 1.0, rng)));
  const std::size_t cells = std::size_t{1} << k;
  f.table.resize(cells);
  switch (mode) {
    case TargetMode::kRandom:
      for (std::size_t c = 0; c < cells; ++c) f.table[c] = rng.next_sign();
      break;
    case TargetMode::kAndOfK:
      for (std::size_t c = 0; c < cells; ++c)
        f.table[c] = c == cells - 1 ? +1 : -1;
      break;
    case TargetMode::kParityOfK:
      // Product of the k per-halfspace signs; a cleared bit is a -1 factor.
      for (std::size_t c = 0; c < cells; ++c)
        f.table[c] = (k - std::popcount(c)) % 2 == 0 ? +1 : -1;
      break;
    case TargetMode::kFixed:
      if (fixed_table == nullptr)
        throw std::invalid_argument("gen_target: fixed mode requires a table");
      if (fixed_table->size() != cells)
        throw std::invalid_argument("gen_target: fixed table has wrong size");
      for (std::size_t c = 0; c < cells; ++c) {
        int v = (*fixed_table)[c];
        if (v != -1 && v != +1)
          throw std::invalid_argument("gen_target: table entries must be -1 or +1");
        f.table[c] = v;
      }
      break;
  }
  return f;
}

Vec draw_point(const ResolvedDistribution& dist, const TargetFunction& f, RngStream& rng) {
  const DistributionDescriptor& d = dist.desc;
  const int n = d.n;
  switch (d.kind) {
    case DistributionDescriptor::Kind::kUniformSphere:
      return normalized(gaussian_vector(n, 1.0, rng));
    case DistributionDescriptor::Kind::kGaussianNormalized:
      return normalized(gaussian_vector(n, 1.0 / n, rng));
    case DistributionDescriptor::Kind::kClustered: {
      std::size_t c = static_cast<std::size_t>(
          rng.next_below(static_cast<std::uint64_t>(d.centers.size())));
      Vec g = gaussian_vector(n, d.spread * d.spread / n, rng);
      return normalized(axpy(d.centers[c], 1.0, g));
    }
    case DistributionDescriptor::Kind::kBoundaryHugging: {
      if (rng.next_unit() < d.mix_uniform)
        return normalized(gaussian_vector(n, 1.0, rng));
      if (f.k < 1 || f.n != n)
        throw std::invalid_argument("boundary distribution: target mismatch");
      std::size_t i = static_cast<std::size_t>(
          rng.next_below(static_cast<std::uint64_t>(f.k)));
      const Vec& w = f.weights[i];
      // Exact signed distance delta in (-0.9*offset, 0.9*offset), uniform
      // direction in the boundary hyperplane; the sum is unit by construction.
      double delta = (2.0 * rng.next_unit() - 1.0) * 0.9 * d.offset;
      Vec g = gaussian_vector(n, 1.0, rng);
      Vec perp = axpy(g, -dot(g, w), w);
      double np = norm(perp);
      if (np < 1e-12) return w;  // astronomically unlikely; any point works
      Vec x = scaled(w, delta);
      x = axpy(x, std::sqrt(std::max(0.0, 1.0 - delta * delta)) / np, perp);
      return x;
    }
    case DistributionDescriptor::Kind::kFile: {
      if (dist.file_points.empty())
        throw std::invalid_argument("file distribution: unresolved descriptor");
      std::size_t i = static_cast<std::size_t>(
          rng.next_below(static_cast<std::uint64_t>(dist.file_points.size())));
      return normalized(dist.file_points[i]);
    }
  }
  throw std::logic_error("draw_point: unreachable");
}

LabeledSample gen_sample(const DistributionDescriptor& dist, const TargetFunction& f,
                         int m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("gen_sample: m must be positive");
  if (f.n != dist.n) throw std::invalid_argument("gen_sample: dimension mismatch");
  ResolvedDistribution rd = resolve_distribution(dist);
  RngStream rng = RngStream::from_seed(seed);
  LabeledSample s;
  s.n = dist.n;
  s.points.reserve(static_cast<std::size_t>(m));
  s.labels.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    Vec x = draw_point(rd, f, rng);
    s.labels.push_back(evaluate_target(f, x));
    s.points.push_back(std::move(x));
  }
  return perturb_labelsafe(s, f, rng.next_u64());
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

ParseError::ParseError(const std::string& what, int line_number)
    : std::runtime_error(what + " (line " + std::to_string(line_number) + ")"),
      line(line_number) {}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json load_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  return nlohmann::json::parse(text);
}

void save_sample_csv(const LabeledSample& s, const std::string& path) {
  if (s.size() == 0) throw std::invalid_argument("save_sample_csv: empty sample");
  if (static_cast<int>(s.labels.size()) != s.size())
    throw std::invalid_argument("save_sample_csv: label/point count mismatch");
  std::ostringstream out;
  for (int j = 1; j <= s.n; ++j) out << 'x' << j << ',';
  out << "label\n";
  for (int i = 0; i < s.size(); ++i) {
    const Vec& x = s.points[i];
    if (static_cast<int>(x.size()) != s.n)
      throw std::invalid_argument("save_sample_csv: point dimension mismatch");
    for (double v : x) out << format_double(v) << ',';
    out << s.labels[i] << '\n';
  }
  write_text_file(path, out.str());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

double parse_double_field(const std::string& field, int line_no) {
  double v = 0.0;
  const char* b = field.data();
  const char* e = b + field.size();
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc{} || res.ptr != e)
    throw ParseError("malformed number '" + field + "'", line_no);
  return v;
}

}  // namespace

LabeledSample load_sample_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2 || header.back() != "label")
    throw ParseError("header must be x1,...,xn,label", line_no);
  const int n = static_cast<int>(header.size()) - 1;
  for (int j = 0; j < n; ++j)
    if (header[j] != "x" + std::to_string(j + 1))
      throw ParseError("unexpected header column '" + header[j] + "'", line_no);

  LabeledSample s;
  s.n = n;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != n + 1)
      throw ParseError("expected " + std::to_string(n + 1) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    Vec x(n);
    for (int j = 0; j < n; ++j) x[j] = parse_double_field(fields[j], line_no);
    const std::string& lab = fields[n];
    int y = 0;
    if (lab == "1" || lab == "+1")
      y = +1;
    else if (lab == "-1")
      y = -1;
    else
      throw ParseError("label must be -1 or 1, got '" + lab + "'", line_no);
    s.points.push_back(std::move(x));
    s.labels.push_back(y);
  }
  if (s.size() == 0) throw ParseError("no data rows", line_no);
  return s;
}

nlohmann::ordered_json mat_to_json(const Mat& m) {
  nlohmann::ordered_json j;
  j["rows"] = m.rows;
  j["cols"] = m.cols;
  j["data"] = m.a;
  return j;
}

Mat mat_from_json(const nlohmann::json& j) {
  Mat m(j.at("rows").get<int>(), j.at("cols").get<int>());
  if (m.rows < 0 || m.cols < 0) throw std::invalid_argument("matrix: negative shape");
  std::vector<double> data = j.at("data").get<std::vector<double>>();
  if (data.size() != static_cast<std::size_t>(m.rows) * static_cast<std::size_t>(m.cols))
    throw std::invalid_argument("matrix: data length does not match shape");
  m.a = std::move(data);
  return m;
}

nlohmann::ordered_json target_to_json(const TargetFunction& f) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["type"] = "target_function";
  j["n"] = f.n;
  j["k"] = f.k;
  j["weights"] = f.weights;
  j["table"] = f.table;
  return j;
}

TargetFunction target_from_json(const nlohmann::json& j) {
  if (j.at("schema_version").get<int>() != 1)
    throw std::invalid_argument("target: unsupported schema_version");
  if (j.at("type").get<std::string>() != "target_function")
    throw std::invalid_argument("target: wrong record type");
  TargetFunction f;
  f.n = j.at("n").get<int>();
  f.k = j.at("k").get<int>();
  if (f.n < 1 || f.k < 1 || f.k > 30) throw std::invalid_argument("target: bad shape");
  f.weights = j.at("weights").get<std::vector<Vec>>();
  f.table = j.at("table").get<std::vector<int>>();
  if (f.weights.size() != static_cast<std::size_t>(f.k))
    throw std::invalid_argument("target: weight count != k");
  for (const Vec& w : f.weights)
    if (static_cast<int>(w.size()) != f.n)
      throw std::invalid_argument("target: weight dimension != n");
  if (f.table.size() != (std::size_t{1} << f.k))
    throw std::invalid_argument("target: table size != 2^k");
  for (int v : f.table)
    if (v != -1 && v != +1) throw std::invalid_argument("target: table entries must be -1 or +1");
  return f;
}

nlohmann::ordered_json hypothesis_to_json(const Hypothesis& h) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["type"] = "hypothesis";
  if (h.kind == Hypothesis::Kind::kConstant) {
    j["kind"] = "constant";
    j["constant_value"] = h.constant_value;
    return j;
  }
  j["kind"] = "chain";
  j["basis"] = mat_to_json(h.basis);
  nlohmann::ordered_json stages = nlohmann::ordered_json::array();
  for (const Stage& st : h.stages) {
    nlohmann::ordered_json sj;
    sj["transform"] = mat_to_json(st.transform);
    sj["guess"] = st.guess;
    sj["beta"] = st.beta;
    sj["side"] = st.side;
    stages.push_back(std::move(sj));
  }
  j["stages"] = std::move(stages);
  j["outside_subspace_value"] = h.outside_subspace_value;
  j["outside_region_value"] = h.outside_region_value;
  j["inner"] = h.inner == Hypothesis::Inner::kConstant ? "constant" : "halfspace";
  j["inner_value"] = h.inner_value;
  j["inner_weight"] = h.inner_weight;
  j["subspace_tol"] = h.subspace_tol;
  return j;
}

namespace {

int binary_value(const nlohmann::json& j, const char* key) {
  int v = j.at(key).get<int>();
  if (v != -1 && v != +1)
    throw std::invalid_argument(std::string("hypothesis: ") + key + " must be -1 or +1");
  return v;
}

}  // namespace

Hypothesis hypothesis_from_json(const nlohmann::json& j) {
  if (j.at("schema_version").get<int>() != 1)
    throw std::invalid_argument("hypothesis: unsupported schema_version");
  if (j.at("type").get<std::string>() != "hypothesis")
    throw std::invalid_argument("hypothesis: wrong record type");
  Hypothesis h;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") {
    h.kind = Hypothesis::Kind::kConstant;
    h.constant_value = binary_value(j, "constant_value");
    return h;
  }
  if (kind != "chain") throw std::invalid_argument("hypothesis: unknown kind " + kind);
  h.kind = Hypothesis::Kind::kChain;
  h.basis = mat_from_json(j.at("basis"));
  for (const auto& sj : j.at("stages")) {
    Stage st;
    st.transform = mat_from_json(sj.at("transform"));
    st.guess = sj.at("guess").get<Vec>();
    st.beta = sj.at("beta").get<double>();
    st.side = sj.at("side").get<int>();
    if (st.side != -1 && st.side != +1)
      throw std::invalid_argument("hypothesis: stage side must be -1 or +1");
    if (st.transform.rows != st.transform.cols ||
        st.transform.cols != static_cast<int>(st.guess.size()))
      throw std::invalid_argument("hypothesis: stage shape mismatch");
    h.stages.push_back(std::move(st));
  }
  h.outside_subspace_value = binary_value(j, "outside_subspace_value");
  h.outside_region_value = binary_value(j, "outside_region_value");
  const std::string inner = j.at("inner").get<std::string>();
  if (inner == "constant")
    h.inner = Hypothesis::Inner::kConstant;
  else if (inner == "halfspace")
    h.inner = Hypothesis::Inner::kHalfspace;
  else
    throw std::invalid_argument("hypothesis: unknown inner rule " + inner);
  h.inner_value = binary_value(j, "inner_value");
  h.inner_weight = j.at("inner_weight").get<Vec>();
  h.subspace_tol = j.at("subspace_tol").get<double>();
  if (h.inner == Hypothesis::Inner::kHalfspace && h.inner_weight.empty())
    throw std::invalid_argument("hypothesis: halfspace inner rule with empty weight");
  return h;
}

void save_target_json(const TargetFunction& f, const std::string& path) {
  write_text_file(path, target_to_json(f).dump(2) + "\n");
}

TargetFunction load_target_json(const std::string& path) {
  return target_from_json(load_json_file(path));
}

void save_hypothesis_json(const Hypothesis& h, const std::string& path) {
  write_text_file(path, hypothesis_to_json(h).dump(2) + "\n");
}

Hypothesis load_hypothesis_json(const std::string& path) {
  return hypothesis_from_json(load_json_file(path));
}

}  // namespace hslab

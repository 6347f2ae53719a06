#ifndef HSLAB_DATA_HPP
#define HSLAB_DATA_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hslab/core.hpp"

namespace hslab {

// Synthetic point distributions. All generated points are unit-norm; targets
// are origin-centered, so labels are scale-invariant anyway.
struct DistributionDescriptor {
  enum class Kind {
    kUniformSphere,       // normalized isotropic Gaussian
    kGaussianNormalized,  // N(0, I/n) draw, then normalized
    kClustered,           // normalize(center + N(0, spread^2/n * I))
    kBoundaryHugging,     // most points within `offset` of a target boundary
    kFile                 // resample (with replacement) points from a CSV
  };
  Kind kind = Kind::kUniformSphere;
  int n = 0;
  std::vector<Vec> centers;   // clustered: at least one unit-ish center
  double spread = 0.25;       // clustered: displacement radius
  double offset = 0.05;       // boundary_hugging: max boundary distance
  double mix_uniform = 0.05;  // boundary_hugging: fraction drawn uniformly
  std::string path;           // file
};

// Throws std::invalid_argument on parameter combinations invalid for `kind`.
void validate_distribution(const DistributionDescriptor& dist);

std::string distribution_kind_name(DistributionDescriptor::Kind kind);
DistributionDescriptor::Kind distribution_kind_from_name(const std::string& name);

// File-backed descriptors are materialized once; other kinds pass through.
struct ResolvedDistribution {
  DistributionDescriptor desc;
  std::vector<Vec> file_points;
};

ResolvedDistribution resolve_distribution(const DistributionDescriptor& dist);

enum class TargetMode { kRandom, kAndOfK, kParityOfK, kFixed };

std::string target_mode_name(TargetMode mode);
TargetMode target_mode_from_name(const std::string& name);

// Unit weight vectors; table per mode. kFixed takes the table verbatim
// (size 2^k, entries in {-1,+1}).
TargetFunction gen_target(int n, int k, TargetMode mode, std::uint64_t seed,
                          const std::vector<int>* fixed_table = nullptr);

// One point; boundary_hugging needs the target's weights.
Vec draw_point(const ResolvedDistribution& dist, const TargetFunction& f, RngStream& rng);

// m i.i.d. draws, labels from f, then the boundary-safety perturbation.
LabeledSample gen_sample(const DistributionDescriptor& dist, const TargetFunction& f,
                         int m, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Persistence. Floats are written as shortest round-trip decimals, so
// save-then-load is bit-exact.
// ---------------------------------------------------------------------------

struct ParseError : std::runtime_error {
  int line = 0;
  ParseError(const std::string& what, int line_number);
};

// CSV with header x1,...,xn,label; label in {-1,1}.
void save_sample_csv(const LabeledSample& s, const std::string& path);
LabeledSample load_sample_csv(const std::string& path);

// JSON building blocks shared by every structured format.
nlohmann::ordered_json mat_to_json(const Mat& m);
Mat mat_from_json(const nlohmann::json& j);
nlohmann::ordered_json hypothesis_to_json(const Hypothesis& h);
Hypothesis hypothesis_from_json(const nlohmann::json& j);
nlohmann::ordered_json target_to_json(const TargetFunction& f);
TargetFunction target_from_json(const nlohmann::json& j);

void save_target_json(const TargetFunction& f, const std::string& path);
TargetFunction load_target_json(const std::string& path);
void save_hypothesis_json(const Hypothesis& h, const std::string& path);
Hypothesis load_hypothesis_json(const std::string& path);

// Shared low-level helpers.
std::string format_double(double v);           // shortest round-trip decimal
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);
nlohmann::json load_json_file(const std::string& path);

}  // namespace hslab

#endif  // HSLAB_DATA_HPP

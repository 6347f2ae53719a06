#include "hslab/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hslab/boosting.hpp"
#include "hslab/core.hpp"
#include "hslab/data.hpp"
#include "hslab/filtering.hpp"
#include "hslab/forster.hpp"
#include "hslab/learners.hpp"
#include "hslab/lemmalab.hpp"
#include "hslab/numerics.hpp"
#include "hslab/weak2.hpp"
#include "hslab/weakk.hpp"

namespace hslab {

namespace {

using nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double wall_ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::optional<std::uint64_t> env_master_seed() {
  const char* v = std::getenv("RNG_MASTER_SEED");
  if (v == nullptr || *v == '\0') return std::nullopt;
  std::uint64_t seed = 0;
  const char* end = v + std::string_view(v).size();
  auto res = std::from_chars(v, end, seed);
  if (res.ec != std::errc{} || res.ptr != end)
    throw std::invalid_argument("RNG_MASTER_SEED must be an unsigned integer");
  return seed;
}

// Explicit flag > replayed config > environment > 0.
std::uint64_t resolve_seed(const CLI::Option* seed_opt, std::uint64_t flag_value,
                           std::optional<std::uint64_t> config_value) {
  if (seed_opt->count() > 0) return flag_value;
  if (config_value) return *config_value;
  if (auto env = env_master_seed()) return *env;
  return flag_value;
}

void emit_rows(const std::string& path, const std::vector<ordered_json>& rows) {
  std::ostringstream out;
  for (const ordered_json& r : rows) out << r.dump() << '\n';
  const std::string text = out.str();
  std::cout << text;
  if (!path.empty()) write_text_file(path, text);
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    std::size_t pos = csv.find(',', start);
    std::string tok =
        pos == std::string::npos ? csv.substr(start) : csv.substr(start, pos - start);
    if (!tok.empty()) {
      int v = 0;
      auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        throw std::invalid_argument("malformed integer list entry: " + tok);
      out.push_back(v);
    }
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Distribution flags shared by gen and boost.
// ---------------------------------------------------------------------------

struct DistFlags {
  std::string dist = "uniform_sphere";
  int num_centers = 3;
  double spread = 0.25;
  double offset = 0.05;
  double mix_uniform = 0.05;
  std::string dist_path;
};

void add_dist_flags(CLI::App* cmd, DistFlags& d) {
  cmd->add_option("--dist", d.dist,
                  "uniform_sphere|gaussian_normalized|clustered|boundary_hugging|file");
  cmd->add_option("--num-centers", d.num_centers, "clustered: number of random centers");
  cmd->add_option("--spread", d.spread, "clustered: displacement radius");
  cmd->add_option("--offset", d.offset, "boundary_hugging: max boundary distance");
  cmd->add_option("--mix-uniform", d.mix_uniform, "boundary_hugging: uniform fraction");
  cmd->add_option("--dist-path", d.dist_path, "file distribution: CSV to resample");
}

ordered_json dist_to_json(const DistFlags& d) {
  return ordered_json{{"dist", d.dist},       {"num_centers", d.num_centers},
                      {"spread", d.spread},   {"offset", d.offset},
                      {"mix_uniform", d.mix_uniform}, {"dist_path", d.dist_path}};
}

void dist_from_json(const nlohmann::json& j, DistFlags& d) {
  d.dist = j.value("dist", d.dist);
  d.num_centers = j.value("num_centers", d.num_centers);
  d.spread = j.value("spread", d.spread);
  d.offset = j.value("offset", d.offset);
  d.mix_uniform = j.value("mix_uniform", d.mix_uniform);
  d.dist_path = j.value("dist_path", d.dist_path);
}

DistributionDescriptor build_descriptor(const DistFlags& d, int n, RngStream& rng) {
  DistributionDescriptor desc;
  desc.kind = distribution_kind_from_name(d.dist);
  desc.n = n;
  desc.spread = d.spread;
  desc.offset = d.offset;
  desc.mix_uniform = d.mix_uniform;
  desc.path = d.dist_path;
  if (desc.kind == DistributionDescriptor::Kind::kClustered) {
    if (d.num_centers < 1)
      throw std::invalid_argument("clustered distribution: need at least one center");
    for (int c = 0; c < d.num_centers; ++c)
      desc.centers.push_back(normalized(gaussian_vector(n, 1.0, rng)));
  }
  return desc;
}

// ---------------------------------------------------------------------------
// Learner parameter flags shared by weak2, weakk, boost, matrix.
// ---------------------------------------------------------------------------

void add_learner_flags(CLI::App* cmd, LearnerParams& lp) {
  cmd->add_option("--guess-budget", lp.guess_budget, "outer draw budget");
  cmd->add_option("--inner-steps", lp.inner_steps, "chain length (<=0: auto)");
  cmd->add_option("--gamma-desk", lp.gamma_desk, "required sample advantage");
  cmd->add_option("--lp-budget", lp.lp_budget, "perceptron update budget");
  cmd->add_option("--log-floor", lp.log_base_floor, "floor for L = max(ln n, floor)");
  cmd->add_option("--size-floor", lp.size_floor, "region size floor (<0: auto)");
}

ordered_json learner_to_json(const LearnerParams& lp) {
  return ordered_json{{"guess_budget", lp.guess_budget},
                      {"inner_steps", lp.inner_steps},
                      {"gamma_desk", lp.gamma_desk},
                      {"lp_budget", lp.lp_budget},
                      {"seed", lp.seed},
                      {"log_base_floor", lp.log_base_floor},
                      {"size_floor", lp.size_floor}};
}

void learner_from_json(const nlohmann::json& j, LearnerParams& lp) {
  lp.guess_budget = j.value("guess_budget", lp.guess_budget);
  lp.inner_steps = j.value("inner_steps", lp.inner_steps);
  lp.gamma_desk = j.value("gamma_desk", lp.gamma_desk);
  lp.lp_budget = j.value("lp_budget", lp.lp_budget);
  lp.seed = j.value("seed", lp.seed);
  lp.log_base_floor = j.value("log_base_floor", lp.log_base_floor);
  lp.size_floor = j.value("size_floor", lp.size_floor);
}

std::optional<nlohmann::json> load_replay_config(const std::string& path,
                                                 const std::string& command) {
  if (path.empty()) return std::nullopt;
  nlohmann::json j = load_json_file(path);
  if (j.value("command", std::string{}) != command)
    throw std::invalid_argument("config file is for command '" +
                                j.value("command", std::string{}) + "', expected '" +
                                command + "'");
  return j.at("params");
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

struct GenCmd {
  int n = 8, k = 2, m = 1000;
  std::string mode = "and_of_k";
  std::string table_csv;
  DistFlags dist;
  std::string target_in;
  std::uint64_t seed = 0;
  std::string out = "sample.csv";
  std::string target_out;
};

ordered_json gen_to_json(const GenCmd& p) {
  ordered_json j{{"n", p.n},     {"k", p.k},           {"m", p.m},
                 {"mode", p.mode}, {"table", p.table_csv}, {"target_in", p.target_in},
                 {"seed", p.seed}, {"out", p.out},       {"target_out", p.target_out}};
  j.update(dist_to_json(p.dist));
  return j;
}

void gen_from_json(const nlohmann::json& j, GenCmd& p) {
  p.n = j.value("n", p.n);
  p.k = j.value("k", p.k);
  p.m = j.value("m", p.m);
  p.mode = j.value("mode", p.mode);
  p.table_csv = j.value("table", p.table_csv);
  p.target_in = j.value("target_in", p.target_in);
  p.seed = j.value("seed", p.seed);
  dist_from_json(j, p.dist);
}

int run_gen(const GenCmd& p) {
  const auto t0 = Clock::now();
  RngStream rng = RngStream::from_seed(p.seed);
  const std::uint64_t target_seed = rng.next_u64();
  const std::uint64_t sample_seed = rng.next_u64();
  TargetFunction f;
  if (!p.target_in.empty()) {
    f = load_target_json(p.target_in);
    if (f.n != p.n) throw std::invalid_argument("gen: --target-in dimension != --n");
  } else if (p.mode == "fixed") {
    std::vector<int> table = parse_int_list(p.table_csv);
    f = gen_target(p.n, p.k, TargetMode::kFixed, target_seed, &table);
  } else {
    f = gen_target(p.n, p.k, target_mode_from_name(p.mode), target_seed);
  }
  DistributionDescriptor desc = build_descriptor(p.dist, p.n, rng);
  LabeledSample s = gen_sample(desc, f, p.m, sample_seed);
  save_sample_csv(s, p.out);
  if (!p.target_out.empty()) save_target_json(f, p.target_out);

  int positive = 0;
  for (int y : s.labels)
    if (y == +1) ++positive;
  ordered_json row;
  row["command"] = "gen";
  row["run_config"] = gen_to_json(p);
  row["written"] = p.out;
  row["points"] = s.size();
  row["positive_fraction"] = static_cast<double>(positive) / s.size();
  row["wall_ms"] = wall_ms_since(t0);
  emit_rows("", {row});
  return 0;
}

// ---------------------------------------------------------------------------
// forsterize
// ---------------------------------------------------------------------------

struct ForsterizeCmd {
  std::string data;
  double eps = 0.5;
  std::string out;
  std::string transformed_out;
};

int run_forsterize(const ForsterizeCmd& p) {
  const auto t0 = Clock::now();
  LabeledSample s = load_sample_csv(p.data);
  ForsterOutput fo = forsterize(s, p.eps);
  IsotropyCheck check = radial_isotropy_check(fo.transformed, p.eps);

  ordered_json row;
  row["command"] = "forsterize";
  row["run_config"] = ordered_json{{"data", p.data},
                                   {"eps", p.eps},
                                   {"out", p.out},
                                   {"transformed_out", p.transformed_out}};
  row["dim"] = fo.dim();
  row["ambient"] = fo.ambient();
  row["kept"] = static_cast<int>(fo.kept_indices.size());
  row["total"] = s.size();
  row["iterations"] = fo.iterations;
  row["isotropic"] = check.isotropic;
  row["eigenvalues"] = check.eigenvalues;
  row["band"] = ordered_json{{"lo", check.lo}, {"hi", check.hi}};
  row["wall_ms"] = wall_ms_since(t0);
  emit_rows(p.out, {row});

  if (!p.transformed_out.empty()) {
    LabeledSample out;
    out.n = fo.dim();
    out.points = fo.transformed;
    out.labels = fo.labels;
    save_sample_csv(out, p.transformed_out);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// weak2 / weakk
// ---------------------------------------------------------------------------

struct LearnCmd {
  std::string data;
  int k = 2;  // weakk only
  LearnerParams lp;
  std::uint64_t seed = 0;
  std::string out = "hypothesis.json";
  std::string report;
};

ordered_json learn_to_json(const LearnCmd& p, bool with_k) {
  ordered_json j{{"data", p.data}, {"seed", p.seed}, {"out", p.out}, {"report", p.report}};
  if (with_k) j["k"] = p.k;
  j["learner_params"] = learner_to_json(p.lp);
  return j;
}

void learn_from_json(const nlohmann::json& j, LearnCmd& p, bool with_k) {
  p.data = j.value("data", p.data);
  if (with_k) p.k = j.value("k", p.k);
  p.seed = j.value("seed", p.seed);
  if (j.contains("learner_params")) learner_from_json(j.at("learner_params"), p.lp);
}

int run_weak2(const LearnCmd& p) {
  const auto t0 = Clock::now();
  LabeledSample s = load_sample_csv(p.data);
  LearnerParams lp = p.lp;
  lp.seed = p.seed;
  Weak2Report rep = weak_learn_and2(s, lp);

  ordered_json row;
  row["command"] = "weak2";
  row["run_config"] = learn_to_json(p, false);
  row["success"] = rep.success;
  row["branch"] = rep.branch;
  row["iterations_used"] = rep.iterations_used;
  row["sample_advantage"] = rep.sample_advantage;
  row["accuracy"] = rep.success ? 0.5 + rep.sample_advantage : 0.0;
  row["wall_ms"] = wall_ms_since(t0);
  emit_rows(p.report, {row});
  if (rep.success && !p.out.empty()) save_hypothesis_json(rep.hypothesis, p.out);
  return rep.success ? 0 : 1;
}

int run_weakk(const LearnCmd& p) {
  const auto t0 = Clock::now();
  LabeledSample s = load_sample_csv(p.data);
  LearnerParams lp = p.lp;
  lp.seed = p.seed;
  WeakKReport rep = weak_learn_anyk(s, p.k, lp);

  ordered_json row;
  row["command"] = "weakk";
  row["run_config"] = learn_to_json(p, true);
  row["success"] = rep.success;
  row["iterations_used"] = rep.iterations_used;
  row["completed_chains"] = rep.completed_chains;
  row["aborted_chains"] = rep.aborted_chains;
  row["sample_advantage"] = rep.sample_advantage;
  row["accuracy"] = rep.success ? 0.5 + rep.sample_advantage : 0.0;
  row["wall_ms"] = wall_ms_since(t0);
  emit_rows(p.report, {row});
  if (rep.success && !p.out.empty()) save_hypothesis_json(rep.hypothesis, p.out);
  return rep.success ? 0 : 1;
}

// ---------------------------------------------------------------------------
// boost
// ---------------------------------------------------------------------------

struct BoostCmd {
  std::string target;
  DistFlags dist;
  double epsilon = 0.15;
  double delta = 0.1;
  double gamma = 0.05;
  std::string learner = "weak2";
  int k = 2;
  BoostParams bp;
  LearnerParams lp;
  std::uint64_t seed = 0;
  std::string out = "boosted.json";
  std::string report;
};

ordered_json boost_to_json(const BoostCmd& p) {
  ordered_json j{{"target", p.target},   {"epsilon", p.epsilon}, {"delta", p.delta},
                 {"gamma", p.gamma},     {"learner", p.learner}, {"k", p.k},
                 {"seed", p.seed},       {"out", p.out},         {"report", p.report}};
  j.update(dist_to_json(p.dist));
  j["boost_params"] = ordered_json{{"c_vc", p.bp.c_vc},
                                   {"c_boost", p.bp.c_boost},
                                   {"retry_budget", p.bp.retry_budget},
                                   {"holdout_size", p.bp.holdout_size},
                                   {"work_sample_cap", p.bp.work_sample_cap},
                                   {"round_sample_cap", p.bp.round_sample_cap},
                                   {"weak_redraw_budget", p.bp.weak_redraw_budget},
                                   {"min_round_advantage", p.bp.min_round_advantage},
                                   {"train_stop", p.bp.train_stop},
                                   {"d_vc", p.bp.d_vc}};
  j["learner_params"] = learner_to_json(p.lp);
  return j;
}

void boost_from_json(const nlohmann::json& j, BoostCmd& p) {
  p.target = j.value("target", p.target);
  p.epsilon = j.value("epsilon", p.epsilon);
  p.delta = j.value("delta", p.delta);
  p.gamma = j.value("gamma", p.gamma);
  p.learner = j.value("learner", p.learner);
  p.k = j.value("k", p.k);
  p.seed = j.value("seed", p.seed);
  dist_from_json(j, p.dist);
  if (j.contains("boost_params")) {
    const auto& b = j.at("boost_params");
    p.bp.c_vc = b.value("c_vc", p.bp.c_vc);
    p.bp.c_boost = b.value("c_boost", p.bp.c_boost);
    p.bp.retry_budget = b.value("retry_budget", p.bp.retry_budget);
    p.bp.holdout_size = b.value("holdout_size", p.bp.holdout_size);
    p.bp.work_sample_cap = b.value("work_sample_cap", p.bp.work_sample_cap);
    p.bp.round_sample_cap = b.value("round_sample_cap", p.bp.round_sample_cap);
    p.bp.weak_redraw_budget = b.value("weak_redraw_budget", p.bp.weak_redraw_budget);
    p.bp.min_round_advantage = b.value("min_round_advantage", p.bp.min_round_advantage);
    p.bp.train_stop = b.value("train_stop", p.bp.train_stop);
    p.bp.d_vc = b.value("d_vc", p.bp.d_vc);
  }
  if (j.contains("learner_params")) learner_from_json(j.at("learner_params"), p.lp);
}

void add_boost_flags(CLI::App* cmd, BoostCmd& p) {
  cmd->add_option("--c-vc", p.bp.c_vc, "sample-size constant for the weak learner");
  cmd->add_option("--c-boost", p.bp.c_boost, "working sample size constant");
  cmd->add_option("--retry-budget", p.bp.retry_budget, "full restarts on failed holdout");
  cmd->add_option("--holdout-size", p.bp.holdout_size, "fresh validation sample size");
  cmd->add_option("--work-cap", p.bp.work_sample_cap, "working sample cap");
  cmd->add_option("--round-cap", p.bp.round_sample_cap, "per-round resample cap");
  cmd->add_option("--redraw-budget", p.bp.weak_redraw_budget, "per-round weak retries");
  cmd->add_option("--min-round-advantage", p.bp.min_round_advantage,
                  "required working-sample advantage per round");
  cmd->add_option("--train-stop", p.bp.train_stop, "stop when training error <= this");
  cmd->add_option("--d-vc", p.bp.d_vc, "capacity surrogate (<=0: auto)");
}

int run_boost(const BoostCmd& p) {
  const auto t0 = Clock::now();
  if (p.target.empty()) throw std::invalid_argument("boost: --target is required");
  TargetFunction f = load_target_json(p.target);
  RngStream rng = RngStream::from_seed(p.seed);
  const std::uint64_t oracle_seed = rng.next_u64();
  DistributionDescriptor desc = build_descriptor(p.dist, f.n, rng);
  ExampleOracle oracle = make_oracle(f, desc, oracle_seed);

  SampleWeakLearner weak;
  int d_vc_auto = 0;
  if (p.learner == "weak2") {
    weak = make_weak2_learner();
    d_vc_auto = default_d_vc_weak2(f.n);
  } else if (p.learner == "weakk") {
    weak = make_weakk_learner(p.k);
    d_vc_auto = default_d_vc_weakk(f.n, p.k, p.lp.log_base_floor);
  } else {
    throw std::invalid_argument("boost: --learner must be weak2 or weakk");
  }
  BoostParams bp = p.bp;
  bp.seed = rng.next_u64();
  if (bp.d_vc <= 0) bp.d_vc = d_vc_auto;

  ordered_json row;
  row["command"] = "boost";
  row["run_config"] = boost_to_json(p);
  int exit_code = 0;
  try {
    BoostResult res = boost(oracle, weak, p.epsilon, p.delta, p.gamma, bp, p.lp);
    row["success"] = true;
    row["rounds_run"] = res.rounds_run;
    row["training_error"] = res.training_error;
    row["bound_value"] = res.bound_value;
    row["bound_ok"] = res.bound_ok;
    row["holdout_error"] = res.holdout_error;
    row["retries_used"] = res.retries_used;
    row["members"] = static_cast<int>(res.hypothesis.members.size());
    if (!p.out.empty()) save_boosted_json(res.hypothesis, p.out);
  } catch (const BoostFailure& e) {
    row["success"] = false;
    row["error"] = e.what();
    row["best_holdout_error"] = e.best_holdout_error;
    row["retries_used"] = e.retries_used;
    exit_code = 1;
  }
  row["wall_ms"] = wall_ms_since(t0);
  emit_rows(p.report, {row});
  return exit_code;
}

// ---------------------------------------------------------------------------
// baseline
// ---------------------------------------------------------------------------

struct BaselineCmd {
  std::string data;
  int k = 1;
  std::string out = "baseline.json";
  std::string report;
};

int run_baseline(const BaselineCmd& p) {
  const auto t0 = Clock::now();
  LabeledSample s = load_sample_csv(p.data);
  std::optional<TargetFunction> f = brute_force_learn(s, p.k);

  ordered_json row;
  row["command"] = "baseline";
  row["run_config"] =
      ordered_json{{"data", p.data}, {"k", p.k}, {"out", p.out}, {"report", p.report}};
  int exit_code = 0;
  if (f) {
    int correct = 0;
    for (int i = 0; i < s.size(); ++i)
      if (evaluate_target(*f, s.points[i]) == s.labels[i]) ++correct;
    row["success"] = true;
    row["k_used"] = f->k;
    row["accuracy"] = static_cast<double>(correct) / s.size();
    if (!p.out.empty()) save_target_json(*f, p.out);
  } else {
    row["success"] = false;
    row["error"] = "no consistent function in the searched class";
    exit_code = 1;
  }
  row["wall_ms"] = wall_ms_since(t0);
  emit_rows(p.report, {row});
  return exit_code;
}

// ---------------------------------------------------------------------------
// lemmas
// ---------------------------------------------------------------------------

struct LemmasCmd {
  std::string which = "all";
  long long trials = -1;  // <0: per-harness default
  std::uint64_t seed = 0;
  std::string out;
  int chain_n = 9, chain_k = 2, chain_m = 4000, chain_runs = 100;
  int filter_n = 9, filter_m = 400;
};

void append_report(std::vector<ordered_json>& rows, const LemmaReport& r,
                   std::uint64_t seed, double wall_ms) {
  for (const LemmaCell& c : r.cells) {
    ordered_json row = lemma_cell_row(r, c, seed);
    row["wall_ms"] = wall_ms;
    rows.push_back(std::move(row));
  }
  ordered_json agg;
  agg["lemma_id"] = r.lemma_id;
  agg["aggregate"] = true;
  agg["verdict"] = r.verdict;
  agg["wall_ms"] = wall_ms;
  rows.push_back(std::move(agg));
}

int run_lemmas(const LemmasCmd& p) {
  std::vector<ordered_json> rows;
  bool any_fail = false;
  auto want = [&](const char* name) { return p.which == "all" || p.which == name; };

  if (want("monotonicity")) {
    const auto t0 = Clock::now();
    MonotonicityConfig cfg;
    cfg.seed = p.seed;
    if (p.trials > 0) cfg.trials = p.trials;
    LemmaReport r = verify_monotonicity(cfg);
    any_fail |= r.verdict == "fail";
    append_report(rows, r, p.seed, wall_ms_since(t0));
  }
  if (want("advantage_band")) {
    const auto t0 = Clock::now();
    AdvantageBandConfig cfg;
    cfg.seed = p.seed;
    if (p.trials > 0) cfg.trials = p.trials;
    LemmaReport r = verify_advantage_band(cfg);
    any_fail |= r.verdict == "fail";
    append_report(rows, r, p.seed, wall_ms_since(t0));
  }
  if (want("filtering")) {
    const auto t0 = Clock::now();
    // Margin-compliant set: a spherical sample is already isotropic enough.
    RngStream rng = RngStream::from_seed(p.seed);
    std::vector<Vec> points;
    for (int i = 0; i < p.filter_m; ++i)
      points.push_back(normalized(gaussian_vector(p.filter_n, 1.0, rng)));
    Vec w(p.filter_n, 0.0);
    w[0] = 1.0;
    FilteringConfig cfg;
    cfg.seed = rng.next_u64();
    if (p.trials > 0) cfg.trials = p.trials;
    LemmaReport r = verify_filtering_simple(points, w, cfg);
    any_fail |= r.verdict == "fail";
    append_report(rows, r, p.seed, wall_ms_since(t0));
  }
  if (want("reverse_markov")) {
    const auto t0 = Clock::now();
    LemmaReport r = verify_reverse_markov(p.trials > 0 ? p.trials : 10000, p.seed);
    any_fail |= r.verdict == "fail";
    append_report(rows, r, p.seed, wall_ms_since(t0));
  }
  if (want("planted_chain")) {
    const auto t0 = Clock::now();
    PlantedChainConfig cfg;
    cfg.n = p.chain_n;
    cfg.k = p.chain_k;
    cfg.m = p.chain_m;
    cfg.runs = p.chain_runs;
    cfg.seed = p.seed;
    LemmaReport r = verify_planted_chain(cfg);
    any_fail |= r.verdict == "fail";
    append_report(rows, r, p.seed, wall_ms_since(t0));
  }
  if (rows.empty())
    throw std::invalid_argument("lemmas: unknown --which value: " + p.which);
  emit_rows(p.out, rows);
  return any_fail ? 1 : 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalCmd {
  std::string hyp;
  std::string boosted;
  std::string data;
  bool pretty = false;
};

int run_eval(const EvalCmd& p) {
  if (p.hyp.empty() == p.boosted.empty())
    throw std::invalid_argument("eval: pass exactly one of --hyp or --boosted");
  LabeledSample s = load_sample_csv(p.data);
  double acc = 0.0;
  if (!p.hyp.empty()) {
    Hypothesis h = load_hypothesis_json(p.hyp);
    acc = accuracy(h, s);
  } else {
    BoostedHypothesis bh = load_boosted_json(p.boosted);
    acc = 1.0 - boosted_error(bh, s);
  }
  if (p.pretty) {
    std::cout << "accuracy " << format_double(acc) << " on " << s.size() << " points\n";
  } else {
    ordered_json row{{"command", "eval"},
                     {"hypothesis", p.hyp.empty() ? p.boosted : p.hyp},
                     {"data", p.data},
                     {"accuracy", acc},
                     {"points", s.size()}};
    std::cout << row.dump() << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// matrix
// ---------------------------------------------------------------------------

struct MatrixCmd {
  std::string config;
  std::string out;
  int threads = 0;  // 0: hardware concurrency
  std::uint64_t seed = 0;
};

struct MatrixCell {
  std::string learner = "weak2";  // weak2 | weakk | baseline
  int n = 8, k = 2, m = 4000;
  std::string mode = "and_of_k";
  DistFlags dist;
  LearnerParams lp;
};

MatrixCell cell_from_json(const nlohmann::json& j) {
  MatrixCell c;
  c.learner = j.value("learner", c.learner);
  c.n = j.value("n", c.n);
  c.k = j.value("k", c.k);
  c.m = j.value("m", c.m);
  c.mode = j.value("mode", c.mode);
  dist_from_json(j, c.dist);
  learner_from_json(j, c.lp);
  return c;
}

ordered_json run_matrix_task(const MatrixCell& cell, int cell_index, int seed_index,
                             std::uint64_t master_seed) {
  const auto t0 = Clock::now();
  ordered_json row;
  row["cell_index"] = cell_index;
  row["seed_index"] = seed_index;
  try {
    RngStream rng = RngStream::from_seed(master_seed)
                        .derive(static_cast<std::uint64_t>(cell_index))
                        .derive(static_cast<std::uint64_t>(seed_index));
    const std::uint64_t target_seed = rng.next_u64();
    const std::uint64_t sample_seed = rng.next_u64();
    const std::uint64_t learner_seed = rng.next_u64();
    row["seed"] = learner_seed;

    TargetFunction f =
        gen_target(cell.n, cell.k, target_mode_from_name(cell.mode), target_seed);
    RngStream dist_rng = RngStream::from_seed(sample_seed);
    DistributionDescriptor desc = build_descriptor(cell.dist, cell.n, dist_rng);
    LabeledSample s = gen_sample(desc, f, cell.m, dist_rng.next_u64());

    LearnerParams lp = cell.lp;
    lp.seed = learner_seed;
    if (cell.learner == "weak2") {
      Weak2Report rep = weak_learn_and2(s, lp);
      row["success"] = rep.success;
      row["advantage"] = rep.sample_advantage;
      row["accuracy"] = rep.success ? 0.5 + rep.sample_advantage : 0.0;
      row["iterations"] = rep.iterations_used;
    } else if (cell.learner == "weakk") {
      WeakKReport rep = weak_learn_anyk(s, cell.k, lp);
      row["success"] = rep.success;
      row["advantage"] = rep.sample_advantage;
      row["accuracy"] = rep.success ? 0.5 + rep.sample_advantage : 0.0;
      row["iterations"] = rep.iterations_used;
      row["completed_chains"] = rep.completed_chains;
      row["aborted_chains"] = rep.aborted_chains;
    } else if (cell.learner == "baseline") {
      std::optional<TargetFunction> g = brute_force_learn(s, cell.k);
      int correct = 0;
      if (g)
        for (int i = 0; i < s.size(); ++i)
          if (evaluate_target(*g, s.points[i]) == s.labels[i]) ++correct;
      row["success"] = g.has_value();
      row["accuracy"] = g ? static_cast<double>(correct) / s.size() : 0.0;
      row["advantage"] = g ? row["accuracy"].get<double>() - 0.5 : 0.0;
      row["iterations"] = 0;
    } else {
      throw std::invalid_argument("matrix: unknown learner " + cell.learner);
    }
  } catch (const std::exception& e) {
    row["success"] = false;
    row["error"] = e.what();
  }
  row["wall_ms"] = wall_ms_since(t0);
  return row;
}

int run_matrix(const MatrixCmd& p) {
  if (p.config.empty()) throw std::invalid_argument("matrix: --config is required");
  nlohmann::json cfg = load_json_file(p.config);
  std::vector<MatrixCell> cells;
  for (const auto& cj : cfg.at("cells")) cells.push_back(cell_from_json(cj));
  const int seeds_per_cell = cfg.value("seeds_per_cell", 1);
  if (seeds_per_cell < 0) throw std::invalid_argument("matrix: seeds_per_cell < 0");

  struct Task {
    int cell, seed;
  };
  std::vector<Task> tasks;
  for (int c = 0; c < static_cast<int>(cells.size()); ++c)
    for (int s = 0; s < seeds_per_cell; ++s) tasks.push_back({c, s});

  std::vector<ordered_json> results(tasks.size());
  int threads = p.threads > 0
                    ? p.threads
                    : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<int>(threads, std::max<std::size_t>(tasks.size(), 1));
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) break;
      results[i] = run_matrix_task(cells[tasks[i].cell], tasks[i].cell, tasks[i].seed,
                                   p.seed);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  // Rows in cell-index order followed by that cell's summary.
  std::vector<ordered_json> rows;
  ordered_json header;
  header["command"] = "matrix";
  header["run_config"] = ordered_json{{"config", p.config},
                                      {"out", p.out},
                                      {"threads", p.threads},
                                      {"seed", p.seed},
                                      {"cells", static_cast<int>(cells.size())},
                                      {"seeds_per_cell", seeds_per_cell}};
  rows.push_back(std::move(header));
  std::size_t idx = 0;
  for (int c = 0; c < static_cast<int>(cells.size()); ++c) {
    int successes = 0;
    double advantage_sum = 0.0;
    double wall_sum = 0.0;
    int counted = 0;
    for (int s = 0; s < seeds_per_cell; ++s, ++idx) {
      const ordered_json& row = results[idx];
      if (row.value("success", false)) {
        ++successes;
        advantage_sum += row.value("advantage", 0.0);
      }
      wall_sum += row.value("wall_ms", 0.0);
      ++counted;
      rows.push_back(row);
    }
    ordered_json summary;
    summary["cell_index"] = c;
    summary["summary"] = true;
    summary["runs"] = counted;
    summary["successes"] = successes;
    summary["success_rate"] =
        counted > 0 ? static_cast<double>(successes) / counted : 0.0;
    summary["mean_advantage_success"] =
        successes > 0 ? advantage_sum / successes : 0.0;
    summary["wall_ms_mean"] = counted > 0 ? wall_sum / counted : 0.0;
    rows.push_back(std::move(summary));
  }
  emit_rows(p.out, rows);
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

int cli_dispatch(int argc, char** argv) {
  CLI::App app{"Halfspace-learning laboratory: weak learners over filtered regions, "
               "whitening transforms, boosting, baselines, and Monte Carlo checks"};
  app.require_subcommand(1);
  int exit_code = 0;

  // gen --------------------------------------------------------------------
  GenCmd gen;
  std::string gen_config;
  auto* gen_cmd = app.add_subcommand("gen", "generate a labeled sample and target");
  gen_cmd->add_option("--n", gen.n, "ambient dimension");
  gen_cmd->add_option("--k", gen.k, "number of target halfspaces");
  gen_cmd->add_option("--m", gen.m, "sample size");
  gen_cmd->add_option("--mode", gen.mode, "random|and_of_k|parity_of_k|fixed");
  gen_cmd->add_option("--table", gen.table_csv, "fixed mode: comma-separated +/-1 table");
  gen_cmd->add_option("--target-in", gen.target_in, "reuse an existing target file");
  add_dist_flags(gen_cmd, gen.dist);
  auto* gen_seed = gen_cmd->add_option("--seed", gen.seed, "master seed");
  auto* gen_out = gen_cmd->add_option("--out", gen.out, "sample CSV path");
  gen_cmd->add_option("--target-out", gen.target_out, "target JSON path");
  gen_cmd->add_option("--config", gen_config, "replay a saved run_config JSON");
  gen_cmd->callback([&]() {
    std::optional<std::uint64_t> cfg_seed;
    if (auto cfg = load_replay_config(gen_config, "gen")) {
      std::string out_flag = gen.out;
      bool out_set = gen_out->count() > 0;
      gen_from_json(*cfg, gen);
      cfg_seed = gen.seed;
      if (out_set) gen.out = out_flag;
      else gen.out = cfg->value("out", gen.out);
      gen.target_out = cfg->value("target_out", gen.target_out);
    }
    gen.seed = resolve_seed(gen_seed, gen.seed, cfg_seed);
    exit_code = run_gen(gen);
  });

  // forsterize ---------------------------------------------------------------
  ForsterizeCmd fz;
  auto* fz_cmd = app.add_subcommand("forsterize", "whiten a sample to radial isotropy");
  fz_cmd->add_option("--data", fz.data, "sample CSV")->required();
  fz_cmd->add_option("--eps", fz.eps, "isotropy tolerance");
  fz_cmd->add_option("--out", fz.out, "report JSONL path");
  fz_cmd->add_option("--transformed-out", fz.transformed_out, "transformed CSV path");
  fz_cmd->callback([&]() { exit_code = run_forsterize(fz); });

  // weak2 --------------------------------------------------------------------
  LearnCmd w2;
  std::string w2_config;
  auto* w2_cmd = app.add_subcommand("weak2", "weak learner for two-halfspace intersections");
  w2_cmd->add_option("--data", w2.data, "sample CSV");
  add_learner_flags(w2_cmd, w2.lp);
  auto* w2_seed = w2_cmd->add_option("--seed", w2.seed, "master seed");
  w2_cmd->add_option("--out", w2.out, "hypothesis JSON path");
  w2_cmd->add_option("--report", w2.report, "report JSONL path");
  w2_cmd->add_option("--config", w2_config, "replay a saved run_config JSON");
  w2_cmd->callback([&]() {
    std::optional<std::uint64_t> cfg_seed;
    if (auto cfg = load_replay_config(w2_config, "weak2")) {
      learn_from_json(*cfg, w2, false);
      cfg_seed = w2.seed;
    }
    if (w2.data.empty()) throw CLI::ValidationError("weak2", "--data is required");
    w2.seed = resolve_seed(w2_seed, w2.seed, cfg_seed);
    exit_code = run_weak2(w2);
  });

  // weakk --------------------------------------------------------------------
  LearnCmd wk;
  std::string wk_config;
  auto* wk_cmd =
      app.add_subcommand("weakk", "weak learner for arbitrary functions of k halfspaces");
  wk_cmd->add_option("--data", wk.data, "sample CSV");
  wk_cmd->add_option("--k", wk.k, "number of halfspaces");
  add_learner_flags(wk_cmd, wk.lp);
  auto* wk_seed = wk_cmd->add_option("--seed", wk.seed, "master seed");
  wk_cmd->add_option("--out", wk.out, "hypothesis JSON path");
  wk_cmd->add_option("--report", wk.report, "report JSONL path");
  wk_cmd->add_option("--config", wk_config, "replay a saved run_config JSON");
  wk_cmd->callback([&]() {
    std::optional<std::uint64_t> cfg_seed;
    if (auto cfg = load_replay_config(wk_config, "weakk")) {
      learn_from_json(*cfg, wk, true);
      cfg_seed = wk.seed;
    }
    if (wk.data.empty()) throw CLI::ValidationError("weakk", "--data is required");
    wk.seed = resolve_seed(wk_seed, wk.seed, cfg_seed);
    exit_code = run_weakk(wk);
  });

  // boost --------------------------------------------------------------------
  BoostCmd bo;
  std::string bo_config;
  auto* bo_cmd = app.add_subcommand("boost", "boost a weak learner to target error");
  bo_cmd->add_option("--target", bo.target, "target JSON (the oracle's labeling)");
  add_dist_flags(bo_cmd, bo.dist);
  bo_cmd->add_option("--epsilon", bo.epsilon, "target error");
  bo_cmd->add_option("--delta", bo.delta, "failure probability");
  bo_cmd->add_option("--gamma", bo.gamma, "assumed weak advantage");
  bo_cmd->add_option("--learner", bo.learner, "weak2|weakk");
  bo_cmd->add_option("--k", bo.k, "weakk: number of halfspaces");
  add_boost_flags(bo_cmd, bo);
  add_learner_flags(bo_cmd, bo.lp);
  auto* bo_seed = bo_cmd->add_option("--seed", bo.seed, "master seed");
  bo_cmd->add_option("--out", bo.out, "boosted hypothesis JSON path");
  bo_cmd->add_option("--report", bo.report, "report JSONL path");
  bo_cmd->add_option("--config", bo_config, "replay a saved run_config JSON");
  bo_cmd->callback([&]() {
    std::optional<std::uint64_t> cfg_seed;
    if (auto cfg = load_replay_config(bo_config, "boost")) {
      boost_from_json(*cfg, bo);
      cfg_seed = bo.seed;
    }
    bo.seed = resolve_seed(bo_seed, bo.seed, cfg_seed);
    exit_code = run_boost(bo);
  });

  // baseline -----------------------------------------------------------------
  BaselineCmd bl;
  auto* bl_cmd = app.add_subcommand("baseline", "exhaustive consistent-function search");
  bl_cmd->add_option("--data", bl.data, "sample CSV")->required();
  bl_cmd->add_option("--k", bl.k, "max halfspaces (1 or 2)");
  bl_cmd->add_option("--out", bl.out, "found function JSON path");
  bl_cmd->add_option("--report", bl.report, "report JSONL path");
  bl_cmd->callback([&]() { exit_code = run_baseline(bl); });

  // lemmas -------------------------------------------------------------------
  LemmasCmd lm;
  auto* lm_cmd = app.add_subcommand("lemmas", "Monte Carlo lemma verification");
  lm_cmd->add_option("--which", lm.which,
                     "all|monotonicity|advantage_band|filtering|reverse_markov|planted_chain");
  lm_cmd->add_option("--trials", lm.trials, "override per-harness trial count");
  auto* lm_seed = lm_cmd->add_option("--seed", lm.seed, "master seed");
  lm_cmd->add_option("--out", lm.out, "report JSONL path");
  lm_cmd->add_option("--chain-n", lm.chain_n, "planted chain: dimension");
  lm_cmd->add_option("--chain-k", lm.chain_k, "planted chain: halfspaces");
  lm_cmd->add_option("--chain-m", lm.chain_m, "planted chain: sample size");
  lm_cmd->add_option("--chain-runs", lm.chain_runs, "planted chain: runs");
  lm_cmd->add_option("--filter-n", lm.filter_n, "filtering: dimension");
  lm_cmd->add_option("--filter-m", lm.filter_m, "filtering: set size");
  lm_cmd->callback([&]() {
    lm.seed = resolve_seed(lm_seed, lm.seed, std::nullopt);
    exit_code = run_lemmas(lm);
  });

  // eval ---------------------------------------------------------------------
  EvalCmd ev;
  auto* ev_cmd = app.add_subcommand("eval", "score a stored hypothesis on a sample");
  ev_cmd->add_option("--hyp", ev.hyp, "hypothesis JSON");
  ev_cmd->add_option("--boosted", ev.boosted, "boosted hypothesis JSON");
  ev_cmd->add_option("--data", ev.data, "sample CSV")->required();
  ev_cmd->add_flag("--pretty", ev.pretty, "human-readable output");
  ev_cmd->callback([&]() { exit_code = run_eval(ev); });

  // matrix -------------------------------------------------------------------
  MatrixCmd mx;
  auto* mx_cmd = app.add_subcommand("matrix", "run an experiment grid");
  mx_cmd->add_option("--config", mx.config, "matrix config JSON")->required();
  mx_cmd->add_option("--out", mx.out, "results JSONL path");
  mx_cmd->add_option("--threads", mx.threads, "worker threads (0: all cores)");
  auto* mx_seed = mx_cmd->add_option("--seed", mx.seed, "master seed");
  mx_cmd->callback([&]() {
    mx.seed = resolve_seed(mx_seed, mx.seed, std::nullopt);
    exit_code = run_matrix(mx);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const NonConvergence& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 3;
  } catch (const DegenerateProjection& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 3;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return exit_code;
}

}  // namespace hslab

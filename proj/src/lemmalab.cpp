#include "hslab/lemmalab.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hslab/filtering.hpp"
#include "hslab/forster.hpp"
#include "hslab/numerics.hpp"

namespace hslab {

std::string aggregate_verdict(const std::vector<LemmaCell>& cells) {
  bool any_fail = false, any_inconclusive = false;
  for (const LemmaCell& c : cells) {
    if (c.verdict == "fail") any_fail = true;
    if (c.verdict == "inconclusive") any_inconclusive = true;
  }
  if (any_fail) return "fail";
  if (any_inconclusive) return "inconclusive";
  return cells.empty() ? "inconclusive" : "pass";
}

nlohmann::ordered_json lemma_cell_row(const LemmaReport& r, const LemmaCell& c,
                                      std::uint64_t seed) {
  nlohmann::ordered_json row;
  row["lemma_id"] = r.lemma_id;
  row["seed"] = seed;
  row["params"] = c.params;
  row["estimate"] = c.estimate;
  row["ci_low"] = c.ci_low;
  row["ci_high"] = c.ci_high;
  row["band"] = c.band;
  row["verdict"] = c.verdict;
  return row;
}

namespace {

// Unit point at prescribed inner product with e1, tilted into the shared e2
// direction so equal margins give the identical point.
Vec point_at_margin(int n, double margin) {
  if (margin < -1.0 || margin > 1.0)
    throw std::invalid_argument("point_at_margin: margin outside [-1,1]");
  Vec x(n, 0.0);
  x[0] = margin;
  x[1] = std::sqrt(std::max(0.0, 1.0 - margin * margin));
  return x;
}

}  // namespace

LemmaReport verify_monotonicity(const MonotonicityConfig& cfg) {
  LemmaReport report;
  report.lemma_id = "advantage_monotonicity";
  RngStream root = RngStream::from_seed(cfg.seed);
  std::uint64_t cell_index = 0;
  for (int n : cfg.ns) {
    if (n < 2) throw std::invalid_argument("verify_monotonicity: n must be >= 2");
    Vec w(n, 0.0);
    w[0] = 1.0;
    for (double beta : cfg.betas) {
      double alpha = std::min(10.0 * beta, cfg.alpha_cap);
      for (double v : cfg.margins) {
        for (double v_ref : cfg.margins) {
          if (v < v_ref) continue;  // lemma precondition: w.x >= w.x_ref
          LemmaCell cell;
          cell.params = {{"n", n},        {"beta", beta}, {"alpha", alpha},
                         {"wx", v},       {"wx_ref", v_ref},
                         {"trials", cfg.trials}};
          Vec x = point_at_margin(n, v);
          Vec x_ref = point_at_margin(n, v_ref);
          RngStream rng = root.derive(cell_index++);
          AdvantageEstimate est =
              estimate_advantage(x, x_ref, w, alpha, beta, cfg.trials, rng);
          cell.estimate = est.ratio;
          cell.ci_low = est.ci_low;
          cell.ci_high = est.ci_high;
          cell.band = {{"ci_low_at_least", 1.0 - cfg.slack}};
          if (cfg.trials <= 0)
            cell.verdict = "inconclusive";
          else
            cell.verdict = est.ci_low >= 1.0 - cfg.slack ? "pass" : "fail";
          report.cells.push_back(std::move(cell));
        }
      }
    }
  }
  report.verdict = aggregate_verdict(report.cells);
  return report;
}

LemmaReport verify_advantage_band(const AdvantageBandConfig& cfg) {
  LemmaReport report;
  report.lemma_id = "advantage_growth_band";
  const int n = cfg.n;
  if (n < 2) throw std::invalid_argument("verify_advantage_band: n must be >= 2");
  const double beta = cfg.beta;
  const double alpha = std::min(10.0 * beta, cfg.alpha_cap);
  Vec w(n, 0.0);
  w[0] = 1.0;
  Vec x_ref = point_at_margin(n, 0.0);

  if (cfg.margins.size() < 2) {
    LemmaCell cell;
    cell.params = {{"n", n}, {"beta", beta}, {"alpha", alpha},
                   {"margins", cfg.margins}};
    cell.band = {{"reason", "need at least two margins for a trend"}};
    cell.verdict = "inconclusive";
    report.cells.push_back(std::move(cell));
    report.verdict = aggregate_verdict(report.cells);
    return report;
  }

  RngStream root = RngStream::from_seed(cfg.seed);
  struct CellStat {
    double margin, log_ratio, log_lo, log_hi, x_arg;
    long long denom_hits;
  };
  std::vector<CellStat> stats;
  for (std::size_t i = 0; i < cfg.margins.size(); ++i) {
    double v = cfg.margins[i];
    Vec x = point_at_margin(n, v);
    RngStream rng = root.derive(static_cast<std::uint64_t>(i));
    AdvantageEstimate est = estimate_advantage(x, x_ref, w, alpha, beta, cfg.trials, rng);
    if (est.degenerate || est.ratio <= 0.0 || est.ci_low <= 0.0) {
      LemmaCell cell;
      cell.params = {{"n", n}, {"beta", beta}, {"alpha", alpha}, {"wx", v}};
      cell.estimate = est.ratio;
      cell.ci_low = est.ci_low;
      cell.ci_high = est.ci_high;
      cell.band = {{"reason", "degenerate cell; no trend computable"}};
      cell.verdict = "inconclusive";
      report.cells.push_back(std::move(cell));
      report.verdict = aggregate_verdict(report.cells);
      return report;
    }
    stats.push_back({v, std::log(est.ratio), std::log(est.ci_low),
                     std::log(est.ci_high), n * alpha * beta * v, est.denominator_hits});

    LemmaCell cell;
    cell.params = {{"n", n}, {"beta", beta}, {"alpha", alpha}, {"wx", v},
                   {"trials", cfg.trials}};
    cell.estimate = est.ratio;
    cell.ci_low = est.ci_low;
    cell.ci_high = est.ci_high;
    cell.band = {{"log_growth_arg", n * alpha * beta * v}};
    cell.verdict = "pass";  // per-cell judgments happen on the trend below
    report.cells.push_back(std::move(cell));
  }

  // Trend checks: strict increase with disjoint intervals, slope band, and
  // the reference point's raw hit rate against the plain Gaussian tail.
  bool increasing = true, disjoint = true;
  for (std::size_t i = 1; i < stats.size(); ++i) {
    if (!(stats[i].log_ratio > stats[i - 1].log_ratio)) increasing = false;
    if (!(stats[i].log_lo > stats[i - 1].log_hi)) disjoint = false;
  }
  // Least squares of log_ratio against x_arg.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double cells_n = static_cast<double>(stats.size());
  for (const CellStat& s : stats) {
    sx += s.x_arg;
    sy += s.log_ratio;
    sxx += s.x_arg * s.x_arg;
    sxy += s.x_arg * s.log_ratio;
  }
  const double denom = cells_n * sxx - sx * sx;
  const double slope = denom != 0.0 ? (cells_n * sxy - sx * sy) / denom : 0.0;
  const bool slope_ok = slope >= cfg.slope_lo && slope <= cfg.slope_hi;

  LemmaCell trend;
  trend.params = {{"n", n}, {"beta", beta}, {"alpha", alpha}, {"kind", "trend"}};
  trend.estimate = slope;
  trend.ci_low = slope;
  trend.ci_high = slope;
  trend.band = {{"slope_lo", cfg.slope_lo},
                {"slope_hi", cfg.slope_hi},
                {"increasing", increasing},
                {"disjoint_cis", disjoint}};
  trend.verdict = (increasing && disjoint && slope_ok) ? "pass" : "fail";
  report.cells.push_back(trend);

  // Reference hit rate: w.x_ref = 0 makes g.x_ref independent of the lucky
  // conditioning, so the hit rate is the plain tail at beta*sqrt(n).
  {
    const double p_pred = gaussian_upper_tail(predicted_tail_param(0.0, beta, 0.0, n));
    const double p_obs =
        static_cast<double>(stats.front().denom_hits) / static_cast<double>(cfg.trials);
    const double sigma = std::sqrt(std::max(1e-300, p_pred * (1.0 - p_pred) /
                                                        static_cast<double>(cfg.trials)));
    LemmaCell ref;
    ref.params = {{"n", n}, {"beta", beta}, {"alpha", alpha}, {"kind", "reference_tail"}};
    ref.estimate = p_obs;
    ref.ci_low = p_obs - 3.0 * sigma;
    ref.ci_high = p_obs + 3.0 * sigma;
    ref.band = {{"predicted", p_pred}, {"tolerance_sigmas", 3.0}};
    ref.verdict = std::abs(p_obs - p_pred) <= 3.0 * sigma ? "pass" : "fail";
    report.cells.push_back(ref);
  }

  report.verdict = aggregate_verdict(report.cells);
  return report;
}

LemmaReport verify_filtering_simple(const std::vector<Vec>& points, const Vec& w,
                                    const FilteringConfig& cfg) {
  LemmaReport report;
  report.lemma_id = "filtering_events";
  if (points.empty()) throw std::invalid_argument("verify_filtering_simple: empty set");
  const int n = static_cast<int>(w.size());
  const double tau = 1.0 / (2.0 * std::sqrt(static_cast<double>(n)));
  const double margin_need = 1.0 / (4.0 * n);
  if (margin_fraction(points, w, tau) < margin_need)
    throw std::invalid_argument("verify_filtering_simple: margin precondition violated");

  const double purity =
      cfg.purity_factor >= 0.0
          ? cfg.purity_factor
          : 16.0 / std::pow(static_cast<double>(n), 4.0 / 3.0);
  const double floor_frac =
      cfg.size_floor >= 0.0
          ? cfg.size_floor
          : std::exp2(-2.0 * std::sqrt(static_cast<double>(n)) *
                      std::log(static_cast<double>(n)));
  const double beta = std::sqrt(log_floor(n, 2.0)) /
                      std::pow(static_cast<double>(n), 0.25);

  long long event1 = 0, event2 = 0;
  RngStream rng = RngStream::from_seed(cfg.seed);
  const double m_total = static_cast<double>(points.size());
  for (long long t = 0; t < cfg.trials; ++t) {
    Vec g = gaussian_vector(n, 1.0 / n, rng);
    long long plus = 0, plus_wrong = 0, minus = 0, minus_wrong = 0;
    for (const Vec& x : points) {
      double gv = dot(g, x);
      int label = sign(dot(w, x));
      if (gv >= beta) {
        ++plus;
        if (label == -1) ++plus_wrong;
      }
      if (gv <= -beta) {
        ++minus;
        if (label == +1) ++minus_wrong;
      }
    }
    if (plus >= floor_frac * m_total && plus_wrong <= purity * plus) ++event1;
    if (minus >= floor_frac * m_total && minus_wrong <= purity * minus) ++event2;
  }

  auto make_cell = [&](const char* name, long long hits) {
    LemmaCell cell;
    cell.params = {{"n", n},
                   {"event", name},
                   {"beta", beta},
                   {"purity_factor", purity},
                   {"size_floor", floor_frac},
                   {"trials", cfg.trials}};
    WilsonInterval wi = wilson_interval(hits, cfg.trials);
    cell.estimate = cfg.trials > 0 ? static_cast<double>(hits) / cfg.trials : 0.0;
    cell.ci_low = wi.lo;
    cell.ci_high = wi.hi;
    cell.band = {{"reported_only", true}};
    cell.verdict = cfg.trials > 0 ? "pass" : "inconclusive";
    return cell;
  };
  report.cells.push_back(make_cell("positive_side", event1));
  report.cells.push_back(make_cell("negative_side", event2));
  report.verdict = aggregate_verdict(report.cells);
  return report;
}

LemmaReport verify_reverse_markov(long long trials, std::uint64_t seed) {
  LemmaReport report;
  report.lemma_id = "reverse_markov";
  RngStream rng = RngStream::from_seed(seed);
  long long violations = 0;
  double worst_gap = 1.0;  // min over trials of Pr[z >= ku/2] - k/2
  for (long long t = 0; t < trials; ++t) {
    // Random atom distribution on [0, u].
    const int atoms = 2 + static_cast<int>(rng.next_below(6));
    const double u = 0.1 + rng.next_unit() * 10.0;
    std::vector<double> value(atoms), prob(atoms);
    double z = 0.0;
    for (int a = 0; a < atoms; ++a) {
      value[a] = rng.next_unit() * u;
      prob[a] = rng.next_unit() + 1e-9;
      z += prob[a];
    }
    double mean = 0.0;
    for (int a = 0; a < atoms; ++a) {
      prob[a] /= z;
      mean += prob[a] * value[a];
    }
    const double kappa = mean / u;  // E[z] = kappa*u exactly
    if (kappa <= 0.0) continue;
    double tail = 0.0;
    for (int a = 0; a < atoms; ++a)
      if (value[a] >= kappa * u / 2.0) tail += prob[a];
    worst_gap = std::min(worst_gap, tail - kappa / 2.0);
    if (tail < kappa / 2.0 - 1e-12) ++violations;
  }
  LemmaCell cell;
  cell.params = {{"trials", trials}};
  cell.estimate = static_cast<double>(violations);
  cell.ci_low = worst_gap;
  cell.ci_high = worst_gap;
  cell.band = {{"violations_allowed", 0}, {"worst_gap", worst_gap}};
  cell.verdict = trials <= 0 ? "inconclusive" : (violations == 0 ? "pass" : "fail");
  report.cells.push_back(std::move(cell));
  report.verdict = aggregate_verdict(report.cells);
  return report;
}

PlantedChainSummary audit_planted_chains(const PlantedChainConfig& cfg) {
  if (cfg.runs < 1) throw std::invalid_argument("audit_planted_chains: runs must be >= 1");
  PlantedChainSummary sum;
  sum.runs = cfg.runs;
  const double big_l = log_floor(cfg.n, cfg.learner.log_base_floor);
  RngStream root = RngStream::from_seed(cfg.seed);
  for (int r = 0; r < cfg.runs; ++r) {
    RngStream run_rng = root.derive(static_cast<std::uint64_t>(r));
    const std::uint64_t target_seed = run_rng.next_u64();
    const std::uint64_t sample_seed = run_rng.next_u64();
    const std::uint64_t chain_seed = run_rng.next_u64();
    TargetFunction f = gen_target(cfg.n, cfg.k, cfg.mode, target_seed);
    DistributionDescriptor dist;
    dist.kind = DistributionDescriptor::Kind::kUniformSphere;
    dist.n = cfg.n;
    LabeledSample s = gen_sample(dist, f, cfg.m, sample_seed);
    LearnerParams lp = cfg.learner;
    lp.seed = chain_seed;
    PlantedRunTrace trace = run_planted_chain(s, f, lp, cfg.fine);
    if (trace.completed) ++sum.completed;
    if (trace.aborted) ++sum.aborted;

    std::vector<std::vector<int>> u_history;
    for (const PlantedStepRecord& step : trace.steps) {
      ++sum.steps_total;
      u_history.push_back(step.u_after);
      if (!leaderboard_shape_ok(step.u_after)) ++sum.shape_violations;
      int nnz = 0;
      for (int v : step.u_after)
        if (v != 0) ++nnz;
      for (int j = 1; j < nnz; ++j)
        if (static_cast<int>(step.qual.size()) > j && step.qual[j] > step.qual[j - 1])
          ++sum.qual_order_violations;
      if (step.fine1) ++sum.fine1_true;
      if (step.fine2) ++sum.fine2_true;
      if (step.fine3) ++sum.fine3_true;
    }
    if (!update_counts_within_bounds(u_history, cfg.k, big_l))
      ++sum.update_bound_violations;
    if (trace.completed && !trace.steps.empty() &&
        !trace.steps.back().imp.empty())
      sum.final_impurities.push_back(trace.steps.back().imp.front());
  }
  return sum;
}

LemmaReport verify_planted_chain(const PlantedChainConfig& cfg) {
  PlantedChainSummary sum = audit_planted_chains(cfg);
  LemmaReport report;
  report.lemma_id = "planted_chain_structure";

  auto structural_cell = [&](const char* name, long long count) {
    LemmaCell cell;
    cell.params = {{"n", cfg.n}, {"k", cfg.k}, {"m", cfg.m},
                   {"runs", cfg.runs}, {"check", name}};
    cell.estimate = static_cast<double>(count);
    cell.ci_low = cell.estimate;
    cell.ci_high = cell.estimate;
    cell.band = {{"violations_allowed", 0}};
    cell.verdict = count == 0 ? "pass" : "fail";
    return cell;
  };
  report.cells.push_back(structural_cell("leaderboard_shape", sum.shape_violations));
  report.cells.push_back(structural_cell("quality_ordering", sum.qual_order_violations));
  report.cells.push_back(structural_cell("update_count_bounds", sum.update_bound_violations));

  LemmaCell rates;
  rates.params = {{"n", cfg.n}, {"k", cfg.k}, {"m", cfg.m},
                  {"runs", cfg.runs}, {"check", "fine_filter_rates"}};
  rates.estimate =
      sum.steps_total > 0
          ? static_cast<double>(sum.fine1_true) / static_cast<double>(sum.steps_total)
          : 0.0;
  WilsonInterval wi = wilson_interval(sum.fine1_true, sum.steps_total);
  rates.ci_low = wi.lo;
  rates.ci_high = wi.hi;
  rates.band = {
      {"reported_only", true},
      {"fine2_rate", sum.steps_total > 0 ? static_cast<double>(sum.fine2_true) /
                                               static_cast<double>(sum.steps_total)
                                         : 0.0},
      {"fine3_rate", sum.steps_total > 0 ? static_cast<double>(sum.fine3_true) /
                                               static_cast<double>(sum.steps_total)
                                         : 0.0},
      {"completed", sum.completed},
      {"aborted", sum.aborted}};
  rates.verdict = sum.steps_total > 0 ? "pass" : "inconclusive";
  report.cells.push_back(std::move(rates));

  report.verdict = aggregate_verdict(report.cells);
  return report;
}

}  // namespace hslab

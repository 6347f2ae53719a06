#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hslab/cli.hpp"
#include "hslab/data.hpp"
#include "oracles.hpp"

using namespace hslab;

namespace {

int run_cli(std::vector<std::string> args, std::string* captured = nullptr) {
  args.insert(args.begin(), "hslab");
  std::vector<char*> argv;
  argv.reserve(args.size());
  for (std::string& a : args) argv.push_back(a.data());
  std::ostringstream cap;
  std::streambuf* old = std::cout.rdbuf(cap.rdbuf());
  int rc = -1;
  try {
    rc = cli_dispatch(static_cast<int>(argv.size()), argv.data());
  } catch (...) {
    std::cout.rdbuf(old);
    throw;
  }
  std::cout.rdbuf(old);
  if (captured) *captured = cap.str();
  return rc;
}

std::vector<nlohmann::json> parse_rows(const std::string& text) {
  std::vector<nlohmann::json> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(nlohmann::json::parse(line));
  return rows;
}

// Drop every key containing "wall_ms" so byte comparisons see only the
// deterministic payload.
nlohmann::json strip_volatile(const nlohmann::json& j) {
  if (j.is_object()) {
    nlohmann::json out = nlohmann::json::object();
    for (auto it = j.begin(); it != j.end(); ++it)
      if (it.key().find("wall_ms") == std::string::npos)
        out[it.key()] = strip_volatile(it.value());
    return out;
  }
  if (j.is_array()) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& v : j) out.push_back(strip_volatile(v));
    return out;
  }
  return j;
}

std::string normalized_rows(const std::string& text) {
  std::string out;
  for (const nlohmann::json& r : parse_rows(text)) out += strip_volatile(r).dump() + "\n";
  return out;
}

DistributionDescriptor uniform(int n) {
  DistributionDescriptor d;
  d.kind = DistributionDescriptor::Kind::kUniformSphere;
  d.n = n;
  return d;
}

struct EnvGuard {
  EnvGuard() { unsetenv("RNG_MASTER_SEED"); }
  ~EnvGuard() { unsetenv("RNG_MASTER_SEED"); }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("gen writes a loadable sample and target") {
  oracles::TempDir td;
  std::string sample = td.file("s.csv");
  std::string target = td.file("t.json");
  std::string out;
  int rc = run_cli({"gen", "--n", "3", "--k", "1", "--m", "30", "--seed", "5", "--out",
                    sample, "--target-out", target},
                   &out);
  CHECK(rc == 0);
  auto rows = parse_rows(out);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].at("command") == "gen");
  CHECK(rows[0].at("points") == 30);
  CHECK(rows[0].at("run_config").at("seed") == 5);

  LabeledSample s = load_sample_csv(sample);
  TargetFunction f = load_target_json(target);
  REQUIRE(s.size() == 30);
  for (int i = 0; i < s.size(); ++i)
    CHECK(s.labels[i] == evaluate_target(f, s.points[i]));

  // Fixed-table mode round-trips the table through the flag parser.
  std::string s2 = td.file("s2.csv");
  std::string t2 = td.file("t2.json");
  rc = run_cli({"gen", "--n", "4", "--k", "1", "--m", "20", "--mode", "fixed", "--table",
                "-1,1", "--seed", "6", "--out", s2, "--target-out", t2});
  CHECK(rc == 0);
  CHECK(load_target_json(t2).table == std::vector<int>{-1, +1});

  // Reusing a target with the wrong dimension is a usage error.
  rc = run_cli({"gen", "--n", "7", "--m", "10", "--target-in", target, "--out",
                td.file("s3.csv")});
  CHECK(rc == 2);
}

TEST_CASE("gen is deterministic and honors RNG_MASTER_SEED") {
  EnvGuard guard;
  oracles::TempDir td;
  std::string a = td.file("a.csv");
  std::string b = td.file("b.csv");
  std::string c = td.file("c.csv");

  CHECK(run_cli({"gen", "--n", "3", "--k", "1", "--m", "20", "--seed", "777", "--out", a}) ==
        0);
  setenv("RNG_MASTER_SEED", "777", 1);
  CHECK(run_cli({"gen", "--n", "3", "--k", "1", "--m", "20", "--out", b}) == 0);
  CHECK(read_text_file(a) == read_text_file(b));

  // An explicit flag outranks the environment.
  CHECK(run_cli({"gen", "--n", "3", "--k", "1", "--m", "20", "--seed", "5", "--out", c}) ==
        0);
  CHECK(read_text_file(a) != read_text_file(c));

  setenv("RNG_MASTER_SEED", "not-a-number", 1);
  CHECK(run_cli({"gen", "--n", "3", "--k", "1", "--m", "20", "--out", td.file("d.csv")}) ==
        2);
}

TEST_CASE("forsterize reports isotropy and writes transformed points") {
  oracles::TempDir td;
  TargetFunction f = gen_target(3, 1, TargetMode::kRandom, 2);
  LabeledSample s = gen_sample(uniform(3), f, 60, 3);
  std::string data = td.file("s.csv");
  save_sample_csv(s, data);

  std::string report = td.file("rep.jsonl");
  std::string tcsv = td.file("t.csv");
  std::string out;
  int rc = run_cli({"forsterize", "--data", data, "--out", report, "--transformed-out",
                    tcsv},
                   &out);
  CHECK(rc == 0);
  auto rows = parse_rows(read_text_file(report));
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].at("command") == "forsterize");
  CHECK(rows[0].at("isotropic") == true);
  CHECK(rows[0].at("kept").get<int>() >= 1);
  LabeledSample t = load_sample_csv(tcsv);
  CHECK(t.n == rows[0].at("dim").get<int>());
  CHECK(t.size() == rows[0].at("kept").get<int>());

  CHECK(run_cli({"forsterize", "--data", td.file("missing.csv")}) == 2);
  CHECK(run_cli({"forsterize"}) == 2);  // --data is required
}

TEST_CASE("weak2 runs end to end with reports, replay, and honest failure") {
  oracles::TempDir td;
  TargetFunction f = gen_target(8, 2, TargetMode::kAndOfK, 11);
  LabeledSample s = gen_sample(uniform(8), f, 1200, 12);
  std::string data = td.file("s.csv");
  save_sample_csv(s, data);

  int success_seed = -1;
  nlohmann::json success_row;
  std::string success_hyp;
  for (int seed = 1; seed <= 3 && success_seed < 0; ++seed) {
    std::string hyp = td.file("h" + std::to_string(seed) + ".json");
    std::string report = td.file("r" + std::to_string(seed) + ".jsonl");
    std::string out;
    int rc = run_cli({"weak2", "--data", data, "--seed", std::to_string(seed),
                      "--gamma-desk", "0.01", "--guess-budget", "4000", "--out", hyp,
                      "--report", report},
                     &out);
    auto rows = parse_rows(out);
    REQUIRE(rows.size() == 1);
    const nlohmann::json& row = rows[0];
    CHECK(row.at("command") == "weak2");
    CHECK(row.at("success").get<bool>() == (rc == 0));
    CHECK(normalized_rows(read_text_file(report)) == normalized_rows(out));
    if (rc == 0) {
      success_seed = seed;
      success_row = row;
      success_hyp = hyp;
    }
  }
  REQUIRE(success_seed >= 1);  // the learner finds this planted intersection

  // The stored hypothesis scores exactly what the report claimed.
  std::string eval_out;
  CHECK(run_cli({"eval", "--hyp", success_hyp, "--data", data}, &eval_out) == 0);
  auto eval_rows = parse_rows(eval_out);
  REQUIRE(eval_rows.size() == 1);
  CHECK(eval_rows[0].at("accuracy").get<double>() ==
        doctest::Approx(0.5 + success_row.at("sample_advantage").get<double>())
            .epsilon(1e-12));

  // Same seed, fresh output paths: identical payload and hypothesis bytes.
  {
    std::string hyp2 = td.file("h_replay_flags.json");
    std::string out2;
    int rc = run_cli({"weak2", "--data", data, "--seed", std::to_string(success_seed),
                      "--gamma-desk", "0.01", "--guess-budget", "4000", "--out", hyp2},
                     &out2);
    CHECK(rc == 0);
    nlohmann::json row2 = parse_rows(out2)[0];
    nlohmann::json a = strip_volatile(success_row);
    nlohmann::json b = strip_volatile(row2);
    a.erase("run_config");
    b.erase("run_config");
    CHECK(a.dump() == b.dump());
    CHECK(read_text_file(hyp2) == read_text_file(success_hyp));
  }

  // Replay from the stored run_config alone.
  {
    nlohmann::json cfg;
    cfg["command"] = "weak2";
    cfg["params"] = success_row.at("run_config");
    std::string cfg_path = td.file("replay.json");
    write_text_file(cfg_path, cfg.dump());
    std::string hyp3 = td.file("h_replay_cfg.json");
    std::string out3;
    int rc = run_cli({"weak2", "--config", cfg_path, "--out", hyp3}, &out3);
    CHECK(rc == 0);
    CHECK(read_text_file(hyp3) == read_text_file(success_hyp));
    // A config for another command is rejected.
    nlohmann::json wrong = cfg;
    wrong["command"] = "weakk";
    std::string wrong_path = td.file("wrong.json");
    write_text_file(wrong_path, wrong.dump());
    CHECK(run_cli({"weak2", "--config", wrong_path}) == 2);
  }

  // An unreachable advantage fails honestly: exit 1, no hypothesis file.
  {
    const std::vector<int> tab = {-1, +1};
    TargetFunction single = gen_target(6, 1, TargetMode::kFixed, 3, &tab);
    LabeledSample hard = gen_sample(uniform(6), single, 200, 4);
    std::string hard_csv = td.file("hard.csv");
    save_sample_csv(hard, hard_csv);
    std::string hyp = td.file("h_fail.json");
    std::string out;
    int rc = run_cli({"weak2", "--data", hard_csv, "--seed", "1", "--gamma-desk", "0.45",
                      "--guess-budget", "50", "--out", hyp},
                     &out);
    CHECK(rc == 1);
    nlohmann::json row = parse_rows(out)[0];
    CHECK(row.at("success") == false);
    CHECK(row.at("iterations_used") == 50);
    CHECK(!std::filesystem::exists(hyp));
  }

  CHECK(run_cli({"weak2", "--data", td.file("absent.csv")}) == 2);
  CHECK(run_cli({"weak2"}) == 2);  // no data and no config
}

TEST_CASE("weakk subcommand is consistent with its report") {
  oracles::TempDir td;
  TargetFunction f = gen_target(9, 2, TargetMode::kAndOfK, 13);
  LabeledSample s = gen_sample(uniform(9), f, 500, 14);
  std::string data = td.file("s.csv");
  save_sample_csv(s, data);
  std::string hyp = td.file("h.json");
  std::string out;
  int rc = run_cli({"weakk", "--data", data, "--k", "2", "--seed", "31337",
                    "--gamma-desk", "0.005", "--guess-budget", "800", "--out", hyp},
                   &out);
  nlohmann::json row = parse_rows(out)[0];
  CHECK(row.at("command") == "weakk");
  CHECK(row.at("success").get<bool>() == (rc == 0));
  CHECK(row.at("run_config").at("k") == 2);
  if (rc == 0) {
    Hypothesis h = load_hypothesis_json(hyp);
    CHECK(accuracy(h, s) ==
          doctest::Approx(0.5 + row.at("sample_advantage").get<double>()).epsilon(1e-12));
  } else {
    CHECK(!std::filesystem::exists(hyp));
  }
}

TEST_CASE("baseline finds planted functions and rejects unrealizable data") {
  oracles::TempDir td;
  TargetFunction f = gen_target(2, 1, TargetMode::kRandom, 17);
  LabeledSample s = gen_sample(uniform(2), f, 25, 18);
  std::string data = td.file("s.csv");
  save_sample_csv(s, data);
  std::string found = td.file("found.json");
  std::string out;
  int rc = run_cli({"baseline", "--data", data, "--k", "1", "--out", found}, &out);
  CHECK(rc == 0);
  nlohmann::json row = parse_rows(out)[0];
  CHECK(row.at("success") == true);
  CHECK(row.at("accuracy") == 1.0);
  TargetFunction g = load_target_json(found);
  for (int i = 0; i < s.size(); ++i)
    CHECK(evaluate_target(g, s.points[i]) == s.labels[i]);

  // Alternating labels around the circle defeat every single halfspace.
  LabeledSample xor_like;
  xor_like.n = 2;
  const double r = 0.7071067811865476;
  xor_like.points = {{r, r}, {-r, r}, {-r, -r}, {r, -r}};
  xor_like.labels = {+1, -1, +1, -1};
  std::string xdata = td.file("xor.csv");
  save_sample_csv(xor_like, xdata);
  std::string xout;
  rc = run_cli({"baseline", "--data", xdata, "--k", "1", "--out", td.file("nf.json")},
               &xout);
  CHECK(rc == 1);
  CHECK(parse_rows(xout)[0].at("success") == false);
}

TEST_CASE("lemmas subcommand emits per-cell rows and an aggregate verdict") {
  oracles::TempDir td;
  std::string report = td.file("lm.jsonl");
  std::string out;
  int rc = run_cli({"lemmas", "--which", "reverse_markov", "--trials", "2000", "--seed",
                    "4", "--out", report},
                   &out);
  CHECK(rc == 0);
  auto rows = parse_rows(read_text_file(report));
  REQUIRE(rows.size() >= 2);
  bool found_aggregate = false;
  for (const nlohmann::json& row : rows)
    if (row.value("aggregate", false)) {
      found_aggregate = true;
      CHECK(row.at("verdict") == "pass");
    }
  CHECK(found_aggregate);

  CHECK(run_cli({"lemmas", "--which", "bogus"}) == 2);
}

TEST_CASE("eval validates its hypothesis flags") {
  oracles::TempDir td;
  TargetFunction f = gen_target(2, 1, TargetMode::kRandom, 19);
  LabeledSample s = gen_sample(uniform(2), f, 10, 20);
  std::string data = td.file("s.csv");
  save_sample_csv(s, data);
  std::string hyp = td.file("h.json");
  save_hypothesis_json(Hypothesis::constant(+1), hyp);

  CHECK(run_cli({"eval", "--data", data}) == 2);  // neither flag
  std::string bst = td.file("b.json");
  write_text_file(bst, "{}");
  CHECK(run_cli({"eval", "--hyp", hyp, "--boosted", bst, "--data", data}) == 2);  // both

  std::string out;
  CHECK(run_cli({"eval", "--hyp", hyp, "--data", data}, &out) == 0);
  nlohmann::json row = parse_rows(out)[0];
  CHECK(row.at("points") == 10);
  CHECK(row.at("accuracy").get<double>() >= 0.0);

  std::string pretty;
  CHECK(run_cli({"eval", "--hyp", hyp, "--data", data, "--pretty"}, &pretty) == 0);
  CHECK(pretty.rfind("accuracy ", 0) == 0);
}

TEST_CASE("matrix runs a grid deterministically across threads") {
  oracles::TempDir td;
  nlohmann::json cfg;
  cfg["cells"] = nlohmann::json::array(
      {nlohmann::json{{"learner", "baseline"}, {"n", 2}, {"k", 1}, {"m", 15}}});
  cfg["seeds_per_cell"] = 2;
  std::string cfg_path = td.file("grid.json");
  write_text_file(cfg_path, cfg.dump());

  std::string out1 = td.file("m1.jsonl");
  std::string out2 = td.file("m2.jsonl");
  std::string cap;
  int rc = run_cli({"matrix", "--config", cfg_path, "--out", out1, "--threads", "2",
                    "--seed", "9"},
                   &cap);
  CHECK(rc == 0);
  auto rows = parse_rows(read_text_file(out1));
  REQUIRE(rows.size() == 4);  // header, two runs, one summary
  CHECK(rows[0].at("command") == "matrix");
  CHECK(rows[3].value("summary", false));
  CHECK(rows[3].at("runs") == 2);
  CHECK(rows[3].at("successes") == 2);  // planted halfspaces are realizable

  rc = run_cli({"matrix", "--config", cfg_path, "--out", out2, "--threads", "1", "--seed",
                "9"});
  CHECK(rc == 0);
  // The header row embeds the run configuration (output path, thread count),
  // which legitimately differs between the two invocations; determinism is a
  // claim about the per-run and summary rows.
  auto data_rows = [](const std::string& text) {
    std::string out;
    auto rows = parse_rows(text);
    for (std::size_t i = 1; i < rows.size(); ++i)
      out += strip_volatile(rows[i]).dump() + "\n";
    return out;
  };
  CHECK(data_rows(read_text_file(out1)) == data_rows(read_text_file(out2)));

  CHECK(run_cli({"matrix", "--config", td.file("absent.json")}) == 2);
}

TEST_CASE("top-level dispatch exit codes") {
  CHECK(run_cli({"--help"}) == 0);
  CHECK(run_cli({"definitely-not-a-command"}) == 2);
  CHECK(run_cli({}) == 2);  // a subcommand is required
}

}  // TEST_SUITE

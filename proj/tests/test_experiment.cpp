#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>

#include <unistd.h>

#include "colcomplete/errors.hpp"
#include "colcomplete/experiment.hpp"
#include "colcomplete/io.hpp"
#include "colcomplete/serialize.hpp"

namespace colcomplete {
namespace {

namespace fs = std::filesystem;

json small_sweep() {
  return json::parse(R"({
    "mode": "sweep-d",
    "data": {"synthetic": {"n": 30, "m": 30, "degree": 2, "noise_sigma": 0.01}},
    "rank": 3, "d": [6, 10], "methods": ["qpma", "cur1", "cur3"], "trials": 3, "seed": 11,
    "solver": {"max_iters": 300}
  })");
}

bool has_prefix(const std::vector<Diagnostic>& ds, const std::string& prefix) {
  return std::any_of(ds.begin(), ds.end(), [&](const Diagnostic& d) { return d.message.rfind(prefix, 0) == 0; });
}

TEST(Config, ErrorsNameTheField) {
  json j = small_sweep();
  j["solver"]["max_iters"] = -3;
  try {
    parse_config(j, ".");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("solver.max_iters"), std::string::npos) << e.what();
  }
  j = small_sweep();
  j["data"]["synthetic"]["nosie_sigma"] = 0.1;
  EXPECT_THROW(parse_config(j, "."), ConfigError);
  j = small_sweep();
  j["mode"] = "sweep";
  EXPECT_THROW(parse_config(j, "."), ConfigError);
  j = small_sweep();
  j["data"]["synthetic"]["q_seed"] = 1;
  EXPECT_THROW(parse_config(j, "."), ConfigError);
}

TEST(Config, RangesAndRelativePaths) {
  json j = small_sweep();
  j["d"] = json::parse(R"({"from": 5, "to": 40, "step": 5})");
  j["out"] = "runs/x";
  const ExperimentConfig cfg = parse_config(j, "/base");
  EXPECT_EQ(cfg.d_values, (std::vector<std::size_t>{5, 10, 15, 20, 25, 30, 35, 40}));
  EXPECT_EQ(cfg.out, fs::path("/base/runs/x"));
}

TEST(Validate, Diagnostics) {
  EXPECT_TRUE(validate(parse_config(small_sweep(), ".")).empty());

  json j = small_sweep();
  j["data"]["synthetic"]["degree"] = 12;
  j["rank"] = 10;
  j["d"] = {5};
  j["methods"] = {"qpma", "cur2"};
  const auto ds = validate(parse_config(j, "."));
  EXPECT_TRUE(has_prefix(ds, "target rank exceeds sampled columns (need r ≤ d ≤ k)"));
  EXPECT_TRUE(has_prefix(ds, "CUR+ type 2 samples fewer rows or columns than the target rank"));

  j = small_sweep();
  j["data"]["synthetic"]["degree"] = 30;
  EXPECT_TRUE(has_prefix(validate(parse_config(j, ".")), "basis degree + 1 exceeds the number of columns"));
  j = small_sweep();
  j["trials"] = 0;
  EXPECT_TRUE(has_prefix(validate(parse_config(j, ".")), "trial count must be at least 1"));
}

TEST(Run, RowCountAndPairing) {
  const RunOutput out = run_experiment(parse_config(small_sweep(), "."));
  ASSERT_EQ(out.rows.size(), 2u * 3u * 3u);
  // Every (method, d, seed) appears once.
  for (std::size_t a = 0; a < out.rows.size(); ++a)
    for (std::size_t b = a + 1; b < out.rows.size(); ++b)
      EXPECT_FALSE(out.rows[a].method == out.rows[b].method && out.rows[a].d == out.rows[b].d &&
                   out.rows[a].seed == out.rows[b].seed);
  for (const auto& row : out.rows) {
    EXPECT_TRUE(row.error.empty()) << row.error;
    EXPECT_FALSE(row.wallclock.has_value());
  }
  EXPECT_EQ(out.summary["groups"].size(), 6u);
  EXPECT_EQ(out.summary["paired"].size(), 4u);
}

TEST(Run, IdenticalAcrossThreadCounts) {
  ExperimentConfig cfg = parse_config(small_sweep(), ".");
  const std::string one = format_results(run_experiment(cfg).rows);
  cfg.threads = 3;
  EXPECT_EQ(format_results(run_experiment(cfg).rows), one);
}

TEST(Run, InfeasibleCellsAreRecordedNotFatal) {
  json j = small_sweep();
  j["d"] = {4, 10};
  j["methods"] = {"qpma", "cur2"};
  const RunOutput out = run_experiment(parse_config(j, "."));
  ASSERT_EQ(out.rows.size(), 2u * 2u * 3u);
  std::size_t failed = 0;
  for (const auto& row : out.rows) {
    if (row.method == "cur2" && row.d == 4) {
      EXPECT_FALSE(row.error.empty());
      EXPECT_FALSE(row.nmse.has_value());
      ++failed;
    } else {
      EXPECT_TRUE(row.error.empty()) << row.error;
    }
  }
  EXPECT_EQ(failed, 3u);
  EXPECT_NE(format_results(out.rows).find(",,,"), std::string::npos);
}

TEST(Run, DivergenceIsCapturedPerTrial) {
  json j = small_sweep();
  j["methods"] = {"qpma"};
  j["solver"]["step_size"] = 10.0;
  const RunOutput out = run_experiment(parse_config(j, "."));
  for (const auto& row : out.rows) EXPECT_NE(row.error.find("coefficient fit"), std::string::npos) << row.error;
}

TEST(Results, HeaderAndFormatting) {
  ResultRow row;
  row.mode = "solve";
  row.method = "qpma";
  row.nmse = 0.1;
  row.error = "a, \"b\"";
  const std::string text = format_results({row});
  EXPECT_EQ(text.substr(0, text.find('\n')), kResultsHeader);
  EXPECT_NE(text.find("0.10000000000000001"), std::string::npos);
  EXPECT_NE(text.find("\"a, \"\"b\"\"\""), std::string::npos);
}

TEST(Serialize, SamplerRoundTripOneBased) {
  const ColumnSampler s = build_sampler(10, {0, 4, 9});
  const json j = sampler_to_json(s, true);
  EXPECT_EQ(j["indices"], json({1, 5, 10}));
  EXPECT_EQ(sampler_from_json(j, true), s);
  EXPECT_EQ(sampler_from_json(sampler_to_json(s, false), false), s);
  EXPECT_THROW(sampler_from_json(json{{"m", 10}, {"indices", {0, 3}}}, true), IndexError);
  EXPECT_THROW(sampler_from_json(json{{"m", 10}}, false), ConfigError);
}

TEST(Serialize, SyntheticSpecRoundTrip) {
  SyntheticSpec spec;
  spec.n = 7;
  spec.m = 5;
  spec.degree = 3;
  spec.noise_sigma = 0.25;
  spec.noise_mode = NoiseMode::RankK;
  spec.k = 2;
  spec.q_seed = 9;
  const SyntheticSpec back = synthetic_from_json(synthetic_to_json(spec), "spec");
  EXPECT_EQ(back.n, 7u);
  EXPECT_EQ(back.degree, 3);
  EXPECT_EQ(back.noise_mode, NoiseMode::RankK);
  EXPECT_EQ(back.k, 2u);
  EXPECT_EQ(back.q_seed, 9u);
  EXPECT_DOUBLE_EQ(back.noise_sigma, 0.25);
}

class OutputDir : public ::testing::Test {
 protected:
  void SetUp() override { dir_ = fs::temp_directory_path() / ("colcomplete_exp_" + std::to_string(::getpid())); }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST_F(OutputDir, SavedInstanceSolvesThroughInputPath) {
  json j = json::parse(R"({
    "mode": "solve",
    "data": {"synthetic": {"n": 40, "m": 40, "degree": 4}},
    "rank": 5, "d": [8], "seed": 4, "save_models": true,
    "solver": {"max_iters_z": 100000}
  })");
  j["out"] = (dir_ / "first").string();
  ExperimentConfig cfg = parse_config(j, ".");
  prepare_output_dir(cfg);
  const RunOutput first = run_experiment(cfg);
  write_outputs(cfg, first);
  EXPECT_THROW(prepare_output_dir(cfg), ArgumentError);
  ASSERT_TRUE(first.theory.has_value());
  const fs::path inst = dir_ / "first" / "models" / "instance_s0_t0";
  ASSERT_TRUE(fs::exists(inst / "m_true.csv"));
  ASSERT_TRUE(fs::exists(dir_ / "first" / "models" / "qpma_r5_d8_s0_t0" / "meta.json"));

  json k = j;
  k["data"] = json{{"input", (inst / "m_true.csv").string()}, {"grid_file", (inst / "grid.txt").string()}};
  k["degree"] = 4;
  k["out"] = (dir_ / "second").string();
  const RunOutput second = run_experiment(parse_config(k, "."));
  ASSERT_EQ(second.rows.size(), 1u);
  ASSERT_TRUE(second.rows[0].nmse.has_value()) << second.rows[0].error;
  EXPECT_LT(*second.rows[0].nmse, 1e-6);
  EXPECT_FALSE(second.rows[0].sigma.has_value());
}

}  // namespace
}  // namespace colcomplete

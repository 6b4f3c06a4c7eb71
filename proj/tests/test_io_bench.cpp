#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <sstream>

#include "cipshare/cipshare.hpp"
#include "oracles.hpp"

using namespace cipshare;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "cipshare_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Io, InstanceRoundTrip) {
  std::mt19937_64 rng(1);
  const Instance inst = oracle::random_real_instance(rng, 5, 3);
  const auto path = scratch("roundtrip.json").string();
  io::write_instance(path, inst);
  const Instance back = io::read_instance(path);
  ASSERT_EQ(back.num_facilities(), 5u);
  ASSERT_EQ(back.num_users(), 3u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(back.cost(i), inst.cost(i));
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(back.contribution(i, j), inst.contribution(i, j));
  }
  for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(back.requirement(j), inst.requirement(j));
}

TEST(Io, GeneratedMetaSurvives) {
  lorawan::GenConfig cfg = lorawan::desk_profile(9);
  cfg.num_users = 5;
  cfg.num_facilities = 6;
  const Instance inst = lorawan::generate_instance(cfg);
  const Instance back = io::instance_from_json(io::to_json(inst));
  EXPECT_EQ(back.meta()["seed"], 9);
  EXPECT_EQ(back.meta()["profile"], "desk");
}

TEST(Io, MalformedInput) {
  using nlohmann::json;
  EXPECT_THROW(io::instance_from_json(json{{"costs", {1.0}}}), Error);
  EXPECT_THROW(io::instance_from_json(json{{"n", 2}, {"costs", {1.0}}, {"requirements", {1.0}},
                                           {"contributions", {{1.0}}}}),
               Error);
  EXPECT_THROW(io::read_instance("/nonexistent/instance.json"), Error);
}

TEST(Io, SharesAndDualRoundTrip) {
  const Instance inst = oracle::pathological();
  const PdTrace t = min_cost_knapsack_pd(inst, 0);
  const DualSolution back = io::dual_from_json(io::to_json(t.dual));
  EXPECT_EQ(back.entries(), t.dual.entries());
  const CostShares s = induce_cost_shares(inst, t.dual, all_users(inst), "pd");
  const CostShares s2 = io::shares_from_json(inst, io::to_json(s));
  EXPECT_EQ(s2.shares, s.shares);
  EXPECT_EQ(s2.method, "pd");
  const Selection sel = io::selection_from_json(inst, io::to_json(t.selection));
  EXPECT_EQ(sel.opened, t.selection.opened);
  EXPECT_THROW(io::shares_from_json(inst, nlohmann::json{{"shares", {1.0, 2.0}}}), Error);
}

TEST(BenchConfig, EmptyConfigIsRejected) {
  EXPECT_THROW(bench::config_from_json(nlohmann::json::object()), Error);
  EXPECT_THROW(bench::config_from_json(nlohmann::json{{"seeds", "x"}}), Error);
  const auto cfg = bench::config_from_json(nlohmann::json{{"seeds", {1, 2}}, {"m", 4}});
  EXPECT_EQ(cfg.num_instances(), 2u);
  EXPECT_EQ(*cfg.num_users, 4u);
}

TEST(Bench, PathologicalRow) {
  bench::BenchConfig cfg;
  const bench::BenchRow row = bench::run_instance(oracle::pathological(), "pathological", cfg);
  ASSERT_TRUE(row.error.empty()) << row.error;
  EXPECT_NEAR(row.ip_obj, 1.0, 1e-9);
  EXPECT_NEAR(row.kc_lp, 1.0, 1e-6);
  EXPECT_NEAR(row.dual_opt_rev, 1.0, 1e-6);
  EXPECT_NEAR(row.naive_lp, 0.11, 1e-6);
  EXPECT_TRUE(row.core_audited);
  EXPECT_TRUE(row.ok());
}

TEST(Bench, SmallRunIsDeterministicAcrossJobCounts) {
  bench::BenchConfig cfg;
  cfg.seeds = {1, 2, 3};
  cfg.num_users = 6;
  cfg.num_facilities = 10;
  const auto one = bench::run_benchmark(cfg);
  cfg.jobs = 3;
  const auto three = bench::run_benchmark(cfg);
  std::ostringstream a, b;
  bench::write_csv(a, one);
  bench::write_csv(b, three);
  // Runtimes differ; compare everything up to the timing columns.
  auto strip = [](const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) {
      std::size_t cut = line.size();
      for (int k = 0; k < 4 && cut != std::string::npos; ++k) cut = line.rfind(',', cut - 1);
      out += line.substr(0, cut) + '\n';
    }
    return out;
  };
  EXPECT_EQ(strip(a.str()), strip(b.str()));
  for (const auto& r : one.rows) {
    EXPECT_TRUE(r.ok()) << r.source << ": " << r.error;
    EXPECT_TRUE(r.core_audited);
  }
  EXPECT_NE(a.str().find("# cipshare-bench v1"), std::string::npos);
}

TEST(Bench, MissingFileRecordedInRow) {
  bench::BenchConfig cfg;
  cfg.instance_files = {"/nonexistent/x.json"};
  const auto rep = bench::run_benchmark(cfg);
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_FALSE(rep.rows[0].error.empty());
  EXPECT_FALSE(rep.all_ok());
}

TEST(Bench, CsvEscaping) {
  EXPECT_EQ(bench::csv_escape("plain"), "plain");
  EXPECT_EQ(bench::csv_escape("a,b"), "\"a,b\"");
  EXPECT_EQ(bench::csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
}

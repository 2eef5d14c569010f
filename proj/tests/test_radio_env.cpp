#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>

using namespace fbsim;
using namespace fbsim::testing;

TEST(RadioEnv, ReferenceDistanceIdentities)
{
  EXPECT_DOUBLE_EQ(received_power(40.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(received_power(40.0, 10.0), -30.0);
  EXPECT_DOUBLE_EQ(received_power(40.0, 0.0), 0.0) << "distance 0 clamps to d0";
}

TEST(RadioEnv, PathLossMonotoneInDistance)
{
  double prev = received_power(43.0, 1.0);
  for (double d = 2.0; d < 20000.0; d *= 1.3) {
    const double now = received_power(43.0, d);
    EXPECT_LT(now, prev);
    prev = now;
  }
}

TEST(RadioEnv, MarginMatchesBruteForceAndIsShiftInvariant)
{
  auto env = default_env();
  const auto& ue = env.ues[0];
  const auto& a = *env.find_cell("A");
  const auto& b = *env.find_cell("B");
  const auto oracle = [](double tx, Point c, Point u) {
    const double d = std::max(1.0, std::hypot(c.x - u.x, c.y - u.y));
    return tx - 40.0 - 30.0 * std::log10(d);
  };
  const double margin = received_power(env, a, ue) - received_power(env, b, ue);
  EXPECT_NEAR(margin, oracle(a.tx_power_dbm, a.position, ue.position) -
                          oracle(b.tx_power_dbm, b.position, ue.position),
              1e-9);
  for (auto& c : env.cells) {
    c.tx_power_dbm += 7.5;
  }
  const double shifted = received_power(env, *env.find_cell("A"), ue) -
      received_power(env, *env.find_cell("B"), ue);
  EXPECT_NEAR(shifted, margin, 1e-9);
}

TEST(RadioEnv, AnchoredCellTracksBestLegitPower)
{
  auto env = default_env();
  auto fbs = lte_cell("fbs0", 7, 1300, env.fbs_position);
  fbs.legit = false;
  fbs.anchored_margin_db = 12.0;
  for (const auto& ue : env.ues) {
    EXPECT_NEAR(env.rx_dbm(fbs, ue) - env.best_legit_rx(ue.position), 12.0, 1e-9);
  }
}

TEST(RadioEnv, DefaultScanSeesThreeCellsStrongestFirst)
{
  const auto env = default_env();
  const auto db = scan(env, 500, 2);
  ASSERT_EQ(db.entries.size(), 3U);
  for (std::size_t i = 1; i < db.entries.size(); ++i) {
    EXPECT_GE(db.entries[i - 1].rsrp_dbm, db.entries[i].rsrp_dbm);
  }
  EXPECT_EQ(db.strongest().params.pci, 101);
  for (const auto& e : db.entries) {
    EXPECT_EQ(e.params.plmn, "00101");
    EXPECT_FALSE(e.neighbor_pcis.empty());
  }
}

TEST(RadioEnv, MoreRadiosReduceScanLatency)
{
  auto env = default_env();
  for (int f = 0; f < 3; ++f) {
    auto c = lte_cell("X" + std::to_string(f), 400 + f, 5000 + f, {100, 100});
    env.cells.push_back(c);
  }
  // 5 distinct frequencies.
  const auto one = scan(env, 500, 1).scan_time_ms;
  const auto two = scan(env, 500, 2).scan_time_ms;
  EXPECT_EQ(one, 2500);
  EXPECT_LE(std::abs(2 * two - one), 500);
  EXPECT_THROW(scan(env, 0, 1), std::invalid_argument);
  EXPECT_THROW(scan(env, 100, 0), std::invalid_argument);
}

TEST(RadioEnv, InfiniteSensitivityReturnsEveryCell)
{
  auto env = default_env();
  env.cells.push_back(lte_cell("far", 499, 1300, {1e7, 1e7}));
  const auto normal = scan(env, 500, 2);
  const auto all = scan(env, 500, 2, -std::numeric_limits<double>::infinity());
  EXPECT_EQ(all.entries.size(), env.cells.size());
  EXPECT_EQ(normal.entries.size(), env.cells.size() - 1);
  std::set<int> env_pcis, scanned;
  for (const auto& c : env.cells) {
    env_pcis.insert(c.params.pci);
  }
  for (const auto& e : all.entries) {
    scanned.insert(e.params.pci);
  }
  EXPECT_EQ(env_pcis, scanned);
}

TEST(RadioEnv, FullAdaptationClonesStrongest)
{
  const auto env = default_env();
  const auto db = scan(env, 500, 2);
  CellProfile fbs = lte_cell("fbs0", 0, 0, env.fbs_position, 20.0);
  fbs.legit = false;
  Rng rng(1);
  const auto out = apply_adaptation(fbs, db, AdaptationMode::full, rng);
  const auto& src = db.strongest();
  EXPECT_EQ(out.params, src.params);
  EXPECT_EQ(out.neighbors, src.neighbor_pcis);
  EXPECT_EQ(out.sib_resel_priorities, src.resel_priorities);
  EXPECT_EQ(out.tx_power_dbm, 20.0);
  EXPECT_EQ(out.position, env.fbs_position);
  std::set<int> advertised;
  for (const auto& e : db.entries) {
    advertised.insert(e.neighbor_pcis.begin(), e.neighbor_pcis.end());
  }
  EXPECT_EQ(advertised.count(out.params.pci), 1U);
}

TEST(RadioEnv, UeRecoveryAltersOnlyTac)
{
  const auto env = default_env();
  const auto db = scan(env, 500, 2);
  CellProfile fbs;
  fbs.legit = false;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const auto out = apply_adaptation(fbs, db, AdaptationMode::ue_recovery, rng);
    for (const auto& e : db.entries) {
      EXPECT_NE(out.params.tac, e.params.tac);
    }
    auto p = out.params;
    p.tac = db.strongest().params.tac;
    EXPECT_EQ(p, db.strongest().params);
  }
}

TEST(RadioEnv, NoAdaptationIsSeeded)
{
  const auto env = default_env();
  const auto db = scan(env, 500, 2);
  CellProfile fbs;
  Rng r1(9), r2(9), r3(10);
  const auto a = apply_adaptation(fbs, db, AdaptationMode::none, r1);
  const auto b = apply_adaptation(fbs, db, AdaptationMode::none, r2);
  const auto c = apply_adaptation(fbs, db, AdaptationMode::none, r3);
  EXPECT_EQ(a.params, b.params);
  EXPECT_NE(a.params, c.params);
  EXPECT_TRUE(a.neighbors.empty());
  EXPECT_THROW(apply_adaptation(fbs, ScanDatabase{}, AdaptationMode::full, r1),
               std::invalid_argument);
}

TEST(RadioEnv, ScanDatabaseJsonRoundTrip)
{
  const auto env = default_env();
  const auto db = scan(env, 500, 2);
  const auto j = scan_db_to_json(db);
  ASSERT_TRUE(j.is_array());
  EXPECT_TRUE(j[0].contains("pci"));
  EXPECT_TRUE(j[0].contains("observed_sibs"));
  const auto back = scan_db_from_json(j);
  EXPECT_EQ(back.entries, db.entries);
}

TEST(RadioEnv, EnvironmentLoaderValidation)
{
  EXPECT_THROW(environment_from_yaml("cells:\n  - {id: A, colour: red}\n"), ProfileError);
  EXPECT_THROW(environment_from_yaml("cells:\n  - {params: {pci: 1}}\n"), ProfileError);
  EXPECT_THROW(environment_from_yaml("cells:\n  - {id: A, params: {pci: 900}}\n"), ProfileError);
  EXPECT_THROW(environment_from_yaml("cells:\n"
                                     "  - {id: A, params: {pci: 1, earfcn: 5}}\n"
                                     "  - {id: B, params: {pci: 1, earfcn: 5}}\n"),
               ProfileError);
  EXPECT_THROW(environment_from_yaml("run: {tick_ms: 0}\n"), ProfileError);
  const auto env = environment_from_yaml("cells:\n  - {id: A, params: {pci: 1}}\nues:\n  - {}\n");
  ASSERT_EQ(env.ues.size(), 1U);
  EXPECT_EQ(env.ues[0].ue_id, "ue1");
  EXPECT_EQ(env.ues[0].imsi.size(), 15U);
  EXPECT_EQ(env.ues[0].serving, std::optional<std::string>("A"));
}

TEST(RadioEnv, DefaultEnvironmentShape)
{
  const auto env = default_env();
  EXPECT_EQ(env.cells.size(), 3U);
  EXPECT_EQ(env.ues.size(), 5U);
  for (const auto& ue : env.ues) {
    ASSERT_TRUE(ue.serving);
    EXPECT_EQ(*ue.serving, env.strongest_legit(ue.position)->id);
  }
}

TEST(RadioEnv, ClockIsMonotone)
{
  Environment env;
  env.advance_clock(100);
  env.advance_clock(50);
  EXPECT_EQ(env.clock_ms, 100);
}

TEST(RadioEnv, RandomUePlacementStaysInDisc)
{
  auto env = default_env();
  add_random_ues(env, 500, {0, 0}, 800.0, 0.5, 3);
  ASSERT_EQ(env.ues.size(), 505U);
  std::set<std::string> imsis;
  for (std::size_t i = 5; i < env.ues.size(); ++i) {
    EXPECT_LE(distance(env.ues[i].position, {0, 0}), 800.0 + 1e-9);
    imsis.insert(env.ues[i].imsi);
  }
  EXPECT_EQ(imsis.size(), 500U);
}

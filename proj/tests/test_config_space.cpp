#include "test_support.hpp"

#include <gtest/gtest.h>

#include <set>
#include <tuple>

using namespace fbsim;
using namespace fbsim::testing;

namespace {

using Axes = std::tuple<Adaptation, CellIteration, bool, bool, bool, HijackMethod, Targeting, Variation>;

Axes axes_of(const ConfigProfile& p)
{
  return {p.launch.adaptation, p.launch.cell_iteration, p.launch.paging_reproduction,
          p.launch.ta_diversification, p.launch.hw_compensation, p.hijack.method,
          p.app.targeting, p.app.variation};
}

// Independent ordering oracle built from literal value lists.
std::vector<Axes> oracle_order()
{
  const Adaptation ad[] = {Adaptation::none, Adaptation::full};
  const CellIteration it[] = {CellIteration::fixed, CellIteration::round_robin};
  const HijackMethod hm[] = {HijackMethod::jamming, HijackMethod::handover,
                             HijackMethod::cell_reselection};
  const Targeting tg[] = {Targeting::arbitrary, Targeting::adaptive, Targeting::targeted};
  const Variation va[] = {Variation::imsi_identity_request_reject,
                          Variation::imsi_reject_based,
                          Variation::imsi_identity_request_release,
                          Variation::loc_tracking_coarse,
                          Variation::loc_tracking_fine,
                          Variation::dos,
                          Variation::redirect_sib7,
                          Variation::redirect_carrier_info,
                          Variation::redirect_idle_mode_mobility};
  std::vector<Axes> out;
  for (auto a : ad)
    for (auto i : it)
      for (bool pg : {false, true})
        for (bool ta : {false, true})
          for (bool hw : {false, true})
            for (auto m : hm)
              for (auto t : tg)
                for (auto v : va)
                  out.emplace_back(a, i, pg, ta, hw, m, t, v);
  return out;
}

} // namespace

TEST(ConfigSpace, CountingIdentity)
{
  ConfigSpace s;
  EXPECT_EQ(s.n_total(), 2592U);
  EXPECT_EQ(s.n_total(), s.n_launch * s.n_hijack * s.n_app);
}

TEST(ConfigSpace, EnumerationMatchesOracleOrder)
{
  const auto got = enumerate_instances();
  const auto want = oracle_order();
  ASSERT_EQ(got.size(), 2592U);
  ASSERT_EQ(want.size(), 2592U);
  for (std::size_t i = 0; i < got.size(); ++i) {
    ASSERT_EQ(axes_of(got[i]), want[i]) << "index " << i;
  }
}

TEST(ConfigSpace, FirstProfileIsAllDefaults)
{
  const auto first = enumerate_instances().front();
  const ConfigProfile defaults;
  EXPECT_EQ(first.launch, defaults.launch);
  EXPECT_EQ(first.hijack, defaults.hijack);
  EXPECT_EQ(first.app, defaults.app);
}

TEST(ConfigSpace, CanonicalSerializationsAreDistinct)
{
  std::set<std::string> seen;
  for (auto p : enumerate_instances()) {
    p.name.clear();
    p.seed = 0;
    EXPECT_TRUE(seen.insert(to_yaml(p)).second);
  }
  EXPECT_EQ(seen.size(), 2592U);
}

TEST(ConfigSpace, FilterCountsMatchBruteForceRecount)
{
  const auto all = enumerate_instances();
  std::vector<InstanceFilter> filters(6);
  filters[1].method = HijackMethod::jamming;
  filters[2].method = HijackMethod::handover;
  filters[2].variation = Variation::imsi_reject_based;
  filters[3].adaptation = Adaptation::full;
  filters[4].ta_diversification = true;
  filters[4].targeting = Targeting::adaptive;
  filters[5].hw_compensation = false;
  filters[5].cell_iteration = CellIteration::round_robin;
  filters[5].variation = Variation::dos;
  for (const auto& f : filters) {
    const auto n = static_cast<std::size_t>(
        std::count_if(all.begin(), all.end(), [&](const ConfigProfile& p) { return f.matches(p); }));
    EXPECT_EQ(enumerate_instances(f).size(), n);
    EXPECT_EQ(f.space().n_total(), n);
  }
  EXPECT_EQ(enumerate_instances(filters[1]).size(), 864U);
  EXPECT_EQ(enumerate_instances(filters[2]).size(), 96U);
  EXPECT_EQ(enumerate_instances(filters[3]).size(), 1296U);
}

TEST(ConfigSpace, DefaultRejectCauses)
{
  EXPECT_EQ(default_reject_cause(Variation::imsi_reject_based), 9);
  EXPECT_EQ(default_reject_cause(Variation::dos), 22);
  EXPECT_EQ(default_reject_cause(Variation::loc_tracking_fine), 13);
  EXPECT_EQ(ConfigProfile{}.hijack.power_margin_db, 30.0);
}

TEST(ConfigSpace, EveryInstanceIsFeasibleAgainstDefaultScan)
{
  const auto env = default_env();
  const auto db = scan(env, env.settings.scan_dwell_ms, env.settings.radios);
  for (const auto& p : enumerate_instances()) {
    const auto r = check(p, db);
    ASSERT_TRUE(r.report.ok()) << p.name << "\n" << r.report.to_text();
  }
}

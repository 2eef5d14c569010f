#include "test_support.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include <cmath>

using namespace fbsim;
using namespace fbsim::testing;

TEST(TimingAdvance, DistanceBasedAndDefault)
{
  Rng rng(1);
  TaModel m;
  EXPECT_EQ(ta_command(m, 0.0, rng), 0);
  EXPECT_EQ(ta_command(m, 780.0, rng), 10);
  EXPECT_EQ(ta_command(m, 1e9, rng), 1282);
  m.mode = TaMode::fbs_default;
  EXPECT_EQ(ta_command(m, 780.0, rng), 1);
  EXPECT_EQ(ta_command(m, 20.0, rng), 0);
  EXPECT_THROW(ta_command(m, -1.0, rng), std::invalid_argument);
}

TEST(TimingAdvance, DiversifiedIsUniformChiSquare)
{
  TaModel m;
  m.mode = TaMode::diversified;
  const int bins = m.diversified_max + 1;
  const int n = 31000;
  std::vector<int> counts(bins, 0);
  Rng rng(42, "ta");
  for (int i = 0; i < n; ++i) {
    const int v = ta_command(m, 500.0, rng);
    ASSERT_GE(v, 0);
    ASSERT_LE(v, m.diversified_max);
    ++counts[v];
  }
  const double expected = static_cast<double>(n) / bins;
  double chi2 = 0.0;
  for (int c : counts) {
    chi2 += (c - expected) * (c - expected) / expected;
  }
  const boost::math::chi_squared dist(bins - 1);
  const double critical = boost::math::quantile(dist, 0.99);
  EXPECT_NEAR(critical, 50.89, 0.01);
  EXPECT_LT(chi2, critical);
}

TEST(FrameTiming, UncompensatedDriftAccumulates)
{
  Rng rng(3);
  const auto s = frame_timing_series({false, 1.0, 5.0}, 1000, rng);
  ASSERT_EQ(s.size(), 1000U);
  for (std::size_t i = 0; i < s.size(); ++i) {
    // Sum of i+1 jitters, each bounded by 4 sigma.
    ASSERT_NEAR(s[i], 10.0 * static_cast<double>(i + 1), 20.0 * static_cast<double>(i + 1));
  }
  EXPECT_NEAR(s.back(), 10000.0, 1000.0);
  EXPECT_GT(s.back(), kCompensatedBoundNs);
}

TEST(FrameTiming, CompensatedStaysBounded)
{
  Rng rng(4);
  for (double e : frame_timing_series({true, 0.0, 20.0}, 5000, rng)) {
    ASSERT_LT(std::abs(e), kCompensatedBoundNs);
    ASSERT_LE(std::abs(e), 80.0);
  }
  EXPECT_THROW(frame_timing_series({true, 0.0, 300.0}, 10, rng), std::invalid_argument);
  EXPECT_THROW(frame_timing_series({false, 1.0, 5.0}, 0, rng), std::invalid_argument);
  EXPECT_THROW(frame_timing_series({false, 1.0, -1.0}, 10, rng), std::invalid_argument);
}

TEST(RfPresets, AssetMatchesBuiltinTable)
{
  const auto file = load_rf_presets(asset("rf_presets.json"));
  EXPECT_EQ(file.all(), builtin_rf_presets());
  EXPECT_EQ(file.legit().size(), 6U);
  EXPECT_THROW(file.get("nope"), std::out_of_range);
  EXPECT_THROW(rf_presets_from_json(nlohmann::json::parse(
                   R"({"presets":[{"name":"z","cfo_hz":[0,0],"sync_error_ns":[0,1],"mag_error_pct":[0,1]}]})")),
               std::invalid_argument);
}

TEST(RfPresets, SampleMeansConverge)
{
  const RfPresetTable table;
  for (const auto& p : table.all()) {
    const auto xs = rf_features(p, 4000, 11);
    double cfo = 0, sync = 0;
    for (const auto& x : xs) {
      cfo += x.cfo_hz;
      sync += x.sync_error_ns;
      ASSERT_GE(x.mag_error_pct, 0.0);
    }
    cfo /= xs.size();
    sync /= xs.size();
    // Five standard errors.
    EXPECT_NEAR(cfo, p.cfo_hz.mean, 5 * p.cfo_hz.stddev / std::sqrt(4000.0)) << p.name;
    EXPECT_NEAR(sync, p.sync_error_ns.mean, 5 * p.sync_error_ns.stddev / std::sqrt(4000.0)) << p.name;
  }
  EXPECT_EQ(rf_features(table.get("fbs_b210"), 5, 1), rf_features(table.get("fbs_b210"), 5, 1));
}

TEST(Hardware, CompensationSwapsClockAndRf)
{
  const auto off = fbs_hardware(false);
  const auto on = fbs_hardware(true);
  EXPECT_FALSE(off.clock.compensated);
  EXPECT_EQ(off.rf_preset, "fbs_b210");
  EXPECT_TRUE(on.clock.compensated);
  EXPECT_EQ(on.rf_preset, "rf_manip");
  EXPECT_NO_THROW(validate(on.clock));
}

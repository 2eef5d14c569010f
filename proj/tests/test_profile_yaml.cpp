#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

using namespace fbsim;
using namespace fbsim::testing;

TEST(ProfileYaml, MinimalProfileTakesDefaults)
{
  const auto p = profile_from_yaml("hijack:\n  method: handover\n");
  ConfigProfile want;
  want.hijack.method = HijackMethod::handover;
  EXPECT_EQ(p, want);
}

TEST(ProfileYaml, RejectCauseDefaultsByVariation)
{
  EXPECT_EQ(profile_from_yaml("app: {variation: imsi_reject_based}").app.reject_cause, 9);
  EXPECT_EQ(profile_from_yaml("app: {variation: dos}").app.reject_cause, 22);
  EXPECT_EQ(profile_from_yaml("app: {variation: dos, reject_cause: 13}").app.reject_cause, 13);
}

TEST(ProfileYaml, UnknownEnumValueNamesField)
{
  try {
    profile_from_yaml("hijack:\n  method: teleport\n");
    FAIL() << "expected ProfileError";
  } catch (const ProfileError& e) {
    EXPECT_EQ(e.field(), "hijack.method");
    EXPECT_EQ(e.line(), 2);
  }
}

TEST(ProfileYaml, UnknownKeyIsRejected)
{
  try {
    profile_from_yaml("launch:\n  adaptation: full\n  turbo: true\n");
    FAIL() << "expected ProfileError";
  } catch (const ProfileError& e) {
    EXPECT_EQ(e.field(), "launch.turbo");
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(ProfileYaml, MalformedYamlCarriesLine)
{
  try {
    profile_from_yaml("name: x\nlaunch: {adaptation: full\n");
    FAIL() << "expected ProfileError";
  } catch (const ProfileError& e) {
    EXPECT_GT(e.line(), 0);
  }
}

TEST(ProfileYaml, NegativeSeedIsRejected)
{
  EXPECT_THROW(profile_from_yaml("seed: -4\n"), ProfileError);
}

TEST(ProfileYaml, TypeMismatchIsRejected)
{
  EXPECT_THROW(profile_from_yaml("hijack: {power_margin_db: loud}\n"), ProfileError);
  EXPECT_THROW(profile_from_yaml("launch: {additional_cells: {pci: 3}}\n"), ProfileError);
}

TEST(ProfileYaml, RoundTripAllEnumeratedInstances)
{
  for (const auto& p : enumerate_instances()) {
    const auto text = to_yaml(p);
    const auto back = profile_from_yaml(text);
    ASSERT_EQ(back, p) << text;
    ASSERT_EQ(to_yaml(back), text);
  }
}

TEST(ProfileYaml, RoundTripManualParamsAndOddDoubles)
{
  ConfigProfile p;
  p.name = "odd: name #1";
  p.seed = 18446744073709551615ULL;
  p.launch.tx_power_dbm = -7.125;
  p.hijack.power_margin_db = 0.1;
  CellParams m;
  m.plmn = "310410";
  m.pci = 503;
  m.bandwidth_mhz = 1.4;
  p.launch.manual_params = m;
  p.app.target_ids = {"001010000000001", "guti-ue3"};
  const auto back = profile_from_yaml(to_yaml(p));
  EXPECT_EQ(back, p);
}

TEST(ProfileYaml, CanonicalOutputHasSortedTopLevelKeysAndExplicitDefaults)
{
  const auto text = to_yaml(ConfigProfile{});
  const auto pos = [&](const char* k) { return text.find(k); };
  EXPECT_LT(pos("app:"), pos("hijack:"));
  EXPECT_LT(pos("hijack:"), pos("launch:"));
  EXPECT_LT(pos("launch:"), pos("name:"));
  EXPECT_LT(pos("name:"), pos("seed:"));
  EXPECT_NE(text.find("sampling_fraction: 0.1"), std::string::npos);
  EXPECT_NE(text.find("power_margin_db: 30.0"), std::string::npos);
  EXPECT_EQ(text.find("manual_params"), std::string::npos);
}

TEST(ProfileYaml, SaveLoadFile)
{
  const auto path = (std::filesystem::temp_directory_path() / "fbsim_profile_test.yaml").string();
  auto p = enumerate_instances()[1234];
  save_profile(p, path);
  EXPECT_EQ(load_profile(path), p);
  std::remove(path.c_str());
  EXPECT_THROW(load_profile(path), ProfileError);
}

TEST(ProfileYaml, InstanceSetRoundTrip)
{
  const auto set = reference_set();
  ASSERT_EQ(set.size(), 10U);
  EXPECT_EQ(instance_set_from_yaml(instance_set_to_yaml(set)), set);
  EXPECT_THROW(instance_set_from_yaml("instances: 3\n"), ProfileError);
  try {
    instance_set_from_yaml("instances:\n  - name: a\n  - hijack: {method: warp}\n");
    FAIL();
  } catch (const ProfileError& e) {
    EXPECT_EQ(e.field(), "instances[1].hijack.method");
  }
}

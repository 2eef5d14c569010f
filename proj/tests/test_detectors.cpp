#include "test_support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace fbsim;
using namespace fbsim::testing;

namespace {

using K = MessageKind;

bool fires(PrimitiveId id, const PipelineRun& r, const Environment& env)
{
  return run_primitive(id, r, baseline_db(env)).fired;
}

Environment crowd(std::size_t n, std::uint64_t seed)
{
  auto env = default_env();
  env.ues.clear();
  add_random_ues(env, n, env.find_cell("A")->position, 500.0, 1.0, seed);
  return env;
}

std::string read_file(const std::string& path)
{
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

TEST(Primitives, FlowPrimitivesOnReferenceInstances)
{
  const auto env = default_env();
  const auto jna = run(reference_instance("J+I+NA"), env);
  const auto jir = run(reference_instance("J+IR+A"), env);
  const auto cir = run(reference_instance("C+Ir+A"), env);
  const auto h = run(reference_instance("H+I+A"), env);

  EXPECT_TRUE(fires(PrimitiveId::rrc_failure, jna, env));
  EXPECT_TRUE(fires(PrimitiveId::rrc_failure, h, env));
  EXPECT_FALSE(fires(PrimitiveId::rrc_failure, cir, env));

  EXPECT_TRUE(fires(PrimitiveId::reject_msg, jna, env));
  EXPECT_TRUE(fires(PrimitiveId::reject_msg, jir, env));
  EXPECT_FALSE(fires(PrimitiveId::reject_msg, cir, env));

  // Random identity with no neighbor list.
  EXPECT_TRUE(fires(PrimitiveId::cell_info, jna, env));
  EXPECT_TRUE(fires(PrimitiveId::signal_strength, jna, env));

  for (const auto* r : {&jna, &jir, &cir, &h}) {
    EXPECT_FALSE(fires(PrimitiveId::null_cipher, *r, env));
    EXPECT_FALSE(fires(PrimitiveId::redirection, *r, env));
  }
}

TEST(Primitives, SyntheticExamples)
{
  const ScanDatabase none;
  std::vector<TraceEvent> t;
  t.push_back(make_event(0, "x", "u", K::security_mode_command, {{"cipher", std::string("eea0")}}));
  EXPECT_TRUE(run_primitive(PrimitiveId::null_cipher, t, none).fired);
  t[0].fields["cipher"] = std::string("eea2");
  EXPECT_FALSE(run_primitive(PrimitiveId::null_cipher, t, none).fired);

  std::vector<TraceEvent> sib7 = {make_event(0, "x", kBroadcast, K::sib7, {{"target_priority", std::int64_t{7}}})};
  EXPECT_TRUE(run_primitive(PrimitiveId::redirection, sib7, none).fired);

  std::vector<TraceEvent> sync = {make_event(0, "x", kBroadcast, K::sync_signal)};
  sync[0].phy = PhyInfo{};
  sync[0].phy->frame_timing_error_ns = 999.0;
  EXPECT_FALSE(run_primitive(PrimitiveId::timing_error, sync, none).fired);
  sync[0].phy->frame_timing_error_ns = -1001.0;
  EXPECT_TRUE(run_primitive(PrimitiveId::timing_error, sync, none).fired);
}

TEST(Primitives, ImsiExposingRate)
{
  // Three sessions, two exposing: rate 2/3.
  std::vector<TraceEvent> t;
  for (int i = 0; i < 3; ++i) {
    const std::string ue = "u" + std::to_string(i);
    t.push_back(make_event(i * 100, "c", ue, K::rrc_setup));
    if (i < 2) {
      t.push_back(make_event(i * 100 + 10, "c", ue, K::identity_request, {{"id_type", std::string("imsi")}}));
    }
    t.push_back(make_event(i * 100 + 20, "c", ue, K::rrc_release));
  }
  const auto s = session_stats(t);
  EXPECT_EQ(s.sessions, 3U);
  EXPECT_EQ(s.exposing, 2U);
  EXPECT_NEAR(s.rate(), 2.0 / 3.0, 1e-12);
  EXPECT_TRUE(run_primitive(PrimitiveId::imsi_exposing, t, ScanDatabase{}).fired);
  PrimitiveParams strict;
  strict.imsi_rate_threshold = 0.7;
  EXPECT_FALSE(run_primitive(PrimitiveId::imsi_exposing, t, ScanDatabase{}, strict).fired);
}

TEST(Primitives, RedirectionFiresForCarrierInfoNotIdleMode)
{
  const auto env = single_ue_env("ue1");
  auto p = reference_instance("J+I+A");
  p.launch.additional_cells = {default_legacy_cell()};
  p.app.variation = Variation::redirect_carrier_info;
  EXPECT_TRUE(fires(PrimitiveId::redirection, run(p, env), env));
  p.app.variation = Variation::redirect_idle_mode_mobility;
  const auto idle = run(p, env);
  ASSERT_EQ(idle.outcomes.redirected_ues.size(), 1U);
  EXPECT_FALSE(fires(PrimitiveId::redirection, idle, env));
  p.app.variation = Variation::redirect_sib7;
  EXPECT_TRUE(fires(PrimitiveId::redirection, run(p, env), env));
}

TEST(Primitives, RfClassifierSeparatesPresets)
{
  const auto& rf = RfClassifier::default_instance();
  const RfPresetTable table;
  for (const auto& p : table.legit()) {
    EXPECT_FALSE(rf.flagged(p.mean())) << p.name;
  }
  for (const char* name : {"fbs_b210", "fbs_x310", "callbox", "c_fbs"}) {
    EXPECT_TRUE(rf.flagged(table.get(name).mean())) << name;
  }
  EXPECT_GT(rf.threshold(), 0.0);
  EXPECT_THROW(RfClassifier({}), std::invalid_argument);
}

TEST(Primitives, RfCharFollowsHardware)
{
  const auto env = single_ue_env("ue1");
  auto p = reference_instance("J+I+A");
  p.launch.hw_compensation = false;
  EXPECT_TRUE(fires(PrimitiveId::rf_char, run(p, env), env));
  // Legit cells alone never trip the classifier.
  auto quiet = env;
  quiet.ues.clear();
  const auto r = run(p, quiet);
  std::vector<TraceEvent> legit_only;
  for (const auto& e : r.trace) {
    if (e.src != kFbsCellId) {
      legit_only.push_back(e);
    }
  }
  EXPECT_FALSE(run_primitive(PrimitiveId::rf_char, legit_only, baseline_db(env)).fired);
}

TEST(Primitives, TimingErrorIffUncompensated)
{
  const auto env = single_ue_env("ue1");
  for (bool hw : {false, true}) {
    auto p = reference_instance("C+I+A");
    p.launch.hw_compensation = hw;
    EXPECT_EQ(fires(PrimitiveId::timing_error, run(p, env), env), !hw) << hw;
  }
}

TEST(Primitives, TaCommandDefaultVersusDiversified)
{
  const auto env = crowd(150, 5);
  auto p = reference_instance("J+I+NA");
  p.launch.ta_diversification = false;
  const auto plain = run(p, env);
  std::size_t setups = 0;
  for (const auto& e : plain.trace) {
    if (e.kind == K::rrc_setup && e.src == kFbsCellId && e.phy && e.phy->ta_command) {
      ++setups;
    }
  }
  ASSERT_GE(setups, 100U);
  EXPECT_TRUE(fires(PrimitiveId::ta_cmd, plain, env));
  p.launch.ta_diversification = true;
  EXPECT_FALSE(fires(PrimitiveId::ta_cmd, run(p, env), env));
}

TEST(Detectors, EmptyTraceIsMissedEverywhere)
{
  const std::vector<TraceEvent> empty;
  const ScanDatabase none;
  for (const auto& [id, name] : EnumNames<PrimitiveId>::items) {
    EXPECT_FALSE(run_primitive(id, empty, none).fired) << name;
  }
  for (auto d : all_detectors()) {
    const auto v = run_detector(d, empty, none);
    EXPECT_EQ(v.score, 0);
    EXPECT_EQ(v.verdict, DetectionOutcome::missed);
    EXPECT_TRUE(v.fired_primitives.empty());
  }
}

TEST(Detectors, ClassifyIsMonotoneInScore)
{
  for (auto d : all_detectors()) {
    const auto& info = detector_info(d);
    EXPECT_LE(info.suspect_low, info.detect_low);
    int prev = 2;
    for (int s = 0; s <= 200; ++s) {
      const int rank = static_cast<int>(classify(info, s)); // detected=0 < suspect < missed
      ASSERT_LE(rank, prev) << to_string(d) << " at " << s;
      prev = rank;
    }
    EXPECT_EQ(classify(info, info.detect_low), DetectionOutcome::detected);
    EXPECT_EQ(classify(info, info.detect_low - 1),
              info.suspect_low < info.detect_low ? DetectionOutcome::suspect : DetectionOutcome::missed);
  }
}

TEST(Detectors, MoreEvidenceNeverLowersScore)
{
  const auto env = default_env();
  const auto base = baseline_db(env);
  const auto r = run(reference_instance("C+I+A"), env);
  auto extended = r.trace;
  extended.push_back(make_event(9999, kFbsCellId, "ue3", K::security_mode_command,
                                {{"cipher", std::string("eea0")}}));
  extended.push_back(make_event(9999, "ue3", kFbsCellId, K::rlf));
  for (auto d : all_detectors()) {
    EXPECT_GE(run_detector(d, extended, base).score, run_detector(d, r.trace, base).score) << to_string(d);
  }
}

TEST(Coverage, MatrixShapeAndEmptyDetectorList)
{
  const auto env = default_env();
  const auto inst = reference_set();
  const auto m = build_coverage_matrix({inst[0], inst[4]}, all_detectors(), env);
  ASSERT_EQ(m.cells.size(), 2U);
  EXPECT_EQ(m.cells[0].size(), 4U);
  const auto j = coverage_json(m);
  EXPECT_EQ(j["cells"].size(), 8U);
  EXPECT_EQ(j["detectors"].size(), 4U);

  const auto none = build_coverage_matrix({inst[0]}, {}, env);
  EXPECT_EQ(coverage_csv(none), "instance\nJ+I+NA\n");
  const auto empty = build_coverage_matrix({}, all_detectors(), env);
  EXPECT_TRUE(empty.rows.empty());
}

TEST(Coverage, ReferenceSetMatchesGolden)
{
  const auto m = build_coverage_matrix(reference_set(), all_detectors(), default_env(), 2);
  EXPECT_EQ(coverage_csv(m), read_file(std::string(FBSIM_GOLDEN_DIR) + "/reference_matrix.csv"));
  const auto missed = m.missed_by_detector();
  EXPECT_TRUE(missed.at(DetectorId::statistical_like).empty());
  EXPECT_EQ(missed.at(DetectorId::rayhunter_like),
            (std::vector<std::string>{"J+IR+A", "H+IR+A", "C+IR+A"}));
  EXPECT_NE(blind_spot_summary(m).find("phoenix_like: 3 missed"), std::string::npos);
}

TEST(Coverage, ThreadCountDoesNotChangeResult)
{
  const auto env = default_env();
  const auto one = coverage_json(build_coverage_matrix(reference_set(), all_detectors(), env, 1));
  const auto four = coverage_json(build_coverage_matrix(reference_set(), all_detectors(), env, 4));
  EXPECT_EQ(one.dump(), four.dump());
}

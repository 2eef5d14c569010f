#include "test_support.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace fbsim;
using namespace fbsim::testing;

TEST(Trace, EveryKindHasALayer)
{
  for (const auto& [k, name] : EnumNames<MessageKind>::items) {
    EXPECT_EQ(parse_enum<MessageKind>(std::string(name)), k);
    const auto l = default_layer(k);
    EXPECT_TRUE(parse_enum<Layer>(to_string(l)).has_value());
  }
  EXPECT_EQ(default_layer(MessageKind::nas_reject), Layer::nas);
  EXPECT_EQ(default_layer(MessageKind::rrc_release), Layer::rrc);
}

TEST(Trace, JsonlRoundTripPreservesFieldTypesAndPhy)
{
  std::vector<TraceEvent> trace;
  trace.push_back(make_event(5, "fbs0", "ue1", MessageKind::nas_reject,
                             {{"reject_cause", std::int64_t{9}},
                              {"contains_imsi", true},
                              {"ratio", 0.25},
                              {"whole", 3.0},
                              {"note", std::string("a \"quoted\" line\nbreak")}}));
  auto sync = make_event(10, "fbs0", kBroadcast, MessageKind::sync_signal);
  sync.phy = PhyInfo{-71.5, 1, 9500.25, RfFeatureVector{-475.1, -866.0, 16.9}};
  trace.push_back(sync);
  auto st = make_event(11, "ue1", "ue1", MessageKind::ue_state);
  st.phy = PhyInfo{};
  st.phy->ta_command = 0;
  trace.push_back(st);

  const auto text = to_jsonl(trace);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  std::istringstream in(text);
  const auto back = read_jsonl(in);
  EXPECT_EQ(back, trace);
  EXPECT_EQ(to_jsonl(back), text);
}

TEST(Trace, PipelineTraceRoundTrips)
{
  const auto run = fbsim::run(reference_instance("C+Ir+A"), default_env());
  std::istringstream in(to_jsonl(run.trace));
  EXPECT_EQ(read_jsonl(in), run.trace);
}

TEST(Trace, UnknownKindIsRejected)
{
  std::istringstream in(R"({"t_ms":0,"src":"a","dst":"b","layer":"rrc","kind":"teleport","fields":{}})"
                        "\n");
  EXPECT_THROW(read_jsonl(in), std::invalid_argument);
}

TEST(Trace, SortIsStable)
{
  std::vector<TraceEvent> t = {make_event(5, "a", "x", MessageKind::mib),
                               make_event(1, "b", "x", MessageKind::sib1),
                               make_event(5, "c", "x", MessageKind::sib3)};
  sort_trace(t);
  EXPECT_EQ(kinds(t), (std::vector<MessageKind>{MessageKind::sib1, MessageKind::mib, MessageKind::sib3}));
}

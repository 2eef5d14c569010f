#pragma once

#include "fbsim/types.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace fbsim {

enum class Layer { rrc, nas, mac, phy, internal };

template <>
struct EnumNames<Layer> {
  static constexpr std::array<std::pair<Layer, std::string_view>, 5> items{{
      {Layer::rrc, "rrc"},
      {Layer::nas, "nas"},
      {Layer::mac, "mac"},
      {Layer::phy, "phy"},
      {Layer::internal, "internal"},
  }};
};

enum class MessageKind {
  ue_state,
  mib,
  sib1,
  sib3,
  sib5,
  sib7,
  paging,
  rrc_setup,
  rrc_release,
  rrc_reconfiguration,
  measurement_report,
  handover_failure,
  rlf,
  reestablishment_request,
  reestablishment_reject,
  cell_reselection,
  attach_request,
  tau_request,
  identity_request,
  identity_response,
  nas_reject,
  security_mode_command,
  sms_deliver,
  sync_signal,
  warning,
};

template <>
struct EnumNames<MessageKind> {
  static constexpr std::array<std::pair<MessageKind, std::string_view>, 25> items{{
      {MessageKind::ue_state, "ue_state"},
      {MessageKind::mib, "mib"},
      {MessageKind::sib1, "sib1"},
      {MessageKind::sib3, "sib3"},
      {MessageKind::sib5, "sib5"},
      {MessageKind::sib7, "sib7"},
      {MessageKind::paging, "paging"},
      {MessageKind::rrc_setup, "rrc_setup"},
      {MessageKind::rrc_release, "rrc_release"},
      {MessageKind::rrc_reconfiguration, "rrc_reconfiguration"},
      {MessageKind::measurement_report, "measurement_report"},
      {MessageKind::handover_failure, "handover_failure"},
      {MessageKind::rlf, "rlf"},
      {MessageKind::reestablishment_request, "reestablishment_request"},
      {MessageKind::reestablishment_reject, "reestablishment_reject"},
      {MessageKind::cell_reselection, "cell_reselection"},
      {MessageKind::attach_request, "attach_request"},
      {MessageKind::tau_request, "tau_request"},
      {MessageKind::identity_request, "identity_request"},
      {MessageKind::identity_response, "identity_response"},
      {MessageKind::nas_reject, "nas_reject"},
      {MessageKind::security_mode_command, "security_mode_command"},
      {MessageKind::sms_deliver, "sms_deliver"},
      {MessageKind::sync_signal, "sync_signal"},
      {MessageKind::warning, "warning"},
  }};
};

inline Layer default_layer(MessageKind k)
{
  switch (k) {
  case MessageKind::ue_state:
  case MessageKind::warning: return Layer::internal;
  case MessageKind::sync_signal: return Layer::phy;
  case MessageKind::attach_request:
  case MessageKind::tau_request:
  case MessageKind::identity_request:
  case MessageKind::identity_response:
  case MessageKind::nas_reject:
  case MessageKind::security_mode_command:
  case MessageKind::sms_deliver: return Layer::nas;
  default: return Layer::rrc;
  }
}

using FieldValue = std::variant<bool, std::int64_t, double, std::string>;

struct RfFeatureVector {
  double cfo_hz = 0.0;
  double sync_error_ns = 0.0;
  double mag_error_pct = 0.0;
  bool operator==(const RfFeatureVector&) const = default;
};

struct PhyInfo {
  std::optional<double> rsrp_dbm;
  std::optional<int> ta_command;
  std::optional<double> frame_timing_error_ns;
  std::optional<RfFeatureVector> rf;
  bool operator==(const PhyInfo&) const = default;
};

inline const std::string kBroadcast = "broadcast";

struct TraceEvent {
  std::int64_t t_ms = 0;
  std::string src;
  std::string dst;
  Layer layer = Layer::rrc;
  MessageKind kind = MessageKind::warning;
  std::map<std::string, FieldValue> fields;
  std::optional<PhyInfo> phy;

  bool operator==(const TraceEvent&) const = default;

  bool has(const std::string& key) const { return fields.count(key) != 0; }

  std::optional<std::int64_t> get_int(const std::string& key) const
  {
    auto it = fields.find(key);
    if (it == fields.end()) {
      return std::nullopt;
    }
    if (const auto* v = std::get_if<std::int64_t>(&it->second)) {
      return *v;
    }
    return std::nullopt;
  }

  bool get_bool(const std::string& key) const
  {
    auto it = fields.find(key);
    if (it == fields.end()) {
      return false;
    }
    const auto* v = std::get_if<bool>(&it->second);
    return v && *v;
  }

  std::optional<std::string> get_str(const std::string& key) const
  {
    auto it = fields.find(key);
    if (it == fields.end()) {
      return std::nullopt;
    }
    if (const auto* v = std::get_if<std::string>(&it->second)) {
      return *v;
    }
    return std::nullopt;
  }
};

inline TraceEvent make_event(std::int64_t t_ms, std::string src, std::string dst, MessageKind kind,
                             std::map<std::string, FieldValue> fields = {})
{
  TraceEvent e;
  e.t_ms = t_ms;
  e.src = std::move(src);
  e.dst = std::move(dst);
  e.kind = kind;
  e.layer = default_layer(kind);
  e.fields = std::move(fields);
  return e;
}

// Stable: equal timestamps keep emission order.
inline void sort_trace(std::vector<TraceEvent>& trace)
{
  std::stable_sort(trace.begin(), trace.end(),
                   [](const TraceEvent& a, const TraceEvent& b) { return a.t_ms < b.t_ms; });
}

inline nlohmann::json event_to_json(const TraceEvent& e)
{
  nlohmann::json j;
  j["t_ms"] = e.t_ms;
  j["src"] = e.src;
  j["dst"] = e.dst;
  j["layer"] = to_string(e.layer);
  j["kind"] = to_string(e.kind);
  nlohmann::json f = nlohmann::json::object();
  for (const auto& [k, v] : e.fields) {
    std::visit([&](const auto& x) { f[k] = x; }, v);
  }
  j["fields"] = std::move(f);
  if (e.phy) {
    nlohmann::json p = nlohmann::json::object();
    if (e.phy->rsrp_dbm) {
      p["rsrp_dbm"] = *e.phy->rsrp_dbm;
    }
    if (e.phy->ta_command) {
      p["ta_command"] = *e.phy->ta_command;
    }
    if (e.phy->frame_timing_error_ns) {
      p["frame_timing_error_ns"] = *e.phy->frame_timing_error_ns;
    }
    if (e.phy->rf) {
      p["rf"] = {{"cfo_hz", e.phy->rf->cfo_hz},
                 {"sync_error_ns", e.phy->rf->sync_error_ns},
                 {"mag_error_pct", e.phy->rf->mag_error_pct}};
    }
    j["phy"] = std::move(p);
  }
  return j;
}

inline TraceEvent event_from_json(const nlohmann::json& j)
{
  TraceEvent e;
  e.t_ms = j.at("t_ms").get<std::int64_t>();
  e.src = j.at("src").get<std::string>();
  e.dst = j.at("dst").get<std::string>();
  const auto layer = parse_enum<Layer>(j.at("layer").get<std::string>());
  const auto kind = parse_enum<MessageKind>(j.at("kind").get<std::string>());
  if (!layer || !kind) {
    throw std::invalid_argument("trace event with unknown layer or kind");
  }
  e.layer = *layer;
  e.kind = *kind;
  for (const auto& [k, v] : j.at("fields").items()) {
    if (v.is_boolean()) {
      e.fields[k] = v.get<bool>();
    } else if (v.is_number_integer()) {
      e.fields[k] = v.get<std::int64_t>();
    } else if (v.is_number()) {
      e.fields[k] = v.get<double>();
    } else {
      e.fields[k] = v.get<std::string>();
    }
  }
  if (j.contains("phy")) {
    const auto& p = j["phy"];
    PhyInfo phy;
    if (p.contains("rsrp_dbm")) {
      phy.rsrp_dbm = p["rsrp_dbm"].get<double>();
    }
    if (p.contains("ta_command")) {
      phy.ta_command = p["ta_command"].get<int>();
    }
    if (p.contains("frame_timing_error_ns")) {
      phy.frame_timing_error_ns = p["frame_timing_error_ns"].get<double>();
    }
    if (p.contains("rf")) {
      phy.rf = RfFeatureVector{p["rf"].at("cfo_hz").get<double>(),
                               p["rf"].at("sync_error_ns").get<double>(),
                               p["rf"].at("mag_error_pct").get<double>()};
    }
    e.phy = phy;
  }
  return e;
}

// One JSON object per line, keys sorted.
inline void write_jsonl(std::ostream& os, const std::vector<TraceEvent>& trace)
{
  for (const auto& e : trace) {
    os << event_to_json(e).dump() << '\n';
  }
}

inline std::string to_jsonl(const std::vector<TraceEvent>& trace)
{
  std::ostringstream os;
  write_jsonl(os, trace);
  return os.str();
}

inline std::vector<TraceEvent> read_jsonl(std::istream& is)
{
  std::vector<TraceEvent> out;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty()) {
      out.push_back(event_from_json(nlohmann::json::parse(line)));
    }
  }
  return out;
}

} // namespace fbsim

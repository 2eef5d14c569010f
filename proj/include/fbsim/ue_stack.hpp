#pragma once

#include "fbsim/config_space.hpp"
#include "fbsim/radio_env.hpp"
#include "fbsim/rng.hpp"
#include "fbsim/trace.hpp"
#include "fbsim/ue_context.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace fbsim {

constexpr std::int64_t kDosDurationMs = 30LL * 60 * 1000;
constexpr double kRlfSuppressionDb = 20.0;

// ---- cell ranking -----------------------------------------------------------

inline bool audible(const Environment& env, const CellProfile& cell, const UeContext& ue)
{
  return env.rx_dbm(cell, ue) > env.settings.sensitivity_dbm;
}

inline bool barred_for(const UeContext& ue, const CellProfile& cell)
{
  return ue.blacklist_tac.count(cell.params.tac) != 0 ||
      ue.blacklist_plmn.count(cell.params.plmn) != 0;
}

// Priority of `cell`'s frequency as configured by the UE's serving cell SIBs;
// frequencies the serving cell does not list fall back to the cell's own value.
inline int frequency_priority(const Environment& env, const UeContext& ue, const CellProfile& cell)
{
  if (ue.serving) {
    if (const auto* s = env.find_cell(*ue.serving)) {
      auto it = s->sib_resel_priorities.find(cell.params.earfcn);
      if (it != s->sib_resel_priorities.end()) {
        return it->second;
      }
    }
  }
  return cell.params.resel_priority;
}

// Idle-mode LTE reselection. Returns the cell to camp on, or nullopt to stay.
inline std::optional<std::string> reselect(const UeContext& ue, const Environment& env)
{
  const CellProfile* serving = ue.serving ? env.find_cell(*ue.serving) : nullptr;
  const bool serving_ok = serving && serving->params.rat == Rat::lte && audible(env, *serving, ue) &&
      !barred_for(ue, *serving);
  const double s_rx = serving_ok ? env.rx_dbm(*serving, ue) : 0.0;
  const int s_prio = serving_ok ? frequency_priority(env, ue, *serving) : 0;

  const CellProfile* best = nullptr;
  std::tuple<int, double, int> best_key;
  for (const auto& c : env.cells) {
    if (&c == serving || c.params.rat != Rat::lte || !audible(env, c, ue) || barred_for(ue, c)) {
      continue;
    }
    const int prio = frequency_priority(env, ue, c);
    const double rx = env.rx_dbm(c, ue);
    if (serving_ok) {
      const double margin = rx - s_rx;
      const bool eligible = (prio > s_prio && margin > 0.0) ||
          (prio == s_prio && margin > env.settings.hysteresis_db);
      if (!eligible) {
        continue;
      }
    }
    const std::tuple<int, double, int> key{-prio, -rx, c.params.pci};
    if (!best || key < best_key) {
      best = &c;
      best_key = key;
    }
  }
  if (!best) {
    return std::nullopt;
  }
  return best->id;
}

// ---- measurement reporting ----------------------------------------------------

enum class ReportTrigger { periodic, event_a4 };

struct MeasResult {
  int pci = 0;
  int earfcn = 0;
  double rsrp_dbm = 0.0;
  double rsrq_db = 0.0;
  std::string cell;
};

struct MeasurementReport {
  std::vector<MeasResult> results;
  ReportTrigger trigger = ReportTrigger::periodic;
};

// Crude RSRQ proxy: -10 dB at parity with the serving cell, 0.25 dB per dB of
// advantage, clamped to the reportable range.
inline double rsrq_proxy(double rsrp, double serving_rsrp)
{
  return std::clamp(-10.0 + 0.25 * (rsrp - serving_rsrp), -19.5, -3.0);
}

inline std::optional<MeasurementReport> maybe_report_a4(const UeContext& ue, const Environment& env,
                                                        double a4_threshold_db)
{
  if (ue.rrc_state != RrcState::connected || !ue.serving) {
    return std::nullopt;
  }
  const auto* serving = env.find_cell(*ue.serving);
  if (!serving) {
    return std::nullopt;
  }
  const double s_rx = env.rx_dbm(*serving, ue);
  MeasurementReport rep;
  rep.trigger = ReportTrigger::event_a4;
  for (const auto& c : env.cells) {
    if (&c == serving || c.params.rat != Rat::lte || !audible(env, c, ue)) {
      continue;
    }
    const double rx = env.rx_dbm(c, ue);
    if (rx - s_rx >= a4_threshold_db) {
      rep.results.push_back({c.params.pci, c.params.earfcn, rx, rsrq_proxy(rx, s_rx), c.id});
    }
  }
  if (rep.results.empty()) {
    return std::nullopt;
  }
  std::stable_sort(rep.results.begin(), rep.results.end(),
                   [](const MeasResult& a, const MeasResult& b) { return a.rsrp_dbm > b.rsrp_dbm; });
  return rep;
}

// ---- NAS / RRC reactions ------------------------------------------------------

inline PhyInfo rsrp_phy(double rsrp)
{
  PhyInfo p;
  p.rsrp_dbm = rsrp;
  return p;
}

// Moves an idle UE after a blacklist update; emits the reselection if any.
inline void reselect_after_bar(UeContext& ue, const Environment& env, std::int64_t now,
                               std::vector<TraceEvent>& out)
{
  ue.rrc_state = RrcState::idle;
  const auto next = reselect(ue, env);
  if (next && next != ue.serving) {
    out.push_back(make_event(now, ue.ue_id, *next, MessageKind::cell_reselection,
                             {{"reason", std::string("barred")}}));
    ue.serving = next;
  } else if (!next) {
    const auto* s = ue.serving ? env.find_cell(*ue.serving) : nullptr;
    if (s && barred_for(ue, *s)) {
      ue.serving.reset();
    }
  }
}

// UE reaction to one downlink message from `msg.src`.
inline std::vector<TraceEvent> handle_nas(UeContext& ue, const Environment& env,
                                          const TraceEvent& msg, std::int64_t now_ms)
{
  std::vector<TraceEvent> out;
  const auto* sender = env.find_cell(msg.src);
  if (!sender) {
    out.push_back(make_event(now_ms, ue.ue_id, kBroadcast, MessageKind::warning,
                             {{"text", std::string("message from unknown cell " + msg.src + " ignored")}}));
    return out;
  }
  const double rsrp = env.rx_dbm(*sender, ue);

  switch (msg.kind) {
  case MessageKind::identity_request: {
    ue.identity_exposed = true;
    auto e = make_event(now_ms, ue.ue_id, sender->id, MessageKind::identity_response,
                        {{"id_type", std::string("imsi")},
                         {"identity", ue.imsi},
                         {"contains_imsi", true}});
    e.phy = rsrp_phy(rsrp);
    out.push_back(std::move(e));
    break;
  }
  case MessageKind::nas_reject: {
    const auto cause = msg.get_int("reject_cause").value_or(0);
    switch (cause) {
    case 22:
    case 42:
      ue.dos_until_ms = now_ms + kDosDurationMs;
      ue.rrc_state = RrcState::idle;
      break;
    case 3:
    case 6:
    case 7:
    case 8:
      ue.dos_until_ms = kDosForever;
      ue.rrc_state = RrcState::idle;
      break;
    case 9:
      if (!ue.in_dos(now_ms)) {
        ue.identity_exposed = true;
        auto e = make_event(now_ms, ue.ue_id, sender->id, MessageKind::attach_request,
                            {{"id_type", std::string("imsi")},
                             {"identity", ue.imsi},
                             {"contains_imsi", true}});
        e.phy = rsrp_phy(rsrp);
        out.push_back(std::move(e));
      }
      break;
    case 12:
    case 13:
    case 15:
      ue.blacklist_tac.insert(sender->params.tac);
      reselect_after_bar(ue, env, now_ms, out);
      break;
    case 11:
    case 14:
      ue.blacklist_plmn.insert(sender->params.plmn);
      reselect_after_bar(ue, env, now_ms, out);
      break;
    default:
      break;
    }
    break;
  }
  case MessageKind::rrc_release: {
    ue.rrc_state = RrcState::idle;
    const auto target = msg.get_int("target_earfcn");
    if (msg.has("redirect_vector") && target) {
      const CellProfile* legacy = nullptr;
      for (const auto& c : env.cells) {
        if (c.params.rat != Rat::lte && c.params.earfcn == *target) {
          legacy = &c;
          break;
        }
      }
      if (legacy) {
        out.push_back(make_event(now_ms, ue.ue_id, legacy->id, MessageKind::cell_reselection,
                                 {{"rat", std::string(to_string(legacy->params.rat))},
                                  {"reason", std::string("redirect")}}));
        ue.serving = legacy->id;
        if (ue.legacy_capable && !ue.in_dos(now_ms)) {
          auto e = make_event(now_ms, ue.ue_id, legacy->id, MessageKind::attach_request,
                              {{"rat", std::string(to_string(legacy->params.rat))},
                               {"id_type", std::string("tmsi")},
                               {"contains_imsi", false}});
          e.phy = rsrp_phy(env.rx_dbm(*legacy, ue));
          out.push_back(std::move(e));
        }
      }
    }
    break;
  }
  case MessageKind::paging: {
    const auto id = msg.get_str("identity");
    if (msg.get_str("id_type") == std::string("imsi") && id == ue.imsi && !ue.in_dos(now_ms)) {
      ue.identity_exposed = true;
      ue.rrc_state = RrcState::connected;
      ue.serving = sender->id;
      auto e = make_event(now_ms, ue.ue_id, sender->id, MessageKind::attach_request,
                          {{"id_type", std::string("imsi")},
                           {"identity", ue.imsi},
                           {"contains_imsi", true}});
      e.phy = rsrp_phy(rsrp);
      out.push_back(std::move(e));
    }
    break;
  }
  default:
    break;
  }
  return out;
}

// Co-channel suppression of the serving link by a rogue cell. On failure the
// UE re-establishes towards the strongest cell, which lacks its context,
// and falls back to a fresh connection there.
inline std::vector<TraceEvent> radio_link_check(UeContext& ue, const Environment& env,
                                                std::int64_t now_ms, std::int64_t step_ms = 10,
                                                std::optional<int> ta = std::nullopt)
{
  std::vector<TraceEvent> out;
  if (ue.rrc_state != RrcState::connected || !ue.serving) {
    return out;
  }
  const auto* serving = env.find_cell(*ue.serving);
  if (!serving) {
    return out;
  }
  const double s_rx = env.rx_dbm(*serving, ue);
  const CellProfile* jammer = nullptr;
  double j_rx = 0.0;
  for (const auto& c : env.cells) {
    if (c.legit || &c == serving || c.params.earfcn != serving->params.earfcn) {
      continue;
    }
    const double rx = env.rx_dbm(c, ue);
    if (rx - s_rx >= kRlfSuppressionDb && (!jammer || rx > j_rx)) {
      jammer = &c;
      j_rx = rx;
    }
  }
  if (!jammer) {
    return out;
  }
  std::int64_t t = now_ms;
  out.push_back(make_event(t, ue.ue_id, serving->id, MessageKind::rlf,
                           {{"suppression_db", j_rx - s_rx}}));
  t += step_ms;
  out.push_back(make_event(t, ue.ue_id, jammer->id, MessageKind::reestablishment_request,
                           {{"cause", std::string("other_failure")}}));
  t += step_ms;
  out.push_back(make_event(t, jammer->id, ue.ue_id, MessageKind::reestablishment_reject));
  t += step_ms;
  auto setup = make_event(t, jammer->id, ue.ue_id, MessageKind::rrc_setup,
                          {{"reason", std::string("new_connection")}});
  PhyInfo phy = rsrp_phy(j_rx);
  phy.ta_command = ta;
  setup.phy = phy;
  out.push_back(std::move(setup));
  ue.serving = jammer->id;
  ue.rrc_state = RrcState::connected;
  return out;
}

// ---- hijack evaluation --------------------------------------------------------

inline double hijack_threshold_db(HijackMethod m)
{
  switch (m) {
  case HijackMethod::jamming: return 20.0;
  case HijackMethod::handover: return 3.0;
  case HijackMethod::cell_reselection: return 5.0;
  }
  return 0.0;
}

inline constexpr std::array<double, 5> kRateMarginsDb{3, 5, 10, 20, 30};

// Empirical success rate (%) per method at the tabulated margins.
inline double tabulated_rate(HijackMethod m, std::size_t column)
{
  static constexpr double rates[3][5] = {
      {0, 0, 0, 30, 100},
      {20, 70, 100, 100, 100},
      {0, 20, 70, 100, 100},
  };
  return rates[static_cast<int>(m)][column];
}

// Success probability at the nearest tabulated margin; ties go to the lower one.
inline double success_probability(HijackMethod m, double margin_db)
{
  std::size_t best = 0;
  for (std::size_t i = 1; i < kRateMarginsDb.size(); ++i) {
    if (std::abs(kRateMarginsDb[i] - margin_db) < std::abs(kRateMarginsDb[best] - margin_db)) {
      best = i;
    }
  }
  return tabulated_rate(m, best) / 100.0;
}

// Margin of the rogue cell over the UE's serving cell at the UE.
inline double hijack_margin_db(const UeContext& ue, const CellProfile& fbs, const Environment& env)
{
  const auto* serving = ue.serving ? env.find_cell(*ue.serving) : nullptr;
  if (!serving) {
    return env.rx_dbm(fbs, ue) - env.best_legit_rx(ue.position);
  }
  return env.rx_dbm(fbs, ue) - env.rx_dbm(*serving, ue);
}

// Frequency/PCI/state requirements of each hijack method.
inline bool hijack_requirements_met(HijackMethod m, const UeContext& ue, const CellProfile& fbs,
                                    const Environment& env, std::int64_t now_ms)
{
  if (ue.in_dos(now_ms) || barred_for(ue, fbs) || !ue.serving || *ue.serving == fbs.id) {
    return false;
  }
  const auto* serving = env.find_cell(*ue.serving);
  if (!serving || !serving->legit) {
    return false;
  }
  switch (m) {
  case HijackMethod::jamming:
    return fbs.params.earfcn == serving->params.earfcn;
  case HijackMethod::handover: {
    const bool neighbor = std::find(serving->neighbors.begin(), serving->neighbors.end(),
                                    fbs.params.pci) != serving->neighbors.end();
    return ue.rrc_state == RrcState::connected && neighbor &&
        fbs.params.pci != serving->params.pci;
  }
  case HijackMethod::cell_reselection: {
    if (ue.rrc_state != RrcState::idle) {
      return false;
    }
    const int f_prio = frequency_priority(env, ue, fbs);
    const int s_prio = frequency_priority(env, ue, *serving);
    if (f_prio > s_prio) {
      return true;
    }
    return f_prio == s_prio && fbs.params.earfcn == serving->params.earfcn &&
        fbs.params.pci != serving->params.pci;
  }
  }
  return false;
}

inline bool hijack_succeeds(HijackMethod m, const UeContext& ue, const CellProfile& fbs,
                            const Environment& env, std::int64_t now_ms, HijackMode mode, Rng& rng)
{
  if (!hijack_requirements_met(m, ue, fbs, env, now_ms)) {
    return false;
  }
  const double margin = hijack_margin_db(ue, fbs, env);
  if (mode == HijackMode::deterministic) {
    return margin > hijack_threshold_db(m);
  }
  return rng.bernoulli(success_probability(m, margin));
}

} // namespace fbsim

#pragma once

#include "fbsim/config_space.hpp"
#include "fbsim/dependency_checker.hpp"
#include "fbsim/phy_artifacts.hpp"
#include "fbsim/radio_env.hpp"
#include "fbsim/rng.hpp"
#include "fbsim/trace.hpp"
#include "fbsim/ue_stack.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbsim {

constexpr std::int64_t kFlowStepMs = 10;
constexpr double kDefaultPagingCycleMs = 1280.0;
inline const std::string kFbsCellId = "fbs0";

struct LocationRecord {
  bool present = false;
  std::vector<std::pair<std::int64_t, double>> rsrp_series; // (t_ms, rsrp)
};

struct Outcomes {
  std::set<std::string> hijacked_ues;
  std::set<std::string> imsis_captured;
  std::set<std::string> dos_applied;
  std::set<std::string> redirected_ues;
  std::set<std::string> sms_delivered;
  std::map<std::string, LocationRecord> locations;

  void merge(const Outcomes& o)
  {
    hijacked_ues.insert(o.hijacked_ues.begin(), o.hijacked_ues.end());
    imsis_captured.insert(o.imsis_captured.begin(), o.imsis_captured.end());
    dos_applied.insert(o.dos_applied.begin(), o.dos_applied.end());
    redirected_ues.insert(o.redirected_ues.begin(), o.redirected_ues.end());
    sms_delivered.insert(o.sms_delivered.begin(), o.sms_delivered.end());
    for (const auto& [k, v] : o.locations) {
      auto& dst = locations[k];
      dst.present = dst.present || v.present;
      dst.rsrp_series.insert(dst.rsrp_series.end(), v.rsrp_series.begin(), v.rsrp_series.end());
    }
  }
};

struct RotationSlot {
  std::int64_t t_ms = 0;
  std::size_t set_index = 0;
};

// Rotation start times in [start, end), one slot per dwell.
inline std::vector<RotationSlot> rotation_schedule(std::size_t n_sets, std::int64_t dwell_ms,
                                                   std::int64_t start_ms, std::int64_t end_ms)
{
  std::vector<RotationSlot> out;
  if (n_sets == 0 || dwell_ms <= 0) {
    return out;
  }
  std::size_t i = 0;
  for (std::int64_t t = start_ms; t < end_ms; t += dwell_ms, ++i) {
    out.push_back({t, i % n_sets});
  }
  return out;
}

struct LaunchPlan {
  std::vector<CellProfile> cells;       // cells[0] is the primary FBS
  std::vector<CellParams> param_sets;   // rotation sets of cells[0]; size 1 when fixed
  std::vector<std::vector<int>> neighbor_sets;
  std::vector<std::map<int, int>> priority_sets;
  double paging_mean_ms = kDefaultPagingCycleMs;
};

// Scanned cell the primary FBS impersonates for a given hijack method.
inline const ScanEntry* clone_target(HijackMethod method, const ScanDatabase& db)
{
  if (db.empty()) {
    return nullptr;
  }
  switch (method) {
  case HijackMethod::jamming:
    return &db.strongest();
  case HijackMethod::handover: {
    const auto cands = handover_candidates(db);
    return cands.empty() ? &db.strongest() : cands.front();
  }
  case HijackMethod::cell_reselection: {
    const auto& prio = db.strongest().resel_priorities;
    int top_freq = db.strongest().params.earfcn;
    int top_prio = -1;
    for (const auto& [f, p] : prio) {
      if (p > top_prio) {
        top_prio = p;
        top_freq = f;
      }
    }
    const ScanEntry* fallback = nullptr;
    for (const auto& e : db.entries) {
      if (e.params.earfcn != top_freq) {
        continue;
      }
      if (&e != &db.strongest()) {
        return &e;
      }
      fallback = &e;
    }
    return fallback ? fallback : &db.strongest();
  }
  }
  return nullptr;
}

inline CellProfile adapt_to(const ConfigProfile& profile, const CellProfile& base,
                            const ScanEntry& entry, const ScanDatabase& db, Rng& rng)
{
  const auto mode = profile.launch.adaptation == Adaptation::full ? AdaptationMode::full
                                                                   : AdaptationMode::none;
  CellProfile c = apply_adaptation(base, entry, db, mode, rng);
  // Handover only works when the PCI is one the serving cell lists.
  if (mode == AdaptationMode::none && profile.hijack.method == HijackMethod::handover) {
    c.params.pci = entry.params.pci;
  }
  return c;
}

inline LaunchPlan launch_cells(const ConfigProfile& profile, const ScanDatabase& db,
                               const Environment& env, Rng& rng)
{
  LaunchPlan plan;
  const auto hw = fbs_hardware(profile.launch.hw_compensation);

  CellProfile fbs;
  fbs.id = kFbsCellId;
  fbs.legit = false;
  fbs.tx_power_dbm = profile.launch.tx_power_dbm;
  fbs.position = env.fbs_position;
  fbs.anchored_margin_db = profile.hijack.power_margin_db;
  fbs.rf_preset = hw.rf_preset;
  fbs.paging.mean_interval_ms = kDefaultPagingCycleMs;

  const ScanEntry* target = clone_target(profile.hijack.method, db);
  if (profile.launch.manual_params) {
    fbs.params = *profile.launch.manual_params;
    plan.param_sets.push_back(fbs.params);
    plan.neighbor_sets.push_back(fbs.neighbors);
    plan.priority_sets.push_back(fbs.sib_resel_priorities);
  } else if (target) {
    fbs = adapt_to(profile, fbs, *target, db, rng);
    plan.param_sets.push_back(fbs.params);
    plan.neighbor_sets.push_back(fbs.neighbors);
    plan.priority_sets.push_back(fbs.sib_resel_priorities);
    if (profile.launch.cell_iteration == CellIteration::round_robin) {
      for (const auto& e : db.entries) {
        if (&e == target || e.params.rat != Rat::lte) {
          continue;
        }
        const auto c = adapt_to(profile, fbs, e, db, rng);
        plan.param_sets.push_back(c.params);
        plan.neighbor_sets.push_back(c.neighbors);
        plan.priority_sets.push_back(c.sib_resel_priorities);
      }
    }
  } else {
    plan.param_sets.push_back(fbs.params);
    plan.neighbor_sets.push_back(fbs.neighbors);
    plan.priority_sets.push_back(fbs.sib_resel_priorities);
  }
  if (profile.launch.paging_reproduction && target) {
    plan.paging_mean_ms = target->paging_pattern.mean_interval_ms;
  }
  fbs.paging.mean_interval_ms = plan.paging_mean_ms;
  plan.cells.push_back(fbs);

  for (std::size_t i = 0; i < profile.launch.additional_cells.size(); ++i) {
    CellProfile extra = fbs;
    extra.id = "fbs" + std::to_string(i + 1);
    extra.params = profile.launch.additional_cells[i];
    extra.neighbors.clear();
    extra.sib_resel_priorities.clear();
    plan.cells.push_back(std::move(extra));
  }
  return plan;
}

struct PipelineRun {
  ConfigProfile profile;
  ValidationReport validation;
  ScanDatabase scan_db;
  std::int64_t launch_ms = 0;
  std::vector<CellProfile> fbs_cells;
  std::vector<RotationSlot> schedule;
  std::vector<TraceEvent> trace;
  Outcomes outcomes;
};

namespace pipeline_detail {

inline std::string join_ints(const std::vector<int>& v)
{
  std::string out;
  for (int x : v) {
    if (!out.empty()) {
      out += ',';
    }
    out += std::to_string(x);
  }
  return out;
}

inline std::string join_priorities(const std::map<int, int>& m)
{
  std::string out;
  for (const auto& [f, p] : m) {
    if (!out.empty()) {
      out += ',';
    }
    out += std::to_string(f) + ':' + std::to_string(p);
  }
  return out;
}

inline std::map<std::string, FieldValue> identity_fields(const CellProfile& c)
{
  return {{"plmn", c.params.plmn},
          {"tac", std::int64_t{c.params.tac}},
          {"cell_id", c.params.cell_id},
          {"earfcn", std::int64_t{c.params.earfcn}},
          {"pci", std::int64_t{c.params.pci}},
          {"band", std::int64_t{c.params.band}},
          {"rat", std::string(to_string(c.params.rat))},
          {"bandwidth_mhz", c.params.bandwidth_mhz}};
}

} // namespace pipeline_detail

// Mutable state of one run; owns its environment copy.
class Pipeline {
public:
  Pipeline(ConfigProfile profile, Environment env)
      : env_(std::move(env)),
        seed_(profile.seed),
        rng_adapt_(seed_, "adaptation"),
        rng_hijack_(seed_, "hijack"),
        rng_ta_(seed_, "ta"),
        rng_paging_(seed_, "paging"),
        rng_phy_(seed_, "phy")
  {
    run_.profile = std::move(profile);
  }

  PipelineRun execute()
  {
    const auto& s = env_.settings;
    emit_initial_state();
    emit_legit_background();

    run_.scan_db = scan(env_, s.scan_dwell_ms, s.radios);
    run_.launch_ms = run_.scan_db.scan_time_ms;

    auto checked = check(run_.profile, run_.scan_db);
    run_.validation = checked.report;
    if (!checked.report.ok()) {
      throw std::invalid_argument("profile rejected by dependency checker:\n" +
                                  checked.report.to_text());
    }
    run_.profile = checked.profile;
    const auto& p = run_.profile;

    plan_ = launch_cells(p, run_.scan_db, env_, rng_adapt_);
    for (const auto& c : plan_.cells) {
      env_.cells.push_back(c);
    }
    run_.fbs_cells = plan_.cells;
    const std::int64_t end = s.duration_ms;
    const std::int64_t t0 = run_.launch_ms;
    if (p.launch.cell_iteration == CellIteration::round_robin) {
      run_.schedule = rotation_schedule(plan_.param_sets.size(), p.launch.dwell_ms, t0, end);
    } else if (t0 < end) {
      run_.schedule = {{t0, 0}};
    }
    emit_fbs_background(t0, end);
    check_targets(t0);

    std::size_t slot = 0;
    for (std::int64_t t = t0; t < end; t += s.tick_ms) {
      while (slot < run_.schedule.size() && run_.schedule[slot].t_ms <= t) {
        apply_slot(run_.schedule[slot]);
        ++slot;
      }
      env_.advance_clock(t);
      tick(t);
    }
    run_.fbs_cells.clear();
    for (const auto& c : env_.cells) {
      if (!c.legit) {
        run_.fbs_cells.push_back(c);
      }
    }
    sort_trace(run_.trace);
    return std::move(run_);
  }

  // Application phase for one freshly hijacked UE starting at `t`.
  std::int64_t execute_application(UeContext& ue, std::int64_t t)
  {
    const auto& app = run_.profile.app;
    const auto& fbs = primary();
    if (!selected(ue)) {
      push(make_event(t, fbs.id, ue.ue_id, MessageKind::rrc_release));
      ue.rrc_state = RrcState::idle;
      return t;
    }
    switch (app.variation) {
    case Variation::imsi_identity_request_reject:
      t = identity_procedure(ue, t);
      t += kFlowStepMs;
      send_nas_reject(ue, t, app.reject_cause);
      break;
    case Variation::imsi_reject_based:
      send_nas_reject(ue, t, app.reject_cause);
      if (ue.serving == fbs.id && ue.rrc_state != RrcState::idle) {
        t += kFlowStepMs;
        push(make_event(t, fbs.id, ue.ue_id, MessageKind::rrc_release));
        ue.rrc_state = RrcState::idle;
      }
      break;
    case Variation::imsi_identity_request_release:
      t = identity_procedure(ue, t);
      t += kFlowStepMs;
      push(make_event(t, fbs.id, ue.ue_id, MessageKind::rrc_release));
      ue.rrc_state = RrcState::idle;
      break;
    case Variation::loc_tracking_coarse:
    case Variation::loc_tracking_fine:
      t = identity_procedure(ue, t);
      t += kFlowStepMs;
      push(make_event(t, fbs.id, ue.ue_id, MessageKind::rrc_release));
      ue.rrc_state = RrcState::idle;
      next_page_[ue.ue_id] = t + app.tracking_period_ms;
      break;
    case Variation::dos:
      send_nas_reject(ue, t, app.reject_cause);
      if (ue.dos_until_ms) {
        run_.outcomes.dos_applied.insert(ue.ue_id);
      }
      break;
    case Variation::redirect_sib7:
    case Variation::redirect_carrier_info:
    case Variation::redirect_idle_mode_mobility:
      t = redirect(ue, t);
      break;
    }
    return t;
  }

private:
  const CellProfile& primary() const { return *env_.find_cell(kFbsCellId); }
  CellProfile& primary_mut()
  {
    for (auto& c : env_.cells) {
      if (c.id == kFbsCellId) {
        return c;
      }
    }
    throw std::logic_error("primary FBS missing");
  }

  const CellProfile* legacy_cell() const
  {
    for (const auto& c : env_.cells) {
      if (!c.legit && c.params.rat != Rat::lte) {
        return &c;
      }
    }
    return nullptr;
  }

  void push(TraceEvent e) { run_.trace.push_back(std::move(e)); }

  void push_all(std::vector<TraceEvent> events)
  {
    for (auto& e : events) {
      push(std::move(e));
    }
  }

  TaModel fbs_ta_model() const
  {
    TaModel m;
    m.mode = run_.profile.launch.ta_diversification ? TaMode::diversified : TaMode::fbs_default;
    return m;
  }

  int fbs_ta(const UeContext& ue)
  {
    return ta_command(fbs_ta_model(), distance(env_.fbs_position, ue.position), rng_ta_);
  }

  void emit_initial_state()
  {
    Rng ta_rng(seed_, "legit_ta");
    for (const auto& ue : env_.ues) {
      auto e = make_event(0, ue.ue_id, kBroadcast, MessageKind::ue_state,
                          {{"state", std::string(to_string(ue.rrc_state))},
                           {"serving", ue.serving.value_or("")}});
      if (ue.serving) {
        const auto* cell = env_.find_cell(*ue.serving);
        PhyInfo phy;
        phy.rsrp_dbm = env_.rx_dbm(*cell, ue);
        if (ue.rrc_state == RrcState::connected) {
          phy.ta_command = ta_command(TaModel{}, distance(cell->position, ue.position), ta_rng);
        }
        e.phy = phy;
      }
      push(std::move(e));
    }
  }

  void emit_broadcast(std::int64_t t, const CellProfile& c)
  {
    using namespace pipeline_detail;
    push(make_event(t, c.id, kBroadcast, MessageKind::mib,
                    {{"bandwidth_mhz", c.params.bandwidth_mhz}}));
    auto sib1 = identity_fields(c);
    sib1["neighbor_pcis"] = join_ints(c.neighbors);
    push(make_event(t, c.id, kBroadcast, MessageKind::sib1, std::move(sib1)));
    if (c.params.rat != Rat::lte) {
      return;
    }
    push(make_event(t, c.id, kBroadcast, MessageKind::sib3,
                    {{"resel_priority", std::int64_t{c.params.resel_priority}}}));
    push(make_event(t, c.id, kBroadcast, MessageKind::sib5,
                    {{"resel_priorities", join_priorities(c.sib_resel_priorities)}}));
    if (!c.legit && run_.profile.app.variation == Variation::redirect_sib7) {
      if (const auto* legacy = legacy_cell()) {
        push(make_event(t, c.id, kBroadcast, MessageKind::sib7,
                        {{"target_rat", std::string(to_string(legacy->params.rat))},
                         {"target_earfcn", std::int64_t{legacy->params.earfcn}},
                         {"target_priority", std::int64_t{kMaxReselPriority}}}));
      }
    }
  }

  void emit_sync(const CellProfile& c, std::int64_t from, std::int64_t to, const ClockModel& clock,
                 const RfSourceParams& rf, Rng& rng)
  {
    const auto interval = env_.settings.phy_report_interval_ms;
    if (from >= to) {
      return;
    }
    const auto frames = static_cast<std::size_t>((to - from) / kFramePeriodMs) + 1;
    const auto series = frame_timing_series(clock, frames, rng);
    for (std::int64_t t = from; t < to; t += interval) {
      const auto frame = static_cast<std::size_t>((t - from) / kFramePeriodMs);
      auto e = make_event(t, c.id, kBroadcast, MessageKind::sync_signal,
                          {{"frame", static_cast<std::int64_t>(frame)}});
      PhyInfo phy;
      phy.frame_timing_error_ns = series[std::min(frame, series.size() - 1)];
      phy.rf = rf_sample(rf, rng);
      e.phy = phy;
      push(std::move(e));
    }
  }

  void emit_paging(const CellProfile& c, std::int64_t from, std::int64_t to, double mean_ms,
                   bool exponential, Rng& rng)
  {
    double t = static_cast<double>(from);
    while (true) {
      t += exponential ? rng.exponential(mean_ms) : mean_ms;
      const auto tm = static_cast<std::int64_t>(std::floor(t));
      if (tm >= to) {
        break;
      }
      push(make_event(tm, c.id, kBroadcast, MessageKind::paging,
                      {{"id_type", std::string("s_tmsi")}}));
    }
  }

  void emit_legit_background()
  {
    const auto end = env_.settings.duration_ms;
    const RfPresetTable presets;
    for (const auto& c : env_.cells) {
      if (!c.legit) {
        continue;
      }
      emit_broadcast(0, c);
      Rng rng(seed_, "legit:" + c.id);
      emit_sync(c, 0, end, legit_clock(), presets.get(c.rf_preset), rng);
      emit_paging(c, 0, end, c.paging.mean_interval_ms, true, rng);
    }
  }

  void emit_fbs_background(std::int64_t t0, std::int64_t end)
  {
    const RfPresetTable presets;
    const auto hw = fbs_hardware(run_.profile.launch.hw_compensation);
    for (const auto& c : env_.cells) {
      if (c.legit) {
        continue;
      }
      if (c.id != kFbsCellId) {
        emit_broadcast(t0, c);
      }
      emit_sync(c, t0, end, hw.clock, presets.get(hw.rf_preset), rng_phy_);
    }
    emit_paging(primary(), t0, end, plan_.paging_mean_ms, run_.profile.launch.paging_reproduction,
                rng_paging_);
  }

  void apply_slot(const RotationSlot& slot)
  {
    auto& fbs = primary_mut();
    fbs.params = plan_.param_sets[slot.set_index];
    fbs.neighbors = plan_.neighbor_sets[slot.set_index];
    fbs.sib_resel_priorities = plan_.priority_sets[slot.set_index];
    emit_broadcast(slot.t_ms, fbs);
  }

  bool targeted_match(const UeContext& ue) const
  {
    const auto& ids = run_.profile.app.target_ids;
    return std::find(ids.begin(), ids.end(), ue.imsi) != ids.end() ||
        std::find(ids.begin(), ids.end(), ue.guti) != ids.end();
  }

  void check_targets(std::int64_t t0)
  {
    if (run_.profile.app.targeting != Targeting::targeted) {
      return;
    }
    const bool any = std::any_of(env_.ues.begin(), env_.ues.end(),
                                 [&](const UeContext& ue) { return targeted_match(ue); });
    if (!any) {
      push(make_event(t0, kFbsCellId, kBroadcast, MessageKind::warning,
                      {{"text", std::string("no UE matches app.target_ids")}}));
    }
  }

  bool selected(const UeContext& ue) const
  {
    const auto& app = run_.profile.app;
    switch (app.targeting) {
    case Targeting::arbitrary: return true;
    case Targeting::targeted: return targeted_match(ue);
    case Targeting::adaptive: {
      Rng r(seed_ ^ fnv1a64(ue.ue_id), "sampling");
      return r.bernoulli(app.sampling_fraction);
    }
    }
    return false;
  }

  void deliver(UeContext& ue, const TraceEvent& msg, std::int64_t t)
  {
    push(msg);
    auto replies = handle_nas(ue, env_, msg, t + kFlowStepMs);
    for (const auto& r : replies) {
      note_uplink(ue, r);
    }
    push_all(std::move(replies));
  }

  void note_uplink(const UeContext& ue, const TraceEvent& e)
  {
    const auto* dst = env_.find_cell(e.dst);
    if (dst && !dst->legit && e.get_bool("contains_imsi")) {
      run_.outcomes.imsis_captured.insert(ue.imsi);
    }
  }

  std::int64_t identity_procedure(UeContext& ue, std::int64_t t)
  {
    const auto& fbs = primary();
    deliver(ue, make_event(t, fbs.id, ue.ue_id, MessageKind::identity_request,
                           {{"id_type", std::string("imsi")}}),
            t);
    t += kFlowStepMs;
    if (is_loc_tracking(run_.profile.app.variation)) {
      record_location(ue, t);
    }
    return t;
  }

  void record_location(const UeContext& ue, std::int64_t t)
  {
    auto& rec = run_.outcomes.locations[ue.ue_id];
    rec.present = true;
    if (run_.profile.app.variation == Variation::loc_tracking_fine) {
      rec.rsrp_series.emplace_back(t, env_.rx_dbm(primary(), ue));
    }
  }

  void send_nas_reject(UeContext& ue, std::int64_t t, int cause)
  {
    deliver(ue, make_event(t, primary().id, ue.ue_id, MessageKind::nas_reject,
                           {{"reject_cause", std::int64_t{cause}}}),
            t);
  }

  std::int64_t redirect(UeContext& ue, std::int64_t t)
  {
    const auto& fbs = primary();
    const auto* legacy = legacy_cell();
    const auto v = run_.profile.app.variation;
    std::map<std::string, FieldValue> fields;
    if (legacy && v != Variation::redirect_sib7) {
      fields["redirect_vector"] = std::string(v == Variation::redirect_carrier_info
                                                  ? "redirected_carrier_info"
                                                  : "idle_mode_mobility_control_info");
      fields["target_earfcn"] = std::int64_t{legacy->params.earfcn};
      fields["target_rat"] = std::string(to_string(legacy->params.rat));
      if (v == Variation::redirect_idle_mode_mobility) {
        fields["target_priority"] = std::int64_t{kMaxReselPriority};
      }
    }
    auto release = make_event(t, fbs.id, ue.ue_id, MessageKind::rrc_release, std::move(fields));
    if (v == Variation::redirect_sib7 && legacy) {
      // Idle on the FBS, the UE ranks the legacy layer first per SIB7.
      push(release);
      ue.rrc_state = RrcState::idle;
      TraceEvent as_vector = release;
      as_vector.fields["redirect_vector"] = std::string("sib7");
      as_vector.fields["target_earfcn"] = std::int64_t{legacy->params.earfcn};
      push_all(handle_nas(ue, env_, as_vector, t + kFlowStepMs));
    } else {
      deliver(ue, release, t);
    }
    t += kFlowStepMs;
    if (legacy && ue.serving == legacy->id) {
      run_.outcomes.redirected_ues.insert(ue.ue_id);
      if (ue.legacy_capable && !ue.in_dos(t)) {
        t += kFlowStepMs;
        push(make_event(t, legacy->id, ue.ue_id, MessageKind::sms_deliver,
                        {{"payload", std::string("opaque")}}));
        run_.outcomes.sms_delivered.insert(ue.ue_id);
      }
    }
    return t;
  }

  std::int64_t hijack_flow(UeContext& ue, std::int64_t t)
  {
    const auto& fbs = primary();
    const auto method = run_.profile.hijack.method;
    const double fbs_rx = env_.rx_dbm(fbs, ue);
    auto setup_phy = [&] {
      PhyInfo phy;
      phy.rsrp_dbm = fbs_rx;
      phy.ta_command = fbs_ta(ue);
      return phy;
    };
    const std::string serving = ue.serving.value_or("");
    if (method == HijackMethod::jamming && ue.rrc_state == RrcState::connected) {
      auto events = radio_link_check(ue, env_, t, kFlowStepMs, fbs_ta(ue));
      if (!events.empty()) {
        t = events.back().t_ms;
      }
      push_all(std::move(events));
    } else if (method == HijackMethod::handover) {
      const auto report = maybe_report_a4(ue, env_, env_.settings.a4_threshold_db);
      std::vector<int> pcis;
      if (report) {
        for (const auto& r : report->results) {
          pcis.push_back(r.pci);
        }
      }
      push(make_event(t, ue.ue_id, serving, MessageKind::measurement_report,
                      {{"trigger", std::string("event_a4")},
                       {"reported_pcis", pipeline_detail::join_ints(pcis)}}));
      t += kFlowStepMs;
      push(make_event(t, serving, ue.ue_id, MessageKind::rrc_reconfiguration,
                      {{"mobility_control", true},
                       {"target_pci", std::int64_t{fbs.params.pci}},
                       {"target_earfcn", std::int64_t{fbs.params.earfcn}}}));
      t += kFlowStepMs;
      push(make_event(t, ue.ue_id, fbs.id, MessageKind::handover_failure));
      t += kFlowStepMs;
      push(make_event(t, ue.ue_id, fbs.id, MessageKind::reestablishment_request,
                      {{"cause", std::string("handover_failure")}}));
      t += kFlowStepMs;
      push(make_event(t, fbs.id, ue.ue_id, MessageKind::reestablishment_reject));
      t += kFlowStepMs;
      auto setup = make_event(t, fbs.id, ue.ue_id, MessageKind::rrc_setup,
                              {{"reason", std::string("new_connection")}});
      setup.phy = setup_phy();
      push(std::move(setup));
    } else {
      push(make_event(t, ue.ue_id, fbs.id, MessageKind::cell_reselection,
                      {{"reason", std::string(method == HijackMethod::jamming ? "serving_lost"
                                                                               : "priority")}}));
      t += kFlowStepMs;
      auto setup = make_event(t, fbs.id, ue.ue_id, MessageKind::rrc_setup,
                              {{"reason", std::string("tau")}});
      setup.phy = setup_phy();
      push(std::move(setup));
    }
    ue.serving = fbs.id;
    ue.rrc_state = RrcState::connected;
    t += kFlowStepMs;
    push(make_event(t, ue.ue_id, fbs.id, MessageKind::tau_request,
                    {{"id_type", std::string("guti")}, {"contains_imsi", false}}));
    return t;
  }

  void page_for_location(UeContext& ue, std::int64_t t)
  {
    const auto& fbs = primary();
    if (ue.in_dos(t) || ue.serving != fbs.id) {
      return;
    }
    deliver(ue, make_event(t, fbs.id, ue.ue_id, MessageKind::paging,
                           {{"id_type", std::string("imsi")}, {"identity", ue.imsi}}),
            t);
    t += kFlowStepMs;
    auto setup = make_event(t, fbs.id, ue.ue_id, MessageKind::rrc_setup,
                            {{"reason", std::string("paging")}});
    PhyInfo phy;
    phy.rsrp_dbm = env_.rx_dbm(fbs, ue);
    phy.ta_command = fbs_ta(ue);
    setup.phy = phy;
    push(std::move(setup));
    t = identity_procedure(ue, t + kFlowStepMs);
    t += kFlowStepMs;
    push(make_event(t, fbs.id, ue.ue_id, MessageKind::rrc_release));
    ue.rrc_state = RrcState::idle;
  }

  void tick(std::int64_t t)
  {
    const auto& p = run_.profile;
    const auto mode = env_.settings.hijack_mode;
    for (auto& ue : env_.ues) {
      if (run_.outcomes.hijacked_ues.count(ue.ue_id) != 0) {
        continue;
      }
      const auto& fbs = primary();
      if (!hijack_requirements_met(p.hijack.method, ue, fbs, env_, t)) {
        continue;
      }
      if (mode == HijackMode::stochastic) {
        if (!tried_.insert(ue.ue_id).second) {
          continue;
        }
      }
      if (!hijack_succeeds(p.hijack.method, ue, fbs, env_, t, mode, rng_hijack_)) {
        continue;
      }
      run_.outcomes.hijacked_ues.insert(ue.ue_id);
      const auto end = hijack_flow(ue, t);
      execute_application(ue, end + kFlowStepMs);
    }
    if (is_loc_tracking(p.app.variation)) {
      for (auto& [id, due] : next_page_) {
        if (due <= t) {
          page_for_location(*env_.find_ue(id), t);
          due += p.app.tracking_period_ms;
        }
      }
    }
    if (p.app.variation == Variation::dos) {
      for (const auto& id : run_.outcomes.dos_applied) {
        auto& ue = *env_.find_ue(id);
        if (ue.dos_until_ms && *ue.dos_until_ms <= t && ue.serving == primary().id) {
          // Recovered UE retries and is rejected again.
          push(make_event(t, ue.ue_id, primary().id, MessageKind::attach_request,
                          {{"id_type", std::string("guti")}, {"contains_imsi", false}}));
          send_nas_reject(ue, t + kFlowStepMs, p.app.reject_cause);
        }
      }
    }
  }

  Environment env_;
  std::uint64_t seed_;
  Rng rng_adapt_;
  Rng rng_hijack_;
  Rng rng_ta_;
  Rng rng_paging_;
  Rng rng_phy_;
  LaunchPlan plan_;
  PipelineRun run_;
  std::set<std::string> tried_;
  std::map<std::string, std::int64_t> next_page_;
};

// Scan, launch, hijack and application phases over a private copy of `env`.
inline PipelineRun run(const ConfigProfile& profile, const Environment& env)
{
  return Pipeline(profile, env).execute();
}

inline std::string summary_line(const Outcomes& o)
{
  return "hijacked=" + std::to_string(o.hijacked_ues.size()) +
      " captured=" + std::to_string(o.imsis_captured.size()) +
      " dos_applied=" + std::to_string(o.dos_applied.size()) +
      " redirected=" + std::to_string(o.redirected_ues.size()) +
      " sms_delivered=" + std::to_string(o.sms_delivered.size()) +
      " tracked=" + std::to_string(o.locations.size());
}

} // namespace fbsim

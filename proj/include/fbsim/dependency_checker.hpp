#pragma once

#include "fbsim/config_space.hpp"
#include "fbsim/radio_env.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fbsim {

enum class RuleScope { intra_phase, inter_phase };
enum class Resolution { automatic, strict, prerequisite };
enum class Verdict { valid, resolved, rejected };

template <>
struct EnumNames<RuleScope> {
  static constexpr std::array<std::pair<RuleScope, std::string_view>, 2> items{{
      {RuleScope::intra_phase, "intra_phase"},
      {RuleScope::inter_phase, "inter_phase"},
  }};
};

template <>
struct EnumNames<Resolution> {
  static constexpr std::array<std::pair<Resolution, std::string_view>, 3> items{{
      {Resolution::automatic, "automatic"},
      {Resolution::strict, "strict"},
      {Resolution::prerequisite, "prerequisite"},
  }};
};

template <>
struct EnumNames<Verdict> {
  static constexpr std::array<std::pair<Verdict, std::string_view>, 3> items{{
      {Verdict::valid, "valid"},
      {Verdict::resolved, "resolved"},
      {Verdict::rejected, "rejected"},
  }};
};

struct AppliedFix {
  int rule_id = 0;
  std::string field;
  std::string old_value;
  std::string new_value;
};

struct Violation {
  int rule_id = 0;
  std::string text;
};

struct ValidationReport {
  Verdict verdict = Verdict::valid;
  std::vector<AppliedFix> applied_fixes;
  std::vector<Violation> violations;

  bool ok() const { return verdict != Verdict::rejected; }
  std::string to_text() const;
};

struct CheckResult {
  ConfigProfile profile;
  ValidationReport report;
};

namespace rule_detail {

inline std::string num(double v)
{
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

inline std::string num(std::int64_t v) { return std::to_string(v); }
inline std::string num(int v) { return std::to_string(v); }

struct Context {
  ConfigProfile& p;
  const ScanDatabase& db;
  ValidationReport& report;
  int rule_id = 0;

  template <typename T>
  void set(const std::string& field, T& slot, T value)
  {
    if (slot == value) {
      return;
    }
    report.applied_fixes.push_back({rule_id, field, num(slot), num(value)});
    slot = value;
  }

  void violate(std::string text) { report.violations.push_back({rule_id, std::move(text)}); }
};

// Cells the FBS itself would broadcast, each with its profile field path.
inline std::vector<std::pair<std::string, CellParams*>> concurrent_cells(ConfigProfile& p)
{
  std::vector<std::pair<std::string, CellParams*>> out;
  if (p.launch.manual_params) {
    out.emplace_back("launch.manual_params", &*p.launch.manual_params);
  }
  for (std::size_t i = 0; i < p.launch.additional_cells.size(); ++i) {
    out.emplace_back("launch.additional_cells[" + std::to_string(i) + "]",
                     &p.launch.additional_cells[i]);
  }
  return out;
}

} // namespace rule_detail

struct Rule {
  int id = 0;
  RuleScope scope = RuleScope::intra_phase;
  Resolution resolution = Resolution::strict;
  std::string description;
  // Not documented verbatim; derived from stated constraints.
  bool reconstructed = true;
  std::function<void(rule_detail::Context&)> apply;
};

// Handover candidates: scanned cells advertised as neighbors by the strongest
// cell (every other scanned cell when it advertises none). Strongest first,
// ties to the lowest PCI.
inline std::vector<const ScanEntry*> handover_candidates(const ScanDatabase& db)
{
  std::vector<const ScanEntry*> out;
  if (db.empty()) {
    return out;
  }
  const auto& top = db.strongest();
  for (const auto& e : db.entries) {
    if (&e == &top) {
      continue;
    }
    const bool listed = std::find(top.neighbor_pcis.begin(), top.neighbor_pcis.end(),
                                  e.params.pci) != top.neighbor_pcis.end();
    if (listed || top.neighbor_pcis.empty()) {
      out.push_back(&e);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const ScanEntry* a, const ScanEntry* b) {
    if (a->rsrp_dbm != b->rsrp_dbm) {
      return a->rsrp_dbm > b->rsrp_dbm;
    }
    return a->params.pci < b->params.pci;
  });
  return out;
}

constexpr double kHandoverMarginFloorDb = 3.0;
constexpr double kJammingMarginFloorDb = 20.0;
constexpr double kReselectionMarginFloorDb = 5.0;

// Rule 17 resolution. Returns nullopt when no neighbor candidate exists.
inline std::optional<ConfigProfile> resolve_handover_constraints(
    ConfigProfile profile, const ScanDatabase& db, std::vector<AppliedFix>* fixes = nullptr)
{
  const auto cands = handover_candidates(db);
  if (cands.empty()) {
    return std::nullopt;
  }
  ValidationReport scratch;
  rule_detail::Context ctx{profile, db, scratch, 17};
  if (profile.hijack.power_margin_db < kHandoverMarginFloorDb) {
    ctx.set("hijack.power_margin_db", profile.hijack.power_margin_db, kHandoverMarginFloorDb);
  }
  if (auto& m = profile.launch.manual_params) {
    const bool reused = std::any_of(cands.begin(), cands.end(), [&](const ScanEntry* e) {
      return e->params.pci == m->pci && e->params.earfcn == m->earfcn;
    });
    if (!reused) {
      const auto& best = cands.front()->params;
      ctx.set("launch.manual_params.pci", m->pci, best.pci);
      ctx.set("launch.manual_params.earfcn", m->earfcn, best.earfcn);
    }
    bool band_seen = std::any_of(db.entries.begin(), db.entries.end(),
                                 [&](const ScanEntry& e) { return e.params.band == m->band; });
    if (!band_seen || !reused) {
      ctx.set("launch.manual_params.band", m->band, cands.front()->params.band);
    }
  }
  if (fixes) {
    fixes->insert(fixes->end(), scratch.applied_fixes.begin(), scratch.applied_fixes.end());
  }
  return profile;
}

inline const std::vector<Rule>& list_rules()
{
  using rule_detail::Context;
  using RS = RuleScope;
  using R = Resolution;
  static const std::vector<Rule> rules = [] {
    std::vector<Rule> r;
    r.push_back({1, RS::intra_phase, R::strict, "Transmit power is finite and within [-30, 50] dBm",
                 true, [](Context& c) {
                   const double tx = c.p.launch.tx_power_dbm;
                   if (!std::isfinite(tx) || tx < -30.0 || tx > 50.0) {
                     c.violate("launch.tx_power_dbm " + rule_detail::num(tx) +
                               " outside [-30, 50] dBm");
                   }
                 }});
    r.push_back({2, RS::intra_phase, R::strict,
                 "Full parameter adaptation and manual parameter selection are mutually exclusive",
                 false, [](Context& c) {
                   if (c.p.launch.adaptation == Adaptation::full && c.p.launch.manual_params) {
                     c.violate("launch.adaptation=full conflicts with launch.manual_params");
                   }
                 }});
    r.push_back({3, RS::intra_phase, R::prerequisite, "Full adaptation requires scan data", true,
                 [](Context& c) {
                   if (c.p.launch.adaptation == Adaptation::full && c.db.empty()) {
                     c.violate("launch.adaptation=full requires a non-empty scan database");
                   }
                 }});
    r.push_back({4, RS::intra_phase, R::prerequisite,
                 "Paging reproduction requires an observed paging pattern", true, [](Context& c) {
                   if (c.p.launch.paging_reproduction && c.db.empty()) {
                     c.violate("launch.paging_reproduction requires a non-empty scan database");
                   }
                 }});
    r.push_back({5, RS::intra_phase, R::automatic,
                 "Round-robin dwell and tracking period are at least 100 ms", true,
                 [](Context& c) {
                   if (c.p.launch.cell_iteration == CellIteration::round_robin &&
                       c.p.launch.dwell_ms < 100) {
                     c.set("launch.dwell_ms", c.p.launch.dwell_ms, std::int64_t{100});
                   }
                   if (is_loc_tracking(c.p.app.variation) && c.p.app.tracking_period_ms < 100) {
                     c.set("app.tracking_period_ms", c.p.app.tracking_period_ms, std::int64_t{100});
                   }
                 }});
    r.push_back({6, RS::intra_phase, R::strict, "Configured cell parameters are within range",
                 true, [](Context& c) {
                   for (auto& [path, cell] : rule_detail::concurrent_cells(c.p)) {
                     if (auto err = cell_params_error(*cell)) {
                       c.violate(path + ": " + *err);
                     }
                   }
                 }});
    r.push_back({7, RS::intra_phase, R::strict,
                 "Concurrent cells use distinct (rat, earfcn, pci) triples", true, [](Context& c) {
                   const auto cells = rule_detail::concurrent_cells(c.p);
                   for (std::size_t i = 0; i < cells.size(); ++i) {
                     for (std::size_t j = i + 1; j < cells.size(); ++j) {
                       const auto& a = *cells[i].second;
                       const auto& b = *cells[j].second;
                       if (a.rat == b.rat && a.earfcn == b.earfcn && a.pci == b.pci) {
                         c.violate(cells[i].first + " and " + cells[j].first +
                                   " share rat/earfcn/pci");
                       }
                     }
                   }
                 }});
    r.push_back({8, RS::inter_phase, R::automatic,
                 "Jamming operates on the victims' serving frequency", true, [](Context& c) {
                   if (c.p.hijack.method == HijackMethod::jamming && c.p.launch.manual_params &&
                       !c.db.empty()) {
                     c.set("launch.manual_params.earfcn", c.p.launch.manual_params->earfcn,
                           c.db.strongest().params.earfcn);
                   }
                 }});
    r.push_back({9, RS::inter_phase, R::automatic,
                 "Jamming power margin is at least 20 dB", true, [](Context& c) {
                   if (c.p.hijack.method == HijackMethod::jamming &&
                       c.p.hijack.power_margin_db < kJammingMarginFloorDb) {
                     c.set("hijack.power_margin_db", c.p.hijack.power_margin_db,
                           kJammingMarginFloorDb);
                   }
                 }});
    r.push_back({10, RS::inter_phase, R::automatic,
                 "Cell reselection advertises the highest reselection priority", true,
                 [](Context& c) {
                   if (c.p.hijack.method == HijackMethod::cell_reselection &&
                       c.p.launch.manual_params) {
                     c.set("launch.manual_params.resel_priority",
                           c.p.launch.manual_params->resel_priority, kMaxReselPriority);
                   }
                 }});
    r.push_back({11, RS::inter_phase, R::prerequisite,
                 "Targeted attacks require prior IMSI/GUTI acquisition", false, [](Context& c) {
                   if (c.p.app.targeting == Targeting::targeted && c.p.app.target_ids.empty()) {
                     c.violate("app.targeting=targeted without acquired identities "
                               "(app.target_ids is empty)");
                   }
                 }});
    r.push_back({12, RS::inter_phase, R::automatic,
                 "Cell reselection power margin is at least 5 dB", true, [](Context& c) {
                   if (c.p.hijack.method == HijackMethod::cell_reselection &&
                       c.p.hijack.power_margin_db < kReselectionMarginFloorDb) {
                     c.set("hijack.power_margin_db", c.p.hijack.power_margin_db,
                           kReselectionMarginFloorDb);
                   }
                 }});
    r.push_back({13, RS::inter_phase, R::automatic, "DoS uses reject cause 22", true,
                 [](Context& c) {
                   if (c.p.app.variation == Variation::dos) {
                     c.set("app.reject_cause", c.p.app.reject_cause, 22);
                   }
                 }});
    r.push_back({14, RS::inter_phase, R::prerequisite,
                 "Redirection requires a concurrent legacy cell", true, [](Context& c) {
                   if (!is_redirect(c.p.app.variation)) {
                     return;
                   }
                   const auto& cells = c.p.launch.additional_cells;
                   const bool legacy = std::any_of(cells.begin(), cells.end(),
                                                   [](const CellParams& x) { return x.rat != Rat::lte; });
                   if (!legacy) {
                     c.violate("app.variation=" + std::string(to_string(c.p.app.variation)) +
                               " requires a legacy cell in launch.additional_cells");
                   }
                 }});
    r.push_back({15, RS::inter_phase, R::strict,
                 "Redirection target channel is valid for the legacy carrier", true,
                 [](Context& c) {
                   const auto& cells = c.p.launch.additional_cells;
                   for (std::size_t i = 0; i < cells.size(); ++i) {
                     const auto& x = cells[i];
                     const int max = x.rat == Rat::g2 ? 1023 : x.rat == Rat::g3 ? 16383 : -1;
                     if (max >= 0 && (x.earfcn < 0 || x.earfcn > max)) {
                       c.violate("launch.additional_cells[" + std::to_string(i) + "].earfcn " +
                                 std::to_string(x.earfcn) + " invalid for " +
                                 std::string(to_string(x.rat)));
                     }
                   }
                 }});
    r.push_back({16, RS::intra_phase, R::strict, "Sampling fraction lies in (0, 1]", true,
                 [](Context& c) {
                   const double f = c.p.app.sampling_fraction;
                   if (!(f > 0.0 && f <= 1.0)) {
                     c.violate("app.sampling_fraction " + rule_detail::num(f) +
                               " outside (0, 1]");
                   }
                 }});
    r.push_back({17, RS::inter_phase, R::automatic,
                 "Handover reuses a neighbor PCI on an observed band with more than 3 dB margin",
                 false, [](Context& c) {
                   if (c.p.hijack.method != HijackMethod::handover) {
                     return;
                   }
                   if (c.db.empty()) {
                     c.violate("requesting handover without corresponding neighbor cell data "
                               "(scan database is empty)");
                     return;
                   }
                   std::vector<AppliedFix> fixes;
                   auto resolved = resolve_handover_constraints(c.p, c.db, &fixes);
                   if (!resolved) {
                     c.violate("requesting handover without neighbor candidates in scan data");
                     return;
                   }
                   c.p = std::move(*resolved);
                   c.report.applied_fixes.insert(c.report.applied_fixes.end(), fixes.begin(),
                                                 fixes.end());
                 }});
    r.push_back({18, RS::inter_phase, R::strict, "Manual FBS parameters describe an LTE cell",
                 true, [](Context& c) {
                   if (c.p.launch.manual_params && c.p.launch.manual_params->rat != Rat::lte) {
                     c.violate("launch.manual_params.rat must be lte");
                   }
                 }});
    r.push_back({19, RS::inter_phase, R::automatic,
                 "Reject-based IMSI catching on a single cell uses cause 9", false,
                 [](Context& c) {
                   if (c.p.app.variation == Variation::imsi_reject_based &&
                       c.p.launch.additional_cells.empty()) {
                     c.set("app.reject_cause", c.p.app.reject_cause, 9);
                   }
                 }});
    r.push_back({20, RS::intra_phase, R::strict, "Reject cause is a defined NAS cause value",
                 true, [](Context& c) {
                   const int cause = c.p.app.reject_cause;
                   if (cause < 2 || cause > 111) {
                     c.violate("app.reject_cause " + std::to_string(cause) + " outside [2, 111]");
                   }
                 }});
    r.push_back({21, RS::intra_phase, R::automatic,
                 "LTE bandwidth is one of 1.4/3/5/10/15/20 MHz", true, [](Context& c) {
                   static constexpr double allowed[] = {1.4, 3.0, 5.0, 10.0, 15.0, 20.0};
                   for (auto& [path, cell] : rule_detail::concurrent_cells(c.p)) {
                     if (cell->rat != Rat::lte || !std::isfinite(cell->bandwidth_mhz)) {
                       continue;
                     }
                     double best = allowed[0];
                     for (double a : allowed) {
                       if (std::abs(a - cell->bandwidth_mhz) < std::abs(best - cell->bandwidth_mhz)) {
                         best = a;
                       }
                     }
                     c.set(path + ".bandwidth_mhz", cell->bandwidth_mhz, best);
                   }
                 }});
    return r;
  }();
  return rules;
}

inline CheckResult check(const ConfigProfile& profile, const ScanDatabase& db)
{
  CheckResult out{profile, {}};
  for (const auto& rule : list_rules()) {
    rule_detail::Context ctx{out.profile, db, out.report, rule.id};
    rule.apply(ctx);
  }
  auto& r = out.report;
  r.verdict = !r.violations.empty() ? Verdict::rejected
      : !r.applied_fixes.empty()    ? Verdict::resolved
                                    : Verdict::valid;
  return out;
}

inline std::string ValidationReport::to_text() const
{
  std::ostringstream os;
  os << "verdict: " << to_string(verdict) << '\n';
  const auto& rules = list_rules();
  for (const auto& f : applied_fixes) {
    const auto mode = to_string(rules.at(static_cast<std::size_t>(f.rule_id - 1)).resolution);
    os << "RULE " << f.rule_id << ' ' << mode << ": " << f.field << ' ' << f.old_value << " -> "
       << f.new_value << '\n';
  }
  for (const auto& v : violations) {
    os << "RULE " << v.rule_id << " VIOLATION: " << v.text << '\n';
  }
  return os.str();
}

} // namespace fbsim

#pragma once

#include "fbsim/profile_yaml.hpp"
#include "fbsim/rng.hpp"
#include "fbsim/types.hpp"
#include "fbsim/ue_context.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fbsim {

struct PathLossModel {
  double l0_db = 40.0;
  double d0_m = 1.0;
  double exponent = 3.0;

  double loss_db(double distance_m) const
  {
    const double d = std::max(distance_m, d0_m);
    return l0_db + 10.0 * exponent * std::log10(d / d0_m);
  }
};

inline double received_power(double tx_power_dbm, double distance_m,
                             const PathLossModel& model = {})
{
  return tx_power_dbm - model.loss_db(distance_m);
}

struct PagingPattern {
  double mean_interval_ms = 200.0;
  bool operator==(const PagingPattern&) const = default;
};

struct CellProfile {
  std::string id;
  CellParams params;
  double tx_power_dbm = 43.0;
  bool legit = true;
  std::vector<int> neighbors;
  std::map<int, int> sib_resel_priorities; // earfcn -> priority
  Point position;
  PagingPattern paging;
  std::string rf_preset = "mno1_day1";
  // FBS cells are placed relative to each victim: received power equals the
  // victim's best legitimate power plus this margin.
  std::optional<double> anchored_margin_db;
};

struct ScanEntry {
  CellParams params;
  double rsrp_dbm = 0.0;
  std::vector<int> neighbor_pcis;
  std::map<int, int> resel_priorities;
  PagingPattern paging_pattern;

  bool operator==(const ScanEntry&) const = default;
};

struct ScanDatabase {
  std::vector<ScanEntry> entries; // strongest first
  std::int64_t scan_time_ms = 0;

  bool empty() const { return entries.empty(); }
  const ScanEntry& strongest() const { return entries.front(); }
};

enum class HijackMode { deterministic, stochastic };

template <>
struct EnumNames<HijackMode> {
  static constexpr std::array<std::pair<HijackMode, std::string_view>, 2> items{{
      {HijackMode::deterministic, "deterministic"},
      {HijackMode::stochastic, "stochastic"},
  }};
};

struct RunSettings {
  std::int64_t duration_ms = 10000;
  std::int64_t tick_ms = 100;
  std::int64_t scan_dwell_ms = 500;
  int radios = 2;
  HijackMode hijack_mode = HijackMode::deterministic;
  double a4_threshold_db = 3.0;
  double hysteresis_db = 5.0;
  double sensitivity_dbm = -110.0;
  std::int64_t phy_report_interval_ms = 1000;
};

struct Environment {
  std::string name = "env";
  std::vector<CellProfile> cells;
  std::vector<UeContext> ues;
  Point fbs_position;
  RunSettings settings;
  PathLossModel pathloss;
  std::int64_t clock_ms = 0;

  const CellProfile* find_cell(const std::string& id) const
  {
    for (const auto& c : cells) {
      if (c.id == id) {
        return &c;
      }
    }
    return nullptr;
  }

  UeContext* find_ue(const std::string& id)
  {
    for (auto& u : ues) {
      if (u.ue_id == id) {
        return &u;
      }
    }
    return nullptr;
  }

  const UeContext* find_ue(const std::string& id) const
  {
    for (const auto& u : ues) {
      if (u.ue_id == id) {
        return &u;
      }
    }
    return nullptr;
  }

  double physical_rx(const CellProfile& cell, Point at) const
  {
    return received_power(cell.tx_power_dbm, distance(cell.position, at), pathloss);
  }

  // Strongest legitimate received power at a point; -inf with no legit cell.
  double best_legit_rx(Point at) const
  {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& c : cells) {
      if (c.legit) {
        best = std::max(best, physical_rx(c, at));
      }
    }
    return best;
  }

  double rx_dbm(const CellProfile& cell, Point at) const
  {
    if (cell.anchored_margin_db) {
      return best_legit_rx(at) + *cell.anchored_margin_db;
    }
    return physical_rx(cell, at);
  }

  double rx_dbm(const CellProfile& cell, const UeContext& ue) const
  {
    return rx_dbm(cell, ue.position);
  }

  const CellProfile* strongest_legit(Point at) const
  {
    const CellProfile* best = nullptr;
    double best_rx = -std::numeric_limits<double>::infinity();
    for (const auto& c : cells) {
      if (!c.legit) {
        continue;
      }
      const double rx = physical_rx(c, at);
      if (!best || rx > best_rx || (rx == best_rx && c.params.pci < best->params.pci)) {
        best = &c;
        best_rx = rx;
      }
    }
    return best;
  }

  void advance_clock(std::int64_t t_ms)
  {
    clock_ms = std::max(clock_ms, t_ms);
  }

  // Camps every UE without a serving cell on its strongest legitimate cell.
  void attach_initial()
  {
    for (auto& ue : ues) {
      if (!ue.serving) {
        if (const auto* c = strongest_legit(ue.position)) {
          ue.serving = c->id;
        } else {
          ue.rrc_state = RrcState::idle;
        }
      }
    }
  }
};

inline double received_power(const Environment& env, const CellProfile& cell, const UeContext& ue)
{
  return env.rx_dbm(cell, ue);
}

// Frequency-hopping reconnaissance from the FBS position. Frequencies are split
// across radios; each hop dwells `dwell_ms`.
inline ScanDatabase scan(const Environment& env, std::int64_t dwell_ms, int radios,
                         std::optional<double> sensitivity_dbm = std::nullopt)
{
  if (dwell_ms <= 0 || radios < 1) {
    throw std::invalid_argument("scan: dwell_ms must be > 0 and radios >= 1");
  }
  const double floor = sensitivity_dbm.value_or(env.settings.sensitivity_dbm);
  ScanDatabase db;
  std::set<int> freqs;
  for (const auto& c : env.cells) {
    freqs.insert(c.params.earfcn);
    const double rx = env.rx_dbm(c, env.fbs_position);
    if (!(rx > floor)) {
      continue;
    }
    ScanEntry e;
    e.params = c.params;
    e.rsrp_dbm = rx;
    e.neighbor_pcis = c.neighbors;
    e.resel_priorities = c.sib_resel_priorities;
    e.paging_pattern = c.paging;
    db.entries.push_back(std::move(e));
  }
  std::stable_sort(db.entries.begin(), db.entries.end(), [](const auto& a, const auto& b) {
    if (a.rsrp_dbm != b.rsrp_dbm) {
      return a.rsrp_dbm > b.rsrp_dbm;
    }
    return a.params.pci < b.params.pci;
  });
  const auto n = static_cast<std::int64_t>(freqs.size());
  db.scan_time_ms = ((n + radios - 1) / radios) * dwell_ms;
  return db;
}

enum class AdaptationMode { none, full, ue_recovery };

template <>
struct EnumNames<AdaptationMode> {
  static constexpr std::array<std::pair<AdaptationMode, std::string_view>, 3> items{{
      {AdaptationMode::none, "none"},
      {AdaptationMode::full, "full"},
      {AdaptationMode::ue_recovery, "ue_recovery"},
  }};
};

// Adapts `fbs` towards `source`. Only identifiers, radio configuration and
// reselection properties change; power, position and ownership are kept.
inline CellProfile apply_adaptation(CellProfile fbs, const ScanEntry& source,
                                    const ScanDatabase& db, AdaptationMode mode, Rng& rng)
{
  switch (mode) {
  case AdaptationMode::none:
    fbs.params.plmn = source.params.plmn;
    fbs.params.earfcn = source.params.earfcn;
    fbs.params.band = source.params.band;
    fbs.params.rat = source.params.rat;
    fbs.params.bandwidth_mhz = source.params.bandwidth_mhz;
    fbs.params.tac = static_cast<int>(rng.uniform_int(1, kMaxTac));
    fbs.params.pci = static_cast<int>(rng.uniform_int(0, kMaxPci));
    fbs.params.cell_id = rng.uniform_int(1, kMaxCellId);
    fbs.neighbors.clear();
    fbs.sib_resel_priorities.clear();
    break;
  case AdaptationMode::full:
  case AdaptationMode::ue_recovery:
    fbs.params = source.params;
    fbs.neighbors = source.neighbor_pcis;
    fbs.sib_resel_priorities = source.resel_priorities;
    fbs.paging = source.paging_pattern;
    if (mode == AdaptationMode::ue_recovery) {
      std::set<int> seen;
      for (const auto& e : db.entries) {
        seen.insert(e.params.tac);
      }
      int tac = static_cast<int>(rng.uniform_int(1, kMaxTac));
      while (seen.count(tac) != 0) {
        tac = static_cast<int>(rng.uniform_int(1, kMaxTac));
      }
      fbs.params.tac = tac;
    }
    break;
  }
  return fbs;
}

inline CellProfile apply_adaptation(const CellProfile& fbs, const ScanDatabase& db,
                                    AdaptationMode mode, Rng& rng)
{
  if (db.empty()) {
    if (mode != AdaptationMode::none) {
      throw std::invalid_argument("apply_adaptation: scan database is empty");
    }
    return fbs;
  }
  return apply_adaptation(fbs, db.strongest(), db, mode, rng);
}

// ---- JSON persistence of the scan database -------------------------------

inline nlohmann::json cell_params_json(const CellParams& p)
{
  return {
      {"plmn", p.plmn},       {"tac", p.tac},
      {"pci", p.pci},         {"cell_id", p.cell_id},
      {"earfcn", p.earfcn},   {"band", p.band},
      {"rat", to_string(p.rat)}, {"bandwidth_mhz", p.bandwidth_mhz},
      {"resel_priority", p.resel_priority},
  };
}

inline CellParams cell_params_from_json(const nlohmann::json& j)
{
  CellParams p;
  p.plmn = j.at("plmn").get<std::string>();
  p.tac = j.at("tac").get<int>();
  p.pci = j.at("pci").get<int>();
  p.cell_id = j.at("cell_id").get<std::int64_t>();
  p.earfcn = j.at("earfcn").get<int>();
  p.band = j.at("band").get<int>();
  const auto rat = parse_enum<Rat>(j.at("rat").get<std::string>());
  if (!rat) {
    throw std::invalid_argument("unknown rat in scan entry");
  }
  p.rat = *rat;
  p.bandwidth_mhz = j.at("bandwidth_mhz").get<double>();
  p.resel_priority = j.at("resel_priority").get<int>();
  return p;
}

inline nlohmann::json scan_db_to_json(const ScanDatabase& db)
{
  auto arr = nlohmann::json::array();
  for (const auto& e : db.entries) {
    auto j = cell_params_json(e.params);
    j["rsrp_dbm"] = e.rsrp_dbm;
    nlohmann::json prio = nlohmann::json::object();
    for (const auto& [f, p] : e.resel_priorities) {
      prio[std::to_string(f)] = p;
    }
    j["observed_sibs"] = {{"neighbor_pcis", e.neighbor_pcis}, {"resel_priorities", prio}};
    j["paging_pattern"] = {{"mean_interval_ms", e.paging_pattern.mean_interval_ms}};
    arr.push_back(std::move(j));
  }
  return arr;
}

inline ScanDatabase scan_db_from_json(const nlohmann::json& arr)
{
  ScanDatabase db;
  for (const auto& j : arr) {
    ScanEntry e;
    e.params = cell_params_from_json(j);
    e.rsrp_dbm = j.at("rsrp_dbm").get<double>();
    const auto& sibs = j.at("observed_sibs");
    e.neighbor_pcis = sibs.at("neighbor_pcis").get<std::vector<int>>();
    for (const auto& [f, p] : sibs.at("resel_priorities").items()) {
      e.resel_priorities[std::stoi(f)] = p.get<int>();
    }
    e.paging_pattern.mean_interval_ms = j.at("paging_pattern").at("mean_interval_ms").get<double>();
    db.entries.push_back(std::move(e));
  }
  return db;
}

// ---- Environment YAML ------------------------------------------------------

namespace env_detail {

using yaml_detail::join;
using yaml_detail::line_of;
using yaml_detail::optional_field;
using yaml_detail::reject_unknown;
using yaml_detail::require_map;
using yaml_detail::scalar;

inline Point parse_point(const YAML::Node& n, const std::string& path)
{
  if (!n.IsSequence() || n.size() != 2) {
    throw ProfileError(path, line_of(n), "expected [x, y]");
  }
  return {scalar<double>(n[0], path + "[0]"), scalar<double>(n[1], path + "[1]")};
}

inline CellProfile parse_env_cell(const YAML::Node& n, const std::string& path)
{
  require_map(n, path);
  reject_unknown(n, path, {"id", "params", "tx_power_dbm", "legit", "neighbors",
                           "sib_resel_priorities", "position", "paging_mean_interval_ms",
                           "rf_preset"});
  CellProfile c;
  if (!n["id"]) {
    throw ProfileError(join(path, "id"), line_of(n), "missing cell id");
  }
  optional_field(n, path, "id", c.id);
  if (const auto p = n["params"]) {
    c.params = yaml_detail::parse_cell(p, join(path, "params"));
  }
  optional_field(n, path, "tx_power_dbm", c.tx_power_dbm);
  optional_field(n, path, "legit", c.legit);
  optional_field(n, path, "rf_preset", c.rf_preset);
  optional_field(n, path, "paging_mean_interval_ms", c.paging.mean_interval_ms);
  if (const auto p = n["position"]) {
    c.position = parse_point(p, join(path, "position"));
  }
  if (const auto nb = n["neighbors"]) {
    for (std::size_t i = 0; i < nb.size(); ++i) {
      c.neighbors.push_back(scalar<int>(nb[i], join(path, "neighbors")));
    }
  }
  if (const auto pr = n["sib_resel_priorities"]) {
    require_map(pr, join(path, "sib_resel_priorities"));
    for (const auto& kv : pr) {
      c.sib_resel_priorities[scalar<int>(kv.first, join(path, "sib_resel_priorities"))] =
          scalar<int>(kv.second, join(path, "sib_resel_priorities"));
    }
  }
  if (auto err = cell_params_error(c.params)) {
    throw ProfileError(join(path, "params"), line_of(n), *err);
  }
  return c;
}

inline UeContext parse_env_ue(const YAML::Node& n, const std::string& path, std::size_t index)
{
  require_map(n, path);
  reject_unknown(n, path, {"id", "imsi", "guti", "position", "state", "legacy_capable"});
  UeContext ue;
  ue.ue_id = "ue" + std::to_string(index + 1);
  optional_field(n, path, "id", ue.ue_id);
  char imsi[32];
  std::snprintf(imsi, sizeof imsi, "00101%010zu", index + 1);
  ue.imsi = imsi;
  optional_field(n, path, "imsi", ue.imsi);
  ue.guti = "guti-" + ue.ue_id;
  optional_field(n, path, "guti", ue.guti);
  optional_field(n, path, "state", ue.rrc_state);
  optional_field(n, path, "legacy_capable", ue.legacy_capable);
  if (const auto p = n["position"]) {
    ue.position = parse_point(p, join(path, "position"));
  }
  return ue;
}

} // namespace env_detail

inline Environment environment_from_yaml(const std::string& text)
{
  using namespace env_detail;
  return yaml_detail::guard_parse([&] {
    const auto root = YAML::Load(text);
    require_map(root, "");
    reject_unknown(root, "", {"name", "fbs_position", "run", "cells", "ues"});
    Environment env;
    optional_field(root, "", "name", env.name);
    if (const auto p = root["fbs_position"]) {
      env.fbs_position = parse_point(p, "fbs_position");
    }
    if (const auto r = root["run"]) {
      require_map(r, "run");
      reject_unknown(r, "run", {"duration_ms", "tick_ms", "scan_dwell_ms", "radios",
                                "hijack_mode", "a4_threshold_db", "hysteresis_db",
                                "sensitivity_dbm", "phy_report_interval_ms"});
      auto& s = env.settings;
      optional_field(r, "run", "duration_ms", s.duration_ms);
      optional_field(r, "run", "tick_ms", s.tick_ms);
      optional_field(r, "run", "scan_dwell_ms", s.scan_dwell_ms);
      optional_field(r, "run", "radios", s.radios);
      optional_field(r, "run", "hijack_mode", s.hijack_mode);
      optional_field(r, "run", "a4_threshold_db", s.a4_threshold_db);
      optional_field(r, "run", "hysteresis_db", s.hysteresis_db);
      optional_field(r, "run", "sensitivity_dbm", s.sensitivity_dbm);
      optional_field(r, "run", "phy_report_interval_ms", s.phy_report_interval_ms);
      if (s.tick_ms <= 0 || s.duration_ms < 0 || s.radios < 1 || s.scan_dwell_ms <= 0 ||
          s.phy_report_interval_ms <= 0) {
        throw ProfileError("run", line_of(r), "non-positive timing or radio count");
      }
    }
    std::set<std::pair<int, int>> seen;
    if (const auto cells = root["cells"]) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto path = "cells[" + std::to_string(i) + "]";
        auto c = parse_env_cell(cells[i], path);
        if (c.legit && !seen.insert({c.params.earfcn, c.params.pci}).second) {
          throw ProfileError(path, line_of(cells[i]), "duplicate (earfcn, pci) among legit cells");
        }
        env.cells.push_back(std::move(c));
      }
    }
    if (const auto ues = root["ues"]) {
      for (std::size_t i = 0; i < ues.size(); ++i) {
        env.ues.push_back(parse_env_ue(ues[i], "ues[" + std::to_string(i) + "]", i));
      }
    }
    env.attach_initial();
    return env;
  });
}

inline Environment load_environment(const std::string& path)
{
  std::ifstream in(path);
  if (!in) {
    throw ProfileError("", 0, "cannot open " + path);
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return environment_from_yaml(buf.str());
}

// Adds `count` UEs uniformly inside a disc; IMSIs continue the env numbering.
inline void add_random_ues(Environment& env, std::size_t count, Point center, double radius_m,
                           double connected_fraction, std::uint64_t seed)
{
  Rng rng(seed, "ue_placement");
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t n = env.ues.size() + 1;
    UeContext ue;
    ue.ue_id = "ue" + std::to_string(n);
    char imsi[32];
    std::snprintf(imsi, sizeof imsi, "00101%010zu", n);
    ue.imsi = imsi;
    ue.guti = "guti-" + ue.ue_id;
    const double r = radius_m * std::sqrt(rng.uniform());
    const double a = rng.uniform(0.0, 2.0 * M_PI);
    ue.position = {center.x + r * std::cos(a), center.y + r * std::sin(a)};
    ue.rrc_state = rng.bernoulli(connected_fraction) ? RrcState::connected : RrcState::idle;
    env.ues.push_back(std::move(ue));
  }
  env.attach_initial();
}

} // namespace fbsim

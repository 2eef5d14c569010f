#pragma once

#include "fbsim/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fbsim {

enum class Adaptation { none, full };
enum class CellIteration { fixed, round_robin };
enum class HijackMethod { jamming, handover, cell_reselection };
enum class Targeting { arbitrary, adaptive, targeted };
enum class Variation {
  imsi_identity_request_reject,
  imsi_reject_based,
  imsi_identity_request_release,
  loc_tracking_coarse,
  loc_tracking_fine,
  dos,
  redirect_sib7,
  redirect_carrier_info,
  redirect_idle_mode_mobility,
};

template <>
struct EnumNames<Adaptation> {
  static constexpr std::array<std::pair<Adaptation, std::string_view>, 2> items{{
      {Adaptation::none, "none"},
      {Adaptation::full, "full"},
  }};
};

template <>
struct EnumNames<CellIteration> {
  static constexpr std::array<std::pair<CellIteration, std::string_view>, 2> items{{
      {CellIteration::fixed, "fixed"},
      {CellIteration::round_robin, "round_robin"},
  }};
};

template <>
struct EnumNames<HijackMethod> {
  static constexpr std::array<std::pair<HijackMethod, std::string_view>, 3> items{{
      {HijackMethod::jamming, "jamming"},
      {HijackMethod::handover, "handover"},
      {HijackMethod::cell_reselection, "cell_reselection"},
  }};
};

template <>
struct EnumNames<Targeting> {
  static constexpr std::array<std::pair<Targeting, std::string_view>, 3> items{{
      {Targeting::arbitrary, "arbitrary"},
      {Targeting::adaptive, "adaptive"},
      {Targeting::targeted, "targeted"},
  }};
};

template <>
struct EnumNames<Variation> {
  static constexpr std::array<std::pair<Variation, std::string_view>, 9> items{{
      {Variation::imsi_identity_request_reject, "imsi_identity_request_reject"},
      {Variation::imsi_reject_based, "imsi_reject_based"},
      {Variation::imsi_identity_request_release, "imsi_identity_request_release"},
      {Variation::loc_tracking_coarse, "loc_tracking_coarse"},
      {Variation::loc_tracking_fine, "loc_tracking_fine"},
      {Variation::dos, "dos"},
      {Variation::redirect_sib7, "redirect_sib7"},
      {Variation::redirect_carrier_info, "redirect_carrier_info"},
      {Variation::redirect_idle_mode_mobility, "redirect_idle_mode_mobility"},
  }};
};

inline bool is_redirect(Variation v)
{
  return v == Variation::redirect_sib7 || v == Variation::redirect_carrier_info ||
      v == Variation::redirect_idle_mode_mobility;
}

inline bool is_loc_tracking(Variation v)
{
  return v == Variation::loc_tracking_coarse || v == Variation::loc_tracking_fine;
}

inline int default_reject_cause(Variation v)
{
  switch (v) {
  case Variation::imsi_reject_based: return 9;
  case Variation::dos: return 22;
  default: return 13;
  }
}

struct LaunchConfig {
  Adaptation adaptation = Adaptation::none;
  CellIteration cell_iteration = CellIteration::fixed;
  bool paging_reproduction = false;
  bool ta_diversification = false;
  bool hw_compensation = false;
  std::optional<CellParams> manual_params;
  double tx_power_dbm = 20.0;
  std::vector<CellParams> additional_cells;
  // Round-robin residency per parameter set.
  std::int64_t dwell_ms = 1000;

  bool operator==(const LaunchConfig&) const = default;
};

struct HijackConfig {
  HijackMethod method = HijackMethod::jamming;
  double power_margin_db = 30.0;

  bool operator==(const HijackConfig&) const = default;
};

struct AppConfig {
  Targeting targeting = Targeting::arbitrary;
  double sampling_fraction = 0.1;
  std::vector<std::string> target_ids;
  Variation variation = Variation::imsi_identity_request_reject;
  int reject_cause = 13;
  // IMSI paging period for location tracking.
  std::int64_t tracking_period_ms = 5000;

  bool operator==(const AppConfig&) const = default;
};

struct ConfigProfile {
  std::string name = "profile";
  std::uint64_t seed = 1;
  LaunchConfig launch;
  HijackConfig hijack;
  AppConfig app;

  bool operator==(const ConfigProfile&) const = default;
};

struct ConfigSpace {
  std::size_t n_launch = 32; // 2 adaptation x 2 iteration x 2^3 flags
  std::size_t n_hijack = 3;
  std::size_t n_app = 27;    // 3 targeting x 9 variations
  std::size_t n_total() const { return n_launch * n_hijack * n_app; }
};

// Concurrent 2G carrier attached to redirect_* instances.
inline CellParams default_legacy_cell()
{
  CellParams c;
  c.plmn = "00101";
  c.tac = 100;
  c.pci = 7;
  c.cell_id = 2001;
  c.earfcn = 20;
  c.band = 900;
  c.rat = Rat::g2;
  c.bandwidth_mhz = 0.2;
  c.resel_priority = 7;
  return c;
}

inline const std::string& default_target_id()
{
  static const std::string id = "001010000000001";
  return id;
}

// Partial assignment of the enumeration axes; unset axes match anything.
struct InstanceFilter {
  std::optional<Adaptation> adaptation;
  std::optional<CellIteration> cell_iteration;
  std::optional<bool> paging_reproduction;
  std::optional<bool> ta_diversification;
  std::optional<bool> hw_compensation;
  std::optional<HijackMethod> method;
  std::optional<Targeting> targeting;
  std::optional<Variation> variation;

  bool matches(const ConfigProfile& p) const
  {
    return (!adaptation || *adaptation == p.launch.adaptation) &&
        (!cell_iteration || *cell_iteration == p.launch.cell_iteration) &&
        (!paging_reproduction || *paging_reproduction == p.launch.paging_reproduction) &&
        (!ta_diversification || *ta_diversification == p.launch.ta_diversification) &&
        (!hw_compensation || *hw_compensation == p.launch.hw_compensation) &&
        (!method || *method == p.hijack.method) &&
        (!targeting || *targeting == p.app.targeting) &&
        (!variation || *variation == p.app.variation);
  }

  // Size of the filtered sub-space from the axis cardinalities alone.
  ConfigSpace space() const
  {
    ConfigSpace s;
    s.n_launch = (adaptation ? 1 : 2) * (cell_iteration ? 1 : 2) *
        (paging_reproduction ? 1 : 2) * (ta_diversification ? 1 : 2) *
        (hw_compensation ? 1 : 2);
    s.n_hijack = method ? 1 : 3;
    s.n_app = (targeting ? 1 : 3) * (variation ? 1 : 9);
    return s;
  }
};

// Profile for one point of the grid; index is the position in enumeration order.
inline ConfigProfile make_instance(std::size_t index, Adaptation a, CellIteration it,
                                   bool paging, bool ta, bool hw, HijackMethod m,
                                   Targeting t, Variation v)
{
  ConfigProfile p;
  p.name = "instance_" + std::to_string(index);
  p.seed = index + 1;
  p.launch.adaptation = a;
  p.launch.cell_iteration = it;
  p.launch.paging_reproduction = paging;
  p.launch.ta_diversification = ta;
  p.launch.hw_compensation = hw;
  p.hijack.method = m;
  p.app.targeting = t;
  p.app.variation = v;
  p.app.reject_cause = default_reject_cause(v);
  if (t == Targeting::targeted) {
    p.app.target_ids = {default_target_id()};
  }
  if (is_redirect(v)) {
    p.launch.additional_cells = {default_legacy_cell()};
  }
  return p;
}

// Cartesian product, slowest axis first: adaptation, cell_iteration, paging,
// TA, hw compensation, hijack method, targeting, variation.
inline std::vector<ConfigProfile> enumerate_instances(const InstanceFilter& filter = {})
{
  std::vector<ConfigProfile> out;
  std::size_t index = 0;
  for (const auto& [a, an] : EnumNames<Adaptation>::items) {
    for (const auto& [it, itn] : EnumNames<CellIteration>::items) {
      for (bool paging : {false, true}) {
        for (bool ta : {false, true}) {
          for (bool hw : {false, true}) {
            for (const auto& [m, mn] : EnumNames<HijackMethod>::items) {
              for (const auto& [t, tn] : EnumNames<Targeting>::items) {
                for (const auto& [v, vn] : EnumNames<Variation>::items) {
                  ConfigProfile p = make_instance(index, a, it, paging, ta, hw, m, t, v);
                  ++index;
                  if (filter.matches(p)) {
                    out.push_back(std::move(p));
                  }
                }
              }
            }
          }
        }
      }
    }
  }
  return out;
}

} // namespace fbsim

#pragma once

#include "fbsim/types.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string>

namespace fbsim {

enum class RrcState { idle, connected };

template <>
struct EnumNames<RrcState> {
  static constexpr std::array<std::pair<RrcState, std::string_view>, 2> items{{
      {RrcState::idle, "idle"},
      {RrcState::connected, "connected"},
  }};
};

// Sentinel dos_until_ms for causes that bar the UE until power cycle.
constexpr std::int64_t kDosForever = INT64_MAX;

struct UeContext {
  std::string ue_id;
  std::string imsi;
  std::string guti;
  RrcState rrc_state = RrcState::idle;
  std::optional<std::string> serving; // cell id
  Point position;
  std::set<int> blacklist_tac;
  std::set<std::string> blacklist_plmn;
  std::optional<std::int64_t> dos_until_ms;
  std::optional<std::string> pending_reestablish;
  bool identity_exposed = false;
  // Completes attach on a legacy (2G/3G) cell after redirection.
  bool legacy_capable = true;

  bool in_dos(std::int64_t now_ms) const { return dos_until_ms && now_ms < *dos_until_ms; }
};

} // namespace fbsim

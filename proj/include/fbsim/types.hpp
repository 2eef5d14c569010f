#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace fbsim {

// Every enum that crosses a file boundary specializes EnumNames with its
// canonical spelling; to_string/parse_enum are generated from the table.
template <typename E>
struct EnumNames;

template <typename E>
std::string_view to_string(E value)
{
  for (const auto& [v, name] : EnumNames<E>::items) {
    if (v == value) {
      return name;
    }
  }
  throw std::logic_error("enum value without a registered name");
}

template <typename E>
std::optional<E> parse_enum(std::string_view text)
{
  for (const auto& [v, name] : EnumNames<E>::items) {
    if (name == text) {
      return v;
    }
  }
  return std::nullopt;
}

template <typename E>
std::string enum_choices()
{
  std::string out;
  for (const auto& [v, name] : EnumNames<E>::items) {
    if (!out.empty()) {
      out += '|';
    }
    out += name;
  }
  return out;
}

enum class Rat { lte, g2, g3 };

template <>
struct EnumNames<Rat> {
  static constexpr std::array<std::pair<Rat, std::string_view>, 3> items{{
      {Rat::lte, "lte"},
      {Rat::g2, "g2"},
      {Rat::g3, "g3"},
  }};
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

inline double distance(Point a, Point b)
{
  return std::hypot(a.x - b.x, a.y - b.y);
}

// Broadcast identity and radio configuration of one cell. For legacy cells
// `earfcn` holds the (U)ARFCN, `tac` the LAC and `pci` the BSIC/PSC.
struct CellParams {
  std::string plmn = "00101";
  int tac = 1;
  int pci = 0;
  std::int64_t cell_id = 1;
  int earfcn = 0;
  int band = 0;
  Rat rat = Rat::lte;
  double bandwidth_mhz = 10.0;
  int resel_priority = 0;

  bool operator==(const CellParams&) const = default;
};

constexpr int kMaxPci = 503;
constexpr int kMaxTac = 65535;
constexpr std::int64_t kMaxCellId = (std::int64_t{1} << 28) - 1;
constexpr int kMaxReselPriority = 7;

// Field-range check shared by the environment loader and the rule engine.
// Returns a diagnostic for the first offending field.
inline std::optional<std::string> cell_params_error(const CellParams& p)
{
  const bool digits = !p.plmn.empty() &&
      p.plmn.find_first_not_of("0123456789") == std::string::npos;
  if (!digits || p.plmn.size() < 5 || p.plmn.size() > 6) {
    return "plmn must be 5 or 6 digits, got '" + p.plmn + "'";
  }
  if (p.tac < 0 || p.tac > kMaxTac) {
    return "tac out of range [0, 65535]: " + std::to_string(p.tac);
  }
  if (p.pci < 0 || p.pci > kMaxPci) {
    return "pci out of range [0, 503]: " + std::to_string(p.pci);
  }
  if (p.cell_id < 0 || p.cell_id > kMaxCellId) {
    return "cell_id exceeds 28 bits: " + std::to_string(p.cell_id);
  }
  if (p.earfcn < 0) {
    return "earfcn must be non-negative: " + std::to_string(p.earfcn);
  }
  if (p.resel_priority < 0 || p.resel_priority > kMaxReselPriority) {
    return "resel_priority out of range [0, 7]: " +
        std::to_string(p.resel_priority);
  }
  if (!(p.bandwidth_mhz > 0.0) || !std::isfinite(p.bandwidth_mhz)) {
    return "bandwidth_mhz must be positive";
  }
  return std::nullopt;
}

} // namespace fbsim

#pragma once

#include "fbsim/rng.hpp"
#include "fbsim/trace.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbsim {

// ---- Timing Advance ---------------------------------------------------------

enum class TaMode { distance_based, fbs_default, diversified };

template <>
struct EnumNames<TaMode> {
  static constexpr std::array<std::pair<TaMode, std::string_view>, 3> items{{
      {TaMode::distance_based, "distance_based"},
      {TaMode::fbs_default, "fbs_default"},
      {TaMode::diversified, "diversified"},
  }};
};

struct TaModel {
  TaMode mode = TaMode::distance_based;
  int max_ta = 1282;
  double unit_m = 78.0;
  int diversified_max = 30;
};

inline int ta_command(const TaModel& model, double distance_m, Rng& rng)
{
  if (distance_m < 0.0) {
    throw std::invalid_argument("ta_command: negative distance");
  }
  const auto units = static_cast<long>(std::lround(distance_m / model.unit_m));
  switch (model.mode) {
  case TaMode::distance_based:
    return static_cast<int>(std::clamp<long>(units, 0, model.max_ta));
  case TaMode::fbs_default:
    return static_cast<int>(std::clamp<long>(units, 0, 1));
  case TaMode::diversified:
    return static_cast<int>(rng.uniform_int(0, model.diversified_max));
  }
  return 0;
}

// ---- Frame timing -----------------------------------------------------------

constexpr double kFramePeriodMs = 10.0;
constexpr double kCompensatedBoundNs = 1000.0;

struct ClockModel {
  bool compensated = false;
  double drift_ppm = 1.0;
  double jitter_ns = 5.0;
};

// Jitter is Gaussian truncated at 4 sigma, so a compensated clock never
// exceeds 4 * jitter_ns.
inline double truncated_jitter(double sigma, Rng& rng)
{
  if (sigma <= 0.0) {
    return 0.0;
  }
  double z = rng.normal(0.0, 1.0);
  while (std::abs(z) > 4.0) {
    z = rng.normal(0.0, 1.0);
  }
  return sigma * z;
}

inline void validate(const ClockModel& m)
{
  if (m.jitter_ns < 0.0 || !std::isfinite(m.drift_ppm)) {
    throw std::invalid_argument("clock model: negative jitter or non-finite drift");
  }
  if (m.compensated && 4.0 * m.jitter_ns >= kCompensatedBoundNs) {
    throw std::invalid_argument("compensated clock jitter must stay below 250 ns");
  }
}

// Cumulative timing error after each frame, in ns. A compensated clock is
// re-disciplined every frame so only the current frame's jitter remains.
inline std::vector<double> frame_timing_series(const ClockModel& model, std::size_t n_frames,
                                               Rng& rng)
{
  if (n_frames < 1) {
    throw std::invalid_argument("frame_timing_series: n_frames must be >= 1");
  }
  validate(model);
  // 1 ppm of a 10 ms frame is 10 ns.
  const double drift_ns = model.drift_ppm * 1e-6 * kFramePeriodMs * 1e6;
  std::vector<double> out;
  out.reserve(n_frames);
  double cum = 0.0;
  for (std::size_t i = 0; i < n_frames; ++i) {
    const double jitter = truncated_jitter(model.jitter_ns, rng);
    cum = model.compensated ? jitter : cum + drift_ns + jitter;
    out.push_back(cum);
  }
  return out;
}

inline ClockModel legit_clock() { return {true, 0.0, 20.0}; }

// ---- RF characteristics -----------------------------------------------------

struct Gaussian {
  double mean = 0.0;
  double stddev = 1.0;
  bool operator==(const Gaussian&) const = default;
};

struct RfSourceParams {
  std::string name;
  Gaussian cfo_hz;
  Gaussian sync_error_ns;
  Gaussian mag_error_pct;
  bool legit = false;
  bool operator==(const RfSourceParams&) const = default;

  RfFeatureVector mean() const { return {cfo_hz.mean, sync_error_ns.mean, mag_error_pct.mean}; }
};

inline const std::vector<RfSourceParams>& builtin_rf_presets()
{
  static const std::vector<RfSourceParams> presets = {
      {"mno1_day1", {-1416, 154}, {1493, 77}, {1.3, 0.3}, true},
      {"mno1_day7", {-1402, 119}, {1129, 91}, {1.2, 0.1}, true},
      {"mno2_day1", {-1316, 115}, {1927, 294}, {1.7, 0.1}, true},
      {"mno2_day7", {-1419, 201}, {2526, 889}, {1.3, 0.3}, true},
      {"mno3_day1", {-1541, 101}, {238, 81}, {1.9, 0.5}, true},
      {"mno3_day7", {-1501, 122}, {382, 63}, {2.7, 0.2}, true},
      {"fbs_b210", {-475, 145}, {-866, 59}, {16.9, 2.9}, false},
      {"fbs_x310", {-4130, 93}, {1937, 59}, {2.1, 0.2}, false},
      {"rf_manip", {-1346, 176}, {1563, 492}, {3.3, 0.4}, false},
      {"callbox", {-3376, 377}, {8147, 622}, {6.4, 0.9}, false},
      {"c_fbs", {-1443, 116}, {506, 12}, {12.1, 1.6}, false},
  };
  return presets;
}

class RfPresetTable {
public:
  RfPresetTable() : presets_(builtin_rf_presets()) {}
  explicit RfPresetTable(std::vector<RfSourceParams> presets) : presets_(std::move(presets))
  {
    for (const auto& p : presets_) {
      if (!(p.cfo_hz.stddev > 0 && p.sync_error_ns.stddev > 0 && p.mag_error_pct.stddev > 0)) {
        throw std::invalid_argument("rf preset " + p.name + ": stddevs must be positive");
      }
    }
  }

  const RfSourceParams& get(const std::string& name) const
  {
    for (const auto& p : presets_) {
      if (p.name == name) {
        return p;
      }
    }
    throw std::out_of_range("unknown rf preset: " + name);
  }

  const std::vector<RfSourceParams>& all() const { return presets_; }

  std::vector<RfSourceParams> legit() const
  {
    std::vector<RfSourceParams> out;
    for (const auto& p : presets_) {
      if (p.legit) {
        out.push_back(p);
      }
    }
    return out;
  }

private:
  std::vector<RfSourceParams> presets_;
};

// Preset file: {"presets": [{"name", "legit", "cfo_hz": [mean, sd],
// "sync_error_ns": [mean, sd], "mag_error_pct": [mean, sd]}]}.
inline RfPresetTable rf_presets_from_json(const nlohmann::json& j)
{
  auto g = [](const nlohmann::json& pair) {
    return Gaussian{pair.at(0).get<double>(), pair.at(1).get<double>()};
  };
  std::vector<RfSourceParams> out;
  for (const auto& p : j.at("presets")) {
    out.push_back({p.at("name").get<std::string>(), g(p.at("cfo_hz")), g(p.at("sync_error_ns")),
                   g(p.at("mag_error_pct")), p.value("legit", false)});
  }
  return RfPresetTable(std::move(out));
}

inline RfPresetTable load_rf_presets(const std::string& path)
{
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  return rf_presets_from_json(nlohmann::json::parse(in));
}

inline RfFeatureVector rf_sample(const RfSourceParams& s, Rng& rng)
{
  RfFeatureVector v;
  v.cfo_hz = rng.normal(s.cfo_hz.mean, s.cfo_hz.stddev);
  v.sync_error_ns = rng.normal(s.sync_error_ns.mean, s.sync_error_ns.stddev);
  v.mag_error_pct = std::max(0.0, rng.normal(s.mag_error_pct.mean, s.mag_error_pct.stddev));
  return v;
}

inline std::vector<RfFeatureVector> rf_features(const RfSourceParams& s, std::size_t n_windows,
                                                std::uint64_t seed)
{
  if (n_windows < 1) {
    throw std::invalid_argument("rf_features: n_windows must be >= 1");
  }
  Rng rng(seed, "rf:" + s.name);
  std::vector<RfFeatureVector> out;
  out.reserve(n_windows);
  for (std::size_t i = 0; i < n_windows; ++i) {
    out.push_back(rf_sample(s, rng));
  }
  return out;
}

// Hardware compensation swaps both the clock and the RF source.
struct HwProfile {
  ClockModel clock;
  std::string rf_preset;
};

inline HwProfile fbs_hardware(bool hw_compensation)
{
  if (hw_compensation) {
    return {{true, 0.0, 20.0}, "rf_manip"};
  }
  return {{false, 1.0, 5.0}, "fbs_b210"};
}

} // namespace fbsim

#pragma once

#include "fbsim/fbs_pipeline.hpp"
#include "fbsim/phy_artifacts.hpp"
#include "fbsim/radio_env.hpp"
#include "fbsim/trace.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace fbsim {

enum class PrimitiveId {
  signal_strength,
  rrc_failure,
  imsi_exposing,
  reject_msg,
  cell_info,
  redirection,
  null_cipher,
  ta_cmd,
  rf_char,
  timing_error,
};

template <>
struct EnumNames<PrimitiveId> {
  static constexpr std::array<std::pair<PrimitiveId, std::string_view>, 10> items{{
      {PrimitiveId::signal_strength, "signal_strength"},
      {PrimitiveId::rrc_failure, "rrc_failure"},
      {PrimitiveId::imsi_exposing, "imsi_exposing"},
      {PrimitiveId::reject_msg, "reject_msg"},
      {PrimitiveId::cell_info, "cell_info"},
      {PrimitiveId::redirection, "redirection"},
      {PrimitiveId::null_cipher, "null_cipher"},
      {PrimitiveId::ta_cmd, "ta_cmd"},
      {PrimitiveId::rf_char, "rf_char"},
      {PrimitiveId::timing_error, "timing_error"},
  }};
};

enum class DetectorId { rayhunter_like, phoenix_like, cellinfo_like, statistical_like };

template <>
struct EnumNames<DetectorId> {
  static constexpr std::array<std::pair<DetectorId, std::string_view>, 4> items{{
      {DetectorId::rayhunter_like, "rayhunter_like"},
      {DetectorId::phoenix_like, "phoenix_like"},
      {DetectorId::cellinfo_like, "cellinfo_like"},
      {DetectorId::statistical_like, "statistical_like"},
  }};
};

enum class DetectionOutcome { detected, suspect, missed };

template <>
struct EnumNames<DetectionOutcome> {
  static constexpr std::array<std::pair<DetectionOutcome, std::string_view>, 3> items{{
      {DetectionOutcome::detected, "detected"},
      {DetectionOutcome::suspect, "suspect"},
      {DetectionOutcome::missed, "missed"},
  }};
};

struct PrimitiveParams {
  double signal_jump_db = 20.0;
  double imsi_rate_threshold = 0.3;
  std::size_t ta_min_samples = 3;
  int ta_spread_max = 1;
  double timing_threshold_ns = 1000.0;
};

struct PrimitiveResult {
  bool fired = false;
  std::vector<std::string> evidence;
};

inline const std::set<int>& imsi_exposing_causes()
{
  static const std::set<int> causes = {2, 3, 6, 7, 8, 9, 11, 12, 13, 14, 15, 22, 42};
  return causes;
}

// ---- RF fingerprint classifier ------------------------------------------------

// Two-component PCA on standardized features, fit on window-level samples of
// the legitimate presets. Score is the Mahalanobis distance in PC space.
class RfClassifier {
public:
  static constexpr std::size_t kSamplesPerPreset = 200;
  static constexpr std::uint64_t kFitSeed = 0x5eedULL;
  static constexpr double kThresholdFactor = 1.5;

  explicit RfClassifier(const std::vector<RfSourceParams>& legit,
                        std::size_t samples_per_preset = kSamplesPerPreset,
                        std::uint64_t seed = kFitSeed)
  {
    if (legit.empty()) {
      throw std::invalid_argument("RfClassifier: no legitimate presets");
    }
    std::vector<Eigen::Vector3d> xs;
    for (const auto& p : legit) {
      for (const auto& v : rf_features(p, samples_per_preset, seed)) {
        xs.emplace_back(v.cfo_hz, v.sync_error_ns, v.mag_error_pct);
      }
    }
    const double n = static_cast<double>(xs.size());
    mean_.setZero();
    for (const auto& x : xs) {
      mean_ += x;
    }
    mean_ /= n;
    scale_.setZero();
    for (const auto& x : xs) {
      scale_ += (x - mean_).cwiseAbs2();
    }
    scale_ = (scale_ / (n - 1.0)).cwiseSqrt();

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& x : xs) {
      const Eigen::Vector3d z = standardize(x);
      cov += z * z.transpose();
    }
    cov /= (n - 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    // Eigenvalues ascend; keep the two largest.
    for (int k = 0; k < 2; ++k) {
      components_.col(k) = solver.eigenvectors().col(2 - k);
      variances_(k) = solver.eigenvalues()(2 - k);
    }
    double max_d = 0.0;
    for (const auto& x : xs) {
      max_d = std::max(max_d, distance_raw(x));
    }
    threshold_ = kThresholdFactor * max_d;
  }

  double distance(const RfFeatureVector& v) const
  {
    return distance_raw({v.cfo_hz, v.sync_error_ns, v.mag_error_pct});
  }

  bool flagged(const RfFeatureVector& v) const { return distance(v) > threshold_; }
  double threshold() const { return threshold_; }

  static const RfClassifier& default_instance()
  {
    static const RfClassifier c(RfPresetTable().legit());
    return c;
  }

private:
  Eigen::Vector3d standardize(const Eigen::Vector3d& x) const
  {
    return (x - mean_).cwiseQuotient(scale_);
  }

  double distance_raw(const Eigen::Vector3d& x) const
  {
    const Eigen::Vector2d pc = components_.transpose() * standardize(x);
    return std::sqrt(pc(0) * pc(0) / variances_(0) + pc(1) * pc(1) / variances_(1));
  }

  Eigen::Vector3d mean_;
  Eigen::Vector3d scale_;
  Eigen::Matrix<double, 3, 2> components_;
  Eigen::Vector2d variances_;
  double threshold_ = 0.0;
};

inline RfFeatureVector mean_vector(const std::vector<RfFeatureVector>& vs)
{
  RfFeatureVector m;
  if (vs.empty()) {
    return m;
  }
  for (const auto& v : vs) {
    m.cfo_hz += v.cfo_hz;
    m.sync_error_ns += v.sync_error_ns;
    m.mag_error_pct += v.mag_error_pct;
  }
  const double n = static_cast<double>(vs.size());
  return {m.cfo_hz / n, m.sync_error_ns / n, m.mag_error_pct / n};
}

// ---- trace analysis helpers ---------------------------------------------------

struct SessionStats {
  std::size_t sessions = 0;
  std::size_t exposing = 0;        // full message set
  std::size_t exposing_identity = 0; // IMSI identity request / IMSI paging only

  double rate() const { return sessions ? static_cast<double>(exposing) / sessions : 0.0; }
};

inline bool is_imsi_identity_request(const TraceEvent& e)
{
  return e.kind == MessageKind::identity_request && e.get_str("id_type") == std::string("imsi");
}

inline bool is_imsi_paging(const TraceEvent& e)
{
  return e.kind == MessageKind::paging && e.get_str("id_type") == std::string("imsi");
}

inline bool is_exposing_reject(const TraceEvent& e)
{
  if (e.kind != MessageKind::nas_reject) {
    return false;
  }
  const auto cause = e.get_int("reject_cause");
  return cause && imsi_exposing_causes().count(static_cast<int>(*cause)) != 0;
}

// A session opens at each connection setup towards a UE; IMSI paging that
// precedes a setup counts towards the session it opens.
inline SessionStats session_stats(const std::vector<TraceEvent>& trace)
{
  struct Open {
    bool exposing = false;
    bool identity = false;
  };
  std::map<std::string, Open> open;
  std::map<std::string, Open> pending;
  SessionStats s;
  auto close = [&](const std::string& ue) {
    auto it = open.find(ue);
    if (it == open.end()) {
      return;
    }
    s.exposing += it->second.exposing ? 1 : 0;
    s.exposing_identity += it->second.identity ? 1 : 0;
    open.erase(it);
  };
  for (const auto& e : trace) {
    if (e.kind == MessageKind::rrc_setup) {
      close(e.dst);
      ++s.sessions;
      open[e.dst] = pending[e.dst];
      pending.erase(e.dst);
      continue;
    }
    const bool identity = is_imsi_identity_request(e) || is_imsi_paging(e);
    const bool exposing = identity || is_exposing_reject(e);
    if (!exposing) {
      continue;
    }
    auto it = open.find(e.dst);
    Open& slot = (it != open.end() && !is_imsi_paging(e)) ? it->second : pending[e.dst];
    slot.exposing = true;
    slot.identity = slot.identity || identity;
  }
  for (auto it = open.begin(); it != open.end();) {
    s.exposing += it->second.exposing ? 1 : 0;
    s.exposing_identity += it->second.identity ? 1 : 0;
    it = open.erase(it);
  }
  return s;
}

using CellKey = std::tuple<std::string, int, std::int64_t, int, int>;

inline std::set<CellKey> baseline_keys(const ScanDatabase& baseline)
{
  std::set<CellKey> out;
  for (const auto& e : baseline.entries) {
    out.insert({e.params.plmn, e.params.tac, e.params.cell_id, e.params.earfcn, e.params.pci});
  }
  return out;
}

inline std::optional<CellKey> broadcast_key(const TraceEvent& e)
{
  if (e.kind != MessageKind::sib1) {
    return std::nullopt;
  }
  return CellKey{e.get_str("plmn").value_or(""), static_cast<int>(e.get_int("tac").value_or(-1)),
                 e.get_int("cell_id").value_or(-1), static_cast<int>(e.get_int("earfcn").value_or(-1)),
                 static_cast<int>(e.get_int("pci").value_or(-1))};
}

// Baseline of every legitimate cell, as a detector's reference database.
inline ScanDatabase baseline_db(const Environment& env)
{
  Environment legit = env;
  legit.cells.erase(std::remove_if(legit.cells.begin(), legit.cells.end(),
                                   [](const CellProfile& c) { return !c.legit; }),
                    legit.cells.end());
  return scan(legit, 1, 1, -std::numeric_limits<double>::infinity());
}

// ---- primitives ---------------------------------------------------------------

inline PrimitiveResult run_primitive(PrimitiveId id, const std::vector<TraceEvent>& trace,
                                     const ScanDatabase& baseline, const PrimitiveParams& params = {},
                                     const RfClassifier& rf = RfClassifier::default_instance())
{
  PrimitiveResult r;
  auto fire = [&](std::string why) {
    r.fired = true;
    if (r.evidence.size() < 8) {
      r.evidence.push_back(std::move(why));
    }
  };
  switch (id) {
  case PrimitiveId::signal_strength: {
    std::map<std::string, double> initial;
    for (const auto& e : trace) {
      if (e.kind == MessageKind::ue_state && e.phy && e.phy->rsrp_dbm) {
        initial.emplace(e.src, *e.phy->rsrp_dbm);
      }
    }
    for (const auto& e : trace) {
      if (e.kind != MessageKind::rrc_setup || !e.phy || !e.phy->rsrp_dbm) {
        continue;
      }
      auto it = initial.find(e.dst);
      if (it != initial.end() && *e.phy->rsrp_dbm - it->second > params.signal_jump_db) {
        fire("rsrp jump " + std::to_string(*e.phy->rsrp_dbm - it->second) + " dB at " + e.dst +
             " from " + e.src);
      }
    }
    std::set<int> listed_freqs;
    for (const auto& b : baseline.entries) {
      if (!b.neighbor_pcis.empty()) {
        listed_freqs.insert(b.params.earfcn);
      }
    }
    for (const auto& e : trace) {
      if (e.kind == MessageKind::sib1 && e.get_str("rat") == std::string("lte") &&
          e.get_str("neighbor_pcis").value_or("").empty() &&
          listed_freqs.count(static_cast<int>(e.get_int("earfcn").value_or(-1))) != 0) {
        fire("neighbor list missing in SIB of " + e.src);
      }
    }
    break;
  }
  case PrimitiveId::rrc_failure:
    for (const auto& e : trace) {
      if (e.kind == MessageKind::rlf || e.kind == MessageKind::reestablishment_request ||
          e.kind == MessageKind::handover_failure) {
        fire(std::string(to_string(e.kind)) + " from " + e.src + " at " + std::to_string(e.t_ms));
      }
    }
    break;
  case PrimitiveId::imsi_exposing: {
    const auto s = session_stats(trace);
    if (s.rate() > params.imsi_rate_threshold) {
      fire("exposing rate " + std::to_string(s.rate()) + " over " + std::to_string(s.sessions) +
           " sessions");
    }
    break;
  }
  case PrimitiveId::reject_msg:
    for (const auto& e : trace) {
      if (e.kind == MessageKind::nas_reject) {
        fire("nas_reject cause " + std::to_string(e.get_int("reject_cause").value_or(0)) +
             " to " + e.dst);
      }
    }
    break;
  case PrimitiveId::cell_info: {
    const auto known = baseline_keys(baseline);
    for (const auto& e : trace) {
      if (auto k = broadcast_key(e); k && known.count(*k) == 0) {
        fire("unknown cell broadcast from " + e.src);
      }
    }
    break;
  }
  case PrimitiveId::redirection:
    for (const auto& e : trace) {
      if (e.kind == MessageKind::sib7 && e.has("target_priority")) {
        fire("SIB7 legacy priority from " + e.src);
      }
      if (e.kind == MessageKind::rrc_release &&
          e.get_str("redirect_vector") == std::string("redirected_carrier_info")) {
        fire("redirectedCarrierInfo to " + e.dst);
      }
    }
    break;
  case PrimitiveId::null_cipher:
    for (const auto& e : trace) {
      if (e.kind == MessageKind::security_mode_command &&
          e.get_str("cipher") == std::string("eea0")) {
        fire("null cipher from " + e.src);
      }
    }
    break;
  case PrimitiveId::ta_cmd: {
    std::map<std::string, std::vector<int>> per_cell;
    std::vector<int> reference;
    for (const auto& e : trace) {
      if (!e.phy || !e.phy->ta_command) {
        continue;
      }
      if (e.kind == MessageKind::ue_state) {
        reference.push_back(*e.phy->ta_command);
        per_cell[e.get_str("serving").value_or("")].push_back(*e.phy->ta_command);
      } else if (e.kind == MessageKind::rrc_setup) {
        per_cell[e.src].push_back(*e.phy->ta_command);
      }
    }
    auto spread = [](const std::vector<int>& v) {
      const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
      return *hi - *lo;
    };
    if (reference.size() < 2 || spread(reference) <= params.ta_spread_max) {
      break;
    }
    for (const auto& [cell, v] : per_cell) {
      if (v.size() >= params.ta_min_samples && spread(v) <= params.ta_spread_max) {
        fire("TA spread " + std::to_string(spread(v)) + " over " + std::to_string(v.size()) +
             " connections at " + cell);
      }
    }
    break;
  }
  case PrimitiveId::rf_char: {
    std::map<std::string, std::vector<RfFeatureVector>> per_cell;
    for (const auto& e : trace) {
      if (e.phy && e.phy->rf) {
        per_cell[e.src].push_back(*e.phy->rf);
      }
    }
    for (const auto& [cell, v] : per_cell) {
      const double d = rf.distance(mean_vector(v));
      if (d > rf.threshold()) {
        fire("rf distance " + std::to_string(d) + " at " + cell);
      }
    }
    break;
  }
  case PrimitiveId::timing_error: {
    std::set<std::string> seen;
    for (const auto& e : trace) {
      if (e.phy && e.phy->frame_timing_error_ns &&
          std::abs(*e.phy->frame_timing_error_ns) > params.timing_threshold_ns &&
          seen.insert(e.src).second) {
        fire("cumulative timing error " + std::to_string(*e.phy->frame_timing_error_ns) +
             " ns at " + e.src);
      }
    }
    break;
  }
  }
  return r;
}

inline PrimitiveResult run_primitive(PrimitiveId id, const PipelineRun& run,
                                     const ScanDatabase& baseline, const PrimitiveParams& params = {})
{
  return run_primitive(id, run.trace, baseline, params);
}

// ---- composite detectors --------------------------------------------------------

struct DetectorInfo {
  DetectorId id;
  int suspect_low = 0;
  int detect_low = 0;
  bool modeled = true;
  std::string description;
};

inline const DetectorInfo& detector_info(DetectorId id)
{
  static const std::vector<DetectorInfo> infos = {
      {DetectorId::rayhunter_like, 30, 70, true,
       "IMSI identity requests and IMSI paging, redirection, null cipher, unknown PLMN"},
      {DetectorId::phoenix_like, 50, 100, true,
       "NAS sequence signatures: identity request then reject, or reject then IMSI attach"},
      {DetectorId::cellinfo_like, 20, 26, true,
       "Signal-strength anomalies and cell parameters absent from the baseline"},
      {DetectorId::statistical_like, 16, 30, true,
       "Session rate of IMSI-exposing messages against a benign band of [0, 0.15]"},
  };
  return infos.at(static_cast<std::size_t>(id));
}

inline std::vector<DetectorId> all_detectors()
{
  std::vector<DetectorId> out;
  for (const auto& [d, name] : EnumNames<DetectorId>::items) {
    out.push_back(d);
  }
  return out;
}

struct DetectionVerdict {
  DetectorId detector = DetectorId::rayhunter_like;
  int score = 0;
  DetectionOutcome verdict = DetectionOutcome::missed;
  std::set<PrimitiveId> fired_primitives;
  std::vector<std::string> rationale;
};

inline DetectionOutcome classify(const DetectorInfo& info, int score)
{
  if (score >= info.detect_low) {
    return DetectionOutcome::detected;
  }
  if (score >= info.suspect_low) {
    return DetectionOutcome::suspect;
  }
  return DetectionOutcome::missed;
}

namespace detector_detail {

// Per-UE ordered NAS signature match.
inline bool phoenix_signature(const std::vector<TraceEvent>& trace, std::string& why)
{
  std::map<std::string, bool> saw_identity;
  std::map<std::string, bool> saw_reject;
  for (const auto& e : trace) {
    if (e.kind == MessageKind::identity_request) {
      saw_identity[e.dst] = true;
    } else if (e.kind == MessageKind::nas_reject) {
      if (saw_identity[e.dst]) {
        why = "identity_request followed by nas_reject at " + e.dst;
        return true;
      }
      saw_reject[e.dst] = true;
    } else if (e.kind == MessageKind::attach_request && e.get_bool("contains_imsi") &&
               saw_reject[e.src]) {
      why = "nas_reject followed by IMSI attach from " + e.src;
      return true;
    }
  }
  return false;
}

} // namespace detector_detail

inline DetectionVerdict run_detector(DetectorId id, const std::vector<TraceEvent>& trace,
                                     const ScanDatabase& baseline)
{
  DetectionVerdict v;
  v.detector = id;
  auto use = [&](PrimitiveId p, const PrimitiveResult& r) {
    if (r.fired) {
      v.fired_primitives.insert(p);
      for (const auto& ev : r.evidence) {
        v.rationale.push_back(std::string(to_string(p)) + ": " + ev);
      }
    }
    return r.fired;
  };
  switch (id) {
  case DetectorId::rayhunter_like: {
    const auto s = session_stats(trace);
    int score = 0;
    if (s.exposing_identity > 0) {
      score += 70;
      v.fired_primitives.insert(PrimitiveId::imsi_exposing);
      v.rationale.push_back("IMSI identity request or IMSI paging observed");
    }
    if (use(PrimitiveId::redirection, run_primitive(PrimitiveId::redirection, trace, baseline))) {
      score += 70;
    }
    if (use(PrimitiveId::null_cipher, run_primitive(PrimitiveId::null_cipher, trace, baseline))) {
      score += 70;
    }
    std::set<std::string> plmns;
    for (const auto& e : baseline.entries) {
      plmns.insert(e.params.plmn);
    }
    for (const auto& e : trace) {
      if (e.kind == MessageKind::sib1 && plmns.count(e.get_str("plmn").value_or("")) == 0) {
        score += 30;
        v.fired_primitives.insert(PrimitiveId::cell_info);
        v.rationale.push_back("PLMN outside baseline from " + e.src);
        break;
      }
    }
    v.score = std::min(score, 100);
    break;
  }
  case DetectorId::phoenix_like: {
    std::string why;
    if (detector_detail::phoenix_signature(trace, why)) {
      v.score = 100;
      v.fired_primitives.insert(PrimitiveId::reject_msg);
      v.rationale.push_back(why);
    }
    break;
  }
  case DetectorId::cellinfo_like: {
    int score = 0;
    if (use(PrimitiveId::signal_strength,
            run_primitive(PrimitiveId::signal_strength, trace, baseline))) {
      score += 30;
    }
    if (use(PrimitiveId::cell_info, run_primitive(PrimitiveId::cell_info, trace, baseline))) {
      score += 25;
    }
    v.score = score;
    break;
  }
  case DetectorId::statistical_like: {
    const auto s = session_stats(trace);
    v.score = static_cast<int>(std::lround(100.0 * s.rate()));
    v.rationale.push_back("exposing rate " + std::to_string(s.rate()) + " over " +
                          std::to_string(s.sessions) + " sessions");
    if (s.rate() > PrimitiveParams{}.imsi_rate_threshold) {
      v.fired_primitives.insert(PrimitiveId::imsi_exposing);
    }
    break;
  }
  }
  v.verdict = classify(detector_info(id), v.score);
  return v;
}

inline DetectionVerdict run_detector(DetectorId id, const PipelineRun& run,
                                     const ScanDatabase& baseline)
{
  return run_detector(id, run.trace, baseline);
}

// ---- coverage matrix ------------------------------------------------------------

struct CoverageMatrix {
  std::vector<std::string> rows;
  std::vector<DetectorId> cols;
  std::vector<std::vector<DetectionVerdict>> cells; // [row][col]

  std::map<DetectorId, std::vector<std::string>> missed_by_detector() const
  {
    std::map<DetectorId, std::vector<std::string>> out;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      auto& list = out[cols[c]];
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (cells[r][c].verdict == DetectionOutcome::missed) {
          list.push_back(rows[r]);
        }
      }
    }
    return out;
  }

  std::map<std::string, std::vector<DetectorId>> evaders_by_instance() const
  {
    std::map<std::string, std::vector<DetectorId>> out;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      auto& list = out[rows[r]];
      for (std::size_t c = 0; c < cols.size(); ++c) {
        if (cells[r][c].verdict == DetectionOutcome::missed) {
          list.push_back(cols[c]);
        }
      }
    }
    return out;
  }
};

// Runs each instance once and scores it with every detector. Instances are
// distributed over `jobs` worker threads; results land in fixed slots.
inline CoverageMatrix build_coverage_matrix(const std::vector<ConfigProfile>& instances,
                                            const std::vector<DetectorId>& detectors,
                                            const Environment& env, unsigned jobs = 1)
{
  CoverageMatrix m;
  m.cols = detectors;
  for (const auto& p : instances) {
    m.rows.push_back(p.name);
  }
  m.cells.assign(instances.size(), std::vector<DetectionVerdict>(detectors.size()));
  const auto baseline = baseline_db(env);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < instances.size(); i = next++) {
      try {
        const auto r = run(instances[i], env);
        for (std::size_t c = 0; c < detectors.size(); ++c) {
          m.cells[i][c] = run_detector(detectors[c], r, baseline);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) {
          failure = std::current_exception();
        }
      }
    }
  };
  jobs = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(instances.size())));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) {
      pool.emplace_back(worker);
    }
    for (auto& t : pool) {
      t.join();
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
  return m;
}

inline std::string coverage_csv(const CoverageMatrix& m)
{
  std::ostringstream os;
  os << "instance";
  for (auto d : m.cols) {
    os << ',' << to_string(d);
  }
  os << '\n';
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    os << m.rows[r];
    for (const auto& cell : m.cells[r]) {
      os << ',' << to_string(cell.verdict);
    }
    os << '\n';
  }
  return os.str();
}

inline nlohmann::json coverage_json(const CoverageMatrix& m)
{
  nlohmann::json j;
  j["instances"] = m.rows;
  auto dets = nlohmann::json::array();
  for (auto d : m.cols) {
    const auto& info = detector_info(d);
    dets.push_back({{"id", to_string(d)},
                    {"suspect_low", info.suspect_low},
                    {"detect_low", info.detect_low},
                    {"modeled", info.modeled},
                    {"description", info.description}});
  }
  j["detectors"] = dets;
  auto cells = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    for (const auto& v : m.cells[r]) {
      auto fired = nlohmann::json::array();
      for (auto p : v.fired_primitives) {
        fired.push_back(to_string(p));
      }
      cells.push_back({{"instance", m.rows[r]},
                       {"detector", to_string(v.detector)},
                       {"score", v.score},
                       {"verdict", to_string(v.verdict)},
                       {"fired_primitives", fired},
                       {"rationale", v.rationale}});
    }
  }
  j["cells"] = cells;
  nlohmann::json per_det = nlohmann::json::object();
  for (const auto& [d, list] : m.missed_by_detector()) {
    per_det[std::string(to_string(d))] = list;
  }
  nlohmann::json per_inst = nlohmann::json::object();
  for (const auto& [inst, list] : m.evaders_by_instance()) {
    auto arr = nlohmann::json::array();
    for (auto d : list) {
      arr.push_back(to_string(d));
    }
    per_inst[inst] = arr;
  }
  j["blind_spots"] = {{"missed_by_detector", per_det}, {"evaded_detectors_by_instance", per_inst}};
  return j;
}

inline std::string blind_spot_summary(const CoverageMatrix& m)
{
  std::ostringstream os;
  os << "blind spots by detector:\n";
  for (const auto& [d, list] : m.missed_by_detector()) {
    os << "  " << to_string(d) << ": " << list.size() << " missed";
    for (const auto& r : list) {
      os << ' ' << r;
    }
    os << '\n';
  }
  os << "evaded detectors by instance:\n";
  const auto evaders = m.evaders_by_instance();
  for (const auto& row : m.rows) {
    const auto& list = evaders.at(row);
    os << "  " << row << ':';
    for (auto d : list) {
      os << ' ' << to_string(d);
    }
    os << '\n';
  }
  return os.str();
}

} // namespace fbsim

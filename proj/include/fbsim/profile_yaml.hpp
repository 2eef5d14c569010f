#pragma once

#include "fbsim/config_space.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbsim {

// Raised for malformed YAML and for schema violations. `field` is the dotted
// path of the offending key; `line` is 1-based, 0 when unknown.
class ProfileError : public std::runtime_error {
public:
  ProfileError(std::string field, int line, const std::string& what)
      : std::runtime_error(format(field, line, what)), field_(std::move(field)), line_(line) {}

  const std::string& field() const { return field_; }
  int line() const { return line_; }

private:
  static std::string format(const std::string& field, int line, const std::string& what)
  {
    std::string out;
    if (line > 0) {
      out += "line " + std::to_string(line) + ": ";
    }
    if (!field.empty()) {
      out += field + ": ";
    }
    return out + what;
  }

  std::string field_;
  int line_;
};

namespace yaml_detail {

inline int line_of(const YAML::Node& n)
{
  const auto mark = n.Mark();
  return mark.line >= 0 ? mark.line + 1 : 0;
}

inline std::string join(const std::string& path, const std::string& key)
{
  return path.empty() ? key : path + "." + key;
}

inline void require_map(const YAML::Node& n, const std::string& path)
{
  if (!n.IsMap()) {
    throw ProfileError(path, line_of(n), "expected a mapping");
  }
}

inline void reject_unknown(const YAML::Node& n, const std::string& path,
                           std::initializer_list<std::string_view> allowed)
{
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (auto a : allowed) {
      ok = ok || a == key;
    }
    if (!ok) {
      throw ProfileError(join(path, key), line_of(kv.first), "unknown key");
    }
  }
}

template <typename T>
T scalar(const YAML::Node& n, const std::string& path)
{
  if (!n.IsScalar()) {
    throw ProfileError(path, line_of(n), "expected a scalar");
  }
  if constexpr (std::is_unsigned_v<T>) {
    if (!n.Scalar().empty() && n.Scalar().front() == '-') {
      throw ProfileError(path, line_of(n), "expected a non-negative integer");
    }
  }
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ProfileError(path, line_of(n), "invalid value '" + n.Scalar() + "'");
  }
}

template <typename E>
E enum_value(const YAML::Node& n, const std::string& path)
{
  const auto text = scalar<std::string>(n, path);
  if (auto v = parse_enum<E>(text)) {
    return *v;
  }
  throw ProfileError(path, line_of(n),
                     "invalid value '" + text + "', expected one of " + enum_choices<E>());
}

template <typename T>
void optional_field(const YAML::Node& map, const std::string& path, const char* key, T& out)
{
  if (const auto n = map[key]) {
    if constexpr (std::is_enum_v<T>) {
      out = enum_value<T>(n, join(path, key));
    } else {
      out = scalar<T>(n, join(path, key));
    }
  }
}

inline CellParams parse_cell(const YAML::Node& n, const std::string& path)
{
  require_map(n, path);
  reject_unknown(n, path, {"plmn", "tac", "pci", "cell_id", "earfcn", "band", "rat",
                           "bandwidth_mhz", "resel_priority"});
  CellParams c;
  optional_field(n, path, "plmn", c.plmn);
  optional_field(n, path, "tac", c.tac);
  optional_field(n, path, "pci", c.pci);
  optional_field(n, path, "cell_id", c.cell_id);
  optional_field(n, path, "earfcn", c.earfcn);
  optional_field(n, path, "band", c.band);
  optional_field(n, path, "rat", c.rat);
  optional_field(n, path, "bandwidth_mhz", c.bandwidth_mhz);
  optional_field(n, path, "resel_priority", c.resel_priority);
  return c;
}

inline ConfigProfile parse_profile_node(const YAML::Node& root, const std::string& base)
{
  if (!root || root.IsNull()) {
    throw ProfileError(base, 0, "empty document");
  }
  require_map(root, base);
  reject_unknown(root, base, {"name", "seed", "launch", "hijack", "app"});
  ConfigProfile p;
  optional_field(root, base, "name", p.name);
  optional_field(root, base, "seed", p.seed);

  if (const auto l = root["launch"]) {
    const auto path = join(base, "launch");
    require_map(l, path);
    reject_unknown(l, path, {"adaptation", "cell_iteration", "paging_reproduction",
                             "ta_diversification", "hw_compensation", "tx_power_dbm",
                             "manual_params", "additional_cells", "dwell_ms"});
    auto& lc = p.launch;
    optional_field(l, path, "adaptation", lc.adaptation);
    optional_field(l, path, "cell_iteration", lc.cell_iteration);
    optional_field(l, path, "paging_reproduction", lc.paging_reproduction);
    optional_field(l, path, "ta_diversification", lc.ta_diversification);
    optional_field(l, path, "hw_compensation", lc.hw_compensation);
    optional_field(l, path, "tx_power_dbm", lc.tx_power_dbm);
    optional_field(l, path, "dwell_ms", lc.dwell_ms);
    if (const auto m = l["manual_params"]; m && !m.IsNull()) {
      lc.manual_params = parse_cell(m, join(path, "manual_params"));
    }
    if (const auto cells = l["additional_cells"]; cells && !cells.IsNull()) {
      const auto cpath = join(path, "additional_cells");
      if (!cells.IsSequence()) {
        throw ProfileError(cpath, line_of(cells), "expected a sequence");
      }
      for (std::size_t i = 0; i < cells.size(); ++i) {
        lc.additional_cells.push_back(
            parse_cell(cells[i], cpath + "[" + std::to_string(i) + "]"));
      }
    }
  }

  if (const auto h = root["hijack"]) {
    const auto path = join(base, "hijack");
    require_map(h, path);
    reject_unknown(h, path, {"method", "power_margin_db"});
    optional_field(h, path, "method", p.hijack.method);
    optional_field(h, path, "power_margin_db", p.hijack.power_margin_db);
  }

  bool cause_given = false;
  if (const auto a = root["app"]) {
    const auto path = join(base, "app");
    require_map(a, path);
    reject_unknown(a, path, {"targeting", "sampling_fraction", "target_ids", "variation",
                             "reject_cause", "tracking_period_ms"});
    auto& ac = p.app;
    optional_field(a, path, "targeting", ac.targeting);
    optional_field(a, path, "sampling_fraction", ac.sampling_fraction);
    optional_field(a, path, "variation", ac.variation);
    optional_field(a, path, "tracking_period_ms", ac.tracking_period_ms);
    if (const auto c = a["reject_cause"]) {
      ac.reject_cause = scalar<int>(c, join(path, "reject_cause"));
      cause_given = true;
    }
    if (const auto ids = a["target_ids"]; ids && !ids.IsNull()) {
      const auto ipath = join(path, "target_ids");
      if (!ids.IsSequence()) {
        throw ProfileError(ipath, line_of(ids), "expected a sequence");
      }
      for (std::size_t i = 0; i < ids.size(); ++i) {
        ac.target_ids.push_back(
            scalar<std::string>(ids[i], ipath + "[" + std::to_string(i) + "]"));
      }
    }
  }
  if (!cause_given) {
    p.app.reject_cause = default_reject_cause(p.app.variation);
  }
  return p;
}

template <typename F>
auto guard_parse(F&& f)
{
  try {
    return f();
  } catch (const YAML::ParserException& e) {
    throw ProfileError("", e.mark.line >= 0 ? e.mark.line + 1 : 0, e.msg);
  }
}

// Shortest decimal that round-trips; YAML spellings for non-finite values.
inline std::string format_double(double v)
{
  if (std::isnan(v)) {
    return ".nan";
  }
  if (std::isinf(v)) {
    return v > 0 ? ".inf" : "-.inf";
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".e") == std::string::npos) {
    s += ".0";
  }
  return s;
}

inline std::string quote(const std::string& s)
{
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
    case '"': out += "\\\""; break;
    case '\\': out += "\\\\"; break;
    case '\n': out += "\\n"; break;
    case '\t': out += "\\t"; break;
    default:
      if (static_cast<unsigned char>(c) < 0x20) {
        char hex[8];
        std::snprintf(hex, sizeof hex, "\\x%02x", static_cast<unsigned char>(c));
        out += hex;
      } else {
        out += c;
      }
    }
  }
  return out + "\"";
}

// Cell fields in sorted key order; `first` prefixes the first line (list dash).
inline void emit_cell(std::ostream& os, const CellParams& c, const std::string& indent,
                      const std::string& first)
{
  os << first << "band: " << c.band << '\n';
  os << indent << "bandwidth_mhz: " << format_double(c.bandwidth_mhz) << '\n';
  os << indent << "cell_id: " << c.cell_id << '\n';
  os << indent << "earfcn: " << c.earfcn << '\n';
  os << indent << "pci: " << c.pci << '\n';
  os << indent << "plmn: " << quote(c.plmn) << '\n';
  os << indent << "rat: " << to_string(c.rat) << '\n';
  os << indent << "resel_priority: " << c.resel_priority << '\n';
  os << indent << "tac: " << c.tac << '\n';
}

} // namespace yaml_detail

// Canonical form: keys sorted at every level, every default written out,
// manual_params omitted when absent.
inline void emit_profile(std::ostream& os, const ConfigProfile& p, const std::string& indent = "")
{
  using yaml_detail::format_double;
  using yaml_detail::quote;
  const std::string i1 = indent + "  ";
  const std::string i2 = indent + "    ";
  const std::string i3 = indent + "      ";

  os << indent << "app:\n";
  os << i1 << "reject_cause: " << p.app.reject_cause << '\n';
  os << i1 << "sampling_fraction: " << format_double(p.app.sampling_fraction) << '\n';
  if (p.app.target_ids.empty()) {
    os << i1 << "target_ids: []\n";
  } else {
    os << i1 << "target_ids:\n";
    for (const auto& id : p.app.target_ids) {
      os << i2 << "- " << quote(id) << '\n';
    }
  }
  os << i1 << "targeting: " << to_string(p.app.targeting) << '\n';
  os << i1 << "tracking_period_ms: " << p.app.tracking_period_ms << '\n';
  os << i1 << "variation: " << to_string(p.app.variation) << '\n';

  os << indent << "hijack:\n";
  os << i1 << "method: " << to_string(p.hijack.method) << '\n';
  os << i1 << "power_margin_db: " << format_double(p.hijack.power_margin_db) << '\n';

  const auto& l = p.launch;
  os << indent << "launch:\n";
  os << i1 << "adaptation: " << to_string(l.adaptation) << '\n';
  if (l.additional_cells.empty()) {
    os << i1 << "additional_cells: []\n";
  } else {
    os << i1 << "additional_cells:\n";
    for (const auto& c : l.additional_cells) {
      yaml_detail::emit_cell(os, c, i3, i2 + "- ");
    }
  }
  os << i1 << "cell_iteration: " << to_string(l.cell_iteration) << '\n';
  os << i1 << "dwell_ms: " << l.dwell_ms << '\n';
  os << i1 << "hw_compensation: " << (l.hw_compensation ? "true" : "false") << '\n';
  if (l.manual_params) {
    os << i1 << "manual_params:\n";
    yaml_detail::emit_cell(os, *l.manual_params, i2, i2);
  }
  os << i1 << "paging_reproduction: " << (l.paging_reproduction ? "true" : "false") << '\n';
  os << i1 << "ta_diversification: " << (l.ta_diversification ? "true" : "false") << '\n';
  os << i1 << "tx_power_dbm: " << format_double(l.tx_power_dbm) << '\n';

  os << indent << "name: " << quote(p.name) << '\n';
  os << indent << "seed: " << p.seed << '\n';
}

inline std::string to_yaml(const ConfigProfile& p)
{
  std::ostringstream os;
  emit_profile(os, p);
  return os.str();
}

inline ConfigProfile profile_from_yaml(const std::string& text)
{
  return yaml_detail::guard_parse(
      [&] { return yaml_detail::parse_profile_node(YAML::Load(text), ""); });
}

inline ConfigProfile load_profile(const std::string& path)
{
  std::ifstream in(path);
  if (!in) {
    throw ProfileError("", 0, "cannot open " + path);
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return profile_from_yaml(buf.str());
}

inline void save_profile(const ConfigProfile& p, const std::string& path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  out << to_yaml(p);
  if (!out) {
    throw std::runtime_error("write failed: " + path);
  }
}

// Instance-set document: `instances: [profile, ...]`.
inline std::vector<ConfigProfile> instance_set_from_yaml(const std::string& text)
{
  return yaml_detail::guard_parse([&] {
    const auto root = YAML::Load(text);
    yaml_detail::require_map(root, "");
    yaml_detail::reject_unknown(root, "", {"instances"});
    const auto list = root["instances"];
    if (!list || !list.IsSequence()) {
      throw ProfileError("instances", yaml_detail::line_of(root), "expected a sequence");
    }
    std::vector<ConfigProfile> out;
    for (std::size_t i = 0; i < list.size(); ++i) {
      out.push_back(
          yaml_detail::parse_profile_node(list[i], "instances[" + std::to_string(i) + "]"));
    }
    return out;
  });
}

inline std::vector<ConfigProfile> load_instance_set(const std::string& path)
{
  std::ifstream in(path);
  if (!in) {
    throw ProfileError("", 0, "cannot open " + path);
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return instance_set_from_yaml(buf.str());
}

inline std::string instance_set_to_yaml(const std::vector<ConfigProfile>& set)
{
  std::ostringstream os;
  os << "instances:\n";
  for (const auto& p : set) {
    std::ostringstream item;
    emit_profile(item, p, "    ");
    auto text = item.str();
    text.replace(0, 4, "  - ");
    os << text;
  }
  return os.str();
}

} // namespace fbsim

// Command-line front end: enumerate, validate, run, evaluate, report, rules, scan.
// Exit codes: 0 success or valid, 1 rejection or blind-spot policy failure,
// 2 usage or parse error.

#include "fbsim/fbsim.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace fbsim;

namespace {

constexpr const char* kToolVersion = "1.0.0";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string sha256_hex(const std::string& data)
{
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

std::string read_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& data)
{
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << data)) {
    throw std::runtime_error("cannot write " + path.string());
  }
}

std::string default_out_dir()
{
  const char* env = std::getenv("FBSIM_OUT_DIR");
  return env && *env ? env : ".";
}

std::string default_env_path() { return std::string(FBSIM_ASSET_DIR) + "/default_env.yaml"; }

template <typename E>
void add_enum_option(CLI::App* app, const std::string& name, std::optional<E>& slot,
                     const std::string& help)
{
  app->add_option_function<std::string>(
         name,
         [&slot, name](const std::string& v) {
           auto e = parse_enum<E>(v);
           if (!e) {
             throw CLI::ValidationError(name, "expected one of " + enum_choices<E>());
           }
           slot = *e;
         },
         help + " (" + enum_choices<E>() + ")");
}

// ---- enumerate ----------------------------------------------------------------

int cmd_enumerate(const InstanceFilter& filter, const std::string& out_dir, bool count_only)
{
  const auto instances = enumerate_instances(filter);
  if (!count_only) {
    fs::create_directories(out_dir);
    for (const auto& p : instances) {
      write_file(fs::path(out_dir) / (p.name + ".yaml"), to_yaml(p));
    }
  }
  std::cout << instances.size() << '\n';
  return 0;
}

// ---- validate -----------------------------------------------------------------

int cmd_validate(const std::string& profile_path, const std::string& env_path, bool quiet)
{
  ConfigProfile profile;
  Environment env;
  try {
    profile = load_profile(profile_path);
    env = load_environment(env_path);
  } catch (const ProfileError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
  const auto db = scan(env, env.settings.scan_dwell_ms, env.settings.radios);
  const auto result = check(profile, db);
  if (!quiet) {
    std::cout << result.report.to_text();
  }
  return result.report.ok() ? 0 : 1;
}

// ---- run ------------------------------------------------------------------------

nlohmann::json outcomes_json(const Outcomes& o)
{
  return {{"hijacked", o.hijacked_ues.size()},
          {"captured", o.imsis_captured.size()},
          {"dos_applied", o.dos_applied.size()},
          {"redirected", o.redirected_ues.size()},
          {"sms_delivered", o.sms_delivered.size()},
          {"tracked", o.locations.size()}};
}

int cmd_run(const std::string& profile_path, const std::string& env_path,
            const std::string& out_dir, const std::optional<std::uint64_t>& seed)
{
  ConfigProfile profile;
  Environment env;
  try {
    profile = load_profile(profile_path);
    env = load_environment(env_path);
  } catch (const ProfileError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
  if (seed) {
    profile.seed = *seed;
  }
  PipelineRun r;
  try {
    r = run(profile, env);
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  const fs::path trace_path = fs::path(out_dir) / (profile.name + ".jsonl");
  const fs::path manifest_path = fs::path(out_dir) / (profile.name + ".manifest.json");
  write_file(trace_path, to_jsonl(r.trace));

  nlohmann::json manifest;
  manifest["tool"] = {{"name", "fbsim"}, {"version", kToolVersion}};
  manifest["profile"] = {{"name", profile.name},
                         {"path", profile_path},
                         {"sha256", sha256_hex(to_yaml(profile))}};
  manifest["seed"] = profile.seed;
  manifest["environment"] = {{"name", env.name},
                             {"path", env_path},
                             {"sha256", sha256_hex(read_file(env_path))},
                             {"cells", env.cells.size()},
                             {"ues", env.ues.size()}};
  manifest["outputs"] = {{"trace", trace_path.string()},
                         {"trace_sha256", sha256_hex(to_jsonl(r.trace))},
                         {"events", r.trace.size()}};
  manifest["validation"] = to_string(r.validation.verdict);
  manifest["outcomes"] = outcomes_json(r.outcomes);
  write_file(manifest_path, manifest.dump(2) + "\n");

  if (!r.validation.applied_fixes.empty()) {
    std::cout << r.validation.to_text();
  }
  std::cout << summary_line(r.outcomes) << '\n';
  return 0;
}

// ---- evaluate -------------------------------------------------------------------

std::vector<DetectorId> parse_detectors(const std::vector<std::string>& names)
{
  if (names.empty()) {
    return all_detectors();
  }
  std::vector<DetectorId> out;
  for (const auto& n : names) {
    auto d = parse_enum<DetectorId>(n);
    if (!d) {
      throw UsageError("unknown detector '" + n + "' (" + enum_choices<DetectorId>() + ")");
    }
    out.push_back(*d);
  }
  return out;
}

int cmd_evaluate(const std::string& set_path, const std::string& env_path,
                 const std::string& out_dir, const std::vector<std::string>& detector_names,
                 const std::string& format, unsigned jobs, const std::optional<std::uint64_t>& seed,
                 bool fail_on_missed)
{
  std::vector<ConfigProfile> instances;
  Environment env;
  try {
    instances = load_instance_set(set_path);
    env = load_environment(env_path);
  } catch (const ProfileError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
  if (instances.empty()) {
    std::cerr << "instance set is empty\n";
    return 2;
  }
  if (seed) {
    for (auto& p : instances) {
      p.seed = *seed;
    }
  }
  const auto detectors = parse_detectors(detector_names);
  const auto m = build_coverage_matrix(instances, detectors, env, jobs);
  if (format == "csv" || format == "both") {
    write_file(fs::path(out_dir) / "coverage.csv", coverage_csv(m));
  }
  if (format == "json" || format == "both") {
    write_file(fs::path(out_dir) / "coverage.json", coverage_json(m).dump(2) + "\n");
  }
  std::cout << coverage_csv(m) << '\n' << blind_spot_summary(m);
  if (fail_on_missed) {
    for (const auto& row : m.cells) {
      for (const auto& c : row) {
        if (c.verdict == DetectionOutcome::missed) {
          return 1;
        }
      }
    }
  }
  return 0;
}

// ---- report ---------------------------------------------------------------------

int cmd_report(const std::string& trace_path, const std::string& env_path)
{
  Environment env;
  try {
    env = load_environment(env_path);
  } catch (const ProfileError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
  std::ifstream in(trace_path);
  if (!in) {
    std::cerr << "cannot open " << trace_path << '\n';
    return 2;
  }
  std::vector<TraceEvent> trace;
  try {
    trace = read_jsonl(in);
  } catch (const std::exception& e) {
    std::cerr << trace_path << ": " << e.what() << '\n';
    return 2;
  }
  const auto baseline = baseline_db(env);
  std::cout << "primitives:\n";
  for (const auto& [id, name] : EnumNames<PrimitiveId>::items) {
    const auto r = run_primitive(id, trace, baseline);
    std::cout << "  " << name << ": " << (r.fired ? "fired" : "quiet") << '\n';
    for (const auto& ev : r.evidence) {
      std::cout << "    " << ev << '\n';
    }
  }
  std::cout << "detectors:\n";
  for (auto d : all_detectors()) {
    const auto v = run_detector(d, trace, baseline);
    std::cout << "  " << to_string(d) << ": " << to_string(v.verdict) << " (" << v.score << ")\n";
  }
  return 0;
}

// ---- rules / scan ---------------------------------------------------------------

int cmd_rules()
{
  for (const auto& r : list_rules()) {
    std::cout << std::setw(2) << r.id << "  " << std::left << std::setw(10) << to_string(r.scope)
              << std::setw(10) << to_string(r.resolution) << std::right << r.description
              << (r.reconstructed ? " [reconstructed]" : "") << '\n';
  }
  return 0;
}

int cmd_scan(const std::string& env_path)
{
  Environment env;
  try {
    env = load_environment(env_path);
  } catch (const ProfileError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
  const auto db = scan(env, env.settings.scan_dwell_ms, env.settings.radios);
  std::cout << nlohmann::json{{"scan_time_ms", db.scan_time_ms}, {"cells", scan_db_to_json(db)}}
                   .dump(2)
            << '\n';
  return 0;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"False base station configuration, simulation and detector evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::string env_path = default_env_path();
  std::string out_dir = default_out_dir();
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  std::string format = "both";

  auto* en = app.add_subcommand("enumerate", "Write one YAML profile per matching instance");
  InstanceFilter filter;
  bool count_only = false;
  add_enum_option(en, "--launch-adaptation", filter.adaptation, "Adaptation");
  add_enum_option(en, "--cell-iteration", filter.cell_iteration, "Cell iteration");
  en->add_option("--paging-reproduction", filter.paging_reproduction, "Paging reproduction flag");
  en->add_option("--ta-diversification", filter.ta_diversification, "TA diversification flag");
  en->add_option("--hw-compensation", filter.hw_compensation, "Hardware compensation flag");
  add_enum_option(en, "--hijack", filter.method, "Hijacking method");
  add_enum_option(en, "--targeting", filter.targeting, "Targeting");
  add_enum_option(en, "--variation", filter.variation, "Application variation");
  en->add_flag("--count-only", count_only, "Print the count without writing files");
  en->add_option("--out", out_dir, "Output directory");

  auto* va = app.add_subcommand("validate", "Check a profile against the dependency rules");
  std::string profile_path;
  bool quiet = false;
  va->add_option("profile", profile_path, "Profile YAML")->required();
  va->add_option("--env", env_path, "Environment YAML used for the scan");
  va->add_flag("-q,--quiet", quiet, "Only set the exit status");

  auto* ru = app.add_subcommand("run", "Run one profile and write a JSONL trace and manifest");
  ru->add_option("profile", profile_path, "Profile YAML")->required();
  ru->add_option("--env", env_path, "Environment YAML");
  ru->add_option("--out", out_dir, "Output directory");
  ru->add_option("--seed", seed, "Override the profile seed");

  auto* ev = app.add_subcommand("evaluate", "Build the detector coverage matrix");
  std::string set_path;
  std::vector<std::string> detector_names;
  bool fail_on_missed = false;
  ev->add_option("instances", set_path, "Instance set YAML")->required();
  ev->add_option("--env", env_path, "Environment YAML");
  ev->add_option("--out", out_dir, "Output directory");
  ev->add_option("--detectors", detector_names, "Detector subset")->delimiter(',');
  ev->add_option("--format", format, "Matrix file format")
      ->check(CLI::IsMember({"csv", "json", "both"}));
  ev->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  ev->add_option("--seed", seed, "Override every instance seed");
  ev->add_flag("--fail-on-missed", fail_on_missed, "Exit 1 if any cell is missed");

  auto* rp = app.add_subcommand("report", "Score an existing trace with primitives and detectors");
  std::string trace_path;
  rp->add_option("trace", trace_path, "JSONL trace")->required();
  rp->add_option("--env", env_path, "Environment YAML providing the baseline");

  auto* rl = app.add_subcommand("rules", "List the dependency rules");
  auto* sc = app.add_subcommand("scan", "Print the scan database seen from the FBS position");
  sc->add_option("--env", env_path, "Environment YAML");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (en->parsed()) {
      return cmd_enumerate(filter, out_dir, count_only);
    }
    if (va->parsed()) {
      return cmd_validate(profile_path, env_path, quiet);
    }
    if (ru->parsed()) {
      return cmd_run(profile_path, env_path, out_dir, seed);
    }
    if (ev->parsed()) {
      return cmd_evaluate(set_path, env_path, out_dir, detector_names, format, jobs, seed,
                          fail_on_missed);
    }
    if (rp->parsed()) {
      return cmd_report(trace_path, env_path);
    }
    if (rl->parsed()) {
      return cmd_rules();
    }
    if (sc->parsed()) {
      return cmd_scan(env_path);
    }
  } catch (const UsageError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

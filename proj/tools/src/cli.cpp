#include "cyclesched_tools/cli.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <vector>

#include <nlohmann/json.hpp>

#include "cyclesched/config.hpp"
#include "cyclesched/report.hpp"
#include "cyclesched/simulator.hpp"
#include "cyclesched/trace.hpp"

namespace cyclesched::cli {

namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedTrace:
    case ErrorCode::InvariantViolation:
    case ErrorCode::InvalidSpec:
    case ErrorCode::InvalidConfig:
    case ErrorCode::InsufficientData:
    case ErrorCode::NoPeriodicity:
    case ErrorCode::IoFailure:
      return kInput;
    default:
      return kSimulation;
  }
}

std::string error_object(const std::string& code, const std::string& message, int exit_code) {
  nlohmann::ordered_json j;
  j["error"] = code;
  j["message"] = message;
  j["exit_code"] = exit_code;
  return j.dump();
}

namespace {

// Remembers everything created under the output directory so a failed run
// can be rolled back.
class OutputGuard {
 public:
  explicit OutputGuard(fs::path dir) : dir_(std::move(dir)) {}

  void prepare() {
    if (fs::exists(dir_)) return;
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create '" + dir_.string() + "'");
    created_dirs_.push_back(dir_);
  }

  fs::path file(const fs::path& name) {
    fs::path p = dir_ / name;
    if (!fs::exists(p)) files_.push_back(p);
    return p;
  }

  fs::path subdir(const std::string& name) {
    fs::path p = dir_ / name;
    if (!fs::exists(p)) created_dirs_.push_back(p);
    return p;
  }

  void track(const std::vector<fs::path>& files) {
    files_.insert(files_.end(), files.begin(), files.end());
  }

  void rollback() {
    std::error_code ec;
    for (auto it = files_.rbegin(); it != files_.rend(); ++it) fs::remove(*it, ec);
    for (auto it = created_dirs_.rbegin(); it != created_dirs_.rend(); ++it) fs::remove_all(*it, ec);
  }

 private:
  fs::path dir_;
  std::vector<fs::path> files_;
  std::vector<fs::path> created_dirs_;
};

void require_input(const fs::path& p, const char* flag) {
  if (p.empty()) throw Error(ErrorCode::IoFailure, std::string(flag) + " is required");
  if (!fs::is_regular_file(p)) throw Error(ErrorCode::IoFailure, "input '" + p.string() + "' does not exist");
}

SimConfig effective_config(const CliCommand& c) {
  SimConfig cfg;
  if (!c.config.empty()) {
    require_input(c.config, "--config");
    cfg = load_sim_config(c.config);
  }
  if (c.seed) cfg.seed = *c.seed;
  if (c.policy) cfg.policy = parse_policy(*c.policy);
  return cfg;
}

std::ofstream open_file(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write '" + p.string() + "'");
  return out;
}

void run_simulate(const CliCommand& c, OutputGuard& guard) {
  require_input(c.trace, "--trace");
  const SimConfig cfg = effective_config(c);
  const WorkloadTrace trace = parse_trace(c.trace);
  const SimReport report = run_simulation(trace, cfg);
  guard.prepare();
  for (const char* name : {"summary.json", "cdf.csv", "timeline.csv", "events.jsonl"}) guard.file(name);
  emit_report(report, c.out);
}

void run_compare(const CliCommand& c, OutputGuard& guard) {
  require_input(c.trace, "--trace");
  const SimConfig base = effective_config(c);
  const WorkloadTrace trace = parse_trace(c.trace);
  std::vector<SimReport> reports;
  for (Policy p : {Policy::Isolated, Policy::Pack, Policy::Spread, Policy::SpreadBackfill}) {
    SimConfig cfg = base;
    cfg.policy = p;
    reports.push_back(run_simulation(trace, cfg));
  }
  guard.prepare();
  const double isolated = reports.front().makespan;
  nlohmann::ordered_json summary;
  summary["seed"] = base.seed;
  auto rows = nlohmann::ordered_json::array();
  std::ofstream csv = open_file(guard.file("compare.csv"));
  csv << "policy,makespan,normalized_makespan,mean_normalized_delay,slo_violations\n"
      << std::fixed << std::setprecision(4);
  for (const auto& r : reports) {
    const double norm = isolated > 0.0 ? r.makespan / isolated : 0.0;
    double mean_delay = 0.0;
    int violations = 0;
    for (const auto& j : r.jobs) {
      mean_delay += j.normalized_delay;
      violations += j.slo_violation ? 1 : 0;
    }
    if (!r.jobs.empty()) mean_delay /= static_cast<double>(r.jobs.size());
    nlohmann::ordered_json row;
    row["policy"] = to_string(r.policy);
    row["makespan"] = round4(r.makespan);
    row["normalized_makespan"] = round4(norm);
    row["mean_normalized_delay"] = round4(mean_delay);
    row["slo_violations"] = violations;
    rows.push_back(row);
    csv << to_string(r.policy) << ',' << r.makespan << ',' << norm << ',' << mean_delay << ','
        << violations << '\n';
    const fs::path sub = guard.subdir(to_string(r.policy));
    emit_report(r, sub);
    std::ofstream cdf = open_file(guard.file(std::string("cdf_") + to_string(r.policy) + ".csv"));
    write_cdf_csv(r.cdf, cdf);
  }
  summary["policies"] = rows;
  std::ofstream js = open_file(guard.file("compare.json"));
  js << summary.dump(2) << '\n';
  if (!csv || !js) throw Error(ErrorCode::IoFailure, "failed writing comparison output");
}

void run_synth(const CliCommand& c, OutputGuard& guard) {
  require_input(c.spec, "--spec");
  const GeneratorSpec spec = parse_generator_spec(c.spec);
  const WorkloadTrace trace = synthesize_workload(spec, c.seed.value_or(0));
  guard.prepare();
  write_trace(trace, guard.file("trace.jsonl"));
}

void run_profile(const CliCommand& c, OutputGuard& guard) {
  require_input(c.events, "--events");
  ProfilerConfig pc;
  if (!c.config.empty()) pc.slot_len = effective_config(c).slot_len;
  const JobProfile p = profile_job(parse_events(c.events), pc);
  nlohmann::ordered_json j;
  j["job_id"] = p.job_id;
  j["period_s"] = round4(p.period);
  auto segs = nlohmann::ordered_json::array();
  for (const auto& s : p.segments) segs.push_back({round4(s.offset), round4(s.duration)});
  j["segments"] = segs;
  j["duty_ratio"] = round4(p.duty_ratio());
  guard.prepare();
  std::ofstream out = open_file(guard.file("profile.json"));
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoFailure, "failed writing profile.json");
}

}  // namespace

int execute(const CliCommand& command, std::ostream& err) {
  OutputGuard guard(command.out);
  try {
    if (command.out.empty()) throw Error(ErrorCode::IoFailure, "--out is required");
    switch (command.verb) {
      case Verb::Simulate: run_simulate(command, guard); break;
      case Verb::Compare: run_compare(command, guard); break;
      case Verb::Synth: run_synth(command, guard); break;
      case Verb::Profile: run_profile(command, guard); break;
    }
    return kOk;
  } catch (const Error& e) {
    guard.rollback();
    const int code = exit_code_for(e.code());
    err << error_object(std::string(to_string(e.code())), e.what(), code) << '\n';
    return code;
  } catch (const std::exception& e) {
    guard.rollback();
    err << error_object("InternalError", e.what(), kSimulation) << '\n';
    return kSimulation;
  }
}

}  // namespace cyclesched::cli

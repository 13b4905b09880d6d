#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "cyclesched/error.hpp"
#include "cyclesched/trace.hpp"

namespace cyclesched {

namespace {

void check_spec(const GeneratorSpec& s) {
  auto invalid = [](const std::string& what) { throw Error(ErrorCode::InvalidSpec, what); };
  if (s.job_count < 0) invalid("job_count must be >= 0");
  if (!(s.period_min > 0.0) || s.period_max < s.period_min) invalid("empty period range");
  if (s.period_quantum < 0.0) invalid("period_quantum must be >= 0");
  if (!(s.duty_min > 0.0) || s.duty_max > 1.0 || s.duty_max < s.duty_min) {
    invalid("duty ratio range must lie in (0, 1]");
  }
  if (s.node_demand_min < 1 || s.node_demand_max < s.node_demand_min) invalid("empty node demand range");
  if (s.cycles_min < 1 || s.cycles_max < s.cycles_min) invalid("empty cycles range");
  if (s.mean_interarrival < 0.0) invalid("mean_interarrival must be >= 0");
  if (s.state_bytes_max < s.state_bytes_min) invalid("empty state_bytes range");
}

template <typename T>
T get_or(const nlohmann::json& doc, const char* key, T fallback) {
  auto it = doc.find(key);
  if (it == doc.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::InvalidSpec, std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

GeneratorSpec parse_generator_spec(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidSpec, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::InvalidSpec, "generator spec must be an object");
  GeneratorSpec s;
  s.job_count = get_or(doc, "job_count", s.job_count);
  s.period_min = get_or(doc, "period_min", s.period_min);
  s.period_max = get_or(doc, "period_max", s.period_max);
  s.period_quantum = get_or(doc, "period_quantum", s.period_quantum);
  s.duty_min = get_or(doc, "duty_min", s.duty_min);
  s.duty_max = get_or(doc, "duty_max", s.duty_max);
  s.node_demand_min = get_or(doc, "node_demand_min", s.node_demand_min);
  s.node_demand_max = get_or(doc, "node_demand_max", s.node_demand_max);
  s.cycles_min = get_or(doc, "cycles_min", s.cycles_min);
  s.cycles_max = get_or(doc, "cycles_max", s.cycles_max);
  s.mean_interarrival = get_or(doc, "mean_interarrival", s.mean_interarrival);
  s.state_bytes_min = get_or(doc, "state_bytes_min", s.state_bytes_min);
  s.state_bytes_max = get_or(doc, "state_bytes_max", s.state_bytes_max);
  s.anti_phase = get_or(doc, "anti_phase", s.anti_phase);
  s.random_offset = get_or(doc, "random_offset", s.random_offset);
  check_spec(s);
  return s;
}

GeneratorSpec parse_generator_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open generator spec '" + path.string() + "'");
  return parse_generator_spec(in);
}

WorkloadTrace synthesize_workload(const GeneratorSpec& spec, std::uint64_t seed) {
  check_spec(spec);
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) {
    return lo == hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  auto uniform_int = [&rng](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  };

  WorkloadTrace trace;
  double clock = 0.0;
  for (int i = 0; i < spec.job_count; ++i) {
    double period = uniform(spec.period_min, spec.period_max);
    if (spec.period_quantum > 0.0) {
      period = std::max(spec.period_quantum,
                        std::round(period / spec.period_quantum) * spec.period_quantum);
    }
    // Whole seconds keep the file exact under slot conversion.
    period = std::max(1.0, std::round(period));
    const double duty = uniform(spec.duty_min, spec.duty_max);
    const double active = std::clamp(std::round(period * duty), 1.0, period);

    double offset = 0.0;
    if (spec.anti_phase && i % 2 == 1) {
      offset = std::min(std::round(period / 2.0), period - active);
    } else if (spec.random_offset) {
      offset = static_cast<double>(uniform_int(0, static_cast<std::int64_t>(period - active)));
    }

    TraceJob job;
    job.profile.job_id = "job" + std::to_string(i);
    job.profile.period = period;
    job.profile.segments = {{offset, active}};
    job.profile.node_demand = static_cast<int>(uniform_int(spec.node_demand_min, spec.node_demand_max));
    job.profile.state_bytes = static_cast<std::uint64_t>(
        uniform_int(static_cast<std::int64_t>(spec.state_bytes_min),
                    static_cast<std::int64_t>(spec.state_bytes_max)));
    // Training-side time split in the proportions of a typical GRPO step.
    job.profile.phase_costs = {
        {"compute_log_prob", active * 0.2},
        {"update_actor", active * 0.65},
        {"sync_weight", active * 0.15},
        {"rollout", period - active},
    };
    job.cycles = static_cast<int>(uniform_int(spec.cycles_min, spec.cycles_max));
    if (spec.mean_interarrival > 0.0 && i > 0) {
      clock += std::round(std::exponential_distribution<double>(1.0 / spec.mean_interarrival)(rng));
    }
    job.arrival = clock;
    trace.jobs.push_back(std::move(job));
  }
  trace.validate();
  return trace;
}

}  // namespace cyclesched

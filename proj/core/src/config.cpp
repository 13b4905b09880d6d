#include "cyclesched/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "cyclesched/error.hpp"

namespace cyclesched {

namespace {

using json = nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key)) throw Error(ErrorCode::InvalidConfig, "unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::InvalidConfig, std::string("field '") + key + "' has the wrong type");
  }
}

const json& object_at(const json& doc, const char* key) {
  const json& v = doc.at(key);
  if (!v.is_object()) throw Error(ErrorCode::InvalidConfig, std::string("'") + key + "' must be an object");
  return v;
}

}  // namespace

const char* to_string(Policy policy) {
  switch (policy) {
    case Policy::Isolated: return "ISOLATED";
    case Policy::Pack: return "PACK";
    case Policy::Spread: return "SPREAD";
    case Policy::SpreadBackfill: return "SPREAD_BACKFILL";
  }
  return "?";
}

Policy parse_policy(const std::string& name) {
  std::string n;
  for (char c : name) n += (c == '-' || c == '+') ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (n == "ISOLATED") return Policy::Isolated;
  if (n == "PACK") return Policy::Pack;
  if (n == "SPREAD") return Policy::Spread;
  if (n == "SPREAD_BACKFILL") return Policy::SpreadBackfill;
  throw Error(ErrorCode::InvalidConfig, "unknown policy '" + name + "'");
}

void SimConfig::validate() const {
  auto invalid = [](const std::string& m) { throw Error(ErrorCode::InvalidConfig, m); };
  if (total_node_groups < 1) invalid("total_node_groups must be >= 1");
  if (!(slot_len > 0.0)) invalid("slot_len must be > 0");
  if (horizon < slot_len) invalid("horizon must cover at least one slot");
  if (staleness_steps < 0) invalid("staleness_steps must be >= 0");
  if (!(duty_ratio_bound > 0.0) || duty_ratio_bound > 1.0) invalid("duty_ratio_bound must lie in (0, 1]");
  if (exec_jitter < 0.0 || exec_jitter >= 1.0) invalid("exec_jitter must lie in [0, 1)");
  if (profiling_cycles < 1) invalid("profiling_cycles must be >= 1");
  placement.validate();
  setup.validate();
  transfer.validate();
}

SimConfig parse_sim_config(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
  reject_unknown(doc,
                 {"total_node_groups", "horizon", "slot_len", "placement", "setup", "setup_from_transfer",
                  "transfer", "policy", "staleness_steps", "duty_ratio_bound", "seed", "exec_jitter",
                  "cold_start", "profiling_cycles"},
                 "config");
  SimConfig c;
  read(doc, "total_node_groups", c.total_node_groups);
  read(doc, "horizon", c.horizon);
  read(doc, "slot_len", c.slot_len);
  read(doc, "setup_from_transfer", c.setup_from_transfer);
  read(doc, "staleness_steps", c.staleness_steps);
  read(doc, "duty_ratio_bound", c.duty_ratio_bound);
  read(doc, "seed", c.seed);
  read(doc, "exec_jitter", c.exec_jitter);
  read(doc, "cold_start", c.cold_start);
  read(doc, "profiling_cycles", c.profiling_cycles);
  if (doc.contains("policy")) {
    std::string p;
    read(doc, "policy", p);
    c.policy = parse_policy(p);
  }
  if (doc.contains("placement")) {
    const json& p = object_at(doc, "placement");
    reject_unknown(p, {"w1", "w2", "alpha", "interference_weighting", "max_overlap_fraction"}, "placement");
    read(p, "w1", c.placement.w1);
    read(p, "w2", c.placement.w2);
    read(p, "alpha", c.placement.alpha);
    read(p, "interference_weighting", c.placement.interference_weighting);
    read(p, "max_overlap_fraction", c.placement.max_overlap_fraction);
  }
  if (doc.contains("setup")) {
    const json& s = object_at(doc, "setup");
    reject_unknown(s, {"t_load", "t_offload"}, "setup");
    read(s, "t_load", c.setup.t_load);
    read(s, "t_offload", c.setup.t_offload);
  }
  if (doc.contains("transfer")) {
    const json& t = object_at(doc, "transfer");
    reject_unknown(t, {"bw_device_host", "bw_host_cold", "fixed_latency", "bw_sync_per_rank"}, "transfer");
    read(t, "bw_device_host", c.transfer.bw_device_host);
    read(t, "bw_host_cold", c.transfer.bw_host_cold);
    read(t, "fixed_latency", c.transfer.fixed_latency);
    read(t, "bw_sync_per_rank", c.transfer.bw_sync_per_rank);
  }
  c.validate();
  return c;
}

SimConfig parse_sim_config(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("invalid JSON: ") + e.what());
  }
  return parse_sim_config(doc);
}

SimConfig load_sim_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open config '" + path.string() + "'");
  return parse_sim_config(in);
}

nlohmann::ordered_json to_json(const SimConfig& c) {
  nlohmann::ordered_json j;
  j["total_node_groups"] = c.total_node_groups;
  j["horizon"] = c.horizon;
  j["slot_len"] = c.slot_len;
  j["policy"] = to_string(c.policy);
  j["staleness_steps"] = c.staleness_steps;
  j["duty_ratio_bound"] = c.duty_ratio_bound;
  j["seed"] = c.seed;
  j["exec_jitter"] = c.exec_jitter;
  j["cold_start"] = c.cold_start;
  j["profiling_cycles"] = c.profiling_cycles;
  j["setup_from_transfer"] = c.setup_from_transfer;
  j["placement"] = {{"w1", c.placement.w1},
                    {"w2", c.placement.w2},
                    {"alpha", c.placement.alpha},
                    {"interference_weighting", c.placement.interference_weighting},
                    {"max_overlap_fraction", c.placement.max_overlap_fraction}};
  j["setup"] = {{"t_load", c.setup.t_load}, {"t_offload", c.setup.t_offload}};
  j["transfer"] = {{"bw_device_host", c.transfer.bw_device_host},
                   {"bw_host_cold", c.transfer.bw_host_cold},
                   {"fixed_latency", c.transfer.fixed_latency},
                   {"bw_sync_per_rank", c.transfer.bw_sync_per_rank}};
  return j;
}

}  // namespace cyclesched

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "cyclesched/placement.hpp"
#include "cyclesched/runtime.hpp"
#include "cyclesched/statemodel.hpp"

namespace cyclesched {

enum class Policy { Isolated, Pack, Spread, SpreadBackfill };

const char* to_string(Policy policy);
/// Accepts ISOLATED, PACK, SPREAD, SPREAD_BACKFILL (any case, '-' or '+'
/// for the separator). Throws InvalidConfig.
Policy parse_policy(const std::string& name);

struct SimConfig {
  int total_node_groups = 8;
  double horizon = 28800.0;
  double slot_len = 1.0;
  PlacementConfig placement;
  SetupCost setup;
  /// Derive t_load / t_offload from the largest job state and `transfer`.
  bool setup_from_transfer = false;
  TransferModel transfer;
  Policy policy = Policy::SpreadBackfill;
  int staleness_steps = 1;
  double duty_ratio_bound = 0.5;
  std::uint64_t seed = 0;
  /// Execution times are scaled by a uniform factor in [1 - j, 1 + j].
  double exec_jitter = 0.0;
  /// Place arrivals on dedicated groups first and repack after profiling.
  bool cold_start = false;
  int profiling_cycles = 2;

  /// Throws InvalidConfig.
  void validate() const;
};

/// Every field is optional; unknown keys are rejected.
SimConfig parse_sim_config(const nlohmann::json& doc);
SimConfig parse_sim_config(std::istream& in);
SimConfig load_sim_config(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const SimConfig& cfg);

}  // namespace cyclesched

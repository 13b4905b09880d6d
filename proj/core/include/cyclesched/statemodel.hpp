#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace cyclesched {

enum class Tier { Device = 0, Host = 1, Cold = 2 };

const char* to_string(Tier tier);

struct ResidencyEntry {
  Tier tier = Tier::Host;
  std::uint64_t size = 0;
  int ref_count = 1;
  /// Logical clock of the last put or move; smallest is evicted first.
  std::uint64_t last_use = 0;

  bool operator==(const ResidencyEntry&) const = default;
};

/// Node-local residency of model state, indexed by logical key. Each key's
/// bytes are stored once no matter how many replicas reference it.
struct ResidencySnapshot {
  std::map<std::string, ResidencyEntry> entries;
  std::array<std::uint64_t, 3> tier_capacity{UINT64_MAX, UINT64_MAX, UINT64_MAX};
  std::array<std::uint64_t, 3> tier_used{0, 0, 0};
  /// Keys of the active deployment; never chosen for eviction.
  std::set<std::string> pinned;
  std::uint64_t clock = 0;

  bool operator==(const ResidencySnapshot&) const = default;

  std::uint64_t used(Tier t) const { return tier_used[static_cast<std::size_t>(t)]; }
  std::uint64_t capacity(Tier t) const { return tier_capacity[static_cast<std::size_t>(t)]; }
  std::uint64_t total_bytes() const { return tier_used[0] + tier_used[1] + tier_used[2]; }
  /// Throws InvariantViolation if usage does not match the entries or
  /// exceeds a capacity.
  void validate() const;
};

struct TransferModel {
  double bw_device_host = 1e9;
  double bw_host_cold = 1e9;
  double fixed_latency = 0.0;
  /// Per-rank fetch bandwidth used by the sync cost model.
  double bw_sync_per_rank = 1e9;

  void validate() const;
  bool operator==(const TransferModel&) const = default;
};

/// Seconds to move `bytes` one hop between adjacent tiers.
double hop_time(std::uint64_t bytes, Tier a, Tier b, const TransferModel& model);

/// Stores `size` bytes under `key` in `tier` (once per key). Re-putting a key
/// keeps its bytes and raises ref_count to the larger replica count. If the
/// tier is full, least-recently-used unpinned keys are demoted one tier;
/// TierFull if that cannot make room.
ResidencySnapshot dedup_put(const ResidencySnapshot& snapshot, const std::string& key,
                            std::uint64_t size, int replica_count, Tier tier = Tier::Host);

struct TransferResult {
  ResidencySnapshot snapshot;
  double elapsed = 0.0;
};

/// Moves every key up to `target`, staging through each tier. Evictions
/// needed to make room are charged to `elapsed` as well.
TransferResult ensure_resident(const ResidencySnapshot& snapshot, const std::vector<std::string>& keys,
                               Tier target, const TransferModel& model);

/// Moves keys held above `target` down to it; keys already at or below
/// `target` are left alone. Never evicts: TierFull if the target lacks room.
TransferResult offload(const ResidencySnapshot& snapshot, const std::vector<std::string>& keys,
                       Tier target, const TransferModel& model);

enum class OverlapAction { Load, Offload, Prefetch, HostOptimizerStep, CheckpointMaterialize };

/// True if the action sits on the device critical path.
bool overlap_schedule(OverlapAction action, bool active_wpg_busy);

/// Byte range [begin, end) of one logical key.
struct Slice {
  std::string key;
  std::uint64_t begin = 0;
  std::uint64_t end = 0;
};

using RankLayout = std::vector<std::vector<Slice>>;

struct SyncCost {
  double seconds = 0.0;
  std::vector<std::uint64_t> rank_bytes;
};

/// Each rank fetches only its slices; the layout must tile every source key
/// exactly once (PreconditionFailed otherwise).
SyncCost sync_or_migrate_cost(const std::map<std::string, std::uint64_t>& src_keys,
                              const RankLayout& layout, const TransferModel& model);

}  // namespace cyclesched

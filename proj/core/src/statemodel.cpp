#include "cyclesched/statemodel.hpp"

#include <algorithm>
#include <limits>

#include "cyclesched/error.hpp"

namespace cyclesched {

namespace {

std::size_t idx(Tier t) { return static_cast<std::size_t>(t); }

Tier below(Tier t) { return static_cast<Tier>(static_cast<int>(t) + 1); }
Tier above(Tier t) { return static_cast<Tier>(static_cast<int>(t) - 1); }

std::uint64_t room(const ResidencySnapshot& s, Tier t) {
  return s.capacity(t) - std::min(s.capacity(t), s.used(t));
}

ResidencyEntry& lookup(ResidencySnapshot& s, const std::string& key) {
  auto it = s.entries.find(key);
  if (it == s.entries.end()) throw Error(ErrorCode::PreconditionFailed, "unknown state key '" + key + "'");
  return it->second;
}

void move_key(ResidencySnapshot& s, ResidencyEntry& e, Tier to) {
  s.tier_used[idx(e.tier)] -= e.size;
  s.tier_used[idx(to)] += e.size;
  e.tier = to;
  e.last_use = ++s.clock;
}

// Demotes least-recently-used keys out of `tier` until `bytes` fit.
void make_room(ResidencySnapshot& s, Tier tier, std::uint64_t bytes,
               const std::set<std::string>& keep, const TransferModel* model, double& elapsed) {
  if (bytes > s.capacity(tier)) {
    throw Error(ErrorCode::TierFull, std::string(to_string(tier)) + " tier is smaller than the request");
  }
  while (room(s, tier) < bytes) {
    if (tier == Tier::Cold) throw Error(ErrorCode::TierFull, "COLD tier is full");
    std::string victim;
    std::uint64_t oldest = std::numeric_limits<std::uint64_t>::max();
    for (const auto& [key, e] : s.entries) {
      if (e.tier != tier || s.pinned.count(key) || keep.count(key)) continue;
      if (e.last_use < oldest) {
        oldest = e.last_use;
        victim = key;
      }
    }
    if (victim.empty()) {
      throw Error(ErrorCode::TierFull, std::string(to_string(tier)) + " tier is full and nothing is evictable");
    }
    ResidencyEntry& e = s.entries.at(victim);
    make_room(s, below(tier), e.size, keep, model, elapsed);
    if (model) elapsed += hop_time(e.size, tier, below(tier), *model);
    move_key(s, e, below(tier));
  }
}

}  // namespace

const char* to_string(Tier tier) {
  switch (tier) {
    case Tier::Device: return "DEVICE";
    case Tier::Host: return "HOST";
    case Tier::Cold: return "COLD";
  }
  return "?";
}

void ResidencySnapshot::validate() const {
  std::array<std::uint64_t, 3> sum{0, 0, 0};
  for (const auto& [key, e] : entries) {
    if (e.ref_count < 1) throw Error(ErrorCode::InvariantViolation, "key '" + key + "' has ref_count < 1");
    sum[idx(e.tier)] += e.size;
  }
  for (std::size_t t = 0; t < 3; ++t) {
    if (sum[t] != tier_used[t]) throw Error(ErrorCode::InvariantViolation, "tier usage does not match entries");
    if (tier_used[t] > tier_capacity[t]) throw Error(ErrorCode::InvariantViolation, "tier over capacity");
  }
}

void TransferModel::validate() const {
  if (!(bw_device_host > 0.0) || !(bw_host_cold > 0.0) || !(bw_sync_per_rank > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "transfer bandwidths must be > 0");
  }
  if (fixed_latency < 0.0) throw Error(ErrorCode::InvalidConfig, "fixed_latency must be >= 0");
}

double hop_time(std::uint64_t bytes, Tier a, Tier b, const TransferModel& model) {
  const bool device_host = (a == Tier::Device && b == Tier::Host) || (a == Tier::Host && b == Tier::Device);
  const double bw = device_host ? model.bw_device_host : model.bw_host_cold;
  return static_cast<double>(bytes) / bw + model.fixed_latency;
}

ResidencySnapshot dedup_put(const ResidencySnapshot& snapshot, const std::string& key,
                            std::uint64_t size, int replica_count, Tier tier) {
  if (size == 0 || replica_count < 1) {
    throw Error(ErrorCode::PreconditionFailed, "dedup_put needs size > 0 and replica_count >= 1");
  }
  ResidencySnapshot s = snapshot;
  if (auto it = s.entries.find(key); it != s.entries.end()) {
    if (it->second.size != size) {
      throw Error(ErrorCode::PreconditionFailed, "key '" + key + "' re-put with a different size");
    }
    it->second.ref_count = std::max(it->second.ref_count, replica_count);
    it->second.last_use = ++s.clock;
    return s;
  }
  double unused = 0.0;
  make_room(s, tier, size, {key}, nullptr, unused);
  s.entries[key] = ResidencyEntry{tier, size, replica_count, ++s.clock};
  s.tier_used[idx(tier)] += size;
  return s;
}

TransferResult ensure_resident(const ResidencySnapshot& snapshot, const std::vector<std::string>& keys,
                               Tier target, const TransferModel& model) {
  TransferResult r{snapshot, 0.0};
  const std::set<std::string> keep(keys.begin(), keys.end());
  for (const auto& key : keys) lookup(r.snapshot, key);
  for (const auto& key : keys) {
    ResidencyEntry& e = lookup(r.snapshot, key);
    while (e.tier > target) {
      const Tier next = above(e.tier);
      make_room(r.snapshot, next, e.size, keep, &model, r.elapsed);
      r.elapsed += hop_time(e.size, e.tier, next, model);
      move_key(r.snapshot, e, next);
    }
  }
  return r;
}

TransferResult offload(const ResidencySnapshot& snapshot, const std::vector<std::string>& keys,
                       Tier target, const TransferModel& model) {
  if (target == Tier::Device) throw Error(ErrorCode::PreconditionFailed, "offload target must be HOST or COLD");
  TransferResult r{snapshot, 0.0};
  for (const auto& key : keys) lookup(r.snapshot, key);
  for (const auto& key : keys) {
    ResidencyEntry& e = lookup(r.snapshot, key);
    while (e.tier < target) {
      const Tier next = below(e.tier);
      if (room(r.snapshot, next) < e.size) {
        throw Error(ErrorCode::TierFull, std::string(to_string(next)) + " tier cannot take '" + key + "'");
      }
      r.elapsed += hop_time(e.size, e.tier, next, model);
      move_key(r.snapshot, e, next);
    }
  }
  return r;
}

bool overlap_schedule(OverlapAction action, bool active_wpg_busy) {
  switch (action) {
    case OverlapAction::Load: return true;
    case OverlapAction::Offload: return !active_wpg_busy;
    case OverlapAction::Prefetch:
    case OverlapAction::HostOptimizerStep:
    case OverlapAction::CheckpointMaterialize: return false;
  }
  return false;
}

SyncCost sync_or_migrate_cost(const std::map<std::string, std::uint64_t>& src_keys,
                              const RankLayout& layout, const TransferModel& model) {
  std::map<std::string, std::vector<std::pair<std::uint64_t, std::uint64_t>>> covered;
  SyncCost cost;
  cost.rank_bytes.assign(layout.size(), 0);
  for (std::size_t r = 0; r < layout.size(); ++r) {
    for (const auto& s : layout[r]) {
      auto src = src_keys.find(s.key);
      if (src == src_keys.end() || s.end <= s.begin || s.end > src->second) {
        throw Error(ErrorCode::PreconditionFailed, "slice of '" + s.key + "' is outside the source state");
      }
      covered[s.key].emplace_back(s.begin, s.end);
      cost.rank_bytes[r] += s.end - s.begin;
    }
  }
  for (const auto& [key, size] : src_keys) {
    auto& ranges = covered[key];
    std::sort(ranges.begin(), ranges.end());
    std::uint64_t cursor = 0;
    for (const auto& [b, e] : ranges) {
      if (b != cursor) throw Error(ErrorCode::PreconditionFailed, "layout does not tile '" + key + "' exactly once");
      cursor = e;
    }
    if (cursor != size) throw Error(ErrorCode::PreconditionFailed, "layout does not cover all of '" + key + "'");
  }
  for (auto bytes : cost.rank_bytes) {
    cost.seconds = std::max(cost.seconds, static_cast<double>(bytes) / model.bw_sync_per_rank);
  }
  cost.seconds += model.fixed_latency;
  return cost;
}

}  // namespace cyclesched

#pragma once

#include <span>
#include <vector>

#include "cdrtrip/core.hpp"
#include "cdrtrip/ingest.hpp"

namespace cdrtrip {

struct TowerImportance {
    std::size_t tower_idx = 0;  // dense registry index
    CellTowerId tower;
    std::int32_t call_days = 0;      // distinct local days with >= 1 record
    std::int64_t total_records = 0;
};

struct UserLocation {
    std::int32_t id = 0;  // per-user index, creation order
    GeoPoint centroid;    // call-day-weighted mean of member tower positions
    std::vector<std::size_t> member_towers;  // dense registry indices
    std::int64_t weight = 0;                 // summed call_days
};

struct Presence {
    std::int32_t location = 0;
    Timestamp time = 0;
    EventType event = EventType::DataAccess;
};

// Records of one user -> towers ordered by importance: call_days desc,
// total_records desc, (lac, cell) asc.
std::vector<TowerImportance> rank_towers(std::span<const CdrRecord> records,
                                         std::span<const std::size_t> tower_idx,
                                         const TowerRegistry& registry);

// Leader pass over the ranked towers: each still-unassigned tower becomes a
// leader and absorbs the unassigned towers within diameter_km / 2 of its own
// coordinate.
std::vector<UserLocation> leader_cluster(std::span<const TowerImportance> ranked,
                                         const TowerRegistry& registry, double diameter_km);

// One presence per record, time order preserved. Throws DataError if a
// record's tower is in no location.
std::vector<Presence> assign_presences(std::span<const CdrRecord> records,
                                       std::span<const std::size_t> tower_idx,
                                       std::span<const UserLocation> locations,
                                       const TowerRegistry& registry);

}  // namespace cdrtrip

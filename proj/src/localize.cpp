#include "cdrtrip/localize.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace cdrtrip {

std::vector<TowerImportance> rank_towers(std::span<const CdrRecord> records,
                                         std::span<const std::size_t> tower_idx,
                                         const TowerRegistry& registry) {
    struct Tally {
        std::set<std::int64_t> days;
        std::int64_t total = 0;
    };
    std::map<std::size_t, Tally> tally;
    for (std::size_t i = 0; i < records.size(); ++i) {
        Tally& t = tally[tower_idx[i]];
        t.days.insert(day_index(records[i].time));
        ++t.total;
    }
    std::vector<TowerImportance> ranked;
    ranked.reserve(tally.size());
    for (const auto& [idx, t] : tally) {
        ranked.push_back(TowerImportance{idx, registry.id(idx),
                                         static_cast<std::int32_t>(t.days.size()), t.total});
    }
    std::sort(ranked.begin(), ranked.end(), [](const TowerImportance& a, const TowerImportance& b) {
        if (a.call_days != b.call_days) return a.call_days > b.call_days;
        if (a.total_records != b.total_records) return a.total_records > b.total_records;
        return a.tower < b.tower;
    });
    return ranked;
}

std::vector<UserLocation> leader_cluster(std::span<const TowerImportance> ranked,
                                         const TowerRegistry& registry, double diameter_km) {
    if (diameter_km <= 0.0) throw DataError("leader_cluster: diameter must be positive");
    const double radius = diameter_km / 2.0;
    std::vector<UserLocation> locations;
    std::vector<bool> assigned(ranked.size(), false);
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        if (assigned[i]) continue;
        UserLocation loc;
        loc.id = static_cast<std::int32_t>(locations.size());
        const GeoPoint leader = registry.position(ranked[i].tower_idx);
        double sum_lon = 0.0, sum_lat = 0.0, sum_w = 0.0;
        for (std::size_t j = i; j < ranked.size(); ++j) {
            if (assigned[j]) continue;
            const GeoPoint p = registry.position(ranked[j].tower_idx);
            if (j != i && haversine_km(leader, p) > radius) continue;
            assigned[j] = true;
            loc.member_towers.push_back(ranked[j].tower_idx);
            loc.weight += ranked[j].call_days;
            const double w = static_cast<double>(ranked[j].call_days);
            sum_lon += w * p.lon;
            sum_lat += w * p.lat;
            sum_w += w;
        }
        loc.centroid = GeoPoint{sum_lon / sum_w, sum_lat / sum_w};
        locations.push_back(std::move(loc));
    }
    return locations;
}

std::vector<Presence> assign_presences(std::span<const CdrRecord> records,
                                       std::span<const std::size_t> tower_idx,
                                       std::span<const UserLocation> locations,
                                       const TowerRegistry& registry) {
    std::map<std::size_t, std::int32_t> tower_to_location;
    for (const UserLocation& loc : locations) {
        for (const std::size_t t : loc.member_towers) tower_to_location[t] = loc.id;
    }
    std::vector<Presence> presences;
    presences.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto it = tower_to_location.find(tower_idx[i]);
        if (it == tower_to_location.end()) {
            const CellTowerId id = registry.id(tower_idx[i]);
            throw DataError("assign_presences: tower " + std::to_string(id.lac) + "," +
                            std::to_string(id.cell) + " not in any location");
        }
        presences.push_back(Presence{it->second, records[i].time, records[i].event});
    }
    return presences;
}

}  // namespace cdrtrip

#include "cdrtrip/movement.hpp"

#include <set>

namespace cdrtrip {

std::vector<Segment> segment_presences(std::span<const Presence> presences, std::int64_t tau) {
    std::vector<Segment> segments;
    for (std::size_t i = 0; i < presences.size(); ++i) {
        const Presence& p = presences[i];
        if (i > 0 && p.time < presences[i - 1].time) {
            throw OrderingError("segment_presences: presences not time-ordered");
        }
        if (!segments.empty()) {
            Segment& last = segments.back();
            if (last.location == p.location && p.time - last.end < tau) {
                last.end = p.time;
                ++last.n_presences;
                continue;
            }
        }
        segments.push_back(Segment{p.location, p.time, p.time, 1});
    }
    return segments;
}

std::map<std::int32_t, std::int32_t> location_day_counts(std::span<const Presence> presences) {
    std::map<std::int32_t, std::set<std::int64_t>> days;
    for (const Presence& p : presences) days[p.location].insert(day_index(p.time));
    std::map<std::int32_t, std::int32_t> counts;
    for (const auto& [loc, d] : days) counts[loc] = static_cast<std::int32_t>(d.size());
    return counts;
}

std::vector<StayPoint> classify_segments(std::span<const Segment> segments, std::int64_t dwell_min,
                                         std::int32_t freq_min,
                                         const std::map<std::int32_t, std::int32_t>& day_counts,
                                         MovementStats* stats) {
    std::vector<StayPoint> stays;
    for (const Segment& seg : segments) {
        const auto it = day_counts.find(seg.location);
        const std::int32_t days = it == day_counts.end() ? 0 : it->second;
        if (seg.end - seg.start >= dwell_min || days >= freq_min) {
            stays.push_back(StayPoint{seg.location, seg.start, seg.end, seg.n_presences});
        } else if (stats) {
            ++stats->passby_segments;
        }
    }
    return stays;
}

std::vector<Displacement> extract_displacements(std::span<const StayPoint> stays, std::int64_t tau,
                                                std::span<const UserLocation> locations,
                                                MovementStats* stats) {
    // Same-location neighbours collapse into one stay spanning both; the
    // return-visit scenario is out of scope here.
    std::vector<StayPoint> merged;
    for (const StayPoint& s : stays) {
        if (!merged.empty() && merged.back().location == s.location) {
            merged.back().segment_end = s.segment_end;
            merged.back().n_presences += s.n_presences;
            continue;
        }
        merged.push_back(s);
    }
    std::vector<Displacement> displacements;
    for (std::size_t i = 1; i < merged.size(); ++i) {
        const StayPoint& from = merged[i - 1];
        const StayPoint& to = merged[i];
        const Timestamp depart = from.segment_end;
        const Timestamp arrive = to.time;
        if (depart >= arrive) {
            if (stats) ++stats->zero_gap_transitions;
            continue;
        }
        Displacement d;
        d.origin = from.location;
        d.destination = to.location;
        d.depart = depart;
        d.arrive = arrive;
        d.eti = eti_flag(depart, arrive, tau);
        d.distance_km = haversine_km(locations[static_cast<std::size_t>(from.location)].centroid,
                                     locations[static_cast<std::size_t>(to.location)].centroid);
        displacements.push_back(d);
    }
    return displacements;
}

}  // namespace cdrtrip

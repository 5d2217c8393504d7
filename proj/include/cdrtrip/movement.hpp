#pragma once

#include <map>
#include <span>
#include <vector>

#include "cdrtrip/core.hpp"
#include "cdrtrip/localize.hpp"

namespace cdrtrip {

struct Segment {
    std::int32_t location = 0;
    Timestamp start = 0;
    Timestamp end = 0;
    std::int64_t n_presences = 0;
};

struct StayPoint {
    std::int32_t location = 0;
    Timestamp time = 0;  // segment start
    Timestamp segment_end = 0;
    std::int64_t n_presences = 0;
};

struct Displacement {
    std::int32_t origin = 0;
    std::int32_t destination = 0;
    Timestamp depart = 0;  // end of the origin stay
    Timestamp arrive = 0;  // start of the destination stay
    int eti = 0;
    double distance_km = 0.0;
};

struct MovementStats {
    std::size_t passby_segments = 0;
    std::size_t zero_gap_transitions = 0;  // simultaneous records at two places
};

// Merges consecutive presences into maximal runs: same location and gap
// strictly below tau. Throws OrderingError on unordered input.
std::vector<Segment> segment_presences(std::span<const Presence> presences, std::int64_t tau);

// Distinct local days on which each location appears; the full-window pass
// that classify_segments requires.
std::map<std::int32_t, std::int32_t> location_day_counts(std::span<const Presence> presences);

// A segment is a stay iff its span is at least dwell_min or its location
// appears on at least freq_min distinct days.
std::vector<StayPoint> classify_segments(std::span<const Segment> segments, std::int64_t dwell_min,
                                         std::int32_t freq_min,
                                         const std::map<std::int32_t, std::int32_t>& day_counts,
                                         MovementStats* stats = nullptr);

// Consecutive same-location stays are merged, then every consecutive pair of
// distinct-location stays becomes a displacement. Scenario: origin !=
// destination only; the depart/arrive gap is the unobserved span.
std::vector<Displacement> extract_displacements(std::span<const StayPoint> stays, std::int64_t tau,
                                                std::span<const UserLocation> locations,
                                                MovementStats* stats = nullptr);

}  // namespace cdrtrip

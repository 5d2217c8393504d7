#include "cdrtrip/features.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace cdrtrip {

namespace {

constexpr const char* kNames[kFeatureCount] = {
    "f1", "f2", "f3", "f4", "f5", "f6", "f7", "f8", "f9", "f10", "f11", "f12", "f13", "f14", "f15",
};

constexpr const char* kDescriptions[kFeatureCount] = {
    "distance between origin and destination (km)",
    "destination is home",
    "displacement type is home-based work",
    "displacement type is home-based other",
    "displacement type is work-based other",
    "any no-ETI displacement observed from origin to destination",
    "share of no-ETI displacements between the pair (either direction)",
    "gap duration (hours)",
    "gap overlaps morning peak (07:00-09:00)",
    "gap overlaps afternoon peak (16:00-19:00)",
    "gap overlaps midday (10:00-15:00)",
    "user appears elsewhere during the same time-of-day window",
    "hours the user appears elsewhere during the same window",
    "number of observed stay locations",
    "displacements per active voice hour",
};

bool night_or_weekend(Timestamp t) {
    if (is_weekend(t)) return true;
    const std::int64_t clock = clock_seconds(t);
    return clock < 7 * kSecondsPerHour || clock > 19 * kSecondsPerHour;
}

// Closed [a0, a1] against closed [b0, b1] on the 24 h circle; spans may
// exceed one day on the a side.
bool circular_overlap(std::int64_t a0, std::int64_t a1, std::int64_t b0, std::int64_t b1) {
    if (a1 - a0 >= kSecondsPerDay) return true;
    for (int k = -1; k <= 1; ++k) {
        const std::int64_t lo = b0 + k * kSecondsPerDay;
        const std::int64_t hi = b1 + k * kSecondsPerDay;
        if (std::max(a0, lo) <= std::min(a1, hi)) return true;
    }
    return false;
}

}  // namespace

std::span<const char* const> feature_names() { return {kNames, kFeatureCount}; }
std::span<const char* const> feature_descriptions() { return {kDescriptions, kFeatureCount}; }

AnchorAssignment infer_home_work(std::span<const Presence> presences, std::int32_t min_days) {
    struct LocStat {
        std::int64_t presences = 0;
        std::set<std::int64_t> days;
        std::int64_t night_score = 0;
    };
    std::map<std::int32_t, LocStat> stats;
    for (const Presence& p : presences) {
        LocStat& s = stats[p.location];
        ++s.presences;
        s.days.insert(day_index(p.time));
        if (night_or_weekend(p.time)) ++s.night_score;
    }

    struct Candidate {
        std::int32_t location;
        std::int64_t presences;
        std::int64_t night_score;
    };
    std::vector<Candidate> qualifying;
    for (const auto& [loc, s] : stats) {
        if (static_cast<std::int32_t>(s.days.size()) >= min_days) {
            qualifying.push_back(Candidate{loc, s.presences, s.night_score});
        }
    }
    std::sort(qualifying.begin(), qualifying.end(), [](const Candidate& a, const Candidate& b) {
        if (a.presences != b.presences) return a.presences > b.presences;
        return a.location < b.location;
    });

    AnchorAssignment anchors;
    if (qualifying.empty()) return anchors;
    if (qualifying.size() == 1) {
        anchors.home = qualifying[0].location;
        return anchors;
    }
    const Candidate& first = qualifying[0];
    const Candidate& second = qualifying[1];
    // Score tie: the more-visited location (already the sort order) is home.
    if (second.night_score > first.night_score) {
        anchors.home = second.location;
        anchors.work = first.location;
    } else {
        anchors.home = first.location;
        anchors.work = second.location;
    }
    return anchors;
}

DisplacementType displacement_type(const Displacement& d, const AnchorAssignment& anchors) {
    const auto is_home = [&](std::int32_t loc) { return anchors.home && *anchors.home == loc; };
    const auto is_work = [&](std::int32_t loc) { return anchors.work && *anchors.work == loc; };
    const bool origin_home = is_home(d.origin);
    const bool origin_work = is_work(d.origin);
    const bool dest_home = is_home(d.destination);
    const bool dest_work = is_work(d.destination);
    if ((origin_home && dest_work) || (origin_work && dest_home)) return DisplacementType::HBW;
    if (origin_home != dest_home && !origin_work && !dest_work) return DisplacementType::HBO;
    if (origin_work != dest_work && !origin_home && !dest_home) return DisplacementType::WBO;
    return DisplacementType::OBO;
}

TodFlags tod_overlap(const Displacement& d) {
    const std::int64_t c0 = clock_seconds(d.depart);
    const std::int64_t c1 = c0 + (d.arrive - d.depart);
    TodFlags flags;
    flags.morning = circular_overlap(c0, c1, 7 * kSecondsPerHour, 9 * kSecondsPerHour) ? 1 : 0;
    flags.afternoon = circular_overlap(c0, c1, 16 * kSecondsPerHour, 19 * kSecondsPerHour) ? 1 : 0;
    flags.midday = circular_overlap(c0, c1, 10 * kSecondsPerHour, 15 * kSecondsPerHour) ? 1 : 0;
    flags.night = circular_overlap(c0, c1, 20 * kSecondsPerHour, 30 * kSecondsPerHour) ? 1 : 0;
    return flags;
}

std::pair<int, double> same_tod_elsewhere(const Displacement& d, std::span<const StayPoint> stays,
                                          const StudyWindow& window) {
    // Whole clock hours inside the closed [depart, arrive] clock window.
    const std::int64_t c0 = clock_seconds(d.depart);
    const std::int64_t c1 = c0 + (d.arrive - d.depart);
    bool slot[24] = {};
    for (int h = 0; h < 24; ++h) {
        if (c1 - c0 >= kSecondsPerDay) {
            slot[h] = true;
            continue;
        }
        for (int k = 0; k <= 1; ++k) {
            const std::int64_t s = h * kSecondsPerHour + k * kSecondsPerDay;
            if (s >= c0 && s + kSecondsPerHour <= c1) slot[h] = true;
        }
    }

    std::set<std::int64_t> counted;
    for (const StayPoint& s : stays) {
        if (s.location == d.origin || s.location == d.destination) continue;
        const std::int64_t first = (s.time - window.start) / kSecondsPerHour;
        const std::int64_t last = (s.segment_end - window.start) / kSecondsPerHour;
        for (std::int64_t bin = first; bin <= last; ++bin) {
            const Timestamp bin_start = window.start + bin * kSecondsPerHour;
            const Timestamp bin_end = bin_start + kSecondsPerHour;
            const bool point_stay = s.time == s.segment_end;
            const bool overlaps = point_stay
                                      ? (s.time >= bin_start && s.time < bin_end)
                                      : (std::max(s.time, bin_start) < std::min(s.segment_end, bin_end));
            if (overlaps && slot[hour_of_day(bin_start)]) counted.insert(bin);
        }
    }
    const double f13 = static_cast<double>(counted.size());
    return {f13 > 0.0 ? 1 : 0, f13};
}

std::pair<int, double> pair_history(const Displacement& d,
                                    std::span<const Displacement> displacements) {
    std::int64_t no_eti_total = 0;
    std::int64_t between = 0;
    bool directed = false;
    for (const Displacement& other : displacements) {
        if (other.eti != 0) continue;
        ++no_eti_total;
        const bool forward = other.origin == d.origin && other.destination == d.destination;
        const bool reverse = other.origin == d.destination && other.destination == d.origin;
        if (forward) directed = true;
        if (forward || reverse) ++between;
    }
    const double share =
        no_eti_total == 0 ? 0.0 : static_cast<double>(between) / static_cast<double>(no_eti_total);
    return {directed ? 1 : 0, share};
}

std::pair<double, double> personal_features(const UserHistory& history) {
    const double f14 = static_cast<double>(history.distinct_stay_locations);
    const double f15 = history.active_voice_hours == 0
                           ? 0.0
                           : static_cast<double>(history.displacements.size()) /
                                 static_cast<double>(history.active_voice_hours);
    return {f14, f15};
}

FeatureVector build_feature_vector(const Displacement& d, const AnchorAssignment& anchors,
                                   const UserHistory& history, const StudyWindow& window) {
    FeatureVector f{};
    f[0] = d.distance_km;
    f[1] = anchors.home && *anchors.home == d.destination ? 1.0 : 0.0;
    const DisplacementType type = displacement_type(d, anchors);
    f[2] = type == DisplacementType::HBW ? 1.0 : 0.0;
    f[3] = type == DisplacementType::HBO ? 1.0 : 0.0;
    f[4] = type == DisplacementType::WBO ? 1.0 : 0.0;
    const auto [f6, f7] = pair_history(d, history.displacements);
    f[5] = f6;
    f[6] = f7;
    f[7] = static_cast<double>(d.arrive - d.depart) / static_cast<double>(kSecondsPerHour);
    const TodFlags tod = tod_overlap(d);
    f[8] = tod.morning;
    f[9] = tod.afternoon;
    f[10] = tod.midday;
    const auto [f12, f13] = same_tod_elsewhere(d, history.stays, window);
    f[11] = f12;
    f[12] = f13;
    const auto [f14, f15] = personal_features(history);
    f[13] = f14;
    f[14] = f15;
    return f;
}

}  // namespace cdrtrip

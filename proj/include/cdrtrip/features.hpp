#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "cdrtrip/core.hpp"
#include "cdrtrip/movement.hpp"

namespace cdrtrip {

constexpr std::size_t kFeatureCount = 15;
using FeatureVector = std::array<double, kFeatureCount>;

// Column names and their plain-language meaning, index-aligned.
std::span<const char* const> feature_names();
std::span<const char* const> feature_descriptions();

struct AnchorAssignment {
    std::optional<std::int32_t> home;
    std::optional<std::int32_t> work;
};

enum class DisplacementType { HBW, HBO, WBO, OBO };

struct TodFlags {
    int morning = 0;    // 07:00-09:00
    int afternoon = 0;  // 16:00-19:00
    int midday = 0;     // 10:00-15:00
    int night = 0;      // 20:00-06:00 next day; computed but not a model input
};

// Per-user voice-view history the per-displacement features draw on.
struct UserHistory {
    std::vector<StayPoint> stays;             // full study window, time-ordered
    std::vector<Displacement> displacements;  // all of them, with and without ETIs
    std::int64_t active_voice_hours = 0;
    std::int32_t distinct_stay_locations = 0;
};

// Top two locations by presence volume among those seen on at least min_days
// distinct days; the one with more weekend / weekday-night presences is home,
// the other work. Score ties go to overall presence volume.
AnchorAssignment infer_home_work(std::span<const Presence> presences, std::int32_t min_days);

// Direction-agnostic endpoint classification against the anchors.
DisplacementType displacement_type(const Displacement& d, const AnchorAssignment& anchors);

// Closed-interval intersection of [depart, arrive] with each clock window.
TodFlags tod_overlap(const Displacement& d);

// Hours (whole clock slots inside the displacement's clock window, over all
// study days) in which the user is observed at a location that is neither
// endpoint. Returns {f12 indicator, f13 hour count}.
std::pair<int, double> same_tod_elsewhere(const Displacement& d, std::span<const StayPoint> stays,
                                          const StudyWindow& window);

// f6: any no-ETI displacement origin->destination (directed);
// f7: share of no-ETI displacements between the pair, either direction.
std::pair<int, double> pair_history(const Displacement& d,
                                    std::span<const Displacement> displacements);

// {f14 distinct stay locations, f15 displacements per active voice hour}.
std::pair<double, double> personal_features(const UserHistory& history);

FeatureVector build_feature_vector(const Displacement& d, const AnchorAssignment& anchors,
                                   const UserHistory& history, const StudyWindow& window);

}  // namespace cdrtrip

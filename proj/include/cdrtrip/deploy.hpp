#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "cdrtrip/learning.hpp"
#include "cdrtrip/movement.hpp"

namespace cdrtrip {

struct ScoredDisplacement {
    UserIdx user = 0;
    Displacement d;
    double p_hidden = 0.0;
};

// Indexed by local hour of day of the departure; hours with no displacements
// stay empty rather than zero.
using HourlyCurve = std::array<std::optional<double>, 24>;

struct PopulationDisplacement {
    UserIdx user = 0;
    Displacement d;
    FeatureVector features{};
};

// Scores every ETI displacement with distinct endpoints and duration
// strictly below max_duration_hours.
std::vector<ScoredDisplacement> score_population(std::span<const PopulationDisplacement> all,
                                                 const ModelParams& params,
                                                 double max_duration_hours);

struct HiddenShare {
    double share_of_eti = 0.0;  // expected hidden visits per scored displacement
    double share_of_all = 0.0;  // per displacement passing the duration filter
    std::size_t scored = 0;
    std::size_t all_within_duration = 0;
    std::size_t all_unfiltered = 0;
};

// Throws DataError when nothing was scored.
HiddenShare expected_hidden_share(std::span<const ScoredDisplacement> scored,
                                  std::span<const PopulationDisplacement> all,
                                  double max_duration_hours);

struct HourlyCurves {
    HourlyCurve eti_share;      // displacements with ETIs / all, per departure hour
    HourlyCurve mean_p_hidden;  // among scored
    HourlyCurve hidden_share;   // sum p_hidden / all, per departure hour
};

HourlyCurves hourly_curves(std::span<const ScoredDisplacement> scored,
                           std::span<const PopulationDisplacement> all,
                           double max_duration_hours);

struct DistanceComparison {
    double mean_no_eti = 0.0;
    double mean_eti_unweighted = 0.0;
    double mean_eti_weighted = 0.0;  // weights 1 - p_hidden
    std::size_t n_no_eti = 0;
    std::size_t n_eti = 0;
};

// Throws DataError when either side is empty or all weights vanish.
DistanceComparison weighted_mean_distance(std::span<const ScoredDisplacement> scored,
                                          std::span<const PopulationDisplacement> all,
                                          double max_duration_hours);

struct UsageStatistics {
    // Mean records per user per hour of day, split voice / data.
    std::array<double, 24> voice_rate{};
    std::array<double, 24> data_rate{};
    // Within-user inter-event gaps bucketed by bin_width_seconds, per class.
    std::int64_t bin_width_seconds = 300;
    std::vector<std::int64_t> voice_gap_histogram;
    std::vector<std::int64_t> data_gap_histogram;
};

UsageStatistics usage_statistics(const CdrBatch& batch, const StudyWindow& window,
                                 std::int64_t bin_width_seconds = 300,
                                 std::int64_t max_gap_seconds = kSecondsPerDay);

}  // namespace cdrtrip

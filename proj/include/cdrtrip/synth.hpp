#pragma once

#include <array>
#include <span>
#include <vector>

#include "cdrtrip/core.hpp"
#include "cdrtrip/ingest.hpp"
#include "cdrtrip/localize.hpp"
#include "cdrtrip/movement.hpp"

namespace cdrtrip {

// Profiles mirror the observed usage mix: data-only devices, voice-only
// users, mixed users with sporadic data, and mixed users whose apps emit a
// periodic data heartbeat.
enum class UserProfile : std::uint8_t { DataOnly, CallOnly, MixedSporadic, MixedHeartbeat };

struct SynthConfig {
    std::size_t n_users = 1000;
    std::int64_t study_days = 30;
    Timestamp study_start = 1383264000;  // 2013-11-01T00:00:00

    std::int32_t grid_rows = 12;
    std::int32_t grid_cols = 12;
    double grid_spacing_km = 2.0;
    std::int32_t locations_per_user = 5;

    // Schedule chain weights towards the next visit's role.
    double weight_home = 3.0;
    double weight_work = 2.0;
    double weight_other = 1.0;

    // Dwell draws are uniform in [min, max] hours. Keeping every dwell at two
    // hour-bins or more means an hourly truth timeline cannot skip a visit.
    double dwell_home_hours_min = 8.0, dwell_home_hours_max = 14.0;
    double dwell_work_hours_min = 6.0, dwell_work_hours_max = 9.0;
    double dwell_other_hours_min = 2.0, dwell_other_hours_max = 3.5;
    double dwell_hidden_hours_min = 2.0, dwell_hidden_hours_max = 3.0;

    double speed_kmh = 30.0;
    double travel_overhead_seconds = 300.0;

    std::array<double, 24> voice_rate;  // events per hour while at a location
    std::array<double, 24> data_rate;   // sporadic data users
    std::int64_t data_heartbeat_seconds = 3600;
    // At least this many voice records per unsuppressed visit (0 or 1).
    int min_voice_per_visit = 0;

    // Population mix; the remainder of the users is mixed-sporadic.
    double data_only_share = 0.09;
    double call_only_share = 0.39;
    double frequent_share = 0.30;

    // Hidden-visit planting: probability hidden_rate * (1 + hidden_per_km *
    // distance), capped at 0.95; zero rate disables planting entirely.
    double hidden_rate = 0.10;
    double hidden_per_km = 0.15;

    std::uint64_t seed = 20131101;

    StudyWindow window() const {
        return StudyWindow{study_start, study_start + study_days * kSecondsPerDay};
    }
    void validate() const;  // throws DataError listing the offending field
};

SynthConfig default_synth_config();

struct World {
    TowerRegistry registry;
    // Tower indices per user; [0] is home, [1] is work.
    std::vector<std::vector<std::size_t>> user_locations;
};

struct TrueVisit {
    std::int32_t location = 0;  // index into the user's location list
    std::size_t tower_idx = 0;
    Timestamp start = 0;
    Timestamp end = 0;
    bool voice_suppressed = false;  // planted hidden episode
};

struct GroundTruth {
    std::vector<std::vector<TrueVisit>> visits;  // per user
};

struct SimulationResult {
    CdrBatch batch;  // grouped per user, time-sorted, report filled in
    GroundTruth truth;
    std::vector<UserProfile> profiles;
};

World generate_world(const SynthConfig& config);
SimulationResult simulate(const SynthConfig& config, const World& world);

// 1 iff a true visit to a tower outside both endpoints' member sets lies
// strictly inside (depart, arrive). Throws DataError for a displacement that
// does not align with any true visit pair.
std::vector<int> oracle_labels(std::span<const TrueVisit> visits,
                               std::span<const Displacement> displacements,
                               std::span<const UserLocation> locations);

// Ground-truth CSV "user_id,location_id,start,end".
std::string truth_to_csv(const SimulationResult& sim);
std::string towers_to_csv(const TowerRegistry& registry);
// Records interleaved in global time order, exercising per-user regrouping.
std::string cdr_to_csv_time_ordered(const CdrBatch& batch);

}  // namespace cdrtrip

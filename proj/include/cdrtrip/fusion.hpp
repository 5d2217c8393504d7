#pragma once

#include <span>
#include <string>
#include <vector>

#include "cdrtrip/core.hpp"
#include "cdrtrip/ingest.hpp"
#include "cdrtrip/localize.hpp"
#include "cdrtrip/movement.hpp"

namespace cdrtrip {

class EmptyDatasetError : public DataError {
  public:
    using DataError::DataError;
};

enum class UserKind { DataOnly, CallOnly, Mixed };

struct UserClass {
    UserKind kind = UserKind::CallOnly;
    bool frequent = false;  // Mixed with active data hours >= ceil(study_hours / 2)
    std::int64_t active_data_hours = 0;
    std::int64_t active_voice_hours = 0;
};

enum class EventFilter { Voice, Data, All };

std::int64_t active_hours(std::span<const CdrRecord> records, const StudyWindow& window,
                          EventFilter filter);

// Throws DataError on a user with zero records.
UserClass classify_user(std::span<const CdrRecord> records, const StudyWindow& window,
                        std::int64_t frequent_min_hours);

// Hourly location series from data-access presences. A bin holds the
// location with the most presences in it; ties go to the location observed
// earliest within the bin.
struct TruthTimeline {
    std::vector<std::int32_t> bin_location;  // -1 = bin uncovered
    std::int64_t covered_bins = 0;

    bool covered(std::int32_t bin) const {
        return bin >= 0 && bin < static_cast<std::int32_t>(bin_location.size()) &&
               bin_location[static_cast<std::size_t>(bin)] >= 0;
    }
};

TruthTimeline derive_truth_timeline(std::span<const Presence> data_presences,
                                    const StudyWindow& window);

enum class Label { NoHidden = 0, Hidden = 1, Unrecoverable = 2 };

// Applies the labeling rule over the whole hour bins strictly inside
// (depart, arrive): any uncovered bin makes the interval unrecoverable;
// otherwise a hidden visit is a covered bin at neither endpoint. Requires
// d.eti == 1 (DataError otherwise).
Label label_displacement(const Displacement& d, const TruthTimeline& timeline,
                         const StudyWindow& window);

struct LabeledObservation {
    UserIdx user = 0;
    Displacement d;
    Label label = Label::NoHidden;
};

// One uniformly chosen observation per user with a nonempty eligible list;
// per-user substreams keyed on the user id keep the choice independent of
// processing order. Throws EmptyDatasetError when nothing is eligible.
std::vector<LabeledObservation> assemble_training_set(
    std::span<const std::vector<LabeledObservation>> per_user,
    std::span<const std::string> user_ids, std::uint64_t seed);

}  // namespace cdrtrip

#include "cdrtrip/fusion.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "cdrtrip/rng.hpp"

namespace cdrtrip {

namespace {

bool matches(EventType e, EventFilter filter) {
    switch (filter) {
        case EventFilter::Voice: return is_voice(e);
        case EventFilter::Data: return e == EventType::DataAccess;
        case EventFilter::All: return true;
    }
    return false;
}

}  // namespace

std::int64_t active_hours(std::span<const CdrRecord> records, const StudyWindow& window,
                          EventFilter filter) {
    std::set<std::int32_t> bins;
    for (const CdrRecord& r : records) {
        if (matches(r.event, filter)) bins.insert(hour_bin(r.time, window).index);
    }
    return static_cast<std::int64_t>(bins.size());
}

UserClass classify_user(std::span<const CdrRecord> records, const StudyWindow& window,
                        std::int64_t frequent_min_hours) {
    if (records.empty()) throw DataError("classify_user: user has no records");
    UserClass uc;
    uc.active_data_hours = active_hours(records, window, EventFilter::Data);
    uc.active_voice_hours = active_hours(records, window, EventFilter::Voice);
    const bool has_voice = std::any_of(records.begin(), records.end(),
                                       [](const CdrRecord& r) { return is_voice(r.event); });
    const bool has_data = std::any_of(records.begin(), records.end(), [](const CdrRecord& r) {
        return r.event == EventType::DataAccess;
    });
    if (!has_voice) {
        uc.kind = UserKind::DataOnly;
    } else if (!has_data) {
        uc.kind = UserKind::CallOnly;
    } else {
        uc.kind = UserKind::Mixed;
        uc.frequent = uc.active_data_hours >= frequent_min_hours;
    }
    return uc;
}

TruthTimeline derive_truth_timeline(std::span<const Presence> data_presences,
                                    const StudyWindow& window) {
    TruthTimeline timeline;
    timeline.bin_location.assign(static_cast<std::size_t>(window.hours()), -1);

    struct Candidate {
        std::int64_t count = 0;
        Timestamp first = 0;
    };
    std::map<std::int32_t, std::map<std::int32_t, Candidate>> per_bin;
    for (const Presence& p : data_presences) {
        const std::int32_t bin = hour_bin(p.time, window).index;
        auto [it, inserted] = per_bin[bin].try_emplace(p.location, Candidate{0, p.time});
        ++it->second.count;
        if (p.time < it->second.first) it->second.first = p.time;
    }
    for (const auto& [bin, candidates] : per_bin) {
        std::int32_t best_loc = -1;
        Candidate best;
        for (const auto& [loc, cand] : candidates) {
            if (best_loc < 0 || cand.count > best.count ||
                (cand.count == best.count && cand.first < best.first)) {
                best_loc = loc;
                best = cand;
            }
        }
        timeline.bin_location[static_cast<std::size_t>(bin)] = best_loc;
        ++timeline.covered_bins;
    }
    return timeline;
}

Label label_displacement(const Displacement& d, const TruthTimeline& timeline,
                         const StudyWindow& window) {
    if (d.eti != 1) throw DataError("label_displacement: called on a non-ETI displacement");
    if (d.origin == d.destination) {
        throw DataError("label_displacement: endpoints must be distinct");
    }
    const std::int64_t from = d.depart - window.start;
    const std::int64_t to = d.arrive - window.start;
    const std::int32_t first = static_cast<std::int32_t>(from / kSecondsPerHour) + 1;
    const std::int32_t last = static_cast<std::int32_t>(to / kSecondsPerHour) - 1;
    bool hidden = false;
    for (std::int32_t bin = first; bin <= last; ++bin) {
        if (!timeline.covered(bin)) return Label::Unrecoverable;
        const std::int32_t loc = timeline.bin_location[static_cast<std::size_t>(bin)];
        if (loc != d.origin && loc != d.destination) hidden = true;
    }
    return hidden ? Label::Hidden : Label::NoHidden;
}

std::vector<LabeledObservation> assemble_training_set(
    std::span<const std::vector<LabeledObservation>> per_user,
    std::span<const std::string> user_ids, std::uint64_t seed) {
    std::vector<LabeledObservation> dataset;
    for (std::size_t u = 0; u < per_user.size(); ++u) {
        const auto& eligible = per_user[u];
        if (eligible.empty()) continue;
        Rng rng(mix_seed(seed, user_ids[u]));
        dataset.push_back(eligible[rng.next_below(eligible.size())]);
    }
    if (dataset.empty()) {
        throw EmptyDatasetError("assemble_training_set: no user has an eligible observation");
    }
    return dataset;
}

}  // namespace cdrtrip

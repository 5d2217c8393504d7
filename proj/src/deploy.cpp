#include "cdrtrip/deploy.hpp"

#include <algorithm>

namespace cdrtrip {

namespace {

bool within_duration(const Displacement& d, double max_duration_hours) {
    return static_cast<double>(d.arrive - d.depart) <
           max_duration_hours * static_cast<double>(kSecondsPerHour);
}

}  // namespace

std::vector<ScoredDisplacement> score_population(std::span<const PopulationDisplacement> all,
                                                 const ModelParams& params,
                                                 double max_duration_hours) {
    std::vector<ScoredDisplacement> scored;
    for (const PopulationDisplacement& pd : all) {
        if (pd.d.eti != 1 || pd.d.origin == pd.d.destination) continue;
        if (!within_duration(pd.d, max_duration_hours)) continue;
        scored.push_back(
            ScoredDisplacement{pd.user, pd.d, predict_proba(params, pd.features)});
    }
    return scored;
}

HiddenShare expected_hidden_share(std::span<const ScoredDisplacement> scored,
                                  std::span<const PopulationDisplacement> all,
                                  double max_duration_hours) {
    if (scored.empty()) throw DataError("expected_hidden_share: no scored displacements");
    HiddenShare share;
    share.scored = scored.size();
    share.all_unfiltered = all.size();
    double total_p = 0.0;
    for (const ScoredDisplacement& s : scored) total_p += s.p_hidden;
    for (const PopulationDisplacement& pd : all) {
        if (within_duration(pd.d, max_duration_hours)) ++share.all_within_duration;
    }
    share.share_of_eti = total_p / static_cast<double>(scored.size());
    share.share_of_all = share.all_within_duration == 0
                             ? 0.0
                             : total_p / static_cast<double>(share.all_within_duration);
    return share;
}

HourlyCurves hourly_curves(std::span<const ScoredDisplacement> scored,
                           std::span<const PopulationDisplacement> all,
                           double max_duration_hours) {
    std::array<std::int64_t, 24> n_all{};
    std::array<std::int64_t, 24> n_eti{};
    std::array<std::int64_t, 24> n_scored{};
    std::array<double, 24> sum_p{};
    for (const PopulationDisplacement& pd : all) {
        if (!within_duration(pd.d, max_duration_hours)) continue;
        const int h = hour_of_day(pd.d.depart);
        ++n_all[h];
        if (pd.d.eti == 1 && pd.d.origin != pd.d.destination) ++n_eti[h];
    }
    for (const ScoredDisplacement& s : scored) {
        const int h = hour_of_day(s.d.depart);
        ++n_scored[h];
        sum_p[h] += s.p_hidden;
    }
    HourlyCurves curves;
    for (int h = 0; h < 24; ++h) {
        if (n_all[h] > 0) {
            curves.eti_share[h] =
                static_cast<double>(n_eti[h]) / static_cast<double>(n_all[h]);
            curves.hidden_share[h] = sum_p[h] / static_cast<double>(n_all[h]);
        }
        if (n_scored[h] > 0) {
            curves.mean_p_hidden[h] = sum_p[h] / static_cast<double>(n_scored[h]);
        }
    }
    return curves;
}

DistanceComparison weighted_mean_distance(std::span<const ScoredDisplacement> scored,
                                          std::span<const PopulationDisplacement> all,
                                          double max_duration_hours) {
    DistanceComparison cmp;
    double no_eti_sum = 0.0;
    for (const PopulationDisplacement& pd : all) {
        if (pd.d.eti != 0 || !within_duration(pd.d, max_duration_hours)) continue;
        no_eti_sum += pd.d.distance_km;
        ++cmp.n_no_eti;
    }
    double eti_sum = 0.0, weighted_sum = 0.0, weight_total = 0.0;
    for (const ScoredDisplacement& s : scored) {
        eti_sum += s.d.distance_km;
        const double w = 1.0 - s.p_hidden;
        weighted_sum += w * s.d.distance_km;
        weight_total += w;
        ++cmp.n_eti;
    }
    if (cmp.n_no_eti == 0 || cmp.n_eti == 0) {
        throw DataError("weighted_mean_distance: need both no-ETI and scored displacements");
    }
    if (weight_total <= 0.0) {
        throw DataError("weighted_mean_distance: all weights are zero");
    }
    cmp.mean_no_eti = no_eti_sum / static_cast<double>(cmp.n_no_eti);
    cmp.mean_eti_unweighted = eti_sum / static_cast<double>(cmp.n_eti);
    cmp.mean_eti_weighted = weighted_sum / weight_total;
    return cmp;
}

UsageStatistics usage_statistics(const CdrBatch& batch, const StudyWindow& window,
                                 std::int64_t bin_width_seconds, std::int64_t max_gap_seconds) {
    UsageStatistics stats;
    stats.bin_width_seconds = bin_width_seconds;
    const std::size_t n_bins =
        static_cast<std::size_t>((max_gap_seconds + bin_width_seconds - 1) / bin_width_seconds);
    stats.voice_gap_histogram.assign(n_bins + 1, 0);  // last bucket is overflow
    stats.data_gap_histogram.assign(n_bins + 1, 0);

    std::array<std::int64_t, 24> voice_counts{};
    std::array<std::int64_t, 24> data_counts{};
    for (std::size_t u = 0; u < batch.user_count(); ++u) {
        Timestamp last_voice = -1, last_data = -1;
        for (const CdrRecord& rec : batch.records_of(static_cast<UserIdx>(u))) {
            const int h = hour_of_day(rec.time);
            Timestamp& last = is_voice(rec.event) ? last_voice : last_data;
            auto& histogram =
                is_voice(rec.event) ? stats.voice_gap_histogram : stats.data_gap_histogram;
            (is_voice(rec.event) ? voice_counts : data_counts)[h] += 1;
            if (last >= 0) {
                const std::int64_t gap = rec.time - last;
                const std::size_t bin = std::min(
                    n_bins, static_cast<std::size_t>(gap / bin_width_seconds));
                ++histogram[bin];
            }
            last = rec.time;
        }
    }
    const double user_days =
        static_cast<double>(batch.user_count()) * static_cast<double>(window.days());
    for (int h = 0; h < 24; ++h) {
        if (user_days > 0.0) {
            stats.voice_rate[h] = static_cast<double>(voice_counts[h]) / user_days;
            stats.data_rate[h] = static_cast<double>(data_counts[h]) / user_days;
        }
    }
    return stats;
}

}  // namespace cdrtrip

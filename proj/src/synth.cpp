#include "cdrtrip/synth.hpp"

#include <algorithm>
#include <cmath>

#include "cdrtrip/rng.hpp"
#include "cdrtrip/textio.hpp"

namespace cdrtrip {

namespace {

constexpr std::array<double, 24> kDefaultVoiceRate = {
    0.02, 0.01, 0.01, 0.01, 0.02, 0.04, 0.10, 0.22, 0.30, 0.24, 0.18, 0.16,
    0.15, 0.14, 0.15, 0.17, 0.22, 0.30, 0.34, 0.28, 0.20, 0.14, 0.08, 0.04,
};

constexpr std::array<double, 24> kDefaultDataRate = {
    0.15, 0.12, 0.10, 0.10, 0.12, 0.18, 0.28, 0.42, 0.50, 0.48, 0.46, 0.45,
    0.46, 0.44, 0.45, 0.46, 0.48, 0.52, 0.55, 0.52, 0.48, 0.40, 0.30, 0.20,
};

struct Event {
    Timestamp time;
    EventType type;
    std::size_t tower_idx;
};

// Nonhomogeneous Poisson events over [start, end) by hour-of-day slices.
void draw_rate_events(Rng& rng, const std::array<double, 24>& rates, Timestamp start,
                      Timestamp end, EventType fallback_type, bool voice_pair,
                      std::vector<Event>& out) {
    Timestamp slice_start = start;
    while (slice_start < end) {
        const Timestamp next_hour =
            (slice_start / kSecondsPerHour + 1) * kSecondsPerHour;
        const Timestamp slice_end = std::min(end, next_hour);
        const double rate = rates[static_cast<std::size_t>(hour_of_day(slice_start))];
        const double expected =
            rate * static_cast<double>(slice_end - slice_start) / kSecondsPerHour;
        const int count = rng.poisson(expected);
        for (int i = 0; i < count; ++i) {
            const Timestamp t =
                slice_start +
                static_cast<Timestamp>(rng.next_below(
                    static_cast<std::uint64_t>(slice_end - slice_start)));
            EventType type = fallback_type;
            if (voice_pair) {
                type = rng.bernoulli(0.5) ? EventType::VoiceIncoming : EventType::VoiceOutgoing;
            }
            out.push_back(Event{t, type, 0});
        }
        slice_start = slice_end;
    }
}

struct UserSim {
    std::vector<TrueVisit> visits;
    std::vector<Event> events;
    UserProfile profile;
};

double dwell_hours(Rng& rng, const SynthConfig& cfg, std::int32_t location) {
    if (location == 0) return rng.uniform(cfg.dwell_home_hours_min, cfg.dwell_home_hours_max);
    if (location == 1) return rng.uniform(cfg.dwell_work_hours_min, cfg.dwell_work_hours_max);
    return rng.uniform(cfg.dwell_other_hours_min, cfg.dwell_other_hours_max);
}

std::int32_t pick_next(Rng& rng, const SynthConfig& cfg, std::int32_t current,
                       std::int32_t n_locations) {
    double total = 0.0;
    for (std::int32_t l = 0; l < n_locations; ++l) {
        if (l == current) continue;
        total += l == 0 ? cfg.weight_home : (l == 1 ? cfg.weight_work : cfg.weight_other);
    }
    double pick = rng.next_double() * total;
    for (std::int32_t l = 0; l < n_locations; ++l) {
        if (l == current) continue;
        const double w = l == 0 ? cfg.weight_home : (l == 1 ? cfg.weight_work : cfg.weight_other);
        pick -= w;
        if (pick <= 0.0) return l;
    }
    return current == 0 ? 1 : 0;
}

void simulate_user(const SynthConfig& cfg, const World& world, std::size_t user, UserSim& sim) {
    Rng profile_rng(mix_seed(cfg.seed, "profile", user));
    const double roll = profile_rng.next_double();
    if (roll < cfg.data_only_share) {
        sim.profile = UserProfile::DataOnly;
    } else if (roll < cfg.data_only_share + cfg.call_only_share) {
        sim.profile = UserProfile::CallOnly;
    } else if (roll < cfg.data_only_share + cfg.call_only_share + cfg.frequent_share) {
        sim.profile = UserProfile::MixedHeartbeat;
    } else {
        sim.profile = UserProfile::MixedSporadic;
    }

    const auto& towers = world.user_locations[user];
    const auto n_locations = static_cast<std::int32_t>(towers.size());
    const StudyWindow window = cfg.window();

    Rng rng(mix_seed(cfg.seed, "schedule", user));
    std::int32_t current = 0;  // start the study at home
    Timestamp t = window.start;
    while (t < window.end) {
        const auto dwell =
            static_cast<Timestamp>(dwell_hours(rng, cfg, current) * kSecondsPerHour);
        TrueVisit visit;
        visit.location = current;
        visit.tower_idx = towers[static_cast<std::size_t>(current)];
        visit.start = t;
        visit.end = std::min<Timestamp>(t + dwell, window.end);
        sim.visits.push_back(visit);
        t = visit.end;
        if (t >= window.end) break;

        std::int32_t next = pick_next(rng, cfg, current, n_locations);
        const GeoPoint from = world.registry.position(towers[current]);
        const GeoPoint to = world.registry.position(towers[next]);
        const double leg_km = haversine_km(from, to);
        const auto travel = [&](double km) {
            return static_cast<Timestamp>(km / cfg.speed_kmh * 3600.0 +
                                          cfg.travel_overhead_seconds);
        };

        bool planted = false;
        if (cfg.hidden_rate > 0.0 && n_locations >= 3) {
            const double p =
                std::min(0.95, cfg.hidden_rate * (1.0 + cfg.hidden_per_km * leg_km));
            planted = rng.bernoulli(p);
        }
        if (planted) {
            std::int32_t detour = current;
            while (detour == current || detour == next) {
                detour = static_cast<std::int32_t>(rng.next_below(n_locations));
            }
            const GeoPoint via = world.registry.position(towers[detour]);
            t += travel(haversine_km(from, via));
            if (t >= window.end) break;
            const auto hidden_dwell = static_cast<Timestamp>(
                rng.uniform(cfg.dwell_hidden_hours_min, cfg.dwell_hidden_hours_max) *
                kSecondsPerHour);
            TrueVisit hidden;
            hidden.location = detour;
            hidden.tower_idx = towers[static_cast<std::size_t>(detour)];
            hidden.start = t;
            hidden.end = std::min<Timestamp>(t + hidden_dwell, window.end);
            hidden.voice_suppressed = true;
            sim.visits.push_back(hidden);
            t = hidden.end;
            if (t >= window.end) break;
            t += travel(haversine_km(via, to));
        } else {
            t += travel(leg_km);
        }
        current = next;
    }

    // Voice by diurnal intensity; data passively, heartbeat or sporadic.
    const bool has_voice = sim.profile != UserProfile::DataOnly;
    const bool has_data = sim.profile != UserProfile::CallOnly;
    Rng event_rng(mix_seed(cfg.seed, "events", user));
    for (const TrueVisit& visit : sim.visits) {
        const std::size_t first_event = sim.events.size();
        const Timestamp end = std::min(visit.end, window.end - 1) + 1;  // events before window end
        if (has_voice && !visit.voice_suppressed) {
            draw_rate_events(event_rng, cfg.voice_rate, visit.start, end, EventType::VoiceIncoming,
                             true, sim.events);
            if (cfg.min_voice_per_visit > 0 && sim.events.size() == first_event) {
                const Timestamp mid = visit.start + (end - 1 - visit.start) / 2;
                sim.events.push_back(Event{mid, EventType::VoiceIncoming, 0});
            }
        }
        if (has_data) {
            if (sim.profile == UserProfile::MixedHeartbeat || sim.profile == UserProfile::DataOnly) {
                sim.events.push_back(Event{visit.start, EventType::DataAccess, 0});
                const std::int64_t period = cfg.data_heartbeat_seconds;
                const std::int64_t m = (visit.start - window.start) / period + 1;
                for (Timestamp beat = window.start + m * period; beat < end; beat += period) {
                    sim.events.push_back(Event{beat, EventType::DataAccess, 0});
                }
            } else {
                draw_rate_events(event_rng, cfg.data_rate, visit.start, end,
                                 EventType::DataAccess, false, sim.events);
            }
        }
        for (std::size_t i = first_event; i < sim.events.size(); ++i) {
            sim.events[i].tower_idx = visit.tower_idx;
        }
    }
    std::stable_sort(sim.events.begin(), sim.events.end(),
                     [](const Event& a, const Event& b) { return a.time < b.time; });
}

void append_csv_double(std::string& out, double v);

}  // namespace

void SynthConfig::validate() const {
    const auto fail = [](const std::string& what) { throw DataError("synth config: " + what); };
    if (n_users == 0) fail("n_users must be positive");
    if (study_days <= 0) fail("study_days must be positive");
    if (grid_rows <= 0 || grid_cols <= 0) fail("grid must be non-empty");
    if (grid_spacing_km <= 0.0) fail("grid_spacing_km must be positive");
    if (locations_per_user < 2) fail("locations_per_user must be at least 2");
    if (locations_per_user > grid_rows * grid_cols) fail("more locations than towers");
    if (weight_home < 0 || weight_work < 0 || weight_other < 0) fail("negative schedule weight");
    if (weight_home + weight_work + weight_other <= 0.0) fail("all schedule weights zero");
    if (speed_kmh <= 0.0) fail("speed_kmh must be positive");
    if (data_heartbeat_seconds <= 0) fail("data_heartbeat_seconds must be positive");
    for (const double r : voice_rate) {
        if (r < 0.0) fail("negative voice rate");
    }
    for (const double r : data_rate) {
        if (r < 0.0) fail("negative data rate");
    }
    if (data_only_share < 0 || call_only_share < 0 || frequent_share < 0 ||
        data_only_share + call_only_share + frequent_share > 1.0) {
        fail("population shares must be in [0,1] and sum to at most 1");
    }
    if (hidden_rate < 0.0 || hidden_rate > 1.0) fail("hidden_rate must be in [0,1]");
    if (hidden_per_km < 0.0) fail("hidden_per_km must be nonnegative");
    const auto check_dwell = [&](double lo, double hi, const char* name) {
        if (lo <= 0.0 || hi < lo) fail(std::string("bad dwell range for ") + name);
    };
    check_dwell(dwell_home_hours_min, dwell_home_hours_max, "home");
    check_dwell(dwell_work_hours_min, dwell_work_hours_max, "work");
    check_dwell(dwell_other_hours_min, dwell_other_hours_max, "other");
    check_dwell(dwell_hidden_hours_min, dwell_hidden_hours_max, "hidden");
}

SynthConfig default_synth_config() {
    SynthConfig cfg;
    cfg.voice_rate = kDefaultVoiceRate;
    cfg.data_rate = kDefaultDataRate;
    return cfg;
}

World generate_world(const SynthConfig& cfg) {
    cfg.validate();
    World world;
    const GeoPoint base{114.0, 22.5};
    // Converters chosen so no grid edge ever falls below the nominal spacing.
    const double top_lat = base.lat + static_cast<double>(cfg.grid_rows) * cfg.grid_spacing_km / 110.0;
    const double lat_step = cfg.grid_spacing_km / 111.0;
    const double lon_step = cfg.grid_spacing_km / (111.0 * std::cos(top_lat * 3.14159265358979323846 / 180.0));
    for (std::int32_t r = 0; r < cfg.grid_rows; ++r) {
        for (std::int32_t c = 0; c < cfg.grid_cols; ++c) {
            const CellTowerId id{4600 + r, c + 1};
            world.registry.add(id, GeoPoint{base.lon + c * lon_step, base.lat + r * lat_step});
        }
    }
    world.registry.find(CellTowerId{});  // build the lookup index up front

    const std::size_t n_towers = world.registry.size();
    world.user_locations.resize(cfg.n_users);
    for (std::size_t u = 0; u < cfg.n_users; ++u) {
        Rng rng(mix_seed(cfg.seed, "world", u));
        auto& chosen = world.user_locations[u];
        while (chosen.size() < static_cast<std::size_t>(cfg.locations_per_user)) {
            const std::size_t tower = rng.next_below(n_towers);
            if (std::find(chosen.begin(), chosen.end(), tower) == chosen.end()) {
                chosen.push_back(tower);
            }
        }
    }
    return world;
}

SimulationResult simulate(const SynthConfig& cfg, const World& world) {
    cfg.validate();
    std::vector<UserSim> sims(cfg.n_users);
    for (std::size_t u = 0; u < cfg.n_users; ++u) simulate_user(cfg, world, u, sims[u]);

    SimulationResult result;
    result.truth.visits.resize(cfg.n_users);
    result.profiles.resize(cfg.n_users);
    std::size_t total_records = 0;
    for (const UserSim& sim : sims) total_records += sim.events.size();
    result.batch.records.reserve(total_records);
    char name[16];
    for (std::size_t u = 0; u < cfg.n_users; ++u) {
        std::snprintf(name, sizeof(name), "u%06zu", u);
        result.batch.users.emplace_back(name);
        const std::size_t begin = result.batch.records.size();
        for (const Event& ev : sims[u].events) {
            CdrRecord rec;
            rec.user = static_cast<UserIdx>(u);
            rec.tower = world.registry.id(tower_for_event(sims[u].visits, ev.time));
            rec.time = ev.time;
            rec.event = ev.type;
            result.batch.records.push_back(rec);
        }
        result.batch.user_spans.emplace_back(begin, result.batch.records.size());
        result.truth.visits[u] = std::move(sims[u].visits);
        result.profiles[u] = sims[u].profile;
    }
    result.batch.report.accepted = result.batch.records.size();
    return result;
}

std::vector<int> oracle_labels(std::span<const TrueVisit> visits,
                               std::span<const Displacement> displacements,
                               std::span<const UserLocation> locations) {
    std::vector<int> labels;
    labels.reserve(displacements.size());
    for (const Displacement& d : displacements) {
        const bool depart_covered =
            std::any_of(visits.begin(), visits.end(), [&](const TrueVisit& v) {
                return v.start <= d.depart && d.depart <= v.end;
            });
        const bool arrive_covered =
            std::any_of(visits.begin(), visits.end(), [&](const TrueVisit& v) {
                return v.start <= d.arrive && d.arrive <= v.end;
            });
        if (!depart_covered || !arrive_covered) {
            throw DataError("oracle_labels: displacement does not align with ground truth");
        }
        const auto& origin = locations[static_cast<std::size_t>(d.origin)];
        const auto& destination = locations[static_cast<std::size_t>(d.destination)];
        const auto at_endpoint = [&](std::size_t tower) {
            return std::find(origin.member_towers.begin(), origin.member_towers.end(), tower) !=
                       origin.member_towers.end() ||
                   std::find(destination.member_towers.begin(), destination.member_towers.end(),
                             tower) != destination.member_towers.end();
        };
        int label = 0;
        for (const TrueVisit& v : visits) {
            if (v.start > d.depart && v.end < d.arrive && !at_endpoint(v.tower_idx)) {
                label = 1;
                break;
            }
        }
        labels.push_back(label);
    }
    return labels;
}

std::string truth_to_csv(const SimulationResult& sim) {
    std::string out = "user_id,location_id,start,end\n";
    for (std::size_t u = 0; u < sim.truth.visits.size(); ++u) {
        for (const TrueVisit& v : sim.truth.visits[u]) {
            out += sim.batch.users[u];
            out += ',';
            out += std::to_string(v.location);
            out += ',';
            out += format_iso8601(v.start);
            out += ',';
            out += format_iso8601(v.end);
            out += '\n';
        }
    }
    return out;
}

std::string towers_to_csv(const TowerRegistry& registry) {
    std::string out = "lac,cell_id,lon,lat\n";
    for (std::size_t i = 0; i < registry.size(); ++i) {
        const CellTowerId id = registry.id(i);
        const GeoPoint p = registry.position(i);
        out += std::to_string(id.lac);
        out += ',';
        out += std::to_string(id.cell);
        out += ',';
        append_csv_double(out, p.lon);
        out += ',';
        append_csv_double(out, p.lat);
        out += '\n';
    }
    return out;
}

std::string cdr_to_csv_time_ordered(const CdrBatch& batch) {
    std::vector<std::size_t> order(batch.records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (batch.records[a].time != batch.records[b].time) {
            return batch.records[a].time < batch.records[b].time;
        }
        return batch.records[a].user < batch.records[b].user;
    });
    std::string out = "user_id,lac,cell_id,timestamp,event\n";
    for (const std::size_t i : order) {
        const CdrRecord& rec = batch.records[i];
        out += batch.users[rec.user];
        out += ',';
        out += std::to_string(rec.tower.lac);
        out += ',';
        out += std::to_string(rec.tower.cell);
        out += ',';
        out += format_iso8601(rec.time);
        out += ',';
        out += event_token(rec.event);
        out += '\n';
    }
    return out;
}

}  // namespace cdrtrip

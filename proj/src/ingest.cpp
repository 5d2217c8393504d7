#include "cdrtrip/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <unordered_map>

#include "cdrtrip/parallel.hpp"

namespace cdrtrip {

namespace {

struct LineSplitter {
    std::string_view rest;
    bool next(std::string_view& line) {
        if (rest.empty()) return false;
        const std::size_t nl = rest.find('\n');
        if (nl == std::string_view::npos) {
            line = rest;
            rest = {};
        } else {
            line = rest.substr(0, nl);
            rest.remove_prefix(nl + 1);
        }
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        return true;
    }
};

bool split_fields(std::string_view line, std::span<std::string_view> out) {
    std::size_t field = 0;
    while (true) {
        const std::size_t comma = line.find(',');
        if (field >= out.size()) return false;
        out[field++] = line.substr(0, comma == std::string_view::npos ? line.size() : comma);
        if (comma == std::string_view::npos) break;
        line.remove_prefix(comma + 1);
    }
    return field == out.size();
}

bool parse_int32(std::string_view s, std::int32_t& out) {
    if (s.empty()) return false;
    const auto* begin = s.data();
    const auto* end = s.data() + s.size();
    const auto r = std::from_chars(begin, end, out);
    return r.ec == std::errc{} && r.ptr == end && out >= 0;
}

bool parse_double(std::string_view s, double& out) {
    if (s.empty()) return false;
    const auto* begin = s.data();
    const auto* end = s.data() + s.size();
    const auto r = std::from_chars(begin, end, out);
    return r.ec == std::errc{} && r.ptr == end;
}

bool parse_event(std::string_view s, EventType& out) {
    if (s == "VOICE_IN") {
        out = EventType::VoiceIncoming;
    } else if (s == "VOICE_OUT") {
        out = EventType::VoiceOutgoing;
    } else if (s == "DATA") {
        out = EventType::DataAccess;
    } else {
        return false;
    }
    return true;
}

struct ChunkResult {
    std::vector<std::string_view> users;  // first appearance within the chunk
    std::vector<CdrRecord> records;       // user field holds the chunk-local index
    std::vector<std::size_t> user_counts;
    IngestReport report;
};

void parse_chunk(std::string_view bytes, const StudyWindow& window, ChunkResult& out) {
    std::unordered_map<std::string_view, UserIdx> lookup;
    LineSplitter lines{bytes};
    std::string_view line;
    std::string_view fields[5];
    while (lines.next(line)) {
        if (line.empty()) {
            ++out.report.rejected_malformed;
            continue;
        }
        CdrRecord rec;
        Timestamp time = 0;
        if (!split_fields(line, fields) || fields[0].empty() ||
            !parse_int32(fields[1], rec.tower.lac) || !parse_int32(fields[2], rec.tower.cell) ||
            !parse_event(fields[4], rec.event)) {
            ++out.report.rejected_malformed;
            continue;
        }
        if (const auto t = parse_iso8601(fields[3]); t.has_value()) {
            time = *t;
        } else {
            ++out.report.rejected_malformed;
            continue;
        }
        if (!window.contains(time)) {
            ++out.report.rejected_out_of_window;
            continue;
        }
        rec.time = time;
        auto [it, inserted] = lookup.try_emplace(fields[0], static_cast<UserIdx>(out.users.size()));
        if (inserted) {
            out.users.push_back(fields[0]);
            out.user_counts.push_back(0);
        }
        rec.user = it->second;
        ++out.user_counts[rec.user];
        out.records.push_back(rec);
        ++out.report.accepted;
    }
}

std::string_view strip_header(std::string_view bytes, std::string_view first_field) {
    if (bytes.substr(0, first_field.size()) == first_field) {
        const std::size_t nl = bytes.find('\n');
        bytes.remove_prefix(nl == std::string_view::npos ? bytes.size() : nl + 1);
    }
    return bytes;
}

}  // namespace

std::size_t TowerRegistry::add(CellTowerId id, GeoPoint position) {
    ids_.push_back(id);
    positions_.push_back(position);
    sorted_ = false;
    return ids_.size() - 1;
}

void TowerRegistry::reindex() const {
    order_.resize(ids_.size());
    for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
    std::sort(order_.begin(), order_.end(),
              [&](std::uint32_t a, std::uint32_t b) { return ids_[a] < ids_[b]; });
    sorted_ = true;
}

std::size_t TowerRegistry::find(CellTowerId id) const {
    if (!sorted_) reindex();
    const auto it = std::lower_bound(order_.begin(), order_.end(), id,
                                     [&](std::uint32_t a, CellTowerId v) { return ids_[a] < v; });
    if (it == order_.end() || !(ids_[*it] == id)) return npos;
    return *it;
}

std::string IngestReport::to_key_values() const {
    std::string out;
    out += "accepted=" + std::to_string(accepted) + "\n";
    out += "rejected_malformed=" + std::to_string(rejected_malformed) + "\n";
    out += "rejected_unmatched_tower=" + std::to_string(rejected_unmatched_tower) + "\n";
    out += "rejected_out_of_window=" + std::to_string(rejected_out_of_window) + "\n";
    out += "total=" + std::to_string(total()) + "\n";
    return out;
}

TowerFileResult parse_tower_file(std::string_view bytes) {
    TowerFileResult result;
    std::unordered_map<std::int64_t, std::size_t> seen;
    LineSplitter lines{strip_header(bytes, "lac,")};
    std::string_view line;
    std::string_view fields[4];
    while (lines.next(line)) {
        if (line.empty()) {
            ++result.malformed_rows;
            continue;
        }
        CellTowerId id;
        GeoPoint pos;
        if (!split_fields(line, fields) || !parse_int32(fields[0], id.lac) ||
            !parse_int32(fields[1], id.cell) || !parse_double(fields[2], pos.lon) ||
            !parse_double(fields[3], pos.lat) || !pos.valid()) {
            ++result.malformed_rows;
            continue;
        }
        const std::int64_t key = (static_cast<std::int64_t>(id.lac) << 32) | id.cell;
        if (const auto it = seen.find(key); it != seen.end()) {
            const GeoPoint& prev = result.registry.position(it->second);
            if (prev.lon != pos.lon || prev.lat != pos.lat) {
                throw DataError("tower " + std::to_string(id.lac) + "," + std::to_string(id.cell) +
                                " redefined with conflicting coordinates");
            }
            ++result.duplicate_rows;
            continue;
        }
        seen.emplace(key, result.registry.add(id, pos));
    }
    result.registry.find(CellTowerId{});  // force the index build before sharing
    return result;
}

CdrBatch parse_cdr_file(std::string_view bytes, const StudyWindow& window, int workers) {
    bytes = strip_header(bytes, "user_id,");
    workers = resolve_workers(workers);

    // Newline-aligned chunks; one chunk is the serial reference path.
    std::vector<std::string_view> chunks;
    if (workers <= 1 || bytes.size() < 1 << 16) {
        chunks.push_back(bytes);
    } else {
        std::size_t begin = 0;
        for (int c = 1; c <= workers; ++c) {
            std::size_t end = bytes.size() * static_cast<std::size_t>(c) / workers;
            if (c == workers) {
                end = bytes.size();
            } else {
                const std::size_t nl = bytes.find('\n', end);
                end = nl == std::string_view::npos ? bytes.size() : nl + 1;
            }
            if (end > begin) chunks.push_back(bytes.substr(begin, end - begin));
            begin = end;
        }
    }

    std::vector<ChunkResult> parsed(chunks.size());
    parallel_for(chunks.size(), workers,
                 [&](std::size_t i) { parse_chunk(chunks[i], window, parsed[i]); });

    // Merge chunk user tables in input order.
    CdrBatch batch;
    std::unordered_map<std::string_view, UserIdx> global;
    std::vector<std::vector<UserIdx>> remap(parsed.size());
    for (std::size_t c = 0; c < parsed.size(); ++c) {
        remap[c].resize(parsed[c].users.size());
        for (std::size_t u = 0; u < parsed[c].users.size(); ++u) {
            auto [it, inserted] =
                global.try_emplace(parsed[c].users[u], static_cast<UserIdx>(batch.users.size()));
            if (inserted) batch.users.emplace_back(parsed[c].users[u]);
            remap[c][u] = it->second;
        }
        batch.report.accepted += parsed[c].report.accepted;
        batch.report.rejected_malformed += parsed[c].report.rejected_malformed;
        batch.report.rejected_out_of_window += parsed[c].report.rejected_out_of_window;
    }

    // Per-(chunk, user) write offsets so the scatter keeps input order.
    const std::size_t n_users = batch.users.size();
    std::vector<std::size_t> user_totals(n_users, 0);
    for (std::size_t c = 0; c < parsed.size(); ++c) {
        for (std::size_t u = 0; u < parsed[c].users.size(); ++u) {
            user_totals[remap[c][u]] += parsed[c].user_counts[u];
        }
    }
    batch.user_spans.resize(n_users);
    std::size_t offset = 0;
    for (std::size_t u = 0; u < n_users; ++u) {
        batch.user_spans[u] = {offset, offset + user_totals[u]};
        offset += user_totals[u];
    }
    std::vector<std::vector<std::size_t>> chunk_offsets(parsed.size());
    {
        std::vector<std::size_t> cursor(n_users);
        for (std::size_t u = 0; u < n_users; ++u) cursor[u] = batch.user_spans[u].first;
        for (std::size_t c = 0; c < parsed.size(); ++c) {
            chunk_offsets[c].resize(parsed[c].users.size());
            for (std::size_t u = 0; u < parsed[c].users.size(); ++u) {
                chunk_offsets[c][u] = cursor[remap[c][u]];
                cursor[remap[c][u]] += parsed[c].user_counts[u];
            }
        }
    }

    batch.records.resize(offset);
    parallel_for(parsed.size(), workers, [&](std::size_t c) {
        std::vector<std::size_t> cursor = chunk_offsets[c];
        for (const CdrRecord& rec : parsed[c].records) {
            CdrRecord out = rec;
            out.user = remap[c][rec.user];
            batch.records[cursor[rec.user]++] = out;
        }
    });

    parallel_for(n_users, workers, [&](std::size_t u) {
        const auto [b, e] = batch.user_spans[u];
        std::stable_sort(batch.records.begin() + b, batch.records.begin() + e,
                         [](const CdrRecord& a, const CdrRecord& b) { return a.time < b.time; });
    });
    return batch;
}

std::vector<std::size_t> geolocate(CdrBatch& batch, const TowerRegistry& registry) {
    if (registry.empty() && !batch.records.empty()) {
        throw DataError("geolocate: empty tower registry");
    }
    std::vector<CdrRecord> kept;
    kept.reserve(batch.records.size());
    std::vector<std::size_t> tower_idx;
    tower_idx.reserve(batch.records.size());
    std::size_t dropped = 0;
    for (std::size_t u = 0; u < batch.user_count(); ++u) {
        const auto [b, e] = batch.user_spans[u];
        const std::size_t begin = kept.size();
        for (std::size_t i = b; i < e; ++i) {
            const std::size_t idx = registry.find(batch.records[i].tower);
            if (idx == TowerRegistry::npos) {
                ++dropped;
                continue;
            }
            kept.push_back(batch.records[i]);
            tower_idx.push_back(idx);
        }
        batch.user_spans[u] = {begin, kept.size()};
    }
    batch.records = std::move(kept);
    batch.report.rejected_unmatched_tower += dropped;
    batch.report.accepted -= dropped;
    return tower_idx;
}

std::string event_token(EventType e) {
    switch (e) {
        case EventType::VoiceIncoming: return "VOICE_IN";
        case EventType::VoiceOutgoing: return "VOICE_OUT";
        case EventType::DataAccess: return "DATA";
    }
    return "DATA";
}

std::string serialize_cdr(const CdrBatch& batch) {
    std::string out;
    out.reserve(batch.records.size() * 48);
    for (const CdrRecord& rec : batch.records) {
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

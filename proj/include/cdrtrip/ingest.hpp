#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cdrtrip/core.hpp"

namespace cdrtrip {

class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Read-only after construction; shared freely across workers.
class TowerRegistry {
  public:
    // Returns the dense index for a tower, inserting if new.
    std::size_t add(CellTowerId id, GeoPoint position);
    // npos when unknown.
    std::size_t find(CellTowerId id) const;
    const GeoPoint& position(std::size_t idx) const { return positions_[idx]; }
    CellTowerId id(std::size_t idx) const { return ids_[idx]; }
    std::size_t size() const { return ids_.size(); }
    bool empty() const { return ids_.empty(); }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  private:
    void reindex() const;
    std::vector<CellTowerId> ids_;
    std::vector<GeoPoint> positions_;
    mutable std::vector<std::uint32_t> order_;  // sorted by id, lazily rebuilt
    mutable bool sorted_ = false;
};

struct IngestReport {
    std::size_t accepted = 0;
    std::size_t rejected_malformed = 0;
    std::size_t rejected_unmatched_tower = 0;
    std::size_t rejected_out_of_window = 0;

    std::size_t total() const {
        return accepted + rejected_malformed + rejected_unmatched_tower + rejected_out_of_window;
    }
    std::string to_key_values() const;
    bool operator==(const IngestReport&) const = default;
};

struct TowerFileResult {
    TowerRegistry registry;
    std::size_t duplicate_rows = 0;
    std::size_t malformed_rows = 0;
};

// Accepted records grouped per user (first-appearance order), each group
// sorted by time with input order preserved on ties.
struct CdrBatch {
    std::vector<std::string> users;
    std::vector<std::pair<std::size_t, std::size_t>> user_spans;  // [begin, end) into records
    std::vector<CdrRecord> records;
    IngestReport report;

    std::span<const CdrRecord> records_of(UserIdx u) const {
        const auto [b, e] = user_spans[u];
        return {records.data() + b, e - b};
    }
    std::size_t user_count() const { return users.size(); }
};

// Tower file: CSV "lac,cell_id,lon,lat", header optional. Rows repeating an
// id with identical coordinates are counted as duplicates; conflicting
// coordinates are a hard error (DataError).
TowerFileResult parse_tower_file(std::string_view bytes);

// CDR file: CSV "user_id,lac,cell_id,timestamp,event" with ISO-8601
// timestamps and event in {VOICE_IN, VOICE_OUT, DATA}; header optional.
// Records are validated against the window but not yet against the registry.
// workers > 1 parses newline-aligned chunks in parallel; the result is
// identical to the serial reference path.
CdrBatch parse_cdr_file(std::string_view bytes, const StudyWindow& window, int workers = 1);

// Drops records whose tower is missing from the registry, updating the
// report. Output indices parallel batch.records; tower_idx[i] is the dense
// registry index of batch.records[i]'s tower.
std::vector<std::size_t> geolocate(CdrBatch& batch, const TowerRegistry& registry);

std::string serialize_cdr(const CdrBatch& batch);

std::string event_token(EventType e);

}  // namespace cdrtrip

#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace cdrtrip {

// Seconds since the Unix epoch, interpreted as naive local time of the study
// area. CDR timestamps are second-granular; sub-second input is truncated.
using Timestamp = std::int64_t;

constexpr std::int64_t kSecondsPerHour = 3600;
constexpr std::int64_t kSecondsPerDay = 86400;
constexpr double kEarthRadiusKm = 6371.0;

struct StudyWindow {
    Timestamp start = 0;
    Timestamp end = 0;  // exclusive

    bool contains(Timestamp t) const { return t >= start && t < end; }
    std::int64_t hours() const { return (end - start) / kSecondsPerHour; }
    std::int64_t days() const { return (end - start) / kSecondsPerDay; }
};

// Hour offset from the study start.
struct HourBin {
    std::int32_t index = 0;
    auto operator<=>(const HourBin&) const = default;
};

struct GeoPoint {
    double lon = 0.0;  // degrees, WGS84
    double lat = 0.0;

    bool valid() const {
        return lon >= -180.0 && lon <= 180.0 && lat >= -90.0 && lat <= 90.0;
    }
};

struct CellTowerId {
    std::int32_t lac = 0;
    std::int32_t cell = 0;
    auto operator<=>(const CellTowerId&) const = default;
};

enum class EventType : std::uint8_t { VoiceIncoming, VoiceOutgoing, DataAccess };

inline bool is_voice(EventType e) { return e != EventType::DataAccess; }

// Dense per-batch user index; the id string lives in the batch's user table.
using UserIdx = std::uint32_t;

struct CdrRecord {
    UserIdx user = 0;
    CellTowerId tower;
    Timestamp time = 0;
    EventType event = EventType::DataAccess;
};

class OrderingError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class OutOfWindowError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

double haversine_km(const GeoPoint& a, const GeoPoint& b);

// floor((t - study_start) / 3600); throws OutOfWindowError outside the window.
HourBin hour_bin(Timestamp t, const StudyWindow& window);

// 1 iff the gap strictly exceeds tau; throws OrderingError if t_next < t_i.
int eti_flag(Timestamp t_i, Timestamp t_next, std::int64_t tau);

// Calendar helpers for the naive local timeline.
std::int64_t day_index(Timestamp t);            // days since epoch, floor
std::int64_t clock_seconds(Timestamp t);        // seconds since local midnight
int hour_of_day(Timestamp t);                   // 0..23
int day_of_week(Timestamp t);                   // 0 = Sunday .. 6 = Saturday
bool is_weekend(Timestamp t);

// "YYYY-MM-DDTHH:MM:SS" (space accepted as separator, trailing 'Z' ignored).
std::optional<Timestamp> parse_iso8601(std::string_view text);
std::string format_iso8601(Timestamp t);

}  // namespace cdrtrip

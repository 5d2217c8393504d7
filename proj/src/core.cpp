#include "cdrtrip/core.hpp"

#include <cmath>
#include <charconv>

namespace cdrtrip {

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

// Howard Hinnant's civil-date algorithms.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

bool parse_fixed_uint(std::string_view s, std::size_t pos, std::size_t len, unsigned& out) {
    unsigned v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (i >= s.size() || s[i] < '0' || s[i] > '9') return false;
        v = v * 10 + static_cast<unsigned>(s[i] - '0');
    }
    out = v;
    return true;
}

unsigned days_in_month(std::int64_t y, unsigned m) {
    static constexpr unsigned lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2) {
        const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
        return leap ? 29 : 28;
    }
    return lengths[m - 1];
}

}  // namespace

double haversine_km(const GeoPoint& a, const GeoPoint& b) {
    const double lat1 = a.lat * kDegToRad;
    const double lat2 = b.lat * kDegToRad;
    const double dlat = (b.lat - a.lat) * kDegToRad;
    const double dlon = (b.lon - a.lon) * kDegToRad;
    const double sin_lat = std::sin(dlat / 2.0);
    const double sin_lon = std::sin(dlon / 2.0);
    double h = sin_lat * sin_lat + std::cos(lat1) * std::cos(lat2) * sin_lon * sin_lon;
    if (h > 1.0) h = 1.0;
    if (h < 0.0) h = 0.0;
    return kEarthRadiusKm * 2.0 * std::atan2(std::sqrt(h), std::sqrt(1.0 - h));
}

HourBin hour_bin(Timestamp t, const StudyWindow& window) {
    if (!window.contains(t)) {
        throw OutOfWindowError("timestamp " + std::to_string(t) + " outside study window");
    }
    return HourBin{static_cast<std::int32_t>((t - window.start) / kSecondsPerHour)};
}

int eti_flag(Timestamp t_i, Timestamp t_next, std::int64_t tau) {
    if (t_next < t_i) {
        throw OrderingError("eti_flag: t_next precedes t_i");
    }
    return (t_next - t_i) > tau ? 1 : 0;
}

std::int64_t day_index(Timestamp t) { return floor_div(t, kSecondsPerDay); }

std::int64_t clock_seconds(Timestamp t) {
    std::int64_t r = t % kSecondsPerDay;
    if (r < 0) r += kSecondsPerDay;
    return r;
}

int hour_of_day(Timestamp t) { return static_cast<int>(clock_seconds(t) / kSecondsPerHour); }

int day_of_week(Timestamp t) {
    // Epoch day 0 is a Thursday.
    return static_cast<int>((day_index(t) + 4) % 7);
}

bool is_weekend(Timestamp t) {
    const int dow = day_of_week(t);
    return dow == 0 || dow == 6;
}

std::optional<Timestamp> parse_iso8601(std::string_view text) {
    while (!text.empty() && (text.back() == 'Z' || text.back() == ' ' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    if (text.size() != 19) return std::nullopt;
    if (text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
        text[13] != ':' || text[16] != ':') {
        return std::nullopt;
    }
    unsigned year, month, day, hour, minute, second;
    if (!parse_fixed_uint(text, 0, 4, year) || !parse_fixed_uint(text, 5, 2, month) ||
        !parse_fixed_uint(text, 8, 2, day) || !parse_fixed_uint(text, 11, 2, hour) ||
        !parse_fixed_uint(text, 14, 2, minute) || !parse_fixed_uint(text, 17, 2, second)) {
        return std::nullopt;
    }
    if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month) ||
        hour > 23 || minute > 59 || second > 59) {
        return std::nullopt;
    }
    return days_from_civil(year, month, day) * kSecondsPerDay +
           hour * kSecondsPerHour + minute * 60 + second;
}

std::string format_iso8601(Timestamp t) {
    std::int64_t y;
    unsigned m, d;
    civil_from_days(day_index(t), y, m, d);
    const std::int64_t cs = clock_seconds(t);
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lld",
                  static_cast<long long>(y), m, d,
                  static_cast<long long>(cs / 3600),
                  static_cast<long long>((cs / 60) % 60),
                  static_cast<long long>(cs % 60));
    return std::string(buf);
}

}  // namespace cdrtrip

#pragma once

#include <charconv>
#include <filesystem>
#include <string>
#include <string_view>

namespace cdrtrip {

// Shortest representation that round-trips the exact double.
inline void append_double(std::string& out, double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, r.ptr);
}

inline std::string format_double(double v) {
    std::string out;
    append_double(out, v);
    return out;
}

std::string read_file(const std::filesystem::path& path);

// Write-temp-then-rename so partially written artifacts never appear.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace cdrtrip

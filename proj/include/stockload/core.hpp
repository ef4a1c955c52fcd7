#pragma once

// Shared error types, calendar arithmetic, and small parsing/formatting helpers.

#include <charconv>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace stockload {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

// Bad or inconsistent configuration (missing files, invalid marginals, ...).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (parse failures, misaligned series, ...).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A violated internal invariant; indicates a bug, not bad input.
struct InternalError : std::logic_error {
    using std::logic_error::logic_error;
};

// Timestamps are seconds since 1970-01-01 00:00:00 in local standard time.
// No DST shift is applied anywhere in the library; input files are expected
// to already be in local standard time (grid settlement convention).
using EpochSeconds = std::int64_t;

inline constexpr EpochSeconds kSecondsPerHour = 3600;
inline constexpr EpochSeconds kSecondsPerDay = 86400;

struct CivilDateTime {
    int year;
    int month;   // 1..12
    int day;     // 1..31
    int hour;    // 0..23
    int minute;  // 0..59
    int second;  // 0..59
};

inline EpochSeconds civil_to_epoch(int year, int month, int day,
                                   int hour = 0, int minute = 0, int second = 0) {
    using namespace std::chrono;
    const sys_days d = year_month_day{std::chrono::year{year}, std::chrono::month{unsigned(month)},
                                      std::chrono::day{unsigned(day)}};
    return duration_cast<seconds>(d.time_since_epoch()).count()
           + hour * 3600LL + minute * 60LL + second;
}

inline CivilDateTime epoch_to_civil(EpochSeconds t) {
    using namespace std::chrono;
    EpochSeconds days = t / kSecondsPerDay;
    EpochSeconds rem = t % kSecondsPerDay;
    if (rem < 0) {
        rem += kSecondsPerDay;
        days -= 1;
    }
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    CivilDateTime c{};
    c.year = int(ymd.year());
    c.month = int(unsigned(ymd.month()));
    c.day = int(unsigned(ymd.day()));
    c.hour = int(rem / 3600);
    c.minute = int((rem % 3600) / 60);
    c.second = int(rem % 60);
    return c;
}

inline int month_of(EpochSeconds t) { return epoch_to_civil(t).month; }

// ISO weekday: 1 = Monday .. 7 = Sunday.
inline int iso_weekday(EpochSeconds t) {
    using namespace std::chrono;
    EpochSeconds days = t / kSecondsPerDay;
    if (t % kSecondsPerDay < 0) days -= 1;
    const weekday wd{sys_days{std::chrono::days{days}}};
    return int(wd.iso_encoding());
}

inline EpochSeconds day_start(EpochSeconds t) {
    EpochSeconds rem = t % kSecondsPerDay;
    if (rem < 0) rem += kSecondsPerDay;
    return t - rem;
}

// ISO-8601 with seconds resolution, e.g. "2021-02-15T06:00:00".
inline std::string format_timestamp(EpochSeconds t) {
    const CivilDateTime c = epoch_to_civil(t);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d",
                  c.year, c.month, c.day, c.hour, c.minute, c.second);
    return buf;
}

namespace detail {

inline bool parse_int_field(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    const char* first = s.data() + pos;
    const auto [ptr, ec] = std::from_chars(first, first + len, out);
    return ec == std::errc{} && ptr == first + len;
}

}  // namespace detail

// Accepts "YYYY-MM-DDTHH:MM:SS" and "YYYY-MM-DD HH:MM:SS"; seconds optional.
inline EpochSeconds parse_timestamp(std::string_view s) {
    int y, mo, d, h, mi, se = 0;
    const bool ok =
        (s.size() == 19 || s.size() == 16)
        && detail::parse_int_field(s, 0, 4, y) && s[4] == '-'
        && detail::parse_int_field(s, 5, 2, mo) && s[7] == '-'
        && detail::parse_int_field(s, 8, 2, d) && (s[10] == 'T' || s[10] == ' ')
        && detail::parse_int_field(s, 11, 2, h) && s[13] == ':'
        && detail::parse_int_field(s, 14, 2, mi)
        && (s.size() == 16 || (s[16] == ':' && detail::parse_int_field(s, 17, 2, se)));
    if (!ok || mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || se > 59) {
        throw DataError("invalid timestamp '" + std::string(s) + "'");
    }
    return civil_to_epoch(y, mo, d, h, mi, se);
}

// Shortest decimal that round-trips the exact double; keeps emitted CSV/JSON
// byte-stable across runs.
inline std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw InternalError("format_double failed");
    return std::string(buf, ptr);
}

inline double parse_double(std::string_view s, const std::string& context) {
    double v{};
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    while (last != first && (*(last - 1) == ' ' || *(last - 1) == '\t' || *(last - 1) == '\r')) --last;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || first == last) {
        throw DataError(context + ": expected a number, got '" + std::string(s) + "'");
    }
    return v;
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string to_hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string read_file_to_string(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path.string());
    std::string out;
    in.seekg(0, std::ios::end);
    out.resize(std::size_t(in.tellg()));
    in.seekg(0);
    in.read(out.data(), std::streamsize(out.size()));
    return out;
}

inline std::uint64_t hash_file(const std::filesystem::path& path) {
    return fnv1a64(read_file_to_string(path));
}

}  // namespace stockload

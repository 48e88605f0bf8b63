#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "citywell/error.hpp"

namespace citywell {

// Calendar days are plain integers: days since 1970-01-01 (proleptic Gregorian).
// Keeps series indexing, gaps, and range arithmetic trivial.
using Day = int32_t;

struct CivilDate {
    int year;
    int month;  // 1..12
    int day;    // 1..31
};

// Door-number algorithms for civil<->serial conversion (Hinnant).
constexpr Day days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<Day>(era * 146097 + static_cast<int>(doe) - 719468);
}

constexpr CivilDate civil_from_days(Day z) {
    z += 719468;
    const int era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int y = static_cast<int>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return {y + (m <= 2), static_cast<int>(m), static_cast<int>(d)};
}

inline int year_of(Day d) { return civil_from_days(d).year; }

// "YYYY-MM-DD"
inline Day parse_day(std::string_view s) {
    int y = 0, m = 0, d = 0;
    if (s.size() != 10 || std::sscanf(std::string(s).c_str(), "%d-%d-%d", &y, &m, &d) != 3 ||
        m < 1 || m > 12 || d < 1 || d > 31) {
        throw InputError("bad date '" + std::string(s) + "' (expected YYYY-MM-DD)");
    }
    return days_from_civil(y, m, d);
}

inline std::string format_day(Day day) {
    CivilDate c = civil_from_days(day);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", c.year, c.month, c.day);
    return buf;
}

// Inclusive day range.
struct DateRange {
    Day first;
    Day last;

    bool contains(Day d) const { return d >= first && d <= last; }
    int length() const { return static_cast<int>(last - first) + 1; }
};

inline DateRange parse_range(std::string_view a, std::string_view b) {
    DateRange r{parse_day(a), parse_day(b)};
    if (r.last < r.first) throw InputError("empty date range " + std::string(a) + ".." + std::string(b));
    return r;
}

// Fixed UTC offset in seconds. Day boundaries use a single configured offset;
// DST shifts are out of scope for daily bucketing.
struct TzOffset {
    int32_t seconds = 0;

    Day day_of(int64_t epoch_seconds) const {
        int64_t local = epoch_seconds + seconds;
        // floor division toward -inf
        int64_t d = local >= 0 ? local / 86400 : -((-local + 86399) / 86400);
        return static_cast<Day>(d);
    }
};

// Accepts "UTC", "Z", "+HH:MM", "-HH:MM", "+HHMM".
inline TzOffset parse_tz(std::string_view s) {
    if (s.empty() || s == "UTC" || s == "utc" || s == "Z") return {0};
    if (s[0] != '+' && s[0] != '-') throw InputError("bad timezone '" + std::string(s) + "'");
    int sign = s[0] == '-' ? -1 : 1;
    std::string rest(s.substr(1));
    int hh = 0, mm = 0;
    if (rest.size() == 5 && rest[2] == ':') {
        hh = std::stoi(rest.substr(0, 2));
        mm = std::stoi(rest.substr(3, 2));
    } else if (rest.size() == 4) {
        hh = std::stoi(rest.substr(0, 2));
        mm = std::stoi(rest.substr(2, 2));
    } else {
        throw InputError("bad timezone '" + std::string(s) + "'");
    }
    if (hh > 14 || mm > 59) throw InputError("timezone offset out of range: " + std::string(s));
    return {sign * (hh * 3600 + mm * 60)};
}

}  // namespace citywell

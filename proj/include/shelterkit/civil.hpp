#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace shelterkit {

/// Calendar date stored as days since 1970-01-01 (negative for earlier dates).
struct Date {
    std::int32_t days = 0;
    auto operator<=>(const Date&) const = default;
};

inline Date operator+(Date d, int n) { return Date{d.days + n}; }
inline Date operator-(Date d, int n) { return Date{d.days - n}; }
inline int operator-(Date a, Date b) { return a.days - b.days; }

/// Seconds since 1970-01-01T00:00:00Z.
using EpochSeconds = std::int64_t;

constexpr std::int64_t kSecondsPerDay = 86400;

/// Fixed offset from UTC used to bucket timestamps into stay dates.
/// The default (offset 0) buckets in UTC.
struct BucketTimezone {
    int offset_minutes = 0;
};

bool valid_ymd(int year, int month, int day);

/// Throws ConfigError on an invalid calendar date.
Date make_date(int year, int month, int day);

void civil_from_date(Date d, int& year, int& month, int& day);

/// Calendar date of a timestamp under the given bucketing timezone.
Date date_of(EpochSeconds t, BucketTimezone tz = {});

/// UTC timestamp at the given time of day on a date.
EpochSeconds seconds_at(Date d, int hour, int minute, int second = 0);

/// "YYYY-MM-DD"
std::string format_date(Date d);
std::optional<Date> parse_date(std::string_view text);

/// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_timestamp(EpochSeconds t);
std::optional<EpochSeconds> parse_timestamp(std::string_view text);

}  // namespace shelterkit

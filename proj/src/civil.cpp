#include "shelterkit/civil.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

#include "shelterkit/errors.hpp"

namespace shelterkit {

namespace {

std::chrono::year_month_day ymd_of(Date d) {
    return std::chrono::year_month_day{
        std::chrono::sys_days{std::chrono::days{d.days}}};
}

bool parse_int_field(std::string_view text, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > text.size()) return false;
    const char* first = text.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + len, out);
    return ec == std::errc{} && ptr == first + len;
}

}  // namespace

bool valid_ymd(int year, int month, int day) {
    if (month < 1 || month > 12 || day < 1) return false;
    const std::chrono::year_month_day ymd{std::chrono::year{year},
                                          std::chrono::month{unsigned(month)},
                                          std::chrono::day{unsigned(day)}};
    return ymd.ok();
}

Date make_date(int year, int month, int day) {
    if (!valid_ymd(year, month, day)) {
        char buf[48];
        std::snprintf(buf, sizeof buf, "invalid date %04d-%02d-%02d", year, month, day);
        throw ConfigError(buf);
    }
    const std::chrono::year_month_day ymd{std::chrono::year{year},
                                          std::chrono::month{unsigned(month)},
                                          std::chrono::day{unsigned(day)}};
    return Date{static_cast<std::int32_t>(
        std::chrono::sys_days{ymd}.time_since_epoch().count())};
}

void civil_from_date(Date d, int& year, int& month, int& day) {
    const auto ymd = ymd_of(d);
    year = int(ymd.year());
    month = int(unsigned(ymd.month()));
    day = int(unsigned(ymd.day()));
}

Date date_of(EpochSeconds t, BucketTimezone tz) {
    const std::int64_t shifted = t + std::int64_t{tz.offset_minutes} * 60;
    // floor division so pre-1970 timestamps bucket correctly
    std::int64_t d = shifted / kSecondsPerDay;
    if (shifted % kSecondsPerDay < 0) --d;
    return Date{static_cast<std::int32_t>(d)};
}

EpochSeconds seconds_at(Date d, int hour, int minute, int second) {
    return EpochSeconds{d.days} * kSecondsPerDay + hour * 3600 + minute * 60 + second;
}

std::string format_date(Date d) {
    int y, m, day;
    civil_from_date(d, y, m, day);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, day);
    return buf;
}

std::optional<Date> parse_date(std::string_view text) {
    // YYYY-MM-DD
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    int y, m, d;
    if (!parse_int_field(text, 0, 4, y) || !parse_int_field(text, 5, 2, m) ||
        !parse_int_field(text, 8, 2, d)) {
        return std::nullopt;
    }
    if (!valid_ymd(y, m, d)) return std::nullopt;
    return make_date(y, m, d);
}

std::string format_timestamp(EpochSeconds t) {
    const Date d = date_of(t);
    const std::int64_t rem = t - EpochSeconds{d.days} * kSecondsPerDay;
    int y, m, day;
    civil_from_date(d, y, m, day);
    char buf[24];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", y, m, day,
                  int(rem / 3600), int(rem / 60 % 60), int(rem % 60));
    return buf;
}

std::optional<EpochSeconds> parse_timestamp(std::string_view text) {
    // YYYY-MM-DDTHH:MM:SSZ
    if (text.size() != 20 || text[4] != '-' || text[7] != '-' || text[10] != 'T' ||
        text[13] != ':' || text[16] != ':' || text[19] != 'Z') {
        return std::nullopt;
    }
    int y, mo, d, h, mi, s;
    if (!parse_int_field(text, 0, 4, y) || !parse_int_field(text, 5, 2, mo) ||
        !parse_int_field(text, 8, 2, d) || !parse_int_field(text, 11, 2, h) ||
        !parse_int_field(text, 14, 2, mi) || !parse_int_field(text, 17, 2, s)) {
        return std::nullopt;
    }
    if (!valid_ymd(y, mo, d) || h > 23 || mi > 59 || s > 59 || h < 0 || mi < 0 || s < 0) {
        return std::nullopt;
    }
    return seconds_at(make_date(y, mo, d), h, mi, s);
}

}  // namespace shelterkit

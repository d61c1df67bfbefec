#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "shelterkit/civil.hpp"

namespace shelterkit {

enum class EventKind : std::uint8_t { Sleep, Bar, Log, Counsellor };

constexpr std::size_t kKeywordCategories = 5;

/// Keyword category order used everywhere: police, ems, health, violence, addiction.
extern const std::array<std::string_view, kKeywordCategories> kKeywordNames;

const char* to_token(EventKind kind);
std::optional<EventKind> kind_from_token(std::string_view token);

/// One timestamped interaction. The owning ClientHistory carries the client id.
struct EventRecord {
    EpochSeconds timestamp = 0;
    EventKind kind = EventKind::Sleep;
    std::array<std::int32_t, kKeywordCategories> keyword_counts{};

    bool operator==(const EventRecord&) const = default;
};

struct ClientHistory {
    std::string client_id;
    int age = 0;
    /// Ascending by timestamp; input order preserved for equal timestamps.
    std::vector<EventRecord> events;

    bool operator==(const ClientHistory&) const = default;
};

struct Dataset {
    std::map<std::string, ClientHistory> clients;
    /// Observation window. Configuration, not content: parse derives it from the
    /// data, the generator copies it from its spec. Excluded from equality.
    Date observation_start{};
    Date observation_end{};

    std::size_t total_events() const;

    friend bool operator==(const Dataset& a, const Dataset& b) {
        return a.clients == b.clients;
    }
};

struct ParseWarning {
    std::size_t line = 0;
    std::string message;
};

extern const std::string_view kRecordsCsvHeader;

/// Reads the records CSV (see kRecordsCsvHeader). Throws ParseError with the
/// offending line number on malformed rows. Duplicate rows are retained.
Dataset parse_records(std::istream& in, std::vector<ParseWarning>* warnings = nullptr);
Dataset load_records(const std::string& path, std::vector<ParseWarning>* warnings = nullptr);

void serialize_records(const Dataset& dataset, std::ostream& out);
std::string serialize_records(const Dataset& dataset);
void save_records(const Dataset& dataset, const std::string& path);

/// Calendar date (per bucketing timezone) of the earliest Sleep event.
std::optional<Date> first_sleep_date(const ClientHistory& history, BucketTimezone tz = {});

struct CensorStats {
    std::size_t removed_no_sleep = 0;
    std::size_t removed_before = 0;
    std::size_t removed_after = 0;
    std::size_t retained = 0;
};

struct CensorResult {
    Dataset dataset;
    CensorStats stats;
};

/// Keeps exactly the clients whose first sleep date d satisfies
/// min_first_sleep <= d <= max_first_sleep. Clients with no Sleep events are
/// dropped. Throws ConfigError on inverted bounds.
CensorResult censor(const Dataset& dataset, Date min_first_sleep, Date max_first_sleep,
                    BucketTimezone tz = {});

}  // namespace shelterkit

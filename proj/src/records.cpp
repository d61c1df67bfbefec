#include "shelterkit/records.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "shelterkit/errors.hpp"

namespace shelterkit {

const std::array<std::string_view, kKeywordCategories> kKeywordNames = {
    "police", "ems", "health", "violence", "addiction"};

const std::string_view kRecordsCsvHeader =
    "client_id,age,timestamp,kind,police,ems,health,violence,addiction";

const char* to_token(EventKind kind) {
    switch (kind) {
        case EventKind::Sleep: return "SLEEP";
        case EventKind::Bar: return "BAR";
        case EventKind::Log: return "LOG";
        case EventKind::Counsellor: return "COUNSELLOR";
    }
    return "?";
}

std::optional<EventKind> kind_from_token(std::string_view token) {
    if (token == "SLEEP") return EventKind::Sleep;
    if (token == "BAR") return EventKind::Bar;
    if (token == "LOG") return EventKind::Log;
    if (token == "COUNSELLOR") return EventKind::Counsellor;
    return std::nullopt;
}

std::size_t Dataset::total_events() const {
    std::size_t n = 0;
    for (const auto& [id, client] : clients) n += client.events.size();
    return n;
}

namespace {

void split_csv_line(std::string_view line, std::vector<std::string_view>& fields) {
    fields.clear();
    std::size_t start = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == ',') {
            fields.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    fields.push_back(line.substr(start));
}

bool parse_nonneg_int(std::string_view text, std::int64_t& out) {
    if (text.empty()) return false;
    const char* first = text.data();
    auto [ptr, ec] = std::from_chars(first, first + text.size(), out);
    return ec == std::errc{} && ptr == first + text.size() && out >= 0;
}

}  // namespace

Dataset parse_records(std::istream& in, std::vector<ParseWarning>* warnings) {
    Dataset dataset;
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) return dataset;  // empty source: zero clients
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kRecordsCsvHeader) {
        throw ParseError("expected header '" + std::string(kRecordsCsvHeader) + "'", line_no);
    }

    std::vector<std::string_view> fields;
    bool have_events = false;
    EpochSeconds min_ts = 0, max_ts = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        split_csv_line(line, fields);
        if (fields.size() != 4 + kKeywordCategories) {
            throw ParseError("expected 9 fields, got " + std::to_string(fields.size()), line_no);
        }
        if (fields[0].empty()) throw ParseError("empty client_id", line_no);

        std::int64_t age = 0;
        if (!parse_nonneg_int(fields[1], age)) {
            throw ParseError("bad age '" + std::string(fields[1]) + "'", line_no);
        }
        const auto ts = parse_timestamp(fields[2]);
        if (!ts) throw ParseError("bad timestamp '" + std::string(fields[2]) + "'", line_no);
        const auto kind = kind_from_token(fields[3]);
        if (!kind) throw ParseError("unknown kind '" + std::string(fields[3]) + "'", line_no);

        EventRecord record;
        record.timestamp = *ts;
        record.kind = *kind;
        for (std::size_t c = 0; c < kKeywordCategories; ++c) {
            std::int64_t count = 0;
            if (!parse_nonneg_int(fields[4 + c], count)) {
                throw ParseError("bad " + std::string(kKeywordNames[c]) + " count '" +
                                     std::string(fields[4 + c]) + "'",
                                 line_no);
            }
            record.keyword_counts[c] = static_cast<std::int32_t>(count);
        }

        auto [it, inserted] = dataset.clients.try_emplace(std::string(fields[0]));
        ClientHistory& client = it->second;
        if (inserted) {
            client.client_id = fields[0];
            client.age = static_cast<int>(age);
        } else if (client.age != age && warnings) {
            // first occurrence wins; disagreement is worth flagging but not fatal
            warnings->push_back({line_no, "age mismatch for client '" + client.client_id +
                                              "': keeping " + std::to_string(client.age)});
        }
        client.events.push_back(record);

        if (!have_events || record.timestamp < min_ts) min_ts = record.timestamp;
        if (!have_events || record.timestamp > max_ts) max_ts = record.timestamp;
        have_events = true;
    }

    for (auto& [id, client] : dataset.clients) {
        std::stable_sort(client.events.begin(), client.events.end(),
                         [](const EventRecord& a, const EventRecord& b) {
                             return a.timestamp < b.timestamp;
                         });
    }
    if (have_events) {
        dataset.observation_start = date_of(min_ts);
        dataset.observation_end = date_of(max_ts);
    }
    return dataset;
}

Dataset load_records(const std::string& path, std::vector<ParseWarning>* warnings) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return parse_records(in, warnings);
}

void serialize_records(const Dataset& dataset, std::ostream& out) {
    out << kRecordsCsvHeader << '\n';
    for (const auto& [id, client] : dataset.clients) {
        for (const EventRecord& e : client.events) {
            out << id << ',' << client.age << ',' << format_timestamp(e.timestamp) << ','
                << to_token(e.kind);
            for (std::int32_t count : e.keyword_counts) out << ',' << count;
            out << '\n';
        }
    }
}

std::string serialize_records(const Dataset& dataset) {
    std::ostringstream out;
    serialize_records(dataset, out);
    return out.str();
}

void save_records(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    serialize_records(dataset, out);
    if (!out) throw IoError("write failed for '" + path + "'");
}

std::optional<Date> first_sleep_date(const ClientHistory& history, BucketTimezone tz) {
    for (const EventRecord& e : history.events) {
        if (e.kind == EventKind::Sleep) return date_of(e.timestamp, tz);  // events are sorted
    }
    return std::nullopt;
}

CensorResult censor(const Dataset& dataset, Date min_first_sleep, Date max_first_sleep,
                    BucketTimezone tz) {
    if (min_first_sleep > max_first_sleep) {
        throw ConfigError("censoring bounds inverted: min " + format_date(min_first_sleep) +
                          " > max " + format_date(max_first_sleep));
    }
    CensorResult result;
    result.dataset.observation_start = dataset.observation_start;
    result.dataset.observation_end = dataset.observation_end;
    for (const auto& [id, client] : dataset.clients) {
        const auto first = first_sleep_date(client, tz);
        if (!first) {
            ++result.stats.removed_no_sleep;
        } else if (*first < min_first_sleep) {
            ++result.stats.removed_before;
        } else if (*first > max_first_sleep) {
            ++result.stats.removed_after;
        } else {
            result.dataset.clients.emplace(id, client);
            ++result.stats.retained;
        }
    }
    return result;
}

}  // namespace shelterkit

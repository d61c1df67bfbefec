#pragma once

#include <initializer_list>
#include <string>

#include "shelterkit/records.hpp"

namespace helpers {

inline shelterkit::EventRecord event(shelterkit::EpochSeconds ts,
                                     shelterkit::EventKind kind = shelterkit::EventKind::Sleep,
                                     std::array<std::int32_t, 5> keywords = {}) {
    shelterkit::EventRecord e;
    e.timestamp = ts;
    e.kind = kind;
    e.keyword_counts = keywords;
    return e;
}

/// Sleep at noon UTC on each listed day (days since epoch).
inline shelterkit::ClientHistory sleeper(const std::string& id,
                                         std::initializer_list<std::int32_t> days,
                                         int age = 40) {
    shelterkit::ClientHistory c;
    c.client_id = id;
    c.age = age;
    for (const std::int32_t d : days) {
        c.events.push_back(event(shelterkit::seconds_at(shelterkit::Date{d}, 12, 0)));
    }
    return c;
}

inline shelterkit::Dataset dataset_of(std::initializer_list<shelterkit::ClientHistory> clients) {
    shelterkit::Dataset ds;
    for (const auto& c : clients) ds.clients.emplace(c.client_id, c);
    bool first = true;
    for (const auto& [id, c] : ds.clients) {
        for (const auto& e : c.events) {
            const auto d = shelterkit::date_of(e.timestamp);
            if (first || d < ds.observation_start) ds.observation_start = d;
            if (first || ds.observation_end < d) ds.observation_end = d;
            first = false;
        }
    }
    return ds;
}

}  // namespace helpers

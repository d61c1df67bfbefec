#include <doctest.h>

#include <map>
#include <random>

#include "oracles.hpp"
#include "shelterkit/errors.hpp"
#include "shelterkit/timeline.hpp"
#include "test_helpers.hpp"

using namespace shelterkit;

namespace {

StaySet stays_of(std::initializer_list<std::int32_t> days) {
    StaySet s;
    for (const std::int32_t d : days) s.dates.push_back(Date{d});
    return s;
}

StaySet consecutive_stays(std::int32_t start, int count) {
    StaySet s;
    for (int i = 0; i < count; ++i) s.dates.push_back(Date{start + i});
    return s;
}

ClientHistory random_history(std::mt19937_64& rng, int max_span = 900) {
    ClientHistory c;
    c.client_id = "r";
    c.age = 30;
    std::uniform_int_distribution<int> n_events(1, 120);
    std::uniform_int_distribution<int> day(0, max_span);
    std::uniform_int_distribution<int> minute(0, 24 * 60 - 1);
    std::uniform_int_distribution<int> kind(0, 9);
    const int n = n_events(rng);
    for (int i = 0; i < n; ++i) {
        const int m = minute(rng);
        EventRecord e = helpers::event(seconds_at(Date{day(rng)}, m / 60, m % 60));
        if (kind(rng) > 6) e.kind = EventKind::Log;  // some non-sleep noise
        c.events.push_back(e);
    }
    std::stable_sort(c.events.begin(), c.events.end(),
                     [](const EventRecord& a, const EventRecord& b) {
                         return a.timestamp < b.timestamp;
                     });
    return c;
}

/// Independent stats recomputation used against client_stats.
ClientHistoryStats brute_stats(const ClientHistory& history, int gap_threshold) {
    const auto dates = oracles::brute_stay_dates(history);
    ClientHistoryStats s;
    s.total_stays = dates.size();
    s.total_episodes = 0;
    for (std::size_t i = 0; i < dates.size(); ++i) {
        if (i == 0 || dates[i] - dates[i - 1] >= gap_threshold) ++s.total_episodes;
    }
    s.tenure_days = dates.empty() ? 0 : dates.back() - dates.front();
    s.usage_percentage = 100.0 * double(s.total_stays) / double(std::max(s.tenure_days, 1));
    // group sleep timestamps by date, then diff last-of-date against
    // first-of-next-date
    std::map<std::int32_t, std::pair<EpochSeconds, EpochSeconds>> by_date;
    for (const auto& e : history.events) {
        if (e.kind != EventKind::Sleep) continue;
        const auto d = date_of(e.timestamp).days;
        auto [it, inserted] = by_date.try_emplace(d, e.timestamp, e.timestamp);
        if (!inserted) {
            it->second.first = std::min(it->second.first, e.timestamp);
            it->second.second = std::max(it->second.second, e.timestamp);
        }
    }
    double sum = 0.0;
    std::size_t n = 0;
    for (auto it = by_date.begin(); it != by_date.end(); ++it) {
        const auto next = std::next(it);
        if (next == by_date.end()) break;
        sum += double(next->second.first - it->second.second) / 86400.0;
        ++n;
    }
    if (n > 0) s.average_gap_days = sum / double(n);
    return s;
}

}  // namespace

TEST_SUITE_BEGIN("timeline");

TEST_CASE("derive_stays dedups within a calendar day") {
    ClientHistory c;
    c.client_id = "x";
    c.events.push_back(helpers::event(seconds_at(make_date(2011, 6, 1), 1, 0)));
    c.events.push_back(helpers::event(seconds_at(make_date(2011, 6, 1), 22, 0)));
    const StaySet stays = derive_stays(c);
    REQUIRE(stays.size() == 1);
    CHECK(stays.dates[0] == make_date(2011, 6, 1));
}

TEST_CASE("derive_stays of a sleepless history is empty") {
    ClientHistory c;
    c.client_id = "x";
    c.events.push_back(helpers::event(1000, EventKind::Counsellor));
    CHECK(derive_stays(c).empty());
}

TEST_CASE("derive_stays matches brute-force distinct dates on random histories") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        const ClientHistory c = random_history(rng);
        const StaySet stays = derive_stays(c);
        CHECK(stays.dates == oracles::brute_stay_dates(c));
        for (std::size_t i = 1; i < stays.dates.size(); ++i) {
            CHECK(stays.dates[i - 1] < stays.dates[i]);
        }
    }
}

TEST_CASE("bucketing timezone shifts stay dates") {
    ClientHistory c;
    c.client_id = "x";
    c.events.push_back(helpers::event(seconds_at(make_date(2011, 6, 2), 1, 30)));
    CHECK(derive_stays(c).dates[0] == make_date(2011, 6, 2));
    // 01:30 UTC is the previous calendar day at UTC-7
    CHECK(derive_stays(c, BucketTimezone{-7 * 60}).dates[0] == make_date(2011, 6, 1));
}

TEST_CASE("chronic label boundaries") {
    CHECK(!label_chronic(StaySet{}));
    CHECK(label_chronic(consecutive_stays(100, 180)));
    CHECK(!label_chronic(consecutive_stays(100, 179)));
}

TEST_CASE("every-second-day pattern satisfies the definition") {
    StaySet stays;
    for (int d = 0; d <= 1090; d += 2) stays.dates.push_back(Date{d});  // 546 stays
    REQUIRE(stays.size() == 546);
    const bool expected = oracles::exhaustive_chronic(stays, kFederalChronicRules);
    CHECK(expected);
    CHECK(label_chronic(stays) == expected);
}

TEST_CASE("chronic label equals the exhaustive oracle on random stay sets") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 300; ++trial) {
        const StaySet stays = oracles::random_stayset(rng, 1200);
        CHECK(label_chronic(stays) == oracles::exhaustive_chronic(stays, kFederalChronicRules));
    }
}

TEST_CASE("adding a stay never clears the chronic label") {
    std::mt19937_64 rng(78);
    int flipped = 0;
    for (int trial = 0; trial < 200; ++trial) {
        StaySet stays = oracles::random_stayset(rng, 600);
        if (!label_chronic(stays)) continue;
        std::uniform_int_distribution<std::int32_t> day(-1000, 2000);
        StaySet more = stays;
        const Date extra{day(rng)};
        const auto it = std::lower_bound(more.dates.begin(), more.dates.end(), extra);
        if (it == more.dates.end() || *it != extra) more.dates.insert(it, extra);
        if (!label_chronic(more)) ++flipped;
    }
    CHECK(flipped == 0);
}

TEST_CASE("episode gap boundary: 29 merges, 30 splits") {
    const EpisodeList one = episodes(stays_of({100, 129}));
    REQUIRE(one.size() == 1);
    CHECK(one[0].stay_count == 2);

    const EpisodeList two = episodes(stays_of({100, 130}));
    REQUIRE(two.size() == 2);
    CHECK(two[0].last_stay == Date{100});
    CHECK(two[1].first_stay == Date{130});
}

TEST_CASE("episodes of an empty stay set are empty") {
    CHECK(episodes(StaySet{}).empty());
}

TEST_CASE("episodes partition the stay set exactly") {
    std::mt19937_64 rng(79);
    for (int trial = 0; trial < 50; ++trial) {
        const StaySet stays = oracles::random_stayset(rng, 500);
        const EpisodeList eps = episodes(stays);
        std::size_t total = 0;
        for (std::size_t i = 0; i < eps.size(); ++i) {
            total += eps[i].stay_count;
            CHECK(eps[i].first_stay <= eps[i].last_stay);
            if (i > 0) CHECK(eps[i].first_stay - eps[i - 1].last_stay >= 30);
        }
        CHECK(total == stays.size());
        if (!stays.empty()) {
            CHECK(eps.front().first_stay == stays.dates.front());
            CHECK(eps.back().last_stay == stays.dates.back());
        }
    }
}

TEST_CASE("client_stats of a single stay") {
    const ClientHistory c = helpers::sleeper("x", {500});
    const ClientHistoryStats s = client_stats(c);
    CHECK(s.total_stays == 1);
    CHECK(s.total_episodes == 1);
    CHECK(s.tenure_days == 0);
    CHECK(s.usage_percentage == 100.0);
    CHECK(!s.average_gap_days);
}

TEST_CASE("usage percentage can exceed 100") {
    const ClientHistory c = helpers::sleeper("x", {500, 501});
    const ClientHistoryStats s = client_stats(c);
    CHECK(s.tenure_days == 1);
    CHECK(s.usage_percentage == 200.0);
}

TEST_CASE("client_stats without sleep events is an error") {
    ClientHistory c;
    c.client_id = "x";
    c.events.push_back(helpers::event(1000, EventKind::Bar));
    CHECK_THROWS_AS(client_stats(c), StatsError);
}

TEST_CASE("client_stats matches an independent recomputation on random histories") {
    std::mt19937_64 rng(81);
    int checked = 0;
    while (checked < 10) {
        const ClientHistory c = random_history(rng);
        if (derive_stays(c).empty()) continue;
        ++checked;
        const ClientHistoryStats got = client_stats(c);
        const ClientHistoryStats want = brute_stats(c, 30);
        CHECK(got.total_stays == want.total_stays);
        CHECK(got.total_episodes == want.total_episodes);
        CHECK(got.tenure_days == want.tenure_days);
        CHECK(got.usage_percentage == doctest::Approx(want.usage_percentage).epsilon(1e-12));
        CHECK(got.average_gap_days.has_value() == want.average_gap_days.has_value());
        if (got.average_gap_days) {
            CHECK(*got.average_gap_days ==
                  doctest::Approx(*want.average_gap_days).epsilon(1e-12));
        }
    }
}

TEST_CASE("translation in time changes nothing") {
    std::mt19937_64 rng(82);
    for (int trial = 0; trial < 10; ++trial) {
        ClientHistory c = random_history(rng);
        if (derive_stays(c).empty()) continue;
        ClientHistory shifted = c;
        const int offset_days = 1234;
        for (auto& e : shifted.events) e.timestamp += offset_days * kSecondsPerDay;

        CHECK(label_chronic(derive_stays(c)) == label_chronic(derive_stays(shifted)));
        const ClientHistoryStats a = client_stats(c);
        const ClientHistoryStats b = client_stats(shifted);
        CHECK(a.total_stays == b.total_stays);
        CHECK(a.total_episodes == b.total_episodes);
        CHECK(a.tenure_days == b.tenure_days);
        CHECK(a.usage_percentage == b.usage_percentage);
        CHECK(a.average_gap_days == b.average_gap_days);
    }
}

TEST_CASE("gap modes") {
    // stays on days 0,1 then 40: fractional gaps use real timestamps,
    // integer mode uses whole-day date differences, episode mode uses the
    // 39-day episode separation only
    ClientHistory c;
    c.client_id = "x";
    c.events.push_back(helpers::event(seconds_at(Date{0}, 22, 0)));
    c.events.push_back(helpers::event(seconds_at(Date{1}, 20, 0)));   // 22h later
    c.events.push_back(helpers::event(seconds_at(Date{40}, 21, 0)));  // 39d 1h later

    const auto fractional = client_stats(c, {}, 30, GapMode::FractionalTimestamps);
    const double g1 = 22.0 / 24.0;
    const double g2 = 39.0 + 1.0 / 24.0;
    CHECK(*fractional.average_gap_days == doctest::Approx((g1 + g2) / 2).epsilon(1e-12));

    const auto integer = client_stats(c, {}, 30, GapMode::IntegerDates);
    CHECK(*integer.average_gap_days == doctest::Approx((1.0 + 39.0) / 2).epsilon(1e-12));

    const auto episode = client_stats(c, {}, 30, GapMode::InterEpisode);
    CHECK(*episode.average_gap_days == doctest::Approx(39.0).epsilon(1e-12));

    const auto single = client_stats(helpers::sleeper("y", {7}), {}, 30, GapMode::InterEpisode);
    CHECK(!single.average_gap_days);
}

TEST_CASE("median conventions") {
    std::vector<double> odd{100, 400, 425};
    std::sort(odd.begin(), odd.end());
    CHECK(linear_percentile(odd, 0.5) == 400.0);
    std::vector<double> even{100, 400, 425, 500};
    CHECK(linear_percentile(even, 0.5) == 412.5);
}

TEST_CASE("cohort report over a single client repeats that client's values") {
    const ClientHistory c = helpers::sleeper("x", {0, 1, 2, 50});
    const ClientHistoryStats s = client_stats(c);
    const CohortReport r = cohort_report(std::vector<ClientHistoryStats>{s}, 10);
    CHECK(r.group_size == 1);
    CHECK(r.population_size == 10);
    for (const MeasureSummary* m :
         {&r.total_stays, &r.total_episodes, &r.tenure_days, &r.usage_percentage}) {
        CHECK(m->average == m->median);
        CHECK(m->median == m->p10);
        CHECK(m->p10 == m->p90);
    }
    CHECK(r.total_stays.average == 4.0);
    CHECK(r.tenure_days.average == 50.0);
}

TEST_CASE("cohort percentiles match the sort-and-index oracle") {
    std::mt19937_64 rng(83);
    std::vector<ClientHistoryStats> cohort;
    std::uniform_real_distribution<double> value(0.0, 2000.0);
    for (int i = 0; i < 1000; ++i) {
        ClientHistoryStats s;
        s.total_stays = std::size_t(value(rng));
        s.total_episodes = std::size_t(value(rng) / 100.0);
        s.tenure_days = int(value(rng));
        s.usage_percentage = value(rng) / 10.0;
        s.average_gap_days = value(rng) / 50.0;
        cohort.push_back(s);
    }
    const CohortReport r = cohort_report(cohort, 5000);

    std::vector<double> stays, usage, gaps;
    for (const auto& s : cohort) {
        stays.push_back(double(s.total_stays));
        usage.push_back(s.usage_percentage);
        gaps.push_back(*s.average_gap_days);
    }
    CHECK(r.total_stays.p10 ==
          doctest::Approx(oracles::sort_index_percentile(stays, 0.1)).epsilon(1e-9));
    CHECK(r.total_stays.p90 ==
          doctest::Approx(oracles::sort_index_percentile(stays, 0.9)).epsilon(1e-9));
    CHECK(r.usage_percentage.median ==
          doctest::Approx(oracles::sort_index_percentile(usage, 0.5)).epsilon(1e-9));
    CHECK(r.average_gap_days->p90 ==
          doctest::Approx(oracles::sort_index_percentile(gaps, 0.9)).epsilon(1e-9));

    for (const MeasureSummary* m : {&r.total_stays, &r.total_episodes, &r.tenure_days,
                                    &r.usage_percentage, &*r.average_gap_days}) {
        CHECK(m->p10 <= m->median);
        CHECK(m->median <= m->p90);
    }
}

TEST_CASE("cohort report rejects an empty cohort") {
    CHECK_THROWS_AS(cohort_report({}, 0), StatsError);
}

TEST_SUITE_END();

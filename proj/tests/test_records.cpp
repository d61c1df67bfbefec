#include <doctest.h>

#include <sstream>

#include "shelterkit/errors.hpp"
#include "shelterkit/records.hpp"
#include "shelterkit/synthgen.hpp"
#include "test_helpers.hpp"

using namespace shelterkit;

TEST_SUITE_BEGIN("records");

TEST_CASE("header-only file parses to zero clients") {
    std::istringstream in("client_id,age,timestamp,kind,police,ems,health,violence,addiction\n");
    const Dataset ds = parse_records(in);
    CHECK(ds.clients.empty());
    CHECK(ds.total_events() == 0);
}

TEST_CASE("empty stream parses to zero clients") {
    std::istringstream in("");
    CHECK(parse_records(in).clients.empty());
}

TEST_CASE("rows out of timestamp order come back sorted") {
    std::istringstream in(
        "client_id,age,timestamp,kind,police,ems,health,violence,addiction\n"
        "a,31,2011-05-03T10:00:00Z,SLEEP,0,0,0,0,0\n"
        "a,31,2011-05-01T10:00:00Z,LOG,1,0,0,0,0\n"
        "a,31,2011-05-02T10:00:00Z,SLEEP,0,0,0,0,0\n");
    const Dataset ds = parse_records(in);
    REQUIRE(ds.clients.size() == 1);
    const ClientHistory& c = ds.clients.at("a");
    REQUIRE(c.events.size() == 3);
    CHECK(c.events[0].kind == EventKind::Log);
    CHECK(c.events[1].timestamp < c.events[2].timestamp);
    CHECK(c.age == 31);
}

TEST_CASE("equal timestamps keep input order") {
    std::istringstream in(
        "client_id,age,timestamp,kind,police,ems,health,violence,addiction\n"
        "a,31,2011-05-01T10:00:00Z,LOG,0,0,0,0,0\n"
        "a,31,2011-05-01T10:00:00Z,BAR,0,0,0,0,0\n"
        "a,31,2011-05-01T10:00:00Z,LOG,0,0,0,0,0\n");
    const Dataset ds = parse_records(in);
    const auto& events = ds.clients.at("a").events;
    CHECK(events[0].kind == EventKind::Log);
    CHECK(events[1].kind == EventKind::Bar);
    CHECK(events[2].kind == EventKind::Log);
}

TEST_CASE("duplicate rows are retained") {
    std::istringstream in(
        "client_id,age,timestamp,kind,police,ems,health,violence,addiction\n"
        "a,31,2011-05-01T10:00:00Z,SLEEP,0,0,0,0,0\n"
        "a,31,2011-05-01T10:00:00Z,SLEEP,0,0,0,0,0\n");
    CHECK(parse_records(in).total_events() == 2);
}

TEST_CASE("malformed rows are rejected with their line number") {
    const char* header = "client_id,age,timestamp,kind,police,ems,health,violence,addiction\n";
    SUBCASE("bad timestamp") {
        std::istringstream in(std::string(header) + "a,31,2011-05-99T10:00:00Z,SLEEP,0,0,0,0,0\n");
        CHECK_THROWS_AS(parse_records(in), ParseError);
        std::istringstream again(std::string(header) +
                                 "a,31,2011-05-99T10:00:00Z,SLEEP,0,0,0,0,0\n");
        try {
            parse_records(again);
        } catch (const ParseError& e) {
            CHECK(e.line == 2);
        }
    }
    SUBCASE("unknown kind") {
        std::istringstream in(std::string(header) + "a,31,2011-05-01T10:00:00Z,NAP,0,0,0,0,0\n");
        CHECK_THROWS_AS(parse_records(in), ParseError);
    }
    SUBCASE("negative count") {
        std::istringstream in(std::string(header) +
                              "a,31,2011-05-01T10:00:00Z,SLEEP,0,-1,0,0,0\n");
        CHECK_THROWS_AS(parse_records(in), ParseError);
    }
    SUBCASE("bad header") {
        std::istringstream in("client,age\n");
        CHECK_THROWS_AS(parse_records(in), ParseError);
    }
}

TEST_CASE("age disagreement warns and keeps the first value") {
    std::istringstream in(
        "client_id,age,timestamp,kind,police,ems,health,violence,addiction\n"
        "a,31,2011-05-01T10:00:00Z,SLEEP,0,0,0,0,0\n"
        "a,33,2011-05-02T10:00:00Z,SLEEP,0,0,0,0,0\n");
    std::vector<ParseWarning> warnings;
    const Dataset ds = parse_records(in, &warnings);
    CHECK(ds.clients.at("a").age == 31);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].line == 3);
}

TEST_CASE("first_sleep_date") {
    SUBCASE("no sleep events") {
        ClientHistory c;
        c.client_id = "x";
        c.events.push_back(helpers::event(1000, EventKind::Log));
        CHECK(!first_sleep_date(c));
    }
    SUBCASE("earliest sleep date wins") {
        // 2010-03-05T23:10 and 2010-03-04T08:00
        ClientHistory c;
        c.client_id = "x";
        c.events.push_back(helpers::event(seconds_at(make_date(2010, 3, 4), 8, 0)));
        c.events.push_back(helpers::event(seconds_at(make_date(2010, 3, 5), 23, 10)));
        CHECK(*first_sleep_date(c) == make_date(2010, 3, 4));
    }
    SUBCASE("only sleep is the last event") {
        ClientHistory c;
        c.client_id = "x";
        c.events.push_back(helpers::event(100, EventKind::Log));
        c.events.push_back(helpers::event(200, EventKind::Counsellor));
        c.events.push_back(helpers::event(seconds_at(make_date(2012, 1, 9), 22, 0)));
        CHECK(*first_sleep_date(c) == make_date(2012, 1, 9));
    }
}

TEST_CASE("censor keeps exactly the in-bounds clients") {
    const Date min = make_date(2009, 7, 1);
    const Date max = make_date(2018, 1, 20);
    const Dataset ds = helpers::dataset_of({
        helpers::sleeper("early", {make_date(2009, 6, 30).days}),   // day before min
        helpers::sleeper("on_min", {make_date(2009, 7, 1).days}),
        helpers::sleeper("on_max", {make_date(2018, 1, 20).days}),
        helpers::sleeper("late", {make_date(2018, 1, 21).days}),
    });

    const CensorResult r = censor(ds, min, max);
    CHECK(r.dataset.clients.size() == 2);
    CHECK(r.dataset.clients.contains("on_min"));
    CHECK(r.dataset.clients.contains("on_max"));
    CHECK(r.stats.removed_before == 1);
    CHECK(r.stats.removed_after == 1);
    CHECK(r.stats.retained == 2);
}

TEST_CASE("censor drops clients with no sleep records") {
    ClientHistory logs_only;
    logs_only.client_id = "logs";
    logs_only.events.push_back(
        helpers::event(seconds_at(make_date(2012, 1, 1), 9, 0), EventKind::Log));
    const Dataset ds = helpers::dataset_of({logs_only});
    const CensorResult r = censor(ds, make_date(2009, 7, 1), make_date(2018, 1, 20));
    CHECK(r.dataset.clients.empty());
    CHECK(r.stats.removed_no_sleep == 1);
}

TEST_CASE("censor with all clients in bounds is the identity") {
    const Dataset ds = helpers::dataset_of({
        helpers::sleeper("a", {make_date(2010, 1, 1).days, make_date(2010, 1, 9).days}),
        helpers::sleeper("b", {make_date(2012, 3, 5).days}),
    });
    const CensorResult r = censor(ds, make_date(2009, 7, 1), make_date(2018, 1, 20));
    CHECK(r.dataset == ds);
}

TEST_CASE("censor is idempotent and never edits retained histories") {
    CohortSpec spec = default_cohort_spec();
    spec.n_clients = 300;
    spec.seed = 11;
    const Dataset ds = generate(spec);
    const Date min = make_date(2009, 7, 1);
    const Date max = make_date(2018, 1, 20);

    const CensorResult once = censor(ds, min, max);
    const CensorResult twice = censor(once.dataset, min, max);
    CHECK(once.dataset == twice.dataset);
    CHECK(twice.stats.removed_before == 0);
    CHECK(twice.stats.removed_after == 0);
    for (const auto& [id, client] : once.dataset.clients) {
        CHECK(client == ds.clients.at(id));
    }
}

TEST_CASE("inverted censor bounds are a configuration error") {
    const Dataset ds = helpers::dataset_of({helpers::sleeper("a", {0})});
    CHECK_THROWS_AS(censor(ds, make_date(2018, 1, 1), make_date(2009, 1, 1)), ConfigError);
}

TEST_CASE("generated file round-trips through serialize and parse") {
    CohortSpec spec = default_cohort_spec();
    spec.n_clients = 60;
    spec.seed = 5;
    const Dataset ds = generate(spec);
    CHECK(ds.total_events() > 3000);  // thousands of rows, as intended

    const std::string text = serialize_records(ds);
    std::istringstream in(text);
    const Dataset back = parse_records(in);
    CHECK(back == ds);
    CHECK(serialize_records(back) == text);
}

TEST_SUITE_END();

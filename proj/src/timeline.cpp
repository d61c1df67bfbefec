#include "shelterkit/timeline.hpp"

#include <algorithm>
#include <numeric>

#include "shelterkit/errors.hpp"

namespace shelterkit {

StaySet derive_stays(const ClientHistory& history, BucketTimezone tz) {
    StaySet stays;
    for (const EventRecord& e : history.events) {
        if (e.kind != EventKind::Sleep) continue;
        const Date d = date_of(e.timestamp, tz);
        if (stays.dates.empty() || stays.dates.back() < d) {
            stays.dates.push_back(d);  // events sorted, so dates arrive ascending
        }
    }
    return stays;
}

bool label_chronic(const StaySet& stays, std::span<const ChronicRule> rules) {
    const auto& dates = stays.dates;
    for (const ChronicRule& rule : rules) {
        if (rule.days_required <= 0 || dates.size() < std::size_t(rule.days_required)) continue;
        // Two pointers: for each window end (a stay date), count stays in
        // [end - window_days + 1, end].
        std::size_t lo = 0;
        for (std::size_t hi = 0; hi < dates.size(); ++hi) {
            while (dates[hi] - dates[lo] >= rule.window_days) ++lo;
            if (hi - lo + 1 >= std::size_t(rule.days_required)) return true;
        }
    }
    return false;
}

EpisodeList episodes(const StaySet& stays, int gap_threshold_days) {
    if (gap_threshold_days < 1) throw ConfigError("episode gap threshold must be >= 1 day");
    EpisodeList list;
    for (const Date d : stays.dates) {
        if (list.empty() || d - list.back().last_stay >= gap_threshold_days) {
            list.push_back({d, d, 1});
        } else {
            list.back().last_stay = d;
            ++list.back().stay_count;
        }
    }
    return list;
}

namespace {

std::optional<double> average_gap(const ClientHistory& history, const StaySet& stays,
                                  BucketTimezone tz, int gap_threshold_days, GapMode mode) {
    double sum = 0.0;
    std::size_t n = 0;
    switch (mode) {
        case GapMode::FractionalTimestamps: {
            bool have_prev = false;
            EpochSeconds prev_ts = 0;
            Date prev_date{};
            for (const EventRecord& e : history.events) {
                if (e.kind != EventKind::Sleep) continue;
                const Date d = date_of(e.timestamp, tz);
                if (have_prev && d != prev_date) {
                    sum += double(e.timestamp - prev_ts) / double(kSecondsPerDay);
                    ++n;
                }
                prev_ts = e.timestamp;
                prev_date = d;
                have_prev = true;
            }
            break;
        }
        case GapMode::IntegerDates: {
            for (std::size_t i = 1; i < stays.dates.size(); ++i) {
                sum += double(stays.dates[i] - stays.dates[i - 1]);
                ++n;
            }
            break;
        }
        case GapMode::InterEpisode: {
            const EpisodeList eps = episodes(stays, gap_threshold_days);
            for (std::size_t i = 1; i < eps.size(); ++i) {
                sum += double(eps[i].first_stay - eps[i - 1].last_stay);
                ++n;
            }
            break;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / double(n);
}

}  // namespace

ClientHistoryStats client_stats(const ClientHistory& history, BucketTimezone tz,
                                int gap_threshold_days, GapMode gap_mode) {
    const StaySet stays = derive_stays(history, tz);
    if (stays.empty()) {
        throw StatsError("client '" + history.client_id + "' has no sleep events");
    }
    ClientHistoryStats stats;
    stats.total_stays = stays.size();
    stats.total_episodes = episodes(stays, gap_threshold_days).size();
    stats.tenure_days = stays.dates.back() - stays.dates.front();
    stats.usage_percentage =
        100.0 * double(stats.total_stays) / double(std::max(stats.tenure_days, 1));
    stats.average_gap_days = average_gap(history, stays, tz, gap_threshold_days, gap_mode);
    return stats;
}

double linear_percentile(std::span<const double> sorted_values, double p) {
    if (sorted_values.empty()) throw StatsError("percentile of empty sequence");
    if (sorted_values.size() == 1) return sorted_values[0];
    const double rank = p * double(sorted_values.size() - 1);
    const auto lo = std::size_t(rank);
    if (lo + 1 >= sorted_values.size()) return sorted_values.back();
    const double frac = rank - double(lo);
    return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]);
}

namespace {

MeasureSummary summarize(std::vector<double>& values) {
    MeasureSummary s;
    s.n = values.size();
    s.average = std::accumulate(values.begin(), values.end(), 0.0) / double(values.size());
    std::sort(values.begin(), values.end());
    s.median = linear_percentile(values, 0.5);
    s.p10 = linear_percentile(values, 0.1);
    s.p90 = linear_percentile(values, 0.9);
    return s;
}

}  // namespace

CohortReport cohort_report(std::span<const ClientHistoryStats> cohort,
                           std::size_t population_size) {
    if (cohort.empty()) throw StatsError("cohort report over empty cohort");
    CohortReport report;
    report.group_size = cohort.size();
    report.population_size = population_size;

    std::vector<double> values;
    values.reserve(cohort.size());

    for (const auto& c : cohort) values.push_back(double(c.total_stays));
    report.total_stays = summarize(values);

    values.clear();
    for (const auto& c : cohort) values.push_back(double(c.total_episodes));
    report.total_episodes = summarize(values);

    values.clear();
    for (const auto& c : cohort) values.push_back(double(c.tenure_days));
    report.tenure_days = summarize(values);

    values.clear();
    for (const auto& c : cohort) values.push_back(c.usage_percentage);
    report.usage_percentage = summarize(values);

    values.clear();
    for (const auto& c : cohort) {
        if (c.average_gap_days) values.push_back(*c.average_gap_days);
    }
    if (!values.empty()) report.average_gap_days = summarize(values);

    return report;
}

}  // namespace shelterkit

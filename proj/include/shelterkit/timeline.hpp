#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "shelterkit/civil.hpp"
#include "shelterkit/records.hpp"

namespace shelterkit {

/// Distinct calendar dates on which sleep services were accessed, ascending.
struct StaySet {
    std::vector<Date> dates;

    std::size_t size() const { return dates.size(); }
    bool empty() const { return dates.empty(); }
};

struct Episode {
    Date first_stay{};
    Date last_stay{};
    std::size_t stay_count = 0;

    bool operator==(const Episode&) const = default;
};

using EpisodeList = std::vector<Episode>;

/// Chronic when some trailing window of `window_days` days contains at least
/// `days_required` stay dates.
struct ChronicRule {
    int days_required = 0;
    int window_days = 0;
};

/// Canadian federal definition: 180 days within a year, or 546 days within 3 years.
inline constexpr std::array<ChronicRule, 2> kFederalChronicRules{
    {{180, 365}, {546, 1095}}};

StaySet derive_stays(const ClientHistory& history, BucketTimezone tz = {});

/// True when any rule's window (ending on any calendar day) holds enough stays.
/// Window [e - window_days + 1, e] inclusive; endpoints restricted to stay
/// dates, which maximizes the trailing count.
bool label_chronic(const StaySet& stays,
                   std::span<const ChronicRule> rules = kFederalChronicRules);

/// Splits stays into episodes: a new episode starts exactly when the gap from
/// the previous stay date reaches gap_threshold_days.
EpisodeList episodes(const StaySet& stays, int gap_threshold_days = 30);

enum class GapMode {
    /// Fractional-day differences between consecutive sleep timestamps on
    /// distinct stay dates (default).
    FractionalTimestamps,
    /// Whole-day differences between consecutive stay dates.
    IntegerDates,
    /// Days between one episode's last stay and the next episode's first stay.
    InterEpisode,
};

struct ClientHistoryStats {
    std::size_t total_stays = 0;
    std::size_t total_episodes = 0;
    int tenure_days = 0;
    double usage_percentage = 0.0;
    /// Absent when the history has fewer than two qualifying gaps.
    std::optional<double> average_gap_days;
};

/// All five access-history measures for one client.
/// usage_percentage = 100 * stays / max(tenure, 1). Throws StatsError when the
/// history has no Sleep events.
ClientHistoryStats client_stats(const ClientHistory& history, BucketTimezone tz = {},
                                int gap_threshold_days = 30,
                                GapMode gap_mode = GapMode::FractionalTimestamps);

struct MeasureSummary {
    double average = 0.0;
    double median = 0.0;
    double p10 = 0.0;
    double p90 = 0.0;
    std::size_t n = 0;
};

struct CohortReport {
    MeasureSummary total_stays;
    MeasureSummary total_episodes;
    MeasureSummary tenure_days;
    MeasureSummary usage_percentage;
    /// Absent when no cohort member has a gap value.
    std::optional<MeasureSummary> average_gap_days;
    std::size_t group_size = 0;
    std::size_t population_size = 0;
};

/// Percentile by linear interpolation between closest ranks over an ascending
/// sequence; p in [0, 1]. p = 0.5 gives the mean-of-central-pair median.
double linear_percentile(std::span<const double> sorted_values, double p);

/// Average/median/p10/p90 of each measure over the cohort. Throws StatsError
/// on an empty cohort.
CohortReport cohort_report(std::span<const ClientHistoryStats> cohort,
                           std::size_t population_size);

}  // namespace shelterkit

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "shelterkit/civil.hpp"
#include "shelterkit/records.hpp"
#include "shelterkit/timeline.hpp"

namespace shelterkit {

/// min + geometric(p), clamped to max.
struct TruncatedGeometric {
    double p = 0.5;
    int min = 1;
    int max = 8;
};

/// round(lognormal(mu, sigma)) clamped to [min, max]; units are days.
struct RoundedLogNormal {
    double mu = 2.0;
    double sigma = 0.5;
    int min = 1;
    int max = 2000;
};

struct ClusterParams {
    TruncatedGeometric episode_count;
    RoundedLogNormal episode_length;
    /// Days from one episode's last day to the next episode's first day.
    RoundedLogNormal episode_gap;
    /// Probability of a Sleep record on each day of an episode (the first day
    /// of each episode always has one).
    double attendance = 0.85;
    /// Per attended day.
    double bar_rate = 0.02;
    double log_rate = 0.10;
    double counsellor_rate = 0.04;
    /// Presence probability per auxiliary record; order matches kKeywordNames.
    std::array<double, kKeywordCategories> keyword_rates{};
};

/// Three-segment first-contact date mixture: before_mass lands strictly
/// before before_date, after_mass strictly after after_date, the rest uniform
/// in [before_date, after_date].
struct FirstSleepProfile {
    Date before_date{};
    double before_mass = 0.0;
    Date after_date{};
    double after_mass = 0.0;
};

enum class Cluster : std::uint8_t { Transitional, Episodic, Chronic };

struct CohortSpec {
    std::size_t n_clients = 18398;
    /// transitional, episodic, chronic; must sum to 1.
    std::array<double, 3> cluster_weights{0.62, 0.28, 0.10};
    ClusterParams transitional;
    ClusterParams episodic;
    ClusterParams chronic;
    Date window_start{};
    Date window_end{};
    FirstSleepProfile first_sleep;
    int age_min = 18;
    int age_max = 75;
    std::uint64_t seed = 1;

    const ClusterParams& cluster(Cluster c) const;
    ClusterParams& cluster(Cluster c);

    /// Throws ConfigError on invalid weights, rates, or a window too short
    /// for the smallest configured episode.
    void validate() const;
};

/// Calibrated defaults: prevalence near 8.4% at the default size, and a
/// first-contact profile under which the canonical censoring bounds retain
/// about 43.9% of clients.
CohortSpec default_cohort_spec();

CohortSpec parse_cohort_spec(std::istream& in);
CohortSpec load_cohort_spec(const std::string& path);
void write_cohort_spec(const CohortSpec& spec, std::ostream& out);
void save_cohort_spec(const CohortSpec& spec, const std::string& path);

/// Apply a "key = value" override (same keys as the spec file).
void apply_spec_override(CohortSpec& spec, const std::string& key, const std::string& value);

/// Deterministic for a given seed; per-client sub-streams are derived from
/// (seed, client index), so generation order cannot change the output.
Dataset generate(const CohortSpec& spec);

/// Fraction of clients labeled chronic under the given rules.
double chronic_prevalence(const Dataset& dataset,
                          std::span<const ChronicRule> rules = kFederalChronicRules,
                          BucketTimezone tz = {});

struct CalibrationResult {
    CohortSpec spec;
    double achieved_prevalence = 0.0;
    int iterations = 0;
};

/// Adjusts the chronic cluster's episode-length scale (mu) by bisection until
/// generated prevalence is within tolerance of the target.
CalibrationResult calibrate_chronic_scale(CohortSpec spec, double target_prevalence,
                                          double tolerance = 0.005, int max_iterations = 16);

}  // namespace shelterkit

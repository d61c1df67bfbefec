#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "shelterkit/records.hpp"

namespace shelterkit {

/// Canonical feature order.
inline constexpr std::array<std::string_view, 10> kFeatureNames{
    "age",    "bar", "sleep",  "log",      "counsellor",
    "police", "ems", "health", "violence", "addiction"};

/// Summary of a client's first-90-day window: one static feature (age) plus
/// nine total counts.
struct FeatureVector {
    std::int32_t age = 0;
    std::int32_t bar = 0;
    std::int32_t sleep = 0;  // distinct stay dates in the window, not raw records
    std::int32_t log = 0;
    std::int32_t counsellor = 0;
    std::int32_t police = 0;
    std::int32_t ems = 0;
    std::int32_t health = 0;
    std::int32_t violence = 0;
    std::int32_t addiction = 0;

    bool operator==(const FeatureVector&) const = default;

    double at(std::size_t feature) const;
    std::array<double, 10> as_array() const;
};

/// Window = [first_sleep_date, first_sleep_date + window_days - 1] by bucket
/// date. Keyword features count records (of any kind) whose category count is
/// >= 1, at most once per record. Throws StatsError when the history has no
/// Sleep events.
FeatureVector extract_features(const ClientHistory& history, int window_days = 90,
                               BucketTimezone tz = {});

/// Indices into kFeatureNames.
using FeatureSubset = std::vector<std::size_t>;

/// Sleep and age, the two features the logistic model uses.
FeatureSubset logistic_feature_subset();
FeatureSubset all_feature_subset();

struct NormalizationParams {
    FeatureSubset subset;
    std::vector<double> mean;
    std::vector<double> stddev;            // population convention; 1.0 where constant
    std::vector<std::uint8_t> constant_flag;  // zero-variance features

    std::size_t dim() const { return subset.size(); }
};

/// Per-feature mean and population standard deviation over the training
/// vectors. Requires >= 2 vectors. Zero-variance features get stddev 1 and the
/// constant flag.
NormalizationParams fit_normalizer(std::span<const FeatureVector> vectors,
                                   const FeatureSubset& subset);

/// (x - mean) / stddev elementwise over the fitted subset; constant features
/// map to 0.
std::vector<double> apply_normalizer(const FeatureVector& v, const NormalizationParams& p);

/// Inverse of apply_normalizer (constant features recover the fitted mean).
std::vector<double> denormalize(std::span<const double> x, const NormalizationParams& p);

}  // namespace shelterkit

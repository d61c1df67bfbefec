#pragma once

#include <span>
#include <string>
#include <utility>

#include <json.hpp>

#include "shelterkit/config.hpp"
#include "shelterkit/evaluation.hpp"
#include "shelterkit/timeline.hpp"

namespace shelterkit {

nlohmann::ordered_json to_json(const ConfusionCounts& counts);
nlohmann::ordered_json to_json(const MetricsReport& metrics);
nlohmann::ordered_json to_json(const CohortReport& cohort);
nlohmann::ordered_json to_json(const RunConfig& cfg);

/// One row per algorithm: tpr/fpr with absolute counts in brackets,
/// precision, accuracy, group size.
std::string render_metrics_table(
    std::span<const std::pair<std::string, MetricsReport>> rows);

/// Five measures by average/median/p10/p90 plus the group-size line.
std::string render_cohort_table(const CohortReport& cohort, const std::string& title);

/// Config echo header included in every report for provenance.
std::string render_config_header(const RunConfig& cfg);

/// Metrics comparison followed by one cohort table per algorithm.
std::string render_combined_report(
    const RunConfig& cfg,
    std::span<const std::pair<std::string, ExperimentResult>> results);

nlohmann::ordered_json combined_report_json(
    const RunConfig& cfg,
    std::span<const std::pair<std::string, ExperimentResult>> results);

}  // namespace shelterkit

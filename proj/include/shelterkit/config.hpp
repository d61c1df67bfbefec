#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "shelterkit/civil.hpp"
#include "shelterkit/classifiers.hpp"
#include "shelterkit/timeline.hpp"

namespace shelterkit {

/// Every configurable constant of the pipeline in one place. Defaults are the
/// published operating points (90-day window, 67-stay threshold, 30-day
/// episode gap, 180/365 and 546/1095 chronic rules, k = 10).
struct RunConfig {
    int window_days = 90;
    int threshold_min_stays = 67;
    int episode_gap_days = 30;
    std::vector<ChronicRule> chronic_rules{{180, 365}, {546, 1095}};
    int k = 10;
    std::uint64_t seed = 1;
    std::optional<Date> min_first_sleep;
    std::optional<Date> max_first_sleep;
    BucketTimezone timezone{};
    GapMode gap_mode = GapMode::FractionalTimestamps;
    TrainConfig train{};

    /// Throws ConfigError when a value is out of range.
    void validate() const;
};

/// Flat key = value document; '#' starts a comment. Unknown keys are errors.
RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::string& path);
void write_run_config(const RunConfig& cfg, std::ostream& out);

const char* gap_mode_name(GapMode mode);
std::optional<GapMode> gap_mode_from_name(std::string_view name);

}  // namespace shelterkit

#include "shelterkit/config.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "shelterkit/errors.hpp"

namespace shelterkit {

void RunConfig::validate() const {
    if (window_days < 1) throw ConfigError("window_days must be >= 1");
    if (threshold_min_stays < 0 || threshold_min_stays > window_days) {
        throw ConfigError("threshold_min_stays must lie in [0, window_days]");
    }
    if (episode_gap_days < 1) throw ConfigError("episode_gap_days must be >= 1");
    if (chronic_rules.empty()) throw ConfigError("at least one chronic rule is required");
    for (const ChronicRule& r : chronic_rules) {
        if (r.days_required < 1 || r.window_days < 1 || r.days_required > r.window_days) {
            throw ConfigError("chronic rule needs 1 <= days_required <= window_days");
        }
    }
    if (k < 2) throw ConfigError("k must be >= 2");
    if (min_first_sleep && max_first_sleep && *min_first_sleep > *max_first_sleep) {
        throw ConfigError("min_first_sleep is after max_first_sleep");
    }
    if ((min_first_sleep != std::nullopt) != (max_first_sleep != std::nullopt)) {
        throw ConfigError("censoring needs both min_first_sleep and max_first_sleep");
    }
    if (train.learning_rate <= 0 || train.batch_size < 1 || train.max_epochs < 0 ||
        train.tolerance < 0) {
        throw ConfigError("train config needs positive rate/batch and non-negative epochs");
    }
}

const char* gap_mode_name(GapMode mode) {
    switch (mode) {
        case GapMode::FractionalTimestamps: return "fractional";
        case GapMode::IntegerDates: return "integer";
        case GapMode::InterEpisode: return "episode";
    }
    return "?";
}

std::optional<GapMode> gap_mode_from_name(std::string_view name) {
    if (name == "fractional") return GapMode::FractionalTimestamps;
    if (name == "integer") return GapMode::IntegerDates;
    if (name == "episode") return GapMode::InterEpisode;
    return std::nullopt;
}

namespace {

bool parse_kv_line(const std::string& raw, std::string& key, std::string& value) {
    const auto hash = raw.find('#');
    std::string line = hash == std::string::npos ? raw : raw.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
        // blank (or comment-only) lines are fine; anything else is not
        const bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
        if (!blank) throw ConfigError("expected 'key = value', got '" + raw + "'");
        return false;
    }
    const auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string{};
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    key = trim(line.substr(0, eq));
    value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key in '" + raw + "'");
    return true;
}

long long to_int(const std::string& key, const std::string& value) {
    long long out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ConfigError("bad integer for " + key + ": '" + value + "'");
    }
    return out;
}

double to_real(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double out = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("bad number for " + key + ": '" + value + "'");
    }
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("bad boolean for " + key + ": '" + value + "'");
}

Date to_date(const std::string& key, const std::string& value) {
    const auto d = parse_date(value);
    if (!d) throw ConfigError("bad date for " + key + ": '" + value + "'");
    return *d;
}

}  // namespace

RunConfig parse_run_config(std::istream& in) {
    RunConfig cfg;
    cfg.chronic_rules.clear();
    bool saw_rule = false;

    std::string raw, key, value;
    while (std::getline(in, raw)) {
        if (!parse_kv_line(raw, key, value)) continue;
        if (key == "window_days") {
            cfg.window_days = int(to_int(key, value));
        } else if (key == "threshold_min_stays") {
            cfg.threshold_min_stays = int(to_int(key, value));
        } else if (key == "episode_gap_days") {
            cfg.episode_gap_days = int(to_int(key, value));
        } else if (key == "chronic_rule") {
            // "days_required/window_days", e.g. 180/365
            const auto slash = value.find('/');
            if (slash == std::string::npos) {
                throw ConfigError("chronic_rule needs 'days/window', got '" + value + "'");
            }
            ChronicRule rule;
            rule.days_required = int(to_int(key, value.substr(0, slash)));
            rule.window_days = int(to_int(key, value.substr(slash + 1)));
            cfg.chronic_rules.push_back(rule);
            saw_rule = true;
        } else if (key == "k") {
            cfg.k = int(to_int(key, value));
        } else if (key == "seed") {
            cfg.seed = std::uint64_t(to_int(key, value));
        } else if (key == "min_first_sleep") {
            cfg.min_first_sleep = to_date(key, value);
        } else if (key == "max_first_sleep") {
            cfg.max_first_sleep = to_date(key, value);
        } else if (key == "timezone_offset_minutes") {
            cfg.timezone.offset_minutes = int(to_int(key, value));
        } else if (key == "gap_mode") {
            const auto mode = gap_mode_from_name(value);
            if (!mode) throw ConfigError("unknown gap_mode '" + value + "'");
            cfg.gap_mode = *mode;
        } else if (key == "train.learning_rate") {
            cfg.train.learning_rate = to_real(key, value);
        } else if (key == "train.max_epochs") {
            cfg.train.max_epochs = int(to_int(key, value));
        } else if (key == "train.batch_size") {
            cfg.train.batch_size = int(to_int(key, value));
        } else if (key == "train.tolerance") {
            cfg.train.tolerance = to_real(key, value);
        } else if (key == "train.adaptive") {
            cfg.train.adaptive = to_bool(key, value);
        } else if (key == "train.seed") {
            cfg.train.seed = std::uint64_t(to_int(key, value));
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    if (!saw_rule) cfg.chronic_rules = {{180, 365}, {546, 1095}};
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    return parse_run_config(in);
}

void write_run_config(const RunConfig& cfg, std::ostream& out) {
    out << "window_days = " << cfg.window_days << '\n';
    out << "threshold_min_stays = " << cfg.threshold_min_stays << '\n';
    out << "episode_gap_days = " << cfg.episode_gap_days << '\n';
    for (const ChronicRule& r : cfg.chronic_rules) {
        out << "chronic_rule = " << r.days_required << '/' << r.window_days << '\n';
    }
    out << "k = " << cfg.k << '\n';
    out << "seed = " << cfg.seed << '\n';
    if (cfg.min_first_sleep) out << "min_first_sleep = " << format_date(*cfg.min_first_sleep) << '\n';
    if (cfg.max_first_sleep) out << "max_first_sleep = " << format_date(*cfg.max_first_sleep) << '\n';
    out << "timezone_offset_minutes = " << cfg.timezone.offset_minutes << '\n';
    out << "gap_mode = " << gap_mode_name(cfg.gap_mode) << '\n';
    out << "train.learning_rate = " << cfg.train.learning_rate << '\n';
    out << "train.max_epochs = " << cfg.train.max_epochs << '\n';
    out << "train.batch_size = " << cfg.train.batch_size << '\n';
    out << "train.tolerance = " << cfg.train.tolerance << '\n';
    out << "train.adaptive = " << (cfg.train.adaptive ? "true" : "false") << '\n';
    out << "train.seed = " << cfg.train.seed << '\n';
}

}  // namespace shelterkit

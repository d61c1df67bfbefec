#include "shelterkit/reports.hpp"

#include <cstdio>
#include <sstream>

namespace shelterkit {

namespace {

std::string fixed(double v, int decimals) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

nlohmann::ordered_json summary_json(const MeasureSummary& s) {
    nlohmann::ordered_json j;
    j["average"] = s.average;
    j["median"] = s.median;
    j["p10"] = s.p10;
    j["p90"] = s.p90;
    j["n"] = s.n;
    return j;
}

}  // namespace

nlohmann::ordered_json to_json(const ConfusionCounts& counts) {
    nlohmann::ordered_json j;
    j["tp"] = counts.tp;
    j["fp"] = counts.fp;
    j["fn"] = counts.fn;
    j["tn"] = counts.tn;
    return j;
}

nlohmann::ordered_json to_json(const MetricsReport& metrics) {
    nlohmann::ordered_json j;
    j["tpr"] = metrics.tpr;
    j["fpr"] = metrics.fpr;
    if (metrics.precision) {
        j["precision"] = *metrics.precision;
    } else {
        j["precision"] = nullptr;
    }
    j["accuracy"] = metrics.accuracy;
    j["counts"] = to_json(metrics.counts);
    j["group_size"] = metrics.group_size;
    return j;
}

nlohmann::ordered_json to_json(const CohortReport& cohort) {
    nlohmann::ordered_json j;
    j["total_stays"] = summary_json(cohort.total_stays);
    j["total_episodes"] = summary_json(cohort.total_episodes);
    j["tenure_days"] = summary_json(cohort.tenure_days);
    j["usage_percentage"] = summary_json(cohort.usage_percentage);
    if (cohort.average_gap_days) {
        j["average_gap_days"] = summary_json(*cohort.average_gap_days);
    } else {
        j["average_gap_days"] = nullptr;
    }
    j["group_size"] = cohort.group_size;
    j["population_size"] = cohort.population_size;
    return j;
}

nlohmann::ordered_json to_json(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    j["window_days"] = cfg.window_days;
    j["threshold_min_stays"] = cfg.threshold_min_stays;
    j["episode_gap_days"] = cfg.episode_gap_days;
    auto rules = nlohmann::ordered_json::array();
    for (const ChronicRule& r : cfg.chronic_rules) {
        rules.push_back({{"days_required", r.days_required}, {"window_days", r.window_days}});
    }
    j["chronic_rules"] = rules;
    j["k"] = cfg.k;
    j["seed"] = cfg.seed;
    j["min_first_sleep"] =
        cfg.min_first_sleep ? nlohmann::ordered_json(format_date(*cfg.min_first_sleep)) : nullptr;
    j["max_first_sleep"] =
        cfg.max_first_sleep ? nlohmann::ordered_json(format_date(*cfg.max_first_sleep)) : nullptr;
    j["timezone_offset_minutes"] = cfg.timezone.offset_minutes;
    j["gap_mode"] = gap_mode_name(cfg.gap_mode);
    j["train"] = {{"learning_rate", cfg.train.learning_rate},
                  {"max_epochs", cfg.train.max_epochs},
                  {"batch_size", cfg.train.batch_size},
                  {"tolerance", cfg.train.tolerance},
                  {"adaptive", cfg.train.adaptive},
                  {"seed", cfg.train.seed}};
    return j;
}

std::string render_metrics_table(
    std::span<const std::pair<std::string, MetricsReport>> rows) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-12s %-14s %-14s %-10s %-9s %s\n", "algorithm",
                  "tpr", "fpr", "precision", "accuracy", "group");
    out << line;
    out << std::string(72, '-') << '\n';
    for (const auto& [name, m] : rows) {
        const std::string tpr = fixed(m.tpr, 3) + " (" + std::to_string(m.counts.tp) + ")";
        const std::string fpr = fixed(m.fpr, 3) + " (" + std::to_string(m.counts.fp) + ")";
        const std::string precision = m.precision ? fixed(*m.precision, 3) : "-";
        std::snprintf(line, sizeof line, "%-12s %-14s %-14s %-10s %-9s %zu\n", name.c_str(),
                      tpr.c_str(), fpr.c_str(), precision.c_str(),
                      fixed(m.accuracy, 3).c_str(), m.group_size);
        out << line;
    }
    return out.str();
}

std::string render_cohort_table(const CohortReport& cohort, const std::string& title) {
    std::ostringstream out;
    out << title << '\n';
    char line[160];
    std::snprintf(line, sizeof line, "%-26s %10s %10s %10s %10s\n", "measure", "average",
                  "median", "p10", "p90");
    out << line;
    out << std::string(70, '-') << '\n';
    const auto row = [&](const char* name, const MeasureSummary& s) {
        std::snprintf(line, sizeof line, "%-26s %10s %10s %10s %10s\n", name,
                      fixed(s.average, 1).c_str(), fixed(s.median, 1).c_str(),
                      fixed(s.p10, 1).c_str(), fixed(s.p90, 1).c_str());
        out << line;
    };
    row("total stays", cohort.total_stays);
    row("total episodes", cohort.total_episodes);
    row("tenure (days)", cohort.tenure_days);
    row("usage percentage", cohort.usage_percentage);
    if (cohort.average_gap_days) {
        row("average gap length (days)", *cohort.average_gap_days);
    } else {
        std::snprintf(line, sizeof line, "%-26s %10s %10s %10s %10s\n",
                      "average gap length (days)", "-", "-", "-", "-");
        out << line;
    }
    const double pct = cohort.population_size
                           ? 100.0 * double(cohort.group_size) / double(cohort.population_size)
                           : 0.0;
    out << "group size: " << cohort.group_size << '/' << cohort.population_size << " ("
        << fixed(pct, 1) << "%)\n";
    return out.str();
}

std::string render_config_header(const RunConfig& cfg) {
    std::ostringstream out;
    out << "# effective configuration\n";
    std::ostringstream body;
    write_run_config(cfg, body);
    std::istringstream lines(body.str());
    std::string line;
    while (std::getline(lines, line)) out << "#   " << line << '\n';
    return out.str();
}

std::string render_combined_report(
    const RunConfig& cfg,
    std::span<const std::pair<std::string, ExperimentResult>> results) {
    std::ostringstream out;
    out << render_config_header(cfg) << '\n';
    std::vector<std::pair<std::string, MetricsReport>> rows;
    rows.reserve(results.size());
    for (const auto& [name, r] : results) rows.emplace_back(name, r.metrics);
    out << "classification metrics (pooled over " << cfg.k << " test folds)\n";
    out << render_metrics_table(rows) << '\n';
    for (const auto& [name, r] : results) {
        if (r.cohort.group_size == 0) {
            out << "cohort access history: " << name << " (no clients flagged)\n\n";
            continue;
        }
        out << render_cohort_table(r.cohort, "cohort access history: " + name) << '\n';
    }
    return out.str();
}

nlohmann::ordered_json combined_report_json(
    const RunConfig& cfg,
    std::span<const std::pair<std::string, ExperimentResult>> results) {
    nlohmann::ordered_json j;
    j["config"] = to_json(cfg);
    auto algorithms = nlohmann::ordered_json::object();
    for (const auto& [name, r] : results) {
        nlohmann::ordered_json entry;
        entry["metrics"] = to_json(r.metrics);
        entry["cohort"] =
            r.cohort.group_size > 0 ? to_json(r.cohort) : nlohmann::ordered_json(nullptr);
        algorithms[name] = entry;
    }
    j["algorithms"] = algorithms;
    return j;
}

}  // namespace shelterkit

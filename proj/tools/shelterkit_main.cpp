// shelterkit: shelter event-record analytics pipeline.
//
// Subcommands: generate | label | featurize | evaluate | report
// Exit codes: 0 ok, 2 usage, 3 input parse, 4 training failure, 5 I/O,
// 6 configuration.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shelterkit/config.hpp"
#include "shelterkit/errors.hpp"
#include "shelterkit/evaluation.hpp"
#include "shelterkit/features.hpp"
#include "shelterkit/records.hpp"
#include "shelterkit/reports.hpp"
#include "shelterkit/synthgen.hpp"
#include "shelterkit/timeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitParse = 3;
constexpr int kExitTraining = 4;
constexpr int kExitIo = 5;
constexpr int kExitConfig = 6;

using namespace shelterkit;

/// Optional flag values layered over a config file; flags win.
struct ConfigFlags {
    std::optional<std::string> config_path;
    std::optional<int> window_days;
    std::optional<int> threshold_min_stays;
    std::optional<int> episode_gap_days;
    std::optional<int> k;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> min_first_sleep;
    std::optional<std::string> max_first_sleep;
    std::optional<int> timezone_offset;
    std::optional<std::string> gap_mode;
    std::optional<double> learning_rate;
    std::optional<int> max_epochs;
    std::optional<int> batch_size;
    std::optional<double> tolerance;
    std::optional<bool> adaptive;
    std::optional<std::uint64_t> train_seed;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& flags) {
    cmd->add_option("--config", flags.config_path, "run configuration file (key = value)");
    cmd->add_option("--window-days", flags.window_days, "feature window length");
    cmd->add_option("--threshold-min-stays", flags.threshold_min_stays,
                    "stay count the threshold rule flags at");
    cmd->add_option("--episode-gap-days", flags.episode_gap_days,
                    "gap that starts a new episode");
    cmd->add_option("--k", flags.k, "number of cross-validation folds");
    cmd->add_option("--seed", flags.seed, "fold-assignment / experiment seed");
    cmd->add_option("--min-first-sleep", flags.min_first_sleep,
                    "censor clients first sleeping before this date (ISO)");
    cmd->add_option("--max-first-sleep", flags.max_first_sleep,
                    "censor clients first sleeping after this date (ISO)");
    cmd->add_option("--timezone-offset", flags.timezone_offset,
                    "stay-bucketing offset from UTC in minutes");
    cmd->add_option("--gap-mode", flags.gap_mode,
                    "average-gap mode: fractional | integer | episode");
    cmd->add_option("--learning-rate", flags.learning_rate, "initial learning rate");
    cmd->add_option("--max-epochs", flags.max_epochs, "training epoch budget");
    cmd->add_option("--batch-size", flags.batch_size, "SGD minibatch size");
    cmd->add_option("--tolerance", flags.tolerance, "loss-improvement tolerance");
    cmd->add_option("--adaptive", flags.adaptive, "adaptive learning-rate schedule");
    cmd->add_option("--train-seed", flags.train_seed, "base seed for model training");
}

Date parse_date_flag(const std::string& value, const char* flag) {
    const auto d = parse_date(value);
    if (!d) throw ConfigError(std::string(flag) + ": bad date '" + value + "'");
    return *d;
}

RunConfig resolve_config(const ConfigFlags& flags) {
    RunConfig cfg;
    if (flags.config_path) cfg = load_run_config(*flags.config_path);
    if (flags.window_days) cfg.window_days = *flags.window_days;
    if (flags.threshold_min_stays) cfg.threshold_min_stays = *flags.threshold_min_stays;
    if (flags.episode_gap_days) cfg.episode_gap_days = *flags.episode_gap_days;
    if (flags.k) cfg.k = *flags.k;
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.min_first_sleep) {
        cfg.min_first_sleep = parse_date_flag(*flags.min_first_sleep, "--min-first-sleep");
    }
    if (flags.max_first_sleep) {
        cfg.max_first_sleep = parse_date_flag(*flags.max_first_sleep, "--max-first-sleep");
    }
    if (flags.timezone_offset) cfg.timezone.offset_minutes = *flags.timezone_offset;
    if (flags.gap_mode) {
        const auto mode = gap_mode_from_name(*flags.gap_mode);
        if (!mode) throw ConfigError("unknown gap mode '" + *flags.gap_mode + "'");
        cfg.gap_mode = *mode;
    }
    if (flags.learning_rate) cfg.train.learning_rate = *flags.learning_rate;
    if (flags.max_epochs) cfg.train.max_epochs = *flags.max_epochs;
    if (flags.batch_size) cfg.train.batch_size = *flags.batch_size;
    if (flags.tolerance) cfg.train.tolerance = *flags.tolerance;
    if (flags.adaptive) cfg.train.adaptive = *flags.adaptive;
    if (flags.train_seed) cfg.train.seed = *flags.train_seed;
    cfg.validate();
    return cfg;
}

Dataset load_input(const std::string& path, const RunConfig& cfg, bool drop_no_sleep) {
    std::vector<ParseWarning> warnings;
    Dataset dataset = load_records(path, &warnings);
    for (const ParseWarning& w : warnings) {
        std::cerr << "warning: " << path << ":" << w.line << ": " << w.message << '\n';
    }
    if (cfg.min_first_sleep && cfg.max_first_sleep) {
        CensorResult censored =
            censor(dataset, *cfg.min_first_sleep, *cfg.max_first_sleep, cfg.timezone);
        std::cerr << "censoring: retained " << censored.stats.retained << ", removed "
                  << censored.stats.removed_before << " before / "
                  << censored.stats.removed_after << " after / "
                  << censored.stats.removed_no_sleep << " with no sleep records\n";
        return std::move(censored.dataset);
    }
    if (drop_no_sleep) {
        Dataset kept;
        kept.observation_start = dataset.observation_start;
        kept.observation_end = dataset.observation_end;
        std::size_t dropped = 0;
        for (const auto& [id, client] : dataset.clients) {
            if (first_sleep_date(client, cfg.timezone)) {
                kept.clients.emplace(id, client);
            } else {
                ++dropped;
            }
        }
        if (dropped > 0) {
            std::cerr << "dropped " << dropped << " clients with no sleep records\n";
        }
        return kept;
    }
    return dataset;
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << contents;
    if (!out) throw IoError("write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

struct GenerateArgs {
    std::string spec_path;
    std::string out_path;
    std::vector<std::string> overrides;
    std::string emit_default_spec;
    std::optional<double> calibrate_target;
    double calibrate_tolerance = 0.005;
    std::string spec_out;
};

int run_generate(const GenerateArgs& args) {
    if (!args.emit_default_spec.empty()) {
        save_cohort_spec(default_cohort_spec(), args.emit_default_spec);
        std::cerr << "wrote default spec to " << args.emit_default_spec << '\n';
        if (args.out_path.empty()) return kExitOk;
    }
    CohortSpec spec =
        args.spec_path.empty() ? default_cohort_spec() : load_cohort_spec(args.spec_path);
    for (const std::string& kv : args.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        }
        apply_spec_override(spec, kv.substr(0, eq), kv.substr(eq + 1));
    }
    spec.validate();

    if (args.calibrate_target) {
        if (args.spec_out.empty()) {
            throw ConfigError("--calibrate requires --spec-out for the calibrated spec");
        }
        const CalibrationResult result =
            calibrate_chronic_scale(spec, *args.calibrate_target, args.calibrate_tolerance);
        spec = result.spec;
        save_cohort_spec(spec, args.spec_out);
        std::cerr << "calibrated chronic episode-length mu to "
                  << spec.chronic.episode_length.mu << " (prevalence "
                  << result.achieved_prevalence << " after " << result.iterations
                  << " evaluations); wrote " << args.spec_out << '\n';
    }

    if (!args.out_path.empty()) {
        const Dataset dataset = generate(spec);
        save_records(dataset, args.out_path);
        std::cerr << "generated " << dataset.clients.size() << " clients / "
                  << dataset.total_events() << " events to " << args.out_path << '\n';
    }
    return kExitOk;
}

int run_label(const std::string& records_path, const std::string& out_path,
              const ConfigFlags& flags) {
    const RunConfig cfg = resolve_config(flags);
    const Dataset dataset = load_input(records_path, cfg, /*drop_no_sleep=*/false);
    std::ostringstream out;
    out << "client_id,chronic\n";
    for (const auto& [id, client] : dataset.clients) {
        const bool chronic =
            label_chronic(derive_stays(client, cfg.timezone), cfg.chronic_rules);
        out << id << ',' << (chronic ? 1 : 0) << '\n';
    }
    write_text_file(out_path, out.str());
    return kExitOk;
}

int run_featurize(const std::string& records_path, const std::string& out_path,
                  const ConfigFlags& flags) {
    const RunConfig cfg = resolve_config(flags);
    const Dataset dataset = load_input(records_path, cfg, /*drop_no_sleep=*/true);
    std::ostringstream out;
    out << "client_id";
    for (const auto& name : kFeatureNames) out << ',' << name;
    out << '\n';
    for (const auto& [id, client] : dataset.clients) {
        const FeatureVector f = extract_features(client, cfg.window_days, cfg.timezone);
        out << id;
        for (double v : f.as_array()) out << ',' << std::int64_t(v);
        out << '\n';
    }
    write_text_file(out_path, out.str());
    return kExitOk;
}

int run_evaluate(const std::string& records_path, const std::string& algorithm,
                 const std::string& out_dir, bool save_models, const ConfigFlags& flags) {
    const RunConfig cfg = resolve_config(flags);
    std::vector<Algorithm> algorithms;
    if (algorithm == "all") {
        algorithms = {Algorithm::Logistic, Algorithm::Mlp, Algorithm::Threshold};
    } else {
        const auto a = algorithm_from_name(algorithm);
        if (!a) throw ConfigError("unknown algorithm '" + algorithm + "'");
        algorithms = {*a};
    }

    const Dataset dataset = load_input(records_path, cfg, /*drop_no_sleep=*/true);
    if (dataset.clients.empty()) {
        throw ParseError("no usable clients in '" + records_path + "'", 1);
    }

    std::filesystem::create_directories(out_dir);
    std::vector<std::pair<std::string, ExperimentResult>> results;
    for (const Algorithm a : algorithms) {
        std::cerr << "evaluating " << algorithm_name(a) << "...\n";
        results.emplace_back(algorithm_name(a),
                             run_experiment(dataset, a, cfg.k, cfg.seed, cfg));
    }

    const std::string text = render_combined_report(cfg, results);
    write_text_file(out_dir + "/report.txt", text);
    write_text_file(out_dir + "/report.json", combined_report_json(cfg, results).dump(2) + "\n");
    std::cout << text;

    if (save_models) {
        const std::string model_dir = out_dir + "/models";
        std::filesystem::create_directories(model_dir);
        for (const auto& [name, result] : results) {
            for (std::size_t fold = 0; fold < result.fold_models.size(); ++fold) {
                const std::string path =
                    model_dir + "/" + name + "_fold" + std::to_string(fold) + ".json";
                const nlohmann::ordered_json j = std::visit(
                    [](const auto& model) { return to_json(model); }, result.fold_models[fold]);
                write_text_file(path, j.dump(2) + "\n");
            }
        }
    }
    return kExitOk;
}

int run_report(const std::string& records_path, const std::string& json_path,
               const std::string& text_path, const ConfigFlags& flags) {
    const RunConfig cfg = resolve_config(flags);
    const Dataset dataset = load_input(records_path, cfg, /*drop_no_sleep=*/true);
    if (dataset.clients.empty()) {
        throw ParseError("no usable clients in '" + records_path + "'", 1);
    }
    std::vector<ClientHistoryStats> cohort;
    cohort.reserve(dataset.clients.size());
    for (const auto& [id, client] : dataset.clients) {
        cohort.push_back(
            client_stats(client, cfg.timezone, cfg.episode_gap_days, cfg.gap_mode));
    }
    const CohortReport report = cohort_report(cohort, dataset.clients.size());
    const std::string text = render_config_header(cfg) + "\n" +
                             render_cohort_table(report, "cohort access history");
    std::cout << text;
    if (!text_path.empty()) write_text_file(text_path, text);
    if (!json_path.empty()) write_text_file(json_path, to_json(report).dump(2) + "\n");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"chronic shelter-use prediction pipeline"};
    app.require_subcommand(1);

    GenerateArgs gen;
    CLI::App* generate_cmd =
        app.add_subcommand("generate", "generate a synthetic event-record file");
    generate_cmd->add_option("--spec", gen.spec_path, "cohort spec file");
    generate_cmd->add_option("--out", gen.out_path, "output records CSV");
    generate_cmd->add_option("--set", gen.overrides, "spec override key=value (repeatable)");
    generate_cmd->add_option("--emit-default-spec", gen.emit_default_spec,
                             "write the built-in default spec to this path");
    generate_cmd->add_option("--calibrate", gen.calibrate_target,
                             "calibrate chronic episode length to this prevalence");
    generate_cmd->add_option("--calibrate-tolerance", gen.calibrate_tolerance,
                             "prevalence tolerance for --calibrate");
    generate_cmd->add_option("--spec-out", gen.spec_out, "where to write the calibrated spec");

    std::string records_path, out_path;
    ConfigFlags label_flags;
    CLI::App* label_cmd = app.add_subcommand("label", "emit client_id,chronic labels");
    label_cmd->add_option("--records", records_path, "input records CSV")->required();
    label_cmd->add_option("--out", out_path, "output labels CSV")->required();
    add_config_flags(label_cmd, label_flags);

    std::string feat_records, feat_out;
    ConfigFlags feat_flags;
    CLI::App* featurize_cmd =
        app.add_subcommand("featurize", "emit per-client feature rows");
    featurize_cmd->add_option("--records", feat_records, "input records CSV")->required();
    featurize_cmd->add_option("--out", feat_out, "output features CSV")->required();
    add_config_flags(featurize_cmd, feat_flags);

    std::string eval_records, eval_algorithm = "all", eval_out_dir = ".";
    bool save_models = false;
    ConfigFlags eval_flags;
    CLI::App* evaluate_cmd =
        app.add_subcommand("evaluate", "cross-validated evaluation with cohort reports");
    evaluate_cmd->add_option("--records", eval_records, "input records CSV")->required();
    evaluate_cmd->add_option("--algorithm", eval_algorithm,
                             "threshold | logistic | mlp | all");
    evaluate_cmd->add_option("--out-dir", eval_out_dir, "report output directory");
    evaluate_cmd->add_flag("--save-models", save_models, "write per-fold model JSON");
    add_config_flags(evaluate_cmd, eval_flags);

    std::string report_records, report_json, report_text;
    ConfigFlags report_flags;
    CLI::App* report_cmd =
        app.add_subcommand("report", "cohort access-history statistics for a records file");
    report_cmd->add_option("--records", report_records, "input records CSV")->required();
    report_cmd->add_option("--json", report_json, "write the report as JSON here");
    report_cmd->add_option("--text", report_text, "write the text table here");
    add_config_flags(report_cmd, report_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (generate_cmd->parsed()) return run_generate(gen);
        if (label_cmd->parsed()) return run_label(records_path, out_path, label_flags);
        if (featurize_cmd->parsed()) return run_featurize(feat_records, feat_out, feat_flags);
        if (evaluate_cmd->parsed()) {
            return run_evaluate(eval_records, eval_algorithm, eval_out_dir, save_models,
                                eval_flags);
        }
        if (report_cmd->parsed()) {
            return run_report(report_records, report_json, report_text, report_flags);
        }
    } catch (const ParseError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitParse;
    } catch (const TrainingError& e) {
        std::cerr << "training error: " << e.what() << '\n';
        return kExitTraining;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kExitIo;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitParse;
    }
    return kExitUsage;
}

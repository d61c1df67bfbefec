#include "shelterkit/evaluation.hpp"

#include <algorithm>
#include <random>

#include "shelterkit/errors.hpp"
#include "shelterkit/rng.hpp"

namespace shelterkit {

FoldAssignment stratified_kfold(const std::map<std::string, bool>& labels, int k,
                                std::uint64_t seed) {
    if (k < 2) throw TrainingError("stratified k-fold needs k >= 2");
    std::vector<const std::string*> positives, negatives;
    for (const auto& [id, chronic] : labels) {
        (chronic ? positives : negatives).push_back(&id);
    }
    if (positives.empty() || negatives.empty()) {
        throw TrainingError("stratified k-fold needs both classes present");
    }
    const std::size_t minority = std::min(positives.size(), negatives.size());
    if (std::size_t(k) > minority) {
        throw TrainingError("k = " + std::to_string(k) + " exceeds minority class size " +
                            std::to_string(minority));
    }

    std::mt19937_64 rng(seed);
    std::shuffle(positives.begin(), positives.end(), rng);
    std::shuffle(negatives.begin(), negatives.end(), rng);

    FoldAssignment assignment;
    assignment.k = k;
    for (std::size_t i = 0; i < positives.size(); ++i) {
        assignment.fold_of[*positives[i]] = int(i % std::size_t(k));
    }
    for (std::size_t i = 0; i < negatives.size(); ++i) {
        assignment.fold_of[*negatives[i]] = int(i % std::size_t(k));
    }
    return assignment;
}

MetricsReport classification_metrics(const ConfusionCounts& counts) {
    if (counts.total() == 0) throw StatsError("metrics over an empty population");
    MetricsReport report;
    report.counts = counts;
    report.group_size = counts.tp + counts.fp;
    report.tpr = counts.positives() ? double(counts.tp) / double(counts.positives()) : 0.0;
    report.fpr = counts.negatives() ? double(counts.fp) / double(counts.negatives()) : 0.0;
    if (report.group_size > 0) {
        report.precision = double(counts.tp) / double(report.group_size);
    }
    report.accuracy = double(counts.tp + counts.tn) / double(counts.total());
    return report;
}

const char* algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::Threshold: return "threshold";
        case Algorithm::Logistic: return "logistic";
        case Algorithm::Mlp: return "mlp";
    }
    return "?";
}

std::optional<Algorithm> algorithm_from_name(std::string_view name) {
    if (name == "threshold") return Algorithm::Threshold;
    if (name == "logistic") return Algorithm::Logistic;
    if (name == "mlp") return Algorithm::Mlp;
    return std::nullopt;
}

std::vector<PreparedClient> prepare_clients(const Dataset& dataset, const RunConfig& cfg) {
    std::vector<PreparedClient> prepared;
    prepared.reserve(dataset.clients.size());
    for (const auto& [id, client] : dataset.clients) {
        PreparedClient p;
        p.client_id = id;
        p.features = extract_features(client, cfg.window_days, cfg.timezone);
        p.chronic = label_chronic(derive_stays(client, cfg.timezone), cfg.chronic_rules);
        prepared.push_back(std::move(p));
    }
    return prepared;
}

namespace {

struct FoldSplit {
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
};

FoldSplit split_fold(std::span<const PreparedClient> clients, const FoldAssignment& folds,
                     int test_fold) {
    FoldSplit split;
    for (std::size_t i = 0; i < clients.size(); ++i) {
        const auto it = folds.fold_of.find(clients[i].client_id);
        if (it == folds.fold_of.end()) {
            throw TrainingError("client '" + clients[i].client_id + "' has no fold");
        }
        (it->second == test_fold ? split.test_rows : split.train_rows).push_back(i);
    }
    return split;
}

/// Normalized training matrix over the given subset, training rows only.
Matrix normalized_rows(std::span<const PreparedClient> clients,
                       std::span<const std::size_t> rows, const NormalizationParams& params) {
    Matrix x;
    x.reserve(rows.size());
    for (const std::size_t r : rows) {
        x.push_back(apply_normalizer(clients[r].features, params));
    }
    return x;
}

Labels labels_of(std::span<const PreparedClient> clients, std::span<const std::size_t> rows) {
    Labels y;
    y.reserve(rows.size());
    for (const std::size_t r : rows) y.push_back(clients[r].chronic ? 1 : 0);
    return y;
}

std::vector<FeatureVector> features_of(std::span<const PreparedClient> clients,
                                       std::span<const std::size_t> rows) {
    std::vector<FeatureVector> f;
    f.reserve(rows.size());
    for (const std::size_t r : rows) f.push_back(clients[r].features);
    return f;
}

}  // namespace

TrainedModel train_fold(Algorithm algorithm, std::span<const PreparedClient> clients,
                        const FoldAssignment& folds, int test_fold, const RunConfig& cfg) {
    if (algorithm == Algorithm::Threshold) {
        return ThresholdRule{cfg.threshold_min_stays, cfg.window_days};
    }
    const FoldSplit split = split_fold(clients, folds, test_fold);
    const std::vector<FeatureVector> train_features = features_of(clients, split.train_rows);
    const Labels y = labels_of(clients, split.train_rows);

    TrainConfig train_cfg = cfg.train;
    train_cfg.seed = derive_seed(cfg.seed, std::uint64_t(test_fold));

    if (algorithm == Algorithm::Logistic) {
        const NormalizationParams params =
            fit_normalizer(train_features, logistic_feature_subset());
        const Matrix x = normalized_rows(clients, split.train_rows, params);
        LogisticModel model = train_logistic(x, y, train_cfg);
        model.normalizer = params;
        return model;
    }
    const NormalizationParams params = fit_normalizer(train_features, all_feature_subset());
    const Matrix x = normalized_rows(clients, split.train_rows, params);
    MlpModel model = train_mlp(x, y, train_cfg);
    model.normalizer = params;
    return model;
}

Prediction predict_with(const TrainedModel& model, const FeatureVector& f) {
    if (const auto* rule = std::get_if<ThresholdRule>(&model)) {
        const bool label = threshold_predict(*rule, f);
        return {label ? 1.0 : 0.0, label};
    }
    if (const auto* logistic = std::get_if<LogisticModel>(&model)) {
        return logistic_predict(*logistic, f);
    }
    return mlp_predict(std::get<MlpModel>(model), f);
}

ExperimentResult run_experiment(const Dataset& dataset, Algorithm algorithm, int k,
                                std::uint64_t seed, const RunConfig& cfg) {
    const std::vector<PreparedClient> clients = prepare_clients(dataset, cfg);

    std::map<std::string, bool> labels;
    for (const PreparedClient& c : clients) labels.emplace(c.client_id, c.chronic);
    const FoldAssignment folds = stratified_kfold(labels, k, seed);

    ExperimentResult result;
    result.algorithm = algorithm;
    result.fold_models.reserve(std::size_t(k));

    ConfusionCounts counts;
    for (int fold = 0; fold < k; ++fold) {
        TrainedModel model;
        try {
            model = train_fold(algorithm, clients, folds, fold, cfg);
        } catch (const TrainingError& e) {
            throw TrainingError("fold " + std::to_string(fold) + ": " + e.what());
        }
        for (const PreparedClient& c : clients) {
            if (folds.fold_of.at(c.client_id) != fold) continue;
            const Prediction pred = predict_with(model, c.features);
            if (pred.label) {
                ++(c.chronic ? counts.tp : counts.fp);
                result.flagged_ids.push_back(c.client_id);
            } else {
                ++(c.chronic ? counts.fn : counts.tn);
            }
        }
        result.fold_models.push_back(std::move(model));
    }
    result.metrics = classification_metrics(counts);

    std::sort(result.flagged_ids.begin(), result.flagged_ids.end());
    if (!result.flagged_ids.empty()) {
        std::vector<ClientHistoryStats> cohort;
        cohort.reserve(result.flagged_ids.size());
        for (const std::string& id : result.flagged_ids) {
            cohort.push_back(client_stats(dataset.clients.at(id), cfg.timezone,
                                          cfg.episode_gap_days, cfg.gap_mode));
        }
        result.cohort = cohort_report(cohort, dataset.clients.size());
    } else {
        result.cohort.population_size = dataset.clients.size();
    }
    return result;
}

}  // namespace shelterkit

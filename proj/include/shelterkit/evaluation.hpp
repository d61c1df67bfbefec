#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "shelterkit/classifiers.hpp"
#include "shelterkit/config.hpp"
#include "shelterkit/records.hpp"
#include "shelterkit/timeline.hpp"

namespace shelterkit {

struct FoldAssignment {
    std::map<std::string, int> fold_of;
    int k = 0;
};

/// Seeded shuffle within each class, then round-robin assignment, so per-fold
/// positive counts differ by at most 1. Throws TrainingError when k exceeds
/// the minority class size or a class is absent.
FoldAssignment stratified_kfold(const std::map<std::string, bool>& labels, int k,
                                std::uint64_t seed);

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;

    std::size_t positives() const { return tp + fn; }
    std::size_t negatives() const { return fp + tn; }
    std::size_t total() const { return tp + fp + fn + tn; }

    bool operator==(const ConfusionCounts&) const = default;
};

struct MetricsReport {
    double tpr = 0.0;
    double fpr = 0.0;
    std::optional<double> precision;  // absent when nothing was flagged
    double accuracy = 0.0;
    ConfusionCounts counts;
    std::size_t group_size = 0;  // tp + fp
};

/// tpr = tp/P, fpr = fp/N, precision = tp/(tp+fp), accuracy = (tp+tn)/(P+N).
MetricsReport classification_metrics(const ConfusionCounts& counts);

enum class Algorithm { Threshold, Logistic, Mlp };

const char* algorithm_name(Algorithm a);
std::optional<Algorithm> algorithm_from_name(std::string_view name);

/// One client after labeling and featurization.
struct PreparedClient {
    std::string client_id;
    FeatureVector features;
    bool chronic = false;
};

/// Labels (full history) and featurizes (90-day window) every client. Throws
/// StatsError when a client has no Sleep events.
std::vector<PreparedClient> prepare_clients(const Dataset& dataset, const RunConfig& cfg);

using TrainedModel = std::variant<ThresholdRule, LogisticModel, MlpModel>;

/// Fits the normalizer and model on the clients outside `test_fold` (the
/// threshold rule ignores training data). The trainer seed is derived from
/// (cfg.seed, test_fold) so folds are independent and reproducible.
TrainedModel train_fold(Algorithm algorithm, std::span<const PreparedClient> clients,
                        const FoldAssignment& folds, int test_fold, const RunConfig& cfg);

Prediction predict_with(const TrainedModel& model, const FeatureVector& f);

struct ExperimentResult {
    Algorithm algorithm = Algorithm::Threshold;
    MetricsReport metrics;
    CohortReport cohort;  // shelter-access history of everyone flagged (tp + fp)
    std::vector<std::string> flagged_ids;
    std::vector<TrainedModel> fold_models;  // indexed by fold
};

/// Full protocol: label, featurize, stratified k-fold, per-fold train/test,
/// pool test predictions into one confusion matrix, then summarize the full
/// histories of the flagged cohort.
ExperimentResult run_experiment(const Dataset& dataset, Algorithm algorithm, int k,
                                std::uint64_t seed, const RunConfig& cfg);

}  // namespace shelterkit

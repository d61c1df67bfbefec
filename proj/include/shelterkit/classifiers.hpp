#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "shelterkit/features.hpp"

namespace shelterkit {

/// Flags a client when the 90-day window holds at least min_stays stay dates.
struct ThresholdRule {
    int min_stays = 67;
    int window_days = 90;
};

bool threshold_predict(const ThresholdRule& rule, const FeatureVector& f);

struct TrainConfig {
    double learning_rate = 0.01;  // initial rate
    int max_epochs = 500;
    int batch_size = 32;
    double tolerance = 1e-4;
    bool adaptive = true;
    std::uint64_t seed = 0;

    bool operator==(const TrainConfig&) const = default;
};

struct Prediction {
    double probability = 0.0;
    bool label = false;  // probability >= 0.5
};

/// Rows of already-normalized feature values.
using Matrix = std::vector<std::vector<double>>;
using Labels = std::vector<std::uint8_t>;

// ---------------------------------------------------------------------------
// Logistic regression (sleep + age), unregularized, full-batch gradient descent
// ---------------------------------------------------------------------------

struct LogisticModel {
    std::vector<double> weights;
    double bias = 0.0;
    NormalizationParams normalizer;  // attached by the caller that fit it
    TrainConfig config;
};

/// Mean binary cross-entropy of (weights, bias) on x/y; fills gradients when
/// requested. Exposed so finite-difference checks can probe the same loss the
/// trainer descends.
double logistic_loss(std::span<const double> weights, double bias, const Matrix& x,
                     const Labels& y, std::vector<double>* grad_weights = nullptr,
                     double* grad_bias = nullptr);

/// Full-batch gradient descent with backtracking halving, so the loss is
/// non-increasing across accepted steps. Deterministic. Requires at least one
/// example of each class; throws TrainingError on divergence.
LogisticModel train_logistic(const Matrix& x, const Labels& y, const TrainConfig& cfg);

double logistic_probability(const LogisticModel& m, std::span<const double> x);
Prediction logistic_predict(const LogisticModel& m, const FeatureVector& f);

// ---------------------------------------------------------------------------
// Multilayer perceptron: inputs -> hidden ReLU -> sigmoid output
// ---------------------------------------------------------------------------

struct MlpModel {
    std::size_t input_dim = 10;
    std::size_t hidden_units = 100;
    std::vector<double> hidden_weights;  // input_dim x hidden_units, row-major
    std::vector<double> hidden_bias;     // hidden_units
    std::vector<double> output_weights;  // hidden_units
    double output_bias = 0.0;
    double l2_penalty = 0.05;
    NormalizationParams normalizer;
    TrainConfig config;
};

/// Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases.
MlpModel init_mlp(std::size_t input_dim, std::size_t hidden_units, std::uint64_t seed,
                  double l2_penalty = 0.05);

struct MlpGradients {
    std::vector<double> hidden_weights;
    std::vector<double> hidden_bias;
    std::vector<double> output_weights;
    double output_bias = 0.0;
};

/// Mean binary cross-entropy over x/y plus l2_penalty * sum(weights^2) /
/// (2 * |x|), biases excluded from the penalty. Fills gradients when requested.
double mlp_loss(const MlpModel& m, const Matrix& x, const Labels& y,
                MlpGradients* grad = nullptr);

/// Minibatch SGD with per-epoch seeded shuffling. With cfg.adaptive, the
/// learning rate is divided by 5 whenever the epoch training loss fails to
/// improve on the best seen by cfg.tolerance for 2 consecutive epochs;
/// training stops at max_epochs or once the rate falls below 1e-6.
MlpModel train_mlp(const Matrix& x, const Labels& y, const TrainConfig& cfg,
                   std::size_t hidden_units = 100, double l2_penalty = 0.05);

double mlp_probability(const MlpModel& m, std::span<const double> x);
Prediction mlp_predict(const MlpModel& m, const FeatureVector& f);

// ---------------------------------------------------------------------------
// Model serialization
// ---------------------------------------------------------------------------

nlohmann::ordered_json to_json(const ThresholdRule& rule);
nlohmann::ordered_json to_json(const LogisticModel& m);
nlohmann::ordered_json to_json(const MlpModel& m);

ThresholdRule threshold_from_json(const nlohmann::json& j);
LogisticModel logistic_from_json(const nlohmann::json& j);
MlpModel mlp_from_json(const nlohmann::json& j);

}  // namespace shelterkit

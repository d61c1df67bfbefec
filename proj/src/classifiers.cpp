#include "shelterkit/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "shelterkit/errors.hpp"
#include "shelterkit/rng.hpp"

namespace shelterkit {

namespace {

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/// log(1 + e^z) without overflow; BCE(z, y) = softplus(z) - y*z.
double softplus(double z) {
    if (z > 0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

void require_both_classes(const Labels& y) {
    const bool has_pos = std::find(y.begin(), y.end(), std::uint8_t{1}) != y.end();
    const bool has_neg = std::find(y.begin(), y.end(), std::uint8_t{0}) != y.end();
    if (!has_pos || !has_neg) {
        throw TrainingError("training set needs at least one example of each class");
    }
}

void check_matrix(const Matrix& x, const Labels& y) {
    if (x.empty() || x.size() != y.size()) {
        throw TrainingError("training set is empty or feature/label sizes disagree");
    }
    for (const auto& row : x) {
        if (row.size() != x.front().size()) {
            throw TrainingError("ragged feature matrix");
        }
    }
}

nlohmann::ordered_json normalizer_to_json(const NormalizationParams& p) {
    nlohmann::ordered_json j;
    std::vector<std::string> names;
    names.reserve(p.subset.size());
    for (std::size_t idx : p.subset) names.emplace_back(kFeatureNames[idx]);
    j["features"] = names;
    j["mean"] = p.mean;
    j["stddev"] = p.stddev;
    j["constant"] = p.constant_flag;
    return j;
}

NormalizationParams normalizer_from_json(const nlohmann::json& j) {
    NormalizationParams p;
    for (const auto& name : j.at("features")) {
        const auto it = std::find(kFeatureNames.begin(), kFeatureNames.end(),
                                  name.get<std::string>());
        if (it == kFeatureNames.end()) {
            throw ConfigError("unknown feature name '" + name.get<std::string>() + "'");
        }
        p.subset.push_back(std::size_t(it - kFeatureNames.begin()));
    }
    p.mean = j.at("mean").get<std::vector<double>>();
    p.stddev = j.at("stddev").get<std::vector<double>>();
    p.constant_flag = j.at("constant").get<std::vector<std::uint8_t>>();
    if (p.mean.size() != p.subset.size() || p.stddev.size() != p.subset.size() ||
        p.constant_flag.size() != p.subset.size()) {
        throw ConfigError("normalizer arrays disagree in length");
    }
    return p;
}

nlohmann::ordered_json config_to_json(const TrainConfig& cfg) {
    nlohmann::ordered_json j;
    j["learning_rate"] = cfg.learning_rate;
    j["max_epochs"] = cfg.max_epochs;
    j["batch_size"] = cfg.batch_size;
    j["tolerance"] = cfg.tolerance;
    j["adaptive"] = cfg.adaptive;
    j["seed"] = cfg.seed;
    return j;
}

TrainConfig config_from_json(const nlohmann::json& j) {
    TrainConfig cfg;
    cfg.learning_rate = j.at("learning_rate").get<double>();
    cfg.max_epochs = j.at("max_epochs").get<int>();
    cfg.batch_size = j.at("batch_size").get<int>();
    cfg.tolerance = j.at("tolerance").get<double>();
    cfg.adaptive = j.at("adaptive").get<bool>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    return cfg;
}

void validate_config(const TrainConfig& cfg) {
    if (cfg.learning_rate <= 0 || cfg.batch_size <= 0 || cfg.max_epochs < 0 ||
        cfg.tolerance < 0) {
        throw ConfigError("train config needs positive rate/batch and non-negative epochs");
    }
}

}  // namespace

bool threshold_predict(const ThresholdRule& rule, const FeatureVector& f) {
    return f.sleep >= rule.min_stays;
}

// ---------------------------------------------------------------------------
// Logistic regression
// ---------------------------------------------------------------------------

double logistic_loss(std::span<const double> weights, double bias, const Matrix& x,
                     const Labels& y, std::vector<double>* grad_weights, double* grad_bias) {
    const std::size_t n = x.size();
    const std::size_t dim = weights.size();
    double loss = 0.0;
    if (grad_weights) grad_weights->assign(dim, 0.0);
    if (grad_bias) *grad_bias = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double z = bias;
        for (std::size_t j = 0; j < dim; ++j) z += weights[j] * x[i][j];
        loss += softplus(z) - double(y[i]) * z;
        if (grad_weights || grad_bias) {
            const double delta = sigmoid(z) - double(y[i]);
            if (grad_weights) {
                for (std::size_t j = 0; j < dim; ++j) (*grad_weights)[j] += delta * x[i][j];
            }
            if (grad_bias) *grad_bias += delta;
        }
    }
    loss /= double(n);
    if (grad_weights) {
        for (double& g : *grad_weights) g /= double(n);
    }
    if (grad_bias) *grad_bias /= double(n);
    return loss;
}

LogisticModel train_logistic(const Matrix& x, const Labels& y, const TrainConfig& cfg) {
    check_matrix(x, y);
    require_both_classes(y);
    validate_config(cfg);

    LogisticModel model;
    model.config = cfg;
    model.weights.assign(x.front().size(), 0.0);
    model.bias = 0.0;

    double lr = cfg.learning_rate;
    std::vector<double> grad_w;
    double grad_b = 0.0;
    double loss = logistic_loss(model.weights, model.bias, x, y, &grad_w, &grad_b);
    if (!std::isfinite(loss)) {
        throw TrainingError("logistic loss diverged; try a lower learning rate");
    }

    std::vector<double> trial_w(model.weights.size());
    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        double trial_loss = 0.0;
        double trial_b = 0.0;
        // backtrack until the step does not increase the loss
        for (;;) {
            for (std::size_t j = 0; j < trial_w.size(); ++j) {
                trial_w[j] = model.weights[j] - lr * grad_w[j];
            }
            trial_b = model.bias - lr * grad_b;
            trial_loss = logistic_loss(trial_w, trial_b, x, y);
            if (std::isfinite(trial_loss) && trial_loss <= loss) break;
            lr *= 0.5;
            if (lr < 1e-15) {
                throw TrainingError("logistic step size underflowed; try a lower learning rate");
            }
        }
        model.weights = trial_w;
        model.bias = trial_b;
        const double improvement = loss - trial_loss;
        loss = trial_loss;
        if (improvement < cfg.tolerance) break;
        loss = logistic_loss(model.weights, model.bias, x, y, &grad_w, &grad_b);
    }
    return model;
}

double logistic_probability(const LogisticModel& m, std::span<const double> x) {
    double z = m.bias;
    for (std::size_t j = 0; j < m.weights.size(); ++j) z += m.weights[j] * x[j];
    return sigmoid(z);
}

Prediction logistic_predict(const LogisticModel& m, const FeatureVector& f) {
    const std::vector<double> x = apply_normalizer(f, m.normalizer);
    const double p = logistic_probability(m, x);
    return {p, p >= 0.5};
}

// ---------------------------------------------------------------------------
// Multilayer perceptron
// ---------------------------------------------------------------------------

MlpModel init_mlp(std::size_t input_dim, std::size_t hidden_units, std::uint64_t seed,
                  double l2_penalty) {
    if (input_dim == 0 || hidden_units == 0) {
        throw ConfigError("mlp needs positive input and hidden dimensions");
    }
    MlpModel m;
    m.input_dim = input_dim;
    m.hidden_units = hidden_units;
    m.l2_penalty = l2_penalty;
    m.hidden_weights.resize(input_dim * hidden_units);
    m.hidden_bias.assign(hidden_units, 0.0);
    m.output_weights.resize(hidden_units);
    m.output_bias = 0.0;

    std::mt19937_64 rng(seed);
    const double limit1 = std::sqrt(6.0 / double(input_dim + hidden_units));
    std::uniform_real_distribution<double> dist1(-limit1, limit1);
    for (double& w : m.hidden_weights) w = dist1(rng);
    const double limit2 = std::sqrt(6.0 / double(hidden_units + 1));
    std::uniform_real_distribution<double> dist2(-limit2, limit2);
    for (double& w : m.output_weights) w = dist2(rng);
    return m;
}

namespace {

/// Forward/backward over the rows of x selected by `order[first, last)`.
/// Accumulates into grad when non-null. Returns the summed BCE.
double mlp_pass(const MlpModel& m, const Matrix& x, const Labels& y,
                std::span<const std::size_t> indices, MlpGradients* grad,
                std::vector<double>& hidden_buf) {
    const std::size_t h = m.hidden_units;
    const std::size_t d = m.input_dim;
    double bce_sum = 0.0;
    for (const std::size_t row : indices) {
        const std::vector<double>& xi = x[row];
        // forward
        for (std::size_t j = 0; j < h; ++j) hidden_buf[j] = m.hidden_bias[j];
        for (std::size_t i = 0; i < d; ++i) {
            const double v = xi[i];
            if (v == 0.0) continue;
            const double* wrow = &m.hidden_weights[i * h];
            for (std::size_t j = 0; j < h; ++j) hidden_buf[j] += v * wrow[j];
        }
        double z = m.output_bias;
        for (std::size_t j = 0; j < h; ++j) {
            if (hidden_buf[j] > 0.0) z += hidden_buf[j] * m.output_weights[j];
        }
        bce_sum += softplus(z) - double(y[row]) * z;
        if (!grad) continue;
        // backward
        const double delta_out = sigmoid(z) - double(y[row]);
        grad->output_bias += delta_out;
        for (std::size_t j = 0; j < h; ++j) {
            const double a = hidden_buf[j] > 0.0 ? hidden_buf[j] : 0.0;
            grad->output_weights[j] += delta_out * a;
            // reuse the buffer for the hidden-layer delta
            hidden_buf[j] = hidden_buf[j] > 0.0 ? delta_out * m.output_weights[j] : 0.0;
            grad->hidden_bias[j] += hidden_buf[j];
        }
        for (std::size_t i = 0; i < d; ++i) {
            const double v = xi[i];
            if (v == 0.0) continue;
            double* grow = &grad->hidden_weights[i * h];
            for (std::size_t j = 0; j < h; ++j) grow[j] += v * hidden_buf[j];
        }
    }
    return bce_sum;
}

void add_l2_terms(const MlpModel& m, std::size_t n, double& loss, MlpGradients* grad) {
    double sq = 0.0;
    for (double w : m.hidden_weights) sq += w * w;
    for (double w : m.output_weights) sq += w * w;
    loss += m.l2_penalty * sq / (2.0 * double(n));
    if (grad) {
        const double scale = m.l2_penalty / double(n);
        for (std::size_t k = 0; k < m.hidden_weights.size(); ++k) {
            grad->hidden_weights[k] += scale * m.hidden_weights[k];
        }
        for (std::size_t k = 0; k < m.output_weights.size(); ++k) {
            grad->output_weights[k] += scale * m.output_weights[k];
        }
    }
}

void zero_gradients(const MlpModel& m, MlpGradients& g) {
    g.hidden_weights.assign(m.hidden_weights.size(), 0.0);
    g.hidden_bias.assign(m.hidden_bias.size(), 0.0);
    g.output_weights.assign(m.output_weights.size(), 0.0);
    g.output_bias = 0.0;
}

}  // namespace

double mlp_loss(const MlpModel& m, const Matrix& x, const Labels& y, MlpGradients* grad) {
    if (x.empty() || x.size() != y.size()) {
        throw TrainingError("mlp loss needs a non-empty matched sample");
    }
    if (grad) zero_gradients(m, *grad);
    std::vector<std::size_t> all(x.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::vector<double> hidden_buf(m.hidden_units);
    double loss = mlp_pass(m, x, y, all, grad, hidden_buf) / double(x.size());
    if (grad) {
        const double inv_n = 1.0 / double(x.size());
        for (double& g : grad->hidden_weights) g *= inv_n;
        for (double& g : grad->hidden_bias) g *= inv_n;
        for (double& g : grad->output_weights) g *= inv_n;
        grad->output_bias *= inv_n;
    }
    add_l2_terms(m, x.size(), loss, grad);
    return loss;
}

MlpModel train_mlp(const Matrix& x, const Labels& y, const TrainConfig& cfg,
                   std::size_t hidden_units, double l2_penalty) {
    check_matrix(x, y);
    require_both_classes(y);
    validate_config(cfg);

    const std::size_t n = x.size();
    MlpModel m = init_mlp(x.front().size(), hidden_units, cfg.seed, l2_penalty);
    m.config = cfg;
    if (cfg.max_epochs == 0) return m;

    // shuffle stream independent of the init stream, both fixed by cfg.seed
    std::mt19937_64 rng(derive_seed(cfg.seed, 1));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::size_t> all = order;

    MlpGradients grad;
    std::vector<double> hidden_buf(m.hidden_units);
    const std::size_t batch = std::size_t(cfg.batch_size);

    double lr = cfg.learning_rate;
    double best_loss = std::numeric_limits<double>::infinity();
    int stale_epochs = 0;

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t count = std::min(batch, n - start);
            const std::span<const std::size_t> slice(order.data() + start, count);
            zero_gradients(m, grad);
            mlp_pass(m, x, y, slice, &grad, hidden_buf);
            const double inv = 1.0 / double(count);
            const double reg = m.l2_penalty * inv;
            for (std::size_t k = 0; k < m.hidden_weights.size(); ++k) {
                m.hidden_weights[k] -=
                    lr * (grad.hidden_weights[k] * inv + reg * m.hidden_weights[k]);
            }
            for (std::size_t j = 0; j < m.hidden_bias.size(); ++j) {
                m.hidden_bias[j] -= lr * grad.hidden_bias[j] * inv;
            }
            for (std::size_t j = 0; j < m.output_weights.size(); ++j) {
                m.output_weights[j] -=
                    lr * (grad.output_weights[j] * inv + reg * m.output_weights[j]);
            }
            m.output_bias -= lr * grad.output_bias * inv;
        }

        double epoch_loss = mlp_pass(m, x, y, all, nullptr, hidden_buf) / double(n);
        add_l2_terms(m, n, epoch_loss, nullptr);
        if (!std::isfinite(epoch_loss)) {
            throw TrainingError("mlp loss diverged; try a lower learning rate");
        }

        if (cfg.adaptive) {
            if (epoch_loss > best_loss - cfg.tolerance) {
                ++stale_epochs;
            } else {
                stale_epochs = 0;
            }
            if (epoch_loss < best_loss) best_loss = epoch_loss;
            if (stale_epochs >= 2) {
                lr /= 5.0;
                stale_epochs = 0;
                if (lr < 1e-6) break;
            }
        }
    }
    return m;
}

double mlp_probability(const MlpModel& m, std::span<const double> x) {
    double z = m.output_bias;
    for (std::size_t j = 0; j < m.hidden_units; ++j) {
        double a = m.hidden_bias[j];
        for (std::size_t i = 0; i < m.input_dim; ++i) {
            a += x[i] * m.hidden_weights[i * m.hidden_units + j];
        }
        if (a > 0.0) z += a * m.output_weights[j];
    }
    return sigmoid(z);
}

Prediction mlp_predict(const MlpModel& m, const FeatureVector& f) {
    const std::vector<double> x = apply_normalizer(f, m.normalizer);
    const double p = mlp_probability(m, x);
    return {p, p >= 0.5};
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

nlohmann::ordered_json to_json(const ThresholdRule& rule) {
    nlohmann::ordered_json j;
    j["model"] = "threshold";
    j["min_stays"] = rule.min_stays;
    j["window_days"] = rule.window_days;
    return j;
}

nlohmann::ordered_json to_json(const LogisticModel& m) {
    nlohmann::ordered_json j;
    j["model"] = "logistic";
    j["weights"] = m.weights;
    j["bias"] = m.bias;
    j["normalizer"] = normalizer_to_json(m.normalizer);
    j["config"] = config_to_json(m.config);
    return j;
}

nlohmann::ordered_json to_json(const MlpModel& m) {
    nlohmann::ordered_json j;
    j["model"] = "mlp";
    j["architecture"] = {{"input_dim", m.input_dim},
                         {"hidden_units", m.hidden_units},
                         {"activation", "relu"},
                         {"output", "sigmoid"},
                         {"l2_penalty", m.l2_penalty}};
    j["hidden_weights"] = m.hidden_weights;  // input_dim x hidden_units, row-major
    j["hidden_bias"] = m.hidden_bias;
    j["output_weights"] = m.output_weights;
    j["output_bias"] = m.output_bias;
    j["normalizer"] = normalizer_to_json(m.normalizer);
    j["config"] = config_to_json(m.config);
    return j;
}

namespace {

void require_model_tag(const nlohmann::json& j, std::string_view tag) {
    if (j.at("model").get<std::string>() != tag) {
        throw ConfigError("expected a '" + std::string(tag) + "' model document");
    }
}

}  // namespace

ThresholdRule threshold_from_json(const nlohmann::json& j) {
    require_model_tag(j, "threshold");
    ThresholdRule rule;
    rule.min_stays = j.at("min_stays").get<int>();
    rule.window_days = j.at("window_days").get<int>();
    return rule;
}

LogisticModel logistic_from_json(const nlohmann::json& j) {
    require_model_tag(j, "logistic");
    LogisticModel m;
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    m.normalizer = normalizer_from_json(j.at("normalizer"));
    m.config = config_from_json(j.at("config"));
    return m;
}

MlpModel mlp_from_json(const nlohmann::json& j) {
    require_model_tag(j, "mlp");
    MlpModel m;
    const auto& arch = j.at("architecture");
    m.input_dim = arch.at("input_dim").get<std::size_t>();
    m.hidden_units = arch.at("hidden_units").get<std::size_t>();
    m.l2_penalty = arch.at("l2_penalty").get<double>();
    m.hidden_weights = j.at("hidden_weights").get<std::vector<double>>();
    m.hidden_bias = j.at("hidden_bias").get<std::vector<double>>();
    m.output_weights = j.at("output_weights").get<std::vector<double>>();
    m.output_bias = j.at("output_bias").get<double>();
    m.normalizer = normalizer_from_json(j.at("normalizer"));
    m.config = config_from_json(j.at("config"));
    if (m.hidden_weights.size() != m.input_dim * m.hidden_units ||
        m.hidden_bias.size() != m.hidden_units ||
        m.output_weights.size() != m.hidden_units) {
        throw ConfigError("mlp weight arrays disagree with the architecture");
    }
    return m;
}

}  // namespace shelterkit

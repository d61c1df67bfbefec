#include <doctest.h>

#include <cmath>
#include <random>

#include "gradient_checks.hpp"
#include "shelterkit/classifiers.hpp"
#include "shelterkit/errors.hpp"

using namespace shelterkit;
using gradient_checks::logistic_gradient_check;
using gradient_checks::mlp_gradient_check;
using gradient_checks::random_labels;
using gradient_checks::random_matrix;

namespace {

/// Two radius-separated clusters per class on opposite corners.
void xor_clusters(std::mt19937_64& rng, std::size_t n, Matrix& x, Labels& y) {
    std::normal_distribution<double> noise(0.0, 0.18);
    std::uniform_int_distribution<int> corner(0, 3);
    x.clear();
    y.clear();
    for (std::size_t i = 0; i < n; ++i) {
        const int c = corner(rng);
        const double cx = (c & 1) ? 1.0 : -1.0;
        const double cy = (c & 2) ? 1.0 : -1.0;
        x.push_back({cx + noise(rng), cy + noise(rng)});
        y.push_back(cx * cy > 0 ? 1 : 0);
    }
}

double train_accuracy_mlp(const MlpModel& m, const Matrix& x, const Labels& y) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const bool label = mlp_probability(m, x[i]) >= 0.5;
        if (label == bool(y[i])) ++hits;
    }
    return double(hits) / double(x.size());
}

}  // namespace

TEST_SUITE_BEGIN("classifiers");

TEST_CASE("threshold boundaries") {
    const ThresholdRule rule;
    FeatureVector f;
    f.sleep = 67;
    CHECK(threshold_predict(rule, f));
    f.sleep = 66;
    CHECK(!threshold_predict(rule, f));
    f.sleep = 0;
    CHECK(!threshold_predict(rule, f));
}

TEST_CASE("threshold is monotone in the sleep count") {
    const ThresholdRule rule;
    bool prev = false;
    for (int s = 0; s <= 90; ++s) {
        FeatureVector f;
        f.sleep = s;
        const bool now = threshold_predict(rule, f);
        CHECK(!(prev && !now));
        prev = now;
    }
}

TEST_CASE("logistic separates a separable toy set") {
    Matrix x;
    Labels y;
    for (int i = 0; i < 50; ++i) {
        x.push_back({-1.0});
        y.push_back(0);
        x.push_back({1.0});
        y.push_back(1);
    }
    TrainConfig cfg;
    cfg.max_epochs = 200;
    const LogisticModel m = train_logistic(x, y, cfg);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK((logistic_probability(m, x[i]) >= 0.5) == bool(y[i]));
    }
}

TEST_CASE("logistic training loss is non-increasing across accepted steps") {
    std::mt19937_64 rng(11);
    const Matrix x = random_matrix(rng, 60, 2);
    const Labels y = random_labels(rng, 60);
    double prev = std::log(2.0) + 1e-12;  // loss at the zero initializer
    for (int epochs = 1; epochs <= 10; ++epochs) {
        TrainConfig cfg;
        cfg.max_epochs = epochs;
        cfg.tolerance = 0.0;
        const LogisticModel m = train_logistic(x, y, cfg);
        const double loss = logistic_loss(m.weights, m.bias, x, y);
        CHECK(loss <= prev);
        prev = loss;
    }
}

TEST_CASE("logistic requires both classes") {
    Matrix x{{0.5}, {1.5}};
    Labels y{1, 1};
    CHECK_THROWS_AS(train_logistic(x, y, TrainConfig{}), TrainingError);
}

TEST_CASE("logistic divergence raises a training error") {
    Matrix x{{1e308}, {-1e308}};
    Labels y{1, 0};
    CHECK_THROWS_AS(train_logistic(x, y, TrainConfig{}), TrainingError);
}

TEST_CASE("logistic gradient matches central finite differences") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        CHECK(logistic_gradient_check(rng, 20, 2) < 1e-4);
    }
}

TEST_CASE("logistic scoring matches a direct sigmoid") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> normal(0.0, 2.0);
    for (int trial = 0; trial < 10; ++trial) {
        LogisticModel m;
        m.weights = {normal(rng), normal(rng)};
        m.bias = normal(rng);
        const std::vector<double> x{normal(rng), normal(rng)};
        const double z = m.weights[0] * x[0] + m.weights[1] * x[1] + m.bias;
        const double direct = 1.0 / (1.0 + std::exp(-z));
        CHECK(std::abs(logistic_probability(m, x) - direct) < 1e-12);
    }
}

TEST_CASE("zero logistic model scores one half everywhere") {
    LogisticModel m;
    m.weights = {0.0, 0.0};
    m.bias = 0.0;
    CHECK(logistic_probability(m, std::vector<double>{3.0, -7.0}) == 0.5);
    m.bias = 40.0;
    CHECK(logistic_probability(m, std::vector<double>{0.0, 0.0}) > 0.999999);
}

TEST_CASE("logistic decision region is a half-plane") {
    std::mt19937_64 rng(14);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        LogisticModel m;
        m.weights = {normal(rng), normal(rng)};
        m.bias = normal(rng);
        const std::vector<double> a{normal(rng), normal(rng)};
        const std::vector<double> c{normal(rng), normal(rng)};
        const std::vector<double> mid{(a[0] + c[0]) / 2, (a[1] + c[1]) / 2};
        const bool pa = logistic_probability(m, a) >= 0.5;
        const bool pc = logistic_probability(m, c) >= 0.5;
        const bool pm = logistic_probability(m, mid) >= 0.5;
        if (pa && pc) CHECK(pm);
        if (!pa && !pc) CHECK(!pm);
    }
}

TEST_CASE("mlp fits xor-style clusters") {
    std::mt19937_64 rng(15);
    Matrix x;
    Labels y;
    xor_clusters(rng, 200, x, y);
    TrainConfig cfg;
    cfg.seed = 3;
    const MlpModel m = train_mlp(x, y, cfg);
    CHECK(train_accuracy_mlp(m, x, y) >= 0.98);
}

TEST_CASE("zero-epoch training returns the initialization") {
    std::mt19937_64 rng(16);
    Matrix x;
    Labels y;
    xor_clusters(rng, 40, x, y);
    TrainConfig cfg;
    cfg.max_epochs = 0;
    cfg.seed = 9;
    const MlpModel trained = train_mlp(x, y, cfg);
    const MlpModel init = init_mlp(2, 100, 9);
    CHECK(trained.hidden_weights == init.hidden_weights);
    CHECK(trained.hidden_bias == init.hidden_bias);
    CHECK(trained.output_weights == init.output_weights);
    CHECK(trained.output_bias == init.output_bias);
}

TEST_CASE("mlp gradient matches central finite differences on a small net") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        CHECK(mlp_gradient_check(rng, 5, 3, 4, 0.05) < 1e-4);
    }
}

TEST_CASE("all-zero mlp outputs one half") {
    MlpModel m;
    m.input_dim = 3;
    m.hidden_units = 4;
    m.hidden_weights.assign(12, 0.0);
    m.hidden_bias.assign(4, 0.0);
    m.output_weights.assign(4, 0.0);
    m.output_bias = 0.0;
    CHECK(mlp_probability(m, std::vector<double>{1.0, -2.0, 0.5}) == 0.5);
}

TEST_CASE("dead hidden layer passes only the output bias through") {
    MlpModel m;
    m.input_dim = 2;
    m.hidden_units = 3;
    m.hidden_weights.assign(6, -5.0);  // all pre-activations <= 0 for positive inputs
    m.hidden_bias.assign(3, 0.0);
    m.output_weights.assign(3, 2.0);
    m.output_bias = 0.3;
    const double expected = 1.0 / (1.0 + std::exp(-0.3));
    CHECK(mlp_probability(m, std::vector<double>{1.0, 2.0}) ==
          doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("mlp forward pass matches an independent recomputation") {
    std::mt19937_64 rng(18);
    std::normal_distribution<double> normal(0.0, 1.0);
    const MlpModel m = init_mlp(4, 6, 21);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> x(4);
        for (double& v : x) v = normal(rng);
        double z = m.output_bias;
        for (std::size_t j = 0; j < 6; ++j) {
            double a = m.hidden_bias[j];
            for (std::size_t i = 0; i < 4; ++i) a += x[i] * m.hidden_weights[i * 6 + j];
            z += std::max(a, 0.0) * m.output_weights[j];
        }
        const double direct = 1.0 / (1.0 + std::exp(-z));
        CHECK(std::abs(mlp_probability(m, x) - direct) < 1e-12);
    }
}

TEST_CASE("both trainers are deterministic under a fixed seed") {
    std::mt19937_64 rng(19);
    Matrix x;
    Labels y;
    xor_clusters(rng, 120, x, y);
    TrainConfig cfg;
    cfg.seed = 4;
    cfg.max_epochs = 30;
    const MlpModel a = train_mlp(x, y, cfg);
    const MlpModel b = train_mlp(x, y, cfg);
    CHECK(a.hidden_weights == b.hidden_weights);
    CHECK(a.hidden_bias == b.hidden_bias);
    CHECK(a.output_weights == b.output_weights);
    CHECK(a.output_bias == b.output_bias);

    const Matrix x2 = random_matrix(rng, 50, 2);
    const Labels y2 = random_labels(rng, 50);
    const LogisticModel la = train_logistic(x2, y2, cfg);
    const LogisticModel lb = train_logistic(x2, y2, cfg);
    CHECK(la.weights == lb.weights);
    CHECK(la.bias == lb.bias);
}

TEST_CASE("l2 regularization keeps the training loss above the unregularized run") {
    std::mt19937_64 rng(20);
    Matrix x;
    Labels y;
    xor_clusters(rng, 80, x, y);
    TrainConfig cfg;
    cfg.seed = 5;
    cfg.max_epochs = 300;
    const MlpModel free = train_mlp(x, y, cfg, 32, 0.0);
    const MlpModel penalized = train_mlp(x, y, cfg, 32, 0.05);
    CHECK(mlp_loss(free, x, y) < mlp_loss(penalized, x, y));
}

TEST_CASE("mlp divergence raises a training error") {
    std::mt19937_64 rng(21);
    Matrix x;
    Labels y;
    xor_clusters(rng, 40, x, y);
    TrainConfig cfg;
    cfg.learning_rate = 1e18;
    cfg.adaptive = false;
    CHECK_THROWS_AS(train_mlp(x, y, cfg, 8), TrainingError);
}

TEST_CASE("training on shuffled labels scores near the base rate") {
    std::mt19937_64 rng(22);
    // informative feature, then destroy the labels
    Matrix x;
    Labels y;
    for (int i = 0; i < 300; ++i) {
        const bool pos = i % 10 < 3;
        std::normal_distribution<double> noise(pos ? 2.0 : -2.0, 1.0);
        x.push_back({noise(rng)});
        y.push_back(pos ? 1 : 0);
    }
    Labels shuffled = y;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);

    Matrix train_x(x.begin(), x.begin() + 200);
    Labels train_y(shuffled.begin(), shuffled.begin() + 200);
    TrainConfig cfg;
    const LogisticModel m = train_logistic(train_x, train_y, cfg);

    std::size_t hits = 0, negatives = 0;
    for (std::size_t i = 200; i < x.size(); ++i) {
        const bool label = logistic_probability(m, x[i]) >= 0.5;
        if (label == bool(shuffled[i])) ++hits;
        if (!shuffled[i]) ++negatives;
    }
    const double accuracy = double(hits) / 100.0;
    const double base = std::max(double(negatives), 100.0 - double(negatives)) / 100.0;
    CHECK(std::abs(accuracy - base) < 0.12);
}

TEST_CASE("model json round-trips") {
    std::mt19937_64 rng(23);
    Matrix x;
    Labels y;
    xor_clusters(rng, 60, x, y);
    TrainConfig cfg;
    cfg.seed = 6;
    cfg.max_epochs = 10;
    MlpModel m = train_mlp(x, y, cfg, 8);
    std::vector<FeatureVector> fixture(4);
    fixture[0].sleep = 10;
    fixture[1].sleep = 80;
    fixture[2].age = 44;
    fixture[3].log = 3;
    m.normalizer = fit_normalizer(fixture, {2, 0});

    const MlpModel back = mlp_from_json(to_json(m));
    CHECK(back.hidden_weights == m.hidden_weights);
    CHECK(back.output_bias == m.output_bias);
    CHECK(back.normalizer.mean == m.normalizer.mean);
    CHECK(back.config == m.config);

    LogisticModel lm;
    lm.weights = {0.25, -1.5};
    lm.bias = 0.75;
    lm.normalizer = m.normalizer;
    lm.config = cfg;
    const LogisticModel lback = logistic_from_json(to_json(lm));
    CHECK(lback.weights == lm.weights);
    CHECK(lback.bias == lm.bias);

    const ThresholdRule rule{67, 90};
    const ThresholdRule rback = threshold_from_json(to_json(rule));
    CHECK(rback.min_stays == 67);
    CHECK(rback.window_days == 90);
}

TEST_SUITE_END();

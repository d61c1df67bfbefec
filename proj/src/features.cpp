#include "shelterkit/features.hpp"

#include <cmath>

#include "shelterkit/errors.hpp"

namespace shelterkit {

double FeatureVector::at(std::size_t feature) const {
    return as_array()[feature];
}

std::array<double, 10> FeatureVector::as_array() const {
    return {double(age),    double(bar), double(sleep),  double(log),      double(counsellor),
            double(police), double(ems), double(health), double(violence), double(addiction)};
}

FeatureVector extract_features(const ClientHistory& history, int window_days,
                               BucketTimezone tz) {
    if (window_days < 1) throw ConfigError("feature window must be >= 1 day");
    const auto anchor = first_sleep_date(history, tz);
    if (!anchor) {
        throw StatsError("client '" + history.client_id + "' has no sleep events to anchor on");
    }
    const Date window_end = *anchor + (window_days - 1);

    FeatureVector fv;
    fv.age = history.age;
    Date last_stay_counted{};
    bool have_stay = false;
    for (const EventRecord& e : history.events) {
        const Date d = date_of(e.timestamp, tz);
        if (d < *anchor || d > window_end) continue;
        switch (e.kind) {
            case EventKind::Sleep:
                if (!have_stay || last_stay_counted < d) {
                    ++fv.sleep;
                    last_stay_counted = d;
                    have_stay = true;
                }
                break;
            case EventKind::Bar: ++fv.bar; break;
            case EventKind::Log: ++fv.log; break;
            case EventKind::Counsellor: ++fv.counsellor; break;
        }
        // a record contributes at most 1 per keyword category
        if (e.keyword_counts[0] >= 1) ++fv.police;
        if (e.keyword_counts[1] >= 1) ++fv.ems;
        if (e.keyword_counts[2] >= 1) ++fv.health;
        if (e.keyword_counts[3] >= 1) ++fv.violence;
        if (e.keyword_counts[4] >= 1) ++fv.addiction;
    }
    return fv;
}

FeatureSubset logistic_feature_subset() { return {2, 0}; }

FeatureSubset all_feature_subset() {
    FeatureSubset s(kFeatureNames.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = i;
    return s;
}

NormalizationParams fit_normalizer(std::span<const FeatureVector> vectors,
                                   const FeatureSubset& subset) {
    if (vectors.size() < 2) throw TrainingError("normalizer needs at least 2 vectors");
    NormalizationParams p;
    p.subset = subset;
    p.mean.assign(subset.size(), 0.0);
    p.stddev.assign(subset.size(), 0.0);
    p.constant_flag.assign(subset.size(), 0);

    const double n = double(vectors.size());
    for (const FeatureVector& v : vectors) {
        for (std::size_t j = 0; j < subset.size(); ++j) p.mean[j] += v.at(subset[j]);
    }
    for (double& m : p.mean) m /= n;

    for (const FeatureVector& v : vectors) {
        for (std::size_t j = 0; j < subset.size(); ++j) {
            const double d = v.at(subset[j]) - p.mean[j];
            p.stddev[j] += d * d;
        }
    }
    for (std::size_t j = 0; j < subset.size(); ++j) {
        p.stddev[j] = std::sqrt(p.stddev[j] / n);
        if (p.stddev[j] == 0.0) {
            p.stddev[j] = 1.0;
            p.constant_flag[j] = 1;
        }
    }
    return p;
}

std::vector<double> apply_normalizer(const FeatureVector& v, const NormalizationParams& p) {
    std::vector<double> out(p.dim());
    for (std::size_t j = 0; j < p.dim(); ++j) {
        out[j] = p.constant_flag[j] ? 0.0 : (v.at(p.subset[j]) - p.mean[j]) / p.stddev[j];
    }
    return out;
}

std::vector<double> denormalize(std::span<const double> x, const NormalizationParams& p) {
    std::vector<double> out(p.dim());
    for (std::size_t j = 0; j < p.dim(); ++j) {
        out[j] = p.constant_flag[j] ? p.mean[j] : x[j] * p.stddev[j] + p.mean[j];
    }
    return out;
}

}  // namespace shelterkit

#include "shelterkit/synthgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "shelterkit/errors.hpp"
#include "shelterkit/rng.hpp"

namespace shelterkit {

const ClusterParams& CohortSpec::cluster(Cluster c) const {
    switch (c) {
        case Cluster::Transitional: return transitional;
        case Cluster::Episodic: return episodic;
        case Cluster::Chronic: return chronic;
    }
    return transitional;
}

ClusterParams& CohortSpec::cluster(Cluster c) {
    return const_cast<ClusterParams&>(static_cast<const CohortSpec&>(*this).cluster(c));
}

namespace {

constexpr std::array<std::string_view, 3> kClusterNames{"transitional", "episodic", "chronic"};

void check_rate(double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw ConfigError(std::string(what) + " must lie in [0, 1]");
    }
}

void validate_cluster(const ClusterParams& c, std::string_view name) {
    const std::string prefix(name);
    if (!(c.episode_count.p > 0.0 && c.episode_count.p <= 1.0)) {
        throw ConfigError(prefix + ".episodes.p must lie in (0, 1]");
    }
    if (c.episode_count.min < 1 || c.episode_count.max < c.episode_count.min) {
        throw ConfigError(prefix + ".episodes bounds are invalid");
    }
    for (const auto* d : {&c.episode_length, &c.episode_gap}) {
        if (d->min < 1 || d->max < d->min || !(d->sigma >= 0.0)) {
            throw ConfigError(prefix + " day distribution bounds are invalid");
        }
    }
    check_rate(c.attendance, "attendance");
    check_rate(c.bar_rate, "bar_rate");
    check_rate(c.log_rate, "log_rate");
    check_rate(c.counsellor_rate, "counsellor_rate");
    for (double r : c.keyword_rates) check_rate(r, "keyword rate");
}

}  // namespace

void CohortSpec::validate() const {
    double weight_sum = 0.0;
    for (double w : cluster_weights) {
        if (w < 0.0) throw ConfigError("cluster weights must be non-negative");
        weight_sum += w;
    }
    if (std::abs(weight_sum - 1.0) > 1e-9) {
        throw ConfigError("cluster weights must sum to 1");
    }
    if (window_end < window_start) throw ConfigError("observation window is inverted");
    const int window_days = window_end - window_start + 1;
    for (std::size_t c = 0; c < 3; ++c) {
        if (cluster_weights[c] <= 0.0) continue;
        validate_cluster(cluster(Cluster(c)), kClusterNames[c]);
        if (window_days < cluster(Cluster(c)).episode_length.min) {
            throw ConfigError("observation window is shorter than the minimum " +
                              std::string(kClusterNames[c]) + " episode");
        }
    }
    check_rate(first_sleep.before_mass, "first_sleep.before_mass");
    check_rate(first_sleep.after_mass, "first_sleep.after_mass");
    if (first_sleep.before_mass + first_sleep.after_mass > 1.0) {
        throw ConfigError("first_sleep segment masses exceed 1");
    }
    if (first_sleep.before_mass > 0.0 && first_sleep.before_date <= window_start) {
        throw ConfigError("first_sleep.before_date must fall inside the window");
    }
    if (first_sleep.after_mass > 0.0 && first_sleep.after_date >= window_end) {
        throw ConfigError("first_sleep.after_date must fall inside the window");
    }
    if (first_sleep.before_date > first_sleep.after_date &&
        (first_sleep.before_mass > 0.0 || first_sleep.after_mass > 0.0)) {
        throw ConfigError("first_sleep segment dates are out of order");
    }
    if (age_min < 0 || age_max < age_min) throw ConfigError("age range is invalid");
    if (n_clients > 0 && cluster_weights[0] + cluster_weights[1] + cluster_weights[2] <= 0.0) {
        throw ConfigError("no cluster has positive weight");
    }
}

CohortSpec default_cohort_spec() {
    CohortSpec spec;
    spec.n_clients = 18398;
    spec.seed = 1;
    spec.window_start = make_date(2007, 7, 1);
    spec.window_end = make_date(2020, 1, 20);
    spec.cluster_weights = {0.62, 0.28, 0.10};
    spec.first_sleep.before_date = make_date(2009, 7, 1);
    spec.first_sleep.before_mass = 0.476;
    spec.first_sleep.after_date = make_date(2018, 1, 20);
    spec.first_sleep.after_mass = 0.085;
    spec.age_min = 18;
    spec.age_max = 75;

    spec.transitional.episode_count = {0.70, 1, 3};
    spec.transitional.episode_length = {std::log(8.0), 0.80, 1, 60};
    spec.transitional.episode_gap = {std::log(90.0), 0.70, 31, 900};
    spec.transitional.attendance = 0.75;
    spec.transitional.bar_rate = 0.010;
    spec.transitional.log_rate = 0.080;
    spec.transitional.counsellor_rate = 0.030;
    spec.transitional.keyword_rates = {0.050, 0.030, 0.040, 0.040, 0.060};

    spec.episodic.episode_count = {0.35, 2, 10};
    spec.episodic.episode_length = {std::log(20.0), 1.05, 2, 400};
    spec.episodic.episode_gap = {std::log(75.0), 0.80, 31, 700};
    spec.episodic.attendance = 0.80;
    spec.episodic.bar_rate = 0.020;
    spec.episodic.log_rate = 0.100;
    spec.episodic.counsellor_rate = 0.040;
    spec.episodic.keyword_rates = {0.070, 0.040, 0.050, 0.060, 0.090};

    spec.chronic.episode_count = {0.50, 1, 6};
    spec.chronic.episode_length = {std::log(230.0), 0.80, 10, 1400};
    spec.chronic.episode_gap = {std::log(75.0), 0.80, 31, 700};
    spec.chronic.attendance = 0.85;
    spec.chronic.bar_rate = 0.030;
    spec.chronic.log_rate = 0.120;
    spec.chronic.counsellor_rate = 0.050;
    spec.chronic.keyword_rates = {0.080, 0.050, 0.060, 0.070, 0.100};

    return spec;
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

namespace {

int draw_truncated_geometric(const TruncatedGeometric& d, std::mt19937_64& rng) {
    if (d.p >= 1.0) return d.min;
    std::geometric_distribution<int> dist(d.p);
    return std::min(d.min + dist(rng), d.max);
}

int draw_rounded_lognormal(const RoundedLogNormal& d, std::mt19937_64& rng) {
    if (d.min == d.max || d.sigma == 0.0) {
        const int v = d.sigma == 0.0 ? int(std::llround(std::exp(d.mu))) : d.min;
        return std::clamp(v, d.min, d.max);
    }
    std::lognormal_distribution<double> dist(d.mu, d.sigma);
    const long long v = std::llround(dist(rng));
    return int(std::clamp<long long>(v, d.min, d.max));
}

Date draw_first_sleep(const CohortSpec& spec, std::mt19937_64& rng) {
    const FirstSleepProfile& fs = spec.first_sleep;
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double u = u01(rng);
    Date lo = spec.window_start, hi = spec.window_end;
    if (fs.before_mass > 0.0 && u < fs.before_mass) {
        hi = fs.before_date - 1;
    } else if (fs.after_mass > 0.0 && u < fs.before_mass + fs.after_mass) {
        lo = fs.after_date + 1;
    } else {
        lo = std::max(lo, fs.before_mass > 0.0 ? fs.before_date : lo);
        hi = std::min(hi, fs.after_mass > 0.0 ? fs.after_date : hi);
    }
    std::uniform_int_distribution<std::int32_t> pick(lo.days, hi.days);
    return Date{pick(rng)};
}

EpochSeconds sleep_timestamp(Date day, std::mt19937_64& rng) {
    // evening check-in, minute resolution
    std::uniform_int_distribution<int> minutes(19 * 60, 23 * 60 + 59);
    const int m = minutes(rng);
    return seconds_at(day, m / 60, m % 60);
}

EpochSeconds daytime_timestamp(Date day, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> minutes(6 * 60, 22 * 60 + 59);
    const int m = minutes(rng);
    return seconds_at(day, m / 60, m % 60);
}

EventRecord make_aux_record(EventKind kind, Date day, const ClusterParams& params,
                            std::mt19937_64& rng) {
    EventRecord rec;
    rec.kind = kind;
    rec.timestamp = daytime_timestamp(day, rng);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (std::size_t c = 0; c < kKeywordCategories; ++c) {
        if (u01(rng) < params.keyword_rates[c]) {
            std::geometric_distribution<int> extra(0.6);
            rec.keyword_counts[c] = 1 + std::min(extra(rng), 8);
        }
    }
    return rec;
}

ClientHistory generate_client(const CohortSpec& spec, std::size_t index) {
    std::mt19937_64 rng(derive_seed(spec.seed, index));
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    const double roll = u01(rng);
    Cluster cluster = Cluster::Chronic;
    if (roll < spec.cluster_weights[0]) {
        cluster = Cluster::Transitional;
    } else if (roll < spec.cluster_weights[0] + spec.cluster_weights[1]) {
        cluster = Cluster::Episodic;
    }
    const ClusterParams& params = spec.cluster(cluster);

    ClientHistory client;
    char id[24];
    std::snprintf(id, sizeof id, "C%06zu", index);
    client.client_id = id;
    std::uniform_int_distribution<int> ages(spec.age_min, spec.age_max);
    client.age = ages(rng);

    const int n_episodes = draw_truncated_geometric(params.episode_count, rng);
    Date day = draw_first_sleep(spec, rng);
    for (int e = 0; e < n_episodes && day <= spec.window_end; ++e) {
        const int length = draw_rounded_lognormal(params.episode_length, rng);
        const Date episode_end = day + (length - 1);
        for (Date d = day; d <= episode_end && d <= spec.window_end; d = d + 1) {
            const bool attended = (d == day) || u01(rng) < params.attendance;
            if (!attended) continue;
            EventRecord sleep;
            sleep.kind = EventKind::Sleep;
            sleep.timestamp = sleep_timestamp(d, rng);
            client.events.push_back(sleep);
            if (u01(rng) < params.bar_rate) {
                client.events.push_back(make_aux_record(EventKind::Bar, d, params, rng));
            }
            if (u01(rng) < params.log_rate) {
                client.events.push_back(make_aux_record(EventKind::Log, d, params, rng));
            }
            if (u01(rng) < params.counsellor_rate) {
                client.events.push_back(make_aux_record(EventKind::Counsellor, d, params, rng));
            }
        }
        day = episode_end + draw_rounded_lognormal(params.episode_gap, rng);
    }

    std::stable_sort(client.events.begin(), client.events.end(),
                     [](const EventRecord& a, const EventRecord& b) {
                         return a.timestamp < b.timestamp;
                     });
    return client;
}

}  // namespace

Dataset generate(const CohortSpec& spec) {
    spec.validate();
    Dataset dataset;
    dataset.observation_start = spec.window_start;
    dataset.observation_end = spec.window_end;
    for (std::size_t i = 0; i < spec.n_clients; ++i) {
        ClientHistory client = generate_client(spec, i);
        const std::string id = client.client_id;
        dataset.clients.emplace(id, std::move(client));
    }
    return dataset;
}

double chronic_prevalence(const Dataset& dataset, std::span<const ChronicRule> rules,
                          BucketTimezone tz) {
    if (dataset.clients.empty()) return 0.0;
    std::size_t chronic = 0;
    for (const auto& [id, client] : dataset.clients) {
        if (label_chronic(derive_stays(client, tz), rules)) ++chronic;
    }
    return double(chronic) / double(dataset.clients.size());
}

CalibrationResult calibrate_chronic_scale(CohortSpec spec, double target_prevalence,
                                          double tolerance, int max_iterations) {
    if (!(target_prevalence > 0.0 && target_prevalence < 1.0)) {
        throw ConfigError("target prevalence must lie in (0, 1)");
    }
    spec.validate();

    const auto measure = [&spec](double mu) {
        CohortSpec trial = spec;
        trial.chronic.episode_length.mu = mu;
        return chronic_prevalence(generate(trial));
    };

    CalibrationResult result;
    double mu = spec.chronic.episode_length.mu;
    double value = measure(mu);
    ++result.iterations;

    // bracket the target, then bisect on the log-scale length parameter
    double lo = mu, hi = mu, lo_val = value, hi_val = value;
    while (lo_val > target_prevalence && result.iterations < max_iterations) {
        lo -= 0.5;
        lo_val = measure(lo);
        ++result.iterations;
    }
    while (hi_val < target_prevalence && result.iterations < max_iterations) {
        hi += 0.5;
        hi_val = measure(hi);
        ++result.iterations;
    }
    mu = (lo + hi) / 2.0;
    value = lo_val;
    while (result.iterations < max_iterations) {
        value = measure(mu);
        ++result.iterations;
        if (std::abs(value - target_prevalence) <= tolerance) break;
        if (value < target_prevalence) {
            lo = mu;
        } else {
            hi = mu;
        }
        mu = (lo + hi) / 2.0;
    }

    result.spec = spec;
    result.spec.chronic.episode_length.mu = mu;
    result.achieved_prevalence = value;
    return result;
}

// ---------------------------------------------------------------------------
// Spec file I/O (flat key = value)
// ---------------------------------------------------------------------------

namespace {

std::string format_real(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

double spec_real(const std::string& key, const std::string& value) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ConfigError("bad number for " + key + ": '" + value + "'");
    }
    return out;
}

long long spec_int(const std::string& key, const std::string& value) {
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ConfigError("bad integer for " + key + ": '" + value + "'");
    }
    return out;
}

Date spec_date(const std::string& key, const std::string& value) {
    const auto d = parse_date(value);
    if (!d) throw ConfigError("bad date for " + key + ": '" + value + "'");
    return *d;
}

bool cluster_key(CohortSpec& spec, const std::string& key, const std::string& value) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) return false;
    const std::string head = key.substr(0, dot);
    ClusterParams* params = nullptr;
    if (head == "transitional") params = &spec.transitional;
    else if (head == "episodic") params = &spec.episodic;
    else if (head == "chronic") params = &spec.chronic;
    if (!params) return false;

    const std::string rest = key.substr(dot + 1);
    if (rest == "episodes.p") params->episode_count.p = spec_real(key, value);
    else if (rest == "episodes.min") params->episode_count.min = int(spec_int(key, value));
    else if (rest == "episodes.max") params->episode_count.max = int(spec_int(key, value));
    else if (rest == "episode_length.mu") params->episode_length.mu = spec_real(key, value);
    else if (rest == "episode_length.sigma") params->episode_length.sigma = spec_real(key, value);
    else if (rest == "episode_length.min") params->episode_length.min = int(spec_int(key, value));
    else if (rest == "episode_length.max") params->episode_length.max = int(spec_int(key, value));
    else if (rest == "episode_gap.mu") params->episode_gap.mu = spec_real(key, value);
    else if (rest == "episode_gap.sigma") params->episode_gap.sigma = spec_real(key, value);
    else if (rest == "episode_gap.min") params->episode_gap.min = int(spec_int(key, value));
    else if (rest == "episode_gap.max") params->episode_gap.max = int(spec_int(key, value));
    else if (rest == "attendance") params->attendance = spec_real(key, value);
    else if (rest == "bar_rate") params->bar_rate = spec_real(key, value);
    else if (rest == "log_rate") params->log_rate = spec_real(key, value);
    else if (rest == "counsellor_rate") params->counsellor_rate = spec_real(key, value);
    else if (rest.rfind("keyword.", 0) == 0) {
        const std::string cat = rest.substr(8);
        const auto it = std::find(kKeywordNames.begin(), kKeywordNames.end(), cat);
        if (it == kKeywordNames.end()) {
            throw ConfigError("unknown keyword category '" + cat + "'");
        }
        params->keyword_rates[std::size_t(it - kKeywordNames.begin())] = spec_real(key, value);
    } else {
        throw ConfigError("unknown spec key '" + key + "'");
    }
    return true;
}

}  // namespace

void apply_spec_override(CohortSpec& spec, const std::string& key, const std::string& value) {
    if (key == "n_clients") spec.n_clients = std::size_t(spec_int(key, value));
    else if (key == "seed") spec.seed = std::uint64_t(spec_int(key, value));
    else if (key == "window.start") spec.window_start = spec_date(key, value);
    else if (key == "window.end") spec.window_end = spec_date(key, value);
    else if (key == "weights.transitional") spec.cluster_weights[0] = spec_real(key, value);
    else if (key == "weights.episodic") spec.cluster_weights[1] = spec_real(key, value);
    else if (key == "weights.chronic") spec.cluster_weights[2] = spec_real(key, value);
    else if (key == "first_sleep.before_date") spec.first_sleep.before_date = spec_date(key, value);
    else if (key == "first_sleep.before_mass") spec.first_sleep.before_mass = spec_real(key, value);
    else if (key == "first_sleep.after_date") spec.first_sleep.after_date = spec_date(key, value);
    else if (key == "first_sleep.after_mass") spec.first_sleep.after_mass = spec_real(key, value);
    else if (key == "age.min") spec.age_min = int(spec_int(key, value));
    else if (key == "age.max") spec.age_max = int(spec_int(key, value));
    else if (!cluster_key(spec, key, value)) {
        throw ConfigError("unknown spec key '" + key + "'");
    }
}

CohortSpec parse_cohort_spec(std::istream& in) {
    CohortSpec spec = default_cohort_spec();
    std::string raw;
    while (std::getline(in, raw)) {
        const auto hash = raw.find('#');
        std::string line = hash == std::string::npos ? raw : raw.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos) {
                throw ConfigError("expected 'key = value', got '" + raw + "'");
            }
            continue;
        }
        const auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string{};
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        apply_spec_override(spec, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    spec.validate();
    return spec;
}

CohortSpec load_cohort_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open spec '" + path + "'");
    return parse_cohort_spec(in);
}

void write_cohort_spec(const CohortSpec& spec, std::ostream& out) {
    out << "n_clients = " << spec.n_clients << '\n';
    out << "seed = " << spec.seed << '\n';
    out << "window.start = " << format_date(spec.window_start) << '\n';
    out << "window.end = " << format_date(spec.window_end) << '\n';
    for (std::size_t c = 0; c < 3; ++c) {
        out << "weights." << kClusterNames[c] << " = " << format_real(spec.cluster_weights[c])
            << '\n';
    }
    out << "first_sleep.before_date = " << format_date(spec.first_sleep.before_date) << '\n';
    out << "first_sleep.before_mass = " << format_real(spec.first_sleep.before_mass) << '\n';
    out << "first_sleep.after_date = " << format_date(spec.first_sleep.after_date) << '\n';
    out << "first_sleep.after_mass = " << format_real(spec.first_sleep.after_mass) << '\n';
    out << "age.min = " << spec.age_min << '\n';
    out << "age.max = " << spec.age_max << '\n';
    for (std::size_t c = 0; c < 3; ++c) {
        const ClusterParams& p = spec.cluster(Cluster(c));
        const std::string prefix(kClusterNames[c]);
        out << prefix << ".episodes.p = " << format_real(p.episode_count.p) << '\n';
        out << prefix << ".episodes.min = " << p.episode_count.min << '\n';
        out << prefix << ".episodes.max = " << p.episode_count.max << '\n';
        out << prefix << ".episode_length.mu = " << format_real(p.episode_length.mu) << '\n';
        out << prefix << ".episode_length.sigma = " << format_real(p.episode_length.sigma) << '\n';
        out << prefix << ".episode_length.min = " << p.episode_length.min << '\n';
        out << prefix << ".episode_length.max = " << p.episode_length.max << '\n';
        out << prefix << ".episode_gap.mu = " << format_real(p.episode_gap.mu) << '\n';
        out << prefix << ".episode_gap.sigma = " << format_real(p.episode_gap.sigma) << '\n';
        out << prefix << ".episode_gap.min = " << p.episode_gap.min << '\n';
        out << prefix << ".episode_gap.max = " << p.episode_gap.max << '\n';
        out << prefix << ".attendance = " << format_real(p.attendance) << '\n';
        out << prefix << ".bar_rate = " << format_real(p.bar_rate) << '\n';
        out << prefix << ".log_rate = " << format_real(p.log_rate) << '\n';
        out << prefix << ".counsellor_rate = " << format_real(p.counsellor_rate) << '\n';
        for (std::size_t kc = 0; kc < kKeywordCategories; ++kc) {
            out << prefix << ".keyword." << kKeywordNames[kc] << " = "
                << format_real(p.keyword_rates[kc]) << '\n';
        }
    }
}

void save_cohort_spec(const CohortSpec& spec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open spec '" + path + "' for writing");
    write_cohort_spec(spec, out);
    if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace shelterkit

// Python bindings for the core pipeline operations.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "shelterkit/config.hpp"
#include "shelterkit/errors.hpp"
#include "shelterkit/evaluation.hpp"
#include "shelterkit/features.hpp"
#include "shelterkit/records.hpp"
#include "shelterkit/reports.hpp"
#include "shelterkit/synthgen.hpp"
#include "shelterkit/timeline.hpp"

namespace py = pybind11;
using namespace shelterkit;

namespace {

Date date_from_iso(const std::string& text) {
    const auto d = parse_date(text);
    if (!d) throw ConfigError("bad date '" + text + "'");
    return *d;
}

const ClientHistory& client_of(const Dataset& ds, const std::string& id) {
    const auto it = ds.clients.find(id);
    if (it == ds.clients.end()) throw ConfigError("unknown client '" + id + "'");
    return it->second;
}

py::dict stats_dict(const ClientHistoryStats& s) {
    py::dict d;
    d["total_stays"] = s.total_stays;
    d["total_episodes"] = s.total_episodes;
    d["tenure_days"] = s.tenure_days;
    d["usage_percentage"] = s.usage_percentage;
    d["average_gap_days"] =
        s.average_gap_days ? py::object(py::float_(*s.average_gap_days)) : py::none();
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Chronic shelter-use prediction pipeline";

    py::register_exception<ParseError>(m, "RecordParseError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigurationError", PyExc_ValueError);
    py::register_exception<TrainingError>(m, "TrainingFailure", PyExc_RuntimeError);
    py::register_exception<StatsError>(m, "StatisticsError", PyExc_ValueError);
    py::register_exception<IoError>(m, "FileError", PyExc_OSError);

    py::class_<Dataset>(m, "Dataset")
        .def_static("from_csv",
                    [](const std::string& text) {
                        std::istringstream in(text);
                        return parse_records(in);
                    })
        .def_static("load", [](const std::string& path) { return load_records(path); })
        .def("save", [](const Dataset& ds, const std::string& path) { save_records(ds, path); })
        .def("to_csv", [](const Dataset& ds) { return serialize_records(ds); })
        .def_property_readonly("n_clients",
                               [](const Dataset& ds) { return ds.clients.size(); })
        .def_property_readonly("total_events",
                               [](const Dataset& ds) { return ds.total_events(); })
        .def_property_readonly("observation_start",
                               [](const Dataset& ds) { return format_date(ds.observation_start); })
        .def_property_readonly("observation_end",
                               [](const Dataset& ds) { return format_date(ds.observation_end); })
        .def("client_ids",
             [](const Dataset& ds) {
                 std::vector<std::string> ids;
                 ids.reserve(ds.clients.size());
                 for (const auto& [id, c] : ds.clients) ids.push_back(id);
                 return ids;
             })
        .def("age_of", [](const Dataset& ds, const std::string& id) {
            return client_of(ds, id).age;
        })
        .def("__eq__", [](const Dataset& a, const Dataset& b) { return a == b; });

    py::class_<CohortSpec>(m, "CohortSpec")
        .def_static("defaults", &default_cohort_spec)
        .def_static("from_text",
                    [](const std::string& text) {
                        std::istringstream in(text);
                        return parse_cohort_spec(in);
                    })
        .def_static("load", [](const std::string& path) { return load_cohort_spec(path); })
        .def("save", [](const CohortSpec& s, const std::string& p) { save_cohort_spec(s, p); })
        .def("to_text",
             [](const CohortSpec& s) {
                 std::ostringstream out;
                 write_cohort_spec(s, out);
                 return out.str();
             })
        .def("set",
             [](CohortSpec& s, const std::string& key, const std::string& value) {
                 apply_spec_override(s, key, value);
                 s.validate();
             })
        .def_readwrite("n_clients", &CohortSpec::n_clients)
        .def_readwrite("seed", &CohortSpec::seed);

    m.def("generate", &generate, py::arg("spec"), "Generate a synthetic cohort dataset");
    m.def(
        "calibrate_chronic_scale",
        [](const CohortSpec& spec, double target, double tolerance, int max_iterations) {
            const CalibrationResult r =
                calibrate_chronic_scale(spec, target, tolerance, max_iterations);
            return py::make_tuple(r.spec, r.achieved_prevalence, r.iterations);
        },
        py::arg("spec"), py::arg("target_prevalence"), py::arg("tolerance") = 0.005,
        py::arg("max_iterations") = 16);
    m.def("chronic_prevalence", [](const Dataset& ds) { return chronic_prevalence(ds); });

    m.def(
        "censor",
        [](const Dataset& ds, const std::string& min_iso, const std::string& max_iso,
           int tz_offset_minutes) {
            const CensorResult r = censor(ds, date_from_iso(min_iso), date_from_iso(max_iso),
                                          BucketTimezone{tz_offset_minutes});
            py::dict stats;
            stats["retained"] = r.stats.retained;
            stats["removed_before"] = r.stats.removed_before;
            stats["removed_after"] = r.stats.removed_after;
            stats["removed_no_sleep"] = r.stats.removed_no_sleep;
            return py::make_tuple(r.dataset, stats);
        },
        py::arg("dataset"), py::arg("min_first_sleep"), py::arg("max_first_sleep"),
        py::arg("timezone_offset_minutes") = 0);

    m.def(
        "first_sleep_date",
        [](const Dataset& ds, const std::string& id) -> py::object {
            const auto d = first_sleep_date(client_of(ds, id));
            return d ? py::object(py::str(format_date(*d))) : py::none();
        },
        py::arg("dataset"), py::arg("client_id"));

    m.def(
        "stay_dates",
        [](const Dataset& ds, const std::string& id) {
            std::vector<std::string> out;
            for (const Date d : derive_stays(client_of(ds, id)).dates) {
                out.push_back(format_date(d));
            }
            return out;
        },
        py::arg("dataset"), py::arg("client_id"));

    m.def(
        "episodes",
        [](const Dataset& ds, const std::string& id, int gap_threshold_days) {
            std::vector<py::tuple> out;
            for (const Episode& e :
                 episodes(derive_stays(client_of(ds, id)), gap_threshold_days)) {
                out.push_back(py::make_tuple(format_date(e.first_stay),
                                             format_date(e.last_stay), e.stay_count));
            }
            return out;
        },
        py::arg("dataset"), py::arg("client_id"), py::arg("gap_threshold_days") = 30);

    m.def(
        "labels",
        [](const Dataset& ds) {
            std::map<std::string, bool> out;
            for (const auto& [id, client] : ds.clients) {
                out.emplace(id, label_chronic(derive_stays(client)));
            }
            return out;
        },
        py::arg("dataset"), "Chronic label for every client over the full history");

    m.def(
        "client_stats",
        [](const Dataset& ds, const std::string& id, int gap_threshold_days) {
            return stats_dict(client_stats(client_of(ds, id), {}, gap_threshold_days));
        },
        py::arg("dataset"), py::arg("client_id"), py::arg("gap_threshold_days") = 30);

    m.def(
        "features",
        [](const Dataset& ds, const std::string& id, int window_days) {
            const FeatureVector f = extract_features(client_of(ds, id), window_days);
            py::dict d;
            const auto values = f.as_array();
            for (std::size_t i = 0; i < kFeatureNames.size(); ++i) {
                d[py::str(std::string(kFeatureNames[i]))] = std::int64_t(values[i]);
            }
            return d;
        },
        py::arg("dataset"), py::arg("client_id"), py::arg("window_days") = 90);

    m.def(
        "cohort_report_json",
        [](const Dataset& ds, const std::optional<std::vector<std::string>>& ids,
           int gap_threshold_days) {
            std::vector<ClientHistoryStats> cohort;
            if (ids) {
                for (const std::string& id : *ids) {
                    cohort.push_back(client_stats(client_of(ds, id), {}, gap_threshold_days));
                }
            } else {
                for (const auto& [id, client] : ds.clients) {
                    cohort.push_back(client_stats(client, {}, gap_threshold_days));
                }
            }
            return to_json(cohort_report(cohort, ds.clients.size())).dump();
        },
        py::arg("dataset"), py::arg("client_ids") = py::none(),
        py::arg("gap_threshold_days") = 30);

    m.def(
        "stratified_kfold",
        [](const std::map<std::string, bool>& labels, int k, std::uint64_t seed) {
            return stratified_kfold(labels, k, seed).fold_of;
        },
        py::arg("labels"), py::arg("k") = 10, py::arg("seed") = 0);

    m.def(
        "classification_metrics_json",
        [](std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
            ConfusionCounts c;
            c.tp = tp;
            c.fp = fp;
            c.fn = fn;
            c.tn = tn;
            return to_json(classification_metrics(c)).dump();
        },
        py::arg("tp"), py::arg("fp"), py::arg("fn"), py::arg("tn"));

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("max_epochs", &TrainConfig::max_epochs)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("tolerance", &TrainConfig::tolerance)
        .def_readwrite("adaptive", &TrainConfig::adaptive)
        .def_readwrite("seed", &TrainConfig::seed);

    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_readwrite("window_days", &RunConfig::window_days)
        .def_readwrite("threshold_min_stays", &RunConfig::threshold_min_stays)
        .def_readwrite("episode_gap_days", &RunConfig::episode_gap_days)
        .def_readwrite("k", &RunConfig::k)
        .def_readwrite("seed", &RunConfig::seed)
        .def_readwrite("train", &RunConfig::train)
        .def("validate", &RunConfig::validate);

    py::class_<ExperimentResult>(m, "ExperimentResult")
        .def_property_readonly("algorithm",
                               [](const ExperimentResult& r) {
                                   return std::string(algorithm_name(r.algorithm));
                               })
        .def_property_readonly("flagged_ids",
                               [](const ExperimentResult& r) { return r.flagged_ids; })
        .def_property_readonly(
            "metrics_json",
            [](const ExperimentResult& r) { return to_json(r.metrics).dump(); })
        .def_property_readonly("cohort_json", [](const ExperimentResult& r) {
            return r.cohort.group_size ? to_json(r.cohort).dump() : std::string("null");
        });

    m.def(
        "run_experiment",
        [](const Dataset& ds, const std::string& algorithm, int k, std::uint64_t seed,
           const RunConfig& cfg) {
            const auto a = algorithm_from_name(algorithm);
            if (!a) throw ConfigError("unknown algorithm '" + algorithm + "'");
            return run_experiment(ds, *a, k, seed, cfg);
        },
        py::arg("dataset"), py::arg("algorithm"), py::arg("k") = 10, py::arg("seed") = 1,
        py::arg("config") = RunConfig{});

    m.def(
        "train_logistic_model",
        [](const Matrix& x, const Labels& y, const TrainConfig& cfg) {
            const LogisticModel model = train_logistic(x, y, cfg);
            return py::make_tuple(model.weights, model.bias);
        },
        py::arg("x"), py::arg("y"), py::arg("config") = TrainConfig{});

    m.attr("FEATURE_NAMES") = [] {
        std::vector<std::string> names;
        for (const auto n : kFeatureNames) names.emplace_back(n);
        return names;
    }();
    m.attr("__version__") = "0.1.0";
}

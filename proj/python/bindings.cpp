#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cdet/clustering.hpp"
#include "cdet/commands.hpp"
#include "cdet/credibility.hpp"
#include "cdet/error.hpp"
#include "cdet/features.hpp"
#include "cdet/market.hpp"
#include "cdet/pipeline.hpp"
#include "cdet/report.hpp"
#include "cdet/synth.hpp"

namespace py = pybind11;
using namespace cdet;

namespace {

py::dict assignment_dict(const Assignment& a) {
    py::dict d;
    d["cluster_id"] = a.cluster_id;
    d["merged"] = a.decision == AssignDecision::Merged;
    d["distance"] = a.distance;
    return d;
}

py::dict cluster_dict(const EventCluster& c, const TermDictionary& dictionary) {
    py::dict centroid;
    for (const auto& [term, weight] : c.centroid()) centroid[py::str(dictionary.term(term))] = weight;
    py::dict d;
    d["cluster_id"] = c.cluster_id;
    d["member_ids"] = c.member_ids;
    d["sentiments"] = c.sentiments;
    d["links"] = std::vector<std::string>(c.links.begin(), c.links.end());
    d["centroid"] = centroid;
    return d;
}

std::string run_to_string(int (*command)(const RunConfig&, Logger&, std::ostream&), const RunConfig& config) {
    std::ostringstream out, err;
    Logger log(err, LogLevel::Warn);
    if (int code = command(config, log, out); code != kExitOk)
        throw Error(code == kExitConfig ? Errc::InvalidConfig : Errc::Io, err.str());
    return out.str();
}

} // namespace

PYBIND11_MODULE(_cdet, m) {
    m.doc() = "Controversial event detection over tweet streams";

    // Raised for every library error; `code` holds the error kind, e.g. "InvalidConfig".
    PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
    error_type.call_once_and_store_result([&] { return py::exception<Error>(m, "CdetError", PyExc_ValueError); });
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            const py::object& type = error_type.get_stored();
            py::object exc = type(e.what());
            exc.attr("code") = std::string(errc_name(e.code()));
            PyErr_SetObject(type.ptr(), exc.ptr());
        }
    });

    m.def("sentiment", [](const std::string& text) { return score_sentiment(tokenize(text), *SentimentLexicon::bundled()); },
          py::arg("text"), "Lexicon sentiment of a text, in [-2, 2].");
    m.def(
        "extract_terms",
        [](const std::string& text) {
            Tweet t;
            t.text = text;
            return FeatureExtractor::bundled().extract_terms(t);
        },
        py::arg("text"), "Who/what/where terms of a text with their counts.");
    m.def("normalize_url", py::overload_cast<std::string_view>(&normalize_url), py::arg("url"),
          "Canonical form of a URL after offline redirect resolution.");
    m.def(
        "is_credible", [](const std::string& url) { return is_credible(url, AllowList::bundled()); }, py::arg("url"),
        "Whether a normalized URL is on the bundled news allowlist.");

    py::class_<ClusterState>(m, "ClusterState")
        .def(py::init([](double merge_threshold, std::size_t min_event_size, double inactivity_expiry_hours) {
                 ClusterParams p;
                 p.merge_threshold = merge_threshold;
                 p.min_event_size = min_event_size;
                 p.inactivity_expiry = std::chrono::seconds{static_cast<std::int64_t>(inactivity_expiry_hours * 3600)};
                 return ClusterState(p);
             }),
             py::arg("merge_threshold") = 0.7, py::arg("min_event_size") = 5, py::arg("inactivity_expiry_hours") = 72.0)
        .def(
            "assign",
            [](ClusterState& s, const std::string& tweet_id, const TermBag& terms, const std::string& timestamp,
               double sentiment, const std::vector<std::string>& links) {
                TweetVector v;
                v.tweet_id = tweet_id;
                v.terms = terms;
                v.timestamp = parse_timestamp(timestamp);
                v.day = day_of(v.timestamp);
                v.sentiment = sentiment;
                v.links = {links.begin(), links.end()};
                return assignment_dict(s.assign(v));
            },
            py::arg("tweet_id"), py::arg("terms"), py::arg("timestamp"), py::arg("sentiment") = 0.0,
            py::arg("links") = std::vector<std::string>{})
        .def("expire_inactive", [](ClusterState& s, const std::string& now) { return s.expire_inactive(parse_timestamp(now)); })
        .def("clusters",
             [](const ClusterState& s) {
                 py::list out;
                 for (const auto* c : s.clusters()) out.append(cluster_dict(*c, s.dictionary()));
                 return out;
             })
        .def("candidate_events",
             [](const ClusterState& s) {
                 py::list out;
                 for (const auto* c : s.candidate_events()) out.append(cluster_dict(*c, s.dictionary()));
                 return out;
             })
        .def("to_json", &ClusterState::to_json)
        .def_static("from_json", [](const std::string& text) { return ClusterState::from_json(text); })
        .def("__len__", &ClusterState::size);

    m.def(
        "generate",
        [](const std::optional<std::string>& scenario_json) {
            auto scenario = scenario_json ? ScenarioConfig::from_json(*scenario_json) : ScenarioConfig::reference();
            auto stream = generate(scenario);
            return py::make_tuple(stream.jsonl(), stream.truth.to_json());
        },
        py::arg("scenario_json") = py::none(), "Synthetic stream as (jsonl, ground_truth_json).");
    m.def("reference_scenario", [] { return ScenarioConfig::reference().to_json(); });

    m.def(
        "detect",
        [](const std::string& config_json) {
            auto config = RunConfig::from_json(config_json);
            config.output.clear();
            return run_to_string(cmd_detect, config);
        },
        py::arg("config_json"), "Runs detection with a JSON run configuration and returns the report.");
    m.def(
        "market",
        [](const std::string& config_json) {
            auto config = RunConfig::from_json(config_json);
            config.output.clear();
            return run_to_string(cmd_market, config);
        },
        py::arg("config_json"), "Runs the market analysis with a JSON run configuration and returns the report.");
    m.def(
        "evaluate",
        [](const std::string& report_json, const std::string& truth_json) {
            auto r = evaluate(parse_detection_report(report_json), GroundTruth::from_json(truth_json));
            py::dict d;
            d["precision"] = r.precision;
            d["recall"] = r.recall;
            d["f1"] = r.f1;
            d["flagged"] = r.flagged;
            d["positive_events"] = r.positive_events;
            d["detected_events"] = r.detected_events;
            return d;
        },
        py::arg("report_json"), py::arg("truth_json"));

    m.def(
        "return_stats",
        [](const std::vector<double>& returns) {
            auto s = return_stats(returns);
            return py::make_tuple(s.mean, s.std, s.n);
        },
        py::arg("returns"), "(mean, sample std, n).");
    m.def(
        "zscore",
        [](double event_return, const std::vector<double>& returns) {
            return event_day_zscore(event_return, return_stats(returns));
        },
        py::arg("event_return"), py::arg("returns"));
}

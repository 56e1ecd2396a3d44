#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "trendcast/cascade.hpp"
#include "trendcast/dataset.hpp"
#include "trendcast/evaluation.hpp"
#include "trendcast/selection.hpp"
#include "trendcast/synth.hpp"
#include "trendcast/wavelet.hpp"

namespace py = pybind11;
using namespace trendcast;

PYBIND11_MODULE(_trendcast, m) {
    m.doc() = "Wiener-cascade decoding of weekly search-index panels";

    py::enum_<SeriesRole>(m, "SeriesRole")
        .value("PREDICTOR", SeriesRole::Predictor)
        .value("TARGET", SeriesRole::Target);

    py::class_<Dataset>(m, "Dataset")
        .def_readonly("names", &Dataset::names)
        .def_readonly("roles", &Dataset::roles)
        .def_readonly("values", &Dataset::values)
        .def_property_readonly("start_week",
                               [](const Dataset& d) { return format_iso_date(d.start_week); })
        .def("set_targets", &Dataset::set_targets)
        .def("predictor_names", &Dataset::predictor_names)
        .def("target_names", &Dataset::target_names)
        .def("to_csv", &to_trends_csv)
        .def("to_json", &dataset_to_json);

    m.def("parse_trends_csv", &parse_trends_csv, py::arg("text"));
    m.def("dataset_from_json", &dataset_from_json, py::arg("text"));

    py::class_<FrequencyGrid>(m, "FrequencyGrid")
        .def_static("log_spaced", &FrequencyGrid::log_spaced, py::arg("fmin"), py::arg("fmax"),
                    py::arg("n"))
        .def_static("default_grid", &FrequencyGrid::default_grid)
        .def_readonly("frequencies", &FrequencyGrid::frequencies);

    py::class_<Scalogram>(m, "Scalogram")
        .def_readonly("power", &Scalogram::power)
        .def_property_readonly("coi_mask",
                               [](const Scalogram& s) {
                                   return Eigen::MatrixXd(s.coi_mask.cast<double>());
                               })
        .def_property_readonly("frequencies",
                               [](const Scalogram& s) { return s.grid.frequencies; })
        .def("time_averaged_power", &Scalogram::time_averaged_power)
        .def("peak_frequency_index", &Scalogram::peak_frequency_index);

    m.def(
        "morlet_cwt",
        [](const std::vector<double>& series, double sampling_rate, const FrequencyGrid& grid,
           double omega0) { return morlet_cwt(series, sampling_rate, grid, omega0); },
        py::arg("series"), py::arg("sampling_rate") = 52.0,
        py::arg("grid") = FrequencyGrid::default_grid(), py::arg("omega0") = 6.0);
    m.def("band_power_ratio", &band_power_ratio, py::arg("scalogram"), py::arg("band_lo"),
          py::arg("band_hi"));

    py::class_<PeriodicityScore>(m, "PeriodicityScore")
        .def_readonly("annual_ratio", &PeriodicityScore::annual_ratio)
        .def_readonly("semiannual_ratio", &PeriodicityScore::semiannual_ratio)
        .def_property_readonly("label",
                               [](const PeriodicityScore& s) { return to_string(s.label); });

    m.def(
        "rank_periodic",
        [](const Dataset& d) { return rank_periodic(d, WaveletConfig{}); }, py::arg("dataset"));
    m.def(
        "classify_periodicity",
        [](double annual, double semiannual, double threshold) {
            return classify_periodicity(annual, semiannual, threshold);
        },
        py::arg("annual_ratio"), py::arg("semiannual_ratio"), py::arg("threshold") = 0.3);

    py::class_<CascadeConfig>(m, "CascadeConfig")
        .def(py::init<>())
        .def_readwrite("lag_depth", &CascadeConfig::lag_depth)
        .def_readwrite("lambda_", &CascadeConfig::lambda)
        .def_readwrite("include_intercept", &CascadeConfig::include_intercept);

    py::class_<WienerCascadeModel>(m, "WienerCascadeModel")
        .def_readonly("target_name", &WienerCascadeModel::target_name)
        .def_readonly("feature_names", &WienerCascadeModel::feature_names)
        .def_readonly("lambda_used", &WienerCascadeModel::lambda_used)
        .def_property_readonly(
            "filter_weights",
            [](const WienerCascadeModel& mdl) { return mdl.weights.coefficients; })
        .def_property_readonly(
            "polynomial",
            [](const WienerCascadeModel& mdl) { return mdl.nonlinearity.coefficients; })
        .def("to_json", &model_to_json);

    m.def("model_from_json", &model_from_json, py::arg("text"));
    m.def("train", &train, py::arg("dataset"), py::arg("target"), py::arg("features"),
          py::arg("config"), py::arg("train_rows"));
    m.def("predict", &predict, py::arg("model"), py::arg("dataset"), py::arg("row_times"));
    m.def(
        "feature_importance",
        [](const WienerCascadeModel& mdl) {
            std::vector<std::tuple<std::string, double, int>> out;
            for (const auto& e : feature_importance(mdl)) {
                out.emplace_back(e.name, e.score, e.rank);
            }
            return out;
        },
        py::arg("model"));

    m.def("spearman_rho", &spearman_rho, py::arg("a"), py::arg("b"));
    m.def("spearman_pvalue", &spearman_pvalue, py::arg("rho"), py::arg("n"));
    m.def("mse", &mse, py::arg("actual"), py::arg("predicted"));

    py::class_<EvalMetrics>(m, "EvalMetrics")
        .def_readonly("rho", &EvalMetrics::rho)
        .def_readonly("p_value", &EvalMetrics::p_value)
        .def_readonly("mse", &EvalMetrics::mse)
        .def_readonly("n", &EvalMetrics::n);

    py::class_<CvReport>(m, "CvReport")
        .def_readonly("target", &CvReport::target)
        .def_readonly("lambda_chosen", &CvReport::lambda_chosen)
        .def_readonly("fold_metrics", &CvReport::fold_metrics)
        .def_readonly("pooled", &CvReport::pooled)
        .def("to_json", &report_to_json);

    m.def(
        "cross_validate",
        [](const Dataset& d, const std::string& target, const std::string& features,
           const CascadeConfig& config, int k, const std::string& scope) {
            SelectionSpec spec = parse_selection_spec(features);
            if (spec.mode == SelectionMode::TopWeighted) spec.base_target = target;
            SelectionScope sc =
                scope == "per-fold" ? SelectionScope::PerFold : SelectionScope::Global;
            return cross_validate(d, target, spec, config, k, sc);
        },
        py::arg("dataset"), py::arg("target"), py::arg("features") = "all",
        py::arg("config") = CascadeConfig{}, py::arg("folds") = 5,
        py::arg("selection_scope") = "global");

    m.def(
        "gen_panel", [](const std::string& spec_json) {
            return gen_panel(SynthSpec::from_json(spec_json));
        },
        py::arg("spec_json"));
}

#include "trendcast/synth.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "trendcast/rng.hpp"

namespace trendcast {

SynthSpec SynthSpec::from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    SynthSpec spec;
    spec.t_len = j.at("t_len").get<Eigen::Index>();
    spec.sampling_rate = j.value("sampling_rate", 52.0);
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.clip_nonnegative = j.value("clip_nonnegative", false);
    if (j.contains("start_week")) {
        spec.start_week = parse_iso_date(j.at("start_week").get<std::string>());
    }
    for (const auto& s : j.at("series")) {
        SynthSeriesSpec ss;
        ss.name = s.at("name").get<std::string>();
        ss.offset = s.value("offset", 50.0);
        ss.noise_sd = s.value("noise_sd", 0.0);
        if (s.contains("components")) {
            for (const auto& c : s.at("components")) {
                ss.components.push_back({c.at("frequency").get<double>(),
                                         c.at("amplitude").get<double>(),
                                         c.value("phase", 0.0)});
            }
        }
        spec.series.push_back(std::move(ss));
    }
    return spec;
}

std::string SynthSpec::to_json() const {
    nlohmann::json j;
    j["t_len"] = t_len;
    j["sampling_rate"] = sampling_rate;
    j["seed"] = seed;
    j["clip_nonnegative"] = clip_nonnegative;
    j["start_week"] = format_iso_date(start_week);
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : series) {
        nlohmann::json js;
        js["name"] = s.name;
        js["offset"] = s.offset;
        js["noise_sd"] = s.noise_sd;
        nlohmann::json comps = nlohmann::json::array();
        for (const auto& c : s.components) {
            comps.push_back({{"frequency", c.frequency},
                             {"amplitude", c.amplitude},
                             {"phase", c.phase}});
        }
        js["components"] = comps;
        arr.push_back(std::move(js));
    }
    j["series"] = arr;
    return j.dump(2) + "\n";
}

Dataset gen_panel(const SynthSpec& spec) {
    if (spec.t_len < 2) throw std::invalid_argument("synth: t_len too small");
    if (spec.series.empty()) throw std::invalid_argument("synth: no series");
    for (const auto& s : spec.series) {
        for (const auto& c : s.components) {
            if (c.frequency >= 0.9 && spec.t_len < 2 * 52) {
                throw std::invalid_argument("synth: annual components need t_len >= 104");
            }
        }
    }

    Dataset d;
    d.start_week = spec.start_week;
    d.values.resize(spec.t_len, static_cast<Eigen::Index>(spec.series.size()));
    CounterRng root(spec.seed);
    for (std::size_t m = 0; m < spec.series.size(); ++m) {
        const auto& s = spec.series[m];
        d.names.push_back(s.name);
        d.roles.push_back(SeriesRole::Predictor);
        CounterRng rng = root.child(m);
        for (Eigen::Index t = 0; t < spec.t_len; ++t) {
            double v = s.offset;
            for (const auto& c : s.components) {
                v += c.amplitude *
                     std::sin(2.0 * M_PI * c.frequency * static_cast<double>(t) /
                                  spec.sampling_rate +
                              c.phase);
            }
            if (s.noise_sd > 0.0) v += s.noise_sd * rng.normal(static_cast<std::uint64_t>(t));
            if (spec.clip_nonnegative && v < 0.0) v = 0.0;
            d.values(t, static_cast<Eigen::Index>(m)) = v;
        }
    }
    d.validate();
    return d;
}

Dataset gen_cascade_target(const Dataset& d, const std::string& target_name,
                           const std::vector<std::string>& features,
                           const Eigen::MatrixXd& true_a, const PolynomialNonlinearity& true_poly,
                           double noise_sd, std::uint64_t seed) {
    const auto n = static_cast<Eigen::Index>(features.size());
    if (true_a.rows() != n) throw std::invalid_argument("gen_cascade_target: A rows != features");
    const Eigen::Index lag_depth = true_a.cols() - 1;
    if (lag_depth < 0 || d.rows() <= lag_depth) {
        throw std::invalid_argument("gen_cascade_target: dataset shorter than lag depth");
    }

    // z-score features over the full series (population sd).
    Eigen::MatrixXd z(d.rows(), n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto col = d.values.col(d.column(features[static_cast<std::size_t>(i)]));
        const double mean = col.mean();
        const double var = (col.array() - mean).square().mean();
        if (var <= 0.0) throw std::invalid_argument("gen_cascade_target: constant feature");
        z.col(i) = (col.array() - mean) / std::sqrt(var);
    }

    CounterRng rng(seed);
    Eigen::VectorXd target(d.rows());
    for (Eigen::Index t = lag_depth; t < d.rows(); ++t) {
        double u = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j <= lag_depth; ++j) {
                u += true_a(i, j) * z(t - lag_depth + j, i);
            }
        }
        double v = true_poly(u);
        if (noise_sd > 0.0) v += noise_sd * rng.normal(static_cast<std::uint64_t>(t));
        target[t] = v;
    }
    // First L samples are unusable; fill with the first defined value.
    for (Eigen::Index t = 0; t < lag_depth; ++t) target[t] = target[lag_depth];

    Dataset out = d;
    out.names.push_back(target_name);
    out.roles.push_back(SeriesRole::Target);
    out.values.conservativeResize(Eigen::NoChange, out.values.cols() + 1);
    out.values.col(out.values.cols() - 1) = target;
    out.validate();
    return out;
}

}  // namespace trendcast

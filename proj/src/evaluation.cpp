#include "trendcast/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include "trendcast/rng.hpp"

namespace trendcast {

namespace {

// Fractional (average) ranks, 1-based; ties share the mean of their positions.
std::vector<double> fractional_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double num = 0.0, da = 0.0, db = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double xa = a[i] - ma, xb = b[i] - mb;
        num += xa * xb;
        da += xa * xa;
        db += xb * xb;
    }
    if (da <= 0.0 || db <= 0.0) throw std::invalid_argument("constant input: rho undefined");
    return num / std::sqrt(da * db);
}

}  // namespace

double spearman_rho(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("spearman: length mismatch");
    if (a.size() < 2) throw std::invalid_argument("spearman: need n >= 2");
    return pearson(fractional_ranks(a), fractional_ranks(b));
}

double spearman_pvalue(double rho, int n) {
    if (n < 4) throw std::invalid_argument("spearman p-value: need n >= 4");
    if (n <= 9) {
        // Exact null distribution by enumerating rank permutations.
        std::vector<double> base(static_cast<std::size_t>(n));
        std::iota(base.begin(), base.end(), 1.0);
        std::vector<double> perm = base;
        std::size_t hits = 0, total = 0;
        const double thresh = std::fabs(rho) - 1e-12;
        do {
            if (std::fabs(pearson(base, perm)) >= thresh) ++hits;
            ++total;
        } while (std::next_permutation(perm.begin(), perm.end()));
        return static_cast<double>(hits) / static_cast<double>(total);
    }
    if (std::fabs(rho) >= 1.0) return 0.0;
    const double t = rho * std::sqrt((n - 2) / (1.0 - rho * rho));
    boost::math::students_t_distribution<double> dist(n - 2);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

double spearman_pvalue_permutation(const std::vector<double>& a, const std::vector<double>& b,
                                   int resamples, std::uint64_t seed) {
    const double observed = std::fabs(spearman_rho(a, b));
    CounterRng rng(seed);
    std::vector<double> shuffled = b;
    std::uint64_t k = 0;
    int hits = 0;
    for (int r = 0; r < resamples; ++r) {
        for (std::size_t i = shuffled.size() - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(rng.bits(k++) % (i + 1));
            std::swap(shuffled[i], shuffled[j]);
        }
        if (std::fabs(spearman_rho(a, shuffled)) >= observed - 1e-12) ++hits;
    }
    return static_cast<double>(hits + 1) / static_cast<double>(resamples + 1);
}

double mse(const std::vector<double>& actual, const std::vector<double>& predicted) {
    if (actual.size() != predicted.size()) throw std::invalid_argument("mse: length mismatch");
    if (actual.empty()) throw std::invalid_argument("mse: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double d = actual[i] - predicted[i];
        sum += d * d;
    }
    return sum / static_cast<double>(actual.size());
}

EvalMetrics compute_metrics(const std::vector<double>& actual,
                            const std::vector<double>& predicted) {
    EvalMetrics m;
    m.n = static_cast<int>(actual.size());
    m.mse = mse(actual, predicted);
    try {
        m.rho = spearman_rho(actual, predicted);
        m.p_value = spearman_pvalue(m.rho, m.n);
    } catch (const std::invalid_argument&) {
        // Constant predictions (e.g. extreme shrinkage): no monotone association.
        m.rho = 0.0;
        m.p_value = 1.0;
    }
    return m;
}

CvReport cross_validate(const Dataset& d, const std::string& target, const SelectionSpec& spec,
                        const CascadeConfig& config, int k, SelectionScope scope,
                        const WaveletConfig& wavelet_config) {
    d.validate();
    const Eigen::Index tc = d.column(target);
    if (d.roles[static_cast<std::size_t>(tc)] != SeriesRole::Target) {
        throw std::invalid_argument("series '" + target + "' is not tagged as a target");
    }

    FoldPlan plan = make_fold_plan(d.rows(), config.lag_depth, k);
    const auto usable = plan.usable_indices();

    // Periodicity is a predictor-only statistic, so it is computed once on
    // the full predictor series under either scope; only the target-dependent
    // base model is refit per fold under PerFold.
    SelectionContext global_ctx;
    if (spec.mode == SelectionMode::TopPeriodic) {
        global_ctx.periodicity = rank_periodic(d, wavelet_config);
    } else if (spec.mode == SelectionMode::TopWeighted && scope == SelectionScope::Global) {
        global_ctx.base_model = train(d, target, d.predictor_names(), config, usable);
    }

    CvReport report;
    report.target = target;
    report.scenario = spec;

    for (int f = 0; f < k; ++f) {
        auto train_rows = plan.indices_not_in_fold(f);
        auto test_rows = plan.indices_in_fold(f);

        SelectionContext ctx = global_ctx;
        if (spec.mode == SelectionMode::TopWeighted && scope == SelectionScope::PerFold) {
            ctx.base_model = train(d, target, d.predictor_names(), config, train_rows);
        }
        auto features = select_features(d, spec, ctx);

        WienerCascadeModel model = train(d, target, features, config, train_rows);
        report.lambda_chosen.push_back(model.lambda_used);

        auto predicted = predict(model, d, test_rows);
        std::vector<double> actual;
        actual.reserve(test_rows.size());
        for (auto t : test_rows) actual.push_back(d.values(t, tc));

        report.fold_metrics.push_back(compute_metrics(actual, predicted));
        for (std::size_t i = 0; i < test_rows.size(); ++i) {
            report.predictions.push_back({test_rows[i], actual[i], predicted[i], f});
        }
    }

    std::sort(report.predictions.begin(), report.predictions.end(),
              [](const PredictionRow& a, const PredictionRow& b) { return a.time < b.time; });

    std::vector<double> actual, predicted;
    for (const auto& p : report.predictions) {
        actual.push_back(p.actual);
        predicted.push_back(p.predicted);
    }
    report.pooled = compute_metrics(actual, predicted);
    return report;
}

std::string report_to_json(const CvReport& report) {
    nlohmann::json j;
    j["target"] = report.target;
    j["scenario"] = selection_spec_to_string(report.scenario);
    j["lambda_chosen"] = report.lambda_chosen;
    auto metrics_json = [](const EvalMetrics& m) {
        return nlohmann::json{{"rho", m.rho}, {"p", m.p_value}, {"mse", m.mse}, {"n", m.n}};
    };
    nlohmann::json folds = nlohmann::json::array();
    for (const auto& m : report.fold_metrics) folds.push_back(metrics_json(m));
    j["fold_metrics"] = folds;
    j["pooled"] = metrics_json(report.pooled);
    return j.dump(2) + "\n";
}

std::string predictions_to_csv(const CvReport& report, std::int64_t start_week) {
    std::string out = "week,actual,predicted,fold\n";
    for (const auto& p : report.predictions) {
        out += format_iso_date(start_week + 7 * p.time);
        out += ',';
        out += format_double(p.actual);
        out += ',';
        out += format_double(p.predicted);
        out += ',';
        out += std::to_string(p.fold);
        out += '\n';
    }
    return out;
}

}  // namespace trendcast

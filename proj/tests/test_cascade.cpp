#include <doctest.h>

#include <cmath>
#include <map>

#include "trendcast/cascade.hpp"
#include "trendcast/evaluation.hpp"
#include "trendcast/rng.hpp"
#include "trendcast/synth.hpp"

using namespace trendcast;

namespace {

Dataset small_panel(Eigen::Index t_len, int n_features, std::uint64_t seed) {
    SynthSpec spec;
    spec.t_len = t_len;
    spec.seed = seed;
    for (int i = 0; i < n_features; ++i) {
        SynthSeriesSpec s;
        s.name = "f" + std::to_string(i);
        s.offset = 50.0;
        s.components = {{1.0 + 0.3 * i, 8.0, 0.4 * i}};
        s.noise_sd = 3.0;
        spec.series.push_back(s);
    }
    return gen_panel(spec);
}

// Brute-force normal-equation solve by Gauss-Jordan elimination, written
// independently of the Eigen path it checks.
std::vector<double> oracle_ridge(const Eigen::MatrixXd& f, const Eigen::VectorXd& y, double lambda,
                                 bool intercept_last) {
    const int m = static_cast<int>(f.cols());
    std::vector<std::vector<double>> aug(m, std::vector<double>(m + 1, 0.0));
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            double s = 0.0;
            for (int r = 0; r < f.rows(); ++r) s += f(r, i) * f(r, j);
            aug[i][j] = s;
        }
        if (!(intercept_last && i == m - 1)) aug[i][i] += lambda;
        double s = 0.0;
        for (int r = 0; r < f.rows(); ++r) s += f(r, i) * y(r);
        aug[i][m] = s;
    }
    for (int col = 0; col < m; ++col) {
        int pivot = col;
        for (int r = col + 1; r < m; ++r) {
            if (std::fabs(aug[r][col]) > std::fabs(aug[pivot][col])) pivot = r;
        }
        std::swap(aug[col], aug[pivot]);
        const double p = aug[col][col];
        for (int j = col; j <= m; ++j) aug[col][j] /= p;
        for (int r = 0; r < m; ++r) {
            if (r == col) continue;
            const double factor = aug[r][col];
            for (int j = col; j <= m; ++j) aug[r][j] -= factor * aug[col][j];
        }
    }
    std::vector<double> out(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) out[static_cast<std::size_t>(i)] = aug[i][m];
    return out;
}

DesignMatrix wrap(const Eigen::MatrixXd& f, bool has_intercept = false) {
    DesignMatrix d;
    d.rows = f;
    d.has_intercept = has_intercept;
    return d;
}

}  // namespace

TEST_SUITE_BEGIN("cascade");

TEST_CASE("design matrix unrolls lags feature-major") {
    Dataset d;
    d.names = {"x"};
    d.roles = {SeriesRole::Predictor};
    d.values.resize(3, 1);
    d.values << 1, 2, 3;  // a, b, c
    auto f = build_design_matrix(d, {"x"}, 1, {1, 2}, false);
    REQUIRE(f.rows.rows() == 2);
    REQUIRE(f.rows.cols() == 2);
    CHECK(f.rows(0, 0) == 1);  // lag -1 first
    CHECK(f.rows(0, 1) == 2);
    CHECK(f.rows(1, 0) == 2);
    CHECK(f.rows(1, 1) == 3);
    CHECK(f.column_map[0] == std::pair<int, int>{0, -1});
    CHECK(f.column_map[1] == std::pair<int, int>{0, 0});
}

TEST_CASE("design matrix with L=0 is the feature columns side by side") {
    Dataset d;
    d.names = {"x", "y"};
    d.roles = {SeriesRole::Predictor, SeriesRole::Predictor};
    d.values.resize(3, 2);
    d.values << 1, 10, 2, 20, 3, 30;
    auto f = build_design_matrix(d, {"x", "y"}, 0, {0, 1, 2}, false);
    CHECK(f.rows == d.values);
}

TEST_CASE("design matrix: full-panel shape") {
    Dataset d;
    d.values.resize(261, 19);
    CounterRng rng(3);
    for (Eigen::Index c = 0; c < 19; ++c) {
        d.names.push_back("t" + std::to_string(c));
        d.roles.push_back(SeriesRole::Predictor);
        for (Eigen::Index t = 0; t < 261; ++t) {
            d.values(t, c) = rng.normal(static_cast<std::uint64_t>(c * 261 + t));
        }
    }
    std::vector<Eigen::Index> rows;
    for (Eigen::Index t = 52; t < 261; ++t) rows.push_back(t);
    auto f = build_design_matrix(d, d.names, 52, rows, true);
    CHECK(f.rows.rows() == 209);
    CHECK(f.rows.cols() == 19 * 53 + 1);
}

TEST_CASE("design matrix errors") {
    Dataset d;
    d.names = {"x"};
    d.roles = {SeriesRole::Predictor};
    d.values.resize(5, 1);
    d.values << 1, 2, 3, 4, 5;
    CHECK_THROWS_AS(build_design_matrix(d, {"x"}, 2, {1}, false), std::invalid_argument);
    CHECK_THROWS_AS(build_design_matrix(d, {"nope"}, 0, {0}, false), std::invalid_argument);
}

TEST_CASE("ridge: identity system") {
    Eigen::MatrixXd f = Eigen::MatrixXd::Identity(3, 3);
    Eigen::VectorXd y(3);
    y << 1, 2, 3;
    auto a0 = ridge_solve(wrap(f), y, 0.0);
    CHECK(a0.isApprox(y, 1e-12));
    auto a1 = ridge_solve(wrap(f), y, 1.0);
    Eigen::VectorXd half = y / 2.0;
    CHECK(a1.isApprox(half, 1e-12));
}

TEST_CASE("ridge matches the brute-force oracle on a random system") {
    CounterRng rng(123);
    Eigen::MatrixXd f(12, 7);
    Eigen::VectorXd y(12);
    std::uint64_t k = 0;
    for (Eigen::Index r = 0; r < 12; ++r) {
        for (Eigen::Index c = 0; c < 7; ++c) f(r, c) = rng.normal(k++);
        y(r) = rng.normal(k++);
    }
    auto a = ridge_solve(wrap(f), y, 0.3);
    auto expect = oracle_ridge(f, y, 0.3, false);
    for (Eigen::Index i = 0; i < 7; ++i) {
        CHECK(a[i] == doctest::Approx(expect[static_cast<std::size_t>(i)]).epsilon(1e-8));
    }
}

TEST_CASE("ridge: singular system at lambda 0 is rejected") {
    Eigen::MatrixXd f(4, 3);
    f.col(0).setOnes();
    f.col(1).setOnes();
    f.col(2) << 1, 2, 3, 4;
    Eigen::VectorXd y(4);
    y << 1, 2, 3, 4;
    CHECK_THROWS_AS(ridge_solve(wrap(f), y, 0.0), std::runtime_error);
    CHECK_NOTHROW(ridge_solve(wrap(f), y, 0.1));
}

TEST_CASE("ridge: intercept column is not penalized") {
    // With an unpenalized intercept and huge lambda the fit collapses to the mean.
    Eigen::MatrixXd f(6, 2);
    f.col(0) << -2, -1, 0, 1, 2, 3;
    f.col(1).setOnes();
    Eigen::VectorXd y(6);
    y << 10, 11, 12, 13, 14, 15;
    auto a = ridge_solve(wrap(f, true), y, 1e12);
    CHECK(std::fabs(a[0]) < 1e-6);
    CHECK(a[1] == doctest::Approx(y.mean()).epsilon(1e-9));
}

TEST_CASE("ridge invariants: shrinkage monotonicity and optimality") {
    CounterRng rng(7);
    Eigen::MatrixXd f(20, 6);
    Eigen::VectorXd y(20);
    std::uint64_t k = 0;
    for (Eigen::Index r = 0; r < 20; ++r) {
        for (Eigen::Index c = 0; c < 6; ++c) f(r, c) = rng.normal(k++);
        y(r) = rng.normal(k++);
    }
    double prev_norm = 1e300;
    for (double lambda : {0.01, 0.1, 1.0, 10.0, 100.0}) {
        auto a = ridge_solve(wrap(f), y, lambda);
        CHECK(a.norm() <= prev_norm + 1e-12);
        prev_norm = a.norm();
    }

    // Penalized loss does not decrease under random unit perturbations.
    const double lambda = 0.5;
    auto a = ridge_solve(wrap(f), y, lambda);
    const double base = (y - f * a).squaredNorm() + lambda * a.squaredNorm();
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd delta(6);
        for (Eigen::Index i = 0; i < 6; ++i) {
            delta(i) = rng.normal(k++);
        }
        delta *= 1e-3 / delta.norm();
        Eigen::VectorXd ap = a + delta;
        const double perturbed = (y - f * ap).squaredNorm() + lambda * ap.squaredNorm();
        CHECK(perturbed >= base - 1e-12);
    }
}

TEST_CASE("fit_nonlinearity recovers exact polynomials") {
    Eigen::VectorXd u(8);
    u << -2, -1.3, -0.6, 0.1, 0.8, 1.5, 2.2, 2.9;

    auto ident = fit_nonlinearity(u, u, 3);
    CHECK(ident.coefficients[0] == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(ident.coefficients[1] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::fabs(ident.coefficients[2]) < 1e-10);
    CHECK(std::fabs(ident.coefficients[3]) < 1e-10);

    Eigen::VectorXd y = 2.0 * u.array().cube() - u.array();
    auto cubic = fit_nonlinearity(u, y, 3);
    CHECK(cubic.coefficients[0] == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(cubic.coefficients[1] == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(cubic.coefficients[2] == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(cubic.coefficients[3] == doctest::Approx(2.0).epsilon(1e-8));

    Eigen::VectorXd c5 = Eigen::VectorXd::Constant(8, 5.0);
    auto flat = fit_nonlinearity(u, c5, 3);
    CHECK(flat.coefficients[0] == doctest::Approx(5.0).epsilon(1e-10));

    // Residual orthogonal to the basis.
    Eigen::VectorXd noisy = y;
    noisy[3] += 2.0;
    auto fit = fit_nonlinearity(u, noisy, 3);
    Eigen::VectorXd resid(8);
    for (Eigen::Index i = 0; i < 8; ++i) resid[i] = noisy[i] - fit(u[i]);
    for (int p = 0; p < 4; ++p) {
        double dot = 0.0;
        for (Eigen::Index i = 0; i < 8; ++i) dot += resid[i] * std::pow(u[i], p);
        CHECK(std::fabs(dot) < 1e-7);
    }
}

TEST_CASE("fit_nonlinearity: constant input falls back to the mean") {
    Eigen::VectorXd u = Eigen::VectorXd::Constant(6, 2.0);
    Eigen::VectorXd y(6);
    y << 1, 2, 3, 4, 5, 6;
    bool degenerate = false;
    auto p = fit_nonlinearity(u, y, 3, &degenerate);
    CHECK(degenerate);
    CHECK(p.coefficients[0] == doctest::Approx(3.5));
    CHECK(p.coefficients[1] == 0.0);

    Eigen::VectorXd tiny(2);
    tiny << 1, 2;
    CHECK_THROWS_AS(fit_nonlinearity(tiny, tiny, 3), std::invalid_argument);
}

TEST_CASE("train recovers a copied target") {
    Dataset d = small_panel(110, 2, 11);
    Dataset with_target = d;
    with_target.names.push_back("goal");
    with_target.roles.push_back(SeriesRole::Target);
    with_target.values.conservativeResize(Eigen::NoChange, 3);
    with_target.values.col(2) = with_target.values.col(0);

    CascadeConfig config;
    config.lag_depth = 0;
    config.lambda = 1e-8;
    std::vector<Eigen::Index> rows;
    for (Eigen::Index t = 0; t < 80; ++t) rows.push_back(t);
    auto model = train(with_target, "goal", {"f0", "f1"}, config, rows);
    auto pred = predict(model, with_target, rows);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(pred[i] == doctest::Approx(with_target.values(rows[i], 2)).epsilon(1e-6));
    }
}

TEST_CASE("train recovers a synthetic cascade in-sample") {
    Dataset d = small_panel(200, 3, 21);
    Eigen::MatrixXd true_a(3, 4);
    true_a << 0.8, 0.0, 0.0, 0.3, -0.5, 0.2, 0.0, 0.0, 0.0, 0.0, 0.4, -0.2;
    PolynomialNonlinearity poly;
    poly.coefficients = {0.5, 1.0, 0.1, 0.05};
    Dataset full = gen_cascade_target(d, "goal", {"f0", "f1", "f2"}, true_a, poly, 0.0, 5);

    CascadeConfig config;
    config.lag_depth = 3;
    config.lambda = 1e-6;
    std::vector<Eigen::Index> rows;
    for (Eigen::Index t = 3; t < 200; ++t) rows.push_back(t);
    auto model = train(full, "goal", {"f0", "f1", "f2"}, config, rows);
    auto pred = predict(model, full, rows);
    std::vector<double> actual;
    for (auto t : rows) actual.push_back(full.values(t, 3));
    CHECK(spearman_rho(actual, pred) >= 0.999);
}

TEST_CASE("predict with zero weights is the constant c0 in original units") {
    Dataset d = small_panel(110, 1, 31);
    Dataset with_target = d;
    with_target.names.push_back("goal");
    with_target.roles.push_back(SeriesRole::Target);
    with_target.values.conservativeResize(Eigen::NoChange, 2);
    with_target.values.col(1) = with_target.values.col(0) * 2.0;

    CascadeConfig config;
    config.lag_depth = 0;
    config.lambda = 1.0;
    std::vector<Eigen::Index> rows;
    for (Eigen::Index t = 0; t < 60; ++t) rows.push_back(t);
    auto model = train(with_target, "goal", {"f0"}, config, rows);

    model.weights.coefficients.setZero();
    model.weights.intercept = 0.0;
    model.nonlinearity.coefficients = {0.25, 0.0, 0.0, 0.0};
    auto pred = predict(model, with_target, rows);
    const auto& s = model.norm.at("goal");
    for (double v : pred) CHECK(v == doctest::Approx(s.mean + 0.25 * s.sd).epsilon(1e-12));
}

TEST_CASE("predict errors on missing features") {
    Dataset d = small_panel(110, 2, 41);
    Dataset with_target = d;
    with_target.names.push_back("goal");
    with_target.roles.push_back(SeriesRole::Target);
    with_target.values.conservativeResize(Eigen::NoChange, 3);
    with_target.values.col(2) = with_target.values.col(0);
    CascadeConfig config;
    config.lag_depth = 2;
    config.lambda = 0.1;
    std::vector<Eigen::Index> rows;
    for (Eigen::Index t = 2; t < 60; ++t) rows.push_back(t);
    auto model = train(with_target, "goal", {"f0", "f1"}, config, rows);

    Dataset missing = with_target;
    missing.names[1] = "renamed";
    CHECK_THROWS_AS(predict(model, missing, rows), std::invalid_argument);
    CHECK_THROWS_AS(predict(model, with_target, {1}), std::invalid_argument);
}

TEST_CASE("feature importance: forced arithmetic and ties") {
    WienerCascadeModel model;
    model.feature_names = {"a", "b"};
    model.weights.coefficients.resize(2, 2);
    model.weights.coefficients << 1, -1, 0.5, 0.5;
    auto imp = feature_importance(model);
    CHECK(imp[0].score == doctest::Approx(2.0));
    CHECK(imp[1].score == doctest::Approx(1.0));
    CHECK(imp[0].rank == 1);
    CHECK(imp[1].rank == 2);

    model.weights.coefficients.setZero();
    auto zero = feature_importance(model);
    CHECK(zero[0].rank == 1);  // ties keep feature order
    CHECK(zero[1].rank == 2);
    CHECK(zero[0].score == 0.0);

    // Sign flips that preserve |A| leave scores unchanged.
    model.weights.coefficients << 1, -1, 0.5, 0.5;
    auto before = feature_importance(model);
    model.weights.coefficients(0, 0) = -1;
    model.weights.coefficients(1, 1) = -0.5;
    auto after = feature_importance(model);
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(before[i].score == after[i].score);
}

TEST_CASE("feature permutation equivariance") {
    Dataset d = small_panel(120, 3, 51);
    Eigen::MatrixXd true_a(3, 3);
    true_a << 0.9, 0.1, 0.0, -0.4, 0.0, 0.2, 0.1, 0.3, -0.6;
    PolynomialNonlinearity poly;
    poly.coefficients = {0.0, 1.0, 0.0, 0.08};
    Dataset full = gen_cascade_target(d, "goal", {"f0", "f1", "f2"}, true_a, poly, 0.2, 6);

    CascadeConfig config;
    config.lag_depth = 2;
    config.lambda = 0.5;
    std::vector<Eigen::Index> rows;
    for (Eigen::Index t = 2; t < 120; ++t) rows.push_back(t);

    auto m1 = train(full, "goal", {"f0", "f1", "f2"}, config, rows);
    auto m2 = train(full, "goal", {"f2", "f0", "f1"}, config, rows);

    auto p1 = predict(m1, full, rows);
    auto p2 = predict(m2, full, rows);
    for (std::size_t i = 0; i < p1.size(); ++i) {
        CHECK(p1[i] == doctest::Approx(p2[i]).epsilon(1e-9));
    }

    auto i1 = feature_importance(m1);
    auto i2 = feature_importance(m2);
    std::map<std::string, double> s1, s2;
    for (const auto& e : i1) s1[e.name] = e.score;
    for (const auto& e : i2) s2[e.name] = e.score;
    for (const auto& [name, score] : s1) {
        CHECK(score == doctest::Approx(s2[name]).epsilon(1e-9));
    }
}

TEST_CASE("lambda to infinity drives penalized coefficients to zero") {
    Dataset d = small_panel(110, 2, 61);
    Dataset full = d;
    full.names.push_back("goal");
    full.roles.push_back(SeriesRole::Target);
    full.values.conservativeResize(Eigen::NoChange, 3);
    full.values.col(2) = full.values.col(0) + full.values.col(1);

    CascadeConfig config;
    config.lag_depth = 1;
    config.lambda = 1e10;
    std::vector<Eigen::Index> rows;
    for (Eigen::Index t = 1; t < 100; ++t) rows.push_back(t);
    auto model = train(full, "goal", {"f0", "f1"}, config, rows);
    CHECK(model.weights.coefficients.cwiseAbs().maxCoeff() < 1e-6);
    CHECK(std::fabs(model.weights.intercept) < 1e-6);  // z-space training mean
}

TEST_CASE("model json round-trip is exact") {
    Dataset d = small_panel(110, 2, 71);
    Dataset full = d;
    full.names.push_back("goal");
    full.roles.push_back(SeriesRole::Target);
    full.values.conservativeResize(Eigen::NoChange, 3);
    full.values.col(2) = 0.7 * full.values.col(0) - 0.2 * full.values.col(1);

    CascadeConfig config;
    config.lag_depth = 3;
    config.lambda = 0.37;
    std::vector<Eigen::Index> rows;
    for (Eigen::Index t = 3; t < 90; ++t) rows.push_back(t);
    auto model = train(full, "goal", {"f0", "f1"}, config, rows);

    auto restored = model_from_json(model_to_json(model));
    CHECK(restored.weights.coefficients == model.weights.coefficients);
    CHECK(restored.weights.intercept == model.weights.intercept);
    CHECK(restored.nonlinearity.coefficients == model.nonlinearity.coefficients);
    CHECK(restored.norm.at("goal").mean == model.norm.at("goal").mean);
    CHECK(restored.norm.at("f0").sd == model.norm.at("f0").sd);

    auto p1 = predict(model, full, rows);
    auto p2 = predict(restored, full, rows);
    CHECK(p1 == p2);
}

TEST_SUITE_END();

#include "trendcast/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "trendcast/evaluation.hpp"

namespace trendcast {

DesignMatrix build_design_matrix(const Dataset& zscored, const std::vector<std::string>& features,
                                 Eigen::Index lag_depth, const std::vector<Eigen::Index>& row_times,
                                 bool include_intercept) {
    if (features.empty()) throw std::invalid_argument("no features for design matrix");
    std::vector<Eigen::Index> cols;
    cols.reserve(features.size());
    for (const auto& f : features) cols.push_back(zscored.column(f));

    const auto n = static_cast<Eigen::Index>(features.size());
    const Eigen::Index lags = lag_depth + 1;
    const Eigen::Index ncols = n * lags + (include_intercept ? 1 : 0);
    const auto nrows = static_cast<Eigen::Index>(row_times.size());

    DesignMatrix out;
    out.rows.resize(nrows, ncols);
    out.row_times = row_times;
    out.has_intercept = include_intercept;
    out.column_map.reserve(static_cast<std::size_t>(n * lags));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < lags; ++j) {
            out.column_map.emplace_back(static_cast<int>(i), static_cast<int>(j - lag_depth));
        }
    }

    for (Eigen::Index r = 0; r < nrows; ++r) {
        const Eigen::Index t = row_times[static_cast<std::size_t>(r)];
        if (t < lag_depth || t >= zscored.rows()) {
            throw std::invalid_argument("design row time " + std::to_string(t) +
                                        " outside usable range [" + std::to_string(lag_depth) +
                                        ", " + std::to_string(zscored.rows()) + ")");
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < lags; ++j) {
                out.rows(r, i * lags + j) = zscored.values(t - lag_depth + j, cols[static_cast<std::size_t>(i)]);
            }
        }
        if (include_intercept) out.rows(r, ncols - 1) = 1.0;
    }
    return out;
}

namespace {

// Solve (G0 + lambda*D) a = fty where D is the identity with a zero at the
// intercept column. G0 = F^T F is reused across the lambda grid.
Eigen::VectorXd solve_gram(const Eigen::MatrixXd& g0, const Eigen::VectorXd& fty, double lambda,
                           bool has_intercept) {
    Eigen::MatrixXd g = g0;
    const Eigen::Index last = g.rows() - 1;
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
        if (has_intercept && i == last) continue;
        g(i, i) += lambda;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
    if (lambda == 0.0) {
        // Without a ridge term the Gram matrix can be rank deficient yet still
        // consistent, so a residual check alone would miss it.
        const Eigen::VectorXd d = ldlt.vectorD().cwiseAbs();
        if (d.minCoeff() <= 1e-10 * d.maxCoeff()) {
            throw std::runtime_error("singular ridge system (rank-deficient at lambda = 0)");
        }
    }
    Eigen::VectorXd a = ldlt.solve(fty);
    const double resid = (g * a - fty).norm();
    const double rhs = fty.norm();
    if (!a.allFinite() || resid > 1e-8 * std::max(rhs, 1e-300)) {
        throw std::runtime_error("singular ridge system (residual " + std::to_string(resid) + ")");
    }
    return a;
}

}  // namespace

Eigen::VectorXd ridge_solve(const DesignMatrix& design, const Eigen::VectorXd& y, double lambda) {
    if (design.rows.rows() != y.size()) throw std::invalid_argument("ridge: dimension mismatch");
    if (design.rows.rows() < 1) throw std::invalid_argument("ridge: empty system");
    if (lambda < 0.0) throw std::invalid_argument("ridge: negative lambda");
    const Eigen::MatrixXd g0 = design.rows.transpose() * design.rows;
    const Eigen::VectorXd fty = design.rows.transpose() * y;
    return solve_gram(g0, fty, lambda, design.has_intercept);
}

PolynomialNonlinearity fit_nonlinearity(const Eigen::VectorXd& u, const Eigen::VectorXd& y,
                                        int degree, bool* degenerate) {
    if (degenerate) *degenerate = false;
    if (u.size() != y.size()) throw std::invalid_argument("fit_nonlinearity: length mismatch");
    if (u.size() < degree + 1) throw std::invalid_argument("fit_nonlinearity: too few points");
    if (degree != 3) throw std::invalid_argument("fit_nonlinearity: degree must be 3");

    const double spread = u.maxCoeff() - u.minCoeff();
    PolynomialNonlinearity p;
    if (spread <= 1e-12 * std::max(1.0, u.cwiseAbs().maxCoeff())) {
        p.coefficients = {y.mean(), 0.0, 0.0, 0.0};
        if (degenerate) *degenerate = true;
        return p;
    }

    Eigen::MatrixXd v(u.size(), 4);
    v.col(0).setOnes();
    v.col(1) = u;
    v.col(2) = u.cwiseProduct(u);
    v.col(3) = v.col(2).cwiseProduct(u);
    Eigen::Vector4d c = v.colPivHouseholderQr().solve(y);
    p.coefficients = {c[0], c[1], c[2], c[3]};
    return p;
}

namespace {

NormParams fit_norm_for(const Dataset& d, const std::vector<std::string>& names,
                        const std::vector<Eigen::Index>& rows) {
    if (rows.empty()) throw std::invalid_argument("empty normalization row set");
    NormParams p;
    const double n = static_cast<double>(rows.size());
    for (const auto& name : names) {
        const Eigen::Index c = d.column(name);
        double mean = 0.0;
        for (auto t : rows) mean += d.values(t, c);
        mean /= n;
        double var = 0.0;
        for (auto t : rows) {
            double dv = d.values(t, c) - mean;
            var += dv * dv;
        }
        var /= n;
        if (var <= 0.0) {
            throw std::invalid_argument("zero variance in series '" + name + "' over fit rows");
        }
        p.stats[name] = {mean, std::sqrt(var)};
    }
    return p;
}

// Reduced z-scored dataset holding exactly the named columns.
Dataset zscore_columns(const Dataset& d, const std::vector<std::string>& names,
                       const NormParams& norm) {
    Dataset out;
    out.start_week = d.start_week;
    out.names = names;
    out.roles.assign(names.size(), SeriesRole::Predictor);
    out.values.resize(d.rows(), static_cast<Eigen::Index>(names.size()));
    for (std::size_t j = 0; j < names.size(); ++j) {
        const auto& s = norm.at(names[j]);
        out.values.col(static_cast<Eigen::Index>(j)) =
            (d.values.col(d.column(names[j])).array() - s.mean) / s.sd;
    }
    return out;
}

Eigen::VectorXd target_vector(const Dataset& d, const std::string& target,
                              const std::vector<Eigen::Index>& rows, const NormParams& norm) {
    const auto& s = norm.at(target);
    const Eigen::Index c = d.column(target);
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        y[static_cast<Eigen::Index>(i)] = (d.values(rows[i], c) - s.mean) / s.sd;
    }
    return y;
}

// Joint penalized loss ||y - P(Fa)||^2 + lambda * ||a||^2 (intercept excluded).
double cascade_loss(const Eigen::VectorXd& u, const Eigen::VectorXd& y,
                    const PolynomialNonlinearity& poly, const Eigen::VectorXd& a, double lambda,
                    bool has_intercept) {
    double s = 0.0;
    for (Eigen::Index r = 0; r < u.size(); ++r) {
        const double e = y[r] - poly(u[r]);
        s += e * e;
    }
    double pen = a.squaredNorm();
    if (has_intercept) pen -= a[a.size() - 1] * a[a.size() - 1];
    return s + lambda * pen;
}

// Alternating polish of the cascade: damped Gauss-Newton steps on the filter
// weights, re-fitting the polynomial after each step. The initial
// linear-then-polynomial pass is biased whenever the nonlinearity bends the
// target away from the linear projection; the polish removes that bias and is
// a near no-op when the first pass already explains the target (the step
// collapses and the loop exits on the improvement tolerance).
void refine_cascade(const Eigen::MatrixXd& f, const Eigen::VectorXd& y, double lambda,
                    bool has_intercept, Eigen::VectorXd& a, PolynomialNonlinearity& poly) {
    const int max_iter = 25;
    const Eigen::Index last = f.cols() - 1;
    Eigen::VectorXd u = f * a;
    double loss = cascade_loss(u, y, poly, a, lambda, has_intercept);

    for (int it = 0; it < max_iter; ++it) {
        const auto& c = poly.coefficients;
        Eigen::VectorXd dp(u.size());
        Eigen::VectorXd resid(u.size());
        for (Eigen::Index r = 0; r < u.size(); ++r) {
            dp[r] = c[1] + u[r] * (2.0 * c[2] + 3.0 * c[3] * u[r]);
            resid[r] = y[r] - poly(u[r]);
        }
        if (dp.cwiseAbs().maxCoeff() < 1e-12) break;  // flat nonlinearity: nothing to adjust

        Eigen::MatrixXd j = dp.asDiagonal() * f;
        Eigen::MatrixXd jtj = j.transpose() * j;
        Eigen::VectorXd grad = j.transpose() * resid;
        Eigen::VectorXd a_pen = a;
        if (has_intercept) a_pen[last] = 0.0;
        for (Eigen::Index i = 0; i < jtj.rows(); ++i) {
            if (has_intercept && i == last) continue;
            jtj(i, i) += lambda;
        }
        Eigen::VectorXd delta = jtj.ldlt().solve(grad - lambda * a_pen);
        if (!delta.allFinite()) break;

        bool accepted = false;
        double step = 1.0;
        for (int h = 0; h < 6 && !accepted; ++h, step *= 0.5) {
            Eigen::VectorXd cand = a + step * delta;
            Eigen::VectorXd u_cand = f * cand;
            PolynomialNonlinearity p_cand = fit_nonlinearity(u_cand, y, 3);
            const double l_cand = cascade_loss(u_cand, y, p_cand, cand, lambda, has_intercept);
            if (l_cand < loss) {
                const double gain = loss - l_cand;
                a = std::move(cand);
                u = std::move(u_cand);
                poly = p_cand;
                const bool converged = gain <= 1e-9 * std::max(loss, 1e-300);
                loss = l_cand;
                if (converged) return;
                accepted = true;
            }
        }
        if (!accepted) break;
    }
}

FilterWeights unpack_weights(const Eigen::VectorXd& a, Eigen::Index n_features,
                             Eigen::Index lag_depth, bool has_intercept) {
    FilterWeights w;
    const Eigen::Index lags = lag_depth + 1;
    w.coefficients.resize(n_features, lags);
    for (Eigen::Index i = 0; i < n_features; ++i) {
        for (Eigen::Index j = 0; j < lags; ++j) {
            w.coefficients(i, j) = a[i * lags + j];
        }
    }
    w.intercept = has_intercept ? a[a.size() - 1] : 0.0;
    return w;
}

// Pooled out-of-fold Spearman rho of the full cascade over an inner blocked
// split of the training rows; used to pick lambda.
double select_lambda(const Dataset& d, const std::string& target,
                     const std::vector<std::string>& features, const CascadeConfig& config,
                     const std::vector<Eigen::Index>& train_rows) {
    const int inner_k = 3;
    if (static_cast<int>(train_rows.size()) < inner_k * 4) return 1.0;  // tiny sets: mid-grid

    std::vector<std::vector<Eigen::Index>> blocks(inner_k);
    const std::size_t n = train_rows.size();
    for (std::size_t i = 0; i < n; ++i) {
        blocks[i * inner_k / n].push_back(train_rows[i]);
    }

    std::vector<std::string> all_names = features;
    all_names.push_back(target);

    const auto& grid = lambda_grid();
    std::vector<std::vector<double>> pred(grid.size());
    std::vector<double> actual;

    for (int f = 0; f < inner_k; ++f) {
        std::vector<Eigen::Index> fit_rows;
        for (int g = 0; g < inner_k; ++g) {
            if (g != f) fit_rows.insert(fit_rows.end(), blocks[g].begin(), blocks[g].end());
        }
        NormParams norm = fit_norm_for(d, all_names, fit_rows);
        Dataset z = zscore_columns(d, all_names, norm);
        DesignMatrix train_f =
            build_design_matrix(z, features, config.lag_depth, fit_rows, config.include_intercept);
        DesignMatrix test_f = build_design_matrix(z, features, config.lag_depth, blocks[f],
                                                  config.include_intercept);
        Eigen::VectorXd y_train = target_vector(d, target, fit_rows, norm);

        const Eigen::MatrixXd g0 = train_f.rows.transpose() * train_f.rows;
        const Eigen::VectorXd fty = train_f.rows.transpose() * y_train;
        for (std::size_t li = 0; li < grid.size(); ++li) {
            Eigen::VectorXd a = solve_gram(g0, fty, grid[li], config.include_intercept);
            auto poly = fit_nonlinearity(train_f.rows * a, y_train, 3);
            Eigen::VectorXd u = test_f.rows * a;
            for (Eigen::Index r = 0; r < u.size(); ++r) pred[li].push_back(poly(u[r]));
        }
        const Eigen::Index tc = d.column(target);
        for (auto t : blocks[f]) actual.push_back(d.values(t, tc));
    }

    double best_rho = -2.0;
    double best_lambda = grid.front();
    for (std::size_t li = 0; li < grid.size(); ++li) {
        double rho;
        try {
            rho = spearman_rho(actual, pred[li]);
        } catch (const std::exception&) {
            rho = -2.0;  // constant predictions
        }
        if (rho > best_rho) {
            best_rho = rho;
            best_lambda = grid[li];
        }
    }
    return best_lambda;
}

}  // namespace

WienerCascadeModel train(const Dataset& d, const std::string& target_name,
                         const std::vector<std::string>& features, const CascadeConfig& config,
                         const std::vector<Eigen::Index>& train_rows) {
    if (features.empty()) throw std::invalid_argument("train: no features");
    if (train_rows.empty()) throw std::invalid_argument("train: no training rows");
    d.column(target_name);  // throws on unknown target
    for (auto t : train_rows) {
        if (t < config.lag_depth) {
            throw std::invalid_argument("train: row " + std::to_string(t) + " has t < lag depth");
        }
    }

    double lambda = config.lambda;
    if (config.lambda_is_auto()) {
        lambda = select_lambda(d, target_name, features, config, train_rows);
    }

    std::vector<std::string> all_names = features;
    all_names.push_back(target_name);
    NormParams norm = fit_norm_for(d, all_names, train_rows);
    Dataset z = zscore_columns(d, all_names, norm);

    DesignMatrix f =
        build_design_matrix(z, features, config.lag_depth, train_rows, config.include_intercept);
    Eigen::VectorXd y = target_vector(d, target_name, train_rows, norm);

    Eigen::VectorXd a = ridge_solve(f, y, lambda);
    bool degenerate = false;
    PolynomialNonlinearity poly = fit_nonlinearity(f.rows * a, y, config.poly_degree, &degenerate);
    if (!degenerate) refine_cascade(f.rows, y, lambda, config.include_intercept, a, poly);

    WienerCascadeModel model;
    model.config = config;
    model.target_name = target_name;
    model.feature_names = features;
    model.weights = unpack_weights(a, static_cast<Eigen::Index>(features.size()),
                                   config.lag_depth, config.include_intercept);
    model.nonlinearity = poly;
    model.norm = norm;
    model.lambda_used = lambda;
    return model;
}

std::vector<double> predict(const WienerCascadeModel& model, const Dataset& d,
                            const std::vector<Eigen::Index>& row_times) {
    for (const auto& f : model.feature_names) {
        if (!d.has_series(f)) throw std::invalid_argument("predict: missing feature '" + f + "'");
    }
    Dataset z = zscore_columns(d, model.feature_names, model.norm);
    DesignMatrix f = build_design_matrix(z, model.feature_names, model.config.lag_depth, row_times,
                                         model.config.include_intercept);

    const Eigen::Index n = static_cast<Eigen::Index>(model.feature_names.size());
    const Eigen::Index lags = model.config.lag_depth + 1;
    Eigen::VectorXd a(f.rows.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < lags; ++j) a[i * lags + j] = model.weights.coefficients(i, j);
    }
    if (model.config.include_intercept) a[a.size() - 1] = model.weights.intercept;

    Eigen::VectorXd u = f.rows * a;
    std::vector<double> z_pred(static_cast<std::size_t>(u.size()));
    for (Eigen::Index r = 0; r < u.size(); ++r) {
        z_pred[static_cast<std::size_t>(r)] = model.nonlinearity(u[r]);
    }
    return zscore_invert(z_pred, model.norm, model.target_name);
}

std::vector<ImportanceEntry> feature_importance(const WienerCascadeModel& model) {
    std::vector<ImportanceEntry> out;
    const auto n = static_cast<Eigen::Index>(model.feature_names.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        ImportanceEntry e;
        e.name = model.feature_names[static_cast<std::size_t>(i)];
        e.score = model.weights.coefficients.row(i).cwiseAbs().sum();
        out.push_back(std::move(e));
    }
    // Ranks: 1 = highest score; ties resolved by feature order.
    std::vector<std::size_t> order(out.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return out[a].score > out[b].score; });
    for (std::size_t r = 0; r < order.size(); ++r) out[order[r]].rank = static_cast<int>(r + 1);
    return out;
}

std::string model_to_json(const WienerCascadeModel& model) {
    nlohmann::json j;
    j["config"] = {{"lag_depth", model.config.lag_depth},
                   {"lambda", model.config.lambda},
                   {"poly_degree", model.config.poly_degree},
                   {"include_intercept", model.config.include_intercept}};
    j["target_name"] = model.target_name;
    j["feature_names"] = model.feature_names;
    std::vector<std::vector<double>> a;
    for (Eigen::Index i = 0; i < model.weights.coefficients.rows(); ++i) {
        std::vector<double> row;
        for (Eigen::Index c = 0; c < model.weights.coefficients.cols(); ++c) {
            row.push_back(model.weights.coefficients(i, c));
        }
        a.push_back(std::move(row));
    }
    j["A"] = a;
    j["intercept"] = model.weights.intercept;
    j["poly"] = model.nonlinearity.coefficients;
    j["lambda_used"] = model.lambda_used;
    nlohmann::json norm = nlohmann::json::object();
    for (const auto& [name, s] : model.norm.stats) {
        norm[name] = {{"mean", s.mean}, {"sd", s.sd}};
    }
    j["norm"] = norm;
    return j.dump(2) + "\n";
}

WienerCascadeModel model_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    WienerCascadeModel m;
    m.config.lag_depth = j.at("config").at("lag_depth").get<Eigen::Index>();
    m.config.lambda = j.at("config").at("lambda").get<double>();
    m.config.poly_degree = j.at("config").at("poly_degree").get<int>();
    m.config.include_intercept = j.at("config").at("include_intercept").get<bool>();
    m.target_name = j.at("target_name").get<std::string>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    auto a = j.at("A").get<std::vector<std::vector<double>>>();
    m.weights.coefficients.resize(static_cast<Eigen::Index>(a.size()),
                                  a.empty() ? 0 : static_cast<Eigen::Index>(a[0].size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t c = 0; c < a[i].size(); ++c) {
            m.weights.coefficients(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                a[i][c];
        }
    }
    m.weights.intercept = j.at("intercept").get<double>();
    auto poly = j.at("poly").get<std::vector<double>>();
    if (poly.size() != 4) throw std::invalid_argument("model JSON: poly must have 4 coefficients");
    std::copy(poly.begin(), poly.end(), m.nonlinearity.coefficients.begin());
    m.lambda_used = j.at("lambda_used").get<double>();
    for (const auto& [name, s] : j.at("norm").items()) {
        m.norm.stats[name] = {s.at("mean").get<double>(), s.at("sd").get<double>()};
    }
    return m;
}

}  // namespace trendcast

#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "trendcast/dataset.hpp"

namespace trendcast {

struct CascadeConfig {
    Eigen::Index lag_depth = 52;    // weeks of history per feature
    double lambda = -1.0;           // ridge constant; < 0 means select by inner CV
    int poly_degree = 3;
    bool include_intercept = true;

    bool lambda_is_auto() const { return lambda < 0.0; }
};

// Grid searched when lambda is auto.
inline const std::vector<double>& lambda_grid() {
    static const std::vector<double> grid = {1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0};
    return grid;
}

// Lagged regression matrix in z-space. Column order is feature-major with
// lag ascending from -L to 0; intercept column last when enabled.
struct DesignMatrix {
    Eigen::MatrixXd rows;                       // R x (n*(L+1) [+1])
    std::vector<Eigen::Index> row_times;        // target time per row
    std::vector<std::pair<int, int>> column_map;  // (feature index, lag offset j in [-L, 0])
    bool has_intercept = false;
};

struct FilterWeights {
    Eigen::MatrixXd coefficients;  // n x (L+1), column j holds lag -(L-j)... i.e. lag -L first
    double intercept = 0.0;
};

// Static cubic mapping u -> c0 + c1 u + c2 u^2 + c3 u^3.
struct PolynomialNonlinearity {
    std::array<double, 4> coefficients{0.0, 1.0, 0.0, 0.0};

    double operator()(double u) const {
        const auto& c = coefficients;
        return c[0] + u * (c[1] + u * (c[2] + u * c[3]));
    }
};

struct WienerCascadeModel {
    CascadeConfig config;
    std::string target_name;
    std::vector<std::string> feature_names;
    FilterWeights weights;
    PolynomialNonlinearity nonlinearity;
    NormParams norm;
    double lambda_used = 0.0;
};

struct ImportanceEntry {
    std::string name;
    double score = 0.0;  // sum over lags of |A_ij|
    int rank = 0;        // 1 = largest score; ties keep feature order
};

DesignMatrix build_design_matrix(const Dataset& zscored, const std::vector<std::string>& features,
                                 Eigen::Index lag_depth, const std::vector<Eigen::Index>& row_times,
                                 bool include_intercept);

// Closed-form ridge solution via the normal equations; the intercept column
// is never penalized.
Eigen::VectorXd ridge_solve(const DesignMatrix& design, const Eigen::VectorXd& y, double lambda);

// Least-squares cubic fit of y on powers of u. Constant u falls back to
// [mean(y), 0, 0, 0] and sets *degenerate when provided.
PolynomialNonlinearity fit_nonlinearity(const Eigen::VectorXd& u, const Eigen::VectorXd& y,
                                        int degree = 3, bool* degenerate = nullptr);

// Full pipeline on the given training rows: z-score fit, design matrix,
// ridge filter (lambda from config or inner 3-fold CV), cubic nonlinearity,
// then a damped alternating refinement of filter and polynomial against the
// joint penalized loss.
WienerCascadeModel train(const Dataset& d, const std::string& target_name,
                         const std::vector<std::string>& features, const CascadeConfig& config,
                         const std::vector<Eigen::Index>& train_rows);

// Predictions in original index units at the requested times.
std::vector<double> predict(const WienerCascadeModel& model, const Dataset& d,
                            const std::vector<Eigen::Index>& row_times);

std::vector<ImportanceEntry> feature_importance(const WienerCascadeModel& model);

std::string model_to_json(const WienerCascadeModel& model);
WienerCascadeModel model_from_json(const std::string& text);

}  // namespace trendcast

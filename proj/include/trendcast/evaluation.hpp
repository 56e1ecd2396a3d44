#pragma once

#include <string>
#include <vector>

#include "trendcast/cascade.hpp"
#include "trendcast/dataset.hpp"
#include "trendcast/selection.hpp"

namespace trendcast {

struct EvalMetrics {
    double rho = 0.0;
    double p_value = 1.0;
    double mse = 0.0;
    int n = 0;
};

struct PredictionRow {
    Eigen::Index time = 0;
    double actual = 0.0;
    double predicted = 0.0;
    int fold = 0;
};

struct CvReport {
    std::string target;
    SelectionSpec scenario;
    std::vector<double> lambda_chosen;        // per fold
    std::vector<EvalMetrics> fold_metrics;
    EvalMetrics pooled;                       // over concatenated out-of-fold predictions
    std::vector<PredictionRow> predictions;   // every usable time exactly once, in time order
};

// Pearson correlation of fractional (average) ranks; ties get mean ranks.
// Throws on constant input.
double spearman_rho(const std::vector<double>& a, const std::vector<double>& b);

// Two-sided significance of a Spearman rho: exact permutation enumeration
// for n <= 9, t-approximation with n-2 degrees of freedom otherwise.
double spearman_pvalue(double rho, int n);

// Seeded permutation test (default 1999 resamples) for sensitivity checks.
double spearman_pvalue_permutation(const std::vector<double>& a, const std::vector<double>& b,
                                   int resamples = 1999, std::uint64_t seed = 0);

double mse(const std::vector<double>& actual, const std::vector<double>& predicted);

EvalMetrics compute_metrics(const std::vector<double>& actual,
                            const std::vector<double>& predicted);

// Blocked k-fold cross-validation of the full pipeline. Everything that is
// fit (normalization, lambda, selection context when scope is PerFold, the
// filter and the polynomial) sees training rows only.
CvReport cross_validate(const Dataset& d, const std::string& target, const SelectionSpec& spec,
                        const CascadeConfig& config, int k = 5,
                        SelectionScope scope = SelectionScope::Global,
                        const WaveletConfig& wavelet_config = WaveletConfig{});

std::string report_to_json(const CvReport& report);

// `week,actual,predicted,fold` rows for plotting.
std::string predictions_to_csv(const CvReport& report, std::int64_t start_week);

}  // namespace trendcast

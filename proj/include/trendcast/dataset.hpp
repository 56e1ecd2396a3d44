#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace trendcast {

enum class SeriesRole { Predictor, Target };

// Days since 1970-01-01 for a civil date (proleptic Gregorian).
std::int64_t days_from_civil(int y, unsigned m, unsigned d);
void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d);

// "YYYY-MM-DD" <-> day count. parse throws std::invalid_argument on bad input.
std::int64_t parse_iso_date(const std::string& s);
std::string format_iso_date(std::int64_t days);

// Aligned weekly panel of named series on the 0-100 search-index scale.
struct Dataset {
    std::int64_t start_week = 0;          // days since epoch of the first sample
    std::vector<std::string> names;       // one per column, unique, nonempty
    std::vector<SeriesRole> roles;        // parallel to names
    Eigen::MatrixXd values;               // T x M, row t = week t

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }

    // Column index for a name; throws if unknown.
    Eigen::Index column(const std::string& name) const;
    bool has_series(const std::string& name) const;

    std::vector<std::string> predictor_names() const;
    std::vector<std::string> target_names() const;

    // Tag the named series as targets, all others as predictors.
    void set_targets(const std::vector<std::string>& targets);

    // Throws if any structural invariant is violated.
    void validate() const;
};

// Per-series mean and (population) standard deviation.
struct NormParams {
    struct Stat {
        double mean = 0.0;
        double sd = 1.0;
    };
    std::map<std::string, Stat> stats;

    const Stat& at(const std::string& name) const;
};

// Contiguous blocked fold assignment over the usable index range [L, T).
struct FoldPlan {
    int k = 0;
    Eigen::Index lag_depth = 0;
    Eigen::Index t_total = 0;
    std::vector<int> assignments;  // assignments[i] = fold of time index L + i

    int fold_of(Eigen::Index t) const;
    std::vector<Eigen::Index> indices_in_fold(int fold) const;
    std::vector<Eigen::Index> indices_not_in_fold(int fold) const;
    std::vector<Eigen::Index> usable_indices() const;
};

// CSV ingestion: header `date,<name1>,...`, one row per ISO week, ascending,
// no gaps. Roles default to predictor.
Dataset parse_trends_csv(const std::string& text);

// Canonical CSV serialization: shortest round-trip decimal formatting, "\n"
// line endings. parse(to_csv(d)) is value-identical and byte-stable.
std::string to_trends_csv(const Dataset& d);

// Canonical dataset JSON: {start_week, names[], roles[], values[[...]]}.
std::string dataset_to_json(const Dataset& d);
Dataset dataset_from_json(const std::string& text);

// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double v);

// Fit z-score statistics over the given row indices only.
NormParams zscore_fit(const Dataset& d, const std::vector<Eigen::Index>& fit_indices);

Dataset zscore_apply(const Dataset& d, const NormParams& params);
std::vector<double> zscore_invert(const std::vector<double>& series, const NormParams& params,
                                  const std::string& name);

FoldPlan make_fold_plan(Eigen::Index t_total, Eigen::Index lag_depth, int k);

}  // namespace trendcast

#include "trendcast/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace trendcast {

std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = static_cast<int>(yy + (m <= 2));
}

std::int64_t parse_iso_date(const std::string& s) {
    int y = 0;
    unsigned m = 0, d = 0;
    if (std::sscanf(s.c_str(), "%d-%u-%u", &y, &m, &d) != 3 || m < 1 || m > 12 || d < 1 ||
        d > 31) {
        throw std::invalid_argument("malformed date: '" + s + "'");
    }
    return days_from_civil(y, m, d);
}

std::string format_iso_date(std::int64_t days) {
    int y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", y, m, d);
    return buf;
}

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

Eigen::Index Dataset::column(const std::string& name) const {
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(names.size()); ++j) {
        if (names[j] == name) return j;
    }
    throw std::invalid_argument("unknown series name: '" + name + "'");
}

bool Dataset::has_series(const std::string& name) const {
    return std::find(names.begin(), names.end(), name) != names.end();
}

std::vector<std::string> Dataset::predictor_names() const {
    std::vector<std::string> out;
    for (std::size_t j = 0; j < names.size(); ++j) {
        if (roles[j] == SeriesRole::Predictor) out.push_back(names[j]);
    }
    return out;
}

std::vector<std::string> Dataset::target_names() const {
    std::vector<std::string> out;
    for (std::size_t j = 0; j < names.size(); ++j) {
        if (roles[j] == SeriesRole::Target) out.push_back(names[j]);
    }
    return out;
}

void Dataset::set_targets(const std::vector<std::string>& targets) {
    for (const auto& t : targets) column(t);  // throws on unknown name
    roles.assign(names.size(), SeriesRole::Predictor);
    for (const auto& t : targets) roles[column(t)] = SeriesRole::Target;
}

void Dataset::validate() const {
    if (names.size() != static_cast<std::size_t>(values.cols()) ||
        roles.size() != names.size()) {
        throw std::invalid_argument("dataset: names/roles/values shape mismatch");
    }
    std::set<std::string> seen;
    for (const auto& n : names) {
        if (n.empty()) throw std::invalid_argument("dataset: empty series name");
        if (!seen.insert(n).second)
            throw std::invalid_argument("dataset: duplicate series name '" + n + "'");
    }
    if (!values.allFinite()) throw std::invalid_argument("dataset: non-finite value");
}

int FoldPlan::fold_of(Eigen::Index t) const {
    if (t < lag_depth || t >= t_total) throw std::out_of_range("time index outside fold plan");
    return assignments[static_cast<std::size_t>(t - lag_depth)];
}

std::vector<Eigen::Index> FoldPlan::indices_in_fold(int fold) const {
    std::vector<Eigen::Index> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i] == fold) out.push_back(lag_depth + static_cast<Eigen::Index>(i));
    }
    return out;
}

std::vector<Eigen::Index> FoldPlan::indices_not_in_fold(int fold) const {
    std::vector<Eigen::Index> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i] != fold) out.push_back(lag_depth + static_cast<Eigen::Index>(i));
    }
    return out;
}

std::vector<Eigen::Index> FoldPlan::usable_indices() const {
    std::vector<Eigen::Index> out;
    for (Eigen::Index t = lag_depth; t < t_total; ++t) out.push_back(t);
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(cur);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_cell(const std::string& s, std::size_t row, std::size_t col) {
    const char* b = s.c_str();
    char* end = nullptr;
    double v = std::strtod(b, &end);
    if (end == b || *end != '\0' || !std::isfinite(v)) {
        throw std::invalid_argument("non-numeric cell at row " + std::to_string(row) +
                                    ", column " + std::to_string(col) + ": '" + s + "'");
    }
    return v;
}

}  // namespace

Dataset parse_trends_csv(const std::string& text) {
    std::stringstream ss(text);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(ss, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    if (lines.size() < 2) throw std::invalid_argument("malformed CSV: need header and data rows");

    auto header = split_csv_line(lines[0]);
    if (header.size() < 2 || header[0] != "date") {
        throw std::invalid_argument("malformed CSV: header must start with 'date'");
    }

    Dataset d;
    d.names.assign(header.begin() + 1, header.end());
    d.roles.assign(d.names.size(), SeriesRole::Predictor);

    const std::size_t m = d.names.size();
    const std::size_t t = lines.size() - 1;
    d.values.resize(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(m));

    std::int64_t prev_date = 0;
    for (std::size_t r = 0; r < t; ++r) {
        auto cells = split_csv_line(lines[r + 1]);
        if (cells.size() != m + 1) {
            throw std::invalid_argument("malformed CSV: row " + std::to_string(r + 1) + " has " +
                                        std::to_string(cells.size()) + " cells, expected " +
                                        std::to_string(m + 1));
        }
        std::int64_t date = parse_iso_date(cells[0]);
        if (r == 0) {
            d.start_week = date;
        } else if (date <= prev_date) {
            throw std::invalid_argument("non-monotone dates at row " + std::to_string(r + 1));
        } else if (date != prev_date + 7) {
            throw std::invalid_argument("gap in weekly sampling at row " + std::to_string(r + 1) +
                                        " (" + cells[0] + ")");
        }
        prev_date = date;
        for (std::size_t c = 0; c < m; ++c) {
            d.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                parse_cell(cells[c + 1], r + 1, c + 1);
        }
    }
    d.validate();
    return d;
}

std::string to_trends_csv(const Dataset& d) {
    std::string out = "date";
    for (const auto& n : d.names) {
        out += ',';
        out += n;
    }
    out += '\n';
    for (Eigen::Index r = 0; r < d.rows(); ++r) {
        out += format_iso_date(d.start_week + 7 * r);
        for (Eigen::Index c = 0; c < d.cols(); ++c) {
            out += ',';
            out += format_double(d.values(r, c));
        }
        out += '\n';
    }
    return out;
}

std::string dataset_to_json(const Dataset& d) {
    nlohmann::json j;
    j["start_week"] = format_iso_date(d.start_week);
    j["names"] = d.names;
    std::vector<std::string> roles;
    for (auto r : d.roles) roles.push_back(r == SeriesRole::Target ? "target" : "predictor");
    j["roles"] = roles;
    std::vector<std::vector<double>> rows;
    rows.reserve(static_cast<std::size_t>(d.rows()));
    for (Eigen::Index r = 0; r < d.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(d.cols()));
        for (Eigen::Index c = 0; c < d.cols(); ++c) row[static_cast<std::size_t>(c)] = d.values(r, c);
        rows.push_back(std::move(row));
    }
    j["values"] = rows;
    return j.dump(2) + "\n";
}

Dataset dataset_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    Dataset d;
    d.start_week = parse_iso_date(j.at("start_week").get<std::string>());
    d.names = j.at("names").get<std::vector<std::string>>();
    for (const auto& r : j.at("roles")) {
        const auto s = r.get<std::string>();
        if (s == "target") {
            d.roles.push_back(SeriesRole::Target);
        } else if (s == "predictor") {
            d.roles.push_back(SeriesRole::Predictor);
        } else {
            throw std::invalid_argument("unknown role '" + s + "'");
        }
    }
    auto rows = j.at("values").get<std::vector<std::vector<double>>>();
    const auto t = static_cast<Eigen::Index>(rows.size());
    const auto m = static_cast<Eigen::Index>(d.names.size());
    d.values.resize(t, m);
    for (Eigen::Index r = 0; r < t; ++r) {
        if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)].size()) != m) {
            throw std::invalid_argument("ragged values matrix in dataset JSON");
        }
        for (Eigen::Index c = 0; c < m; ++c) {
            d.values(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
        }
    }
    d.validate();
    return d;
}

const NormParams::Stat& NormParams::at(const std::string& name) const {
    auto it = stats.find(name);
    if (it == stats.end()) throw std::invalid_argument("no normalization for series '" + name + "'");
    return it->second;
}

NormParams zscore_fit(const Dataset& d, const std::vector<Eigen::Index>& fit_indices) {
    if (fit_indices.empty()) throw std::invalid_argument("zscore_fit: empty fit index set");
    NormParams p;
    const double n = static_cast<double>(fit_indices.size());
    for (Eigen::Index c = 0; c < d.cols(); ++c) {
        double mean = 0.0;
        for (auto t : fit_indices) mean += d.values(t, c);
        mean /= n;
        double var = 0.0;
        for (auto t : fit_indices) {
            double dv = d.values(t, c) - mean;
            var += dv * dv;
        }
        var /= n;  // population convention, keeps fixtures bit-stable
        if (var <= 0.0) {
            throw std::invalid_argument("zero variance in series '" + d.names[c] +
                                        "' over fit indices");
        }
        p.stats[d.names[c]] = {mean, std::sqrt(var)};
    }
    return p;
}

Dataset zscore_apply(const Dataset& d, const NormParams& params) {
    Dataset out = d;
    for (Eigen::Index c = 0; c < d.cols(); ++c) {
        const auto& s = params.at(d.names[c]);
        out.values.col(c) = (d.values.col(c).array() - s.mean) / s.sd;
    }
    return out;
}

std::vector<double> zscore_invert(const std::vector<double>& series, const NormParams& params,
                                  const std::string& name) {
    const auto& s = params.at(name);
    std::vector<double> out;
    out.reserve(series.size());
    for (double v : series) out.push_back(v * s.sd + s.mean);
    return out;
}

FoldPlan make_fold_plan(Eigen::Index t_total, Eigen::Index lag_depth, int k) {
    if (k < 2) throw std::invalid_argument("fold count must be >= 2");
    const Eigen::Index usable = t_total - lag_depth;
    if (usable < k) {
        throw std::invalid_argument("too few usable samples: " + std::to_string(usable) +
                                    " < " + std::to_string(k) + " folds");
    }
    FoldPlan plan;
    plan.k = k;
    plan.lag_depth = lag_depth;
    plan.t_total = t_total;
    plan.assignments.resize(static_cast<std::size_t>(usable));
    // Contiguous blocks; the first (usable % k) blocks get one extra sample.
    const Eigen::Index base = usable / k;
    const Eigen::Index extra = usable % k;
    Eigen::Index pos = 0;
    for (int f = 0; f < k; ++f) {
        Eigen::Index len = base + (f < extra ? 1 : 0);
        for (Eigen::Index i = 0; i < len; ++i) {
            plan.assignments[static_cast<std::size_t>(pos++)] = f;
        }
    }
    return plan;
}

}  // namespace trendcast

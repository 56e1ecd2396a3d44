#include "trendcast/wavelet.hpp"

#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace trendcast {

FrequencyGrid FrequencyGrid::log_spaced(double fmin, double fmax, int n) {
    if (n < 8) throw std::invalid_argument("frequency grid needs at least 8 points");
    if (!(fmin > 0.0 && fmax > fmin)) throw std::invalid_argument("bad frequency range");
    FrequencyGrid g;
    g.frequencies.resize(static_cast<std::size_t>(n));
    const double lmin = std::log(fmin), lmax = std::log(fmax);
    for (int i = 0; i < n; ++i) {
        g.frequencies[static_cast<std::size_t>(i)] =
            std::exp(lmin + (lmax - lmin) * i / (n - 1));
    }
    return g;
}

void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft size must be a power of 2");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = a[i + k];
                std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        for (auto& x : a) x /= static_cast<double>(n);
    }
}

namespace {

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Fourier factor for the Morlet wavelet: period = factor * scale.
double fourier_factor(double omega0) {
    return 4.0 * M_PI / (omega0 + std::sqrt(2.0 + omega0 * omega0));
}

}  // namespace

Scalogram morlet_cwt(const std::vector<double>& series, double sampling_rate,
                     const FrequencyGrid& grid, double omega0) {
    const std::size_t t_len = series.size();
    if (t_len < 16) throw std::invalid_argument("series too short for CWT (need >= 16)");
    if (grid.frequencies.empty()) throw std::invalid_argument("empty frequency grid");
    if (omega0 < 5.0) throw std::invalid_argument("omega0 must be >= 5");

    const double dt = 1.0 / sampling_rate;  // years per sample
    const std::size_t n = next_pow2(t_len);

    double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(t_len);
    std::vector<std::complex<double>> xhat(n, {0.0, 0.0});
    for (std::size_t i = 0; i < t_len; ++i) xhat[i] = series[i] - mean;
    fft_radix2(xhat, false);

    const std::size_t f_len = grid.size();
    Scalogram out;
    out.grid = grid;
    out.omega0 = omega0;
    out.sampling_rate = sampling_rate;
    out.power.resize(static_cast<Eigen::Index>(f_len), static_cast<Eigen::Index>(t_len));
    out.coi_mask.resize(static_cast<Eigen::Index>(f_len), static_cast<Eigen::Index>(t_len));

    const double norm_pi = std::pow(M_PI, -0.25);
    std::vector<std::complex<double>> w(n);
    for (std::size_t fi = 0; fi < f_len; ++fi) {
        const double freq = grid.frequencies[fi];
        const double scale = 1.0 / (freq * fourier_factor(omega0));  // years

        // Daughter wavelet in the frequency domain, analytic (omega > 0 only),
        // normalized to unit energy at every scale.
        const double amp = norm_pi * std::sqrt(2.0 * M_PI * scale / dt);
        for (std::size_t k = 0; k < n; ++k) {
            double omega = 2.0 * M_PI * static_cast<double>(k) / (static_cast<double>(n) * dt);
            if (k > n / 2) omega -= 2.0 * M_PI / dt;
            if (omega > 0.0) {
                double arg = scale * omega - omega0;
                w[k] = xhat[k] * (amp * std::exp(-0.5 * arg * arg));
            } else {
                w[k] = {0.0, 0.0};
            }
        }
        fft_radix2(w, true);

        const double efold_samples = std::sqrt(2.0) * scale / dt;
        for (std::size_t t = 0; t < t_len; ++t) {
            out.power(static_cast<Eigen::Index>(fi), static_cast<Eigen::Index>(t)) =
                std::norm(w[t]);
            const double edge = static_cast<double>(std::min(t, t_len - 1 - t));
            out.coi_mask(static_cast<Eigen::Index>(fi), static_cast<Eigen::Index>(t)) =
                edge >= efold_samples;
        }
    }
    return out;
}

std::vector<double> Scalogram::time_averaged_power() const {
    std::vector<double> out(grid.size(), 0.0);
    for (Eigen::Index f = 0; f < power.rows(); ++f) {
        double sum = 0.0;
        std::size_t count = 0;
        for (Eigen::Index t = 0; t < power.cols(); ++t) {
            if (coi_mask(f, t)) {
                sum += power(f, t);
                ++count;
            }
        }
        out[static_cast<std::size_t>(f)] = count ? sum / static_cast<double>(count) : 0.0;
    }
    return out;
}

std::size_t Scalogram::peak_frequency_index() const {
    auto avg = time_averaged_power();
    return static_cast<std::size_t>(
        std::distance(avg.begin(), std::max_element(avg.begin(), avg.end())));
}

double band_power_ratio(const Scalogram& s, double band_lo, double band_hi) {
    const auto& freqs = s.grid.frequencies;
    if (band_lo < freqs.front() || band_hi > freqs.back() || band_lo > band_hi) {
        throw std::invalid_argument("band outside frequency grid");
    }
    double band = 0.0, total = 0.0;
    for (Eigen::Index f = 0; f < s.power.rows(); ++f) {
        const double freq = freqs[static_cast<std::size_t>(f)];
        const bool in_band = freq >= band_lo && freq <= band_hi;
        for (Eigen::Index t = 0; t < s.power.cols(); ++t) {
            if (!s.coi_mask(f, t)) continue;
            total += s.power(f, t);
            if (in_band) band += s.power(f, t);
        }
    }
    return total > 0.0 ? band / total : 0.0;
}

std::string to_string(PeriodLabel label) {
    switch (label) {
        case PeriodLabel::Annual: return "ANNUAL";
        case PeriodLabel::Semiannual: return "SEMIANNUAL";
        case PeriodLabel::Both: return "BOTH";
        case PeriodLabel::None: return "NONE";
    }
    return "NONE";
}

PeriodicityScore classify_periodicity(double annual_ratio, double semiannual_ratio,
                                      double threshold) {
    PeriodicityScore s;
    s.annual_ratio = annual_ratio;
    s.semiannual_ratio = semiannual_ratio;
    const bool a = annual_ratio >= threshold;
    const bool b = semiannual_ratio >= threshold;
    s.label = a ? (b ? PeriodLabel::Both : PeriodLabel::Annual)
                : (b ? PeriodLabel::Semiannual : PeriodLabel::None);
    return s;
}

std::vector<std::pair<std::string, PeriodicityScore>> rank_periodic(const Dataset& d,
                                                                    const WaveletConfig& config) {
    std::vector<std::pair<std::string, PeriodicityScore>> out;
    for (Eigen::Index c = 0; c < d.cols(); ++c) {
        if (d.roles[static_cast<std::size_t>(c)] != SeriesRole::Predictor) continue;
        std::vector<double> series(d.values.col(c).data(), d.values.col(c).data() + d.rows());
        auto scal = morlet_cwt(series, config.sampling_rate, config.grid, config.omega0);
        double ar = band_power_ratio(scal, config.annual_lo, config.annual_hi);
        double sr = band_power_ratio(scal, config.semiannual_lo, config.semiannual_hi);
        out.emplace_back(d.names[static_cast<std::size_t>(c)],
                         classify_periodicity(ar, sr, config.threshold));
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        double sa = a.second.annual_ratio + a.second.semiannual_ratio;
        double sb = b.second.annual_ratio + b.second.semiannual_ratio;
        if (sa != sb) return sa > sb;
        return a.first < b.first;
    });
    return out;
}

std::string scalogram_to_csv(const Scalogram& s) {
    std::string out = "freq_cy_per_year";
    for (Eigen::Index t = 0; t < s.power.cols(); ++t) {
        out += ",t" + std::to_string(t);
    }
    out += '\n';
    for (Eigen::Index f = 0; f < s.power.rows(); ++f) {
        out += format_double(s.grid.frequencies[static_cast<std::size_t>(f)]);
        for (Eigen::Index t = 0; t < s.power.cols(); ++t) {
            out += ',';
            if (s.coi_mask(f, t)) out += format_double(s.power(f, t));
        }
        out += '\n';
    }
    return out;
}

std::string scalogram_meta_json(const Scalogram& s, const std::string& series_name) {
    nlohmann::json j;
    j["series"] = series_name;
    j["omega0"] = s.omega0;
    j["sampling_rate"] = s.sampling_rate;
    j["frequencies_cy_per_year"] = s.grid.frequencies;
    return j.dump(2) + "\n";
}

}  // namespace trendcast

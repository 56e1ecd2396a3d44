#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "trendcast/dataset.hpp"

namespace trendcast {

// Analysis frequencies in cycles/year, strictly ascending.
struct FrequencyGrid {
    std::vector<double> frequencies;

    static FrequencyGrid log_spaced(double fmin, double fmax, int n);
    static FrequencyGrid default_grid() { return log_spaced(0.5, 4.0, 48); }

    std::size_t size() const { return frequencies.size(); }
};

// Time-frequency power map from the Morlet CWT of one series.
// coi_mask(f, t) is true where the sample is inside the cone of influence,
// i.e. at least one e-folding time sqrt(2)*s away from both edges; only
// those cells enter band ratios and rankings.
struct Scalogram {
    FrequencyGrid grid;
    Eigen::MatrixXd power;                                         // F x T
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> coi_mask;  // F x T
    double omega0 = 6.0;
    double sampling_rate = 52.0;  // samples per year

    // Mean power over COI-valid samples, per frequency row.
    std::vector<double> time_averaged_power() const;

    // Grid index of the peak of time_averaged_power.
    std::size_t peak_frequency_index() const;
};

enum class PeriodLabel { Annual, Semiannual, Both, None };

std::string to_string(PeriodLabel label);

struct PeriodicityScore {
    double annual_ratio = 0.0;
    double semiannual_ratio = 0.0;
    PeriodLabel label = PeriodLabel::None;
};

struct WaveletConfig {
    double omega0 = 6.0;
    double sampling_rate = 52.0;
    FrequencyGrid grid = FrequencyGrid::default_grid();
    double annual_lo = 0.8, annual_hi = 1.2;
    double semiannual_lo = 1.8, semiannual_hi = 2.2;
    double threshold = 0.3;
};

// Morlet CWT scalogram. The series is mean-removed and zero-padded to the
// next power of two; the wavelet is L2-normalized so power is comparable
// across scales.
Scalogram morlet_cwt(const std::vector<double>& series, double sampling_rate,
                     const FrequencyGrid& grid, double omega0 = 6.0);

// COI-masked power inside [band_lo, band_hi] over total COI-masked power.
// Returns 0 when total power is 0.
double band_power_ratio(const Scalogram& s, double band_lo, double band_hi);

PeriodicityScore classify_periodicity(double annual_ratio, double semiannual_ratio,
                                      double threshold = 0.3);

// Predictors only, sorted descending by annual_ratio + semiannual_ratio,
// ties broken lexicographically by name.
std::vector<std::pair<std::string, PeriodicityScore>> rank_periodic(const Dataset& d,
                                                                    const WaveletConfig& config);

// In-place radix-2 FFT over interleaved complex data; n must be a power of 2.
// Exposed for tests.
void fft_radix2(std::vector<std::complex<double>>& data, bool inverse);

// Scalogram export: header `freq_cy_per_year,t0,t1,...`, one row per
// frequency, COI-masked cells emitted as empty fields.
std::string scalogram_to_csv(const Scalogram& s);
std::string scalogram_meta_json(const Scalogram& s, const std::string& series_name);

}  // namespace trendcast

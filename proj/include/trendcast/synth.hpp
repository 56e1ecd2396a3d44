#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "trendcast/cascade.hpp"
#include "trendcast/dataset.hpp"

namespace trendcast {

struct SynthComponent {
    double frequency = 1.0;  // cycles/year
    double amplitude = 10.0;
    double phase = 0.0;      // radians
};

struct SynthSeriesSpec {
    std::string name;
    double offset = 50.0;
    std::vector<SynthComponent> components;
    double noise_sd = 0.0;
};

struct SynthSpec {
    Eigen::Index t_len = 261;
    double sampling_rate = 52.0;  // samples per year
    std::uint64_t seed = 0;
    bool clip_nonnegative = false;
    std::vector<SynthSeriesSpec> series;
    std::int64_t start_week = 16041;  // 2013-12-02

    static SynthSpec from_json(const std::string& text);
    std::string to_json() const;
};

// series_m(t) = offset + sum amp*sin(2*pi*f*t/rate + phase) + noise.
// Bit-identical for a fixed seed; series use independent child RNG streams.
Dataset gen_panel(const SynthSpec& spec);

// Append a target realized exactly by the cascade model class: z-score the
// named features over the full series, apply true_a (feature-major, lag
// ascending from -L to 0) and true_poly, add noise for t >= L. The first L
// samples are filled with the t = L value.
Dataset gen_cascade_target(const Dataset& d, const std::string& target_name,
                           const std::vector<std::string>& features,
                           const Eigen::MatrixXd& true_a, const PolynomialNonlinearity& true_poly,
                           double noise_sd, std::uint64_t seed);

}  // namespace trendcast

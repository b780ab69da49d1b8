#pragma once

#include <cmath>
#include <vector>

#include "vqrng/entropy_model.hpp"

namespace vqrng {

/// Best bound over the detection gain for a Gaussian detected signal of
/// variance `noise_variance_w`. `gain` is +inf when the bound only
/// approaches its supremum as the gain grows without limit.
struct OptimalGain {
    double gain = 0.0;
    double hmin = 0.0;
};

OptimalGain optimal_gain_entropy(double eta, const AdcGeometry& adc, double noise_variance_w);

/// Gain that places `sigmas` standard deviations of the detected signal at the range edge.
double gain_for_sigmas_in_range(const AdcGeometry& adc, double noise_variance_w, double sigmas);

/// Converts a noise power relative to the vacuum (dB) into a variance in vacuum units.
inline double variance_from_db(double db) { return std::pow(10.0, db / 10.0); }

struct CurvePoint {
    double x = 0.0;  // eta (fig2a) or excess noise in dB (fig2b)
    int bits = 0;
    double gain = 0.0;
    double hmin = 0.0;
};

/// Entropy at the optimal gain vs. efficiency, for each ADC depth.
std::vector<CurvePoint> fig2a_curve(const std::vector<double>& etas, const std::vector<int>& bit_depths,
                                    double excess_db);

/// Entropy vs. detected noise at fixed efficiency with the gain set so that
/// `sigmas` standard deviations fit into the ADC range.
std::vector<CurvePoint> fig2b_curve(const std::vector<double>& excess_db, const std::vector<int>& bit_depths,
                                    double eta, double sigmas);

}  // namespace vqrng

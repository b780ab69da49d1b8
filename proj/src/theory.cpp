#include "vqrng/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace vqrng {

namespace {

constexpr double kLogGainMin = -3.0;  // log10 of the smallest gain scanned
constexpr double kLogGainMax = 9.0;
constexpr int kGridSteps = 480;

double bound_at_log_gain(double eta, const AdcGeometry& adc, double w, double log10_g) {
    return min_entropy_gaussian_P(eta, std::pow(10.0, log10_g), adc, w);
}

}  // namespace

OptimalGain optimal_gain_entropy(double eta, const AdcGeometry& adc, double noise_variance_w) {
    const double step = (kLogGainMax - kLogGainMin) / kGridSteps;
    int best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kGridSteps; ++i) {
        const double v = bound_at_log_gain(eta, adc, noise_variance_w, kLogGainMin + i * step);
        if (v > best_value) {
            best_value = v;
            best = i;
        }
    }

    OptimalGain out;
    if (best == kGridSteps) {
        // Both erf terms are linear in 1/g for large g, so the bound tends to this limit.
        const double d = static_cast<double>(adc.bins_d);
        out.hmin = std::max(best_value, std::log2(d) + 0.5 * std::log2((1.0 - eta) / noise_variance_w));
        out.gain = std::numeric_limits<double>::infinity();
    } else {
        // golden-section refinement between the neighbouring grid points
        double lo = kLogGainMin + std::max(best - 1, 0) * step;
        double hi = kLogGainMin + (best + 1) * step;
        const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double a = hi - phi * (hi - lo);
        double b = lo + phi * (hi - lo);
        double fa = bound_at_log_gain(eta, adc, noise_variance_w, a);
        double fb = bound_at_log_gain(eta, adc, noise_variance_w, b);
        for (int it = 0; it < 80; ++it) {
            if (fa < fb) {
                lo = a;
                a = b;
                fa = fb;
                b = lo + phi * (hi - lo);
                fb = bound_at_log_gain(eta, adc, noise_variance_w, b);
            } else {
                hi = b;
                b = a;
                fb = fa;
                a = hi - phi * (hi - lo);
                fa = bound_at_log_gain(eta, adc, noise_variance_w, a);
            }
        }
        const double x = 0.5 * (lo + hi);
        const double v = bound_at_log_gain(eta, adc, noise_variance_w, x);
        out.gain = std::pow(10.0, v >= best_value ? x : kLogGainMin + best * step);
        out.hmin = std::max(v, best_value);
    }
    out.hmin = std::max(out.hmin, 0.0);
    return out;
}

double gain_for_sigmas_in_range(const AdcGeometry& adc, double noise_variance_w, double sigmas) {
    if (!(sigmas > 0.0) || !(noise_variance_w > 0.0)) {
        throw std::domain_error("sigma count and noise variance must be positive");
    }
    return adc.range_R / (sigmas * std::sqrt(noise_variance_w));
}

std::vector<CurvePoint> fig2a_curve(const std::vector<double>& etas, const std::vector<int>& bit_depths,
                                    double excess_db) {
    const double w = variance_from_db(excess_db);
    std::vector<CurvePoint> out;
    out.reserve(etas.size() * bit_depths.size());
    for (int bits : bit_depths) {
        const AdcGeometry adc = AdcGeometry::from_bits(bits);
        for (double eta : etas) {
            const OptimalGain opt = optimal_gain_entropy(eta, adc, w);
            out.push_back({eta, bits, opt.gain, opt.hmin});
        }
    }
    return out;
}

std::vector<CurvePoint> fig2b_curve(const std::vector<double>& excess_db, const std::vector<int>& bit_depths,
                                    double eta, double sigmas) {
    std::vector<CurvePoint> out;
    out.reserve(excess_db.size() * bit_depths.size());
    for (int bits : bit_depths) {
        const AdcGeometry adc = AdcGeometry::from_bits(bits);
        for (double db : excess_db) {
            const double w = variance_from_db(db);
            const double g = gain_for_sigmas_in_range(adc, w, sigmas);
            out.push_back({db, bits, g, std::max(0.0, min_entropy_gaussian_P(eta, g, adc, w))});
        }
    }
    return out;
}

}  // namespace vqrng

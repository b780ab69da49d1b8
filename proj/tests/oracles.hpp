#pragma once

// Reference values and brute-force re-implementations used only by tests.
// Constants were evaluated offline with 50-digit mpmath arithmetic; the
// functions below deliberately avoid the library's code paths.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

namespace oracle {

// erf(x) reference table.
inline constexpr std::pair<double, double> kErfTable[] = {
    {3.142709e-4, 3.54616724709641799e-4},
    {0.5, 0.520499877813046538},
    {2.5, 0.999593047982555041},
};

// Full-budget replay at eta = 0.81, g chi_0 = 2581 bins, 16-bit ADC.
inline constexpr double kIdealBound = 12.787246217;
inline constexpr double kPerfectAdcBound = 11.461498200;
inline constexpr double kHoeffdingLowerP = 0.9998927017;  // N = N1 = 1e9, eps = 1e-10
inline constexpr double kFinalBound = 3.6613433931;             // with the P above and b_adc = 7.80
inline constexpr double kLog2FiveE33 = 111.94555523;       // log2(1 / (2 (1e-17)^2))
inline constexpr double kHoeffdingSmallLog2 = -0.00635182284916;  // N = 1e6, N1 = 999000, eps = 1e-10

// Unit-efficiency responsivity at 850 nm and the one matching eta = 0.796.
inline constexpr double kResponsivityUnit850 = 0.685571234675;
inline constexpr double kResponsivity0796 = 0.545714702801;

// Theory-curve ordinates at eta = 0.8, 5 dB Gaussian noise.
// Unconstrained optimum (supremum as the gain grows): log2 d + 0.5 log2((1-eta)/w).
inline double optimal_supremum(int bits, double eta, double w) {
    return bits + 0.5 * std::log2((1.0 - eta) / w);
}
inline constexpr double kFig2bSixSigma12Bit = 7.7493476;
inline constexpr double kFig2bSixSigma16Bit = 11.7493395;
inline constexpr double kFig2bSixSigma8Bit = 3.7514267;

// Direct evaluation of the Gaussian-P bound in long double.
inline double gaussian_p_bound(double eta, double g, double range, double bins, double w) {
    const long double a = static_cast<long double>(range) / (g * bins * std::sqrt(2.0L * (1.0L - eta)));
    const long double b = static_cast<long double>(range) / (g * std::sqrt(2.0L * w));
    return static_cast<double>(-std::log2(std::erf(a)) + std::log2(std::erf(b)));
}

// Hoeffding lower bound by direct arithmetic.
inline double hoeffding_log2(double n, double n1, double eps) {
    const double p = n1 / n - std::sqrt(std::log(1.0 / eps) / (2.0 * n));
    return p > 0.0 ? std::log2(p) : -INFINITY;
}

// Explicit dense Toeplitz product with M[r][c] = seed[r + l - 1 - c].
inline std::vector<std::uint8_t> toeplitz_dense(const std::vector<std::uint8_t>& seed, std::size_t k,
                                                std::size_t l, const std::vector<std::uint8_t>& input) {
    std::vector<std::vector<std::uint8_t>> m(k, std::vector<std::uint8_t>(l));
    for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t c = 0; c < l; ++c) {
            m[r][c] = seed[r + l - 1 - c];
        }
    }
    std::vector<std::uint8_t> out(k, 0);
    for (std::size_t r = 0; r < k; ++r) {
        unsigned acc = 0;
        for (std::size_t c = 0; c < l; ++c) {
            acc += m[r][c] & input[c];
        }
        out[r] = static_cast<std::uint8_t>(acc % 2);
    }
    return out;
}

// Exhaustive inversion: for every output code f, count the ideal codes j
// whose reachable set contains f. `reach[j]` lists (lo, hi) inclusive pairs.
inline std::uint64_t brute_force_max_preimage(
    const std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>>& reach) {
    const std::size_t d = reach.size();
    std::uint64_t best = 0;
    for (std::size_t f = 0; f < d; ++f) {
        std::uint64_t count = 0;
        for (std::size_t j = 0; j < d; ++j) {
            for (const auto& [lo, hi] : reach[j]) {
                if (lo <= f && f <= hi) {
                    ++count;
                    break;
                }
            }
        }
        best = std::max(best, count);
    }
    return best;
}

// Spectrum of x_t = a x_{t-1} + w_t with unit innovation variance.
inline double ar1_psd(double a, double lambda) {
    return 1.0 / (1.0 + a * a - 2.0 * a * std::cos(lambda));
}

// True conditional standard deviation of the vacuum contribution: gain times
// the leading impulse coefficient of the vacuum path (times the highpass pole).
inline double true_g_chi0(double gain, double chi0, double highpass_pole = 1.0) {
    return gain * chi0 * highpass_pole;
}

}  // namespace oracle

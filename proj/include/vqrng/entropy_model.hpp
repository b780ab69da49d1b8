#pragma once

#include <cstdint>
#include <string>

namespace vqrng {

/// ADC range and binning. `range_R` is the half-width of the input range
/// (the ADC accepts y in (-R, R)); bins have width 2R/d.
struct AdcGeometry {
    double range_R = 32768.0;
    std::uint64_t bins_d = 65536;
    int bits = 16;

    /// Geometry in ADC-bin units (R/d = 1/2) for a given bit depth.
    static AdcGeometry from_bits(int bits);

    double bin_width() const { return 2.0 * range_R / static_cast<double>(bins_d); }
    void validate() const;
};

/// Certified parameters of the stochastic detector model.
///
/// `g_chi0` is the conditional standard deviation of the vacuum contribution
/// to one sample given the past, in the same units as `adc.range_R`.
struct ModelParams {
    double eta = 0.0;
    double g_chi0 = 0.0;
    AdcGeometry adc;
    double log2_P = 0.0;
    double b_adc = 0.0;

    void validate() const;
    /// Re-expresses g_chi0 and the range in ADC-bin units (R/d = 1/2).
    ModelParams in_bin_units() const;
};

struct EpsilonBudget {
    double eps_param = 1e-10;
    double eps_adc = 6e-5;
    double eps_hash = 1e-17;

    void validate() const;
};

/// Result of the ADC-corrected bound. `bits` is clamped at zero, `raw` is not.
struct AdcEntropy {
    double raw = 0.0;
    double bits = 0.0;
    /// Entropy without the P and b_ADC corrections (perfect, infinite-range ADC).
    double perfect_adc = 0.0;
    bool exhausted = false;
    /// erf argument above 6: the bin is far wider than the vacuum noise.
    bool saturated = false;
};

/// Bits per sample of the continuous-output bound. May be negative.
double min_entropy_ideal(double eta, double g_chi0);

AdcEntropy min_entropy_adc(const ModelParams& params);

/// Theory-curve variant where the in-range probability follows from a
/// Gaussian detected signal of variance `noise_variance_w` (vacuum units).
double min_entropy_gaussian_P(double eta, double g, const AdcGeometry& adc,
                              double noise_variance_w);

/// Leftover-hash output length for an l-bit block. Zero means nothing can be
/// extracted at the requested security level.
std::uint64_t extractable_length(std::uint64_t l_bits, double hmin_per_sample_bits,
                                 int bits_per_sample, double eps_hash);

struct EntropyReport {
    ModelParams params;
    EpsilonBudget eps;
    double hmin_ideal = 0.0;
    double hmin_adc = 0.0;
    double hmin_final = 0.0;
    double hmin_final_raw = 0.0;
    bool exhausted = false;
    bool saturated = false;
    int bits_per_sample = 16;
    std::uint64_t samples_per_block = 0;
    std::uint64_t l = 0;
    std::uint64_t k = 0;
};

/// Evaluates every bound for `params`, and the output length for l-bit blocks
/// when `l_bits` is non-zero.
EntropyReport make_entropy_report(const ModelParams& params, const EpsilonBudget& eps,
                                  std::uint64_t l_bits, int bits_per_sample);

}  // namespace vqrng

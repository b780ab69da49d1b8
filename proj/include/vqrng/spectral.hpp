#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vqrng/sample_block.hpp"

namespace vqrng {

/// Two-sided power spectrum on lambda_k = 2 pi k / M, k = 0..M-1, normalised
/// so that the mean of `values` equals the variance of the process.
struct SpectralDensity {
    std::vector<double> values;
    /// The DC bin is dominated by mean removal and should not be trusted.
    bool dc_flagged = true;

    std::size_t size() const { return values.size(); }
    double lambda(std::size_t k) const;
    double mean() const;
    void validate() const;
};

void write_psd_csv(std::ostream& out, const SpectralDensity& psd);
SpectralDensity read_psd_csv(std::istream& in);

enum class WindowKind { hann, rectangular };

struct WelchOptions {
    std::size_t segment_len = 4096;
    double overlap = 0.5;
    WindowKind window = WindowKind::hann;
    /// Segments are pooled into this many contiguous groups for resampling.
    std::size_t bootstrap_groups = 64;
};

struct WelchEstimate {
    SpectralDensity psd;
    /// Averaged (and identically normalised) spectra of contiguous segment groups.
    std::vector<std::vector<double>> group_psd;
    std::vector<std::size_t> group_segments;
    std::size_t segments = 0;
    double sample_variance = 0.0;
    std::vector<std::string> warnings;
};

/// Welch-averaged periodogram. The global mean is removed first and the
/// averaged spectrum is rescaled so that its mean equals the sample variance.
WelchEstimate psd_welch(std::span<const double> samples, const WelchOptions& options = {});
/// As above on ADC codes; warns when more than 1% of the block was out of range.
WelchEstimate psd_welch(const SampleBlock& block, const WelchOptions& options = {});

struct VacuumOptions {
    /// Floor for excluded or non-positive bins, relative to the median retained vacuum PSD.
    double floor_fraction = 1e-6;
    /// Fraction of non-positive retained bins above which the subtraction is degenerate.
    double max_nonpositive_fraction = 0.1;
    /// Floor a degenerate spectrum instead of throwing DegenerateSpectrum.
    bool allow_degenerate = false;
};

struct VacuumSpectrum {
    SpectralDensity psd;
    double floor = 0.0;
    std::size_t excluded_bins = 0;
    std::size_t nonpositive_bins = 0;
    bool degenerate = false;
};

/// Vacuum PSD = total - electronic. Bins with min(k, M-k) < zero_below_bin
/// (and non-positive retained bins) are set to the floor, which biases the
/// gain estimate downwards.
VacuumSpectrum vacuum_psd(const SpectralDensity& total, const SpectralDensity& electronic,
                          std::size_t zero_below_bin, const VacuumOptions& options = {});

/// g chi_0 from the geometric mean of the vacuum PSD:
///   (1/sqrt(1-eta)) exp( (1/M) sum_k (1/2) ln f(lambda_k) )
double gain_bandwidth_estimate(const SpectralDensity& psd_vacuum, double eta);

struct BootstrapOptions {
    std::size_t resamples = 1000;
    std::uint64_t seed = 1;
    /// One-sided failure probability of the certified lower endpoint.
    double eps = 1e-10 / 3.0;
};

struct GainEstimate {
    double point = 0.0;
    /// point -/+ z(eps) * bootstrap standard error
    double lower = 0.0;
    double upper = 0.0;
    double standard_error = 0.0;
    /// 2.5% and 97.5% bootstrap percentiles
    double percentile_low = 0.0;
    double percentile_high = 0.0;
    std::size_t resamples = 0;
    VacuumSpectrum vacuum;
};

/// Point estimate plus a nonparametric bootstrap over Welch segment groups of
/// both spectra. `electronic` may be null for a vacuum-only calibration block.
GainEstimate gain_bandwidth_bootstrap(const WelchEstimate& total, const WelchEstimate* electronic, double eta,
                                      std::size_t zero_below_bin, const VacuumOptions& vacuum_options = {},
                                      const BootstrapOptions& options = {});

}  // namespace vqrng

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vqrng/digitization.hpp"
#include "vqrng/entropy_model.hpp"
#include "vqrng/rng.hpp"
#include "vqrng/sample_block.hpp"

namespace vqrng {

enum class NoiseKind { gaussian, uniform, laplace, mixture, file_replay };

struct MixtureComponent {
    double weight = 1.0;
    double mean = 0.0;
    double stddev = 1.0;
};

/// Distribution of the fresh laser/electronic noise x(t), in vacuum units.
/// Every kind is shifted to zero mean and scaled to `variance`.
struct NoiseSpec {
    NoiseKind kind = NoiseKind::gaussian;
    double variance = 0.0;
    std::vector<MixtureComponent> components;  // mixture
    std::vector<double> replay;                // file_replay, loaded samples

    void validate() const;
};

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);
std::vector<double> load_replay_samples(const std::string& path);

enum class FilterForm { recursive, fir };

/// Linear response of one path. Recursive form:
///   out(t) = taps[0]*in(t) + sum_{i>=1} taps[i]*out(t-i)
/// FIR form:
///   out(t) = sum_i taps[i]*in(t-i)
/// taps[0] is chi_0. FIR taps should be minimum phase for chi_0 to be the
/// innovation gain of the filtered process.
struct PathFilter {
    FilterForm form = FilterForm::recursive;
    std::vector<double> taps{1.0};

    double chi0() const { return taps.front(); }
    void validate() const;
    /// Power gain sum_n h_n^2 of the impulse response.
    double power_gain() const;
    /// |H(e^{i lambda})|^2
    double power_response(double lambda) const;
};

struct DetectorResponse {
    PathFilter vacuum;
    PathFilter noise;
    /// One-pole highpass applied to the summed signal; the cutoff is given in
    /// bins of a `reference_segment_len`-point spectrum. Zero disables it.
    int highpass_cutoff_bins = 0;
    int reference_segment_len = 4096;

    double highpass_pole() const;
    /// Leading impulse-response coefficient of the whole vacuum path, chi_0^u.
    double vacuum_leading_gain() const;
    void validate() const;
};

struct AdcModel {
    AdcGeometry geometry = AdcGeometry::from_bits(16);
    double gain_g = 1.0;  // ADC bins per vacuum unit
    std::optional<DigitizationErrorModel> error_model;

    void validate() const;
};

/// Ideal ADC: index j with y in [-R + 2Rj/d, -R + 2R(j+1)/d), or nullopt when
/// y lies outside (-R, R).
std::optional<std::uint32_t> quantize(double y, const AdcModel& adc);
/// As above, then remapped through the digitization error model if present.
std::optional<std::uint32_t> quantize(double y, const AdcModel& adc, ChaCha20Rng& rng);

/// Two's-complement code stored for ADC index j.
inline std::int32_t signed_code(std::uint32_t j, const AdcGeometry& geom) {
    return static_cast<std::int32_t>(j) - static_cast<std::int32_t>(geom.bins_d / 2);
}

/// Which physical contributions are switched on. `excess_only` models a
/// calibration run of the electronic/laser path without the vacuum term.
enum class SimulationPaths { both, excess_only, vacuum_only };

std::string to_string(SimulationPaths paths);
SimulationPaths simulation_paths_from_string(const std::string& name);

struct GeneratorConfig {
    NoiseSpec noise;
    DetectorResponse response;
    double eta = 0.8;
    AdcModel adc;
    SimulationPaths paths = SimulationPaths::both;

    void validate() const;
    /// Canonical one-line-per-field description, used as the block's parameter snapshot.
    std::string describe() const;
};

/// Sequential detector simulation. Draws the vacuum from ChaCha20 stream 0,
/// the excess noise from stream 1 and digitization noise from stream 2.
class SignalGenerator {
public:
    SignalGenerator(const GeneratorConfig& config, std::uint64_t seed);

    /// Next pre-quantization sample, in the units of the ADC range.
    double next_analog();

    /// Appends n samples to `block`, updating its counts.
    void generate(std::uint64_t n, SampleBlock& block);

    const GeneratorConfig& config() const { return config_; }

private:
    class Filter {
    public:
        explicit Filter(const PathFilter& f);
        double step(double in);

    private:
        FilterForm form_;
        std::vector<double> taps_;
        std::vector<double> history_;  // past outputs (recursive) or inputs (fir)
        std::size_t head_ = 0;
    };

    double draw_noise();

    GeneratorConfig config_;
    ChaCha20Rng vacuum_rng_;
    ChaCha20Rng noise_rng_;
    ChaCha20Rng adc_rng_;
    NormalSampler vacuum_normal_;
    NormalSampler noise_normal_;
    Filter vacuum_filter_;
    Filter noise_filter_;
    double noise_shift_ = 0.0;
    double noise_scale_ = 0.0;
    std::size_t replay_pos_ = 0;
    double hp_pole_ = 0.0;
    double hp_prev_in_ = 0.0;
    double hp_prev_out_ = 0.0;
    double sqrt_eta_ = 0.0;
    double sqrt_one_minus_eta_ = 0.0;
};

/// Simulates n samples. Throws ConfigError when more than half of them fall
/// outside the ADC range.
SampleBlock generate_stream(const GeneratorConfig& config, std::uint64_t n, std::uint64_t seed);

}  // namespace vqrng

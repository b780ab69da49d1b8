#include "vqrng/signal_simulator.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "vqrng/errors.hpp"

namespace vqrng {

namespace {

// Schur-Cohn step-down test on 1 - sum_i a_i z^-i.
bool recursive_filter_stable(const std::vector<double>& taps) {
    std::vector<double> c(taps.size());
    c[0] = 1.0;
    for (std::size_t i = 1; i < taps.size(); ++i) {
        c[i] = -taps[i];
    }
    for (std::size_t m = c.size() - 1; m >= 1; --m) {
        const double k = c[m];
        if (!(std::abs(k) < 1.0)) {
            return false;
        }
        std::vector<double> next(m);
        for (std::size_t i = 0; i < m; ++i) {
            next[i] = (c[i] - k * c[m - i]) / (1.0 - k * k);
        }
        c = std::move(next);
    }
    return true;
}

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
};

Moments mixture_moments(const std::vector<MixtureComponent>& comps) {
    Moments m;
    double second = 0.0;
    for (const auto& c : comps) {
        m.mean += c.weight * c.mean;
        second += c.weight * (c.stddev * c.stddev + c.mean * c.mean);
    }
    m.variance = second - m.mean * m.mean;
    return m;
}

Moments sample_moments(const std::vector<double>& xs) {
    Moments m;
    m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    for (double x : xs) {
        m.variance += (x - m.mean) * (x - m.mean);
    }
    m.variance /= static_cast<double>(xs.size());
    return m;
}

void write_taps(std::ostream& os, const char* name, const PathFilter& f) {
    os << name << ".form = " << (f.form == FilterForm::recursive ? "recursive" : "fir") << '\n';
    os << name << ".taps =";
    for (double t : f.taps) {
        os << ' ' << t;
    }
    os << '\n';
}

}  // namespace

std::string to_string(NoiseKind kind) {
    switch (kind) {
        case NoiseKind::gaussian: return "gaussian";
        case NoiseKind::uniform: return "uniform";
        case NoiseKind::laplace: return "laplace";
        case NoiseKind::mixture: return "mixture";
        case NoiseKind::file_replay: return "file-replay";
    }
    return "unknown";
}

NoiseKind noise_kind_from_string(const std::string& name) {
    if (name == "gaussian") return NoiseKind::gaussian;
    if (name == "uniform") return NoiseKind::uniform;
    if (name == "laplace") return NoiseKind::laplace;
    if (name == "mixture") return NoiseKind::mixture;
    if (name == "file-replay") return NoiseKind::file_replay;
    throw ConfigError("unknown noise kind '" + name + "'");
}

std::vector<double> load_replay_samples(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open replay file " + path);
    }
    std::vector<double> xs;
    double v;
    while (in >> v) {
        xs.push_back(v);
    }
    if (!in.eof()) {
        throw ConfigError("replay file " + path + " contains non-numeric data");
    }
    return xs;
}

void NoiseSpec::validate() const {
    if (!(variance >= 0.0) || !std::isfinite(variance)) {
        throw ConfigError("noise variance must be non-negative");
    }
    if (kind == NoiseKind::mixture) {
        if (components.empty()) {
            throw ConfigError("mixture noise needs at least one component");
        }
        double total = 0.0;
        for (const auto& c : components) {
            if (!(c.weight >= 0.0) || !(c.stddev >= 0.0)) {
                throw ConfigError("mixture weights and deviations must be non-negative");
            }
            total += c.weight;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            throw ConfigError("mixture weights must sum to 1");
        }
        if (!(mixture_moments(components).variance > 0.0)) {
            throw ConfigError("mixture has zero variance");
        }
    }
    if (kind == NoiseKind::file_replay) {
        if (replay.empty()) {
            throw ConfigError("file-replay noise has no samples");
        }
        if (!(sample_moments(replay).variance > 0.0)) {
            throw ConfigError("file-replay samples have zero variance");
        }
    }
}

void PathFilter::validate() const {
    if (taps.empty()) {
        throw ConfigError("filter needs at least one tap");
    }
    for (double t : taps) {
        if (!std::isfinite(t)) {
            throw ConfigError("filter taps must be finite");
        }
    }
    if (!(chi0() > 0.0)) {
        throw ConfigError("chi_0 must be positive");
    }
    if (form == FilterForm::recursive && !recursive_filter_stable(taps)) {
        throw ConfigError("recursive filter is unstable (pole on or outside the unit circle)");
    }
}

double PathFilter::power_gain() const {
    if (form == FilterForm::fir) {
        return std::inner_product(taps.begin(), taps.end(), taps.begin(), 0.0);
    }
    // impulse response of the recursion until the tail is negligible
    std::vector<double> h;
    double energy = 0.0;
    for (std::size_t n = 0; n < 10'000'000; ++n) {
        double v = n == 0 ? taps[0] : 0.0;
        for (std::size_t i = 1; i < taps.size() && i <= n; ++i) {
            v += taps[i] * h[n - i];
        }
        h.push_back(v);
        energy += v * v;
        if (n > 16 * taps.size()) {
            double recent = 0.0;
            for (std::size_t i = 0; i < taps.size(); ++i) {
                recent += h[n - i] * h[n - i];
            }
            if (recent < 1e-18 * energy) {
                break;
            }
        }
    }
    return energy;
}

double PathFilter::power_response(double lambda) const {
    const std::complex<double> z = std::polar(1.0, -lambda);
    std::complex<double> zi = 1.0;
    if (form == FilterForm::fir) {
        std::complex<double> acc = 0.0;
        for (double t : taps) {
            acc += t * zi;
            zi *= z;
        }
        return std::norm(acc);
    }
    std::complex<double> den = 1.0;
    for (std::size_t i = 1; i < taps.size(); ++i) {
        zi *= z;
        den -= taps[i] * zi;
    }
    return taps[0] * taps[0] / std::norm(den);
}

double DetectorResponse::highpass_pole() const {
    if (highpass_cutoff_bins <= 0) {
        return 0.0;
    }
    return std::exp(-2.0 * std::numbers::pi * highpass_cutoff_bins / reference_segment_len);
}

double DetectorResponse::vacuum_leading_gain() const {
    const double pole = highpass_pole();
    return vacuum.chi0() * (pole > 0.0 ? pole : 1.0);
}

void DetectorResponse::validate() const {
    vacuum.validate();
    noise.validate();
    if (highpass_cutoff_bins < 0 || reference_segment_len <= 0 ||
        2 * highpass_cutoff_bins >= reference_segment_len) {
        throw ConfigError("highpass cutoff must lie below the Nyquist bin");
    }
}

void AdcModel::validate() const {
    geometry.validate();
    if (!(gain_g > 0.0) || !std::isfinite(gain_g)) {
        throw ConfigError("ADC gain must be positive");
    }
    if (error_model && error_model->bins() != geometry.bins_d) {
        throw ConfigError("digitization model size does not match the ADC");
    }
}

std::optional<std::uint32_t> quantize(double y, const AdcModel& adc) {
    const double R = adc.geometry.range_R;
    if (!(y > -R && y < R)) {
        return std::nullopt;
    }
    const double d = static_cast<double>(adc.geometry.bins_d);
    const double j = std::floor((y + R) * d / (2.0 * R));
    return static_cast<std::uint32_t>(std::min(j, d - 1.0));
}

std::optional<std::uint32_t> quantize(double y, const AdcModel& adc, ChaCha20Rng& rng) {
    auto j = quantize(y, adc);
    if (j && adc.error_model) {
        j = adc.error_model->sample(*j, rng);
    }
    return j;
}

std::string to_string(SimulationPaths paths) {
    switch (paths) {
        case SimulationPaths::both: return "both";
        case SimulationPaths::excess_only: return "excess";
        case SimulationPaths::vacuum_only: return "vacuum";
    }
    return "unknown";
}

SimulationPaths simulation_paths_from_string(const std::string& name) {
    if (name == "both") return SimulationPaths::both;
    if (name == "excess") return SimulationPaths::excess_only;
    if (name == "vacuum") return SimulationPaths::vacuum_only;
    throw ConfigError("unknown simulation paths '" + name + "' (expected both, excess or vacuum)");
}

void GeneratorConfig::validate() const {
    if (!(eta > 0.0 && eta < 1.0)) {
        throw ConfigError("eta must lie in (0,1)");
    }
    noise.validate();
    response.validate();
    adc.validate();
    if (adc.geometry.bits < 1 || adc.geometry.bits > 16 ||
        adc.geometry.bins_d != (std::uint64_t{1} << adc.geometry.bits)) {
        throw ConfigError("simulated ADC must have 2^bits bins with at most 16 bits");
    }
}

std::string GeneratorConfig::describe() const {
    std::ostringstream os;
    os.precision(17);
    os << "eta = " << eta << '\n';
    os << "paths = " << to_string(paths) << '\n';
    os << "noise.kind = " << to_string(noise.kind) << '\n';
    os << "noise.variance = " << noise.variance << '\n';
    for (const auto& c : noise.components) {
        os << "noise.component = " << c.weight << ' ' << c.mean << ' ' << c.stddev << '\n';
    }
    if (!noise.replay.empty()) {
        const auto digest = sha256({reinterpret_cast<const unsigned char*>(noise.replay.data()),
                                    noise.replay.size() * sizeof(double)});
        os << "noise.replay_sha256 = " << hex(digest) << '\n';
    }
    write_taps(os, "vacuum", response.vacuum);
    write_taps(os, "excess", response.noise);
    os << "highpass_cutoff_bins = " << response.highpass_cutoff_bins << '\n';
    os << "reference_segment_len = " << response.reference_segment_len << '\n';
    os << "adc.bits = " << adc.geometry.bits << '\n';
    os << "adc.range_R = " << adc.geometry.range_R << '\n';
    os << "adc.bins_d = " << adc.geometry.bins_d << '\n';
    os << "adc.gain = " << adc.gain_g << '\n';
    os << "adc.error_model = " << (adc.error_model ? "table" : "none") << '\n';
    return os.str();
}

SignalGenerator::Filter::Filter(const PathFilter& f)
    : form_(f.form), taps_(f.taps), history_(std::max<std::size_t>(f.taps.size(), 1), 0.0) {}

double SignalGenerator::Filter::step(double in) {
    const std::size_t n = history_.size();
    double out;
    if (form_ == FilterForm::recursive) {
        out = taps_[0] * in;
        for (std::size_t i = 1; i < taps_.size(); ++i) {
            out += taps_[i] * history_[(head_ + n - i) % n];
        }
        history_[head_] = out;
    } else {
        history_[head_] = in;
        out = 0.0;
        for (std::size_t i = 0; i < taps_.size(); ++i) {
            out += taps_[i] * history_[(head_ + n - i) % n];
        }
    }
    head_ = (head_ + 1) % n;
    return out;
}

SignalGenerator::SignalGenerator(const GeneratorConfig& config, std::uint64_t seed)
    : config_(config),
      vacuum_rng_(seed, 0),
      noise_rng_(seed, 1),
      adc_rng_(seed, 2),
      vacuum_filter_(config.response.vacuum),
      noise_filter_(config.response.noise) {
    config_.validate();
    const NoiseSpec& ns = config_.noise;
    Moments base{0.0, 1.0};
    if (ns.kind == NoiseKind::mixture) {
        base = mixture_moments(ns.components);
    } else if (ns.kind == NoiseKind::file_replay) {
        base = sample_moments(ns.replay);
    }
    noise_shift_ = base.mean;
    noise_scale_ = std::sqrt(ns.variance / base.variance);
    hp_pole_ = config_.response.highpass_pole();
    sqrt_eta_ = std::sqrt(config_.eta);
    sqrt_one_minus_eta_ = std::sqrt(1.0 - config_.eta);
}

double SignalGenerator::draw_noise() {
    const NoiseSpec& ns = config_.noise;
    double z = 0.0;
    switch (ns.kind) {
        case NoiseKind::gaussian:
            z = noise_normal_(noise_rng_);
            break;
        case NoiseKind::uniform:
            z = std::sqrt(3.0) * (2.0 * noise_rng_.uniform01() - 1.0);
            break;
        case NoiseKind::laplace: {
            // unit variance: scale 1/sqrt(2)
            const double u = noise_rng_.uniform01() - 0.5;
            z = -std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u)) / std::numbers::sqrt2;
            break;
        }
        case NoiseKind::mixture: {
            double pick = noise_rng_.uniform01();
            const MixtureComponent* chosen = &ns.components.back();
            for (const auto& c : ns.components) {
                if (pick < c.weight) {
                    chosen = &c;
                    break;
                }
                pick -= c.weight;
            }
            z = chosen->mean + chosen->stddev * noise_normal_(noise_rng_);
            break;
        }
        case NoiseKind::file_replay:
            z = ns.replay[replay_pos_];
            replay_pos_ = (replay_pos_ + 1) % ns.replay.size();
            break;
    }
    return (z - noise_shift_) * noise_scale_;
}

double SignalGenerator::next_analog() {
    double signal = 0.0;
    if (config_.paths != SimulationPaths::excess_only) {
        signal += sqrt_one_minus_eta_ * vacuum_filter_.step(vacuum_normal_(vacuum_rng_));
    }
    if (config_.paths != SimulationPaths::vacuum_only && config_.noise.variance > 0.0) {
        signal += sqrt_eta_ * noise_filter_.step(draw_noise());
    }
    if (hp_pole_ > 0.0) {
        const double out = hp_pole_ * (hp_prev_out_ + signal - hp_prev_in_);
        hp_prev_in_ = signal;
        hp_prev_out_ = out;
        signal = out;
    }
    return config_.adc.gain_g * signal * config_.adc.geometry.bin_width();
}

void SignalGenerator::generate(std::uint64_t n, SampleBlock& block) {
    block.codes.reserve(block.codes.size() + n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const auto j = quantize(next_analog(), config_.adc, adc_rng_);
        ++block.n_total;
        if (j) {
            block.codes.push_back(static_cast<std::int16_t>(signed_code(*j, config_.adc.geometry)));
        } else {
            ++block.n_out_of_range;
        }
    }
}

SampleBlock generate_stream(const GeneratorConfig& config, std::uint64_t n, std::uint64_t seed) {
    if (n == 0) {
        throw ConfigError("sample count must be positive");
    }
    SignalGenerator gen(config, seed);
    SampleBlock block;
    block.rng_seed = seed;
    block.bits_per_sample = config.adc.geometry.bits;
    block.params_snapshot = config.describe() + "seed = " + std::to_string(seed) + '\n';
    gen.generate(n, block);
    if (block.out_of_range_fraction() > 0.5) {
        throw ConfigError("more than half of the samples fall outside the ADC range; lower the gain");
    }
    return block;
}

}  // namespace vqrng

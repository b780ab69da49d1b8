#include "vqrng/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <istream>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "vqrng/errors.hpp"
#include "vqrng/rng.hpp"

namespace vqrng {

namespace {

bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

class RealFft {
public:
    explicit RealFft(std::size_t n)
        : n_(n),
          in_(fftw_alloc_real(n), fftw_free),
          out_(fftw_alloc_complex(n / 2 + 1), fftw_free) {
        plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_.get(), out_.get(), FFTW_ESTIMATE);
        if (plan_ == nullptr) {
            throw std::runtime_error("FFTW planning failed");
        }
    }
    ~RealFft() { fftw_destroy_plan(plan_); }
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    double* input() { return in_.get(); }

    /// Adds |X_k|^2 * scale for k = 0..n-1 (mirrored from the half spectrum).
    void accumulate_power(std::vector<double>& acc, double scale) {
        fftw_execute(plan_);
        const fftw_complex* X = out_.get();
        for (std::size_t k = 0; k <= n_ / 2; ++k) {
            const double p = (X[k][0] * X[k][0] + X[k][1] * X[k][1]) * scale;
            acc[k] += p;
            if (k != 0 && k != n_ / 2) {
                acc[n_ - k] += p;
            }
        }
    }

private:
    std::size_t n_;
    std::unique_ptr<double, decltype(&fftw_free)> in_;
    std::unique_ptr<fftw_complex, decltype(&fftw_free)> out_;
    fftw_plan plan_ = nullptr;
};

std::vector<double> make_window(WindowKind kind, std::size_t n) {
    std::vector<double> w(n, 1.0);
    if (kind == WindowKind::hann) {
        // periodic Hann, exact for 50% overlap-add
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
        }
    }
    return w;
}

double median_of(std::vector<double> xs) {
    if (xs.empty()) {
        return 0.0;
    }
    const auto mid = xs.begin() + static_cast<std::ptrdiff_t>(xs.size() / 2);
    std::nth_element(xs.begin(), mid, xs.end());
    return *mid;
}

bool retained(std::size_t k, std::size_t m, std::size_t zero_below_bin) {
    return std::min(k, m - k) >= zero_below_bin;
}

void check_matching(const SpectralDensity& a, const SpectralDensity& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("spectra have different lengths");
    }
}

double geometric_gain(const std::vector<double>& values, double eta) {
    double log_sum = 0.0;
    for (double v : values) {
        log_sum += std::log(v);
    }
    return std::exp(0.5 * log_sum / static_cast<double>(values.size())) / std::sqrt(1.0 - eta);
}

}  // namespace

double SpectralDensity::lambda(std::size_t k) const {
    return 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(values.size());
}

double SpectralDensity::mean() const {
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

void SpectralDensity::validate() const {
    if (!is_power_of_two(values.size())) {
        throw std::invalid_argument("spectrum length must be a power of two");
    }
    for (double v : values) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("spectrum values must be finite and non-negative");
        }
    }
}

void write_psd_csv(std::ostream& out, const SpectralDensity& psd) {
    out << "lambda,value\n";
    out.precision(17);
    for (std::size_t k = 0; k < psd.size(); ++k) {
        out << psd.lambda(k) << ',' << psd.values[k] << '\n';
    }
}

SpectralDensity read_psd_csv(std::istream& in) {
    SpectralDensity psd;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double lambda, value;
        if (!(row >> lambda >> value)) {
            if (first) {
                first = false;
                continue;
            }
            throw FormatError("PSD CSV: malformed row");
        }
        first = false;
        psd.values.push_back(value);
    }
    psd.validate();
    return psd;
}

WelchEstimate psd_welch(std::span<const double> samples, const WelchOptions& options) {
    const std::size_t m = options.segment_len;
    if (!is_power_of_two(m)) {
        throw std::invalid_argument("Welch segment length must be a power of two");
    }
    if (samples.size() < 8 * m) {
        throw std::invalid_argument("block too short: need at least 8 segment lengths of samples");
    }
    if (!(options.overlap >= 0.0 && options.overlap < 1.0)) {
        throw std::invalid_argument("overlap must lie in [0,1)");
    }
    const std::size_t hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(m * (1.0 - options.overlap))));
    const std::size_t segments = 1 + (samples.size() - m) / hop;

    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
    double variance = 0.0;
    for (double x : samples) {
        variance += (x - mean) * (x - mean);
    }
    variance /= static_cast<double>(samples.size());

    const std::vector<double> window = make_window(options.window, m);
    const double window_energy = std::inner_product(window.begin(), window.end(), window.begin(), 0.0);

    const std::size_t groups = std::max<std::size_t>(1, std::min(options.bootstrap_groups, segments));
    WelchEstimate est;
    est.segments = segments;
    est.sample_variance = variance;
    est.group_psd.assign(groups, std::vector<double>(m, 0.0));
    est.group_segments.assign(groups, 0);

    RealFft fft(m);
    double* buf = fft.input();
    for (std::size_t s = 0; s < segments; ++s) {
        const std::size_t g = s * groups / segments;
        const double* seg = samples.data() + s * hop;
        for (std::size_t i = 0; i < m; ++i) {
            buf[i] = (seg[i] - mean) * window[i];
        }
        fft.accumulate_power(est.group_psd[g], 1.0 / window_energy);
        ++est.group_segments[g];
    }

    std::vector<double> total(m, 0.0);
    for (std::size_t g = 0; g < groups; ++g) {
        for (std::size_t k = 0; k < m; ++k) {
            total[k] += est.group_psd[g][k];
        }
    }
    const double raw_mean = std::accumulate(total.begin(), total.end(), 0.0) / (static_cast<double>(m) * segments);
    // Parseval: rescale so the spectrum mean is the sample variance
    const double scale = raw_mean > 0.0 ? variance / raw_mean : 1.0;
    for (std::size_t g = 0; g < groups; ++g) {
        const double norm = scale / static_cast<double>(est.group_segments[g]);
        for (double& v : est.group_psd[g]) {
            v *= norm;
        }
    }
    est.psd.values.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        est.psd.values[k] = total[k] * scale / static_cast<double>(segments);
    }
    return est;
}

WelchEstimate psd_welch(const SampleBlock& block, const WelchOptions& options) {
    std::vector<double> xs(block.codes.begin(), block.codes.end());
    WelchEstimate est = psd_welch(std::span<const double>(xs), options);
    if (block.out_of_range_fraction() > 0.01) {
        est.warnings.push_back("more than 1% of the block fell outside the ADC range");
    }
    return est;
}

VacuumSpectrum vacuum_psd(const SpectralDensity& total, const SpectralDensity& electronic,
                          std::size_t zero_below_bin, const VacuumOptions& options) {
    check_matching(total, electronic);
    const std::size_t m = total.size();
    if (!is_power_of_two(m)) {
        throw std::invalid_argument("spectrum length must be a power of two");
    }
    if (2 * zero_below_bin >= m) {
        throw std::invalid_argument("zero_below_bin removes the whole spectrum");
    }

    VacuumSpectrum out;
    out.psd.values.resize(m);
    std::vector<double> positive;
    std::vector<double> retained_total;
    std::size_t retained_count = 0;
    for (std::size_t k = 0; k < m; ++k) {
        const double diff = total.values[k] - electronic.values[k];
        out.psd.values[k] = diff;
        if (!retained(k, m, zero_below_bin)) {
            ++out.excluded_bins;
            continue;
        }
        ++retained_count;
        retained_total.push_back(total.values[k]);
        if (diff > 0.0) {
            positive.push_back(diff);
        } else {
            ++out.nonpositive_bins;
        }
    }

    out.degenerate = static_cast<double>(out.nonpositive_bins) >
                     options.max_nonpositive_fraction * static_cast<double>(retained_count);
    if (out.degenerate && !options.allow_degenerate) {
        throw DegenerateSpectrum(std::to_string(out.nonpositive_bins) + " of " + std::to_string(retained_count) +
                                 " retained bins are non-positive after subtracting the electronic noise");
    }

    const double reference = positive.empty() ? median_of(retained_total) : median_of(positive);
    out.floor = options.floor_fraction * reference;
    if (!(out.floor > 0.0)) {
        out.floor = std::numeric_limits<double>::min();
    }
    for (std::size_t k = 0; k < m; ++k) {
        if (!retained(k, m, zero_below_bin) || !(out.psd.values[k] > 0.0)) {
            out.psd.values[k] = out.floor;
        }
    }
    return out;
}

double gain_bandwidth_estimate(const SpectralDensity& psd_vacuum, double eta) {
    if (!(eta > 0.0 && eta < 1.0)) {
        throw std::domain_error("eta must lie in (0,1)");
    }
    if (psd_vacuum.values.empty()) {
        throw std::invalid_argument("empty spectrum");
    }
    for (double v : psd_vacuum.values) {
        if (!(v > 0.0)) {
            throw std::domain_error("vacuum PSD has a non-positive bin; apply the floor policy first");
        }
    }
    return geometric_gain(psd_vacuum.values, eta);
}

GainEstimate gain_bandwidth_bootstrap(const WelchEstimate& total, const WelchEstimate* electronic, double eta,
                                      std::size_t zero_below_bin, const VacuumOptions& vacuum_options,
                                      const BootstrapOptions& options) {
    const std::size_t m = total.psd.size();
    const SpectralDensity zeros{std::vector<double>(m, 0.0), true};
    const SpectralDensity& elec_psd = electronic != nullptr ? electronic->psd : zeros;

    GainEstimate out;
    out.vacuum = vacuum_psd(total.psd, elec_psd, zero_below_bin, vacuum_options);
    out.point = gain_bandwidth_estimate(out.vacuum.psd, eta);
    out.resamples = options.resamples;
    if (options.resamples < 2) {
        out.lower = out.upper = out.point;
        return out;
    }

    ChaCha20Rng rng(options.seed, 7);
    auto resample = [&rng, m](const WelchEstimate& est, std::vector<double>& into) {
        std::fill(into.begin(), into.end(), 0.0);
        const std::size_t groups = est.group_psd.size();
        std::size_t weight = 0;
        for (std::size_t i = 0; i < groups; ++i) {
            const std::size_t g = std::min(groups - 1, static_cast<std::size_t>(rng.uniform01() * groups));
            const double w = static_cast<double>(est.group_segments[g]);
            const auto& spec = est.group_psd[g];
            for (std::size_t k = 0; k < m; ++k) {
                into[k] += w * spec[k];
            }
            weight += est.group_segments[g];
        }
        for (double& v : into) {
            v /= static_cast<double>(weight);
        }
    };

    VacuumOptions lenient = vacuum_options;
    lenient.allow_degenerate = true;
    SpectralDensity t_star{std::vector<double>(m), true};
    SpectralDensity e_star{std::vector<double>(m, 0.0), true};
    std::vector<double> replicates;
    replicates.reserve(options.resamples);
    for (std::size_t b = 0; b < options.resamples; ++b) {
        resample(total, t_star.values);
        if (electronic != nullptr) {
            resample(*electronic, e_star.values);
        }
        const VacuumSpectrum v = vacuum_psd(t_star, e_star, zero_below_bin, lenient);
        replicates.push_back(geometric_gain(v.psd.values, eta));
    }

    const double mean = std::accumulate(replicates.begin(), replicates.end(), 0.0) / replicates.size();
    double ss = 0.0;
    for (double r : replicates) {
        ss += (r - mean) * (r - mean);
    }
    out.standard_error = std::sqrt(ss / static_cast<double>(replicates.size() - 1));
    const double z = boost::math::quantile(boost::math::complement(boost::math::normal(), options.eps));
    out.lower = out.point - z * out.standard_error;
    out.upper = out.point + z * out.standard_error;

    std::sort(replicates.begin(), replicates.end());
    auto pct = [&replicates](double q) {
        const std::size_t i = std::min(replicates.size() - 1, static_cast<std::size_t>(q * replicates.size()));
        return replicates[i];
    };
    out.percentile_low = pct(0.025);
    out.percentile_high = pct(0.975);
    return out;
}

}  // namespace vqrng

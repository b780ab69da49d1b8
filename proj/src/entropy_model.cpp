#include "vqrng/entropy_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace vqrng {

namespace {

void check_eta(double eta) {
    if (!(eta > 0.0 && eta < 1.0)) {
        throw std::domain_error("quantum efficiency must lie in (0,1), got " + std::to_string(eta));
    }
}

void check_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::domain_error(std::string(name) + " must be positive and finite");
    }
}

// erf argument of the ADC-corrected bound
double bin_argument(double eta, double g, const AdcGeometry& adc) {
    return adc.range_R / (g * static_cast<double>(adc.bins_d) * std::sqrt(2.0 * (1.0 - eta)));
}

}  // namespace

AdcGeometry AdcGeometry::from_bits(int bits) {
    if (bits < 1 || bits > 62) {
        throw std::domain_error("ADC bit depth out of range: " + std::to_string(bits));
    }
    AdcGeometry g;
    g.bits = bits;
    g.bins_d = std::uint64_t{1} << bits;
    g.range_R = static_cast<double>(g.bins_d) / 2.0;
    return g;
}

void AdcGeometry::validate() const {
    if (bins_d < 2) {
        throw std::domain_error("ADC needs at least two bins");
    }
    check_positive(range_R, "ADC range");
}

void ModelParams::validate() const {
    check_eta(eta);
    check_positive(g_chi0, "g_chi0");
    adc.validate();
    if (!(log2_P <= 0.0)) {
        throw std::domain_error("log2_P must be non-positive");
    }
    if (!(b_adc >= 0.0) || !std::isfinite(b_adc)) {
        throw std::domain_error("b_adc must be non-negative");
    }
}

ModelParams ModelParams::in_bin_units() const {
    ModelParams out = *this;
    const double width = adc.bin_width();
    out.g_chi0 = g_chi0 / width;
    out.adc.range_R = static_cast<double>(adc.bins_d) / 2.0;
    return out;
}

void EpsilonBudget::validate() const {
    for (double e : {eps_param, eps_adc, eps_hash}) {
        if (!(e > 0.0 && e < 1.0)) {
            throw std::domain_error("epsilon parameters must lie in (0,1)");
        }
    }
}

double min_entropy_ideal(double eta, double g_chi0) {
    check_eta(eta);
    check_positive(g_chi0, "g_chi0");
    return std::log2(2.0 * std::numbers::pi * g_chi0 * std::sqrt(1.0 - eta));
}

AdcEntropy min_entropy_adc(const ModelParams& params) {
    params.validate();
    const double arg = bin_argument(params.eta, params.g_chi0, params.adc);
    AdcEntropy out;
    out.perfect_adc = -std::log2(std::erf(arg));
    out.raw = out.perfect_adc + params.log2_P - params.b_adc;
    out.exhausted = !(out.raw > 0.0);
    out.bits = out.exhausted ? 0.0 : out.raw;
    out.saturated = arg > 6.0;
    return out;
}

double min_entropy_gaussian_P(double eta, double g, const AdcGeometry& adc,
                              double noise_variance_w) {
    check_eta(eta);
    check_positive(g, "gain");
    check_positive(noise_variance_w, "noise variance");
    adc.validate();
    const double in_range = std::erf(adc.range_R / (g * std::sqrt(2.0 * noise_variance_w)));
    return -std::log2(std::erf(bin_argument(eta, g, adc))) + std::log2(in_range);
}

std::uint64_t extractable_length(std::uint64_t l_bits, double hmin_per_sample_bits,
                                 int bits_per_sample, double eps_hash) {
    if (bits_per_sample <= 0 || l_bits % static_cast<std::uint64_t>(bits_per_sample) != 0) {
        throw std::invalid_argument("block length must be a multiple of the sample width");
    }
    if (!(eps_hash > 0.0 && eps_hash < 1.0)) {
        throw std::domain_error("eps_hash must lie in (0,1)");
    }
    if (!(hmin_per_sample_bits > 0.0)) {
        return 0;
    }
    const double samples = static_cast<double>(l_bits / static_cast<std::uint64_t>(bits_per_sample));
    // log2(1 / (2 eps^2))
    const double penalty = -1.0 - 2.0 * std::log2(eps_hash);
    const double k = std::floor(samples * hmin_per_sample_bits - penalty);
    return k > 0.0 ? static_cast<std::uint64_t>(k) : 0;
}

EntropyReport make_entropy_report(const ModelParams& params, const EpsilonBudget& eps,
                                  std::uint64_t l_bits, int bits_per_sample) {
    eps.validate();
    const ModelParams bins = params.in_bin_units();
    const AdcEntropy adc = min_entropy_adc(bins);

    EntropyReport r;
    r.params = params;
    r.eps = eps;
    r.hmin_ideal = min_entropy_ideal(bins.eta, bins.g_chi0);
    r.hmin_adc = adc.perfect_adc;
    r.hmin_final = adc.bits;
    r.hmin_final_raw = adc.raw;
    r.exhausted = adc.exhausted;
    r.saturated = adc.saturated;
    r.bits_per_sample = bits_per_sample;
    r.l = l_bits;
    if (l_bits > 0) {
        r.samples_per_block = l_bits / static_cast<std::uint64_t>(bits_per_sample);
        r.k = extractable_length(l_bits, r.hmin_final, bits_per_sample, eps.eps_hash);
    }
    return r;
}

}  // namespace vqrng

#include "vqrng/calibration.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "vqrng/errors.hpp"

namespace vqrng {

namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    const auto last = s.find_last_not_of(" \t\r");
    return first == std::string::npos ? std::string() : s.substr(first, last - first + 1);
}

double through_origin_slope(const std::vector<CalibrationRecord>& records, double offset) {
    double pv = 0.0, pp = 0.0;
    for (const auto& r : records) {
        pv += r.optical_power * (r.value - offset);
        pp += r.optical_power * r.optical_power;
    }
    return pv / pp;
}

}  // namespace

void CalibrationTable::validate() const {
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!(records[i].optical_power > 0.0)) {
            throw FormatError("calibration powers must be strictly positive");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (records[j].optical_power == records[i].optical_power) {
                throw FormatError("calibration powers must be distinct");
            }
        }
    }
}

CalibrationTable read_calibration_csv(std::istream& in) {
    CalibrationTable table;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') {
            continue;
        }
        if (!have_header) {
            std::string header = line;
            header.erase(std::remove(header.begin(), header.end(), ' '), header.end());
            if (header == "power_W,current_A") {
                table.kind = CalibrationKind::responsivity;
            } else if (header == "power_W,variance") {
                table.kind = CalibrationKind::noise_variance;
            } else {
                throw FormatError("calibration CSV header must be power_W,current_A or power_W,variance");
            }
            have_header = true;
            continue;
        }
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        CalibrationRecord r;
        if (!(row >> r.optical_power >> r.value)) {
            throw FormatError("calibration CSV: malformed row '" + line + "'");
        }
        table.records.push_back(r);
    }
    if (!have_header) {
        throw FormatError("calibration CSV is empty");
    }
    table.validate();
    return table;
}

CalibrationTable load_calibration_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw FormatError("cannot open calibration file " + path);
    }
    return read_calibration_csv(in);
}

LinearityResult shot_noise_linearity(const std::vector<CalibrationRecord>& records, double electronic_variance,
                                     double threshold) {
    if (records.size() < 3) {
        throw std::invalid_argument("shot-noise linearity needs at least three optical powers");
    }
    CalibrationTable{CalibrationKind::noise_variance, records}.validate();
    LinearityResult out;
    out.slope = through_origin_slope(records, electronic_variance);
    if (!(out.slope > 0.0)) {
        out.max_relative_residual = std::numeric_limits<double>::infinity();
        return out;
    }
    for (const auto& r : records) {
        const double fit = out.slope * r.optical_power;
        out.max_relative_residual =
            std::max(out.max_relative_residual, std::abs(r.value - electronic_variance - fit) / fit);
    }
    out.is_shot_limited = out.max_relative_residual < threshold;
    return out;
}

double power_ratio_db(double variance_low, double variance_high) {
    return 10.0 * std::log10(variance_high / variance_low);
}

ResponsivityFit fit_responsivity(const std::vector<CalibrationRecord>& records) {
    if (records.size() < 2) {
        throw std::invalid_argument("responsivity fit needs at least two points");
    }
    CalibrationTable{CalibrationKind::responsivity, records}.validate();
    ResponsivityFit fit;
    fit.responsivity = through_origin_slope(records, 0.0);
    double rss = 0.0, pp = 0.0;
    for (const auto& r : records) {
        const double res = r.value - fit.responsivity * r.optical_power;
        rss += res * res;
        pp += r.optical_power * r.optical_power;
    }
    fit.standard_error = std::sqrt(rss / static_cast<double>(records.size() - 1) / pp);
    return fit;
}

double quantum_efficiency(double responsivity, double wavelength) {
    if (!(responsivity > 0.0) || !(wavelength > 0.0)) {
        throw std::domain_error("responsivity and wavelength must be positive");
    }
    const double eta = responsivity * constants::planck * constants::speed_of_light /
                       (constants::electron_charge * wavelength);
    if (!(eta > 0.0 && eta <= 1.0 + 1e-12)) {
        throw std::domain_error("responsivity implies a quantum efficiency above 1");
    }
    return std::min(eta, 1.0);
}

double responsivity_for_efficiency(double eta, double wavelength) {
    return eta * constants::electron_charge * wavelength / (constants::planck * constants::speed_of_light);
}

EfficiencyBound certify_efficiency_bound(double eta_hat, double sigma, double systematic_relative, double eps) {
    if (!(eps > 0.0 && eps < 1.0) || !(sigma >= 0.0) || !(systematic_relative >= 0.0)) {
        throw std::domain_error("invalid efficiency-bound inputs");
    }
    const double z = boost::math::quantile(boost::math::complement(boost::math::normal(), eps));
    EfficiencyBound b;
    b.estimate = eta_hat;
    b.upper = eta_hat + z * sigma + systematic_relative * eta_hat;
    if (!(b.upper < 1.0)) {
        throw std::domain_error("certified efficiency bound reaches 1: no entropy can be certified");
    }
    return b;
}

InRangeBound in_range_bound(std::uint64_t n_total, std::uint64_t n_in_range, double eps_P) {
    if (n_total == 0) {
        throw std::invalid_argument("in-range bound needs at least one sample");
    }
    if (n_in_range > n_total) {
        throw std::invalid_argument("more in-range samples than samples");
    }
    if (!(eps_P > 0.0 && eps_P <= 1.0)) {
        throw std::domain_error("eps_P must lie in (0,1]");
    }
    InRangeBound b;
    const double n = static_cast<double>(n_total);
    b.p_hat = static_cast<double>(n_in_range) / n;
    b.penalty = std::sqrt(std::log(1.0 / eps_P) / (2.0 * n));
    b.p_lower = std::max(0.0, b.p_hat - b.penalty);
    b.exhausted = !(b.p_lower > 0.0);
    b.log2_P = b.exhausted ? -std::numeric_limits<double>::infinity() : std::log2(b.p_lower);
    return b;
}

}  // namespace vqrng

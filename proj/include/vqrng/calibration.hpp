#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace vqrng {

namespace constants {
inline constexpr double electron_charge = 1.602176634e-19;  // C
inline constexpr double planck = 6.62607015e-34;             // J s
inline constexpr double speed_of_light = 299792458.0;        // m/s
}  // namespace constants

/// One calibration point: optical power (W) and either photocurrent (A) or
/// detected noise variance, depending on the table kind.
struct CalibrationRecord {
    double optical_power = 0.0;
    double value = 0.0;
};

enum class CalibrationKind { responsivity, noise_variance };

struct CalibrationTable {
    CalibrationKind kind = CalibrationKind::responsivity;
    std::vector<CalibrationRecord> records;

    /// Powers strictly positive and pairwise distinct.
    void validate() const;
};

/// CSV with header "power_W,current_A" or "power_W,variance".
CalibrationTable read_calibration_csv(std::istream& in);
CalibrationTable load_calibration_csv(const std::string& path);

struct LinearityResult {
    double slope = 0.0;
    double max_relative_residual = 0.0;
    bool is_shot_limited = false;
};

/// Least-squares fit of (variance - electronic_variance) against power through
/// the origin. Shot-noise limited when every point is within `threshold` of the fit.
LinearityResult shot_noise_linearity(const std::vector<CalibrationRecord>& records, double electronic_variance = 0.0,
                                     double threshold = 0.05);

/// Change of noise power in dB, e.g. +3.01 dB for a doubling.
double power_ratio_db(double variance_low, double variance_high);

struct ResponsivityFit {
    double responsivity = 0.0;    // A/W
    double standard_error = 0.0;  // A/W
};

/// Photocurrent vs. power, least squares through the origin.
ResponsivityFit fit_responsivity(const std::vector<CalibrationRecord>& records);

/// eta = K h c / (e lambda). Throws when the result is outside (0, 1].
double quantum_efficiency(double responsivity, double wavelength);
double responsivity_for_efficiency(double eta, double wavelength);

struct EfficiencyBound {
    double estimate = 0.0;
    double upper = 0.0;
};

/// Upper bound eta_hat + z(eps) sigma + systematic * eta_hat, where z is the
/// one-sided Gaussian quantile. Throws when the bound reaches 1.
EfficiencyBound certify_efficiency_bound(double eta_hat, double sigma, double systematic_relative, double eps);

struct InRangeBound {
    double p_hat = 0.0;
    double penalty = 0.0;
    double p_lower = 0.0;
    /// -infinity when the lower bound is zero
    double log2_P = 0.0;
    bool exhausted = false;
};

/// Hoeffding lower bound on the in-range probability from N1 of N samples.
InRangeBound in_range_bound(std::uint64_t n_total, std::uint64_t n_in_range, double eps_P);

}  // namespace vqrng

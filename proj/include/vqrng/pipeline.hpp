#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vqrng/calibration.hpp"
#include "vqrng/config.hpp"
#include "vqrng/entropy_model.hpp"
#include "vqrng/spectral.hpp"

namespace vqrng {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;
inline constexpr int config_error = 2;
inline constexpr int not_shot_limited = 3;
inline constexpr int degenerate_spectrum = 4;
inline constexpr int budget_refused = 5;
}  // namespace exit_code

/// Maps the library's exception types onto the exit-code contract.
int exit_code_for(const std::exception& e);

nlohmann::json config_to_json(const PipelineConfig& config);

// simulate

struct SimulateSummary {
    std::uint64_t n_total = 0;
    std::uint64_t n_out_of_range = 0;
    std::uint64_t file_bytes = 0;
    std::string file_sha256;
};

SimulateSummary cmd_simulate(const PipelineConfig& config, std::uint64_t n, std::uint64_t seed,
                             const std::string& out_path);

// characterize

struct CharacterizeInputs {
    std::string total_block;
    /// Electronic-noise block (vacuum path absent); empty for a vacuum-only run.
    std::string electronic_block;
    /// Responsivity and/or shot-noise tables.
    std::vector<std::string> calibration_csv;
    /// Directory for psd_total.csv, psd_electronic.csv, psd_vacuum.csv; empty to skip.
    std::string psd_dir;
};

struct CharacterizeResult {
    EntropyReport entropy;
    GainEstimate gain;
    InRangeBound in_range;
    std::optional<LinearityResult> linearity;
    std::optional<EfficiencyBound> efficiency;
    /// Full document: entropy fields at top level, plus "characterization",
    /// "config" and "warnings".
    nlohmann::json report;
    /// exit_code::ok or exit_code::not_shot_limited
    int status = exit_code::ok;
};

/// Throws DegenerateSpectrum when the vacuum PSD cannot be isolated.
CharacterizeResult cmd_characterize(const PipelineConfig& config, const CharacterizeInputs& inputs);

// entropy

/// Budget from the [model] section alone (no sample data).
nlohmann::json cmd_entropy(const PipelineConfig& config, EntropyReport* out = nullptr);

// theory curves

struct TheoryGrid {
    double eta_min = 0.01;
    double eta_max = 0.99;
    std::size_t eta_steps = 99;
    double excess_db = 5.0;  // fig2a
    double db_min = 0.0;     // fig2b
    double db_max = 30.0;
    std::size_t db_steps = 61;
    double eta = 0.8;  // fig2b
    double sigmas = 6.0;
    std::vector<int> bit_depths{8, 12, 16};

    void validate() const;
};

/// Writes "x,bits,gain,hmin" rows; returns the number of rows.
std::size_t cmd_theory_curves(const std::string& mode, const TheoryGrid& grid, std::ostream& out);

// extract

struct ExtractSummary {
    std::uint64_t blocks = 0;
    std::uint64_t output_bits = 0;
    std::uint64_t input_codes = 0;
    std::uint64_t discarded_codes = 0;
    std::uint64_t budget_k = 0;
    double rate_ratio = 0.0;
    double input_rate_gbps = 0.0;
    double output_rate_gbps = 0.0;
    std::string seed_digest;
    std::string seed_source;
};

/// Streams a sample file ("-" for standard input) through the extractor and
/// writes raw bytes to out_path ("-" for standard output).
ExtractSummary cmd_extract(const PipelineConfig& config, const EntropyReport& report, const std::string& in_path,
                           const std::string& seed_file, const std::string& out_path);

void print_extract_summary(std::ostream& out, const ExtractSummary& s);

// selftest

struct SelftestCase {
    std::string name;
    bool pass = false;
    std::string detail;
};

std::vector<SelftestCase> selftest();

}  // namespace vqrng

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace vqrng {

class ChaCha20Rng;

struct CodeInterval {
    std::uint32_t lo = 0;
    std::uint32_t hi = 0;  // inclusive
};

/// Per-code reachable sets of a non-ideal ADC: ideal code j can be reported
/// as any output code f in `reachable(j)`. Sets are stored as sorted,
/// disjoint intervals; a monotone ADC has exactly one interval per code.
class DigitizationErrorModel {
public:
    DigitizationErrorModel() = default;
    explicit DigitizationErrorModel(std::vector<std::vector<CodeInterval>> reachable);

    static DigitizationErrorModel perfect(std::uint32_t bins);
    /// Each code smears to [j - radius, j + radius], clamped to the code range.
    static DigitizationErrorModel smear(std::uint32_t bins, std::uint32_t radius);
    /// Rows of (j, f_min, f_max); repeated j rows form a set-valued entry.
    static DigitizationErrorModel read_csv(std::istream& in, std::uint32_t bins);
    static DigitizationErrorModel load_csv(const std::string& path, std::uint32_t bins);

    void write_csv(std::ostream& out) const;

    std::uint32_t bins() const { return static_cast<std::uint32_t>(reachable_.size()); }
    const std::vector<CodeInterval>& reachable(std::uint32_t j) const { return reachable_.at(j); }
    bool is_monotone_interval() const;

    /// Draws an output code for ideal code j, uniform over the reachable set.
    std::uint32_t sample(std::uint32_t j, ChaCha20Rng& rng) const;

    /// sup_f |J_f| where J_f = { j : f reachable from j }.
    std::uint64_t max_preimage_size() const;

private:
    std::vector<std::vector<CodeInterval>> reachable_;
};

/// Worst-case bits lost to code-mapping uncertainty, log2 sup_f |J_f|.
double adc_digitization_penalty(const DigitizationErrorModel& model);

}  // namespace vqrng

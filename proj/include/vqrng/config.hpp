#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vqrng/calibration.hpp"
#include "vqrng/entropy_model.hpp"
#include "vqrng/signal_simulator.hpp"
#include "vqrng/spectral.hpp"
#include "vqrng/toeplitz.hpp"

namespace vqrng {

/// INI-style pipeline configuration: `[section]` headers and `key = value`
/// lines, `#` or `;` comments. Only keys of the built-in schema are accepted;
/// every other key is a ConfigError. Unset keys take their schema default.
class PipelineConfig {
public:
    using Section = std::map<std::string, std::string>;

    PipelineConfig();

    static PipelineConfig parse(std::istream& in);
    static PipelineConfig load(const std::string& path);

    /// Overrides one value; the key must exist in the schema.
    void set(const std::string& section, const std::string& key, const std::string& value);
    bool has(const std::string& section, const std::string& key) const;
    const std::string& get(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key) const;
    long long get_int(const std::string& section, const std::string& key) const;
    std::optional<double> get_optional_double(const std::string& section, const std::string& key) const;

    /// Fully resolved configuration, defaults included, in the input format.
    std::string to_ini() const;
    const std::map<std::string, Section>& sections() const { return values_; }

    GeneratorConfig generator() const;
    WelchOptions welch() const;
    VacuumOptions vacuum() const;
    BootstrapOptions bootstrap() const;
    EpsilonBudget epsilons() const;
    ExtractorConfig extractor() const;

    /// Failure probabilities of the eta, g chi_0 and P sub-estimates. Defaults
    /// to an equal three-way split of eps_param.
    struct ParamSplit {
        double eta = 0.0;
        double gain = 0.0;
        double in_range = 0.0;
    };
    ParamSplit param_split() const;

private:
    std::map<std::string, Section> values_;
};

}  // namespace vqrng

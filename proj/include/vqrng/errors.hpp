#pragma once

#include <stdexcept>
#include <string>

namespace vqrng {

/// Invalid or inconsistent configuration (unknown keys, unstable filters, bad geometry).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Vacuum spectrum could not be isolated from the total/electronic pair.
class DegenerateSpectrum : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The requested output length exceeds the leftover-hash budget.
class BudgetRefused : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file (sample blocks, CSV tables, seed files).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace vqrng

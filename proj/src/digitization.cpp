#include "vqrng/digitization.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vqrng/errors.hpp"
#include "vqrng/rng.hpp"

namespace vqrng {

namespace {

void normalize(std::vector<CodeInterval>& set) {
    std::sort(set.begin(), set.end(), [](const CodeInterval& a, const CodeInterval& b) { return a.lo < b.lo; });
    std::vector<CodeInterval> merged;
    for (const CodeInterval& iv : set) {
        if (!merged.empty() && iv.lo <= merged.back().hi + 1) {
            merged.back().hi = std::max(merged.back().hi, iv.hi);
        } else {
            merged.push_back(iv);
        }
    }
    set = std::move(merged);
}

}  // namespace

DigitizationErrorModel::DigitizationErrorModel(std::vector<std::vector<CodeInterval>> reachable)
    : reachable_(std::move(reachable)) {
    const auto d = reachable_.size();
    if (d < 2) {
        throw FormatError("digitization model needs at least two codes");
    }
    for (std::size_t j = 0; j < d; ++j) {
        auto& set = reachable_[j];
        if (set.empty()) {
            throw FormatError("code " + std::to_string(j) + " has an empty reachable set");
        }
        for (const CodeInterval& iv : set) {
            if (iv.lo > iv.hi || iv.hi >= d) {
                throw FormatError("invalid reachable interval for code " + std::to_string(j));
            }
        }
        normalize(set);
    }
}

DigitizationErrorModel DigitizationErrorModel::perfect(std::uint32_t bins) { return smear(bins, 0); }

DigitizationErrorModel DigitizationErrorModel::smear(std::uint32_t bins, std::uint32_t radius) {
    std::vector<std::vector<CodeInterval>> sets(bins);
    for (std::uint32_t j = 0; j < bins; ++j) {
        const std::uint32_t lo = j >= radius ? j - radius : 0;
        const std::uint32_t hi = std::min<std::uint64_t>(std::uint64_t{j} + radius, bins - 1);
        sets[j] = {{lo, hi}};
    }
    return DigitizationErrorModel(std::move(sets));
}

DigitizationErrorModel DigitizationErrorModel::read_csv(std::istream& in, std::uint32_t bins) {
    std::vector<std::vector<CodeInterval>> sets(bins);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        long long j, lo, hi;
        if (!(row >> j >> lo >> hi)) {
            if (line_no == 1) {
                continue;  // header
            }
            throw FormatError("digitization table: malformed row " + std::to_string(line_no));
        }
        if (j < 0 || j >= bins || lo < 0 || hi < lo || hi >= bins) {
            throw FormatError("digitization table: row " + std::to_string(line_no) + " out of range");
        }
        sets[static_cast<std::size_t>(j)].push_back(
            {static_cast<std::uint32_t>(lo), static_cast<std::uint32_t>(hi)});
    }
    return DigitizationErrorModel(std::move(sets));
}

DigitizationErrorModel DigitizationErrorModel::load_csv(const std::string& path, std::uint32_t bins) {
    std::ifstream in(path);
    if (!in) {
        throw FormatError("cannot open digitization table " + path);
    }
    return read_csv(in, bins);
}

void DigitizationErrorModel::write_csv(std::ostream& out) const {
    out << "j,f_min,f_max\n";
    for (std::size_t j = 0; j < reachable_.size(); ++j) {
        for (const CodeInterval& iv : reachable_[j]) {
            out << j << ',' << iv.lo << ',' << iv.hi << '\n';
        }
    }
}

bool DigitizationErrorModel::is_monotone_interval() const {
    return std::all_of(reachable_.begin(), reachable_.end(), [](const auto& s) { return s.size() == 1; });
}

std::uint32_t DigitizationErrorModel::sample(std::uint32_t j, ChaCha20Rng& rng) const {
    const auto& set = reachable_.at(j);
    std::uint64_t total = 0;
    for (const CodeInterval& iv : set) {
        total += iv.hi - iv.lo + 1;
    }
    std::uint64_t pick = static_cast<std::uint64_t>(rng.uniform01() * static_cast<double>(total));
    for (const CodeInterval& iv : set) {
        const std::uint64_t width = iv.hi - iv.lo + 1;
        if (pick < width) {
            return iv.lo + static_cast<std::uint32_t>(pick);
        }
        pick -= width;
    }
    return set.back().hi;
}

std::uint64_t DigitizationErrorModel::max_preimage_size() const {
    // sweep: +1 at each interval start, -1 past its end
    std::vector<std::int64_t> delta(reachable_.size() + 1, 0);
    for (const auto& set : reachable_) {
        for (const CodeInterval& iv : set) {
            ++delta[iv.lo];
            --delta[iv.hi + 1];
        }
    }
    std::int64_t running = 0, best = 0;
    for (std::size_t f = 0; f < reachable_.size(); ++f) {
        running += delta[f];
        best = std::max(best, running);
    }
    return static_cast<std::uint64_t>(best);
}

double adc_digitization_penalty(const DigitizationErrorModel& model) {
    const std::uint64_t worst = model.max_preimage_size();
    if (worst == 0) {
        throw FormatError("digitization model has no reachable codes");
    }
    return std::log2(static_cast<double>(worst));
}

}  // namespace vqrng

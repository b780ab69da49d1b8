#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace vqrng {

/// Retained ADC codes of one acquisition plus the metadata needed to
/// reproduce it.
struct SampleBlock {
    std::vector<std::int16_t> codes;
    std::uint64_t n_total = 0;
    std::uint64_t n_out_of_range = 0;
    std::uint64_t rng_seed = 0;
    int bits_per_sample = 16;
    std::string params_snapshot;

    std::uint64_t n_in_range() const { return n_total - n_out_of_range; }
    double out_of_range_fraction() const {
        return n_total == 0 ? 0.0 : static_cast<double>(n_out_of_range) / static_cast<double>(n_total);
    }
};

/// On-disk layout (little endian), 64-byte header then the codes:
///   0  magic "VRQ1"
///   4  u16 version (1)
///   6  u16 bits per sample
///   8  u64 n_total
///  16  u64 n_out_of_range
///  24  u64 seed
///  32  32-byte SHA-256 of the parameter snapshot
///  64  i16 codes, n_total - n_out_of_range of them
struct SampleFileHeader {
    std::uint16_t version = 1;
    std::uint16_t bits_per_sample = 16;
    std::uint64_t n_total = 0;
    std::uint64_t n_out_of_range = 0;
    std::uint64_t seed = 0;
    std::array<unsigned char, 32> config_digest{};
};

inline constexpr std::size_t kSampleHeaderSize = 64;

std::array<unsigned char, 32> sha256(std::span<const unsigned char> bytes);
std::string hex(std::span<const unsigned char> bytes);

void write_sample_block(std::ostream& out, const SampleBlock& block);
void save_sample_block(const std::string& path, const SampleBlock& block);

/// Streams the codes of a sample file without loading them all.
class SampleReader {
public:
    explicit SampleReader(std::istream& in);

    const SampleFileHeader& header() const { return header_; }
    std::uint64_t remaining() const { return remaining_; }
    /// Fills up to out.size() codes; returns the number read (0 at end).
    std::size_t read(std::span<std::int16_t> out);

private:
    std::istream& in_;
    SampleFileHeader header_;
    std::uint64_t remaining_ = 0;
};

/// Reads a block; the parameter snapshot is not stored, only its digest.
SampleBlock read_sample_block(std::istream& in, SampleFileHeader* header = nullptr);
SampleBlock load_sample_block(const std::string& path, SampleFileHeader* header = nullptr);

}  // namespace vqrng

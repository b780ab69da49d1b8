#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vqrng/entropy_model.hpp"

namespace vqrng {

class ChaCha20Rng;

/// The k + l - 1 random bits defining a k x l Toeplitz matrix with
///   M[r][c] = bits[r + (l - 1 - c)].
class ToeplitzSeed {
public:
    ToeplitzSeed(std::size_t k, std::size_t l, std::vector<std::uint8_t> bits, std::string source_tag = "explicit");

    /// Seed file layout: ceil((k+l-1)/8) bytes, bit i is bit (7 - i%8) of byte i/8.
    static ToeplitzSeed from_bytes(std::size_t k, std::size_t l, std::span<const std::uint8_t> bytes,
                                   std::string source_tag);
    static ToeplitzSeed load(std::size_t k, std::size_t l, const std::string& path);
    /// Operating-system entropy; tagged as not certified.
    static ToeplitzSeed from_system_entropy(std::size_t k, std::size_t l);
    static ToeplitzSeed from_rng(std::size_t k, std::size_t l, ChaCha20Rng& rng);

    std::vector<std::uint8_t> to_bytes() const;
    void save(const std::string& path) const;

    std::size_t k() const { return k_; }
    std::size_t l() const { return l_; }
    std::size_t size() const { return bits_.size(); }
    bool bit(std::size_t i) const { return bits_[i] != 0; }
    bool matrix(std::size_t r, std::size_t c) const { return bits_[r + (l_ - 1 - c)] != 0; }
    const std::string& source_tag() const { return source_tag_; }
    /// SHA-256 of the seed-file bytes, hex.
    std::string digest() const;

private:
    std::size_t k_;
    std::size_t l_;
    std::vector<std::uint8_t> bits_;
    std::string source_tag_;
};

/// Reference GF(2) product: out[r] = XOR_c M[r][c] & input[c]. One byte per bit.
std::vector<std::uint8_t> toeplitz_hash_naive(const ToeplitzSeed& seed, std::span<const std::uint8_t> input_bits);

/// Bit c of a block is bit (c % 64) of word c / 64.
std::vector<std::uint8_t> unpack_bits(std::span<const std::uint64_t> words, std::size_t nbits);
std::vector<std::uint64_t> pack_bits(std::span<const std::uint8_t> bits);

/// Streaming submatrix multiplier. The matrix is cut into column stripes of
/// `stripe_width` bits; each ingested stripe of input is ANDed with every row
/// of its submatrix and XOR-accumulated, and after l/stripe_width stripes the
/// row parities are the output bits.
class ToeplitzHasher {
public:
    explicit ToeplitzHasher(const ToeplitzSeed& seed, std::size_t stripe_width = 64);

    std::size_t k() const { return k_; }
    std::size_t l() const { return l_; }
    std::size_t words_per_stripe() const { return stripe_words_; }
    std::size_t stripes() const { return stripes_; }

    /// Feeds the next stripe (stripe_width/64 words). Returns true when the block is complete.
    bool ingest(std::span<const std::uint64_t> stripe);
    /// Output bits of the completed block, packed MSB-first; resets for the next block.
    std::vector<std::uint8_t> finish();

    /// Hashes one whole block of l/64 words.
    std::vector<std::uint8_t> hash(std::span<const std::uint64_t> block);

private:
    std::size_t k_;
    std::size_t l_;
    std::size_t stripe_words_;
    std::size_t stripes_;
    std::size_t next_stripe_ = 0;
    // submatrix words, [column word][row]
    std::vector<std::uint64_t> columns_;
    std::vector<std::uint64_t> acc_;
};

/// Convenience: stream result unpacked to one byte per bit.
std::vector<std::uint8_t> toeplitz_hash_stream(const ToeplitzSeed& seed, std::span<const std::uint64_t> block,
                                               std::size_t stripe_width = 64);

struct ExtractorConfig {
    std::size_t k = 1680;
    std::size_t l = 7872;
    std::size_t column_stripe_width = 64;
    double eps_hash = 1e-17;
    int bits_per_sample = 16;

    void validate() const;
};

/// k output bits of one block, MSB-first in ceil(k/8) bytes.
struct RandomOutput {
    std::vector<std::uint8_t> bytes;
    std::size_t bits = 0;
    std::uint64_t block_index = 0;
};

/// Packs retained 16-bit codes (little endian, in order) into l-bit blocks and
/// hashes each. Construction refuses with BudgetRefused when k exceeds the
/// leftover-hash length for the report's final min-entropy.
class BlockExtractor {
public:
    using Sink = std::function<void(const RandomOutput&)>;

    BlockExtractor(const ExtractorConfig& config, const EntropyReport& report, const ToeplitzSeed& seed);

    void push(std::span<const std::int16_t> codes, const Sink& sink);
    std::uint64_t blocks() const { return blocks_; }
    /// Codes waiting for a complete block; dropped at the end of the stream.
    std::size_t pending_codes() const { return pending_codes_; }
    std::uint64_t budget_k() const { return budget_k_; }

private:
    ExtractorConfig config_;
    ToeplitzHasher hasher_;
    std::uint64_t budget_k_ = 0;
    std::vector<std::uint64_t> block_;
    std::size_t pending_codes_ = 0;
    std::uint64_t blocks_ = 0;
};

std::vector<RandomOutput> extract_blocks(const ExtractorConfig& config, const EntropyReport& report,
                                         const ToeplitzSeed& seed, std::span<const std::int16_t> codes);

/// Appends bit strings MSB-first into a contiguous byte stream.
class BitWriter {
public:
    void append(const RandomOutput& out);
    void append_bit(bool bit);
    /// Completed bytes so far, then clears them (the partial byte is kept).
    std::vector<std::uint8_t> take_complete();
    /// Remaining bytes including a zero-padded partial byte.
    std::vector<std::uint8_t> flush();
    std::uint64_t bit_count() const { return bit_count_; }

private:
    std::vector<std::uint8_t> bytes_;
    std::uint8_t current_ = 0;
    int filled_ = 0;
    std::uint64_t bit_count_ = 0;
};

}  // namespace vqrng

#include "vqrng/toeplitz.hpp"

#include <sodium.h>

#include <bit>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "vqrng/errors.hpp"
#include "vqrng/rng.hpp"
#include "vqrng/sample_block.hpp"

namespace vqrng {

namespace {

std::size_t seed_bytes(std::size_t k, std::size_t l) { return (k + l - 1 + 7) / 8; }

void check_geometry(std::size_t k, std::size_t l) {
    if (k == 0 || l == 0 || k > l) {
        throw std::invalid_argument("Toeplitz geometry needs 0 < k <= l");
    }
}

std::size_t checked_stripe_width(const ExtractorConfig& config) {
    config.validate();
    return config.column_stripe_width;
}

}  // namespace

ToeplitzSeed::ToeplitzSeed(std::size_t k, std::size_t l, std::vector<std::uint8_t> bits, std::string source_tag)
    : k_(k), l_(l), bits_(std::move(bits)), source_tag_(std::move(source_tag)) {
    check_geometry(k, l);
    if (bits_.size() != k + l - 1) {
        throw std::invalid_argument("Toeplitz seed must have exactly k + l - 1 bits");
    }
    for (auto& b : bits_) {
        b = b != 0;
    }
}

ToeplitzSeed ToeplitzSeed::from_bytes(std::size_t k, std::size_t l, std::span<const std::uint8_t> bytes,
                                      std::string source_tag) {
    check_geometry(k, l);
    if (bytes.size() != seed_bytes(k, l)) {
        throw FormatError("seed must be " + std::to_string(seed_bytes(k, l)) + " bytes for k=" + std::to_string(k) +
                          ", l=" + std::to_string(l) + ", got " + std::to_string(bytes.size()));
    }
    std::vector<std::uint8_t> bits(k + l - 1);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        bits[i] = (bytes[i / 8] >> (7 - i % 8)) & 1;
    }
    return ToeplitzSeed(k, l, std::move(bits), std::move(source_tag));
}

ToeplitzSeed ToeplitzSeed::load(std::size_t k, std::size_t l, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open seed file " + path);
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_bytes(k, l, bytes, "file:" + path);
}

ToeplitzSeed ToeplitzSeed::from_system_entropy(std::size_t k, std::size_t l) {
    check_geometry(k, l);
    if (sodium_init() < 0) {
        throw std::runtime_error("libsodium initialisation failed");
    }
    std::vector<std::uint8_t> bytes(seed_bytes(k, l));
    randombytes_buf(bytes.data(), bytes.size());
    return from_bytes(k, l, bytes, "system-entropy (not certified)");
}

ToeplitzSeed ToeplitzSeed::from_rng(std::size_t k, std::size_t l, ChaCha20Rng& rng) {
    check_geometry(k, l);
    std::vector<std::uint8_t> bits(k + l - 1);
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (i % 64 == 0) {
            word = rng();
        }
        bits[i] = (word >> (i % 64)) & 1;
    }
    return ToeplitzSeed(k, l, std::move(bits), "simulation rng (not certified)");
}

std::vector<std::uint8_t> ToeplitzSeed::to_bytes() const {
    std::vector<std::uint8_t> bytes(seed_bytes(k_, l_), 0);
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        bytes[i / 8] |= static_cast<std::uint8_t>(bits_[i] << (7 - i % 8));
    }
    return bytes;
}

void ToeplitzSeed::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    const auto bytes = to_bytes();
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw FormatError("cannot write seed file " + path);
    }
}

std::string ToeplitzSeed::digest() const {
    const auto bytes = to_bytes();
    return hex(sha256(bytes));
}

std::vector<std::uint8_t> toeplitz_hash_naive(const ToeplitzSeed& seed, std::span<const std::uint8_t> input_bits) {
    if (input_bits.size() != seed.l()) {
        throw std::invalid_argument("input length does not match the Toeplitz seed");
    }
    std::vector<std::uint8_t> out(seed.k(), 0);
    for (std::size_t r = 0; r < seed.k(); ++r) {
        std::uint8_t acc = 0;
        for (std::size_t c = 0; c < seed.l(); ++c) {
            acc ^= static_cast<std::uint8_t>(seed.matrix(r, c) & (input_bits[c] != 0));
        }
        out[r] = acc;
    }
    return out;
}

std::vector<std::uint8_t> unpack_bits(std::span<const std::uint64_t> words, std::size_t nbits) {
    if (nbits > 64 * words.size()) {
        throw std::invalid_argument("not enough words for the requested bit count");
    }
    std::vector<std::uint8_t> bits(nbits);
    for (std::size_t c = 0; c < nbits; ++c) {
        bits[c] = (words[c / 64] >> (c % 64)) & 1;
    }
    return bits;
}

std::vector<std::uint64_t> pack_bits(std::span<const std::uint8_t> bits) {
    std::vector<std::uint64_t> words((bits.size() + 63) / 64, 0);
    for (std::size_t c = 0; c < bits.size(); ++c) {
        words[c / 64] |= static_cast<std::uint64_t>(bits[c] != 0) << (c % 64);
    }
    return words;
}

ToeplitzHasher::ToeplitzHasher(const ToeplitzSeed& seed, std::size_t stripe_width)
    : k_(seed.k()), l_(seed.l()), acc_(seed.k(), 0) {
    if (stripe_width == 0 || stripe_width % 64 != 0 || l_ % stripe_width != 0) {
        throw std::invalid_argument("stripe width must be a multiple of 64 that divides l");
    }
    stripe_words_ = stripe_width / 64;
    stripes_ = l_ / stripe_width;

    // Row r over columns is the reversed seed read forward from offset k-1-r,
    // so pack the reversed seed once and slice 64-bit windows out of it.
    const std::size_t total = k_ + l_ - 1;
    std::vector<std::uint64_t> reversed((total + 63) / 64 + 1, 0);
    for (std::size_t j = 0; j < total; ++j) {
        reversed[j / 64] |= static_cast<std::uint64_t>(seed.bit(total - 1 - j)) << (j % 64);
    }
    auto window = [&reversed](std::size_t offset) {
        const std::size_t w = offset / 64, s = offset % 64;
        return s == 0 ? reversed[w] : (reversed[w] >> s) | (reversed[w + 1] << (64 - s));
    };

    const std::size_t column_words = l_ / 64;
    columns_.resize(column_words * k_);
    for (std::size_t w = 0; w < column_words; ++w) {
        for (std::size_t r = 0; r < k_; ++r) {
            columns_[w * k_ + r] = window(k_ - 1 - r + 64 * w);
        }
    }
}

bool ToeplitzHasher::ingest(std::span<const std::uint64_t> stripe) {
    if (stripe.size() != stripe_words_) {
        throw std::invalid_argument("stripe has the wrong number of words");
    }
    if (next_stripe_ == stripes_) {
        throw std::logic_error("block already complete; call finish()");
    }
    for (std::size_t i = 0; i < stripe_words_; ++i) {
        const std::uint64_t in = stripe[i];
        const std::uint64_t* col = columns_.data() + (next_stripe_ * stripe_words_ + i) * k_;
        std::uint64_t* acc = acc_.data();
        for (std::size_t r = 0; r < k_; ++r) {
            acc[r] ^= col[r] & in;
        }
    }
    return ++next_stripe_ == stripes_;
}

std::vector<std::uint8_t> ToeplitzHasher::finish() {
    if (next_stripe_ != stripes_) {
        throw std::logic_error("block incomplete");
    }
    std::vector<std::uint8_t> out((k_ + 7) / 8, 0);
    for (std::size_t r = 0; r < k_; ++r) {
        out[r / 8] |= static_cast<std::uint8_t>((std::popcount(acc_[r]) & 1) << (7 - r % 8));
        acc_[r] = 0;
    }
    next_stripe_ = 0;
    return out;
}

std::vector<std::uint8_t> ToeplitzHasher::hash(std::span<const std::uint64_t> block) {
    if (block.size() != l_ / 64) {
        throw std::invalid_argument("input block length does not match the Toeplitz seed");
    }
    for (std::size_t s = 0; s < stripes_; ++s) {
        ingest(block.subspan(s * stripe_words_, stripe_words_));
    }
    return finish();
}

std::vector<std::uint8_t> toeplitz_hash_stream(const ToeplitzSeed& seed, std::span<const std::uint64_t> block,
                                               std::size_t stripe_width) {
    ToeplitzHasher hasher(seed, stripe_width);
    const auto packed = hasher.hash(block);
    std::vector<std::uint8_t> bits(seed.k());
    for (std::size_t r = 0; r < bits.size(); ++r) {
        bits[r] = (packed[r / 8] >> (7 - r % 8)) & 1;
    }
    return bits;
}

void ExtractorConfig::validate() const {
    check_geometry(k, l);
    if (bits_per_sample != 16) {
        throw std::invalid_argument("codes are packed as 16-bit words");
    }
    if (l % static_cast<std::size_t>(bits_per_sample) != 0) {
        throw std::invalid_argument("l must be a multiple of the sample width");
    }
    if (column_stripe_width == 0 || column_stripe_width % 64 != 0 || l % column_stripe_width != 0) {
        throw std::invalid_argument("stripe width must be a multiple of 64 that divides l");
    }
    if (!(eps_hash > 0.0 && eps_hash < 1.0)) {
        throw std::domain_error("eps_hash must lie in (0,1)");
    }
}

BlockExtractor::BlockExtractor(const ExtractorConfig& config, const EntropyReport& report, const ToeplitzSeed& seed)
    : config_(config), hasher_(seed, checked_stripe_width(config)) {
    if (seed.k() != config.k || seed.l() != config.l) {
        throw std::invalid_argument("seed geometry does not match the extractor configuration");
    }
    if (!(report.hmin_final > 0.0)) {
        throw BudgetRefused("certified min-entropy is zero; refusing to extract");
    }
    budget_k_ = extractable_length(config.l, report.hmin_final, config.bits_per_sample, config.eps_hash);
    if (config.k > budget_k_) {
        throw BudgetRefused("k = " + std::to_string(config.k) + " exceeds the leftover-hash bound " +
                            std::to_string(budget_k_) + " for l = " + std::to_string(config.l));
    }
    block_.assign(config.l / 64, 0);
}

void BlockExtractor::push(std::span<const std::int16_t> codes, const Sink& sink) {
    const std::size_t codes_per_block = config_.l / 16;
    for (std::int16_t code : codes) {
        const std::size_t c = pending_codes_;
        block_[c / 4] |= static_cast<std::uint64_t>(static_cast<std::uint16_t>(code)) << (16 * (c % 4));
        if (++pending_codes_ == codes_per_block) {
            RandomOutput out;
            out.bytes = hasher_.hash(block_);
            out.bits = config_.k;
            out.block_index = blocks_++;
            sink(out);
            std::fill(block_.begin(), block_.end(), 0);
            pending_codes_ = 0;
        }
    }
}

std::vector<RandomOutput> extract_blocks(const ExtractorConfig& config, const EntropyReport& report,
                                         const ToeplitzSeed& seed, std::span<const std::int16_t> codes) {
    BlockExtractor extractor(config, report, seed);
    std::vector<RandomOutput> outputs;
    extractor.push(codes, [&outputs](const RandomOutput& out) { outputs.push_back(out); });
    return outputs;
}

void BitWriter::append_bit(bool bit) {
    current_ = static_cast<std::uint8_t>(current_ | (bit << (7 - filled_)));
    ++bit_count_;
    if (++filled_ == 8) {
        bytes_.push_back(current_);
        current_ = 0;
        filled_ = 0;
    }
}

void BitWriter::append(const RandomOutput& out) {
    if (filled_ == 0 && out.bits % 8 == 0) {
        bytes_.insert(bytes_.end(), out.bytes.begin(), out.bytes.begin() + static_cast<std::ptrdiff_t>(out.bits / 8));
        bit_count_ += out.bits;
        return;
    }
    for (std::size_t i = 0; i < out.bits; ++i) {
        append_bit((out.bytes[i / 8] >> (7 - i % 8)) & 1);
    }
}

std::vector<std::uint8_t> BitWriter::take_complete() {
    std::vector<std::uint8_t> out;
    out.swap(bytes_);
    return out;
}

std::vector<std::uint8_t> BitWriter::flush() {
    std::vector<std::uint8_t> out = take_complete();
    if (filled_ > 0) {
        out.push_back(current_);
        current_ = 0;
        filled_ = 0;
    }
    return out;
}

}  // namespace vqrng

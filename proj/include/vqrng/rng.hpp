#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace vqrng {

/// Seedable ChaCha20 keystream generator (libsodium core).
///
/// The 256-bit key is SHA-256("vqrng/chacha20" || seed), the 64-bit nonce is
/// the stream index, so disjoint streams can be derived from one seed. Used by
/// the simulator only; nothing it produces is ever certified.
class ChaCha20Rng {
public:
    using result_type = std::uint64_t;

    explicit ChaCha20Rng(std::uint64_t seed, std::uint64_t stream = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (pos_ == buffer_.size()) {
            refill();
        }
        return buffer_[pos_++];
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    void refill();

    std::array<unsigned char, 32> key_{};
    std::array<unsigned char, 8> nonce_{};
    std::uint64_t block_counter_ = 0;
    std::array<std::uint64_t, 64> buffer_{};
    std::size_t pos_ = buffer_.size();
};

/// Standard normal variates by the Marsaglia polar method (pairs, one cached).
class NormalSampler {
public:
    double operator()(ChaCha20Rng& rng);

private:
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace vqrng

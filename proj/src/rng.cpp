#include "vqrng/rng.hpp"

#include <sodium.h>

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace vqrng {

namespace {

void ensure_sodium() {
    static const int status = sodium_init();
    if (status < 0) {
        throw std::runtime_error("libsodium initialisation failed");
    }
}

}  // namespace

ChaCha20Rng::ChaCha20Rng(std::uint64_t seed, std::uint64_t stream) {
    ensure_sodium();
    static constexpr char kDomain[] = "vqrng/chacha20";
    unsigned char material[sizeof(kDomain) - 1 + 8];
    std::memcpy(material, kDomain, sizeof(kDomain) - 1);
    for (int i = 0; i < 8; ++i) {
        material[sizeof(kDomain) - 1 + i] = static_cast<unsigned char>(seed >> (8 * i));
        nonce_[i] = static_cast<unsigned char>(stream >> (8 * i));
    }
    crypto_hash_sha256(key_.data(), material, sizeof(material));
}

void ChaCha20Rng::refill() {
    static const std::array<unsigned char, sizeof(buffer_)> zeros{};
    std::array<unsigned char, sizeof(buffer_)> bytes;
    crypto_stream_chacha20_xor_ic(bytes.data(), zeros.data(), bytes.size(), nonce_.data(), block_counter_,
                                  key_.data());
    block_counter_ += sizeof(buffer_) / 64;
    for (std::size_t i = 0; i < buffer_.size(); ++i) {
        std::uint64_t w = 0;
        for (int b = 7; b >= 0; --b) {
            w = (w << 8) | bytes[8 * i + static_cast<std::size_t>(b)];
        }
        buffer_[i] = w;
    }
    pos_ = 0;
}

double NormalSampler::operator()(ChaCha20Rng& rng) {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * rng.uniform01() - 1.0;
        v = 2.0 * rng.uniform01() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
}

}  // namespace vqrng

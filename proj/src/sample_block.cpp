#include "vqrng/sample_block.hpp"

#include <sodium.h>

#include <algorithm>
#include <cstring>
#include <stdexcept>
#include <fstream>
#include <istream>
#include <ostream>

#include "vqrng/errors.hpp"

namespace vqrng {

namespace {

constexpr char kMagic[4] = {'V', 'R', 'Q', '1'};

template <typename T>
void put_le(unsigned char* dst, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        dst[i] = static_cast<unsigned char>(static_cast<std::uint64_t>(value) >> (8 * i));
    }
}

template <typename T>
T get_le(const unsigned char* src) {
    std::uint64_t v = 0;
    for (std::size_t i = sizeof(T); i-- > 0;) {
        v = (v << 8) | src[i];
    }
    return static_cast<T>(v);
}

SampleFileHeader parse_header(std::istream& in) {
    unsigned char raw[kSampleHeaderSize];
    if (!in.read(reinterpret_cast<char*>(raw), sizeof(raw))) {
        throw FormatError("sample file: truncated header");
    }
    if (std::memcmp(raw, kMagic, 4) != 0) {
        throw FormatError("sample file: bad magic");
    }
    SampleFileHeader h;
    h.version = get_le<std::uint16_t>(raw + 4);
    h.bits_per_sample = get_le<std::uint16_t>(raw + 6);
    h.n_total = get_le<std::uint64_t>(raw + 8);
    h.n_out_of_range = get_le<std::uint64_t>(raw + 16);
    h.seed = get_le<std::uint64_t>(raw + 24);
    std::memcpy(h.config_digest.data(), raw + 32, 32);
    if (h.version != 1) {
        throw FormatError("sample file: unsupported version " + std::to_string(h.version));
    }
    if (h.bits_per_sample < 1 || h.bits_per_sample > 16 || h.n_out_of_range > h.n_total) {
        throw FormatError("sample file: inconsistent header");
    }
    return h;
}

}  // namespace

std::array<unsigned char, 32> sha256(std::span<const unsigned char> bytes) {
    if (sodium_init() < 0) {
        throw std::runtime_error("libsodium initialisation failed");
    }
    std::array<unsigned char, 32> out;
    crypto_hash_sha256(out.data(), bytes.data(), bytes.size());
    return out;
}

std::string hex(std::span<const unsigned char> bytes) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string s;
    s.reserve(bytes.size() * 2);
    for (unsigned char b : bytes) {
        s.push_back(kDigits[b >> 4]);
        s.push_back(kDigits[b & 15]);
    }
    return s;
}

void write_sample_block(std::ostream& out, const SampleBlock& block) {
    if (block.codes.size() != block.n_in_range()) {
        throw FormatError("sample block: code count does not match header counts");
    }
    unsigned char raw[kSampleHeaderSize] = {};
    std::memcpy(raw, kMagic, 4);
    put_le<std::uint16_t>(raw + 4, 1);
    put_le<std::uint16_t>(raw + 6, static_cast<std::uint16_t>(block.bits_per_sample));
    put_le<std::uint64_t>(raw + 8, block.n_total);
    put_le<std::uint64_t>(raw + 16, block.n_out_of_range);
    put_le<std::uint64_t>(raw + 24, block.rng_seed);
    const auto digest = sha256({reinterpret_cast<const unsigned char*>(block.params_snapshot.data()),
                                block.params_snapshot.size()});
    std::memcpy(raw + 32, digest.data(), digest.size());
    out.write(reinterpret_cast<const char*>(raw), sizeof(raw));

    std::vector<unsigned char> body(2 * block.codes.size());
    for (std::size_t i = 0; i < block.codes.size(); ++i) {
        put_le<std::uint16_t>(body.data() + 2 * i, static_cast<std::uint16_t>(block.codes[i]));
    }
    out.write(reinterpret_cast<const char*>(body.data()), static_cast<std::streamsize>(body.size()));
    if (!out) {
        throw FormatError("sample file: write failed");
    }
}

void save_sample_block(const std::string& path, const SampleBlock& block) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw FormatError("cannot create " + path);
    }
    write_sample_block(out, block);
}

SampleReader::SampleReader(std::istream& in) : in_(in), header_(parse_header(in)) {
    remaining_ = header_.n_total - header_.n_out_of_range;
}

std::size_t SampleReader::read(std::span<std::int16_t> out) {
    const std::size_t want = static_cast<std::size_t>(std::min<std::uint64_t>(out.size(), remaining_));
    if (want == 0) {
        return 0;
    }
    std::vector<unsigned char> raw(2 * want);
    if (!in_.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
        throw FormatError("sample file: truncated body");
    }
    for (std::size_t i = 0; i < want; ++i) {
        out[i] = static_cast<std::int16_t>(get_le<std::uint16_t>(raw.data() + 2 * i));
    }
    remaining_ -= want;
    return want;
}

SampleBlock read_sample_block(std::istream& in, SampleFileHeader* header) {
    SampleReader reader(in);
    SampleBlock block;
    block.n_total = reader.header().n_total;
    block.n_out_of_range = reader.header().n_out_of_range;
    block.rng_seed = reader.header().seed;
    block.bits_per_sample = reader.header().bits_per_sample;
    block.codes.resize(reader.remaining());
    reader.read(block.codes);
    if (header != nullptr) {
        *header = reader.header();
    }
    return block;
}

SampleBlock load_sample_block(const std::string& path, SampleFileHeader* header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open sample file " + path);
    }
    return read_sample_block(in, header);
}

}  // namespace vqrng

#include "fantomette/hash.hpp"

#include <openssl/sha.h>

#include <stdexcept>

namespace fantomette {

Digest sha256(std::span<const std::uint8_t> data) {
    Digest out{};
    SHA256(data.data(), data.size(), out.data());
    return out;
}

Digest sha256(const Digest& d) { return sha256(std::span<const std::uint8_t>(d)); }

Hasher& Hasher::tag(std::string_view domain) {
    put_u64(domain.size());
    buf_.insert(buf_.end(), domain.begin(), domain.end());
    return *this;
}

Hasher& Hasher::put(const Digest& d) {
    buf_.insert(buf_.end(), d.begin(), d.end());
    return *this;
}

Hasher& Hasher::put(std::span<const std::uint8_t> bytes) {
    put_u64(bytes.size());
    buf_.insert(buf_.end(), bytes.begin(), bytes.end());
    return *this;
}

Hasher& Hasher::put_u64(std::uint64_t v) {
    for (int i = 7; i >= 0; --i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    return *this;
}

Digest Hasher::finish() const { return sha256(buf_); }

Digest xor_digest(const Digest& a, const Digest& b) {
    Digest out{};
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] ^ b[i];
    return out;
}

Digest max_digest() {
    Digest d;
    d.fill(0xff);
    return d;
}

Digest scaled_max_div(std::uint64_t numerator_scale, std::uint64_t divisor) {
    if (divisor == 0) throw std::invalid_argument("scaled_max_div: divisor is zero");
    if (numerator_scale == 0) return Digest{};
    // Schoolbook long division of (scale * (2^256 - 1)) by divisor, base 2^8.
    // The numerator is formed as scale * 2^256 - scale in a 40-byte buffer.
    std::array<std::uint8_t, 40> num{};
    {
        // scale * 2^256: scale occupies the top 8 bytes.
        for (int i = 0; i < 8; ++i) num[i] = static_cast<std::uint8_t>(numerator_scale >> (8 * (7 - i)));
        // subtract scale from the low 8 bytes with borrow
        unsigned borrow = 0;
        for (int i = 39, j = 0; i >= 0; --i, ++j) {
            unsigned sub = (j < 8 ? static_cast<unsigned>((numerator_scale >> (8 * j)) & 0xff) : 0u) + borrow;
            if (num[i] >= sub) {
                num[i] = static_cast<std::uint8_t>(num[i] - sub);
                borrow = 0;
            } else {
                num[i] = static_cast<std::uint8_t>(num[i] + 256 - sub);
                borrow = 1;
            }
        }
    }
    std::array<std::uint8_t, 40> quo{};
    unsigned __int128 rem = 0;
    for (std::size_t i = 0; i < num.size(); ++i) {
        rem = (rem << 8) | num[i];
        quo[i] = static_cast<std::uint8_t>(rem / divisor);
        rem %= divisor;
    }
    for (std::size_t i = 0; i < 8; ++i) {
        if (quo[i] != 0) throw std::overflow_error("scaled_max_div: quotient exceeds 256 bits");
    }
    Digest out{};
    std::copy(quo.begin() + 8, quo.end(), out.begin());
    return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string s;
    s.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        s.push_back(kHex[b >> 4]);
        s.push_back(kHex[b & 0xf]);
    }
    return s;
}

std::string to_hex(const Digest& d) { return to_hex(std::span<const std::uint8_t>(d)); }

std::string short_hex(const Digest& d, std::size_t chars) { return to_hex(d).substr(0, chars); }

Digest digest_from_hex(std::string_view hex) {
    if (hex.size() != 64) throw std::invalid_argument("digest_from_hex: expected 64 hex characters");
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw std::invalid_argument("digest_from_hex: invalid character");
    };
    Digest d{};
    for (std::size_t i = 0; i < d.size(); ++i) {
        d[i] = static_cast<std::uint8_t>((nibble(hex[2 * i]) << 4) | nibble(hex[2 * i + 1]));
    }
    return d;
}

}  // namespace fantomette

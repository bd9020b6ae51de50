#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fantomette {

/// 256-bit value used for every digest, beacon and key in the protocol.
/// Byte 0 is the most significant byte when the value is read as an integer.
using Digest = std::array<std::uint8_t, 32>;

inline constexpr std::size_t kDigestBits = 256;

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(const Digest& d);

/// Accumulates a canonical byte encoding, then hashes it once.
class Hasher {
public:
    Hasher& tag(std::string_view domain);
    Hasher& put(const Digest& d);
    Hasher& put(std::span<const std::uint8_t> bytes);
    Hasher& put_u64(std::uint64_t v);
    Digest finish() const;

private:
    std::vector<std::uint8_t> buf_;
};

Digest xor_digest(const Digest& a, const Digest& b);

/// H_max = 2^256 - 1.
Digest max_digest();

/// floor(numerator_scale * H_max / divisor). numerator_scale keeps the
/// rotation rule's (n+1)/2 divisor exact: target = floor(2*H_max/(n+1)).
Digest scaled_max_div(std::uint64_t numerator_scale, std::uint64_t divisor);

std::string to_hex(const Digest& d);
std::string to_hex(std::span<const std::uint8_t> bytes);
Digest digest_from_hex(std::string_view hex);

/// Short prefix for logs and DOT labels.
std::string short_hex(const Digest& d, std::size_t chars = 8);

struct DigestHash {
    std::size_t operator()(const Digest& d) const noexcept {
        std::size_t h = 0;
        for (std::size_t i = 0; i < sizeof(std::size_t); ++i) h = (h << 8) | d[i];
        return h;
    }
};

}  // namespace fantomette

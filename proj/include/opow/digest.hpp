#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace opow {

using Bytes = std::vector<std::uint8_t>;

// 32-byte hash output. Compared against targets as a big-endian integer.
struct Digest256 {
    std::array<std::uint8_t, 32> bytes{};

    static Digest256 zero() { return {}; }

    std::span<const std::uint8_t> view() const { return bytes; }

    friend bool operator==(const Digest256&, const Digest256&) = default;
    friend auto operator<=>(const Digest256&, const Digest256&) = default;
};

// Thrown on malformed hex input.
struct HexError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

Digest256 sha256(std::span<const std::uint8_t> data);
inline Digest256 sha256(std::string_view s)
{
    return sha256(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

std::string to_hex(std::span<const std::uint8_t> data);
inline std::string to_hex(const Digest256& d) { return to_hex(d.view()); }

Bytes from_hex(std::string_view hex);
Digest256 digest_from_hex(std::string_view hex);

struct DigestHash {
    std::size_t operator()(const Digest256& d) const noexcept
    {
        std::size_t h = 0;
        for (int i = 0; i < 8; ++i) h = (h << 8) | d.bytes[i];
        return h;
    }
};

}  // namespace opow

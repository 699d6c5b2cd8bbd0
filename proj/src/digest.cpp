#include "opow/digest.hpp"

#include <openssl/sha.h>

namespace opow {

Digest256 sha256(std::span<const std::uint8_t> data)
{
    Digest256 out;
    SHA256(data.data(), data.size(), out.bytes.data());
    return out;
}

std::string to_hex(std::span<const std::uint8_t> data)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    s.reserve(data.size() * 2);
    for (auto b : data) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xF]);
    }
    return s;
}

namespace {
int hex_value(char c)
{
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}
}  // namespace

Bytes from_hex(std::string_view hex)
{
    if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
    if (hex.size() % 2 != 0) throw HexError("hex string has odd length");
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        int hi = hex_value(hex[2 * i]);
        int lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw HexError("invalid hex digit in '" + std::string(hex) + "'");
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

Digest256 digest_from_hex(std::string_view hex)
{
    auto raw = from_hex(hex);
    if (raw.size() != 32) throw HexError("digest must be 32 bytes (64 hex digits)");
    Digest256 d;
    std::copy(raw.begin(), raw.end(), d.bytes.begin());
    return d;
}

}  // namespace opow

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>

#include <boost/multiprecision/cpp_int.hpp>

#include "opow/digest.hpp"
#include "opow/heavyhash.hpp"

namespace opow {

using U256 = boost::multiprecision::uint256_t;
using U512 = boost::multiprecision::uint512_t;

struct MalformedHeader : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidTarget : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct InvalidWindow : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

U256 digest_to_uint(const Digest256& d);
Digest256 uint_to_digest(const U256& v);

// Hashcash threshold, 0 < value < 2^256.
class Target {
public:
    explicit Target(U256 value);

    // 2^(256 - k), 1 <= k <= 256.
    static Target from_leading_zero_bits(unsigned k);

    const U256& value() const noexcept { return value_; }
    friend bool operator==(const Target&, const Target&) = default;

private:
    U256 value_;
};

// Bitcoin-style compact form: 1 byte exponent, 3 byte mantissa, sign bit must
// be clear. Encoding truncates toward zero.
std::uint32_t encode_compact(const Target& t);
Target decode_compact(std::uint32_t bits);

inline constexpr std::size_t kHeaderSize = 88;

struct BlockHeader {
    std::uint32_t version = 0;
    Digest256 parent_hash{};
    Digest256 payload_commitment{};
    std::uint64_t timestamp = 0;
    std::uint32_t compact_target = 0;
    std::uint64_t nonce = 0;

    friend bool operator==(const BlockHeader&, const BlockHeader&) = default;
};

using HeaderBytes = std::array<std::uint8_t, kHeaderSize>;

// Little-endian fixed-width fields in declaration order.
HeaderBytes serialize_header(const BlockHeader& h) noexcept;
BlockHeader deserialize_header(std::span<const std::uint8_t> bytes);

// Strict: big-endian value of d < t.
bool meets_target(const Digest256& d, const Target& t);

Digest256 header_hash(const BlockHeader& h, const WeightMatrix& m);

// Smallest nonce in [nonce_start, nonce_start + nonce_count) whose header
// HeavyHash meets t. The range is scanned in chunks shared across OpenMP
// threads; the result does not depend on the thread count.
std::optional<std::uint64_t> mine(const BlockHeader& templ, const WeightMatrix& m, const Target& t,
                                  std::uint64_t nonce_start, std::uint64_t nonce_count);

// Single-threaded reference scan.
std::optional<std::uint64_t> mine_serial(const BlockHeader& templ, const WeightMatrix& m, const Target& t,
                                         std::uint64_t nonce_start, std::uint64_t nonce_count);

struct RetargetParams {
    std::uint64_t window = 64;
    std::uint64_t expected_interval = 600;
    // clamp factor as a rational clamp_num / clamp_den
    std::uint64_t clamp_num = 4;
    std::uint64_t clamp_den = 1;

    void validate() const;
};

// new = current * actual / (window * expected_interval), ratio clamped to
// [1/clamp, clamp], floor division, capped at 2^256 - 1 and floored at 1.
// timestamps holds window + 1 strictly increasing values.
Target retarget(std::span<const std::uint64_t> timestamps, const Target& current, const RetargetParams& p);

// A child of the block at parent_height is retargeted when the parent closes a
// full window: parent_height >= window and parent_height % window == 0. The
// window timestamps are those of heights parent_height - window .. parent_height.
inline bool retarget_due(std::uint64_t parent_height, const RetargetParams& p) noexcept
{
    return parent_height >= p.window && parent_height % p.window == 0;
}

// floor(2^256 / (t + 1))
U256 work_from_target(const Target& t);

}  // namespace opow

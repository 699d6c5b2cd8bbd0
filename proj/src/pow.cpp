#include "opow/pow.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <limits>
#include <string>

namespace opow {

namespace {
const U512 kTwo256 = U512(1) << 256;
const U256 kMaxU256 = ~U256(0);
}  // namespace

U256 digest_to_uint(const Digest256& d)
{
    U256 v = 0;
    for (auto b : d.bytes) v = (v << 8) | b;
    return v;
}

Digest256 uint_to_digest(const U256& v)
{
    Digest256 d;
    U256 x = v;
    for (int i = 31; i >= 0; --i) {
        d.bytes[i] = static_cast<std::uint8_t>(x & 0xFF);
        x >>= 8;
    }
    return d;
}

Target::Target(U256 value) : value_(value)
{
    if (value_ == 0) throw InvalidTarget("target must be positive");
}

Target Target::from_leading_zero_bits(unsigned k)
{
    if (k < 1 || k > 256) throw InvalidTarget("leading zero bits must be in [1, 256]");
    return Target(U256(1) << (256 - k));
}

std::uint32_t encode_compact(const Target& t)
{
    const U256& v = t.value();
    unsigned size = static_cast<unsigned>((boost::multiprecision::msb(v) + 8) / 8);
    std::uint32_t mantissa;
    if (size <= 3) {
        mantissa = static_cast<std::uint32_t>(v << (8 * (3 - size)));
    } else {
        mantissa = static_cast<std::uint32_t>(v >> (8 * (size - 3)));
    }
    if (mantissa & 0x00800000u) {
        mantissa >>= 8;
        ++size;
    }
    return mantissa | (size << 24);
}

Target decode_compact(std::uint32_t bits)
{
    const unsigned size = bits >> 24;
    const std::uint32_t mantissa = bits & 0x007fffffu;
    if (bits & 0x00800000u) throw InvalidTarget("compact target has sign bit set");
    U512 v;
    if (size <= 3) {
        v = U512(mantissa >> (8 * (3 - size)));
    } else {
        if (size > 64) throw InvalidTarget("compact target exponent too large");
        v = U512(mantissa) << (8 * (size - 3));
    }
    if (v == 0) throw InvalidTarget("compact target decodes to zero");
    if (v >= kTwo256) throw InvalidTarget("compact target exceeds 2^256");
    return Target(static_cast<U256>(v));
}

namespace {

template <typename T>
void put_le(std::uint8_t* p, T v)
{
    for (std::size_t i = 0; i < sizeof(T); ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

template <typename T>
T get_le(const std::uint8_t* p)
{
    T v = 0;
    for (std::size_t i = sizeof(T); i-- > 0;) v = static_cast<T>((v << 8) | p[i]);
    return v;
}

}  // namespace

HeaderBytes serialize_header(const BlockHeader& h) noexcept
{
    HeaderBytes out{};
    std::uint8_t* p = out.data();
    put_le(p, h.version);
    std::copy(h.parent_hash.bytes.begin(), h.parent_hash.bytes.end(), p + 4);
    std::copy(h.payload_commitment.bytes.begin(), h.payload_commitment.bytes.end(), p + 36);
    put_le(p + 68, h.timestamp);
    put_le(p + 76, h.compact_target);
    put_le(p + 80, h.nonce);
    return out;
}

BlockHeader deserialize_header(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() != kHeaderSize)
        throw MalformedHeader("header must be 88 bytes, got " + std::to_string(bytes.size()));
    const std::uint8_t* p = bytes.data();
    BlockHeader h;
    h.version = get_le<std::uint32_t>(p);
    std::copy(p + 4, p + 36, h.parent_hash.bytes.begin());
    std::copy(p + 36, p + 68, h.payload_commitment.bytes.begin());
    h.timestamp = get_le<std::uint64_t>(p + 68);
    h.compact_target = get_le<std::uint32_t>(p + 76);
    h.nonce = get_le<std::uint64_t>(p + 80);
    return h;
}

bool meets_target(const Digest256& d, const Target& t) { return digest_to_uint(d) < t.value(); }

Digest256 header_hash(const BlockHeader& h, const WeightMatrix& m)
{
    const auto bytes = serialize_header(h);
    return heavyhash(m, bytes);
}

namespace {

std::uint64_t clamp_count(std::uint64_t start, std::uint64_t count)
{
    return std::min(count, std::numeric_limits<std::uint64_t>::max() - start);
}

void check_template(const BlockHeader& templ, const Target& t)
{
    if (decode_compact(templ.compact_target) != t)
        throw InvalidTarget("template compact_target does not encode the mining target");
}

// Scans [begin, end) and returns the first hit or `end`.
std::uint64_t scan(HeaderBytes bytes, const WeightMatrix& m, const U256& target, std::uint64_t begin,
                   std::uint64_t end, const std::atomic<std::uint64_t>* stop_at = nullptr)
{
    for (std::uint64_t n = begin; n < end; ++n) {
        if (stop_at && (n & 0xFF) == 0 && stop_at->load(std::memory_order_relaxed) < n) return end;
        put_le(bytes.data() + 80, n);
        if (digest_to_uint(heavyhash(m, bytes)) < target) return n;
    }
    return end;
}

}  // namespace

std::optional<std::uint64_t> mine_serial(const BlockHeader& templ, const WeightMatrix& m, const Target& t,
                                         std::uint64_t nonce_start, std::uint64_t nonce_count)
{
    check_template(templ, t);
    nonce_count = clamp_count(nonce_start, nonce_count);
    const std::uint64_t end = nonce_start + nonce_count;
    const std::uint64_t hit = scan(serialize_header(templ), m, t.value(), nonce_start, end);
    if (hit == end) return std::nullopt;
    return hit;
}

std::optional<std::uint64_t> mine(const BlockHeader& templ, const WeightMatrix& m, const Target& t,
                                  std::uint64_t nonce_start, std::uint64_t nonce_count)
{
    check_template(templ, t);
    nonce_count = clamp_count(nonce_start, nonce_count);
    if (nonce_count == 0) return std::nullopt;

    constexpr std::uint64_t kChunk = 1024;
    const std::uint64_t chunks = (nonce_count + kChunk - 1) / kChunk;
    const std::uint64_t none = std::numeric_limits<std::uint64_t>::max();
    std::atomic<std::uint64_t> best{none};
    const HeaderBytes bytes = serialize_header(templ);
    const U256 target = t.value();

#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t c = 0; c < static_cast<std::int64_t>(chunks); ++c) {
        const std::uint64_t begin = nonce_start + static_cast<std::uint64_t>(c) * kChunk;
        if (begin > best.load(std::memory_order_relaxed)) continue;
        const std::uint64_t end = begin + std::min<std::uint64_t>(kChunk, nonce_start + nonce_count - begin);
        const std::uint64_t hit = scan(bytes, m, target, begin, end, &best);
        if (hit != end) {
            std::uint64_t cur = best.load();
            while (hit < cur && !best.compare_exchange_weak(cur, hit)) {
            }
        }
    }
    const std::uint64_t found = best.load();
    if (found == none) return std::nullopt;
    return found;
}

void RetargetParams::validate() const
{
    if (window == 0 || expected_interval == 0 || clamp_num == 0 || clamp_den == 0)
        throw std::invalid_argument("retarget parameters must be positive");
    if (clamp_num <= clamp_den) throw std::invalid_argument("retarget clamp factor must exceed 1");
}

Target retarget(std::span<const std::uint64_t> timestamps, const Target& current, const RetargetParams& p)
{
    p.validate();
    if (timestamps.size() != p.window + 1)
        throw InvalidWindow("retarget needs window + 1 = " + std::to_string(p.window + 1) + " timestamps, got " +
                            std::to_string(timestamps.size()));
    for (std::size_t i = 1; i < timestamps.size(); ++i)
        if (timestamps[i] <= timestamps[i - 1]) throw InvalidWindow("retarget timestamps must strictly increase");

    const U512 actual = timestamps.back() - timestamps.front();
    const U512 expected = U512(p.window) * p.expected_interval;
    const U512 cur = current.value();

    // ratio = actual / expected, compared against num/den and den/num
    U512 next;
    if (actual * p.clamp_den > expected * p.clamp_num) {
        next = cur * p.clamp_num / p.clamp_den;
    } else if (actual * p.clamp_num < expected * p.clamp_den) {
        next = cur * p.clamp_den / p.clamp_num;
    } else {
        next = cur * actual / expected;
    }
    if (next >= kTwo256) next = U512(kMaxU256);
    if (next == 0) next = 1;
    return Target(static_cast<U256>(next));
}

U256 work_from_target(const Target& t)
{
    return static_cast<U256>(kTwo256 / (U512(t.value()) + 1));
}

}  // namespace opow

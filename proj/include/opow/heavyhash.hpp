#pragma once

// HeavyHash: SHA-256 composed with a 4-bit integer matrix-vector weighting.
//
//   d = SHA-256(input)
//   x = nibbles(d)                      64 entries in [0, 15]
//   y = M x                             exact integers, y_i <= 64*15*15 = 14400
//   t_i = (y_i >> 10) & 0xF             top nibble of the 14-bit accumulator
//   out = SHA-256(bytes(x XOR t))
//
// Everything on the consensus path is integer arithmetic.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "opow/digest.hpp"
#include "opow/xoshiro.hpp"

namespace opow {

struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

inline constexpr std::size_t kNibbles = 64;
inline constexpr unsigned kTruncateShift = 10;
inline constexpr unsigned kNibbleBits = 4;

struct NibbleVector {
    std::array<std::uint8_t, kNibbles> entries{};

    std::uint8_t operator[](std::size_t i) const { return entries[i]; }
    std::uint8_t& operator[](std::size_t i) { return entries[i]; }
    friend bool operator==(const NibbleVector&, const NibbleVector&) = default;
};

NibbleVector digest_to_nibbles(const Digest256& d) noexcept;
Digest256 nibbles_to_digest(const NibbleVector& x) noexcept;

// n x n matrix of 4-bit entries, row-major. n is 64 for consensus, 16 for the
// photonic demo mode.
class WeightMatrix {
public:
    WeightMatrix() = default;
    WeightMatrix(std::size_t dim, std::vector<std::uint8_t> entries, Digest256 seed = {});

    std::size_t dim() const noexcept { return dim_; }
    std::uint8_t operator()(std::size_t r, std::size_t c) const noexcept { return entries_[r * dim_ + c]; }
    std::span<const std::uint8_t> row(std::size_t r) const noexcept { return {entries_.data() + r * dim_, dim_}; }
    std::span<const std::uint8_t> entries() const noexcept { return entries_; }
    const Digest256& seed() const noexcept { return seed_; }

    // Number of candidates drawn before a full-rank one was found (1 = first).
    std::size_t attempts() const noexcept { return attempts_; }
    void set_attempts(std::size_t a) noexcept { attempts_ = a; }

    static WeightMatrix identity(std::size_t dim);

    friend bool operator==(const WeightMatrix& a, const WeightMatrix& b)
    {
        return a.dim_ == b.dim_ && a.entries_ == b.entries_;
    }

private:
    std::size_t dim_ = 0;
    std::vector<std::uint8_t> entries_;
    Digest256 seed_{};
    std::size_t attempts_ = 1;
};

struct HeavyHashParams {
    unsigned rounds = 1;
    std::size_t matrix_dim = 64;
    unsigned truncate_shift = kTruncateShift;
    unsigned nibble_bits = kNibbleBits;

    // Throws ParameterError when any field is outside its allowed set.
    void validate() const;
};

// One candidate drawn row-major from the stream, 16 nibbles per 64-bit output
// starting at the least-significant nibble.
std::vector<std::uint8_t> draw_candidate(Xoshiro256pp& rng, std::size_t dim);

// Deterministic full-rank matrix from a seed; rank failures redraw from the
// same stream.
WeightMatrix generate_matrix(const Digest256& seed, std::size_t dim = kNibbles);

// Exact rank over the rationals by fraction-free (Bareiss) elimination on
// arbitrary-precision integers.
std::size_t matrix_rank_bareiss(std::size_t dim, std::span<const std::int64_t> entries);

// True iff the rank over the rationals equals dim. A nonzero determinant
// modulo 2^61-1 certifies full rank; otherwise falls back to Bareiss.
bool matrix_is_full_rank(std::size_t dim, std::span<const std::int64_t> entries);
bool matrix_is_full_rank(std::size_t dim, std::span<const std::uint8_t> entries);
inline bool matrix_is_full_rank(const WeightMatrix& m) { return matrix_is_full_rank(m.dim(), m.entries()); }

// y = M x for one block of m.dim() entries.
void accumulate(const WeightMatrix& m, std::span<const std::uint8_t> x, std::span<std::uint32_t> y);

// t_i = (y_i >> 10) & 0xF. A 16x16 matrix is applied block-diagonally to the
// four consecutive 16-entry slices of x.
NibbleVector weighting(const WeightMatrix& m, const NibbleVector& x);

// bytes(x XOR weighting(m, x)) for x = nibbles(inner); the string fed to the
// outer hash.
Digest256 recombine(const WeightMatrix& m, const Digest256& inner);

Digest256 heavyhash(const HeavyHashParams& p, const WeightMatrix& m, std::span<const std::uint8_t> input);
inline Digest256 heavyhash(const WeightMatrix& m, std::span<const std::uint8_t> input)
{
    return heavyhash(HeavyHashParams{}, m, input);
}

}  // namespace opow

#include "opow/heavyhash.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <string>

namespace opow {

NibbleVector digest_to_nibbles(const Digest256& d) noexcept
{
    NibbleVector x;
    for (std::size_t i = 0; i < 32; ++i) {
        x[2 * i] = d.bytes[i] >> 4;
        x[2 * i + 1] = d.bytes[i] & 0xF;
    }
    return x;
}

Digest256 nibbles_to_digest(const NibbleVector& x) noexcept
{
    Digest256 d;
    for (std::size_t i = 0; i < 32; ++i)
        d.bytes[i] = static_cast<std::uint8_t>(((x[2 * i] & 0xF) << 4) | (x[2 * i + 1] & 0xF));
    return d;
}

WeightMatrix::WeightMatrix(std::size_t dim, std::vector<std::uint8_t> entries, Digest256 seed)
    : dim_(dim), entries_(std::move(entries)), seed_(seed)
{
    if (dim_ == 0 || entries_.size() != dim_ * dim_)
        throw ParameterError("weight matrix entry count does not match dimension");
    if (std::any_of(entries_.begin(), entries_.end(), [](auto v) { return v > 0xF; }))
        throw ParameterError("weight matrix entries must be 4-bit");
}

WeightMatrix WeightMatrix::identity(std::size_t dim)
{
    std::vector<std::uint8_t> e(dim * dim, 0);
    for (std::size_t i = 0; i < dim; ++i) e[i * dim + i] = 1;
    return WeightMatrix(dim, std::move(e));
}

void HeavyHashParams::validate() const
{
    if (rounds < 1) throw ParameterError("rounds must be >= 1");
    if (matrix_dim != 16 && matrix_dim != 64) throw ParameterError("matrix_dim must be 16 or 64");
    if (truncate_shift != kTruncateShift) throw ParameterError("truncate_shift is fixed at 10");
    if (nibble_bits != kNibbleBits) throw ParameterError("nibble_bits is fixed at 4");
}

std::vector<std::uint8_t> draw_candidate(Xoshiro256pp& rng, std::size_t dim)
{
    std::vector<std::uint8_t> e(dim * dim);
    std::size_t filled = 0;
    while (filled < e.size()) {
        std::uint64_t v = rng();
        for (int k = 0; k < 16 && filled < e.size(); ++k, v >>= 4) e[filled++] = static_cast<std::uint8_t>(v & 0xF);
    }
    return e;
}

WeightMatrix generate_matrix(const Digest256& seed, std::size_t dim)
{
    if (dim != 16 && dim != 64) throw ParameterError("matrix_dim must be 16 or 64");
    auto rng = Xoshiro256pp::from_digest(seed);
    for (std::size_t attempt = 1;; ++attempt) {
        auto e = draw_candidate(rng, dim);
        if (matrix_is_full_rank(dim, std::span<const std::uint8_t>(e))) {
            WeightMatrix m(dim, std::move(e), seed);
            m.set_attempts(attempt);
            return m;
        }
    }
}

std::size_t matrix_rank_bareiss(std::size_t dim, std::span<const std::int64_t> entries)
{
    using boost::multiprecision::cpp_int;
    if (entries.size() != dim * dim) throw ParameterError("matrix entry count does not match dimension");

    std::vector<cpp_int> a(entries.begin(), entries.end());
    auto at = [&](std::size_t r, std::size_t c) -> cpp_int& { return a[r * dim + c]; };

    cpp_int prev = 1;
    std::size_t rank = 0;
    for (std::size_t col = 0; col < dim && rank < dim; ++col) {
        std::size_t piv = rank;
        while (piv < dim && at(piv, col) == 0) ++piv;
        if (piv == dim) continue;
        if (piv != rank)
            for (std::size_t c = 0; c < dim; ++c) std::swap(at(piv, c), at(rank, c));

        const cpp_int& p = at(rank, col);
        for (std::size_t r = rank + 1; r < dim; ++r) {
            for (std::size_t c = col + 1; c < dim; ++c) {
                at(r, c) = (p * at(r, c) - at(r, col) * at(rank, c)) / prev;
            }
            at(r, col) = 0;
        }
        prev = p;
        ++rank;
    }
    return rank;
}

namespace {

constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b)
{
    unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    std::uint64_t lo = static_cast<std::uint64_t>(p & kMersenne61);
    std::uint64_t hi = static_cast<std::uint64_t>(p >> 61);
    std::uint64_t s = lo + hi;
    return s >= kMersenne61 ? s - kMersenne61 : s;
}

std::uint64_t powmod(std::uint64_t b, std::uint64_t e)
{
    std::uint64_t r = 1;
    while (e) {
        if (e & 1) r = mulmod(r, b);
        b = mulmod(b, b);
        e >>= 1;
    }
    return r;
}

std::uint64_t to_field(std::int64_t v)
{
    std::int64_t m = v % static_cast<std::int64_t>(kMersenne61);
    if (m < 0) m += static_cast<std::int64_t>(kMersenne61);
    return static_cast<std::uint64_t>(m);
}

// Nonzero determinant mod p implies nonzero determinant over the integers.
bool full_rank_mod_p(std::size_t dim, std::span<const std::int64_t> entries)
{
    std::vector<std::uint64_t> a(entries.size());
    std::transform(entries.begin(), entries.end(), a.begin(), to_field);
    for (std::size_t col = 0; col < dim; ++col) {
        std::size_t piv = col;
        while (piv < dim && a[piv * dim + col] == 0) ++piv;
        if (piv == dim) return false;
        if (piv != col)
            for (std::size_t c = 0; c < dim; ++c) std::swap(a[piv * dim + c], a[col * dim + c]);
        const std::uint64_t inv = powmod(a[col * dim + col], kMersenne61 - 2);
        for (std::size_t r = col + 1; r < dim; ++r) {
            std::uint64_t f = mulmod(a[r * dim + col], inv);
            if (f == 0) continue;
            const std::uint64_t neg = kMersenne61 - f;
            for (std::size_t c = col; c < dim; ++c) {
                std::uint64_t v = a[r * dim + c] + mulmod(neg, a[col * dim + c]);
                a[r * dim + c] = v >= kMersenne61 ? v - kMersenne61 : v;
            }
        }
    }
    return true;
}

}  // namespace

bool matrix_is_full_rank(std::size_t dim, std::span<const std::int64_t> entries)
{
    if (entries.size() != dim * dim) throw ParameterError("matrix entry count does not match dimension");
    if (full_rank_mod_p(dim, entries)) return true;
    return matrix_rank_bareiss(dim, entries) == dim;
}

bool matrix_is_full_rank(std::size_t dim, std::span<const std::uint8_t> entries)
{
    std::vector<std::int64_t> wide(entries.begin(), entries.end());
    return matrix_is_full_rank(dim, std::span<const std::int64_t>(wide));
}

void accumulate(const WeightMatrix& m, std::span<const std::uint8_t> x, std::span<std::uint32_t> y)
{
    const std::size_t n = m.dim();
    if (x.size() != n || y.size() != n) throw ParameterError("weighting dimension mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        auto row = m.row(i);
        std::uint32_t acc = 0;
        for (std::size_t j = 0; j < n; ++j) acc += std::uint32_t{row[j]} * x[j];
        y[i] = acc;
    }
}

NibbleVector weighting(const WeightMatrix& m, const NibbleVector& x)
{
    const std::size_t n = m.dim();
    if (n == 0 || kNibbles % n != 0) throw ParameterError("matrix dimension must divide 64");
    NibbleVector t;
    std::array<std::uint32_t, kNibbles> y{};
    for (std::size_t off = 0; off < kNibbles; off += n) {
        accumulate(m, std::span(x.entries).subspan(off, n), std::span(y).subspan(off, n));
    }
    for (std::size_t i = 0; i < kNibbles; ++i) t[i] = static_cast<std::uint8_t>((y[i] >> kTruncateShift) & 0xF);
    return t;
}

Digest256 recombine(const WeightMatrix& m, const Digest256& inner)
{
    const NibbleVector x = digest_to_nibbles(inner);
    const NibbleVector t = weighting(m, x);
    NibbleVector z;
    for (std::size_t i = 0; i < kNibbles; ++i) z[i] = x[i] ^ t[i];
    return nibbles_to_digest(z);
}

Digest256 heavyhash(const HeavyHashParams& p, const WeightMatrix& m, std::span<const std::uint8_t> input)
{
    p.validate();
    if (m.dim() != p.matrix_dim)
        throw ParameterError("matrix dimension " + std::to_string(m.dim()) + " does not match params " +
                             std::to_string(p.matrix_dim));
    Digest256 out = sha256(recombine(m, sha256(input)).view());
    for (unsigned r = 1; r < p.rounds; ++r) out = sha256(recombine(m, sha256(out.view())).view());
    return out;
}

}  // namespace opow

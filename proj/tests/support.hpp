#pragma once

// Shared helpers for the unit and acceptance binaries: fixture loading,
// seeded random inputs, and test-side oracles that share no code with the
// library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "opow/digest.hpp"
#include "opow/heavyhash.hpp"

namespace testsupport {

inline std::map<std::string, std::string> load_golden()
{
    std::ifstream in(OPOW_GOLDEN_PATH);
    if (!in) throw std::runtime_error("missing golden fixture " + std::string(OPOW_GOLDEN_PATH));
    std::map<std::string, std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream fields(line);
        std::string key, value;
        if (fields >> key >> value) out[key] = value;
    }
    return out;
}

inline opow::Digest256 random_digest(std::mt19937_64& rng)
{
    opow::Digest256 d;
    for (auto& b : d.bytes) b = static_cast<std::uint8_t>(rng());
    return d;
}

inline opow::Bytes random_bytes(std::mt19937_64& rng, std::size_t n)
{
    opow::Bytes b(n);
    for (auto& v : b) v = static_cast<std::uint8_t>(rng());
    return b;
}

inline opow::NibbleVector random_nibbles(std::mt19937_64& rng)
{
    opow::NibbleVector x;
    for (auto& v : x.entries) v = static_cast<std::uint8_t>(rng() & 0xF);
    return x;
}

// Plain dot-product weighting, straight from the definition.
inline opow::NibbleVector naive_weighting(const opow::WeightMatrix& m, const opow::NibbleVector& x)
{
    opow::NibbleVector t;
    const std::size_t n = m.dim();
    for (std::size_t block = 0; block < opow::kNibbles; block += n) {
        for (std::size_t i = 0; i < n; ++i) {
            long y = 0;
            for (std::size_t j = 0; j < n; ++j) y += long(m(i, j)) * x[block + j];
            t[block + i] = static_cast<std::uint8_t>((y >> 10) & 0xF);
        }
    }
    return t;
}

// One-sided Jacobi SVD: orthogonalizes the columns of A by plane rotations;
// the column norms converge to the singular values. Returns them sorted
// descending.
inline std::vector<double> jacobi_singular_values(std::vector<std::vector<double>> a)
{
    const std::size_t n = a.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double alpha = 0, beta = 0, gamma = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    alpha += a[i][p] * a[i][p];
                    beta += a[i][q] * a[i][q];
                    gamma += a[i][p] * a[i][q];
                }
                if (gamma == 0) continue;
                off = std::max(off, std::abs(gamma) / std::sqrt(alpha * beta));
                const double zeta = (beta - alpha) / (2 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1 + zeta * zeta));
                const double c = 1 / std::sqrt(1 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < n; ++i) {
                    const double ap = a[i][p];
                    const double aq = a[i][q];
                    a[i][p] = c * ap - s * aq;
                    a[i][q] = s * ap + c * aq;
                }
            }
        }
        if (off < 1e-15) break;
    }
    std::vector<double> sv(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += a[i][j] * a[i][j];
        sv[j] = std::sqrt(s);
    }
    std::sort(sv.rbegin(), sv.rend());
    return sv;
}

inline std::vector<std::vector<double>> to_dense(const opow::WeightMatrix& m)
{
    std::vector<std::vector<double>> a(m.dim(), std::vector<double>(m.dim()));
    for (std::size_t r = 0; r < m.dim(); ++r)
        for (std::size_t c = 0; c < m.dim(); ++c) a[r][c] = m(r, c);
    return a;
}

}  // namespace testsupport

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "support.hpp"

#include "opow/photonic.hpp"

using namespace opow;
using namespace opow::photonic;

namespace {

constexpr double kPi = std::numbers::pi;

MeshConfiguration random_config(std::size_t n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> th(0, kPi / 2), ph(0, 2 * kPi);
    auto c = MeshConfiguration::identity(n);
    for (auto& layer : c.layers)
        for (auto& node : layer) node = {th(rng), ph(rng)};
    for (auto& a : c.output_phases) a = ph(rng);
    return c;
}

CVector random_field(std::size_t n, std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    CVector v(static_cast<Eigen::Index>(n));
    for (auto& x : v) x = Complex(g(rng), g(rng));
    return v;
}

double max_abs(const CMatrix& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_SUITE("photonic")
{
    TEST_CASE("modulator transfer and nibble encoding")
    {
        CHECK(mzm_amplitude(kPi) == doctest::Approx(0).epsilon(1e-15));
        CHECK(mzm_amplitude(0) == 1.0);
        CHECK(mzm_amplitude(kPi / 2) == doctest::Approx(0.7071067811865476));
        CHECK(drive_phase(0) == doctest::Approx(kPi));
        CHECK(drive_phase(15) == 0.0);

        std::vector<std::uint8_t> x(16, 0);
        x[1] = 15;
        x[2] = 8;
        const auto f = encode_nibbles(x);
        CHECK(f.size() == 16);
        CHECK(std::abs(f.amplitudes[0]) < 1e-15);
        CHECK(f.amplitudes[1].real() == doctest::Approx(1.0));
        CHECK(f.amplitudes[2].real() == doctest::Approx(8.0 / 15));
        for (std::uint8_t v = 0; v < 16; ++v) CHECK(mzm_amplitude(drive_phase(v)) == doctest::Approx(v / 15.0));

        CHECK_THROWS_AS(OpticalField(CVector::Zero(3)), std::invalid_argument);
        CVector bad = CVector::Zero(2);
        bad[0] = Complex(std::nan(""), 0);
        CHECK_THROWS_AS(OpticalField{bad}, std::invalid_argument);
    }

    TEST_CASE("coupler matrices")
    {
        CHECK(max_abs(coupler_unitary({0, 0}) - Eigen::Matrix2cd::Identity()) < 1e-15);
        Eigen::Matrix2cd split;
        split << 1, Complex(0, 1), Complex(0, 1), 1;
        split /= std::sqrt(2.0);
        CHECK(max_abs(coupler_unitary({kPi / 4, 0}) - split) < 1e-15);
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> u(0, 2 * kPi);
        for (int i = 0; i < 200; ++i) {
            const auto c = coupler_unitary({u(rng) / 4, u(rng)});
            REQUIRE(unitarity_residual(c) < 1e-12);
        }
    }

    TEST_CASE("mesh unitaries are unitary and conserve power")
    {
        for (std::size_t n : {2u, 16u, 64u}) {
            CHECK(max_abs(mesh_unitary(MeshConfiguration::identity(n)) - CMatrix::Identity(n, n)) < 1e-15);
            CHECK(MeshConfiguration::identity(n).node_count() == n * (n - 1) / 2);
        }
        std::mt19937_64 rng(2);
        for (int i = 0; i < 20; ++i) {
            const std::size_t n = i % 2 ? 16 : 64;
            const auto c = random_config(n, rng);
            const CMatrix u = mesh_unitary(c);
            REQUIRE(unitarity_residual(u) < 1e-10);
            const CVector x = random_field(n, rng);
            const CVector y = apply_mesh(c, x);
            CHECK(std::abs(y.norm() - x.norm()) < 1e-10);
            CHECK((y - u * x).cwiseAbs().maxCoeff() < 1e-10);
        }
    }

    TEST_CASE("decomposition of the identity is the zero configuration")
    {
        const auto c = clements_decompose(CMatrix::Identity(16, 16));
        for (const auto& layer : c.layers)
            for (const auto& node : layer) {
                CHECK(node.theta == doctest::Approx(0));
                CHECK(node.phi == doctest::Approx(0));
            }
        for (double a : c.output_phases) CHECK(a == doctest::Approx(0));
    }

    TEST_CASE("single 50:50 coupler is recovered")
    {
        CMatrix u = CMatrix::Identity(4, 4);
        u.block(0, 0, 2, 2) = coupler_unitary({kPi / 4, 0});
        const auto c = clements_decompose(u);
        CHECK(max_abs(mesh_unitary(c) - u) < 1e-12);
        int splitters = 0;
        for (std::size_t l = 0; l < c.layers.size(); ++l)
            for (std::size_t k = 0; k < c.layers[l].size(); ++k) {
                const double th = c.layers[l][k].theta;
                if (std::abs(th - kPi / 4) < 1e-12) {
                    ++splitters;
                    CHECK(MeshConfiguration::top_mode(l, k) == 0);
                } else {
                    CHECK(std::abs(th) < 1e-12);
                }
            }
        CHECK(splitters == 1);
    }

    TEST_CASE("round trips")
    {
        std::mt19937_64 rng(3);
        for (int i = 0; i < 30; ++i) {
            const std::size_t n = i % 3 == 0 ? 2 : 16;
            const auto u = mesh_unitary(random_config(n, rng));
            REQUIRE(max_abs(mesh_unitary(clements_decompose(u)) - u) < 1e-8);
        }
        for (std::size_t n : {3u, 5u, 8u}) {
            const auto u = random_unitary(n, 40 + n);
            CHECK(max_abs(mesh_unitary(clements_decompose(u)) - u) < 1e-8);
        }
        const auto big = random_unitary(64, 99);
        CHECK(unitarity_residual(big) < 1e-12);
        CHECK(max_abs(mesh_unitary(clements_decompose(big)) - big) < 1e-8);

        // Decomposed nodes stay inside their parameter ranges.
        for (const auto& layer : clements_decompose(random_unitary(16, 7)).layers)
            for (const auto& node : layer) {
                CHECK(node.theta >= 0);
                CHECK(node.theta <= kPi / 2 + 1e-12);
                CHECK(node.phi >= 0);
                CHECK(node.phi < 2 * kPi);
            }
    }

    TEST_CASE("non-unitary input is rejected with its residual")
    {
        CMatrix a = CMatrix::Identity(4, 4);
        a(0, 1) = 0.5;
        try {
            clements_decompose(a);
            FAIL("expected DecompositionError");
        } catch (const DecompositionError& e) {
            CHECK(e.residual == doctest::Approx(0.5));
        }
    }

    TEST_CASE("SVD synthesis")
    {
        const auto id = svd_synthesize(WeightMatrix::identity(16));
        CHECK(id.scale == doctest::Approx(1));
        for (double a : id.attenuation) CHECK(a == doctest::Approx(1));
        CHECK(max_abs(mesh_unitary(id.left) * mesh_unitary(id.right) - CMatrix::Identity(16, 16)) < 1e-12);

        const auto ones = svd_synthesize(WeightMatrix(4, std::vector<std::uint8_t>(16, 1)));
        CHECK(ones.singular_values[0] == doctest::Approx(4));
        for (int i = 1; i < 4; ++i) CHECK(std::abs(ones.singular_values[static_cast<std::size_t>(i)]) < 1e-12);
        CHECK(ones.residual < 1e-12);

        const auto golden = testsupport::load_golden();
        const auto m0 = generate_matrix(Digest256::zero());
        const auto s = svd_synthesize(m0);
        CHECK(s.residual < 1e-6);
        CHECK(s.scale == doctest::Approx(std::stod(golden.at("svd_scale"))).epsilon(1e-11));
        CHECK(s.singular_values.back() == doctest::Approx(std::stod(golden.at("svd_min"))).epsilon(1e-9));
        for (double a : s.attenuation) {
            CHECK(a >= 0);
            CHECK(a <= 1);
        }

        // Independent one-sided Jacobi iteration.
        const auto sv = testsupport::jacobi_singular_values(testsupport::to_dense(m0));
        REQUIRE(sv.size() == 64);
        CHECK(sv[0] == doctest::Approx(s.scale).epsilon(1e-12));
        for (std::size_t i = 0; i < 64; ++i) CHECK(std::abs(sv[i] - s.singular_values[i]) < 1e-9);
    }

    TEST_CASE("zero-noise analog weighting equals digital weighting")
    {
        const auto m0 = generate_matrix(Digest256::zero());
        const auto s = svd_synthesize(m0);
        const NoiseModel exact{0, 0, 24};
        std::mt19937_64 rng(4);
        for (int i = 0; i < 30; ++i) {
            const auto x = testsupport::random_nibbles(rng);
            const auto r = analog_weighting(s, x, exact, 1);
            REQUIRE(r.estimate == weighting(m0, x));
            std::vector<std::uint32_t> y(64);
            accumulate(m0, x.entries, y);
            for (std::size_t k = 0; k < 64; ++k) REQUIRE(r.accumulators[k] == y[k]);
        }

        const auto id = svd_synthesize(WeightMatrix::identity(64));
        CHECK(analog_weighting(id, testsupport::random_nibbles(rng), exact, 1).estimate == NibbleVector{});

        const auto m16 = generate_matrix(Digest256::zero(), 16);
        const auto s16 = svd_synthesize(m16);
        for (int i = 0; i < 10; ++i) {
            const auto x = testsupport::random_nibbles(rng);
            REQUIRE(analog_weighting(s16, x, exact, 1).estimate == weighting(m16, x));
        }
    }

    TEST_CASE("noise model validation")
    {
        CHECK_THROWS_AS((NoiseModel{-0.1, 0, 4}.validate()), std::invalid_argument);
        CHECK_THROWS_AS((NoiseModel{0, -1, 4}.validate()), std::invalid_argument);
        CHECK_THROWS_AS((NoiseModel{0, 0, 0}.validate()), std::invalid_argument);
        CHECK_NOTHROW((NoiseModel{0, 0, 1}.validate()));
    }

    TEST_CASE("fidelity sweep")
    {
        const auto m0 = generate_matrix(Digest256::zero());
        const auto s = svd_synthesize(m0);
        const std::vector<NoiseModel> grid = {{0, 0, 24}, {0.01, 0, 24}, {0.05, 0, 24}, {0.1, 0, 24}};
        const auto rows = fidelity_sweep(m0, s, grid, 200, 5);
        REQUIRE(rows.size() == 4);
        CHECK(rows[0].nibble_error_rate == 0);
        CHECK(rows[0].hash_mismatch_rate == 0);
        CHECK(rows[2].nibble_error_rate > 0);
        for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].nibble_error_rate >= rows[i - 1].nibble_error_rate);

        const auto serial = fidelity_sweep_serial(m0, s, grid, 200, 5);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            CHECK(serial[i].nibble_error_rate == rows[i].nibble_error_rate);
            CHECK(serial[i].hash_mismatch_rate == rows[i].hash_mismatch_rate);
        }

        const std::vector<NoiseModel> adc = {{0, 0, 1}, {0, 0, 24}};
        const auto q = fidelity_sweep(m0, s, adc, 200, 6);
        CHECK(q[0].nibble_error_rate > q[1].nibble_error_rate);

        const std::vector<NoiseModel> det = {{0, 0, 24}, {0, 1e-4, 24}, {0, 1e-3, 24}, {0, 1e-2, 24}};
        const auto d = fidelity_sweep(m0, s, det, 200, 7);
        for (std::size_t i = 1; i < d.size(); ++i) CHECK(d[i].nibble_error_rate >= d[i - 1].nibble_error_rate);

        CHECK_THROWS_AS(fidelity_sweep(m0, s, grid, 0, 1), std::invalid_argument);
        CHECK_THROWS_AS(fidelity_sweep(WeightMatrix::identity(16), s, grid, 10, 1), std::invalid_argument);
    }
}

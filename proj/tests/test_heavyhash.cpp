#include <bit>
#include <random>
#include <set>

#include "doctest.h"
#include "support.hpp"

#include "opow/digest.hpp"
#include "opow/heavyhash.hpp"
#include "opow/xoshiro.hpp"

using namespace opow;

TEST_SUITE("heavyhash")
{
    TEST_CASE("hex and sha256 basics")
    {
        CHECK(to_hex(sha256(std::string_view{})) ==
              "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
        CHECK(from_hex("0xABcd") == Bytes{0xab, 0xcd});
        CHECK(from_hex("").empty());
        CHECK_THROWS_AS(from_hex("abc"), HexError);
        CHECK_THROWS_AS(from_hex("zz"), HexError);
        CHECK_THROWS_AS(digest_from_hex("00"), HexError);
    }

    TEST_CASE("prng reference values")
    {
        // SplitMix64 from state 0 and xoshiro256++ from raw state {1,2,3,4}.
        CHECK(splitmix64(0) == 0xE220A8397B1DCDAFull);
        // With state words s, the first output is rotl(s0 + s3, 23) + s0.
        Xoshiro256pp rng(0, 0, 0, 0);
        const std::uint64_t s0 = splitmix64(0);
        CHECK(rng() == std::rotl(s0 + s0, 23) + s0);
    }

    TEST_CASE("nibble split")
    {
        Digest256 d{};
        d.bytes[0] = 0xAB;
        d.bytes[1] = 0xCD;
        const auto x = digest_to_nibbles(d);
        CHECK(x[0] == 10);
        CHECK(x[1] == 11);
        CHECK(x[2] == 12);
        CHECK(x[3] == 13);
        CHECK(digest_to_nibbles(Digest256::zero()) == NibbleVector{});

        std::mt19937_64 rng(1);
        for (int i = 0; i < 1000; ++i) {
            const auto r = testsupport::random_digest(rng);
            REQUIRE(nibbles_to_digest(digest_to_nibbles(r)) == r);
        }
    }

    TEST_CASE("full-rank check")
    {
        CHECK(matrix_is_full_rank(WeightMatrix::identity(64)));

        auto m = generate_matrix(Digest256::zero());
        std::vector<std::uint8_t> dup(m.entries().begin(), m.entries().end());
        std::copy(dup.begin(), dup.begin() + 64, dup.begin() + 64);
        CHECK_FALSE(matrix_is_full_rank(64, std::span<const std::uint8_t>(dup)));

        std::vector<std::int64_t> ones(64 * 64, 1);
        CHECK_FALSE(matrix_is_full_rank(64, std::span<const std::int64_t>(ones)));
        CHECK(matrix_rank_bareiss(64, ones) == 1);

        // A matrix singular only over the integers mod p must still be judged
        // by exact rank: diag(p, 1, ..., 1) with p = 2^61 - 1 is full rank.
        std::vector<std::int64_t> d(16 * 16, 0);
        for (int i = 0; i < 16; ++i) d[i * 16 + i] = 1;
        d[0] = (std::int64_t{1} << 61) - 1;
        CHECK(matrix_is_full_rank(16, std::span<const std::int64_t>(d)));
    }

    TEST_CASE("modular certificate agrees with exact elimination")
    {
        std::mt19937_64 rng(5);
        for (int trial = 0; trial < 60; ++trial) {
            const std::size_t n = 16;
            std::vector<std::int64_t> a(n * n);
            for (auto& v : a) v = static_cast<std::int64_t>(rng() % 16);
            // Make some of them singular with a combination of two rows.
            if (trial % 3 == 0)
                for (std::size_t c = 0; c < n; ++c) a[5 * n + c] = a[1 * n + c] + 2 * a[2 * n + c];
            const bool exact = matrix_rank_bareiss(n, a) == n;
            CHECK(matrix_is_full_rank(n, std::span<const std::int64_t>(a)) == exact);
            if (trial % 3 == 0) CHECK_FALSE(exact);
        }
    }

    TEST_CASE("matrix generation golden vectors")
    {
        const auto golden = testsupport::load_golden();
        const auto m = generate_matrix(digest_from_hex(golden.at("seed")));
        auto row_hex = [&](std::size_t r) {
            std::string s;
            for (auto v : m.row(r)) s += "0123456789abcdef"[v];
            return s;
        };
        CHECK(row_hex(0) == golden.at("matrix_row0"));
        CHECK(row_hex(63) == golden.at("matrix_row63"));
        CHECK(std::to_string(m.attempts()) == golden.at("candidates"));
        CHECK(m == generate_matrix(Digest256::zero()));
        CHECK(matrix_is_full_rank(m));
        CHECK(m.seed() == Digest256::zero());
    }

    TEST_CASE("generated matrices are deterministic and full rank")
    {
        std::mt19937_64 rng(11);
        for (int i = 0; i < 20; ++i) {
            const auto seed = testsupport::random_digest(rng);
            const auto a = generate_matrix(seed);
            CHECK(a == generate_matrix(seed));
            CHECK(matrix_is_full_rank(a));
            CHECK(a.dim() == 64);
        }
        const auto small = generate_matrix(Digest256::zero(), 16);
        CHECK(small.dim() == 16);
        CHECK(matrix_is_full_rank(small));
    }

    TEST_CASE("first candidate full-rank rate over 10^4 seeds")
    {
        std::mt19937_64 rng(2024);
        int full = 0;
        const int trials = 10000;
        for (int i = 0; i < trials; ++i) {
            auto prng = Xoshiro256pp::from_digest(testsupport::random_digest(rng));
            const auto cand = draw_candidate(prng, 64);
            full += matrix_is_full_rank(64, std::span<const std::uint8_t>(cand));
        }
        const double rate = double(full) / trials;
        MESSAGE("first-candidate full-rank rate: " << rate);
        CHECK(rate > 0.99);
    }

    TEST_CASE("weighting examples")
    {
        std::mt19937_64 rng(3);
        const auto x = testsupport::random_nibbles(rng);
        CHECK(weighting(WeightMatrix::identity(64), x) == NibbleVector{});

        WeightMatrix fifteens(64, std::vector<std::uint8_t>(64 * 64, 15));
        NibbleVector all15;
        all15.entries.fill(15);
        std::vector<std::uint32_t> y(64);
        accumulate(fifteens, all15.entries, y);
        CHECK(y[0] == 14400);
        for (auto v : weighting(fifteens, all15).entries) CHECK(v == 14);

        const auto golden = testsupport::load_golden();
        const auto m0 = generate_matrix(Digest256::zero());
        const auto t = weighting(m0, digest_to_nibbles(sha256(std::string_view{})));
        std::string hex;
        for (auto v : t.entries) hex += "0123456789abcdef"[v];
        CHECK(hex == golden.at("weighting_empty"));
    }

    TEST_CASE("weighting bounds and naive agreement")
    {
        std::mt19937_64 rng(4);
        const auto m = generate_matrix(testsupport::random_digest(rng));
        for (int i = 0; i < 300; ++i) {
            const auto x = testsupport::random_nibbles(rng);
            std::vector<std::uint32_t> y(64);
            accumulate(m, x.entries, y);
            for (auto v : y) REQUIRE(v <= 14400);
            const auto t = weighting(m, x);
            for (auto v : t.entries) REQUIRE(v <= 15);
            REQUIRE(t == testsupport::naive_weighting(m, x));
        }
        const auto m16 = generate_matrix(Digest256::zero(), 16);
        const auto x = testsupport::random_nibbles(rng);
        CHECK(weighting(m16, x) == testsupport::naive_weighting(m16, x));
    }

    TEST_CASE("heavyhash golden and identity mode")
    {
        const auto golden = testsupport::load_golden();
        const auto m0 = generate_matrix(Digest256::zero());
        CHECK(to_hex(heavyhash(m0, {})) == golden.at("heavyhash_empty"));

        std::mt19937_64 rng(6);
        const auto id = WeightMatrix::identity(64);
        for (int i = 0; i < 50; ++i) {
            const auto in = testsupport::random_bytes(rng, rng() % 200);
            CHECK(heavyhash(id, in) == sha256(sha256(in).view()));
        }
    }

    TEST_CASE("heavyhash composition, rounds and parameters")
    {
        const auto m = generate_matrix(Digest256::zero());
        const Bytes in = {1, 2, 3};
        const auto inner = sha256(in);
        CHECK(heavyhash(m, in) == sha256(recombine(m, inner).view()));

        HeavyHashParams two;
        two.rounds = 2;
        CHECK(heavyhash(two, m, in) == heavyhash(m, heavyhash(m, in).view()));

        HeavyHashParams p16;
        p16.matrix_dim = 16;
        CHECK_THROWS_AS(heavyhash(p16, m, in), ParameterError);
        const auto m16 = generate_matrix(Digest256::zero(), 16);
        CHECK_NOTHROW(heavyhash(p16, m16, in));
        CHECK_THROWS_AS(heavyhash(HeavyHashParams{}, m16, in), ParameterError);

        HeavyHashParams bad;
        bad.rounds = 0;
        CHECK_THROWS_AS(bad.validate(), ParameterError);
        bad = {};
        bad.matrix_dim = 32;
        CHECK_THROWS_AS(bad.validate(), ParameterError);
        bad = {};
        bad.truncate_shift = 9;
        CHECK_THROWS_AS(bad.validate(), ParameterError);
    }

    TEST_CASE("avalanche over 1000 flips")
    {
        const auto m = generate_matrix(Digest256::zero());
        std::mt19937_64 rng(7);
        double total = 0;
        const int trials = 1000;
        for (int i = 0; i < trials; ++i) {
            auto in = testsupport::random_bytes(rng, 80);
            const auto a = heavyhash(m, in);
            in[rng() % in.size()] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
            const auto b = heavyhash(m, in);
            int flips = 0;
            for (int k = 0; k < 32; ++k) flips += std::popcount(static_cast<unsigned>(a.bytes[k] ^ b.bytes[k]));
            total += flips / 256.0;
        }
        const double mean = total / trials;
        CHECK(mean >= 0.47);
        CHECK(mean <= 0.53);
    }

    TEST_CASE("recombination preserves distinct inner digests")
    {
        const auto m = generate_matrix(Digest256::zero());
        std::mt19937_64 rng(8);
        std::set<Digest256> inner, outer;
        while (inner.size() < 2000) {
            const auto d = testsupport::random_digest(rng);
            if (inner.insert(d).second) outer.insert(recombine(m, d));
        }
        CHECK(outer.size() == inner.size());
    }

    TEST_CASE("weight matrix validation")
    {
        CHECK_THROWS_AS(WeightMatrix(4, std::vector<std::uint8_t>(15, 0)), ParameterError);
        CHECK_THROWS_AS(WeightMatrix(2, std::vector<std::uint8_t>{1, 2, 3, 16}), ParameterError);
    }
}

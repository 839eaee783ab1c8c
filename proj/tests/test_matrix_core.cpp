#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "skewrnn/skew_matrix.hpp"

using namespace skewrnn;

namespace {

void expect_exact_skew(const SkewMatrix& a)
{
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < a.dim(); ++j) ASSERT_EQ(a(i, j) + a(j, i), 0.0) << i << "," << j;
}

} // namespace

TEST(RandomSkew, TwoByTwoForm)
{
    const auto a = make_random_skew(2, 1.0, 7);
    EXPECT_EQ(a(0, 0), 0.0);
    EXPECT_EQ(a(1, 1), 0.0);
    EXPECT_NE(a(1, 0), 0.0);
    EXPECT_EQ(a(0, 1), -a(1, 0));
    EXPECT_EQ(std::get<RandomGaussian>(a.origin()), (RandomGaussian{1.0, 7}));
}

TEST(RandomSkew, OneByOneIsZero)
{
    const auto a = make_random_skew(1, 1.0, 3);
    ASSERT_EQ(a.dim(), 1u);
    EXPECT_EQ(a(0, 0), 0.0);
}

TEST(RandomSkew, RejectsBadArguments)
{
    EXPECT_THROW(make_random_skew(0, 1.0, 1), ConfigError);
    EXPECT_THROW(make_random_skew(3, 0.0, 1), ConfigError);
    EXPECT_THROW(make_random_skew(3, -1.0, 1), ConfigError);
    EXPECT_THROW(make_random_skew_uniform_scaled(0, 1), ConfigError);
}

TEST(RandomSkew, SameSeedIsBitIdentical)
{
    EXPECT_EQ(make_random_skew(17, 0.3, 99), make_random_skew(17, 0.3, 99));
    EXPECT_NE(make_random_skew(17, 0.3, 99).entries()[1], make_random_skew(17, 0.3, 100).entries()[1]);
    EXPECT_EQ(make_random_skew_uniform_scaled(9, 5), make_random_skew_uniform_scaled(9, 5));
}

TEST(RandomSkew, ExactSkewForEveryConstruction)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::size_t dim = 1 + seed * 2;
        expect_exact_skew(make_random_skew(dim, 10.0, seed));
        expect_exact_skew(make_random_skew_uniform_scaled(dim, seed));
        expect_exact_skew(make_random_skew(dim, 0.7, seed).scaled(3.3));
    }
}

TEST(RandomSkew, HalfNormalMeanOfEntries)
{
    // E|N(0, s^2)| = s * sqrt(2/pi)
    const double expected = 0.1 * std::sqrt(2.0 / std::numbers::pi);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const auto a = make_random_skew(4, 0.1, seed);
        for (std::size_t i = 1; i < 4; ++i)
            for (std::size_t j = 0; j < i; ++j) {
                sum += std::abs(a(i, j));
                ++count;
            }
    }
    EXPECT_NEAR(sum / static_cast<double>(count), expected, 0.05 * expected);
}

TEST(UniformScaled, Bounds)
{
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        EXPECT_LT(std::abs(make_random_skew_uniform_scaled(2, seed)(1, 0)), 0.5);
        for (double v : make_random_skew_uniform_scaled(40, seed).entries()) EXPECT_LT(std::abs(v), 0.025);
    }
    EXPECT_EQ(std::get<RandomUniformScaled>(make_random_skew_uniform_scaled(40, 1).origin()).bound, 1.0 / 40.0);
}

TEST(UniformScaled, EntryVariance)
{
    // Var U(-b, b) = b^2 / 3
    const double expected = (1.0 / 20.0) * (1.0 / 20.0) / 3.0;
    std::vector<double> values;
    for (std::uint64_t seed = 7; values.size() < 10000; ++seed) {
        const auto a = make_random_skew_uniform_scaled(20, seed);
        for (std::size_t i = 1; i < 20; ++i)
            for (std::size_t j = 0; j < i; ++j) values.push_back(a(i, j));
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size() - 1);
    EXPECT_NEAR(var, expected, 0.1 * expected);
}

TEST(BlockDiagonal, Layout)
{
    const auto a = make_block_diagonal({1.0});
    EXPECT_EQ(std::vector<double>(a.entries().begin(), a.entries().end()), (std::vector<double>{0, -1, 1, 0}));

    const auto b = make_block_diagonal({5.0, 10.0});
    ASSERT_EQ(b.dim(), 4u);
    EXPECT_EQ(b(0, 1), -5.0);
    EXPECT_EQ(b(1, 0), 5.0);
    EXPECT_EQ(b(2, 3), -10.0);
    EXPECT_EQ(b(3, 2), 10.0);
    EXPECT_EQ(std::count(b.entries().begin(), b.entries().end(), 0.0), 12);
    EXPECT_EQ(std::get<BlockDiagonal>(b.origin()).freqs, (std::vector<double>{5.0, 10.0}));

    const auto z = make_block_diagonal({0.0});
    for (double v : z.entries()) EXPECT_EQ(v, 0.0);

    EXPECT_THROW(make_block_diagonal(std::span<const double>{}), ConfigError);
}

TEST(FromEntries, RejectsNonSkewInput)
{
    EXPECT_NO_THROW(SkewMatrix::from_entries(2, {0, -2, 2, 0}));
    EXPECT_THROW(SkewMatrix::from_entries(2, {0, -2, 2.0000001, 0}), ConfigError);
    EXPECT_THROW(SkewMatrix::from_entries(2, {1, -2, 2, 0}), ConfigError);
    EXPECT_THROW(SkewMatrix::from_entries(2, {0, -2, 2}), DimensionError);
}

TEST(EigenFrequencies, Examples)
{
    auto f = eigen_frequencies(make_block_diagonal({1.0}));
    ASSERT_EQ(f.omegas.size(), 1u);
    EXPECT_NEAR(f.omegas[0], 1.0, 1e-14);
    EXPECT_EQ(f.zero_modes, 0u);

    f = eigen_frequencies(make_block_diagonal({5.0, 10.0}));
    ASSERT_EQ(f.omegas.size(), 2u);
    EXPECT_NEAR(f.omegas[0], 5.0, 1e-12);
    EXPECT_NEAR(f.omegas[1], 10.0, 1e-12);

    f = eigen_frequencies(make_random_skew(1, 1.0, 1));
    EXPECT_TRUE(f.omegas.empty());
    EXPECT_EQ(f.zero_modes, 1u);
}

TEST(EigenFrequencies, BlockDiagonalRecoversSortedMagnitudes)
{
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> freq(-20.0, 20.0);
    std::uniform_int_distribution<int> count(1, 12);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> freqs(static_cast<std::size_t>(count(gen)));
        for (double& w : freqs) w = freq(gen);
        if (trial % 10 == 0) freqs.push_back(0.0);
        std::vector<double> expected;
        for (double w : freqs) expected.push_back(std::abs(w));
        std::sort(expected.begin(), expected.end());

        const auto f = eigen_frequencies(make_block_diagonal(freqs));
        ASSERT_EQ(f.omegas.size(), expected.size());
        EXPECT_EQ(f.zero_modes, 0u);
        for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(f.omegas[i], expected[i], 1e-10);
        EXPECT_EQ(2 * f.omegas.size() + f.zero_modes, 2 * freqs.size());
    }
}

TEST(EigenFrequencies, AgreesWithGeneralEigensolver)
{
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const std::size_t dim = 2 + seed % 39;
        const auto a = make_random_skew(dim, 1.0, seed);
        const auto f = eigen_frequencies(a);
        EXPECT_EQ(2 * f.omegas.size() + f.zero_modes, dim);
        const auto ref = oracle::positive_frequencies(a);
        ASSERT_EQ(ref.size(), f.omegas.size());
        const double scale = f.omegas.empty() ? 1.0 : f.omegas.back();
        for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(f.omegas[i], ref[i], 1e-9 * scale) << "dim " << dim;
    }
}

TEST(SkewExpm, QuarterRotation)
{
    const auto a = SkewMatrix::from_entries(2, {0, -1, 1, 0});
    const auto x = skew_expm_apply(a, std::numbers::pi / 2, std::vector<double>{1, 0});
    EXPECT_NEAR(x[0], 0.0, 1e-10);
    EXPECT_NEAR(x[1], 1.0, 1e-10);
}

TEST(SkewExpm, ZeroTimeIsIdentity)
{
    const auto a = make_random_skew(6, 2.0, 4);
    const std::vector<double> x0{0.1, -2, 3.5, 1e-3, 7, -0.25};
    EXPECT_EQ(skew_expm_apply(a, 0.0, x0), x0);
    EXPECT_EQ(skew_expm_apply(make_block_diagonal({3.0, 4.0, 5.0}), 0.0, x0), x0);
}

TEST(SkewExpm, FullPeriodReturns)
{
    const auto a = SkewMatrix::from_entries(2, {0, -1, 1, 0});
    const auto x = skew_expm_apply(a, 2 * std::numbers::pi, std::vector<double>{0.3, 0.7});
    EXPECT_NEAR(x[0], 0.3, 1e-9);
    EXPECT_NEAR(x[1], 0.7, 1e-9);
}

TEST(SkewExpm, RejectsDimensionMismatch)
{
    EXPECT_THROW(skew_expm_apply(make_random_skew(3, 1.0, 1), 1.0, std::vector<double>{1, 2}), DimensionError);
}

TEST(SkewExpm, MatchesPadeExponential)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::size_t dim = 2 + seed;
        const auto a = make_random_skew(dim, 1.0, seed);
        std::vector<double> x(dim);
        for (std::size_t i = 0; i < dim; ++i) x[i] = std::cos(static_cast<double>(i + seed));
        for (double t : {0.01, 0.7, 5.0, 40.0}) {
            const auto got = skew_expm_apply(a, t, x);
            const auto ref = oracle::expm_apply(a, t, x);
            EXPECT_LT(oracle::max_abs_diff(got, ref), 1e-10 * norm2(x)) << "dim " << dim << " t " << t;
        }
    }
}

TEST(SkewExpm, BlockShortcutMatchesSeries)
{
    const auto block = make_block_diagonal({0.5, 2.0, 7.0});
    const auto plain = SkewMatrix::from_entries(6, std::vector<double>(block.entries().begin(), block.entries().end()));
    const std::vector<double> x{1, 2, -1, 0.5, 0.25, -3};
    for (double t : {0.1, 1.0, 13.0}) {
        EXPECT_LT(oracle::max_abs_diff(skew_expm_apply(block, t, x), skew_expm_apply(plain, t, x)), 1e-11);
    }
}

TEST(SkewExpm, PreservesNormAndSemigroup)
{
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const std::size_t dim = 1 + seed % 12;
        const auto a = make_random_skew(dim, 1.0 + static_cast<double>(seed % 4), seed);
        std::vector<double> x(dim);
        for (double& v : x) v = unit(gen);
        const double s = 3.0 * unit(gen);
        const double t = 3.0 * unit(gen);

        const auto xt = skew_expm_apply(a, t, x);
        EXPECT_NEAR(norm2(xt), norm2(x), 1e-10 * std::max(1.0, norm2(x)));

        const auto composed = skew_expm_apply(a, s, xt);
        const auto direct = skew_expm_apply(a, s + t, x);
        EXPECT_LT(oracle::max_abs_diff(composed, direct), 1e-9);
    }
}

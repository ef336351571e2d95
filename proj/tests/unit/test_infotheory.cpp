#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "hsiband/infotheory.hpp"
#include "support/oracles.hpp"

using namespace hsiband;
using hsiband::testing::oracle_entropy;
using hsiband::testing::oracle_mutual_information;

namespace {

const std::vector<std::uint8_t>& all(std::size_t n) {
    static std::vector<std::uint8_t> ones;
    ones.assign(n, 1);
    return ones;
}

JointHistogram random_table(std::mt19937_64& rng, std::size_t nx, std::size_t ny) {
    std::vector<std::uint64_t> c(nx * ny);
    for (auto& v : c) v = rng() % 4 == 0 ? 0 : rng() % 50;
    c[rng() % c.size()] += 1;
    return JointHistogram::from_counts(nx, ny, std::move(c));
}

}  // namespace

TEST(Entropy, KnownValues) {
    EXPECT_EQ(entropy(Histogram::from_counts({1, 1})), 1.0);
    EXPECT_EQ(entropy(Histogram::from_counts({4})), 0.0);
    EXPECT_EQ(entropy(Histogram::from_counts({1, 1, 1, 1})), 2.0);
    EXPECT_EQ(entropy(Histogram::from_counts({0, 3, 0, 3})), 1.0);
}

TEST(Entropy, EmptyHistogramIsDomainError) {
    EXPECT_THROW(entropy(Histogram::from_counts({0, 0})), domain_error);
    EXPECT_THROW(entropy(Histogram{}), domain_error);
}

TEST(Entropy, BoundedByLogOfSupport) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 200; ++t) {
        std::vector<std::uint64_t> c(1 + rng() % 20);
        for (auto& v : c) v = rng() % 10;
        c[0] += 1;
        const auto nonzero = std::count_if(c.begin(), c.end(), [](auto v) { return v > 0; });
        const double h = entropy(Histogram::from_counts(c));
        EXPECT_GE(h, 0.0);
        EXPECT_LE(h, std::log2(static_cast<double>(nonzero)) + 1e-12);
    }
}

TEST(JointHistogramBuild, IdenticalSequencesAreDiagonal) {
    const std::vector<int> x{0, 1, 0, 1};
    const auto j = joint_histogram(std::span<const int>(x), std::span<const int>(x),
                                   std::span<const std::uint8_t>(all(4)));
    EXPECT_EQ(j.at(0, 0), 2u);
    EXPECT_EQ(j.at(1, 1), 2u);
    EXPECT_EQ(j.at(0, 1), 0u);
    EXPECT_EQ(j.at(1, 0), 0u);
}

TEST(JointHistogramBuild, GridSequencesFillEveryCell) {
    const std::vector<int> x{0, 0, 1, 1};
    const std::vector<int> y{0, 1, 0, 1};
    const auto j = joint_histogram(std::span<const int>(x), std::span<const int>(y),
                                   std::span<const std::uint8_t>(all(4)));
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) EXPECT_EQ(j.at(a, b), 1u);
}

TEST(JointHistogramBuild, SingletonMask) {
    const std::vector<int> x{2, 0, 1};
    const std::vector<int> y{1, 1, 0};
    const std::vector<std::uint8_t> mask{1, 0, 0};
    const auto j = joint_histogram(std::span<const int>(x), std::span<const int>(y),
                                   std::span<const std::uint8_t>(mask));
    EXPECT_EQ(j.total(), 1u);
    EXPECT_EQ(j.at(2, 1), 1u);
}

TEST(JointHistogramBuild, Errors) {
    const std::vector<int> x{0, 1, 2};
    const std::vector<int> y{0, 1};
    EXPECT_THROW(joint_histogram(std::span<const int>(x), std::span<const int>(y),
                                 std::span<const std::uint8_t>(all(3))),
                 domain_error);
    const std::vector<std::uint8_t> none(3, 0);
    EXPECT_THROW(joint_histogram(std::span<const int>(x), std::span<const int>(x),
                                 std::span<const std::uint8_t>(none)),
                 domain_error);
}

TEST(JointHistogramBuild, MarginalsMatchOneDimensionalHistograms) {
    std::mt19937_64 rng(8);
    std::vector<int> x(300), y(300);
    std::vector<std::uint8_t> mask(300);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = static_cast<int>(rng() % 7);
        y[i] = static_cast<int>(rng() % 5);
        mask[i] = rng() % 3 != 0;
    }
    const auto j = joint_histogram(std::span<const int>(x), std::span<const int>(y),
                                   std::span<const std::uint8_t>(mask));
    const auto hx = histogram(std::span<const int>(x), std::span<const std::uint8_t>(mask));
    const auto hy = histogram(std::span<const int>(y), std::span<const std::uint8_t>(mask));
    EXPECT_EQ(j.marginal_x().counts, hx.counts);
    EXPECT_EQ(j.marginal_y().counts, hy.counts);
    EXPECT_EQ(j.total(), hx.total);
}

TEST(MutualInformation, KnownValues) {
    EXPECT_EQ(mutual_information(JointHistogram::from_counts(2, 2, {2, 0, 0, 2})), 1.0);
    EXPECT_EQ(mutual_information(JointHistogram::from_counts(2, 2, {1, 1, 1, 1})), 0.0);
    // Term-by-term evaluation in 30-digit arithmetic:
    // (2/3) log2(4/3) + (1/3) log2(2/3)
    EXPECT_NEAR(mutual_information(JointHistogram::from_counts(2, 2, {2, 1, 1, 2})),
                0.0817041659455104852129277227188, 1e-15);
}

TEST(MutualInformation, NonnegativeSymmetricAndChainIdentity) {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 500; ++t) {
        const auto j = random_table(rng, 1 + rng() % 9, 1 + rng() % 9);
        const double mi = mutual_information(j);
        EXPECT_GE(mi, 0.0);
        EXPECT_EQ(mi, mutual_information(j.transpose()));
        const double chain = entropy(j.marginal_x()) + entropy(j.marginal_y()) - joint_entropy(j);
        EXPECT_LT(std::abs(mi - chain), 1e-9);
    }
}

TEST(MutualInformation, SelfInformationIsEntropy) {
    std::mt19937_64 rng(12);
    for (int t = 0; t < 200; ++t) {
        std::vector<int> x(1 + rng() % 200);
        const int k = 1 + static_cast<int>(rng() % 12);
        for (auto& v : x) v = static_cast<int>(rng() % k);
        const auto mask = all(x.size());
        const double mi = mutual_information(std::span<const int>(x), std::span<const int>(x),
                                             std::span<const std::uint8_t>(mask));
        const double h = entropy(histogram(std::span<const int>(x)));
        EXPECT_NEAR(mi, h, 1e-12);
    }
}

TEST(MutualInformation, MatchesBruteForceOracleOnSmallAlphabets) {
    std::mt19937_64 rng(13);
    for (int t = 0; t < 2000; ++t) {
        const std::size_t n = 1 + rng() % 12;
        const int ax = 1 + static_cast<int>(rng() % 4);
        const int ay = 1 + static_cast<int>(rng() % 4);
        std::vector<int> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = static_cast<int>(rng() % ax);
            y[i] = static_cast<int>(rng() % ay);
        }
        const auto mask = all(n);
        const double mi = mutual_information(std::span<const int>(x), std::span<const int>(y),
                                             std::span<const std::uint8_t>(mask));
        ASSERT_LE(std::abs(mi - static_cast<double>(oracle_mutual_information(x, y))), 1e-12)
            << "trial " << t;
        ASSERT_LE(std::abs(entropy(histogram(std::span<const int>(x))) -
                           static_cast<double>(oracle_entropy(x))),
                  1e-12);
    }
}

TEST(ConditionalEntropy, IdentityAndClamp) {
    EXPECT_EQ(conditional_entropy(4.0, 2.0), 2.0);
    EXPECT_EQ(conditional_entropy(1.0, 1.0), 0.0);
    EXPECT_EQ(conditional_entropy(1.0, 1.0000001), 0.0);
    EXPECT_THROW(conditional_entropy(-0.1, 0.0), domain_error);
}

TEST(Fano, KnownBrackets) {
    const auto a = fano_bounds(1.0, 16);
    EXPECT_EQ(a.lower, 0.0);
    EXPECT_EQ(a.upper, 0.25);
    const auto b = fano_bounds(2.0, 16);
    EXPECT_EQ(b.lower, 0.25);
    EXPECT_EQ(b.upper, 0.5);
    const auto c = fano_bounds(0.0, 16);
    EXPECT_EQ(c.lower, 0.0);
    EXPECT_EQ(c.upper, 0.0);
    EXPECT_EQ(c.class_count, 16u);
}

TEST(Fano, RequiresTwoClasses) {
    EXPECT_THROW(fano_bounds(1.0, 1), domain_error);
    EXPECT_THROW(fano_bounds(1.0, 0), domain_error);
}

TEST(Fano, OrderedAndDecreasingInInformation) {
    const double hc = 4.0;
    for (std::size_t nc : {2u, 5u, 16u}) {
        double prev_lower = HUGE_VAL, prev_upper = HUGE_VAL;
        for (double i = 0.0; i <= hc + 0.5; i += 0.01) {
            const auto f = fano_bounds(conditional_entropy(hc, i), nc);
            EXPECT_LE(f.lower, f.upper);
            EXPECT_LE(f.lower, prev_lower);
            EXPECT_LE(f.upper, prev_upper);
            prev_lower = f.lower;
            prev_upper = f.upper;
        }
    }
}

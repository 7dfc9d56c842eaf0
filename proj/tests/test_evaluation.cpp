#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "kgraph/evaluation.hpp"

using namespace kgraph;

namespace {

std::vector<int> relabel(const std::vector<int>& l, const std::vector<int>& map) {
    std::vector<int> out;
    for (int v : l) out.push_back(map[static_cast<std::size_t>(v)]);
    return out;
}

} // namespace

TEST(Ari, Examples) {
    EXPECT_EQ(ari(std::vector{0, 0, 1, 1}, std::vector{1, 1, 0, 0}), 1.0);
    EXPECT_EQ(ari(std::vector{0, 0, 1, 1}, std::vector{0, 1, 0, 1}), -0.5);
    EXPECT_EQ(ari(std::vector{0, 0, 0, 0}, std::vector{0, 0, 0, 0}), 1.0);
    EXPECT_EQ(ari(std::vector{0, 1, 2, 3}, std::vector{3, 2, 1, 0}), 1.0);
    EXPECT_EQ(ari(std::vector{0, 0, 0, 0}, std::vector{0, 1, 2, 3}), 0.0);
}

TEST(Ari, Errors) {
    EXPECT_THROW(ari(std::vector{0, 1}, std::vector{0}), DataError);
    EXPECT_THROW(ari(std::vector{0}, std::vector{0}), DataError);
}

TEST(Ari, MatchesPairOracle) {
    Rng rng(101);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + uniform_index(rng, 199);
        const auto a = fixtures::random_labels(rng, n, 1 + uniform_index(rng, 8));
        const auto b = fixtures::random_labels(rng, n, 1 + uniform_index(rng, 8));
        ASSERT_NEAR(ari(a, b), fixtures::ari_pair_oracle(a, b), 1e-12) << "trial " << trial;
    }
}

TEST(Ari, SymmetricAndLabelPermutationInvariant) {
    Rng rng(102);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + uniform_index(rng, 100);
        const auto a = fixtures::random_labels(rng, n, 4);
        const auto b = fixtures::random_labels(rng, n, 3);
        ASSERT_EQ(ari(a, b), ari(b, a));
        ASSERT_EQ(ari(a, b), ari(relabel(a, {2, 0, 3, 1}), relabel(b, {1, 2, 0})));
        ASSERT_LE(ari(a, b), 1.0);
        ASSERT_EQ(ari(a, a), 1.0);
    }
}

TEST(RandIndex, ExamplesAndOracle) {
    EXPECT_DOUBLE_EQ(rand_index(std::vector{0, 0, 1, 1}, std::vector{0, 1, 0, 1}), 1.0 / 3.0);
    EXPECT_EQ(rand_index(std::vector{0, 0, 0}, std::vector{0, 1, 2}), 0.0);
    EXPECT_EQ(rand_index(std::vector{0, 0, 1}, std::vector{5, 5, 2}), 1.0);
    Rng rng(103);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + uniform_index(rng, 120);
        const auto a = fixtures::random_labels(rng, n, 5);
        const auto b = fixtures::random_labels(rng, n, 2);
        ASSERT_NEAR(rand_index(a, b), fixtures::rand_index_oracle(a, b), 1e-12);
    }
}

TEST(Nmi, Examples) {
    EXPECT_NEAR(nmi(std::vector{0, 0, 1, 1}, std::vector{1, 1, 0, 0}), 1.0, 1e-12);
    EXPECT_NEAR(nmi(std::vector{0, 0, 1, 1}, std::vector{0, 1, 0, 1}), 0.0, 1e-12);
    EXPECT_EQ(nmi(std::vector{0, 0, 0}, std::vector{0, 0, 0}), 1.0);
    EXPECT_EQ(nmi(std::vector{0, 0, 0}, std::vector{0, 1, 2}), 0.0);
}

TEST(Nmi, IndependentLabelsNearZero) {
    Rng rng(104);
    const auto a = fixtures::random_labels(rng, 10000, 3);
    const auto b = fixtures::random_labels(rng, 10000, 3);
    EXPECT_LE(nmi(a, b), 0.05);
    EXPECT_GE(nmi(a, b), 0.0);
}

TEST(Nmi, BoundedAndSymmetric) {
    Rng rng(105);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + uniform_index(rng, 80);
        const auto a = fixtures::random_labels(rng, n, 4);
        const auto b = fixtures::random_labels(rng, n, 4);
        ASSERT_NEAR(nmi(a, b), nmi(b, a), 1e-12);
        ASSERT_GE(nmi(a, b), 0.0);
        ASSERT_LE(nmi(a, b), 1.0);
    }
}

TEST(Purity, Examples) {
    EXPECT_EQ(purity(std::vector{0, 0, 1, 1}, std::vector{1, 1, 0, 0}), 1.0);
    EXPECT_EQ(purity(std::vector{0, 0, 0, 0}, std::vector{0, 0, 1, 1}), 0.5);
    EXPECT_EQ(purity(std::vector{0, 0, 0, 1}, std::vector{0, 0, 1, 1}), 0.75);
}

TEST(ScoreAll, BundlesMeasures) {
    const std::vector a{0, 0, 1, 1}, b{0, 1, 0, 1};
    const auto s = score_all(a, b);
    EXPECT_EQ(s.ari, -0.5);
    EXPECT_DOUBLE_EQ(s.ri, 1.0 / 3.0);
    EXPECT_EQ(s.purity, 0.5);
}

TEST(Baseline, AlignedSineSquareSeparated) {
    const auto d = fixtures::sine_square(20, 128, 0.1, 7, 0.0);
    const auto p = baseline_kmeans(d, 2, 42);
    EXPECT_GE(ari(p.labels, *d.true_labels), 0.9);
}

TEST(Baseline, SingleClusterAndDeterminism) {
    const auto d = fixtures::sine_square(10, 64, 0.2, 3);
    EXPECT_EQ(baseline_kmeans(d, 1, 0).labels, std::vector<int>(20, 0));
    EXPECT_EQ(baseline_kmeans(d, 2, 5).labels, baseline_kmeans(d, 2, 5).labels);
}

TEST(Baseline, TruncatesToShortestSeries) {
    auto d = fixtures::sine_square(5, 64, 0.1, 3, 0.2);
    d.series[3].values.resize(40);
    const auto p = baseline_kmeans(d, 2, 1);
    EXPECT_EQ(p.labels.size(), 10u);
}

#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "oracles.hpp"

// Sanity checks on the reference implementations themselves.

TEST(Oracles, ViterbiRefusesLongSequences) {
    std::vector<std::array<double, 3>> rows(11, {0.0, 0.0, 0.0});
    std::array<std::array<double, 3>, 4> trans{};
    EXPECT_THROW(oracle::viterbi(rows, trans), std::length_error);
}

TEST(Oracles, ViterbiTieIsLexicographicallySmallest) {
    std::vector<std::array<double, 3>> rows(3, {-1.0, -1.0, -1.0});
    std::array<std::array<double, 3>, 4> trans{};
    trans[0][1] = trans[3][1] = -INFINITY;
    EXPECT_EQ(oracle::viterbi(rows, trans), (std::vector<int>{0, 0, 0}));
}

TEST(Oracles, IsinCheckDigit) {
    EXPECT_EQ(oracle::isin_check_digit("US037833100"), '5');
    EXPECT_EQ(oracle::isin_check_digit("DE000BAY001"), '7');
}

TEST(Oracles, MatchingWeight) {
    // Greedy takes 0.9 and is left with 0.1; optimum pairs 0.8 + 0.8.
    std::vector<std::vector<double>> w = {{0.9, 0.8}, {0.8, 0.1}};
    EXPECT_NEAR(oracle::best_matching_weight(w), 1.6, 1e-12);
    const auto g = oracle::greedy_pairs(w);
    ASSERT_EQ(g.size(), 2u);
    EXPECT_EQ(g[0], std::make_pair(std::size_t{0}, std::size_t{0}));
}

TEST(Oracles, IouCharSets) {
    EXPECT_NEAR(oracle::iou({{0, 10}}, {{5, 15}}), 1.0 / 3.0, 1e-15);
    EXPECT_DOUBLE_EQ(oracle::iou({}, {}), 1.0);
}

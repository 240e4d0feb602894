#pragma once

// Brute-force reference implementations. None of these call into the code
// they are used to check.

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "elig/doc_model.hpp"

namespace oracle {

// Tags as 0=B, 1=I, 2=O. Enumerates all 3^m sequences (m <= 10, otherwise
// throws std::length_error), drops those with start->I or O->I, and returns the
// best one; ties go to the lexicographically smallest.
std::vector<int> viterbi(const std::vector<std::array<double, 3>>& emissions,
                         const std::array<std::array<double, 3>, 4>& transitions);

double sequence_score(const std::vector<std::array<double, 3>>& emissions,
                      const std::array<std::array<double, 3>, 4>& transitions, const std::vector<int>& tags);

std::set<std::size_t> char_set(const std::vector<elig::Interval>& fragments);
double iou(const std::vector<elig::Interval>& a, const std::vector<elig::Interval>& b);

// Check digit by the "double every other digit counting from the left of an
// odd/even-length string" formulation.
bool isin_valid(const std::string& code);
char isin_check_digit(const std::string& prefix11);

struct Counts {
    std::size_t tp = 0, pred = 0, gold = 0;
};
// Exact-mode true positives by repeated linear search and removal.
Counts exact_counts(const std::vector<elig::Annotation>& pred, const std::vector<elig::Annotation>& gold);

// Maximum total IoU over all one-to-one matchings restricted to IoU > 0.
// Sets of at most 4 x 4.
double best_matching_weight(const std::vector<std::vector<double>>& weights);

// Greedy by repeated full scans: take the largest remaining weight (ties to the
// smallest row, then column).
std::vector<std::pair<std::size_t, std::size_t>> greedy_pairs(const std::vector<std::vector<double>>& weights);

}  // namespace oracle

namespace testgen {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * (static_cast<double>(gen_() >> 11) * 0x1.0p-53); }
    bool chance(double p) { return uniform(0.0, 1.0) < p; }

private:
    std::mt19937_64 gen_;
};

// Random fragments within [0, limit), sorted, pairwise disjoint.
std::vector<elig::Interval> random_fragments(Rng& rng, std::size_t limit, std::size_t max_fragments);

// Rows of log-probabilities; with `coarse` the logits come from a small set
// so exact ties are common.
std::vector<std::array<double, 3>> random_log_rows(Rng& rng, std::size_t m, bool coarse);

}  // namespace testgen

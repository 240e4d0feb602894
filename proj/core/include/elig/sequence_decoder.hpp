#pragma once

#include <array>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "elig/bio_codec.hpp"

namespace elig {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Per-token log-domain scores for one target type; columns ordered B, I, O.
struct LabelGrid {
    TargetType type = TargetType::currency;
    std::vector<std::array<double, 3>> scores;

    std::size_t size() const noexcept { return scores.size(); }
};

// Rows: start, B, I, O. Columns: B, I, O.
struct TransitionMatrix {
    enum Row : std::size_t { kStart = 0, kFromB = 1, kFromI = 2, kFromO = 3 };
    std::array<std::array<double, 3>, 4> weights{};

    double at(std::size_t from_row, BioTag to) const noexcept {
        return weights[from_row][static_cast<std::size_t>(to)];
    }
    static std::size_t row_of(BioTag from) noexcept { return static_cast<std::size_t>(from) + 1; }
};

// Throws InputError if an entry is non-finite.
void check_grid(const LabelGrid& grid);
// Throws InputError unless start->I and O->I are -inf and everything else is finite.
void check_transitions(const TransitionMatrix& trans);

// Hard BIO constraints only: 0 for allowed transitions, -inf for start->I and O->I.
TransitionMatrix default_bio_transitions();

// Per-token argmax with ties resolved B, then I, then O. Not necessarily
// transition-valid; decode_bio repairs stray I tags.
TaggedSequence greedy_decode(const LabelGrid& grid);

// Highest-scoring transition-valid sequence; among equal scores the
// lexicographically smallest under B < I < O.
TaggedSequence constrained_viterbi(const LabelGrid& grid, const TransitionMatrix& trans);

// Emission plus transition score of a tag sequence; -inf if it uses a forbidden
// transition.
double sequence_score(const LabelGrid& grid, const TransitionMatrix& trans, const std::vector<BioTag>& tags);

// Geometric mean of P(B) at range.begin and P(I) on the remaining tokens.
// Rows in the range must exponentiate to a distribution (tolerance 1e-6),
// otherwise NormalizationError.
double span_confidence(const LabelGrid& grid, TokenRange range);

// Four lines of three numbers (rows start,B,I,O; columns B,I,O). "-inf" spells
// negative infinity; '#' starts a comment. Throws FormatError.
TransitionMatrix read_transitions(std::istream& in);
TransitionMatrix load_transitions(const std::string& path);
std::string format_transitions(const TransitionMatrix& trans);

}  // namespace elig

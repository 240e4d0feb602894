#include "elig/sequence_decoder.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "elig/errors.hpp"

namespace elig {

namespace {

constexpr std::array<BioTag, 3> kTags = {BioTag::B, BioTag::I, BioTag::O};

bool forbidden(std::size_t row, std::size_t col) noexcept {
    return col == static_cast<std::size_t>(BioTag::I) &&
           (row == TransitionMatrix::kStart || row == TransitionMatrix::kFromO);
}

}  // namespace

void check_grid(const LabelGrid& grid) {
    for (std::size_t t = 0; t < grid.scores.size(); ++t)
        for (double v : grid.scores[t])
            if (!std::isfinite(v)) throw InputError("label grid row " + std::to_string(t) + " has a non-finite score");
}

void check_transitions(const TransitionMatrix& trans) {
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t c = 0; c < 3; ++c) {
            const double w = trans.weights[r][c];
            if (forbidden(r, c)) {
                if (!(std::isinf(w) && w < 0))
                    throw InputError("transition (" + std::to_string(r) + "," + std::to_string(c) + ") must be -inf");
            } else if (!std::isfinite(w)) {
                throw InputError("transition (" + std::to_string(r) + "," + std::to_string(c) + ") must be finite");
            }
        }
    }
}

TransitionMatrix default_bio_transitions() {
    TransitionMatrix m;
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 3; ++c) m.weights[r][c] = forbidden(r, c) ? kNegInf : 0.0;
    return m;
}

TaggedSequence greedy_decode(const LabelGrid& grid) {
    TaggedSequence out{grid.type, {}};
    out.tags.reserve(grid.size());
    for (const auto& row : grid.scores) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < 3; ++c)
            if (row[c] > row[best]) best = c;
        out.tags.push_back(kTags[best]);
    }
    return out;
}

TaggedSequence constrained_viterbi(const LabelGrid& grid, const TransitionMatrix& trans) {
    TaggedSequence out{grid.type, {}};
    const std::size_t m = grid.size();
    if (m == 0) return out;

    // Scores accumulate left to right as ((prev + transition) + emission), the
    // same association a direct path sum uses, so equal paths compare equal.
    // Each state keeps its best prefix; among equal scores the smaller prefix
    // wins, which yields the lexicographically smallest optimum overall.
    std::array<double, 3> score{};
    std::array<std::vector<BioTag>, 3> prefix;
    for (std::size_t c = 0; c < 3; ++c) {
        score[c] = trans.weights[TransitionMatrix::kStart][c] + grid.scores[0][c];
        prefix[c] = {kTags[c]};
    }
    for (std::size_t t = 1; t < m; ++t) {
        std::array<double, 3> next{};
        std::array<std::vector<BioTag>, 3> next_prefix;
        for (std::size_t c = 0; c < 3; ++c) {
            int best = -1;
            double best_score = kNegInf;
            for (std::size_t p = 0; p < 3; ++p) {
                if (score[p] == kNegInf) continue;
                const double w = trans.weights[TransitionMatrix::row_of(kTags[p])][c];
                if (w == kNegInf) continue;
                const double s = (score[p] + w) + grid.scores[t][c];
                if (best < 0 || s > best_score || (s == best_score && prefix[p] < prefix[static_cast<std::size_t>(best)])) {
                    best = static_cast<int>(p);
                    best_score = s;
                }
            }
            next[c] = best_score;
            if (best >= 0) {
                next_prefix[c] = prefix[static_cast<std::size_t>(best)];
                next_prefix[c].push_back(kTags[c]);
            }
        }
        score = next;
        prefix = std::move(next_prefix);
    }
    std::size_t best = 3;
    for (std::size_t c = 0; c < 3; ++c) {
        if (score[c] == kNegInf) continue;
        if (best == 3 || score[c] > score[best] || (score[c] == score[best] && prefix[c] < prefix[best])) best = c;
    }
    // O is always reachable, so `best` is set for any finite grid.
    out.tags = std::move(prefix[best == 3 ? 2 : best]);
    return out;
}

double sequence_score(const LabelGrid& grid, const TransitionMatrix& trans, const std::vector<BioTag>& tags) {
    if (tags.size() != grid.size()) throw InputError("tag count differs from grid rows");
    double s = 0.0;
    std::size_t row = TransitionMatrix::kStart;
    for (std::size_t t = 0; t < tags.size(); ++t) {
        const double w = trans.at(row, tags[t]);
        if (w == kNegInf) return kNegInf;
        s = (s + w) + grid.scores[t][static_cast<std::size_t>(tags[t])];
        row = TransitionMatrix::row_of(tags[t]);
    }
    return s;
}

double span_confidence(const LabelGrid& grid, TokenRange range) {
    if (range.empty() || range.end > grid.size()) throw InputError("span outside label grid");
    double log_sum = 0.0;
    for (std::size_t t = range.begin; t < range.end; ++t) {
        const auto& row = grid.scores[t];
        const double total = std::exp(row[0]) + std::exp(row[1]) + std::exp(row[2]);
        if (std::abs(total - 1.0) > 1e-6)
            throw NormalizationError("label grid row " + std::to_string(t) + " sums to " + std::to_string(total) +
                                     " after exponentiation");
        log_sum += row[static_cast<std::size_t>(t == range.begin ? BioTag::B : BioTag::I)];
    }
    const double c = std::exp(log_sum / static_cast<double>(range.size()));
    return std::min(1.0, std::max(0.0, c));
}

TransitionMatrix read_transitions(std::istream& in) {
    TransitionMatrix m;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream fields(line);
        std::string field;
        std::vector<double> values;
        while (fields >> field) {
            if (field == "-inf") {
                values.push_back(kNegInf);
                continue;
            }
            try {
                std::size_t used = 0;
                const double v = std::stod(field, &used);
                if (used != field.size() || !std::isfinite(v)) throw std::invalid_argument(field);
                values.push_back(v);
            } catch (const std::exception&) {
                throw FormatError("transition table: cannot parse '" + field + "'");
            }
        }
        if (values.empty()) continue;
        if (values.size() != 3) throw FormatError("transition table: each row needs 3 values");
        if (row >= 4) throw FormatError("transition table: more than 4 rows");
        for (std::size_t c = 0; c < 3; ++c) m.weights[row][c] = values[c];
        ++row;
    }
    if (row != 4) throw FormatError("transition table: expected 4 rows, found " + std::to_string(row));
    try {
        check_transitions(m);
    } catch (const InputError& e) {
        throw FormatError(std::string("transition table: ") + e.what());
    }
    return m;
}

TransitionMatrix load_transitions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    return read_transitions(in);
}

std::string format_transitions(const TransitionMatrix& trans) {
    std::ostringstream out;
    out << "# rows: start B I O; columns: B I O\n";
    out.precision(17);
    for (const auto& row : trans.weights) {
        for (std::size_t c = 0; c < 3; ++c) {
            if (c) out << ' ';
            if (row[c] == kNegInf) out << "-inf";
            else out << row[c];
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace elig

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "elig/doc_model.hpp"
#include "elig/serialization.hpp"

namespace elig {

enum class BioTag : std::uint8_t { B = 0, I = 1, O = 2 };

inline constexpr std::size_t kBioLabelCount = 3;

char to_char(BioTag t) noexcept;
std::optional<BioTag> parse_bio_tag(std::string_view s) noexcept;

// Half-open token index range [begin, end).
struct TokenRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    bool empty() const noexcept { return end <= begin; }
    std::size_t size() const noexcept { return empty() ? 0 : end - begin; }
    friend auto operator<=>(const TokenRange&, const TokenRange&) = default;
};

struct TaggedSequence {
    TargetType type = TargetType::currency;
    std::vector<BioTag> tags;

    friend bool operator==(const TaggedSequence&, const TaggedSequence&) = default;
};

// No I at position 0 and no I directly after O.
bool is_transition_valid(std::span<const BioTag> tags) noexcept;

// Tokens overlapping the fragment by at least one character. Tokens are
// sorted and disjoint, so the result is contiguous; empty if the fragment
// falls into a gap.
TokenRange align_fragment_to_tokens(Interval fragment, std::span<const Token> tokens);

struct EncodeWarning {
    std::string annotation_id;
    Interval fragment;
    std::string message;
};

struct BioEncoding {
    TaggedSequence sequence;
    std::vector<EncodeWarning> warnings;
};

// Encodes annotations of `type` (others are ignored). Each fragment opens a new
// B unless it shares a token with the previous fragment of the same
// annotation. Throws OverlapError if two annotations claim one token.
BioEncoding encode_bio(std::span<const Token> tokens, std::span<const Annotation> annotations, TargetType type);

struct DecodedSpan {
    TokenRange tokens;
    bool repaired = false;  // began with an I that was read as B
};

// Maximal B I* runs; a stray I (sequence-initial or after O) starts a run.
std::vector<DecodedSpan> decode_spans(std::span<const BioTag> tags);

// Throws InputError if the tag count differs from the token count.
std::vector<Annotation> decode_bio(std::span<const Token> tokens, const TaggedSequence& seq,
                                   Source source = Source::model, double confidence = 1.0);

struct TrainingExample {
    std::string doc_id;
    TokenRange window;
    std::vector<std::string> tokens;
    std::map<TargetType, std::vector<BioTag>> labels;  // all 17 types

    friend bool operator==(const TrainingExample&, const TrainingExample&) = default;
};

inline constexpr std::size_t kDefaultMaxSeqLen = 256;
inline constexpr std::size_t kDefaultStride = 64;

// Window starts advance by `stride` tokens; the last window ends at the last
// token. Runs cut at a window start re-open with B. Throws InputError for bad
// parameters and OverlapError for same-type overlaps.
std::vector<TokenRange> plan_windows(std::size_t token_count, std::size_t max_seq_len, std::size_t stride);
std::vector<TrainingExample> build_training_examples(const Document& doc,
                                                     std::size_t max_seq_len = kDefaultMaxSeqLen,
                                                     std::size_t stride = kDefaultStride);

// {doc_id, window:[start,end), tokens:[...], labels:{type:["B","I","O",...]}}
Json to_json(const TrainingExample& ex);
TrainingExample training_example_from_json(const Json& j);

}  // namespace elig

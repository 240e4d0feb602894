#include "elig/bio_codec.hpp"

#include <algorithm>

#include "elig/errors.hpp"

namespace elig {

char to_char(BioTag t) noexcept {
    switch (t) {
        case BioTag::B: return 'B';
        case BioTag::I: return 'I';
        case BioTag::O: return 'O';
    }
    return 'O';
}

std::optional<BioTag> parse_bio_tag(std::string_view s) noexcept {
    if (s == "B") return BioTag::B;
    if (s == "I") return BioTag::I;
    if (s == "O") return BioTag::O;
    return std::nullopt;
}

bool is_transition_valid(std::span<const BioTag> tags) noexcept {
    for (std::size_t i = 0; i < tags.size(); ++i) {
        if (tags[i] != BioTag::I) continue;
        if (i == 0 || tags[i - 1] == BioTag::O) return false;
    }
    return true;
}

TokenRange align_fragment_to_tokens(Interval fragment, std::span<const Token> tokens) {
    if (fragment.empty()) return {};
    // first token ending after fragment.start
    auto lo = std::partition_point(tokens.begin(), tokens.end(),
                                   [&](const Token& t) { return t.end <= fragment.start; });
    auto hi = std::partition_point(lo, tokens.end(), [&](const Token& t) { return t.start < fragment.end; });
    const auto b = static_cast<std::size_t>(lo - tokens.begin());
    const auto e = static_cast<std::size_t>(hi - tokens.begin());
    if (b >= e) return {};
    return {b, e};
}

BioEncoding encode_bio(std::span<const Token> tokens, std::span<const Annotation> annotations, TargetType type) {
    BioEncoding out;
    out.sequence.type = type;
    out.sequence.tags.assign(tokens.size(), BioTag::O);
    // owner[i] = index into `annotations` of the annotation tagging token i
    std::vector<std::size_t> owner(tokens.size(), static_cast<std::size_t>(-1));

    auto label = [&](std::size_t idx) {
        const auto& a = annotations[idx];
        return a.id.empty() ? "#" + std::to_string(idx) : a.id;
    };

    for (std::size_t ai = 0; ai < annotations.size(); ++ai) {
        const auto& a = annotations[ai];
        if (a.type != type) continue;
        std::size_t prev_end = 0;
        bool have_prev = false;
        for (const auto& frag : a.fragments) {
            const auto range = align_fragment_to_tokens(frag, tokens);
            if (range.empty()) {
                out.warnings.push_back({label(ai), frag, "fragment overlaps no token; skipped"});
                continue;
            }
            // A fragment sharing a token with the previous one continues its run.
            const bool continues = have_prev && range.begin < prev_end;
            for (std::size_t t = range.begin; t < range.end; ++t) {
                if (owner[t] == ai) continue;
                if (owner[t] != static_cast<std::size_t>(-1)) throw OverlapError(label(owner[t]), label(ai), t);
                owner[t] = ai;
                const bool opens = t == range.begin && !continues;
                out.sequence.tags[t] = opens ? BioTag::B : BioTag::I;
            }
            prev_end = std::max(prev_end, range.end);
            have_prev = true;
        }
    }
    return out;
}

std::vector<DecodedSpan> decode_spans(std::span<const BioTag> tags) {
    std::vector<DecodedSpan> spans;
    std::size_t i = 0;
    while (i < tags.size()) {
        if (tags[i] == BioTag::O) {
            ++i;
            continue;
        }
        DecodedSpan s;
        s.repaired = tags[i] == BioTag::I;
        s.tokens.begin = i++;
        while (i < tags.size() && tags[i] == BioTag::I) ++i;
        s.tokens.end = i;
        spans.push_back(s);
    }
    return spans;
}

std::vector<Annotation> decode_bio(std::span<const Token> tokens, const TaggedSequence& seq, Source source,
                                   double confidence) {
    if (seq.tags.size() != tokens.size())
        throw InputError("tag count " + std::to_string(seq.tags.size()) + " differs from token count " +
                         std::to_string(tokens.size()));
    std::vector<Annotation> out;
    for (const auto& s : decode_spans(seq.tags)) {
        Annotation a;
        a.type = seq.type;
        a.fragments.push_back({tokens[s.tokens.begin].start, tokens[s.tokens.end - 1].end});
        a.source = source;
        a.confidence = confidence;
        out.push_back(std::move(a));
    }
    return out;
}

std::vector<TokenRange> plan_windows(std::size_t token_count, std::size_t max_seq_len, std::size_t stride) {
    if (max_seq_len < 2) throw InputError("max_seq_len must be >= 2");
    if (stride < 1 || stride > max_seq_len) throw InputError("stride must be in [1, max_seq_len]");
    std::vector<TokenRange> windows;
    if (token_count == 0) return windows;
    for (std::size_t start = 0;; start += stride) {
        const std::size_t end = std::min(start + max_seq_len, token_count);
        windows.push_back({start, end});
        if (end == token_count) break;
    }
    return windows;
}

std::vector<TrainingExample> build_training_examples(const Document& doc, std::size_t max_seq_len,
                                                     std::size_t stride) {
    const auto windows = plan_windows(doc.tokens.size(), max_seq_len, stride);
    std::vector<TrainingExample> out;
    if (windows.empty()) return out;

    std::map<TargetType, std::vector<BioTag>> full;
    for (auto type : kAllTargetTypes) full[type] = encode_bio(doc.tokens, doc.annotations, type).sequence.tags;

    for (const auto& w : windows) {
        TrainingExample ex;
        ex.doc_id = doc.id;
        ex.window = w;
        for (std::size_t t = w.begin; t < w.end; ++t) ex.tokens.push_back(doc.tokens[t].surface);
        for (auto type : kAllTargetTypes) {
            const auto& tags = full[type];
            std::vector<BioTag> slice(tags.begin() + static_cast<std::ptrdiff_t>(w.begin),
                                      tags.begin() + static_cast<std::ptrdiff_t>(w.end));
            if (!slice.empty() && slice.front() == BioTag::I) slice.front() = BioTag::B;
            ex.labels[type] = std::move(slice);
        }
        out.push_back(std::move(ex));
    }
    return out;
}

Json to_json(const TrainingExample& ex) {
    Json j;
    j["doc_id"] = ex.doc_id;
    j["window"] = Json::array({ex.window.begin, ex.window.end});
    j["tokens"] = ex.tokens;
    Json labels = Json::object();
    for (auto type : kAllTargetTypes) {
        Json tags = Json::array();
        auto it = ex.labels.find(type);
        if (it != ex.labels.end())
            for (auto t : it->second) tags.push_back(std::string(1, to_char(t)));
        labels[std::string(to_string(type))] = std::move(tags);
    }
    j["labels"] = std::move(labels);
    return j;
}

TrainingExample training_example_from_json(const Json& j) {
    try {
        TrainingExample ex;
        ex.doc_id = j.at("doc_id").get<std::string>();
        ex.window = {j.at("window").at(0).get<std::size_t>(), j.at("window").at(1).get<std::size_t>()};
        ex.tokens = j.at("tokens").get<std::vector<std::string>>();
        for (const auto& [name, tags] : j.at("labels").items()) {
            const auto type = parse_target_type(name);
            if (!type) throw FormatError("unknown label type '" + name + "'");
            std::vector<BioTag> seq;
            for (const auto& t : tags) {
                const auto tag = parse_bio_tag(t.get<std::string>());
                if (!tag) throw FormatError("unknown BIO label");
                seq.push_back(*tag);
            }
            ex.labels[*type] = std::move(seq);
        }
        return ex;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed training example: ") + e.what());
    }
}

}  // namespace elig

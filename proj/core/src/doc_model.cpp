#include "elig/doc_model.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <tuple>

#include "elig/unicode.hpp"

namespace elig {

namespace {

constexpr std::array<std::string_view, kTargetTypeCount> kTargetTypeNames = {
    "coupon_fixed",
    "coupon_variable_index",
    "coupon_variable_margin",
    "coupon_variable_operator",
    "coupon_variable_tenor",
    "currency",
    "early_redemption_amount",
    "early_redemption",
    "isin",
    "principal_amount",
    "redemption_at_maturity_amount",
    "redemption_at_maturity",
    "special_termination",
    "special_termination_amount",
    "status_non_preferred",
    "status_senior_non_preferred",
    "type_of_instrument",
};

constexpr std::array<std::string_view, kCriterionCount> kCriterionNames = {
    "Coupon",
    "Currency",
    "EarlyRedemptionAmount",
    "PrincipalAmount",
    "RedemptionAtMaturity",
    "SpecialTerminationRight",
    "LiquidationStatus",
    "TypeOfInstrument",
};

constexpr std::array<std::string_view, 3> kSourceNames = {"human", "model", "baseline"};

bool is_space(char32_t c) noexcept {
    return (c >= 0x09 && c <= 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 || c == 0x1680 ||
           (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F ||
           c == 0x205F || c == 0x3000;
}

bool is_punct(char32_t c) noexcept {
    if (c < 0x80) {
        return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
               (c >= 0x7B && c <= 0x7E);
    }
    if (c >= 0xA1 && c <= 0xBF) {
        // ª ² ³ µ ¹ º are letter- or digit-like
        return c != 0xAA && c != 0xB2 && c != 0xB3 && c != 0xB5 && c != 0xB9 && c != 0xBA;
    }
    return c == 0xD7 || c == 0xF7 || (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) ||
           (c >= 0x20A0 && c <= 0x20CF) || (c >= 0x3001 && c <= 0x303F);
}

}  // namespace

std::string_view to_string(TargetType t) noexcept {
    return kTargetTypeNames[static_cast<std::size_t>(t)];
}

std::optional<TargetType> parse_target_type(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kTargetTypeNames.size(); ++i)
        if (kTargetTypeNames[i] == name) return static_cast<TargetType>(i);
    return std::nullopt;
}

std::string_view to_string(Criterion c) noexcept {
    return kCriterionNames[static_cast<std::size_t>(c)];
}

std::optional<Criterion> parse_criterion(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kCriterionNames.size(); ++i)
        if (kCriterionNames[i] == name) return static_cast<Criterion>(i);
    return std::nullopt;
}

std::string_view to_string(Source s) noexcept {
    return kSourceNames[static_cast<std::size_t>(s)];
}

std::optional<Source> parse_source(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kSourceNames.size(); ++i)
        if (kSourceNames[i] == name) return static_cast<Source>(i);
    return std::nullopt;
}

std::optional<Date> parse_date(std::string_view iso) noexcept {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    auto parse = [&](std::size_t off, std::size_t len, auto& out) {
        for (std::size_t i = off; i < off + len; ++i)
            if (iso[i] < '0' || iso[i] > '9') return false;
        auto [p, ec] = std::from_chars(iso.data() + off, iso.data() + off + len, out);
        return ec == std::errc{} && p == iso.data() + off + len;
    };
    if (!parse(0, 4, y) || !parse(5, 2, m) || !parse(8, 2, d)) return std::nullopt;
    Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok()) return std::nullopt;
    return date;
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

std::vector<std::string> validate_annotation(const Annotation& a, std::size_t text_length) {
    std::vector<std::string> out;
    const std::string who = "annotation '" + a.id + "' (" + std::string(to_string(a.type)) + ")";
    if (a.fragments.empty()) out.push_back(who + ": no fragments");
    for (std::size_t i = 0; i < a.fragments.size(); ++i) {
        const auto& f = a.fragments[i];
        const std::string range = "[" + std::to_string(f.start) + "," + std::to_string(f.end) + ")";
        if (f.start >= f.end) out.push_back(who + ": fragment start >= end " + range);
        if (f.end > text_length)
            out.push_back(who + ": fragment out of bounds " + range + " for text length " +
                          std::to_string(text_length));
        if (i > 0) {
            const auto& prev = a.fragments[i - 1];
            if (f.start < prev.start) out.push_back(who + ": fragments not sorted at " + range);
            else if (f.start < prev.end) out.push_back(who + ": fragments overlap at " + range);
        }
    }
    if (!(a.confidence >= 0.0 && a.confidence <= 1.0))
        out.push_back(who + ": confidence " + std::to_string(a.confidence) + " outside [0,1]");
    return out;
}

std::vector<std::string> validate_document(const Document& doc) {
    std::vector<std::string> out;
    if (!utf8::is_valid(doc.text)) {
        out.push_back("text is not valid UTF-8");
        return out;
    }
    const utf8::OffsetMap map(doc.text);
    const std::size_t n = map.size();

    for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
        const auto& t = doc.tokens[i];
        const std::string range = "[" + std::to_string(t.start) + "," + std::to_string(t.end) + ")";
        const std::string who = "token " + std::to_string(i);
        if (t.index != i) out.push_back(who + ": index " + std::to_string(t.index) + " is not its ordinal");
        if (t.start >= t.end) out.push_back(who + ": token start >= end " + range);
        if (t.end > n) {
            out.push_back(who + ": token out of bounds " + range + " for text length " + std::to_string(n));
        } else if (t.start < t.end && map.slice(t.start, t.end) != t.surface) {
            out.push_back(who + ": surface does not match text slice " + range);
        }
        if (i > 0) {
            const auto& prev = doc.tokens[i - 1];
            if (t.start <= prev.start) out.push_back(who + ": token start not increasing " + range);
            else if (t.start < prev.end) out.push_back(who + ": tokens overlap " + range);
        }
    }
    for (const auto& a : doc.annotations) {
        auto v = validate_annotation(a, n);
        out.insert(out.end(), v.begin(), v.end());
    }
    if (doc.metadata.issue_date && !doc.metadata.issue_date->ok())
        out.push_back("metadata.issue_date is not a valid calendar date");
    return out;
}

std::vector<Token> baseline_tokenize(std::string_view text) {
    const auto cps = utf8::decode(text);
    std::vector<Token> tokens;
    std::size_t i = 0;
    auto emit = [&](std::size_t b, std::size_t e) {
        tokens.push_back(Token{tokens.size(), b, e, utf8::encode(std::u32string_view(cps).substr(b, e - b))});
    };
    while (i < cps.size()) {
        if (is_space(cps[i])) {
            ++i;
        } else if (is_punct(cps[i])) {
            emit(i, i + 1);
            ++i;
        } else {
            const std::size_t b = i;
            while (i < cps.size() && !is_space(cps[i]) && !is_punct(cps[i])) ++i;
            emit(b, i);
        }
    }
    return tokens;
}

std::vector<Annotation> annotations_of_type(const std::vector<Annotation>& all, TargetType type) {
    std::vector<Annotation> out;
    for (const auto& a : all)
        if (a.type == type) out.push_back(a);
    return out;
}

void sort_annotations(std::vector<Annotation>& annotations) {
    std::stable_sort(annotations.begin(), annotations.end(), [](const Annotation& a, const Annotation& b) {
        return std::tie(a.type, a.fragments, b.confidence, a.id) <
               std::tie(b.type, b.fragments, a.confidence, b.id);
    });
}

}  // namespace elig

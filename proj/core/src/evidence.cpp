#include "elig/evidence.hpp"

#include <algorithm>
#include <cctype>
#include <tuple>

#include "elig/errors.hpp"
#include "elig/unicode.hpp"

namespace elig {

namespace {

bool is_word_byte(char c) noexcept {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::string escape_regex(std::string_view s) {
    static const std::string special = R"(\^$.|?*+()[]{}/)";
    std::string out;
    for (char c : s) {
        if (special.find(c) != std::string::npos) out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

std::string literal_pattern(std::vector<std::string> literals) {
    std::stable_sort(literals.begin(), literals.end(),
                     [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
    std::string out;
    for (const auto& lit : literals) {
        if (lit.empty()) continue;
        if (!out.empty()) out += '|';
        out += "(?:";
        if (is_word_byte(lit.front())) out += "\\b";
        out += escape_regex(lit);
        if (is_word_byte(lit.back())) out += "\\b";
        out += ')';
    }
    return out;
}

GazetteerRule literal_rule(std::string name, TargetType type, std::vector<std::string> literals,
                           std::string hint = "lexicon") {
    GazetteerRule r;
    r.name = std::move(name);
    r.type = type;
    r.literals = std::move(literals);
    r.normalizer_hint = std::move(hint);
    r.confidence = kLiteralRuleConfidence;
    return r;
}

GazetteerRule pattern_rule(std::string name, TargetType type, std::string pattern, std::size_t group = 0,
                           std::string hint = "amount") {
    GazetteerRule r;
    r.name = std::move(name);
    r.type = type;
    r.pattern = std::move(pattern);
    r.capture_group = group;
    r.normalizer_hint = std::move(hint);
    r.confidence = kPatternRuleConfidence;
    return r;
}

}  // namespace

std::vector<GazetteerRule> default_rules() {
    std::vector<GazetteerRule> rules;

    rules.push_back(literal_rule("currency-names", TargetType::currency,
                                 {"EUR", "Euro", "EURO", "€", "USD", "US-Dollar", "US Dollar", "U.S. Dollar",
                                  "GBP", "Pfund Sterling", "Pound Sterling", "CHF", "Schweizer Franken",
                                  "Swiss Franc", "JPY", "Yen", "Japanese Yen", "Japanische Yen", "SEK", "NOK",
                                  "DKK", "AUD", "CAD"},
                                 "currency"));

    auto isin = pattern_rule("isin-code", TargetType::isin, R"(\b[A-Z]{2}[A-Z0-9]{9}[0-9]\b)", 0, "isin");
    isin.validator = RuleValidator::isin;
    rules.push_back(std::move(isin));

    // 1.000.000 / 1.000.000,00 (German) and 1,000,000 / 1,000,000.00 (English); a
    // following percent sign marks a rate such as 4,125 %.
    rules.push_back(pattern_rule("amount-grouped", TargetType::principal_amount,
                                 R"(\b\d{1,3}(?:\.\d{3})+(?:,\d{1,2})?\b(?! ?%)|\b\d{1,3}(?:,\d{3})+(?:\.\d{1,2})?\b(?! ?%))"));

    rules.push_back(pattern_rule("coupon-fixed-rate", TargetType::coupon_fixed,
                                 R"(\b\d{1,2}[.,]\d{1,4} ?% (?:p\.a\.|per annum))"));
    rules.push_back(literal_rule("coupon-index-names", TargetType::coupon_variable_index,
                                 {"EURIBOR", "Euribor", "€STR", "ESTR", "EONIA", "LIBOR", "SOFR", "DAX", "HVPI",
                                  "HICP"}));
    rules.push_back(pattern_rule("coupon-margin", TargetType::coupon_variable_margin,
                                 R"((?:Marge von|margin of) (\d{1,2}[.,]\d{1,3} ?%))", 1));
    rules.push_back(pattern_rule("coupon-operator", TargetType::coupon_variable_operator,
                                 R"((?:Referenzsatz|reference rate) (zuzüglich|abzüglich|plus|minus)\b)", 1,
                                 "lexicon"));
    rules.push_back(pattern_rule("coupon-tenor", TargetType::coupon_variable_tenor,
                                 R"((?:Zinsperiode|Interest Period): (\d{1,2} Monate|\d{1,2} months|drei Monate|sechs Monate|zwölf Monate|three months|six months|twelve months))",
                                 1, "lexicon"));

    rules.push_back(literal_rule("early-redemption-phrases", TargetType::early_redemption,
                                 {"vorzeitig zu kündigen", "vorzeitig zurückzuzahlen", "redeem the Notes early",
                                  "call the Notes for early redemption"}));
    rules.push_back(pattern_rule(
        "early-redemption-amount", TargetType::early_redemption_amount,
        R"((?:Vorzeitige Rückzahlungsbetrag entspricht (?:dem )?|Early Redemption Amount is (?:the )?)(\d{1,3}(?:[.,]\d{1,2})? ?%|Marktwert|market value))",
        1));
    rules.push_back(literal_rule("redemption-at-maturity-phrases", TargetType::redemption_at_maturity,
                                 {"zu ihrem Nennbetrag zurückgezahlt",
                                  "in Abhängigkeit von der Wertentwicklung des Basiswerts zurückgezahlt",
                                  "redeemed at their principal amount",
                                  "redeemed depending on the performance of the underlying"}));
    rules.push_back(pattern_rule(
        "redemption-at-maturity-amount", TargetType::redemption_at_maturity_amount,
        R"((?:Der Rückzahlungsbetrag entspricht |The Final Redemption Amount is )(\d{1,3}(?:[.,]\d{1,2})? ?%))", 1));
    rules.push_back(literal_rule("special-termination-phrases", TargetType::special_termination,
                                 {"aus steuerlichen Gründen kündigen", "aus regulatorischen Gründen kündigen",
                                  "nach freiem Ermessen kündigen", "for tax reasons", "for regulatory reasons",
                                  "at its sole discretion"}));
    rules.push_back(pattern_rule(
        "special-termination-amount", TargetType::special_termination_amount,
        R"((?:Kündigungsbetrag|Termination Amount): (Nennbetrag zuzüglich aufgelaufener Zinsen|Marktwert|principal amount plus accrued interest|market value))",
        1, "lexicon"));
    rules.push_back(literal_rule("status-non-preferred", TargetType::status_non_preferred,
                                 {"nicht bevorrechtigte nachrangige Verbindlichkeiten",
                                  "subordinated non-preferred obligations"}));
    rules.push_back(literal_rule("status-senior-non-preferred", TargetType::status_senior_non_preferred,
                                 {"nicht nachrangige nicht bevorrechtigte Verbindlichkeiten",
                                  "senior non-preferred obligations"}));
    rules.push_back(literal_rule("instrument-types", TargetType::type_of_instrument,
                                 {"Inhaberschuldverschreibungen", "Hypothekenpfandbriefe", "Öffentliche Pfandbriefe",
                                  "Zertifikate", "Optionsscheine", "bearer bonds", "covered bonds", "senior notes",
                                  "certificates", "warrants"}));
    return rules;
}

bool validate_isin(std::string_view candidate) noexcept {
    if (candidate.size() != 12) return false;
    for (std::size_t i = 0; i < 2; ++i)
        if (candidate[i] < 'A' || candidate[i] > 'Z') return false;
    for (std::size_t i = 2; i < 11; ++i) {
        const char c = candidate[i];
        if (!((c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'))) return false;
    }
    if (candidate[11] < '0' || candidate[11] > '9') return false;

    // Letters expand to two digits (A=10 ... Z=35).
    std::string digits;
    for (char c : candidate) {
        if (c >= 'A' && c <= 'Z') digits += std::to_string(c - 'A' + 10);
        else digits.push_back(c);
    }
    int sum = 0;
    bool doubled = false;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
        int d = *it - '0';
        if (doubled) {
            d *= 2;
            if (d > 9) d -= 9;
        }
        sum += d;
        doubled = !doubled;
    }
    return sum % 10 == 0;
}

BaselineBackend::BaselineBackend(std::vector<GazetteerRule> rules) : rules_(std::move(rules)) {
    compiled_.reserve(rules_.size());
    for (const auto& r : rules_) {
        if (!(r.confidence > 0.0 && r.confidence <= 1.0))
            throw InputError("rule '" + r.name + "': confidence must be in (0,1]");
        const std::string pattern = r.literals.empty() ? r.pattern : literal_pattern(r.literals);
        if (pattern.empty()) throw InputError("rule '" + r.name + "' has no literals and no pattern");
        auto flags = std::regex::ECMAScript | std::regex::optimize;
        if (r.case_insensitive) flags |= std::regex::icase;
        try {
            Compiled c{compiled_.size(), std::regex(pattern, flags)};
            if (r.capture_group > c.re.mark_count())
                throw InputError("rule '" + r.name + "': capture group out of range");
            compiled_.push_back(std::move(c));
        } catch (const std::regex_error& e) {
            throw InputError("rule '" + r.name + "': pattern does not compile: " + e.what());
        }
    }
}

std::vector<Annotation> BaselineBackend::detect(const Document& doc) const {
    const utf8::OffsetMap map(doc.text);
    std::vector<Annotation> out;
    for (const auto& c : compiled_) {
        const auto& rule = rules_[c.rule];
        auto begin = std::sregex_iterator(doc.text.begin(), doc.text.end(), c.re);
        for (auto it = begin; it != std::sregex_iterator(); ++it) {
            const auto& m = *it;
            const auto& sub = m[static_cast<int>(rule.capture_group)];
            if (!sub.matched || sub.length() == 0) continue;
            const auto byte_begin = static_cast<std::size_t>(sub.first - doc.text.begin());
            const auto byte_end = static_cast<std::size_t>(sub.second - doc.text.begin());
            if (rule.validator == RuleValidator::isin && !validate_isin(sub.str())) continue;
            Annotation a;
            a.type = rule.type;
            const std::size_t b = map.codepoint_at_byte(byte_begin);
            const std::size_t e = byte_end >= doc.text.size() ? map.size() : map.codepoint_at_byte(byte_end);
            a.fragments.push_back({b, e});
            a.source = Source::baseline;
            a.confidence = rule.confidence;
            out.push_back(std::move(a));
        }
    }
    return merge_detections(std::move(out));
}

std::vector<Annotation> detect_baseline(const Document& doc, std::span<const GazetteerRule> rules) {
    return BaselineBackend(std::vector<GazetteerRule>(rules.begin(), rules.end())).detect(doc);
}

std::vector<Annotation> merge_detections(std::vector<Annotation> annotations) {
    std::stable_sort(annotations.begin(), annotations.end(), [](const Annotation& a, const Annotation& b) {
        return std::tie(a.type, a.fragments, b.confidence) < std::tie(b.type, b.fragments, a.confidence);
    });
    std::vector<Annotation> out;
    for (auto& a : annotations) {
        if (!out.empty() && out.back().type == a.type && out.back().fragments == a.fragments) continue;
        out.push_back(std::move(a));
    }
    return out;
}

CombinedBackend::CombinedBackend(std::vector<std::shared_ptr<const EvidenceBackend>> parts)
    : parts_(std::move(parts)) {
    if (parts_.empty()) throw InputError("combined backend needs at least one part");
}

std::vector<Annotation> CombinedBackend::detect(const Document& doc) const {
    std::vector<Annotation> all;
    for (const auto& p : parts_) {
        auto found = p->detect(doc);
        all.insert(all.end(), std::make_move_iterator(found.begin()), std::make_move_iterator(found.end()));
    }
    return merge_detections(std::move(all));
}

std::string CombinedBackend::name() const {
    std::string out;
    for (const auto& p : parts_) {
        if (!out.empty()) out += '+';
        out += p->name();
    }
    return out;
}

}  // namespace elig

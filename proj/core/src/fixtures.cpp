#include "elig/fixtures.hpp"

#include <cctype>
#include <cstdio>
#include <optional>
#include <random>

#include "elig/unicode.hpp"

namespace elig {

namespace {

// std::uniform_int_distribution is implementation-defined; fixtures must be
// identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    std::size_t below(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(gen_() % n); }
    double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    bool chance(double p) { return unit() < p; }
    template <class T>
    const T& pick(const std::vector<T>& v) {
        return v[below(v.size())];
    }

private:
    std::mt19937_64 gen_;
};

// A sentence whose marked part [before | span | after] is the gold evidence.
struct Mention {
    std::string before;
    std::string span;
    std::string after;
};

std::string group_digits(std::uint64_t v, char sep) {
    std::string digits = std::to_string(v);
    std::string out;
    const std::size_t lead = digits.size() % 3 == 0 ? 3 : digits.size() % 3;
    out = digits.substr(0, lead);
    for (std::size_t i = lead; i < digits.size(); i += 3) {
        out.push_back(sep);
        out += digits.substr(i, 3);
    }
    return out;
}

std::string amount(Rng& rng, bool german) {
    static const std::vector<std::uint64_t> scales = {1000, 1000000, 1000000};
    const std::uint64_t v = (1 + rng.below(999)) * rng.pick(scales);
    std::string s = group_digits(v, german ? '.' : ',');
    if (rng.chance(0.3)) s += german ? ",00" : ".00";
    return s;
}

std::string rate(Rng& rng, bool german, std::size_t decimals) {
    const std::size_t whole = rng.below(8);
    std::string frac;
    for (std::size_t i = 0; i < decimals; ++i) frac.push_back(static_cast<char>('0' + rng.below(10)));
    if (frac.back() == '0') frac.back() = '5';
    return std::to_string(whole) + (german ? "," : ".") + frac;
}

std::string isin(Rng& rng) {
    static const std::vector<std::string> countries = {"DE", "DE", "DE", "AT", "LU", "FR", "NL", "XS"};
    std::string prefix = rng.pick(countries);
    for (int i = 0; i < 9; ++i) {
        if (i < 2 && rng.chance(0.3)) prefix.push_back(static_cast<char>('A' + rng.below(26)));
        else prefix.push_back(static_cast<char>('0' + rng.below(10)));
    }
    return complete_isin(prefix);
}

std::string percent(Rng& rng, bool german) {
    if (rng.chance(0.75)) return german ? "100 %" : "100%";
    return german ? "101,50 %" : "101.50%";
}

Mention render(TargetType type, bool de, Rng& rng) {
    using T = TargetType;
    switch (type) {
        case T::currency: {
            const std::string cur = rng.chance(0.85)
                                        ? rng.pick(std::vector<std::string>{"Euro", "EUR", "€", de ? "EURO" : "Euro"})
                                        : rng.pick(de ? std::vector<std::string>{"USD", "Schweizer Franken", "GBP"}
                                                      : std::vector<std::string>{"US Dollar", "Swiss Franc", "JPY"});
            if (de)
                return rng.pick(std::vector<Mention>{{"Die Schuldverschreibungen lauten auf ", cur, "."},
                                                     {"Die festgelegte Währung ist ", cur, "."},
                                                     {"Alle Zahlungen erfolgen in ", cur, "."}});
            return rng.pick(std::vector<Mention>{{"The Notes are denominated in ", cur, "."},
                                                 {"The Specified Currency is ", cur, "."},
                                                 {"All payments will be made in ", cur, "."}});
        }
        case T::isin: {
            const std::string code = isin(rng);
            if (de)
                return rng.pick(
                    std::vector<Mention>{{"Die ISIN lautet ", code, "."}, {"Wertpapierkennnummer (ISIN): ", code, "."}});
            return rng.pick(std::vector<Mention>{{"ISIN Code: ", code, "."}, {"The ISIN of the Notes is ", code, "."}});
        }
        case T::principal_amount:
            if (de) return {"Der Gesamtnennbetrag beträgt ", amount(rng, true), "."};
            return {"The Aggregate Principal Amount is ", amount(rng, false), "."};
        case T::coupon_fixed:
            if (de) return {"Die Schuldverschreibungen werden mit ", rate(rng, true, 3) + " % p.a.", " verzinst."};
            return {"The Notes bear interest at a rate of ", rate(rng, false, 3) + "% per annum", "."};
        case T::coupon_variable_index: {
            const std::string idx =
                rng.chance(0.8) ? rng.pick(std::vector<std::string>{"EURIBOR", "ESTR"})
                                : rng.pick(std::vector<std::string>{"EONIA", "DAX", de ? "HVPI" : "HICP"});
            if (de) return {"Der Referenzzinssatz ist der ", idx, "."};
            return {"The Reference Rate is ", idx, "."};
        }
        case T::coupon_variable_margin:
            if (de) return {"Es gilt eine Marge von ", rate(rng, true, 2) + " %", "."};
            return {"A margin of ", rate(rng, false, 2) + "%", " applies."};
        case T::coupon_variable_operator: {
            const bool plus = rng.chance(0.8);
            if (de) return {"Der Zinssatz entspricht dem Referenzsatz ", plus ? "zuzüglich" : "abzüglich", " der Marge."};
            return {"The Rate of Interest is the reference rate ", plus ? "plus" : "minus", " the Margin."};
        }
        case T::coupon_variable_tenor:
            if (de)
                return {"Zinsperiode: ", rng.pick(std::vector<std::string>{"3 Monate", "drei Monate", "6 Monate",
                                                                           "sechs Monate", "12 Monate"}),
                        "."};
            return {"Interest Period: ",
                    rng.pick(std::vector<std::string>{"3 months", "three months", "6 months", "twelve months"}), "."};
        case T::early_redemption:
            if (de)
                return {"Die Emittentin ist berechtigt, die Schuldverschreibungen ",
                        rng.pick(std::vector<std::string>{"vorzeitig zu kündigen", "vorzeitig zurückzuzahlen"}), "."};
            return rng.pick(std::vector<Mention>{{"The Issuer may ", "redeem the Notes early", " by giving notice."},
                                                 {"The Issuer may ", "call the Notes for early redemption", "."}});
        case T::early_redemption_amount:
            if (rng.chance(0.25)) {
                if (de) return {"Der Vorzeitige Rückzahlungsbetrag entspricht dem ", "Marktwert", "."};
                return {"The Early Redemption Amount is the ", "market value", "."};
            }
            if (de) return {"Der Vorzeitige Rückzahlungsbetrag entspricht ", percent(rng, true), " des Nennbetrags."};
            return {"The Early Redemption Amount is ", percent(rng, false), " of the principal amount."};
        case T::redemption_at_maturity: {
            const bool par = rng.chance(0.8);
            if (de)
                return {"Die Schuldverschreibungen werden am Fälligkeitstag ",
                        par ? "zu ihrem Nennbetrag zurückgezahlt"
                            : "in Abhängigkeit von der Wertentwicklung des Basiswerts zurückgezahlt",
                        "."};
            return {"The Notes will be ",
                    par ? "redeemed at their principal amount" : "redeemed depending on the performance of the underlying",
                    " on the Maturity Date."};
        }
        case T::redemption_at_maturity_amount:
            if (de) return {"Der Rückzahlungsbetrag entspricht ", "100 %", " des Nennbetrags."};
            return {"The Final Redemption Amount is ", "100%", " of the principal amount."};
        case T::special_termination: {
            const std::size_t k = rng.chance(0.8) ? rng.below(2) : 2;
            if (de)
                return {"Die Emittentin kann die Schuldverschreibungen ",
                        std::vector<std::string>{"aus steuerlichen Gründen kündigen",
                                                 "aus regulatorischen Gründen kündigen",
                                                 "nach freiem Ermessen kündigen"}[k],
                        "."};
            return {"The Issuer may terminate the Notes ",
                    std::vector<std::string>{"for tax reasons", "for regulatory reasons", "at its sole discretion"}[k],
                    "."};
        }
        case T::special_termination_amount: {
            const bool par = rng.chance(0.8);
            if (de) return {"Kündigungsbetrag: ", par ? "Nennbetrag zuzüglich aufgelaufener Zinsen" : "Marktwert", "."};
            return {"Termination Amount: ", par ? "principal amount plus accrued interest" : "market value", "."};
        }
        case T::status_non_preferred:
            if (de) return {"Die Schuldverschreibungen begründen ", "nicht bevorrechtigte nachrangige Verbindlichkeiten", " der Emittentin."};
            return {"The Notes constitute ", "subordinated non-preferred obligations", " of the Issuer."};
        case T::status_senior_non_preferred:
            if (de) return {"Die Schuldverschreibungen begründen ", "nicht nachrangige nicht bevorrechtigte Verbindlichkeiten", " der Emittentin."};
            return {"The Notes constitute ", "senior non-preferred obligations", " of the Issuer."};
        case T::type_of_instrument: {
            const bool debt = rng.chance(0.85);
            if (de)
                return {"Gegenstand dieser Endgültigen Bedingungen sind ",
                        debt ? rng.pick(std::vector<std::string>{"Inhaberschuldverschreibungen", "Inhaberschuldverschreibungen",
                                                                 "Hypothekenpfandbriefe", "Öffentliche Pfandbriefe"})
                             : rng.pick(std::vector<std::string>{"Zertifikate", "Optionsscheine"}),
                        " der Emittentin."};
            return {"These Final Terms relate to ",
                    debt ? rng.pick(std::vector<std::string>{"senior notes", "bearer bonds", "covered bonds"})
                         : rng.pick(std::vector<std::string>{"certificates", "warrants"}),
                    " issued by the Issuer."};
        }
    }
    return {};
}

const std::vector<std::string>& fillers(bool de) {
    static const std::vector<std::string> german = {
        "Die Emittentin hat ihren Sitz in Frankfurt am Main.",
        "Es gilt das Recht der Bundesrepublik Deutschland.",
        "Mitteilungen erfolgen durch Veröffentlichung auf der Internetseite der Emittentin.",
        "Die Verwahrung erfolgt bei der Clearingstelle.",
        "Die Bedingungen sind in deutscher Sprache abgefasst.",
        "Die Hauptzahlstelle handelt ausschließlich als Beauftragte der Emittentin.",
    };
    static const std::vector<std::string> english = {
        "The Issuer has its registered office in Frankfurt am Main.",
        "The Notes are governed by German law.",
        "Notices will be published on the website of the Issuer.",
        "The Notes will be kept in custody by the Clearing System.",
        "These Terms and Conditions are written in the English language.",
        "The Fiscal Agent acts solely as agent of the Issuer.",
    };
    return de ? german : english;
}

// Breaks the first word of at least ten ASCII letters.
std::string hyphenate(const std::string& sentence) {
    std::size_t run = 0;
    for (std::size_t i = 0; i < sentence.size(); ++i) {
        const unsigned char c = static_cast<unsigned char>(sentence[i]);
        if (std::isalpha(c)) {
            if (++run == 5) {
                std::size_t end = i;
                while (end < sentence.size() && std::isalpha(static_cast<unsigned char>(sentence[end]))) ++end;
                if (end - (i - 4) >= 10) return sentence.substr(0, i + 1) + "-\n" + sentence.substr(i + 1);
            }
        } else {
            run = 0;
        }
    }
    return sentence;
}

class TextBuilder {
public:
    void append(const std::string& s) {
        text_ += s;
        length_ += utf8::length(s);
    }
    std::size_t length() const noexcept { return length_; }
    std::string take() { return std::move(text_); }

private:
    std::string text_;
    std::size_t length_ = 0;
};

std::string pad3(std::size_t i) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%03zu", i);
    return buf;
}

}  // namespace

std::string complete_isin(const std::string& prefix) {
    std::string digits;
    for (char c : prefix) {
        if (c >= 'A' && c <= 'Z') digits += std::to_string(c - 'A' + 10);
        else digits.push_back(c);
    }
    // Luhn: double every second digit from the right of the payload, starting
    // with the rightmost (the check digit will sit to its right).
    int sum = 0;
    bool dbl = true;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
        int d = *it - '0';
        if (dbl) {
            d *= 2;
            if (d > 9) d -= 9;
        }
        sum += d;
        dbl = !dbl;
    }
    return prefix + static_cast<char>('0' + (10 - sum % 10) % 10);
}

FixtureSpec default_fixture_spec() {
    using T = TargetType;
    FixtureSpec spec;
    spec.counts = {
        {T::currency, 32},
        {T::isin, 24},
        {T::principal_amount, 32},
        {T::coupon_fixed, 14},
        {T::coupon_variable_index, 4},
        {T::coupon_variable_margin, 3},
        {T::coupon_variable_operator, 3},
        {T::coupon_variable_tenor, 4},
        {T::early_redemption, 10},
        {T::early_redemption_amount, 12},
        {T::redemption_at_maturity, 16},
        {T::redemption_at_maturity_amount, 4},
        {T::special_termination, 12},
        {T::special_termination_amount, 6},
        {T::status_non_preferred, 3},
        {T::status_senior_non_preferred, 14},
        {T::type_of_instrument, 16},
    };
    spec.noise = {0.1, 0.1};
    return spec;
}

std::vector<Document> generate_corpus(const FixtureSpec& spec) {
    std::size_t total = 0;
    for (const auto& [_, n] : spec.counts) total += n;
    if (total == 0 || spec.document_count == 0) return {};

    Rng rng(spec.seed);
    const std::size_t n_docs = spec.document_count;
    std::vector<bool> german(n_docs);
    for (std::size_t d = 0; d < n_docs; ++d) german[d] = rng.chance(spec.german_share);

    // Round-robin from a random starting document per type.
    std::vector<std::vector<TargetType>> planned(n_docs);
    for (auto t : kAllTargetTypes) {
        auto it = spec.counts.find(t);
        if (it == spec.counts.end() || it->second == 0) continue;
        const std::size_t offset = rng.below(n_docs);
        for (std::size_t k = 0; k < it->second; ++k) planned[(offset + k) % n_docs].push_back(t);
    }

    std::vector<Document> docs;
    docs.reserve(n_docs);
    for (std::size_t d = 0; d < n_docs; ++d) {
        auto& types = planned[d];
        for (std::size_t i = types.size(); i > 1; --i) std::swap(types[i - 1], types[rng.below(i)]);

        const bool de = german[d];
        Document doc;
        doc.id = "fx-" + pad3(d + 1);
        TextBuilder text;
        text.append(de ? "Endgültige Bedingungen\n\n" : "Final Terms\n\n");
        std::size_t page = 2;
        std::optional<std::string> first_isin;
        for (std::size_t m = 0; m < types.size(); ++m) {
            if (rng.chance(0.5)) {
                std::string filler = rng.pick(fillers(de));
                if (rng.chance(spec.noise.hyphenation_rate)) filler = hyphenate(filler);
                text.append(filler + " ");
            }
            if (rng.chance(spec.noise.column_break_rate)) text.append("\n\n- " + std::to_string(page++) + " -\n\n");
            const Mention mention = render(types[m], de, rng);
            text.append(mention.before);
            const std::size_t start = text.length();
            text.append(mention.span);
            Annotation a;
            a.type = types[m];
            a.fragments.push_back({start, text.length()});
            a.source = Source::human;
            a.confidence = 1.0;
            a.annotator_id = "gold";
            doc.annotations.push_back(std::move(a));
            if (types[m] == TargetType::isin && !first_isin) first_isin = mention.span;
            text.append(mention.after);
            text.append(m + 1 < types.size() ? (rng.chance(0.3) ? "\n" : " ") : "\n");
        }
        doc.text = text.take();
        doc.tokens = baseline_tokenize(doc.text);
        sort_annotations(doc.annotations);

        doc.metadata.isin = first_isin ? *first_isin : isin(rng);
        const int year = 2016 + static_cast<int>(rng.below(9));
        doc.metadata.issue_date = Date{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(1 + rng.below(12))},
                                       std::chrono::day{static_cast<unsigned>(1 + rng.below(28))}};
        doc.metadata.issuer_group =
            rng.chance(0.8) ? "credit_institution" : rng.pick(std::vector<std::string>{"corporate", "public_sector"});
        doc.metadata.asset_type = rng.chance(0.8) ? "debt_instrument"
                                                  : rng.pick(std::vector<std::string>{"covered_bond", "equity"});
        docs.push_back(std::move(doc));
    }
    return docs;
}

}  // namespace elig

#include "elig/normalize.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <regex>

#include "elig/errors.hpp"

namespace elig {

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

// "1.000.000" style grouping: first group 1-3 digits, every further group 3.
bool valid_grouping(std::string_view s, char sep) {
    std::size_t start = 0;
    bool first = true;
    while (true) {
        const auto pos = s.find(sep, start);
        const auto group = s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
        if (!all_digits(group)) return false;
        if (first ? group.size() > 3 : group.size() != 3) return false;
        first = false;
        if (pos == std::string_view::npos) return true;
        start = pos + 1;
    }
}

double to_value(std::string_view int_part, char group_sep, std::string_view frac_part) {
    std::string digits;
    for (char c : int_part)
        if (c != group_sep) digits.push_back(c);
    long double v = 0;
    for (char c : digits) v = v * 10 + (c - '0');
    long double scale = 1;
    long double frac = 0;
    for (char c : frac_part) {
        frac = frac * 10 + (c - '0');
        scale *= 10;
    }
    return static_cast<double>(v + frac / scale);
}

}  // namespace

double parse_amount(std::string_view surface, AmountLocale ambiguous_as) {
    const auto b = surface.find_first_not_of(" \t\r\n");
    const auto e = surface.find_last_not_of(" \t\r\n");
    if (b == std::string_view::npos) throw ParseError("empty amount");
    const auto s = surface.substr(b, e - b + 1);
    const auto fail = [&] { return ParseError("cannot parse amount '" + std::string(s) + "'"); };

    for (char c : s)
        if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == ',')) throw fail();
    if (!std::isdigit(static_cast<unsigned char>(s.front())) || !std::isdigit(static_cast<unsigned char>(s.back())))
        throw fail();

    const auto dots = std::count(s.begin(), s.end(), '.');
    const auto commas = std::count(s.begin(), s.end(), ',');

    if (dots == 0 && commas == 0) return to_value(s, '\0', {});

    if (dots > 0 && commas > 0) {
        const char dec = s.rfind('.') > s.rfind(',') ? '.' : ',';
        const char grp = dec == '.' ? ',' : '.';
        if (std::count(s.begin(), s.end(), dec) != 1) throw fail();
        const auto pos = s.rfind(dec);
        const auto int_part = s.substr(0, pos);
        const auto frac = s.substr(pos + 1);
        if (!valid_grouping(int_part, grp) || !all_digits(frac)) throw fail();
        return to_value(int_part, grp, frac);
    }

    const char sep = dots > 0 ? '.' : ',';
    const auto count = dots > 0 ? dots : commas;
    if (count > 1) {
        if (!valid_grouping(s, sep)) throw fail();
        return to_value(s, sep, {});
    }
    const auto pos = s.find(sep);
    const auto int_part = s.substr(0, pos);
    const auto frac = s.substr(pos + 1);
    bool is_group = false;
    if (frac.size() == 3 && int_part.size() <= 3) {
        const char locale_group = ambiguous_as == AmountLocale::german ? '.' : ',';
        is_group = sep == locale_group;
    }
    if (is_group) return to_value(s, sep, {});
    return to_value(int_part, '\0', frac);
}

std::string fold_text(std::string_view s) {
    std::string out;
    bool pending_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

const std::map<std::string, std::string>& currency_aliases() {
    static const std::map<std::string, std::string> table = {
        {"eur", "EUR"},           {"euro", "EUR"},          {"€", "EUR"},
        {"usd", "USD"},           {"us-dollar", "USD"},     {"us dollar", "USD"},
        {"u.s. dollar", "USD"},   {"dollar", "USD"},        {"$", "USD"},
        {"gbp", "GBP"},           {"pfund sterling", "GBP"}, {"pound sterling", "GBP"},
        {"£", "GBP"},             {"chf", "CHF"},           {"schweizer franken", "CHF"},
        {"swiss franc", "CHF"},   {"jpy", "JPY"},           {"yen", "JPY"},
        {"japanese yen", "JPY"},  {"japanische yen", "JPY"}, {"sek", "SEK"},
        {"nok", "NOK"},           {"dkk", "DKK"},           {"aud", "AUD"},
        {"cad", "CAD"},
    };
    return table;
}

std::optional<std::string> normalize_currency(std::string_view surface, const std::map<std::string, std::string>& extra) {
    const auto key = fold_text(surface);
    if (auto it = extra.find(key); it != extra.end()) return it->second;
    const auto& table = currency_aliases();
    if (auto it = table.find(key); it != table.end()) return it->second;
    // Any other three-letter upper-case code is taken at face value.
    std::string_view t = surface;
    while (!t.empty() && std::isspace(static_cast<unsigned char>(t.front()))) t.remove_prefix(1);
    while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) t.remove_suffix(1);
    if (t.size() == 3 && std::all_of(t.begin(), t.end(), [](char c) { return c >= 'A' && c <= 'Z'; }))
        return std::string(t);
    return std::nullopt;
}

std::optional<std::string> normalize_lexicon(std::string_view surface, const Lexicon& lexicon) {
    const auto folded = fold_text(surface);
    const std::pair<std::string, std::string>* best = nullptr;
    for (const auto& entry : lexicon) {
        if (entry.first.empty() || folded.find(entry.first) == std::string::npos) continue;
        if (!best || entry.first.size() > best->first.size()) best = &entry;
    }
    if (!best) return std::nullopt;
    return best->second;
}

std::string format_amount(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", value);
    return buf;
}

std::optional<std::string> normalize_amount(std::string_view surface, const Lexicon& fallback,
                                            AmountLocale ambiguous_as) {
    static const std::regex number(R"(\d(?:[\d.,]*\d)?)");
    std::match_results<std::string_view::const_iterator> m;
    if (std::regex_search(surface.begin(), surface.end(), m, number)) {
        try {
            return format_amount(parse_amount(m.str(), ambiguous_as));
        } catch (const ParseError&) {
            return std::nullopt;
        }
    }
    return normalize_lexicon(surface, fallback);
}

}  // namespace elig

#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace elig {

enum class AmountLocale { german, english };

// German: '.' groups thousands, ',' marks decimals; English the reverse.
// A single separator followed by exactly three digits is ambiguous and
// resolved by `ambiguous_as`. Throws ParseError on anything else.
double parse_amount(std::string_view surface, AmountLocale ambiguous_as = AmountLocale::german);

// Shipped alias table (case-insensitive, whitespace-collapsed) mapping currency
// names and codes to ISO 4217 codes.
const std::map<std::string, std::string>& currency_aliases();

// ISO code for a known alias, or the surface itself when it is a bare
// three-letter upper-case code; nullopt marks an unknown currency. `extra`
// entries take precedence over the shipped table.
std::optional<std::string> normalize_currency(std::string_view surface,
                                              const std::map<std::string, std::string>& extra = {});

// Keyword lexicon: (lowercase keyword, canonical value). The longest keyword
// contained in the lowercased surface wins.
using Lexicon = std::vector<std::pair<std::string, std::string>>;
std::optional<std::string> normalize_lexicon(std::string_view surface, const Lexicon& lexicon);

// First number in the surface ("101,50 %" -> 101.5), formatted with two
// decimals; falls back to the lexicon when the surface has no number.
std::optional<std::string> normalize_amount(std::string_view surface, const Lexicon& fallback,
                                            AmountLocale ambiguous_as = AmountLocale::german);

std::string format_amount(double value);

// ASCII lowercase with runs of whitespace collapsed to one space and trimmed.
std::string fold_text(std::string_view s);

}  // namespace elig

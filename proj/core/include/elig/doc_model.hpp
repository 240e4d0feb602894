#pragma once

#include <array>
#include <chrono>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace elig {

// Half-open character interval [start, end) in Unicode scalar values.
struct Interval {
    std::size_t start = 0;
    std::size_t end = 0;

    std::size_t length() const noexcept { return end > start ? end - start : 0; }
    bool empty() const noexcept { return end <= start; }
    bool overlaps(const Interval& o) const noexcept { return start < o.end && o.start < end; }

    friend auto operator<=>(const Interval&, const Interval&) = default;
};

enum class TargetType : std::uint8_t {
    coupon_fixed,
    coupon_variable_index,
    coupon_variable_margin,
    coupon_variable_operator,
    coupon_variable_tenor,
    currency,
    early_redemption_amount,
    early_redemption,
    isin,
    principal_amount,
    redemption_at_maturity_amount,
    redemption_at_maturity,
    special_termination,
    special_termination_amount,
    status_non_preferred,
    status_senior_non_preferred,
    type_of_instrument,
};

inline constexpr std::size_t kTargetTypeCount = 17;

inline constexpr std::array<TargetType, kTargetTypeCount> kAllTargetTypes = {
    TargetType::coupon_fixed,
    TargetType::coupon_variable_index,
    TargetType::coupon_variable_margin,
    TargetType::coupon_variable_operator,
    TargetType::coupon_variable_tenor,
    TargetType::currency,
    TargetType::early_redemption_amount,
    TargetType::early_redemption,
    TargetType::isin,
    TargetType::principal_amount,
    TargetType::redemption_at_maturity_amount,
    TargetType::redemption_at_maturity,
    TargetType::special_termination,
    TargetType::special_termination_amount,
    TargetType::status_non_preferred,
    TargetType::status_senior_non_preferred,
    TargetType::type_of_instrument,
};

std::string_view to_string(TargetType t) noexcept;
std::optional<TargetType> parse_target_type(std::string_view name) noexcept;

enum class Criterion : std::uint8_t {
    Coupon,
    Currency,
    EarlyRedemptionAmount,
    PrincipalAmount,
    RedemptionAtMaturity,
    SpecialTerminationRight,
    LiquidationStatus,
    TypeOfInstrument,
};

inline constexpr std::size_t kCriterionCount = 8;

inline constexpr std::array<Criterion, kCriterionCount> kAllCriteria = {
    Criterion::Coupon,
    Criterion::Currency,
    Criterion::EarlyRedemptionAmount,
    Criterion::PrincipalAmount,
    Criterion::RedemptionAtMaturity,
    Criterion::SpecialTerminationRight,
    Criterion::LiquidationStatus,
    Criterion::TypeOfInstrument,
};

std::string_view to_string(Criterion c) noexcept;
std::optional<Criterion> parse_criterion(std::string_view name) noexcept;

enum class Source : std::uint8_t { human, model, baseline };

std::string_view to_string(Source s) noexcept;
std::optional<Source> parse_source(std::string_view name) noexcept;

struct Token {
    std::size_t index = 0;
    std::size_t start = 0;
    std::size_t end = 0;
    std::string surface;

    Interval span() const noexcept { return {start, end}; }
    friend bool operator==(const Token&, const Token&) = default;
};

// A typed, possibly discontinuous evidence span. `id` is optional on input and
// assigned by the service layer so feedback can address individual annotations.
struct Annotation {
    std::string id;
    TargetType type = TargetType::currency;
    std::vector<Interval> fragments;
    Source source = Source::human;
    double confidence = 1.0;
    std::optional<std::string> annotator_id;

    std::size_t first_offset() const noexcept { return fragments.empty() ? 0 : fragments.front().start; }
    friend bool operator==(const Annotation&, const Annotation&) = default;
};

using Date = std::chrono::year_month_day;

std::optional<Date> parse_date(std::string_view iso) noexcept;  // YYYY-MM-DD
std::string format_date(const Date& d);

struct DocumentMetadata {
    std::optional<std::string> isin;
    std::optional<Date> issue_date;
    std::optional<std::string> issuer_group;
    std::optional<std::string> asset_type;
    std::map<std::string, std::string> extra;

    friend bool operator==(const DocumentMetadata&, const DocumentMetadata&) = default;
};

struct Document {
    std::string id;
    std::string text;  // UTF-8
    std::vector<Token> tokens;
    DocumentMetadata metadata;
    std::vector<Annotation> annotations;

    friend bool operator==(const Document&, const Document&) = default;
};

// Empty result iff all Document, Token and Annotation invariants hold.
std::vector<std::string> validate_document(const Document& doc);

// Whitespace segmentation with punctuation split off as single-character tokens.
std::vector<Token> baseline_tokenize(std::string_view text);

// Sorts fragments and rejects empty/overlapping ones; returns violations.
std::vector<std::string> validate_annotation(const Annotation& a, std::size_t text_length);

// Annotations of one type, stable order.
std::vector<Annotation> annotations_of_type(const std::vector<Annotation>& all, TargetType type);

// Canonical ordering used by every producer: (type, fragments, confidence desc, id).
void sort_annotations(std::vector<Annotation>& annotations);

}  // namespace elig

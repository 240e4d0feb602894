#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "elig/decision_tree.hpp"
#include "elig/doc_model.hpp"
#include "elig/normalize.hpp"
#include "elig/serialization.hpp"

namespace elig {

// Value recorded for evidence whose surface could not be normalized.
inline constexpr std::string_view kUnknownValue = "unknown";

enum class NormalizerKind { currency, amount, lexicon, verbatim };

std::string_view to_string(NormalizerKind k) noexcept;

struct Alternative {
    std::string value;
    double confidence = 0.0;
    std::vector<Interval> fragments;

    friend bool operator==(const Alternative&, const Alternative&) = default;
};

struct CriterionDecision {
    Criterion criterion = Criterion::Currency;
    Outcome outcome = Outcome::review;
    std::optional<std::string> chosen_value;
    double confidence = 0.0;
    std::vector<Alternative> alternatives;
    std::string explanation;
    std::vector<Interval> supporting_fragments;
    std::vector<std::string> trace;  // decision-tree path, empty for direct criteria

    friend bool operator==(const CriterionDecision&, const CriterionDecision&) = default;
};

struct Verdict {
    Outcome overall = Outcome::review;
    std::vector<CriterionDecision> decisions;  // one per Criterion, kAllCriteria order

    friend bool operator==(const Verdict&, const Verdict&) = default;
};

// eligible iff all eligible; ineligible iff any ineligible; review otherwise.
Outcome compose_overall(const std::vector<CriterionDecision>& decisions);

// Eligibility rule of a direct criterion: a value is eligible if it is listed
// or, when numeric and a range is configured, lies within the range.
struct EligibleSet {
    std::set<std::string> values;
    std::optional<double> min;  // inclusive
    std::optional<double> max;  // inclusive

    bool contains(const std::string& value) const;
    std::string describe() const;
};

struct TreeBinding {
    Criterion criterion = Criterion::Coupon;
    DecisionTree tree;
};

struct DeciderConfig {
    std::string version = "default-1";
    double threshold = 0.5;
    double conflict_margin = 0.1;
    AmountLocale amount_locale = AmountLocale::german;
    std::map<Criterion, std::vector<TargetType>> mapping;
    std::map<TargetType, NormalizerKind> normalizers;
    std::map<TargetType, Lexicon> lexicons;
    std::map<std::string, std::string> currency_aliases;  // extends the shipped table
    std::map<Criterion, EligibleSet> eligible_values;
    std::vector<TreeBinding> trees;

    const TreeBinding* tree_for(Criterion c) const noexcept;
};

// Throws InputError when the mapping misses a criterion, the threshold leaves
// [0,1], a direct criterion lacks an eligible set or a criterion has two trees.
void check_config(const DeciderConfig& cfg);

// Shipped configuration; Coupon and LiquidationStatus are decided by trees.
DeciderConfig default_decider_config();

Json to_json(const DeciderConfig& cfg);
DeciderConfig decider_config_from_json(const Json& j);
DeciderConfig load_decider_config(const std::string& path);

struct NormalizedEvidence {
    Annotation annotation;
    std::string value;
    std::string surface;
};

// Surface text of an annotation (fragments joined by a single space).
std::string annotation_surface(const std::string& text, const Annotation& a);

std::vector<NormalizedEvidence> normalize_evidence(const std::string& text, const std::vector<Annotation>& evidence,
                                                   const DeciderConfig& cfg);

struct ValueGroup {
    std::string value;
    double confidence = 0.0;         // max over members
    std::size_t first_offset = 0;    // of the representative (max confidence, earliest) member
    std::vector<Interval> fragments; // all members, sorted
    std::vector<std::string> surfaces;
};

struct ValueSelection {
    ValueGroup chosen;
    std::vector<ValueGroup> alternatives;  // confidence descending, then earliest offset
};

// Groups by normalized value; the chosen group has the highest max confidence,
// ties broken by the earliest representative offset. nullopt for no evidence.
std::optional<ValueSelection> select_primary_value(const std::vector<NormalizedEvidence>& evidence);

CriterionDecision decide_direct_criterion(Criterion criterion, const std::vector<NormalizedEvidence>& evidence,
                                          const DeciderConfig& cfg);

// Feature map consumed by decision trees: "<type>.present", "<type>.count",
// "<type>.value" per target type (evidence at or above the threshold), and
// metadata features "issue_date", "issuer_group", "asset_type", "isin",
// "extra.<key>".
FeatureMap assemble_features(const std::vector<NormalizedEvidence>& evidence, const DocumentMetadata& metadata,
                             const DeciderConfig& cfg);

CriterionDecision decide_tree_criterion(Criterion criterion, const DecisionTree& tree,
                                        const std::vector<NormalizedEvidence>& evidence, const FeatureMap& features,
                                        const DeciderConfig& cfg);

// Pure function of (text, annotations, metadata, config).
Verdict decide_document(const Document& doc, const DeciderConfig& cfg);

Json to_json(const CriterionDecision& d);
Json to_json(const Verdict& v);
Verdict verdict_from_json(const Json& j);

}  // namespace elig

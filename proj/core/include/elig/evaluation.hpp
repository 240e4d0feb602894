#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "elig/doc_model.hpp"
#include "elig/serialization.hpp"

namespace elig {

// charset: IoU of the character sets covered by the fragments.
// hull: IoU of the [min start, max end) intervals, ignoring gaps.
enum class IouMode { charset, hull };

// Two empty character sets are equal, so their IoU is 1.
double iou(std::span<const Interval> a, std::span<const Interval> b, IouMode mode = IouMode::charset);
double iou(const Annotation& a, const Annotation& b, IouMode mode = IouMode::charset);

struct MatchedPair {
    std::size_t a = 0;  // index into the first set
    std::size_t b = 0;  // index into the second set
    double iou = 0.0;

    friend bool operator==(const MatchedPair&, const MatchedPair&) = default;
};

struct MatchResult {
    std::vector<MatchedPair> pairs;  // in the order they were taken
    std::vector<std::size_t> unmatched_a;
    std::vector<std::size_t> unmatched_b;
};

// Greedy one-to-one matching by IoU descending (ties: lower a, then lower b).
// Pairs with IoU 0 or below `min_iou` are never matched.
MatchResult match_annotations(std::span<const Annotation> a, std::span<const Annotation> b,
                              IouMode mode = IouMode::charset, double min_iou = 0.0);

struct DocumentAgreement {
    std::string document_id;
    TargetType type = TargetType::currency;
    std::string annotator_a;
    std::string annotator_b;
    std::vector<Annotation> annotations_a;
    std::vector<Annotation> annotations_b;
    MatchResult match;
    double mean_iou = 0.0;  // unmatched annotations count as 0
    std::size_t annotation_count = 0;
};

struct AgreementReport {
    std::map<TargetType, double> per_type;             // weighted by annotation count
    std::map<TargetType, std::size_t> per_type_count;  // annotations of both annotators
    std::vector<DocumentAgreement> documents;          // by document id, then type
    std::vector<std::pair<std::string, std::string>> annotator_pairs;  // distinct, sorted
};

// Annotator ids of a document: annotator_id of its annotations plus the
// comma-separated metadata entry "annotators".
std::vector<std::string> annotators_of(const Document& doc);

// Throws InputError naming the document when it does not have exactly two
// annotators.
AgreementReport iaa_report(std::span<const Document> docs, IouMode mode = IouMode::charset);

struct MatchMode {
    enum class Kind { exact, overlap } kind = Kind::exact;
    double theta = 1.0;

    static MatchMode exact() { return {}; }
    static MatchMode overlap(double theta) { return {Kind::overlap, theta}; }
};

struct PrfCounts {
    std::size_t tp = 0;
    std::size_t pred = 0;
    std::size_t gold = 0;

    PrfCounts& operator+=(const PrfCounts& o) {
        tp += o.tp;
        pred += o.pred;
        gold += o.gold;
        return *this;
    }
    friend bool operator==(const PrfCounts&, const PrfCounts&) = default;
};

struct PrfScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;  // gold count
};

// Conventions: both empty -> P=R=F=1; otherwise a zero denominator gives 0.
PrfScore prf_from_counts(const PrfCounts& c);

// Annotations of one document; type is part of the match in both modes.
PrfCounts count_matches(std::span<const Annotation> pred, std::span<const Annotation> gold, MatchMode mode);
PrfScore prf(std::span<const Annotation> pred, std::span<const Annotation> gold, MatchMode mode = MatchMode::exact());

// Σ value·weight / Σ weight. Throws InputError on negative weights or when all
// weights are zero.
double weighted_average(std::span<const std::pair<double, double>> values);
// Unweighted mean. Throws InputError on an empty list.
double macro_average(std::span<const double> values);

struct TestSetScore {
    std::string test_set;  // gold annotator id
    PrfCounts counts;
    PrfScore score;
};

struct TypeReport {
    TargetType type = TargetType::currency;
    PrfScore pooled;
    double weighted_f1 = 0.0;  // per-test-set F1 weighted by test-set support
    std::vector<TestSetScore> test_sets;
};

struct EvaluationReport {
    std::vector<TypeReport> rows;  // all target types, enum order
    double macro_f1 = 0.0;         // over types with support > 0
};

// Gold test sets are formed per gold annotator id ("gold" when absent); a test
// set covers the documents its annotator touched. Predictions are matched to
// gold documents by id; missing predictions count as empty.
EvaluationReport evaluate_corpus(std::span<const Document> predicted, std::span<const Document> gold,
                                 MatchMode mode = MatchMode::exact());

// Tab-separated: header, one row per type, then "macro_f1<TAB>value".
std::string format_report(const EvaluationReport& report);
std::string format_agreement(const AgreementReport& report);
Json to_json(const AgreementReport& report);

}  // namespace elig

#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "elig/doc_model.hpp"
#include "elig/sequence_decoder.hpp"

namespace elig {

// Evidence Detection Model boundary. Implementations return annotations in
// canonical order (sort_annotations) without ids.
class EvidenceBackend {
public:
    virtual ~EvidenceBackend() = default;
    virtual std::vector<Annotation> detect(const Document& doc) const = 0;
    virtual std::string name() const = 0;
};

enum class RuleValidator { none, isin };

struct GazetteerRule {
    std::string name;
    TargetType type = TargetType::currency;
    // Either a literal list (matched longest first, with word boundaries at
    // alphanumeric edges) or a regular expression.
    std::vector<std::string> literals;
    std::string pattern;
    // Sub-match that becomes the annotation span; 0 is the whole match.
    std::size_t capture_group = 0;
    bool case_insensitive = false;
    RuleValidator validator = RuleValidator::none;
    std::string normalizer_hint;
    double confidence = 1.0;
};

inline constexpr double kLiteralRuleConfidence = 1.0;
inline constexpr double kPatternRuleConfidence = 0.8;

// Shipped rule set covering currencies, amounts in German and English
// formats, ISINs and the phrase types.
std::vector<GazetteerRule> default_rules();

// 12 characters, two-letter country prefix, alphanumeric body, numeric check
// digit and a passing Luhn check over the letter-expanded digit string.
bool validate_isin(std::string_view candidate) noexcept;

class BaselineBackend final : public EvidenceBackend {
public:
    // Throws InputError if a pattern does not compile or a confidence is outside (0,1].
    explicit BaselineBackend(std::vector<GazetteerRule> rules = default_rules());

    std::vector<Annotation> detect(const Document& doc) const override;
    std::string name() const override { return "baseline-rules-1"; }
    const std::vector<GazetteerRule>& rules() const noexcept { return rules_; }

private:
    struct Compiled {
        std::size_t rule;
        std::regex re;
    };
    std::vector<GazetteerRule> rules_;
    std::vector<Compiled> compiled_;
};

std::vector<Annotation> detect_baseline(const Document& doc, std::span<const GazetteerRule> rules);

struct RemoteModelConfig {
    std::string endpoint = "http://127.0.0.1:8090";  // scheme://host:port
    std::string path = "/v1/grid";
    std::chrono::milliseconds timeout{5000};
    std::map<TargetType, std::string> model_ids;  // optional per-type model identifiers
    std::vector<TargetType> types{kAllTargetTypes.begin(), kAllTargetTypes.end()};
    std::size_t max_seq_len = 256;
    std::size_t stride = 64;
    TransitionMatrix transitions = default_bio_transitions();
};

// Fetches one LabelGrid per (type, window), decodes with constrained_viterbi and
// scores spans with span_confidence. Per-type requests run concurrently.
// Throws BackendUnavailable on connection failure or timeout, ProtocolError on
// malformed responses.
std::vector<Annotation> detect_remote(const Document& doc, const RemoteModelConfig& cfg);

class RemoteBackend final : public EvidenceBackend {
public:
    explicit RemoteBackend(RemoteModelConfig cfg);
    std::vector<Annotation> detect(const Document& doc) const override { return detect_remote(doc, cfg_); }
    std::string name() const override { return "remote:" + cfg_.endpoint; }

private:
    RemoteModelConfig cfg_;
};

// Union of several backends; identical (type, fragments) keep the highest confidence.
class CombinedBackend final : public EvidenceBackend {
public:
    explicit CombinedBackend(std::vector<std::shared_ptr<const EvidenceBackend>> parts);
    std::vector<Annotation> detect(const Document& doc) const override;
    std::string name() const override;

private:
    std::vector<std::shared_ptr<const EvidenceBackend>> parts_;
};

// Drops exact duplicates (same type and fragments), keeping the max
// confidence, then sorts by (type, start, end).
std::vector<Annotation> merge_detections(std::vector<Annotation> annotations);

}  // namespace elig

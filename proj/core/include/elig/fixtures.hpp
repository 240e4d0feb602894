#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "elig/doc_model.hpp"

namespace elig {

// Artifacts applied to filler sentences only, so gold spans stay intact.
struct FixtureNoise {
    double column_break_rate = 0.0;  // page-number lines between sentences
    double hyphenation_rate = 0.0;   // "Veröffent-\nlichung"
};

struct FixtureSpec {
    std::uint64_t seed = 1;
    std::size_t document_count = 16;
    std::map<TargetType, std::size_t> counts;  // gold mentions per type, whole corpus
    double german_share = 0.6;                 // probability that a document is German
    FixtureNoise noise;
};

// Counts shaped after the relative type frequencies of a prospectus corpus.
FixtureSpec default_fixture_spec();

// Template-based prospectus snippets. Every mention yields exactly one gold
// annotation (source human, annotator "gold"). Same spec, same bytes; all
// counts zero gives an empty corpus.
std::vector<Document> generate_corpus(const FixtureSpec& spec);

// Appends the check digit to an 11-character ISIN prefix.
std::string complete_isin(const std::string& prefix);

}  // namespace elig

#include <gtest/gtest.h>

#include "elig/doc_model.hpp"
#include "elig/errors.hpp"
#include "elig/serialization.hpp"
#include "elig/unicode.hpp"
#include "oracles.hpp"

using namespace elig;

namespace {

bool mentions(const std::vector<std::string>& violations, const std::string& needle) {
    for (const auto& v : violations)
        if (v.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST(Tokenize, SplitsPunctuation) {
    const auto toks = baseline_tokenize("EUR 50.000,00");
    std::vector<std::string> surfaces;
    for (const auto& t : toks) surfaces.push_back(t.surface);
    EXPECT_EQ(surfaces, (std::vector<std::string>{"EUR", "50", ".", "000", ",", "00"}));
    ASSERT_EQ(toks.size(), 6u);
    EXPECT_EQ(toks[0].span(), (Interval{0, 3}));
    EXPECT_EQ(toks[1].span(), (Interval{4, 6}));
    EXPECT_EQ(toks[2].span(), (Interval{6, 7}));
    EXPECT_EQ(toks[5].span(), (Interval{11, 13}));
    for (std::size_t i = 0; i < toks.size(); ++i) EXPECT_EQ(toks[i].index, i);
}

TEST(Tokenize, EmptyText) {
    EXPECT_TRUE(baseline_tokenize("").empty());
    EXPECT_TRUE(baseline_tokenize("   \n\t").empty());
}

TEST(Tokenize, OffsetsSkipGaps) {
    const auto toks = baseline_tokenize("a  b");
    ASSERT_EQ(toks.size(), 2u);
    EXPECT_EQ(toks[0].span(), (Interval{0, 1}));
    EXPECT_EQ(toks[1].span(), (Interval{3, 4}));
}

TEST(Tokenize, OffsetsAreCodePoints) {
    const auto toks = baseline_tokenize("Währung: €");
    ASSERT_EQ(toks.size(), 3u);
    EXPECT_EQ(toks[0].surface, "Währung");
    EXPECT_EQ(toks[0].span(), (Interval{0, 7}));
    EXPECT_EQ(toks[1].span(), (Interval{7, 8}));
    EXPECT_EQ(toks[2].surface, "€");
    EXPECT_EQ(toks[2].span(), (Interval{9, 10}));
}

TEST(Tokenize, SurfacesMatchSlicesOnRandomText) {
    testgen::Rng rng(7);
    const std::vector<std::string> pieces = {"EUR", " ", "  ", "1.000,50", "ü", "€", "\n", "(a)", "Zins-", "%", "x;y"};
    for (int round = 0; round < 200; ++round) {
        std::string text;
        const std::size_t n = rng.below(20);
        for (std::size_t i = 0; i < n; ++i) text += pieces[rng.below(pieces.size())];
        Document doc;
        doc.id = "r";
        doc.text = text;
        doc.tokens = baseline_tokenize(text);
        EXPECT_TRUE(validate_document(doc).empty()) << text;
        // Re-joining the surfaces with the original gaps reproduces the text,
        // and the gaps are whitespace only.
        const auto cps = utf8::decode(text);
        std::u32string rebuilt;
        std::size_t pos = 0;
        for (const auto& t : doc.tokens) {
            for (; pos < t.start; ++pos) {
                EXPECT_TRUE(cps[pos] == U' ' || cps[pos] == U'\n' || cps[pos] == U'\t') << text;
                rebuilt.push_back(cps[pos]);
            }
            rebuilt += utf8::decode(t.surface);
            pos = t.end;
        }
        rebuilt += cps.substr(std::min(pos, cps.size()));
        EXPECT_EQ(rebuilt, cps);
    }
}

TEST(Validate, WellFormedDocument) {
    Document doc;
    doc.id = "d";
    doc.text = "Currency: Euro";
    doc.tokens = baseline_tokenize(doc.text);
    doc.annotations.push_back({"", TargetType::currency, {{10, 14}}, Source::human, 1.0, std::nullopt});
    EXPECT_TRUE(validate_document(doc).empty());
}

TEST(Validate, FragmentOutOfBounds) {
    Document doc;
    doc.id = "d";
    doc.text = std::string(100, 'x');
    doc.tokens = baseline_tokenize(doc.text);
    doc.annotations.push_back({"", TargetType::currency, {{10, 500}}, Source::human, 1.0, std::nullopt});
    const auto v = validate_document(doc);
    ASSERT_FALSE(v.empty());
    EXPECT_TRUE(mentions(v, "out of bounds"));
    EXPECT_TRUE(mentions(v, "500"));
}

TEST(Validate, DegenerateToken) {
    Document doc;
    doc.id = "d";
    doc.text = "abcdefgh";
    doc.tokens.push_back({0, 5, 3, ""});
    const auto v = validate_document(doc);
    EXPECT_TRUE(mentions(v, "token start >= end"));
}

TEST(Validate, OverlappingAndUnsortedTokens) {
    Document doc;
    doc.id = "d";
    doc.text = "abcdefgh";
    doc.tokens.push_back({0, 0, 4, "abcd"});
    doc.tokens.push_back({1, 2, 6, "cdef"});
    EXPECT_FALSE(validate_document(doc).empty());
}

TEST(Validate, TokenSurfaceMustMatch) {
    Document doc;
    doc.id = "d";
    doc.text = "abc";
    doc.tokens.push_back({0, 0, 3, "xyz"});
    EXPECT_FALSE(validate_document(doc).empty());
}

TEST(Validate, AnnotationInvariants) {
    Document doc;
    doc.id = "d";
    doc.text = std::string(50, 'a');
    doc.tokens = baseline_tokenize(doc.text);
    Annotation overlapping{"x", TargetType::isin, {{0, 10}, {5, 12}}, Source::human, 1.0, std::nullopt};
    Annotation empty_frag{"y", TargetType::isin, {{3, 3}}, Source::human, 1.0, std::nullopt};
    Annotation no_frags{"z", TargetType::isin, {}, Source::human, 1.0, std::nullopt};
    Annotation bad_conf{"w", TargetType::isin, {{0, 1}}, Source::model, 1.5, std::nullopt};
    for (const auto& a : {overlapping, empty_frag, no_frags, bad_conf}) {
        doc.annotations = {a};
        EXPECT_FALSE(validate_document(doc).empty()) << a.id;
    }
}

TEST(Validate, SameTypeOverlapBetweenAnnotationsIsAllowed) {
    Document doc;
    doc.id = "d";
    doc.text = std::string(30, 'a');
    doc.tokens = baseline_tokenize(doc.text);
    doc.annotations.push_back({"a", TargetType::currency, {{0, 10}}, Source::human, 1.0, std::nullopt});
    doc.annotations.push_back({"b", TargetType::currency, {{5, 15}}, Source::human, 1.0, std::nullopt});
    EXPECT_TRUE(validate_document(doc).empty());
}

TEST(Validate, MetadataDate) {
    EXPECT_TRUE(parse_date("2020-02-29").has_value());
    EXPECT_FALSE(parse_date("2021-02-29").has_value());
    EXPECT_FALSE(parse_date("2021-13-01").has_value());
    EXPECT_FALSE(parse_date("21-01-01").has_value());
    EXPECT_EQ(format_date(*parse_date("2019-01-01")), "2019-01-01");
}

TEST(Taxonomy, NamesRoundTrip) {
    EXPECT_EQ(kAllTargetTypes.size(), 17u);
    for (auto t : kAllTargetTypes) EXPECT_EQ(parse_target_type(to_string(t)), t);
    EXPECT_EQ(to_string(TargetType::status_senior_non_preferred), "status_senior_non_preferred");
    EXPECT_FALSE(parse_target_type("coupon").has_value());
    EXPECT_EQ(kAllCriteria.size(), 8u);
    for (auto c : kAllCriteria) EXPECT_EQ(parse_criterion(to_string(c)), c);
    EXPECT_EQ(to_string(Criterion::SpecialTerminationRight), "SpecialTerminationRight");
}

TEST(Serialization, DocumentRoundTrip) {
    Document doc;
    doc.id = "fx";
    doc.text = "Währung: Euro. ISIN DE000A1EWWW0";
    doc.tokens = baseline_tokenize(doc.text);
    doc.metadata.isin = "DE000A1EWWW0";
    doc.metadata.issue_date = parse_date("2020-05-01");
    doc.metadata.issuer_group = "credit_institution";
    doc.metadata.extra["rating"] = "AA";
    doc.annotations.push_back({"a1", TargetType::currency, {{9, 13}}, Source::model, 0.75, std::string("ann")});
    doc.annotations.push_back({"", TargetType::isin, {{20, 32}}, Source::baseline, 0.8, std::nullopt});
    const Json j = to_json(doc);
    EXPECT_EQ(document_from_json(j), doc);
    EXPECT_EQ(j.at("annotations")[0].at("fragments"), Json::parse("[[9,13]]"));

    // Without tokens the baseline tokenizer fills them in.
    Json bare = to_json(doc, false);
    EXPECT_FALSE(bare.contains("tokens"));
    EXPECT_EQ(document_from_json(bare).tokens, doc.tokens);
}

TEST(Serialization, MalformedRecords) {
    EXPECT_THROW(document_from_json(Json::parse(R"({"text": 5})")), FormatError);
    EXPECT_THROW(annotation_from_json(Json::parse(R"({"type":"nope","fragments":[[0,1]]})")), FormatError);
    EXPECT_THROW(annotation_from_json(Json::parse(R"({"type":"isin","fragments":[[0]]})")), FormatError);
    EXPECT_THROW(parse_json("{"), FormatError);
}

TEST(Annotations, CanonicalSort) {
    std::vector<Annotation> v = {
        {"b", TargetType::isin, {{5, 6}}, Source::model, 0.5, std::nullopt},
        {"a", TargetType::currency, {{9, 10}}, Source::model, 0.5, std::nullopt},
        {"c", TargetType::currency, {{1, 2}}, Source::model, 0.4, std::nullopt},
        {"d", TargetType::currency, {{1, 2}}, Source::model, 0.9, std::nullopt},
    };
    sort_annotations(v);
    EXPECT_EQ(v[0].id, "d");
    EXPECT_EQ(v[1].id, "c");
    EXPECT_EQ(v[2].id, "a");
    EXPECT_EQ(v[3].id, "b");
}

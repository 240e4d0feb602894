#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "elig/evaluation.hpp"
#include "elig/evidence.hpp"
#include "elig/fixtures.hpp"
#include "elig/serialization.hpp"
#include "oracles.hpp"

using namespace elig;

namespace {

std::string dump(const std::vector<Document>& docs) {
    std::ostringstream out;
    write_corpus(out, docs);
    return out.str();
}

std::size_t count_type(const std::vector<Document>& docs, TargetType t) {
    std::size_t n = 0;
    for (const auto& d : docs) n += annotations_of_type(d.annotations, t).size();
    return n;
}

}  // namespace

TEST(Fixtures, ExactMentionCount) {
    FixtureSpec spec;
    spec.seed = 1;
    spec.counts[TargetType::currency] = 10;
    const auto docs = generate_corpus(spec);
    EXPECT_EQ(count_type(docs, TargetType::currency), 10u);
    for (auto t : kAllTargetTypes)
        if (t != TargetType::currency) EXPECT_EQ(count_type(docs, t), 0u);
}

TEST(Fixtures, SameSeedSameBytes) {
    const auto spec = default_fixture_spec();
    EXPECT_EQ(dump(generate_corpus(spec)), dump(generate_corpus(spec)));
    auto other = spec;
    other.seed = 2;
    EXPECT_NE(dump(generate_corpus(spec)), dump(generate_corpus(other)));
}

TEST(Fixtures, ZeroCountsEmpty) {
    FixtureSpec spec;
    for (auto t : kAllTargetTypes) spec.counts[t] = 0;
    EXPECT_TRUE(generate_corpus(spec).empty());
}

TEST(Fixtures, DefaultSpecCoversAllTypes) {
    const auto spec = default_fixture_spec();
    const auto docs = generate_corpus(spec);
    EXPECT_EQ(docs.size(), spec.document_count);
    for (auto t : kAllTargetTypes) EXPECT_EQ(count_type(docs, t), spec.counts.at(t)) << to_string(t);
    for (const auto& d : docs) {
        EXPECT_TRUE(validate_document(d).empty()) << d.id;
        for (const auto& a : d.annotations) {
            EXPECT_EQ(a.annotator_id, "gold");
            EXPECT_EQ(a.source, Source::human);
        }
        ASSERT_TRUE(d.metadata.isin.has_value());
        EXPECT_TRUE(oracle::isin_valid(*d.metadata.isin));
    }
}

TEST(Fixtures, CommittedCorpusIsValid) {
    const auto docs = read_corpus_file(std::string(ELIG_TEST_DATA_DIR) + "/fixtures.jsonl");
    ASSERT_EQ(docs.size(), 16u);
    for (const auto& d : docs) EXPECT_TRUE(validate_document(d).empty()) << d.id;
    // Serializing again reproduces the committed bytes.
    std::ifstream in(std::string(ELIG_TEST_DATA_DIR) + "/fixtures.jsonl", std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    EXPECT_EQ(dump(docs), buf.str());
}

TEST(Fixtures, BaselineQualityOnCommittedCorpus) {
    const auto gold = read_corpus_file(std::string(ELIG_TEST_DATA_DIR) + "/fixtures.jsonl");
    BaselineBackend backend;
    std::vector<Document> pred;
    for (const auto& g : gold) {
        auto d = g;
        d.annotations = backend.detect(g);
        pred.push_back(std::move(d));
    }
    const auto r = evaluate_corpus(pred, gold, MatchMode::exact());
    EXPECT_GE(r.rows[static_cast<std::size_t>(TargetType::currency)].pooled.f1, 0.90);
    EXPECT_GE(r.rows[static_cast<std::size_t>(TargetType::isin)].pooled.f1, 0.90);
}

TEST(Fixtures, CompleteIsin) {
    EXPECT_EQ(complete_isin("US037833100"), "US0378331005");
}

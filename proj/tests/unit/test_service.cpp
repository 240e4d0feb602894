#include <gtest/gtest.h>

#include <filesystem>

#include "elig/errors.hpp"
#include "elig/serialization.hpp"
#include "elig/service.hpp"

using namespace elig;

namespace {

std::vector<Document> fixtures() {
    return read_corpus_file(std::string(ELIG_TEST_DATA_DIR) + "/fixtures.jsonl");
}

ControllerOptions options() {
    ControllerOptions o;
    o.backend = std::make_shared<const BaselineBackend>();
    int tick = 0;
    o.clock = [tick]() mutable { return "2024-01-01T00:00:" + std::string(tick < 10 ? "0" : "") + std::to_string(tick++) + "Z"; };
    return o;
}

Document bare(Document d) {
    d.annotations.clear();
    return d;
}

}  // namespace

TEST(Service, PredictThenDecideIsFixpoint) {
    Controller c(std::make_shared<MemoryStore>(), options());
    for (const auto& d : fixtures()) {
        const auto p = c.predict(bare(d));
        auto again = bare(d);
        again.annotations = p.annotations;
        const auto q = c.decide(again);
        EXPECT_EQ(to_json(q.verdict).dump(), to_json(p.verdict).dump()) << d.id;
        EXPECT_EQ(q.annotations, p.annotations);
    }
}

TEST(Service, PredictAssignsIdsAndStores) {
    Controller c(std::make_shared<MemoryStore>(), options());
    const auto d = fixtures().front();
    const auto p = c.predict(d);  // gold annotations are dropped with a warning
    ASSERT_FALSE(p.warnings.empty());
    ASSERT_FALSE(p.annotations.empty());
    EXPECT_EQ(p.annotations[0].id, "a001");
    EXPECT_EQ(p.versions.at("backend"), "baseline-rules-1");
    EXPECT_EQ(p.versions.at("config"), "default-1");
    EXPECT_TRUE(c.repository().has_document(d.id));
    EXPECT_TRUE(c.repository().get_prediction(d.id).has_value());
    EXPECT_EQ(c.repository().state(d.id)->annotations, p.annotations);
    for (const auto& dec : p.verdict.decisions)
        for (const auto& f : dec.supporting_fragments) EXPECT_LE(f.end, d.text.size());
}

TEST(Service, EmptyTextIsAllReview) {
    Controller c(std::make_shared<MemoryStore>(), options());
    Document d;
    d.id = "empty";
    const auto p = c.predict(d);
    EXPECT_EQ(p.verdict.overall, Outcome::review);
    for (const auto& dec : p.verdict.decisions) EXPECT_EQ(dec.outcome, Outcome::review);
}

TEST(Service, InvalidDocumentRejected) {
    Controller c(std::make_shared<MemoryStore>(), options());
    Document d;
    d.id = "bad";
    d.text = "short";
    d.annotations.push_back({"", TargetType::currency, {{0, 50}}, Source::human, 1.0, std::nullopt});
    EXPECT_THROW(c.decide(d), ValidationError);
    d.annotations.clear();
    d.tokens = {{0, 3, 1, ""}};
    EXPECT_THROW(c.predict(d), ValidationError);
}

TEST(Service, DecideIsIdempotentAndStoresNothing) {
    auto store = std::make_shared<MemoryStore>();
    Controller c(store, options());
    const auto d = fixtures()[1];
    const auto a = to_json(c.decide(d), false).dump();
    const auto b = to_json(c.decide(d), false).dump();
    EXPECT_EQ(a, b);
    EXPECT_TRUE(store->keys("").empty());
}

TEST(Service, FeedbackFlow) {
    Controller c(std::make_shared<MemoryStore>(), options());
    const auto d = fixtures().front();
    const auto p = c.predict(bare(d));
    ASSERT_GE(p.annotations.size(), 2u);

    FeedbackRecord confirm;
    confirm.document_id = d.id;
    confirm.reviewer_id = "rev1";
    const auto r1 = c.submit_feedback(confirm);
    EXPECT_EQ(r1.sequence, 0u);
    EXPECT_EQ(r1.resulting_annotations, p.annotations);
    EXPECT_TRUE(c.repository().state(d.id)->export_eligible);

    FeedbackRecord edit;
    edit.document_id = d.id;
    edit.reviewer_id = "rev1";
    Annotation changed = p.annotations[0];
    changed.fragments[0].end -= 1;
    edit.actions.push_back({FeedbackAction::edited, changed.id, changed});
    edit.actions.push_back({FeedbackAction::deleted, p.annotations[1].id, std::nullopt});
    Annotation extra{"", TargetType::currency, {{0, 3}}, Source::model, 0.2, std::nullopt};
    edit.actions.push_back({FeedbackAction::added, "", extra});
    const auto r2 = c.submit_feedback(edit);
    EXPECT_EQ(r2.sequence, 1u);
    EXPECT_EQ(r2.resulting_annotations.size(), p.annotations.size());
    bool saw_edit = false, saw_added = false;
    for (const auto& a : r2.resulting_annotations) {
        EXPECT_NE(a.id, p.annotations[1].id);
        if (a.id == changed.id) {
            saw_edit = true;
            EXPECT_EQ(a.fragments, changed.fragments);
            EXPECT_EQ(a.source, Source::human);
            EXPECT_EQ(a.annotator_id, "rev1");
        }
        if (a.fragments == extra.fragments && a.type == extra.type) {
            saw_added = true;
            EXPECT_DOUBLE_EQ(a.confidence, 1.0);
            EXPECT_FALSE(a.id.empty());
        }
    }
    EXPECT_TRUE(saw_edit);
    EXPECT_TRUE(saw_added);

    // Replay of the immutable log gives the materialized state.
    EXPECT_EQ(c.repository().replay(d.id), *c.repository().state(d.id));
    EXPECT_EQ(c.repository().feedback_log(d.id).size(), 2u);
}

TEST(Service, FeedbackErrors) {
    Controller c(std::make_shared<MemoryStore>(), options());
    FeedbackRecord r;
    r.document_id = "nope";
    EXPECT_THROW(c.submit_feedback(r), NotFoundError);

    const auto d = fixtures().front();
    c.predict(bare(d));
    FeedbackRecord bad;
    bad.document_id = d.id;
    bad.actions.push_back({FeedbackAction::deleted, "zzz", std::nullopt});
    EXPECT_THROW(c.submit_feedback(bad), ValidationError);
    FeedbackRecord oob;
    oob.document_id = d.id;
    oob.actions.push_back({FeedbackAction::added, "", Annotation{"", TargetType::isin, {{0, 1000000}}, Source::human, 1.0, std::nullopt}});
    EXPECT_THROW(c.submit_feedback(oob), ValidationError);
    EXPECT_TRUE(c.repository().feedback_log(d.id).empty());
}

TEST(Service, ExportOnlyReviewedAndStable) {
    Controller c(std::make_shared<MemoryStore>(), options());
    EXPECT_EQ(c.export_training(), "");
    const auto docs = fixtures();
    for (const auto& d : docs) c.predict(bare(d));
    EXPECT_EQ(c.export_training(), "");
    FeedbackRecord confirm;
    confirm.document_id = docs[2].id;
    c.submit_feedback(confirm);
    const auto once = c.export_training();
    EXPECT_EQ(once, c.export_training());
    // Equals build_training_examples over the confirmed set.
    auto doc = *c.repository().get_document(docs[2].id);
    doc.annotations = c.repository().state(docs[2].id)->annotations;
    std::string want;
    for (const auto& ex : build_training_examples(doc)) want += to_json(ex).dump() + "\n";
    EXPECT_EQ(once, want);
}

TEST(Service, RepredictKeepsReviewedState) {
    Controller c(std::make_shared<MemoryStore>(), options());
    const auto d = fixtures().front();
    const auto p = c.predict(bare(d));
    FeedbackRecord del;
    del.document_id = d.id;
    del.actions.push_back({FeedbackAction::deleted, p.annotations[0].id, std::nullopt});
    c.submit_feedback(del);
    const auto before = *c.repository().state(d.id);
    const auto again = c.predict(bare(d));
    EXPECT_EQ(*c.repository().state(d.id), before);
    EXPECT_FALSE(again.warnings.empty());
}

TEST(Service, FileStoreReplayAcrossRestarts) {
    const auto dir = std::filesystem::temp_directory_path() / "elig-test-service-replay";
    std::filesystem::remove_all(dir);
    const auto d = fixtures()[3];
    DocumentState live;
    {
        Controller c(std::make_shared<FileStore>(dir.string()), options());
        const auto p = c.predict(bare(d));
        FeedbackRecord r;
        r.document_id = d.id;
        r.actions.push_back({FeedbackAction::deleted, p.annotations.back().id, std::nullopt});
        c.submit_feedback(r);
        FeedbackRecord confirm;
        confirm.document_id = d.id;
        c.submit_feedback(confirm);
        live = *c.repository().state(d.id);
    }
    Controller reopened(std::make_shared<FileStore>(dir.string()), options());
    EXPECT_EQ(reopened.repository().replay(d.id), live);
    std::filesystem::remove_all(dir);
}

TEST(Service, FeedbackJsonRoundTrip) {
    FeedbackRecord r;
    r.document_id = "d";
    r.reviewer_id = "rev";
    r.actions.push_back({FeedbackAction::added, "a009", Annotation{"a009", TargetType::isin, {{1, 13}}, Source::human, 1.0, std::string("rev")}});
    r.actions.push_back({FeedbackAction::confirmed, "a001", std::nullopt});
    r.timestamp = "2024-01-01T00:00:00Z";
    r.sequence = 4;
    const auto back = feedback_record_from_json(to_json(r));
    EXPECT_EQ(to_json(back).dump(), to_json(r).dump());
    EXPECT_EQ(parse_feedback_action("edited"), FeedbackAction::edited);
    EXPECT_FALSE(parse_feedback_action("approved").has_value());
}

TEST(Service, PredictResponseJsonRoundTrip) {
    Controller c(std::make_shared<MemoryStore>(), options());
    const auto p = c.predict(bare(fixtures()[4]));
    const auto j = to_json(p, false);
    EXPECT_FALSE(j.contains("timings"));
    EXPECT_EQ(to_json(predict_response_from_json(j), false).dump(), j.dump());
}

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "elig/bio_codec.hpp"
#include "elig/decider.hpp"
#include "elig/doc_model.hpp"
#include "elig/evidence.hpp"
#include "elig/serialization.hpp"
#include "elig/store.hpp"

namespace elig {

inline constexpr std::string_view kServiceVersion = "elig-service-1";

struct PredictResponse {
    std::string document_id;
    Verdict verdict;
    std::vector<Annotation> annotations;
    std::map<std::string, std::string> versions;  // backend, config, service
    std::vector<std::string> warnings;
    std::map<std::string, double> timings;  // milliseconds; excluded from golden comparisons
};

// `include_timings=false` gives the byte-stable form used for goldens.
Json to_json(const PredictResponse& r, bool include_timings = true);
PredictResponse predict_response_from_json(const Json& j);

enum class FeedbackAction { confirmed, edited, added, deleted };

std::string_view to_string(FeedbackAction a) noexcept;
std::optional<FeedbackAction> parse_feedback_action(std::string_view s) noexcept;

struct FeedbackItem {
    FeedbackAction action = FeedbackAction::confirmed;
    std::string annotation_id;
    std::optional<Annotation> annotation;  // required for edited and added
};

struct FeedbackRecord {
    std::string document_id;
    std::string reviewer_id;
    std::vector<FeedbackItem> actions;
    std::vector<Annotation> resulting_annotations;  // filled in by the controller
    std::string timestamp;                          // filled in by the controller
    std::size_t sequence = 0;                       // position in the document's log
};

Json to_json(const FeedbackRecord& r);
FeedbackRecord feedback_record_from_json(const Json& j);

// Applies one record's actions to an annotation set (last writer wins per id).
// Throws ValidationError for actions that reference unknown ids, duplicate an
// existing id or lack the annotation payload.
std::vector<Annotation> apply_feedback(std::vector<Annotation> current, const FeedbackRecord& record);

// Actions turning `before` into `after`, matched by annotation id.
std::vector<FeedbackItem> diff_annotations(const std::vector<Annotation>& before, const std::vector<Annotation>& after);

// Materialized view of one document.
struct DocumentState {
    std::vector<Annotation> annotations;
    bool export_eligible = false;
    std::size_t feedback_count = 0;

    friend bool operator==(const DocumentState&, const DocumentState&) = default;
};

Json to_json(const DocumentState& s);
DocumentState document_state_from_json(const Json& j);

// Persistence of documents, predictions, the feedback log and the materialized
// state on top of a key-value store.
class DocumentRepository {
public:
    explicit DocumentRepository(std::shared_ptr<KeyValueStore> store);

    bool has_document(const std::string& id) const;
    // Stores the document; its annotations become the base of the state fold.
    void put_document(const Document& doc);
    std::optional<Document> get_document(const std::string& id) const;  // base annotations
    std::vector<std::string> document_ids() const;

    void put_prediction(const std::string& id, const Json& response);
    std::optional<Json> get_prediction(const std::string& id) const;

    void append_feedback(const FeedbackRecord& record);
    std::vector<FeedbackRecord> feedback_log(const std::string& id) const;

    std::optional<DocumentState> state(const std::string& id) const;
    void put_state(const std::string& id, const DocumentState& state);

    // Recomputes the state from the base annotations and the feedback log.
    DocumentState replay(const std::string& id) const;

    KeyValueStore& store() noexcept { return *store_; }

private:
    std::shared_ptr<KeyValueStore> store_;
};

struct ControllerOptions {
    DeciderConfig decider = default_decider_config();
    std::shared_ptr<const EvidenceBackend> backend;
    // Used when `backend` raises BackendUnavailable or ProtocolError.
    std::shared_ptr<const EvidenceBackend> fallback;
    std::size_t max_seq_len = kDefaultMaxSeqLen;
    std::size_t stride = kDefaultStride;
    std::function<std::string()> clock;  // ISO-8601 UTC; defaults to the system clock
};

// Mediates between store, evidence backend and decider. Writes for one
// document are serialized; requests for different documents run in parallel.
class Controller {
public:
    Controller(std::shared_ptr<KeyValueStore> store, ControllerOptions options);

    // Stores a document together with its (e.g. gold) annotations, without
    // running any model.
    void ingest(Document doc);

    // Runs the evidence backend and the decider; submitted annotations are
    // ignored. Stores the document and the response.
    PredictResponse predict(Document doc);

    // Decider only, on the submitted annotations. Stores nothing.
    PredictResponse decide(Document doc) const;

    // Appends the record to the document's log and updates the materialized
    // state. Throws NotFoundError for unknown documents.
    FeedbackRecord submit_feedback(FeedbackRecord record);

    // {document, state, prediction, feedback}. Throws NotFoundError.
    Json get_document(const std::string& id) const;

    // Line-delimited TrainingExamples of export-eligible documents, by id.
    std::string export_training() const;

    DocumentRepository& repository() noexcept { return repo_; }
    const ControllerOptions& options() const noexcept { return options_; }
    std::string backend_name() const;

private:
    std::shared_ptr<std::mutex> lock_for(const std::string& id) const;
    Verdict run_decider(const Document& doc) const;

    DocumentRepository repo_;
    ControllerOptions options_;
    mutable std::mutex locks_mu_;
    mutable std::map<std::string, std::shared_ptr<std::mutex>> locks_;
};

// Sorts annotations canonically and gives every annotation without an id a
// fresh one ("a001", "a002", ...) not used by the others.
void assign_annotation_ids(std::vector<Annotation>& annotations);

// Minimal HTTP layer over a Controller.
struct HttpReply {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

// Routes a request without any socket involvement:
//   POST /v1/predict, POST /v1/decide, POST /v1/documents/{id}/feedback,
//   GET /v1/documents/{id}, GET /v1/export/training, GET /health
HttpReply route_request(Controller& controller, const std::string& method, const std::string& path,
                        const std::string& body);

class HttpServer {
public:
    explicit HttpServer(Controller& controller);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    // Returns the bound port (a free one when `port` is 0); throws InputError.
    int bind(const std::string& host, int port);
    // Blocks until stop().
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace elig

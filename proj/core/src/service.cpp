#include "elig/service.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <set>

#include "elig/errors.hpp"
#include "elig/unicode.hpp"

namespace elig {

namespace {

constexpr std::array<std::string_view, 4> kActionNames = {"confirmed", "edited", "added", "deleted"};

std::string system_clock_iso() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

std::string next_free_id(std::set<std::string>& used, std::size_t& counter) {
    for (;;) {
        char buf[24];
        std::snprintf(buf, sizeof buf, "a%03zu", ++counter);
        if (used.insert(buf).second) return buf;
    }
}

Json annotations_json(const std::vector<Annotation>& anns) {
    Json out = Json::array();
    for (const auto& a : anns) out.push_back(to_json(a));
    return out;
}

std::vector<Annotation> annotations_from(const Json& j) {
    std::vector<Annotation> out;
    if (!j.is_array()) throw FormatError("annotations must be an array");
    for (const auto& a : j) out.push_back(annotation_from_json(a));
    return out;
}

// Annotation invariants plus the per-type non-overlap rule training export relies on.
std::vector<std::string> check_annotation_set(const Document& doc, const std::vector<Annotation>& anns) {
    std::vector<std::string> violations;
    const std::size_t len = utf8::length(doc.text);
    std::set<std::string> ids;
    for (const auto& a : anns) {
        for (auto& v : validate_annotation(a, len)) violations.push_back("annotation '" + a.id + "': " + v);
        if (!a.id.empty() && !ids.insert(a.id).second) violations.push_back("duplicate annotation id '" + a.id + "'");
    }
    if (!violations.empty()) return violations;
    for (auto t : kAllTargetTypes) {
        try {
            encode_bio(doc.tokens, anns, t);
        } catch (const OverlapError& e) {
            violations.push_back(e.what());
        }
    }
    return violations;
}

Verdict degraded_verdict(const std::string& reason) {
    Verdict v;
    for (auto c : kAllCriteria) {
        CriterionDecision d;
        d.criterion = c;
        d.outcome = Outcome::review;
        d.explanation = std::string(to_string(c)) + ": evidence detection unavailable (" + reason +
                        "); marked for human evaluation";
        v.decisions.push_back(std::move(d));
    }
    v.overall = Outcome::review;
    return v;
}

const std::string kDocumentPrefix = "document/";
const std::string kPredictionPrefix = "prediction/";
const std::string kStatePrefix = "state/";
const std::string kFeedbackPrefix = "feedback/";

}  // namespace

std::string_view to_string(FeedbackAction a) noexcept {
    return kActionNames[static_cast<std::size_t>(a)];
}

std::optional<FeedbackAction> parse_feedback_action(std::string_view s) noexcept {
    for (std::size_t i = 0; i < kActionNames.size(); ++i)
        if (kActionNames[i] == s) return static_cast<FeedbackAction>(i);
    return std::nullopt;
}

Json to_json(const PredictResponse& r, bool include_timings) {
    Json j;
    j["document_id"] = r.document_id;
    j["verdict"] = to_json(r.verdict);
    j["annotations"] = annotations_json(r.annotations);
    Json versions = Json::object();
    for (const auto& [k, v] : r.versions) versions[k] = v;
    j["versions"] = std::move(versions);
    j["warnings"] = r.warnings;
    if (include_timings) {
        Json timings = Json::object();
        for (const auto& [k, v] : r.timings) timings[k] = v;
        j["timings"] = std::move(timings);
    }
    return j;
}

PredictResponse predict_response_from_json(const Json& j) {
    try {
        PredictResponse r;
        r.document_id = j.at("document_id").get<std::string>();
        r.verdict = verdict_from_json(j.at("verdict"));
        r.annotations = annotations_from(j.at("annotations"));
        for (const auto& [k, v] : j.at("versions").items()) r.versions[k] = v.get<std::string>();
        r.warnings = j.at("warnings").get<std::vector<std::string>>();
        if (j.contains("timings"))
            for (const auto& [k, v] : j.at("timings").items()) r.timings[k] = v.get<double>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed predict response: ") + e.what());
    }
}

Json to_json(const FeedbackRecord& r) {
    Json j;
    j["document_id"] = r.document_id;
    j["reviewer_id"] = r.reviewer_id;
    j["sequence"] = r.sequence;
    j["timestamp"] = r.timestamp;
    Json actions = Json::array();
    for (const auto& item : r.actions) {
        Json a;
        a["action"] = to_string(item.action);
        a["annotation_id"] = item.annotation_id;
        if (item.annotation) a["annotation"] = to_json(*item.annotation);
        actions.push_back(std::move(a));
    }
    j["actions"] = std::move(actions);
    j["resulting_annotations"] = annotations_json(r.resulting_annotations);
    return j;
}

FeedbackRecord feedback_record_from_json(const Json& j) {
    try {
        FeedbackRecord r;
        r.document_id = j.value("document_id", std::string());
        r.reviewer_id = j.value("reviewer_id", std::string());
        r.sequence = j.value("sequence", std::size_t{0});
        r.timestamp = j.value("timestamp", std::string());
        if (j.contains("actions")) {
            for (const auto& a : j.at("actions")) {
                FeedbackItem item;
                const auto name = a.at("action").get<std::string>();
                auto action = parse_feedback_action(name);
                if (!action) throw FormatError("unknown feedback action '" + name + "'");
                item.action = *action;
                item.annotation_id = a.value("annotation_id", std::string());
                if (a.contains("annotation") && !a.at("annotation").is_null())
                    item.annotation = annotation_from_json(a.at("annotation"));
                r.actions.push_back(std::move(item));
            }
        }
        if (j.contains("resulting_annotations")) r.resulting_annotations = annotations_from(j.at("resulting_annotations"));
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed feedback record: ") + e.what());
    }
}

std::vector<Annotation> apply_feedback(std::vector<Annotation> current, const FeedbackRecord& record) {
    std::vector<std::string> violations;
    auto find = [&](const std::string& id) {
        return std::find_if(current.begin(), current.end(), [&](const Annotation& a) { return a.id == id; });
    };
    for (const auto& item : record.actions) {
        const std::string what = std::string(to_string(item.action)) + " '" + item.annotation_id + "'";
        if (item.annotation_id.empty()) {
            violations.push_back(what + ": annotation_id is required");
            continue;
        }
        auto it = find(item.annotation_id);
        switch (item.action) {
            case FeedbackAction::confirmed:
                if (it == current.end()) violations.push_back(what + ": unknown annotation id");
                break;
            case FeedbackAction::deleted:
                if (it == current.end()) violations.push_back(what + ": unknown annotation id");
                else current.erase(it);
                break;
            case FeedbackAction::edited:
            case FeedbackAction::added: {
                const bool adding = item.action == FeedbackAction::added;
                if (!item.annotation) {
                    violations.push_back(what + ": annotation payload is required");
                } else if (adding && it != current.end()) {
                    violations.push_back(what + ": annotation id already exists");
                } else if (!adding && it == current.end()) {
                    violations.push_back(what + ": unknown annotation id");
                } else {
                    Annotation a = *item.annotation;
                    a.id = item.annotation_id;
                    if (adding) current.push_back(std::move(a));
                    else *it = std::move(a);
                }
                break;
            }
        }
    }
    if (!violations.empty()) throw ValidationError(std::move(violations));
    sort_annotations(current);
    return current;
}

std::vector<FeedbackItem> diff_annotations(const std::vector<Annotation>& before, const std::vector<Annotation>& after) {
    std::vector<FeedbackItem> out;
    std::map<std::string, const Annotation*> old_by_id;
    for (const auto& a : before) old_by_id.emplace(a.id, &a);
    std::set<std::string> seen;
    for (const auto& a : after) {
        auto it = a.id.empty() ? old_by_id.end() : old_by_id.find(a.id);
        if (it == old_by_id.end()) {
            out.push_back({FeedbackAction::added, a.id, a});
        } else {
            seen.insert(a.id);
            if (*it->second == a) out.push_back({FeedbackAction::confirmed, a.id, std::nullopt});
            else out.push_back({FeedbackAction::edited, a.id, a});
        }
    }
    for (const auto& a : before)
        if (!seen.count(a.id)) out.push_back({FeedbackAction::deleted, a.id, std::nullopt});
    return out;
}

Json to_json(const DocumentState& s) {
    Json j;
    j["annotations"] = annotations_json(s.annotations);
    j["export_eligible"] = s.export_eligible;
    j["feedback_count"] = s.feedback_count;
    return j;
}

DocumentState document_state_from_json(const Json& j) {
    DocumentState s;
    s.annotations = annotations_from(j.at("annotations"));
    s.export_eligible = j.at("export_eligible").get<bool>();
    s.feedback_count = j.at("feedback_count").get<std::size_t>();
    return s;
}

void assign_annotation_ids(std::vector<Annotation>& annotations) {
    sort_annotations(annotations);
    std::set<std::string> used;
    for (const auto& a : annotations)
        if (!a.id.empty()) used.insert(a.id);
    std::size_t counter = 0;
    for (auto& a : annotations)
        if (a.id.empty()) a.id = next_free_id(used, counter);
}

// ---------------------------------------------------------------------------

DocumentRepository::DocumentRepository(std::shared_ptr<KeyValueStore> store) : store_(std::move(store)) {
    if (!store_) throw InputError("repository needs a store");
}

bool DocumentRepository::has_document(const std::string& id) const {
    return store_->get(kDocumentPrefix + id).has_value();
}

void DocumentRepository::put_document(const Document& doc) {
    store_->put(kDocumentPrefix + doc.id, to_json(doc).dump());
}

std::optional<Document> DocumentRepository::get_document(const std::string& id) const {
    auto raw = store_->get(kDocumentPrefix + id);
    if (!raw) return std::nullopt;
    return document_from_json(parse_json(*raw));
}

std::vector<std::string> DocumentRepository::document_ids() const {
    std::vector<std::string> out;
    for (auto& k : store_->keys(kDocumentPrefix)) out.push_back(k.substr(kDocumentPrefix.size()));
    return out;
}

void DocumentRepository::put_prediction(const std::string& id, const Json& response) {
    store_->put(kPredictionPrefix + id, response.dump());
}

std::optional<Json> DocumentRepository::get_prediction(const std::string& id) const {
    auto raw = store_->get(kPredictionPrefix + id);
    if (!raw) return std::nullopt;
    return parse_json(*raw);
}

void DocumentRepository::append_feedback(const FeedbackRecord& record) {
    store_->append(kFeedbackPrefix + record.document_id, to_json(record).dump());
}

std::vector<FeedbackRecord> DocumentRepository::feedback_log(const std::string& id) const {
    std::vector<FeedbackRecord> out;
    for (const auto& line : store_->read_log(kFeedbackPrefix + id))
        out.push_back(feedback_record_from_json(parse_json(line)));
    return out;
}

std::optional<DocumentState> DocumentRepository::state(const std::string& id) const {
    auto raw = store_->get(kStatePrefix + id);
    if (!raw) return std::nullopt;
    return document_state_from_json(parse_json(*raw));
}

void DocumentRepository::put_state(const std::string& id, const DocumentState& state) {
    store_->put(kStatePrefix + id, to_json(state).dump());
}

DocumentState DocumentRepository::replay(const std::string& id) const {
    auto doc = get_document(id);
    if (!doc) throw NotFoundError("unknown document '" + id + "'");
    DocumentState s;
    s.annotations = doc->annotations;
    sort_annotations(s.annotations);
    for (const auto& record : feedback_log(id)) {
        s.annotations = apply_feedback(std::move(s.annotations), record);
        s.export_eligible = true;
        ++s.feedback_count;
    }
    return s;
}

// ---------------------------------------------------------------------------

Controller::Controller(std::shared_ptr<KeyValueStore> store, ControllerOptions options)
    : repo_(std::move(store)), options_(std::move(options)) {
    check_config(options_.decider);
    if (!options_.clock) options_.clock = system_clock_iso;
    plan_windows(1, options_.max_seq_len, options_.stride);  // rejects bad window parameters
}

std::shared_ptr<std::mutex> Controller::lock_for(const std::string& id) const {
    std::lock_guard lock(locks_mu_);
    auto& m = locks_[id];
    if (!m) m = std::make_shared<std::mutex>();
    return m;
}

std::string Controller::backend_name() const {
    return options_.backend ? options_.backend->name() : "none";
}

Verdict Controller::run_decider(const Document& doc) const {
    return decide_document(doc, options_.decider);
}

void Controller::ingest(Document doc) {
    if (doc.id.empty()) throw ValidationError({"document id is empty"});
    if (auto v = validate_document(doc); !v.empty()) throw ValidationError(std::move(v));
    assign_annotation_ids(doc.annotations);
    if (auto v = check_annotation_set(doc, doc.annotations); !v.empty()) throw ValidationError(std::move(v));
    auto mu = lock_for(doc.id);
    std::lock_guard lock(*mu);
    if (!repo_.feedback_log(doc.id).empty())
        throw InputError("document '" + doc.id + "' already has reviewer feedback");
    repo_.put_document(doc);
    repo_.put_state(doc.id, DocumentState{doc.annotations, false, 0});
}

PredictResponse Controller::predict(Document doc) {
    PredictResponse r;
    if (doc.id.empty()) throw ValidationError({"document id is empty"});
    if (!doc.annotations.empty()) {
        r.warnings.push_back("submitted annotations ignored by predict");
        doc.annotations.clear();
    }
    if (auto v = validate_document(doc); !v.empty()) throw ValidationError(std::move(v));
    if (!options_.backend) throw InputError("no evidence backend configured");

    auto mu = lock_for(doc.id);
    std::lock_guard lock(*mu);

    std::string used_backend = options_.backend->name();
    std::optional<std::string> failure;
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Annotation> detected;
    try {
        detected = options_.backend->detect(doc);
    } catch (const BackendUnavailable& e) {
        failure = e.what();
    } catch (const ProtocolError& e) {
        failure = e.what();
    }
    if (failure) {
        if (options_.fallback) {
            r.warnings.push_back("backend_unavailable: " + *failure + "; used " + options_.fallback->name());
            used_backend = options_.fallback->name();
            detected = options_.fallback->detect(doc);
            failure.reset();
        } else {
            r.warnings.push_back("backend_unavailable: " + *failure);
        }
    }
    r.timings["detect_ms"] = elapsed_ms(t0);

    assign_annotation_ids(detected);
    doc.annotations = detected;
    const auto t1 = std::chrono::steady_clock::now();
    r.verdict = failure ? degraded_verdict(*failure) : run_decider(doc);
    r.timings["decide_ms"] = elapsed_ms(t1);

    r.document_id = doc.id;
    r.annotations = std::move(detected);
    r.versions = {{"backend", used_backend},
                  {"config", options_.decider.version},
                  {"service", std::string(kServiceVersion)}};

    if (repo_.feedback_log(doc.id).empty()) {
        repo_.put_document(doc);
        repo_.put_state(doc.id, DocumentState{doc.annotations, false, 0});
    } else {
        r.warnings.push_back("document has reviewer feedback; stored annotations kept");
    }
    repo_.put_prediction(doc.id, to_json(r, false));
    return r;
}

PredictResponse Controller::decide(Document doc) const {
    if (auto v = validate_document(doc); !v.empty()) throw ValidationError(std::move(v));
    assign_annotation_ids(doc.annotations);
    const auto t0 = std::chrono::steady_clock::now();
    PredictResponse r;
    r.verdict = run_decider(doc);
    r.timings["decide_ms"] = elapsed_ms(t0);
    r.document_id = doc.id;
    r.annotations = std::move(doc.annotations);
    r.versions = {{"backend", "none"}, {"config", options_.decider.version}, {"service", std::string(kServiceVersion)}};
    return r;
}

FeedbackRecord Controller::submit_feedback(FeedbackRecord record) {
    auto mu = lock_for(record.document_id);
    std::lock_guard lock(*mu);
    const auto doc = repo_.get_document(record.document_id);
    if (!doc) throw NotFoundError("unknown document '" + record.document_id + "'");
    auto stored = repo_.state(record.document_id);
    DocumentState state = stored ? *stored : repo_.replay(record.document_id);

    if (record.actions.empty() && !record.resulting_annotations.empty())
        record.actions = diff_annotations(state.annotations, record.resulting_annotations);
    else if (record.actions.empty())
        for (const auto& a : state.annotations) record.actions.push_back({FeedbackAction::confirmed, a.id, std::nullopt});

    // Fix ids and provenance before logging so replay is exact.
    std::set<std::string> used;
    for (const auto& a : state.annotations) used.insert(a.id);
    for (const auto& item : record.actions)
        if (item.action == FeedbackAction::added && !item.annotation_id.empty()) used.insert(item.annotation_id);
    std::size_t counter = 0;
    for (auto& item : record.actions) {
        if (item.action == FeedbackAction::added && item.annotation_id.empty())
            item.annotation_id = next_free_id(used, counter);
        if (item.annotation) {
            item.annotation->id = item.annotation_id;
            item.annotation->source = Source::human;
            item.annotation->confidence = 1.0;
            item.annotation->annotator_id = record.reviewer_id.empty() ? std::nullopt
                                                                       : std::optional<std::string>(record.reviewer_id);
        }
    }

    auto resulting = apply_feedback(state.annotations, record);
    if (auto v = check_annotation_set(*doc, resulting); !v.empty()) throw ValidationError(std::move(v));

    record.resulting_annotations = resulting;
    record.sequence = state.feedback_count;
    record.timestamp = options_.clock();
    repo_.append_feedback(record);
    repo_.put_state(record.document_id, DocumentState{std::move(resulting), true, state.feedback_count + 1});
    return record;
}

Json Controller::get_document(const std::string& id) const {
    auto doc = repo_.get_document(id);
    if (!doc) throw NotFoundError("unknown document '" + id + "'");
    auto stored = repo_.state(id);
    const DocumentState state = stored ? *stored : repo_.replay(id);
    doc->annotations = state.annotations;
    Json j;
    j["document"] = to_json(*doc);
    j["state"] = Json{{"export_eligible", state.export_eligible}, {"feedback_count", state.feedback_count}};
    auto prediction = repo_.get_prediction(id);
    j["prediction"] = prediction ? *prediction : Json(nullptr);
    Json log = Json::array();
    for (const auto& r : repo_.feedback_log(id)) log.push_back(to_json(r));
    j["feedback"] = std::move(log);
    return j;
}

std::string Controller::export_training() const {
    std::string out;
    for (const auto& id : repo_.document_ids()) {
        const auto state = repo_.state(id);
        if (!state || !state->export_eligible) continue;
        auto doc = repo_.get_document(id);
        if (!doc) continue;
        doc->annotations = state->annotations;
        for (const auto& ex : build_training_examples(*doc, options_.max_seq_len, options_.stride)) {
            out += to_json(ex).dump();
            out += '\n';
        }
    }
    return out;
}

}  // namespace elig

#include <cmath>
#include <future>

#include <httplib.h>

#include "elig/bio_codec.hpp"
#include "elig/errors.hpp"
#include "elig/evidence.hpp"
#include "elig/serialization.hpp"

namespace elig {

namespace {

LabelGrid parse_grid(const std::string& body, TargetType type, std::size_t expected_rows) {
    Json j;
    try {
        j = Json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ProtocolError(std::string("grid response is not JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("scores") || !j.at("scores").is_array())
        throw ProtocolError("grid response lacks a 'scores' array");
    if (j.contains("columns") && j.at("columns") != Json::array({"B", "I", "O"}))
        throw ProtocolError("grid columns must be [\"B\",\"I\",\"O\"]");
    const auto& scores = j.at("scores");
    if (scores.size() != expected_rows)
        throw ProtocolError("grid has " + std::to_string(scores.size()) + " rows, expected " +
                            std::to_string(expected_rows));
    LabelGrid grid;
    grid.type = type;
    grid.scores.reserve(expected_rows);
    for (const auto& row : scores) {
        if (!row.is_array() || row.size() != 3) throw ProtocolError("grid rows must have 3 columns");
        std::array<double, 3> r{};
        for (std::size_t c = 0; c < 3; ++c) {
            if (!row[c].is_number()) throw ProtocolError("grid entries must be numbers");
            r[c] = row[c].get<double>();
            if (!std::isfinite(r[c])) throw ProtocolError("grid entries must be finite");
        }
        grid.scores.push_back(r);
    }
    return grid;
}

std::vector<Annotation> detect_type(const Document& doc, const RemoteModelConfig& cfg, TargetType type) {
    httplib::Client client(cfg.endpoint);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    std::vector<Annotation> out;
    for (const auto& w : plan_windows(doc.tokens.size(), cfg.max_seq_len, cfg.stride)) {
        Json req;
        req["doc_id"] = doc.id;
        req["type"] = to_string(type);
        if (auto it = cfg.model_ids.find(type); it != cfg.model_ids.end()) req["model"] = it->second;
        Json toks = Json::array();
        for (std::size_t t = w.begin; t < w.end; ++t) toks.push_back(doc.tokens[t].surface);
        req["tokens"] = std::move(toks);
        req["window"] = Json::array({w.begin, w.end});

        auto res = client.Post(cfg.path, req.dump(), "application/json");
        if (!res) throw BackendUnavailable("inference server " + cfg.endpoint + ": " + httplib::to_string(res.error()));
        if (res->status == 503) throw BackendUnavailable("inference server " + cfg.endpoint + " answered 503");
        if (res->status != 200)
            throw ProtocolError("inference server answered HTTP " + std::to_string(res->status));

        const auto grid = parse_grid(res->body, type, w.size());
        const auto tags = constrained_viterbi(grid, cfg.transitions);
        for (const auto& span : decode_spans(tags.tags)) {
            Annotation a;
            a.type = type;
            a.fragments.push_back({doc.tokens[w.begin + span.tokens.begin].start,
                                   doc.tokens[w.begin + span.tokens.end - 1].end});
            a.source = Source::model;
            try {
                a.confidence = span_confidence(grid, span.tokens);
            } catch (const NormalizationError& e) {
                throw ProtocolError(std::string("grid scores are not log-probabilities: ") + e.what());
            }
            out.push_back(std::move(a));
        }
    }
    return out;
}

}  // namespace

RemoteBackend::RemoteBackend(RemoteModelConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.timeout.count() <= 0) throw InputError("remote timeout must be positive");
    check_transitions(cfg_.transitions);
}

std::vector<Annotation> detect_remote(const Document& doc, const RemoteModelConfig& cfg) {
    if (cfg.timeout.count() <= 0) throw InputError("remote timeout must be positive");
    std::vector<std::future<std::vector<Annotation>>> pending;
    pending.reserve(cfg.types.size());
    for (auto type : cfg.types)
        pending.push_back(std::async(std::launch::async, [&doc, &cfg, type] { return detect_type(doc, cfg, type); }));

    // Join everything before rethrowing so no task outlives `doc`.
    std::vector<Annotation> all;
    std::exception_ptr first_error;
    for (auto& f : pending) {
        try {
            auto found = f.get();
            all.insert(all.end(), std::make_move_iterator(found.begin()), std::make_move_iterator(found.end()));
        } catch (...) {
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);
    return merge_detections(std::move(all));
}

}  // namespace elig

#include <regex>

#include <httplib.h>

#include "elig/errors.hpp"
#include "elig/service.hpp"

namespace elig {

namespace {

HttpReply json_reply(int status, const Json& body) {
    return {status, body.dump(), "application/json"};
}

HttpReply error_reply(int status, const std::string& message) {
    return json_reply(status, Json{{"error", message}});
}

Document document_from_body(const std::string& body) {
    const Json j = parse_json(body);
    if (j.is_object() && j.contains("document")) return document_from_json(j.at("document"));
    return document_from_json(j);
}

HttpReply feedback(Controller& controller, const std::string& id, const std::string& body) {
    const Json j = parse_json(body);
    if (!j.is_object()) throw FormatError("feedback body must be an object");
    if (j.contains("document_id") && j.at("document_id") != id)
        throw ValidationError({"document_id in body does not match the path"});
    FeedbackRecord record = feedback_record_from_json(j);
    record.document_id = id;
    record.resulting_annotations.clear();
    if (!j.contains("actions") && j.contains("annotations")) {
        for (const auto& a : j.at("annotations")) record.resulting_annotations.push_back(annotation_from_json(a));
        if (record.resulting_annotations.empty()) {
            // An explicit empty set deletes everything.
            const Json current = controller.get_document(id);
            for (const auto& a : current.at("document").at("annotations"))
                record.actions.push_back({FeedbackAction::deleted, a.at("id").get<std::string>(), std::nullopt});
        }
    }
    const auto stored = controller.submit_feedback(std::move(record));
    Json ack;
    ack["status"] = "accepted";
    ack["document_id"] = stored.document_id;
    ack["sequence"] = stored.sequence;
    ack["timestamp"] = stored.timestamp;
    Json anns = Json::array();
    for (const auto& a : stored.resulting_annotations) anns.push_back(to_json(a));
    ack["annotations"] = std::move(anns);
    return json_reply(200, ack);
}

HttpReply dispatch(Controller& controller, const std::string& method, const std::string& path,
                   const std::string& body) {
    static const std::regex feedback_path(R"(^/v1/documents/([^/]+)/feedback$)");
    static const std::regex document_path(R"(^/v1/documents/([^/]+)$)");
    std::smatch m;

    auto require = [&](const char* wanted) -> std::optional<HttpReply> {
        if (method == wanted) return std::nullopt;
        return error_reply(405, "method " + method + " not allowed on " + path);
    };

    if (path == "/health") {
        if (auto r = require("GET")) return *r;
        return json_reply(200, Json{{"status", "ok"},
                                    {"service", std::string(kServiceVersion)},
                                    {"backend", controller.backend_name()},
                                    {"config", controller.options().decider.version}});
    }
    if (path == "/v1/predict") {
        if (auto r = require("POST")) return *r;
        return json_reply(200, to_json(controller.predict(document_from_body(body))));
    }
    if (path == "/v1/decide") {
        if (auto r = require("POST")) return *r;
        return json_reply(200, to_json(controller.decide(document_from_body(body))));
    }
    if (path == "/v1/export/training") {
        if (auto r = require("GET")) return *r;
        return {200, controller.export_training(), "application/x-ndjson"};
    }
    if (std::regex_match(path, m, feedback_path)) {
        if (auto r = require("POST")) return *r;
        return feedback(controller, m[1].str(), body);
    }
    if (std::regex_match(path, m, document_path)) {
        if (auto r = require("GET")) return *r;
        return json_reply(200, controller.get_document(m[1].str()));
    }
    return error_reply(404, "no route for " + path);
}

}  // namespace

HttpReply route_request(Controller& controller, const std::string& method, const std::string& path,
                        const std::string& body) {
    try {
        return dispatch(controller, method, path, body);
    } catch (const ValidationError& e) {
        return json_reply(400, Json{{"error", "validation failed"}, {"violations", e.violations()}});
    } catch (const NotFoundError& e) {
        return error_reply(404, e.what());
    } catch (const FormatError& e) {
        return error_reply(400, e.what());
    } catch (const InputError& e) {
        return error_reply(400, e.what());
    } catch (const OverlapError& e) {
        return error_reply(400, e.what());
    } catch (const ParseError& e) {
        return error_reply(400, e.what());
    } catch (const BackendUnavailable& e) {
        return error_reply(503, e.what());
    } catch (const std::exception& e) {
        return error_reply(500, e.what());
    }
}

struct HttpServer::Impl {
    explicit Impl(Controller& c) : controller(c) {}
    Controller& controller;
    httplib::Server server;
};

HttpServer::HttpServer(Controller& controller) : impl_(std::make_unique<Impl>(controller)) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
        const auto reply = route_request(impl_->controller, req.method, req.path, req.body);
        res.status = reply.status;
        res.set_content(reply.body, reply.content_type);
    };
    impl_->server.Get(".*", handler);
    impl_->server.Post(".*", handler);
    impl_->server.Put(".*", handler);
    impl_->server.Delete(".*", handler);
    impl_->server.Patch(".*", handler);
}

HttpServer::~HttpServer() {
    stop();
}

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = impl_->server.bind_to_any_port(host);
        if (bound <= 0) throw InputError("cannot bind " + host);
        return bound;
    }
    if (!impl_->server.bind_to_port(host, port)) throw InputError("cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void HttpServer::listen() {
    impl_->server.listen_after_bind();
}

void HttpServer::stop() {
    if (impl_->server.is_running()) impl_->server.stop();
}

}  // namespace elig

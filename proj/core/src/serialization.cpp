#include "elig/serialization.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "elig/errors.hpp"
#include "elig/unicode.hpp"

namespace elig {

namespace {

const Json& require(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
    return j.at(key);
}

std::string require_string(const Json& j, const char* key) {
    const auto& v = require(j, key);
    if (!v.is_string()) throw FormatError(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

std::optional<std::string> optional_string(const Json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    if (!j.at(key).is_string()) throw FormatError(std::string("field '") + key + "' must be a string");
    return j.at(key).get<std::string>();
}

std::size_t offset_value(const Json& v) {
    if (!v.is_number_integer() || v.get<long long>() < 0) throw FormatError("offsets must be non-negative integers");
    return v.get<std::size_t>();
}

}  // namespace

Json to_json(const Annotation& a) {
    Json j;
    if (!a.id.empty()) j["id"] = a.id;
    j["type"] = to_string(a.type);
    Json frags = Json::array();
    for (const auto& f : a.fragments) frags.push_back(Json::array({f.start, f.end}));
    j["fragments"] = std::move(frags);
    j["source"] = to_string(a.source);
    j["confidence"] = a.confidence;
    if (a.annotator_id) j["annotator_id"] = *a.annotator_id;
    return j;
}

Json to_json(const DocumentMetadata& m) {
    Json j = Json::object();
    if (m.isin) j["isin"] = *m.isin;
    if (m.issue_date) j["issue_date"] = format_date(*m.issue_date);
    if (m.issuer_group) j["issuer_group"] = *m.issuer_group;
    if (m.asset_type) j["asset_type"] = *m.asset_type;
    if (!m.extra.empty()) {
        Json extra = Json::object();
        for (const auto& [k, v] : m.extra) extra[k] = v;
        j["extra"] = std::move(extra);
    }
    return j;
}

Json to_json(const Document& doc, bool include_tokens) {
    Json j;
    j["id"] = doc.id;
    j["text"] = doc.text;
    if (include_tokens) {
        Json toks = Json::array();
        for (const auto& t : doc.tokens) toks.push_back(Json{{"start", t.start}, {"end", t.end}});
        j["tokens"] = std::move(toks);
    }
    j["metadata"] = to_json(doc.metadata);
    Json anns = Json::array();
    for (const auto& a : doc.annotations) anns.push_back(to_json(a));
    j["annotations"] = std::move(anns);
    return j;
}

Annotation annotation_from_json(const Json& j) {
    Annotation a;
    if (!j.is_object()) throw FormatError("annotation must be an object");
    a.id = optional_string(j, "id").value_or("");
    const auto type_name = require_string(j, "type");
    const auto type = parse_target_type(type_name);
    if (!type) throw FormatError("unknown annotation type '" + type_name + "'");
    a.type = *type;
    const auto& frags = require(j, "fragments");
    if (!frags.is_array()) throw FormatError("'fragments' must be an array");
    for (const auto& f : frags) {
        if (!f.is_array() || f.size() != 2) throw FormatError("fragment must be a [start,end] pair");
        a.fragments.push_back(Interval{offset_value(f[0]), offset_value(f[1])});
    }
    if (auto s = optional_string(j, "source")) {
        const auto src = parse_source(*s);
        if (!src) throw FormatError("unknown annotation source '" + *s + "'");
        a.source = *src;
    }
    if (j.contains("confidence")) {
        if (!j.at("confidence").is_number()) throw FormatError("'confidence' must be a number");
        a.confidence = j.at("confidence").get<double>();
    }
    a.annotator_id = optional_string(j, "annotator_id");
    return a;
}

DocumentMetadata metadata_from_json(const Json& j) {
    DocumentMetadata m;
    if (j.is_null()) return m;
    if (!j.is_object()) throw FormatError("'metadata' must be an object");
    m.isin = optional_string(j, "isin");
    if (auto d = optional_string(j, "issue_date")) {
        m.issue_date = parse_date(*d);
        if (!m.issue_date) throw FormatError("metadata.issue_date '" + *d + "' is not a valid YYYY-MM-DD date");
    }
    m.issuer_group = optional_string(j, "issuer_group");
    m.asset_type = optional_string(j, "asset_type");
    if (j.contains("extra") && !j.at("extra").is_null()) {
        const auto& extra = j.at("extra");
        if (!extra.is_object()) throw FormatError("metadata.extra must be an object");
        for (const auto& [k, v] : extra.items()) {
            if (!v.is_string()) throw FormatError("metadata.extra values must be strings");
            m.extra[k] = v.get<std::string>();
        }
    }
    return m;
}

Document document_from_json(const Json& j) {
    if (!j.is_object()) throw FormatError("document must be an object");
    Document doc;
    doc.id = require_string(j, "id");
    doc.text = require_string(j, "text");
    if (!utf8::is_valid(doc.text)) throw FormatError("document '" + doc.id + "': text is not valid UTF-8");
    if (j.contains("tokens") && !j.at("tokens").is_null()) {
        const auto& toks = j.at("tokens");
        if (!toks.is_array()) throw FormatError("'tokens' must be an array");
        const utf8::OffsetMap map(doc.text);
        for (const auto& t : toks) {
            Token tok;
            tok.index = doc.tokens.size();
            tok.start = offset_value(require(t, "start"));
            tok.end = offset_value(require(t, "end"));
            if (tok.start < tok.end && tok.end <= map.size()) tok.surface = std::string(map.slice(tok.start, tok.end));
            doc.tokens.push_back(std::move(tok));
        }
    } else {
        doc.tokens = baseline_tokenize(doc.text);
    }
    if (j.contains("metadata")) doc.metadata = metadata_from_json(j.at("metadata"));
    if (j.contains("annotations") && !j.at("annotations").is_null()) {
        const auto& anns = j.at("annotations");
        if (!anns.is_array()) throw FormatError("'annotations' must be an array");
        for (const auto& a : anns) doc.annotations.push_back(annotation_from_json(a));
    }
    return doc;
}

Json parse_json(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("malformed JSON: ") + e.what());
    }
}

std::vector<Document> read_corpus(std::istream& in) {
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string content = buf.str();
    std::vector<Document> docs;

    const auto first = content.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return docs;
    if (content[first] == '[') {
        const auto j = parse_json(content);
        for (const auto& d : j) docs.push_back(document_from_json(d));
        return docs;
    }
    // Either one JSON object or JSON Lines.
    std::istringstream lines(content);
    std::string line;
    std::size_t lineno = 0;
    bool as_lines = true;
    std::vector<Document> parsed;
    while (std::getline(lines, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            parsed.push_back(document_from_json(parse_json(line)));
        } catch (const FormatError& e) {
            if (lineno == 1 || parsed.empty()) {
                as_lines = false;
                break;
            }
            throw FormatError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (as_lines) return parsed;
    docs.push_back(document_from_json(parse_json(content)));
    return docs;
}

std::vector<Document> read_corpus_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    return read_corpus(in);
}

void write_corpus(std::ostream& out, const std::vector<Document>& docs) {
    for (const auto& d : docs) out << to_json(d).dump() << '\n';
}

}  // namespace elig

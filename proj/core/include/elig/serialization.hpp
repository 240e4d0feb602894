#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "elig/doc_model.hpp"

// JSON record format shared by the HTTP endpoints, the CLI and corpus files.
// Offsets are Unicode scalar values; fragments serialize as [[start,end], ...].
namespace elig {

using Json = nlohmann::ordered_json;

Json to_json(const Annotation& a);
Json to_json(const DocumentMetadata& m);
// Tokens are written as {start,end}; surfaces are implied by the text.
Json to_json(const Document& doc, bool include_tokens = true);

// These throw FormatError on structurally malformed records. Invariant
// violations (bad offsets etc.) are left to validate_document.
Annotation annotation_from_json(const Json& j);
DocumentMetadata metadata_from_json(const Json& j);
// Missing "tokens" falls back to baseline_tokenize.
Document document_from_json(const Json& j);

Json parse_json(const std::string& text);

// Corpus files are JSON Lines (one document per line); a single JSON array or
// object is accepted as well.
std::vector<Document> read_corpus(std::istream& in);
std::vector<Document> read_corpus_file(const std::string& path);
void write_corpus(std::ostream& out, const std::vector<Document>& docs);

}  // namespace elig

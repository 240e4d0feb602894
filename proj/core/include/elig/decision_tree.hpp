#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "elig/doc_model.hpp"
#include "elig/serialization.hpp"

namespace elig {

enum class Outcome { eligible, ineligible, review };

std::string_view to_string(Outcome o) noexcept;
std::optional<Outcome> parse_outcome(std::string_view s) noexcept;

enum class FeatureKind { boolean, number, string, date };

using FeatureValue = std::variant<bool, double, std::string, Date>;

FeatureKind kind_of(const FeatureValue& v) noexcept;
std::string format_feature(const FeatureValue& v);

// Features absent from the map are missing.
using FeatureMap = std::map<std::string, FeatureValue>;

struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::boolean;
    // Finite value domain used for exhaustive checking; missing is implied.
    std::vector<FeatureValue> domain;
};

enum class Comparator { eq, ne, lt, le, in_set, present };

std::string_view to_string(Comparator c) noexcept;

struct TreeNode {
    std::string id;
    // Predicate node
    std::string feature;
    Comparator op = Comparator::eq;
    std::vector<FeatureValue> constants;  // one value, or the set for in_set
    std::string if_true;
    std::string if_false;
    // Leaf node
    bool leaf = false;
    Outcome outcome = Outcome::review;
    std::optional<std::string> value;
    std::string explanation;  // "{feature}" placeholders are substituted
};

struct TreeResult {
    Outcome outcome = Outcome::review;
    std::optional<std::string> value;
    std::string explanation;
    // One entry per visited predicate ("<feature> <op> <const> -> true|false"),
    // ending in "missing: <feature>" when a needed feature is absent.
    std::vector<std::string> trace;
    std::vector<std::string> features_used;
};

class DecisionTree {
public:
    DecisionTree() = default;
    // Throws InputError unless the tree is finite, acyclic, every path ends in
    // a leaf and every referenced feature is declared with a matching kind.
    DecisionTree(std::vector<FeatureSpec> manifest, std::vector<TreeNode> nodes, std::string root);

    // Deterministic root-to-leaf walk. A predicate on a missing feature ends
    // in review; `present` tests never see a missing value.
    TreeResult evaluate(const FeatureMap& features) const;

    const std::vector<FeatureSpec>& manifest() const noexcept { return manifest_; }
    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    const std::string& root() const noexcept { return root_; }

private:
    const TreeNode& node(const std::string& id) const;

    std::vector<FeatureSpec> manifest_;
    std::vector<TreeNode> nodes_;
    std::map<std::string, std::size_t> index_;
    std::string root_;
};

TreeResult evaluate_tree(const DecisionTree& tree, const FeatureMap& features);

Json to_json(const DecisionTree& tree);
// Throws FormatError for malformed records, InputError for invalid trees.
DecisionTree decision_tree_from_json(const Json& j);

}  // namespace elig

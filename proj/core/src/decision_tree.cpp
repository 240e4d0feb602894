#include "elig/decision_tree.hpp"

#include <cstdio>
#include <set>

#include "elig/errors.hpp"

namespace elig {

namespace {

constexpr std::array<std::string_view, 6> kComparatorNames = {"=", "!=", "<", "<=", "in", "present"};

std::string_view kind_name(FeatureKind k) noexcept {
    switch (k) {
        case FeatureKind::boolean: return "bool";
        case FeatureKind::number: return "number";
        case FeatureKind::string: return "string";
        case FeatureKind::date: return "date";
    }
    return "bool";
}

std::optional<FeatureKind> parse_kind(std::string_view s) noexcept {
    if (s == "bool") return FeatureKind::boolean;
    if (s == "number") return FeatureKind::number;
    if (s == "string") return FeatureKind::string;
    if (s == "date") return FeatureKind::date;
    return std::nullopt;
}

std::optional<Comparator> parse_comparator(std::string_view s) noexcept {
    for (std::size_t i = 0; i < kComparatorNames.size(); ++i)
        if (kComparatorNames[i] == s) return static_cast<Comparator>(i);
    return std::nullopt;
}

bool less(const FeatureValue& a, const FeatureValue& b) {
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            return x < std::get<T>(b);
        },
        a);
}

Json value_to_json(const FeatureValue& v) {
    return std::visit(
        [](const auto& x) -> Json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Date>) return format_date(x);
            else return x;
        },
        v);
}

FeatureValue value_from_json(const Json& j, FeatureKind kind) {
    switch (kind) {
        case FeatureKind::boolean:
            if (!j.is_boolean()) throw FormatError("expected a boolean constant");
            return j.get<bool>();
        case FeatureKind::number:
            if (!j.is_number()) throw FormatError("expected a numeric constant");
            return j.get<double>();
        case FeatureKind::string:
            if (!j.is_string()) throw FormatError("expected a string constant");
            return j.get<std::string>();
        case FeatureKind::date: {
            if (!j.is_string()) throw FormatError("expected a YYYY-MM-DD date constant");
            auto d = parse_date(j.get<std::string>());
            if (!d) throw FormatError("invalid date constant '" + j.get<std::string>() + "'");
            return *d;
        }
    }
    throw FormatError("unknown feature kind");
}

std::string substitute(const std::string& tmpl, const FeatureMap& features) {
    std::string out;
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            const auto close = tmpl.find('}', i);
            if (close != std::string::npos) {
                const auto name = tmpl.substr(i + 1, close - i - 1);
                auto it = features.find(name);
                out += it == features.end() ? std::string("missing") : format_feature(it->second);
                i = close + 1;
                continue;
            }
        }
        out.push_back(tmpl[i++]);
    }
    return out;
}

std::string describe(const TreeNode& n) {
    std::string s = n.feature + " " + std::string(to_string(n.op));
    if (n.op == Comparator::present) return s;
    if (n.op == Comparator::in_set) {
        s += " {";
        for (std::size_t i = 0; i < n.constants.size(); ++i) {
            if (i) s += ", ";
            s += format_feature(n.constants[i]);
        }
        return s + "}";
    }
    return s + " " + format_feature(n.constants.front());
}

}  // namespace

std::string_view to_string(Outcome o) noexcept {
    switch (o) {
        case Outcome::eligible: return "eligible";
        case Outcome::ineligible: return "ineligible";
        case Outcome::review: return "review";
    }
    return "review";
}

std::optional<Outcome> parse_outcome(std::string_view s) noexcept {
    if (s == "eligible") return Outcome::eligible;
    if (s == "ineligible") return Outcome::ineligible;
    if (s == "review") return Outcome::review;
    return std::nullopt;
}

std::string_view to_string(Comparator c) noexcept {
    return kComparatorNames[static_cast<std::size_t>(c)];
}

FeatureKind kind_of(const FeatureValue& v) noexcept {
    return static_cast<FeatureKind>(v.index());
}

std::string format_feature(const FeatureValue& v) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, bool>) {
                return x ? "true" : "false";
            } else if constexpr (std::is_same_v<T, double>) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%g", x);
                return buf;
            } else if constexpr (std::is_same_v<T, Date>) {
                return format_date(x);
            } else {
                return x;
            }
        },
        v);
}

DecisionTree::DecisionTree(std::vector<FeatureSpec> manifest, std::vector<TreeNode> nodes, std::string root)
    : manifest_(std::move(manifest)), nodes_(std::move(nodes)), root_(std::move(root)) {
    std::map<std::string, FeatureKind> declared;
    for (const auto& f : manifest_) {
        if (!declared.emplace(f.name, f.kind).second) throw InputError("feature '" + f.name + "' declared twice");
        for (const auto& v : f.domain)
            if (kind_of(v) != f.kind) throw InputError("feature '" + f.name + "': domain value of wrong kind");
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (!index_.emplace(nodes_[i].id, i).second) throw InputError("duplicate node id '" + nodes_[i].id + "'");
    if (!index_.count(root_)) throw InputError("root node '" + root_ + "' not found");

    for (const auto& n : nodes_) {
        if (n.leaf) continue;
        auto d = declared.find(n.feature);
        if (d == declared.end())
            throw InputError("node '" + n.id + "' references undeclared feature '" + n.feature + "'");
        if (!index_.count(n.if_true) || !index_.count(n.if_false))
            throw InputError("node '" + n.id + "' has a dangling child");
        if (n.op == Comparator::present) continue;
        if (n.constants.empty() || (n.op != Comparator::in_set && n.constants.size() != 1))
            throw InputError("node '" + n.id + "' has the wrong number of constants");
        for (const auto& c : n.constants)
            if (kind_of(c) != d->second) throw InputError("node '" + n.id + "': constant kind differs from feature");
        if ((n.op == Comparator::lt || n.op == Comparator::le) && d->second == FeatureKind::boolean)
            throw InputError("node '" + n.id + "': ordering comparison on a boolean feature");
    }

    // Every node reachable from the root must lead to leaves without cycles.
    enum class Mark { none, active, done };
    std::vector<Mark> mark(nodes_.size(), Mark::none);
    auto visit = [&](auto&& self, std::size_t i) -> void {
        if (mark[i] == Mark::done) return;
        if (mark[i] == Mark::active) throw InputError("cycle through node '" + nodes_[i].id + "'");
        mark[i] = Mark::active;
        if (!nodes_[i].leaf) {
            self(self, index_.at(nodes_[i].if_true));
            self(self, index_.at(nodes_[i].if_false));
        }
        mark[i] = Mark::done;
    };
    visit(visit, index_.at(root_));
}

const TreeNode& DecisionTree::node(const std::string& id) const {
    return nodes_.at(index_.at(id));
}

TreeResult DecisionTree::evaluate(const FeatureMap& features) const {
    TreeResult r;
    if (nodes_.empty()) {
        r.trace.push_back("empty tree");
        return r;
    }
    std::map<std::string, FeatureKind> kinds;
    for (const auto& f : manifest_) kinds[f.name] = f.kind;

    const TreeNode* n = &node(root_);
    while (!n->leaf) {
        r.features_used.push_back(n->feature);
        auto it = features.find(n->feature);
        const bool have = it != features.end() && kind_of(it->second) == kinds.at(n->feature);
        bool result = false;
        if (n->op == Comparator::present) {
            result = have;
        } else {
            if (!have) {
                r.outcome = Outcome::review;
                r.explanation = "required feature '" + n->feature + "' is missing";
                r.trace.push_back("missing: " + n->feature);
                return r;
            }
            const auto& v = it->second;
            const auto& c = n->constants.front();
            switch (n->op) {
                case Comparator::eq: result = v == c; break;
                case Comparator::ne: result = v != c; break;
                case Comparator::lt: result = less(v, c); break;
                case Comparator::le: result = !less(c, v); break;
                case Comparator::in_set:
                    for (const auto& k : n->constants)
                        if (v == k) result = true;
                    break;
                case Comparator::present: break;
            }
        }
        r.trace.push_back(describe(*n) + " -> " + (result ? "true" : "false"));
        n = &node(result ? n->if_true : n->if_false);
    }
    r.outcome = n->outcome;
    r.value = n->value;
    r.explanation = substitute(n->explanation, features);
    return r;
}

TreeResult evaluate_tree(const DecisionTree& tree, const FeatureMap& features) {
    return tree.evaluate(features);
}

Json to_json(const DecisionTree& tree) {
    Json j;
    Json manifest = Json::array();
    for (const auto& f : tree.manifest()) {
        Json spec{{"name", f.name}, {"kind", kind_name(f.kind)}};
        Json domain = Json::array();
        for (const auto& v : f.domain) domain.push_back(value_to_json(v));
        spec["domain"] = std::move(domain);
        manifest.push_back(std::move(spec));
    }
    j["feature_manifest"] = std::move(manifest);
    j["root"] = tree.root();
    Json nodes = Json::array();
    for (const auto& n : tree.nodes()) {
        Json node;
        node["id"] = n.id;
        if (n.leaf) {
            node["leaf"] = true;
            node["outcome"] = to_string(n.outcome);
            if (n.value) node["value"] = *n.value;
            node["explanation"] = n.explanation;
        } else {
            node["feature"] = n.feature;
            node["op"] = to_string(n.op);
            if (n.op == Comparator::in_set) {
                Json set = Json::array();
                for (const auto& c : n.constants) set.push_back(value_to_json(c));
                node["value"] = std::move(set);
            } else if (n.op != Comparator::present) {
                node["value"] = value_to_json(n.constants.front());
            }
            node["then"] = n.if_true;
            node["else"] = n.if_false;
        }
        nodes.push_back(std::move(node));
    }
    j["nodes"] = std::move(nodes);
    return j;
}

DecisionTree decision_tree_from_json(const Json& j) {
    try {
        std::vector<FeatureSpec> manifest;
        std::map<std::string, FeatureKind> kinds;
        for (const auto& f : j.at("feature_manifest")) {
            FeatureSpec spec;
            spec.name = f.at("name").get<std::string>();
            const auto kind = parse_kind(f.at("kind").get<std::string>());
            if (!kind) throw FormatError("feature '" + spec.name + "' has an unknown kind");
            spec.kind = *kind;
            if (f.contains("domain"))
                for (const auto& v : f.at("domain")) spec.domain.push_back(value_from_json(v, spec.kind));
            kinds[spec.name] = spec.kind;
            manifest.push_back(std::move(spec));
        }
        std::vector<TreeNode> nodes;
        for (const auto& jn : j.at("nodes")) {
            TreeNode n;
            n.id = jn.at("id").get<std::string>();
            if (jn.value("leaf", false)) {
                n.leaf = true;
                const auto outcome = parse_outcome(jn.at("outcome").get<std::string>());
                if (!outcome) throw FormatError("node '" + n.id + "' has an unknown outcome");
                n.outcome = *outcome;
                if (jn.contains("value")) n.value = jn.at("value").get<std::string>();
                n.explanation = jn.value("explanation", std::string{});
            } else {
                n.feature = jn.at("feature").get<std::string>();
                const auto op = parse_comparator(jn.at("op").get<std::string>());
                if (!op) throw FormatError("node '" + n.id + "' has an unknown comparator");
                n.op = *op;
                auto kind = kinds.find(n.feature);
                if (kind == kinds.end())
                    throw InputError("node '" + n.id + "' references undeclared feature '" + n.feature + "'");
                if (n.op == Comparator::in_set) {
                    for (const auto& v : jn.at("value")) n.constants.push_back(value_from_json(v, kind->second));
                } else if (n.op != Comparator::present) {
                    n.constants.push_back(value_from_json(jn.at("value"), kind->second));
                }
                n.if_true = jn.at("then").get<std::string>();
                n.if_false = jn.at("else").get<std::string>();
            }
            nodes.push_back(std::move(n));
        }
        return DecisionTree(std::move(manifest), std::move(nodes), j.at("root").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed decision tree: ") + e.what());
    }
}

}  // namespace elig

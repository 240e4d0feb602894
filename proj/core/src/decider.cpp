#include "elig/decider.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "elig/errors.hpp"
#include "elig/unicode.hpp"

namespace elig {

namespace {

// Absorbs representation error in confidence differences such as 0.9 - 0.8.
constexpr double kGapTolerance = 1e-9;

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string describe_fragments(const std::vector<Interval>& frags) {
    std::string out;
    for (std::size_t i = 0; i < frags.size(); ++i) {
        if (i) out += ", ";
        out += "[" + std::to_string(frags[i].start) + "," + std::to_string(frags[i].end) + ")";
    }
    return out;
}

std::string describe_types(const std::vector<TargetType>& types) {
    std::string out;
    for (std::size_t i = 0; i < types.size(); ++i) {
        if (i) out += "/";
        out += to_string(types[i]);
    }
    return out;
}

std::optional<double> as_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

Json fragments_json(const std::vector<Interval>& frags) {
    Json out = Json::array();
    for (const auto& f : frags) out.push_back(Json::array({f.start, f.end}));
    return out;
}

std::vector<Interval> fragments_from_json(const Json& j) {
    std::vector<Interval> out;
    for (const auto& f : j) out.push_back({f.at(0).get<std::size_t>(), f.at(1).get<std::size_t>()});
    return out;
}

Alternative to_alternative(const ValueGroup& g) {
    return Alternative{g.value, g.confidence, g.fragments};
}

FeatureValue str(const char* s) {
    return std::string(s);
}

TreeNode predicate(std::string id, std::string feature, Comparator op, std::vector<FeatureValue> constants,
                   std::string if_true, std::string if_false) {
    TreeNode n;
    n.id = std::move(id);
    n.feature = std::move(feature);
    n.op = op;
    n.constants = std::move(constants);
    n.if_true = std::move(if_true);
    n.if_false = std::move(if_false);
    return n;
}

TreeNode leaf(std::string id, Outcome outcome, std::optional<std::string> value, std::string explanation) {
    TreeNode n;
    n.id = std::move(id);
    n.leaf = true;
    n.outcome = outcome;
    n.value = std::move(value);
    n.explanation = std::move(explanation);
    return n;
}

Date ymd(int y, unsigned m, unsigned d) {
    return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

DecisionTree default_coupon_tree() {
    std::vector<FeatureSpec> manifest = {
        {"coupon_variable_index.present", FeatureKind::boolean, {true, false}},
        {"coupon_variable_index.value", FeatureKind::string, {str("euribor"), str("estr"), str("equity_index")}},
        {"asset_type", FeatureKind::string, {str("debt_instrument"), str("covered_bond"), str("equity")}},
        {"coupon_fixed.present", FeatureKind::boolean, {true, false}},
    };
    std::vector<TreeNode> nodes = {
        predicate("variable", "coupon_variable_index.present", Comparator::eq, {true}, "index_kind", "fixed"),
        predicate("index_kind", "coupon_variable_index.value", Comparator::in_set, {str("euribor"), str("estr")},
                  "asset", "index_not_money_market"),
        predicate("asset", "asset_type", Comparator::in_set, {str("debt_instrument"), str("covered_bond")},
                  "floating_ok", "floating_wrong_asset"),
        leaf("floating_ok", Outcome::eligible, "floating_money_market",
             "floating coupon referencing {coupon_variable_index.value} on a {asset_type}"),
        leaf("floating_wrong_asset", Outcome::ineligible, "floating_other_asset",
             "floating coupon on asset type {asset_type}"),
        leaf("index_not_money_market", Outcome::ineligible, "floating_non_money_market",
             "variable coupon linked to {coupon_variable_index.value}, not a money-market rate"),
        predicate("fixed", "coupon_fixed.present", Comparator::eq, {true}, "fixed_ok", "no_coupon"),
        leaf("fixed_ok", Outcome::eligible, "fixed", "fixed-rate coupon"),
        leaf("no_coupon", Outcome::review, std::nullopt, "no coupon evidence found"),
    };
    return DecisionTree(std::move(manifest), std::move(nodes), "variable");
}

DecisionTree default_liquidation_tree() {
    std::vector<FeatureSpec> manifest = {
        {"status_senior_non_preferred.present", FeatureKind::boolean, {true, false}},
        {"status_non_preferred.present", FeatureKind::boolean, {true, false}},
        {"issuer_group", FeatureKind::string, {str("credit_institution"), str("corporate"), str("public_sector")}},
        {"issue_date", FeatureKind::date, {ymd(2018, 6, 30), ymd(2019, 1, 1), ymd(2021, 3, 15)}},
    };
    std::vector<TreeNode> nodes = {
        predicate("senior_non_preferred", "status_senior_non_preferred.present", Comparator::eq, {true}, "issuer",
                  "non_preferred"),
        predicate("issuer", "issuer_group", Comparator::eq, {str("credit_institution")}, "cutoff", "snp_non_bank"),
        predicate("cutoff", "issue_date", Comparator::lt, {ymd(2019, 1, 1)}, "snp_before_cutoff", "snp_ok"),
        leaf("snp_ok", Outcome::eligible, "senior_non_preferred",
             "senior non-preferred debt of a credit institution issued on {issue_date}"),
        leaf("snp_before_cutoff", Outcome::ineligible, "senior_non_preferred",
             "senior non-preferred debt issued on {issue_date}, before the 2019-01-01 cutoff"),
        leaf("snp_non_bank", Outcome::ineligible, "senior_non_preferred",
             "senior non-preferred status claimed by issuer group {issuer_group}"),
        predicate("non_preferred", "status_non_preferred.present", Comparator::eq, {true}, "subordinated",
                  "no_status"),
        leaf("subordinated", Outcome::ineligible, "subordinated_non_preferred", "subordinated non-preferred status"),
        leaf("no_status", Outcome::review, std::nullopt, "no liquidation status evidence found"),
    };
    return DecisionTree(std::move(manifest), std::move(nodes), "senior_non_preferred");
}

constexpr std::array<std::string_view, 4> kNormalizerNames = {"currency", "amount", "lexicon", "verbatim"};

std::optional<NormalizerKind> parse_normalizer(std::string_view s) {
    for (std::size_t i = 0; i < kNormalizerNames.size(); ++i)
        if (kNormalizerNames[i] == s) return static_cast<NormalizerKind>(i);
    return std::nullopt;
}

Outcome classify(const std::string& value, const EligibleSet& set) {
    return set.contains(value) ? Outcome::eligible : Outcome::ineligible;
}

}  // namespace

std::string_view to_string(NormalizerKind k) noexcept {
    return kNormalizerNames[static_cast<std::size_t>(k)];
}

Outcome compose_overall(const std::vector<CriterionDecision>& decisions) {
    bool all_eligible = !decisions.empty();
    for (const auto& d : decisions) {
        if (d.outcome == Outcome::ineligible) return Outcome::ineligible;
        if (d.outcome != Outcome::eligible) all_eligible = false;
    }
    return all_eligible ? Outcome::eligible : Outcome::review;
}

bool EligibleSet::contains(const std::string& value) const {
    if (values.count(value)) return true;
    if (!min && !max) return false;
    const auto v = as_number(value);
    if (!v) return false;
    if (min && *v < *min) return false;
    if (max && *v > *max) return false;
    return true;
}

std::string EligibleSet::describe() const {
    std::string out;
    if (!values.empty()) {
        out = "{";
        bool first = true;
        for (const auto& v : values) {
            if (!first) out += ", ";
            out += v;
            first = false;
        }
        out += "}";
    }
    if (min || max) {
        if (!out.empty()) out += " or ";
        out += "[" + (min ? fmt2(*min) : std::string("-inf")) + ", " + (max ? fmt2(*max) : std::string("+inf")) + "]";
    }
    return out.empty() ? "{}" : out;
}

const TreeBinding* DeciderConfig::tree_for(Criterion c) const noexcept {
    for (const auto& t : trees)
        if (t.criterion == c) return &t;
    return nullptr;
}

void check_config(const DeciderConfig& cfg) {
    if (!(cfg.threshold >= 0.0 && cfg.threshold <= 1.0)) throw InputError("threshold must lie in [0,1]");
    if (!(cfg.conflict_margin >= 0.0 && cfg.conflict_margin <= 1.0))
        throw InputError("conflict_margin must lie in [0,1]");
    for (auto c : kAllCriteria) {
        if (!cfg.mapping.count(c))
            throw InputError("mapping does not cover criterion " + std::string(to_string(c)));
        if (!cfg.tree_for(c) && !cfg.eligible_values.count(c))
            throw InputError("direct criterion " + std::string(to_string(c)) + " has no eligible values");
    }
    for (std::size_t i = 0; i < cfg.trees.size(); ++i)
        for (std::size_t j = i + 1; j < cfg.trees.size(); ++j)
            if (cfg.trees[i].criterion == cfg.trees[j].criterion)
                throw InputError("criterion " + std::string(to_string(cfg.trees[i].criterion)) + " has two trees");
}

DeciderConfig default_decider_config() {
    using T = TargetType;
    DeciderConfig cfg;
    cfg.mapping = {
        {Criterion::Coupon,
         {T::coupon_fixed, T::coupon_variable_index, T::coupon_variable_margin, T::coupon_variable_operator,
          T::coupon_variable_tenor}},
        {Criterion::Currency, {T::currency}},
        {Criterion::EarlyRedemptionAmount, {T::early_redemption_amount}},
        {Criterion::PrincipalAmount, {T::principal_amount}},
        {Criterion::RedemptionAtMaturity, {T::redemption_at_maturity, T::redemption_at_maturity_amount}},
        {Criterion::SpecialTerminationRight, {T::special_termination, T::special_termination_amount}},
        {Criterion::LiquidationStatus, {T::status_senior_non_preferred, T::status_non_preferred}},
        {Criterion::TypeOfInstrument, {T::type_of_instrument}},
    };
    for (auto t : kAllTargetTypes) cfg.normalizers[t] = NormalizerKind::lexicon;
    cfg.normalizers[T::currency] = NormalizerKind::currency;
    cfg.normalizers[T::isin] = NormalizerKind::verbatim;
    for (auto t : {T::principal_amount, T::early_redemption_amount, T::redemption_at_maturity_amount, T::coupon_fixed,
                   T::coupon_variable_margin})
        cfg.normalizers[t] = NormalizerKind::amount;

    cfg.lexicons = {
        {T::early_redemption, {{"vorzeitig", "issuer_call"}, {"early", "issuer_call"}}},
        {T::early_redemption_amount, {{"marktwert", "market_value"}, {"market value", "market_value"}}},
        {T::redemption_at_maturity,
         {{"nennbetrag", "par"},
          {"principal amount", "par"},
          {"wertentwicklung", "performance_linked"},
          {"basiswert", "performance_linked"},
          {"performance", "performance_linked"},
          {"underlying", "performance_linked"}}},
        {T::special_termination,
         {{"steuerlich", "tax_call"},
          {"tax reasons", "tax_call"},
          {"regulatorisch", "regulatory_call"},
          {"regulatory", "regulatory_call"},
          {"ermessen", "discretionary_call"},
          {"discretion", "discretionary_call"}}},
        {T::special_termination_amount,
         {{"nennbetrag", "par_plus_accrued"},
          {"principal amount", "par_plus_accrued"},
          {"marktwert", "market_value"},
          {"market value", "market_value"}}},
        {T::coupon_variable_index,
         {{"euribor", "euribor"},
          {"€str", "estr"},
          {"estr", "estr"},
          {"eonia", "eonia"},
          {"libor", "libor"},
          {"sofr", "sofr"},
          {"dax", "equity_index"},
          {"hvpi", "inflation"},
          {"hicp", "inflation"}}},
        {T::coupon_variable_operator,
         {{"zuzüglich", "plus"}, {"plus", "plus"}, {"abzüglich", "minus"}, {"minus", "minus"}}},
        {T::coupon_variable_tenor,
         {{"3 monate", "3M"},
          {"drei monate", "3M"},
          {"3 months", "3M"},
          {"three months", "3M"},
          {"6 monate", "6M"},
          {"sechs monate", "6M"},
          {"6 months", "6M"},
          {"six months", "6M"},
          {"12 monate", "12M"},
          {"zwölf monate", "12M"},
          {"12 months", "12M"},
          {"twelve months", "12M"}}},
        {T::status_senior_non_preferred,
         {{"nicht nachrangige nicht bevorrechtigte", "senior_non_preferred"},
          {"senior non-preferred", "senior_non_preferred"}}},
        {T::status_non_preferred,
         {{"nicht bevorrechtigte nachrangige", "subordinated_non_preferred"},
          {"subordinated non-preferred", "subordinated_non_preferred"}}},
        {T::type_of_instrument,
         {{"inhaberschuldverschreibung", "bearer_bond"},
          {"bearer bond", "bearer_bond"},
          {"hypothekenpfandbrief", "covered_bond"},
          {"pfandbrief", "covered_bond"},
          {"covered bond", "covered_bond"},
          {"senior note", "notes"},
          {"schuldverschreibung", "bond"},
          {"zertifikat", "certificate"},
          {"certificate", "certificate"},
          {"optionsschein", "warrant"},
          {"warrant", "warrant"}}},
    };

    cfg.eligible_values[Criterion::Currency] = EligibleSet{{"EUR"}, std::nullopt, std::nullopt};
    cfg.eligible_values[Criterion::EarlyRedemptionAmount] = EligibleSet{{}, 100.0, std::nullopt};
    cfg.eligible_values[Criterion::PrincipalAmount] = EligibleSet{{}, 0.01, std::nullopt};
    cfg.eligible_values[Criterion::RedemptionAtMaturity] = EligibleSet{{"par"}, 100.0, std::nullopt};
    cfg.eligible_values[Criterion::SpecialTerminationRight] =
        EligibleSet{{"par_plus_accrued", "regulatory_call", "tax_call"}, std::nullopt, std::nullopt};
    cfg.eligible_values[Criterion::TypeOfInstrument] =
        EligibleSet{{"bearer_bond", "bond", "covered_bond", "notes"}, std::nullopt, std::nullopt};

    cfg.trees.push_back({Criterion::Coupon, default_coupon_tree()});
    cfg.trees.push_back({Criterion::LiquidationStatus, default_liquidation_tree()});
    check_config(cfg);
    return cfg;
}

Json to_json(const DeciderConfig& cfg) {
    Json j;
    j["version"] = cfg.version;
    j["threshold"] = cfg.threshold;
    j["conflict_margin"] = cfg.conflict_margin;
    j["amount_locale"] = cfg.amount_locale == AmountLocale::german ? "de" : "en";
    Json mapping = Json::object();
    for (auto c : kAllCriteria) {
        auto it = cfg.mapping.find(c);
        if (it == cfg.mapping.end()) continue;
        Json types = Json::array();
        for (auto t : it->second) types.push_back(to_string(t));
        mapping[std::string(to_string(c))] = std::move(types);
    }
    j["mapping"] = std::move(mapping);
    Json normalizers = Json::object();
    for (const auto& [t, k] : cfg.normalizers) normalizers[std::string(to_string(t))] = to_string(k);
    j["normalizers"] = std::move(normalizers);
    Json lexicons = Json::object();
    for (const auto& [t, lex] : cfg.lexicons) {
        Json entries = Json::object();
        for (const auto& [k, v] : lex) entries[k] = v;
        lexicons[std::string(to_string(t))] = std::move(entries);
    }
    j["lexicons"] = std::move(lexicons);
    Json aliases = Json::object();
    for (const auto& [k, v] : cfg.currency_aliases) aliases[k] = v;
    j["currency_aliases"] = std::move(aliases);
    Json eligible = Json::object();
    for (auto c : kAllCriteria) {
        auto it = cfg.eligible_values.find(c);
        if (it == cfg.eligible_values.end()) continue;
        Json e;
        e["values"] = Json(std::vector<std::string>(it->second.values.begin(), it->second.values.end()));
        if (it->second.min) e["min"] = *it->second.min;
        if (it->second.max) e["max"] = *it->second.max;
        eligible[std::string(to_string(c))] = std::move(e);
    }
    j["eligible_values"] = std::move(eligible);
    Json trees = Json::array();
    for (const auto& t : cfg.trees) {
        Json tj;
        tj["criterion"] = to_string(t.criterion);
        const Json tree = to_json(t.tree);
        for (const auto& [k, v] : tree.items()) tj[k] = v;
        trees.push_back(std::move(tj));
    }
    j["trees"] = std::move(trees);
    return j;
}

DeciderConfig decider_config_from_json(const Json& j) {
    auto criterion = [](const std::string& name) {
        auto c = parse_criterion(name);
        if (!c) throw FormatError("unknown criterion '" + name + "'");
        return *c;
    };
    auto type = [](const std::string& name) {
        auto t = parse_target_type(name);
        if (!t) throw FormatError("unknown target type '" + name + "'");
        return *t;
    };
    try {
        DeciderConfig cfg;
        cfg.version = j.value("version", std::string("custom"));
        cfg.threshold = j.at("threshold").get<double>();
        cfg.conflict_margin = j.value("conflict_margin", 0.1);
        cfg.amount_locale = j.value("amount_locale", std::string("de")) == "en" ? AmountLocale::english
                                                                                 : AmountLocale::german;
        for (const auto& [name, types] : j.at("mapping").items()) {
            auto& list = cfg.mapping[criterion(name)];
            for (const auto& t : types) list.push_back(type(t.get<std::string>()));
        }
        for (auto t : kAllTargetTypes) cfg.normalizers[t] = NormalizerKind::lexicon;
        if (j.contains("normalizers")) {
            for (const auto& [name, kind] : j.at("normalizers").items()) {
                auto k = parse_normalizer(kind.get<std::string>());
                if (!k) throw FormatError("unknown normalizer '" + kind.get<std::string>() + "'");
                cfg.normalizers[type(name)] = *k;
            }
        }
        if (j.contains("lexicons")) {
            for (const auto& [name, entries] : j.at("lexicons").items()) {
                auto& lex = cfg.lexicons[type(name)];
                for (const auto& [k, v] : entries.items()) lex.emplace_back(fold_text(k), v.get<std::string>());
            }
        }
        if (j.contains("currency_aliases"))
            for (const auto& [k, v] : j.at("currency_aliases").items())
                cfg.currency_aliases[fold_text(k)] = v.get<std::string>();
        for (const auto& [name, e] : j.at("eligible_values").items()) {
            EligibleSet set;
            if (e.is_array()) {
                for (const auto& v : e) set.values.insert(v.get<std::string>());
            } else {
                if (e.contains("values"))
                    for (const auto& v : e.at("values")) set.values.insert(v.get<std::string>());
                if (e.contains("min")) set.min = e.at("min").get<double>();
                if (e.contains("max")) set.max = e.at("max").get<double>();
            }
            cfg.eligible_values[criterion(name)] = std::move(set);
        }
        if (j.contains("trees"))
            for (const auto& t : j.at("trees"))
                cfg.trees.push_back({criterion(t.at("criterion").get<std::string>()), decision_tree_from_json(t)});
        check_config(cfg);
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed decider config: ") + e.what());
    }
}

DeciderConfig load_decider_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return decider_config_from_json(parse_json(buf.str()));
}

std::string annotation_surface(const std::string& text, const Annotation& a) {
    const utf8::OffsetMap map(text);
    std::string out;
    for (const auto& f : a.fragments) {
        if (f.end > map.size() || f.start >= f.end) continue;
        if (!out.empty()) out += ' ';
        out += map.slice(f.start, f.end);
    }
    return out;
}

std::vector<NormalizedEvidence> normalize_evidence(const std::string& text, const std::vector<Annotation>& evidence,
                                                   const DeciderConfig& cfg) {
    static const Lexicon kEmpty;
    std::vector<NormalizedEvidence> out;
    out.reserve(evidence.size());
    for (const auto& a : evidence) {
        NormalizedEvidence n{a, std::string(kUnknownValue), annotation_surface(text, a)};
        auto nk = cfg.normalizers.find(a.type);
        const auto kind = nk == cfg.normalizers.end() ? NormalizerKind::lexicon : nk->second;
        auto lx = cfg.lexicons.find(a.type);
        const Lexicon& lexicon = lx == cfg.lexicons.end() ? kEmpty : lx->second;
        std::optional<std::string> value;
        switch (kind) {
            case NormalizerKind::currency: value = normalize_currency(n.surface, cfg.currency_aliases); break;
            case NormalizerKind::amount: value = normalize_amount(n.surface, lexicon, cfg.amount_locale); break;
            case NormalizerKind::lexicon: value = normalize_lexicon(n.surface, lexicon); break;
            case NormalizerKind::verbatim:
                if (!n.surface.empty()) value = n.surface;
                break;
        }
        if (value) n.value = *value;
        out.push_back(std::move(n));
    }
    return out;
}

std::optional<ValueSelection> select_primary_value(const std::vector<NormalizedEvidence>& evidence) {
    if (evidence.empty()) return std::nullopt;
    std::map<std::string, ValueGroup> groups;
    for (const auto& e : evidence) {
        auto [it, fresh] = groups.try_emplace(e.value);
        auto& g = it->second;
        const double c = e.annotation.confidence;
        const std::size_t off = e.annotation.first_offset();
        if (fresh) {
            g.value = e.value;
            g.confidence = c;
            g.first_offset = off;
        } else if (c > g.confidence || (c == g.confidence && off < g.first_offset)) {
            g.confidence = c;
            g.first_offset = off;
        }
        g.fragments.insert(g.fragments.end(), e.annotation.fragments.begin(), e.annotation.fragments.end());
        g.surfaces.push_back(e.surface);
    }
    std::vector<ValueGroup> ordered;
    for (auto& [_, g] : groups) {
        std::sort(g.fragments.begin(), g.fragments.end());
        g.fragments.erase(std::unique(g.fragments.begin(), g.fragments.end()), g.fragments.end());
        ordered.push_back(std::move(g));
    }
    std::stable_sort(ordered.begin(), ordered.end(), [](const ValueGroup& a, const ValueGroup& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        return a.first_offset < b.first_offset;
    });
    ValueSelection sel;
    sel.chosen = std::move(ordered.front());
    sel.alternatives.assign(std::make_move_iterator(ordered.begin() + 1), std::make_move_iterator(ordered.end()));
    return sel;
}

CriterionDecision decide_direct_criterion(Criterion criterion, const std::vector<NormalizedEvidence>& evidence,
                                          const DeciderConfig& cfg) {
    CriterionDecision d;
    d.criterion = criterion;
    const std::string name(to_string(criterion));
    auto mapped = cfg.mapping.find(criterion);
    const std::string types = mapped == cfg.mapping.end() ? name : describe_types(mapped->second);

    const auto sel = select_primary_value(evidence);
    if (!sel) {
        d.outcome = Outcome::review;
        d.explanation = name + ": no " + types + " evidence found; marked for human evaluation";
        return d;
    }
    auto eligible_it = cfg.eligible_values.find(criterion);
    const EligibleSet eligible = eligible_it == cfg.eligible_values.end() ? EligibleSet{} : eligible_it->second;

    const auto& chosen = sel->chosen;
    d.chosen_value = chosen.value;
    d.confidence = chosen.confidence;
    d.supporting_fragments = chosen.fragments;
    for (const auto& g : sel->alternatives) d.alternatives.push_back(to_alternative(g));

    const std::string where = " at " + describe_fragments(chosen.fragments);
    const std::string head = name + ": value " + chosen.value + " (confidence " + fmt2(chosen.confidence) + ")" + where;

    if (chosen.value == kUnknownValue) {
        d.outcome = Outcome::review;
        d.explanation = name + ": evidence '" + (chosen.surfaces.empty() ? std::string() : chosen.surfaces.front()) +
                        "'" + where + " could not be normalized; marked for human evaluation";
        return d;
    }
    if (chosen.confidence < cfg.threshold) {
        d.outcome = Outcome::review;
        d.explanation = head + " is below the confidence threshold " + fmt2(cfg.threshold) +
                        "; marked for human evaluation";
        return d;
    }

    // Strongest decisive (above-threshold) value on each side.
    const ValueGroup* best_eligible = nullptr;
    const ValueGroup* best_ineligible = nullptr;
    auto consider = [&](const ValueGroup& g) {
        if (g.value == kUnknownValue || g.confidence < cfg.threshold) return;
        auto& slot = classify(g.value, eligible) == Outcome::eligible ? best_eligible : best_ineligible;
        if (!slot) slot = &g;
    };
    consider(chosen);
    for (const auto& g : sel->alternatives) consider(g);
    if (best_eligible && best_ineligible &&
        std::abs(best_eligible->confidence - best_ineligible->confidence) < cfg.conflict_margin - kGapTolerance) {
        d.outcome = Outcome::review;
        d.explanation = name + ": conflicting evidence, eligible value " + best_eligible->value + " (" +
                        fmt2(best_eligible->confidence) + ") against ineligible value " + best_ineligible->value +
                        " (" + fmt2(best_ineligible->confidence) + "); marked for human evaluation";
        return d;
    }

    d.outcome = classify(chosen.value, eligible);
    d.explanation = head + (d.outcome == Outcome::eligible ? " is in the eligible set " : " is not in the eligible set ") +
                    eligible.describe();
    if (!d.alternatives.empty()) d.explanation += "; " + std::to_string(d.alternatives.size()) + " other value(s) found";
    return d;
}

FeatureMap assemble_features(const std::vector<NormalizedEvidence>& evidence, const DocumentMetadata& metadata,
                             const DeciderConfig& cfg) {
    FeatureMap f;
    std::map<TargetType, std::vector<NormalizedEvidence>> by_type;
    for (const auto& e : evidence)
        if (e.annotation.confidence >= cfg.threshold) by_type[e.annotation.type].push_back(e);
    for (auto t : kAllTargetTypes) {
        const std::string prefix(to_string(t));
        auto it = by_type.find(t);
        const std::size_t count = it == by_type.end() ? 0 : it->second.size();
        f[prefix + ".present"] = count > 0;
        f[prefix + ".count"] = static_cast<double>(count);
        if (count > 0) {
            const auto sel = select_primary_value(it->second);
            if (sel && sel->chosen.value != kUnknownValue) f[prefix + ".value"] = sel->chosen.value;
        }
    }
    if (metadata.issue_date) f["issue_date"] = *metadata.issue_date;
    if (metadata.issuer_group) f["issuer_group"] = *metadata.issuer_group;
    if (metadata.asset_type) f["asset_type"] = *metadata.asset_type;
    if (metadata.isin) f["isin"] = *metadata.isin;
    for (const auto& [k, v] : metadata.extra) f["extra." + k] = v;
    return f;
}

CriterionDecision decide_tree_criterion(Criterion criterion, const DecisionTree& tree,
                                        const std::vector<NormalizedEvidence>& evidence, const FeatureMap& features,
                                        const DeciderConfig& cfg) {
    CriterionDecision d;
    d.criterion = criterion;
    const auto result = tree.evaluate(features);
    d.outcome = result.outcome;
    d.chosen_value = result.value;
    d.trace = result.trace;

    if (const auto sel = select_primary_value(evidence)) {
        d.alternatives.push_back(to_alternative(sel->chosen));
        for (const auto& g : sel->alternatives) d.alternatives.push_back(to_alternative(g));
    }

    // Confidence is the weakest decisive evidence the walk relied on.
    double confidence = 1.0;
    for (const auto& feature : result.features_used) {
        const auto dot = feature.find('.');
        if (dot == std::string::npos) continue;
        const auto type = parse_target_type(feature.substr(0, dot));
        if (!type) continue;
        const NormalizedEvidence* best = nullptr;
        for (const auto& e : evidence)
            if (e.annotation.type == *type && e.annotation.confidence >= cfg.threshold &&
                (!best || e.annotation.confidence > best->annotation.confidence))
                best = &e;
        if (!best) continue;
        confidence = std::min(confidence, best->annotation.confidence);
        for (const auto& frag : best->annotation.fragments) d.supporting_fragments.push_back(frag);
    }
    std::sort(d.supporting_fragments.begin(), d.supporting_fragments.end());
    d.supporting_fragments.erase(std::unique(d.supporting_fragments.begin(), d.supporting_fragments.end()),
                                 d.supporting_fragments.end());
    const bool missing = !result.trace.empty() && result.trace.back().rfind("missing: ", 0) == 0;
    d.confidence = missing ? 0.0 : confidence;

    std::string path;
    for (const auto& step : result.trace) {
        if (!path.empty()) path += "; ";
        path += step;
    }
    d.explanation = std::string(to_string(criterion)) + " (decision tree): " + result.explanation;
    if (!path.empty()) d.explanation += ". Path: " + path;
    if (d.outcome == Outcome::review) d.explanation += "; marked for human evaluation";
    return d;
}

Verdict decide_document(const Document& doc, const DeciderConfig& cfg) {
    const auto all = normalize_evidence(doc.text, doc.annotations, cfg);
    const auto features = assemble_features(all, doc.metadata, cfg);
    Verdict v;
    for (auto c : kAllCriteria) {
        std::vector<NormalizedEvidence> evidence;
        if (auto m = cfg.mapping.find(c); m != cfg.mapping.end())
            for (const auto& e : all)
                if (std::find(m->second.begin(), m->second.end(), e.annotation.type) != m->second.end())
                    evidence.push_back(e);
        if (const auto* binding = cfg.tree_for(c))
            v.decisions.push_back(decide_tree_criterion(c, binding->tree, evidence, features, cfg));
        else
            v.decisions.push_back(decide_direct_criterion(c, evidence, cfg));
    }
    v.overall = compose_overall(v.decisions);
    return v;
}

Json to_json(const CriterionDecision& d) {
    Json j;
    j["criterion"] = to_string(d.criterion);
    j["outcome"] = to_string(d.outcome);
    j["chosen_value"] = d.chosen_value ? Json(*d.chosen_value) : Json(nullptr);
    j["confidence"] = d.confidence;
    Json alts = Json::array();
    for (const auto& a : d.alternatives)
        alts.push_back(Json{{"value", a.value}, {"confidence", a.confidence}, {"fragments", fragments_json(a.fragments)}});
    j["alternatives"] = std::move(alts);
    j["explanation"] = d.explanation;
    j["supporting_fragments"] = fragments_json(d.supporting_fragments);
    j["trace"] = d.trace;
    return j;
}

Json to_json(const Verdict& v) {
    Json j;
    j["overall"] = to_string(v.overall);
    Json decisions = Json::array();
    for (const auto& d : v.decisions) decisions.push_back(to_json(d));
    j["decisions"] = std::move(decisions);
    return j;
}

Verdict verdict_from_json(const Json& j) {
    try {
        Verdict v;
        auto overall = parse_outcome(j.at("overall").get<std::string>());
        if (!overall) throw FormatError("unknown overall outcome");
        v.overall = *overall;
        for (const auto& jd : j.at("decisions")) {
            CriterionDecision d;
            auto c = parse_criterion(jd.at("criterion").get<std::string>());
            auto o = parse_outcome(jd.at("outcome").get<std::string>());
            if (!c || !o) throw FormatError("unknown criterion or outcome");
            d.criterion = *c;
            d.outcome = *o;
            if (!jd.at("chosen_value").is_null()) d.chosen_value = jd.at("chosen_value").get<std::string>();
            d.confidence = jd.at("confidence").get<double>();
            for (const auto& a : jd.at("alternatives"))
                d.alternatives.push_back(Alternative{a.at("value").get<std::string>(), a.at("confidence").get<double>(),
                                                     fragments_from_json(a.at("fragments"))});
            d.explanation = jd.at("explanation").get<std::string>();
            d.supporting_fragments = fragments_from_json(jd.at("supporting_fragments"));
            d.trace = jd.value("trace", std::vector<std::string>{});
            v.decisions.push_back(std::move(d));
        }
        return v;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed verdict: ") + e.what());
    }
}

}  // namespace elig

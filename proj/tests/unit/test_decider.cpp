#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "elig/decider.hpp"
#include "elig/errors.hpp"
#include "oracles.hpp"
#include "tree_oracles.hpp"

using namespace elig;

namespace {

// ASCII-only text, so byte offsets equal character offsets.
void annotate(Document& doc, TargetType type, const std::string& needle, double confidence = 1.0,
              std::size_t occurrence = 0) {
    std::size_t pos = doc.text.find(needle);
    for (std::size_t i = 0; i < occurrence; ++i) pos = doc.text.find(needle, pos + 1);
    ASSERT_NE(pos, std::string::npos) << needle;
    doc.annotations.push_back({"", type, {{pos, pos + needle.size()}}, Source::model, confidence, std::nullopt});
}

Document eligible_doc() {
    Document d;
    d.id = "all-eligible";
    d.text =
        "Currency: EUR. Principal: 1.000.000,00. Early Redemption Amount is 100 %. "
        "Redeemed at their principal amount, the Final Redemption Amount is 100 %. "
        "The Issuer may call for tax reasons. Interest 3,5 % per annum. "
        "The Notes are senior non-preferred obligations. Type: bearer bonds.";
    d.tokens = baseline_tokenize(d.text);
    d.metadata.issue_date = parse_date("2021-03-15");
    d.metadata.issuer_group = "credit_institution";
    d.metadata.asset_type = "debt_instrument";
    annotate(d, TargetType::currency, "EUR");
    annotate(d, TargetType::principal_amount, "1.000.000,00");
    annotate(d, TargetType::early_redemption_amount, "100 %");
    annotate(d, TargetType::redemption_at_maturity, "Redeemed at their principal amount");
    annotate(d, TargetType::redemption_at_maturity_amount, "100 %", 1.0, 1);
    annotate(d, TargetType::special_termination, "for tax reasons");
    annotate(d, TargetType::coupon_fixed, "3,5 %");
    annotate(d, TargetType::status_senior_non_preferred, "senior non-preferred obligations");
    annotate(d, TargetType::type_of_instrument, "bearer bonds");
    return d;
}

const CriterionDecision& decision(const Verdict& v, Criterion c) {
    for (const auto& d : v.decisions)
        if (d.criterion == c) return d;
    throw std::logic_error("criterion missing");
}

std::vector<NormalizedEvidence> currency_evidence(std::vector<std::tuple<std::string, double, std::size_t>> items) {
    std::vector<NormalizedEvidence> out;
    for (auto& [value, conf, offset] : items) {
        NormalizedEvidence n;
        n.annotation = {"", TargetType::currency, {{offset, offset + 3}}, Source::model, conf, std::nullopt};
        n.value = value;
        n.surface = value;
        out.push_back(std::move(n));
    }
    return out;
}

Outcome expected_overall(const std::vector<Outcome>& outcomes) {
    bool all_eligible = true;
    for (auto o : outcomes) {
        if (o == Outcome::ineligible) return Outcome::ineligible;
        all_eligible = all_eligible && o == Outcome::eligible;
    }
    return all_eligible ? Outcome::eligible : Outcome::review;
}

}  // namespace

TEST(Decider, AllEightEligible) {
    const auto doc = eligible_doc();
    const auto v = decide_document(doc, default_decider_config());
    ASSERT_EQ(v.decisions.size(), 8u);
    for (std::size_t i = 0; i < 8; ++i) {
        EXPECT_EQ(v.decisions[i].criterion, kAllCriteria[i]);
        EXPECT_EQ(v.decisions[i].outcome, Outcome::eligible)
            << to_string(v.decisions[i].criterion) << ": " << v.decisions[i].explanation;
    }
    EXPECT_EQ(v.overall, Outcome::eligible);
    EXPECT_EQ(decision(v, Criterion::Currency).chosen_value, "EUR");
    EXPECT_EQ(decision(v, Criterion::Coupon).chosen_value, "fixed");
    EXPECT_FALSE(decision(v, Criterion::Coupon).trace.empty());
}

TEST(Decider, MissingCurrencyMeansReview) {
    auto doc = eligible_doc();
    std::erase_if(doc.annotations, [](const Annotation& a) { return a.type == TargetType::currency; });
    const auto v = decide_document(doc, default_decider_config());
    const auto& c = decision(v, Criterion::Currency);
    EXPECT_EQ(c.outcome, Outcome::review);
    EXPECT_FALSE(c.chosen_value.has_value());
    EXPECT_EQ(v.overall, Outcome::review);
}

TEST(Decider, UnlistedCurrencyIsIneligible) {
    auto doc = eligible_doc();
    doc.text.replace(10, 3, "XYZ");
    doc.tokens = baseline_tokenize(doc.text);
    const auto v = decide_document(doc, default_decider_config());
    EXPECT_EQ(decision(v, Criterion::Currency).outcome, Outcome::ineligible);
    EXPECT_EQ(decision(v, Criterion::Currency).chosen_value, "XYZ");
    EXPECT_EQ(v.overall, Outcome::ineligible);
}

TEST(Decider, EuroSpelledOut) {
    Document doc;
    doc.id = "euro";
    doc.text = "Die Schuldverschreibungen lauten auf EURO.";
    doc.tokens = baseline_tokenize(doc.text);
    annotate(doc, TargetType::currency, "EURO");
    const auto cfg = default_decider_config();
    const auto ev = normalize_evidence(doc.text, doc.annotations, cfg);
    const auto d = decide_direct_criterion(Criterion::Currency, ev, cfg);
    EXPECT_EQ(d.outcome, Outcome::eligible);
    EXPECT_EQ(d.chosen_value, "EUR");
    EXPECT_NE(d.explanation.find("EUR"), std::string::npos);
    EXPECT_NE(d.explanation.find("37"), std::string::npos);  // fragment offset
    EXPECT_EQ(d.supporting_fragments, (std::vector<Interval>{{37, 41}}));
}

TEST(Decider, UnknownCurrencyIsReview) {
    Document doc;
    doc.id = "z";
    doc.text = "Payable in Zorkmids.";
    annotate(doc, TargetType::currency, "Zorkmids");
    const auto cfg = default_decider_config();
    const auto d = decide_direct_criterion(Criterion::Currency, normalize_evidence(doc.text, doc.annotations, cfg), cfg);
    EXPECT_EQ(d.outcome, Outcome::review);
}

TEST(Decider, BelowThresholdIsReview) {
    const auto cfg = default_decider_config();
    const auto d = decide_direct_criterion(Criterion::Currency, currency_evidence({{"EUR", 0.4, 0}}), cfg);
    EXPECT_EQ(d.outcome, Outcome::review);
    EXPECT_EQ(d.chosen_value, "EUR");
}

TEST(Decider, DecisiveConflictIsReview) {
    const auto cfg = default_decider_config();
    auto close = decide_direct_criterion(Criterion::Currency, currency_evidence({{"EUR", 0.9, 0}, {"USD", 0.85, 10}}), cfg);
    EXPECT_EQ(close.outcome, Outcome::review);
    auto clear = decide_direct_criterion(Criterion::Currency, currency_evidence({{"EUR", 0.9, 0}, {"USD", 0.7, 10}}), cfg);
    EXPECT_EQ(clear.outcome, Outcome::eligible);
    ASSERT_EQ(clear.alternatives.size(), 1u);
    EXPECT_EQ(clear.alternatives[0].value, "USD");
    // The exact margin is not a conflict.
    auto edge = decide_direct_criterion(Criterion::Currency, currency_evidence({{"EUR", 0.75, 0}, {"USD", 0.65, 10}}), cfg);
    EXPECT_EQ(edge.outcome, Outcome::eligible);
}

TEST(SelectPrimary, HighestConfidence) {
    const auto sel = select_primary_value(currency_evidence({{"EUR", 0.9, 0}, {"USD", 0.4, 10}}));
    ASSERT_TRUE(sel.has_value());
    EXPECT_EQ(sel->chosen.value, "EUR");
    ASSERT_EQ(sel->alternatives.size(), 1u);
    EXPECT_EQ(sel->alternatives[0].value, "USD");
}

TEST(SelectPrimary, Empty) {
    EXPECT_FALSE(select_primary_value({}).has_value());
}

TEST(SelectPrimary, TieTakesEarliestOffset) {
    const auto sel = select_primary_value(currency_evidence({{"EUR", 0.7, 40}, {"EUR", 0.7, 10}}));
    ASSERT_TRUE(sel.has_value());
    EXPECT_EQ(sel->chosen.value, "EUR");
    EXPECT_EQ(sel->chosen.first_offset, 10u);
    EXPECT_TRUE(sel->alternatives.empty());
    EXPECT_EQ(sel->chosen.fragments, (std::vector<Interval>{{10, 13}, {40, 43}}));
    // Between different values the earlier one wins a tie.
    const auto two = select_primary_value(currency_evidence({{"USD", 0.7, 40}, {"EUR", 0.7, 10}}));
    EXPECT_EQ(two->chosen.value, "EUR");
}

TEST(Decider, MonotoneUnderWeakerAlternatives) {
    testgen::Rng rng(23);
    const auto cfg = default_decider_config();
    const std::vector<std::string> values = {"EUR", "USD", "GBP", "unknown"};
    for (int round = 0; round < 1000; ++round) {
        std::vector<std::tuple<std::string, double, std::size_t>> items;
        const std::size_t n = 1 + rng.below(4);
        for (std::size_t i = 0; i < n; ++i)
            items.emplace_back(values[rng.below(values.size())], rng.uniform(0.0, 1.0), 5 * i);
        const auto base = decide_direct_criterion(Criterion::Currency, currency_evidence(items), cfg);
        // New alternative strictly below the chosen confidence, and far enough
        // below that it cannot open a decisive conflict.
        const double top = base.confidence;
        const double ceiling = std::min(top, std::max(cfg.threshold, top - cfg.conflict_margin));
        if (ceiling <= 0.0) continue;
        auto more = items;
        more.emplace_back(values[rng.below(values.size())], rng.uniform(0.0, ceiling) * 0.999, 100);
        const auto after = decide_direct_criterion(Criterion::Currency, currency_evidence(more), cfg);
        EXPECT_EQ(after.chosen_value, base.chosen_value) << round;
        EXPECT_EQ(after.outcome, base.outcome) << round;
    }
}

TEST(Decider, ChosenValueNeverMovesForWeakerAlternative) {
    testgen::Rng rng(29);
    const auto cfg = default_decider_config();
    const std::vector<std::string> values = {"EUR", "USD", "CHF"};
    for (int round = 0; round < 1000; ++round) {
        std::vector<std::tuple<std::string, double, std::size_t>> items;
        const std::size_t n = 1 + rng.below(4);
        for (std::size_t i = 0; i < n; ++i)
            items.emplace_back(values[rng.below(3)], rng.uniform(0.01, 1.0), 5 * i);
        const auto base = decide_direct_criterion(Criterion::Currency, currency_evidence(items), cfg);
        auto more = items;
        more.emplace_back(values[rng.below(3)], base.confidence * rng.uniform(0.0, 0.999), 100);
        EXPECT_EQ(decide_direct_criterion(Criterion::Currency, currency_evidence(more), cfg).chosen_value,
                  base.chosen_value);
    }
}

TEST(Decider, ComposeOverallExhaustive) {
    const std::array<Outcome, 3> all = {Outcome::eligible, Outcome::ineligible, Outcome::review};
    for (int code = 0; code < 6561; ++code) {
        std::vector<CriterionDecision> ds;
        std::vector<Outcome> os;
        int c = code;
        for (auto crit : kAllCriteria) {
            CriterionDecision d;
            d.criterion = crit;
            d.outcome = all[c % 3];
            c /= 3;
            os.push_back(d.outcome);
            ds.push_back(d);
        }
        ASSERT_EQ(compose_overall(ds), expected_overall(os)) << code;
    }
}

TEST(Decider, VerdictInvariantOnRandomEvidence) {
    testgen::Rng rng(31);
    const auto base = eligible_doc();
    const auto cfg = default_decider_config();
    for (int round = 0; round < 300; ++round) {
        Document doc = base;
        doc.annotations.clear();
        for (const auto& a : base.annotations)
            if (rng.chance(0.8)) {
                auto copy = a;
                copy.confidence = rng.uniform(0.0, 1.0);
                doc.annotations.push_back(copy);
            }
        if (rng.chance(0.3)) doc.metadata.issue_date.reset();
        if (rng.chance(0.3)) doc.metadata.issuer_group = "corporate";
        const auto v = decide_document(doc, cfg);
        std::vector<Outcome> os;
        for (const auto& d : v.decisions) {
            os.push_back(d.outcome);
            EXPECT_GE(d.confidence, 0.0);
            EXPECT_LE(d.confidence, 1.0);
            if (d.outcome != Outcome::review) EXPECT_TRUE(d.chosen_value.has_value());
        }
        EXPECT_EQ(v.overall, expected_overall(os));
        // Pure: same inputs, same bytes.
        EXPECT_EQ(to_json(decide_document(doc, cfg)).dump(), to_json(v).dump());
    }
}

TEST(Decider, LiquidationNeedsIssueDate) {
    auto doc = eligible_doc();
    doc.metadata.issue_date.reset();
    const auto v = decide_document(doc, default_decider_config());
    const auto& d = decision(v, Criterion::LiquidationStatus);
    EXPECT_EQ(d.outcome, Outcome::review);
    ASSERT_FALSE(d.trace.empty());
    EXPECT_EQ(d.trace.back(), "missing: issue_date");
    EXPECT_NE(d.explanation.find("human evaluation"), std::string::npos);
}

TEST(Decider, LiquidationBeforeCutoff) {
    auto doc = eligible_doc();
    doc.metadata.issue_date = parse_date("2018-06-30");
    const auto v = decide_document(doc, default_decider_config());
    EXPECT_EQ(decision(v, Criterion::LiquidationStatus).outcome, Outcome::ineligible);
    EXPECT_EQ(v.overall, Outcome::ineligible);
}

TEST(Decider, FloatingCoupon) {
    Document d;
    d.id = "float";
    d.text = "Reference rate: EURIBOR plus margin.";
    d.metadata.asset_type = "debt_instrument";
    annotate(d, TargetType::coupon_variable_index, "EURIBOR");
    const auto cfg = default_decider_config();
    auto v = decide_document(d, cfg);
    EXPECT_EQ(decision(v, Criterion::Coupon).outcome, Outcome::eligible);
    EXPECT_EQ(decision(v, Criterion::Coupon).chosen_value, "floating_money_market");
    d.metadata.asset_type = "equity";
    v = decide_document(d, cfg);
    EXPECT_EQ(decision(v, Criterion::Coupon).outcome, Outcome::ineligible);
}

TEST(Decider, FeaturesIgnoreWeakEvidence) {
    Document d;
    d.id = "f";
    d.text = "EURIBOR and 4,0 % per annum";
    annotate(d, TargetType::coupon_variable_index, "EURIBOR", 0.3);
    annotate(d, TargetType::coupon_fixed, "4,0 %", 0.9);
    d.metadata.issuer_group = "corporate";
    d.metadata.extra["rating"] = "A";
    const auto cfg = default_decider_config();
    const auto f = assemble_features(normalize_evidence(d.text, d.annotations, cfg), d.metadata, cfg);
    EXPECT_EQ(std::get<bool>(f.at("coupon_variable_index.present")), false);
    EXPECT_EQ(std::get<bool>(f.at("coupon_fixed.present")), true);
    EXPECT_EQ(std::get<double>(f.at("coupon_fixed.count")), 1.0);
    EXPECT_EQ(std::get<std::string>(f.at("coupon_fixed.value")), "4.00");
    EXPECT_EQ(std::get<std::string>(f.at("issuer_group")), "corporate");
    EXPECT_EQ(std::get<std::string>(f.at("extra.rating")), "A");
    EXPECT_EQ(f.count("issue_date"), 0u);
}

TEST(EligibleSetTest, ListedAndRange) {
    EligibleSet s;
    s.values = {"par"};
    s.min = 100.0;
    EXPECT_TRUE(s.contains("par"));
    EXPECT_TRUE(s.contains("100.00"));
    EXPECT_TRUE(s.contains("101.5"));
    EXPECT_FALSE(s.contains("99.99"));
    EXPECT_FALSE(s.contains("market_value"));
    EXPECT_FALSE(s.contains("100abc"));
    EligibleSet only;
    only.values = {"EUR"};
    EXPECT_EQ(only.describe(), "{EUR}");
}

TEST(Config, JsonRoundTrip) {
    const auto cfg = default_decider_config();
    const Json j = to_json(cfg);
    EXPECT_EQ(to_json(decider_config_from_json(j)).dump(), j.dump());
}

TEST(Config, ShippedFileMatchesDefault) {
    std::ifstream in(std::string(ELIG_CONFIG_DIR) + "/decider.default.json");
    ASSERT_TRUE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    EXPECT_EQ(buf.str(), to_json(default_decider_config()).dump(2) + "\n");
    const auto loaded = load_decider_config(std::string(ELIG_CONFIG_DIR) + "/decider.default.json");
    EXPECT_EQ(to_json(loaded).dump(), to_json(default_decider_config()).dump());
}

TEST(Config, Checks) {
    auto cfg = default_decider_config();
    cfg.threshold = 1.5;
    EXPECT_THROW(check_config(cfg), InputError);
    cfg = default_decider_config();
    cfg.mapping.erase(Criterion::Currency);
    EXPECT_THROW(check_config(cfg), InputError);
    cfg = default_decider_config();
    cfg.eligible_values.erase(Criterion::Currency);
    EXPECT_THROW(check_config(cfg), InputError);
    cfg = default_decider_config();
    cfg.trees.push_back(cfg.trees.front());
    EXPECT_THROW(check_config(cfg), InputError);
    EXPECT_NO_THROW(check_config(default_decider_config()));
}

TEST(Config, RebindingIsConfigOnly) {
    // Dropping the Coupon tree and supplying an eligible set turns it into a
    // direct criterion.
    auto cfg = default_decider_config();
    std::erase_if(cfg.trees, [](const TreeBinding& b) { return b.criterion == Criterion::Coupon; });
    cfg.mapping[Criterion::Coupon] = {TargetType::coupon_fixed};
    cfg.eligible_values[Criterion::Coupon].min = 0.0;
    EXPECT_NO_THROW(check_config(cfg));
    const auto v = decide_document(eligible_doc(), cfg);
    EXPECT_EQ(decision(v, Criterion::Coupon).chosen_value, "3.50");
    EXPECT_TRUE(decision(v, Criterion::Coupon).trace.empty());
}

TEST(Trees, CouponMatchesOracle) {
    const auto cfg = default_decider_config();
    const auto* b = cfg.tree_for(Criterion::Coupon);
    ASSERT_NE(b, nullptr);
    const std::vector<std::optional<bool>> bools = {std::nullopt, true, false};
    const std::vector<std::optional<std::string>> indices = {std::nullopt, "euribor", "estr", "equity_index"};
    const std::vector<std::optional<std::string>> assets = {std::nullopt, "debt_instrument", "covered_bond", "equity"};
    std::size_t rows = 0;
    for (const auto& ip : bools)
        for (const auto& iv : indices)
            for (const auto& at : assets)
                for (const auto& fp : bools) {
                    FeatureMap f;
                    if (ip) f["coupon_variable_index.present"] = *ip;
                    if (iv) f["coupon_variable_index.value"] = *iv;
                    if (at) f["asset_type"] = *at;
                    if (fp) f["coupon_fixed.present"] = *fp;
                    const auto got = evaluate_tree(b->tree, f);
                    const auto want = oracle::coupon(ip, iv, at, fp);
                    EXPECT_EQ(std::string(to_string(got.outcome)), want.outcome);
                    EXPECT_EQ(got.value, want.value);
                    ++rows;
                }
    EXPECT_EQ(rows, 3u * 4 * 4 * 3);
}

TEST(Trees, LiquidationMatchesOracle) {
    const auto cfg = default_decider_config();
    const auto* b = cfg.tree_for(Criterion::LiquidationStatus);
    ASSERT_NE(b, nullptr);
    const std::vector<std::optional<bool>> bools = {std::nullopt, true, false};
    const std::vector<std::optional<std::string>> groups = {std::nullopt, "credit_institution", "corporate",
                                                            "public_sector"};
    const std::vector<std::optional<std::string>> dates = {std::nullopt, "2018-12-31", "2019-01-01", "2021-03-15"};
    for (const auto& snp : bools)
        for (const auto& np : bools)
            for (const auto& g : groups)
                for (const auto& dt : dates) {
                    FeatureMap f;
                    if (snp) f["status_senior_non_preferred.present"] = *snp;
                    if (np) f["status_non_preferred.present"] = *np;
                    if (g) f["issuer_group"] = *g;
                    if (dt) f["issue_date"] = *parse_date(*dt);
                    const auto got = evaluate_tree(b->tree, f);
                    const auto want = oracle::liquidation(snp, np, g, dt);
                    EXPECT_EQ(std::string(to_string(got.outcome)), want.outcome);
                    EXPECT_EQ(got.value, want.value);
                    if (got.outcome == Outcome::review && !got.trace.empty() &&
                        got.trace.back().rfind("missing: ", 0) == 0)
                        EXPECT_FALSE(got.value.has_value());
                }
}

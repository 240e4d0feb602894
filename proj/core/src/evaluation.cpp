#include "elig/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include "elig/errors.hpp"

namespace elig {

namespace {

// Sorted, non-overlapping, non-adjacent cover of the fragments.
std::vector<Interval> merged(std::span<const Interval> frags) {
    std::vector<Interval> v;
    for (const auto& f : frags)
        if (f.start < f.end) v.push_back(f);
    std::sort(v.begin(), v.end());
    std::vector<Interval> out;
    for (const auto& f : v) {
        if (!out.empty() && f.start <= out.back().end) out.back().end = std::max(out.back().end, f.end);
        else out.push_back(f);
    }
    return out;
}

std::vector<Interval> hull(std::span<const Interval> frags) {
    auto m = merged(frags);
    if (m.empty()) return m;
    return {Interval{m.front().start, m.back().end}};
}

std::size_t total(const std::vector<Interval>& v) {
    std::size_t n = 0;
    for (const auto& f : v) n += f.end - f.start;
    return n;
}

std::size_t intersection(const std::vector<Interval>& a, const std::vector<Interval>& b) {
    std::size_t i = 0, j = 0, n = 0;
    while (i < a.size() && j < b.size()) {
        const auto lo = std::max(a[i].start, b[j].start);
        const auto hi = std::min(a[i].end, b[j].end);
        if (lo < hi) n += hi - lo;
        if (a[i].end < b[j].end) ++i;
        else ++j;
    }
    return n;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::vector<Annotation> of_type(std::span<const Annotation> all, TargetType t) {
    std::vector<Annotation> out;
    for (const auto& a : all)
        if (a.type == t) out.push_back(a);
    return out;
}

Json fragments_json(const std::vector<Interval>& frags) {
    Json out = Json::array();
    for (const auto& f : frags) out.push_back(Json::array({f.start, f.end}));
    return out;
}

}  // namespace

double iou(std::span<const Interval> a, std::span<const Interval> b, IouMode mode) {
    const auto ma = mode == IouMode::hull ? hull(a) : merged(a);
    const auto mb = mode == IouMode::hull ? hull(b) : merged(b);
    const std::size_t inter = intersection(ma, mb);
    const std::size_t uni = total(ma) + total(mb) - inter;
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double iou(const Annotation& a, const Annotation& b, IouMode mode) {
    return iou(std::span<const Interval>(a.fragments), std::span<const Interval>(b.fragments), mode);
}

MatchResult match_annotations(std::span<const Annotation> a, std::span<const Annotation> b, IouMode mode,
                              double min_iou) {
    std::vector<MatchedPair> candidates;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) {
            const double v = iou(a[i], b[j], mode);
            if (v > 0.0 && v >= min_iou) candidates.push_back({i, j, v});
        }
    std::sort(candidates.begin(), candidates.end(), [](const MatchedPair& x, const MatchedPair& y) {
        if (x.iou != y.iou) return x.iou > y.iou;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });
    MatchResult r;
    std::vector<bool> used_a(a.size()), used_b(b.size());
    for (const auto& c : candidates) {
        if (used_a[c.a] || used_b[c.b]) continue;
        used_a[c.a] = used_b[c.b] = true;
        r.pairs.push_back(c);
    }
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!used_a[i]) r.unmatched_a.push_back(i);
    for (std::size_t j = 0; j < b.size(); ++j)
        if (!used_b[j]) r.unmatched_b.push_back(j);
    return r;
}

std::vector<std::string> annotators_of(const Document& doc) {
    std::set<std::string> ids;
    for (const auto& a : doc.annotations)
        if (a.annotator_id && !a.annotator_id->empty()) ids.insert(*a.annotator_id);
    if (auto it = doc.metadata.extra.find("annotators"); it != doc.metadata.extra.end()) {
        std::stringstream ss(it->second);
        std::string id;
        while (std::getline(ss, id, ',')) {
            const auto b = id.find_first_not_of(" \t");
            const auto e = id.find_last_not_of(" \t");
            if (b != std::string::npos) ids.insert(id.substr(b, e - b + 1));
        }
    }
    return {ids.begin(), ids.end()};
}

AgreementReport iaa_report(std::span<const Document> docs, IouMode mode) {
    std::vector<const Document*> order;
    for (const auto& d : docs) order.push_back(&d);
    std::stable_sort(order.begin(), order.end(), [](const Document* x, const Document* y) { return x->id < y->id; });

    AgreementReport report;
    std::map<TargetType, double> weighted_sum;
    std::set<std::pair<std::string, std::string>> pairs;
    for (const Document* doc : order) {
        const auto ids = annotators_of(*doc);
        if (ids.size() != 2)
            throw InputError("document '" + doc->id + "' has " + std::to_string(ids.size()) +
                             " annotator ids, expected 2");
        pairs.emplace(ids[0], ids[1]);
        for (auto t : kAllTargetTypes) {
            DocumentAgreement d;
            d.document_id = doc->id;
            d.type = t;
            d.annotator_a = ids[0];
            d.annotator_b = ids[1];
            for (const auto& a : doc->annotations) {
                if (a.type != t || !a.annotator_id) continue;
                if (*a.annotator_id == ids[0]) d.annotations_a.push_back(a);
                else if (*a.annotator_id == ids[1]) d.annotations_b.push_back(a);
            }
            d.annotation_count = d.annotations_a.size() + d.annotations_b.size();
            if (d.annotation_count == 0) continue;
            d.match = match_annotations(d.annotations_a, d.annotations_b, mode);
            double sum = 0.0;
            for (const auto& p : d.match.pairs) sum += p.iou;
            const std::size_t units = d.match.pairs.size() + d.match.unmatched_a.size() + d.match.unmatched_b.size();
            d.mean_iou = sum / static_cast<double>(units);
            weighted_sum[t] += d.mean_iou * static_cast<double>(d.annotation_count);
            report.per_type_count[t] += d.annotation_count;
            report.documents.push_back(std::move(d));
        }
    }
    for (const auto& [t, s] : weighted_sum)
        report.per_type[t] = s / static_cast<double>(report.per_type_count[t]);
    report.annotator_pairs.assign(pairs.begin(), pairs.end());
    return report;
}

PrfScore prf_from_counts(const PrfCounts& c) {
    PrfScore s;
    s.support = c.gold;
    if (c.pred == 0 && c.gold == 0) {
        s.precision = s.recall = s.f1 = 1.0;
        return s;
    }
    s.precision = c.pred == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.pred);
    s.recall = c.gold == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.gold);
    s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    return s;
}

PrfCounts count_matches(std::span<const Annotation> pred, std::span<const Annotation> gold, MatchMode mode) {
    PrfCounts c;
    c.pred = pred.size();
    c.gold = gold.size();
    if (mode.kind == MatchMode::Kind::exact) {
        using Key = std::pair<TargetType, std::vector<Interval>>;
        auto key = [](const Annotation& a) {
            auto f = a.fragments;
            std::sort(f.begin(), f.end());
            return Key{a.type, std::move(f)};
        };
        std::map<Key, std::size_t> remaining;
        for (const auto& g : gold) ++remaining[key(g)];
        for (const auto& p : pred) {
            auto it = remaining.find(key(p));
            if (it != remaining.end() && it->second > 0) {
                --it->second;
                ++c.tp;
            }
        }
        return c;
    }
    for (auto t : kAllTargetTypes) {
        const auto p = of_type(pred, t);
        const auto g = of_type(gold, t);
        if (p.empty() || g.empty()) continue;
        c.tp += match_annotations(p, g, IouMode::charset, mode.theta).pairs.size();
    }
    return c;
}

PrfScore prf(std::span<const Annotation> pred, std::span<const Annotation> gold, MatchMode mode) {
    return prf_from_counts(count_matches(pred, gold, mode));
}

double weighted_average(std::span<const std::pair<double, double>> values) {
    double num = 0.0, den = 0.0;
    for (const auto& [v, w] : values) {
        if (w < 0.0) throw InputError("weights must be non-negative");
        num += v * w;
        den += w;
    }
    if (den == 0.0) throw InputError("weighted average needs a positive total weight");
    return num / den;
}

double macro_average(std::span<const double> values) {
    if (values.empty()) throw InputError("macro average of an empty list");
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

EvaluationReport evaluate_corpus(std::span<const Document> predicted, std::span<const Document> gold,
                                 MatchMode mode) {
    std::map<std::string, const Document*> pred_by_id;
    for (const auto& d : predicted) pred_by_id.emplace(d.id, &d);
    std::vector<const Document*> gold_order;
    for (const auto& d : gold) gold_order.push_back(&d);
    std::stable_sort(gold_order.begin(), gold_order.end(),
                     [](const Document* x, const Document* y) { return x->id < y->id; });

    static const std::string kDefaultSet = "gold";
    std::map<TargetType, std::map<std::string, PrfCounts>> counts;
    for (const Document* g : gold_order) {
        std::set<std::string> sets;
        for (const auto& id : annotators_of(*g)) sets.insert(id);
        for (const auto& a : g->annotations)
            if (!a.annotator_id || a.annotator_id->empty()) sets.insert(kDefaultSet);
        if (sets.empty()) sets.insert(kDefaultSet);

        const auto pit = pred_by_id.find(g->id);
        static const std::vector<Annotation> kNone;
        const auto& pred_all = pit == pred_by_id.end() ? kNone : pit->second->annotations;
        for (const auto& s : sets) {
            for (auto t : kAllTargetTypes) {
                std::vector<Annotation> gold_t;
                for (const auto& a : g->annotations) {
                    const auto& who = a.annotator_id && !a.annotator_id->empty() ? *a.annotator_id : kDefaultSet;
                    if (a.type == t && who == s) gold_t.push_back(a);
                }
                counts[t][s] += count_matches(of_type(pred_all, t), gold_t, mode);
            }
        }
    }

    EvaluationReport report;
    std::vector<double> macro;
    for (auto t : kAllTargetTypes) {
        TypeReport row;
        row.type = t;
        PrfCounts pooled;
        std::vector<std::pair<double, double>> weighted;
        for (const auto& [s, c] : counts[t]) {
            TestSetScore ts{s, c, prf_from_counts(c)};
            pooled += c;
            if (c.gold > 0) weighted.emplace_back(ts.score.f1, static_cast<double>(c.gold));
            row.test_sets.push_back(std::move(ts));
        }
        row.pooled = prf_from_counts(pooled);
        row.weighted_f1 = weighted.empty() ? row.pooled.f1 : weighted_average(weighted);
        if (row.pooled.support > 0) macro.push_back(row.weighted_f1);
        report.rows.push_back(std::move(row));
    }
    report.macro_f1 = macro.empty() ? 0.0 : macro_average(macro);
    return report;
}

std::string format_report(const EvaluationReport& report) {
    std::string out = "type\tprecision\trecall\tf1\tsupport\tweighted_f1\n";
    for (const auto& r : report.rows) {
        out += std::string(to_string(r.type)) + '\t' + fmt(r.pooled.precision) + '\t' + fmt(r.pooled.recall) + '\t' +
               fmt(r.pooled.f1) + '\t' + std::to_string(r.pooled.support) + '\t' + fmt(r.weighted_f1) + '\n';
    }
    out += "macro_f1\t" + fmt(report.macro_f1) + '\n';
    return out;
}

std::string format_agreement(const AgreementReport& report) {
    std::string out = "type\tmean_iou\tannotations\n";
    for (const auto& [t, v] : report.per_type)
        out += std::string(to_string(t)) + '\t' + fmt(v) + '\t' + std::to_string(report.per_type_count.at(t)) + '\n';
    return out;
}

Json to_json(const AgreementReport& report) {
    Json j;
    Json per_type = Json::object();
    for (const auto& [t, v] : report.per_type)
        per_type[std::string(to_string(t))] = Json{{"mean_iou", v}, {"annotations", report.per_type_count.at(t)}};
    j["per_type"] = std::move(per_type);
    Json pairs = Json::array();
    for (const auto& [a, b] : report.annotator_pairs) pairs.push_back(Json::array({a, b}));
    j["annotator_pairs"] = std::move(pairs);
    Json docs = Json::array();
    for (const auto& d : report.documents) {
        Json jd;
        jd["document_id"] = d.document_id;
        jd["type"] = to_string(d.type);
        jd["annotator_a"] = d.annotator_a;
        jd["annotator_b"] = d.annotator_b;
        jd["mean_iou"] = d.mean_iou;
        Json matched = Json::array();
        for (const auto& p : d.match.pairs)
            matched.push_back(Json{{"a", fragments_json(d.annotations_a[p.a].fragments)},
                                   {"b", fragments_json(d.annotations_b[p.b].fragments)},
                                   {"iou", p.iou}});
        jd["pairs"] = std::move(matched);
        Json ua = Json::array(), ub = Json::array();
        for (auto i : d.match.unmatched_a) ua.push_back(fragments_json(d.annotations_a[i].fragments));
        for (auto i : d.match.unmatched_b) ub.push_back(fragments_json(d.annotations_b[i].fragments));
        jd["unmatched_a"] = std::move(ua);
        jd["unmatched_b"] = std::move(ub);
        docs.push_back(std::move(jd));
    }
    j["documents"] = std::move(docs);
    return j;
}

}  // namespace elig

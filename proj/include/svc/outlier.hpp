#pragma once

#include <set>

#include "svc/csv.hpp"
#include "svc/estimation.hpp"

namespace svc {

// Exact side-channel for heavy rows: everything whose measure exceeds the
// threshold, capped at the largest `cap` records. Hash sampling treats every
// key alike, so a handful of huge rows dominates estimator variance; carrying
// them exactly removes their contribution from the sampled remainder.
struct OutlierIndex {
    std::string attr;
    double threshold = 0.0;
    size_t cap = 0;
    Relation rows;
};

inline OutlierIndex build_outlier_index(const Relation& r, const std::string& attr,
                                        double threshold, size_t cap) {
    int ai = r.schema.index_of(attr);
    if (ai < 0) throw Error("unknown attribute " + attr);
    if (cap == 0) throw Error("outlier index needs a positive capacity");
    OutlierIndex idx;
    idx.attr = attr;
    idx.threshold = threshold;
    idx.cap = cap;
    idx.rows.schema = r.schema;

    auto ki = r.schema.key_indices();
    // minimum of (value, key) is evicted first, so retention is deterministic
    std::set<std::pair<double, std::string>> held;
    std::unordered_map<std::string, Record> by_key;
    for (auto& rec : r.records) {
        if (rec[ai].is_null()) continue;
        double v = rec[ai].numeric();
        if (v <= threshold) continue;
        std::string k = key_string(rec, ki);
        held.emplace(v, k);
        by_key.emplace(k, rec);
        if (held.size() > cap) {
            auto least = held.begin();
            by_key.erase(least->second);
            held.erase(least);
        }
    }
    for (auto& vk : held) idx.rows.records.push_back(by_key.at(vk.second));
    return idx;
}

// the value of the k-th largest record; indexing strictly above it captures
// the k-1 records beyond, plus threshold ties get left to the sample
inline double threshold_topk(const Relation& r, const std::string& attr, size_t k) {
    int ai = r.schema.index_of(attr);
    if (ai < 0) throw Error("unknown attribute " + attr);
    if (k == 0) throw Error("top-k threshold needs k >= 1");
    std::vector<double> vals;
    for (auto& rec : r.records)
        if (!rec[ai].is_null()) vals.push_back(rec[ai].numeric());
    if (vals.size() < k) return -HUGE_VAL;
    std::sort(vals.begin(), vals.end(), std::greater<>());
    return vals[k - 1];
}

inline double threshold_sigma(const Relation& r, const std::string& attr, double c) {
    int ai = r.schema.index_of(attr);
    if (ai < 0) throw Error("unknown attribute " + attr);
    std::vector<double> vals;
    for (auto& rec : r.records)
        if (!rec[ai].is_null()) vals.push_back(rec[ai].numeric());
    if (vals.empty()) return 0.0;
    return detail::mean_of(vals) + c * detail::sample_sd(vals);
}

// ---- lifting a base index to the view ----------------------------------------

namespace detail {

struct PushUpShape {
    bool found = false;
    bool eligible = true;
    bool grouped = false;
};

inline PushUpShape push_up_shape(const ExprPtr& e, const std::string& base_name) {
    PushUpShape s;
    switch (e->kind) {
        case ExprKind::Base:
            s.found = e->base_name == base_name;
            return s;
        case ExprKind::Select:
        case ExprKind::Project:
        case ExprKind::HashFilter:
            return push_up_shape(e->children[0], base_name);
        case ExprKind::Aggregate: {
            s = push_up_shape(e->children[0], base_name);
            if (s.found) s.grouped = true;
            return s;
        }
        case ExprKind::Join: {
            auto l = push_up_shape(e->children[0], base_name);
            auto r = push_up_shape(e->children[1], base_name);
            s.found = l.found || r.found;
            s.eligible = l.eligible && r.eligible && !(l.found && r.found);
            s.grouped = l.grouped || r.grouped;
            return s;
        }
        case ExprKind::Union:
        case ExprKind::Intersect: {
            auto l = push_up_shape(e->children[0], base_name);
            auto r = push_up_shape(e->children[1], base_name);
            s.found = l.found || r.found;
            s.grouped = l.grouped || r.grouped;
            // both branches must restrict together; a one-sided index leaves the
            // other branch contributing its full relation
            s.eligible = l.eligible && r.eligible && l.found == r.found;
            return s;
        }
        case ExprKind::Difference: {
            auto l = push_up_shape(e->children[0], base_name);
            auto r = push_up_shape(e->children[1], base_name);
            s.found = l.found || r.found;
            s.grouped = l.grouped;
            // subtracting the full right side keeps lifted rows exact, but an
            // index under the right side would subtract too little
            s.eligible = l.eligible && !r.found;
            return s;
        }
    }
    return s;
}

}  // namespace detail

struct ViewOutliers {
    Relation rows;        // exact view rows attributable to indexed base rows
    bool grouped = false; // true when whole groups were recomputed
};

// Lifts the base-table index through the view definition: selections and
// projections carry the indexed rows through, a join pairs them against the
// full other side, and an aggregate recomputes every group an indexed row
// participates in (taken from the materialized view).
inline ViewOutliers push_up(const OutlierIndex& idx, const ExprPtr& view_def,
                            const std::string& base_name, const Database& db,
                            const Relation& view) {
    auto shape = detail::push_up_shape(view_def, base_name);
    if (!shape.found) throw Error("view does not read " + base_name);
    if (!shape.eligible)
        throw Error("outlier index on " + base_name + " cannot be lifted through this view");
    Database scoped = db;
    scoped.put(base_name, idx.rows);
    Relation partial = evaluate(view_def, scoped);
    ViewOutliers out;
    out.grouped = shape.grouped;
    if (!shape.grouped) {
        out.rows = std::move(partial);
        return out;
    }
    auto ki = view.schema.key_indices();
    std::unordered_set<std::string> affected;
    for (auto& rec : partial.records) affected.insert(key_string(rec, ki));
    out.rows.schema = view.schema;
    for (auto& rec : view.records)
        if (affected.count(key_string(rec, ki))) out.rows.records.push_back(rec);
    return out;
}

// ---- combining the sampled remainder with the exact outlier part --------------

// The sample estimates the non-outlier population (flagged rows are excluded
// from the transform), the indexed rows contribute exactly, and only the
// sampled part carries uncertainty.
inline Estimate merged_estimate(const SampleView& marked, const Relation& outliers,
                                const QuerySpec& qs) {
    if (qs.agg == QAgg::Sum || qs.agg == QAgg::Count) {
        Estimate e = aqp_estimate(marked, qs);
        double exact = exact_query(outliers, qs);
        e.method = "aqp+outlier";
        e.value += exact;
        e.lo += exact;
        e.hi += exact;
        e.note = "indexed rows answered exactly";
        return e;
    }
    if (qs.agg == QAgg::Avg) {
        Estimate reg = aqp_estimate(marked, qs);
        QuerySpec cnt = qs;
        cnt.agg = QAgg::Count;
        double n_reg = aqp_estimate(marked, cnt).value;
        double l = exact_query(outliers, cnt);
        Estimate e = reg;
        e.method = "aqp+outlier";
        if (l == 0.0) return e;
        double n = n_reg + l;
        double w = n > 0.0 ? n_reg / n : 0.0;
        double out_mean = exact_query(outliers, qs);
        e.value = w * reg.value + (1.0 - w) * out_mean;
        double half = (reg.hi - reg.lo) / 2.0 * w;
        e.lo = e.value - half;
        e.hi = e.value + half;
        e.variance = reg.variance * w * w;
        e.note = "indexed rows answered exactly";
        return e;
    }
    if (qs.agg == QAgg::Min || qs.agg == QAgg::Max) {
        Estimate e = minmax_estimate(marked, qs);
        e.method = "aqp+outlier";
        if (!outliers.records.empty()) {
            QuerySpec probe = qs;
            try {
                double exact = exact_query(outliers, probe);
                e.value = qs.agg == QAgg::Max ? std::max(e.value, exact)
                                              : std::min(e.value, exact);
                e.lo = e.hi = e.value;
            } catch (const DataError&) {
                // no indexed row matches the predicate; the sample stands alone
            }
        }
        return e;
    }
    Estimate e = aqp_estimate(marked, qs);
    e.method = "aqp+outlier";
    e.note = "quantile estimates ignore the outlier index";
    return e;
}

// ---- persistence ---------------------------------------------------------------

inline void save_outlier_index(const OutlierIndex& idx, const std::string& stem) {
    std::ofstream out(stem + ".meta");
    if (!out) throw Error("cannot write " + stem + ".meta");
    out << "attr=" << idx.attr << "\n";
    out << "threshold=" << encode_field(Value(idx.threshold)) << "\n";
    out << "cap=" << idx.cap << "\n";
    save_relation(idx.rows, stem);
}

inline OutlierIndex load_outlier_index(const std::string& stem) {
    std::ifstream in(stem + ".meta");
    if (!in) throw Error("cannot read " + stem + ".meta");
    OutlierIndex idx;
    std::string line;
    while (std::getline(in, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string k = line.substr(0, eq), v = line.substr(eq + 1);
        if (k == "attr") idx.attr = v;
        else if (k == "threshold") idx.threshold = std::stod(v);
        else if (k == "cap") idx.cap = static_cast<size_t>(std::stoull(v));
        else throw Error("unknown field " + k + " in " + stem + ".meta");
    }
    if (idx.attr.empty()) throw Error("outlier index metadata lacks attr");
    idx.rows = load_relation(stem);
    return idx;
}

}  // namespace svc

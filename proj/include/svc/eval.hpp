#pragma once

#include <map>
#include <optional>

#include "svc/hash.hpp"

namespace svc {

struct Database {
    std::unordered_map<std::string, Relation> rels;

    const Relation& get(const std::string& name) const {
        auto it = rels.find(name);
        if (it == rels.end()) throw Error("unknown relation: " + name);
        return it->second;
    }
    void put(std::string name, Relation r) { rels[std::move(name)] = std::move(r); }
    bool has(const std::string& name) const { return rels.count(name) != 0; }
};

// Work proxy: every leaf counts the records it emits into the plan and every
// operator counts the records it outputs. A hash filter sitting directly on a
// leaf is fused with the scan, so only passing records count; that is the
// whole point of pushing the sampling below the expensive operators.
struct WorkCounter {
    uint64_t rows_touched = 0;
    std::unordered_map<std::string, uint64_t> per_leaf;

    void leaf(const std::string& name, uint64_t n) {
        rows_touched += n;
        per_leaf[name] += n;
    }
    void node(uint64_t n) { rows_touched += n; }
};

namespace detail {

inline bool cmp_values(CmpOp op, const Value& a, const Value& b) {
    if (a.is_null() || b.is_null()) return false;
    if (a.type() != b.type()) throw Error("cross-type comparison in join condition");
    switch (op) {
        case CmpOp::Eq: return a == b;
        case CmpOp::Ne: return !(a == b);
        case CmpOp::Lt: return a.ordered_before(b);
        case CmpOp::Le: return !b.ordered_before(a);
        case CmpOp::Gt: return b.ordered_before(a);
        case CmpOp::Ge: return !a.ordered_before(b);
    }
    return false;
}

inline std::string values_key(const std::vector<Value>& vs) {
    std::string out;
    for (size_t i = 0; i < vs.size(); ++i) {
        if (i) out += '\x1f';
        out += encode_field(vs[i]);
    }
    return out;
}

struct AggAcc {
    int64_t cnt = 0;        // count semantics (records or non-null)
    int64_t isum = 0;       // Int64 sum
    double fsum = 0.0;      // Float64 sum / avg numerator
    int64_t avg_cnt = 0;    // avg denominator (non-null)
    std::optional<Value> mm;  // min/max carrier
};

}  // namespace detail

inline Relation evaluate(const ExprPtr& e, const Database& db, WorkCounter* wc = nullptr);

namespace detail {

inline Relation eval_join(const Expr& e, const Database& db, WorkCounter* wc) {
    Schema ls = derive_schema(e.children[0]);
    Schema rs = derive_schema(e.children[1]);
    Schema out_schema = derive_schema(std::make_shared<Expr>(e));

    Relation L = evaluate(e.children[0], db, wc);
    Relation R = evaluate(e.children[1], db, wc);

    auto merged = merged_right_columns(e);
    std::vector<size_t> right_keep;  // right attr positions that survive the merge
    for (size_t i = 0; i < rs.attrs.size(); ++i)
        if (!contains(merged, rs.attrs[i].name)) right_keep.push_back(i);

    // positions of merged columns on each side, for padding
    std::vector<std::pair<size_t, size_t>> merged_pos;  // (left idx, right idx)
    for (auto& m : merged)
        merged_pos.emplace_back(static_cast<size_t>(ls.index_of(m)),
                                static_cast<size_t>(rs.index_of(m)));

    std::vector<JoinConjunct> eqs, rest;
    for (auto& c : e.condition)
        (c.op == CmpOp::Eq ? eqs : rest).push_back(c);

    auto emit = [&](const Record* lr, const Record* rr, Relation& out) {
        Record rec;
        rec.reserve(out_schema.attrs.size());
        if (lr) {
            rec = *lr;
        } else {
            rec.assign(ls.attrs.size(), Value::null());
            for (auto& [li, ri] : merged_pos) rec[li] = (*rr)[ri];
        }
        if (rr) {
            for (size_t i : right_keep) rec.push_back((*rr)[i]);
        } else {
            for (size_t i = 0; i < right_keep.size(); ++i) rec.push_back(Value::null());
        }
        out.records.push_back(std::move(rec));
    };

    Relation out;
    out.schema = out_schema;
    std::vector<char> right_matched(R.records.size(), 0);
    bool want_left = e.join_kind == JoinKind::Left || e.join_kind == JoinKind::Full;
    bool want_right = e.join_kind == JoinKind::Right || e.join_kind == JoinKind::Full;

    auto matches_rest = [&](const Record& lr, const Record& rr) {
        for (auto& c : rest) {
            const Value& a = lr[static_cast<size_t>(ls.index_of(c.left))];
            const Value& b = rr[static_cast<size_t>(rs.index_of(c.right))];
            if (!cmp_values(c.op, a, b)) return false;
        }
        return true;
    };

    if (!eqs.empty()) {
        std::vector<size_t> lei, rei;
        for (auto& c : eqs) {
            lei.push_back(static_cast<size_t>(ls.index_of(c.left)));
            rei.push_back(static_cast<size_t>(rs.index_of(c.right)));
        }
        std::unordered_map<std::string, std::vector<size_t>> ridx;
        for (size_t i = 0; i < R.records.size(); ++i) {
            std::vector<Value> vs;
            bool any_null = false;
            for (size_t j : rei) {
                vs.push_back(R.records[i][j]);
                if (vs.back().is_null()) any_null = true;
            }
            if (!any_null) ridx[values_key(vs)].push_back(i);
        }
        for (auto& lr : L.records) {
            std::vector<Value> vs;
            bool any_null = false;
            for (size_t j : lei) {
                vs.push_back(lr[j]);
                if (vs.back().is_null()) any_null = true;
            }
            bool hit = false;
            if (!any_null) {
                auto it = ridx.find(values_key(vs));
                if (it != ridx.end()) {
                    for (size_t ri : it->second) {
                        if (!matches_rest(lr, R.records[ri])) continue;
                        emit(&lr, &R.records[ri], out);
                        right_matched[ri] = 1;
                        hit = true;
                    }
                }
            }
            if (!hit && want_left) emit(&lr, nullptr, out);
        }
    } else {
        for (auto& lr : L.records) {
            bool hit = false;
            for (size_t ri = 0; ri < R.records.size(); ++ri) {
                bool ok = true;
                for (auto& c : e.condition) {
                    const Value& a = lr[static_cast<size_t>(ls.index_of(c.left))];
                    const Value& b = R.records[ri][static_cast<size_t>(rs.index_of(c.right))];
                    if (!cmp_values(c.op, a, b)) {
                        ok = false;
                        break;
                    }
                }
                if (!ok) continue;
                emit(&lr, &R.records[ri], out);
                right_matched[ri] = 1;
                hit = true;
            }
            if (!hit && want_left) emit(&lr, nullptr, out);
        }
    }
    if (want_right)
        for (size_t ri = 0; ri < R.records.size(); ++ri)
            if (!right_matched[ri]) emit(nullptr, &R.records[ri], out);

    if (wc) wc->node(out.records.size());
    return out;
}

inline Relation eval_aggregate(const Expr& e, const Database& db, WorkCounter* wc) {
    Schema child_s = derive_schema(e.children[0]);
    Schema out_schema = derive_schema(std::make_shared<Expr>(e));
    Relation in = evaluate(e.children[0], db, wc);

    std::vector<size_t> gidx;
    for (auto& g : e.group_attrs) gidx.push_back(static_cast<size_t>(child_s.index_of(g)));
    std::vector<int> aidx;
    std::vector<ValueType> atype;
    for (auto& a : e.aggs) {
        aidx.push_back(a.attr.empty() ? -1 : child_s.index_of(a.attr));
        atype.push_back(a.attr.empty() ? ValueType::Int64 : child_s.attr(a.attr).type);
    }

    // first-seen group order keeps evaluation deterministic
    std::unordered_map<std::string, size_t> group_of;
    std::vector<std::vector<Value>> group_vals;
    std::vector<std::vector<detail::AggAcc>> accs;

    for (auto& rec : in.records) {
        std::vector<Value> gv;
        gv.reserve(gidx.size());
        for (size_t j : gidx) gv.push_back(rec[j]);
        std::string gk = values_key(gv);
        auto [it, fresh] = group_of.emplace(gk, group_vals.size());
        if (fresh) {
            group_vals.push_back(gv);
            accs.emplace_back(e.aggs.size());
        }
        auto& acc = accs[it->second];
        for (size_t i = 0; i < e.aggs.size(); ++i) {
            const AggSpec& a = e.aggs[i];
            const Value* v = aidx[i] >= 0 ? &rec[static_cast<size_t>(aidx[i])] : nullptr;
            switch (a.fn) {
                case AggFn::Count:
                    if (!v || !v->is_null()) acc[i].cnt++;
                    break;
                case AggFn::Sum:
                    if (v && !v->is_null()) {
                        if (atype[i] == ValueType::Int64) acc[i].isum += v->as_int();
                        else acc[i].fsum += v->as_float();
                        acc[i].cnt++;
                    }
                    break;
                case AggFn::Avg:
                    if (v && !v->is_null()) {
                        acc[i].fsum += v->numeric();
                        acc[i].avg_cnt++;
                    }
                    break;
                case AggFn::Min:
                case AggFn::Max:
                    if (v && !v->is_null()) {
                        if (!acc[i].mm) acc[i].mm = *v;
                        else {
                            bool lt = v->ordered_before(*acc[i].mm);
                            if ((a.fn == AggFn::Min && lt) || (a.fn == AggFn::Max && !lt && !(*v == *acc[i].mm)))
                                acc[i].mm = *v;
                        }
                    }
                    break;
            }
        }
    }

    if (e.group_attrs.empty() && group_vals.empty()) {
        // an ungrouped aggregate always yields exactly one record
        group_vals.emplace_back();
        accs.emplace_back(e.aggs.size());
    }

    Relation out;
    out.schema = out_schema;
    for (size_t g = 0; g < group_vals.size(); ++g) {
        Record rec = group_vals[g];
        for (size_t i = 0; i < e.aggs.size(); ++i) {
            const AggSpec& a = e.aggs[i];
            const auto& acc = accs[g][i];
            switch (a.fn) {
                case AggFn::Count: rec.push_back(Value(acc.cnt)); break;
                case AggFn::Sum:
                    if (acc.cnt == 0) rec.push_back(Value::null());
                    else if (atype[i] == ValueType::Int64) rec.push_back(Value(acc.isum));
                    else rec.push_back(Value(acc.fsum));
                    break;
                case AggFn::Avg:
                    if (acc.avg_cnt == 0) throw Error("avg over empty group");
                    rec.push_back(Value(acc.fsum / static_cast<double>(acc.avg_cnt)));
                    break;
                case AggFn::Min:
                case AggFn::Max:
                    rec.push_back(acc.mm ? *acc.mm : Value::null());
                    break;
            }
        }
        out.records.push_back(std::move(rec));
    }
    if (wc) wc->node(out.records.size());
    return out;
}

}  // namespace detail

inline Relation evaluate(const ExprPtr& e, const Database& db, WorkCounter* wc) {
    switch (e->kind) {
        case ExprKind::Base: {
            Schema s = derive_schema(e);
            const Relation& r = db.get(e->base_name);
            if (r.schema.attrs != s.attrs)
                throw Error("relation " + e->base_name + " does not match its declared schema");
            if (wc) wc->leaf(e->base_name, r.records.size());
            Relation out = r;
            out.schema.key = s.key;
            return out;
        }
        case ExprKind::Select: {
            Schema s = derive_schema(e);
            Relation in = evaluate(e->children[0], db, wc);
            Relation out;
            out.schema = s;
            for (auto& rec : in.records)
                if (eval_pred(e->predicate, s, rec)) out.records.push_back(rec);
            if (wc) wc->node(out.records.size());
            return out;
        }
        case ExprKind::Project: {
            Schema child_s = derive_schema(e->children[0]);
            Schema s = derive_schema(e);
            Relation in = evaluate(e->children[0], db, wc);
            Relation out;
            out.schema = s;
            out.records.reserve(in.records.size());
            for (auto& rec : in.records) {
                Record nr;
                nr.reserve(e->outputs.size());
                for (auto& o : e->outputs) nr.push_back(eval_scalar(o.expr, child_s, rec));
                out.records.push_back(std::move(nr));
            }
            if (wc) wc->node(out.records.size());
            return out;
        }
        case ExprKind::Join: return detail::eval_join(*e, db, wc);
        case ExprKind::Aggregate: return detail::eval_aggregate(*e, db, wc);
        case ExprKind::Union: {
            Schema s = derive_schema(e);
            Relation L = evaluate(e->children[0], db, wc);
            Relation R = evaluate(e->children[1], db, wc);
            auto ki = s.key_indices();
            Relation out;
            out.schema = s;
            std::unordered_map<std::string, size_t> seen;
            for (auto& rec : L.records) {
                seen.emplace(key_string(rec, ki), out.records.size());
                out.records.push_back(rec);
            }
            for (auto& rec : R.records) {
                auto it = seen.find(key_string(rec, ki));
                if (it == seen.end()) {
                    out.records.push_back(rec);
                } else if (!(out.records[it->second] == rec)) {
                    throw Error("union merges conflicting records for one key");
                }
            }
            if (wc) wc->node(out.records.size());
            return out;
        }
        case ExprKind::Intersect: {
            Schema s = derive_schema(e);
            Relation L = evaluate(e->children[0], db, wc);
            Relation R = evaluate(e->children[1], db, wc);
            auto ki = s.key_indices();
            std::unordered_set<std::string> right;
            for (auto& rec : R.records) right.insert(key_string(rec, ki));
            Relation out;
            out.schema = s;
            for (auto& rec : L.records)
                if (right.count(key_string(rec, ki))) out.records.push_back(rec);
            if (wc) wc->node(out.records.size());
            return out;
        }
        case ExprKind::Difference: {
            Schema s = derive_schema(e);
            Relation L = evaluate(e->children[0], db, wc);
            Relation R = evaluate(e->children[1], db, wc);
            auto ki = s.key_indices();  // left child's key
            std::unordered_set<std::string> right;
            for (auto& rec : R.records) right.insert(key_string(rec, ki));
            Relation out;
            out.schema = s;
            for (auto& rec : L.records)
                if (!right.count(key_string(rec, ki))) out.records.push_back(rec);
            if (wc) wc->node(out.records.size());
            return out;
        }
        case ExprKind::HashFilter: {
            Schema s = derive_schema(e);
            const bool fused = e->children[0]->kind == ExprKind::Base;
            Relation in;
            if (fused) {
                // sampling fused into the scan: untouched records are free
                Schema cs = derive_schema(e->children[0]);
                const Relation& r = db.get(e->children[0]->base_name);
                if (r.schema.attrs != cs.attrs)
                    throw Error("relation " + e->children[0]->base_name +
                                " does not match its declared schema");
                in = r;
                in.schema.key = cs.key;
            } else {
                in = evaluate(e->children[0], db, wc);
            }
            Relation out;
            out.schema = s;
            for (auto& rec : in.records) {
                std::string hk = hash_key_of(rec, s, e->hash.attrs);
                if (hash_admits(hk, e->hash.ratio, e->hash.salt)) out.records.push_back(rec);
            }
            if (wc) {
                if (fused) wc->leaf(e->children[0]->base_name, out.records.size());
                else wc->node(out.records.size());
            }
            return out;
        }
    }
    throw Error("bad expression node");
}

}  // namespace svc

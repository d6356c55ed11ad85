#pragma once

#include <functional>

#include "svc/pushdown.hpp"

namespace svc {

// Pending updates per base relation, split into insertions and deletions
// (an update is a deletion plus an insertion of the same key).
struct DeltaSet {
    std::unordered_map<std::string, std::pair<Relation, Relation>> by_base;

    void set(const std::string& base, Relation ins, Relation del) {
        by_base[base] = {std::move(ins), std::move(del)};
    }

    Relation ins_or_empty(const std::string& base, const Schema& schema) const {
        auto it = by_base.find(base);
        if (it != by_base.end()) return it->second.first;
        Relation r;
        r.schema = schema;
        return r;
    }
    Relation del_or_empty(const std::string& base, const Schema& schema) const {
        auto it = by_base.find(base);
        if (it != by_base.end()) return it->second.second;
        Relation r;
        r.schema = schema;
        return r;
    }
    bool has_insertions(const std::string& base) const {
        auto it = by_base.find(base);
        return it != by_base.end() && !it->second.first.empty();
    }
    bool has_deletions(const std::string& base) const {
        auto it = by_base.find(base);
        return it != by_base.end() && !it->second.second.empty();
    }
};

struct ForeignKey {
    std::string fact;
    std::vector<std::string> fact_attrs;  // in dim-key order
    std::string dim;
};
struct OneToOne {
    std::string left, right;
};
struct MonotoneAttr {
    std::string rel, attr;  // append-ordered: new records carry larger values
};
struct ConstraintSet {
    std::vector<ForeignKey> fks;
    std::vector<OneToOne> one_to_one;
    std::vector<MonotoneAttr> monotone;
};

inline std::string delta_ins_name(const std::string& base) { return base + "$ins"; }
inline std::string delta_del_name(const std::string& base) { return base + "$del"; }

inline void validate_deltas(const Database& db, const DeltaSet& ds) {
    for (auto& [base, pair] : ds.by_base) {
        const Relation& rel = db.get(base);
        auto& [ins, del] = pair;
        if (ins.schema.attrs != rel.schema.attrs || del.schema.attrs != rel.schema.attrs)
            throw DataError("delta schema does not match base " + base);
        auto live = rel.key_index();
        for (auto& rec : del.records)
            if (!live.count(rel.key_of(rec)))
                throw DataError("deletion references a missing key in " + base);
        std::unordered_set<std::string> gone;
        for (auto& rec : del.records) gone.insert(rel.key_of(rec));
        for (auto& rec : ins.records) {
            std::string k = rel.key_of(rec);
            if (live.count(k) && !gone.count(k))
                throw DataError("insertion collides with a live key in " + base);
        }
    }
}

// post-delta state of every base relation touched by the delta set
inline Database apply_deltas(const Database& db, const DeltaSet& ds) {
    Database out = db;
    for (auto& [base, pair] : ds.by_base) {
        const Relation& rel = db.get(base);
        auto& [ins, del] = pair;
        std::unordered_set<std::string> gone;
        for (auto& rec : del.records) gone.insert(rel.key_of(rec));
        Relation nr;
        nr.schema = rel.schema;
        for (auto& rec : rel.records)
            if (!gone.count(rel.key_of(rec))) nr.records.push_back(rec);
        for (auto& rec : ins.records) nr.records.push_back(rec);
        nr.check_keys();
        out.put(base, std::move(nr));
    }
    return out;
}

inline void validate_constraints(const Database& db, const ConstraintSet& cs) {
    for (auto& fk : cs.fks) {
        const Relation& dim = db.get(fk.dim);
        const Relation& fact = db.get(fk.fact);
        auto dk = dim.schema.key_indices();
        std::unordered_set<std::string> dim_keys;
        for (auto& rec : dim.records) dim_keys.insert(key_string(rec, dk));
        std::vector<size_t> fi;
        for (auto& a : fk.fact_attrs) {
            int i = fact.schema.index_of(a);
            if (i < 0) throw DataError("foreign-key attribute " + a + " missing from " + fk.fact);
            fi.push_back(static_cast<size_t>(i));
        }
        for (auto& rec : fact.records)
            if (!dim_keys.count(key_string(rec, fi)))
                throw DataError("dangling foreign key from " + fk.fact + " into " + fk.dim);
    }
}

// ---- expression surgery -----------------------------------------------------

inline ExprPtr subst_base(const ExprPtr& e, const std::string& name, const ExprPtr& repl) {
    if (e->kind == ExprKind::Base) return e->base_name == name ? repl : e;
    auto copy = std::make_shared<Expr>(*e);
    bool changed = false;
    for (auto& c : copy->children) {
        ExprPtr nc = subst_base(c, name, repl);
        if (nc != c) changed = true;
        c = nc;
    }
    return changed ? ExprPtr(copy) : e;
}

// rebuilds the unary select/project chain above `stop` around `repl`
inline ExprPtr rebuild_above(const ExprPtr& node, const ExprPtr& stop, const ExprPtr& repl) {
    if (node == stop) return repl;
    if (node->children.size() != 1) throw Error("rebuild_above expects a unary chain");
    auto copy = std::make_shared<Expr>(*node);
    copy->children[0] = rebuild_above(node->children[0], stop, repl);
    return copy;
}

// R - deleted + inserted, as an expression over the base and its delta leaves
inline ExprPtr post_state(const std::string& name, const Schema& schema) {
    return union_(difference(base(name, schema), base(delta_del_name(name), schema)),
                  base(delta_ins_name(name), schema));
}

// Delta-join expansion for insertion-only deltas. Unconstrained, the new join
// rows are (R1 x dR2) u (dR1 x R2) u (dR1 x dR2); constraints prune terms that
// are provably empty: a foreign-key (many-to-one) join drops the fact-side
// term joined against new dim rows, a one-to-one join keeps only the new-new
// term, and a theta-join on monotone time attributes drops the side that
// would pair old rows with strictly later ones.
inline ExprPtr expand_delta_join(const ExprPtr& join_node, const ExprPtr& delta_left,
                                 const ExprPtr& delta_right, const ConstraintSet& cs) {
    if (join_node->kind != ExprKind::Join) throw Error("expand_delta_join expects a join");
    const ExprPtr& r1 = join_node->children[0];
    const ExprPtr& r2 = join_node->children[1];
    std::vector<std::string> n1, n2;
    collect_base_names(r1, n1);
    collect_base_names(r2, n2);
    auto named = [](const std::vector<std::string>& v, const std::string& s) {
        return v.size() == 1 && v[0] == s;
    };

    bool keep_old_new = true;   // R1 x dR2
    bool keep_new_old = true;   // dR1 x R2
    for (auto& oo : cs.one_to_one)
        if (named(n1, oo.left) && named(n2, oo.right)) keep_old_new = keep_new_old = false;
    for (auto& fk : cs.fks) {
        if (named(n1, fk.fact) && named(n2, fk.dim)) keep_old_new = false;
        if (named(n2, fk.fact) && named(n1, fk.dim)) keep_new_old = false;
    }
    auto is_monotone = [&](const std::vector<std::string>& names, const std::string& attr) {
        for (auto& m : cs.monotone)
            if (named(names, m.rel) && m.attr == attr) return true;
        return false;
    };
    for (auto& c : join_node->condition) {
        if (c.op == CmpOp::Eq || c.op == CmpOp::Ne) continue;
        if (!is_monotone(n1, c.left) || !is_monotone(n2, c.right)) continue;
        if (c.op == CmpOp::Gt || c.op == CmpOp::Ge) keep_old_new = false;
        else keep_new_old = false;
    }

    auto mk = [&](const ExprPtr& l, const ExprPtr& r) {
        return join(join_node->join_kind, join_node->condition, l, r);
    };
    ExprPtr out = mk(delta_left, delta_right);
    if (keep_new_old) out = union_(mk(delta_left, r2), out);
    if (keep_old_new) out = union_(mk(r1, delta_right), out);
    return out;
}

// ---- view augmentation ------------------------------------------------------

// A defined view: the materialized (augmented) definition plus the attributes
// visible to queries. Aggregate views carrying avg store a hidden sum/count
// pair per avg column and a row count for group liveness; the avg column is
// recomputed from the pair on every merge.
struct ViewDef {
    std::string name;
    ExprPtr def;
    std::vector<std::string> declared;
};

inline ViewDef augment_view(std::string name, const ExprPtr& raw) {
    ViewDef v;
    v.name = std::move(name);
    if (raw->kind != ExprKind::Aggregate) {
        derive_schema(raw);
        v.def = raw;
        for (auto& a : derive_schema(raw).attrs) v.declared.push_back(a.name);
        return v;
    }
    std::vector<AggSpec> inner_aggs;
    bool has_count1 = false, has_avg = false;
    for (auto& a : raw->aggs) {
        if (a.fn == AggFn::Avg) {
            has_avg = true;
            inner_aggs.push_back({AggFn::Sum, a.attr, a.out + "$sum"});
            inner_aggs.push_back({AggFn::Count, a.attr, a.out + "$cnt"});
        } else {
            if (a.fn == AggFn::Count && a.attr.empty()) has_count1 = true;
            inner_aggs.push_back(a);
        }
    }
    if (!has_count1) inner_aggs.push_back({AggFn::Count, "", "_rowcnt"});
    ExprPtr g = aggregate(raw->group_attrs, inner_aggs, raw->children[0]);
    if (!has_avg) {
        derive_schema(g);
        v.def = g;
    } else {
        std::vector<NamedScalar> outs;
        for (auto& ga : raw->group_attrs) outs.push_back({ga, col(ga)});
        for (auto& a : raw->aggs) {
            if (a.fn == AggFn::Avg)
                outs.push_back({a.out, div_(col(a.out + "$sum"), col(a.out + "$cnt"))});
            else
                outs.push_back({a.out, col(a.out)});
        }
        for (auto& a : raw->aggs)
            if (a.fn == AggFn::Avg) {
                outs.push_back({a.out + "$sum", col(a.out + "$sum")});
                outs.push_back({a.out + "$cnt", col(a.out + "$cnt")});
            }
        if (!has_count1) outs.push_back({"_rowcnt", col("_rowcnt")});
        v.def = project(outs, g);
        derive_schema(v.def);
    }
    for (auto& ga : raw->group_attrs) v.declared.push_back(ga);
    for (auto& a : raw->aggs) v.declared.push_back(a.out);
    return v;
}

// ---- maintenance strategies -------------------------------------------------

enum class StrategyKind { SelectProject, FkJoin, AggregateView, Recompute };

inline const char* strategy_name(StrategyKind k) {
    switch (k) {
        case StrategyKind::SelectProject: return "select-project";
        case StrategyKind::FkJoin: return "fk-join";
        case StrategyKind::AggregateView: return "aggregate";
        case StrategyKind::Recompute: return "recompute";
    }
    return "?";
}

struct MaintenanceStrategy {
    StrategyKind kind = StrategyKind::Recompute;
    ExprPtr expr;       // incremental expression over StaleView, bases, deltas
    ExprPtr recompute;  // view definition over post-delta base state
    Schema view_schema;
    std::string fact;   // the leaf whose deltas the incremental path handles fully
    std::vector<std::string> bases;
    std::vector<std::string> notes;
};

namespace detail {

// walks a unary select/project chain; returns the node below it
inline ExprPtr chain_bottom(const ExprPtr& e) {
    ExprPtr cur = e;
    while (cur->kind == ExprKind::Select || cur->kind == ExprKind::Project)
        cur = cur->children[0];
    return cur;
}

// the dim side of an inner join is the one whose whole key is equated
inline int dim_side(const Expr& j, const Schema& ls, const Schema& rs) {
    if (j.join_kind != JoinKind::Inner) return -1;
    auto covered = [&](const Schema& s, bool right) {
        if (s.key.empty()) return false;
        for (auto& k : s.key) {
            bool hit = false;
            for (auto& c : j.condition)
                if (c.op == CmpOp::Eq && (right ? c.right : c.left) == k) hit = true;
            if (!hit) return false;
        }
        return true;
    };
    if (covered(rs, true)) return 1;
    if (covered(ls, false)) return 0;
    return -1;
}

inline Value zero_of(ValueType t) {
    if (t == ValueType::Int64) return Value(int64_t{0});
    if (t == ValueType::Float64) return Value(0.0);
    throw Error("no additive zero for this type");
}

}  // namespace detail

inline MaintenanceStrategy build_change_table_strategy(const ViewDef& view) {
    MaintenanceStrategy st;
    st.view_schema = derive_schema(view.def);
    collect_base_names(view.def, st.bases);

    // the recomputation fallback rebinds every base leaf to its post-delta state
    st.recompute = view.def;
    for (auto& b : st.bases) {
        std::function<const Schema*(const ExprPtr&)> find = [&](const ExprPtr& e) -> const Schema* {
            if (e->kind == ExprKind::Base) return e->base_name == b ? &e->base_schema : nullptr;
            for (auto& c : e->children)
                if (auto* s = find(c)) return s;
            return nullptr;
        };
        const Schema* s = find(view.def);
        if (s) st.recompute = subst_base(st.recompute, b, post_state(b, *s));
    }

    ExprPtr sv = stale_view(st.view_schema);

    // classify: [select/project]* over base | inner join | aggregate
    ExprPtr bottom = detail::chain_bottom(view.def);

    if (bottom->kind == ExprKind::Base) {
        // select-project: S u image(insertions) minus key-matches of deletions
        const std::string& b = bottom->base_name;
        const Schema& bs = bottom->base_schema;
        ExprPtr ins_img = subst_base(view.def, b, base(delta_ins_name(b), bs));
        ExprPtr del_img = subst_base(view.def, b, base(delta_del_name(b), bs));
        st.kind = StrategyKind::SelectProject;
        st.fact = b;
        st.expr = union_(difference(sv, del_img), ins_img);
        return st;
    }

    if (bottom->kind == ExprKind::Join && bottom->join_kind == JoinKind::Inner) {
        const ExprPtr& lsub = bottom->children[0];
        const ExprPtr& rsub = bottom->children[1];
        ExprPtr lleaf = detail::chain_bottom(lsub);
        ExprPtr rleaf = detail::chain_bottom(rsub);
        if (lleaf->kind == ExprKind::Base && rleaf->kind == ExprKind::Base) {
            const std::string& lb = lleaf->base_name;
            const std::string& rb = rleaf->base_name;
            const Schema& lbs = lleaf->base_schema;
            const Schema& rbs = rleaf->base_schema;
            auto with = [&](const ExprPtr& l, const ExprPtr& r) {
                ExprPtr j = join(bottom->join_kind, bottom->condition,
                                 subst_base(lsub, lb, l), subst_base(rsub, rb, r));
                return rebuild_above(view.def, bottom, j);
            };
            ExprPtr l_old = base(lb, lbs), r_old = base(rb, rbs);
            ExprPtr l_ins = base(delta_ins_name(lb), lbs), r_ins = base(delta_ins_name(rb), rbs);
            ExprPtr l_del = base(delta_del_name(lb), lbs), r_del = base(delta_del_name(rb), rbs);
            ExprPtr l_new = post_state(lb, lbs), r_new = post_state(rb, rbs);

            ExprPtr del_img = union_(with(l_old, r_del), with(l_del, r_old));
            ExprPtr ins_img = union_(with(l_new, r_ins), with(l_ins, r_new));
            st.kind = StrategyKind::FkJoin;
            // both leaves' deltas are handled; attribute the fact role to the
            // side that is not a key-covered lookup
            int dim = detail::dim_side(*bottom, derive_schema(lsub), derive_schema(rsub));
            st.fact = dim == 0 ? rb : lb;
            st.expr = union_(difference(sv, del_img), ins_img);
            return st;
        }
    }

    // aggregate view, possibly under the avg-deriving projection
    ExprPtr g = view.def->kind == ExprKind::Project ? view.def->children[0] : view.def;
    if (g->kind == ExprKind::Aggregate) {
        bool maintainable = true;
        for (auto& a : g->aggs)
            if (a.fn == AggFn::Min || a.fn == AggFn::Max || a.fn == AggFn::Avg) maintainable = false;
        ExprPtr inner = g->children[0];
        ExprPtr ibottom = detail::chain_bottom(inner);

        std::string fact;
        ExprPtr fact_leaf;
        std::vector<std::pair<std::string, Schema>> dims;
        if (ibottom->kind == ExprKind::Base) {
            fact = ibottom->base_name;
            fact_leaf = ibottom;
        } else if (ibottom->kind == ExprKind::Join && ibottom->join_kind == JoinKind::Inner) {
            ExprPtr lleaf = detail::chain_bottom(ibottom->children[0]);
            ExprPtr rleaf = detail::chain_bottom(ibottom->children[1]);
            if (lleaf->kind == ExprKind::Base && rleaf->kind == ExprKind::Base) {
                Schema ls = derive_schema(ibottom->children[0]);
                Schema rs = derive_schema(ibottom->children[1]);
                int dim = detail::dim_side(*ibottom, ls, rs);
                if (dim == 1) {
                    fact = lleaf->base_name;
                    fact_leaf = lleaf;
                    dims.emplace_back(rleaf->base_name, rleaf->base_schema);
                } else if (dim == 0) {
                    fact = rleaf->base_name;
                    fact_leaf = rleaf;
                    dims.emplace_back(lleaf->base_name, lleaf->base_schema);
                }
            }
        }

        if (maintainable && !fact.empty()) {
            Schema gsch = derive_schema(g);
            const auto& G = g->group_attrs;

            // the count(1) column that decides group liveness
            std::string cnt_col;
            for (auto& a : g->aggs)
                if (a.fn == AggFn::Count && a.attr.empty() && cnt_col.empty()) cnt_col = a.out;
            if (cnt_col.empty()) {
                st.kind = StrategyKind::Recompute;
                st.expr = st.recompute;
                st.notes.push_back("aggregate view lacks a row count; recomputation fallback");
                return st;
            }

            auto delta_inner = [&](bool insert) {
                std::string dn = insert ? delta_ins_name(fact) : delta_del_name(fact);
                ExprPtr out = subst_base(inner, fact, base(dn, fact_leaf->base_schema));
                if (insert)
                    for (auto& [d, dsch] : dims) out = subst_base(out, d, post_state(d, dsch));
                return out;
            };
            auto renamed = [&](const char* suffix) {
                std::vector<AggSpec> out;
                for (auto& a : g->aggs) out.push_back({a.fn, a.attr, a.out + suffix});
                return out;
            };
            ExprPtr ct_ins = aggregate(G, renamed("$i"), delta_inner(true));
            ExprPtr ct_del = aggregate(G, renamed("$d"), delta_inner(false));

            std::vector<JoinConjunct> on_g;
            for (auto& ga : G) on_g.push_back({ga, CmpOp::Eq, ga});

            std::vector<NamedScalar> net_outs;
            for (auto& ga : G) net_outs.push_back({ga, col(ga)});
            for (auto& a : g->aggs) {
                Value z = detail::zero_of(gsch.attr(a.out).type);
                net_outs.push_back({a.out + "$n", sub(coalesce(col(a.out + "$i"), lit(z)),
                                                      coalesce(col(a.out + "$d"), lit(z)))});
            }
            ExprPtr net = project(net_outs, join(JoinKind::Full, on_g, ct_ins, ct_del));

            std::vector<NamedScalar> merge_outs;
            for (auto& ga : G) merge_outs.push_back({ga, col(ga)});
            for (auto& a : g->aggs) {
                Value z = detail::zero_of(gsch.attr(a.out).type);
                merge_outs.push_back({a.out, add(coalesce(col(a.out), lit(z)),
                                                 coalesce(col(a.out + "$n"), lit(z)))});
            }
            ExprPtr merged = project(merge_outs, join(JoinKind::Full, on_g, sv, net));
            ExprPtr live = select(gt(col(cnt_col), lit(Value(int64_t{0}))), merged);
            st.expr = view.def->kind == ExprKind::Project ? project(view.def->outputs, live) : live;
            st.kind = StrategyKind::AggregateView;
            st.fact = fact;
            derive_schema(st.expr);
            return st;
        }
        st.notes.push_back(maintainable ? "unsupported aggregate input shape; recomputation fallback"
                                        : "min/max aggregates are not incrementally maintainable; "
                                          "recomputation fallback");
    } else {
        st.notes.push_back("unsupported view shape; recomputation fallback");
    }
    st.kind = StrategyKind::Recompute;
    st.expr = st.recompute;
    return st;
}

// ---- executors ----------------------------------------------------------------

namespace detail {

inline bool incremental_applicable(const MaintenanceStrategy& st, const DeltaSet& ds) {
    switch (st.kind) {
        case StrategyKind::Recompute: return false;
        case StrategyKind::SelectProject:
        case StrategyKind::FkJoin: return true;
        case StrategyKind::AggregateView:
            for (auto& b : st.bases)
                if (b != st.fact && ds.has_deletions(b)) return false;
            return true;
    }
    return false;
}

inline Database bind_maintenance(const Database& db, const DeltaSet& ds,
                                 const MaintenanceStrategy& st, const Relation& stale) {
    Database out = db;
    for (auto& b : st.bases) {
        const Schema& bs = db.get(b).schema;
        out.put(delta_ins_name(b), ds.ins_or_empty(b, bs));
        out.put(delta_del_name(b), ds.del_or_empty(b, bs));
    }
    Relation sv = stale;
    sv.schema = st.view_schema;
    out.put(kStaleViewName, std::move(sv));
    return out;
}

}  // namespace detail

struct MaintainResult {
    Relation view;
    uint64_t rows_touched = 0;
    bool used_recompute = false;
};

inline MaintainResult full_maintain(const Relation& stale, const Database& db, const DeltaSet& ds,
                                    const MaintenanceStrategy& st) {
    validate_deltas(db, ds);
    bool inc = detail::incremental_applicable(st, ds);
    Database mdb = detail::bind_maintenance(db, ds, st, stale);
    WorkCounter wc;
    Relation out = evaluate(inc ? st.expr : st.recompute, mdb, &wc);
    return {std::move(out), wc.rows_touched, !inc};
}

struct CleanResult {
    SampleView sample;
    uint64_t rows_touched = 0;
    bool used_recompute = false;
    PushdownReport report;
};

// Cleans a stale sample into a sample of the up-to-date view: the cleaning
// expression is the maintenance strategy with the sample standing in for the
// stale view, topped with the view-key hash filter and pushed down so delta
// and base scans are sampled at the source.
inline CleanResult clean_sample(const SampleView& dirty, const Database& db, const DeltaSet& ds,
                                const MaintenanceStrategy& st) {
    if (dirty.rel.schema.attrs != st.view_schema.attrs)
        throw Error("sample schema does not match the view");
    validate_deltas(db, ds);
    bool inc = detail::incremental_applicable(st, ds);
    HashSpec hs{st.view_schema.key, dirty.ratio, dirty.salt};
    PushdownReport rep = push_down(hash_filter(hs, inc ? st.expr : st.recompute));
    Database mdb = detail::bind_maintenance(db, ds, st, dirty.rel);
    WorkCounter wc;
    Relation out = evaluate(rep.rewritten, mdb, &wc);
    return {SampleView{std::move(out), dirty.ratio, dirty.salt, {}}, wc.rows_touched, !inc,
            std::move(rep)};
}

// ---- the correspondence property ---------------------------------------------

struct CorrespondenceReport {
    bool uniform = false;             // every sampled key hashes at or below m
    bool superfluous_removed = false; // keys gone from S' are gone from the clean sample
    bool inclusion_ok = false;        // new rows sampled at rate m (binomial envelope)
    bool values_preserved = false;    // surviving keys carry S' values
    size_t missing_rows = 0;
    double expected_inclusions = 0.0;
    size_t observed_inclusions = 0;

    bool ok() const { return uniform && superfluous_removed && inclusion_ok && values_preserved; }
};

inline CorrespondenceReport check_correspondence(const SampleView& dirty, const SampleView& clean,
                                                 const Relation& stale, const Relation& fresh) {
    if (dirty.ratio != clean.ratio || dirty.salt != clean.salt)
        throw Error("samples do not share a sampling identity");
    CorrespondenceReport rep;
    auto ki = fresh.schema.key_indices();

    auto keys_of = [&](const Relation& r) {
        std::unordered_set<std::string> out;
        for (auto& rec : r.records) out.insert(key_string(rec, ki));
        return out;
    };
    auto stale_keys = keys_of(stale);
    auto fresh_idx = fresh.key_index();

    rep.uniform = true;
    auto check_uniform = [&](const SampleView& s) {
        for (size_t i = 0; i < s.rel.records.size(); ++i) {
            if (s.is_outlier(i)) continue;
            if (!hash_admits(key_string(s.rel.records[i], ki), s.ratio, s.salt))
                rep.uniform = false;
        }
    };
    check_uniform(dirty);
    check_uniform(clean);

    std::unordered_map<std::string, size_t> clean_idx;
    for (size_t i = 0; i < clean.rel.records.size(); ++i)
        clean_idx.emplace(key_string(clean.rel.records[i], ki), i);

    rep.superfluous_removed = true;
    rep.values_preserved = true;
    for (auto& rec : dirty.rel.records) {
        std::string k = key_string(rec, ki);
        auto fit = fresh_idx.find(k);
        if (fit == fresh_idx.end()) {
            if (clean_idx.count(k)) rep.superfluous_removed = false;
        } else {
            auto cit = clean_idx.find(k);
            if (cit == clean_idx.end() ||
                !(clean.rel.records[cit->second] == fresh.records[fit->second]))
                rep.values_preserved = false;
        }
    }

    // rows born between S and S' must enter the clean sample at rate m
    size_t missing = 0, included = 0;
    for (auto& rec : fresh.records) {
        std::string k = key_string(rec, ki);
        if (stale_keys.count(k)) continue;
        ++missing;
        if (clean_idx.count(k)) ++included;
    }
    rep.missing_rows = missing;
    rep.observed_inclusions = included;
    rep.expected_inclusions = clean.ratio * static_cast<double>(missing);
    double sd = std::sqrt(static_cast<double>(missing) * clean.ratio * (1.0 - clean.ratio));
    double slack = 3.2905 * sd + 0.5;  // 99.9% binomial envelope, continuity-corrected
    rep.inclusion_ok =
        std::abs(static_cast<double>(included) - rep.expected_inclusions) <= slack;
    return rep;
}

}  // namespace svc

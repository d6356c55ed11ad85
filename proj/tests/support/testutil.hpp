#pragma once

// Shared test fixtures: compact relation builders, the seeded expression-tree
// generator the push-down property tests draw from, a recompute oracle for
// maintenance checks, and the couple of statistics the Monte Carlo suites
// keep recomputing.

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "svc/svc.hpp"

namespace tu {

using namespace svc;

// scratch directory removed on scope exit
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("svc_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline Schema make_schema(std::vector<Attr> attrs, std::vector<std::string> key) {
    Schema s;
    s.attrs = std::move(attrs);
    s.key = std::move(key);
    s.validate();
    return s;
}

inline Relation make_rel(Schema s, std::vector<Record> recs) {
    Relation r;
    r.schema = std::move(s);
    r.records = std::move(recs);
    r.check_types();
    r.check_keys();
    return r;
}

// n rows of (id, v) with sequential keys; values drawn by the caller's lambda
template <typename F>
inline Relation id_value_rel(size_t n, F&& value_of, const char* vname = "v",
                             ValueType vtype = ValueType::Float64) {
    Relation r;
    r.schema = make_schema({{"id", ValueType::Int64}, {vname, vtype}}, {"id"});
    r.records.reserve(n);
    for (size_t i = 0; i < n; ++i)
        r.records.push_back({Value(static_cast<int64_t>(i)), value_of(i)});
    return r;
}

// ---- statistics -----------------------------------------------------------------

inline double mean_of(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double mu = mean_of(v), s2 = 0;
    for (double x : v) s2 += (x - mu) * (x - mu);
    return std::sqrt(s2 / static_cast<double>(v.size() - 1));
}

inline double median_of(std::vector<double> v) {
    return svc::detail::quantile_nearest_rank(std::move(v), 0.5);
}

inline double pctile_of(std::vector<double> v, double q) {
    return svc::detail::quantile_nearest_rank(std::move(v), q);
}

// ---- random expression trees ------------------------------------------------------

// Leaf pool for the push-down property tests. r0 and r1 share a schema and
// agree wherever their keys overlap, so set operations over them never merge
// conflicting records; fact.did references dim.did.
struct TreePool {
    Database db;
    Schema rsch, dsch, fsch;
};

inline TreePool make_tree_pool(std::mt19937_64& rng, size_t max_rows = 200) {
    TreePool p;
    p.rsch = make_schema({{"id", ValueType::Int64},
                          {"a", ValueType::Int64},
                          {"b", ValueType::Float64},
                          {"tag", ValueType::Text}},
                         {"id"});
    p.dsch = make_schema({{"did", ValueType::Int64}, {"x", ValueType::Int64}}, {"did"});
    p.fsch = make_schema({{"fid", ValueType::Int64},
                          {"did", ValueType::Int64},
                          {"v", ValueType::Int64}},
                         {"fid"});

    auto unif = [&](int64_t lo, int64_t hi) {
        return std::uniform_int_distribution<int64_t>(lo, hi)(rng);
    };
    static const char* tags[] = {"red", "green", "blue"};

    size_t n0 = static_cast<size_t>(unif(20, static_cast<int64_t>(max_rows)));
    Relation r0;
    r0.schema = p.rsch;
    for (size_t i = 0; i < n0; ++i)
        r0.records.push_back({Value(static_cast<int64_t>(i)), Value(unif(0, 9)),
                              Value(static_cast<double>(unif(0, 1000)) / 100.0),
                              Value(tags[unif(0, 2)])});

    Relation r1;
    r1.schema = p.rsch;
    for (auto& rec : r0.records)
        if (unif(0, 1)) r1.records.push_back(rec);
    size_t extra = static_cast<size_t>(unif(5, 40));
    for (size_t i = 0; i < extra && r1.records.size() < max_rows; ++i)
        r1.records.push_back({Value(static_cast<int64_t>(n0 + i)), Value(unif(0, 9)),
                              Value(static_cast<double>(unif(0, 1000)) / 100.0),
                              Value(tags[unif(0, 2)])});

    size_t nd = static_cast<size_t>(unif(5, 30));
    Relation dim;
    dim.schema = p.dsch;
    for (size_t i = 0; i < nd; ++i)
        dim.records.push_back({Value(static_cast<int64_t>(i)), Value(unif(0, 9))});

    size_t nf = static_cast<size_t>(unif(20, static_cast<int64_t>(max_rows)));
    Relation fact;
    fact.schema = p.fsch;
    for (size_t i = 0; i < nf; ++i)
        fact.records.push_back({Value(static_cast<int64_t>(i)),
                                Value(unif(0, static_cast<int64_t>(nd) - 1)), Value(unif(0, 99))});

    p.db.put("r0", std::move(r0));
    p.db.put("r1", std::move(r1));
    p.db.put("dim", std::move(dim));
    p.db.put("fact", std::move(fact));
    return p;
}

// per-operator usage counts, so the property test can assert full coverage
struct TreeStats {
    size_t select = 0, project = 0, aggregate = 0;
    size_t union_ = 0, intersect = 0, difference = 0;
    size_t fk_join = 0, eq_join = 0;
};

namespace detail {

inline ScalarPtr rand_pred(std::mt19937_64& rng, const Schema& s) {
    std::vector<std::string> nums;
    for (auto& a : s.attrs)
        if (a.type == ValueType::Int64 && !svc::detail::contains(s.key, a.name))
            nums.push_back(a.name);
    if (nums.empty())
        for (auto& a : s.attrs)
            if (a.type == ValueType::Int64) nums.push_back(a.name);
    auto unif = [&](int64_t lo, int64_t hi) {
        return std::uniform_int_distribution<int64_t>(lo, hi)(rng);
    };
    if (nums.empty()) return lit(Value(int64_t{1}));  // degenerate schema: keep all rows
    ScalarPtr c = col(nums[static_cast<size_t>(unif(0, static_cast<int64_t>(nums.size()) - 1))]);
    ScalarPtr l = lit(Value(unif(0, 9)));
    switch (unif(0, 4)) {
        case 0: return lt(c, l);
        case 1: return le(c, l);
        case 2: return gt(c, l);
        case 3: return ge(c, l);
        default: return ne(c, l);
    }
}

// select / set-op trees that preserve the r-schema, for set-operation children
inline ExprPtr family_tree(std::mt19937_64& rng, const TreePool& p, int depth, TreeStats& st) {
    auto unif = [&](int64_t lo, int64_t hi) {
        return std::uniform_int_distribution<int64_t>(lo, hi)(rng);
    };
    if (depth <= 0) return base(unif(0, 1) ? "r0" : "r1", p.rsch);
    switch (unif(0, 3)) {
        case 0:
            ++st.select;
            return select(rand_pred(rng, p.rsch), family_tree(rng, p, depth - 1, st));
        case 1:
            ++st.union_;
            return union_(family_tree(rng, p, depth - 1, st), family_tree(rng, p, depth - 1, st));
        case 2:
            ++st.intersect;
            return intersect(family_tree(rng, p, depth - 1, st),
                             family_tree(rng, p, depth - 1, st));
        default:
            ++st.difference;
            return difference(family_tree(rng, p, depth - 1, st),
                              family_tree(rng, p, depth - 1, st));
    }
}

}  // namespace detail

// Draws a keyed tree of depth at most `depth` over the pool. Every node kind
// appears across a modest corpus: selects, key-retaining projections, grouped
// aggregates, the three set operations, a foreign-key join (fact x dim), and
// an attribute-equality join (natural, on the shared key column).
inline ExprPtr random_tree(std::mt19937_64& rng, const TreePool& p, int depth, TreeStats& st) {
    auto unif = [&](int64_t lo, int64_t hi) {
        return std::uniform_int_distribution<int64_t>(lo, hi)(rng);
    };
    if (depth <= 0) {
        switch (unif(0, 2)) {
            case 0: return base("r0", p.rsch);
            case 1: return base("r1", p.rsch);
            default: return base("fact", p.fsch);
        }
    }
    switch (unif(0, 6)) {
        case 0: {
            ++st.select;
            ExprPtr c = random_tree(rng, p, depth - 1, st);
            return select(detail::rand_pred(rng, derive_schema(c)), c);
        }
        case 1: {
            // keep the key columns as identities, drop or keep the rest
            ++st.project;
            ExprPtr c = random_tree(rng, p, depth - 1, st);
            Schema cs = derive_schema(c);
            std::vector<NamedScalar> outs;
            for (auto& a : cs.attrs)
                if (svc::detail::contains(cs.key, a.name) || unif(0, 1))
                    outs.push_back({a.name, col(a.name)});
            return project(std::move(outs), c);
        }
        case 2: {
            ++st.aggregate;
            ExprPtr c = random_tree(rng, p, depth - 1, st);
            Schema cs = derive_schema(c);
            std::vector<std::string> grp = cs.key;
            for (auto& a : cs.attrs)  // sometimes widen the grouping
                if (!svc::detail::contains(grp, a.name) && unif(0, 3) == 0) {
                    grp.push_back(a.name);
                    break;
                }
            // nested aggregates can put earlier outputs into the group list,
            // so pick output names that dodge whatever is grouped
            auto fresh_name = [&](std::string n) {
                while (svc::detail::contains(grp, n)) n += "_";
                return n;
            };
            std::vector<AggSpec> aggs{{AggFn::Count, "", fresh_name("cnt")}};
            for (auto& a : cs.attrs)
                if (a.type == ValueType::Int64 && !svc::detail::contains(grp, a.name)) {
                    aggs.push_back({unif(0, 1) ? AggFn::Sum : AggFn::Max, a.name,
                                    fresh_name("agg_" + a.name)});
                    break;
                }
            return aggregate(std::move(grp), std::move(aggs), c);
        }
        case 3: {
            ExprPtr l = detail::family_tree(rng, p, depth - 1, st);
            ExprPtr r = detail::family_tree(rng, p, depth - 1, st);
            switch (unif(0, 2)) {
                case 0: ++st.union_; return union_(l, r);
                case 1: ++st.intersect; return intersect(l, r);
                default: ++st.difference; return difference(l, r);
            }
        }
        case 4: {
            // fact-dim equi-join covering the dimension key
            ++st.fk_join;
            ExprPtr f = base("fact", p.fsch);
            if (unif(0, 1)) {
                ++st.select;
                f = select(detail::rand_pred(rng, p.fsch), f);
            }
            ExprPtr d = base("dim", p.dsch);
            return join(JoinKind::Inner, {{"did", CmpOp::Eq, "did"}}, f, d);
        }
        case 5: {
            // natural join of the two r-tables on their shared key; the right
            // side projects away the common non-key columns first
            ++st.eq_join;
            ExprPtr l = detail::family_tree(rng, p, std::min(depth - 1, 1), st);
            ++st.project;
            ExprPtr r = project({{"id", col("id")}, {"a2", col("a")}},
                                detail::family_tree(rng, p, std::min(depth - 1, 1), st));
            return join(JoinKind::Inner, {{"id", CmpOp::Eq, "id"}}, l, r);
        }
        default: return detail::family_tree(rng, p, depth, st);
    }
}

// ---- maintenance oracle -----------------------------------------------------------

// ground truth for any cleaning path: recompute the view over the post-delta
// database and hash-sample the result
inline Relation recompute_view(const ViewDef& v, const Database& db, const DeltaSet& ds) {
    Database post = apply_deltas(db, ds);
    return evaluate(v.def, post);
}

inline SampleView oracle_clean(const ViewDef& v, const Database& db, const DeltaSet& ds,
                               double ratio, uint64_t salt) {
    return apply_filter(recompute_view(v, db, ds), ratio, salt);
}

}  // namespace tu

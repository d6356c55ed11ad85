#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "svc/scalar.hpp"

namespace svc {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class ExprKind {
    Base,
    Select,
    Project,
    Join,
    Aggregate,
    Union,
    Intersect,
    Difference,
    HashFilter,
};

enum class JoinKind { Inner, Left, Right, Full };

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

// One conjunct of a join condition: left.attr <op> right.attr.
struct JoinConjunct {
    std::string left;
    CmpOp op;
    std::string right;
};

enum class AggFn { Sum, Count, Avg, Min, Max };

struct AggSpec {
    AggFn fn;
    std::string attr;  // empty means count(1)
    std::string out;
};

struct NamedScalar {
    std::string name;
    ScalarPtr expr;
};

struct HashSpec {
    std::vector<std::string> attrs;  // hashed key attributes
    double ratio = 1.0;              // m in [0,1]
    uint64_t salt = 0;
    bool operator==(const HashSpec&) const = default;
};

struct Expr {
    ExprKind kind;
    std::vector<ExprPtr> children;

    // Base: relation name plus declared schema (keys are derived statically,
    // so every leaf carries its schema). The distinguished StaleView leaf is
    // a Base with a reserved name.
    std::string base_name;
    Schema base_schema;

    ScalarPtr predicate;               // Select
    std::vector<NamedScalar> outputs;  // Project

    JoinKind join_kind = JoinKind::Inner;
    std::vector<JoinConjunct> condition;

    std::vector<std::string> group_attrs;
    std::vector<AggSpec> aggs;

    HashSpec hash;            // HashFilter
    bool non_unique = false;  // opt-in non-unique-key hashing
};

inline constexpr const char* kStaleViewName = "__stale_view";

inline ExprPtr base(std::string name, Schema schema) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Base;
    e->base_name = std::move(name);
    e->base_schema = std::move(schema);
    return e;
}

inline ExprPtr stale_view(Schema schema) { return base(kStaleViewName, std::move(schema)); }

inline ExprPtr select(ScalarPtr pred, ExprPtr child) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Select;
    e->predicate = std::move(pred);
    e->children = {std::move(child)};
    return e;
}

inline ExprPtr project(std::vector<NamedScalar> outputs, ExprPtr child) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Project;
    e->outputs = std::move(outputs);
    e->children = {std::move(child)};
    return e;
}

inline ExprPtr join(JoinKind kind, std::vector<JoinConjunct> cond, ExprPtr l, ExprPtr r) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Join;
    e->join_kind = kind;
    e->condition = std::move(cond);
    e->children = {std::move(l), std::move(r)};
    return e;
}

inline ExprPtr aggregate(std::vector<std::string> group_attrs, std::vector<AggSpec> aggs,
                         ExprPtr child) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Aggregate;
    e->group_attrs = std::move(group_attrs);
    e->aggs = std::move(aggs);
    e->children = {std::move(child)};
    return e;
}

inline ExprPtr set_op(ExprKind kind, ExprPtr l, ExprPtr r) {
    auto e = std::make_shared<Expr>();
    e->kind = kind;
    e->children = {std::move(l), std::move(r)};
    return e;
}
inline ExprPtr union_(ExprPtr l, ExprPtr r) { return set_op(ExprKind::Union, l, r); }
inline ExprPtr intersect(ExprPtr l, ExprPtr r) { return set_op(ExprKind::Intersect, l, r); }
inline ExprPtr difference(ExprPtr l, ExprPtr r) { return set_op(ExprKind::Difference, l, r); }

inline ExprPtr hash_filter(HashSpec spec, ExprPtr child, bool non_unique = false) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::HashFilter;
    e->hash = std::move(spec);
    e->non_unique = non_unique;
    e->children = {std::move(child)};
    return e;
}

namespace detail {

inline bool contains(const std::vector<std::string>& v, const std::string& s) {
    for (auto& x : v)
        if (x == s) return true;
    return false;
}

// Columns of the right child dropped because an equality conjunct merges them
// with an identically named left column (natural-join style).
inline std::vector<std::string> merged_right_columns(const Expr& j) {
    std::vector<std::string> out;
    for (auto& c : j.condition)
        if (c.op == CmpOp::Eq && c.left == c.right) out.push_back(c.right);
    return out;
}

}  // namespace detail

// Output schema plus derived primary key for every node:
//   Select / HashFilter inherit the child key;
//   Project must retain the child key as identity columns;
//   Join concatenates child keys left-child-first (merged equality columns
//   collapse to one entry); Aggregate keys on its group attributes;
//   Union takes the union of child keys, Intersect the intersection,
//   Difference the left key.
inline Schema derive_schema(const ExprPtr& e);

namespace detail {

inline Schema join_schema(const Expr& e) {
    Schema l = derive_schema(e.children[0]);
    Schema r = derive_schema(e.children[1]);
    auto merged = merged_right_columns(e);

    for (auto& c : e.condition) {
        const Attr& la = l.attr(c.left);
        const Attr& ra = r.attr(c.right);
        if (la.type != ra.type) throw Error("join conjunct compares mixed types");
    }

    Schema out;
    out.attrs = l.attrs;
    for (auto& a : r.attrs) {
        if (contains(merged, a.name)) continue;
        if (l.has(a.name))
            throw Error("join children share attribute " + a.name + " outside an equality merge");
        out.attrs.push_back(a);
    }

    out.key = l.key;
    for (auto& k : r.key) {
        if (contains(out.key, k) && contains(merged, k)) continue;  // collapsed key column
        if (contains(out.key, k)) throw Error("join key collision on " + k);
        out.key.push_back(k);
    }
    return out;
}

}  // namespace detail

inline Schema derive_schema(const ExprPtr& e) {
    switch (e->kind) {
        case ExprKind::Base: {
            if (e->base_schema.key.empty())
                throw Error("base relation " + e->base_name +
                            " has no declared key (add one or a surrogate _rid)");
            e->base_schema.validate();
            return e->base_schema;
        }
        case ExprKind::Select: {
            Schema s = derive_schema(e->children[0]);
            scalar_type(e->predicate, s);
            return s;
        }
        case ExprKind::Project: {
            Schema child = derive_schema(e->children[0]);
            Schema out;
            for (auto& o : e->outputs) {
                if (out.has(o.name)) throw Error("duplicate projection output " + o.name);
                out.attrs.push_back({o.name, scalar_type(o.expr, child)});
            }
            // the derived key must be retained as identity columns
            for (auto& k : child.key) {
                bool kept = false;
                for (auto& o : e->outputs)
                    if (o.name == k && is_identity_ref(o.expr, k)) kept = true;
                if (!kept)
                    throw Error("projection drops key attribute " + k);
            }
            out.key = child.key;
            return out;
        }
        case ExprKind::Join: return detail::join_schema(*e);
        case ExprKind::Aggregate: {
            Schema child = derive_schema(e->children[0]);
            Schema out;
            for (auto& g : e->group_attrs) out.attrs.push_back(child.attr(g));
            for (auto& a : e->aggs) {
                if (out.has(a.out)) throw Error("duplicate aggregate output " + a.out);
                ValueType t = ValueType::Int64;
                switch (a.fn) {
                    case AggFn::Count: t = ValueType::Int64; break;
                    case AggFn::Avg: t = ValueType::Float64; break;
                    case AggFn::Sum: {
                        ValueType at = child.attr(a.attr).type;
                        if (at != ValueType::Int64 && at != ValueType::Float64)
                            throw Error("sum over non-numeric attribute " + a.attr);
                        t = at;
                        break;
                    }
                    case AggFn::Min:
                    case AggFn::Max: t = child.attr(a.attr).type; break;
                }
                if (a.fn == AggFn::Avg) {
                    ValueType at = child.attr(a.attr).type;
                    if (at != ValueType::Int64 && at != ValueType::Float64)
                        throw Error("avg over non-numeric attribute " + a.attr);
                }
                if (a.fn == AggFn::Count && !a.attr.empty()) child.attr(a.attr);
                out.attrs.push_back({a.out, t});
            }
            out.key = e->group_attrs;
            return out;
        }
        case ExprKind::Union:
        case ExprKind::Intersect:
        case ExprKind::Difference: {
            Schema l = derive_schema(e->children[0]);
            Schema r = derive_schema(e->children[1]);
            if (l.attrs != r.attrs) throw Error("set operation over mismatched schemas");
            Schema out;
            out.attrs = l.attrs;
            if (e->kind == ExprKind::Union) {
                out.key = l.key;
                for (auto& k : r.key)
                    if (!detail::contains(out.key, k)) out.key.push_back(k);
            } else if (e->kind == ExprKind::Intersect) {
                for (auto& k : l.key)
                    if (detail::contains(r.key, k)) out.key.push_back(k);
                if (out.key.empty()) throw Error("intersect children have no common key attribute");
            } else {
                out.key = l.key;
            }
            return out;
        }
        case ExprKind::HashFilter: {
            Schema s = derive_schema(e->children[0]);
            for (auto& a : e->hash.attrs) s.attr(a);
            if (!e->non_unique) {
                // hashed attrs must be exactly the child's derived key
                std::vector<std::string> a = e->hash.attrs, b = s.key;
                std::sort(a.begin(), a.end());
                std::sort(b.begin(), b.end());
                if (a != b)
                    throw Error("hash filter attrs differ from the derived key (flag non_unique)");
            }
            if (e->hash.ratio < 0.0 || e->hash.ratio > 1.0)
                throw Error("sampling ratio outside [0,1]");
            return s;
        }
    }
    throw Error("bad expression node");
}

// Full key-derivation pass over a tree; returns the root schema and checks
// every node. Exposed as the module-level derive_keys operation.
inline Schema derive_keys(const ExprPtr& e) { return derive_schema(e); }

// helpers used by the optimizer and strategy builders
inline bool is_stale_view_leaf(const ExprPtr& e) {
    return e->kind == ExprKind::Base && e->base_name == kStaleViewName;
}

inline void collect_base_names(const ExprPtr& e, std::vector<std::string>& out) {
    if (e->kind == ExprKind::Base) {
        if (!detail::contains(out, e->base_name)) out.push_back(e->base_name);
        return;
    }
    for (auto& c : e->children) collect_base_names(c, out);
}

}  // namespace svc

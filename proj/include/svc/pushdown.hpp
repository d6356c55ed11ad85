#pragma once

#include "svc/sample.hpp"

namespace svc {

struct LeafStatus {
    std::string path;
    std::string name;
    bool fully_pushed = false;
};

struct PushdownReport {
    ExprPtr original;
    ExprPtr rewritten;
    std::vector<std::string> blocked_at;  // operators the filter could not pass
    std::vector<LeafStatus> leaves;
};

namespace detail {

inline std::string kind_name(ExprKind k) {
    switch (k) {
        case ExprKind::Base: return "base";
        case ExprKind::Select: return "select";
        case ExprKind::Project: return "project";
        case ExprKind::Join: return "join";
        case ExprKind::Aggregate: return "aggregate";
        case ExprKind::Union: return "union";
        case ExprKind::Intersect: return "intersect";
        case ExprKind::Difference: return "difference";
        case ExprKind::HashFilter: return "hash-filter";
    }
    return "?";
}

// places a filter above `node`, flagging non-unique hashing when the attrs
// are not exactly the node's derived key
inline ExprPtr place_filter(const HashSpec& spec, const ExprPtr& node) {
    Schema s = derive_schema(node);
    std::vector<std::string> a = spec.attrs, b = s.key;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return hash_filter(spec, node, a != b);
}

inline void enumerate_leaves(const ExprPtr& e, const std::string& path, PushdownReport& rep) {
    if (e->kind == ExprKind::Base) {
        rep.leaves.push_back({path, e->base_name, false});
        return;
    }
    for (size_t i = 0; i < e->children.size(); ++i)
        enumerate_leaves(e->children[i], path + "/" + std::to_string(i), rep);
}

struct Pusher {
    PushdownReport& rep;

    ExprPtr blocked(const HashSpec& spec, const ExprPtr& node, const std::string& path) {
        rep.blocked_at.push_back(kind_name(node->kind) + " at " + (path.empty() ? "/" : path));
        enumerate_leaves(node, path, rep);
        return place_filter(spec, node);
    }

    // Push rules (the hash operator commutes with):
    //   select: always; project: iff the hashed attrs survive as identity
    //   columns; aggregate: iff hashed attrs are group attrs (and the move
    //   makes progress, see below); union/intersect/difference: to both
    //   children; join: only the equality-join and foreign-key special cases.
    ExprPtr push(const HashSpec& spec, const ExprPtr& node, const std::string& path) {
        switch (node->kind) {
            case ExprKind::Base: {
                rep.leaves.push_back({path.empty() ? "/" : path, node->base_name, true});
                return place_filter(spec, node);
            }
            case ExprKind::Select:
                return select(node->predicate, push(spec, node->children[0], path + "/0"));
            case ExprKind::HashFilter:
                return hash_filter(node->hash,
                                   push(spec, node->children[0], path + "/0"),
                                   node->non_unique);
            case ExprKind::Project: {
                for (auto& a : spec.attrs) {
                    bool kept = false;
                    for (auto& o : node->outputs)
                        if (o.name == a && is_identity_ref(o.expr, a)) kept = true;
                    if (!kept) return blocked(spec, node, path);
                }
                return project(node->outputs, push(spec, node->children[0], path + "/0"));
            }
            case ExprKind::Aggregate: {
                for (auto& a : spec.attrs)
                    if (!contains(node->group_attrs, a)) return blocked(spec, node, path);
                // Committing the move must make progress: a filter that would
                // sit right back on top of the child (a nested aggregate
                // whose inner key is consumed) stays above this node instead.
                // Landing on a base leaf is progress — it fuses with the scan.
                PushdownReport scratch;
                scratch.original = rep.original;
                Pusher trial{scratch};
                ExprPtr pushed = trial.push(spec, node->children[0], path + "/0");
                if (pushed->kind == ExprKind::HashFilter &&
                    pushed->children[0] == node->children[0] &&
                    pushed->children[0]->kind != ExprKind::Base)
                    return blocked(spec, node, path);
                for (auto& b : scratch.blocked_at) rep.blocked_at.push_back(b);
                for (auto& l : scratch.leaves) rep.leaves.push_back(l);
                return aggregate(node->group_attrs, node->aggs, pushed);
            }
            case ExprKind::Union:
            case ExprKind::Intersect:
            case ExprKind::Difference:
                return set_op(node->kind, push(spec, node->children[0], path + "/0"),
                              push(spec, node->children[1], path + "/1"));
            case ExprKind::Join: return push_join(spec, node, path);
        }
        throw Error("bad expression node");
    }

    ExprPtr push_join(const HashSpec& spec, const ExprPtr& node, const std::string& path) {
        Schema ls = derive_schema(node->children[0]);
        Schema rs = derive_schema(node->children[1]);
        auto merged = merged_right_columns(*node);

        // equality join on the hashed attrs: re-key each side and push to both
        bool all_eq = true;
        std::vector<std::string> lnames, rnames;
        for (auto& a : spec.attrs) {
            bool found = false;
            for (auto& c : node->condition) {
                if (c.op != CmpOp::Eq) continue;
                if (c.left == a) {
                    lnames.push_back(c.left);
                    rnames.push_back(c.right);
                    found = true;
                    break;
                }
                if (c.right == a && !contains(merged, a)) {
                    lnames.push_back(c.left);
                    rnames.push_back(c.right);
                    found = true;
                    break;
                }
            }
            if (!found) {
                all_eq = false;
                break;
            }
        }
        if (all_eq) {
            HashSpec lspec{lnames, spec.ratio, spec.salt};
            HashSpec rspec{rnames, spec.ratio, spec.salt};
            return join(node->join_kind, node->condition,
                        push(lspec, node->children[0], path + "/0"),
                        push(rspec, node->children[1], path + "/1"));
        }

        if (node->join_kind == JoinKind::Inner) {
            // foreign-key style: the equality conjuncts cover one side's whole
            // key, so each row of the other side meets at most one partner and
            // hashing the fact side alone decides inclusion
            auto covers_key = [&](const Schema& s, bool right_side) {
                if (s.key.empty()) return false;
                for (auto& k : s.key) {
                    bool hit = false;
                    for (auto& c : node->condition)
                        if (c.op == CmpOp::Eq && (right_side ? c.right : c.left) == k) hit = true;
                    if (!hit) return false;
                }
                return true;
            };
            auto side_has = [&](const Schema& s) {
                for (auto& a : spec.attrs)
                    if (!s.has(a)) return false;
                return true;
            };
            if (covers_key(rs, true) && side_has(ls)) {
                return join(node->join_kind, node->condition,
                            push(spec, node->children[0], path + "/0"),
                            keep(node->children[1], path + "/1"));
            }
            if (covers_key(ls, false) && side_has(rs)) {
                return join(node->join_kind, node->condition,
                            keep(node->children[0], path + "/0"),
                            push(spec, node->children[1], path + "/1"));
            }
        }
        return blocked(spec, node, path);
    }

    ExprPtr keep(const ExprPtr& node, const std::string& path) {
        enumerate_leaves(node, path.empty() ? "/" : path, rep);
        return node;
    }
};

}  // namespace detail

// Rewrites a root hash filter toward the leaves. The rewritten expression
// evaluates to exactly the same record set as the original (the filter
// commutes through every rule applied), which the test suite verifies over
// randomized plans.
inline PushdownReport push_down(const ExprPtr& root) {
    if (root->kind != ExprKind::HashFilter)
        throw Error("push_down expects a root hash filter");
    derive_schema(root);  // validates the tree, including the filter keying
    PushdownReport rep;
    rep.original = root;
    detail::Pusher p{rep};
    rep.rewritten = p.push(root->hash, root->children[0], "");
    derive_schema(rep.rewritten);
    return rep;
}

// ---- plan formatting ----------------------------------------------------------

inline std::string format_scalar(const ScalarPtr& s) {
    auto bin = [&](const char* op) {
        return "(" + format_scalar(s->args[0]) + " " + op + " " + format_scalar(s->args[1]) + ")";
    };
    switch (s->op) {
        case ScalarOp::Lit: return s->lit.is_null() ? "null" : encode_field(s->lit);
        case ScalarOp::Attr: return s->attr;
        case ScalarOp::Add: return bin("+");
        case ScalarOp::Sub: return bin("-");
        case ScalarOp::Mul: return bin("*");
        case ScalarOp::Div: return bin("/");
        case ScalarOp::Eq: return bin("=");
        case ScalarOp::Ne: return bin("!=");
        case ScalarOp::Lt: return bin("<");
        case ScalarOp::Le: return bin("<=");
        case ScalarOp::Gt: return bin(">");
        case ScalarOp::Ge: return bin(">=");
        case ScalarOp::And: return bin("and");
        case ScalarOp::Or: return bin("or");
        case ScalarOp::Not: return "not " + format_scalar(s->args[0]);
        case ScalarOp::Coalesce:
            return "coalesce(" + format_scalar(s->args[0]) + ", " + format_scalar(s->args[1]) + ")";
    }
    return "?";
}

namespace detail {

inline const char* cmp_name(CmpOp op) {
    switch (op) {
        case CmpOp::Eq: return "=";
        case CmpOp::Ne: return "!=";
        case CmpOp::Lt: return "<";
        case CmpOp::Le: return "<=";
        case CmpOp::Gt: return ">";
        case CmpOp::Ge: return ">=";
    }
    return "?";
}

inline const char* aggfn_name(AggFn f) {
    switch (f) {
        case AggFn::Sum: return "sum";
        case AggFn::Count: return "count";
        case AggFn::Avg: return "avg";
        case AggFn::Min: return "min";
        case AggFn::Max: return "max";
    }
    return "?";
}

inline void format_expr_rec(const ExprPtr& e, std::string& out, int depth) {
    out.append(static_cast<size_t>(depth) * 2, ' ');
    switch (e->kind) {
        case ExprKind::Base: {
            out += is_stale_view_leaf(e) ? "stale-view" : "base " + e->base_name;
            out += " key=(";
            for (size_t i = 0; i < e->base_schema.key.size(); ++i)
                out += (i ? ", " : "") + e->base_schema.key[i];
            out += ")";
            break;
        }
        case ExprKind::Select: out += "select " + format_scalar(e->predicate); break;
        case ExprKind::Project: {
            out += "project ";
            for (size_t i = 0; i < e->outputs.size(); ++i) {
                if (i) out += ", ";
                const auto& o = e->outputs[i];
                out += is_identity_ref(o.expr, o.name) ? o.name
                                                       : o.name + "=" + format_scalar(o.expr);
            }
            break;
        }
        case ExprKind::Join: {
            switch (e->join_kind) {
                case JoinKind::Inner: out += "join inner on "; break;
                case JoinKind::Left: out += "join left on "; break;
                case JoinKind::Right: out += "join right on "; break;
                case JoinKind::Full: out += "join full on "; break;
            }
            for (size_t i = 0; i < e->condition.size(); ++i) {
                if (i) out += ", ";
                out += e->condition[i].left;
                out += cmp_name(e->condition[i].op);
                out += e->condition[i].right;
            }
            break;
        }
        case ExprKind::Aggregate: {
            out += "aggregate by ";
            for (size_t i = 0; i < e->group_attrs.size(); ++i)
                out += (i ? ", " : "") + e->group_attrs[i];
            out += ": ";
            for (size_t i = 0; i < e->aggs.size(); ++i) {
                if (i) out += ", ";
                const auto& a = e->aggs[i];
                out += std::string(aggfn_name(a.fn)) + "(" + (a.attr.empty() ? "*" : a.attr) +
                       ") as " + a.out;
            }
            break;
        }
        case ExprKind::Union: out += "union"; break;
        case ExprKind::Intersect: out += "intersect"; break;
        case ExprKind::Difference: out += "difference"; break;
        case ExprKind::HashFilter: {
            out += "hash-filter m=" + encode_field(Value(e->hash.ratio)) + " key=(";
            for (size_t i = 0; i < e->hash.attrs.size(); ++i)
                out += (i ? ", " : "") + e->hash.attrs[i];
            out += ") salt=" + std::to_string(e->hash.salt);
            break;
        }
    }
    out += "\n";
    for (auto& c : e->children) format_expr_rec(c, out, depth + 1);
}

}  // namespace detail

inline std::string format_expr(const ExprPtr& e) {
    std::string out;
    detail::format_expr_rec(e, out, 0);
    return out;
}

}  // namespace svc

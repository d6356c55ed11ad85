#pragma once

#include <memory>
#include <string>
#include <vector>

#include "svc/relation.hpp"

namespace svc {

// Structured scalar expressions over a record: attribute refs, literals,
// arithmetic, comparisons, boolean connectives, coalesce. There is no SQL
// text anywhere; trees are built programmatically.
struct Scalar;
using ScalarPtr = std::shared_ptr<const Scalar>;

enum class ScalarOp {
    Lit,
    Attr,
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Not,
    Coalesce,
};

struct Scalar {
    ScalarOp op;
    Value lit;         // Lit
    std::string attr;  // Attr
    std::vector<ScalarPtr> args;
};

inline ScalarPtr lit(Value v) {
    return std::make_shared<Scalar>(Scalar{ScalarOp::Lit, std::move(v), "", {}});
}
inline ScalarPtr col(std::string name) {
    return std::make_shared<Scalar>(Scalar{ScalarOp::Attr, Value(), std::move(name), {}});
}
inline ScalarPtr s_op(ScalarOp op, std::vector<ScalarPtr> args) {
    return std::make_shared<Scalar>(Scalar{op, Value(), "", std::move(args)});
}
inline ScalarPtr add(ScalarPtr a, ScalarPtr b) { return s_op(ScalarOp::Add, {a, b}); }
inline ScalarPtr sub(ScalarPtr a, ScalarPtr b) { return s_op(ScalarOp::Sub, {a, b}); }
inline ScalarPtr mul(ScalarPtr a, ScalarPtr b) { return s_op(ScalarOp::Mul, {a, b}); }
inline ScalarPtr div_(ScalarPtr a, ScalarPtr b) { return s_op(ScalarOp::Div, {a, b}); }
inline ScalarPtr eq(ScalarPtr a, ScalarPtr b) { return s_op(ScalarOp::Eq, {a, b}); }
inline ScalarPtr ne(ScalarPtr a, ScalarPtr b) { return s_op(ScalarOp::Ne, {a, b}); }
inline ScalarPtr lt(ScalarPtr a, ScalarPtr b) { return s_op(ScalarOp::Lt, {a, b}); }
inline ScalarPtr le(ScalarPtr a, ScalarPtr b) { return s_op(ScalarOp::Le, {a, b}); }
inline ScalarPtr gt(ScalarPtr a, ScalarPtr b) { return s_op(ScalarOp::Gt, {a, b}); }
inline ScalarPtr ge(ScalarPtr a, ScalarPtr b) { return s_op(ScalarOp::Ge, {a, b}); }
inline ScalarPtr and_(ScalarPtr a, ScalarPtr b) { return s_op(ScalarOp::And, {a, b}); }
inline ScalarPtr or_(ScalarPtr a, ScalarPtr b) { return s_op(ScalarOp::Or, {a, b}); }
inline ScalarPtr not_(ScalarPtr a) { return s_op(ScalarOp::Not, {a}); }
inline ScalarPtr coalesce(ScalarPtr a, ScalarPtr b) { return s_op(ScalarOp::Coalesce, {a, b}); }

// Boolean results are carried as Int64 0/1; predicates treat Null as false.
namespace detail {

inline ValueType promote_arith(ScalarOp op, ValueType a, ValueType b) {
    if (a == ValueType::Date || b == ValueType::Date) {
        if (op == ScalarOp::Sub && a == ValueType::Date && b == ValueType::Date)
            return ValueType::Int64;  // day difference
        if ((op == ScalarOp::Add || op == ScalarOp::Sub) && a == ValueType::Date &&
            b == ValueType::Int64)
            return ValueType::Date;
        throw Error("unsupported date arithmetic");
    }
    if (a == ValueType::Text || b == ValueType::Text) throw Error("arithmetic on text");
    if (op == ScalarOp::Div) return ValueType::Float64;  // division always Float64
    if (a != b) throw Error("mixed-type arithmetic");
    return a;
}

}  // namespace detail

// Static type of a scalar over a schema. Throws on ill-typed trees, including
// cross-type comparisons; the two numeric types compare with each other by
// value, everything else compares within its own type only.
inline ValueType scalar_type(const ScalarPtr& s, const Schema& schema) {
    switch (s->op) {
        case ScalarOp::Lit: return s->lit.type();
        case ScalarOp::Attr: return schema.attr(s->attr).type;
        case ScalarOp::Add:
        case ScalarOp::Sub:
        case ScalarOp::Mul:
        case ScalarOp::Div: {
            auto a = scalar_type(s->args[0], schema), b = scalar_type(s->args[1], schema);
            if (a == ValueType::Null) a = b;  // null literal adapts
            if (b == ValueType::Null) b = a;
            if (a == ValueType::Null) throw Error("arithmetic on null literals");
            return detail::promote_arith(s->op, a, b);
        }
        case ScalarOp::Eq:
        case ScalarOp::Ne:
        case ScalarOp::Lt:
        case ScalarOp::Le:
        case ScalarOp::Gt:
        case ScalarOp::Ge: {
            auto a = scalar_type(s->args[0], schema), b = scalar_type(s->args[1], schema);
            auto numeric = [](ValueType t) {
                return t == ValueType::Int64 || t == ValueType::Float64;
            };
            if (a != ValueType::Null && b != ValueType::Null && a != b &&
                !(numeric(a) && numeric(b)))
                throw Error("cross-type comparison");
            return ValueType::Int64;
        }
        case ScalarOp::And:
        case ScalarOp::Or:
            scalar_type(s->args[0], schema);
            scalar_type(s->args[1], schema);
            return ValueType::Int64;
        case ScalarOp::Not: scalar_type(s->args[0], schema); return ValueType::Int64;
        case ScalarOp::Coalesce: {
            auto a = scalar_type(s->args[0], schema), b = scalar_type(s->args[1], schema);
            if (a == ValueType::Null) return b;
            if (b == ValueType::Null) return a;
            if (a != b) throw Error("coalesce over mixed types");
            return a;
        }
    }
    throw Error("bad scalar");
}

inline Value eval_scalar(const ScalarPtr& s, const Schema& schema, const Record& rec) {
    switch (s->op) {
        case ScalarOp::Lit: return s->lit;
        case ScalarOp::Attr: {
            int i = schema.index_of(s->attr);
            if (i < 0) throw Error("no attribute named " + s->attr);
            return rec[static_cast<size_t>(i)];
        }
        case ScalarOp::Add:
        case ScalarOp::Sub:
        case ScalarOp::Mul:
        case ScalarOp::Div: {
            Value a = eval_scalar(s->args[0], schema, rec);
            Value b = eval_scalar(s->args[1], schema, rec);
            if (a.is_null() || b.is_null()) return Value::null();
            if (a.type() == ValueType::Date || b.type() == ValueType::Date) {
                if (s->op == ScalarOp::Sub && a.type() == ValueType::Date &&
                    b.type() == ValueType::Date)
                    return Value(a.as_date().days - b.as_date().days);
                if (a.type() == ValueType::Date && b.type() == ValueType::Int64) {
                    if (s->op == ScalarOp::Add) return Value(DateV{a.as_date().days + b.as_int()});
                    if (s->op == ScalarOp::Sub) return Value(DateV{a.as_date().days - b.as_int()});
                }
                throw Error("unsupported date arithmetic");
            }
            if (s->op == ScalarOp::Div) {
                double d = b.numeric();
                if (d == 0.0) throw Error("division by zero");
                return Value(a.numeric() / d);
            }
            if (a.type() == ValueType::Int64 && b.type() == ValueType::Int64) {
                int64_t x = a.as_int(), y = b.as_int();
                switch (s->op) {
                    case ScalarOp::Add: return Value(x + y);
                    case ScalarOp::Sub: return Value(x - y);
                    default: return Value(x * y);
                }
            }
            if (a.type() == ValueType::Float64 && b.type() == ValueType::Float64) {
                double x = a.as_float(), y = b.as_float();
                switch (s->op) {
                    case ScalarOp::Add: return Value(x + y);
                    case ScalarOp::Sub: return Value(x - y);
                    default: return Value(x * y);
                }
            }
            throw Error("mixed-type arithmetic");
        }
        case ScalarOp::Eq:
        case ScalarOp::Ne:
        case ScalarOp::Lt:
        case ScalarOp::Le:
        case ScalarOp::Gt:
        case ScalarOp::Ge: {
            Value a = eval_scalar(s->args[0], schema, rec);
            Value b = eval_scalar(s->args[1], schema, rec);
            // comparisons involving Null are false
            if (a.is_null() || b.is_null()) return Value(int64_t{0});
            if (a.type() != b.type()) {
                auto numeric = [](ValueType t) {
                    return t == ValueType::Int64 || t == ValueType::Float64;
                };
                if (!(numeric(a.type()) && numeric(b.type())))
                    throw Error("cross-type comparison");
                double x = a.numeric(), y = b.numeric();
                bool r;
                switch (s->op) {
                    case ScalarOp::Eq: r = x == y; break;
                    case ScalarOp::Ne: r = x != y; break;
                    case ScalarOp::Lt: r = x < y; break;
                    case ScalarOp::Le: r = x <= y; break;
                    case ScalarOp::Gt: r = x > y; break;
                    default: r = x >= y; break;
                }
                return Value(int64_t{r ? 1 : 0});
            }
            bool res;
            if (s->op == ScalarOp::Eq) res = (a == b);
            else if (s->op == ScalarOp::Ne) res = !(a == b);
            else {
                bool ab = a.ordered_before(b), ba = b.ordered_before(a);
                switch (s->op) {
                    case ScalarOp::Lt: res = ab; break;
                    case ScalarOp::Le: res = !ba; break;
                    case ScalarOp::Gt: res = ba; break;
                    default: res = !ab; break;
                }
            }
            return Value(int64_t{res ? 1 : 0});
        }
        case ScalarOp::And:
        case ScalarOp::Or: {
            Value a = eval_scalar(s->args[0], schema, rec);
            Value b = eval_scalar(s->args[1], schema, rec);
            bool x = !a.is_null() && a.as_int() != 0;
            bool y = !b.is_null() && b.as_int() != 0;
            return Value(int64_t{(s->op == ScalarOp::And ? (x && y) : (x || y)) ? 1 : 0});
        }
        case ScalarOp::Not: {
            Value a = eval_scalar(s->args[0], schema, rec);
            bool x = !a.is_null() && a.as_int() != 0;
            return Value(int64_t{x ? 0 : 1});
        }
        case ScalarOp::Coalesce: {
            Value a = eval_scalar(s->args[0], schema, rec);
            if (!a.is_null()) return a;
            return eval_scalar(s->args[1], schema, rec);
        }
    }
    throw Error("bad scalar");
}

inline bool eval_pred(const ScalarPtr& s, const Schema& schema, const Record& rec) {
    Value v = eval_scalar(s, schema, rec);
    return !v.is_null() && v.type() == ValueType::Int64 && v.as_int() != 0;
}

// true when the scalar is exactly a bare reference to `name`
inline bool is_identity_ref(const ScalarPtr& s, const std::string& name) {
    return s->op == ScalarOp::Attr && s->attr == name;
}

}  // namespace svc

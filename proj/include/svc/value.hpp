#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>

namespace svc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown on malformed input data (CSV, schema sidecars, constraint violations).
struct DataError : Error {
    using Error::Error;
};

enum class ValueType { Int64, Float64, Text, Date, Null };

inline const char* type_name(ValueType t) {
    switch (t) {
        case ValueType::Int64: return "int64";
        case ValueType::Float64: return "float64";
        case ValueType::Text: return "text";
        case ValueType::Date: return "date";
        case ValueType::Null: return "null";
    }
    return "?";
}

inline ValueType type_from_name(const std::string& s) {
    if (s == "int64") return ValueType::Int64;
    if (s == "float64") return ValueType::Float64;
    if (s == "text") return ValueType::Text;
    if (s == "date") return ValueType::Date;
    throw DataError("unknown type name: " + s);
}

// Calendar date stored as days since 1970-01-01 (proleptic Gregorian).
struct DateV {
    int64_t days = 0;
    auto operator<=>(const DateV&) const = default;
};

namespace detail {

// Howard Hinnant's civil-days algorithms.
inline int64_t days_from_civil(int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

inline void civil_from_days(int64_t z, int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

}  // namespace detail

inline DateV parse_date(const std::string& s) {
    // strict YYYY-MM-DD
    if (s.size() != 10 || s[4] != '-' || s[7] != '-')
        throw DataError("bad date literal: " + s);
    auto num = [&](size_t off, size_t len) {
        int64_t v = 0;
        auto [p, ec] = std::from_chars(s.data() + off, s.data() + off + len, v);
        if (ec != std::errc() || p != s.data() + off + len)
            throw DataError("bad date literal: " + s);
        return v;
    };
    int64_t y = num(0, 4), m = num(5, 2), d = num(8, 2);
    if (m < 1 || m > 12 || d < 1 || d > 31) throw DataError("bad date literal: " + s);
    DateV dv{detail::days_from_civil(y, static_cast<unsigned>(m), static_cast<unsigned>(d))};
    // round-trip to reject impossible days like February 30th
    int64_t ry;
    unsigned rm, rd;
    detail::civil_from_days(dv.days, ry, rm, rd);
    if (ry != y || rm != static_cast<unsigned>(m) || rd != static_cast<unsigned>(d))
        throw DataError("impossible calendar date: " + s);
    return dv;
}

inline std::string format_date(DateV dv) {
    int64_t y;
    unsigned m, d;
    detail::civil_from_days(dv.days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02u", static_cast<long long>(y), m, d);
    return buf;
}

class Value {
public:
    Value() : v_(std::monostate{}) {}
    Value(int64_t x) : v_(x) {}
    Value(double x) : v_(x) {}
    Value(std::string x) : v_(std::move(x)) {}
    Value(const char* x) : v_(std::string(x)) {}
    Value(DateV x) : v_(x) {}

    static Value null() { return Value(); }

    ValueType type() const {
        switch (v_.index()) {
            case 0: return ValueType::Null;
            case 1: return ValueType::Int64;
            case 2: return ValueType::Float64;
            case 3: return ValueType::Text;
            default: return ValueType::Date;
        }
    }

    bool is_null() const { return v_.index() == 0; }
    int64_t as_int() const { return std::get<1>(v_); }
    double as_float() const { return std::get<2>(v_); }
    const std::string& as_text() const { return std::get<3>(v_); }
    DateV as_date() const { return std::get<4>(v_); }

    // numeric value of an Int64 or Float64, for aggregation arithmetic
    double numeric() const {
        if (v_.index() == 1) return static_cast<double>(std::get<1>(v_));
        if (v_.index() == 2) return std::get<2>(v_);
        throw Error("value is not numeric");
    }

    bool operator==(const Value& o) const { return v_ == o.v_; }

    // Total order within a type; Null sorts before everything (used only for
    // deterministic grouping/output order, never exposed as a comparison result).
    bool ordered_before(const Value& o) const {
        if (v_.index() != o.v_.index()) return v_.index() < o.v_.index();
        switch (v_.index()) {
            case 0: return false;
            case 1: return std::get<1>(v_) < std::get<1>(o.v_);
            case 2: return std::get<2>(v_) < std::get<2>(o.v_);
            case 3: return std::get<3>(v_) < std::get<3>(o.v_);
            default: return std::get<4>(v_) < std::get<4>(o.v_);
        }
    }

private:
    std::variant<std::monostate, int64_t, double, std::string, DateV> v_;
};

// CSV field encodings, also used for canonical key serialization:
// Int64 decimal, Float64 shortest round-trip, Text always RFC-4180 quoted,
// Date ISO-8601, Null the empty field.
inline std::string encode_field(const Value& v) {
    switch (v.type()) {
        case ValueType::Null: return "";
        case ValueType::Int64: return std::to_string(v.as_int());
        case ValueType::Float64: {
            char buf[32];
            auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v.as_float());
            (void)ec;
            return std::string(buf, p);
        }
        case ValueType::Date: return format_date(v.as_date());
        case ValueType::Text: {
            std::string out = "\"";
            for (char c : v.as_text()) {
                if (c == '"') out += "\"\"";
                else out += c;
            }
            out += '"';
            return out;
        }
    }
    return "";
}

// `raw` is the already-unquoted field content; `was_quoted` distinguishes the
// empty Null field from a quoted empty Text.
inline Value decode_field(const std::string& raw, bool was_quoted, ValueType t) {
    if (raw.empty() && !was_quoted) return Value::null();
    switch (t) {
        case ValueType::Int64: {
            int64_t v = 0;
            auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
            if (ec != std::errc() || p != raw.data() + raw.size())
                throw DataError("bad int64 field: " + raw);
            return Value(v);
        }
        case ValueType::Float64: {
            double v = 0;
            auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
            if (ec != std::errc() || p != raw.data() + raw.size())
                throw DataError("bad float64 field: " + raw);
            return Value(v);
        }
        case ValueType::Text: return Value(raw);
        case ValueType::Date: return Value(parse_date(raw));
        case ValueType::Null: throw DataError("null is not a schema type");
    }
    throw DataError("bad field");
}

}  // namespace svc

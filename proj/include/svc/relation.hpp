#pragma once

#include <algorithm>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "svc/value.hpp"

namespace svc {

struct Attr {
    std::string name;
    ValueType type;
    bool operator==(const Attr&) const = default;
};

// Attribute list plus the (possibly composite) primary key. The key is an
// ordered list of attribute names; canonical key serialization follows this
// order. Names are unique within a schema.
struct Schema {
    std::vector<Attr> attrs;
    std::vector<std::string> key;

    bool operator==(const Schema&) const = default;

    int index_of(const std::string& name) const {
        for (size_t i = 0; i < attrs.size(); ++i)
            if (attrs[i].name == name) return static_cast<int>(i);
        return -1;
    }

    const Attr& attr(const std::string& name) const {
        int i = index_of(name);
        if (i < 0) throw Error("no attribute named " + name);
        return attrs[static_cast<size_t>(i)];
    }

    bool has(const std::string& name) const { return index_of(name) >= 0; }

    std::vector<size_t> key_indices() const {
        std::vector<size_t> out;
        out.reserve(key.size());
        for (auto& k : key) {
            int i = index_of(k);
            if (i < 0) throw Error("key attribute " + k + " missing from schema");
            out.push_back(static_cast<size_t>(i));
        }
        return out;
    }

    void validate() const {
        std::unordered_set<std::string> seen;
        for (auto& a : attrs)
            if (!seen.insert(a.name).second)
                throw Error("duplicate attribute name: " + a.name);
        for (auto& k : key)
            if (!has(k)) throw Error("key attribute " + k + " missing from schema");
    }
};

using Record = std::vector<Value>;

// Canonical key serialization: key values in schema-key order, rendered with
// the CSV field encodings, joined by the unit separator byte 0x1F.
inline std::string key_string(const Record& rec, const std::vector<size_t>& key_idx) {
    std::string out;
    for (size_t j = 0; j < key_idx.size(); ++j) {
        if (j) out += '\x1f';
        out += encode_field(rec[key_idx[j]]);
    }
    return out;
}

// In-memory relation with set-on-key semantics: no two records may share key
// values. Record order is deterministic construction order.
struct Relation {
    Schema schema;
    std::vector<Record> records;

    size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }

    std::string key_of(const Record& rec) const { return key_string(rec, schema.key_indices()); }

    // index from key string to record position
    std::unordered_map<std::string, size_t> key_index() const {
        auto ki = schema.key_indices();
        std::unordered_map<std::string, size_t> out;
        out.reserve(records.size() * 2);
        for (size_t i = 0; i < records.size(); ++i) {
            auto [it, fresh] = out.emplace(key_string(records[i], ki), i);
            if (!fresh) throw Error("duplicate key in relation: " + it->first);
        }
        return out;
    }

    void check_keys() const { (void)key_index(); }

    void check_types() const {
        for (auto& r : records) {
            if (r.size() != schema.attrs.size()) throw DataError("record arity mismatch");
            for (size_t i = 0; i < r.size(); ++i) {
                if (r[i].is_null()) continue;
                if (r[i].type() != schema.attrs[i].type)
                    throw DataError("value type mismatch in attribute " + schema.attrs[i].name);
            }
        }
    }
};

// Order-insensitive comparison used by tests and invariant checks: relations
// are equal when schemas match and the record sets (keyed) are identical.
inline bool same_records(const Relation& a, const Relation& b) {
    if (a.schema.attrs != b.schema.attrs) return false;
    if (a.records.size() != b.records.size()) return false;
    auto sig = [](const Relation& r) {
        std::vector<std::string> rows;
        rows.reserve(r.records.size());
        for (auto& rec : r.records) {
            std::string s;
            for (auto& v : rec) {
                s += encode_field(v);
                s += '\x1f';
            }
            rows.push_back(std::move(s));
        }
        std::sort(rows.begin(), rows.end());
        return rows;
    };
    return sig(a) == sig(b);
}

// Append a surrogate `_rid` Int64 key column (consecutive from 0 in record
// order) to a relation that lacks a declared key.
inline Relation add_surrogate_key(const Relation& in) {
    if (!in.schema.key.empty()) throw Error("relation already has a declared key");
    if (in.schema.has("_rid")) throw Error("attribute _rid already present");
    Relation out;
    out.schema.attrs = in.schema.attrs;
    out.schema.attrs.push_back({"_rid", ValueType::Int64});
    out.schema.key = {"_rid"};
    out.records.reserve(in.records.size());
    int64_t rid = 0;
    for (auto& r : in.records) {
        Record nr = r;
        nr.push_back(Value(rid++));
        out.records.push_back(std::move(nr));
    }
    return out;
}

}  // namespace svc

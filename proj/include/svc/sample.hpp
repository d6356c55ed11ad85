#pragma once

#include "svc/eval.hpp"

namespace svc {

// A hash sample of a view: the subset of records whose key hashes at or below
// the ratio, plus the (ratio, salt) identity. Outlier-flagged records are
// exempt from the hash bound (they ride along at ratio 1).
struct SampleView {
    Relation rel;
    double ratio = 1.0;
    uint64_t salt = 0;
    std::vector<char> outlier;  // parallel to rel.records; empty means none

    bool is_outlier(size_t i) const { return !outlier.empty() && outlier[i]; }

    void check() const {
        if (!outlier.empty() && outlier.size() != rel.records.size())
            throw Error("outlier flags out of step with records");
        auto ki = rel.schema.key_indices();
        for (size_t i = 0; i < rel.records.size(); ++i) {
            if (is_outlier(i)) continue;
            if (!hash_admits(key_string(rel.records[i], ki), ratio, salt))
                throw Error("sample record outside the hash bound");
        }
    }
};

// Top-level hash filter over a materialized relation, keyed on the relation's
// own key (or an explicit non-unique attribute set).
inline SampleView apply_filter(const Relation& rel, double ratio, uint64_t salt,
                               const std::vector<std::string>& attrs = {}) {
    if (ratio < 0.0 || ratio > 1.0) throw Error("sampling ratio outside [0,1]");
    const std::vector<std::string>& key = attrs.empty() ? rel.schema.key : attrs;
    if (key.empty()) throw Error("cannot sample a relation with no key");
    SampleView out;
    out.rel.schema = rel.schema;
    out.ratio = ratio;
    out.salt = salt;
    for (auto& rec : rel.records) {
        std::string hk = hash_key_of(rec, rel.schema, key);
        if (hash_admits(hk, ratio, salt)) out.rel.records.push_back(rec);
    }
    return out;
}

// Marks sample records whose keys appear in the outlier relation `o` (same
// schema); outliers take precedence over the plain hash sample downstream.
inline void mark_outliers(SampleView& s, const Relation& o) {
    auto ki = s.rel.schema.key_indices();
    std::unordered_set<std::string> keys;
    for (auto& rec : o.records) keys.insert(key_string(rec, ki));
    s.outlier.assign(s.rel.records.size(), 0);
    for (size_t i = 0; i < s.rel.records.size(); ++i)
        if (keys.count(key_string(s.rel.records[i], ki))) s.outlier[i] = 1;
}

}  // namespace svc

#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>

#include "svc/relation.hpp"

namespace svc {

namespace detail {

struct RawField {
    std::string text;
    bool quoted = false;
};

// key collisions in a file are bad input, not a broken invariant
inline void require_unique_keys(const Relation& r, const std::string& path) {
    try {
        r.check_keys();
    } catch (const Error& e) {
        throw DataError(std::string(e.what()) + " in " + path);
    }
}

// RFC-4180 row reader: handles quoted fields, doubled quotes, and embedded
// newlines. Returns false at end of input.
inline bool read_csv_row(std::istream& in, std::vector<RawField>& out) {
    out.clear();
    int c = in.get();
    if (c == EOF) return false;
    RawField cur;
    bool in_quotes = false;
    bool started = false;
    auto flush = [&] {
        out.push_back(std::move(cur));
        cur = RawField{};
    };
    while (true) {
        if (c == EOF) {
            flush();
            return started || !out.empty();
        }
        started = true;
        char ch = static_cast<char>(c);
        if (in_quotes) {
            if (ch == '"') {
                int nx = in.peek();
                if (nx == '"') {
                    cur.text += '"';
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                cur.text += ch;
            }
        } else if (ch == '"' && cur.text.empty() && !cur.quoted) {
            in_quotes = true;
            cur.quoted = true;
        } else if (ch == ',') {
            flush();
        } else if (ch == '\r') {
            // swallow, expect \n
        } else if (ch == '\n') {
            flush();
            return true;
        } else {
            cur.text += ch;
        }
        c = in.get();
    }
}

}  // namespace detail

inline void save_schema(const Schema& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    for (auto& a : s.attrs) out << a.name << ':' << type_name(a.type) << '\n';
    out << "key:";
    for (size_t i = 0; i < s.key.size(); ++i) out << (i ? "," : " ") << s.key[i];
    out << '\n';
}

inline Schema load_schema(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path);
    Schema s;
    std::string line;
    bool saw_key = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto colon = line.find(':');
        if (colon == std::string::npos) throw DataError("bad schema line: " + line);
        std::string name = line.substr(0, colon);
        std::string rest = line.substr(colon + 1);
        while (!rest.empty() && rest.front() == ' ') rest.erase(rest.begin());
        if (name == "key") {
            saw_key = true;
            std::stringstream ss(rest);
            std::string attr;
            while (std::getline(ss, attr, ',')) {
                while (!attr.empty() && attr.front() == ' ') attr.erase(attr.begin());
                while (!attr.empty() && attr.back() == ' ') attr.pop_back();
                if (!attr.empty()) s.key.push_back(attr);
            }
        } else {
            if (saw_key) throw DataError("schema attributes after the key line");
            s.attrs.push_back({name, type_from_name(rest)});
        }
    }
    if (!saw_key) throw DataError("schema sidecar missing key line: " + path);
    s.validate();
    return s;
}

inline void save_csv(const Relation& r, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    for (size_t i = 0; i < r.schema.attrs.size(); ++i)
        out << (i ? "," : "") << r.schema.attrs[i].name;
    out << '\n';
    for (auto& rec : r.records) {
        for (size_t i = 0; i < rec.size(); ++i) out << (i ? "," : "") << encode_field(rec[i]);
        out << '\n';
    }
}

inline Relation load_csv(const std::string& csv_path, const Schema& schema) {
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) throw DataError("cannot read " + csv_path);
    Relation r;
    r.schema = schema;
    std::vector<detail::RawField> row;
    if (!detail::read_csv_row(in, row)) throw DataError("empty csv: " + csv_path);
    if (row.size() != schema.attrs.size()) throw DataError("csv header arity mismatch");
    for (size_t i = 0; i < row.size(); ++i)
        if (row[i].text != schema.attrs[i].name)
            throw DataError("csv header names do not match the schema sidecar");
    while (detail::read_csv_row(in, row)) {
        if (row.size() == 1 && row[0].text.empty() && !row[0].quoted) continue;  // blank line
        if (row.size() != schema.attrs.size()) throw DataError("csv record arity mismatch");
        Record rec;
        rec.reserve(row.size());
        for (size_t i = 0; i < row.size(); ++i)
            rec.push_back(decode_field(row[i].text, row[i].quoted, schema.attrs[i].type));
        r.records.push_back(std::move(rec));
    }
    detail::require_unique_keys(r, csv_path);
    return r;
}

// Relation persisted as `<stem>.csv` + `<stem>.schema`.
inline void save_relation(const Relation& r, const std::string& stem) {
    save_schema(r.schema, stem + ".schema");
    save_csv(r, stem + ".csv");
}

inline Relation load_relation(const std::string& stem) {
    Schema s = load_schema(stem + ".schema");
    return load_csv(stem + ".csv", s);
}

// Delta CSV: the base schema preceded by an `op` column holding I or D.
// Returns (insertions, deletions), both with the base schema.
inline std::pair<Relation, Relation> load_delta_csv(const std::string& path,
                                                    const Schema& base_schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path);
    Relation ins, del;
    ins.schema = base_schema;
    del.schema = base_schema;
    std::vector<detail::RawField> row;
    if (!detail::read_csv_row(in, row)) throw DataError("empty delta csv: " + path);
    if (row.size() != base_schema.attrs.size() + 1 || row[0].text != "op")
        throw DataError("delta csv must start with an op column plus the base schema");
    for (size_t i = 1; i < row.size(); ++i)
        if (row[i].text != base_schema.attrs[i - 1].name)
            throw DataError("delta csv header names do not match the base schema");
    while (detail::read_csv_row(in, row)) {
        if (row.size() == 1 && row[0].text.empty() && !row[0].quoted) continue;
        if (row.size() != base_schema.attrs.size() + 1)
            throw DataError("delta csv record arity mismatch");
        Record rec;
        rec.reserve(base_schema.attrs.size());
        for (size_t i = 1; i < row.size(); ++i)
            rec.push_back(decode_field(row[i].text, row[i].quoted, base_schema.attrs[i - 1].type));
        if (row[0].text == "I") ins.records.push_back(std::move(rec));
        else if (row[0].text == "D") del.records.push_back(std::move(rec));
        else throw DataError("delta op must be I or D, got: " + row[0].text);
    }
    detail::require_unique_keys(ins, path);
    detail::require_unique_keys(del, path);
    return {std::move(ins), std::move(del)};
}

inline void save_delta_csv(const Relation& ins, const Relation& del, const std::string& path) {
    if (ins.schema.attrs != del.schema.attrs) throw DataError("delta halves disagree on schema");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << "op";
    for (auto& a : ins.schema.attrs) out << ',' << a.name;
    out << '\n';
    auto dump = [&](const Relation& r, char op) {
        for (auto& rec : r.records) {
            out << op;
            for (auto& v : rec) out << ',' << encode_field(v);
            out << '\n';
        }
    };
    dump(del, 'D');
    dump(ins, 'I');
}

}  // namespace svc

#pragma once

#include <cctype>
#include <chrono>
#include <cstring>
#include <numeric>

#include "svc/maintenance.hpp"
#include "svc/outlier.hpp"

namespace svc {

// Zipf(s) over {0..n-1} by inverting the cumulative weights
struct Zipf {
    std::vector<double> cdf;

    Zipf(size_t n, double s) {
        if (n == 0) throw Error("zipf over an empty domain");
        cdf.resize(n);
        double acc = 0.0;
        for (size_t i = 0; i < n; ++i) {
            acc += 1.0 / std::pow(static_cast<double>(i + 1), s);
            cdf[i] = acc;
        }
        for (auto& c : cdf) c /= acc;
    }

    size_t sample(std::mt19937_64& rng) const {
        double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        return static_cast<size_t>(
            std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    }
};

struct WorkloadSpec {
    std::string scenario = "scenario";
    std::string dataset = "logvideo";  // logvideo | star
    std::string view = "agg";          // sp | join | agg
    size_t dim_rows = 1000;            // videos / customers
    size_t aux_rows = 200;             // products (star only)
    size_t fact_rows = 100000;         // logs / sales
    double zipf_s = 1.1;
    double ratio = 0.05;
    double fraction = 0.1;             // delta rows as a share of the fact table
    double ins_frac = 0.5, upd_frac = 0.3, del_frac = 0.2;
    std::string agg = "sum";
    std::string attr;                  // defaulted per dataset and view class
    std::string where;                 // optional predicate, e.g. "watch>100"
    std::vector<std::string> methods = {"stale", "exact", "aqp", "corr"};
    size_t outlier_k = 100;
    uint64_t seed = 42;
};

// ---- spec files: flat key=value ------------------------------------------------

namespace detail {

inline std::vector<std::string> split_csv_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

}  // namespace detail

inline WorkloadSpec parse_workload_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path);
    WorkloadSpec ws;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back())))
            line.pop_back();
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(path + ":" + std::to_string(lineno) + ": expected key=value");
        std::string k = line.substr(0, eq), v = line.substr(eq + 1);
        if (k == "scenario") ws.scenario = v;
        else if (k == "dataset") ws.dataset = v;
        else if (k == "view") ws.view = v;
        else if (k == "dim_rows") ws.dim_rows = std::stoull(v);
        else if (k == "aux_rows") ws.aux_rows = std::stoull(v);
        else if (k == "fact_rows") ws.fact_rows = std::stoull(v);
        else if (k == "zipf") ws.zipf_s = std::stod(v);
        else if (k == "ratio") ws.ratio = std::stod(v);
        else if (k == "fraction") ws.fraction = std::stod(v);
        else if (k == "mix") {
            auto parts = detail::split_csv_list(v);
            if (parts.size() != 3) throw Error("mix needs insert,update,delete fractions");
            ws.ins_frac = std::stod(parts[0]);
            ws.upd_frac = std::stod(parts[1]);
            ws.del_frac = std::stod(parts[2]);
        } else if (k == "agg") ws.agg = v;
        else if (k == "attr") ws.attr = v;
        else if (k == "where") ws.where = v;
        else if (k == "methods") ws.methods = detail::split_csv_list(v);
        else if (k == "outlier_k") ws.outlier_k = std::stoull(v);
        else if (k == "seed") ws.seed = std::stoull(v);
        else throw Error(path + ":" + std::to_string(lineno) + ": unknown key " + k);
    }
    return ws;
}

// "attr>100", "region=west", "day>=2026-03-01" — one comparison, no conjunctions
inline ScalarPtr parse_predicate(const std::string& s) {
    static const std::pair<const char*, CmpOp> ops[] = {
        {">=", CmpOp::Ge}, {"<=", CmpOp::Le}, {"!=", CmpOp::Ne},
        {">", CmpOp::Gt},  {"<", CmpOp::Lt}, {"=", CmpOp::Eq}};
    for (auto& [tok, op] : ops) {
        auto pos = s.find(tok);
        if (pos == std::string::npos || pos == 0) continue;
        std::string lhs = s.substr(0, pos), rhs = s.substr(pos + std::strlen(tok));
        auto trim = [](std::string& t) {
            while (!t.empty() && std::isspace(static_cast<unsigned char>(t.front()))) t.erase(0, 1);
            while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) t.pop_back();
        };
        trim(lhs);
        trim(rhs);
        if (lhs.empty() || rhs.empty()) throw Error("cannot parse predicate " + s);
        Value litv;
        if (rhs.size() == 10 && rhs[4] == '-' && rhs[7] == '-') {
            litv = Value(parse_date(rhs));
        } else {
            try {
                size_t used = 0;
                long long iv = std::stoll(rhs, &used);
                if (used == rhs.size()) litv = Value(static_cast<int64_t>(iv));
            } catch (...) {
            }
            if (litv.is_null()) {
                try {
                    size_t used = 0;
                    double dv = std::stod(rhs, &used);
                    if (used == rhs.size()) litv = Value(dv);
                } catch (...) {
                }
            }
            if (litv.is_null()) litv = Value(rhs);
        }
        ScalarPtr l = col(lhs), r = lit(litv);
        switch (op) {
            case CmpOp::Eq: return eq(l, r);
            case CmpOp::Ne: return ne(l, r);
            case CmpOp::Lt: return lt(l, r);
            case CmpOp::Le: return le(l, r);
            case CmpOp::Gt: return gt(l, r);
            case CmpOp::Ge: return ge(l, r);
        }
    }
    throw Error("cannot parse predicate " + s);
}

// ---- datasets -------------------------------------------------------------------

inline Database make_logvideo(size_t videos, size_t logs, double zipf_s, uint64_t seed) {
    std::mt19937_64 rng(seed);
    size_t owners = std::max<size_t>(videos / 10, 1);

    Relation video;
    video.schema.attrs = {{"videoId", ValueType::Int64},
                          {"ownerId", ValueType::Int64},
                          {"duration", ValueType::Int64}};
    video.schema.key = {"videoId"};
    std::uniform_int_distribution<int64_t> owner_d(0, static_cast<int64_t>(owners) - 1);
    std::uniform_int_distribution<int64_t> dur_d(30, 3600);
    for (size_t i = 0; i < videos; ++i)
        video.records.push_back({Value(static_cast<int64_t>(i)), Value(owner_d(rng)),
                                 Value(dur_d(rng))});

    Relation log;
    log.schema.attrs = {{"logId", ValueType::Int64},
                        {"videoId", ValueType::Int64},
                        {"watch", ValueType::Int64},
                        {"day", ValueType::Date}};
    log.schema.key = {"logId"};
    Zipf pop(videos, zipf_s);
    std::lognormal_distribution<double> watch_d(3.0, 1.5);
    std::uniform_int_distribution<int64_t> day_d(0, 364);
    int64_t day0 = detail::days_from_civil(2026, 1, 1);
    for (size_t i = 0; i < logs; ++i) {
        int64_t w = std::max<int64_t>(1, std::llround(watch_d(rng)));
        log.records.push_back({Value(static_cast<int64_t>(i)),
                               Value(static_cast<int64_t>(pop.sample(rng))), Value(w),
                               Value(DateV{day0 + day_d(rng)})});
    }

    Database db;
    db.put("video", std::move(video));
    db.put("log", std::move(log));
    return db;
}

inline Database make_star(size_t customers, size_t products, size_t sales, double zipf_s,
                          uint64_t seed) {
    std::mt19937_64 rng(seed);
    static const char* regions[] = {"north", "south", "east", "west",
                                    "nw",    "ne",    "sw",   "se"};
    static const char* segments[] = {"retail", "wholesale", "online", "partner"};

    Relation customer;
    customer.schema.attrs = {{"custId", ValueType::Int64},
                             {"region", ValueType::Text},
                             {"segment", ValueType::Text}};
    customer.schema.key = {"custId"};
    std::uniform_int_distribution<size_t> reg_d(0, 7), seg_d(0, 3);
    for (size_t i = 0; i < customers; ++i)
        customer.records.push_back({Value(static_cast<int64_t>(i)),
                                    Value(std::string(regions[reg_d(rng)])),
                                    Value(std::string(segments[seg_d(rng)]))});

    Relation product;
    product.schema.attrs = {{"prodId", ValueType::Int64},
                            {"category", ValueType::Int64},
                            {"listPrice", ValueType::Int64}};
    product.schema.key = {"prodId"};
    std::uniform_int_distribution<int64_t> cat_d(0, 15), price_d(1, 500);
    for (size_t i = 0; i < products; ++i)
        product.records.push_back(
            {Value(static_cast<int64_t>(i)), Value(cat_d(rng)), Value(price_d(rng))});

    Relation salesr;
    salesr.schema.attrs = {{"saleId", ValueType::Int64},
                           {"custId", ValueType::Int64},
                           {"prodId", ValueType::Int64},
                           {"qty", ValueType::Int64},
                           {"price", ValueType::Int64},
                           {"discount", ValueType::Int64},  // percent off
                           {"saleDate", ValueType::Date},
                           {"amount", ValueType::Int64}};
    salesr.schema.key = {"saleId"};
    Zipf cust_pop(customers, zipf_s), prod_pop(products, zipf_s);
    std::uniform_int_distribution<int64_t> qty_d(1, 10), disc_d(0, 20), day_d(0, 364);
    int64_t day0 = detail::days_from_civil(2026, 1, 1);
    for (size_t i = 0; i < sales; ++i) {
        int64_t cid = static_cast<int64_t>(cust_pop.sample(rng));
        int64_t pid = static_cast<int64_t>(prod_pop.sample(rng));
        int64_t qty = qty_d(rng);
        int64_t price = product.records[static_cast<size_t>(pid)][2].as_int();
        int64_t disc = disc_d(rng);
        salesr.records.push_back({Value(static_cast<int64_t>(i)), Value(cid), Value(pid),
                                  Value(qty), Value(price), Value(disc),
                                  Value(DateV{day0 + day_d(rng)}),
                                  Value(qty * price * (100 - disc) / 100)});
    }

    Database db;
    db.put("customer", std::move(customer));
    db.put("product", std::move(product));
    db.put("sales", std::move(salesr));
    return db;
}

inline Database make_database(const WorkloadSpec& ws) {
    if (ws.dataset == "logvideo")
        return make_logvideo(ws.dim_rows, ws.fact_rows, ws.zipf_s, ws.seed);
    if (ws.dataset == "star")
        return make_star(ws.dim_rows, ws.aux_rows, ws.fact_rows, ws.zipf_s, ws.seed);
    throw Error("unknown dataset " + ws.dataset);
}

inline std::string fact_table(const WorkloadSpec& ws) {
    return ws.dataset == "logvideo" ? "log" : "sales";
}

inline std::string default_attr(const WorkloadSpec& ws) {
    if (!ws.attr.empty()) return ws.attr;
    std::string base = ws.dataset == "logvideo" ? "watch" : "amount";
    return ws.view == "agg" ? base + "_total" : base;
}

// ---- view templates --------------------------------------------------------------

inline ViewDef make_view(const Database& db, const WorkloadSpec& ws) {
    auto sch = [&](const char* n) { return db.get(n).schema; };
    if (ws.dataset == "logvideo") {
        if (ws.view == "sp") {
            auto e = project({{"logId", col("logId")},
                              {"videoId", col("videoId")},
                              {"watch", col("watch")}},
                             select(gt(col("watch"), lit(int64_t{20})), base("log", sch("log"))));
            return augment_view("hot_watches", e);
        }
        if (ws.view == "join") {
            auto j = join(JoinKind::Inner, {{"videoId", CmpOp::Eq, "videoId"}},
                          base("log", sch("log")), base("video", sch("video")));
            auto e = project({{"logId", col("logId")},
                              {"videoId", col("videoId")},
                              {"watch", col("watch")},
                              {"ownerId", col("ownerId")}},
                             j);
            return augment_view("watch_detail", e);
        }
        if (ws.view == "agg") {
            auto j = join(JoinKind::Inner, {{"videoId", CmpOp::Eq, "videoId"}},
                          base("log", sch("log")), base("video", sch("video")));
            auto e = aggregate({"ownerId"},
                               {{AggFn::Sum, "watch", "watch_total"},
                                {AggFn::Avg, "watch", "watch_avg"},
                                {AggFn::Count, "", "visits"}},
                               j);
            return augment_view("owner_watch", e);
        }
    } else if (ws.dataset == "star") {
        if (ws.view == "sp") {
            auto e = project(
                {{"saleId", col("saleId")}, {"custId", col("custId")}, {"amount", col("amount")}},
                select(gt(col("amount"), lit(int64_t{100})), base("sales", sch("sales"))));
            return augment_view("big_sales", e);
        }
        if (ws.view == "join") {
            auto j = join(JoinKind::Inner, {{"prodId", CmpOp::Eq, "prodId"}},
                          base("sales", sch("sales")), base("product", sch("product")));
            auto e = project({{"saleId", col("saleId")},
                              {"prodId", col("prodId")},
                              {"amount", col("amount")},
                              {"category", col("category")}},
                             j);
            return augment_view("sale_detail", e);
        }
        if (ws.view == "agg") {
            auto j = join(JoinKind::Inner, {{"custId", CmpOp::Eq, "custId"}},
                          base("sales", sch("sales")), base("customer", sch("customer")));
            auto e = aggregate({"region"},
                               {{AggFn::Sum, "amount", "amount_total"},
                                {AggFn::Count, "", "sales_cnt"}},
                               j);
            return augment_view("region_sales", e);
        }
    }
    throw Error("unknown dataset/view combination " + ws.dataset + "/" + ws.view);
}

// ---- deltas ---------------------------------------------------------------------

// Generates fraction*|fact| delta rows against the fact table: inserts draw
// fresh rows, updates redraw the measure under the same key, deletes pick
// distinct victims. An update spends two rows of the budget — its deletion
// half and its insertion half — so the emitted delta file has exactly the
// contracted row count.
inline DeltaSet make_deltas(const Database& db, const WorkloadSpec& ws) {
    std::mt19937_64 rng(ws.seed ^ 0xd31a50f5ULL);
    std::string fname = fact_table(ws);
    const Relation& fact = db.get(fname);
    size_t n = fact.records.size();
    size_t budget = static_cast<size_t>(std::llround(ws.fraction * static_cast<double>(n)));
    size_t n_ins = static_cast<size_t>(std::llround(static_cast<double>(budget) * ws.ins_frac));
    size_t n_upd = static_cast<size_t>(std::llround(static_cast<double>(budget) * ws.upd_frac / 2.0));
    if (n_ins + 2 * n_upd > budget) n_ins = budget - 2 * n_upd;
    size_t n_del = budget - n_ins - 2 * n_upd;
    if (n_upd + n_del > n) throw Error("delta fraction exceeds the fact table");

    Relation ins, del;
    ins.schema = fact.schema;
    del.schema = fact.schema;

    std::vector<size_t> victims(n);
    std::iota(victims.begin(), victims.end(), size_t{0});
    std::shuffle(victims.begin(), victims.end(), rng);

    std::lognormal_distribution<double> watch_d(3.0, 1.5);
    std::uniform_int_distribution<int64_t> qty_d(1, 10), disc_d(0, 20);
    int measure_idx = fact.schema.index_of(ws.dataset == "logvideo" ? "watch" : "amount");

    for (size_t i = 0; i < n_upd; ++i) {
        const Record& old = fact.records[victims[i]];
        del.records.push_back(old);
        Record nu = old;
        if (ws.dataset == "logvideo") {
            nu[measure_idx] = Value(std::max<int64_t>(1, std::llround(watch_d(rng))));
        } else {
            int64_t qty = qty_d(rng);
            int64_t price = old[fact.schema.index_of("price")].as_int();
            int64_t disc = old[fact.schema.index_of("discount")].as_int();
            nu[fact.schema.index_of("qty")] = Value(qty);
            nu[measure_idx] = Value(qty * price * (100 - disc) / 100);
        }
        ins.records.push_back(std::move(nu));
    }
    for (size_t i = n_upd; i < n_upd + n_del; ++i)
        del.records.push_back(fact.records[victims[i]]);

    int64_t max_key = -1;
    int key_idx = fact.schema.index_of(fact.schema.key[0]);
    for (auto& rec : fact.records) max_key = std::max(max_key, rec[key_idx].as_int());

    std::uniform_int_distribution<int64_t> day_d(0, 364);
    int64_t day0 = detail::days_from_civil(2026, 1, 1);
    if (ws.dataset == "logvideo") {
        Zipf pop(ws.dim_rows, ws.zipf_s);
        for (size_t i = 0; i < n_ins; ++i) {
            int64_t w = std::max<int64_t>(1, std::llround(watch_d(rng)));
            ins.records.push_back({Value(max_key + 1 + static_cast<int64_t>(i)),
                                   Value(static_cast<int64_t>(pop.sample(rng))), Value(w),
                                   Value(DateV{day0 + day_d(rng)})});
        }
    } else {
        Zipf cust_pop(ws.dim_rows, ws.zipf_s), prod_pop(ws.aux_rows, ws.zipf_s);
        const Relation& product = db.get("product");
        for (size_t i = 0; i < n_ins; ++i) {
            int64_t cid = static_cast<int64_t>(cust_pop.sample(rng));
            int64_t pid = static_cast<int64_t>(prod_pop.sample(rng));
            int64_t qty = qty_d(rng);
            int64_t price = product.records[static_cast<size_t>(pid)][2].as_int();
            int64_t disc = disc_d(rng);
            ins.records.push_back({Value(max_key + 1 + static_cast<int64_t>(i)), Value(cid),
                                   Value(pid), Value(qty), Value(price), Value(disc),
                                   Value(DateV{day0 + day_d(rng)}),
                                   Value(qty * price * (100 - disc) / 100)});
        }
    }

    DeltaSet ds;
    ds.set(fname, std::move(ins), std::move(del));
    return ds;
}

// ---- group-by lowering ------------------------------------------------------------

// One scalar query per distinct group value, in first-seen order
inline std::vector<std::pair<Value, QuerySpec>> lower_group_by(const Relation& over,
                                                               const std::string& group_attr,
                                                               const QuerySpec& qs) {
    int gi = over.schema.index_of(group_attr);
    if (gi < 0) throw Error("unknown attribute " + group_attr);
    std::vector<std::pair<Value, QuerySpec>> out;
    std::unordered_set<std::string> seen;
    for (auto& rec : over.records) {
        std::string sig = encode_field(rec[gi]);
        if (!seen.insert(sig).second) continue;
        QuerySpec g = qs;
        ScalarPtr cond = eq(col(group_attr), lit(rec[gi]));
        g.pred = qs.pred ? and_(qs.pred, cond) : cond;
        out.emplace_back(rec[gi], std::move(g));
    }
    return out;
}

// ---- the benchmark loop -------------------------------------------------------------

struct MetricsRow {
    std::string scenario, dataset, view, method, agg;
    uint64_t rows_touched = 0;
    double estimate = 0.0, truth = 0.0, relative_error = 0.0, ci_width = 0.0, wall_ms = 0.0;
};

inline void save_metrics(const std::vector<MetricsRow>& rows, std::ostream& out) {
    out << "scenario,dataset,view,method,agg,rows_touched,estimate,truth,"
           "relative_error,ci_width,wall_ms\n";
    for (auto& r : rows) {
        out << encode_field(Value(r.scenario)) << ',' << r.dataset << ',' << r.view << ','
            << r.method << ',' << encode_field(Value(r.agg)) << ',' << r.rows_touched << ','
            << encode_field(Value(r.estimate)) << ',' << encode_field(Value(r.truth)) << ','
            << encode_field(Value(r.relative_error)) << ',' << encode_field(Value(r.ci_width))
            << ',' << encode_field(Value(r.wall_ms)) << '\n';
    }
}

inline void save_metrics(const std::vector<MetricsRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    save_metrics(rows, out);
}

inline QAgg parse_qagg(const std::string& s) {
    if (s == "sum") return QAgg::Sum;
    if (s == "count") return QAgg::Count;
    if (s == "avg") return QAgg::Avg;
    if (s == "min") return QAgg::Min;
    if (s == "max") return QAgg::Max;
    if (s == "median") return QAgg::Median;
    if (s == "percentile") return QAgg::Percentile;
    throw Error("unknown aggregate " + s);
}

inline std::vector<MetricsRow> run_scenario(const WorkloadSpec& ws) {
    Database db = make_database(ws);
    ViewDef view = make_view(db, ws);
    MaintenanceStrategy st = build_change_table_strategy(view);

    Relation stale = evaluate(view.def, db);
    SampleView dirty = apply_filter(stale, ws.ratio, ws.seed);
    DeltaSet deltas = make_deltas(db, ws);

    Database post = apply_deltas(db, deltas);
    Relation fresh = evaluate(view.def, post);

    QuerySpec qs;
    qs.agg = parse_qagg(ws.agg);
    qs.attr = default_attr(ws);
    if (!ws.where.empty()) qs.pred = parse_predicate(ws.where);
    double truth = exact_query(fresh, qs);
    double denom = truth != 0.0 ? std::abs(truth) : 1.0;

    std::vector<MetricsRow> out;
    for (auto& method : ws.methods) {
        MetricsRow row;
        row.scenario = ws.scenario;
        row.dataset = ws.dataset;
        row.view = ws.view;
        row.method = method;
        row.agg = qs.describe();
        row.truth = truth;
        auto t0 = std::chrono::steady_clock::now();

        if (method == "stale") {
            row.estimate = exact_query(stale, qs);
        } else if (method == "exact") {
            MaintainResult mr = full_maintain(stale, db, deltas, st);
            row.rows_touched = mr.rows_touched;
            row.estimate = exact_query(mr.view, qs);
        } else if (method == "aqp") {
            CleanResult cr = clean_sample(dirty, db, deltas, st);
            row.rows_touched = cr.rows_touched;
            Estimate e = aqp_estimate(cr.sample, qs);
            row.estimate = e.value;
            row.ci_width = e.hi - e.lo;
        } else if (method == "corr") {
            CleanResult cr = clean_sample(dirty, db, deltas, st);
            row.rows_touched = cr.rows_touched;
            Estimate e = corr_estimate(stale, dirty, cr.sample, qs);
            row.estimate = e.value;
            row.ci_width = e.hi - e.lo;
        } else if (method == "aqp+outlier") {
            CleanResult cr = clean_sample(dirty, db, deltas, st);
            row.rows_touched = cr.rows_touched;
            std::string fname = fact_table(ws);
            const Relation& fact = post.get(fname);
            std::string measure = ws.dataset == "logvideo" ? "watch" : "amount";
            double t = threshold_topk(fact, measure, ws.outlier_k);
            OutlierIndex idx = build_outlier_index(fact, measure, t, ws.outlier_k);
            ViewOutliers vo = push_up(idx, view.def, fname, post, fresh);
            SampleView marked = cr.sample;
            mark_outliers(marked, vo.rows);
            Estimate e = merged_estimate(marked, vo.rows, qs);
            row.rows_touched += vo.rows.records.size();
            row.estimate = e.value;
            row.ci_width = e.hi - e.lo;
        } else {
            throw Error("unknown method " + method);
        }

        auto t1 = std::chrono::steady_clock::now();
        row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        row.relative_error = std::abs(row.estimate - truth) / denom;
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace svc

// svc: sampled views over CSV relations.
//
// A data directory holds base tables, materialized views, their hash samples,
// and a pending delta queue. Queries answer from the stale view, the exact
// view, or the cleaned sample (aqp / corr); maintenance advances the view or
// just its sample.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "svc/svc.hpp"

namespace fs = std::filesystem;

namespace {

using namespace svc;

std::map<std::string, std::string> read_kv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path.string());
    std::map<std::string, std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw Error("bad line in " + path.string() + ": " + line);
        out[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return out;
}

void write_kv(const fs::path& path, const std::vector<std::pair<std::string, std::string>>& kv) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    for (auto& [k, v] : kv) out << k << "=" << v << "\n";
}

struct Store {
    fs::path dir;

    std::string path(const std::string& rel) const { return (dir / rel).string(); }
    bool exists(const std::string& rel) const { return fs::exists(dir / rel); }

    std::map<std::string, std::string> catalog() const { return read_kv(dir / "catalog.meta"); }

    std::string dataset() const { return catalog().at("dataset"); }

    std::vector<std::string> tables() const {
        return detail::split_csv_list(catalog().at("tables"));
    }

    Database load_db() const {
        Database db;
        for (auto& t : tables()) db.put(t, load_relation(path(t)));
        return db;
    }

    void save_db(const Database& db) const {
        for (auto& t : tables()) save_relation(db.get(t), path(t));
    }

    // ---- views ----
    struct ViewInfo {
        std::string tmpl;
        bool synced = true;  // false once the sample has advanced past the view
    };

    ViewInfo view_info(const std::string& name) const {
        auto kv = read_kv(dir / (name + ".view"));
        return {kv.at("template"), kv.at("synced") == "1"};
    }
    void write_view_info(const std::string& name, const ViewInfo& vi) const {
        write_kv(dir / (name + ".view"),
                 {{"template", vi.tmpl}, {"synced", vi.synced ? "1" : "0"}});
    }
    bool has_view(const std::string& name) const { return exists(name + ".view"); }

    ViewDef view_def(const Database& db, const std::string& name) const {
        WorkloadSpec ws;
        ws.dataset = dataset();
        ws.view = view_info(name).tmpl;
        ViewDef v = make_view(db, ws);
        v.name = name;
        return v;
    }

    // ---- samples ----
    bool has_sample(const std::string& view) const { return exists(view + ".sample.meta"); }

    SampleView load_sample(const std::string& view) const {
        auto kv = read_kv(dir / (view + ".sample.meta"));
        SampleView s;
        s.rel = load_relation(path(view + ".sample"));
        s.ratio = std::stod(kv.at("ratio"));
        s.salt = std::stoull(kv.at("salt"));
        return s;
    }
    void save_sample(const std::string& view, const SampleView& s) const {
        save_relation(s.rel, path(view + ".sample"));
        write_kv(dir / (view + ".sample.meta"),
                 {{"ratio", encode_field(Value(s.ratio))}, {"salt", std::to_string(s.salt)}});
    }

    // ---- pending deltas ----
    DeltaSet load_pending() const {
        DeltaSet ds;
        for (auto& t : tables()) {
            std::string ins_stem = "pending/" + t + ".ins";
            if (!exists(ins_stem + ".csv")) continue;
            ds.set(t, load_relation(path(ins_stem)), load_relation(path("pending/" + t + ".del")));
        }
        return ds;
    }

    void save_pending_table(const std::string& t, const Relation& ins, const Relation& del) const {
        fs::create_directories(dir / "pending");
        save_relation(ins, path("pending/" + t + ".ins"));
        save_relation(del, path("pending/" + t + ".del"));
    }

    void clear_pending() const {
        fs::remove_all(dir / "pending");
        fs::create_directories(dir / "pending");
    }
};

size_t total_delta_rows(const DeltaSet& ds) {
    size_t n = 0;
    for (auto& [t, pair] : ds.by_base) n += pair.first.records.size() + pair.second.records.size();
    return n;
}

// merge freshly ingested rows into the pending queue for one table
void queue_deltas(const Store& store, const Database& db, const std::string& table,
                  Relation ins, Relation del) {
    DeltaSet pending = store.load_pending();
    Relation pins = pending.ins_or_empty(table, db.get(table).schema);
    Relation pdel = pending.del_or_empty(table, db.get(table).schema);
    for (auto& r : ins.records) pins.records.push_back(std::move(r));
    for (auto& r : del.records) pdel.records.push_back(std::move(r));
    pins.check_keys();
    pdel.check_keys();
    store.save_pending_table(table, pins, pdel);
}

void print_estimate_header() {
    std::cout << "method,agg,group,value,lo,hi,level,confidence,rows_used,variance,note\n";
}

void print_estimate(const Estimate& e, const std::string& group) {
    std::cout << e.method << ',' << encode_field(Value(e.agg)) << ','
              << encode_field(Value(group)) << ',' << encode_field(Value(e.value)) << ','
              << encode_field(Value(e.lo)) << ',' << encode_field(Value(e.hi)) << ','
              << encode_field(Value(e.level)) << ',' << encode_field(Value(e.confidence)) << ','
              << e.rows_used << ',' << encode_field(Value(e.variance)) << ','
              << encode_field(Value(e.note)) << '\n';
}

Estimate exact_as_estimate(const Relation& r, const QuerySpec& qs, const std::string& method) {
    Estimate e;
    e.method = method;
    e.agg = qs.describe();
    e.value = exact_query(r, qs);
    e.lo = e.hi = e.value;
    e.level = qs.level;
    e.rows_used = r.records.size();
    if (method == "stale") e.note = "answered from the stale view";
    return e;
}

// ---- subcommand state -------------------------------------------------------

struct GenArgs {
    std::string dataset = "logvideo";
    size_t dim_rows = 1000, aux_rows = 200, fact_rows = 100000;
    double zipf = 1.1;
    uint64_t seed = 42;
};

struct DefineArgs {
    std::string name, tmpl;
};

struct SampleArgs {
    std::string view;
    double ratio = 0.1;
    uint64_t salt = 0;
    bool salt_set = false;
};

struct DeltaGenArgs {
    double fraction = 0.05;
    std::string mix = "0.5,0.3,0.2";
    uint64_t seed = 43;
    std::string out;
};

struct IngestArgs {
    std::string table, file;
};

struct MaintainArgs {
    std::string name, mode = "full";
    double ratio = 0.0;  // svc mode: resample the view at this ratio before cleaning
    uint64_t salt = 0;
    bool salt_set = false;
};

struct ExplainArgs {
    std::string name;
    double ratio = 0.0;  // 0: take the sample's ratio
};

struct QueryArgs {
    std::string view, agg = "count", attr, where, group_by, method = "aqp", outlier;
    double q = 0.5, level = 0.95;
    size_t bootstrap = 0;
};

struct OutlierArgs {
    std::string table, attr, mode;
    size_t cap = 100;
};

struct BenchArgs {
    std::string spec, out;
};

void cmd_gen(const Store& store, const GenArgs& a) {
    WorkloadSpec ws;
    ws.dataset = a.dataset;
    ws.dim_rows = a.dim_rows;
    ws.aux_rows = a.aux_rows;
    ws.fact_rows = a.fact_rows;
    ws.zipf_s = a.zipf;
    ws.seed = a.seed;
    Database db = make_database(ws);
    fs::create_directories(store.dir / "pending");
    std::vector<std::string> names =
        a.dataset == "logvideo" ? std::vector<std::string>{"video", "log"}
                                : std::vector<std::string>{"customer", "product", "sales"};
    std::string joined;
    for (auto& n : names) {
        save_relation(db.get(n), store.path(n));
        joined += (joined.empty() ? "" : ",") + n;
        std::cout << n << ": " << db.get(n).records.size() << " rows\n";
    }
    write_kv(store.dir / "catalog.meta", {{"dataset", a.dataset}, {"tables", joined}});
}

void cmd_define(const Store& store, const DefineArgs& a) {
    Database db = store.load_db();
    WorkloadSpec ws;
    ws.dataset = store.dataset();
    ws.view = a.tmpl;
    ViewDef v = make_view(db, ws);
    v.name = a.name;
    Relation r = evaluate(v.def, db);
    save_relation(r, store.path(a.name));
    store.write_view_info(a.name, {a.tmpl, true});
    std::cout << "view " << a.name << " (" << a.tmpl << "): " << r.records.size() << " rows\n";
}

void cmd_sample(const Store& store, const SampleArgs& a, uint64_t global_seed) {
    if (!store.has_view(a.view)) throw Error("no view named " + a.view);
    Relation r = load_relation(store.path(a.view));
    uint64_t salt = a.salt_set ? a.salt : global_seed;
    SampleView s = apply_filter(r, a.ratio, salt);
    store.save_sample(a.view, s);
    std::cout << "sample of " << a.view << ": " << s.rel.records.size() << " of "
              << r.records.size() << " rows (m=" << encode_field(Value(a.ratio)) << ")\n";
}

void cmd_delta_gen(const Store& store, const DeltaGenArgs& a) {
    Database db = store.load_db();
    WorkloadSpec ws;
    ws.dataset = store.dataset();
    ws.fraction = a.fraction;
    ws.seed = a.seed;
    auto mix = detail::split_csv_list(a.mix);
    if (mix.size() != 3) throw Error("--mix needs insert,update,delete fractions");
    ws.ins_frac = std::stod(mix[0]);
    ws.upd_frac = std::stod(mix[1]);
    ws.del_frac = std::stod(mix[2]);
    ws.dim_rows = db.get(ws.dataset == "logvideo" ? "video" : "customer").records.size();
    if (ws.dataset == "star") ws.aux_rows = db.get("product").records.size();
    DeltaSet ds = make_deltas(db, ws);
    std::string fact = fact_table(ws);
    auto& [ins, del] = ds.by_base.at(fact);
    if (!a.out.empty()) save_delta_csv(ins, del, a.out);
    queue_deltas(store, db, fact, ins, del);
    std::cout << "queued " << ins.records.size() << " insertions, " << del.records.size()
              << " deletions against " << fact << "\n";
}

void cmd_ingest(const Store& store, const IngestArgs& a) {
    Database db = store.load_db();
    if (!db.has(a.table)) throw Error("no table named " + a.table);
    auto [ins, del] = load_delta_csv(a.file, db.get(a.table).schema);
    queue_deltas(store, db, a.table, ins, del);
    std::cout << "queued " << ins.records.size() << " insertions, " << del.records.size()
              << " deletions against " << a.table << "\n";
}

void cmd_maintain(const Store& store, const MaintainArgs& a, uint64_t global_seed) {
    Database db = store.load_db();
    DeltaSet pending = store.load_pending();
    ViewDef v = store.view_def(db, a.name);
    MaintenanceStrategy st = build_change_table_strategy(v);
    Store::ViewInfo vi = store.view_info(a.name);
    Relation view_rel = load_relation(store.path(a.name));

    if (a.mode == "full") {
        Relation fresh;
        uint64_t touched = 0;
        if (vi.synced) {
            MaintainResult mr = full_maintain(view_rel, db, pending, st);
            fresh = std::move(mr.view);
            touched = mr.rows_touched;
        } else {
            // the view is behind its own sample; rebuild from the bases
            WorkCounter wc;
            fresh = evaluate(v.def, apply_deltas(db, pending), &wc);
            touched = wc.rows_touched;
        }
        save_relation(fresh, store.path(a.name));
        store.write_view_info(a.name, {vi.tmpl, true});
        if (store.has_sample(a.name)) {
            SampleView old = store.load_sample(a.name);
            store.save_sample(a.name, apply_filter(fresh, old.ratio, old.salt));
        }
        std::cout << "maintained " << a.name << " (full): " << fresh.records.size()
                  << " rows, touched " << touched << "\n";
    } else if (a.mode == "svc") {
        if (!store.has_sample(a.name)) throw Error("view " + a.name + " has no sample");
        SampleView dirty = store.load_sample(a.name);
        CleanResult cr = clean_sample(dirty, db, pending, st);
        store.save_sample(a.name, cr.sample);
        if (total_delta_rows(pending) > 0) store.write_view_info(a.name, {vi.tmpl, false});
        size_t pushed = 0;
        for (auto& l : cr.report.leaves) pushed += l.fully_pushed ? 1 : 0;
        std::cout << "cleaned sample of " << a.name << ": " << cr.sample.rel.records.size()
                  << " rows, touched " << cr.rows_touched << " (" << pushed << "/"
                  << cr.report.leaves.size() << " scans sampled at the source)\n";
    } else {
        throw Error("--mode must be full or svc");
    }
    Database post = apply_deltas(db, pending);
    store.save_db(post);
    store.clear_pending();
}

void cmd_explain(const Store& store, const ExplainArgs& a) {
    Database db = store.load_db();
    ViewDef v = store.view_def(db, a.name);
    MaintenanceStrategy st = build_change_table_strategy(v);
    double ratio = a.ratio;
    uint64_t salt = 0;
    if (ratio <= 0.0) {
        if (!store.has_sample(a.name)) throw Error("pass --ratio or create a sample first");
        SampleView s = store.load_sample(a.name);
        ratio = s.ratio;
        salt = s.salt;
    }
    std::cout << "strategy: " << strategy_name(st.kind) << "\n";
    for (auto& n : st.notes) std::cout << "note: " << n << "\n";
    PushdownReport rep = push_down(hash_filter({st.view_schema.key, ratio, salt}, st.expr));
    std::cout << "\ncleaning expression:\n" << format_expr(rep.original);
    std::cout << "\nafter push-down:\n" << format_expr(rep.rewritten);
    if (!rep.blocked_at.empty()) {
        std::cout << "\nblocked at:\n";
        for (auto& b : rep.blocked_at) std::cout << "  " << b << "\n";
    }
    std::cout << "\nscans:\n";
    for (auto& l : rep.leaves)
        std::cout << "  " << l.name << ": " << (l.fully_pushed ? "sampled at source" : "full scan")
                  << "\n";
}

void cmd_query(const Store& store, const QueryArgs& a, uint64_t seed) {
    Database db = store.load_db();
    DeltaSet pending = store.load_pending();
    ViewDef v = store.view_def(db, a.view);
    MaintenanceStrategy st = build_change_table_strategy(v);
    Store::ViewInfo vi = store.view_info(a.view);
    Relation view_rel = load_relation(store.path(a.view));
    bool have_pending = total_delta_rows(pending) > 0;

    QuerySpec qs;
    qs.agg = parse_qagg(a.agg);
    qs.q = a.q;
    qs.level = a.level;
    if (qs.agg != QAgg::Count) {
        if (a.attr.empty()) throw Error("--attr is required for " + a.agg);
        qs.attr = a.attr;
    }
    if (!a.where.empty()) qs.pred = parse_predicate(a.where);

    auto fresh_view = [&]() -> Relation {
        if (!vi.synced) return evaluate(v.def, apply_deltas(db, pending));
        if (!have_pending) return view_rel;
        return full_maintain(view_rel, db, pending, st).view;
    };
    auto cleaned = [&]() -> SampleView {
        if (!store.has_sample(a.view)) throw Error("view " + a.view + " has no sample");
        SampleView s = store.load_sample(a.view);
        return have_pending ? clean_sample(s, db, pending, st).sample : s;
    };

    print_estimate_header();
    auto run_one = [&](const QuerySpec& q, const std::string& group) {
        if (a.method == "stale") {
            print_estimate(exact_as_estimate(view_rel, q, "stale"), group);
        } else if (a.method == "exact") {
            print_estimate(exact_as_estimate(fresh_view(), q, "exact"), group);
        } else if (a.method == "aqp") {
            SampleView s = cleaned();
            if (!a.outlier.empty()) {
                OutlierIndex idx = load_outlier_index(store.path(a.outlier));
                std::string src = read_kv(store.dir / (a.outlier + ".src")).at("table");
                Database post = apply_deltas(db, pending);
                auto shape = detail::push_up_shape(v.def, src);
                Relation fresh = shape.grouped ? fresh_view() : Relation{};
                ViewOutliers vo = push_up(idx, v.def, src, post, fresh);
                SampleView marked = s;
                mark_outliers(marked, vo.rows);
                print_estimate(merged_estimate(marked, vo.rows, q), group);
            } else if (a.bootstrap > 0) {
                print_estimate(bootstrap_ci(s, q, a.bootstrap, seed), group);
            } else {
                print_estimate(aqp_estimate(s, q), group);
            }
        } else if (a.method == "corr") {
            SampleView clean = cleaned();
            SampleView dirty = apply_filter(view_rel, clean.ratio, clean.salt);
            print_estimate(corr_estimate(view_rel, dirty, clean, q, a.bootstrap, seed), group);
        } else {
            throw Error("unknown method " + a.method);
        }
    };

    if (a.group_by.empty()) {
        run_one(qs, "");
        return;
    }
    const Relation* over;
    Relation fresh_rel;
    SampleView clean_s;
    if (a.method == "stale") {
        over = &view_rel;
    } else if (a.method == "exact") {
        fresh_rel = fresh_view();
        over = &fresh_rel;
    } else {
        clean_s = cleaned();
        over = &clean_s.rel;
    }
    for (auto& [gval, gq] : lower_group_by(*over, a.group_by, qs))
        run_one(gq, encode_field(gval));
}

void cmd_outlier(const Store& store, const OutlierArgs& a) {
    Database db = store.load_db();
    if (!db.has(a.table)) throw Error("no table named " + a.table);
    const Relation& rel = db.get(a.table);
    auto colon = a.mode.find(':');
    if (colon == std::string::npos) throw Error("--mode must be topk:K or sigma:C");
    std::string kind = a.mode.substr(0, colon), arg = a.mode.substr(colon + 1);
    double t;
    if (kind == "topk")
        t = threshold_topk(rel, a.attr, std::stoull(arg));
    else if (kind == "sigma")
        t = threshold_sigma(rel, a.attr, std::stod(arg));
    else
        throw Error("--mode must be topk:K or sigma:C");
    OutlierIndex idx = build_outlier_index(rel, a.attr, t, a.cap);
    std::string stem = a.table + "." + a.attr + ".outlier";
    save_outlier_index(idx, store.path(stem));
    write_kv(store.dir / (stem + ".src"), {{"table", a.table}});
    std::cout << "outlier index " << stem << ": " << idx.rows.records.size()
              << " rows over threshold " << encode_field(Value(t)) << "\n";
}

void cmd_bench(const BenchArgs& a) {
    WorkloadSpec ws = parse_workload_spec(a.spec);
    std::vector<MetricsRow> rows = run_scenario(ws);
    if (a.out.empty()) {
        save_metrics(rows, std::cout);
    } else {
        save_metrics(rows, a.out);
        std::cerr << "wrote " << rows.size() << " rows to " << a.out << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sampled views: stale-view cleaning and approximate answers"};
    app.require_subcommand(1);

    std::string data_dir = "data";
    uint64_t seed = 42;
    app.add_option("--data-dir", data_dir, "data directory")->capture_default_str();
    app.add_option("--seed", seed, "seed for sampling salts and bootstraps")
        ->capture_default_str();

    GenArgs gen;
    auto* cgen = app.add_subcommand("gen", "generate a dataset into the data directory");
    cgen->add_option("--dataset", gen.dataset, "logvideo or star")->capture_default_str();
    cgen->add_option("--dim-rows", gen.dim_rows, "videos / customers")->capture_default_str();
    cgen->add_option("--aux-rows", gen.aux_rows, "products (star only)")->capture_default_str();
    cgen->add_option("--fact-rows", gen.fact_rows, "logs / sales")->capture_default_str();
    cgen->add_option("--zipf", gen.zipf, "skew of the fact foreign keys")->capture_default_str();
    cgen->add_option("--gen-seed", gen.seed, "generator seed")->capture_default_str();

    auto* cview = app.add_subcommand("view", "define, maintain, or explain views");
    cview->require_subcommand(1);

    DefineArgs define;
    auto* cdefine = cview->add_subcommand("define", "materialize a view from a template");
    cdefine->add_option("--name", define.name)->required();
    cdefine->add_option("--template", define.tmpl, "sp, join, or agg")->required();

    MaintainArgs maintain;
    auto* cmaintain = cview->add_subcommand("maintain", "apply pending deltas");
    cmaintain->add_option("--name", maintain.name)->required();
    cmaintain->add_option("--mode", maintain.mode, "full: update the view; svc: clean the sample")
        ->capture_default_str();
    cmaintain->add_option("--ratio", maintain.ratio, "svc: sample the view at this ratio first");
    auto* msalt_opt = cmaintain->add_option("--salt", maintain.salt, "hash salt (default: --seed)");

    ExplainArgs explain;
    auto* cexplain = cview->add_subcommand("explain", "show the pushed-down cleaning plan");
    cexplain->add_option("--name", explain.name)->required();
    cexplain->add_option("--ratio", explain.ratio, "sampling ratio (default: the sample's)");

    SampleArgs sample;
    auto* csample = app.add_subcommand("sample", "manage hash samples");
    csample->require_subcommand(1);
    auto* screate = csample->add_subcommand("create", "hash-sample a materialized view");
    screate->add_option("--view", sample.view)->required();
    screate->add_option("--ratio", sample.ratio)->capture_default_str();
    auto* salt_opt = screate->add_option("--salt", sample.salt, "hash salt (default: --seed)");

    auto* cdelta = app.add_subcommand("delta", "queue updates against base tables");
    cdelta->require_subcommand(1);

    DeltaGenArgs dgen;
    auto* cdgen = cdelta->add_subcommand("gen", "generate synthetic deltas for the fact table");
    cdgen->add_option("--fraction", dgen.fraction, "delta rows as a share of the fact table")
        ->capture_default_str();
    cdgen->add_option("--mix", dgen.mix, "insert,update,delete fractions")->capture_default_str();
    cdgen->add_option("--delta-seed", dgen.seed)->capture_default_str();
    cdgen->add_option("--out", dgen.out, "also write the deltas as an op-column csv");

    IngestArgs ingest;
    auto* cingest = cdelta->add_subcommand("ingest", "queue deltas from an op-column csv");
    cingest->add_option("--table", ingest.table)->required();
    cingest->add_option("--file", ingest.file)->required();

    QueryArgs query;
    auto* cquery = app.add_subcommand("query", "aggregate over a view");
    cquery->add_option("--view", query.view)->required();
    cquery->add_option("--agg", query.agg, "sum count avg min max median percentile")
        ->capture_default_str();
    cquery->add_option("--attr", query.attr, "aggregated attribute");
    cquery->add_option("--where", query.where, "predicate, e.g. watch>100");
    cquery->add_option("--group-by", query.group_by, "group attribute");
    cquery->add_option("--method", query.method, "stale exact aqp corr")->capture_default_str();
    cquery->add_option("--q", query.q, "percentile rank")->capture_default_str();
    cquery->add_option("--level", query.level, "confidence level")->capture_default_str();
    cquery->add_option("--bootstrap", query.bootstrap, "bootstrap replicates (0: normal interval)");
    cquery->add_option("--outlier-index", query.outlier, "outlier index stem (aqp only)");

    OutlierArgs outlier;
    auto* coutlier = app.add_subcommand("outlier", "manage outlier indexes");
    coutlier->require_subcommand(1);
    auto* obuild = coutlier->add_subcommand("build", "index the heaviest rows of a table");
    obuild->add_option("--table", outlier.table)->required();
    obuild->add_option("--attr", outlier.attr)->required();
    obuild->add_option("--mode", outlier.mode, "topk:K or sigma:C")->required();
    obuild->add_option("--cap", outlier.cap, "most rows kept")->capture_default_str();

    BenchArgs bench;
    auto* cbench = app.add_subcommand("bench", "run benchmark scenarios");
    cbench->require_subcommand(1);
    auto* brun = cbench->add_subcommand("run", "run one scenario spec");
    brun->add_option("--spec", bench.spec, "key=value scenario file")->required();
    brun->add_option("--out", bench.out, "metrics csv path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        Store store{fs::path(data_dir)};
        if (*cgen) cmd_gen(store, gen);
        if (*cdefine) cmd_define(store, define);
        if (*screate) {
            sample.salt_set = salt_opt->count() > 0;
            cmd_sample(store, sample, seed);
        }
        if (*cdgen) cmd_delta_gen(store, dgen);
        if (*cingest) cmd_ingest(store, ingest);
        if (*cmaintain) {
            maintain.salt_set = msalt_opt->count() > 0;
            cmd_maintain(store, maintain, seed);
        }
        if (*cexplain) cmd_explain(store, explain);
        if (*cquery) cmd_query(store, query, seed);
        if (*obuild) cmd_outlier(store, outlier);
        if (*brun) cmd_bench(bench);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

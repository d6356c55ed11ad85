#include <catch2/catch_amalgamated.hpp>

#include "support/testutil.hpp"

using namespace svc;

namespace {

Schema log_schema() {
    return tu::make_schema({{"logId", ValueType::Int64},
                            {"videoId", ValueType::Int64},
                            {"watch", ValueType::Int64}},
                           {"logId"});
}

Schema video_schema() {
    return tu::make_schema({{"videoId", ValueType::Int64}, {"ownerId", ValueType::Int64}},
                           {"videoId"});
}

Database small_db() {
    Database db;
    db.put("log", tu::make_rel(log_schema(), {
                                                 {Value(int64_t{1}), Value(int64_t{10}), Value(int64_t{5})},
                                                 {Value(int64_t{2}), Value(int64_t{10}), Value(int64_t{30})},
                                                 {Value(int64_t{3}), Value(int64_t{11}), Value(int64_t{50})},
                                                 {Value(int64_t{4}), Value(int64_t{12}), Value::null()},
                                             }));
    db.put("video", tu::make_rel(video_schema(), {
                                                     {Value(int64_t{10}), Value(int64_t{100})},
                                                     {Value(int64_t{11}), Value(int64_t{100})},
                                                     {Value(int64_t{13}), Value(int64_t{200})},
                                                 }));
    return db;
}

}  // namespace

TEST_CASE("key derivation follows the operator rules") {
    auto log = base("log", log_schema());
    auto video = base("video", video_schema());

    SECTION("select and hash filters inherit the child key") {
        CHECK(derive_keys(select(gt(col("watch"), lit(int64_t{10})), log)).key ==
              std::vector<std::string>{"logId"});
        CHECK(derive_keys(hash_filter({{"logId"}, 0.5, 7}, log)).key ==
              std::vector<std::string>{"logId"});
    }

    SECTION("projection must retain the key as identity columns") {
        auto ok = project({{"logId", col("logId")}, {"watch", col("watch")}}, log);
        CHECK(derive_keys(ok).key == std::vector<std::string>{"logId"});
        auto renamed = project({{"lid", col("logId")}, {"watch", col("watch")}}, log);
        CHECK_THROWS_AS(derive_keys(renamed), Error);
        auto dropped = project({{"watch", col("watch")}}, log);
        CHECK_THROWS_AS(derive_keys(dropped), Error);
    }

    SECTION("join concatenates keys, collapsing merged equality columns") {
        auto j = join(JoinKind::Inner, {{"videoId", CmpOp::Eq, "videoId"}}, log, video);
        Schema s = derive_keys(j);
        CHECK(s.key == std::vector<std::string>{"logId", "videoId"});
        // the merged videoId column appears once
        size_t vid_cols = 0;
        for (auto& a : s.attrs)
            if (a.name == "videoId") ++vid_cols;
        CHECK(vid_cols == 1);
        CHECK(s.has("ownerId"));
    }

    SECTION("aggregate keys on its group attributes") {
        auto g = aggregate({"videoId"}, {{AggFn::Count, "", "cnt"}}, log);
        CHECK(derive_keys(g).key == std::vector<std::string>{"videoId"});
        CHECK(derive_keys(g).attr("cnt").type == ValueType::Int64);
        auto a = aggregate({"videoId"}, {{AggFn::Avg, "watch", "w"}}, log);
        CHECK(derive_keys(a).attr("w").type == ValueType::Float64);
        auto bad = aggregate({"videoId"}, {{AggFn::Sum, "tag", "s"}},
                             project({{"logId", col("logId")},
                                      {"videoId", col("videoId")},
                                      {"tag", lit(Value("x"))}},
                                     log));
        CHECK_THROWS_AS(derive_keys(bad), Error);
    }

    SECTION("set operations combine keys by union, intersection, left") {
        Schema s2 = tu::make_schema({{"logId", ValueType::Int64},
                                     {"videoId", ValueType::Int64},
                                     {"watch", ValueType::Int64}},
                                    {"videoId"});
        auto l = base("log", log_schema());
        auto r = base("log2", s2);
        CHECK(derive_keys(union_(l, r)).key == std::vector<std::string>{"logId", "videoId"});
        CHECK_THROWS_AS(derive_keys(intersect(l, r)), Error);  // no common key attribute
        CHECK(derive_keys(difference(l, r)).key == std::vector<std::string>{"logId"});
        CHECK(derive_keys(intersect(l, base("log3", log_schema()))).key ==
              std::vector<std::string>{"logId"});
    }

    SECTION("hash filter keying is checked against the derived key") {
        CHECK_THROWS_AS(derive_keys(hash_filter({{"videoId"}, 0.5, 7}, log)), Error);
        CHECK_NOTHROW(derive_keys(hash_filter({{"videoId"}, 0.5, 7}, log, true)));
        CHECK_THROWS_AS(derive_keys(hash_filter({{"logId"}, 1.5, 7}, log)), Error);
        CHECK_THROWS_AS(derive_keys(hash_filter({{"logId"}, -0.1, 7}, log)), Error);
    }

    SECTION("base relations must declare a key") {
        Schema nokey;
        nokey.attrs = {{"x", ValueType::Int64}};
        CHECK_THROWS_AS(derive_keys(base("t", nokey)), Error);
    }
}

TEST_CASE("evaluation semantics") {
    Database db = small_db();
    auto log = base("log", log_schema());
    auto video = base("video", video_schema());

    SECTION("select keeps rows whose predicate is true; null compares false") {
        Relation out = evaluate(select(gt(col("watch"), lit(int64_t{10})), log), db);
        CHECK(out.size() == 2);  // the null-watch row is excluded
        Relation all = evaluate(select(lit(Value(int64_t{1})), log), db);
        CHECK(same_records(all, db.get("log")));
    }

    SECTION("project computes named scalars") {
        Relation out = evaluate(
            project({{"logId", col("logId")}, {"double_watch", mul(col("watch"), lit(int64_t{2}))}},
                    log),
            db);
        REQUIRE(out.size() == 4);
        CHECK(out.records[1][1] == Value(int64_t{60}));
        CHECK(out.records[3][1].is_null());  // null propagates through arithmetic
    }

    SECTION("set operations are keyed set semantics") {
        Relation r = db.get("log");
        CHECK(same_records(evaluate(union_(log, log), db), r));
        CHECK(evaluate(difference(log, log), db).empty());
        CHECK(same_records(evaluate(intersect(log, log), db), r));

        auto top = select(gt(col("watch"), lit(int64_t{20})), log);
        Relation u = evaluate(union_(top, log), db);
        CHECK(same_records(u, r));
        Relation d = evaluate(difference(log, top), db);
        CHECK(d.size() == 2);
    }

    SECTION("union refuses conflicting records for one key") {
        auto clipped = project({{"logId", col("logId")},
                                {"videoId", col("videoId")},
                                {"watch", lit(Value(int64_t{0}))}},
                               log);
        auto plain = project({{"logId", col("logId")},
                              {"videoId", col("videoId")},
                              {"watch", col("watch")}},
                             log);
        CHECK_THROWS_WITH(evaluate(union_(plain, clipped), db),
                          Catch::Matchers::ContainsSubstring("conflicting"));
    }

    SECTION("grouped aggregation") {
        Relation out = evaluate(aggregate({"videoId"},
                                          {{AggFn::Count, "", "cnt"},
                                           {AggFn::Count, "watch", "cntw"},
                                           {AggFn::Sum, "watch", "total"},
                                           {AggFn::Min, "watch", "lo"},
                                           {AggFn::Max, "watch", "hi"}},
                                          log),
                                db);
        REQUIRE(out.size() == 3);
        auto idx = out.key_index();
        const Record& v10 = out.records[idx.at("10")];
        CHECK(v10[1] == Value(int64_t{2}));
        CHECK(v10[2] == Value(int64_t{2}));
        CHECK(v10[3] == Value(int64_t{35}));
        CHECK(v10[4] == Value(int64_t{5}));
        CHECK(v10[5] == Value(int64_t{30}));
        // count(attr) skips nulls; sum of only-null group is null
        const Record& v12 = out.records[idx.at("12")];
        CHECK(v12[1] == Value(int64_t{1}));
        CHECK(v12[2] == Value(int64_t{0}));
        CHECK(v12[3].is_null());
        CHECK(v12[4].is_null());
    }

    SECTION("ungrouped aggregation over empty input yields one row") {
        auto none = select(lit(Value(int64_t{0})), log);
        Relation out = evaluate(aggregate({}, {{AggFn::Count, "", "cnt"}, {AggFn::Sum, "watch", "t"}},
                                          none),
                                db);
        REQUIRE(out.size() == 1);
        CHECK(out.records[0][0] == Value(int64_t{0}));
        CHECK(out.records[0][1].is_null());
        CHECK_THROWS_AS(evaluate(aggregate({}, {{AggFn::Avg, "watch", "a"}}, none), db), Error);
        // grouped aggregation over empty input is simply empty
        CHECK(evaluate(aggregate({"videoId"}, {{AggFn::Count, "", "c"}}, none), db).empty());
    }

    SECTION("inner join matches equality conjuncts and applies the rest") {
        auto j = join(JoinKind::Inner, {{"videoId", CmpOp::Eq, "videoId"}}, log, video);
        Relation out = evaluate(j, db);
        CHECK(out.size() == 3);  // videoId 12 and 13 find no partner
        auto filtered = join(JoinKind::Inner,
                             {{"videoId", CmpOp::Eq, "videoId"}, {"watch", CmpOp::Lt, "ownerId"}},
                             log, video);
        CHECK(evaluate(filtered, db).size() == 3);  // null watch row already unmatched
    }

    SECTION("outer joins pad the missing side with nulls") {
        auto l = join(JoinKind::Left, {{"videoId", CmpOp::Eq, "videoId"}}, log, video);
        Relation lout = evaluate(l, db);
        CHECK(lout.size() == 4);
        auto idx = lout.schema.index_of("ownerId");
        size_t nulls = 0;
        for (auto& rec : lout.records)
            if (rec[static_cast<size_t>(idx)].is_null()) ++nulls;
        CHECK(nulls == 1);

        auto f = join(JoinKind::Full, {{"videoId", CmpOp::Eq, "videoId"}}, log, video);
        Relation fout = evaluate(f, db);
        CHECK(fout.size() == 5);  // 3 matches + unmatched log row + unmatched video row
        // the merged videoId column is filled from whichever side is present
        auto vi = fout.schema.index_of("videoId");
        for (auto& rec : fout.records) CHECK_FALSE(rec[static_cast<size_t>(vi)].is_null());
    }

    SECTION("evaluation is deterministic") {
        auto tree = aggregate({"videoId"}, {{AggFn::Count, "", "cnt"}},
                              select(ge(col("watch"), lit(int64_t{0})), log));
        Relation a = evaluate(tree, db), b = evaluate(tree, db);
        REQUIRE(a.records.size() == b.records.size());
        for (size_t i = 0; i < a.records.size(); ++i) CHECK(a.records[i] == b.records[i]);
    }
}

TEST_CASE("surrogate keys") {
    Schema s;
    s.attrs = {{"x", ValueType::Int64}};
    Relation r;
    r.schema = s;
    r.records = {{Value(int64_t{7})}, {Value(int64_t{7})}};

    Relation keyed = add_surrogate_key(r);
    CHECK(keyed.schema.key == std::vector<std::string>{"_rid"});
    CHECK(keyed.records[0].back() == Value(int64_t{0}));
    CHECK(keyed.records[1].back() == Value(int64_t{1}));
    CHECK_NOTHROW(keyed.check_keys());

    CHECK_THROWS_AS(add_surrogate_key(keyed), Error);  // already keyed
    Relation clash;
    clash.schema.attrs = {{"_rid", ValueType::Int64}};
    clash.records = {{Value(int64_t{1})}};
    CHECK_THROWS_AS(add_surrogate_key(clash), Error);
}

TEST_CASE("work counter attributes rows to leaves and operators") {
    Database db = small_db();
    auto log = base("log", log_schema());

    WorkCounter wc;
    evaluate(select(gt(col("watch"), lit(int64_t{10})), log), db, &wc);
    // 4 rows emitted by the scan + 2 rows emitted by the select
    CHECK(wc.rows_touched == 6);
    CHECK(wc.per_leaf.at("log") == 4);

    // a hash filter directly on a leaf is fused: only admitted rows count
    WorkCounter wf;
    Relation sampled = evaluate(hash_filter({{"logId"}, 0.5, 11}, log), db, &wf);
    CHECK(wf.rows_touched == sampled.size());
    CHECK(wf.per_leaf.at("log") == sampled.size());

    // the same filter above a select is not fused
    WorkCounter wn;
    auto sel = select(lit(Value(int64_t{1})), log);
    Relation sampled2 = evaluate(hash_filter({{"logId"}, 0.5, 11}, sel), db, &wn);
    CHECK(wn.rows_touched == 4 + 4 + sampled2.size());
}

TEST_CASE("every operator output keeps keys unique", "[property]") {
    std::mt19937_64 rng(20260819);
    tu::TreePool pool = tu::make_tree_pool(rng, 80);
    tu::TreeStats st;
    for (int i = 0; i < 120; ++i) {
        ExprPtr t = tu::random_tree(rng, pool, 1 + static_cast<int>(rng() % 4), st);
        Relation out = evaluate(t, pool.db);
        CHECK_NOTHROW(out.check_keys());
        CHECK_NOTHROW(out.check_types());
        CHECK(out.schema.attrs == derive_keys(t).attrs);
    }
}

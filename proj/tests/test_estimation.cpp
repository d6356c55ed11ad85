#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "support/testutil.hpp"

using namespace svc;

namespace {

// ten keyed rows with chosen values; ratio/salt applied by hand where needed
SampleView sample_of(const std::vector<double>& vals, double ratio, uint64_t salt) {
    Relation r = tu::id_value_rel(vals.size(), [&](size_t i) { return Value(vals[i]); });
    SampleView s;
    s.rel = std::move(r);
    s.ratio = ratio;
    s.salt = salt;
    return s;
}

QuerySpec q_sum(ScalarPtr pred = nullptr) {
    QuerySpec qs;
    qs.agg = QAgg::Sum;
    qs.attr = "v";
    qs.pred = pred;
    return qs;
}

QuerySpec q_count(ScalarPtr pred = nullptr) {
    QuerySpec qs;
    qs.agg = QAgg::Count;
    qs.pred = pred;
    return qs;
}

QuerySpec q_agg(QAgg a) {
    QuerySpec qs;
    qs.agg = a;
    qs.attr = "v";
    return qs;
}

}  // namespace

TEST_CASE("normal quantile approximation") {
    CHECK(detail::probit(0.5) == Catch::Approx(0.0).margin(1e-9));
    CHECK(detail::probit(0.975) == Catch::Approx(1.959964).margin(1e-4));
    CHECK(detail::probit(0.025) == Catch::Approx(-1.959964).margin(1e-4));
    CHECK(detail::probit(0.995) == Catch::Approx(2.575829).margin(1e-4));
    CHECK(detail::probit(0.0001) == Catch::Approx(-3.719016).margin(1e-3));
    CHECK(detail::z_for(0.95) == Catch::Approx(1.959964).margin(1e-4));
    CHECK_THROWS_AS(detail::probit(0.0), Error);
    CHECK_THROWS_AS(detail::probit(1.0), Error);
}

TEST_CASE("nearest-rank quantiles") {
    std::vector<double> v{5, 1, 3, 2, 4};
    CHECK(detail::quantile_nearest_rank(v, 0.5) == 3.0);
    CHECK(detail::quantile_nearest_rank(v, 0.25) == 2.0);
    CHECK(detail::quantile_nearest_rank(v, 1.0) == 5.0);
    CHECK(detail::quantile_nearest_rank(v, 0.01) == 1.0);
    CHECK_THROWS_AS(detail::quantile_nearest_rank({}, 0.5), DataError);
}

TEST_CASE("the sum transform scales matching rows by the inverse ratio") {
    Schema s = tu::make_schema({{"id", ValueType::Int64}, {"v", ValueType::Float64}}, {"id"});
    SampleView sv;
    sv.rel = tu::make_rel(s, {{Value(int64_t{0}), Value(7.0)},
                              {Value(int64_t{1}), Value(3.0)},
                              {Value(int64_t{2}), Value::null()},
                              {Value(int64_t{3}), Value(1.0)}});
    sv.ratio = 0.5;

    auto pred = gt(col("v"), lit(2.0));
    auto tr = detail::sum_count_transform(sv, q_sum(pred));
    REQUIRE(tr.t.size() == 4);
    CHECK(tr.t[0] == 14.0);  // 7 / 0.5
    CHECK(tr.t[1] == 6.0);
    CHECK(tr.t[2] == 0.0);  // null compares false
    CHECK(tr.t[3] == 0.0);  // fails the predicate
    CHECK(tr.matching == 2);

    auto cr = detail::sum_count_transform(sv, q_count(pred));
    CHECK(cr.t[0] == 2.0);  // 1 / 0.5
    CHECK(cr.t[1] == 2.0);
    CHECK(cr.matching == 2);

    // outlier-flagged rows are excluded from the transform entirely
    sv.outlier = {1, 0, 0, 0};
    auto tro = detail::sum_count_transform(sv, q_sum(pred));
    CHECK(tro.t.size() == 3);
    CHECK(tro.matching == 1);
}

TEST_CASE("exact_query agrees with hand evaluation") {
    Relation r = tu::id_value_rel(6, [](size_t i) { return Value(static_cast<double>(i * 10)); });
    // values 0,10,20,30,40,50
    CHECK(exact_query(r, q_count()) == 6.0);
    CHECK(exact_query(r, q_sum()) == 150.0);
    CHECK(exact_query(r, q_agg(QAgg::Avg)) == 25.0);
    CHECK(exact_query(r, q_agg(QAgg::Min)) == 0.0);
    CHECK(exact_query(r, q_agg(QAgg::Max)) == 50.0);
    CHECK(exact_query(r, q_agg(QAgg::Median)) == 20.0);  // nearest rank of 6
    QuerySpec p = q_agg(QAgg::Percentile);
    p.q = 0.9;
    CHECK(exact_query(r, p) == 50.0);

    auto pred = ge(col("v"), lit(30.0));
    CHECK(exact_query(r, q_count(pred)) == 3.0);
    CHECK(exact_query(r, q_sum(pred)) == 120.0);

    QuerySpec bad = q_sum();
    bad.attr = "nope";
    CHECK_THROWS_AS(exact_query(r, bad), Error);
    auto never = lt(col("v"), lit(-1.0));
    QuerySpec a = q_agg(QAgg::Avg);
    a.pred = never;
    CHECK_THROWS_AS(exact_query(r, a), DataError);
}

TEST_CASE("aqp point estimates and intervals") {
    SECTION("a full sample collapses to the exact answer") {
        SampleView s = sample_of({1, 2, 3, 4, 5}, 1.0, 0);
        for (QAgg a : {QAgg::Sum, QAgg::Count, QAgg::Avg, QAgg::Median}) {
            Estimate e = aqp_estimate(s, q_agg(a));
            CHECK(e.value == exact_query(s.rel, q_agg(a)));
            CHECK(e.lo == e.value);
            CHECK(e.hi == e.value);
            CHECK(e.variance == 0.0);
        }
    }

    SECTION("sum interval uses the second moment of the transform") {
        SampleView s = sample_of({1, 2}, 0.5, 0);
        Estimate e = aqp_estimate(s, q_sum());
        CHECK(e.value == 6.0);  // (1+2)/0.5
        // variance = (1-m) * sum t^2 = 0.5 * (4 + 16) = 10
        CHECK(e.variance == Catch::Approx(10.0));
        CHECK(e.hi - e.lo == Catch::Approx(2 * 1.959964 * std::sqrt(10.0)).margin(1e-3));
        CHECK(e.rows_used == 2);
    }

    SECTION("avg interval shrinks with the matched row count") {
        SampleView s = sample_of({1, 2, 3, 4, 5}, 0.5, 0);
        Estimate e = aqp_estimate(s, q_agg(QAgg::Avg));
        CHECK(e.value == Catch::Approx(3.0));
        // var = (1-m) sd^2 / k = 0.5 * 2.5 / 5 = 0.25
        CHECK(e.variance == Catch::Approx(0.25));
        CHECK(e.hi == Catch::Approx(3.0 + 1.959964 * 0.5).margin(1e-3));
    }

    SECTION("quantile estimates bootstrap their interval deterministically") {
        std::vector<double> vals;
        for (int i = 0; i < 60; ++i) vals.push_back(static_cast<double>(i % 17));
        SampleView s = sample_of(vals, 0.3, 0);
        Estimate a = aqp_estimate(s, q_agg(QAgg::Median));
        Estimate b = aqp_estimate(s, q_agg(QAgg::Median));
        CHECK(a.value == b.value);
        CHECK(a.lo == b.lo);
        CHECK(a.hi == b.hi);
        CHECK(a.lo <= a.value);
        CHECK(a.hi >= a.value);
    }

    SECTION("an empty matching set is an error, not a zero") {
        SampleView s = sample_of({1, 2, 3}, 0.5, 0);
        QuerySpec qs = q_agg(QAgg::Avg);
        qs.pred = lt(col("v"), lit(-5.0));
        CHECK_THROWS_AS(aqp_estimate(s, qs), DataError);
        // sum and count of nothing are well-defined zeros
        QuerySpec qsum = q_sum(lt(col("v"), lit(-5.0)));
        CHECK(aqp_estimate(s, qsum).value == 0.0);
    }
}

TEST_CASE("aqp sampling is unbiased over salts") {
    Relation r = tu::id_value_rel(400, [](size_t i) { return Value(std::pow(1.01, i)); });
    double truth_sum = exact_query(r, q_sum());
    double truth_cnt = 400.0;

    const size_t trials = 300;
    std::vector<double> sums, cnts;
    for (uint64_t t = 0; t < trials; ++t) {
        SampleView s = apply_filter(r, 0.2, t + 1);
        if (s.rel.empty()) continue;
        sums.push_back(aqp_estimate(s, q_sum()).value);
        cnts.push_back(aqp_estimate(s, q_count()).value);
    }
    double se_sum = tu::sample_sd(sums) / std::sqrt(static_cast<double>(sums.size()));
    double se_cnt = tu::sample_sd(cnts) / std::sqrt(static_cast<double>(cnts.size()));
    CHECK(std::abs(tu::mean_of(sums) - truth_sum) < 4 * se_sum);
    CHECK(std::abs(tu::mean_of(cnts) - truth_cnt) < 4 * se_cnt);
}

TEST_CASE("bootstrap intervals are seeded and collapse on constants") {
    SampleView s = sample_of({3, 3, 3, 3, 3, 3}, 0.5, 0);
    Estimate e = bootstrap_ci(s, q_count(), 500, 42);
    CHECK(e.lo == e.value);
    CHECK(e.hi == e.value);  // every resample gives the same count transform

    std::vector<double> mixed{1, 5, 2, 8, 3, 9, 4, 7};
    SampleView sm = sample_of(mixed, 0.5, 0);
    Estimate a = bootstrap_ci(sm, q_sum(), 400, 1);
    Estimate b = bootstrap_ci(sm, q_sum(), 400, 1);
    Estimate c = bootstrap_ci(sm, q_sum(), 400, 2);
    CHECK(a.lo == b.lo);
    CHECK(a.hi == b.hi);
    CHECK((a.lo != c.lo || a.hi != c.hi));
    CHECK(a.lo < a.value);
    CHECK(a.hi > a.value);

    SampleView full = sample_of(mixed, 1.0, 0);
    Estimate f = bootstrap_ci(full, q_sum(), 400, 1);
    CHECK(f.lo == f.hi);
}

TEST_CASE("correction reproduces the exact answer when nothing changed") {
    Relation stale = tu::id_value_rel(200, [](size_t i) { return Value(static_cast<double>(i)); });
    SampleView dirty = apply_filter(stale, 0.3, 5);
    SampleView clean = dirty;  // no deltas

    for (QAgg a : {QAgg::Sum, QAgg::Count, QAgg::Avg}) {
        Estimate e = corr_estimate(stale, dirty, clean, q_agg(a));
        CHECK(e.method == "corr");
        CHECK(e.value == Catch::Approx(exact_query(stale, q_agg(a))));
    }
    Estimate es = corr_estimate(stale, dirty, clean, q_sum());
    CHECK(es.variance == 0.0);
    CHECK(es.lo == es.value);
    CHECK(es.hi == es.value);
}

TEST_CASE("correction shifts the stale answer by the sampled drift") {
    Relation stale = tu::id_value_rel(50, [](size_t) { return Value(10.0); });
    SampleView dirty = apply_filter(stale, 0.4, 3);
    REQUIRE(dirty.rel.size() > 2);

    // the fresh view bumps every sampled key's value by 2
    SampleView clean = dirty;
    for (auto& rec : clean.rel.records) rec[1] = Value(12.0);

    Estimate e = corr_estimate(stale, dirty, clean, q_sum());
    double k = static_cast<double>(dirty.rel.size());
    CHECK(e.value == Catch::Approx(500.0 + k * 2.0 / 0.4));

    // count stays put: same keys on both sides
    Estimate c = corr_estimate(stale, dirty, clean, q_count());
    CHECK(c.value == Catch::Approx(50.0));
    CHECK(c.variance == 0.0);

    // avg moves by the paired mean difference
    Estimate av = corr_estimate(stale, dirty, clean, q_agg(QAgg::Avg));
    CHECK(av.value == Catch::Approx(12.0));
}

TEST_CASE("corr and aqp agree with each other under identical inputs") {
    // when the stale view is empty of signal (all zeros) and every sampled key
    // drifts to its fresh value, corr == aqp(sum) exactly
    Relation stale = tu::id_value_rel(100, [](size_t) { return Value(0.0); });
    SampleView dirty = apply_filter(stale, 0.25, 9);
    SampleView clean = dirty;
    std::mt19937_64 rng(1);
    for (auto& rec : clean.rel.records)
        rec[1] = Value(static_cast<double>(rng() % 50));

    Estimate corr = corr_estimate(stale, dirty, clean, q_sum());
    Estimate aqp = aqp_estimate(clean, q_sum());
    CHECK(corr.value == Catch::Approx(aqp.value));
}

TEST_CASE("estimators require a shared sampling identity") {
    Relation r = tu::id_value_rel(60, [](size_t i) { return Value(static_cast<double>(i)); });
    SampleView a = apply_filter(r, 0.3, 1);
    SampleView b = apply_filter(r, 0.3, 2);
    SampleView c = apply_filter(r, 0.5, 1);
    CHECK_THROWS_AS(corr_estimate(r, a, b, q_sum()), Error);
    CHECK_THROWS_AS(corr_estimate(r, a, c, q_sum()), Error);
    CHECK_THROWS_AS(break_even(a, b, q_sum()), Error);
    CHECK_THROWS_AS(select_correct(a, b), Error);
}

TEST_CASE("break-even prefers correction until the data shuffles away") {
    Relation stale = tu::id_value_rel(300, [](size_t i) { return Value(1.0 + (i % 7)); });
    SampleView dirty = apply_filter(stale, 0.3, 11);
    REQUIRE(dirty.rel.size() > 10);

    SECTION("zero drift: correction is free") {
        SampleView clean = dirty;
        BreakEven be = break_even(dirty, clean, q_sum());
        CHECK(be.prefer_corr);
        CHECK(be.corr_variance == 0.0);
        CHECK(be.dirty_moment == Catch::Approx(be.cross_moment));
    }

    SECTION("negated values: correction doubles the noise") {
        SampleView clean = dirty;
        for (auto& rec : clean.rel.records) rec[1] = Value(-rec[1].as_float());
        BreakEven be = break_even(dirty, clean, q_sum());
        CHECK_FALSE(be.prefer_corr);
        CHECK(be.cross_moment < 0.0);
        CHECK(be.corr_variance > be.aqp_variance);
    }

    SECTION("the same flip decides ratio aggregates on matched pairs") {
        SampleView clean = dirty;
        BreakEven same = break_even(dirty, clean, q_agg(QAgg::Avg));
        CHECK(same.prefer_corr);
        for (auto& rec : clean.rel.records) rec[1] = Value(-rec[1].as_float());
        BreakEven neg = break_even(dirty, clean, q_agg(QAgg::Avg));
        CHECK_FALSE(neg.prefer_corr);
    }
}

TEST_CASE("select queries return cleaned rows plus change-rate estimates") {
    Schema s = tu::make_schema({{"id", ValueType::Int64}, {"v", ValueType::Float64}}, {"id"});
    SampleView dirty;
    dirty.rel = tu::make_rel(s, {{Value(int64_t{1}), Value(1.0)},
                                 {Value(int64_t{2}), Value(2.0)},
                                 {Value(int64_t{3}), Value(3.0)}});
    dirty.ratio = 0.25;
    dirty.salt = 7;
    SampleView clean;
    clean.rel = tu::make_rel(s, {{Value(int64_t{1}), Value(1.0)},   // unchanged
                                 {Value(int64_t{2}), Value(9.0)},   // updated
                                 {Value(int64_t{4}), Value(4.0)}}); // inserted; 3 removed
    clean.ratio = 0.25;
    clean.salt = 7;

    SelectCorrection sc = select_correct(dirty, clean, 0.95);
    CHECK(same_records(sc.rows, clean.rel));
    CHECK(sc.updated.value == 4.0);   // 1 / 0.25
    CHECK(sc.inserted.value == 4.0);
    CHECK(sc.removed.value == 4.0);
    CHECK(sc.updated.rows_used == 1);
    // var = (1-m) k / m^2 = 0.75 / 0.0625 = 12
    CHECK(sc.updated.variance == Catch::Approx(12.0));
    CHECK(sc.updated.lo == Catch::Approx(4.0 - 1.959964 * std::sqrt(12.0)).margin(1e-3));
}

TEST_CASE("extremes carry a Cantelli confidence") {
    SECTION("single sample: the extreme bounds one side") {
        SampleView s = sample_of({0, 1, 2}, 0.5, 0);
        Estimate mx = minmax_estimate(s, q_agg(QAgg::Max));
        CHECK(mx.value == 2.0);
        // mean 1, sample variance 1, eps 1 -> tail 1/2
        CHECK(mx.confidence == Catch::Approx(0.5));
        Estimate mn = minmax_estimate(s, q_agg(QAgg::Min));
        CHECK(mn.value == 0.0);
        CHECK(mn.confidence == Catch::Approx(0.5));

        // a sample whose extreme sits far out in its own spread is trustworthy
        SampleView t = sample_of({1, 1, 1, 1, 1, 1, 1, 1, 100}, 0.5, 0);
        CHECK(minmax_estimate(t, q_agg(QAgg::Max)).confidence > 0.85);
    }

    SECTION("corrected extreme shifts the stale answer by the largest drift") {
        Relation stale = tu::id_value_rel(40, [](size_t i) { return Value(static_cast<double>(i)); });
        SampleView dirty = apply_filter(stale, 0.5, 21);
        REQUIRE(dirty.rel.size() > 4);
        SampleView clean = dirty;
        // every sampled key drifts up by 1, one by 5
        for (auto& rec : clean.rel.records) rec[1] = Value(rec[1].as_float() + 1.0);
        clean.rel.records[2][1] = Value(dirty.rel.records[2][1].as_float() + 5.0);

        Estimate mx = corr_estimate(stale, dirty, clean, q_agg(QAgg::Max));
        CHECK(mx.value == 39.0 + 5.0);
        CHECK(mx.method == "corr");
        CHECK(mx.confidence > 0.0);

        Estimate mn = corr_estimate(stale, dirty, clean, q_agg(QAgg::Min));
        CHECK(mn.value == 0.0 + 1.0);  // smallest drift is +1
    }

    SECTION("no paired keys means no corrected extreme") {
        Relation stale = tu::id_value_rel(10, [](size_t i) { return Value(static_cast<double>(i)); });
        SampleView dirty = apply_filter(stale, 0.4, 2);
        SampleView clean;
        clean.rel.schema = dirty.rel.schema;
        clean.ratio = 0.4;
        clean.salt = 2;
        CHECK_THROWS_AS(corr_estimate(stale, dirty, clean, q_agg(QAgg::Max)), DataError);
    }
}

TEST_CASE("selectivity adjustment is a plain product with guardrails") {
    CHECK(selectivity_adjust(100.0, 0.25) == 25.0);
    CHECK(selectivity_adjust(0.0, 0.9) == 0.0);
    CHECK_THROWS_AS(selectivity_adjust(10.0, -0.1), Error);
    CHECK_THROWS_AS(selectivity_adjust(10.0, 1.5), Error);
}

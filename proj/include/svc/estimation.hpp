#pragma once

#include <algorithm>
#include <random>

#include "svc/sample.hpp"

namespace svc {

enum class QAgg { Sum, Count, Avg, Min, Max, Median, Percentile };

inline const char* qagg_name(QAgg a) {
    switch (a) {
        case QAgg::Sum: return "sum";
        case QAgg::Count: return "count";
        case QAgg::Avg: return "avg";
        case QAgg::Min: return "min";
        case QAgg::Max: return "max";
        case QAgg::Median: return "median";
        case QAgg::Percentile: return "percentile";
    }
    return "?";
}

struct QuerySpec {
    QAgg agg = QAgg::Count;
    std::string attr;  // ignored for count
    ScalarPtr pred;    // all rows when null
    double q = 0.5;    // percentile rank, Percentile only
    double level = 0.95;

    std::string describe() const {
        std::string s = qagg_name(agg);
        s += "(";
        s += (agg == QAgg::Count ? "*" : attr);
        s += ")";
        return s;
    }
};

struct Estimate {
    std::string method;  // stale | exact | aqp | corr | minmax | select
    std::string agg;
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double level = 0.95;     // requested two-sided coverage for [lo, hi]
    double confidence = 0.0; // Cantelli bound, min/max only
    size_t rows_used = 0;    // sample rows matching the predicate
    double variance = 0.0;
    std::string note;
};

namespace detail {

// Acklam's rational approximation to the standard normal quantile
inline double probit(double p) {
    if (!(p > 0.0 && p < 1.0)) throw Error("probit needs p in (0,1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1.0 - plow;
    double x;
    if (p < plow) {
        double u = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
            ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
    } else if (p <= phigh) {
        double u = p - 0.5, r = u * u;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * u /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double u = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
            ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
    }
    return x;
}

inline double z_for(double level) { return probit(0.5 + level / 2.0); }

inline double quantile_nearest_rank(std::vector<double> v, double q) {
    if (v.empty()) throw DataError("quantile of an empty set");
    std::sort(v.begin(), v.end());
    double pos = std::ceil(q * static_cast<double>(v.size())) - 1.0;
    size_t i = static_cast<size_t>(std::max(0.0, pos));
    return v[std::min(i, v.size() - 1)];
}

inline bool row_matches(const QuerySpec& qs, const Schema& sch, const Record& rec) {
    return !qs.pred || eval_pred(qs.pred, sch, rec);
}

// per-row contribution to the sum/count estimator, already scaled by 1/m
struct SumCountTransform {
    std::vector<double> t;
    size_t matching = 0;
};

inline SumCountTransform sum_count_transform(const SampleView& s, const QuerySpec& qs) {
    SumCountTransform out;
    const Schema& sch = s.rel.schema;
    int ai = qs.agg == QAgg::Sum ? sch.index_of(qs.attr) : -1;
    if (qs.agg == QAgg::Sum && ai < 0) throw Error("unknown attribute " + qs.attr);
    for (size_t i = 0; i < s.rel.records.size(); ++i) {
        if (s.is_outlier(i)) continue;
        const Record& rec = s.rel.records[i];
        double t = 0.0;
        if (row_matches(qs, sch, rec)) {
            ++out.matching;
            if (qs.agg == QAgg::Count)
                t = 1.0 / s.ratio;
            else if (!rec[ai].is_null())
                t = rec[ai].numeric() / s.ratio;
        }
        out.t.push_back(t);
    }
    return out;
}

inline std::vector<double> matching_values(const SampleView& s, const QuerySpec& qs,
                                           bool include_outliers) {
    const Schema& sch = s.rel.schema;
    int ai = sch.index_of(qs.attr);
    if (ai < 0) throw Error("unknown attribute " + qs.attr);
    std::vector<double> vals;
    for (size_t i = 0; i < s.rel.records.size(); ++i) {
        if (!include_outliers && s.is_outlier(i)) continue;
        const Record& rec = s.rel.records[i];
        if (row_matches(qs, sch, rec) && !rec[ai].is_null()) vals.push_back(rec[ai].numeric());
    }
    return vals;
}

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double mu = mean_of(v), ss = 0.0;
    for (double x : v) ss += (x - mu) * (x - mu);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

template <typename Stat>
inline std::pair<double, double> percentile_interval(Stat&& stat, size_t n, size_t B,
                                                     double level, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<size_t> pick(0, n - 1);
    std::vector<double> reps;
    reps.reserve(B);
    std::vector<size_t> idx(n);
    for (size_t b = 0; b < B; ++b) {
        for (auto& i : idx) i = pick(rng);
        reps.push_back(stat(idx));
    }
    std::sort(reps.begin(), reps.end());
    double alpha = 1.0 - level;
    auto at = [&](double p) {
        double pos = p * static_cast<double>(reps.size() - 1);
        return reps[static_cast<size_t>(pos + 0.5)];
    };
    return {at(alpha / 2.0), at(1.0 - alpha / 2.0)};
}

}  // namespace detail

inline double exact_query(const Relation& r, const QuerySpec& qs) {
    int ai = qs.agg == QAgg::Count ? -1 : r.schema.index_of(qs.attr);
    if (qs.agg != QAgg::Count && ai < 0) throw Error("unknown attribute " + qs.attr);
    std::vector<double> vals;
    size_t matching = 0;
    for (auto& rec : r.records) {
        if (!detail::row_matches(qs, r.schema, rec)) continue;
        ++matching;
        if (qs.agg != QAgg::Count && !rec[ai].is_null()) vals.push_back(rec[ai].numeric());
    }
    switch (qs.agg) {
        case QAgg::Count: return static_cast<double>(matching);
        case QAgg::Sum: {
            double s = 0.0;
            for (double v : vals) s += v;
            return s;
        }
        case QAgg::Avg:
            if (vals.empty()) throw DataError("avg over no matching rows");
            return detail::mean_of(vals);
        case QAgg::Min:
            if (vals.empty()) throw DataError("min over no matching rows");
            return *std::min_element(vals.begin(), vals.end());
        case QAgg::Max:
            if (vals.empty()) throw DataError("max over no matching rows");
            return *std::max_element(vals.begin(), vals.end());
        case QAgg::Median:
            return detail::quantile_nearest_rank(vals, 0.5);
        case QAgg::Percentile:
            return detail::quantile_nearest_rank(vals, qs.q);
    }
    throw Error("unreachable");
}

namespace detail {

// One-sided Cantelli bound: the chance a single draw lies `eps` or more beyond
// the mean is at most var / (var + eps^2). `confidence` is the complement —
// the reported extreme holds unless that tail event occurs.
inline void cantelli_bound(Estimate& e, const std::vector<double>& vals) {
    double mu = mean_of(vals);
    double sd = sample_sd(vals);
    e.variance = sd * sd;
    double eps = e.agg.rfind("min", 0) == 0 ? mu - e.value : e.value - mu;
    e.confidence = eps > 0.0 ? 1.0 - e.variance / (e.variance + eps * eps) : 0.0;
}

}  // namespace detail

// Extreme of the sample alone; a one-sided bound on the view's true extreme.
inline Estimate minmax_estimate(const SampleView& s, const QuerySpec& qs) {
    if (qs.agg != QAgg::Min && qs.agg != QAgg::Max) throw Error("minmax_estimate needs min or max");
    auto vals = detail::matching_values(s, qs, /*include_outliers=*/true);
    if (vals.empty()) throw DataError("no rows match the predicate in the sample");
    Estimate e;
    e.method = "minmax";
    e.agg = qs.describe();
    e.level = qs.level;
    e.rows_used = vals.size();
    e.value = qs.agg == QAgg::Min ? *std::min_element(vals.begin(), vals.end())
                                  : *std::max_element(vals.begin(), vals.end());
    e.lo = e.hi = e.value;
    detail::cantelli_bound(e, vals);
    e.note = qs.agg == QAgg::Min ? "sample extreme bounds the true min from above"
                                 : "sample extreme bounds the true max from below";
    return e;
}

inline Estimate aqp_estimate(const SampleView& s, const QuerySpec& qs) {
    if (s.ratio <= 0.0 || s.ratio > 1.0) throw Error("sample ratio out of range");
    if (qs.agg == QAgg::Min || qs.agg == QAgg::Max) {
        Estimate e = minmax_estimate(s, qs);
        e.method = "aqp";
        return e;
    }
    Estimate e;
    e.method = "aqp";
    e.agg = qs.describe();
    e.level = qs.level;
    double z = detail::z_for(qs.level);
    double fpc = 1.0 - s.ratio;

    if (qs.agg == QAgg::Sum || qs.agg == QAgg::Count) {
        auto tr = detail::sum_count_transform(s, qs);
        double sum = 0.0, sq = 0.0;
        for (double t : tr.t) {
            sum += t;
            sq += t * t;
        }
        e.value = sum;
        e.rows_used = tr.matching;
        e.variance = fpc * sq;
        double half = z * std::sqrt(e.variance);
        e.lo = sum - half;
        e.hi = sum + half;
        return e;
    }
    if (qs.agg == QAgg::Avg) {
        auto vals = detail::matching_values(s, qs, false);
        if (vals.empty()) throw DataError("no rows match the predicate in the sample");
        e.value = detail::mean_of(vals);
        e.rows_used = vals.size();
        double sd = detail::sample_sd(vals);
        e.variance = fpc * sd * sd / static_cast<double>(vals.size());
        double half = z * std::sqrt(e.variance);
        e.lo = e.value - half;
        e.hi = e.value + half;
        return e;
    }
    // median / percentile: nearest-rank point, percentile-bootstrap interval
    auto vals = detail::matching_values(s, qs, false);
    if (vals.empty()) throw DataError("no rows match the predicate in the sample");
    double q = qs.agg == QAgg::Median ? 0.5 : qs.q;
    e.value = detail::quantile_nearest_rank(vals, q);
    e.rows_used = vals.size();
    if (s.ratio >= 1.0 || vals.size() < 2) {
        e.lo = e.hi = e.value;
        return e;
    }
    auto stat = [&](const std::vector<size_t>& idx) {
        std::vector<double> pick;
        pick.reserve(idx.size());
        for (size_t i : idx) pick.push_back(vals[i]);
        return detail::quantile_nearest_rank(std::move(pick), q);
    };
    std::tie(e.lo, e.hi) =
        detail::percentile_interval(stat, vals.size(), 1000, qs.level, 0x5eedf00dULL);
    e.note = "interval from a percentile bootstrap";
    return e;
}

// Bootstrap interval around the plain sample estimator; an alternative to the
// normal interval when the transform distribution is heavy-tailed.
inline Estimate bootstrap_ci(const SampleView& s, const QuerySpec& qs, size_t B = 1000,
                             uint64_t seed = 0x5eedf00dULL) {
    Estimate e = aqp_estimate(s, qs);
    if (s.ratio >= 1.0) {
        e.note = "whole view sampled; interval collapses";
        e.lo = e.hi = e.value;
        return e;
    }
    if (qs.agg == QAgg::Sum || qs.agg == QAgg::Count) {
        auto tr = detail::sum_count_transform(s, qs);
        if (tr.t.empty()) return e;
        auto stat = [&](const std::vector<size_t>& idx) {
            double v = 0.0;
            for (size_t i : idx) v += tr.t[i];
            return v;
        };
        std::tie(e.lo, e.hi) = detail::percentile_interval(stat, tr.t.size(), B, qs.level, seed);
    } else if (qs.agg == QAgg::Avg) {
        auto vals = detail::matching_values(s, qs, false);
        if (vals.size() < 2) return e;
        auto stat = [&](const std::vector<size_t>& idx) {
            double v = 0.0;
            for (size_t i : idx) v += vals[i];
            return v / static_cast<double>(idx.size());
        };
        std::tie(e.lo, e.hi) = detail::percentile_interval(stat, vals.size(), B, qs.level, seed);
    }
    e.note = "interval from a percentile bootstrap";
    return e;
}

// ---- correspondence subtraction -------------------------------------------------

namespace detail {

// per-key paired contributions from the dirty and clean samples; keys sampled
// by hash enter or leave both samples together, so the pair is the unit
struct PairedRow {
    double clean = 0.0, dirty = 0.0;
    bool in_clean = false, in_dirty = false;
};

inline std::vector<PairedRow> pair_by_key(const SampleView& dirty, const SampleView& clean,
                                          const QuerySpec& qs, bool scaled) {
    if (dirty.ratio != clean.ratio || dirty.salt != clean.salt)
        throw Error("samples do not share a sampling identity");
    auto ki = clean.rel.schema.key_indices();
    std::unordered_map<std::string, PairedRow> by_key;
    auto fold = [&](const SampleView& s, bool is_clean) {
        const Schema& sch = s.rel.schema;
        int ai = qs.agg == QAgg::Count ? -1 : sch.index_of(qs.attr);
        if (qs.agg != QAgg::Count && ai < 0) throw Error("unknown attribute " + qs.attr);
        for (size_t i = 0; i < s.rel.records.size(); ++i) {
            if (s.is_outlier(i)) continue;
            const Record& rec = s.rel.records[i];
            if (!row_matches(qs, sch, rec)) continue;
            double v;
            if (qs.agg == QAgg::Count)
                v = scaled ? 1.0 / s.ratio : 1.0;
            else if (rec[ai].is_null())
                continue;
            else
                v = scaled ? rec[ai].numeric() / s.ratio : rec[ai].numeric();
            auto& p = by_key[key_string(rec, ki)];
            (is_clean ? p.clean : p.dirty) = v;
            (is_clean ? p.in_clean : p.in_dirty) = true;
        }
    };
    fold(dirty, false);
    fold(clean, true);
    std::vector<PairedRow> out;
    out.reserve(by_key.size());
    for (auto& [k, p] : by_key) out.push_back(p);
    return out;
}

}  // namespace detail

// Drift-corrected extreme: shift the stale view's exact extreme by the largest
// (respectively smallest) per-key difference seen between the corresponding
// samples. Rows the sample missed may still lie beyond the shifted value;
// `1 - confidence` bounds the chance any one of them does.
inline Estimate minmax_estimate(const Relation& stale, const SampleView& dirty,
                                const SampleView& clean, const QuerySpec& qs) {
    if (qs.agg != QAgg::Min && qs.agg != QAgg::Max) throw Error("minmax_estimate needs min or max");
    auto pairs = detail::pair_by_key(dirty, clean, qs, /*scaled=*/false);
    Estimate e;
    e.method = "minmax";
    e.agg = qs.describe();
    e.level = qs.level;
    double c = 0.0;
    size_t matched = 0;
    for (auto& p : pairs) {
        if (!(p.in_clean && p.in_dirty)) continue;
        double d = p.clean - p.dirty;
        c = matched == 0 ? d : (qs.agg == QAgg::Max ? std::max(c, d) : std::min(c, d));
        ++matched;
    }
    if (matched == 0) throw DataError("no rows pair across the samples");
    e.rows_used = matched;
    e.value = exact_query(stale, qs) + c;
    e.lo = e.hi = e.value;
    auto vals = detail::matching_values(clean, qs, /*include_outliers=*/true);
    detail::cantelli_bound(e, vals);
    e.note = "stale extreme shifted by the largest sampled drift";
    return e;
}

struct BreakEven {
    double dirty_moment = 0.0;  // sum of squared dirty contributions
    double cross_moment = 0.0;  // sum of clean*dirty products over shared keys
    double corr_variance = 0.0;
    double aqp_variance = 0.0;
    bool prefer_corr = false;
};

// Correction pays off when the dirty sample's second moment is within twice its
// covariance with the clean sample: equivalently, when the variance of the
// paired difference undercuts the variance of the clean estimate alone.
inline BreakEven break_even(const SampleView& dirty, const SampleView& clean,
                            const QuerySpec& qs) {
    BreakEven be;
    double fpc = 1.0 - clean.ratio;
    if (qs.agg == QAgg::Sum || qs.agg == QAgg::Count) {
        auto pairs = detail::pair_by_key(dirty, clean, qs, /*scaled=*/true);
        double diff_sq = 0.0, clean_sq = 0.0;
        for (auto& p : pairs) {
            be.dirty_moment += p.dirty * p.dirty;
            be.cross_moment += p.clean * p.dirty;
            double d = p.clean - p.dirty;
            diff_sq += d * d;
            clean_sq += p.clean * p.clean;
        }
        be.corr_variance = fpc * diff_sq;
        be.aqp_variance = fpc * clean_sq;
    } else {
        // for ratio aggregates, compare on matched unscaled pairs
        auto pairs = detail::pair_by_key(dirty, clean, qs, /*scaled=*/false);
        std::vector<double> dc, dd;
        for (auto& p : pairs)
            if (p.in_clean && p.in_dirty) {
                dc.push_back(p.clean);
                dd.push_back(p.dirty);
            }
        double mc = detail::mean_of(dc), md = detail::mean_of(dd);
        double cov = 0.0, vd = 0.0, vdiff = 0.0, vc = 0.0;
        for (size_t i = 0; i < dc.size(); ++i) {
            cov += (dc[i] - mc) * (dd[i] - md);
            vd += (dd[i] - md) * (dd[i] - md);
            vc += (dc[i] - mc) * (dc[i] - mc);
            double d = (dc[i] - mc) - (dd[i] - md);
            vdiff += d * d;
        }
        size_t n = dc.size();
        double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
        be.dirty_moment = vd / denom;
        be.cross_moment = cov / denom;
        be.corr_variance = fpc * vdiff / denom;
        be.aqp_variance = fpc * vc / denom;
    }
    be.prefer_corr = be.dirty_moment <= 2.0 * be.cross_moment;
    return be;
}

// Correspondence-corrected estimate: the exact answer on the stale view plus
// the estimated drift between the clean and dirty samples. Shared hash
// identity pairs the two samples by key, so the drift is a single Bernoulli
// sum over the key union.
inline Estimate corr_estimate(const Relation& stale, const SampleView& dirty,
                              const SampleView& clean, const QuerySpec& qs,
                              size_t bootstrap_b = 0, uint64_t seed = 0x5eedf00dULL) {
    if (qs.agg == QAgg::Min || qs.agg == QAgg::Max) {
        Estimate e = minmax_estimate(stale, dirty, clean, qs);
        e.method = "corr";
        return e;
    }
    Estimate e;
    e.method = "corr";
    e.agg = qs.describe();
    e.level = qs.level;
    double stale_val = exact_query(stale, qs);
    double z = detail::z_for(qs.level);
    double fpc = 1.0 - clean.ratio;

    if (qs.agg == QAgg::Sum || qs.agg == QAgg::Count) {
        auto pairs = detail::pair_by_key(dirty, clean, qs, /*scaled=*/true);
        std::vector<double> u;
        u.reserve(pairs.size());
        for (auto& p : pairs) u.push_back(p.clean - p.dirty);
        double drift = 0.0, sq = 0.0;
        for (double x : u) {
            drift += x;
            sq += x * x;
        }
        e.value = stale_val + drift;
        e.rows_used = pairs.size();
        e.variance = fpc * sq;
        if (clean.ratio >= 1.0 || u.empty()) {
            e.lo = e.hi = e.value;
            return e;
        }
        if (bootstrap_b > 0) {
            auto stat = [&](const std::vector<size_t>& idx) {
                double d = 0.0;
                for (size_t i : idx) d += u[i];
                return stale_val + d;
            };
            std::tie(e.lo, e.hi) =
                detail::percentile_interval(stat, u.size(), bootstrap_b, qs.level, seed);
            e.note = "interval from a percentile bootstrap";
        } else {
            double half = z * std::sqrt(e.variance);
            e.lo = e.value - half;
            e.hi = e.value + half;
        }
        return e;
    }
    if (qs.agg == QAgg::Avg) {
        auto pairs = detail::pair_by_key(dirty, clean, qs, /*scaled=*/false);
        std::vector<double> dc, dd;
        for (auto& p : pairs) {
            if (p.in_clean) dc.push_back(p.clean);
            if (p.in_dirty) dd.push_back(p.dirty);
        }
        if (dc.empty() || dd.empty()) throw DataError("no rows match the predicate in the sample");
        e.value = stale_val + detail::mean_of(dc) - detail::mean_of(dd);
        e.rows_used = pairs.size();
        if (clean.ratio >= 1.0) {
            e.lo = e.hi = e.value;
            return e;
        }
        size_t B = bootstrap_b > 0 ? bootstrap_b : 1000;
        auto stat = [&](const std::vector<size_t>& idx) {
            double sc = 0.0, sd = 0.0;
            size_t nc = 0, nd = 0;
            for (size_t i : idx) {
                if (pairs[i].in_clean) {
                    sc += pairs[i].clean;
                    ++nc;
                }
                if (pairs[i].in_dirty) {
                    sd += pairs[i].dirty;
                    ++nd;
                }
            }
            if (nc == 0 || nd == 0) return e.value;
            return stale_val + sc / static_cast<double>(nc) - sd / static_cast<double>(nd);
        };
        std::tie(e.lo, e.hi) =
            detail::percentile_interval(stat, pairs.size(), B, qs.level, seed);
        e.note = "interval from a paired-key bootstrap";
        return e;
    }
    // median / percentile fall back to the cleaned sample
    Estimate inner = aqp_estimate(clean, qs);
    inner.method = "corr";
    inner.note = "quantiles come from the cleaned sample directly";
    return inner;
}

// ---- select-query correction ------------------------------------------------

struct SelectCorrection {
    Relation rows;      // cleaned sample rows, served as the query result
    Estimate updated;   // estimated count of rows whose values changed
    Estimate inserted;  // estimated count of rows born since the view was taken
    Estimate removed;   // estimated count of rows deleted since
};

inline SelectCorrection select_correct(const SampleView& dirty, const SampleView& clean,
                                       double level = 0.95) {
    if (dirty.ratio != clean.ratio || dirty.salt != clean.salt)
        throw Error("samples do not share a sampling identity");
    SelectCorrection out;
    out.rows = clean.rel;
    auto ki = clean.rel.schema.key_indices();
    std::unordered_map<std::string, size_t> dirty_idx;
    for (size_t i = 0; i < dirty.rel.records.size(); ++i)
        dirty_idx.emplace(key_string(dirty.rel.records[i], ki), i);
    std::unordered_set<std::string> clean_keys;
    size_t updated = 0, inserted = 0, removed = 0;
    for (auto& rec : clean.rel.records) {
        std::string k = key_string(rec, ki);
        clean_keys.insert(k);
        auto it = dirty_idx.find(k);
        if (it == dirty_idx.end())
            ++inserted;
        else if (!(dirty.rel.records[it->second] == rec))
            ++updated;
    }
    for (auto& kv : dirty_idx)
        if (!clean_keys.count(kv.first)) ++removed;

    double m = clean.ratio;
    double z = detail::z_for(level);
    auto count_est = [&](size_t k, const char* what) {
        Estimate e;
        e.method = "select";
        e.agg = std::string("count(") + what + ")";
        e.level = level;
        e.rows_used = k;
        e.value = static_cast<double>(k) / m;
        e.variance = (1.0 - m) * static_cast<double>(k) / (m * m);
        double half = z * std::sqrt(e.variance);
        e.lo = e.value - half;
        e.hi = e.value + half;
        return e;
    };
    out.updated = count_est(updated, "updated");
    out.inserted = count_est(inserted, "inserted");
    out.removed = count_est(removed, "removed");
    return out;
}

// expected rows of a sample that survive a predicate of the given selectivity;
// used to size samples before committing to a ratio
inline double selectivity_adjust(double sample_rows, double selectivity) {
    if (selectivity < 0.0 || selectivity > 1.0) throw Error("selectivity out of range");
    return sample_rows * selectivity;
}

}  // namespace svc

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "citywell/error.hpp"

namespace citywell::stats {

inline double mean(std::span<const double> x) {
    if (x.empty()) return 0.0;
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

// sample standard deviation (n-1)
inline double stdev(std::span<const double> x) {
    size_t n = x.size();
    if (n < 2) return 0.0;
    double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(n - 1));
}

// ---------------------------------------------------------------------------
// Regularized incomplete beta via Lentz's continued fraction; backs the
// Student-t tail used by the Spearman and paired-t significance tests.
// ---------------------------------------------------------------------------

inline double betacf(double a, double b, double x) {
    constexpr int max_iter = 300;
    constexpr double eps = 3e-14;
    constexpr double fpmin = 1e-300;

    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) return h;
    }
    throw NumericError("incomplete beta failed to converge");
}

inline double betainc(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                      a * std::log(x) + b * std::log1p(-x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

// Two-sided p-value for a Student-t statistic with df degrees of freedom.
inline double t_two_sided_p(double t, double df) {
    if (df <= 0.0) throw NumericError("t-test requires df > 0");
    if (std::isinf(t)) return 0.0;
    double x = df / (df + t * t);
    return betainc(df / 2.0, 0.5, x);
}

// ---------------------------------------------------------------------------
// Ranks and Spearman correlation
// ---------------------------------------------------------------------------

// average ranks for ties, 1-based
inline std::vector<double> ranks(std::span<const double> x) {
    size_t n = x.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return x[a] < x[b]; });
    std::vector<double> r(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (size_t k = i; k <= j; ++k) r[order[k]] = avg;
        i = j + 1;
    }
    return r;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
    size_t n = x.size();
    double mx = mean(x), my = mean(y);
    double num = 0.0, dx = 0.0, dy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        num += (x[i] - mx) * (y[i] - my);
        dx += (x[i] - mx) * (x[i] - mx);
        dy += (y[i] - my) * (y[i] - my);
    }
    if (dx <= 0.0 || dy <= 0.0) throw NumericError("correlation of a constant vector");
    return num / std::sqrt(dx * dy);
}

struct SpearmanResult {
    double rho;
    double p_value;
};

// rho on average-tied ranks; p from the t-approximation with n-2 df.
inline SpearmanResult spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InputError("spearman: length mismatch");
    size_t n = x.size();
    if (n < 5) throw InputError("spearman requires at least 5 paired observations");
    auto rx = ranks(x);
    auto ry = ranks(y);
    double rho = pearson(rx, ry);
    double p;
    if (std::abs(rho) >= 1.0) {
        rho = rho > 0 ? 1.0 : -1.0;
        p = 0.0;
    } else {
        double df = static_cast<double>(n - 2);
        double t = rho * std::sqrt(df / ((1.0 - rho) * (1.0 + rho)));
        p = t_two_sided_p(t, df);
    }
    return {rho, p};
}

// ---------------------------------------------------------------------------
// Paired t-test over per-fold correctness indicators
// ---------------------------------------------------------------------------

struct PairedTResult {
    double t_stat;
    double p_value;
    bool degenerate;  // zero variance of differences
};

inline PairedTResult paired_ttest(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw InputError("paired t-test: need matched vectors, n >= 2");
    size_t n = a.size();
    std::vector<double> d(n);
    for (size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
    double md = mean(d);
    double sd = stdev(d);
    if (sd < 1e-300) {
        // no variance: identical correctness patterns give p = 1, a constant
        // nonzero gap is maximal separation
        if (std::abs(md) < 1e-300) return {0.0, 1.0, true};
        return {md > 0 ? std::numeric_limits<double>::infinity()
                       : -std::numeric_limits<double>::infinity(),
                0.0, true};
    }
    double t = md / (sd / std::sqrt(static_cast<double>(n)));
    return {t, t_two_sided_p(t, static_cast<double>(n - 1)), false};
}

// ---------------------------------------------------------------------------
// Classification metrics
// ---------------------------------------------------------------------------

// Mann-Whitney AUC with average ranks for tied scores.
inline double auc(std::span<const int> labels, std::span<const double> scores) {
    size_t n = labels.size();
    if (n != scores.size()) throw InputError("auc: length mismatch");
    std::vector<double> s(scores.begin(), scores.end());
    auto r = ranks(s);
    double rank_sum_pos = 0.0;
    size_t n_pos = 0;
    for (size_t i = 0; i < n; ++i) {
        if (labels[i] == 1) {
            rank_sum_pos += r[i];
            ++n_pos;
        }
    }
    size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw NumericError("auc undefined with a single class");
    return (rank_sum_pos - static_cast<double>(n_pos) * (n_pos + 1) / 2.0) /
           (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

struct BinaryMetrics {
    double accuracy;
    double precision_macro;
    double recall_macro;
    double f1_macro;
};

inline BinaryMetrics binary_metrics(std::span<const int> labels, std::span<const int> preds) {
    if (labels.size() != preds.size() || labels.empty()) throw InputError("metrics: length mismatch");
    double correct = 0;
    // confusion counts per class
    double tp[2] = {0, 0}, fp[2] = {0, 0}, fn[2] = {0, 0};
    for (size_t i = 0; i < labels.size(); ++i) {
        int y = labels[i], p = preds[i];
        if (y == p) {
            ++correct;
            ++tp[y];
        } else {
            ++fp[p];
            ++fn[y];
        }
    }
    double pm = 0.0, rm = 0.0, fm = 0.0;
    for (int c = 0; c < 2; ++c) {
        double prec = tp[c] + fp[c] > 0 ? tp[c] / (tp[c] + fp[c]) : 0.0;
        double rec = tp[c] + fn[c] > 0 ? tp[c] / (tp[c] + fn[c]) : 0.0;
        double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
        pm += prec / 2;
        rm += rec / 2;
        fm += f1 / 2;
    }
    return {correct / static_cast<double>(labels.size()), pm, rm, fm};
}

}  // namespace citywell::stats

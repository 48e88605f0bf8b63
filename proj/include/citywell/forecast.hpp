#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "citywell/date.hpp"
#include "citywell/error.hpp"
#include "citywell/rng.hpp"
#include "citywell/series.hpp"
#include "citywell/stats.hpp"

namespace citywell {

// Additive daily model: y(t) = trend(t) + seasonal(t) + noise. The trend is
// piecewise linear with hinge terms at fixed changepoints; seasonality is a
// yearly Fourier series with period 365.25 days. Time t is fractional days
// since the start of training.
struct ForecastConfig {
    int n_changepoints = 25;
    double changepoint_range = 0.8;  // changepoints live in the first 80% of training
    int fourier_order = 10;
    double tau = 0.05;               // L1 changepoint penalty is (1/tau) * sum |delta|
    uint64_t seed = 0;
    int max_sweeps = 2000000;
    double tol = 1e-10;  // relative objective decrease per sweep
};

struct ForecastModel {
    Day train_start = 0;
    int train_days = 0;           // number of training days
    double intercept = 0.0;       // k
    double slope = 0.0;           // m, base slope per day
    std::vector<double> changepoint_offsets;  // s_j, days since train_start
    std::vector<double> deltas;               // slope changes at s_j
    int fourier_order = 0;
    std::vector<double> fourier_cos;  // a_n
    std::vector<double> fourier_sin;  // b_n
    double sigma_eps = 0.0;       // residual scale
    double tau = 0.05;
    std::vector<double> objective_trace;  // penalized objective per sweep

    static constexpr double kYearDays = 365.25;

    double trend(double t) const {
        double g = intercept + slope * t;
        for (size_t j = 0; j < changepoint_offsets.size(); ++j) {
            double h = t - changepoint_offsets[j];
            if (h > 0) g += deltas[j] * h;
        }
        return g;
    }

    double seasonal(double t) const {
        double s = 0.0;
        for (int n = 1; n <= fourier_order; ++n) {
            double w = 2.0 * M_PI * n * t / kYearDays;
            s += fourier_cos[static_cast<size_t>(n - 1)] * std::cos(w) +
                 fourier_sin[static_cast<size_t>(n - 1)] * std::sin(w);
        }
        return s;
    }

    double value(double t) const { return trend(t) + seasonal(t); }

    // mean |delta| over training changepoints; Laplace scale for simulated
    // future changepoints
    double delta_scale() const {
        if (deltas.empty()) return 0.0;
        double s = 0.0;
        for (double d : deltas) s += std::abs(d);
        return s / static_cast<double>(deltas.size());
    }

    // historical changepoints per day
    double changepoint_rate() const {
        if (train_days <= 0) return 0.0;
        return static_cast<double>(changepoint_offsets.size()) / static_cast<double>(train_days);
    }
};

struct Forecast {
    Day start = 0;
    std::vector<double> yhat;
    std::vector<double> lower95;
    std::vector<double> upper95;

    size_t size() const { return yhat.size(); }
    Day day_at(size_t i) const { return start + static_cast<Day>(i); }
    int index_of(Day d) const {
        if (d < start || d >= start + static_cast<Day>(yhat.size())) return -1;
        return static_cast<int>(d - start);
    }
};

namespace detail {

// Coordinate descent for least squares with an L1 penalty on a subset of
// coefficients, on the precomputed Gram system. Monotone in the objective.
struct PenalizedLsq {
    Eigen::MatrixXd gram;       // X^T X
    Eigen::VectorXd xty;        // X^T y
    double yty = 0.0;
    Eigen::VectorXd penalty;    // per-coefficient L1 weight (0 = unpenalized)

    double objective(const Eigen::VectorXd& beta) const {
        double sse = yty - 2.0 * beta.dot(xty) + beta.dot(gram * beta);
        double l1 = 0.0;
        for (Eigen::Index j = 0; j < beta.size(); ++j) l1 += penalty[j] * std::abs(beta[j]);
        return sse + l1;
    }

    // returns objective trace, one entry per sweep; stops once a full sweep
    // improves the objective by less than tol relative to its size
    std::vector<double> solve(Eigen::VectorXd& beta, int max_sweeps, double tol) const {
        Eigen::Index p = xty.size();
        Eigen::VectorXd resid_corr = xty - gram * beta;  // c - G beta
        std::vector<double> trace;
        trace.reserve(64);
        double prev = std::numeric_limits<double>::infinity();
        for (int sweep = 0; sweep < max_sweeps; ++sweep) {
            double max_step = 0.0;
            for (Eigen::Index j = 0; j < p; ++j) {
                double gjj = gram(j, j);
                if (gjj <= 0.0) continue;
                double rj = resid_corr[j] + gjj * beta[j];  // c_j - sum_{k!=j} G_jk beta_k
                double updated;
                if (penalty[j] > 0.0) {
                    double thr = penalty[j] / 2.0;
                    if (rj > thr) {
                        updated = (rj - thr) / gjj;
                    } else if (rj < -thr) {
                        updated = (rj + thr) / gjj;
                    } else {
                        updated = 0.0;
                    }
                } else {
                    updated = rj / gjj;
                }
                double step = updated - beta[j];
                if (step != 0.0) {
                    resid_corr -= step * gram.col(j);
                    beta[j] = updated;
                    max_step = std::max(max_step, std::abs(step));
                }
            }
            double obj = objective(beta);
            trace.push_back(obj);
            if (max_step == 0.0 || prev - obj <= tol * (1.0 + std::abs(obj))) return trace;
            prev = obj;
        }
        throw NumericError("forecast fit did not converge after " + std::to_string(max_sweeps) +
                           " sweeps; final objective " +
                           std::to_string(trace.empty() ? -1.0 : trace.back()));
    }
};

}  // namespace detail

// Fit trend + seasonality on a dense prepared series by penalized least
// squares: sum of squared residuals plus (1/tau) * sum |delta_j|, with the
// penalized deltas measured per training span (the parameterization the
// default tau is calibrated for); the returned model is in per-day units.
// Changepoint locations are fixed, so the model is linear in every fitted
// parameter; the solver standardizes columns internally and maps the penalty
// weights along.
inline ForecastModel fit_forecast(const PreparedSeries& series, const ForecastConfig& config = {}) {
    const int n = static_cast<int>(series.size());
    if (n < 730) throw NumericError("forecast fit needs at least 2 years of daily training data");
    if (config.fourier_order < 1) throw InputError("fourier_order must be >= 1");
    if (config.n_changepoints < 0) throw InputError("n_changepoints must be >= 0");
    if (config.tau <= 0.0) throw InputError("tau must be > 0");
    if (config.changepoint_range <= 0.0 || config.changepoint_range > 1.0)
        throw InputError("changepoint_range must be in (0, 1]");

    const int n_cp = config.n_changepoints;
    const int order = config.fourier_order;
    const int p = 2 + n_cp + 2 * order;

    std::vector<double> cps(static_cast<size_t>(n_cp));
    double span = static_cast<double>(n - 1) * config.changepoint_range;
    for (int j = 1; j <= n_cp; ++j)
        cps[static_cast<size_t>(j - 1)] = span * static_cast<double>(j) / static_cast<double>(n_cp);

    // trend columns use time scaled to [0, 1] over the training span so the
    // penalty weight acts on per-span deltas; seasonality stays in days
    const double span_days = static_cast<double>(n - 1);
    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        double t = static_cast<double>(i);
        y[i] = series.values[static_cast<size_t>(i)];
        X(i, 0) = 1.0;
        X(i, 1) = t / span_days;
        for (int j = 0; j < n_cp; ++j)
            X(i, 2 + j) = std::max(0.0, t - cps[static_cast<size_t>(j)]) / span_days;
        for (int k = 1; k <= order; ++k) {
            double w = 2.0 * M_PI * k * t / ForecastModel::kYearDays;
            X(i, 2 + n_cp + 2 * (k - 1)) = std::cos(w);
            X(i, 2 + n_cp + 2 * (k - 1) + 1) = std::sin(w);
        }
    }

    // standardize non-intercept columns; delta penalties transform with the
    // column scales so the solved problem stays exactly the stated objective
    double y_mean = y.mean();
    Eigen::VectorXd yc = y.array() - y_mean;
    Eigen::VectorXd col_mean = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd col_scale = Eigen::VectorXd::Ones(p);
    Eigen::MatrixXd Xs = X;
    for (int j = 1; j < p; ++j) {
        col_mean[j] = X.col(j).mean();
        Xs.col(j).array() -= col_mean[j];
        double sd = std::sqrt(Xs.col(j).squaredNorm() / static_cast<double>(n));
        if (sd > 1e-12) {
            col_scale[j] = sd;
            Xs.col(j) /= sd;
        }
    }
    Xs.col(0).setZero();  // intercept handled by centering; restored afterwards

    detail::PenalizedLsq prob;
    prob.gram = Xs.transpose() * Xs;
    prob.xty = Xs.transpose() * yc;
    prob.yty = yc.squaredNorm();
    // a scaled coefficient is col_scale * delta, so dividing the weight by
    // col_scale keeps the penalty equal to (1/tau) * |delta|
    prob.penalty = Eigen::VectorXd::Zero(p);
    for (int j = 0; j < n_cp; ++j)
        prob.penalty[2 + j] = (1.0 / config.tau) / col_scale[2 + j];

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    auto trace = prob.solve(beta, config.max_sweeps, config.tol);

    // map back to original scale
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(p);
    for (int j = 1; j < p; ++j) coef[j] = beta[j] / col_scale[j];
    double intercept = y_mean;
    for (int j = 1; j < p; ++j) intercept -= coef[j] * col_mean[j];
    coef[0] = intercept;

    ForecastModel model;
    model.train_start = series.start;
    model.train_days = n;
    model.intercept = coef[0];
    model.slope = coef[1] / span_days;  // per-span back to per-day
    model.changepoint_offsets = cps;
    model.deltas.assign(n_cp, 0.0);
    for (int j = 0; j < n_cp; ++j)
        model.deltas[static_cast<size_t>(j)] = coef[2 + j] / span_days;
    model.fourier_order = order;
    model.fourier_cos.resize(static_cast<size_t>(order));
    model.fourier_sin.resize(static_cast<size_t>(order));
    for (int k = 0; k < order; ++k) {
        model.fourier_cos[static_cast<size_t>(k)] = coef[2 + n_cp + 2 * k];
        model.fourier_sin[static_cast<size_t>(k)] = coef[2 + n_cp + 2 * k + 1];
    }
    model.tau = config.tau;
    model.objective_trace = std::move(trace);

    Eigen::VectorXd fitted = X * coef;
    std::vector<double> resid(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) resid[static_cast<size_t>(i)] = y[i] - fitted[i];
    model.sigma_eps = stats::stdev(resid);
    return model;
}

// Point forecast with a Monte Carlo 95% prediction interval. Future
// changepoints arrive at the historical rate with Laplace(0, delta_scale)
// slope deltas; observation noise is N(0, sigma_eps^2) per day. Each sample
// path owns a generator seeded by (seed, sample index), so results do not
// depend on evaluation order.
inline Forecast predict(const ForecastModel& model, DateRange horizon, int n_samples,
                        uint64_t seed) {
    if (n_samples < 100) throw InputError("predict requires n_samples >= 100");
    Day train_end = model.train_start + static_cast<Day>(model.train_days) - 1;
    if (horizon.first <= train_end)
        throw InputError("forecast horizon must start after the training range");

    const int h = horizon.length();
    Forecast out;
    out.start = horizon.first;
    out.yhat.resize(static_cast<size_t>(h));
    for (int d = 0; d < h; ++d) {
        double t = static_cast<double>(horizon.first - model.train_start) + d;
        out.yhat[static_cast<size_t>(d)] = model.value(t);
    }

    const double rate = std::min(1.0, model.changepoint_rate());
    const double dscale = model.delta_scale();

    std::vector<std::vector<double>> paths(static_cast<size_t>(n_samples));
    for (int s = 0; s < n_samples; ++s) {
        Rng rng(mix_seed(seed, static_cast<uint64_t>(s)));
        auto& path = paths[static_cast<size_t>(s)];
        path.resize(static_cast<size_t>(h));
        double extra = 0.0;        // accumulated trend deviation
        double extra_slope = 0.0;  // accumulated slope deviation per day
        for (int d = 0; d < h; ++d) {
            extra += extra_slope;
            if (rate > 0.0 && rng.bernoulli(rate)) extra_slope += rng.laplace(dscale);
            double eps = model.sigma_eps > 0.0 ? rng.normal(0.0, model.sigma_eps) : 0.0;
            path[static_cast<size_t>(d)] = out.yhat[static_cast<size_t>(d)] + extra + eps;
        }
    }

    out.lower95.resize(static_cast<size_t>(h));
    out.upper95.resize(static_cast<size_t>(h));
    std::vector<double> column(static_cast<size_t>(n_samples));
    auto quantile = [](std::vector<double>& v, double q) {
        std::sort(v.begin(), v.end());
        double pos = q * static_cast<double>(v.size() - 1);
        size_t lo = static_cast<size_t>(pos);
        size_t hi = std::min(lo + 1, v.size() - 1);
        double frac = pos - static_cast<double>(lo);
        return v[lo] * (1.0 - frac) + v[hi] * frac;
    };
    for (int d = 0; d < h; ++d) {
        for (int s = 0; s < n_samples; ++s)
            column[static_cast<size_t>(s)] = paths[static_cast<size_t>(s)][static_cast<size_t>(d)];
        double lo = quantile(column, 0.025);
        double hi = quantile(column, 0.975);
        double& yh = out.yhat[static_cast<size_t>(d)];
        out.lower95[static_cast<size_t>(d)] = std::min(lo, yh);
        out.upper95[static_cast<size_t>(d)] = std::max(hi, yh);
    }
    return out;
}

}  // namespace citywell

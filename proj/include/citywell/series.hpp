#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "citywell/date.hpp"
#include "citywell/error.hpp"
#include "citywell/stats.hpp"

namespace citywell {

// Date-indexed real values with explicit gaps; days strictly increasing.
struct DailySeries {
    std::vector<Day> days;
    std::vector<double> values;

    size_t size() const { return days.size(); }
    bool empty() const { return days.empty(); }

    void push(Day d, double v) {
        if (!days.empty() && d <= days.back()) throw InputError("series days must be strictly increasing");
        days.push_back(d);
        values.push_back(v);
    }

    // index of day d, or -1
    int find(Day d) const {
        auto it = std::lower_bound(days.begin(), days.end(), d);
        if (it == days.end() || *it != d) return -1;
        return static_cast<int>(it - days.begin());
    }

    DailySeries slice(DateRange window) const {
        DailySeries out;
        for (size_t i = 0; i < days.size(); ++i)
            if (window.contains(days[i])) out.push(days[i], values[i]);
        return out;
    }
};

// (x - mu) / sigma with mu, sigma fitted on fit_window only, applied everywhere.
// sigma is the sample standard deviation.
inline DailySeries znorm(const DailySeries& series, DateRange fit_window) {
    std::vector<double> window_vals;
    for (size_t i = 0; i < series.size(); ++i)
        if (fit_window.contains(series.days[i])) window_vals.push_back(series.values[i]);
    if (window_vals.size() < 2)
        throw NumericError("znorm: fit window holds fewer than 2 values");
    double mu = stats::mean(window_vals);
    double sigma = stats::stdev(window_vals);
    if (sigma < 1e-12) throw NumericError("znorm: degenerate series (sigma < 1e-12)");
    DailySeries out;
    for (size_t i = 0; i < series.size(); ++i)
        out.push(series.days[i], (series.values[i] - mu) / sigma);
    return out;
}

// Pointwise pos - neg on the intersection of dates.
inline DailySeries wellbeing_series(const DailySeries& pos, const DailySeries& neg) {
    DailySeries out;
    size_t i = 0, j = 0;
    while (i < pos.size() && j < neg.size()) {
        if (pos.days[i] < neg.days[j]) {
            ++i;
        } else if (neg.days[j] < pos.days[i]) {
            ++j;
        } else {
            out.push(pos.days[i], pos.values[i] - neg.values[j]);
            ++i;
            ++j;
        }
    }
    return out;
}

// Dense daily values over a contiguous range, after gap interpolation and
// trailing 7-day smoothing. The mask records which days were observed.
struct PreparedSeries {
    Day start = 0;
    std::vector<double> values;
    std::vector<bool> observed;

    size_t size() const { return values.size(); }
    Day day_at(size_t i) const { return start + static_cast<Day>(i); }
    Day last_day() const { return start + static_cast<Day>(values.size()) - 1; }

    bool contains(Day d) const { return d >= start && d <= last_day(); }
    double at(Day d) const { return values[static_cast<size_t>(d - start)]; }

    PreparedSeries slice(DateRange window) const {
        if (window.first < start || window.last > last_day())
            throw InputError("prepared-series slice outside range");
        PreparedSeries out;
        out.start = window.first;
        size_t a = static_cast<size_t>(window.first - start);
        size_t b = static_cast<size_t>(window.last - start);
        out.values.assign(values.begin() + a, values.begin() + b + 1);
        out.observed.assign(observed.begin() + a, observed.begin() + b + 1);
        return out;
    }

    DailySeries to_daily() const {
        DailySeries out;
        for (size_t i = 0; i < values.size(); ++i) out.push(day_at(i), values[i]);
        return out;
    }
};

// Gap fill by linear interpolation between nearest observed neighbors, then a
// trailing 7-day rolling mean (days [t-6, t]; shorter windows at the start).
// The window is trimmed to the observed extent inside it.
inline PreparedSeries prepare(const DailySeries& series, DateRange window, int smooth_days = 7) {
    DailySeries obs = series.slice(window);
    if (obs.size() < 2) throw NumericError("prepare: fewer than 2 observed values in window");
    if (smooth_days < 1) throw InputError("prepare: smooth_days must be >= 1");

    Day first = obs.days.front();
    Day last = obs.days.back();
    size_t n = static_cast<size_t>(last - first) + 1;

    std::vector<double> dense(n, 0.0);
    std::vector<bool> mask(n, false);
    for (size_t i = 0; i < obs.size(); ++i) {
        dense[static_cast<size_t>(obs.days[i] - first)] = obs.values[i];
        mask[static_cast<size_t>(obs.days[i] - first)] = true;
    }
    // interpolate interior gaps
    size_t prev = 0;
    for (size_t i = 1; i < n; ++i) {
        if (!mask[i]) continue;
        if (i > prev + 1) {
            double lo = dense[prev], hi = dense[i];
            double span = static_cast<double>(i - prev);
            for (size_t k = prev + 1; k < i; ++k)
                dense[k] = lo + (hi - lo) * static_cast<double>(k - prev) / span;
        }
        prev = i;
    }

    PreparedSeries out;
    out.start = first;
    out.observed = std::move(mask);
    out.values.resize(n);
    // trailing mean with a running sum
    double running = 0.0;
    for (size_t i = 0; i < n; ++i) {
        running += dense[i];
        if (i >= static_cast<size_t>(smooth_days)) running -= dense[i - smooth_days];
        size_t width = std::min(i + 1, static_cast<size_t>(smooth_days));
        out.values[i] = running / static_cast<double>(width);
    }
    return out;
}

}  // namespace citywell

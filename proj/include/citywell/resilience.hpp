#pragma once

#include <string>
#include <vector>

#include "citywell/date.hpp"
#include "citywell/error.hpp"
#include "citywell/forecast.hpp"
#include "citywell/series.hpp"

namespace citywell {

enum class RecoveryLabel { unaffected, recovered, non_recovered };

inline std::string to_string(RecoveryLabel label) {
    switch (label) {
        case RecoveryLabel::unaffected: return "Unaffected";
        case RecoveryLabel::recovered: return "Recovered";
        case RecoveryLabel::non_recovered: return "NonRecovered";
    }
    throw InputError("bad recovery label");
}

inline RecoveryLabel parse_label(const std::string& s) {
    if (s == "Unaffected") return RecoveryLabel::unaffected;
    if (s == "Recovered") return RecoveryLabel::recovered;
    if (s == "NonRecovered") return RecoveryLabel::non_recovered;
    throw InputError("unknown recovery label: " + s);
}

// Ordinal resilience encoding, least resilient first.
inline int label_ordinal(RecoveryLabel label) {
    switch (label) {
        case RecoveryLabel::non_recovered: return 0;
        case RecoveryLabel::recovered: return 1;
        case RecoveryLabel::unaffected: return 2;
    }
    throw InputError("bad recovery label");
}

struct StageWindows {
    DateRange early;            // onset period
    std::vector<DateRange> middle;  // later sub-periods, checked in order
};

inline StageWindows default_stage_windows() {
    StageWindows w;
    w.early = {parse_day("2020-04-01"), parse_day("2020-06-30")};
    w.middle = {{parse_day("2020-07-01"), parse_day("2020-09-30")},
                {parse_day("2020-10-01"), parse_day("2020-12-31")}};
    return w;
}

// Fraction of window days where the observed value falls strictly below the
// lower 95% band. Every day of the window must be covered by both series.
inline double deviation_fraction(const PreparedSeries& observed, const Forecast& forecast,
                                 DateRange window) {
    int below = 0;
    for (Day d = window.first; d <= window.last; ++d) {
        if (!observed.contains(d)) throw InputError("observed series does not cover " + format_day(d));
        int fi = forecast.index_of(d);
        if (fi < 0) throw InputError("forecast does not cover " + format_day(d));
        if (observed.at(d) < forecast.lower95[static_cast<size_t>(fi)]) ++below;
    }
    return static_cast<double>(below) / static_cast<double>(window.length());
}

struct ResilienceResult {
    RecoveryLabel label;
    double early_fraction = 0.0;
    std::vector<double> middle_fractions;
};

// A community is Unaffected when the early window never breaches the
// threshold; otherwise it Recovered if some later sub-period drops back below
// the threshold, and NonRecovered if none does.
inline ResilienceResult classify_resilience(const PreparedSeries& observed,
                                            const Forecast& forecast, const StageWindows& windows,
                                            double threshold = 0.25) {
    if (threshold <= 0.0 || threshold >= 1.0) throw InputError("deviation threshold must be in (0, 1)");
    if (windows.middle.empty()) throw InputError("at least one middle sub-period is required");
    ResilienceResult r;
    r.early_fraction = deviation_fraction(observed, forecast, windows.early);
    for (const auto& w : windows.middle)
        r.middle_fractions.push_back(deviation_fraction(observed, forecast, w));
    if (r.early_fraction < threshold) {
        r.label = RecoveryLabel::unaffected;
        return r;
    }
    for (double f : r.middle_fractions) {
        if (f < threshold) {
            r.label = RecoveryLabel::recovered;
            return r;
        }
    }
    r.label = RecoveryLabel::non_recovered;
    return r;
}

}  // namespace citywell

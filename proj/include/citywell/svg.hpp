#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "citywell/date.hpp"
#include "citywell/error.hpp"
#include "citywell/forecast.hpp"
#include "citywell/series.hpp"

namespace citywell {

// Renders one community series: observed line, forecast line, shaded 95%
// band, and a vertical event marker. Pure string assembly, no dependencies.
inline std::string render_forecast_svg(const std::string& title, const PreparedSeries& observed,
                                       const Forecast& forecast, Day event_marker) {
    const double width = 960, height = 400;
    const double ml = 60, mr = 16, mt = 34, mb = 42;
    const double pw = width - ml - mr, ph = height - mt - mb;

    Day x0 = std::min(observed.start, forecast.start);
    Day x1 = std::max(observed.last_day(),
                      forecast.size() ? forecast.day_at(forecast.size() - 1) : forecast.start);
    if (x1 <= x0) throw InputError("svg: empty plot range");
    double lo = observed.values.empty() ? 0.0 : *std::min_element(observed.values.begin(), observed.values.end());
    double hi = observed.values.empty() ? 1.0 : *std::max_element(observed.values.begin(), observed.values.end());
    for (size_t i = 0; i < forecast.size(); ++i) {
        lo = std::min(lo, forecast.lower95[i]);
        hi = std::max(hi, forecast.upper95[i]);
    }
    double pad = (hi - lo) * 0.08 + 1e-9;
    lo -= pad;
    hi += pad;

    auto X = [&](Day d) { return ml + pw * static_cast<double>(d - x0) / static_cast<double>(x1 - x0); };
    auto Y = [&](double v) { return mt + ph * (1.0 - (v - lo) / (hi - lo)); };
    auto pt = [&](Day d, double v) { return fmt::format("{:.2f},{:.2f}", X(d), Y(v)); };

    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" "
        "viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">\n"
        "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
        "<text x=\"{tx}\" y=\"22\" font-size=\"15\" text-anchor=\"middle\">{t}</text>\n",
        fmt::arg("w", width), fmt::arg("h", height), fmt::arg("tx", ml + pw / 2),
        fmt::arg("t", title));

    // y grid and labels
    for (int k = 0; k <= 4; ++k) {
        double v = lo + (hi - lo) * k / 4.0;
        double y = Y(v);
        svg += fmt::format(
            "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#ddd\"/>\n"
            "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"11\" text-anchor=\"end\">{:.2f}</text>\n",
            ml, y, ml + pw, y, ml - 6, y + 4, v);
    }
    // year ticks
    for (int year = year_of(x0); year <= year_of(x1) + 1; ++year) {
        Day d = days_from_civil(year, 1, 1);
        if (d < x0 || d > x1) continue;
        svg += fmt::format(
            "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"#eee\"/>\n"
            "<text x=\"{0:.2f}\" y=\"{3:.2f}\" font-size=\"11\" text-anchor=\"middle\">{4}</text>\n",
            X(d), mt, mt + ph, mt + ph + 16, year);
    }

    // 95% band
    if (forecast.size() > 0) {
        std::string band = "<polygon fill=\"#1f77b4\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
        for (size_t i = 0; i < forecast.size(); ++i)
            band += pt(forecast.day_at(i), forecast.upper95[i]) + " ";
        for (size_t i = forecast.size(); i-- > 0;)
            band += pt(forecast.day_at(i), forecast.lower95[i]) + " ";
        band += "\"/>\n";
        svg += band;
    }

    // observed
    if (!observed.values.empty()) {
        std::string line = "<polyline fill=\"none\" stroke=\"#333\" stroke-width=\"1\" points=\"";
        for (size_t i = 0; i < observed.size(); ++i)
            line += pt(observed.day_at(i), observed.values[i]) + " ";
        line += "\"/>\n";
        svg += line;
    }

    // forecast mean
    if (forecast.size() > 0) {
        std::string line = "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < forecast.size(); ++i)
            line += pt(forecast.day_at(i), forecast.yhat[i]) + " ";
        line += "\"/>\n";
        svg += line;
    }

    if (event_marker >= x0 && event_marker <= x1)
        svg += fmt::format(
            "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" "
            "stroke=\"#d62728\" stroke-dasharray=\"4 3\"/>\n",
            X(event_marker), mt, mt + ph);

    svg += "</svg>\n";
    return svg;
}

inline void write_forecast_svg(const std::string& path, const std::string& title,
                               const PreparedSeries& observed, const Forecast& forecast,
                               Day event_marker) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << render_forecast_svg(title, observed, forecast, event_marker);
}

}  // namespace citywell

#pragma once

#include <string>
#include <vector>

#include "citywell/corpus.hpp"
#include "citywell/lexicon.hpp"
#include "citywell/series.hpp"

namespace citywell {

// Unweighted mean of per-record category percents over all posts and comments
// of one community-day. No records -> no value (gap).
inline double daily_category_mean(const CorpusIndex& index, const Lexicon& lexicon,
                                  const std::string& category, const std::string& community,
                                  Day day) {
    int cat = lexicon.category_index(category);
    if (cat < 0) throw InputError("unknown lexicon category '" + category + "'");
    const auto& buckets = index.days(community);
    auto it = buckets.find(day);
    if (it == buckets.end() || it->second.empty())
        throw InputError("no records for " + community + " on " + format_day(day));
    double sum = 0.0;
    for (uint32_t idx : it->second) {
        auto tokens = tokenize(index.record(idx).body);
        sum += score_text(tokens, lexicon, category).percent;
    }
    return sum / static_cast<double>(it->second.size());
}

struct AffectSeries {
    DailySeries pos_raw;     // daily mean percents
    DailySeries neg_raw;
    DailySeries wellbeing;   // znorm(pos) - znorm(neg)
};

// Full per-community WellBeing signal: daily category means for the positive
// and negative categories, z-normalized over fit_window, then differenced.
// Scores every record once; both categories come out of a single trie walk.
inline AffectSeries community_affect_series(const CorpusIndex& index, const Lexicon& lexicon,
                                            const std::string& community,
                                            const std::string& pos_category,
                                            const std::string& neg_category,
                                            DateRange fit_window) {
    int pos_cat = lexicon.category_index(pos_category);
    int neg_cat = lexicon.category_index(neg_category);
    if (pos_cat < 0) throw InputError("unknown lexicon category '" + pos_category + "'");
    if (neg_cat < 0) throw InputError("unknown lexicon category '" + neg_category + "'");

    AffectSeries out;
    for (const auto& [day, bucket] : index.days(community)) {
        if (bucket.empty()) continue;
        double pos_sum = 0.0, neg_sum = 0.0;
        for (uint32_t idx : bucket) {
            auto tokens = tokenize(index.record(idx).body);
            auto pct = lexicon.score_all(tokens);
            pos_sum += pct[static_cast<size_t>(pos_cat)];
            neg_sum += pct[static_cast<size_t>(neg_cat)];
        }
        double n = static_cast<double>(bucket.size());
        out.pos_raw.push(day, pos_sum / n);
        out.neg_raw.push(day, neg_sum / n);
    }
    out.wellbeing = wellbeing_series(znorm(out.pos_raw, fit_window), znorm(out.neg_raw, fit_window));
    return out;
}

}  // namespace citywell

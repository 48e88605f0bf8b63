#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "citywell/corpus.hpp"
#include "citywell/csv.hpp"
#include "citywell/date.hpp"
#include "citywell/error.hpp"
#include "citywell/graph.hpp"
#include "citywell/lexicon.hpp"
#include "citywell/log.hpp"
#include "citywell/resilience.hpp"
#include "citywell/rng.hpp"
#include "citywell/tree.hpp"

namespace citywell {

struct DemographicRow {
    std::string county_fips;
    double population_density = 0;
    double median_age = 0;
    double rent_vs_own = 0;
    double median_household_income = 0;
    double median_housing_cost = 0;
    double latitude = 0;
};

inline std::map<std::string, DemographicRow> load_demographics(const std::string& path) {
    csv::Table t = csv::read_table(path);
    std::array<std::string, 7> cols = {"county_fips",          "population_density",
                                       "median_age",           "rent_vs_own",
                                       "median_household_income", "median_housing_cost",
                                       "latitude"};
    std::array<int, 7> idx{};
    for (size_t i = 0; i < cols.size(); ++i) idx[i] = t.require_column(cols[i]);
    std::map<std::string, DemographicRow> out;
    for (const auto& row : t.rows) {
        DemographicRow d;
        d.county_fips = row[static_cast<size_t>(idx[0])];
        d.population_density = csv::to_double(row[static_cast<size_t>(idx[1])]);
        d.median_age = csv::to_double(row[static_cast<size_t>(idx[2])]);
        d.rent_vs_own = csv::to_double(row[static_cast<size_t>(idx[3])]);
        d.median_household_income = csv::to_double(row[static_cast<size_t>(idx[4])]);
        d.median_housing_cost = csv::to_double(row[static_cast<size_t>(idx[5])]);
        d.latitude = csv::to_double(row[static_cast<size_t>(idx[6])]);
        for (double v : {d.population_density, d.median_age, d.rent_vs_own,
                         d.median_household_income, d.median_housing_cost, d.latitude})
            if (v <= 0) throw InputError(path + ": non-positive demographic value for county " + d.county_fips);
        if (d.latitude < 17 || d.latitude > 72)
            throw InputError(path + ": latitude out of range for county " + d.county_fips);
        out[d.county_fips] = d;
    }
    return out;
}

inline std::map<std::string, double> load_population(const std::string& path) {
    csv::Table t = csv::read_table(path);
    int fi = t.require_column("county_fips");
    int pi = t.require_column("population");
    std::map<std::string, double> out;
    for (const auto& row : t.rows) {
        double p = csv::to_double(row[static_cast<size_t>(pi)]);
        if (p <= 0) throw InputError(path + ": population must be positive");
        out[row[static_cast<size_t>(fi)]] = p;
    }
    return out;
}

// Cumulative counts as reported; missing days carry the last value forward.
struct CovidCounty {
    std::vector<Day> days;        // sorted
    std::vector<double> cases;    // cumulative, non-decreasing after clipping
    std::vector<double> deaths;

    double cumulative_at(Day d, const std::vector<double>& series) const {
        auto it = std::upper_bound(days.begin(), days.end(), d);
        if (it == days.begin()) return 0.0;
        return series[static_cast<size_t>(it - days.begin() - 1)];
    }
    double cases_at(Day d) const { return cumulative_at(d, cases); }
    double deaths_at(Day d) const { return cumulative_at(d, deaths); }
};

inline std::map<std::string, CovidCounty> load_covid(const std::string& path) {
    csv::Table t = csv::read_table(path);
    int fi = t.require_column("county_fips");
    int di = t.require_column("date");
    int ci = t.require_column("cases");
    int ei = t.require_column("deaths");
    std::map<std::string, std::map<Day, std::pair<double, double>>> by_county;
    for (const auto& row : t.rows) {
        Day d = parse_day(row[static_cast<size_t>(di)]);
        by_county[row[static_cast<size_t>(fi)]][d] = {csv::to_double(row[static_cast<size_t>(ci)]),
                                                      csv::to_double(row[static_cast<size_t>(ei)])};
    }
    std::map<std::string, CovidCounty> out;
    for (auto& [fips, rows] : by_county) {
        CovidCounty c;
        int clipped = 0;
        double max_cases = 0, max_deaths = 0;
        for (auto& [day, counts] : rows) {
            double cases = counts.first;
            double deaths = counts.second;
            if (cases < max_cases || deaths < max_deaths) ++clipped;
            max_cases = std::max(max_cases, cases);
            max_deaths = std::max(max_deaths, deaths);
            c.days.push_back(day);
            c.cases.push_back(max_cases);
            c.deaths.push_back(max_deaths);
        }
        if (clipped > 0)
            log::warn(path + ": county " + fips + ": clipped " + std::to_string(clipped) +
                      " decreasing cumulative value(s)");
        out[fips] = std::move(c);
    }
    return out;
}

inline std::map<std::string, std::set<Day>> load_mask(const std::string& path) {
    csv::Table t = csv::read_table(path);
    int fi = t.require_column("county_fips");
    int di = t.require_column("date");
    int mi = t.require_column("mandate");
    std::map<std::string, std::set<Day>> out;
    for (const auto& row : t.rows) {
        const std::string& flag = row[static_cast<size_t>(mi)];
        if (flag != "0" && flag != "1") throw InputError(path + ": mandate must be 0 or 1");
        if (flag == "1") out[row[static_cast<size_t>(fi)]].insert(parse_day(row[static_cast<size_t>(di)]));
    }
    return out;
}

inline std::unordered_map<std::string, double> load_scores(const std::string& path) {
    csv::Table t = csv::read_table(path);
    int ii = t.require_column("post_id");
    int si = t.require_column("score");
    std::unordered_map<std::string, double> out;
    for (const auto& row : t.rows) {
        double s = csv::to_double(row[static_cast<size_t>(si)]);
        if (s < 0.0 || s > 1.0) throw InputError(path + ": score outside [0,1] for post " + row[static_cast<size_t>(ii)]);
        out[row[static_cast<size_t>(ii)]] = s;
    }
    return out;
}

struct BricRow {
    std::string county_fips;
    std::vector<double> components;  // ordered as bric_component_names()
};

inline const std::vector<std::string>& bric_component_names() {
    static const std::vector<std::string> names = {"social",          "economic",
                                                   "community_capital", "institutional",
                                                   "infrastructural", "environmental",
                                                   "aggregate"};
    return names;
}

inline std::map<std::string, BricRow> load_bric(const std::string& path) {
    csv::Table t = csv::read_table(path);
    int fi = t.require_column("county_fips");
    std::vector<int> idx;
    for (const auto& name : bric_component_names()) idx.push_back(t.require_column(name));
    std::map<std::string, BricRow> out;
    for (const auto& row : t.rows) {
        BricRow b;
        b.county_fips = row[static_cast<size_t>(fi)];
        for (int j : idx) b.components.push_back(csv::to_double(row[static_cast<size_t>(j)]));
        out[b.county_fips] = std::move(b);
    }
    return out;
}

// COVID feature windows. The early window opens with the pandemic onset
// (ahead of the first deviation-rule window) and the rest are the calendar
// quarters that split the later stage.
struct FeatureWindows {
    DateRange early{parse_day("2020-03-01"), parse_day("2020-06-30")};
    DateRange middle{parse_day("2020-07-01"), parse_day("2020-09-30")};
    DateRange late{parse_day("2020-10-01"), parse_day("2020-12-31")};
};

inline const std::vector<std::string>& liwc_feature_categories() {
    static const std::vector<std::string> cats = {"family",    "friend",       "work",
                                                  "leisure",   "home",         "health",
                                                  "affiliation", "we",         "focuspast",
                                                  "focuspresent", "focusfuture"};
    return cats;
}

// One named block of per-community feature columns.
struct FeatureGroup {
    std::string name;
    std::vector<std::string> columns;
    std::map<std::string, std::vector<double>> rows;
};

// Mean per-post category percent over every record in the window.
inline FeatureGroup liwc_group(const CorpusIndex& index, const Lexicon& lexicon,
                               DateRange window) {
    FeatureGroup g;
    g.name = "liwc";
    const auto& cats = liwc_feature_categories();
    for (const auto& c : cats) {
        if (!lexicon.has_category(c)) throw InputError("lexicon lacks required category: " + c);
        g.columns.push_back("liwc_" + c);
    }
    std::vector<size_t> cat_idx;
    for (const auto& c : cats) cat_idx.push_back(lexicon.category_index(c));

    for (const auto& community : index.community_names()) {
        std::vector<double> sums(cats.size(), 0.0);
        int64_t count = 0;
        const auto& buckets = index.days(community);
        for (auto it = buckets.lower_bound(window.first);
             it != buckets.end() && it->first <= window.last; ++it) {
            for (uint32_t ri : it->second) {
                auto scores = lexicon.score_all(tokenize(index.record(ri).body));
                for (size_t c = 0; c < cats.size(); ++c) sums[c] += scores[cat_idx[c]];
                ++count;
            }
        }
        if (count == 0) {
            log::warn("liwc features: " + community + " has no posts in window, dropped");
            continue;
        }
        for (auto& s : sums) s /= static_cast<double>(count);
        g.rows[community] = std::move(sums);
    }
    return g;
}

// Average daily new counts per person plus mandate-day ratio, for each window.
inline FeatureGroup covid_group(const std::map<std::string, CommunityInfo>& communities,
                                const std::map<std::string, CovidCounty>& covid,
                                const std::map<std::string, std::set<Day>>& mask,
                                const std::map<std::string, double>& population,
                                const FeatureWindows& windows) {
    FeatureGroup g;
    g.name = "covid";
    const std::array<std::pair<std::string, DateRange>, 3> spans = {
        std::pair{std::string("early"), windows.early},
        std::pair{std::string("middle"), windows.middle},
        std::pair{std::string("late"), windows.late}};
    for (const auto& [tag, range] : spans) {
        (void)range;
        g.columns.push_back("covid_cases_" + tag);
        g.columns.push_back("covid_deaths_" + tag);
        g.columns.push_back("covid_mask_" + tag);
    }
    for (const auto& [community, info] : communities) {
        auto cv = covid.find(info.county_fips);
        auto pop = population.find(info.county_fips);
        if (cv == covid.end() || pop == population.end()) {
            log::warn("covid features: no county data for " + community + " (fips " +
                      info.county_fips + "), dropped");
            continue;
        }
        auto mk = mask.find(info.county_fips);
        std::vector<double> row;
        for (const auto& [tag, range] : spans) {
            (void)tag;
            double case_sum = cv->second.cases_at(range.last) - cv->second.cases_at(range.first - 1);
            double death_sum =
                cv->second.deaths_at(range.last) - cv->second.deaths_at(range.first - 1);
            double days = static_cast<double>(range.length());
            row.push_back(case_sum / days / pop->second);
            row.push_back(death_sum / days / pop->second);
            int mandate_days = 0;
            if (mk != mask.end())
                for (Day d = range.first; d <= range.last; ++d)
                    mandate_days += mk->second.count(d) ? 1 : 0;
            row.push_back(static_cast<double>(mandate_days) / days);
        }
        g.rows[community] = std::move(row);
    }
    return g;
}

inline FeatureGroup demographics_group(const std::map<std::string, CommunityInfo>& communities,
                                       const std::map<std::string, DemographicRow>& demographics) {
    FeatureGroup g;
    g.name = "demographics";
    g.columns = {"dem_population_density", "dem_median_age",
                 "dem_rent_vs_own",        "dem_median_household_income",
                 "dem_median_housing_cost", "dem_latitude"};
    for (const auto& [community, info] : communities) {
        auto it = demographics.find(info.county_fips);
        if (it == demographics.end()) {
            log::warn("demographics: no row for " + community + " (fips " + info.county_fips +
                      "), dropped");
            continue;
        }
        const DemographicRow& d = it->second;
        g.rows[community] = {d.population_density,       d.median_age,
                             d.rent_vs_own,              d.median_household_income,
                             d.median_housing_cost,      d.latitude};
    }
    return g;
}

inline FeatureGroup graph_group(const CorpusIndex& index, DateRange window,
                                const std::set<std::string>& sentinel_authors) {
    FeatureGroup g;
    g.name = "user-interaction";
    g.columns = {"graph_node_count",     "graph_edge_count", "graph_mean_degree",
                 "graph_density",        "graph_cc_count",   "graph_mean_eccentricity",
                 "graph_mean_cc_size",   "graph_mean_shortest_path", "graph_diameter"};
    for (const auto& community : index.community_names()) {
        try {
            GraphMetrics m = community_graph_metrics(index, community, window, sentinel_authors);
            g.rows[community] = {m.node_count,     m.edge_count, m.mean_degree,
                                 m.density,        m.cc_count,   m.mean_eccentricity,
                                 m.mean_cc_size,   m.mean_shortest_path, m.diameter};
        } catch (const InputError&) {
            log::warn("graph features: " + community + " has no active days in window, dropped");
        }
    }
    return g;
}

inline FeatureGroup tree_group(const CorpusIndex& index, DateRange window) {
    FeatureGroup g;
    g.name = "post-interaction";
    g.columns = {"tree_size", "tree_direct_replies", "tree_leaves", "tree_max_level_width",
                 "tree_min_response_seconds"};
    for (const auto& community : index.community_names()) {
        try {
            TreeMetrics m = community_tree_metrics(index, community, window);
            g.rows[community] = {m.tree_size, m.direct_reply_count, m.leaf_node_count,
                                 m.max_level_width, m.min_response_time_seconds};
        } catch (const InputError&) {
            log::warn("tree features: " + community + " has no posts in window, dropped");
        }
    }
    return g;
}

// Seeded sample of up to sample_size window posts per community; features are
// the mean external score over sampled posts that actually have one.
inline FeatureGroup pragmatic_group(const CorpusIndex& index, DateRange window, int sample_size,
                                    uint64_t seed,
                                    const std::unordered_map<std::string, double>& toxicity,
                                    const std::unordered_map<std::string, double>& empathy) {
    if (sample_size < 1) throw InputError("pragmatic sample size must be >= 1");
    FeatureGroup g;
    g.name = "pragmatic";
    g.columns = {"prag_toxicity", "prag_empathy"};
    for (const auto& community : index.community_names()) {
        std::vector<uint32_t> pool;
        const auto& buckets = index.days(community);
        for (auto it = buckets.lower_bound(window.first);
             it != buckets.end() && it->first <= window.last; ++it)
            pool.insert(pool.end(), it->second.begin(), it->second.end());
        if (pool.empty()) {
            log::warn("pragmatic features: " + community + " has no posts in window, dropped");
            continue;
        }
        size_t take = std::min(pool.size(), static_cast<size_t>(sample_size));
        Rng rng(mix_seed(seed, community));
        // partial Fisher-Yates; prefix of length `take` is the sample
        for (size_t i = 0; i < take; ++i) {
            size_t j = i + rng.uniform_index(pool.size() - i);
            std::swap(pool[i], pool[j]);
        }
        double tox_sum = 0, emp_sum = 0;
        int tox_n = 0, emp_n = 0;
        for (size_t i = 0; i < take; ++i) {
            const std::string& id = index.record(pool[i]).id;
            if (auto it = toxicity.find(id); it != toxicity.end()) {
                tox_sum += it->second;
                ++tox_n;
            }
            if (auto it = empathy.find(id); it != empathy.end()) {
                emp_sum += it->second;
                ++emp_n;
            }
        }
        if (tox_n == 0 || emp_n == 0) {
            log::warn("pragmatic features: " + community + " has no scored posts, dropped");
            continue;
        }
        if (tox_n * 2 < static_cast<int>(take) || emp_n * 2 < static_cast<int>(take))
            log::warn("pragmatic features: " + community + ": fewer than half of sampled posts scored");
        g.rows[community] = {tox_sum / tox_n, emp_sum / emp_n};
    }
    return g;
}

struct FeatureMatrix {
    std::vector<std::string> communities;   // sorted, defines row order
    std::vector<std::string> column_names;  // group-prefixed, stable order
    Eigen::MatrixXd values;
    std::vector<RecoveryLabel> labels;

    int column_index(const std::string& name) const {
        for (size_t j = 0; j < column_names.size(); ++j)
            if (column_names[j] == name) return static_cast<int>(j);
        return -1;
    }
};

// Inner join of the groups on community name, labels required. Row order is
// the sorted community name, so assembly is independent of group argument
// order and of map iteration details.
inline FeatureMatrix assemble(const std::vector<FeatureGroup>& groups,
                              const std::map<std::string, RecoveryLabel>& labels) {
    if (groups.empty()) throw InputError("assemble requires at least one feature group");
    std::vector<std::string> keep;
    for (const auto& [community, label] : labels) {
        (void)label;
        bool everywhere = true;
        for (const auto& g : groups)
            if (!g.rows.count(community)) {
                log::warn("assemble: " + community + " missing from group " + g.name + ", dropped");
                everywhere = false;
                break;
            }
        if (everywhere) keep.push_back(community);
    }
    for (const auto& g : groups)
        for (const auto& [community, row] : g.rows) {
            (void)row;
            if (!labels.count(community))
                log::warn("assemble: " + community + " has features but no label, dropped");
        }
    if (keep.empty()) throw InputError("assemble: no community present in every feature group");

    FeatureMatrix m;
    m.communities = keep;  // labels map is ordered, keep is already sorted
    for (const auto& g : groups)
        m.column_names.insert(m.column_names.end(), g.columns.begin(), g.columns.end());
    m.values.resize(static_cast<Eigen::Index>(keep.size()),
                    static_cast<Eigen::Index>(m.column_names.size()));
    for (size_t r = 0; r < keep.size(); ++r) {
        Eigen::Index c = 0;
        for (const auto& g : groups) {
            const auto& row = g.rows.at(keep[r]);
            for (double v : row) m.values(static_cast<Eigen::Index>(r), c++) = v;
        }
        m.labels.push_back(labels.at(keep[r]));
    }
    return m;
}

}  // namespace citywell

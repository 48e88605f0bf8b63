#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "citywell/csv.hpp"
#include "citywell/date.hpp"
#include "citywell/error.hpp"
#include "citywell/pipeline.hpp"
#include "citywell/resilience.hpp"
#include "citywell/rng.hpp"

namespace citywell {

// Scripted archive generator. Each community follows one of the three
// trajectory shapes: the affected ones damp their positive-word rate from
// 2020-03-15, and the recovered one restores it after June. The drop is far
// outside the forecast band by construction, so the intended label is
// unambiguous at the default thresholds.
struct SynthCommunity {
    std::string name;
    std::string fips;
    RecoveryLabel kind = RecoveryLabel::unaffected;
};

struct SynthConfig {
    std::vector<SynthCommunity> communities;
    DateRange window{parse_day("2017-01-01"), parse_day("2020-12-31")};
    int submissions_per_day = 6;
    int comments_per_day = 12;
    int tokens_per_record = 24;
    double q_pos = 0.10;            // baseline chance a token is a positive word
    double q_neg = 0.10;
    double depressed_q_pos = 0.05;  // positive rate while affected
    double season_amplitude = 0.01;
    int n_authors = 60;
    double deleted_prob = 0.02;
    uint64_t seed = 0;
};

inline std::vector<SynthCommunity> default_synth_communities(int unaffected, int recovered,
                                                             int non_recovered) {
    std::vector<SynthCommunity> out;
    int fips = 10001;
    auto add = [&](int count, RecoveryLabel kind, const char* prefix) {
        for (int i = 0; i < count; ++i) {
            SynthCommunity c;
            c.name = fmt::format("{}{}", prefix, i);
            c.fips = std::to_string(fips);
            fips += 2;
            c.kind = kind;
            out.push_back(std::move(c));
        }
    };
    add(unaffected, RecoveryLabel::unaffected, "steadyville");
    add(recovered, RecoveryLabel::recovered, "reboundton");
    add(non_recovered, RecoveryLabel::non_recovered, "fallowfield");
    return out;
}

struct SynthPaths {
    std::string records;
    std::string communities;
    std::string lexicon;
    std::string demographics;
    std::string population;
    std::string covid;
    std::string mask;
    std::string bric;
    std::string toxicity;
    std::string empathy;
    std::string config;
};

namespace detail {

inline const std::vector<std::string>& synth_pos_words() {
    static const std::vector<std::string> w = {"great", "happy", "smile", "cheer", "glad",
                                               "hope",  "enjoy", "love",  "nice",  "proud"};
    return w;
}

inline const std::vector<std::string>& synth_neg_words() {
    static const std::vector<std::string> w = {"sad",  "angry", "worry",  "fear",   "gloom",
                                               "cry",  "hate",  "upset",  "lonely", "grim"};
    return w;
}

inline const std::vector<std::string>& synth_filler_words() {
    static const std::vector<std::string> w = {
        "the",     "street",  "paper",    "coffee",  "morning", "bus",      "road",
        "weather", "shop",    "news",     "river",   "bridge",  "market",   "corner",
        "ticket",  "library", "station",  "dinner",  "traffic", "project",  "lights",
        "bakery",  "friend",  "buddy",    "family",  "mother",  "work",     "office",
        "meeting", "game",    "festival", "museum",  "park",    "playing",  "played",
        "house",   "kitchen", "garden",   "window",  "health",  "doctor",   "clinic",
        "we",      "our",     "team",     "together", "neighbor", "was",    "yesterday",
        "did",     "is",      "now",      "today",   "here",    "will",     "tomorrow",
        "soon",    "plan"};
    return w;
}

inline void write_synth_lexicon(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << "# synthetic affect and topic lexicon\n";
    for (const auto& w : synth_pos_words()) out << "posemo," << w << "\n";
    for (const auto& w : synth_neg_words()) out << "negemo," << w << "\n";
    const std::vector<std::pair<std::string, std::vector<std::string>>> cats = {
        {"family", {"family", "mother", "father", "cousin"}},
        {"friend", {"friend", "buddy", "pal"}},
        {"work", {"work", "job", "office", "meeting"}},
        {"leisure", {"game", "festival", "museum", "park", "play*"}},
        {"home", {"house", "kitchen", "garden", "window"}},
        {"health", {"health", "doctor", "clinic", "flu"}},
        {"affiliation", {"we", "our", "team", "together", "neighbor"}},
        {"we", {"we", "our", "us"}},
        {"focuspast", {"was", "yesterday", "ago", "did"}},
        {"focuspresent", {"is", "now", "today", "here"}},
        {"focusfuture", {"will", "tomorrow", "soon", "plan"}}};
    for (const auto& [cat, words] : cats)
        for (const auto& w : words) out << cat << "," << w << "\n";
}

inline bool synth_depressed(const SynthCommunity& c, Day d) {
    static const Day onset = parse_day("2020-03-15");
    static const Day rebound = parse_day("2020-07-01");
    switch (c.kind) {
        case RecoveryLabel::unaffected: return false;
        case RecoveryLabel::recovered: return d >= onset && d < rebound;
        case RecoveryLabel::non_recovered: return d >= onset;
    }
    return false;
}

}  // namespace detail

// Writes the archive plus every side input the pipeline consumes, and a
// config.json wired to the bundle. Fully determined by the config seed.
inline SynthPaths write_synthetic_bundle(const std::string& dir, const SynthConfig& cfg) {
    namespace fs = std::filesystem;
    if (cfg.communities.empty()) throw InputError("synthetic bundle needs at least one community");
    fs::create_directories(dir);
    SynthPaths paths;
    auto in = [&](const char* name) { return (fs::path(dir) / name).string(); };
    paths.records = in("records.jsonl");
    paths.communities = in("communities.csv");
    paths.lexicon = in("lexicon.csv");
    paths.demographics = in("demographics.csv");
    paths.population = in("population.csv");
    paths.covid = in("covid.csv");
    paths.mask = in("mask.csv");
    paths.bric = in("bric.csv");
    paths.toxicity = in("toxicity.csv");
    paths.empathy = in("empathy.csv");
    paths.config = in("config.json");

    detail::write_synth_lexicon(paths.lexicon);

    {
        csv::Writer w(paths.communities);
        w.row({"community", "city", "state", "county_fips"});
        for (const auto& c : cfg.communities) {
            std::string city = c.name;
            city[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(city[0])));
            w.row({c.name, city, "TS", c.fips});
        }
    }

    // archive + per-record scores stream out together
    std::ofstream records(paths.records, std::ios::binary);
    if (!records) throw InputError("cannot write " + paths.records);
    std::ofstream toxicity(paths.toxicity, std::ios::binary);
    std::ofstream empathy(paths.empathy, std::ios::binary);
    toxicity << "post_id,score\n";
    empathy << "post_id,score\n";

    const auto& pos_words = detail::synth_pos_words();
    const auto& neg_words = detail::synth_neg_words();
    const auto& filler = detail::synth_filler_words();

    for (const auto& c : cfg.communities) {
        Rng rng(mix_seed(cfg.seed, "records:" + c.name));
        int64_t counter = 0;
        auto author = [&]() -> std::string {
            if (rng.uniform() < cfg.deleted_prob) return "[deleted]";
            return fmt::format("user{:03d}", rng.uniform_index(static_cast<uint64_t>(cfg.n_authors)));
        };
        auto body = [&](Day d) {
            bool low = detail::synth_depressed(c, d);
            double t = static_cast<double>(d - cfg.window.first);
            double qp = (low ? cfg.depressed_q_pos : cfg.q_pos) +
                        cfg.season_amplitude * std::sin(2.0 * M_PI * t / 365.25);
            std::string text;
            if (counter % 128 == 0) text = "see https://news.example.com/a?id=1 ";
            for (int k = 0; k < cfg.tokens_per_record; ++k) {
                double u = rng.uniform();
                const std::vector<std::string>* pool = &filler;
                if (u < qp)
                    pool = &pos_words;
                else if (u < qp + cfg.q_neg)
                    pool = &neg_words;
                text += (*pool)[rng.uniform_index(pool->size())];
                text += ' ';
            }
            text.pop_back();
            return text;
        };
        auto scores_for = [&](const std::string& id) {
            // roughly one in ten records goes unscored
            if (rng.uniform() < 0.9)
                toxicity << id << "," << csv::num(0.05 + 0.25 * rng.uniform()) << "\n";
            if (rng.uniform() < 0.9)
                empathy << id << "," << csv::num(0.3 + 0.4 * rng.uniform()) << "\n";
        };
        auto emit = [&](const nlohmann::json& j) { records << j.dump() << "\n"; };

        for (Day d = cfg.window.first; d <= cfg.window.last; ++d) {
            int64_t day_start = static_cast<int64_t>(d) * 86400;
            struct ThreadRef {
                std::string submission_id;
                std::vector<std::pair<std::string, int64_t>> comments;  // id, time
                int64_t submission_time;
            };
            std::vector<ThreadRef> threads;
            for (int s = 0; s < cfg.submissions_per_day; ++s) {
                std::string id = fmt::format("t3_{}_{}", c.name, counter++);
                int64_t at = day_start + 600 * s + static_cast<int64_t>(rng.uniform_index(600));
                emit({{"id", id},
                      {"author", author()},
                      {"created_at", at},
                      {"body", body(d)},
                      {"community", c.name},
                      {"kind", "submission"},
                      {"link_id", id}});
                scores_for(id);
                threads.push_back({id, {}, at});
            }
            for (int k = 0; k < cfg.comments_per_day; ++k) {
                ThreadRef& th = threads[rng.uniform_index(threads.size())];
                std::string parent = th.submission_id;
                int64_t parent_time = th.submission_time;
                if (!th.comments.empty() && rng.uniform() < 0.4) {
                    auto& [pid, pt] = th.comments[rng.uniform_index(th.comments.size())];
                    parent = pid;
                    parent_time = pt;
                }
                std::string id = fmt::format("t1_{}_{}", c.name, counter++);
                int64_t at = parent_time + 60 + static_cast<int64_t>(rng.uniform_index(6 * 3600));
                at = std::min(at, day_start + 86399);
                emit({{"id", id},
                      {"author", author()},
                      {"created_at", at},
                      {"body", body(d)},
                      {"community", c.name},
                      {"kind", "comment"},
                      {"parent_id", parent},
                      {"link_id", th.submission_id}});
                scores_for(id);
                th.comments.emplace_back(id, at);
            }
        }
    }
    records.close();
    toxicity.close();
    empathy.close();

    {
        csv::Writer w(paths.demographics);
        w.row({"county_fips", "population_density", "median_age", "rent_vs_own",
               "median_household_income", "median_housing_cost", "latitude"});
        int i = 0;
        for (const auto& c : cfg.communities) {
            Rng rng(mix_seed(cfg.seed, "demo:" + c.fips));
            w.row({c.fips, csv::num(400.0 + 350.0 * i + 50.0 * rng.uniform()),
                   csv::num(28.0 + rng.uniform(0.0, 14.0)), csv::num(0.35 + rng.uniform(0.0, 0.5)),
                   csv::num(42000.0 + rng.uniform(0.0, 40000.0)),
                   csv::num(800.0 + rng.uniform(0.0, 900.0)), csv::num(26.0 + rng.uniform(0.0, 21.0))});
            ++i;
        }
    }
    {
        csv::Writer w(paths.population);
        w.row({"county_fips", "population"});
        int i = 0;
        for (const auto& c : cfg.communities)
            w.row({c.fips, std::to_string(120000 + 15000 * i++)});
    }

    // Cumulative county counts with a couple of scripted reporting glitches
    // (the loader is expected to clip them). Severity scales with impact.
    {
        csv::Writer covid(paths.covid);
        covid.row({"county_fips", "date", "cases", "deaths"});
        csv::Writer mask(paths.mask);
        mask.row({"county_fips", "date", "mandate"});
        Day covid_start = parse_day("2020-03-01");
        Day covid_end = parse_day("2020-12-31");
        Day mask_start = parse_day("2020-04-10");
        for (const auto& c : cfg.communities) {
            Rng rng(mix_seed(cfg.seed, "covid:" + c.fips));
            double rate = c.kind == RecoveryLabel::unaffected   ? 3.0
                          : c.kind == RecoveryLabel::recovered ? 9.0
                                                               : 18.0;
            double cases = 0.0;
            int row = 0;
            double mask_ratio = c.kind == RecoveryLabel::unaffected   ? 0.8
                                : c.kind == RecoveryLabel::recovered ? 0.6
                                                                     : 0.4;
            for (Day d = covid_start; d <= covid_end; ++d) {
                cases += rate * (1.0 + rng.uniform());
                double reported_cases = std::floor(cases);
                double reported_deaths = std::floor(cases / 40.0);
                if (row == 100 || row == 200) reported_cases -= 25;  // glitch to clip
                covid.row({c.fips, format_day(d), csv::num(reported_cases),
                           csv::num(reported_deaths)});
                if (d >= mask_start)
                    mask.row({c.fips, format_day(d),
                              rng.uniform() < mask_ratio ? "1" : "0"});
                ++row;
            }
        }
    }

    // BRIC scores trend upward with resilience so label/score correlation is
    // present but noisy.
    {
        csv::Writer w(paths.bric);
        std::vector<std::string> header = {"county_fips"};
        for (const auto& n : bric_component_names()) header.push_back(n);
        w.row(header);
        for (const auto& c : cfg.communities) {
            Rng rng(mix_seed(cfg.seed, "bric:" + c.fips));
            double base = 2.2 + 0.35 * label_ordinal(c.kind);
            std::vector<std::string> row = {c.fips};
            double total = 0.0;
            for (size_t k = 0; k + 1 < bric_component_names().size(); ++k) {
                double v = base + rng.uniform(-0.15, 0.15);
                total += v;
                row.push_back(csv::num(v));
            }
            row.push_back(csv::num(total / 6.0));
            w.row(row);
        }
    }

    RunConfig rc;
    rc.records_path = paths.records;
    rc.communities_path = paths.communities;
    rc.lexicon_path = paths.lexicon;
    rc.demographics_path = paths.demographics;
    rc.population_path = paths.population;
    rc.covid_path = paths.covid;
    rc.mask_path = paths.mask;
    rc.bric_path = paths.bric;
    rc.toxicity_scores_path = paths.toxicity;
    rc.empathy_scores_path = paths.empathy;
    rc.out_dir = (fs::path(dir) / "out").string();
    rc.seed = cfg.seed;
    rc.study = cfg.window;
    save_run_config(rc, paths.config);
    return paths;
}

}  // namespace citywell

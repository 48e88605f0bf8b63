#include "citywell/pipeline.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "citywell/synthetic.hpp"
#include "support/tmpdir.hpp"

namespace fs = std::filesystem;
using namespace citywell;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    EXPECT_TRUE(in.good()) << path;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path);
    EXPECT_TRUE(in.good()) << path;
    nlohmann::json j;
    in >> j;
    return j;
}

}  // namespace

TEST(PipelineConfig, JsonRoundTripPreservesEverything) {
    RunConfig c;
    c.records_path = "a.jsonl";
    c.communities_path = "b.csv";
    c.lexicon_path = "c.csv";
    c.demographics_path = "d.csv";
    c.population_path = "e.csv";
    c.covid_path = "f.csv";
    c.mask_path = "g.csv";
    c.bric_path = "h.csv";
    c.toxicity_scores_path = "i.csv";
    c.empathy_scores_path = "j.csv";
    c.out_dir = "somewhere/out";
    c.seed = 424242;
    c.jobs = 3;
    c.timezone = "-05:00";
    c.study = parse_range("2016-06-01", "2021-03-31");
    c.znorm_window = parse_range("2016-06-01", "2020-01-31");
    c.train_end = parse_day("2020-01-31");
    c.horizon = parse_range("2020-02-01", "2021-03-31");
    c.min_active_days = 120;
    c.activity_years = {2018, 2019};
    c.activity_counts_comments = true;
    c.pos_category = "good";
    c.neg_category = "bad";
    c.deviation.early = parse_range("2020-04-15", "2020-06-15");
    c.deviation.middle = {parse_range("2020-06-16", "2020-08-31"),
                          parse_range("2020-09-01", "2020-11-30"),
                          parse_range("2020-12-01", "2021-01-31")};
    c.deviation_threshold = 0.4;
    c.feature_windows.early = parse_range("2020-02-01", "2020-05-31");
    c.feature_windows.middle = parse_range("2020-06-01", "2020-08-31");
    c.feature_windows.late = parse_range("2020-09-01", "2020-12-31");
    c.feature_year = parse_range("2018-01-01", "2018-12-31");
    c.pragmatic_sample_size = 500;
    c.deleted_authors = {"[gone]"};
    c.forecast.n_changepoints = 7;
    c.forecast.changepoint_range = 0.6;
    c.forecast.fourier_order = 4;
    c.forecast.tau = 0.2;
    c.forecast_samples = 250;
    c.logistic.l2 = 2.5;
    c.logistic.tol = 1e-6;
    c.logistic.max_iter = 77;
    c.smote_k = 3;

    RunConfig r = run_config_from_json(to_json(c));
    EXPECT_EQ(r.records_path, c.records_path);
    EXPECT_EQ(r.communities_path, c.communities_path);
    EXPECT_EQ(r.lexicon_path, c.lexicon_path);
    EXPECT_EQ(r.demographics_path, c.demographics_path);
    EXPECT_EQ(r.population_path, c.population_path);
    EXPECT_EQ(r.covid_path, c.covid_path);
    EXPECT_EQ(r.mask_path, c.mask_path);
    EXPECT_EQ(r.bric_path, c.bric_path);
    EXPECT_EQ(r.toxicity_scores_path, c.toxicity_scores_path);
    EXPECT_EQ(r.empathy_scores_path, c.empathy_scores_path);
    EXPECT_EQ(r.out_dir, c.out_dir);
    EXPECT_EQ(r.seed, c.seed);
    EXPECT_EQ(r.jobs, c.jobs);
    EXPECT_EQ(r.timezone, c.timezone);
    EXPECT_EQ(r.study.first, c.study.first);
    EXPECT_EQ(r.study.last, c.study.last);
    EXPECT_EQ(r.znorm_window.first, c.znorm_window.first);
    EXPECT_EQ(r.znorm_window.last, c.znorm_window.last);
    EXPECT_EQ(r.train_end, c.train_end);
    EXPECT_EQ(r.horizon.first, c.horizon.first);
    EXPECT_EQ(r.horizon.last, c.horizon.last);
    EXPECT_EQ(r.min_active_days, c.min_active_days);
    EXPECT_EQ(r.activity_years, c.activity_years);
    EXPECT_EQ(r.activity_counts_comments, c.activity_counts_comments);
    EXPECT_EQ(r.pos_category, c.pos_category);
    EXPECT_EQ(r.neg_category, c.neg_category);
    EXPECT_EQ(r.deviation.early.first, c.deviation.early.first);
    EXPECT_EQ(r.deviation.early.last, c.deviation.early.last);
    ASSERT_EQ(r.deviation.middle.size(), c.deviation.middle.size());
    for (size_t i = 0; i < c.deviation.middle.size(); ++i) {
        EXPECT_EQ(r.deviation.middle[i].first, c.deviation.middle[i].first);
        EXPECT_EQ(r.deviation.middle[i].last, c.deviation.middle[i].last);
    }
    EXPECT_DOUBLE_EQ(r.deviation_threshold, c.deviation_threshold);
    EXPECT_EQ(r.feature_windows.early.first, c.feature_windows.early.first);
    EXPECT_EQ(r.feature_windows.middle.last, c.feature_windows.middle.last);
    EXPECT_EQ(r.feature_windows.late.first, c.feature_windows.late.first);
    EXPECT_EQ(r.feature_year.first, c.feature_year.first);
    EXPECT_EQ(r.feature_year.last, c.feature_year.last);
    EXPECT_EQ(r.pragmatic_sample_size, c.pragmatic_sample_size);
    EXPECT_EQ(r.deleted_authors, c.deleted_authors);
    EXPECT_EQ(r.forecast.n_changepoints, c.forecast.n_changepoints);
    EXPECT_DOUBLE_EQ(r.forecast.changepoint_range, c.forecast.changepoint_range);
    EXPECT_EQ(r.forecast.fourier_order, c.forecast.fourier_order);
    EXPECT_DOUBLE_EQ(r.forecast.tau, c.forecast.tau);
    EXPECT_EQ(r.forecast_samples, c.forecast_samples);
    EXPECT_DOUBLE_EQ(r.logistic.l2, c.logistic.l2);
    EXPECT_DOUBLE_EQ(r.logistic.tol, c.logistic.tol);
    EXPECT_EQ(r.logistic.max_iter, c.logistic.max_iter);
    EXPECT_EQ(r.smote_k, c.smote_k);
}

TEST(PipelineConfig, MissingKeysFallBackToDefaults) {
    testsupport::TmpDir tmp;
    std::string path = tmp.file("minimal.json");
    {
        std::ofstream out(path);
        out << R"({"records": "r.jsonl", "seed": 9})" << "\n";
    }
    RunConfig c = load_run_config(path);
    EXPECT_EQ(c.records_path, "r.jsonl");
    EXPECT_EQ(c.seed, 9u);
    EXPECT_EQ(c.jobs, 1);
    EXPECT_EQ(c.timezone, "UTC");
    EXPECT_EQ(c.out_dir, "out");
    EXPECT_EQ(c.study.first, parse_day("2017-01-01"));
    EXPECT_EQ(c.study.last, parse_day("2020-12-31"));
    EXPECT_EQ(c.znorm_window.last, parse_day("2020-02-29"));
    EXPECT_EQ(c.train_end, parse_day("2020-02-29"));
    EXPECT_EQ(c.horizon.first, parse_day("2020-03-01"));
    EXPECT_EQ(c.min_active_days, 300);
    EXPECT_EQ(c.activity_years, (std::vector<int>{2017, 2018, 2019, 2020}));
    EXPECT_FALSE(c.activity_counts_comments);
    EXPECT_EQ(c.pos_category, "posemo");
    EXPECT_EQ(c.neg_category, "negemo");
    EXPECT_EQ(c.deviation.early.first, parse_day("2020-04-01"));
    ASSERT_EQ(c.deviation.middle.size(), 2u);
    EXPECT_EQ(c.deviation.middle[0].first, parse_day("2020-07-01"));
    EXPECT_EQ(c.deviation.middle[1].last, parse_day("2020-12-31"));
    EXPECT_DOUBLE_EQ(c.deviation_threshold, 0.25);
    EXPECT_EQ(c.feature_windows.early.first, parse_day("2020-03-01"));
    EXPECT_EQ(c.feature_year.first, parse_day("2019-01-01"));
    EXPECT_EQ(c.pragmatic_sample_size, 18250);
    EXPECT_EQ(c.deleted_authors, (std::vector<std::string>{"[deleted]", "[removed]"}));
    EXPECT_EQ(c.forecast.n_changepoints, 25);
    EXPECT_DOUBLE_EQ(c.forecast.changepoint_range, 0.8);
    EXPECT_EQ(c.forecast.fourier_order, 10);
    EXPECT_DOUBLE_EQ(c.forecast.tau, 0.05);
    EXPECT_EQ(c.forecast_samples, 1000);
    EXPECT_DOUBLE_EQ(c.logistic.l2, 1.0);
    EXPECT_EQ(c.smote_k, 5);

    EXPECT_THROW(load_run_config(tmp.file("nonexistent.json")), InputError);
    std::string broken = tmp.file("broken.json");
    {
        std::ofstream out(broken);
        out << "{not json";
    }
    EXPECT_THROW(load_run_config(broken), InputError);
}

TEST(PipelineConfig, SafeFilenameAndTaskParsing) {
    EXPECT_EQ(detail::safe_filename("all-selected"), "all-selected");
    EXPECT_EQ(detail::safe_filename("metro area/7"), "metro_area_7");
    EXPECT_EQ(detail::safe_filename("a.b c"), "a_b_c");

    EXPECT_EQ(parse_task("impact"), Task::impact);
    EXPECT_EQ(parse_task("recovery"), Task::recovery);
    EXPECT_THROW(parse_task("severity"), InputError);

    const auto& names = feature_set_names();
    EXPECT_EQ(names.size(), 8u);
    EXPECT_EQ(detail::groups_for_set("all"),
              (std::vector<std::string>{"demographics", "covid", "user-interaction",
                                        "post-interaction", "pragmatic", "liwc"}));
    EXPECT_EQ(detail::groups_for_set("all-selected"),
              (std::vector<std::string>{"covid", "pragmatic", "liwc"}));
    EXPECT_EQ(detail::groups_for_set("liwc"), (std::vector<std::string>{"liwc"}));
    EXPECT_THROW(detail::groups_for_set("everything"), InputError);
}

TEST(Synthetic, BundleWritesLoadableInputs) {
    testsupport::TmpDir tmp;
    SynthConfig cfg;
    cfg.communities = default_synth_communities(1, 1, 0);
    cfg.window = parse_range("2019-01-01", "2019-01-14");
    cfg.submissions_per_day = 2;
    cfg.comments_per_day = 3;
    cfg.n_authors = 8;
    cfg.seed = 5;
    SynthPaths paths = write_synthetic_bundle(tmp.path(), cfg);

    for (const std::string& p :
         {paths.records, paths.communities, paths.lexicon, paths.demographics, paths.population,
          paths.covid, paths.mask, paths.bric, paths.toxicity, paths.empathy, paths.config})
        EXPECT_TRUE(fs::exists(p)) << p;

    LoadOptions options;
    options.study_range = cfg.window;
    RecordStream stream = load_records(paths.records, options);
    EXPECT_EQ(stream.stats.malformed, 0u);
    EXPECT_EQ(stream.stats.retained, 2u * 14u * 5u);

    Lexicon lex = Lexicon::load(paths.lexicon);
    for (const char* cat : {"posemo", "negemo"}) EXPECT_TRUE(lex.has_category(cat)) << cat;
    for (const auto& cat : liwc_feature_categories()) EXPECT_TRUE(lex.has_category(cat)) << cat;

    auto infos = load_communities(paths.communities);
    ASSERT_EQ(infos.size(), 2u);
    EXPECT_EQ(infos[0].community, "steadyville0");
    EXPECT_EQ(infos[1].community, "reboundton0");

    auto demo = load_demographics(paths.demographics);
    auto pop = load_population(paths.population);
    auto covid = load_covid(paths.covid);  // scripted reporting glitches get clipped here
    auto mask = load_mask(paths.mask);
    auto bric = load_bric(paths.bric);
    for (const auto& c : cfg.communities) {
        EXPECT_TRUE(demo.count(c.fips)) << c.fips;
        EXPECT_TRUE(pop.count(c.fips));
        ASSERT_TRUE(covid.count(c.fips));
        EXPECT_TRUE(mask.count(c.fips));
        ASSERT_TRUE(bric.count(c.fips));
        EXPECT_EQ(bric.at(c.fips).components.size(), bric_component_names().size());
        const CovidCounty& county = covid.at(c.fips);
        for (size_t i = 1; i < county.cases.size(); ++i) {
            EXPECT_GE(county.cases[i], county.cases[i - 1]);
            EXPECT_GE(county.deaths[i], county.deaths[i - 1]);
        }
    }

    auto toxicity = load_scores(paths.toxicity);
    auto empathy = load_scores(paths.empathy);
    EXPECT_GT(toxicity.size(), 0u);
    EXPECT_GT(empathy.size(), 0u);

    RunConfig rc = load_run_config(paths.config);
    EXPECT_EQ(rc.records_path, paths.records);
    EXPECT_EQ(rc.seed, cfg.seed);
    EXPECT_EQ(rc.study.first, cfg.window.first);
    EXPECT_EQ(rc.out_dir, (fs::path(tmp.path()) / "out").string());
}

TEST(Pipeline, DegenerateSeriesSkippedWithWarning) {
    testsupport::TmpDir tmp;
    Day start = parse_day("2019-01-01");
    std::string records_path = tmp.file("records.jsonl");
    {
        std::ofstream out(records_path);
        auto emit = [&](const std::string& community, int day_offset, int n, const char* body) {
            int64_t at = (static_cast<int64_t>(start) + day_offset) * 86400 + 3600;
            out << nlohmann::json{{"id", community + "_" + std::to_string(n)},
                                  {"author", "u1"},
                                  {"created_at", at},
                                  {"body", body},
                                  {"community", community},
                                  {"kind", "submission"},
                                  {"link_id", community + "_" + std::to_string(n)}}
                       .dump()
                << "\n";
        };
        for (int d = 0; d < 10; ++d) {
            emit("varied", d, d, d % 2 == 0 ? "happy happy sad sad" : "happy sad sad sad");
            emit("flat", d, d, "happy sad");
        }
    }
    std::string communities_path = tmp.file("communities.csv");
    {
        std::ofstream out(communities_path);
        out << "community,city,state,county_fips\nvaried,Varied,TS,10001\nflat,Flat,TS,10003\n";
    }
    std::string lexicon_path = tmp.file("lexicon.csv");
    {
        std::ofstream out(lexicon_path);
        out << "posemo,happy\nnegemo,sad\n";
    }

    RunConfig cfg;
    cfg.records_path = records_path;
    cfg.communities_path = communities_path;
    cfg.lexicon_path = lexicon_path;
    cfg.out_dir = tmp.file("out");
    cfg.study = parse_range("2019-01-01", "2019-12-31");
    cfg.znorm_window = parse_range("2019-01-01", "2019-01-10");
    cfg.min_active_days = 5;
    cfg.activity_years = {2019};

    PipelineContext ctx(cfg);
    run_ingest(ctx);

    csv::Table active = csv::read_table((ctx.stage_dir("ingest") / "active_communities.csv").string());
    ASSERT_EQ(active.rows.size(), 2u);
    int ri = active.require_column("retained");
    for (const auto& row : active.rows) EXPECT_EQ(row[static_cast<size_t>(ri)], "1");

    // constant affect rates have no z-scale, so the flat community drops out
    run_wellbeing(ctx);
    csv::Table index = csv::read_table((ctx.stage_dir("wellbeing") / "index.csv").string());
    ASSERT_EQ(index.rows.size(), 1u);
    EXPECT_EQ(index.rows[0][0], "varied");
    EXPECT_EQ(index.rows[0][1], "varied.csv");
    EXPECT_EQ(index.rows[0][2], "10");
    EXPECT_TRUE(fs::exists(ctx.stage_dir("wellbeing") / "varied.csv"));
    EXPECT_FALSE(fs::exists(ctx.stage_dir("wellbeing") / "flat.csv"));

    csv::Table series = csv::read_table((ctx.stage_dir("wellbeing") / "varied.csv").string());
    EXPECT_EQ(series.header,
              (std::vector<std::string>{"date", "posemo_raw", "negemo_raw", "wellbeing"}));
    ASSERT_EQ(series.rows.size(), 10u);
    EXPECT_EQ(series.rows[0][0], "2019-01-01");
    EXPECT_DOUBLE_EQ(csv::to_double(series.rows[0][1]), 50.0);
    EXPECT_DOUBLE_EQ(csv::to_double(series.rows[1][1]), 25.0);
}

TEST(Pipeline, StagesRequireUpstreamArtifacts) {
    testsupport::TmpDir tmp;
    RunConfig cfg;
    cfg.out_dir = tmp.file("out");
    PipelineContext ctx(cfg);

    try {
        run_wellbeing(ctx);
        FAIL() << "expected missing-artifact error";
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("run ingest first"), std::string::npos) << e.what();
    }
    EXPECT_THROW(run_forecast(ctx), InputError);
    EXPECT_THROW(run_label(ctx), InputError);
    EXPECT_THROW(run_features(ctx), InputError);
    EXPECT_THROW(run_train(ctx, Task::impact, "all"), InputError);
    EXPECT_THROW(run_correlate(ctx), InputError);
    EXPECT_THROW(run_report(ctx), InputError);
}

// Full run over a scripted archive: three communities that never dip, three
// that dip and rebound, three that dip and stay down. Every stage artifact is
// checked and the labels must come back exactly as scripted.
TEST(Pipeline, EndToEndRecoversScriptedLabels) {
    testsupport::TmpDir tmp;
    SynthConfig synth;
    synth.communities = default_synth_communities(3, 3, 3);
    synth.submissions_per_day = 2;
    synth.comments_per_day = 3;
    synth.tokens_per_record = 20;
    synth.n_authors = 12;
    synth.seed = 77;
    SynthPaths paths = write_synthetic_bundle(tmp.path(), synth);

    RunConfig cfg = load_run_config(paths.config);
    PipelineContext ctx(cfg);

    run_ingest(ctx);
    {
        csv::Table t = csv::read_table((ctx.stage_dir("ingest") / "active_communities.csv").string());
        ASSERT_EQ(t.rows.size(), 9u);
        int ri = t.require_column("retained");
        for (const auto& row : t.rows) EXPECT_EQ(row[static_cast<size_t>(ri)], "1");
        nlohmann::json stats = read_json(ctx.stage_dir("ingest") / "stats.json");
        EXPECT_EQ(stats.at("malformed").get<int64_t>(), 0);
        EXPECT_EQ(stats.at("communities_active").get<int64_t>(), 9);
        EXPECT_EQ(stats.at("lines_read"), stats.at("retained"));
    }

    run_wellbeing(ctx);
    {
        csv::Table t = csv::read_table((ctx.stage_dir("wellbeing") / "index.csv").string());
        ASSERT_EQ(t.rows.size(), 9u);
        for (const auto& row : t.rows) EXPECT_EQ(row[2], "1461");  // a record every study day
    }

    run_forecast(ctx);
    {
        csv::Table t = csv::read_table((ctx.stage_dir("forecast") / "index.csv").string());
        ASSERT_EQ(t.rows.size(), 9u);
        csv::Table one = csv::read_table((ctx.stage_dir("forecast") / t.rows[0][1]).string());
        EXPECT_EQ(one.header,
                  (std::vector<std::string>{"date", "yhat", "lower95", "upper95", "observed"}));
        ASSERT_EQ(one.rows.size(), 306u);  // 2020-03-01 through 2020-12-31
        EXPECT_EQ(one.rows.front()[0], "2020-03-01");
        EXPECT_EQ(one.rows.back()[0], "2020-12-31");
        for (const auto& row : one.rows) {
            double lower = csv::to_double(row[2]);
            double yhat = csv::to_double(row[1]);
            double upper = csv::to_double(row[3]);
            EXPECT_LE(lower, yhat);
            EXPECT_LE(yhat, upper);
            EXPECT_FALSE(row[4].empty());
        }
    }

    run_label(ctx);
    std::map<std::string, RecoveryLabel> labels =
        detail::read_labels(ctx.stage_dir("label") / "labels.csv", "test");
    ASSERT_EQ(labels.size(), 9u);
    for (const auto& c : synth.communities) {
        ASSERT_TRUE(labels.count(c.name)) << c.name;
        EXPECT_EQ(labels.at(c.name), c.kind) << c.name;
        EXPECT_TRUE(fs::exists(ctx.stage_dir("label") / (c.name + ".svg")));
    }
    {
        csv::Table t = csv::read_table((ctx.stage_dir("label") / "labels.csv").string());
        EXPECT_EQ(t.header, (std::vector<std::string>{"community", "label", "early_fraction",
                                                      "middle_fraction_1", "middle_fraction_2"}));
        int ei = t.require_column("early_fraction");
        for (const auto& row : t.rows) {
            double f = csv::to_double(row[static_cast<size_t>(ei)]);
            EXPECT_GE(f, 0.0);
            EXPECT_LE(f, 1.0);
        }
    }

    run_features(ctx);
    {
        nlohmann::json columns = read_json(ctx.stage_dir("features") / "columns.json");
        std::vector<std::string> group_names;
        size_t n_columns = 0;
        for (const auto& g : columns.at("groups")) {
            group_names.push_back(g.at("name").get<std::string>());
            n_columns += g.at("columns").size();
        }
        EXPECT_EQ(group_names,
                  (std::vector<std::string>{"demographics", "covid", "user-interaction",
                                            "post-interaction", "pragmatic", "liwc"}));
        EXPECT_EQ(n_columns, 6u + 9u + 9u + 5u + 2u + 11u);

        csv::Table t = csv::read_table((ctx.stage_dir("features") / "features.csv").string());
        ASSERT_EQ(t.rows.size(), 9u);
        EXPECT_EQ(t.header.size(), 2u + n_columns);
        EXPECT_EQ(t.header[0], "community");
        EXPECT_EQ(t.header[1], "label");
        int di = t.require_column("graph_density");
        for (const auto& row : t.rows) {
            double d = csv::to_double(row[static_cast<size_t>(di)]);
            EXPECT_GE(d, 0.0);
            EXPECT_LE(d, 1.0);
        }
    }

    // onset-only rule: impact never sees mid or late pandemic counts
    TrainResult impact_covid = run_train(ctx, Task::impact, "covid");
    EXPECT_EQ(impact_covid.columns,
              (std::vector<std::string>{"covid_cases_early", "covid_deaths_early",
                                        "covid_mask_early"}));
    EXPECT_EQ(impact_covid.communities.size(), 9u);

    TrainResult recovery_covid = run_train(ctx, Task::recovery, "covid");
    EXPECT_EQ(recovery_covid.columns.size(), 9u);
    EXPECT_EQ(recovery_covid.communities.size(), 6u);  // affected communities only
    for (const auto& name : recovery_covid.communities)
        EXPECT_TRUE(name.rfind("reboundton", 0) == 0 || name.rfind("fallowfield", 0) == 0) << name;

    TrainResult impact_all = run_train(ctx, Task::impact, "all");
    EXPECT_EQ(impact_all.columns.size(), 42u - 6u);  // late covid columns excluded
    {
        const CVReport& r = impact_all.report;
        for (double v : {r.accuracy, r.precision_macro, r.recall_macro, r.f1_macro, r.auc}) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
        ASSERT_EQ(r.folds.size(), 9u);
        csv::Table metrics =
            csv::read_table((ctx.stage_dir("train") / "impact_all_metrics.csv").string());
        EXPECT_EQ(metrics.header, (std::vector<std::string>{"accuracy", "precision_macro",
                                                            "recall_macro", "f1_macro", "auc"}));
        ASSERT_EQ(metrics.rows.size(), 1u);
        EXPECT_NEAR(csv::to_double(metrics.rows[0][0]), r.accuracy, 1e-9);
        EXPECT_NEAR(csv::to_double(metrics.rows[0][4]), r.auc, 1e-9);

        csv::Table coef =
            csv::read_table((ctx.stage_dir("train") / "impact_all_coefficients.csv").string());
        ASSERT_EQ(coef.rows.size(), impact_all.columns.size());
        for (size_t i = 1; i < coef.rows.size(); ++i)
            EXPECT_GE(csv::to_double(coef.rows[i - 1][1]), csv::to_double(coef.rows[i][1]));

        nlohmann::json folds = read_json(ctx.stage_dir("train") / "impact_all_folds.json");
        EXPECT_EQ(folds.at("task"), "impact");
        EXPECT_EQ(folds.at("feature_set"), "all");
        EXPECT_EQ(folds.at("folds").size(), 9u);
    }

    run_correlate(ctx);
    {
        csv::Table t = csv::read_table((ctx.stage_dir("correlate") / "bric_spearman.csv").string());
        EXPECT_EQ(t.header, (std::vector<std::string>{"component", "rho", "p_value", "n"}));
        ASSERT_EQ(t.rows.size(), bric_component_names().size());
        for (size_t i = 0; i < t.rows.size(); ++i) {
            EXPECT_EQ(t.rows[i][0], bric_component_names()[i]);
            // scripted scores rise with the resilience ordinal
            EXPECT_GT(csv::to_double(t.rows[i][1]), 0.5);
            EXPECT_EQ(t.rows[i][3], "9");
        }
    }

    run_report(ctx);
    {
        nlohmann::json report = read_json(ctx.stage_dir("report") / "report.json");
        EXPECT_EQ(report.at("communities").get<int64_t>(), 9);
        EXPECT_EQ(report.at("label_counts").at("Unaffected").get<int>(), 3);
        EXPECT_EQ(report.at("label_counts").at("Recovered").get<int>(), 3);
        EXPECT_EQ(report.at("label_counts").at("NonRecovered").get<int>(), 3);
        EXPECT_TRUE(report.at("train").contains("impact_all"));
        EXPECT_TRUE(report.at("train").contains("recovery_covid"));
        EXPECT_EQ(report.at("bric_spearman").size(), bric_component_names().size());
        csv::Table summary = csv::read_table((ctx.stage_dir("report") / "summary.csv").string());
        EXPECT_EQ(summary.header, (std::vector<std::string>{"section", "key", "value"}));
        EXPECT_GT(summary.rows.size(), 4u);
    }

    // each stage manifest records true content hashes of its outputs
    for (const char* stage : {"ingest", "wellbeing", "forecast", "label", "features", "train",
                              "correlate", "report"}) {
        fs::path manifest_path = ctx.stage_dir(stage) / "manifest.json";
        ASSERT_TRUE(fs::exists(manifest_path)) << stage;
        nlohmann::json manifest = read_json(manifest_path);
        EXPECT_EQ(manifest.at("stage"), stage);
        EXPECT_EQ(manifest.at("config_hash"), hash_string(to_json(cfg).dump()));
        ASSERT_GT(manifest.at("outputs").size(), 0u) << stage;
        for (const auto& [path, digest] : manifest.at("outputs").items())
            EXPECT_EQ(digest.get<std::string>(), hash_file(path)) << path;
    }

    // reruns from the stored artifacts are byte-identical
    std::string labels_before = slurp(ctx.stage_dir("label") / "labels.csv");
    csv::Table fc_index = csv::read_table((ctx.stage_dir("forecast") / "index.csv").string());
    std::string forecast_before = slurp(ctx.stage_dir("forecast") / fc_index.rows[0][1]);
    PipelineContext again(cfg);
    run_forecast(again);
    run_label(again);
    EXPECT_EQ(slurp(ctx.stage_dir("label") / "labels.csv"), labels_before);
    EXPECT_EQ(slurp(ctx.stage_dir("forecast") / fc_index.rows[0][1]), forecast_before);
}

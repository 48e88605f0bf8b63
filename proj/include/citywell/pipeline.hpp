#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "citywell/affect.hpp"
#include "citywell/corpus.hpp"
#include "citywell/csv.hpp"
#include "citywell/cv.hpp"
#include "citywell/date.hpp"
#include "citywell/error.hpp"
#include "citywell/features.hpp"
#include "citywell/forecast.hpp"
#include "citywell/hash.hpp"
#include "citywell/lexicon.hpp"
#include "citywell/log.hpp"
#include "citywell/parallel.hpp"
#include "citywell/resilience.hpp"
#include "citywell/svg.hpp"

namespace citywell {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct RunConfig {
    std::string records_path;
    std::string communities_path;
    std::string lexicon_path;
    std::string demographics_path;
    std::string population_path;
    std::string covid_path;
    std::string mask_path;
    std::string bric_path;
    std::string toxicity_scores_path;
    std::string empathy_scores_path;
    std::string out_dir = "out";

    uint64_t seed = 0;
    int jobs = 1;
    std::string timezone = "UTC";
    DateRange study{parse_day("2017-01-01"), parse_day("2020-12-31")};
    DateRange znorm_window{parse_day("2017-01-01"), parse_day("2020-02-29")};
    Day train_end = parse_day("2020-02-29");
    DateRange horizon{parse_day("2020-03-01"), parse_day("2020-12-31")};

    int min_active_days = 300;
    std::vector<int> activity_years = {2017, 2018, 2019, 2020};
    bool activity_counts_comments = false;
    std::string pos_category = "posemo";
    std::string neg_category = "negemo";

    StageWindows deviation = default_stage_windows();
    double deviation_threshold = 0.25;

    FeatureWindows feature_windows;
    DateRange feature_year{parse_day("2019-01-01"), parse_day("2019-12-31")};
    int pragmatic_sample_size = 18250;
    std::vector<std::string> deleted_authors = {"[deleted]", "[removed]"};

    ForecastConfig forecast;
    int forecast_samples = 1000;

    LogisticConfig logistic;
    int smote_k = 5;
};

namespace detail {

inline json range_to_json(DateRange r) {
    return json{{"start", format_day(r.first)}, {"end", format_day(r.last)}};
}

inline DateRange range_from_json(const json& j) {
    return {parse_day(j.at("start").get<std::string>()), parse_day(j.at("end").get<std::string>())};
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (j.contains(key)) return j.at(key).get<T>();
    return fallback;
}

}  // namespace detail

inline json to_json(const RunConfig& c) {
    json deviation_middle = json::array();
    for (const auto& r : c.deviation.middle) deviation_middle.push_back(detail::range_to_json(r));
    return json{
        {"records", c.records_path},
        {"communities", c.communities_path},
        {"lexicon", c.lexicon_path},
        {"demographics", c.demographics_path},
        {"population", c.population_path},
        {"covid", c.covid_path},
        {"mask", c.mask_path},
        {"bric", c.bric_path},
        {"toxicity_scores", c.toxicity_scores_path},
        {"empathy_scores", c.empathy_scores_path},
        {"out", c.out_dir},
        {"seed", c.seed},
        {"jobs", c.jobs},
        {"timezone", c.timezone},
        {"study", detail::range_to_json(c.study)},
        {"znorm", detail::range_to_json(c.znorm_window)},
        {"train_end", format_day(c.train_end)},
        {"horizon", detail::range_to_json(c.horizon)},
        {"min_active_days", c.min_active_days},
        {"activity_years", c.activity_years},
        {"activity_counts_comments", c.activity_counts_comments},
        {"pos_category", c.pos_category},
        {"neg_category", c.neg_category},
        {"deviation",
         {{"early", detail::range_to_json(c.deviation.early)},
          {"middle", deviation_middle},
          {"threshold", c.deviation_threshold}}},
        {"features",
         {{"early", detail::range_to_json(c.feature_windows.early)},
          {"middle", detail::range_to_json(c.feature_windows.middle)},
          {"late", detail::range_to_json(c.feature_windows.late)},
          {"year", detail::range_to_json(c.feature_year)},
          {"pragmatic_sample_size", c.pragmatic_sample_size}}},
        {"deleted_authors", c.deleted_authors},
        {"forecast",
         {{"n_changepoints", c.forecast.n_changepoints},
          {"changepoint_range", c.forecast.changepoint_range},
          {"fourier_order", c.forecast.fourier_order},
          {"tau", c.forecast.tau},
          {"n_samples", c.forecast_samples}}},
        {"model",
         {{"l2", c.logistic.l2},
          {"tol", c.logistic.tol},
          {"max_iter", c.logistic.max_iter},
          {"smote_k", c.smote_k}}}};
}

inline RunConfig run_config_from_json(const json& j) {
    RunConfig c;
    c.records_path = detail::get_or<std::string>(j, "records", "");
    c.communities_path = detail::get_or<std::string>(j, "communities", "");
    c.lexicon_path = detail::get_or<std::string>(j, "lexicon", "");
    c.demographics_path = detail::get_or<std::string>(j, "demographics", "");
    c.population_path = detail::get_or<std::string>(j, "population", "");
    c.covid_path = detail::get_or<std::string>(j, "covid", "");
    c.mask_path = detail::get_or<std::string>(j, "mask", "");
    c.bric_path = detail::get_or<std::string>(j, "bric", "");
    c.toxicity_scores_path = detail::get_or<std::string>(j, "toxicity_scores", "");
    c.empathy_scores_path = detail::get_or<std::string>(j, "empathy_scores", "");
    c.out_dir = detail::get_or<std::string>(j, "out", c.out_dir);
    c.seed = detail::get_or<uint64_t>(j, "seed", c.seed);
    c.jobs = detail::get_or<int>(j, "jobs", c.jobs);
    c.timezone = detail::get_or<std::string>(j, "timezone", c.timezone);
    if (j.contains("study")) c.study = detail::range_from_json(j.at("study"));
    if (j.contains("znorm")) c.znorm_window = detail::range_from_json(j.at("znorm"));
    if (j.contains("train_end")) c.train_end = parse_day(j.at("train_end").get<std::string>());
    if (j.contains("horizon")) c.horizon = detail::range_from_json(j.at("horizon"));
    c.min_active_days = detail::get_or<int>(j, "min_active_days", c.min_active_days);
    c.activity_years = detail::get_or<std::vector<int>>(j, "activity_years", c.activity_years);
    c.activity_counts_comments =
        detail::get_or<bool>(j, "activity_counts_comments", c.activity_counts_comments);
    c.pos_category = detail::get_or<std::string>(j, "pos_category", c.pos_category);
    c.neg_category = detail::get_or<std::string>(j, "neg_category", c.neg_category);
    if (j.contains("deviation")) {
        const json& d = j.at("deviation");
        if (d.contains("early")) c.deviation.early = detail::range_from_json(d.at("early"));
        if (d.contains("middle")) {
            c.deviation.middle.clear();
            for (const auto& r : d.at("middle")) c.deviation.middle.push_back(detail::range_from_json(r));
        }
        c.deviation_threshold = detail::get_or<double>(d, "threshold", c.deviation_threshold);
    }
    if (j.contains("features")) {
        const json& f = j.at("features");
        if (f.contains("early")) c.feature_windows.early = detail::range_from_json(f.at("early"));
        if (f.contains("middle")) c.feature_windows.middle = detail::range_from_json(f.at("middle"));
        if (f.contains("late")) c.feature_windows.late = detail::range_from_json(f.at("late"));
        if (f.contains("year")) c.feature_year = detail::range_from_json(f.at("year"));
        c.pragmatic_sample_size =
            detail::get_or<int>(f, "pragmatic_sample_size", c.pragmatic_sample_size);
    }
    c.deleted_authors =
        detail::get_or<std::vector<std::string>>(j, "deleted_authors", c.deleted_authors);
    if (j.contains("forecast")) {
        const json& f = j.at("forecast");
        c.forecast.n_changepoints = detail::get_or<int>(f, "n_changepoints", c.forecast.n_changepoints);
        c.forecast.changepoint_range =
            detail::get_or<double>(f, "changepoint_range", c.forecast.changepoint_range);
        c.forecast.fourier_order = detail::get_or<int>(f, "fourier_order", c.forecast.fourier_order);
        c.forecast.tau = detail::get_or<double>(f, "tau", c.forecast.tau);
        c.forecast_samples = detail::get_or<int>(f, "n_samples", c.forecast_samples);
    }
    if (j.contains("model")) {
        const json& m = j.at("model");
        c.logistic.l2 = detail::get_or<double>(m, "l2", c.logistic.l2);
        c.logistic.tol = detail::get_or<double>(m, "tol", c.logistic.tol);
        c.logistic.max_iter = detail::get_or<int>(m, "max_iter", c.logistic.max_iter);
        c.smote_k = detail::get_or<int>(m, "smote_k", c.smote_k);
    }
    return c;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("config " + path + ": " + e.what());
    }
    return run_config_from_json(j);
}

inline void save_run_config(const RunConfig& config, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write config file: " + path);
    out << to_json(config).dump(2) << "\n";
}

namespace detail {

inline std::string safe_filename(const std::string& name) {
    std::string out;
    for (char ch : name)
        out += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_') ? ch : '_';
    return out;
}

inline void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InputError("cannot create directory " + dir.string() + ": " + ec.message());
}

inline void require_artifact(const fs::path& path, const std::string& stage,
                             const std::string& upstream) {
    if (!fs::exists(path))
        throw InputError("stage " + stage + ": missing upstream artifact " + path.string() +
                         " (run " + upstream + " first)");
}

}  // namespace detail

// Lazily loaded shared state so stages composed in one process parse the
// archive once. Stage functions stay pure with respect to the filesystem
// artifacts: everything a later stage needs is also on disk.
class PipelineContext {
public:
    explicit PipelineContext(RunConfig config) : config_(std::move(config)) {}

    const RunConfig& config() const { return config_; }
    RunConfig& config() { return config_; }

    fs::path out_dir() const { return fs::path(config_.out_dir); }
    fs::path stage_dir(const std::string& stage) const { return out_dir() / stage; }

    const CorpusIndex& corpus() {
        if (!corpus_) {
            LoadOptions options;
            options.study_range = config_.study;
            options.tz = parse_tz(config_.timezone);
            RecordStream stream = load_records(config_.records_path, options);
            load_stats_ = stream.stats;
            corpus_.emplace(partition_by_day(std::move(stream), options.tz));
        }
        return *corpus_;
    }

    const LoadStats& load_stats() {
        corpus();
        return load_stats_;
    }

    const std::map<std::string, CommunityInfo>& communities() {
        if (!communities_) {
            std::map<std::string, CommunityInfo> by_name;
            for (auto& info : load_communities(config_.communities_path))
                by_name.emplace(info.community, std::move(info));
            communities_ = std::move(by_name);
        }
        return *communities_;
    }

    const Lexicon& lexicon() {
        if (!lexicon_) lexicon_ = Lexicon::load(config_.lexicon_path);
        return *lexicon_;
    }

    // active community names, read back from the ingest artifact
    std::vector<std::string> active_communities(const std::string& stage) {
        fs::path path = stage_dir("ingest") / "active_communities.csv";
        detail::require_artifact(path, stage, "ingest");
        csv::Table t = csv::read_table(path.string());
        int ci = t.require_column("community");
        int ri = t.require_column("retained");
        std::vector<std::string> names;
        for (const auto& row : t.rows)
            if (row[static_cast<size_t>(ri)] == "1") names.push_back(row[static_cast<size_t>(ci)]);
        if (names.empty()) throw InputError("stage " + stage + ": no active communities in " + path.string());
        return names;
    }

private:
    RunConfig config_;
    std::optional<CorpusIndex> corpus_;
    std::optional<std::map<std::string, CommunityInfo>> communities_;
    std::optional<Lexicon> lexicon_;
    LoadStats load_stats_;
};

// Every stage writes a manifest naming its config hash and the content hash
// of each file read and written; reruns on identical inputs must reproduce
// identical manifests, so no timestamps or machine details belong here.
inline void write_manifest(PipelineContext& ctx, const std::string& stage,
                           const std::vector<std::string>& inputs,
                           const std::vector<std::string>& outputs) {
    json m;
    m["stage"] = stage;
    m["config_hash"] = hash_string(to_json(ctx.config()).dump());
    json jin = json::object();
    for (const auto& p : inputs) jin[p] = hash_file(p);
    json jout = json::object();
    for (const auto& p : outputs) jout[p] = hash_file(p);
    m["inputs"] = jin;
    m["outputs"] = jout;
    fs::path path = ctx.stage_dir(stage) / "manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << m.dump(2) << "\n";
}

// ---------------------------------------------------------------- ingest --

inline void run_ingest(PipelineContext& ctx) {
    const RunConfig& cfg = ctx.config();
    const auto& corpus = ctx.corpus();
    const auto& communities = ctx.communities();

    std::set<std::string> active = filter_active_communities(
        corpus, cfg.min_active_days, cfg.activity_years, cfg.activity_counts_comments);

    fs::path dir = ctx.stage_dir("ingest");
    detail::ensure_dir(dir);
    fs::path table_path = dir / "active_communities.csv";
    {
        csv::Writer w(table_path.string());
        w.row({"community", "city", "state", "county_fips", "records", "retained"});
        for (const auto& name : corpus.community_names()) {
            auto meta = communities.find(name);
            if (meta == communities.end()) {
                log::warn("ingest: community " + name + " has records but no metadata row");
                continue;
            }
            int64_t count = 0;
            for (const auto& [day, bucket] : corpus.days(name)) {
                (void)day;
                count += static_cast<int64_t>(bucket.size());
            }
            w.row({name, meta->second.city, meta->second.state, meta->second.county_fips,
                   std::to_string(count), active.count(name) ? "1" : "0"});
        }
    }

    const LoadStats& stats = ctx.load_stats();
    json s{{"lines_read", stats.lines_read},
           {"retained", stats.retained},
           {"malformed", stats.malformed},
           {"out_of_range", stats.out_of_range},
           {"duplicates_replaced", stats.duplicates_replaced},
           {"communities_total", corpus.community_names().size()},
           {"communities_active", active.size()}};
    fs::path stats_path = dir / "stats.json";
    {
        std::ofstream out(stats_path, std::ios::binary);
        out << s.dump(2) << "\n";
    }
    write_manifest(ctx, "ingest", {cfg.records_path, cfg.communities_path},
                   {table_path.string(), stats_path.string()});
}

// ------------------------------------------------------------- wellbeing --

inline void run_wellbeing(PipelineContext& ctx) {
    const RunConfig& cfg = ctx.config();
    std::vector<std::string> active = ctx.active_communities("wellbeing");
    const auto& corpus = ctx.corpus();
    const auto& lexicon = ctx.lexicon();

    fs::path dir = ctx.stage_dir("wellbeing");
    detail::ensure_dir(dir);

    struct Entry {
        std::string community;
        std::string file;
        size_t days = 0;
        bool ok = false;
    };
    std::vector<Entry> entries(active.size());
    parallel_for(active.size(), cfg.jobs, [&](size_t i) {
        const std::string& name = active[i];
        Entry& e = entries[i];
        e.community = name;
        AffectSeries series;
        try {
            series = community_affect_series(corpus, lexicon, name, cfg.pos_category,
                                             cfg.neg_category, cfg.znorm_window);
        } catch (const NumericError& err) {
            log::warn("wellbeing: skipping " + name + ": " + err.what());
            return;
        }
        fs::path path = dir / (detail::safe_filename(name) + ".csv");
        csv::Writer w(path.string());
        w.row({"date", "posemo_raw", "negemo_raw", "wellbeing"});
        for (size_t k = 0; k < series.wellbeing.days.size(); ++k) {
            Day d = series.wellbeing.days[k];
            size_t pi = static_cast<size_t>(series.pos_raw.find(d));
            size_t ni = static_cast<size_t>(series.neg_raw.find(d));
            w.row({format_day(d), csv::num(series.pos_raw.values[pi]),
                   csv::num(series.neg_raw.values[ni]), csv::num(series.wellbeing.values[k])});
        }
        e.file = path.filename().string();
        e.days = series.wellbeing.days.size();
        e.ok = true;
    });

    fs::path index_path = dir / "index.csv";
    std::vector<std::string> outputs;
    {
        csv::Writer w(index_path.string());
        w.row({"community", "file", "days"});
        for (const auto& e : entries) {
            if (!e.ok) continue;
            w.row({e.community, e.file, std::to_string(e.days)});
            outputs.push_back((dir / e.file).string());
        }
    }
    if (outputs.empty()) throw NumericError("wellbeing: every community was degenerate");
    outputs.push_back(index_path.string());
    write_manifest(ctx, "wellbeing",
                   {(ctx.stage_dir("ingest") / "active_communities.csv").string(),
                    cfg.records_path, cfg.lexicon_path},
                   outputs);
}

namespace detail {

struct SeriesIndexEntry {
    std::string community;
    std::string file;
};

inline std::vector<SeriesIndexEntry> read_stage_index(const fs::path& dir,
                                                      const std::string& stage,
                                                      const std::string& upstream) {
    fs::path path = dir / "index.csv";
    require_artifact(path, stage, upstream);
    csv::Table t = csv::read_table(path.string());
    int ci = t.require_column("community");
    int fi = t.require_column("file");
    std::vector<SeriesIndexEntry> out;
    for (const auto& row : t.rows)
        out.push_back({row[static_cast<size_t>(ci)], row[static_cast<size_t>(fi)]});
    return out;
}

// wellbeing column of one community series file
inline DailySeries read_wellbeing_series(const fs::path& path) {
    csv::Table t = csv::read_table(path.string());
    int di = t.require_column("date");
    int wi = t.require_column("wellbeing");
    DailySeries s;
    for (const auto& row : t.rows)
        s.push(parse_day(row[static_cast<size_t>(di)]),
               csv::to_double(row[static_cast<size_t>(wi)]));
    return s;
}

struct StoredForecast {
    Forecast forecast;
    PreparedSeries observed;  // horizon days only, as stored
};

inline StoredForecast read_forecast_csv(const fs::path& path) {
    csv::Table t = csv::read_table(path.string());
    int di = t.require_column("date");
    int yi = t.require_column("yhat");
    int li = t.require_column("lower95");
    int ui = t.require_column("upper95");
    int oi = t.require_column("observed");
    StoredForecast out;
    if (t.rows.empty()) throw InputError(path.string() + ": empty forecast file");
    out.forecast.start = parse_day(t.rows.front()[static_cast<size_t>(di)]);
    out.observed.start = out.forecast.start;
    for (const auto& row : t.rows) {
        out.forecast.yhat.push_back(csv::to_double(row[static_cast<size_t>(yi)]));
        out.forecast.lower95.push_back(csv::to_double(row[static_cast<size_t>(li)]));
        out.forecast.upper95.push_back(csv::to_double(row[static_cast<size_t>(ui)]));
        const std::string& obs = row[static_cast<size_t>(oi)];
        if (!obs.empty()) {
            out.observed.values.push_back(csv::to_double(obs));
            out.observed.observed.push_back(true);
        }
    }
    return out;
}

}  // namespace detail

// -------------------------------------------------------------- forecast --

inline void run_forecast(PipelineContext& ctx) {
    const RunConfig& cfg = ctx.config();
    fs::path well_dir = ctx.stage_dir("wellbeing");
    auto index = detail::read_stage_index(well_dir, "forecast", "wellbeing");

    fs::path dir = ctx.stage_dir("forecast");
    detail::ensure_dir(dir);

    std::vector<std::string> inputs{(well_dir / "index.csv").string()};
    std::vector<std::string> outputs(index.size());
    std::vector<std::string> files(index.size());
    for (size_t i = 0; i < index.size(); ++i) inputs.push_back((well_dir / index[i].file).string());

    parallel_for(index.size(), cfg.jobs, [&](size_t i) {
        DailySeries raw = detail::read_wellbeing_series(well_dir / index[i].file);
        PreparedSeries prepared = prepare(raw, cfg.study);
        if (prepared.last_day() < cfg.train_end)
            throw NumericError("forecast: " + index[i].community + " has no data through " +
                               format_day(cfg.train_end));
        PreparedSeries train = prepared.slice({prepared.start, cfg.train_end});

        ForecastConfig fc = cfg.forecast;
        fc.seed = mix_seed(cfg.seed, "forecast:" + index[i].community);
        ForecastModel model = fit_forecast(train, fc);
        Forecast fcst = predict(model, cfg.horizon, cfg.forecast_samples, fc.seed);

        fs::path path = dir / index[i].file;
        csv::Writer w(path.string());
        w.row({"date", "yhat", "lower95", "upper95", "observed"});
        for (size_t k = 0; k < fcst.size(); ++k) {
            Day d = fcst.day_at(k);
            std::string obs = prepared.contains(d) ? csv::num(prepared.at(d)) : std::string();
            w.row({format_day(d), csv::num(fcst.yhat[k]), csv::num(fcst.lower95[k]),
                   csv::num(fcst.upper95[k]), obs});
        }
        files[i] = path.filename().string();
        outputs[i] = path.string();
    });

    fs::path index_path = dir / "index.csv";
    {
        csv::Writer w(index_path.string());
        w.row({"community", "file"});
        for (size_t i = 0; i < index.size(); ++i) w.row({index[i].community, files[i]});
    }
    outputs.push_back(index_path.string());
    write_manifest(ctx, "forecast", inputs, outputs);
}

// ----------------------------------------------------------------- label --

inline void run_label(PipelineContext& ctx) {
    const RunConfig& cfg = ctx.config();
    fs::path fc_dir = ctx.stage_dir("forecast");
    fs::path well_dir = ctx.stage_dir("wellbeing");
    auto index = detail::read_stage_index(fc_dir, "label", "forecast");

    fs::path dir = ctx.stage_dir("label");
    detail::ensure_dir(dir);

    std::vector<std::string> inputs{(fc_dir / "index.csv").string()};
    std::vector<std::string> outputs;
    std::vector<ResilienceResult> results(index.size());
    std::vector<std::string> svg_files(index.size());
    for (const auto& e : index) inputs.push_back((fc_dir / e.file).string());

    parallel_for(index.size(), cfg.jobs, [&](size_t i) {
        detail::StoredForecast stored = detail::read_forecast_csv(fc_dir / index[i].file);
        results[i] = classify_resilience(stored.observed, stored.forecast, cfg.deviation,
                                         cfg.deviation_threshold);

        // plot uses the full observed window, not just the horizon
        fs::path well_path = well_dir / index[i].file;
        PreparedSeries full;
        if (fs::exists(well_path))
            full = prepare(detail::read_wellbeing_series(well_path), cfg.study);
        else
            full = stored.observed;
        fs::path svg_path = dir / (detail::safe_filename(index[i].community) + ".svg");
        write_forecast_svg(svg_path.string(), index[i].community, full, stored.forecast,
                           cfg.horizon.first);
        svg_files[i] = svg_path.string();
    });

    fs::path labels_path = dir / "labels.csv";
    {
        std::vector<std::string> header = {"community", "label", "early_fraction"};
        for (size_t m = 0; m < cfg.deviation.middle.size(); ++m)
            header.push_back("middle_fraction_" + std::to_string(m + 1));
        csv::Writer w(labels_path.string());
        w.row(header);
        for (size_t i = 0; i < index.size(); ++i) {
            std::vector<std::string> row = {index[i].community, to_string(results[i].label),
                                            csv::num(results[i].early_fraction)};
            for (double f : results[i].middle_fractions) row.push_back(csv::num(f));
            w.row(row);
        }
    }
    outputs.push_back(labels_path.string());
    for (const auto& f : svg_files) outputs.push_back(f);
    write_manifest(ctx, "label", inputs, outputs);
}

namespace detail {

inline std::map<std::string, RecoveryLabel> read_labels(const fs::path& labels_path,
                                                        const std::string& stage) {
    require_artifact(labels_path, stage, "label");
    csv::Table t = csv::read_table(labels_path.string());
    int ci = t.require_column("community");
    int li = t.require_column("label");
    std::map<std::string, RecoveryLabel> out;
    for (const auto& row : t.rows)
        out[row[static_cast<size_t>(ci)]] = parse_label(row[static_cast<size_t>(li)]);
    return out;
}

}  // namespace detail

// -------------------------------------------------------------- features --

inline void run_features(PipelineContext& ctx) {
    const RunConfig& cfg = ctx.config();
    auto labels = detail::read_labels(ctx.stage_dir("label") / "labels.csv", "features");
    const auto& corpus = ctx.corpus();
    const auto& lexicon = ctx.lexicon();
    const auto& communities = ctx.communities();

    std::set<std::string> sentinels(cfg.deleted_authors.begin(), cfg.deleted_authors.end());
    auto demographics = load_demographics(cfg.demographics_path);
    auto population = load_population(cfg.population_path);
    auto covid = load_covid(cfg.covid_path);
    auto mask = load_mask(cfg.mask_path);
    auto toxicity = load_scores(cfg.toxicity_scores_path);
    auto empathy = load_scores(cfg.empathy_scores_path);

    // only labeled communities matter for metadata-driven groups
    std::map<std::string, CommunityInfo> labeled_meta;
    for (const auto& [name, label] : labels) {
        (void)label;
        auto it = communities.find(name);
        if (it != communities.end()) labeled_meta.emplace(name, it->second);
    }

    std::vector<FeatureGroup> groups;
    groups.push_back(demographics_group(labeled_meta, demographics));
    groups.push_back(covid_group(labeled_meta, covid, mask, population, cfg.feature_windows));
    groups.push_back(graph_group(corpus, cfg.feature_year, sentinels));
    groups.push_back(tree_group(corpus, cfg.feature_year));
    groups.push_back(pragmatic_group(corpus, cfg.feature_year, cfg.pragmatic_sample_size,
                                     mix_seed(cfg.seed, "pragmatic"), toxicity, empathy));
    groups.push_back(liwc_group(corpus, lexicon, cfg.feature_year));

    FeatureMatrix matrix = assemble(groups, labels);

    fs::path dir = ctx.stage_dir("features");
    detail::ensure_dir(dir);
    fs::path table_path = dir / "features.csv";
    {
        std::vector<std::string> header = {"community", "label"};
        header.insert(header.end(), matrix.column_names.begin(), matrix.column_names.end());
        csv::Writer w(table_path.string());
        w.row(header);
        for (size_t r = 0; r < matrix.communities.size(); ++r) {
            std::vector<std::string> row = {matrix.communities[r], to_string(matrix.labels[r])};
            for (Eigen::Index c = 0; c < matrix.values.cols(); ++c)
                row.push_back(csv::num(matrix.values(static_cast<Eigen::Index>(r), c)));
            w.row(row);
        }
    }
    fs::path columns_path = dir / "columns.json";
    {
        json groups_json = json::array();
        for (const auto& g : groups)
            groups_json.push_back(json{{"name", g.name}, {"columns", g.columns}});
        std::ofstream out(columns_path, std::ios::binary);
        out << json{{"groups", groups_json}}.dump(2) << "\n";
    }
    write_manifest(ctx, "features",
                   {(ctx.stage_dir("label") / "labels.csv").string(), cfg.records_path,
                    cfg.lexicon_path, cfg.demographics_path, cfg.population_path, cfg.covid_path,
                    cfg.mask_path, cfg.toxicity_scores_path, cfg.empathy_scores_path},
                   {table_path.string(), columns_path.string()});
}

// ----------------------------------------------------------------- train --

enum class Task { impact, recovery };

inline Task parse_task(const std::string& s) {
    if (s == "impact") return Task::impact;
    if (s == "recovery") return Task::recovery;
    throw InputError("unknown task: " + s + " (expected impact or recovery)");
}

inline const std::vector<std::string>& feature_set_names() {
    static const std::vector<std::string> names = {"demographics",     "covid",
                                                   "user-interaction", "post-interaction",
                                                   "pragmatic",        "liwc",
                                                   "all",              "all-selected"};
    return names;
}

namespace detail {

// group selection per feature set; "all-selected" keeps the sets that beat
// random on the recovery task
inline std::vector<std::string> groups_for_set(const std::string& set) {
    if (set == "all")
        return {"demographics", "covid", "user-interaction", "post-interaction", "pragmatic",
                "liwc"};
    if (set == "all-selected") return {"covid", "pragmatic", "liwc"};
    for (const auto& n : feature_set_names())
        if (n == set && n != "all" && n != "all-selected") return {n};
    throw InputError("unknown feature set: " + set);
}

}  // namespace detail

struct TrainResult {
    CVReport report;
    std::vector<std::string> columns;
    std::vector<std::string> communities;
};

inline TrainResult run_train(PipelineContext& ctx, Task task, const std::string& feature_set) {
    const RunConfig& cfg = ctx.config();
    fs::path feat_dir = ctx.stage_dir("features");
    fs::path table_path = feat_dir / "features.csv";
    fs::path columns_path = feat_dir / "columns.json";
    detail::require_artifact(table_path, "train", "features");
    detail::require_artifact(columns_path, "train", "features");

    json columns_json;
    {
        std::ifstream in(columns_path);
        in >> columns_json;
    }
    std::vector<std::string> wanted_groups = detail::groups_for_set(feature_set);
    std::vector<std::string> columns;
    for (const auto& g : columns_json.at("groups")) {
        std::string name = g.at("name").get<std::string>();
        if (std::find(wanted_groups.begin(), wanted_groups.end(), name) == wanted_groups.end())
            continue;
        for (const auto& c : g.at("columns")) {
            std::string col = c.get<std::string>();
            // impact prediction may only see onset-window COVID inputs
            if (task == Task::impact && name == "covid" && col.rfind("covid_", 0) == 0 &&
                col.find("_early") == std::string::npos)
                continue;
            columns.push_back(col);
        }
    }
    if (columns.empty()) throw InputError("feature set " + feature_set + " selects no columns");

    csv::Table t = csv::read_table(table_path.string());
    int ci = t.require_column("community");
    int li = t.require_column("label");
    std::vector<int> col_idx;
    for (const auto& c : columns) col_idx.push_back(t.require_column(c));

    std::vector<std::string> communities;
    std::vector<double> ys;
    std::vector<std::vector<double>> rows;
    for (const auto& row : t.rows) {
        RecoveryLabel label = parse_label(row[static_cast<size_t>(li)]);
        double y;
        if (task == Task::impact) {
            y = label == RecoveryLabel::unaffected ? 1.0 : 0.0;
        } else {
            if (label == RecoveryLabel::unaffected) continue;  // recovery is among affected only
            y = label == RecoveryLabel::recovered ? 1.0 : 0.0;
        }
        communities.push_back(row[static_cast<size_t>(ci)]);
        ys.push_back(y);
        std::vector<double> vals;
        for (int j : col_idx) vals.push_back(csv::to_double(row[static_cast<size_t>(j)]));
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw InputError("train: no rows for task");

    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(columns.size()));
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (size_t r = 0; r < rows.size(); ++r) {
        y[static_cast<Eigen::Index>(r)] = ys[r];
        for (size_t c = 0; c < columns.size(); ++c)
            X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }

    CVConfig cv;
    cv.logistic = cfg.logistic;
    cv.smote_k = cfg.smote_k;
    cv.seed = mix_seed(cfg.seed, "train:" + std::string(task == Task::impact ? "impact" : "recovery") +
                                     ":" + feature_set);
    TrainResult result;
    result.report = loo_cv(X, y, cv);
    result.columns = columns;
    result.communities = communities;

    std::string tag = std::string(task == Task::impact ? "impact" : "recovery") + "_" +
                      detail::safe_filename(feature_set);
    fs::path dir = ctx.stage_dir("train");
    detail::ensure_dir(dir);

    fs::path metrics_path = dir / (tag + "_metrics.csv");
    {
        csv::Writer w(metrics_path.string());
        w.row({"accuracy", "precision_macro", "recall_macro", "f1_macro", "auc"});
        w.row({csv::num(result.report.accuracy), csv::num(result.report.precision_macro),
               csv::num(result.report.recall_macro), csv::num(result.report.f1_macro),
               csv::num(result.report.auc)});
    }
    fs::path coef_path = dir / (tag + "_coefficients.csv");
    {
        std::vector<std::pair<std::string, double>> coefs;
        for (size_t c = 0; c < columns.size(); ++c)
            coefs.emplace_back(columns[c], result.report.mean_coefficients[static_cast<Eigen::Index>(c)]);
        std::stable_sort(coefs.begin(), coefs.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        csv::Writer w(coef_path.string());
        w.row({"feature", "mean_coefficient"});
        for (const auto& [name, value] : coefs) w.row({name, csv::num(value)});
    }
    fs::path folds_path = dir / (tag + "_folds.json");
    {
        json folds = json::array();
        for (const auto& f : result.report.folds)
            folds.push_back(json{{"community", communities[static_cast<size_t>(f.held_out)]},
                                 {"probability", f.probability},
                                 {"predicted", f.predicted},
                                 {"actual", f.actual}});
        std::ofstream out(folds_path, std::ios::binary);
        out << json{{"task", task == Task::impact ? "impact" : "recovery"},
                    {"feature_set", feature_set},
                    {"mean_intercept", result.report.mean_intercept},
                    {"folds", folds}}
                   .dump(2)
            << "\n";
    }
    write_manifest(ctx, "train", {table_path.string(), columns_path.string()},
                   {metrics_path.string(), coef_path.string(), folds_path.string()});
    return result;
}

// ------------------------------------------------------------- correlate --

inline void run_correlate(PipelineContext& ctx) {
    const RunConfig& cfg = ctx.config();
    auto labels = detail::read_labels(ctx.stage_dir("label") / "labels.csv", "correlate");
    const auto& communities = ctx.communities();
    auto bric = load_bric(cfg.bric_path);

    std::vector<double> ordinal;
    std::vector<std::vector<double>> components(bric_component_names().size());
    for (const auto& [name, label] : labels) {
        auto meta = communities.find(name);
        if (meta == communities.end()) continue;
        auto row = bric.find(meta->second.county_fips);
        if (row == bric.end()) {
            log::warn("correlate: no resilience scores for " + name + " (fips " +
                      meta->second.county_fips + ")");
            continue;
        }
        ordinal.push_back(static_cast<double>(label_ordinal(label)));
        for (size_t c = 0; c < components.size(); ++c)
            components[c].push_back(row->second.components[c]);
    }

    fs::path dir = ctx.stage_dir("correlate");
    detail::ensure_dir(dir);
    fs::path out_path = dir / "bric_spearman.csv";
    {
        csv::Writer w(out_path.string());
        w.row({"component", "rho", "p_value", "n"});
        for (size_t c = 0; c < components.size(); ++c) {
            stats::SpearmanResult r = stats::spearman(ordinal, components[c]);
            w.row({bric_component_names()[c], csv::num(r.rho), csv::num(r.p_value),
                   std::to_string(ordinal.size())});
        }
    }
    write_manifest(ctx, "correlate",
                   {(ctx.stage_dir("label") / "labels.csv").string(), cfg.bric_path},
                   {out_path.string()});
}

// ---------------------------------------------------------------- report --

inline void run_report(PipelineContext& ctx) {
    fs::path labels_path = ctx.stage_dir("label") / "labels.csv";
    detail::require_artifact(labels_path, "report", "label");
    auto labels = detail::read_labels(labels_path, "report");

    json report;
    std::map<std::string, int> counts;
    for (const auto& [name, label] : labels) {
        (void)name;
        ++counts[to_string(label)];
    }
    report["label_counts"] = counts;
    report["communities"] = labels.size();

    json trained = json::object();
    fs::path train_dir = ctx.stage_dir("train");
    std::vector<std::string> inputs{labels_path.string()};
    if (fs::exists(train_dir)) {
        std::vector<fs::path> metric_files;
        for (const auto& entry : fs::directory_iterator(train_dir))
            if (entry.path().filename().string().ends_with("_metrics.csv"))
                metric_files.push_back(entry.path());
        std::sort(metric_files.begin(), metric_files.end());
        for (const auto& path : metric_files) {
            csv::Table t = csv::read_table(path.string());
            if (t.rows.empty()) continue;
            json row = json::object();
            for (size_t c = 0; c < t.header.size(); ++c)
                row[t.header[c]] = csv::to_double(t.rows[0][c]);
            std::string tag = path.filename().string();
            tag = tag.substr(0, tag.size() - std::string("_metrics.csv").size());
            trained[tag] = row;
            inputs.push_back(path.string());
        }
    }
    report["train"] = trained;

    fs::path bric_path = ctx.stage_dir("correlate") / "bric_spearman.csv";
    if (fs::exists(bric_path)) {
        csv::Table t = csv::read_table(bric_path.string());
        json rows = json::array();
        for (const auto& row : t.rows)
            rows.push_back(json{{"component", row[0]},
                                {"rho", csv::to_double(row[1])},
                                {"p_value", csv::to_double(row[2])},
                                {"n", csv::to_double(row[3])}});
        report["bric_spearman"] = rows;
        inputs.push_back(bric_path.string());
    }

    fs::path dir = ctx.stage_dir("report");
    detail::ensure_dir(dir);
    fs::path report_path = dir / "report.json";
    {
        std::ofstream out(report_path, std::ios::binary);
        out << report.dump(2) << "\n";
    }
    fs::path summary_path = dir / "summary.csv";
    {
        csv::Writer w(summary_path.string());
        w.row({"section", "key", "value"});
        w.row({"corpus", "communities", std::to_string(labels.size())});
        for (const auto& [label, count] : counts)
            w.row({"labels", label, std::to_string(count)});
        for (const auto& [tag, metrics] : trained.items())
            for (const auto& [key, value] : metrics.items())
                w.row({"train:" + tag, key, csv::num(value.get<double>())});
    }
    write_manifest(ctx, "report", inputs, {report_path.string(), summary_path.string()});
}

}  // namespace citywell

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "citywell/error.hpp"
#include "citywell/pipeline.hpp"

namespace {

int dispatch(const std::string& stage, citywell::PipelineContext& ctx, const std::string& task,
             const std::string& feature_set) {
    if (stage == "ingest") {
        citywell::run_ingest(ctx);
    } else if (stage == "wellbeing") {
        citywell::run_wellbeing(ctx);
    } else if (stage == "forecast") {
        citywell::run_forecast(ctx);
    } else if (stage == "label") {
        citywell::run_label(ctx);
    } else if (stage == "features") {
        citywell::run_features(ctx);
    } else if (stage == "train") {
        citywell::run_train(ctx, citywell::parse_task(task), feature_set);
    } else if (stage == "correlate") {
        citywell::run_correlate(ctx);
    } else {
        citywell::run_report(ctx);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"community wellbeing measurement, forecasting, and resilience pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "run configuration JSON")->required();
    std::uint64_t seed = 0;
    bool seed_set = false;
    app.add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
        seed_set = true;
    });
    int jobs = 0;
    app.add_option("--jobs", jobs, "worker threads for per-community stages");
    std::string out_dir;
    app.add_option("--out", out_dir, "override the config output directory");

    std::string task = "impact";
    std::string feature_set = "all";
    for (const char* name :
         {"ingest", "wellbeing", "forecast", "label", "features", "train", "correlate", "report"}) {
        CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " stage");
        sub->fallthrough();  // shared options may follow the stage name
        if (std::string(name) == "train") {
            sub->add_option("--task", task, "impact or recovery")
                ->check(CLI::IsMember({"impact", "recovery"}));
            sub->add_option("--feature-set", feature_set, "feature set to train on")
                ->check(CLI::IsMember(citywell::feature_set_names()));
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        citywell::RunConfig config = citywell::load_run_config(config_path);
        if (seed_set) config.seed = seed;
        if (jobs > 0) config.jobs = jobs;
        if (!out_dir.empty()) config.out_dir = out_dir;
        citywell::PipelineContext ctx(std::move(config));
        return dispatch(app.get_subcommands().front()->get_name(), ctx, task, feature_set);
    } catch (const citywell::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const citywell::InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

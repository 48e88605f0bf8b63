#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "citywell/error.hpp"
#include "citywell/synthetic.hpp"

int main(int argc, char** argv) {
    CLI::App app{"generate a synthetic forum archive bundle with known resilience labels"};

    std::string out_dir;
    app.add_option("--out", out_dir, "bundle output directory")->required();
    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "generator seed");
    int unaffected = 3, recovered = 3, non_recovered = 3;
    app.add_option("--unaffected", unaffected, "communities that stay on baseline");
    app.add_option("--recovered", recovered, "communities that dip and rebound");
    app.add_option("--nonrecovered", non_recovered, "communities that never rebound");
    citywell::SynthConfig config;
    app.add_option("--submissions-per-day", config.submissions_per_day);
    app.add_option("--comments-per-day", config.comments_per_day);
    std::string start, end;
    app.add_option("--start", start, "first archive day (YYYY-MM-DD)");
    app.add_option("--end", end, "last archive day (YYYY-MM-DD)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        config.seed = seed;
        config.communities = citywell::default_synth_communities(unaffected, recovered, non_recovered);
        if (!start.empty()) config.window.first = citywell::parse_day(start);
        if (!end.empty()) config.window.last = citywell::parse_day(end);
        citywell::SynthPaths paths = citywell::write_synthetic_bundle(out_dir, config);
        std::cout << paths.config << "\n";
        return 0;
    } catch (const citywell::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fjq/scenario.hpp"

namespace {

int fail_json(const std::string& kind, const std::string& detail) {
    nlohmann::json err;
    err["error"] = kind;
    err["detail"] = detail;
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Latency / peak-age engine for coded multipath fork-join queues"};
    app.require_subcommand(1);

    CLI::App* run = app.add_subcommand("run", "Run a scenario file");
    std::string scenario_path;
    fjq::RunOptions opt;
    std::string engine_str;
    std::uint64_t seed = 0;
    std::int64_t blocks = 0;
    double grid_step = 0.0;
    run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
    run->add_option("--out", opt.out_dir, "Output directory")->required();
    run->add_option("--engine", engine_str, "analytic|sim|both");
    run->add_option("--seed", seed, "Base RNG seed override");
    run->add_option("--blocks", blocks, "Blocks per grid point override");
    run->add_option("--grid-step", grid_step, "Grid step hint (aligned to tau)");
    run->add_option("--jobs", opt.jobs, "Parallel grid-point workers");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!engine_str.empty()) {
            if (engine_str == "analytic") opt.engine = fjq::Engine::Analytic;
            else if (engine_str == "sim") opt.engine = fjq::Engine::Simulate;
            else if (engine_str == "both") opt.engine = fjq::Engine::Both;
            else return fail_json("bad-engine", engine_str);
        }
        if (seed != 0) opt.seed = seed;
        if (blocks != 0) opt.blocks = blocks;
        if (grid_step != 0.0) opt.grid_step = grid_step;

        fjq::Scenario sc = fjq::load_scenario(scenario_path);
        fjq::run_scenario(sc, opt);
    } catch (const fjq::ScenarioError& e) {
        return fail_json("invalid-scenario", e.what());
    } catch (const std::exception& e) {
        return fail_json("run-failed", e.what());
    }
    return 0;
}

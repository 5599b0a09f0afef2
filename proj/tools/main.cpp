#include <iostream>

#include "CLI11.hpp"
#include "scle/commands.hpp"
#include "scle/error.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Stochastic c-number Langevin ensemble simulator"};
    app.require_subcommand(1);

    std::string config_path;
    scle::RunOverrides overrides;
    std::size_t workers = 0;
    std::uint64_t seed = 0;
    std::uint64_t stop_after = 0;
    std::uint64_t samples = 0;
    std::size_t probes = 200;

    auto* run = app.add_subcommand("run", "Run a trajectory ensemble");
    run->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    auto* workers_opt = run->add_option("--workers", workers, "Worker threads (default: all cores)")
                            ->check(CLI::PositiveNumber);
    auto* seed_opt = run->add_option("--seed", seed, "Override master_seed");
    run->add_flag("--resume", overrides.resume, "Resume from <output_path>.ckpt if present");
    auto* stop_opt = run->add_option("--stop-after", stop_after,
                                     "Stop after N trajectories and leave a checkpoint")
                         ->check(CLI::PositiveNumber);

    auto* corr = app.add_subcommand("correlations", "Dump the bath correlation tables");
    corr->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);

    auto* check = app.add_subcommand("noise-check", "Validate the synthesized noise correlations");
    check->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    check->add_option("--samples", samples, "Number of noise bundles")->required();
    check->add_option("--probes", probes, "Probe points per time axis")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        const scle::RunConfig cfg = scle::load_config(config_path);
        if (*run) {
            if (*workers_opt) overrides.workers = workers;
            if (*seed_opt) overrides.seed = seed;
            if (*stop_opt) overrides.stop_after = stop_after;
            return scle::cmd_run(cfg, overrides, std::cout);
        }
        if (*corr) return scle::cmd_correlations(cfg, std::cout);
        if (*check) return scle::cmd_noise_check(cfg, samples, probes, std::cout);
    } catch (const scle::Error& e) {
        std::cerr << "scle: [" << e.module() << "] " << e.what() << '\n';
        return scle::kExitError;
    } catch (const std::exception& e) {
        std::cerr << "scle: " << e.what() << '\n';
        return scle::kExitError;
    }
    return scle::kExitError;
}

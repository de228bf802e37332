#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "pinch/harness.hpp"

using namespace pinch;

int main(int argc, char** argv) {
    CLI::App app{"pinch-point densities: conformal field theory predictions and lattice Monte Carlo"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir;
    uint64_t seed = 0;
    int workers = 0;
    app.add_option("--config", config_path, "flat key=value experiment file")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "overrides the config seed");
    app.add_option("--workers", workers, "overrides the config worker count")->check(CLI::PositiveNumber);
    app.add_option("--out", out_dir, "output directory");

    auto* theory = app.add_subcommand("theory", "center-normalized density grid from the theory");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo tallies for every tracked event");
    auto* compare = app.add_subcommand("compare", "theory minus simulation along horizontal slices");
    std::string theory_file, sim_file;
    compare->add_option("theory_file", theory_file, "defaults to OUT/theory_<event>.csv");
    compare->add_option("sim_file", sim_file, "defaults to OUT/sim_<event>.csv");
    auto* selftest = app.add_subcommand("selftest", "identity, residual and oracle suites");
    double perturb = 0.0;
    selftest->add_option("--perturb-fd", perturb, "shift every F_D parameter a (negative control)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (selftest->parsed()) {
            bool all = true;
            for (auto& r : cmd_selftest(perturb)) {
                std::printf("%-4s %-24s %7.2fs  %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.seconds, r.detail.c_str());
                all = all && r.pass;
            }
            return all ? 0 : 1;
        }

        ExperimentConfig c = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
        if (app.count("--seed")) c.seed = seed;
        if (workers > 0) c.workers = workers;
        if (!out_dir.empty()) c.out_dir = out_dir;
        validate(c);

        if (theory->parsed()) {
            std::cout << cmd_theory(c) << "\n";
        } else if (simulate->parsed()) {
            for (auto& p : cmd_simulate(c)) std::cout << p << "\n";
        } else if (compare->parsed()) {
            auto dir = std::filesystem::path(c.out_dir);
            if (theory_file.empty()) theory_file = (dir / ("theory_" + event_file_tag(c.event) + ".csv")).string();
            if (sim_file.empty()) sim_file = (dir / ("sim_" + event_file_tag(c.event) + ".csv")).string();
            std::string path = cmd_compare(c, theory_file, sim_file);
            std::cout << path << "\n";
            for (auto& r : compare_grids(load_grid(theory_file), load_grid(sim_file), c.y_slices))
                std::printf("y=%-8.4g avg_error=% .4f std_dev=%.4f points=%d\n", r.y, r.avg_error, r.std_dev, r.points);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

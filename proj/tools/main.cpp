#include "tasks.hpp"

#include "critlab/errors.hpp"

#include <CLI11.hpp>

#include <cstdio>

int main(int argc, char** argv) {
    CLI::App app{"critlab: a numerical laboratory for critical functions of "
                 "Yamabe-type equations on model manifolds"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    int jobs = 1;
    long seed = -1;
    bool seed_set = false;

    auto add_common = [&](CLI::App* sub, bool config_required = true) {
        auto* c = sub->add_option("--config", config_path, "experiment config file");
        if (config_required) c->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--jobs", jobs, "parallel sweep items");
        sub->add_option("--seed", seed, "RNG seed override")->each([&](const std::string&) {
            seed_set = true;
        });
    };

    // constants works with or without a config
    int dim = 6;
    auto* constants = app.add_subcommand("constants", "sharp constants table");
    constants->add_option("--dim", dim, "dimension");
    add_common(constants, false);

    const char* task_names[] = {"solve",       "classify",    "find-critical", "aubin",
                                "concentrate", "green-mass",  "conformal-check", "sweep"};
    const char* task_help[] = {
        "minimize the constrained energy (single q or a q_list continuation)",
        "classify (h, f) against the sharp threshold",
        "bisection along h - t for the critical offset",
        "evaluate the cap test functions and fit the 1/k slope",
        "concentration diagnostics over a family (synthetic or continuation)",
        "dimension-3 Green function of Delta + h and its mass",
        "conformal covariance residual over a refinement ladder",
        "run the configured sweep over a parameter list"};
    for (int i = 0; i < 8; ++i)
        add_common(app.add_subcommand(task_names[i], task_help[i]),
                   std::string(task_names[i]) != "green-mass");

    // green-mass convenience: --h profile without a config file (the short
    // help flag would collide, keep --help there)
    std::string green_h;
    auto* green = app.get_subcommand("green-mass");
    green->set_help_flag("--help", "print help");
    green->add_option("--h", green_h, "radial h profile descriptor");
    bool find_shift = false;
    green->add_flag("--find-critical-shift", find_shift, "bisect for the mass-zero shift");

    CLI11_PARSE(app, argc, argv);

    critlab::cli::RunOptions opt;
    opt.out_dir = out_dir;
    opt.jobs = jobs;
    if (seed_set) opt.seed = seed;

    auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();

    if (name == "constants" && config_path.empty())
        return critlab::cli::run_constants(dim, out_dir);

    critlab::cli::ExperimentConfig cfg;
    if (!config_path.empty()) {
        try {
            cfg = critlab::cli::ExperimentConfig::parse_file(config_path);
        } catch (const critlab::Error& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            return 2;
        }
    }

    // the subcommand pins the task; a conflicting config is a usage error
    if (name != "sweep") {
        if (cfg.has("task", "name") && cfg.get("task", "name") != name) {
            std::fprintf(stderr, "error: config task '%s' conflicts with subcommand '%s'\n",
                         cfg.get("task", "name").c_str(), name.c_str());
            return 2;
        }
        cfg.set("task", "name", name);
    } else if (!cfg.entries.count("sweep")) {
        std::fprintf(stderr, "error: sweep subcommand needs a [sweep] section\n");
        return 2;
    }
    if (name == "green-mass") {
        if (!green_h.empty()) cfg.set("fields", "h", green_h);
        if (find_shift) cfg.set("task", "find_critical_shift", "on");
    }

    return critlab::cli::run_experiment(cfg, opt);
}

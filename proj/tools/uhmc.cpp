#include <chrono>
#include <iostream>

#include <CLI11.hpp>

#include "uhmc/experiments.hpp"

namespace {

int dispatch(const std::string& experiment, uhmc::Config& cfg) {
    using namespace uhmc;
    // the optional experiment key must agree with the subcommand
    if (cfg.has("experiment") && cfg.get_string("experiment") != experiment)
        throw config_error("config experiment '" + cfg.get_string("experiment") +
                           "' does not match subcommand '" + experiment + "'");
    const auto start = std::chrono::steady_clock::now();
    ExperimentResult res;
    if (experiment == "sample")
        res = run_sample(cfg);
    else if (experiment == "couple")
        res = run_couple(cfg);
    else if (experiment == "mixing-time")
        res = run_mixing_time(cfg);
    else if (experiment == "bias-scan")
        res = run_bias_scan(cfg);
    else if (experiment == "validate")
        res = run_validation(cfg);
    else
        res = run_bounds(cfg);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    std::cout << res.summary << "\n";
    std::cout << "wall clock: " << ms << " ms\n";
    return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"uhmc: unadjusted Hamiltonian Monte Carlo chains, couplings and bound evaluators"};
    app.require_subcommand(0, 1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir;
    std::string seed_str;
    int threads = -1;
    bool print_schema = false;

    app.add_flag("--print-schema", print_schema, "print the config schema and exit");
    app.add_option("--config", config_path, "config file (key = value lines)");
    app.add_option("--seed", seed_str, "override the config seed");
    app.add_option("--threads", threads, "override the worker thread count");
    app.add_option("--out", out_dir, "override the output directory");

    const char* names[] = {"sample", "couple", "mixing-time", "bias-scan", "validate", "bounds"};
    const char* descs[] = {"run independent uHMC replicas and summarize the samples",
                           "run the two-phase coupling and record meeting times",
                           "empirical mixing times against the certificate bound",
                           "invariant-measure TV bias scan over h and d",
                           "randomized suite of the proved inequalities",
                           "evaluate the closed-form bound set"};
    for (int i = 0; i < 6; ++i) app.add_subcommand(names[i], descs[i]);

    CLI11_PARSE(app, argc, argv);

    if (print_schema) {
        std::cout << uhmc::config_schema_text();
        return 0;
    }
    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return 1;
    }

    try {
        uhmc::Config cfg = config_path.empty() ? uhmc::Config{} : uhmc::Config::from_file(config_path);
        if (!seed_str.empty()) cfg.set("seed", seed_str);
        if (threads >= 0) cfg.set("threads", std::to_string(threads));
        if (!out_dir.empty()) cfg.set("out", out_dir);
        return dispatch(app.get_subcommands().front()->get_name(), cfg);
    } catch (const uhmc::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
}

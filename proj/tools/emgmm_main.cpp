// Command-line front end for the experiment harness.
//
// All options live on the top-level app so that one flat --config file
// mirrors the flag namespace exactly; flags given after the subcommand fall
// through to the top level. Command-line flags always win over config
// values.
//
// Exit codes: 0 success, 1 usage error, 2 a verification experiment ran but
// at least one check failed, 3 numerical or I/O failure inside the library.

#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "emgmm/emgmm.hpp"

namespace {

constexpr int kExitSuccess = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerificationFailed = 2;
constexpr int kExitNumericalFailure = 3;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spherical Gaussian mixture EM: benchmark figures, bound"
                 " verification, threshold reports, and fitting"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from an INI/TOML file (flags win)");

    emgmm::ExperimentConfig cfg;
    std::string scale_name = "desk";

    app.add_option("--seed", cfg.seed, "Master seed; every draw derives from it")
        ->capture_default_str();
    app.add_option("--scale", scale_name, "Preset sizes: paper or desk")
        ->check(CLI::IsMember({"paper", "desk"}))
        ->capture_default_str();
    app.add_option("--out", cfg.output_dir, "Output directory for CSV/JSON artifacts")
        ->capture_default_str();
    app.add_option("--n", cfg.n, "Sample count (overrides the preset)");
    app.add_option("--iters", cfg.iters, "Solver iterations (overrides the preset)");
    app.add_option("--replicates", cfg.replicates,
                   "Replicates or initializations (overrides the preset)");
    app.add_option("--lambda", cfg.lambda,
                   "Initialization radius fraction / region parameter");
    app.add_option("--step-size", cfg.step_size, "Gradient EM step size");
    app.add_option("--mc-samples", cfg.mc_samples,
                   "Monte Carlo draws for population-level experiments");
    app.add_flag("--fixed-timing", cfg.fixed_timing,
                 "Write wall_time_ms = 0 so reruns are byte-identical");
    app.add_option("--k", cfg.k, "Component count (fig1a, fig1d, contraction, report)");
    app.add_option("--d", cfg.d, "Ambient dimension (fig1a, fig1b, contraction)");
    app.add_option("--delta", cfg.delta, "Failure probability for sample thresholds")
        ->capture_default_str();
    app.add_option("--lambdas", cfg.lambda_sweep,
                   "fig1b: initialization fractions to sweep");
    app.add_option("--k-sweep", cfg.k_sweep, "fig1c: component counts to sweep");
    app.add_option("--d-sweep", cfg.d_sweep, "fig1d: dimensions to sweep");
    app.add_option("--data", cfg.data_path, "fit: sample file (header: d K weights)");
    app.add_option("--model", cfg.model_path,
                   "fit/report: model JSON (errors, initialization, thresholds)");
    app.add_option("--init", cfg.init_path, "fit: initialization JSON");
    app.add_option("--algorithm", cfg.algorithm, "fit: em or gradient_em")
        ->check(CLI::IsMember({"em", "gradient_em"}))
        ->capture_default_str();

    using Runner = std::function<emgmm::RunOutcome(const emgmm::ExperimentConfig&)>;
    const std::map<std::string, Runner> runners{
        {"fig1a", emgmm::run_fig1a},
        {"fig1b", emgmm::run_fig1b},
        {"fig1c", emgmm::run_fig1c},
        {"fig1d", emgmm::run_fig1d},
        {"contraction", emgmm::run_contraction},
        {"verify-bounds", emgmm::run_verify_bounds},
        {"report", emgmm::run_report},
        {"fit", emgmm::run_fit},
    };
    const std::map<std::string, std::string> blurbs{
        {"fig1a", "EM trajectories from sphere initializations on a simplex mixture"},
        {"fig1b", "EM trajectories as the initialization radius approaches 1/2"},
        {"fig1c", "Final error versus component count, with sqrt(K log K / n) fit"},
        {"fig1d", "Final error versus dimension, with sqrt(d) fit"},
        {"contraction", "One-step population EM / gradient EM contraction check"},
        {"verify-bounds", "Monte Carlo domination check of every closed-form bound"},
        {"report", "Thresholds, ceilings, and contraction constants for one model"},
        {"fit", "Fit centers to a sample file"},
    };
    for (const auto& [name, blurb] : blurbs)
        app.add_subcommand(name, blurb)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitSuccess : kExitUsage;
    }

    cfg.scale = scale_name == "paper" ? emgmm::Scale::paper : emgmm::Scale::desk;

    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "fit") {
        if (cfg.data_path.empty()) {
            std::fprintf(stderr, "usage error: fit requires --data\n");
            return kExitUsage;
        }
        if (cfg.init_path.empty() && cfg.model_path.empty()) {
            std::fprintf(stderr,
                         "usage error: fit requires --init, or --model to build one\n");
            return kExitUsage;
        }
    }

    try {
        const emgmm::RunOutcome outcome = runners.at(name)(cfg);
        const std::vector<std::string> paths =
            emgmm::write_outcome(outcome, cfg.output_dir);
        for (const std::string& p : paths) std::printf("wrote %s\n", p.c_str());
        if (name == "verify-bounds" || name == "contraction") {
            std::printf("%s: %s\n", name.c_str(),
                        outcome.all_passed ? "all checks passed" : "CHECKS FAILED");
            if (!outcome.all_passed) return kExitVerificationFailed;
        }
        return kExitSuccess;
    } catch (const emgmm::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumericalFailure;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumericalFailure;
    }
}

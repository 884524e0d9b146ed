// qvr — vacuum-radiation experiment runner
//
// Subcommands select the task (overriding the config file's `task` key):
//   qvr run         --config single.cfg   --output out/
//   qvr sweep       --config fig2.cfg     --output out/
//   qvr spectrum    --config fig3.cfg     --output out/
//   qvr convergence --config conv.cfg     --output out/
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure in all
// points, 3 partial failure.

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "qvr/experiment.hpp"
#include "qvr/io.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::string output_dir;
    std::string mode;
    int workers = -1;
};

void add_common(CLI::App* cmd, CliOptions& opts) {
    cmd->add_option("--config", opts.config_path, "experiment configuration file")
        ->required();
    cmd->add_option("--output", opts.output_dir, "output directory (overrides config)");
    cmd->add_option("--mode", opts.mode, "tcl2 | markovian | both (overrides config)")
        ->check(CLI::IsMember({"tcl2", "markovian", "both"}));
    cmd->add_option("--workers", opts.workers,
                    "worker threads (QVR_WORKERS env still wins)");
}

int run_task(const CliOptions& opts, qvr::Task task) {
    qvr::ExperimentConfig config;
    try {
        config = qvr::parse_config_file(opts.config_path);
        config.task = task;
        if (!opts.output_dir.empty()) config.output_dir = opts.output_dir;
        if (opts.workers >= 0) config.workers = opts.workers;
        if (opts.mode == "tcl2") config.mode = qvr::RunMode::tcl2;
        else if (opts.mode == "markovian") config.mode = qvr::RunMode::markovian;
        else if (opts.mode == "both") config.mode = qvr::RunMode::both;
        config.validate();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 1;
    }

    qvr::RunRecord record;
    try {
        record = qvr::run_experiment(config);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 2;
    }

    std::printf("task %s: %zu point(s), %d failure(s), %.1f s wall, results in %s\n",
                qvr::to_string(config.task).c_str(), record.points.size(), record.failures,
                record.wall_seconds, config.output_dir.c_str());
    for (const auto& point : record.points) {
        if (!point.ok) {
            std::printf("  point %d [%s]: FAILED (%s)\n", point.index,
                        qvr::to_string(point.mode).c_str(), point.status.c_str());
            continue;
        }
        if (record.points.size() <= 4) {
            std::printf("  point %d [%s]: R_em = %s  N_in = %s%s\n", point.index,
                        qvr::to_string(point.mode).c_str(),
                        qvr::io::format_double(point.emission_rate).c_str(),
                        qvr::io::format_double(point.photon_number).c_str(),
                        point.converged ? "" : "  (not converged)");
        }
        if (config.nu0_hz > 0.0) {
            const auto rates = qvr::report_physical_units(point.emission_rate, config.nu0_hz);
            std::printf("  point %d [%s]: %.4g photons/s (nu0 in cycles/s), "
                        "%.4g photons/s (nu0 in rad/s)\n",
                        point.index, qvr::to_string(point.mode).c_str(),
                        rates.cycles_per_second, rates.angular);
        }
    }
    return record.exit_code();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"extracavity vacuum-radiation simulator"};
    app.require_subcommand(1);

    CliOptions opts;
    CLI::App* run = app.add_subcommand("run", "single propagation at the configured point");
    CLI::App* sweep = app.add_subcommand("sweep", "emission rate across modulation frequencies");
    CLI::App* spectrum = app.add_subcommand("spectrum", "emitted spectral density");
    CLI::App* convergence =
        app.add_subcommand("convergence", "truncation and step-size convergence table");
    for (CLI::App* cmd : {run, sweep, spectrum, convergence}) add_common(cmd, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    if (run->parsed()) return run_task(opts, qvr::Task::single);
    if (sweep->parsed()) return run_task(opts, qvr::Task::sweep);
    if (spectrum->parsed()) return run_task(opts, qvr::Task::spectrum);
    return run_task(opts, qvr::Task::convergence);
}

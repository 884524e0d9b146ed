// experiment.hpp — configuration-driven experiment runner
//
// Tasks: single propagation, modulation-frequency sweeps, spectrum runs, and
// truncation/step convergence studies. Results go to CSV tables (flushed row
// by row, so partial sweeps survive interruption) plus a JSON sidecar with
// the full configuration echo and telemetry.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qvr/correlations.hpp"
#include "qvr/dynamics.hpp"
#include "qvr/params.hpp"

namespace qvr {

inline constexpr const char* kVersion = "0.1.0";

enum class Task { single, sweep, spectrum, convergence };
enum class RunMode { tcl2, markovian, both };
enum class InitialState { dressed_ground, bare_vacuum };

std::string to_string(Task task);
std::string to_string(RunMode mode);
std::string to_string(InitialState state);

struct SweepGrid {
    double start = 1.90;
    double stop = 2.14;
    int points = 121;

    double value(int i) const {
        return (points < 2) ? start
                            : start + (stop - start) * i / static_cast<double>(points - 1);
    }
};

struct ExperimentConfig {
    SystemParams params;
    PropagationConfig propagation;
    CorrelationConfig correlation;
    Task task = Task::single;
    RunMode mode = RunMode::tcl2;
    InitialState initial_state = InitialState::dressed_ground;
    SweepGrid sweep;
    double omega_min = -0.5;
    double omega_max = 3.0;
    double omega_step = 0.0; // 0 -> min(gamma_cav, gamma_ge) / 5
    std::vector<int> convergence_n_max = {4, 6, 8};
    int convergence_dt_halvings = 1;
    std::string output_dir = ".";
    int workers = 0;    // 0 -> hardware concurrency; QVR_WORKERS overrides
    double nu0_hz = 0.0; // cavity frequency in Hz for the photon-rate report

    void validate() const;
    std::vector<double> omega_grid() const;
    // deterministic key/value echo written into result headers and the sidecar
    std::vector<std::pair<std::string, std::string>> echo() const;
};

// Flat key = value text; '#' starts a comment. Unknown or duplicate keys and
// untyped values are reported as std::invalid_argument before any compute.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

struct PointResult {
    int index = 0;
    EvolutionMode mode = EvolutionMode::tcl2;
    double omega_mod = 0.0;
    double emission_rate = 0.0;     // extracavity photons per unit time (omega_0 units)
    double photon_number = 0.0;     // period-averaged intracavity photon number
    double markov_equiv_rate = 0.0; // gamma_cav * photon_number
    std::string rate_method;        // "flux", "parseval", or "spectral"
    bool converged = false;
    int periods = 0;
    long steps = 0;
    double dt_used = 0.0;
    double max_trace_drift = 0.0;
    double max_herm_error = 0.0;
    double min_eigenvalue = 0.0;
    int n_max = 0;
    bool resolution_warning = false;
    bool ok = true;
    std::string status = "ok";
};

struct PhysicalRates {
    double cycles_per_second = 0.0; // R_em * nu0
    double angular = 0.0;           // R_em * 2 pi nu0
};

// Photon rate in 1/s under both frequency-unit conventions; which one a lab
// means by "gamma/2pi = ... MHz" differs, so both are always reported.
PhysicalRates report_physical_units(double emission_rate, double nu0_hz);

struct RunRecord {
    ExperimentConfig config;
    std::vector<PointResult> points;
    std::vector<SpectrumResult> spectra;
    long total_steps = 0;
    double wall_seconds = 0.0;
    int failures = 0;
    int workers_used = 1;

    // 0 success, 2 every point failed, 3 some points failed
    int exit_code() const;
};

// Execute the configured task, writing result files into config.output_dir.
RunRecord run_experiment(const ExperimentConfig& config);

} // namespace qvr

#include "qvr/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "qvr/io.hpp"

namespace qvr {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Task task) {
    switch (task) {
        case Task::single: return "single";
        case Task::sweep: return "sweep";
        case Task::spectrum: return "spectrum";
        case Task::convergence: return "convergence";
    }
    return "single";
}

std::string to_string(RunMode mode) {
    switch (mode) {
        case RunMode::tcl2: return "tcl2";
        case RunMode::markovian: return "markovian";
        case RunMode::both: return "both";
    }
    return "tcl2";
}

std::string to_string(InitialState state) {
    return state == InitialState::dressed_ground ? "dressed_ground" : "bare_vacuum";
}

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

[[noreturn]] void bad_key(const std::string& key, const std::string& what) {
    throw std::invalid_argument("config key '" + key + "': " + what);
}

double parse_double(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        bad_key(key, "expected a number, got '" + value + "'");
    }
    if (used != value.size()) bad_key(key, "trailing characters in '" + value + "'");
    return v;
}

int parse_int(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(value, &used);
    } catch (const std::exception&) {
        bad_key(key, "expected an integer, got '" + value + "'");
    }
    if (used != value.size()) bad_key(key, "trailing characters in '" + value + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    bad_key(key, "expected true/false, got '" + value + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(parse_int(key, trim(item)));
    }
    if (out.empty()) bad_key(key, "expected a comma-separated integer list");
    return out;
}

void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "task") {
        if (value == "single") cfg.task = Task::single;
        else if (value == "sweep") cfg.task = Task::sweep;
        else if (value == "spectrum") cfg.task = Task::spectrum;
        else if (value == "convergence") cfg.task = Task::convergence;
        else bad_key(key, "expected single|sweep|spectrum|convergence");
    } else if (key == "mode") {
        if (value == "tcl2") cfg.mode = RunMode::tcl2;
        else if (value == "markovian") cfg.mode = RunMode::markovian;
        else if (value == "both") cfg.mode = RunMode::both;
        else bad_key(key, "expected tcl2|markovian|both");
    } else if (key == "initial_state") {
        if (value == "dressed_ground") cfg.initial_state = InitialState::dressed_ground;
        else if (value == "bare_vacuum") cfg.initial_state = InitialState::bare_vacuum;
        else bad_key(key, "expected dressed_ground|bare_vacuum");
    } else if (key == "omega0") {
        cfg.params.omega_0 = parse_double(key, value);
    } else if (key == "omega_ge") {
        cfg.params.omega_ge = parse_double(key, value);
    } else if (key == "g0") {
        cfg.params.g_0 = parse_double(key, value);
    } else if (key == "delta_g") {
        cfg.params.delta_g = parse_double(key, value);
    } else if (key == "omega_mod") {
        cfg.params.omega_mod = parse_double(key, value);
    } else if (key == "gamma_cav") {
        cfg.params.gamma_cav = parse_double(key, value);
    } else if (key == "gamma_ge") {
        cfg.params.gamma_ge = parse_double(key, value);
    } else if (key == "n_max") {
        cfg.params.n_max = parse_int(key, value);
    } else if (key == "dt") {
        cfg.propagation.dt = parse_double(key, value);
    } else if (key == "steady_tol") {
        cfg.propagation.steady_tol = parse_double(key, value);
    } else if (key == "max_periods") {
        cfg.propagation.max_periods = parse_int(key, value);
    } else if (key == "samples_per_period") {
        cfg.propagation.samples_per_period = parse_int(key, value);
    } else if (key == "rebuild_u_each_step") {
        cfg.propagation.rebuild_u_each_step = parse_bool(key, value);
    } else if (key == "sweep_start") {
        cfg.sweep.start = parse_double(key, value);
    } else if (key == "sweep_stop") {
        cfg.sweep.stop = parse_double(key, value);
    } else if (key == "sweep_points") {
        cfg.sweep.points = parse_int(key, value);
    } else if (key == "tau_max") {
        cfg.correlation.tau_max = parse_double(key, value);
    } else if (key == "dtau") {
        cfg.correlation.dtau = parse_double(key, value);
    } else if (key == "corr_dt") {
        cfg.correlation.dt = parse_double(key, value);
    } else if (key == "omega_min") {
        cfg.omega_min = parse_double(key, value);
    } else if (key == "omega_max") {
        cfg.omega_max = parse_double(key, value);
    } else if (key == "omega_step") {
        cfg.omega_step = parse_double(key, value);
    } else if (key == "conv_n_max") {
        cfg.convergence_n_max = parse_int_list(key, value);
    } else if (key == "conv_dt_halvings") {
        cfg.convergence_dt_halvings = parse_int(key, value);
    } else if (key == "output_dir") {
        cfg.output_dir = value;
    } else if (key == "workers") {
        cfg.workers = parse_int(key, value);
    } else if (key == "nu0_hz") {
        cfg.nu0_hz = parse_double(key, value);
    } else {
        bad_key(key, "unknown key");
    }
}

} // namespace

void ExperimentConfig::validate() const {
    params.validate();
    propagation.validate();
    correlation.validate();
    if (task == Task::sweep && sweep.points < 2) {
        throw std::invalid_argument("config: sweep_points must be >= 2 for sweeps");
    }
    if (sweep.points >= 2 && !(sweep.stop > sweep.start)) {
        throw std::invalid_argument("config: sweep_stop must exceed sweep_start");
    }
    if (!(omega_max > omega_min)) {
        throw std::invalid_argument("config: omega_max must exceed omega_min");
    }
    if (omega_step < 0.0) throw std::invalid_argument("config: omega_step must be >= 0");
    if (convergence_n_max.empty()) {
        throw std::invalid_argument("config: conv_n_max must not be empty");
    }
    for (int n : convergence_n_max) {
        if (n < 2) throw std::invalid_argument("config: conv_n_max entries must be >= 2");
    }
    if (convergence_dt_halvings < 0) {
        throw std::invalid_argument("config: conv_dt_halvings must be >= 0");
    }
    if (workers < 0) throw std::invalid_argument("config: workers must be >= 0");
    if (nu0_hz < 0.0) throw std::invalid_argument("config: nu0_hz must be >= 0");
}

std::vector<double> ExperimentConfig::omega_grid() const {
    const double step =
        (omega_step > 0.0) ? omega_step : std::min(params.gamma_cav, params.gamma_ge) / 5.0;
    const int points = static_cast<int>(std::floor((omega_max - omega_min) / step)) + 1;
    std::vector<double> omega(static_cast<std::size_t>(points));
    for (int m = 0; m < points; ++m) omega[static_cast<std::size_t>(m)] = omega_min + m * step;
    return omega;
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::echo() const {
    using io::format_double;
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("task", to_string(task));
    kv.emplace_back("mode", to_string(mode));
    kv.emplace_back("initial_state", to_string(initial_state));
    kv.emplace_back("omega0", format_double(params.omega_0));
    kv.emplace_back("omega_ge", format_double(params.omega_ge));
    kv.emplace_back("g0", format_double(params.g_0));
    kv.emplace_back("delta_g", format_double(params.delta_g));
    kv.emplace_back("omega_mod", format_double(params.omega_mod));
    kv.emplace_back("gamma_cav", format_double(params.gamma_cav));
    kv.emplace_back("gamma_ge", format_double(params.gamma_ge));
    kv.emplace_back("n_max", std::to_string(params.n_max));
    kv.emplace_back("dt", format_double(propagation.dt));
    kv.emplace_back("steady_tol", format_double(propagation.steady_tol));
    kv.emplace_back("max_periods", std::to_string(propagation.max_periods));
    kv.emplace_back("samples_per_period", std::to_string(propagation.samples_per_period));
    kv.emplace_back("rebuild_u_each_step", propagation.rebuild_u_each_step ? "true" : "false");
    kv.emplace_back("sweep_start", format_double(sweep.start));
    kv.emplace_back("sweep_stop", format_double(sweep.stop));
    kv.emplace_back("sweep_points", std::to_string(sweep.points));
    kv.emplace_back("tau_max", format_double(correlation.tau_max));
    kv.emplace_back("dtau", format_double(correlation.dtau));
    kv.emplace_back("corr_dt", format_double(correlation.dt));
    kv.emplace_back("omega_min", format_double(omega_min));
    kv.emplace_back("omega_max", format_double(omega_max));
    kv.emplace_back("omega_step", format_double(omega_step));
    {
        std::string list;
        for (std::size_t i = 0; i < convergence_n_max.size(); ++i) {
            if (i) list += ',';
            list += std::to_string(convergence_n_max[i]);
        }
        kv.emplace_back("conv_n_max", list);
    }
    kv.emplace_back("conv_dt_halvings", std::to_string(convergence_dt_halvings));
    kv.emplace_back("nu0_hz", format_double(nu0_hz));
    return kv;
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": empty key or value");
        }
        if (!kv.emplace(key, value).second) {
            throw std::invalid_argument("config: duplicate key '" + key + "'");
        }
    }
    for (const auto& [key, value] : kv) apply_key(cfg, key, value);
    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot read " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str());
}

PhysicalRates report_physical_units(double emission_rate, double nu0_hz) {
    PhysicalRates rates;
    rates.cycles_per_second = emission_rate * nu0_hz;
    rates.angular = emission_rate * 2.0 * M_PI * nu0_hz;
    return rates;
}

int RunRecord::exit_code() const {
    if (points.empty()) return 2;
    if (failures == 0) return 0;
    return failures == static_cast<int>(points.size()) ? 2 : 3;
}

namespace {

int resolve_workers(int configured) {
    if (const char* env = std::getenv("QVR_WORKERS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    if (configured > 0) return configured;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

std::vector<EvolutionMode> expand_modes(RunMode mode) {
    switch (mode) {
        case RunMode::tcl2: return {EvolutionMode::tcl2};
        case RunMode::markovian: return {EvolutionMode::markovian};
        case RunMode::both: return {EvolutionMode::tcl2, EvolutionMode::markovian};
    }
    return {EvolutionMode::tcl2};
}

std::string sanitize_status(std::string status) {
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    return status;
}

const std::vector<std::string> kPointColumns = {
    "index", "mode", "omega_mod", "emission_rate", "photon_number",
    "markov_equiv_rate", "rate_method", "converged", "periods", "steps", "dt",
    "max_trace_drift", "max_herm_error", "min_eigenvalue", "resolution_warning",
    "status", "omega0", "omega_ge", "g0", "delta_g", "gamma_cav", "gamma_ge",
    "n_max", "steady_tol", "samples_per_period"};

std::vector<std::string> point_row(const PointResult& point, const ExperimentConfig& cfg) {
    using io::format_double;
    const SystemParams& p = cfg.params;
    return {
        std::to_string(point.index),
        to_string(point.mode),
        format_double(point.omega_mod),
        format_double(point.emission_rate),
        format_double(point.photon_number),
        format_double(point.markov_equiv_rate),
        point.rate_method,
        point.converged ? "1" : "0",
        std::to_string(point.periods),
        std::to_string(point.steps),
        format_double(point.dt_used),
        format_double(point.max_trace_drift),
        format_double(point.max_herm_error),
        format_double(point.min_eigenvalue),
        point.resolution_warning ? "1" : "0",
        sanitize_status(point.status),
        format_double(p.omega_0),
        format_double(p.omega_ge),
        format_double(p.g_0),
        format_double(p.delta_g),
        format_double(p.gamma_cav),
        format_double(p.gamma_ge),
        std::to_string(point.n_max),
        format_double(cfg.propagation.steady_tol),
        std::to_string(cfg.propagation.samples_per_period)};
}

void write_echo(io::CsvFile& file, const ExperimentConfig& cfg) {
    file.comment("qvr " + std::string(kVersion));
    for (const auto& [key, value] : cfg.echo()) {
        file.comment(key + " = " + value);
    }
}

// points are computed out of order by the pool but written in index order
class OrderedRowWriter {
  public:
    OrderedRowWriter(io::CsvFile& file, std::size_t count) : file_(file), pending_(count) {}

    void submit(std::size_t index, std::vector<std::string> row) {
        std::lock_guard<std::mutex> lock(mutex_);
        pending_[index] = std::move(row);
        while (cursor_ < pending_.size() && pending_[cursor_].has_value()) {
            file_.row(*pending_[cursor_]);
            pending_[cursor_].reset();
            ++cursor_;
        }
    }

  private:
    io::CsvFile& file_;
    std::vector<std::optional<std::vector<std::string>>> pending_;
    std::size_t cursor_ = 0;
    std::mutex mutex_;
};

void parallel_for(int count, int workers, const std::function<void(int)>& body) {
    workers = std::max(1, std::min(workers, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            try {
                for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

ComplexMatrix initial_state_for(const Generator& gen, InitialState choice) {
    if (choice == InitialState::bare_vacuum) return bare_vacuum_state(gen.params());
    return gen.dressed().ground_state_projector();
}

PointResult evaluate_point(const SystemParams& params, EvolutionMode mode,
                           const ExperimentConfig& cfg) {
    PointResult point;
    point.mode = mode;
    point.omega_mod = params.omega_mod;
    point.n_max = params.n_max;
    try {
        Generator gen(params, mode);
        const ComplexMatrix rho0 = initial_state_for(gen, cfg.initial_state);
        const PeriodicState state = propagate(rho0, gen, cfg.propagation);
        point.emission_rate = steady_emission_rate(gen, state);
        point.photon_number = state.mean_photon_number(gen.number_op());
        point.markov_equiv_rate = params.gamma_cav * point.photon_number;
        point.rate_method = (mode == EvolutionMode::markovian) ? "parseval" : "flux";
        point.converged = state.converged;
        point.periods = state.periods;
        point.steps = state.steps;
        point.dt_used =
            state.steps > 0 ? state.period * state.periods / static_cast<double>(state.steps)
                            : 0.0;
        point.max_trace_drift = state.max_trace_drift;
        point.max_herm_error = state.max_herm_error;
        point.min_eigenvalue = state.min_eigenvalue;
        if (!state.converged) point.status = "not_converged";
    } catch (const std::exception& e) {
        point.ok = false;
        point.status = e.what();
    }
    return point;
}

void write_state_dump(const fs::path& path, const PeriodicState& state,
                      const ExperimentConfig& cfg) {
    io::CsvFile file(path);
    write_echo(file, cfg);
    file.comment("periodic steady-state samples; complex entries as re/im pairs");
    file.header({"sample", "t", "row", "col", "re", "im"});
    for (std::size_t s = 0; s < state.samples.size(); ++s) {
        const ComplexMatrix& rho = state.samples[s];
        for (Eigen::Index i = 0; i < rho.rows(); ++i) {
            for (Eigen::Index j = 0; j < rho.cols(); ++j) {
                file.row({std::to_string(s), io::format_double(state.times[s]),
                          std::to_string(i), std::to_string(j),
                          io::format_double(rho(i, j).real()),
                          io::format_double(rho(i, j).imag())});
            }
        }
    }
}

json point_to_json(const PointResult& point) {
    return json{{"index", point.index},
                {"mode", to_string(point.mode)},
                {"omega_mod", point.omega_mod},
                {"emission_rate", point.emission_rate},
                {"photon_number", point.photon_number},
                {"markov_equiv_rate", point.markov_equiv_rate},
                {"rate_method", point.rate_method},
                {"converged", point.converged},
                {"periods", point.periods},
                {"steps", point.steps},
                {"dt", point.dt_used},
                {"max_trace_drift", point.max_trace_drift},
                {"max_herm_error", point.max_herm_error},
                {"min_eigenvalue", point.min_eigenvalue},
                {"resolution_warning", point.resolution_warning},
                {"n_max", point.n_max},
                {"ok", point.ok},
                {"status", point.status}};
}

} // namespace

RunRecord run_experiment(const ExperimentConfig& config) {
    config.validate();
    const auto t_start = std::chrono::steady_clock::now();

    RunRecord record;
    record.config = config;
    record.workers_used = resolve_workers(config.workers);

    fs::path out_dir(config.output_dir);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        throw std::invalid_argument("config: cannot create output directory '" +
                                    config.output_dir + "': " + ec.message());
    }

    const std::vector<EvolutionMode> modes = expand_modes(config.mode);

    auto open_csv = [&](const std::string& name) {
        try {
            return io::CsvFile(out_dir / name);
        } catch (const std::runtime_error& e) {
            throw std::invalid_argument(std::string("config: output not writable: ") +
                                        e.what());
        }
    };

    switch (config.task) {
        case Task::sweep: {
            io::CsvFile file = open_csv("sweep.csv");
            write_echo(file, config);
            file.comment("emission rate vs modulation frequency; rates in omega_0 units");
            file.header(kPointColumns);
            const int per_mode = config.sweep.points;
            const int total = per_mode * static_cast<int>(modes.size());
            record.points.resize(static_cast<std::size_t>(total));
            OrderedRowWriter writer(file, static_cast<std::size_t>(total));
            parallel_for(total, record.workers_used, [&](int i) {
                const int mode_index = i / per_mode;
                const int point_index = i % per_mode;
                SystemParams params = config.params;
                params.omega_mod = config.sweep.value(point_index);
                PointResult point = evaluate_point(params, modes[mode_index], config);
                point.index = i;
                writer.submit(static_cast<std::size_t>(i), point_row(point, config));
                record.points[static_cast<std::size_t>(i)] = std::move(point);
            });
            break;
        }
        case Task::single: {
            io::CsvFile file = open_csv("single.csv");
            write_echo(file, config);
            file.header(kPointColumns);
            int index = 0;
            for (EvolutionMode mode : modes) {
                PointResult point = evaluate_point(config.params, mode, config);
                point.index = index++;
                // the state dump re-propagates; acceptable for the single task
                if (point.ok) {
                    Generator gen(config.params, mode);
                    const PeriodicState state = propagate(
                        initial_state_for(gen, config.initial_state), gen, config.propagation);
                    write_state_dump(out_dir / ("state_" + to_string(mode) + ".csv"), state,
                                     config);
                }
                file.row(point_row(point, config));
                record.points.push_back(std::move(point));
            }
            break;
        }
        case Task::spectrum: {
            io::CsvFile summary = open_csv("summary.csv");
            write_echo(summary, config);
            summary.header(kPointColumns);
            int index = 0;
            for (EvolutionMode mode : modes) {
                PointResult point;
                point.index = index++;
                point.mode = mode;
                point.omega_mod = config.params.omega_mod;
                point.n_max = config.params.n_max;
                try {
                    Generator gen(config.params, mode);
                    const ComplexMatrix rho0 = initial_state_for(gen, config.initial_state);
                    const PeriodicState state = propagate(rho0, gen, config.propagation);
                    SpectrumResult spectrum =
                        compute_spectrum(state, gen, config.correlation, config.omega_grid(),
                                         record.workers_used);
                    point.emission_rate = spectrum.emission_rate;
                    point.photon_number = spectrum.photon_number;
                    point.markov_equiv_rate = config.params.gamma_cav * point.photon_number;
                    point.rate_method = "spectral";
                    point.converged = state.converged;
                    point.periods = state.periods;
                    point.steps = state.steps;
                    point.dt_used = state.steps > 0
                                        ? state.period * state.periods /
                                              static_cast<double>(state.steps)
                                        : 0.0;
                    point.max_trace_drift = state.max_trace_drift;
                    point.max_herm_error = state.max_herm_error;
                    point.min_eigenvalue = state.min_eigenvalue;
                    point.resolution_warning = spectrum.resolution_warning;
                    if (!state.converged) point.status = "not_converged";

                    io::CsvFile file = open_csv("spectrum_" + to_string(mode) + ".csv");
                    write_echo(file, config);
                    file.comment("S: emitted spectral density; G: intracavity spectrum");
                    file.header({"omega", "S", "G"});
                    for (std::size_t m = 0; m < spectrum.omega.size(); ++m) {
                        file.row({io::format_double(spectrum.omega[m]),
                                  io::format_double(spectrum.emitted[m]),
                                  io::format_double(spectrum.intracavity[m])});
                    }
                    record.spectra.push_back(std::move(spectrum));
                } catch (const std::exception& e) {
                    point.ok = false;
                    point.status = e.what();
                }
                summary.row(point_row(point, config));
                record.points.push_back(std::move(point));
            }
            break;
        }
        case Task::convergence: {
            io::CsvFile file = open_csv("convergence.csv");
            write_echo(file, config);
            file.comment("emission rate vs truncation and integrator step");
            file.header(kPointColumns);
            struct Cell {
                int n_max;
                double dt;
            };
            std::vector<Cell> cells;
            for (int n : config.convergence_n_max) {
                SystemParams params = config.params;
                params.n_max = n;
                const double dt0 = config.propagation.requested_dt(params);
                for (int h = 0; h <= config.convergence_dt_halvings; ++h) {
                    cells.push_back({n, dt0 / static_cast<double>(1 << h)});
                }
            }
            const int per_mode = static_cast<int>(cells.size());
            const int total = per_mode * static_cast<int>(modes.size());
            record.points.resize(static_cast<std::size_t>(total));
            OrderedRowWriter writer(file, static_cast<std::size_t>(total));
            parallel_for(total, record.workers_used, [&](int i) {
                const int mode_index = i / per_mode;
                const Cell& cell = cells[static_cast<std::size_t>(i % per_mode)];
                SystemParams params = config.params;
                params.n_max = cell.n_max;
                ExperimentConfig local = config;
                local.propagation.dt = cell.dt;
                PointResult point = evaluate_point(params, modes[mode_index], local);
                point.index = i;
                writer.submit(static_cast<std::size_t>(i), point_row(point, config));
                record.points[static_cast<std::size_t>(i)] = std::move(point);
            });
            break;
        }
    }

    for (const auto& point : record.points) {
        record.total_steps += point.steps;
        if (!point.ok) ++record.failures;
    }
    record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    // JSON sidecar: full echo, execution telemetry, per-point results
    json sidecar;
    sidecar["version"] = kVersion;
    json echo_json = json::object();
    for (const auto& [key, value] : config.echo()) echo_json[key] = value;
    sidecar["config"] = echo_json;
    sidecar["execution"] = {{"output_dir", config.output_dir},
                            {"workers", record.workers_used},
                            {"wall_seconds", record.wall_seconds},
                            {"total_steps", record.total_steps},
                            {"failures", record.failures}};
    sidecar["points"] = json::array();
    for (const auto& point : record.points) sidecar["points"].push_back(point_to_json(point));
    if (config.nu0_hz > 0.0) {
        json units = json::array();
        for (const auto& point : record.points) {
            if (!point.ok) continue;
            const PhysicalRates rates = report_physical_units(point.emission_rate, config.nu0_hz);
            units.push_back({{"index", point.index},
                             {"mode", to_string(point.mode)},
                             {"photons_per_second_cycles_convention", rates.cycles_per_second},
                             {"photons_per_second_angular_convention", rates.angular}});
        }
        sidecar["physical_units"] = units;
    }
    std::ofstream json_out(out_dir / "run.json");
    json_out << sidecar.dump(2) << '\n';

    return record;
}

} // namespace qvr

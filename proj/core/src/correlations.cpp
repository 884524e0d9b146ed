#include "qvr/correlations.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>

namespace qvr {

std::vector<Complex> CorrelationGrid::averaged() const {
    const Eigen::Index lags = values.cols();
    std::vector<Complex> avg(static_cast<std::size_t>(lags), Complex{0.0, 0.0});
    if (values.rows() == 0) return avg;
    for (Eigen::Index n = 0; n < lags; ++n) {
        avg[static_cast<std::size_t>(n)] = values.col(n).mean();
    }
    return avg;
}

double CorrelationGrid::tail_fraction() const {
    const auto avg = averaged();
    if (avg.size() < 2) return 0.0;
    double peak = 0.0;
    for (const auto& c : avg) peak = std::max(peak, std::abs(c));
    if (peak == 0.0) return 0.0;
    const std::size_t tail_start = avg.size() - std::max<std::size_t>(1, avg.size() / 20);
    double tail = 0.0;
    for (std::size_t n = tail_start; n < avg.size(); ++n) {
        tail = std::max(tail, std::abs(avg[n]));
    }
    return tail / peak;
}

CorrelationGrid two_time_correlation(const PeriodicState& state, const Generator& gen,
                                     const CorrelationConfig& config, int workers) {
    config.validate();
    if (state.samples.empty()) {
        throw std::invalid_argument("two_time_correlation: empty periodic state");
    }
    const SystemParams& params = gen.params();

    const double dt = (config.dt > 0.0) ? config.dt
                                        : PropagationConfig{}.requested_dt(params);
    double dtau_req = (config.dtau > 0.0) ? config.dtau
                                          : 2.0 * M_PI / (16.0 * params.omega_0);
    const int stride = std::max(1, static_cast<int>(std::lround(dtau_req / dt)));
    const double dtau = stride * dt;
    const double tau_max = config.resolved_tau_max(params);
    const int lags = static_cast<int>(std::floor(tau_max / dtau)) + 1;

    CorrelationGrid grid;
    grid.anchors = state.times;
    grid.tau.resize(lags);
    for (int n = 0; n < lags; ++n) grid.tau[n] = n * dtau;
    const int anchors = static_cast<int>(state.samples.size());
    grid.values.resize(anchors, lags);

    const ComplexMatrix& a_op = gen.cavity_op();
    const ComplexMatrix a_dag = a_op.adjoint();

    auto run_anchor = [&](int k) {
        ComplexMatrix block = a_op * state.samples[static_cast<std::size_t>(k)];
        Rk4Workspace work(gen.dim());
        const double t0 = state.times[static_cast<std::size_t>(k)];
        int recorded = 0;
        grid.values(k, recorded++) = (a_dag * block).trace();
        for (int n = 1; n < lags; ++n) {
            const double tau_base = (n - 1) * dtau;
            for (int s = 0; s < stride; ++s) {
                rk4_step_general(gen, block, t0 + tau_base + s * dt, dt, work);
            }
            if (!block.allFinite()) {
                throw PropagationError("two_time_correlation: NaN/Inf in regression block");
            }
            grid.values(k, recorded++) = (a_dag * block).trace();
        }
    };

    workers = std::max(1, std::min(workers, anchors));
    if (workers == 1) {
        for (int k = 0; k < anchors; ++k) run_anchor(k);
    } else {
        std::vector<std::thread> pool;
        std::exception_ptr error;
        std::mutex error_mutex;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w]() {
                try {
                    for (int k = w; k < anchors; k += workers) run_anchor(k);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        if (error) std::rethrow_exception(error);
    }
    return grid;
}

std::vector<double> default_omega_grid(const SystemParams& params) {
    const double step = std::min(params.gamma_cav, params.gamma_ge) / 5.0;
    const double lo = -0.5 * params.omega_0;
    const double hi = 3.0 * params.omega_0;
    const int points = static_cast<int>(std::floor((hi - lo) / step)) + 1;
    std::vector<double> omega(static_cast<std::size_t>(points));
    for (int m = 0; m < points; ++m) omega[static_cast<std::size_t>(m)] = lo + m * step;
    return omega;
}

std::vector<double> intracavity_spectrum(const CorrelationGrid& corr,
                                         const std::vector<double>& omega) {
    if (corr.tau.size() < 2) {
        throw std::invalid_argument("intracavity_spectrum: need at least two lags");
    }
    const auto avg = corr.averaged();
    const std::size_t lags = avg.size();
    const double dtau = corr.tau[1] - corr.tau[0];

    // trapezoid over the conjugate-symmetric extension:
    // G = dtau * [ C(0) + 2 sum_{n>=1} Re(e^{-i w tau_n} C_n) ] with half
    // weight on the last lag
    std::vector<double> g(omega.size(), 0.0);
    for (std::size_t m = 0; m < omega.size(); ++m) {
        const double w = omega[m];
        double acc = avg[0].real();
        for (std::size_t n = 1; n < lags; ++n) {
            const double phase = -w * corr.tau[n];
            const Complex rot{std::cos(phase), std::sin(phase)};
            const double weight = (n + 1 == lags) ? 1.0 : 2.0;
            acc += weight * (rot * avg[n]).real();
        }
        g[m] = dtau * acc;
    }
    return g;
}

SpectrumResult emission_spectrum(const std::vector<double>& intracavity,
                                 const std::vector<double>& omega,
                                 const SystemParams& params, EvolutionMode mode,
                                 double photon_number) {
    if (intracavity.size() != omega.size()) {
        throw std::invalid_argument("emission_spectrum: grid size mismatch");
    }
    SpectrumResult result;
    result.omega = omega;
    result.intracavity = intracavity;
    result.params = params;
    result.mode = mode;
    result.photon_number = photon_number;

    const double scale = params.gamma_cav / (2.0 * M_PI);
    result.emitted.resize(omega.size());
    for (std::size_t m = 0; m < omega.size(); ++m) {
        double theta = 1.0;
        if (mode == EvolutionMode::tcl2) {
            theta = (omega[m] > 0.0) ? 1.0 : (omega[m] == 0.0 ? 0.5 : 0.0);
        }
        result.emitted[m] = scale * theta * intracavity[m];
    }

    double integral = 0.0;
    for (std::size_t m = 1; m < omega.size(); ++m) {
        integral += 0.5 * (result.emitted[m] + result.emitted[m - 1]) *
                    (omega[m] - omega[m - 1]);
    }
    result.emission_rate = integral;
    return result;
}

SpectrumResult compute_spectrum(const PeriodicState& state, const Generator& gen,
                                const CorrelationConfig& config,
                                const std::vector<double>& omega, int workers) {
    const CorrelationGrid corr = two_time_correlation(state, gen, config, workers);
    const std::vector<double> g = intracavity_spectrum(corr, omega);
    const double n_in = state.mean_photon_number(gen.number_op());
    SpectrumResult result = emission_spectrum(g, omega, gen.params(), gen.mode(), n_in);
    result.resolution_warning = corr.tail_fraction() > 1e-3;
    return result;
}

double steady_emission_rate(const Generator& gen, const PeriodicState& state) {
    const double n_in = state.mean_photon_number(gen.number_op());
    if (gen.mode() == EvolutionMode::markovian) {
        return gen.params().gamma_cav * n_in;
    }
    double acc = 0.0;
    for (const auto& rho : state.samples) {
        acc += gen.emission_flux(rho);
    }
    return state.samples.empty() ? 0.0 : acc / static_cast<double>(state.samples.size());
}

} // namespace qvr

// correlations.hpp — two-time correlations and emission spectra at the
// periodic steady state
//
// C(t_k, tau) = Tr[a^dagger B(tau)] with B(0) = a rho(t_k) propagated by the
// same generator as the density matrix (quantum-regression prescription, with
// H(t_k + tau) time dependence). The period-averaged correlation is extended
// to negative lags by conjugate symmetry and Fourier transformed to the
// intracavity spectrum G; the emitted spectral density is
// S(omega) = gamma_cav(omega)/2pi * G(omega) with the step-function rate in
// tcl2 mode and a flat rate in the markovian comparison.

#pragma once

#include <vector>

#include "qvr/dynamics.hpp"

namespace qvr {

struct CorrelationConfig {
    double tau_max = 0.0; // 0 -> 8 / min(gamma_cav, gamma_ge)
    double dtau = 0.0;    // lag sampling; 0 -> 2pi/(16 omega_0); rounded to a step multiple
    double dt = 0.0;      // integrator step for the lag propagation; 0 -> propagation default

    void validate() const {
        if (tau_max < 0.0 || dtau < 0.0 || dt < 0.0)
            throw std::invalid_argument("CorrelationConfig: negative value");
    }

    double resolved_tau_max(const SystemParams& params) const {
        if (tau_max > 0.0) return tau_max;
        return 8.0 / std::min(params.gamma_cav, params.gamma_ge);
    }
};

struct CorrelationGrid {
    std::vector<double> anchors;      // steady-state times t_k spanning one period
    std::vector<double> tau;          // uniform lag grid starting at 0
    Eigen::MatrixXcd values;          // anchors x lags, C(t_k, tau)

    // mean over anchors; the stationary correlation of the period-averaged state
    std::vector<Complex> averaged() const;

    // max |averaged C| over the last 5 percent of the lag grid, relative to
    // the peak |averaged C|; above 1e-3 the spectral resolution is suspect
    double tail_fraction() const;
};

// Propagate every anchor's regression block over the lag grid. Workers > 1
// distributes anchors across threads (they are independent).
CorrelationGrid two_time_correlation(const PeriodicState& state, const Generator& gen,
                                     const CorrelationConfig& config, int workers = 1);

// Uniform grid [-0.5, 3] omega_0 with resolution min(gamma)/5.
std::vector<double> default_omega_grid(const SystemParams& params);

// Period-averaged intracavity spectrum on the given frequency grid. Real by
// the conjugate-symmetric extension of the averaged correlation.
std::vector<double> intracavity_spectrum(const CorrelationGrid& corr,
                                         const std::vector<double>& omega);

struct SpectrumResult {
    std::vector<double> omega;
    std::vector<double> emitted;      // S(omega)
    std::vector<double> intracavity;  // G(omega)
    double emission_rate = 0.0;       // trapezoidal integral of S over the grid
    double photon_number = 0.0;       // period-averaged intracavity photon number
    bool resolution_warning = false;  // correlation tail above 1e-3 of peak
    SystemParams params;              // provenance
    EvolutionMode mode = EvolutionMode::tcl2;
};

// Apply the extracavity filter to G and integrate. tcl2 keeps omega > 0 only
// (half weight exactly at 0); markovian applies the flat rate everywhere, so
// the integral reduces to gamma_cav * N_in by Parseval.
SpectrumResult emission_spectrum(const std::vector<double>& intracavity,
                                 const std::vector<double>& omega,
                                 const SystemParams& params, EvolutionMode mode,
                                 double photon_number);

// Full pipeline: correlations, spectrum, rates, warnings.
SpectrumResult compute_spectrum(const PeriodicState& state, const Generator& gen,
                                const CorrelationConfig& config,
                                const std::vector<double>& omega, int workers = 1);

// Emission rate of a steady state without the spectral pipeline: the
// period-averaged cavity-bath flux in tcl2 mode, gamma_cav * N_in in
// markovian mode (its flat-filter spectral integral, by Parseval).
double steady_emission_rate(const Generator& gen, const PeriodicState& state);

} // namespace qvr

// analysis.hpp — closed-form ladder and two-state-model results, peak finding

#pragma once

#include <vector>

#include "qvr/params.hpp"

namespace qvr {

enum class Branch { minus = -1, plus = +1 };

// Resonant ladder energy n*omega_0 +/- sqrt(n)*g_0 (rotating-wave ladder).
double ladder_energy(int n, Branch branch, const SystemParams& params);

// Higher-order resonance position 2*omega_0 +/- sqrt(2/n)*g_0.
double higher_order_resonance(int n, Branch branch, const SystemParams& params);

// Effective two-level description of the vacuum <-> doubly-excited-doublet
// transition driven at omega_mod.
struct TwoStateModel {
    double omega_rabi = 0.0; // delta_g / sqrt(2)
    double decay = 0.0;      // (gamma_ge + 3 gamma_cav) / 2
    double detuning = 0.0;   // omega_mod - ladder_energy(2, branch)

    static TwoStateModel from_params(const SystemParams& params, Branch branch);
};

// Saturable Lorentzian excited-state probability
//   P = (delta_g^2 / 2) / (decay^2 + delta_g^2 + 4 detuning^2).
double two_state_population(const TwoStateModel& model, double delta_g);

// Cascade emission rate P * gamma_cav * (3 gamma_cav + 2 gamma_ge) / (gamma_cav + gamma_ge).
double analytic_emission_rate(const TwoStateModel& model, double delta_g,
                              double gamma_cav, double gamma_ge);

struct Peak {
    double position = 0.0;
    double height = 0.0;
    double width = 0.0;   // full width at half maximum estimate; 0 if not resolved
    bool refined = false; // parabolic sub-grid refinement applied
};

// Local maxima of a sampled curve above noise_floor (absolute units), with
// 3-point parabolic refinement of the position and a linear-interpolated
// half-max width. Input must be sorted by x.
std::vector<Peak> find_peaks(const std::vector<double>& x, const std::vector<double>& y,
                             double noise_floor = 0.0);

} // namespace qvr

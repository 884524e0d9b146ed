// params.hpp — physical and numerical parameters of one simulation
//
// Unit system: hbar = 1 and omega_0 = 1 internally; every frequency, rate and
// energy below is quoted in units of the cavity frequency omega_0.

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace qvr {

struct SystemParams {
    double omega_0 = 1.0;    // cavity mode angular frequency
    double omega_ge = 1.0;   // qubit transition angular frequency
    double g_0 = 0.02;       // static vacuum Rabi coupling
    double delta_g = 0.0;    // modulation amplitude of the coupling
    double omega_mod = 2.0;  // modulation angular frequency
    double gamma_cav = 2e-3; // cavity dissipation rate
    double gamma_ge = 2e-3;  // qubit dissipation rate
    int n_max = 6;           // photon-number truncation (Fock states 0..n_max)

    // Tensor-product dimension of the truncated Fock x qubit space.
    int dim() const { return 2 * (n_max + 1); }

    // Instantaneous coupling g(t) = g_0 + delta_g * sin(omega_mod * t).
    double coupling_at(double t) const {
        return g_0 + delta_g * std::sin(omega_mod * t);
    }

    double modulation_period() const { return 2.0 * M_PI / omega_mod; }

    void validate() const {
        auto require = [](bool ok, const std::string& what) {
            if (!ok) throw std::invalid_argument("SystemParams: " + what);
        };
        require(omega_0 > 0.0, "omega_0 must be > 0");
        require(omega_ge > 0.0, "omega_ge must be > 0");
        require(g_0 > 0.0, "g_0 must be > 0");
        require(omega_mod > 0.0, "omega_mod must be > 0");
        require(gamma_cav > 0.0, "gamma_cav must be > 0");
        require(gamma_ge > 0.0, "gamma_ge must be > 0");
        require(delta_g >= 0.0, "delta_g must be >= 0");
        // g(t) must stay non-negative over the whole modulation cycle
        require(delta_g <= g_0, "delta_g must not exceed g_0");
        require(n_max >= 2, "n_max must be >= 2");
    }
};

} // namespace qvr

// bath.hpp — colored dissipation channels and their TCL2 integral operators
//
// Each channel couples through S_cav = a + a^dagger or S_ge = c + c^dagger to
// a bath with spectral density gamma_j(omega) = gamma_j * Theta(omega) and a
// constant background occupancy. The integral operator
//     U_j = int_0^inf v_j(tau) exp(-i H tau) S_j exp(+i H tau) dtau
// reduces, in the eigenbasis of the static Hamiltonian, to masking each matrix
// element of S_j with the half-Fourier transform K of the bath correlation
// evaluated at the corresponding transition frequency.

#pragma once

#include <complex>
#include <stdexcept>

#include "qvr/hilbert.hpp"
#include "qvr/params.hpp"

namespace qvr {

using Complex = std::complex<double>;

// Principal-value integral on the sharp-cutoff spectral density cannot be
// evaluated at (or too close to) its logarithmic singularity.
struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class BathChannel { cavity, qubit };

struct BathSpec {
    BathChannel channel = BathChannel::cavity;
    double rate = 2e-3;              // base rate gamma_j, units of omega_0
    double occupancy = 0.0;          // constant background occupation
    double cutoff = 10.0;            // high-frequency cutoff omega_c
    bool include_lamb_shift = false; // principal-value part of the kernel

    void validate() const {
        if (rate <= 0.0) throw std::invalid_argument("BathSpec: rate must be > 0");
        if (occupancy < 0.0) throw std::invalid_argument("BathSpec: occupancy must be >= 0");
        if (cutoff <= 0.0) throw std::invalid_argument("BathSpec: cutoff must be > 0");
    }
};

// Half-Fourier transform of the bath correlation,
//     K(Delta) = int_0^inf v_j(tau) exp(-i Delta tau) dtau,
// evaluated in closed form for the step spectral density. For occupancy 0:
//     Re K = gamma/2 (Delta < 0), gamma/4 (Delta = 0), 0 (Delta > 0),
//     Im K = -(gamma/2pi) PV int_0^cutoff domega / (omega + Delta)
// and the PV part is kept only when include_lamb_shift is set. Throws
// QuadratureError if the PV integrand is singular at the requested Delta.
Complex half_fourier_kernel(double delta, const BathSpec& bath);

// Bath correlation v_j(tau) by direct quadrature over omega in [0, cutoff].
// Test oracle for half_fourier_kernel; not used in production propagation.
Complex bath_correlation(double tau, const BathSpec& bath);

// Coupling operator S_j for the channel, bare basis.
ComplexMatrix bath_coupling_operator(const SystemParams& params, const BathSpec& bath);

// Build U_j: rotate S_j to the dressed basis, scale element (a,b) by
// K(omega_a - omega_b), rotate back. Dressed pairs degenerate to within
// 1e-12 * max transition share the Delta = 0 kernel value, so the result
// depends on spectral projectors only. Throws on dimension mismatch, and
// validates cutoff > max transition when the Lamb shift is requested.
ComplexMatrix build_U(const ComplexMatrix& coupling_bare, const DressedBasis& dressed,
                      const BathSpec& bath);

// White-bath comparison operator (gamma/2) S_j, the K(Delta) -> gamma/2 limit.
ComplexMatrix white_bath_operator(const ComplexMatrix& coupling_bare, const BathSpec& bath);

} // namespace qvr

// hilbert.hpp — operators on the truncated two-level-plus-cavity space
//
// Basis ordering: product states |n> (x) |s> with the qubit index fastest,
// i.e. index = 2*n + s where n = 0..n_max counts Fock states and s = 0 (g),
// s = 1 (e) labels the qubit. This ordering is fixed so that matrix entries
// quoted in tests and result files are reproducible.

#pragma once

#include <Eigen/Dense>

#include "qvr/params.hpp"

namespace qvr {

using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

// max |A - A^dagger| entry; zero for exactly Hermitian input
double hermiticity_error(const ComplexMatrix& a);

// max |entry|
double max_abs(const ComplexMatrix& a);

// Cavity annihilation operator a = a_fock (x) 1_qubit, entries sqrt(n).
ComplexMatrix cavity_annihilation(const SystemParams& params);

// Qubit lowering operator c = 1_fock (x) sigma_minus, c|e> = |g>.
ComplexMatrix qubit_lowering(const SystemParams& params);

// Photon number operator a^dagger a.
ComplexMatrix cavity_number(const SystemParams& params);

// Coupling operator (a + a^dagger)(c + c^dagger), including the
// anti-rotating products a c and a^dagger c^dagger.
ComplexMatrix coupling_operator(const SystemParams& params);

// Bare part omega_0 a^dagger a + omega_ge c^dagger c.
ComplexMatrix bare_hamiltonian(const SystemParams& params);

// Full Hamiltonian H(t) = bare + g(t) * coupling at time t >= 0.
ComplexMatrix hamiltonian(const SystemParams& params, double t);

// Static Hamiltonian: modulation frozen, g = g_0.
ComplexMatrix static_hamiltonian(const SystemParams& params);

// Eigendecomposition of the static Hamiltonian. Eigenvalues ascending,
// eigenvectors form the unitary bare->dressed basis change.
struct DressedBasis {
    RealVector energies;  // ascending
    ComplexMatrix modes;  // columns are dressed states in the bare basis

    int dim() const { return static_cast<int>(energies.size()); }

    ComplexMatrix to_dressed(const ComplexMatrix& bare_op) const {
        return modes.adjoint() * bare_op * modes;
    }
    ComplexMatrix to_bare(const ComplexMatrix& dressed_op) const {
        return modes * dressed_op * modes.adjoint();
    }

    // Projector onto the (non-degenerate) dressed ground state, bare basis.
    ComplexMatrix ground_state_projector() const {
        return modes.col(0) * modes.col(0).adjoint();
    }

    // Largest transition frequency in the truncated spectrum.
    double max_transition() const {
        return energies(energies.size() - 1) - energies(0);
    }
};

// Diagonalize the static Hamiltonian. Throws std::runtime_error if the
// self-adjoint solver fails (signals NaN contamination) or the eigenvector
// matrix is not unitary to 1e-10.
DressedBasis diagonalize_static(const SystemParams& params);

} // namespace qvr

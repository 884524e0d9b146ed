#include "qvr/hilbert.hpp"

#include <stdexcept>

namespace qvr {

double hermiticity_error(const ComplexMatrix& a) {
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

double max_abs(const ComplexMatrix& a) {
    return a.cwiseAbs().maxCoeff();
}

ComplexMatrix cavity_annihilation(const SystemParams& params) {
    params.validate();
    const int dim = params.dim();
    ComplexMatrix a = ComplexMatrix::Zero(dim, dim);
    for (int n = 1; n <= params.n_max; ++n) {
        const double amp = std::sqrt(static_cast<double>(n));
        for (int s = 0; s < 2; ++s) {
            a(2 * (n - 1) + s, 2 * n + s) = amp;
        }
    }
    return a;
}

ComplexMatrix qubit_lowering(const SystemParams& params) {
    params.validate();
    const int dim = params.dim();
    ComplexMatrix c = ComplexMatrix::Zero(dim, dim);
    for (int n = 0; n <= params.n_max; ++n) {
        c(2 * n, 2 * n + 1) = 1.0;
    }
    return c;
}

ComplexMatrix cavity_number(const SystemParams& params) {
    const ComplexMatrix a = cavity_annihilation(params);
    return a.adjoint() * a;
}

ComplexMatrix coupling_operator(const SystemParams& params) {
    const ComplexMatrix a = cavity_annihilation(params);
    const ComplexMatrix c = qubit_lowering(params);
    const ComplexMatrix x_cav = a + a.adjoint();
    const ComplexMatrix x_ge = c + c.adjoint();
    return x_cav * x_ge;
}

ComplexMatrix bare_hamiltonian(const SystemParams& params) {
    const ComplexMatrix a = cavity_annihilation(params);
    const ComplexMatrix c = qubit_lowering(params);
    return params.omega_0 * (a.adjoint() * a) + params.omega_ge * (c.adjoint() * c);
}

ComplexMatrix hamiltonian(const SystemParams& params, double t) {
    if (t < 0.0) throw std::invalid_argument("hamiltonian: t must be >= 0");
    return bare_hamiltonian(params) + params.coupling_at(t) * coupling_operator(params);
}

ComplexMatrix static_hamiltonian(const SystemParams& params) {
    return bare_hamiltonian(params) + params.g_0 * coupling_operator(params);
}

DressedBasis diagonalize_static(const SystemParams& params) {
    const ComplexMatrix h = static_hamiltonian(params);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error(
            "diagonalize_static: eigensolver failed (NaN contamination?)");
    }
    DressedBasis basis{solver.eigenvalues(), solver.eigenvectors()};
    const int dim = basis.dim();
    const double unitarity =
        (basis.modes.adjoint() * basis.modes - ComplexMatrix::Identity(dim, dim))
            .cwiseAbs()
            .maxCoeff();
    if (unitarity > 1e-10) {
        throw std::runtime_error("diagonalize_static: eigenvector matrix not unitary");
    }
    return basis;
}

} // namespace qvr

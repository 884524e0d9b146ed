#include "qvr/bath.hpp"

#include <cmath>

namespace qvr {

namespace {

// PV int_0^c domega / (omega + delta) = log(|c + delta| / |delta|).
// Singular when delta = 0 (lower endpoint, the Theta edge) or delta = -c.
double principal_value_log(double delta, double cutoff) {
    const double tol = 1e-12 * cutoff;
    if (std::abs(delta) < tol || std::abs(cutoff + delta) < tol) {
        throw QuadratureError(
            "half_fourier_kernel: principal value singular at Delta = " +
            std::to_string(delta));
    }
    return std::log(std::abs(cutoff + delta) / std::abs(delta));
}

} // namespace

Complex half_fourier_kernel(double delta, const BathSpec& bath) {
    bath.validate();
    const double gamma = bath.rate;
    const double nbar = bath.occupancy;

    // Emission side (n+1) has support at Delta < 0, absorption side (n) at
    // Delta > 0; the boundary takes half of each delta function.
    double re = 0.0;
    if (delta < 0.0) {
        re = 0.5 * gamma * (nbar + 1.0);
    } else if (delta > 0.0) {
        re = 0.5 * gamma * nbar;
    } else {
        re = 0.25 * gamma * (2.0 * nbar + 1.0);
    }

    double im = 0.0;
    if (bath.include_lamb_shift) {
        im = -(gamma / (2.0 * M_PI)) * (nbar + 1.0) * principal_value_log(delta, bath.cutoff);
        if (nbar > 0.0) {
            im += (gamma / (2.0 * M_PI)) * nbar * principal_value_log(-delta, bath.cutoff);
        }
    }
    return {re, im};
}

Complex bath_correlation(double tau, const BathSpec& bath) {
    bath.validate();
    // v(tau) = int_0^cutoff (gamma/2pi) [n e^{+i omega tau} + (n+1) e^{-i omega tau}] domega
    // Composite Simpson; the integrand oscillates at rate |tau|, so the grid
    // scales with cutoff * |tau|.
    const double gamma = bath.rate;
    const double nbar = bath.occupancy;
    const double wc = bath.cutoff;
    int panels = std::max(256, static_cast<int>(32.0 * wc * std::abs(tau)));
    if (panels % 2 != 0) ++panels;
    const double h = wc / panels;
    const Complex i1{0.0, 1.0};
    auto f = [&](double w) -> Complex {
        return nbar * std::exp(i1 * w * tau) + (nbar + 1.0) * std::exp(-i1 * w * tau);
    };
    Complex acc = f(0.0) + f(wc);
    for (int k = 1; k < panels; ++k) {
        acc += f(k * h) * ((k % 2 == 1) ? 4.0 : 2.0);
    }
    return (gamma / (2.0 * M_PI)) * acc * (h / 3.0);
}

ComplexMatrix bath_coupling_operator(const SystemParams& params, const BathSpec& bath) {
    bath.validate();
    if (bath.channel == BathChannel::cavity) {
        const ComplexMatrix a = cavity_annihilation(params);
        return a + a.adjoint();
    }
    const ComplexMatrix c = qubit_lowering(params);
    return c + c.adjoint();
}

ComplexMatrix build_U(const ComplexMatrix& coupling_bare, const DressedBasis& dressed,
                      const BathSpec& bath) {
    bath.validate();
    const int dim = dressed.dim();
    if (coupling_bare.rows() != dim || coupling_bare.cols() != dim) {
        throw std::invalid_argument("build_U: operator/basis dimension mismatch");
    }
    if (bath.include_lamb_shift && bath.cutoff <= dressed.max_transition()) {
        throw std::invalid_argument(
            "build_U: cutoff must exceed the largest transition frequency "
            "when include_lamb_shift is set");
    }

    const ComplexMatrix s_dressed = dressed.to_dressed(coupling_bare);
    const double elem_floor = 1e-13 * std::max(1.0, max_abs(s_dressed));
    const double deg_tol = 1e-12 * std::max(1.0, dressed.max_transition());

    ComplexMatrix u_dressed = ComplexMatrix::Zero(dim, dim);
    for (int a = 0; a < dim; ++a) {
        for (int b = 0; b < dim; ++b) {
            const Complex s_ab = s_dressed(a, b);
            if (std::abs(s_ab) < elem_floor) continue;
            double delta = dressed.energies(a) - dressed.energies(b);
            if (std::abs(delta) < deg_tol) delta = 0.0;
            u_dressed(a, b) = s_ab * half_fourier_kernel(delta, bath);
        }
    }
    return dressed.to_bare(u_dressed);
}

ComplexMatrix white_bath_operator(const ComplexMatrix& coupling_bare, const BathSpec& bath) {
    bath.validate();
    return 0.5 * bath.rate * coupling_bare;
}

} // namespace qvr

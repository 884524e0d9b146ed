#include "qvr/dynamics.hpp"

#include <cmath>
#include <optional>
#include <sstream>

namespace qvr {

namespace {

const Complex kImag{0.0, 1.0};

std::vector<BathSpec> default_baths(const SystemParams& params) {
    BathSpec cav;
    cav.channel = BathChannel::cavity;
    cav.rate = params.gamma_cav;
    BathSpec ge;
    ge.channel = BathChannel::qubit;
    ge.rate = params.gamma_ge;
    return {cav, ge};
}

double trace_product_real(const ComplexMatrix& f, const ComplexMatrix& rho) {
    // Re Tr[F rho] without forming the product
    return (f.transpose().cwiseProduct(rho)).sum().real();
}

} // namespace

std::string to_string(EvolutionMode mode) {
    return mode == EvolutionMode::tcl2 ? "tcl2" : "markovian";
}

Generator::Generator(const SystemParams& params, EvolutionMode mode)
    : Generator(params, mode, default_baths(params)) {}

Generator::Generator(const SystemParams& params, EvolutionMode mode,
                     std::vector<BathSpec> baths)
    : params_(params), mode_(mode), baths_(std::move(baths)) {
    params_.validate();
    if (baths_.empty()) throw std::invalid_argument("Generator: at least one bath required");
    a_ = cavity_annihilation(params_);
    number_ = a_.adjoint() * a_;
    coupling_v_ = coupling_operator(params_);
    h_static_ = static_hamiltonian(params_);
    dressed_ = diagonalize_static(params_);
    for (const auto& bath : baths_) {
        coupling_.push_back(bath_coupling_operator(params_, bath));
    }
    build_operators(params_.g_0);
}

void Generator::build_operators(double coupling_value) {
    const int dim = params_.dim();
    DressedBasis basis = dressed_;
    if (coupling_value != params_.g_0) {
        SystemParams frozen = params_;
        frozen.g_0 = coupling_value;
        frozen.delta_g = 0.0;
        basis = diagonalize_static(frozen);
    }

    memory_.clear();
    damping_ = ComplexMatrix::Zero(dim, dim);
    cavity_flux_ = ComplexMatrix::Zero(dim, dim);
    for (std::size_t j = 0; j < baths_.size(); ++j) {
        ComplexMatrix u = (mode_ == EvolutionMode::tcl2)
                              ? build_U(coupling_[j], basis, baths_[j])
                              : white_bath_operator(coupling_[j], baths_[j]);
        damping_ += coupling_[j] * u;
        if (baths_[j].channel == BathChannel::cavity) {
            cavity_flux_ += coupling_[j] * u;
        }
        memory_.push_back(std::move(u));
    }
}

void Generator::refresh(double t) {
    build_operators(params_.coupling_at(t));
}

void Generator::rhs_hermitian(const ComplexMatrix& rho, double t, ComplexMatrix& out,
                              Workspace& work) const {
    // -i [H, rho] for Hermitian rho: -i (H rho - (H rho)^dagger)
    work.h_t = h_static_;
    const double dg = params_.coupling_at(t) - params_.g_0;
    if (dg != 0.0) work.h_t.noalias() += dg * coupling_v_;

    work.left.noalias() = work.h_t * rho;
    out = -kImag * (work.left - work.left.adjoint());

    // dissipator: sum_j [ X_j + X_j^dagger ] - (D rho + (D rho)^dagger)
    // with X_j = U_j (rho S_j) and D = sum_j S_j U_j
    for (std::size_t j = 0; j < memory_.size(); ++j) {
        work.left.noalias() = rho * coupling_[j];
        work.sandwich.noalias() = memory_[j] * work.left;
        out += work.sandwich + work.sandwich.adjoint();
    }
    work.left.noalias() = damping_ * rho;
    out -= work.left + work.left.adjoint();
}

void Generator::rhs_general(const ComplexMatrix& op, double t, ComplexMatrix& out,
                            Workspace& work) const {
    work.h_t = h_static_;
    const double dg = params_.coupling_at(t) - params_.g_0;
    if (dg != 0.0) work.h_t.noalias() += dg * coupling_v_;

    out.noalias() = work.h_t * op;
    out.noalias() -= op * work.h_t;
    out *= -kImag;

    for (std::size_t j = 0; j < memory_.size(); ++j) {
        work.left.noalias() = op * coupling_[j];
        out.noalias() += memory_[j] * work.left;
        work.left.noalias() = op * memory_[j].adjoint();
        out.noalias() += coupling_[j] * work.left;
    }
    out.noalias() -= damping_ * op;
    out.noalias() -= op * damping_.adjoint();
}

double Generator::emission_flux(const ComplexMatrix& rho) const {
    return 2.0 * trace_product_real(cavity_flux_, rho);
}

double Generator::photon_number(const ComplexMatrix& rho) const {
    return trace_product_real(number_, rho);
}

ComplexMatrix tcl2_rhs(const ComplexMatrix& rho, double t, const Generator& gen) {
    Generator::Workspace work(gen.dim());
    ComplexMatrix out(gen.dim(), gen.dim());
    gen.rhs_hermitian(rho, t, out, work);
    return out;
}

ComplexMatrix markovian_rhs(const ComplexMatrix& rho, double t, const Generator& gen) {
    return tcl2_rhs(rho, t, gen);
}

ComplexMatrix dressed_ground_state(const SystemParams& params) {
    return diagonalize_static(params).ground_state_projector();
}

ComplexMatrix bare_vacuum_state(const SystemParams& params) {
    ComplexMatrix rho = ComplexMatrix::Zero(params.dim(), params.dim());
    rho(0, 0) = 1.0;
    return rho;
}

double PeriodicState::mean_photon_number(const ComplexMatrix& number_op) const {
    double acc = 0.0;
    for (const auto& rho : samples) {
        acc += (number_op.transpose().cwiseProduct(rho)).sum().real();
    }
    return samples.empty() ? 0.0 : acc / static_cast<double>(samples.size());
}

void rk4_step_hermitian(const Generator& gen, ComplexMatrix& state, double t, double dt,
                        Rk4Workspace& work) {
    gen.rhs_hermitian(state, t, work.k1, work.rhs_work);
    work.stage = state + (0.5 * dt) * work.k1;
    gen.rhs_hermitian(work.stage, t + 0.5 * dt, work.k2, work.rhs_work);
    work.stage = state + (0.5 * dt) * work.k2;
    gen.rhs_hermitian(work.stage, t + 0.5 * dt, work.k3, work.rhs_work);
    work.stage = state + dt * work.k3;
    gen.rhs_hermitian(work.stage, t + dt, work.k4, work.rhs_work);
    state += (dt / 6.0) * (work.k1 + 2.0 * work.k2 + 2.0 * work.k3 + work.k4);
}

void rk4_step_general(const Generator& gen, ComplexMatrix& state, double t, double dt,
                      Rk4Workspace& work) {
    gen.rhs_general(state, t, work.k1, work.rhs_work);
    work.stage = state + (0.5 * dt) * work.k1;
    gen.rhs_general(work.stage, t + 0.5 * dt, work.k2, work.rhs_work);
    work.stage = state + (0.5 * dt) * work.k2;
    gen.rhs_general(work.stage, t + 0.5 * dt, work.k3, work.rhs_work);
    work.stage = state + dt * work.k3;
    gen.rhs_general(work.stage, t + dt, work.k4, work.rhs_work);
    state += (dt / 6.0) * (work.k1 + 2.0 * work.k2 + 2.0 * work.k3 + work.k4);
}

namespace {

void validate_density_matrix(const ComplexMatrix& rho, double trace_tol) {
    if (!rho.allFinite()) throw PropagationError("initial state contains NaN/Inf");
    if (hermiticity_error(rho) > 1e-10)
        throw PropagationError("initial state is not Hermitian to 1e-10");
    if (std::abs(rho.trace().real() - 1.0) > trace_tol ||
        std::abs(rho.trace().imag()) > trace_tol)
        throw PropagationError("initial state trace differs from 1");
}

} // namespace

PeriodicState propagate(const ComplexMatrix& rho0, const SystemParams& params,
                        const PropagationConfig& config, EvolutionMode mode) {
    Generator gen(params, mode);
    return propagate(rho0, gen, config);
}

PeriodicState propagate(const ComplexMatrix& rho0, const Generator& gen,
                        const PropagationConfig& config) {
    config.validate();
    const SystemParams& params = gen.params();
    validate_density_matrix(rho0, 1e-8);

    const double period = params.modulation_period();
    const int samples = config.samples_per_period;
    // integer steps per period, divisible by the sample count
    int steps_per_period = static_cast<int>(std::ceil(period / config.requested_dt(params)));
    steps_per_period = ((steps_per_period + samples - 1) / samples) * samples;
    const double dt = period / steps_per_period;
    const int stride = steps_per_period / samples;
    const int max_periods = config.resolved_max_periods(params);

    // mutable copy when the validation flag asks for per-step U rebuilds
    const bool rebuild = config.rebuild_u_each_step;
    std::optional<Generator> rebuilt;
    if (rebuild) rebuilt.emplace(gen);

    PeriodicState result;
    result.period = period;
    result.times.assign(samples, 0.0);
    result.samples.assign(samples, ComplexMatrix());
    result.min_eigenvalue = 0.0;

    const int dim = gen.dim();
    Rk4Workspace work(dim);
    ComplexMatrix rho = rho0;
    ComplexMatrix strobe_prev = rho0;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig_solver;

    long steps = 0;
    for (int p = 0; p < max_periods; ++p) {
        const double t0 = p * period;
        for (int k = 0; k < steps_per_period; ++k) {
            if (k % stride == 0) {
                const int slot = k / stride;
                result.times[slot] = t0 + k * dt;
                result.samples[slot] = rho;
            }
            const double t = t0 + k * dt;
            if (rebuild) rebuilt->refresh(t);
            rk4_step_hermitian(rebuild ? *rebuilt : gen, rho, t, dt, work);
            ++steps;
        }
        if (!rho.allFinite()) {
            std::ostringstream msg;
            msg << "propagate: NaN/Inf after period " << (p + 1) << " (step " << steps << ")";
            throw PropagationError(msg.str());
        }

        const double trace_drift = std::abs(rho.trace().real() - 1.0) +
                                   std::abs(rho.trace().imag());
        const double herm = hermiticity_error(rho);
        eig_solver.compute(rho, Eigen::EigenvaluesOnly);
        const double min_eig = eig_solver.eigenvalues().minCoeff();
        result.max_trace_drift = std::max(result.max_trace_drift, trace_drift);
        result.max_herm_error = std::max(result.max_herm_error, herm);
        result.min_eigenvalue = std::min(result.min_eigenvalue, min_eig);
        if (trace_drift > 1e-6) {
            throw PropagationError("propagate: trace drift beyond 1e-6");
        }
        if (min_eig < -1e-6) {
            throw PropagationError("propagate: positivity violated beyond -1e-6");
        }

        result.periods = p + 1;
        result.steps = steps;
        result.final_delta = (rho - strobe_prev).cwiseAbs().maxCoeff();
        if (result.final_delta < config.steady_tol) {
            result.converged = true;
            return result;
        }
        strobe_prev = rho;
    }
    result.converged = false; // ran out of periods; caller treats as warning
    return result;
}

} // namespace qvr

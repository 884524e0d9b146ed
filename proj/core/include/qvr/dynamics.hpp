// dynamics.hpp — TCL2 propagation of the density matrix under modulation
//
// The generator is
//   d rho / dt = -i [H(t), rho]
//              + sum_j ( U_j rho S_j + S_j rho U_j^dagger
//                        - S_j U_j rho - rho U_j^dagger S_j )
// with U_j built from the static Hamiltonian (the modulation depth used in
// practice is a 1e-2 relative correction to g; a validation flag rebuilds the
// U_j from H(t) each step). The markovian comparison mode replaces U_j by
// (gamma_j/2) S_j, the white-bath limit of the kernel.

#pragma once

#include <string>
#include <vector>

#include "qvr/bath.hpp"
#include "qvr/hilbert.hpp"
#include "qvr/params.hpp"

namespace qvr {

struct PropagationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class EvolutionMode { tcl2, markovian };

std::string to_string(EvolutionMode mode);

struct PropagationConfig {
    double dt = 0.0;            // 0 -> smallest of {2pi/omega_mod, 2pi/omega_0}/200
    double steady_tol = 1e-6;   // stroboscopic max-norm change threshold
    int max_periods = 0;        // 0 -> ceil(10 * max(1/gamma_cav, 1/gamma_ge) / T_mod)
    int samples_per_period = 32;
    bool rebuild_u_each_step = false; // validation: U_j from H(t) at every step

    void validate() const {
        if (dt < 0.0) throw std::invalid_argument("PropagationConfig: dt must be >= 0");
        if (steady_tol <= 0.0)
            throw std::invalid_argument("PropagationConfig: steady_tol must be > 0");
        if (max_periods < 0)
            throw std::invalid_argument("PropagationConfig: max_periods must be >= 0");
        if (samples_per_period < 8)
            throw std::invalid_argument("PropagationConfig: samples_per_period must be >= 8");
    }

    double requested_dt(const SystemParams& params) const {
        if (dt > 0.0) return dt;
        const double fastest =
            std::min(2.0 * M_PI / params.omega_mod, 2.0 * M_PI / params.omega_0);
        return fastest / 200.0;
    }

    int resolved_max_periods(const SystemParams& params) const {
        if (max_periods > 0) return max_periods;
        const double slow = std::max(1.0 / params.gamma_cav, 1.0 / params.gamma_ge);
        return static_cast<int>(std::ceil(10.0 * slow / params.modulation_period()));
    }
};

// Fixed operator content of the master equation for one parameter set.
// Immutable after construction; safe to share across sweep workers.
class Generator {
  public:
    Generator(const SystemParams& params, EvolutionMode mode);
    Generator(const SystemParams& params, EvolutionMode mode, std::vector<BathSpec> baths);

    const SystemParams& params() const { return params_; }
    EvolutionMode mode() const { return mode_; }
    int dim() const { return params_.dim(); }
    const DressedBasis& dressed() const { return dressed_; }
    const ComplexMatrix& cavity_op() const { return a_; }
    const ComplexMatrix& number_op() const { return number_; }
    const ComplexMatrix& memory_op(std::size_t channel) const { return memory_[channel]; }
    const ComplexMatrix& coupling_op(std::size_t channel) const { return coupling_[channel]; }
    std::size_t channels() const { return coupling_.size(); }

    // Scratch space for rhs evaluations; one per propagation thread.
    struct Workspace {
        ComplexMatrix h_t, left, sandwich;
        explicit Workspace(int dim)
            : h_t(dim, dim), left(dim, dim), sandwich(dim, dim) {}
    };

    // Master-equation right-hand side for a Hermitian state. Exploits the
    // Hermitian-pair structure of the dissipator (half the matrix products
    // of the general form).
    void rhs_hermitian(const ComplexMatrix& rho, double t, ComplexMatrix& out,
                       Workspace& work) const;

    // Right-hand side for a general (non-Hermitian) operator; used by the
    // quantum-regression propagation of a rho S block.
    void rhs_general(const ComplexMatrix& op, double t, ComplexMatrix& out,
                     Workspace& work) const;

    // Instantaneous rate of photons into the cavity bath,
    //   2 Re Tr[S_cav U_cav rho].
    // For the colored kernel this counts downward dressed transitions only
    // and vanishes identically on the dressed ground state.
    double emission_flux(const ComplexMatrix& rho) const;

    double photon_number(const ComplexMatrix& rho) const;

    // Rebuild U_j (and products) from the instantaneous H(t); called once per
    // step by propagate() when PropagationConfig.rebuild_u_each_step is set.
    void refresh(double t);

  private:
    void build_operators(double coupling_value);

    SystemParams params_;
    EvolutionMode mode_;
    std::vector<BathSpec> baths_;

    DressedBasis dressed_;
    ComplexMatrix a_;            // cavity annihilation
    ComplexMatrix number_;       // a^dagger a
    ComplexMatrix h_static_;     // H at g = g_0
    ComplexMatrix coupling_v_;   // (a + a^dagger)(c + c^dagger)
    std::vector<ComplexMatrix> coupling_;  // S_j
    std::vector<ComplexMatrix> memory_;    // U_j (or white-bath operator)
    ComplexMatrix damping_;      // sum_j S_j U_j
    ComplexMatrix cavity_flux_;  // S_cav U_cav
};

// Convenience wrappers matching the generator modes; allocate per call, so
// prefer the member functions in hot loops.
ComplexMatrix tcl2_rhs(const ComplexMatrix& rho, double t, const Generator& gen);
ComplexMatrix markovian_rhs(const ComplexMatrix& rho, double t, const Generator& gen);

// Dressed ground state of the static Hamiltonian (default initial state).
ComplexMatrix dressed_ground_state(const SystemParams& params);
// Bare vacuum |0, g><0, g|.
ComplexMatrix bare_vacuum_state(const SystemParams& params);

// One sampled modulation period at (or nearest to) the periodic steady state.
struct PeriodicState {
    std::vector<double> times;           // absolute sample times, uniform
    std::vector<ComplexMatrix> samples;  // density matrices at those times
    double period = 0.0;
    bool converged = false;
    int periods = 0;         // modulation periods propagated
    long steps = 0;          // RK4 steps taken
    double final_delta = 0.0;      // last stroboscopic max-norm change
    double max_trace_drift = 0.0;  // max |Tr rho - 1| observed
    double max_herm_error = 0.0;   // max Hermiticity deviation observed
    double min_eigenvalue = 0.0;   // most negative eigenvalue observed

    double mean_photon_number(const ComplexMatrix& number_op) const;
};

// Classic fixed-step RK4 propagation until the stroboscopic density matrix
// is a fixed point of the period map to steady_tol, or max_periods elapse
// (then PeriodicState.converged is false; a warning, not an error). Throws
// PropagationError on NaN/Inf, trace drift beyond 1e-6, or an eigenvalue
// below -1e-6.
PeriodicState propagate(const ComplexMatrix& rho0, const SystemParams& params,
                        const PropagationConfig& config, EvolutionMode mode);
PeriodicState propagate(const ComplexMatrix& rho0, const Generator& gen,
                        const PropagationConfig& config);

// Single RK4 step of the general (non-Hermitian) master equation; shared by
// the correlation propagation.
struct Rk4Workspace {
    ComplexMatrix k1, k2, k3, k4, stage;
    Generator::Workspace rhs_work;
    explicit Rk4Workspace(int dim)
        : k1(dim, dim), k2(dim, dim), k3(dim, dim), k4(dim, dim), stage(dim, dim),
          rhs_work(dim) {}
};

void rk4_step_hermitian(const Generator& gen, ComplexMatrix& state, double t, double dt,
                        Rk4Workspace& work);
void rk4_step_general(const Generator& gen, ComplexMatrix& state, double t, double dt,
                      Rk4Workspace& work);

} // namespace qvr

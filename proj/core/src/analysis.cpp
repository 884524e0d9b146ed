#include "qvr/analysis.hpp"

#include <cmath>
#include <stdexcept>

namespace qvr {

double ladder_energy(int n, Branch branch, const SystemParams& params) {
    if (n < 1) throw std::invalid_argument("ladder_energy: n must be >= 1");
    const double sign = (branch == Branch::plus) ? 1.0 : -1.0;
    return n * params.omega_0 + sign * std::sqrt(static_cast<double>(n)) * params.g_0;
}

double higher_order_resonance(int n, Branch branch, const SystemParams& params) {
    if (n < 1) throw std::invalid_argument("higher_order_resonance: n must be >= 1");
    const double sign = (branch == Branch::plus) ? 1.0 : -1.0;
    return 2.0 * params.omega_0 + sign * std::sqrt(2.0 / static_cast<double>(n)) * params.g_0;
}

TwoStateModel TwoStateModel::from_params(const SystemParams& params, Branch branch) {
    TwoStateModel model;
    model.omega_rabi = params.delta_g / std::sqrt(2.0);
    model.decay = 0.5 * (params.gamma_ge + 3.0 * params.gamma_cav);
    model.detuning = params.omega_mod - ladder_energy(2, branch, params);
    return model;
}

double two_state_population(const TwoStateModel& model, double delta_g) {
    if (model.decay <= 0.0) throw std::invalid_argument("two_state_population: decay must be > 0");
    const double num = 0.5 * delta_g * delta_g;
    const double den = model.decay * model.decay + delta_g * delta_g +
                       4.0 * model.detuning * model.detuning;
    return num / den;
}

double analytic_emission_rate(const TwoStateModel& model, double delta_g,
                              double gamma_cav, double gamma_ge) {
    if (gamma_cav <= 0.0 || gamma_ge < 0.0)
        throw std::invalid_argument("analytic_emission_rate: rates must be positive");
    const double population = two_state_population(model, delta_g);
    return population * gamma_cav * (3.0 * gamma_cav + 2.0 * gamma_ge) /
           (gamma_cav + gamma_ge);
}

std::vector<Peak> find_peaks(const std::vector<double>& x, const std::vector<double>& y,
                             double noise_floor) {
    if (x.size() != y.size()) throw std::invalid_argument("find_peaks: size mismatch");
    std::vector<Peak> peaks;
    const std::size_t n = x.size();
    if (n < 3) return peaks;

    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (y[i] <= noise_floor) continue;
        if (!(y[i] >= y[i - 1] && y[i] > y[i + 1])) continue;

        Peak peak;
        peak.height = y[i];
        peak.position = x[i];

        // 3-point parabolic refinement; degenerate denominator keeps the grid point
        const double denom = y[i - 1] - 2.0 * y[i] + y[i + 1];
        if (denom < 0.0) {
            const double h = 0.5 * (x[i + 1] - x[i - 1]);
            const double shift = 0.5 * (y[i - 1] - y[i + 1]) / denom;
            peak.position = x[i] + shift * h;
            peak.height = y[i] - 0.25 * (y[i - 1] - y[i + 1]) * shift;
            peak.refined = true;
        }

        // half-max crossings by linear interpolation on both flanks
        const double half = 0.5 * peak.height;
        double left = x[i], right = x[i];
        bool left_found = false, right_found = false;
        for (std::size_t k = i; k > 0; --k) {
            if (y[k - 1] <= half) {
                const double f = (y[k] - half) / (y[k] - y[k - 1]);
                left = x[k] + f * (x[k - 1] - x[k]);
                left_found = true;
                break;
            }
        }
        for (std::size_t k = i; k + 1 < n; ++k) {
            if (y[k + 1] <= half) {
                const double f = (y[k] - half) / (y[k] - y[k + 1]);
                right = x[k] + f * (x[k + 1] - x[k]);
                right_found = true;
                break;
            }
        }
        if (left_found && right_found) peak.width = right - left;
        peaks.push_back(peak);
    }
    return peaks;
}

} // namespace qvr

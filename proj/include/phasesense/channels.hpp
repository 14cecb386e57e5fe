#pragma once

#include <functional>
#include <vector>

#include "phasesense/fock.hpp"

namespace phasesense::channels {

/// Physical realizations of the phase-randomized displacement channel.
/// Displace       : D(alpha e^{i phi}) with uniform phi            (U1)
/// RotatedDisplace: R^dag(phi) D(alpha) R(phi)                     (U2)
/// DisplaceRotate : D(alpha) R(phi)                                (U3)
enum class Variant { Displace, RotatedDisplace, DisplaceRotate };

struct ChannelConfig {
    double alpha = 0.0;
    Variant variant = Variant::Displace;
};

struct ThermalBathConfig {
    double gamma = 0.0;  // linear coupling rate
    double nbar = 0.0;   // bath thermal occupation
    double omega = 0.0;  // free-evolution frequency

    ThermalBathConfig() = default;
    ThermalBathConfig(double gamma_, double nbar_, double omega_ = 0.0);
};

enum class SmallTimeRegime { Loss, Heating, General };

/// First-order decoherence map configuration. `tau` is the dimensionless time
/// epsilon = gamma * t. The Heating regime keeps only the nbar >> 1 limit with
/// eps_bar = tau * nbar as its single knob.
struct SmallTimeConfig {
    double tau = 0.0;
    double nbar = 0.0;
    SmallTimeRegime regime = SmallTimeRegime::Loss;

    SmallTimeConfig(double tau_, SmallTimeRegime regime_, double nbar_ = 0.0);
    static SmallTimeConfig loss(double tau) { return {tau, SmallTimeRegime::Loss}; }
    static SmallTimeConfig heating(double eps_bar) {
        return {eps_bar, SmallTimeRegime::Heating, 1.0};
    }
    double heating_strength() const { return tau * nbar; }
};

/// Diagonal of the channel output, P_n = sum_k rho_k c_kn^2. Identical for all
/// three variants.
NumberDistribution phase_randomized_diagonals(const DensityMatrix& rho, double alpha);

/// Raw-vector version used by the Fisher pipeline; entries may carry the
/// harmless negativity of upstream linearized maps (clamped at zero here).
std::vector<double> phase_randomized_probabilities(const std::vector<double>& diag, double alpha);

/// Full channel output including off-diagonals; variants Displace and
/// RotatedDisplace produce identical matrices.
DensityMatrix phase_randomized_full(const DensityMatrix& rho, double alpha, Variant variant);

/// First-order thermal decoherence map,
///   rho (1 - eps nbar) - eps (nbar + 1/2)(rho N + N rho)
///     + eps nbar a^dag rho a + eps (nbar + 1) a rho a^dag,
/// specialized per regime. Exactly reproduces the diagonal update rules for
/// diagonal inputs.
DensityMatrix small_time_map(const DensityMatrix& rho, const SmallTimeConfig& cfg);

/// Diagonal-only update. Exact for the diagonal of small_time_map since the
/// ladder sandwiches never mix diagonals with coherences. Negative entries
/// produced by the linearization outside its validity range (tau * n > 1 in
/// the far tail) are clamped and the vector renormalized.
std::vector<double> small_time_diagonal_update(const std::vector<double>& diag,
                                               const SmallTimeConfig& cfg);

/// Exact solution of the thermal Lindblad equation via the double ladder
/// expansion with F, E, G coefficients; series truncated at 1e-14. Heating
/// runs enlarge the working dimension until the final tail fits the budget.
DensityMatrix exact_lindblad(const DensityMatrix& rho, double t, const ThermalBathConfig& bath,
                             double tail_budget = 1e-10);

using Generator = std::function<Matrix(double)>;

/// Fixed-step RK4 integration of the master equation with Hamiltonian
/// h_of_t (may be null) and thermal collapse operators. Hermiticity is
/// restored every step; trace drift beyond 1e-8 aborts.
DensityMatrix integrate_master(const DensityMatrix& rho0, const Generator& h_of_t,
                               const ThermalBathConfig& bath, double t_final, double dt);

}  // namespace phasesense::channels

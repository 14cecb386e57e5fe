#pragma once

#include <optional>
#include <vector>

#include "phasesense/channels.hpp"
#include "phasesense/fock.hpp"

namespace phasesense::metrology {

/// Fisher information of the number-resolved measurement after the
/// phase-randomized displacement channel, and the metrological gain relative
/// to the exact coherent baseline F = 4.
struct FisherResult {
    double fisher = 0.0;
    double gain = 0.0;
    double alpha = 0.0;
    // Diagnostics for probability-floor handling.
    int dropped_terms = 0;    // P_n below floor with negligible numerator
    int divergent_terms = 0;  // P_n below floor with non-negligible numerator
};

/// d P_n / d alpha in closed Laguerre form. alpha = 0 is rejected.
std::vector<double> prob_derivative(const DensityMatrix& rho, double alpha);
std::vector<double> prob_derivative(const std::vector<double>& diag, double alpha);

FisherResult fisher_information(const DensityMatrix& rho, double alpha);
FisherResult fisher_information(const std::vector<double>& diag, double alpha);

/// Heisenberg-type bound 1 + 2<N>.
double occupation_bound(const DensityMatrix& rho);

/// Coefficient of 4 alpha^2 in the small-alpha Fisher expansion, valid for
/// fully supported distributions. `divergent` flags a vanishing occupation
/// under a nonzero numerator, the signature of gapped support with F = O(1).
struct SmallAlphaExpansion {
    double coefficient = 0.0;
    bool divergent = false;
};
SmallAlphaExpansion small_alpha_fisher(const DensityMatrix& rho);

/// Spacing analysis of the gain expansion around the occupation bound.
struct ExpansionReport {
    double leading = 0.0;     // 1 + 2<N>
    double correction = 0.0;  // explicit only for spacing 2
    int spacing = 1;          // detected support spacing; dim for single-point
    int offset = 0;           // support offset q
    int residual_order = 0;   // power of alpha of the leading residual
};
ExpansionReport expansion_spacing(const DensityMatrix& rho, double alpha);

/// Support spacing of a diagonal (exact-zero threshold 1e-14). A single
/// support point reports the vector length (the infinity convention).
int detect_spacing(const std::vector<double>& diag, int* offset = nullptr);

/// Fixed-alpha perturbative gain 1 + 2<N> - eta / (2 alpha^2), with
/// eta = 2 <N> tau for loss (nbar = 0) and 2 (2<N> + 1) tau nbar for heating.
/// Requires spacing >= 2.
double perturbative_gain(const DensityMatrix& rho, double alpha, double tau, double nbar = 0.0);

/// Fixed-epsilon loss expansion 1 + <N> + <N> alpha^2 / eps. Requires
/// spacing >= 4.
double perturbative_gain_fixed_eps(const DensityMatrix& rho, double alpha, double eps);

struct AlphaInterval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
};

/// Intervals of the alpha grid where the gain after the given decoherence
/// exceeds 1; interval endpoints located by bisection to 1e-4.
std::vector<AlphaInterval> dynamical_range(
    const DensityMatrix& rho, const std::optional<channels::SmallTimeConfig>& decoherence,
    const std::vector<double>& alpha_grid);

}  // namespace phasesense::metrology

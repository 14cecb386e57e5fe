#pragma once

#include <string>

#include "json.hpp"
#include "phasesense/fock.hpp"

namespace phasesense::zoo {

enum class Family {
    Fock,
    GaussianSqueezed,
    Cat,
    Moon,
    GKP,
    Compass,
    NumberPhase,
    FockSuperposition,
};

std::string family_name(Family family);
Family family_from_name(const std::string& name);

/// Family tag plus the named parameters that select one member.
struct StateSpec {
    Family family = Family::Fock;

    int fock_n = 0;            // Fock index; lower index of a superposition
    int fock_n2 = 0;           // upper index of a superposition
    double mean_target = 0.0;  // Gaussian squeezed-vacuum <N>
    double amplitude = 0.0;    // coherent size (cat, moon, compass)
    double delta = 0.0;        // moon envelope width / GKP regularization
    double mu = 0.0;           // number-phase occupation parameter
    int spacing = 2;           // number-phase N
    int offset = 0;            // number-phase q
    int parity_sign = +1;      // cat / moon parity selector

    void validate() const;
    nlohmann::json to_json() const;
    static StateSpec from_json(const nlohmann::json& j);
};

/// Normalized pure-state projector for the requested family. Throws when the
/// truncation cannot hold the state within the declared tail budget.
DensityMatrix build(const StateSpec& spec, const TruncationPolicy& trunc);

/// Signed number-basis amplitudes; building block of `build` and of the
/// occupation solver.
Eigen::VectorXd amplitudes(const StateSpec& spec, int dim);

/// Finite-energy grid-state number distribution via quadrature against the
/// Hermite functions.
NumberDistribution gkp_number_distribution(double delta, const TruncationPolicy& trunc);

/// Closed-form approximation of the grid-state occupation,
/// sinh^2(log delta) + 2 pi sum_k k^2 e^{-2 k^2 pi delta^2} / theta_3.
double gkp_mean_occupation_formula(double delta);

double mean_occupation_of(const StateSpec& spec);

/// Bisection on the family's monotone size parameter until the state's <N>
/// matches `target` within `tol`.
StateSpec solve_for_occupation(const StateSpec& base, double target, double tol);

}  // namespace phasesense::zoo

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "json.hpp"
#include "phasesense/channels.hpp"
#include "phasesense/metrology.hpp"

namespace phasesense::control {

/// dCRAB pulse: randomized truncated Fourier basis under a smooth envelope.
/// Each super-iteration appends n_components frequencies; the matching
/// coefficient blocks of earlier super-iterations stay frozen (the dressing).
struct PulseParams {
    double total_time = 1.0;
    double amp_cap = 150.0;
    double sigma = 10.0;     // envelope steepness
    int n_components = 12;   // frequencies added per super-iteration

    std::vector<double> nu;    // concatenated frequency draws
    std::vector<double> a_re;  // cos coefficients, Re quadrature
    std::vector<double> b_re;  // sin coefficients, Re quadrature
    std::vector<double> a_im;  // cos coefficients, Im quadrature
    std::vector<double> b_im;  // sin coefficients, Im quadrature

    /// Envelope tanh[s sin(pi t / 2T)] tanh[s sin(pi (T-t) / 2T)]; vanishes
    /// at both endpoints.
    double scaling(double t) const;
    double control_re(double t) const;  // clipped to [-amp_cap, amp_cap]
    double control_im(double t) const;
    Complex drive(double t) const;

    nlohmann::json to_json() const;
    static PulseParams from_json(const nlohmann::json& j);
};

/// Reward functional configuration: gain after small-time decoherence with
/// tau = eps_ratio * alpha^2, minus lambda times the occupation shortfall.
struct RewardConfig {
    double alpha = 0.005;
    double eps_ratio = 0.0;  // zeta_l (or zeta_h when heating)
    bool heating = false;
    double n_tilde = 4.0;
    double lambda = 10.0;
};

/// Dense spin-boson Hamiltonian sigma_- a^dag + Omega(t) sigma_+ + h.c. on
/// the (2 x boson_dim)-dimensional joint space; basis |q, n> with q major.
Matrix hamiltonian_at(double t, const PulseParams& pulse, int boson_dim);

struct EvolveResult {
    Vector state;         // joint pure state (coherent run), empty otherwise
    Matrix joint;         // joint density matrix (bath run), empty otherwise
    DensityMatrix boson;  // reduced boson state, trace-normalized
    double max_norm_drift = 0.0;
};

/// Propagates |g, 0> under the pulse: fixed-step RK4 on the state vector, or
/// on the joint density matrix when a bath is present. dt = 0 selects
/// total_time / 2000.
EvolveResult evolve(const PulseParams& pulse, int boson_dim,
                    const std::optional<channels::ThermalBathConfig>& bath = std::nullopt,
                    double dt = 0.0);

double reward(const DensityMatrix& boson, const RewardConfig& cfg);

struct OptimizeOptions {
    int boson_dim = 32;
    int super_iterations = 5;
    int evals_per_superiteration = 10000;
    std::uint64_t seed = 1;
    double dt = 0.0;  // 0 -> total_time / 2000
};

struct OptimizeResult {
    PulseParams pulse;
    DensityMatrix final_state;
    std::vector<double> reward_trace;  // best-so-far after every evaluation
    double final_reward = 0.0;
    std::uint64_t seed = 0;
};

/// dCRAB: per super-iteration draw fresh frequencies uniform in
/// [0, 50 T / 2pi], Nelder-Mead over the 4 * n_components new coefficients
/// seeded from the current best pulse, elitist bookkeeping throughout.
OptimizeResult dcrab_optimize(const RewardConfig& cfg, double total_time,
                              const OptimizeOptions& options);

/// Re-runs the pulse with the bath active and scores the reduced state.
metrology::FisherResult evaluate_under_preparation_noise(
    const PulseParams& pulse, const channels::ThermalBathConfig& bath, const RewardConfig& cfg,
    int boson_dim, double dt = 0.0);

/// Flat persisted record of one optimization run.
nlohmann::json pulse_record(const OptimizeResult& result, const RewardConfig& cfg,
                            int boson_dim);

/// Nelder-Mead direct search (minimization). Exposed for tests; dCRAB is the
/// intended caller.
struct NelderMeadOptions {
    int max_evals = 10000;
    double spread = 1.0;   // initial simplex edge
    double reflection = 1.0;
    double expansion = 2.0;
    double contraction = 0.5;
    double shrink = 0.5;
};
std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                std::vector<double> start, const NelderMeadOptions& options,
                                std::mt19937_64& rng);

}  // namespace phasesense::control

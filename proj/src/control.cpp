#include "phasesense/control.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace phasesense::control {

namespace {

constexpr double kDriftLimit = 1e-6;

double clip(double v, double cap) { return std::clamp(v, -cap, cap); }

double fourier_sum(const std::vector<double>& nu, const std::vector<double>& a,
                   const std::vector<double>& b, double t) {
    double s = 0.0;
    for (std::size_t k = 0; k < nu.size(); ++k)
        s += a[k] * std::cos(nu[k] * t) + b[k] * std::sin(nu[k] * t);
    return s;
}

/// Drive samples on the RK4 stage grid; the coherent stepper only ever needs
/// Omega at t_j and t_j + h/2.
struct DriveTable {
    std::vector<Complex> at_node;  // Omega(t_j), j = 0..steps
    std::vector<Complex> at_mid;   // Omega(t_j + h/2), j = 0..steps-1
};

DriveTable tabulate_drive(const PulseParams& pulse, int steps, double h) {
    DriveTable table;
    table.at_node.resize(static_cast<std::size_t>(steps) + 1);
    table.at_mid.resize(static_cast<std::size_t>(steps));
    for (int j = 0; j <= steps; ++j)
        table.at_node[static_cast<std::size_t>(j)] = pulse.drive(j * h);
    for (int j = 0; j < steps; ++j)
        table.at_mid[static_cast<std::size_t>(j)] = pulse.drive((j + 0.5) * h);
    return table;
}

// (H psi) for H = sigma_- a^dag + sigma_+ a + Omega sigma_+ + Omega^* sigma_-
// in the |q, n> basis, q major: index(q, n) = q * dim + n.
void apply_hamiltonian(const Complex omega, const Vector& psi, int dim, Vector& out) {
    const Complex omega_c = std::conj(omega);
    for (int n = 0; n < dim; ++n) {
        Complex g = omega_c * psi(dim + n);
        Complex e = omega * psi(n);
        if (n > 0) g += std::sqrt(static_cast<double>(n)) * psi(dim + n - 1);
        if (n + 1 < dim) e += std::sqrt(n + 1.0) * psi(n + 1);
        out(n) = g;
        out(dim + n) = e;
    }
}

DensityMatrix reduce_boson(const Matrix& joint, int dim, double psd_tol) {
    Matrix rho = joint.topLeftCorner(dim, dim) + joint.bottomRightCorner(dim, dim);
    rho /= rho.trace().real();
    return DensityMatrix(std::move(rho), 1.0, psd_tol);
}

// Joint-space Lindblad right-hand side with collapse operators on the boson
// factor only; matrix-free index shifts.
Matrix joint_lindblad_rhs(const Matrix& rho, const Complex omega,
                          const channels::ThermalBathConfig& bath, int dim) {
    const int full = 2 * dim;
    const Complex i_unit(0.0, 1.0);
    Matrix out = Matrix::Zero(full, full);

    // -i [H, rho]
    Vector col(full), tmp(full);
    Matrix h_rho(full, full);
    for (int c = 0; c < full; ++c) {
        col = rho.col(c);
        apply_hamiltonian(omega, col, dim, tmp);
        h_rho.col(c) = tmp;
    }
    out = -i_unit * (h_rho - h_rho.adjoint());

    const double down = bath.gamma * (bath.nbar + 1.0);
    const double up = bath.gamma * bath.nbar;
    auto boson_index = [dim](int q, int n) { return q * dim + n; };
    for (int qm = 0; qm < 2; ++qm) {
        for (int qn = 0; qn < 2; ++qn) {
            for (int m = 0; m < dim; ++m) {
                for (int n = 0; n < dim; ++n) {
                    const int row = boson_index(qm, m);
                    const int colx = boson_index(qn, n);
                    Complex v = 0.0;
                    if (down > 0.0) {
                        if (m + 1 < dim && n + 1 < dim)
                            v += down * std::sqrt((m + 1.0) * (n + 1.0)) *
                                 rho(boson_index(qm, m + 1), boson_index(qn, n + 1));
                        v -= down * 0.5 * (m + n) * rho(row, colx);
                    }
                    if (up > 0.0) {
                        if (m > 0 && n > 0)
                            v += up * std::sqrt(static_cast<double>(m) * n) *
                                 rho(boson_index(qm, m - 1), boson_index(qn, n - 1));
                        v -= up * 0.5 * (m + n + 2.0) * rho(row, colx);
                    }
                    out(row, colx) += v;
                }
            }
        }
    }
    return out;
}

}  // namespace

double PulseParams::scaling(double t) const {
    const double arg1 = std::sin(std::numbers::pi * t / (2.0 * total_time));
    const double arg2 = std::sin(std::numbers::pi * (total_time - t) / (2.0 * total_time));
    return std::tanh(sigma * arg1) * std::tanh(sigma * arg2);
}

double PulseParams::control_re(double t) const {
    return clip(scaling(t) * fourier_sum(nu, a_re, b_re, t), amp_cap);
}

double PulseParams::control_im(double t) const {
    return clip(scaling(t) * fourier_sum(nu, a_im, b_im, t), amp_cap);
}

Complex PulseParams::drive(double t) const {
    if (nu.empty()) return 0.0;
    const double f = scaling(t);
    return {clip(f * fourier_sum(nu, a_re, b_re, t), amp_cap),
            clip(f * fourier_sum(nu, a_im, b_im, t), amp_cap)};
}

nlohmann::json PulseParams::to_json() const {
    return {{"T", total_time},   {"amp_cap", amp_cap}, {"sigma", sigma},
            {"n_components", n_components}, {"nu", nu},
            {"a", nlohmann::json::array({a_re, a_im})},
            {"b", nlohmann::json::array({b_re, b_im})}};
}

PulseParams PulseParams::from_json(const nlohmann::json& j) {
    PulseParams p;
    p.total_time = j.at("T").get<double>();
    p.amp_cap = j.value("amp_cap", 150.0);
    p.sigma = j.value("sigma", 10.0);
    p.n_components = j.value("n_components", 12);
    p.nu = j.at("nu").get<std::vector<double>>();
    const auto& a = j.at("a");
    const auto& b = j.at("b");
    p.a_re = a.at(0).get<std::vector<double>>();
    p.a_im = a.at(1).get<std::vector<double>>();
    p.b_re = b.at(0).get<std::vector<double>>();
    p.b_im = b.at(1).get<std::vector<double>>();
    if (p.a_re.size() != p.nu.size() || p.b_re.size() != p.nu.size() ||
        p.a_im.size() != p.nu.size() || p.b_im.size() != p.nu.size())
        throw std::invalid_argument("PulseParams: coefficient arrays must match nu");
    return p;
}

Matrix hamiltonian_at(double t, const PulseParams& pulse, int boson_dim) {
    const int full = 2 * boson_dim;
    const Complex omega = pulse.drive(t);
    Matrix h = Matrix::Zero(full, full);
    for (int n = 0; n < boson_dim; ++n) {
        // sigma_- a^dag : <g, n+1| H |e, n> = sqrt(n+1)
        if (n + 1 < boson_dim) {
            h(n + 1, boson_dim + n) = std::sqrt(n + 1.0);
            h(boson_dim + n, n + 1) = std::sqrt(n + 1.0);
        }
        h(boson_dim + n, n) = omega;
        h(n, boson_dim + n) = std::conj(omega);
    }
    return h;
}

EvolveResult evolve(const PulseParams& pulse, int boson_dim,
                    const std::optional<channels::ThermalBathConfig>& bath, double dt) {
    if (boson_dim < 2) throw std::invalid_argument("evolve: boson_dim must be >= 2");
    const double T = pulse.total_time;
    if (dt <= 0.0) dt = T / 2000.0;
    const int steps = std::max(1, static_cast<int>(std::ceil(T / dt - 1e-12)));
    const double h = T / steps;
    const int full = 2 * boson_dim;

    if (!bath || bath->gamma == 0.0) {
        const DriveTable drive = tabulate_drive(pulse, steps, h);
        Vector psi = Vector::Zero(full);
        psi(0) = 1.0;  // |g, 0>
        Vector k1(full), k2(full), k3(full), k4(full), stage(full);
        const Complex mi(0.0, -1.0);
        double drift = 0.0;
        for (int j = 0; j < steps; ++j) {
            const Complex w0 = drive.at_node[static_cast<std::size_t>(j)];
            const Complex wm = drive.at_mid[static_cast<std::size_t>(j)];
            const Complex w1 = drive.at_node[static_cast<std::size_t>(j) + 1];
            apply_hamiltonian(w0, psi, boson_dim, k1);
            k1 *= mi;
            stage = psi + 0.5 * h * k1;
            apply_hamiltonian(wm, stage, boson_dim, k2);
            k2 *= mi;
            stage = psi + 0.5 * h * k2;
            apply_hamiltonian(wm, stage, boson_dim, k3);
            k3 *= mi;
            stage = psi + h * k3;
            apply_hamiltonian(w1, stage, boson_dim, k4);
            k4 *= mi;
            psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            drift = std::max(drift, std::abs(psi.squaredNorm() - 1.0));
            if (drift > kDriftLimit)
                throw std::range_error("evolve: norm drift " + std::to_string(drift) +
                                       " indicates step instability");
        }
        Vector normalized = psi / psi.norm();
        Matrix rho(boson_dim, boson_dim);
        for (int m = 0; m < boson_dim; ++m)
            for (int n = 0; n < boson_dim; ++n)
                rho(m, n) = normalized(m) * std::conj(normalized(n)) +
                            normalized(boson_dim + m) * std::conj(normalized(boson_dim + n));
        return {std::move(psi), Matrix(), DensityMatrix(std::move(rho)), drift};
    }

    Matrix rho = Matrix::Zero(full, full);
    rho(0, 0) = 1.0;
    double drift = 0.0;
    for (int j = 0; j < steps; ++j) {
        const double t = j * h;
        const Complex w0 = pulse.drive(t);
        const Complex wm = pulse.drive(t + 0.5 * h);
        const Complex w1 = pulse.drive(t + h);
        const Matrix k1 = joint_lindblad_rhs(rho, w0, *bath, boson_dim);
        const Matrix k2 = joint_lindblad_rhs(rho + 0.5 * h * k1, wm, *bath, boson_dim);
        const Matrix k3 = joint_lindblad_rhs(rho + 0.5 * h * k2, wm, *bath, boson_dim);
        const Matrix k4 = joint_lindblad_rhs(rho + h * k3, w1, *bath, boson_dim);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        rho = 0.5 * (rho + rho.adjoint()).eval();
        drift = std::max(drift, std::abs(rho.trace().real() - 1.0));
        if (drift > kDriftLimit)
            throw std::range_error("evolve: trace drift " + std::to_string(drift) +
                                   " indicates step instability");
    }
    DensityMatrix boson = reduce_boson(rho, boson_dim, -1e-7);
    return {Vector(), std::move(rho), std::move(boson), drift};
}

double reward(const DensityMatrix& boson, const RewardConfig& cfg) {
    std::vector<double> diag = boson.diagonal();
    for (double& p : diag)
        if (p < 0.0) p = 0.0;
    const double mean = boson.mean_occupation();
    if (cfg.eps_ratio > 0.0) {
        const double strength = cfg.eps_ratio * cfg.alpha * cfg.alpha;
        const auto map_cfg = cfg.heating ? channels::SmallTimeConfig::heating(strength)
                                         : channels::SmallTimeConfig::loss(strength);
        diag = channels::small_time_diagonal_update(diag, map_cfg);
    }
    const double gain = metrology::fisher_information(diag, cfg.alpha).gain;
    double penalty = 0.0;
    if (mean < cfg.n_tilde) penalty = 1.0 - mean * mean / (cfg.n_tilde * cfg.n_tilde);
    return gain - cfg.lambda * penalty;
}

std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                std::vector<double> start, const NelderMeadOptions& options,
                                std::mt19937_64& rng) {
    const std::size_t n = start.size();
    if (n == 0) return start;
    int evals = 0;
    auto call = [&](const std::vector<double>& x) {
        ++evals;
        return f(x);
    };

    std::vector<std::vector<double>> simplex(n + 1, start);
    std::vector<double> value(n + 1);
    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += options.spread;
    for (std::size_t i = 0; i <= n; ++i) value[i] = call(simplex[i]);

    std::normal_distribution<double> jitter(0.0, 1.0);
    while (evals < options.max_evals) {
        // order: best, second-worst, worst
        std::size_t best = 0, worst = 0;
        for (std::size_t i = 1; i <= n; ++i) {
            if (value[i] < value[best]) best = i;
            if (value[i] > value[worst]) worst = i;
        }
        std::size_t second = worst == 0 ? 1 : 0;
        for (std::size_t i = 0; i <= n; ++i)
            if (i != worst && value[i] > value[second]) second = i;

        // degenerate simplex: restart around the best vertex
        double spread_f = 0.0, spread_x = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            spread_f = std::max(spread_f, std::abs(value[i] - value[best]));
            for (std::size_t d = 0; d < n; ++d)
                spread_x = std::max(spread_x, std::abs(simplex[i][d] - simplex[best][d]));
        }
        if (spread_f < 1e-14 * (1.0 + std::abs(value[best])) && spread_x < 1e-12) {
            for (std::size_t i = 0; i <= n && evals < options.max_evals; ++i) {
                if (i == best) continue;
                simplex[i] = simplex[best];
                for (std::size_t d = 0; d < n; ++d)
                    simplex[i][d] += options.spread * 0.5 * jitter(rng);
                value[i] = call(simplex[i]);
            }
            continue;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t d = 0; d < n; ++d) centroid[d] += simplex[i][d] / n;
        }
        auto along = [&](double coef) {
            std::vector<double> x(n);
            for (std::size_t d = 0; d < n; ++d)
                x[d] = centroid[d] + coef * (centroid[d] - simplex[worst][d]);
            return x;
        };

        const std::vector<double> reflected = along(options.reflection);
        const double fr = call(reflected);
        if (fr < value[best]) {
            const std::vector<double> expanded = along(options.expansion);
            const double fe = call(expanded);
            if (fe < fr) {
                simplex[worst] = expanded;
                value[worst] = fe;
            } else {
                simplex[worst] = reflected;
                value[worst] = fr;
            }
        } else if (fr < value[second]) {
            simplex[worst] = reflected;
            value[worst] = fr;
        } else {
            const bool outside = fr < value[worst];
            const std::vector<double> contracted =
                along(outside ? options.contraction : -options.contraction);
            const double fc = call(contracted);
            if (fc < std::min(fr, value[worst])) {
                simplex[worst] = contracted;
                value[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (std::size_t d = 0; d < n; ++d)
                        simplex[i][d] = simplex[best][d] +
                                        options.shrink * (simplex[i][d] - simplex[best][d]);
                    value[i] = call(simplex[i]);
                }
            }
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i <= n; ++i)
        if (value[i] < value[best]) best = i;
    return simplex[best];
}

OptimizeResult dcrab_optimize(const RewardConfig& cfg, double total_time,
                              const OptimizeOptions& options) {
    if (options.super_iterations < 0)
        throw std::invalid_argument("dcrab_optimize: negative budget");
    std::mt19937_64 rng(options.seed);
    const double nu_max = 50.0 * total_time / (2.0 * std::numbers::pi);
    const int np = 12;

    PulseParams pulse;
    pulse.total_time = total_time;
    pulse.n_components = np;

    OptimizeResult result{pulse, evolve(pulse, options.boson_dim, std::nullopt, options.dt).boson,
                          {}, 0.0, options.seed};
    double best = reward(result.final_state, cfg);
    result.reward_trace.push_back(best);

    std::uniform_real_distribution<double> freq(0.0, nu_max);
    for (int s = 0; s < options.super_iterations; ++s) {
        const std::size_t base = pulse.nu.size();
        for (int k = 0; k < np; ++k) pulse.nu.push_back(freq(rng));
        pulse.a_re.resize(base + np, 0.0);
        pulse.b_re.resize(base + np, 0.0);
        pulse.a_im.resize(base + np, 0.0);
        pulse.b_im.resize(base + np, 0.0);

        std::vector<double> best_segment(4 * np, 0.0);
        auto load_segment = [&](const std::vector<double>& x) {
            for (int k = 0; k < np; ++k) {
                pulse.a_re[base + k] = x[static_cast<std::size_t>(k)];
                pulse.b_re[base + k] = x[static_cast<std::size_t>(np + k)];
                pulse.a_im[base + k] = x[static_cast<std::size_t>(2 * np + k)];
                pulse.b_im[base + k] = x[static_cast<std::size_t>(3 * np + k)];
            }
        };
        auto objective = [&](const std::vector<double>& x) {
            load_segment(x);
            double r;
            try {
                r = reward(evolve(pulse, options.boson_dim, std::nullopt, options.dt).boson, cfg);
            } catch (const std::range_error&) {
                r = -1e12;  // unstable step; never the best
            }
            if (r > best) {
                best = r;
                best_segment = x;
            }
            result.reward_trace.push_back(best);
            return -r;
        };

        NelderMeadOptions nm;
        nm.max_evals = options.evals_per_superiteration;
        nm.spread = 0.1 * pulse.amp_cap;
        nelder_mead(objective, std::vector<double>(4 * static_cast<std::size_t>(np), 0.0), nm,
                    rng);
        load_segment(best_segment);  // freeze the winning segment as dressing
    }

    result.pulse = pulse;
    result.final_state = evolve(pulse, options.boson_dim, std::nullopt, options.dt).boson;
    result.final_reward = reward(result.final_state, cfg);
    return result;
}

metrology::FisherResult evaluate_under_preparation_noise(
    const PulseParams& pulse, const channels::ThermalBathConfig& bath, const RewardConfig& cfg,
    int boson_dim, double dt) {
    const EvolveResult run = evolve(pulse, boson_dim, bath, dt);
    return metrology::fisher_information(run.boson, cfg.alpha);
}

nlohmann::json pulse_record(const OptimizeResult& result, const RewardConfig& cfg,
                            int boson_dim) {
    nlohmann::json j = result.pulse.to_json();
    j["seed"] = result.seed;
    j["final_reward"] = result.final_reward;
    j["final_mean_occupation"] = result.final_state.mean_occupation();
    j["final_diagonal"] = result.final_state.diagonal();
    j["alpha"] = cfg.alpha;
    j["eps_ratio"] = cfg.eps_ratio;
    j["heating"] = cfg.heating;
    j["n_tilde"] = cfg.n_tilde;
    j["lambda"] = cfg.lambda;
    j["boson_dim"] = boson_dim;
    return j;
}

}  // namespace phasesense::control

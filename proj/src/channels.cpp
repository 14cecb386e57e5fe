#include "phasesense/channels.hpp"

#include <cmath>
#include <iostream>

namespace phasesense::channels {

namespace {

constexpr double kSeriesCutoff = 1e-14;
constexpr double kTraceConsistency = 1e-8;

// Clamps the tail negativity the linearized map produces where tau * n > 1.
// Returns the clamped mass; anything larger than the map's own magnitude is a
// logic error, not an artifact.
double clamp_linearization_artifacts(std::vector<double>& probs, double deco_scale) {
    const double per_entry = deco_scale * static_cast<double>(probs.size()) + 1e-12;
    double clamped = 0.0;
    for (double& p : probs) {
        if (p < 0.0) {
            if (p < -per_entry)
                throw std::logic_error("small_time_map: negativity beyond linearization bound: " +
                                       std::to_string(p));
            clamped -= p;
            p = 0.0;
        }
    }
    if (clamped > 10.0 * deco_scale + 1e-9)
        throw std::logic_error("small_time_map: clamped mass " + std::to_string(clamped) +
                               " beyond linearization scale");
    return clamped;
}

}  // namespace

ThermalBathConfig::ThermalBathConfig(double gamma_, double nbar_, double omega_)
    : gamma(gamma_), nbar(nbar_), omega(omega_) {
    if (gamma < 0.0) throw std::invalid_argument("ThermalBathConfig: gamma must be >= 0");
    if (nbar < 0.0) throw std::invalid_argument("ThermalBathConfig: nbar must be >= 0");
}

SmallTimeConfig::SmallTimeConfig(double tau_, SmallTimeRegime regime_, double nbar_)
    : tau(tau_), nbar(nbar_), regime(regime_) {
    if (tau < 0.0) throw std::invalid_argument("SmallTimeConfig: tau must be >= 0");
    if (nbar < 0.0) throw std::invalid_argument("SmallTimeConfig: nbar must be >= 0");
    if (regime == SmallTimeRegime::Loss && nbar != 0.0)
        throw std::invalid_argument("SmallTimeConfig: Loss regime forces nbar = 0");
    if (tau * (nbar + 1.0) > 0.1)
        std::cerr << "[phasesense] small-time config outside its regime: tau*(nbar+1) = "
                  << tau * (nbar + 1.0) << "\n";
}

NumberDistribution phase_randomized_diagonals(const DensityMatrix& rho, double alpha) {
    if (alpha < 0.0) throw std::invalid_argument("phase_randomized_diagonals: alpha < 0");
    return NumberDistribution(phase_randomized_probabilities(rho.diagonal(), alpha));
}

std::vector<double> phase_randomized_probabilities(const std::vector<double>& diag,
                                                   double alpha) {
    const int dim_in = static_cast<int>(diag.size());
    const int dim_out = working_dim(dim_in, alpha);
    const OverlapKernel kernel(alpha, dim_out);
    std::vector<double> probs(static_cast<std::size_t>(dim_out), 0.0);
    for (int k = 0; k < dim_in; ++k) {
        const double rk = std::max(diag[static_cast<std::size_t>(k)], 0.0);
        if (rk == 0.0) continue;
        for (int n = 0; n < dim_out; ++n) {
            const double c = kernel.coeff(k, n);
            probs[static_cast<std::size_t>(n)] += rk * c * c;
        }
    }
    return probs;
}

DensityMatrix phase_randomized_full(const DensityMatrix& rho, double alpha, Variant variant) {
    if (alpha < 0.0) throw std::invalid_argument("phase_randomized_full: alpha < 0");
    const int dim_in = rho.dim();
    const int dim_out = working_dim(dim_in, alpha);
    const OverlapKernel kernel(alpha, dim_out);
    const Eigen::MatrixXd& c = kernel.coeffs();
    Matrix out = Matrix::Zero(dim_out, dim_out);

    if (variant == Variant::DisplaceRotate) {
        // rho^3_{nn'} = sum_k rho_kk c_kn c_kn'
        for (int k = 0; k < dim_in; ++k) {
            const double rk = rho(k, k).real();
            if (rk == 0.0) continue;
            out.noalias() +=
                rk * (c.row(k).transpose() * c.row(k)).cast<Complex>();
        }
    } else {
        // rho^{1/2}_{nn'} = sum_k rho_{k, k-(n-n')} c_kn c_{k-(n-n'), n'}
        for (int n = 0; n < dim_out; ++n) {
            for (int np = 0; np < dim_out; ++np) {
                const int delta = n - np;
                Complex acc = 0.0;
                const int k_lo = std::max(delta, 0);
                const int k_hi = std::min(dim_in - 1, dim_in - 1 + delta);
                for (int k = k_lo; k <= k_hi; ++k) {
                    const int l = k - delta;
                    acc += rho(k, l) * c(k, n) * c(l, np);
                }
                out(n, np) = acc;
            }
        }
    }
    return DensityMatrix(std::move(out));
}

DensityMatrix small_time_map(const DensityMatrix& rho_in, const SmallTimeConfig& cfg) {
    // Heating terms push support up one level; make room for it.
    const bool has_raising = cfg.regime != SmallTimeRegime::Loss && cfg.heating_strength() > 0.0;
    const DensityMatrix rho = has_raising ? rho_in.resized(rho_in.dim() + 1) : rho_in;
    const Matrix& r = rho.elems();

    Matrix out;
    double deco_scale = 0.0;
    switch (cfg.regime) {
        case SmallTimeRegime::Loss:
            out = r - 0.5 * cfg.tau * number_anticommutator(r) +
                  cfg.tau * apply_lowering_sandwich(r);
            deco_scale = cfg.tau;
            break;
        case SmallTimeRegime::Heating: {
            const double eb = cfg.heating_strength();
            out = (1.0 - eb) * r - eb * number_anticommutator(r) +
                  eb * (apply_raising_sandwich(r) + apply_lowering_sandwich(r));
            deco_scale = eb;
            break;
        }
        case SmallTimeRegime::General: {
            const double eps = cfg.tau;
            const double nbar = cfg.nbar;
            out = (1.0 - eps * nbar) * r - eps * (nbar + 0.5) * number_anticommutator(r) +
                  eps * nbar * apply_raising_sandwich(r) +
                  eps * (nbar + 1.0) * apply_lowering_sandwich(r);
            deco_scale = eps * (nbar + 1.0);
            break;
        }
    }

    const double tr = out.trace().real();
    if (std::abs(tr - 1.0) > kTraceConsistency)
        throw std::logic_error("small_time_map: trace drift " + std::to_string(tr - 1.0) +
                               " beyond first-order consistency");

    // Clamp linearization artifacts on the diagonal (tau * n > 1 in the tail).
    std::vector<double> d(static_cast<std::size_t>(out.rows()));
    for (int n = 0; n < out.rows(); ++n) d[static_cast<std::size_t>(n)] = out(n, n).real();
    if (clamp_linearization_artifacts(d, deco_scale) > 0.0) {
        for (int n = 0; n < out.rows(); ++n) out(n, n) = d[static_cast<std::size_t>(n)];
        out /= out.trace().real();
    }

    // The first-order map sits O(deco_scale^2) away from the exact CP channel.
    const double m2 = rho.occupation_moment(2);
    const double psd_tol = -(1e-9 + 20.0 * deco_scale * deco_scale * (1.0 + m2));
    return DensityMatrix(std::move(out), 1.0, psd_tol);
}

std::vector<double> small_time_diagonal_update(const std::vector<double>& diag,
                                               const SmallTimeConfig& cfg) {
    const std::size_t dim_in = diag.size();
    const bool has_raising = cfg.regime != SmallTimeRegime::Loss && cfg.heating_strength() > 0.0;
    const std::size_t dim = dim_in + (has_raising ? 1 : 0);
    auto at = [&](std::size_t n) { return n < dim_in ? diag[n] : 0.0; };
    std::vector<double> out(dim, 0.0);
    double deco_scale = 0.0;
    switch (cfg.regime) {
        case SmallTimeRegime::Loss:
            for (std::size_t n = 0; n < dim; ++n)
                out[n] = at(n) + cfg.tau * (-static_cast<double>(n) * at(n) +
                                            static_cast<double>(n + 1) * at(n + 1));
            deco_scale = cfg.tau;
            break;
        case SmallTimeRegime::Heating: {
            const double eb = cfg.heating_strength();
            for (std::size_t n = 0; n < dim; ++n)
                out[n] = at(n) + eb * (static_cast<double>(n) * (n > 0 ? at(n - 1) : 0.0) -
                                       static_cast<double>(2 * n + 1) * at(n) +
                                       static_cast<double>(n + 1) * at(n + 1));
            deco_scale = eb;
            break;
        }
        case SmallTimeRegime::General: {
            const double eps = cfg.tau;
            const double nb = cfg.nbar;
            for (std::size_t n = 0; n < dim; ++n)
                out[n] = at(n) * (1.0 - eps * nb - 2.0 * eps * (nb + 0.5) * static_cast<double>(n)) +
                         eps * nb * static_cast<double>(n) * (n > 0 ? at(n - 1) : 0.0) +
                         eps * (nb + 1.0) * static_cast<double>(n + 1) * at(n + 1);
            deco_scale = eps * (nb + 1.0);
            break;
        }
    }
    if (clamp_linearization_artifacts(out, deco_scale) > 0.0) {
        double sum = 0.0;
        for (double p : out) sum += p;
        if (sum > 0.0)
            for (double& p : out) p /= sum;
    }
    return out;
}

DensityMatrix exact_lindblad(const DensityMatrix& rho, double t, const ThermalBathConfig& bath,
                             double tail_budget) {
    if (t < 0.0) throw std::invalid_argument("exact_lindblad: negative time");
    const double gt = bath.gamma * t;
    if (gt == 0.0 && bath.omega == 0.0) return rho;

    // Heating populates higher levels; reserve room up to the Gibbs tail.
    int extra = 0;
    if (bath.nbar > 0.0 && gt > 0.0) {
        const double ratio = bath.nbar / (bath.nbar + 1.0);
        extra = static_cast<int>(std::ceil(std::log(tail_budget) / std::log(ratio))) + 10;
    }

    for (int attempt = 0; attempt < 3; ++attempt) {
        const int dim = rho.dim() + extra;
        Matrix work = Matrix::Zero(dim, dim);
        work.topLeftCorner(rho.dim(), rho.dim()) = rho.elems();

        const double sh = std::sinh(gt / 2.0);
        const double f_fun = std::cosh(gt / 2.0) + (2.0 * bath.nbar + 1.0) * sh;
        const double e_fun = 2.0 * (bath.nbar + 1.0) * sh / f_fun;
        const double g_fun = 2.0 * bath.nbar * sh / f_fun;

        // inner: sum_k E^k / k!  a^k rho a^dag^k
        Matrix inner = work;
        Matrix term = work;
        for (int k = 1; k <= 4 * dim; ++k) {
            term = (e_fun / k) * apply_lowering_sandwich(term);
            inner += term;
            if (term.cwiseAbs().maxCoeff() < kSeriesCutoff) break;
        }
        // conjugate by exp(-(i omega t + ln F) N)
        const double logf = std::log(f_fun);
        for (int m = 0; m < dim; ++m)
            for (int n = 0; n < dim; ++n)
                inner(m, n) *= std::exp(Complex(-logf * (m + n), -bath.omega * t * (m - n)));
        // outer: sum_j G^j / j!  a^dag^j (...) a^j
        Matrix out = inner;
        term = inner;
        for (int j = 1; j <= 4 * dim; ++j) {
            term = (g_fun / j) * apply_raising_sandwich(term);
            out += term;
            if (term.cwiseAbs().maxCoeff() < kSeriesCutoff) break;
        }
        out *= std::exp(gt / 2.0) / f_fun;

        const double tr = out.trace().real();
        if (std::abs(tr - 1.0) < 1e-9) return DensityMatrix(std::move(out));
        extra = extra * 2 + dim / 2 + 8;
    }
    throw std::range_error("exact_lindblad: truncation dimension insufficient");
}

namespace {

Matrix lindblad_rhs(const Matrix& rho, const Matrix* h, const ThermalBathConfig& bath) {
    const Complex i_unit(0.0, 1.0);
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    if (h) out.noalias() = -i_unit * ((*h) * rho - rho * (*h));
    if (bath.gamma > 0.0) {
        const double down = bath.gamma * (bath.nbar + 1.0);
        const double up = bath.gamma * bath.nbar;
        out += down * (apply_lowering_sandwich(rho) - 0.5 * number_anticommutator(rho));
        if (up > 0.0)
            out += up * (apply_raising_sandwich(rho) - 0.5 * number_anticommutator(rho) - rho);
    }
    return out;
}

}  // namespace

DensityMatrix integrate_master(const DensityMatrix& rho0, const Generator& h_of_t,
                               const ThermalBathConfig& bath, double t_final, double dt) {
    if (dt <= 0.0) throw std::invalid_argument("integrate_master: dt must be > 0");
    if (t_final < 0.0) throw std::invalid_argument("integrate_master: negative horizon");

    Matrix rho = rho0.elems();
    double t = 0.0;
    Matrix h0, h1, h2;
    while (t < t_final - 1e-15) {
        const double step = std::min(dt, t_final - t);
        const Matrix* hp0 = nullptr;
        const Matrix* hp1 = nullptr;
        const Matrix* hp2 = nullptr;
        if (h_of_t) {
            h0 = h_of_t(t);
            h1 = h_of_t(t + 0.5 * step);
            h2 = h_of_t(t + step);
            hp0 = &h0;
            hp1 = &h1;
            hp2 = &h2;
        }
        const Matrix k1 = lindblad_rhs(rho, hp0, bath);
        const Matrix k2 = lindblad_rhs(rho + 0.5 * step * k1, hp1, bath);
        const Matrix k3 = lindblad_rhs(rho + 0.5 * step * k2, hp1, bath);
        const Matrix k4 = lindblad_rhs(rho + step * k3, hp2, bath);
        rho += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        rho = 0.5 * (rho + rho.adjoint()).eval();
        t += step;
        const double tr = rho.trace().real();
        if (std::abs(tr - 1.0) > kTraceConsistency)
            throw std::range_error("integrate_master: trace drift " + std::to_string(tr - 1.0) +
                                   " indicates step-size instability");
    }
    const double tr = rho.trace().real();
    return DensityMatrix(std::move(rho), tr, -1e-8);
}

}  // namespace phasesense::channels

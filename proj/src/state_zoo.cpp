#include "phasesense/state_zoo.hpp"

#include <boost/math/special_functions/airy.hpp>
#include <cmath>
#include <numbers>

namespace phasesense::zoo {

namespace {

constexpr double kAiryFirstZero = 2.3381074104597670;  // |z_1| of Ai

double log_factorial(int n) { return std::lgamma(n + 1.0); }

Eigen::VectorXd normalized(Eigen::VectorXd v) {
    const double n = v.norm();
    if (!(n > 0.0)) throw std::invalid_argument("state_zoo: state has no weight");
    return v / n;
}

// Exponentiate log-magnitudes after shifting out the common maximum.
Eigen::VectorXd from_log_weights(const std::vector<double>& log_mag,
                                 const std::vector<double>& sign) {
    double peak = -std::numeric_limits<double>::infinity();
    for (double lm : log_mag) peak = std::max(peak, lm);
    if (!std::isfinite(peak)) throw std::invalid_argument("state_zoo: state has no weight");
    Eigen::VectorXd v(static_cast<Eigen::Index>(log_mag.size()));
    for (std::size_t n = 0; n < log_mag.size(); ++n)
        v(static_cast<Eigen::Index>(n)) =
            std::isfinite(log_mag[n]) ? sign[n] * std::exp(log_mag[n] - peak) : 0.0;
    return normalized(std::move(v));
}

Eigen::VectorXd gaussian_amplitudes(double mean, int dim) {
    const double neg_inf = -std::numeric_limits<double>::infinity();
    std::vector<double> lm(static_cast<std::size_t>(dim), neg_inf);
    std::vector<double> sg(static_cast<std::size_t>(dim), 1.0);
    if (mean == 0.0) {
        lm[0] = 0.0;
        return from_log_weights(lm, sg);
    }
    const double log_tanh2 = std::log(mean / (mean + 1.0));  // tanh^2 r
    for (int m = 0; 2 * m < dim; ++m) {
        lm[static_cast<std::size_t>(2 * m)] = 0.5 * log_factorial(2 * m) -
                                              m * std::numbers::ln2 - log_factorial(m) +
                                              0.5 * m * log_tanh2;
        sg[static_cast<std::size_t>(2 * m)] = (m % 2 == 0) ? 1.0 : -1.0;
    }
    return from_log_weights(lm, sg);
}

Eigen::VectorXd moon_amplitudes(double delta, double amp, int parity_sign, int dim) {
    if (amp <= 0.0) throw std::invalid_argument("state_zoo: moon/cat amplitude must be > 0");
    const double neg_inf = -std::numeric_limits<double>::infinity();
    std::vector<double> lm(static_cast<std::size_t>(dim), neg_inf);
    std::vector<double> sg(static_cast<std::size_t>(dim), 1.0);
    const double n_cat = amp * amp * std::tanh(amp * amp);
    const double log_amp = std::log(amp);
    const int wanted = parity_sign > 0 ? 0 : 1;
    for (int n = wanted; n < dim; n += 2) {
        double envelope = 0.0;
        if (delta > 0.0) envelope = -delta * (n - n_cat) * (n - n_cat) / (4.0 * n_cat);
        lm[static_cast<std::size_t>(n)] = envelope + n * log_amp - 0.5 * log_factorial(n);
    }
    return from_log_weights(lm, sg);
}

Eigen::VectorXd compass_amplitudes(double amp, int dim) {
    if (amp <= 0.0) throw std::invalid_argument("state_zoo: compass amplitude must be > 0");
    const double neg_inf = -std::numeric_limits<double>::infinity();
    std::vector<double> lm(static_cast<std::size_t>(dim), neg_inf);
    std::vector<double> sg(static_cast<std::size_t>(dim), 1.0);
    const double log_amp = std::log(amp);
    for (int n = 0; n < dim; n += 4)
        lm[static_cast<std::size_t>(n)] = n * log_amp - 0.5 * log_factorial(n);
    return from_log_weights(lm, sg);
}

Eigen::VectorXd number_phase_amplitudes(double mu, int spacing, int offset, int dim) {
    if (mu <= 0.0) throw std::invalid_argument("state_zoo: number-phase mu must be > 0");
    if (spacing < 1 || offset < 0 || offset >= spacing)
        throw std::invalid_argument("state_zoo: number-phase needs N >= 1 and 0 <= q < N");
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    const double step = std::cbrt(mu / (spacing * static_cast<double>(spacing))) * spacing;
    for (int k = 0;; ++k) {
        const int n = k * spacing + offset;
        if (n >= dim) break;
        v(n) = boost::math::airy_ai(step * (k + 1) - kAiryFirstZero);
    }
    return normalized(std::move(v));
}

Eigen::VectorXd gkp_amplitudes(double delta, int dim) {
    if (!(delta > 0.1 && delta <= 2.0))
        throw std::invalid_argument("state_zoo: gkp delta must lie in (0.1, 2]");
    // Comb peaks |k| <= 8 reach x = 8 sqrt(2 pi) ~ 20; the window covers them
    // with room for the peak width.
    constexpr int kComb = 8;
    constexpr double kWindow = 23.0;
    constexpr int kPoints = 7681;  // odd; x = 0 falls on the grid
    const int half = kPoints / 2;
    const double h = 2.0 * kWindow / (kPoints - 1);
    const double root_2pi = std::sqrt(2.0 * std::numbers::pi);

    auto psi = [&](double x) {
        double s = 0.0;
        for (int k = -kComb; k <= kComb; ++k) {
            const double dx = x - root_2pi * k;
            s += std::exp(-k * k * std::numbers::pi * delta * delta -
                          dx * dx / (2.0 * delta * delta));
        }
        return s;  // overall normalization handled at the end
    };

    // Hermite-function recurrence per grid point; the symmetric pairing makes
    // odd coefficients exact zeros.
    Eigen::VectorXd coeff = Eigen::VectorXd::Zero(dim);
    double grid_norm = 0.0;
    const double quarter_pi = std::pow(std::numbers::pi, -0.25);
    for (int j = half; j < kPoints; ++j) {
        const double x = (j - half) * h;
        const double w = (j == kPoints - 1) ? 0.5 * h : h;
        const double p = psi(x);
        const double pair = (j == half) ? 1.0 : 2.0;  // psi(-x) phi_n(-x) mirror
        grid_norm += pair * w * p * p;
        if (p == 0.0) continue;
        double phi_prev = 0.0;
        double phi = quarter_pi * std::exp(-0.5 * x * x);
        for (int n = 0; n < dim; ++n) {
            if (n % 2 == 0) coeff(n) += pair * w * p * phi;
            const double phi_next = std::sqrt(2.0 / (n + 1.0)) * x * phi -
                                    std::sqrt(n / (n + 1.0)) * phi_prev;
            phi_prev = phi;
            phi = phi_next;
        }
    }
    const double captured = coeff.squaredNorm() / grid_norm;
    if (captured < 1.0 - 1e-8)
        throw std::range_error("state_zoo: gkp quadrature not converged; basis captures " +
                               std::to_string(captured));
    return normalized(std::move(coeff));
}

int check_dim_for(const StateSpec& spec, int dim) {
    // Probe above the requested truncation to measure the cut tail.
    int ext = dim + std::max(16, dim / 2);
    if (spec.family == Family::Fock) ext = std::max(ext, spec.fock_n + 1);
    if (spec.family == Family::FockSuperposition) ext = std::max(ext, spec.fock_n2 + 1);
    return ext;
}

}  // namespace

std::string family_name(Family family) {
    switch (family) {
        case Family::Fock: return "fock";
        case Family::GaussianSqueezed: return "gaussian";
        case Family::Cat: return "cat";
        case Family::Moon: return "moon";
        case Family::GKP: return "gkp";
        case Family::Compass: return "compass";
        case Family::NumberPhase: return "number-phase";
        case Family::FockSuperposition: return "fock-superposition";
    }
    throw std::logic_error("family_name: unknown family");
}

Family family_from_name(const std::string& name) {
    if (name == "fock") return Family::Fock;
    if (name == "gaussian" || name == "squeezed") return Family::GaussianSqueezed;
    if (name == "cat") return Family::Cat;
    if (name == "moon") return Family::Moon;
    if (name == "gkp") return Family::GKP;
    if (name == "compass") return Family::Compass;
    if (name == "number-phase" || name == "np") return Family::NumberPhase;
    if (name == "fock-superposition" || name == "focksup") return Family::FockSuperposition;
    throw std::invalid_argument("unknown state family: " + name);
}

void StateSpec::validate() const {
    switch (family) {
        case Family::Fock:
            if (fock_n < 0) throw std::invalid_argument("StateSpec: fock_n < 0");
            break;
        case Family::FockSuperposition:
            if (fock_n < 0 || fock_n2 <= fock_n)
                throw std::invalid_argument("StateSpec: superposition needs 0 <= n < n2");
            break;
        case Family::GaussianSqueezed:
            if (mean_target < 0.0) throw std::invalid_argument("StateSpec: negative <N>");
            break;
        case Family::Cat:
            if (amplitude <= 0.0) throw std::invalid_argument("StateSpec: cat amplitude <= 0");
            break;
        case Family::Moon:
            if (amplitude <= 0.0 || delta < 0.0)
                throw std::invalid_argument("StateSpec: moon needs amplitude > 0, delta >= 0");
            break;
        case Family::GKP:
            if (!(delta > 0.1 && delta <= 2.0))
                throw std::invalid_argument("StateSpec: gkp delta outside (0.1, 2]");
            break;
        case Family::Compass:
            if (amplitude <= 0.0) throw std::invalid_argument("StateSpec: compass amplitude <= 0");
            break;
        case Family::NumberPhase:
            if (mu <= 0.0 || spacing < 1 || offset < 0 || offset >= spacing)
                throw std::invalid_argument("StateSpec: number-phase parameters out of range");
            break;
    }
}

Eigen::VectorXd amplitudes(const StateSpec& spec, int dim) {
    spec.validate();
    switch (spec.family) {
        case Family::Fock: {
            Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
            if (spec.fock_n < dim) v(spec.fock_n) = 1.0;
            return v;
        }
        case Family::FockSuperposition: {
            Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
            if (spec.fock_n < dim) v(spec.fock_n) = 1.0;
            if (spec.fock_n2 < dim) v(spec.fock_n2) = 1.0;
            return normalized(std::move(v));
        }
        case Family::GaussianSqueezed: return gaussian_amplitudes(spec.mean_target, dim);
        case Family::Cat: return moon_amplitudes(0.0, spec.amplitude, spec.parity_sign, dim);
        case Family::Moon:
            return moon_amplitudes(spec.delta, spec.amplitude, spec.parity_sign, dim);
        case Family::GKP: return gkp_amplitudes(spec.delta, dim);
        case Family::Compass: return compass_amplitudes(spec.amplitude, dim);
        case Family::NumberPhase:
            return number_phase_amplitudes(spec.mu, spec.spacing, spec.offset, dim);
    }
    throw std::logic_error("amplitudes: unknown family");
}

DensityMatrix build(const StateSpec& spec, const TruncationPolicy& trunc) {
    const int ext = check_dim_for(spec, trunc.dim);
    const Eigen::VectorXd probe = amplitudes(spec, ext);
    double cut = 0.0;
    for (int n = trunc.dim; n < ext; ++n) cut += probe(n) * probe(n);
    if (cut > trunc.tail_budget)
        throw std::range_error("state_zoo: truncation dim " + std::to_string(trunc.dim) +
                               " insufficient; cut tail " + std::to_string(cut));
    Eigen::VectorXd head = probe.head(trunc.dim);
    head /= head.norm();
    return DensityMatrix::from_pure(head.cast<Complex>());
}

NumberDistribution gkp_number_distribution(double delta, const TruncationPolicy& trunc) {
    const Eigen::VectorXd amp = gkp_amplitudes(delta, trunc.dim);
    std::vector<double> p(static_cast<std::size_t>(trunc.dim));
    for (int n = 0; n < trunc.dim; ++n) p[static_cast<std::size_t>(n)] = amp(n) * amp(n);
    return NumberDistribution(std::move(p), trunc.tail_budget);
}

double gkp_mean_occupation_formula(double delta) {
    const double q = std::exp(-2.0 * std::numbers::pi * delta * delta);
    double theta3 = 1.0;
    double comb = 0.0;
    for (int k = 1; k <= 64; ++k) {
        const double qk = std::pow(q, static_cast<double>(k) * k);
        theta3 += 2.0 * qk;
        comb += static_cast<double>(k) * k * qk;
        if (qk < 1e-18) break;
    }
    const double s = std::sinh(std::log(delta));
    return s * s + 2.0 * std::numbers::pi * comb / theta3;
}

double mean_occupation_of(const StateSpec& spec) {
    int dim = 64;
    if (spec.family == Family::Fock) return spec.fock_n;
    if (spec.family == Family::FockSuperposition)
        return 0.5 * (spec.fock_n + spec.fock_n2);
    for (int attempt = 0; attempt < 8; ++attempt) {
        const Eigen::VectorXd v = amplitudes(spec, dim);
        double tail = 0.0;
        for (int n = dim - 8; n < dim; ++n) tail += v(n) * v(n);
        if (tail < 1e-12) {
            double mean = 0.0;
            for (int n = 0; n < dim; ++n) mean += n * v(n) * v(n);
            return mean;
        }
        dim = dim * 3 / 2;
    }
    throw std::range_error("mean_occupation_of: support does not fit any probed dimension");
}

StateSpec solve_for_occupation(const StateSpec& base, double target, double tol) {
    if (tol <= 0.0) throw std::invalid_argument("solve_for_occupation: tol must be > 0");
    StateSpec spec = base;

    switch (base.family) {
        case Family::Fock: {
            const long n = std::lround(target);
            if (n < 0 || std::abs(target - n) > tol)
                throw std::invalid_argument("solve_for_occupation: Fock target not an integer");
            spec.fock_n = static_cast<int>(n);
            return spec;
        }
        case Family::FockSuperposition: {
            if (std::abs(mean_occupation_of(spec) - target) <= tol) return spec;
            const long n1 = std::lround(target) - 2;
            if (n1 < 0) throw std::invalid_argument("solve_for_occupation: target too small");
            spec.fock_n = static_cast<int>(n1);
            spec.fock_n2 = spec.fock_n + 4;
            if (std::abs(mean_occupation_of(spec) - target) > tol)
                throw std::invalid_argument(
                    "solve_for_occupation: superposition cannot match target");
            return spec;
        }
        case Family::GaussianSqueezed:
            spec.mean_target = target;
            return spec;
        default: break;
    }

    // Remaining families: bisection on the monotone size parameter.
    auto param = [&spec](double v) -> StateSpec& {
        switch (spec.family) {
            case Family::Cat:
            case Family::Moon:
            case Family::Compass: spec.amplitude = v; break;
            case Family::NumberPhase: spec.mu = v; break;
            case Family::GKP: spec.delta = v; break;
            default: throw std::logic_error("solve_for_occupation: unexpected family");
        }
        return spec;
    };
    const bool increasing =
        spec.family == Family::Cat || spec.family == Family::Moon ||
        spec.family == Family::Compass;
    auto mean_at = [&](double v) { return mean_occupation_of(param(v)); };

    double lo, hi;
    if (spec.family == Family::GKP) {
        lo = 0.1 + 1e-6;
        hi = 2.0;
        if (mean_at(lo) < target || mean_at(hi) > target)
            throw std::invalid_argument("solve_for_occupation: target outside gkp bracket");
    } else if (increasing) {
        lo = 1e-3;
        hi = 1.0;
        if (mean_at(lo) > target)
            throw std::invalid_argument("solve_for_occupation: target below bracket");
        int guard = 0;
        while (mean_at(hi) < target) {
            hi *= 2.0;
            if (++guard > 40)
                throw std::invalid_argument("solve_for_occupation: non-bracketing bounds");
        }
    } else {  // NumberPhase: <N> decreases with mu
        lo = 1.0;
        hi = 1.0;
        int guard = 0;
        while (mean_at(lo) < target) {
            lo /= 2.0;
            if (++guard > 60)
                throw std::invalid_argument("solve_for_occupation: non-bracketing bounds");
        }
        guard = 0;
        while (mean_at(hi) > target) {
            hi *= 2.0;
            if (++guard > 60)
                throw std::invalid_argument("solve_for_occupation: non-bracketing bounds");
        }
    }

    const bool mean_grows = increasing;  // w.r.t. the bisected parameter
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double m = mean_at(mid);
        if (std::abs(m - target) <= tol) {
            param(mid);
            return spec;
        }
        const bool below = m < target;
        if (below == mean_grows)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-15 * (1.0 + std::abs(hi)))
            throw std::range_error("solve_for_occupation: bisection stalled before tolerance");
    }
    throw std::range_error("solve_for_occupation: bisection did not converge");
}

nlohmann::json StateSpec::to_json() const {
    nlohmann::json j;
    j["family"] = family_name(family);
    switch (family) {
        case Family::Fock: j["n"] = fock_n; break;
        case Family::FockSuperposition:
            j["n"] = fock_n;
            j["n2"] = fock_n2;
            break;
        case Family::GaussianSqueezed: j["mean"] = mean_target; break;
        case Family::Cat:
            j["amplitude"] = amplitude;
            j["parity"] = parity_sign;
            break;
        case Family::Moon:
            j["amplitude"] = amplitude;
            j["delta"] = delta;
            j["parity"] = parity_sign;
            break;
        case Family::GKP: j["delta"] = delta; break;
        case Family::Compass: j["amplitude"] = amplitude; break;
        case Family::NumberPhase:
            j["mu"] = mu;
            j["spacing"] = spacing;
            j["offset"] = offset;
            break;
    }
    return j;
}

StateSpec StateSpec::from_json(const nlohmann::json& j) {
    StateSpec spec;
    spec.family = family_from_name(j.at("family").get<std::string>());
    spec.fock_n = j.value("n", 0);
    spec.fock_n2 = j.value("n2", 0);
    spec.mean_target = j.value("mean", 0.0);
    spec.amplitude = j.value("amplitude", 0.0);
    spec.delta = j.value("delta", 0.0);
    spec.mu = j.value("mu", 0.0);
    spec.spacing = j.value("spacing", 2);
    spec.offset = j.value("offset", 0);
    spec.parity_sign = j.value("parity", 1);
    return spec;
}

}  // namespace phasesense::zoo

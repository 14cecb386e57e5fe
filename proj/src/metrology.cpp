#include "phasesense/metrology.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace phasesense::metrology {

namespace {

constexpr double kProbabilityFloor = 1e-14;
constexpr double kNumeratorFloor = 1e-20;
constexpr double kSupportThreshold = 1e-14;
constexpr double kAdvantageMargin = 1e-9;

std::vector<double> log_factorials(int max_n) {
    std::vector<double> lf(static_cast<std::size_t>(max_n) + 1, 0.0);
    for (int i = 1; i <= max_n; ++i)
        lf[static_cast<std::size_t>(i)] = lf[static_cast<std::size_t>(i - 1)] + std::log(i);
    return lf;
}

std::vector<double> clean_diagonal(const DensityMatrix& rho) {
    std::vector<double> d = rho.diagonal();
    for (double& p : d)
        if (p < 0.0) p = 0.0;
    return d;
}

}  // namespace

std::vector<double> prob_derivative(const std::vector<double>& diag, double alpha) {
    if (alpha <= 0.0)
        throw std::invalid_argument("prob_derivative: defined only for alpha > 0");
    const int dim_in = static_cast<int>(diag.size());
    const int dim_out = working_dim(dim_in, alpha);
    const double x = alpha * alpha;
    const double log_alpha = std::log(alpha);
    const std::vector<double> lf = log_factorials(dim_out);
    std::vector<double> deriv(static_cast<std::size_t>(dim_out), 0.0);

    // Contribution of the pair (n, k) depends only on mu = min(n, k) and
    // d = |n - k|:
    //   T = 2 e^{-x} (mu! / (mu+d)!) alpha^{2d-1} L_mu^d
    //         [ -2x L_{mu-1}^{d+1} + (d - x) L_mu^d ].
    // Two Laguerre recurrences run along each diagonal under a shared
    // power-of-two rescale.
    for (int d = 0; d < dim_out; ++d) {
        double a_prev = 0.0, a_cur = 1.0;           // L_mu^d,     at mu
        double b_prev = 0.0, b_cur = 0.0;           // L_{mu-1}^{d+1}
        long scale = 0;
        for (int mu = 0; mu + d < dim_out; ++mu) {
            if (mu > 0) {
                const int n = mu - 1;
                const double a_next =
                    ((2.0 * n + d + 1.0 - x) * a_cur - (n + d) * a_prev) / (n + 1.0);
                a_prev = a_cur;
                a_cur = a_next;
                double b_next;
                if (mu == 1)
                    b_next = 1.0;  // L_0^{d+1}; no rescale can have happened yet
                else {
                    const int m = mu - 2;
                    b_next = ((2.0 * m + d + 2.0 - x) * b_cur - (m + d + 1) * b_prev) / (m + 1.0);
                }
                b_prev = b_cur;
                b_cur = b_next;
                const double mx = std::max(std::max(std::abs(a_cur), std::abs(a_prev)),
                                           std::max(std::abs(b_cur), std::abs(b_prev)));
                if (mx > 1e250) {
                    a_cur = std::ldexp(a_cur, -1024);
                    a_prev = std::ldexp(a_prev, -1024);
                    b_cur = std::ldexp(b_cur, -1024);
                    b_prev = std::ldexp(b_prev, -1024);
                    scale += 1024;
                }
            }
            const double bracket = -2.0 * x * b_cur + (d - x) * a_cur;
            double value = 0.0;
            if (a_cur != 0.0 && bracket != 0.0) {
                const double log_pref = -x + lf[static_cast<std::size_t>(mu)] -
                                        lf[static_cast<std::size_t>(mu + d)] +
                                        (2.0 * d - 1.0) * log_alpha;
                const double lv = log_pref + std::log(std::abs(a_cur)) +
                                  std::log(std::abs(bracket)) +
                                  2.0 * static_cast<double>(scale) * std::numbers::ln2;
                value = 2.0 * std::exp(lv);
                if ((a_cur < 0.0) != (bracket < 0.0)) value = -value;
            }
            if (value != 0.0) {
                const int lo = mu, hi = mu + d;
                if (lo < dim_in && diag[static_cast<std::size_t>(lo)] > 0.0)
                    deriv[static_cast<std::size_t>(hi)] +=
                        diag[static_cast<std::size_t>(lo)] * value;
                if (d > 0 && hi < dim_in && diag[static_cast<std::size_t>(hi)] > 0.0)
                    deriv[static_cast<std::size_t>(lo)] +=
                        diag[static_cast<std::size_t>(hi)] * value;
            }
        }
    }
    return deriv;
}

std::vector<double> prob_derivative(const DensityMatrix& rho, double alpha) {
    return prob_derivative(clean_diagonal(rho), alpha);
}

FisherResult fisher_information(const std::vector<double>& diag, double alpha) {
    if (alpha <= 0.0)
        throw std::invalid_argument("fisher_information: alpha = 0 is excluded; probe a small "
                                    "alpha instead");
    std::vector<double> clean = diag;
    for (double& p : clean)
        if (p < 0.0) p = 0.0;
    const std::vector<double> probs = channels::phase_randomized_probabilities(clean, alpha);
    const std::vector<double> deriv = prob_derivative(clean, alpha);

    FisherResult result;
    result.alpha = alpha;
    for (std::size_t n = 0; n < probs.size(); ++n) {
        const double p = probs[n];
        const double num = deriv[n] * deriv[n];
        if (p < kProbabilityFloor) {
            if (num < kNumeratorFloor)
                ++result.dropped_terms;
            else
                ++result.divergent_terms;
            continue;
        }
        result.fisher += num / p;
    }
    result.gain = result.fisher / 4.0;
    return result;
}

FisherResult fisher_information(const DensityMatrix& rho, double alpha) {
    return fisher_information(clean_diagonal(rho), alpha);
}

double occupation_bound(const DensityMatrix& rho) { return 1.0 + 2.0 * rho.mean_occupation(); }

SmallAlphaExpansion small_alpha_fisher(const DensityMatrix& rho) {
    const std::vector<double> d = clean_diagonal(rho);
    const auto at = [&](std::size_t n) { return n < d.size() ? d[n] : 0.0; };
    SmallAlphaExpansion out;
    const double first_num = at(0) - at(1);
    if (at(0) < kProbabilityFloor) {
        if (first_num * first_num >= kNumeratorFloor) out.divergent = true;
    } else {
        out.coefficient += first_num * first_num / at(0);
    }
    for (std::size_t n = 1; n < d.size(); ++n) {
        const double num = static_cast<double>(n) * at(n - 1) -
                           static_cast<double>(2 * n + 1) * at(n) +
                           static_cast<double>(n + 1) * at(n + 1);
        if (at(n) < kProbabilityFloor) {
            if (num * num >= kNumeratorFloor) out.divergent = true;
            continue;
        }
        out.coefficient += num * num / at(n);
    }
    return out;
}

int detect_spacing(const std::vector<double>& diag, int* offset) {
    std::vector<int> support;
    for (std::size_t n = 0; n < diag.size(); ++n)
        if (diag[n] > kSupportThreshold) support.push_back(static_cast<int>(n));
    if (support.empty()) throw std::invalid_argument("detect_spacing: empty support");
    if (offset) *offset = support.front();
    if (support.size() == 1) return static_cast<int>(diag.size());
    int g = 0;
    for (std::size_t i = 1; i < support.size(); ++i)
        g = std::gcd(g, support[i] - support.front());
    return g;
}

ExpansionReport expansion_spacing(const DensityMatrix& rho, double alpha) {
    ExpansionReport report;
    report.spacing = detect_spacing(clean_diagonal(rho), &report.offset);
    const double m1 = rho.mean_occupation();
    report.leading = 1.0 + 2.0 * m1;
    if (report.spacing == rho.dim()) {
        report.correction = 0.0;
        report.residual_order = 0;
    } else if (report.spacing == 1) {
        report.correction = 0.0;
        report.residual_order = 2;
    } else if (report.spacing == 2) {
        const double m2 = rho.occupation_moment(2);
        report.correction = -2.0 * alpha * alpha * (1.0 + m1 + m2);
        report.residual_order = 4;
    } else {
        report.correction = 0.0;
        report.residual_order = 2 * (report.spacing / 2);
    }
    return report;
}

double perturbative_gain(const DensityMatrix& rho, double alpha, double tau, double nbar) {
    if (alpha <= 0.0) throw std::invalid_argument("perturbative_gain: alpha must be > 0");
    const int spacing = detect_spacing(clean_diagonal(rho), nullptr);
    if (spacing < 2)
        throw std::invalid_argument("perturbative_gain: requires spacing >= 2, found " +
                                    std::to_string(spacing));
    const double m1 = rho.mean_occupation();
    const double eta = nbar == 0.0 ? 2.0 * m1 * tau : 2.0 * (2.0 * m1 + 1.0) * tau * nbar;
    return 1.0 + 2.0 * m1 - eta / (2.0 * alpha * alpha);
}

double perturbative_gain_fixed_eps(const DensityMatrix& rho, double alpha, double eps) {
    if (alpha <= 0.0 || eps <= 0.0)
        throw std::invalid_argument("perturbative_gain_fixed_eps: alpha and eps must be > 0");
    const int spacing = detect_spacing(clean_diagonal(rho), nullptr);
    if (spacing < 4)
        throw std::invalid_argument("perturbative_gain_fixed_eps: requires spacing >= 4, found " +
                                    std::to_string(spacing));
    const double m1 = rho.mean_occupation();
    return 1.0 + m1 + m1 * alpha * alpha / eps;
}

std::vector<AlphaInterval> dynamical_range(
    const DensityMatrix& rho, const std::optional<channels::SmallTimeConfig>& decoherence,
    const std::vector<double>& alpha_grid) {
    if (alpha_grid.empty()) throw std::invalid_argument("dynamical_range: empty grid");
    for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
        if (alpha_grid[i] <= 0.0 || (i > 0 && alpha_grid[i] <= alpha_grid[i - 1]))
            throw std::invalid_argument("dynamical_range: grid must be positive and increasing");
    }

    std::vector<double> diag = clean_diagonal(rho);
    if (decoherence) diag = channels::small_time_diagonal_update(diag, *decoherence);

    const auto advantage = [&](double a) {
        return fisher_information(diag, a).gain > 1.0 + kAdvantageMargin;
    };
    const auto bisect_edge = [&](double lo, double hi, bool lo_adv) {
        while (hi - lo > 1e-4) {
            const double mid = 0.5 * (lo + hi);
            if (advantage(mid) == lo_adv)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    };

    std::vector<char> adv(alpha_grid.size());
    for (std::size_t i = 0; i < alpha_grid.size(); ++i) adv[i] = advantage(alpha_grid[i]);

    std::vector<AlphaInterval> intervals;
    std::optional<double> open;
    for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
        if (adv[i] && !open) {
            open = i == 0 ? alpha_grid[0]
                          : bisect_edge(alpha_grid[i - 1], alpha_grid[i], /*lo_adv=*/false);
        } else if (!adv[i] && open) {
            intervals.push_back({*open, bisect_edge(alpha_grid[i - 1], alpha_grid[i], true)});
            open.reset();
        }
    }
    if (open) intervals.push_back({*open, alpha_grid.back()});
    return intervals;
}

}  // namespace phasesense::metrology

#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace phasesense {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Default Fock-space truncation dimension; PHASESENSE_DIM overrides.
int default_dim();

struct TruncationPolicy {
    int dim = 32;
    double tail_budget = 1e-10;

    TruncationPolicy() = default;
    TruncationPolicy(int dim_, double tail_budget_ = 1e-10);
};

/// Probability vector p_n over the truncated number basis.
///
/// Entries in [-1e-12, 0) are clamped to zero on construction; anything more
/// negative, or a total weight outside [1 - tail_budget, 1], is rejected.
class NumberDistribution {
  public:
    explicit NumberDistribution(std::vector<double> probs, double tail_budget = 1e-10);

    int dim() const { return static_cast<int>(probs_.size()); }
    double operator[](int n) const { return probs_[static_cast<std::size_t>(n)]; }
    const std::vector<double>& probs() const { return probs_; }
    double tail_budget() const { return tail_budget_; }

    double total() const;
    double mean_occupation() const;
    double occupation_moment(int power) const;
    /// Expectation of (-1)^N.
    double parity() const;

  private:
    std::vector<double> probs_;
    double tail_budget_;
};

/// Hermitian, unit-trace, positive-semidefinite matrix in the number basis.
/// Element (m, n) is <m|rho|n>.
class DensityMatrix {
  public:
    /// Validates Hermiticity (1e-12), trace against `declared_trace` (1e-10)
    /// and positivity (eigenvalues >= psd_tolerance). Linearized maps pass a
    /// relaxed psd_tolerance matching their own truncation error; everything
    /// else uses the default.
    explicit DensityMatrix(Matrix elems, double declared_trace = 1.0,
                           double psd_tolerance = -1e-9);

    static DensityMatrix from_pure(const Vector& psi);
    static DensityMatrix from_diagonal(const std::vector<double>& diag);
    static DensityMatrix fock(int n, int dim);
    static DensityMatrix vacuum(int dim) { return fock(0, dim); }
    /// Convex combination w*a + (1-w)*b; dimensions are unified first.
    static DensityMatrix mixture(const DensityMatrix& a, const DensityMatrix& b, double weight);

    int dim() const { return static_cast<int>(elems_.rows()); }
    const Matrix& elems() const { return elems_; }
    Complex operator()(int m, int n) const { return elems_(m, n); }

    std::vector<double> diagonal() const;
    NumberDistribution number_distribution(double tail_budget = 1e-10) const;

    double trace() const { return elems_.trace().real(); }
    double purity() const;
    double mean_occupation() const;
    double occupation_moment(int power) const;
    double parity() const;

    /// Embed into (or truncate to) a new dimension. Truncation must not cut
    /// more than `tail_budget` of probability mass.
    DensityMatrix resized(int new_dim, double tail_budget = 1e-10) const;

  private:
    Matrix elems_;
};

/// Associated Laguerre polynomial L_p^q(x) by the three-term recurrence in p.
/// Throws std::range_error when the recurrence overflows.
double laguerre_assoc(int p, int q, double x);

/// <m|D(alpha e^{i phi})|k> for the displacement D(z) = exp(z a^dag - z* a).
Complex displaced_fock_overlap(int m, int k, double alpha, double phi);

/// Real signed coefficients c_km of the displaced-Fock overlaps,
/// <m|D(alpha e^{i phi})|k> = c_km * e^{i phi (m - k)}.
///
/// The full dim x dim table is built in O(dim^2) by running the Laguerre
/// recurrence along each diagonal.
class OverlapKernel {
  public:
    OverlapKernel(double alpha, int dim);

    double alpha() const { return alpha_; }
    int dim() const { return static_cast<int>(coeffs_.rows()); }
    /// c_km; sign convention (-1)^{(k-m) Theta(k-m)} included.
    double coeff(int k, int m) const { return coeffs_(k, m); }
    const Eigen::MatrixXd& coeffs() const { return coeffs_; }

    Complex element(int m, int k, double phi) const;

  private:
    double alpha_;
    Eigen::MatrixXd coeffs_;
};

// Ladder-operator actions on density matrices (all O(dim^2)).
Matrix apply_lowering_sandwich(const Matrix& rho);  // a rho a^dag
Matrix apply_raising_sandwich(const Matrix& rho);   // a^dag rho a
Matrix number_anticommutator(const Matrix& rho);    // N rho + rho N

// Dense operator builders for oracles and generators.
Matrix annihilation_operator(int dim);
Matrix creation_operator(int dim);
Matrix number_operator(int dim);

/// Wigner function W(beta) = (2/pi) Tr[D(beta) (-1)^N D^dag(beta) rho],
/// evaluated through the spectral decomposition of rho. When `tail_loss` is
/// non-null it receives the probability mass the displaced state pushes past
/// the truncation edge (a warning indicator, not an error).
double wigner_at(const DensityMatrix& rho, Complex beta, double* tail_loss = nullptr);

/// Decomposes rho once so grids of Wigner samples skip the per-point
/// eigensolve.
class WignerEvaluator {
  public:
    explicit WignerEvaluator(const DensityMatrix& rho, double eigen_cut = 1e-12);
    double at(Complex beta, double* tail_loss = nullptr) const;

  private:
    int dim_;
    std::vector<double> weights_;
    std::vector<Vector> vectors_;
};

/// Working dimension large enough that displacing a dim-dimensional state by
/// alpha keeps the lost tail below tail_budget.
int working_dim(int dim, double alpha, double tail_budget = 1e-10);

}  // namespace phasesense

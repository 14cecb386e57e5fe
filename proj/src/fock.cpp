#include "phasesense/fock.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>

namespace phasesense {

namespace {

constexpr double kHermitianTol = 1e-12;
constexpr double kTraceTol = 1e-10;
constexpr double kEigenvalueTol = -1e-9;
constexpr double kNegativityTol = -1e-12;
constexpr int kLaguerreMaxDegree = 1 << 20;

const double* log_factorial_table(int max_n) {
    static std::vector<double> table{0.0};
    if (static_cast<int>(table.size()) <= max_n) {
        std::size_t old = table.size();
        table.resize(static_cast<std::size_t>(max_n) + 1);
        for (std::size_t i = old; i < table.size(); ++i)
            table[i] = table[i - 1] + std::log(static_cast<double>(i));
    }
    return table.data();
}

}  // namespace

int default_dim() {
    if (const char* env = std::getenv("PHASESENSE_DIM")) {
        int d = std::atoi(env);
        if (d >= 2) return d;
    }
    return 32;
}

TruncationPolicy::TruncationPolicy(int dim_, double tail_budget_)
    : dim(dim_), tail_budget(tail_budget_) {
    if (dim < 2) throw std::invalid_argument("TruncationPolicy: dim must be >= 2");
    if (!(tail_budget > 0.0) || tail_budget > 1e-6)
        throw std::invalid_argument("TruncationPolicy: tail_budget must lie in (0, 1e-6]");
}

NumberDistribution::NumberDistribution(std::vector<double> probs, double tail_budget)
    : probs_(std::move(probs)), tail_budget_(tail_budget) {
    if (probs_.empty()) throw std::invalid_argument("NumberDistribution: empty");
    double sum = 0.0;
    for (std::size_t n = 0; n < probs_.size(); ++n) {
        double& p = probs_[n];
        if (p < 0.0) {
            if (p < kNegativityTol)
                throw std::invalid_argument("NumberDistribution: entry " + std::to_string(n) +
                                            " is negative beyond tolerance: " + std::to_string(p));
            p = 0.0;
        }
        sum += p;
    }
    if (sum < 1.0 - tail_budget_ || sum > 1.0 + 1e-12)
        throw std::invalid_argument("NumberDistribution: total weight " + std::to_string(sum) +
                                    " outside [1 - tail_budget, 1]");
}

double NumberDistribution::total() const {
    double s = 0.0;
    for (double p : probs_) s += p;
    return s;
}

double NumberDistribution::mean_occupation() const { return occupation_moment(1); }

double NumberDistribution::occupation_moment(int power) const {
    double s = 0.0;
    for (std::size_t n = 0; n < probs_.size(); ++n)
        s += probs_[n] * std::pow(static_cast<double>(n), power);
    return s;
}

double NumberDistribution::parity() const {
    double s = 0.0;
    for (std::size_t n = 0; n < probs_.size(); ++n)
        s += (n % 2 == 0 ? probs_[n] : -probs_[n]);
    return s;
}

DensityMatrix::DensityMatrix(Matrix elems, double declared_trace, double psd_tolerance)
    : elems_(std::move(elems)) {
    if (elems_.rows() != elems_.cols() || elems_.rows() < 1)
        throw std::invalid_argument("DensityMatrix: matrix must be square and nonempty");
    double herm = (elems_ - elems_.adjoint()).cwiseAbs().maxCoeff();
    if (herm >= kHermitianTol)
        throw std::invalid_argument("DensityMatrix: not Hermitian, max deviation " +
                                    std::to_string(herm));
    elems_ = 0.5 * (elems_ + elems_.adjoint()).eval();
    double tr = elems_.trace().real();
    if (std::abs(tr - declared_trace) > kTraceTol)
        throw std::invalid_argument("DensityMatrix: trace " + std::to_string(tr) +
                                    " deviates from declared " + std::to_string(declared_trace));
    Eigen::SelfAdjointEigenSolver<Matrix> solver(elems_, Eigen::EigenvaluesOnly);
    double min_eig = solver.eigenvalues().minCoeff();
    if (min_eig < std::min(psd_tolerance, kEigenvalueTol))
        throw std::invalid_argument("DensityMatrix: negative eigenvalue " +
                                    std::to_string(min_eig));
}

DensityMatrix DensityMatrix::from_pure(const Vector& psi) {
    double norm2 = psi.squaredNorm();
    if (std::abs(norm2 - 1.0) > 1e-6)
        throw std::invalid_argument("DensityMatrix::from_pure: state norm^2 = " +
                                    std::to_string(norm2));
    Vector v = psi / std::sqrt(norm2);
    return DensityMatrix(v * v.adjoint());
}

DensityMatrix DensityMatrix::from_diagonal(const std::vector<double>& diag) {
    if (diag.empty()) throw std::invalid_argument("DensityMatrix::from_diagonal: empty");
    double sum = 0.0;
    for (double p : diag) {
        if (p < kNegativityTol)
            throw std::invalid_argument("DensityMatrix::from_diagonal: negative entry");
        sum += std::max(p, 0.0);
    }
    if (sum <= 0.0) throw std::invalid_argument("DensityMatrix::from_diagonal: zero weight");
    Matrix m = Matrix::Zero(diag.size(), diag.size());
    for (std::size_t n = 0; n < diag.size(); ++n) m(n, n) = std::max(diag[n], 0.0) / sum;
    return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::fock(int n, int dim) {
    if (n < 0 || n >= dim) throw std::invalid_argument("DensityMatrix::fock: n out of range");
    Matrix m = Matrix::Zero(dim, dim);
    m(n, n) = 1.0;
    return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::mixture(const DensityMatrix& a, const DensityMatrix& b,
                                     double weight) {
    if (weight < 0.0 || weight > 1.0)
        throw std::invalid_argument("DensityMatrix::mixture: weight outside [0, 1]");
    int dim = std::max(a.dim(), b.dim());
    Matrix m = Matrix::Zero(dim, dim);
    m.topLeftCorner(a.dim(), a.dim()) = weight * a.elems();
    m.topLeftCorner(b.dim(), b.dim()) += (1.0 - weight) * b.elems();
    return DensityMatrix(std::move(m));
}

std::vector<double> DensityMatrix::diagonal() const {
    std::vector<double> d(static_cast<std::size_t>(dim()));
    for (int n = 0; n < dim(); ++n) d[static_cast<std::size_t>(n)] = elems_(n, n).real();
    return d;
}

NumberDistribution DensityMatrix::number_distribution(double tail_budget) const {
    return NumberDistribution(diagonal(), tail_budget);
}

double DensityMatrix::purity() const { return (elems_ * elems_).trace().real(); }

double DensityMatrix::mean_occupation() const { return occupation_moment(1); }

double DensityMatrix::occupation_moment(int power) const {
    double s = 0.0;
    for (int n = 0; n < dim(); ++n)
        s += elems_(n, n).real() * std::pow(static_cast<double>(n), power);
    return s;
}

double DensityMatrix::parity() const {
    double s = 0.0;
    for (int n = 0; n < dim(); ++n)
        s += (n % 2 == 0 ? elems_(n, n).real() : -elems_(n, n).real());
    return s;
}

DensityMatrix DensityMatrix::resized(int new_dim, double tail_budget) const {
    if (new_dim < 1) throw std::invalid_argument("DensityMatrix::resized: bad dimension");
    if (new_dim == dim()) return *this;
    Matrix m = Matrix::Zero(new_dim, new_dim);
    if (new_dim > dim()) {
        m.topLeftCorner(dim(), dim()) = elems_;
        return DensityMatrix(std::move(m));
    }
    double cut = 0.0;
    for (int n = new_dim; n < dim(); ++n) cut += elems_(n, n).real();
    if (cut > tail_budget)
        throw std::invalid_argument("DensityMatrix::resized: truncation would cut " +
                                    std::to_string(cut) + " of probability mass");
    m = elems_.topLeftCorner(new_dim, new_dim);
    double tr = m.trace().real();
    m /= tr;
    return DensityMatrix(std::move(m));
}

double laguerre_assoc(int p, int q, double x) {
    if (p < 0 || q < 0)
        throw std::invalid_argument("laguerre_assoc: order and degree must be nonnegative");
    if (p > kLaguerreMaxDegree || q > kLaguerreMaxDegree)
        throw std::invalid_argument("laguerre_assoc: order beyond configured bounds");
    if (!std::isfinite(x)) throw std::invalid_argument("laguerre_assoc: x must be finite");
    if (p == 0) return 1.0;
    double prev = 1.0;
    double cur = q + 1.0 - x;
    for (int n = 1; n < p; ++n) {
        double next = ((2.0 * n + q + 1.0 - x) * cur - (n + q) * prev) / (n + 1.0);
        prev = cur;
        cur = next;
    }
    if (!std::isfinite(cur))
        throw std::range_error("laguerre_assoc: recurrence overflowed for p=" + std::to_string(p) +
                               ", q=" + std::to_string(q) + ", x=" + std::to_string(x));
    return cur;
}

Complex displaced_fock_overlap(int m, int k, double alpha, double phi) {
    if (m < 0 || k < 0) throw std::invalid_argument("displaced_fock_overlap: negative index");
    if (alpha < 0.0) throw std::invalid_argument("displaced_fock_overlap: alpha must be >= 0");
    if (alpha == 0.0) return m == k ? 1.0 : 0.0;
    const double* lf = log_factorial_table(std::max(m, k));
    const int d = std::abs(m - k);
    const int mu = std::min(m, k);
    const double x = alpha * alpha;
    // (m!/k!)^{sgn(k-m)/2}; the k == m branch is taken explicitly.
    double log_ratio = 0.0;
    if (k > m)
        log_ratio = 0.5 * (lf[m] - lf[k]);
    else if (k < m)
        log_ratio = -0.5 * (lf[m] - lf[k]);
    double lag = laguerre_assoc(mu, d, x);
    double log_mag = -0.5 * x + log_ratio + d * std::log(alpha);
    double sign = (k > m && (k - m) % 2 != 0) ? -1.0 : 1.0;
    if (lag < 0.0) {
        sign = -sign;
        lag = -lag;
    }
    double mag = lag == 0.0 ? 0.0 : sign * std::exp(log_mag + std::log(lag));
    return mag * std::exp(Complex(0.0, phi * (m - k)));
}

OverlapKernel::OverlapKernel(double alpha, int dim) : alpha_(alpha) {
    if (alpha < 0.0) throw std::invalid_argument("OverlapKernel: alpha must be >= 0");
    if (dim < 1) throw std::invalid_argument("OverlapKernel: dim must be >= 1");
    coeffs_ = Eigen::MatrixXd::Zero(dim, dim);
    if (alpha == 0.0) {
        coeffs_.setIdentity();
        return;
    }
    const double x = alpha * alpha;
    const double log_alpha = std::log(alpha);
    const double* lf = log_factorial_table(dim);
    // One Laguerre recurrence per diagonal offset d, rescaled to dodge overflow.
    for (int d = 0; d < dim; ++d) {
        double prev = 0.0;
        double cur = 1.0;
        long scale = 0;
        for (int mu = 0; mu + d < dim; ++mu) {
            if (mu > 0) {
                int n = mu - 1;
                double next = ((2.0 * n + d + 1.0 - x) * cur - (n + d) * prev) / (n + 1.0);
                prev = cur;
                cur = next;
                if (std::abs(cur) > 1e280 || std::abs(prev) > 1e280) {
                    cur = std::ldexp(cur, -1024);
                    prev = std::ldexp(prev, -1024);
                    scale += 1024;
                }
            }
            double log_pref = -0.5 * x + 0.5 * (lf[mu] - lf[mu + d]) + d * log_alpha;
            double val = 0.0;
            if (cur != 0.0) {
                double lv = log_pref + std::log(std::abs(cur)) + scale * std::numbers::ln2;
                val = std::copysign(std::exp(lv), cur);
            }
            coeffs_(mu, mu + d) = val;
            if (d > 0) coeffs_(mu + d, mu) = (d % 2 != 0) ? -val : val;
        }
    }
}

Complex OverlapKernel::element(int m, int k, double phi) const {
    return coeffs_(k, m) * std::exp(Complex(0.0, phi * (m - k)));
}

Matrix apply_lowering_sandwich(const Matrix& rho) {
    const int dim = static_cast<int>(rho.rows());
    Matrix out = Matrix::Zero(dim, dim);
    for (int m = 0; m + 1 < dim; ++m)
        for (int n = 0; n + 1 < dim; ++n)
            out(m, n) = std::sqrt((m + 1.0) * (n + 1.0)) * rho(m + 1, n + 1);
    return out;
}

Matrix apply_raising_sandwich(const Matrix& rho) {
    const int dim = static_cast<int>(rho.rows());
    Matrix out = Matrix::Zero(dim, dim);
    for (int m = 1; m < dim; ++m)
        for (int n = 1; n < dim; ++n)
            out(m, n) = std::sqrt(static_cast<double>(m) * n) * rho(m - 1, n - 1);
    return out;
}

Matrix number_anticommutator(const Matrix& rho) {
    const int dim = static_cast<int>(rho.rows());
    Matrix out(dim, dim);
    for (int m = 0; m < dim; ++m)
        for (int n = 0; n < dim; ++n) out(m, n) = static_cast<double>(m + n) * rho(m, n);
    return out;
}

Matrix annihilation_operator(int dim) {
    Matrix a = Matrix::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

Matrix creation_operator(int dim) { return annihilation_operator(dim).adjoint(); }

Matrix number_operator(int dim) {
    Matrix n = Matrix::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) n(i, i) = i;
    return n;
}

double wigner_at(const DensityMatrix& rho, Complex beta, double* tail_loss) {
    return WignerEvaluator(rho).at(beta, tail_loss);
}

WignerEvaluator::WignerEvaluator(const DensityMatrix& rho, double eigen_cut) : dim_(rho.dim()) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(rho.elems());
    for (int i = 0; i < dim_; ++i) {
        const double lambda = solver.eigenvalues()(i);
        if (std::abs(lambda) < eigen_cut) continue;
        weights_.push_back(lambda);
        vectors_.push_back(solver.eigenvectors().col(i));
    }
}

double WignerEvaluator::at(Complex beta, double* tail_loss) const {
    const double r = std::abs(beta);
    if (r == 0.0) {
        if (tail_loss) *tail_loss = 0.0;
        double parity = 0.0;
        for (std::size_t i = 0; i < weights_.size(); ++i)
            for (int n = 0; n < dim_; ++n)
                parity += weights_[i] * (n % 2 == 0 ? 1.0 : -1.0) * std::norm(vectors_[i](n));
        return 2.0 / std::numbers::pi * parity;
    }
    const int ext = working_dim(dim_, r);
    const OverlapKernel kernel(r, ext);
    const double phi = std::arg(-beta);

    double parity_sum = 0.0;
    double loss = 0.0;
    Vector u = Vector::Zero(ext);
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        u.setZero();
        for (int k = 0; k < dim_; ++k)
            u(k) = vectors_[i](k) * std::exp(Complex(0.0, -phi * k));
        // w_n = sum_k c_kn u_k is the displaced eigenvector in the number basis.
        Vector w = kernel.coeffs().transpose().cast<Complex>() * u;
        double parity = 0.0;
        double captured = 0.0;
        for (int n = 0; n < ext; ++n) {
            const double p = std::norm(w(n));
            captured += p;
            parity += (n % 2 == 0 ? p : -p);
        }
        parity_sum += weights_[i] * parity;
        loss += weights_[i] * std::max(0.0, 1.0 - captured);
    }
    if (tail_loss) *tail_loss = loss;
    return 2.0 / std::numbers::pi * parity_sum;
}

int working_dim(int dim, double alpha, double /*tail_budget*/) {
    int d = dim;
    for (int iter = 0; iter < 4; ++iter)
        d = dim + static_cast<int>(std::ceil(5.0 * alpha * std::sqrt(static_cast<double>(d)))) + 4;
    return d;
}

}  // namespace phasesense

#pragma once

#include <cmath>
#include <concepts>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fdlm/errors.hpp"

namespace fdlm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Parameters (sigma^2, beta) of an Ornstein-Uhlenbeck covariance function
///   gamma(u, v) = sigma^2 / (2 beta) * exp(-beta |u - v|).
class OuParams {
public:
    /// Throws ParameterDomainError unless both values are finite and strictly positive.
    OuParams(double sigma2, double beta);

    static OuParams from_log_beta(double sigma2, double log_beta) { return {sigma2, std::exp(log_beta)}; }

    [[nodiscard]] double sigma2() const noexcept { return sigma2_; }
    [[nodiscard]] double beta() const noexcept { return beta_; }
    [[nodiscard]] double log_beta() const noexcept { return std::log(beta_); }
    /// Pointwise (stationary) variance sigma^2 / (2 beta).
    [[nodiscard]] double variance() const noexcept { return sigma2_ / (2.0 * beta_); }

    friend bool operator==(const OuParams&, const OuParams&) = default;

private:
    double sigma2_;
    double beta_;
};

/// Strictly increasing evaluation points in [0, 1].
class Grid {
public:
    explicit Grid(std::vector<double> points);

    /// d equispaced points t_j = (j - 1) / (d - 1), endpoints included; d = 1 gives {0}.
    static Grid uniform(std::size_t d);
    /// The dyadic points k 2^-n for k = 1..2^n.
    static Grid dyadic(int level);

    [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return points_[i]; }
    [[nodiscard]] std::span<const double> points() const noexcept { return points_; }

    /// Index of an exact member, or -1.
    [[nodiscard]] long find(double u) const noexcept;

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    std::vector<double> points_;
};

struct Atom {
    double location;
    double weight;
};

/// Finite signed combination of point masses on [0, 1].
class DiscreteMeasure {
public:
    DiscreteMeasure() = default;
    explicit DiscreteMeasure(std::vector<Atom> atoms);

    static DiscreteMeasure dirac(double u) { return DiscreteMeasure({{u, 1.0}}); }
    /// Point masses at every grid point with the given weights.
    static DiscreteMeasure on_grid(const Grid& g, const Vector& weights);

    [[nodiscard]] std::span<const Atom> atoms() const noexcept { return atoms_; }

private:
    std::vector<Atom> atoms_;
};

/// Anything that can be evaluated as a covariance function on [0,1]^2.
template <typename K>
concept CovarianceKernel = requires(const K& k, double u, double v) {
    { k(u, v) } -> std::convertible_to<double>;
};

double ou_kernel(const OuParams& p, double u, double v);

struct OuKernel {
    OuParams params;
    double operator()(double u, double v) const { return ou_kernel(params, u, v); }
};

template <CovarianceKernel K>
Matrix gram_matrix(const K& kernel, const Grid& g) {
    const auto d = static_cast<Eigen::Index>(g.size());
    Matrix out(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        out(i, i) = kernel(g[i], g[i]);
        for (Eigen::Index j = 0; j < i; ++j) {
            out(i, j) = kernel(g[i], g[j]);
            out(j, i) = out(i, j);
        }
    }
    return out;
}

inline Matrix gram_matrix(const OuParams& p, const Grid& g) { return gram_matrix(OuKernel{p}, g); }

/// Correlation matrix exp(-beta |u_i - u_j|); the OU Gram matrix is variance() times this.
Matrix ou_correlation(double beta, const Grid& g);

/// lambda(eta, tau) = sum_i sum_j w_i v_j gamma(u_i, v_j).
double covariance_functional(const OuParams& p, const DiscreteMeasure& eta, const DiscreteMeasure& tau);

/// Diagonal jitter multipliers, relative to the mean diagonal, tried in order.
struct JitterPolicy {
    std::vector<double> ladder{0.0, 1e-12, 1e-10, 1e-8, 1e-6};

    static const JitterPolicy& standard();
};

/// Cholesky factor of m + eps I, where eps is the first rung of the jitter ladder that factorizes.
class CholeskyFactor {
public:
    CholeskyFactor(Eigen::LLT<Matrix> llt, double jitter) : llt_(std::move(llt)), jitter_(jitter) {}

    [[nodiscard]] Matrix lower() const { return llt_.matrixL(); }
    [[nodiscard]] double jitter() const noexcept { return jitter_; }
    [[nodiscard]] Eigen::Index size() const noexcept { return llt_.rows(); }

    template <typename Rhs>
    [[nodiscard]] auto solve(const Eigen::MatrixBase<Rhs>& b) const {
        return llt_.solve(b);
    }

    /// Solves L x = b in place.
    template <typename Rhs>
    void solve_lower_in_place(Eigen::MatrixBase<Rhs>& b) const {
        llt_.matrixL().solveInPlace(b);
    }

    /// L * z, for drawing N(0, m) samples from standard normals.
    [[nodiscard]] Vector multiply_lower(const Vector& z) const { return llt_.matrixL() * z; }

    [[nodiscard]] double log_determinant() const {
        return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
    }

private:
    Eigen::LLT<Matrix> llt_;
    double jitter_;
};

/// Throws SingularMatrixError if every rung of the ladder fails.
CholeskyFactor safe_cholesky(const Matrix& m, const JitterPolicy& policy = JitterPolicy::standard());

}  // namespace fdlm

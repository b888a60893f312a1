#include "fdlm/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fdlm {

OuParams::OuParams(double sigma2, double beta) : sigma2_(sigma2), beta_(beta) {
    if (!std::isfinite(sigma2) || !std::isfinite(beta) || sigma2 <= 0.0 || beta <= 0.0) {
        std::ostringstream msg;
        msg << "OU parameters must be finite and positive (sigma2=" << sigma2 << ", beta=" << beta << ")";
        throw ParameterDomainError(msg.str());
    }
}

Grid::Grid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.empty()) throw GridMismatchError("grid must contain at least one point");
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const double u = points_[i];
        if (!std::isfinite(u) || u < 0.0 || u > 1.0)
            throw GridMismatchError("grid point " + std::to_string(i) + " outside [0,1]");
        if (i > 0 && !(points_[i - 1] < u))
            throw GridMismatchError("grid points must be strictly increasing (index " + std::to_string(i) + ")");
    }
}

Grid Grid::uniform(std::size_t d) {
    if (d == 0) throw GridMismatchError("grid size must be at least 1");
    if (d == 1) return Grid({0.0});
    std::vector<double> pts(d);
    for (std::size_t j = 0; j < d; ++j) pts[j] = static_cast<double>(j) / static_cast<double>(d - 1);
    return Grid(std::move(pts));
}

Grid Grid::dyadic(int level) {
    if (level < 1 || level > 30) throw GridMismatchError("dyadic level must be in [1, 30]");
    const std::size_t count = std::size_t{1} << level;
    std::vector<double> pts(count);
    for (std::size_t k = 1; k <= count; ++k) pts[k - 1] = std::ldexp(static_cast<double>(k), -level);
    return Grid(std::move(pts));
}

long Grid::find(double u) const noexcept {
    const auto it = std::lower_bound(points_.begin(), points_.end(), u);
    if (it == points_.end() || *it != u) return -1;
    return static_cast<long>(it - points_.begin());
}

DiscreteMeasure::DiscreteMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    for (const auto& a : atoms_) {
        if (!std::isfinite(a.location) || a.location < 0.0 || a.location > 1.0)
            throw GridMismatchError("measure atom outside [0,1]");
        if (!std::isfinite(a.weight)) throw ParameterDomainError("measure weight must be finite");
    }
}

DiscreteMeasure DiscreteMeasure::on_grid(const Grid& g, const Vector& weights) {
    if (static_cast<std::size_t>(weights.size()) != g.size())
        throw DimensionError("weight vector length differs from grid size");
    std::vector<Atom> atoms;
    atoms.reserve(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) atoms.push_back({g[i], weights(static_cast<Eigen::Index>(i))});
    return DiscreteMeasure(std::move(atoms));
}

double ou_kernel(const OuParams& p, double u, double v) {
    return p.variance() * std::exp(-p.beta() * std::abs(u - v));
}

Matrix ou_correlation(double beta, const Grid& g) {
    const auto d = static_cast<Eigen::Index>(g.size());
    Matrix out(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        out(i, i) = 1.0;
        for (Eigen::Index j = 0; j < i; ++j) {
            out(i, j) = std::exp(-beta * std::abs(g[i] - g[j]));
            out(j, i) = out(i, j);
        }
    }
    return out;
}

double covariance_functional(const OuParams& p, const DiscreteMeasure& eta, const DiscreteMeasure& tau) {
    double total = 0.0;
    for (const auto& a : eta.atoms())
        for (const auto& b : tau.atoms()) total += a.weight * b.weight * ou_kernel(p, a.location, b.location);
    return total;
}

const JitterPolicy& JitterPolicy::standard() {
    static const JitterPolicy policy{};
    return policy;
}

CholeskyFactor safe_cholesky(const Matrix& m, const JitterPolicy& policy) {
    if (m.rows() != m.cols()) throw DimensionError("safe_cholesky: matrix is not square");
    if (m.size() == 0) throw DimensionError("safe_cholesky: empty matrix");
    if (!m.allFinite()) throw SingularMatrixError("safe_cholesky: matrix has non-finite entries");

    const double mean_diag = m.diagonal().mean();
    const double scale = mean_diag > 0.0 ? mean_diag : 1.0;
    Matrix work(m.rows(), m.cols());
    for (const double rung : policy.ladder) {
        const double eps = rung * scale;
        work = m;
        work.diagonal().array() += eps;
        Eigen::LLT<Matrix> llt(work);
        if (llt.info() == Eigen::Success) return {std::move(llt), eps};
    }
    std::ostringstream msg;
    msg << "safe_cholesky: factorization failed at maximum jitter (dimension " << m.rows()
        << ", mean diagonal " << mean_diag << ")";
    throw SingularMatrixError(msg.str());
}

}  // namespace fdlm

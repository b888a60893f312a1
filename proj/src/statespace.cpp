#include "fdlm/statespace.hpp"

#include <algorithm>
#include <cmath>

namespace fdlm {

void FdlmSpec::validate() const {
    const auto p = static_cast<Eigen::Index>(state_grid.size());
    const auto d = static_cast<Eigen::Index>(obs_grid.size());
    if (F.rows() != d || F.cols() != p)
        throw DimensionError("F must be " + std::to_string(d) + "x" + std::to_string(p));
    if (G.rows() != p || G.cols() != p)
        throw DimensionError("G must be " + std::to_string(p) + "x" + std::to_string(p));
    if (m0.size() != p) throw DimensionError("m0 must have length " + std::to_string(p));
    if (!F.allFinite() || !G.allFinite() || !m0.allFinite())
        throw DimensionError("model matrices must be finite");
}

FdlmSpec local_level_spec(const Grid& grid, const OuParams& c0, const OuParams& w, const OuParams& v,
                          const Vector& m0) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    if (m0.size() != n)
        throw DimensionError("m0 has length " + std::to_string(m0.size()) + " but grid has " +
                             std::to_string(n) + " points");
    FdlmSpec spec{grid, grid, Matrix::Identity(n, n), Matrix::Identity(n, n), m0, c0, w, v};
    spec.validate();
    return spec;
}

FunctionalSeries::FunctionalSeries(Grid grid, Matrix curves, std::vector<std::string> time_labels)
    : grid_(std::move(grid)), curves_(std::move(curves)), labels_(std::move(time_labels)) {
    if (static_cast<std::size_t>(curves_.cols()) != grid_.size())
        throw DimensionError("curve length " + std::to_string(curves_.cols()) + " differs from grid size " +
                             std::to_string(grid_.size()));
    if (!curves_.allFinite()) throw DimensionError("functional series contains non-finite values");
    if (!labels_.empty() && static_cast<Eigen::Index>(labels_.size()) != curves_.rows())
        throw DimensionError("time label count differs from number of curves");
}

DyadicOperator::DyadicOperator(int level, Grid source_grid)
    : level_(level), source_(std::move(source_grid)), target_(Grid::dyadic(level)) {
    indices_.reserve(target_.size());
    for (std::size_t k = 0; k < target_.size(); ++k) {
        const long idx = source_.find(target_[k]);
        if (idx < 0)
            throw GridMismatchError("dyadic point " + std::to_string(target_[k]) + " (level " +
                                    std::to_string(level) + ") is not on the source grid");
        indices_.push_back(idx);
    }
}

Matrix DyadicOperator::matrix() const {
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(indices_.size()), static_cast<Eigen::Index>(source_.size()));
    for (std::size_t k = 0; k < indices_.size(); ++k) out(static_cast<Eigen::Index>(k), indices_[k]) = 1.0;
    return out;
}

FunctionalSeries apply_dyadic(const DyadicOperator& op, const FunctionalSeries& series) {
    if (!(series.grid() == op.source_grid())) {
        // Still valid as long as every dyadic point is on the series grid.
        DyadicOperator rebound(op.level(), series.grid());
        return apply_dyadic(rebound, series);
    }
    const auto& idx = op.indices();
    Matrix out(series.length(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = series.curves().col(idx[k]);
    return {op.target_grid(), std::move(out), series.time_labels()};
}

FunctionalSeries resample_linear(const FunctionalSeries& series, const Grid& target) {
    const auto src = series.grid().points();
    Matrix out(series.length(), static_cast<Eigen::Index>(target.size()));
    for (std::size_t j = 0; j < target.size(); ++j) {
        const double u = target[j];
        const auto col = static_cast<Eigen::Index>(j);
        if (src.size() == 1 || u <= src.front()) {
            out.col(col) = series.curves().col(0);
            continue;
        }
        if (u >= src.back()) {
            out.col(col) = series.curves().col(static_cast<Eigen::Index>(src.size() - 1));
            continue;
        }
        const auto hi = static_cast<Eigen::Index>(std::upper_bound(src.begin(), src.end(), u) - src.begin());
        const Eigen::Index lo = hi - 1;
        const double w = (u - src[lo]) / (src[hi] - src[lo]);
        out.col(col) = (1.0 - w) * series.curves().col(lo) + w * series.curves().col(hi);
    }
    return {target, std::move(out), series.time_labels()};
}

Vector standard_normal(Rng& rng, Eigen::Index n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
    return z;
}

Simulation simulate(const FdlmSpec& spec, std::size_t horizon, std::uint64_t seed) {
    if (horizon < 1) throw DimensionError("simulate: horizon must be at least 1");
    spec.validate();
    const auto p = static_cast<Eigen::Index>(spec.state_dim());
    const auto d = static_cast<Eigen::Index>(spec.obs_dim());
    const auto T = static_cast<Eigen::Index>(horizon);

    const CholeskyFactor c0 = safe_cholesky(gram_matrix(spec.c0, spec.state_grid));
    const CholeskyFactor w = safe_cholesky(gram_matrix(spec.w, spec.state_grid));
    const CholeskyFactor v = safe_cholesky(gram_matrix(spec.v, spec.obs_grid));

    Rng rng(seed);
    Matrix states(T + 1, p);
    Matrix obs(T, d);
    states.row(0) = (spec.m0 + c0.multiply_lower(standard_normal(rng, p))).transpose();
    for (Eigen::Index t = 1; t <= T; ++t) {
        const Vector prev = states.row(t - 1).transpose();
        const Vector x = spec.G * prev + w.multiply_lower(standard_normal(rng, p));
        states.row(t) = x.transpose();
        obs.row(t - 1) = (spec.F * x + v.multiply_lower(standard_normal(rng, d))).transpose();
    }
    return {FunctionalSeries(spec.state_grid, std::move(states)), FunctionalSeries(spec.obs_grid, std::move(obs))};
}

}  // namespace fdlm

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fdlm/kernel.hpp"

namespace fdlm {

using Rng = std::mt19937_64;

/// Functional DLM restricted to grids:
///   X_0 ~ N(m0, C0),  X_t = G X_{t-1} + N(0, W),  Y_t = F X_t + N(0, V),
/// with C0, W, V given by OU covariance functions on the state/observation grids.
struct FdlmSpec {
    Grid state_grid;
    Grid obs_grid;
    Matrix F;
    Matrix G;
    Vector m0;
    OuParams c0;
    OuParams w;
    OuParams v;

    /// Throws DimensionError when matrix sizes disagree with the grids.
    void validate() const;

    [[nodiscard]] std::size_t state_dim() const noexcept { return state_grid.size(); }
    [[nodiscard]] std::size_t obs_dim() const noexcept { return obs_grid.size(); }
};

/// Functional local level: F = G = identity on a shared grid.
FdlmSpec local_level_spec(const Grid& grid, const OuParams& c0, const OuParams& w, const OuParams& v,
                          const Vector& m0);

/// T curves on a common grid, one per row.
class FunctionalSeries {
public:
    FunctionalSeries(Grid grid, Matrix curves, std::vector<std::string> time_labels = {});

    [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
    [[nodiscard]] const Matrix& curves() const noexcept { return curves_; }
    [[nodiscard]] Eigen::Index length() const noexcept { return curves_.rows(); }
    [[nodiscard]] const std::vector<std::string>& time_labels() const noexcept { return labels_; }

private:
    Grid grid_;
    Matrix curves_;
    std::vector<std::string> labels_;
};

/// Evaluation at the dyadic points k 2^-n, k = 1..2^n, of a finer source grid.
class DyadicOperator {
public:
    /// Throws GridMismatchError if some dyadic point of this level is not an exact member of the source grid.
    DyadicOperator(int level, Grid source_grid);

    [[nodiscard]] int level() const noexcept { return level_; }
    [[nodiscard]] const Grid& source_grid() const noexcept { return source_; }
    [[nodiscard]] const Grid& target_grid() const noexcept { return target_; }
    [[nodiscard]] const std::vector<Eigen::Index>& indices() const noexcept { return indices_; }

    /// Selection matrix (2^n x source size).
    [[nodiscard]] Matrix matrix() const;

private:
    int level_;
    Grid source_;
    Grid target_;
    std::vector<Eigen::Index> indices_;
};

FunctionalSeries apply_dyadic(const DyadicOperator& op, const FunctionalSeries& series);

/// Linear interpolation of every curve onto a new grid. This is the explicit resampling step
/// for data whose grid is not dyadic-compatible; apply_dyadic itself never interpolates.
FunctionalSeries resample_linear(const FunctionalSeries& series, const Grid& target);

struct Simulation {
    FunctionalSeries states;        // T + 1 rows, X_0 first
    FunctionalSeries observations;  // T rows
};

Simulation simulate(const FdlmSpec& spec, std::size_t horizon, std::uint64_t seed);

/// Fills a vector with independent standard normal draws.
Vector standard_normal(Rng& rng, Eigen::Index n);

}  // namespace fdlm

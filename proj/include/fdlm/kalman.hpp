#pragma once

#include <cstdint>
#include <vector>

#include "fdlm/statespace.hpp"

namespace fdlm {

/// The discretized model as plain matrices. Built from an FdlmSpec, or filled in directly
/// when a test needs hand-checkable covariances that are not OU Gram matrices.
struct ModelMatrices {
    Matrix F;
    Matrix G;
    Vector m0;
    Matrix C0;
    Matrix W;
    Matrix V;

    static ModelMatrices from_spec(const FdlmSpec& spec);

    void validate() const;
    [[nodiscard]] Eigen::Index state_dim() const noexcept { return G.rows(); }
    [[nodiscard]] Eigen::Index obs_dim() const noexcept { return F.rows(); }
};

/// Observation model composed with a dyadic evaluation operator: F_n = D F, V_n = D V D'.
ModelMatrices restrict_observations(const ModelMatrices& model, const DyadicOperator& op);

struct FilterStep {
    Vector a;  // state forecast mean
    Matrix R;  // state forecast covariance
    Vector f;  // observation forecast mean
    Matrix Q;  // observation forecast covariance
    Vector m;  // filtered mean
    Matrix C;  // filtered covariance
    double loglik_increment = 0.0;
};

struct FilterOutput {
    Vector m0;
    Matrix C0;
    std::vector<FilterStep> steps;  // steps[t-1] holds time t
    double loglik = 0.0;

    [[nodiscard]] std::size_t length() const noexcept { return steps.size(); }
};

struct SmoothStep {
    Vector s;
    Matrix S;
};

struct Forecast {
    Vector a;
    Matrix R;
    Vector f;
    Matrix Q;
};

/// Kalman filter over the rows of `data` (T x d).
FilterOutput filter(const ModelMatrices& model, const Matrix& data);
/// Checks that the data grid is the model's observation grid before filtering.
FilterOutput filter(const FdlmSpec& spec, const FunctionalSeries& data);

/// Rauch-Tung-Striebel smoother. Returns T + 1 steps; index 0 is X_0.
std::vector<SmoothStep> smooth(const ModelMatrices& model, const FilterOutput& filtered);

/// Forward filtering, backward sampling: one draw of X_{0:T} from the joint smoothing
/// distribution as a (T + 1) x p matrix.
Matrix ffbs(const ModelMatrices& model, const FilterOutput& filtered, Rng& rng);
Matrix ffbs(const ModelMatrices& model, const FilterOutput& filtered, std::uint64_t seed);

/// k-step-ahead predictive moments for the state and observation, starting from (m_T, C_T).
std::vector<Forecast> forecast(const ModelMatrices& model, const FilterStep& last, std::size_t horizon);

/// 0.5 (M + M') in place.
inline void symmetrize(Matrix& m) { m = 0.5 * (m + m.transpose()).eval(); }

}  // namespace fdlm

#pragma once

#include <cstddef>
#include <map>
#include <tuple>
#include <vector>

#include "fdlm/kalman.hpp"

namespace fdlm::oracle {

// Brute-force ground truth for small instances: the exact joint Gaussian of (X_{0:T}, Y_{1:T})
// built by composing the model's linear maps, conditioned with dense block algebra.
// Shares no code path with the recursions in kalman.hpp.

enum class VariableKind { State, Observation };

struct Coordinate {
    VariableKind kind;
    int time;
    int index;

    friend auto operator<=>(const Coordinate&, const Coordinate&) = default;
};

class JointGaussian {
public:
    JointGaussian(Vector mean, Matrix cov, std::vector<Coordinate> labels);

    [[nodiscard]] const Vector& mean() const noexcept { return mean_; }
    [[nodiscard]] const Matrix& cov() const noexcept { return cov_; }
    [[nodiscard]] const std::vector<Coordinate>& labels() const noexcept { return labels_; }
    [[nodiscard]] Eigen::Index dim() const noexcept { return mean_.size(); }

    /// Position of a coordinate; throws DimensionError if absent.
    [[nodiscard]] Eigen::Index position(VariableKind kind, int time, int index) const;
    /// Positions of the whole block (kind, time), in grid order.
    [[nodiscard]] std::vector<Eigen::Index> block(VariableKind kind, int time) const;

private:
    Vector mean_;
    Matrix cov_;
    std::vector<Coordinate> labels_;
    std::map<Coordinate, Eigen::Index> lookup_;
};

/// Upper bound on T (p + d) accepted by build_joint.
inline constexpr std::size_t kMaxJointSize = 200;

JointGaussian build_joint(const ModelMatrices& model, std::size_t horizon);

/// Distribution of the unobserved coordinates given coord[observed] = values.
JointGaussian condition(const JointGaussian& jg, const std::vector<Eigen::Index>& observed, const Vector& values);

JointGaussian marginal(const JointGaussian& jg, const std::vector<Eigen::Index>& keep);

/// Log density of the full vector under the joint.
double log_density(const JointGaussian& jg, const Vector& x);

/// All observation positions Y_1..Y_T in time order.
std::vector<Eigen::Index> observation_positions(const JointGaussian& jg, int through);

/// Stacks the rows of a T x d data matrix in the same order as observation_positions.
Vector stack_rows(const Matrix& data);

}  // namespace fdlm::oracle

#include "fdlm/oracle.hpp"

#include <algorithm>

namespace fdlm::oracle {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

JointGaussian::JointGaussian(Vector mean, Matrix cov, std::vector<Coordinate> labels)
    : mean_(std::move(mean)), cov_(std::move(cov)), labels_(std::move(labels)) {
    if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size() ||
        static_cast<Eigen::Index>(labels_.size()) != mean_.size())
        throw DimensionError("joint Gaussian: inconsistent sizes");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (!lookup_.emplace(labels_[i], static_cast<Eigen::Index>(i)).second)
            throw DimensionError("joint Gaussian: duplicate coordinate label");
    }
}

Eigen::Index JointGaussian::position(VariableKind kind, int time, int index) const {
    const auto it = lookup_.find({kind, time, index});
    if (it == lookup_.end()) throw DimensionError("joint Gaussian: no such coordinate");
    return it->second;
}

std::vector<Eigen::Index> JointGaussian::block(VariableKind kind, int time) const {
    std::vector<Eigen::Index> out;
    for (auto it = lookup_.lower_bound({kind, time, 0}); it != lookup_.end(); ++it) {
        if (it->first.kind != kind || it->first.time != time) break;
        out.push_back(it->second);
    }
    return out;
}

JointGaussian build_joint(const ModelMatrices& model, std::size_t horizon) {
    model.validate();
    const Eigen::Index p = model.state_dim();
    const Eigen::Index d = model.obs_dim();
    if (horizon * static_cast<std::size_t>(p + d) > kMaxJointSize)
        throw DimensionError("build_joint: T (p + d) exceeds " + std::to_string(kMaxJointSize));
    const auto T = static_cast<Eigen::Index>(horizon);

    // Independent sources: X_0 - m0, w_1..w_T, v_1..v_T.
    const Eigen::Index n_src = p + T * p + T * d;
    Matrix source_cov = Matrix::Zero(n_src, n_src);
    source_cov.topLeftCorner(p, p) = model.C0;
    for (Eigen::Index t = 0; t < T; ++t) {
        source_cov.block(p + t * p, p + t * p, p, p) = model.W;
        source_cov.block(p + T * p + t * d, p + T * p + t * d, d, d) = model.V;
    }

    const Eigen::Index n = (T + 1) * p + T * d;
    Matrix loading = Matrix::Zero(n, n_src);
    Vector mean(n);
    std::vector<Coordinate> labels;
    labels.reserve(static_cast<std::size_t>(n));

    // X_0
    loading.topLeftCorner(p, p) = Matrix::Identity(p, p);
    mean.head(p) = model.m0;
    for (int i = 0; i < p; ++i) labels.push_back({VariableKind::State, 0, i});

    // X_t = G X_{t-1} + w_t
    for (Eigen::Index t = 1; t <= T; ++t) {
        const Eigen::Index row = t * p;
        loading.middleRows(row, p) = model.G * loading.middleRows(row - p, p);
        loading.block(row, p + (t - 1) * p, p, p) += Matrix::Identity(p, p);
        mean.segment(row, p) = model.G * mean.segment(row - p, p);
        for (int i = 0; i < p; ++i) labels.push_back({VariableKind::State, static_cast<int>(t), i});
    }
    // Y_t = F X_t + v_t
    for (Eigen::Index t = 1; t <= T; ++t) {
        const Eigen::Index row = (T + 1) * p + (t - 1) * d;
        loading.middleRows(row, d) = model.F * loading.middleRows(t * p, p);
        loading.block(row, p + T * p + (t - 1) * d, d, d) += Matrix::Identity(d, d);
        mean.segment(row, d) = model.F * mean.segment(t * p, p);
        for (int i = 0; i < d; ++i) labels.push_back({VariableKind::Observation, static_cast<int>(t), i});
    }

    Matrix cov = loading * source_cov * loading.transpose();
    cov = 0.5 * (cov + cov.transpose()).eval();
    return {std::move(mean), std::move(cov), std::move(labels)};
}

JointGaussian marginal(const JointGaussian& jg, const std::vector<Eigen::Index>& keep) {
    const auto k = static_cast<Eigen::Index>(keep.size());
    Vector mean(k);
    Matrix cov(k, k);
    std::vector<Coordinate> labels;
    labels.reserve(keep.size());
    for (Eigen::Index i = 0; i < k; ++i) {
        mean(i) = jg.mean()(keep[i]);
        labels.push_back(jg.labels()[keep[i]]);
        for (Eigen::Index j = 0; j < k; ++j) cov(i, j) = jg.cov()(keep[i], keep[j]);
    }
    return {std::move(mean), std::move(cov), std::move(labels)};
}

JointGaussian condition(const JointGaussian& jg, const std::vector<Eigen::Index>& observed, const Vector& values) {
    if (static_cast<Eigen::Index>(observed.size()) != values.size())
        throw DimensionError("condition: observed index count differs from value count");
    if (observed.empty()) return jg;

    std::vector<bool> is_obs(static_cast<std::size_t>(jg.dim()), false);
    for (const auto i : observed) {
        if (i < 0 || i >= jg.dim()) throw DimensionError("condition: index out of range");
        if (is_obs[static_cast<std::size_t>(i)]) throw DimensionError("condition: repeated index");
        is_obs[static_cast<std::size_t>(i)] = true;
    }
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < jg.dim(); ++i)
        if (!is_obs[static_cast<std::size_t>(i)]) free.push_back(i);

    const auto nf = static_cast<Eigen::Index>(free.size());
    const auto no = static_cast<Eigen::Index>(observed.size());
    Matrix S_ff(nf, nf), S_fo(nf, no), S_oo(no, no);
    Vector mu_f(nf), mu_o(no);
    for (Eigen::Index i = 0; i < nf; ++i) {
        mu_f(i) = jg.mean()(free[i]);
        for (Eigen::Index j = 0; j < nf; ++j) S_ff(i, j) = jg.cov()(free[i], free[j]);
        for (Eigen::Index j = 0; j < no; ++j) S_fo(i, j) = jg.cov()(free[i], observed[j]);
    }
    for (Eigen::Index i = 0; i < no; ++i) {
        mu_o(i) = jg.mean()(observed[i]);
        for (Eigen::Index j = 0; j < no; ++j) S_oo(i, j) = jg.cov()(observed[i], observed[j]);
    }

    const CholeskyFactor chol = safe_cholesky(S_oo);
    const Matrix gain_t = chol.solve(S_fo.transpose());  // S_oo^{-1} S_of
    Vector mean = mu_f + gain_t.transpose() * (values - mu_o);
    Matrix cov = S_ff - S_fo * gain_t;
    cov = 0.5 * (cov + cov.transpose()).eval();

    std::vector<Coordinate> labels;
    labels.reserve(free.size());
    for (const auto i : free) labels.push_back(jg.labels()[static_cast<std::size_t>(i)]);
    return {std::move(mean), std::move(cov), std::move(labels)};
}

double log_density(const JointGaussian& jg, const Vector& x) {
    if (x.size() != jg.dim()) throw DimensionError("log_density: dimension mismatch");
    const CholeskyFactor chol = safe_cholesky(jg.cov());
    Vector z = x - jg.mean();
    chol.solve_lower_in_place(z);
    return -0.5 * (static_cast<double>(jg.dim()) * kLog2Pi + chol.log_determinant() + z.squaredNorm());
}

std::vector<Eigen::Index> observation_positions(const JointGaussian& jg, int through) {
    std::vector<Eigen::Index> out;
    for (int t = 1; t <= through; ++t) {
        const auto b = jg.block(VariableKind::Observation, t);
        if (b.empty()) throw DimensionError("observation_positions: no observations at time " + std::to_string(t));
        out.insert(out.end(), b.begin(), b.end());
    }
    return out;
}

Vector stack_rows(const Matrix& data) {
    Vector out(data.size());
    Eigen::Index k = 0;
    for (Eigen::Index t = 0; t < data.rows(); ++t)
        for (Eigen::Index j = 0; j < data.cols(); ++j) out(k++) = data(t, j);
    return out;
}

}  // namespace fdlm::oracle

#include "fdlm/kalman.hpp"

#include <cmath>

namespace fdlm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)

// J = C G' R^{-1}, computed as (R^{-1} G C)' with R factored.
Matrix backward_gain(const Matrix& C, const Matrix& G, const Matrix& R_next) {
    const CholeskyFactor chol = safe_cholesky(R_next);
    const Matrix GC = G * C;
    return chol.solve(GC).transpose();
}

}  // namespace

ModelMatrices ModelMatrices::from_spec(const FdlmSpec& spec) {
    spec.validate();
    return {spec.F,
            spec.G,
            spec.m0,
            gram_matrix(spec.c0, spec.state_grid),
            gram_matrix(spec.w, spec.state_grid),
            gram_matrix(spec.v, spec.obs_grid)};
}

void ModelMatrices::validate() const {
    const Eigen::Index p = G.rows();
    const Eigen::Index d = F.rows();
    if (G.cols() != p) throw DimensionError("G must be square");
    if (F.cols() != p) throw DimensionError("F must have as many columns as the state dimension");
    if (m0.size() != p) throw DimensionError("m0 length differs from state dimension");
    if (C0.rows() != p || C0.cols() != p) throw DimensionError("C0 must be p x p");
    if (W.rows() != p || W.cols() != p) throw DimensionError("W must be p x p");
    if (V.rows() != d || V.cols() != d) throw DimensionError("V must be d x d");
}

ModelMatrices restrict_observations(const ModelMatrices& model, const DyadicOperator& op) {
    if (static_cast<Eigen::Index>(op.source_grid().size()) != model.obs_dim())
        throw GridMismatchError("dyadic operator source grid differs from the observation dimension");
    const Matrix D = op.matrix();
    ModelMatrices out = model;
    out.F = D * model.F;
    out.V = D * model.V * D.transpose();
    return out;
}

FilterOutput filter(const ModelMatrices& model, const Matrix& data) {
    model.validate();
    if (data.rows() < 1) throw DimensionError("filter: need at least one observation");
    if (data.cols() != model.obs_dim())
        throw GridMismatchError("filter: data has " + std::to_string(data.cols()) + " columns, model expects " +
                                std::to_string(model.obs_dim()));

    const Eigen::Index d = model.obs_dim();
    FilterOutput out;
    out.m0 = model.m0;
    out.C0 = model.C0;
    out.steps.reserve(static_cast<std::size_t>(data.rows()));

    const Vector* m_prev = &out.m0;
    const Matrix* C_prev = &out.C0;
    for (Eigen::Index t = 0; t < data.rows(); ++t) {
        FilterStep step;
        step.a = model.G * *m_prev;
        step.R = model.G * *C_prev * model.G.transpose() + model.W;
        symmetrize(step.R);
        step.f = model.F * step.a;
        const Matrix RFt = step.R * model.F.transpose();
        step.Q = model.F * RFt + model.V;
        symmetrize(step.Q);

        const CholeskyFactor q_chol = safe_cholesky(step.Q);
        const Vector resid = data.row(t).transpose() - step.f;
        const Matrix gain_t = q_chol.solve(RFt.transpose());  // Q^{-1} F R
        step.m = step.a + gain_t.transpose() * resid;
        step.C = step.R - RFt * gain_t;
        symmetrize(step.C);

        Vector z = resid;
        q_chol.solve_lower_in_place(z);
        step.loglik_increment = -0.5 * (static_cast<double>(d) * kLog2Pi + q_chol.log_determinant() + z.squaredNorm());
        out.loglik += step.loglik_increment;

        out.steps.push_back(std::move(step));
        m_prev = &out.steps.back().m;
        C_prev = &out.steps.back().C;
    }
    return out;
}

FilterOutput filter(const FdlmSpec& spec, const FunctionalSeries& data) {
    if (!(data.grid() == spec.obs_grid)) throw GridMismatchError("filter: data grid differs from observation grid");
    return filter(ModelMatrices::from_spec(spec), data.curves());
}

std::vector<SmoothStep> smooth(const ModelMatrices& model, const FilterOutput& filtered) {
    const std::size_t T = filtered.length();
    if (T == 0) throw DimensionError("smooth: empty filter output");
    std::vector<SmoothStep> out(T + 1);
    out[T] = {filtered.steps[T - 1].m, filtered.steps[T - 1].C};
    for (std::size_t t = T; t-- > 0;) {
        const Vector& m = t == 0 ? filtered.m0 : filtered.steps[t - 1].m;
        const Matrix& C = t == 0 ? filtered.C0 : filtered.steps[t - 1].C;
        const FilterStep& next = filtered.steps[t];
        const Matrix J = backward_gain(C, model.G, next.R);
        SmoothStep& cur = out[t];
        cur.s = m + J * (out[t + 1].s - next.a);
        cur.S = C - J * (next.R - out[t + 1].S) * J.transpose();
        symmetrize(cur.S);
    }
    return out;
}

Matrix ffbs(const ModelMatrices& model, const FilterOutput& filtered, Rng& rng) {
    const std::size_t T = filtered.length();
    if (T == 0) throw DimensionError("ffbs: empty filter output");
    const Eigen::Index p = model.state_dim();
    Matrix draw(static_cast<Eigen::Index>(T) + 1, p);

    const FilterStep& last = filtered.steps[T - 1];
    Vector x = last.m + safe_cholesky(last.C).multiply_lower(standard_normal(rng, p));
    draw.row(static_cast<Eigen::Index>(T)) = x.transpose();
    for (std::size_t t = T; t-- > 0;) {
        const Vector& m = t == 0 ? filtered.m0 : filtered.steps[t - 1].m;
        const Matrix& C = t == 0 ? filtered.C0 : filtered.steps[t - 1].C;
        const FilterStep& next = filtered.steps[t];
        const Matrix J = backward_gain(C, model.G, next.R);
        const Vector h = m + J * (x - next.a);
        Matrix H = C - J * model.G * C;
        symmetrize(H);
        x = h + safe_cholesky(H).multiply_lower(standard_normal(rng, p));
        draw.row(static_cast<Eigen::Index>(t)) = x.transpose();
    }
    return draw;
}

Matrix ffbs(const ModelMatrices& model, const FilterOutput& filtered, std::uint64_t seed) {
    Rng rng(seed);
    return ffbs(model, filtered, rng);
}

std::vector<Forecast> forecast(const ModelMatrices& model, const FilterStep& last, std::size_t horizon) {
    model.validate();
    if (horizon < 1) throw DimensionError("forecast: horizon must be at least 1");
    std::vector<Forecast> out;
    out.reserve(horizon);
    Vector a = last.m;
    Matrix R = last.C;
    for (std::size_t k = 0; k < horizon; ++k) {
        a = model.G * a;
        R = model.G * R * model.G.transpose() + model.W;
        symmetrize(R);
        Matrix Q = model.F * R * model.F.transpose() + model.V;
        symmetrize(Q);
        out.push_back({a, R, model.F * a, std::move(Q)});
    }
    return out;
}

}  // namespace fdlm

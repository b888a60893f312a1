#include <doctest.h>

#include <numeric>

#include "fdlm/oracle.hpp"
#include "fdlm/verify.hpp"

using namespace fdlm;
using namespace fdlm::oracle;

namespace {

ModelMatrices scalar_unit_model() {
    ModelMatrices m;
    m.F = Matrix::Identity(1, 1);
    m.G = Matrix::Identity(1, 1);
    m.m0 = Vector::Zero(1);
    m.C0 = m.W = m.V = Matrix::Identity(1, 1);
    return m;
}

ModelMatrices small_model() {
    ModelMatrices m;
    m.F.resize(2, 2);
    m.F << 1.0, 0.5, -0.3, 1.2;
    m.G.resize(2, 2);
    m.G << 0.9, 0.1, 0.0, 0.8;
    m.m0 = Vector::Zero(2);
    m.m0 << 0.3, -0.2;
    m.C0 = gram_matrix(OuParams(2.0, 1.0), Grid({0.2, 0.7}));
    m.W = gram_matrix(OuParams(0.6, 2.0), Grid({0.2, 0.7}));
    m.V = gram_matrix(OuParams(0.4, 0.5), Grid({0.1, 0.9}));
    return m;
}

}  // namespace

TEST_CASE("build_joint scalar covariance") {
    const JointGaussian jg = build_joint(scalar_unit_model(), 1);
    REQUIRE(jg.dim() == 3);
    Matrix expected(3, 3);
    expected << 1, 1, 1, 1, 2, 2, 1, 2, 3;
    const Eigen::Index x0 = jg.position(VariableKind::State, 0, 0);
    const Eigen::Index x1 = jg.position(VariableKind::State, 1, 0);
    const Eigen::Index y1 = jg.position(VariableKind::Observation, 1, 0);
    const std::array<Eigen::Index, 3> idx{x0, x1, y1};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(jg.cov()(idx[i], idx[j]) == expected(i, j));
    CHECK(jg.mean().isZero());
}

TEST_CASE("build_joint marginal of X0 is the prior") {
    const ModelMatrices m = small_model();
    const JointGaussian jg = build_joint(m, 3);
    const JointGaussian x0 = marginal(jg, jg.block(VariableKind::State, 0));
    CHECK(x0.mean() == m.m0);
    CHECK(x0.cov() == m.C0);
}

TEST_CASE("build_joint size guard") {
    const ModelMatrices m = small_model();
    CHECK_NOTHROW(build_joint(m, 50));
    CHECK_THROWS_AS(build_joint(m, 51), DimensionError);
}

TEST_CASE("condition examples") {
    const JointGaussian jg = build_joint(scalar_unit_model(), 1);
    SUBCASE("empty set leaves the input unchanged") {
        const JointGaussian c = condition(jg, {}, Vector(0));
        CHECK(c.mean() == jg.mean());
        CHECK(c.cov() == jg.cov());
    }
    SUBCASE("X1 given Y1 = 2") {
        const JointGaussian c = condition(jg, {jg.position(VariableKind::Observation, 1, 0)}, Vector::Constant(1, 2.0));
        const Eigen::Index x1 = c.position(VariableKind::State, 1, 0);
        CHECK(c.mean()(x1) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
        CHECK(c.cov()(x1, x1) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    }
    SUBCASE("correlation identity") {
        for (double rho : {-0.9, -0.3, 0.0, 0.5, 0.99}) {
            Matrix cov(2, 2);
            cov << 4.0, rho * 2.0 * 3.0, rho * 2.0 * 3.0, 9.0;
            const JointGaussian pair(Vector::Zero(2), cov,
                                     {{VariableKind::State, 0, 0}, {VariableKind::State, 0, 1}});
            const JointGaussian c = condition(pair, {1}, Vector::Constant(1, 1.0));
            CHECK(c.cov()(0, 0) == doctest::Approx((1.0 - rho * rho) * 4.0).epsilon(1e-13));
        }
    }
}

TEST_CASE("conditioning is order-independent") {
    const ModelMatrices m = small_model();
    const JointGaussian jg = build_joint(m, 2);
    Rng rng(31);
    const Vector y = standard_normal(rng, 4);
    const auto obs = observation_positions(jg, 2);
    REQUIRE(obs.size() == 4);

    const JointGaussian all = condition(jg, obs, y);

    JointGaussian step = jg;
    for (std::size_t k = 0; k < obs.size(); ++k) {
        const Coordinate& target = jg.labels()[static_cast<std::size_t>(obs[k])];
        const Eigen::Index pos = step.position(target.kind, target.time, target.index);
        step = condition(step, {pos}, Vector::Constant(1, y(static_cast<Eigen::Index>(k))));
    }
    REQUIRE(step.dim() == all.dim());
    for (Eigen::Index i = 0; i < all.dim(); ++i) {
        const Coordinate& c = all.labels()[static_cast<std::size_t>(i)];
        const Eigen::Index j = step.position(c.kind, c.time, c.index);
        CHECK(std::abs(step.mean()(j) - all.mean()(i)) < 1e-10);
        for (Eigen::Index k = 0; k < all.dim(); ++k) {
            const Coordinate& ck = all.labels()[static_cast<std::size_t>(k)];
            const Eigen::Index l = step.position(ck.kind, ck.time, ck.index);
            CHECK(std::abs(step.cov()(j, l) - all.cov()(i, k)) < 1e-10);
        }
    }
}

TEST_CASE("joint covariance of Y1, Y2 agrees with simulation") {
    const ModelMatrices m = small_model();
    const JointGaussian jg = build_joint(m, 2);
    const auto y1 = jg.block(VariableKind::Observation, 1);
    const auto y2 = jg.block(VariableKind::Observation, 2);
    Matrix exact(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) exact(i, j) = jg.cov()(y1[static_cast<std::size_t>(i)], y2[static_cast<std::size_t>(j)]);
    // Cov(Y1, Y2) = F (C0 + W) G' F' when m0 is the starting mean.
    const Matrix closed = m.F * (m.G * m.C0 * m.G.transpose() + m.W) * m.G.transpose() * m.F.transpose();
    CHECK((exact - closed).cwiseAbs().maxCoeff() < 1e-12);

    const CholeskyFactor c0 = safe_cholesky(m.C0), w = safe_cholesky(m.W), v = safe_cholesky(m.V);
    Rng rng(1234);
    const int n = 100000;
    Matrix acc = Matrix::Zero(2, 2);
    Vector s1 = Vector::Zero(2), s2 = Vector::Zero(2);
    for (int i = 0; i < n; ++i) {
        const Vector x0 = m.m0 + c0.multiply_lower(standard_normal(rng, 2));
        const Vector x1 = m.G * x0 + w.multiply_lower(standard_normal(rng, 2));
        const Vector obs1 = m.F * x1 + v.multiply_lower(standard_normal(rng, 2));
        const Vector x2 = m.G * x1 + w.multiply_lower(standard_normal(rng, 2));
        const Vector obs2 = m.F * x2 + v.multiply_lower(standard_normal(rng, 2));
        acc += obs1 * obs2.transpose();
        s1 += obs1;
        s2 += obs2;
    }
    const Matrix emp = acc / n - (s1 / n) * (s2 / n).transpose();
    CHECK((emp - exact).norm() / exact.norm() < 0.05);
}

TEST_CASE("log_density of a standard normal pair") {
    const JointGaussian jg(Vector::Zero(2), Matrix::Identity(2, 2),
                           {{VariableKind::State, 0, 0}, {VariableKind::State, 0, 1}});
    Vector x(2);
    x << 1.0, -1.0;
    CHECK(log_density(jg, x) == doctest::Approx(-std::log(2.0 * M_PI) - 1.0).epsilon(1e-14));
}

TEST_CASE("kalman recursions agree with the oracle on random instances") {
    const verify::CheckResult r = verify::oracle_equivalence(100, 20131101);
    INFO(r.detail);
    CHECK(r.passed);
}

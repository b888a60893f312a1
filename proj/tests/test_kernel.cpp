#include <doctest.h>

#include <cmath>
#include <random>

#include "fdlm/kernel.hpp"

using namespace fdlm;

TEST_CASE("ou_kernel closed form") {
    CHECK(ou_kernel(OuParams(2.0, 1.0), 0.3, 0.3) == doctest::Approx(1.0).epsilon(1e-15));
    // 0.5 * e^-1, evaluated independently of the library path
    const double expected = 0.5 / 2.718281828459045235360287;
    CHECK(ou_kernel(OuParams(1.0, 1.0), 0.0, 1.0) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(ou_kernel(OuParams(1.0, 1.0), 0.0, 1.0) == doctest::Approx(0.1839397).epsilon(1e-7));
}

TEST_CASE("OuParams rejects non-positive or non-finite values") {
    CHECK_THROWS_AS(OuParams(0.0, 1.0), ParameterDomainError);
    CHECK_THROWS_AS(OuParams(1.0, -1.0), ParameterDomainError);
    CHECK_THROWS_AS(OuParams(std::nan(""), 1.0), ParameterDomainError);
    CHECK_THROWS_AS(OuParams(1.0, INFINITY), ParameterDomainError);
}

TEST_CASE("Grid validation and constructors") {
    CHECK_THROWS_AS(Grid({}), GridMismatchError);
    CHECK_THROWS_AS(Grid({0.2, 0.2}), GridMismatchError);
    CHECK_THROWS_AS(Grid({0.5, 0.1}), GridMismatchError);
    CHECK_THROWS_AS(Grid({-0.1, 0.5}), GridMismatchError);
    CHECK_THROWS_AS(Grid({0.5, 1.5}), GridMismatchError);

    const Grid u = Grid::uniform(24);
    CHECK(u.size() == 24);
    CHECK(u[0] == 0.0);
    CHECK(u[23] == 1.0);
    CHECK(Grid::uniform(1).size() == 1);

    const Grid dy = Grid::dyadic(2);
    REQUIRE(dy.size() == 4);
    CHECK(dy[0] == 0.25);
    CHECK(dy[3] == 1.0);
    CHECK(dy.find(0.5) == 1);
    CHECK(dy.find(0.3) == -1);
}

TEST_CASE("gram_matrix examples") {
    const Matrix g = gram_matrix(OuParams(2.0, 1.0), Grid({0.0, 1.0}));
    const double e1 = std::exp(-1.0);
    CHECK(g(0, 0) == doctest::Approx(1.0));
    CHECK(g(1, 1) == doctest::Approx(1.0));
    CHECK(g(0, 1) == doctest::Approx(e1));
    CHECK(g(1, 0) == doctest::Approx(e1));

    const OuParams p(3.0, 0.7);
    const Matrix single = gram_matrix(p, Grid({0.4}));
    CHECK(single.rows() == 1);
    CHECK(single(0, 0) == doctest::Approx(3.0 / 1.4));

    const Matrix three = gram_matrix(OuParams(2.0, 1.0), Grid({0.0, 0.5, 1.0}));
    Eigen::SelfAdjointEigenSolver<Matrix> eig(three);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("covariance_functional examples") {
    const OuParams p(2.0, 1.0);
    CHECK(covariance_functional(p, DiscreteMeasure::dirac(0.2), DiscreteMeasure::dirac(0.2)) == doctest::Approx(1.0));

    const DiscreteMeasure zero({{0.1, 0.0}, {0.9, 0.0}});
    CHECK(covariance_functional(p, zero, DiscreteMeasure::dirac(0.5)) == 0.0);

    // (d0 - d1) against itself: g(0,0) - 2 g(0,1) + g(1,1) = 2 - 2/e
    const DiscreteMeasure contrast({{0.0, 1.0}, {1.0, -1.0}});
    CHECK(covariance_functional(p, contrast, contrast) == doctest::Approx(2.0 - 2.0 * std::exp(-1.0)).epsilon(1e-14));

    CHECK_THROWS_AS(DiscreteMeasure({{1.2, 1.0}}), GridMismatchError);
    CHECK_THROWS_AS(DiscreteMeasure({{0.2, NAN}}), ParameterDomainError);
}

TEST_CASE("safe_cholesky examples") {
    SUBCASE("identity") {
        const CholeskyFactor f = safe_cholesky(Matrix::Identity(3, 3));
        CHECK(f.jitter() == 0.0);
        CHECK((f.lower() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("OU gram reconstructs") {
        const Matrix m = gram_matrix(OuParams(2.0, 1.0), Grid({0.0, 1.0}));
        const CholeskyFactor f = safe_cholesky(m);
        CHECK(f.jitter() == 0.0);
        const Matrix L = f.lower();
        CHECK((L * L.transpose() - m).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("rank-deficient matrix needs jitter") {
        const Matrix ones = Matrix::Ones(2, 2);
        const CholeskyFactor f = safe_cholesky(ones);
        CHECK(f.jitter() > 0.0);
        CHECK(f.jitter() <= 1e-6);
        const Matrix L = f.lower();
        CHECK((L * L.transpose() - ones).cwiseAbs().maxCoeff() <= f.jitter() + 1e-14);
    }
    SUBCASE("indefinite matrix fails") {
        Matrix m(2, 2);
        m << 1.0, 0.0, 0.0, -1.0;
        CHECK_THROWS_AS(safe_cholesky(m), SingularMatrixError);
    }
    SUBCASE("non-finite input fails") {
        Matrix m = Matrix::Identity(2, 2);
        m(1, 1) = NAN;
        CHECK_THROWS_AS(safe_cholesky(m), SingularMatrixError);
    }
}

TEST_CASE("kernel invariants on random inputs") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const OuParams p(std::exp(-5.0 + 8.0 * unit(rng)), std::exp(-3.0 + 6.0 * unit(rng)));
        const double u = unit(rng);
        const double v = unit(rng);
        const double k = ou_kernel(p, u, v);
        CHECK(k == ou_kernel(p, v, u));
        CHECK(k > 0.0);
        CHECK(k <= p.variance());
        if (u != v) CHECK(k < p.variance());

        const std::size_t d = 1 + static_cast<std::size_t>(unit(rng) * 8);
        std::vector<double> pts(d);
        for (std::size_t j = 0; j < d; ++j) pts[j] = (static_cast<double>(j) + unit(rng)) / static_cast<double>(d);
        const Grid grid(pts);
        const Matrix gram = gram_matrix(p, grid);
        CHECK((gram - gram.transpose()).cwiseAbs().maxCoeff() == 0.0);
        Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
        CHECK(eig.eigenvalues().minCoeff() >= -1e-10 * p.variance());

        Vector w(static_cast<Eigen::Index>(d)), z(static_cast<Eigen::Index>(d));
        for (Eigen::Index j = 0; j < w.size(); ++j) {
            w(j) = unit(rng) - 0.5;
            z(j) = unit(rng) - 0.5;
        }
        const DiscreteMeasure eta = DiscreteMeasure::on_grid(grid, w);
        const DiscreteMeasure tau = DiscreteMeasure::on_grid(grid, z);
        CHECK(covariance_functional(p, eta, eta) >= -1e-14);
        const double quad = w.dot(gram * z);
        CHECK(covariance_functional(p, eta, tau) == doctest::Approx(quad).epsilon(1e-12).scale(p.variance()));

        const CholeskyFactor f = safe_cholesky(gram);
        const Matrix L = f.lower();
        Matrix shifted = gram;
        shifted.diagonal().array() += f.jitter();
        CHECK((L * L.transpose() - shifted).cwiseAbs().maxCoeff() < 1e-10 * p.variance());
    }
}

TEST_CASE("gram_matrix accepts any covariance kernel") {
    struct Brownian {
        double operator()(double u, double v) const { return std::min(u, v); }
    };
    static_assert(CovarianceKernel<Brownian>);
    const Matrix m = gram_matrix(Brownian{}, Grid({0.25, 0.5}));
    CHECK(m(0, 1) == 0.25);
    CHECK(m(1, 1) == 0.5);
}

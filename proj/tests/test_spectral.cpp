#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dampctl/spectral.hpp"
#include "helpers.hpp"

using namespace dampctl;
using std::numbers::pi;

TEST_CASE("basis: first eigenvalue and ordering") {
    const SpectralBasis b1 = build_basis(1);
    CHECK(b1.eigenvalues(0) == doctest::Approx(-pi * pi).epsilon(1e-15));
    CHECK(b1.eigenvalues(0) == doctest::Approx(-9.8696044011).epsilon(1e-10));

    const SpectralBasis b = build_basis(16);
    for (int n = 1; n < 16; ++n) CHECK(b.eigenvalues(n) < b.eigenvalues(n - 1));
    CHECK(b.eigenvalues.maxCoeff() < 0.0);
}

TEST_CASE("basis: rejects zero modes") { CHECK_THROWS_AS(build_basis(0), std::invalid_argument); }

TEST_CASE("basis: Dirichlet map coefficients against quadrature") {
    const SpectralBasis b = build_basis(8);
    for (int n = 1; n <= 8; ++n) {
        auto phi = [n](double x) { return std::sqrt(2.0) * std::sin(n * pi * x); };
        const double d0 = testing::simpson([&](double x) { return (1.0 - x) * phi(x); }, 0.0, 1.0);
        const double d1 = testing::simpson([&](double x) { return x * phi(x); }, 0.0, 1.0);
        CHECK(std::abs(b.dmap(n - 1, 0) - d0) < 1e-10);
        CHECK(std::abs(b.dmap(n - 1, 1) - d1) < 1e-10);
    }
    // second mode, symbolic values
    CHECK(b.dmap(1, 0) == doctest::Approx(std::sqrt(2.0) / (2 * pi)).epsilon(1e-14));
    CHECK(b.dmap(1, 1) == doctest::Approx(-std::sqrt(2.0) / (2 * pi)).epsilon(1e-14));
    for (int n = 2; n <= 8; n += 2) CHECK(std::abs(b.dmap(n - 1, 0) + b.dmap(n - 1, 1)) < 1e-16);
}

TEST_CASE("dirichlet_map examples") {
    const SpectralBasis b = build_basis(8);
    CHECK(dirichlet_map({1.0, 0.0}, b).coeffs(0) == doctest::Approx(0.45015815807855).epsilon(1e-12));
    CHECK(dirichlet_map({0.0, 0.0}, b).coeffs.norm() == 0.0);
    CHECK(std::abs(dirichlet_map({1.0, 1.0}, b).coeffs(1)) < 1e-16);
}

TEST_CASE("apply_AD examples") {
    const SpectralBasis b = build_basis(8);
    const ModalVector ad = apply_AD({1.0, 0.0}, b);
    CHECK(ad.coeffs(0) == doctest::Approx(-std::sqrt(2.0) * pi).epsilon(1e-13));
    CHECK(ad.coeffs(0) == doctest::Approx(-4.44288293816).epsilon(1e-11));
    CHECK(ad.space_tag == -1.0);
    CHECK(apply_AD({0.0, 0.0}, b).coeffs.norm() == 0.0);
    const ModalVector right = apply_AD({0.0, 1.0}, b);
    for (int n = 1; n <= 8; ++n) CHECK((right.coeffs(n - 1) > 0) == (n % 2 == 0));
}

TEST_CASE("apply_fractional") {
    const SpectralBasis b = build_basis(8);
    std::mt19937_64 rng(11);
    const ModalVector v{testing::random_vector(rng, 8), 0.0};
    CHECK((apply_fractional(0.0, v, b).coeffs - v.coeffs).norm() == 0.0);
    const ModalVector back = apply_fractional(-1.0, apply_fractional(1.0, v, b), b);
    CHECK((back.coeffs - v.coeffs).cwiseAbs().maxCoeff() < 1e-13 * v.coeffs.cwiseAbs().maxCoeff());
    CHECK(back.space_tag == doctest::Approx(0.0));
    CHECK(apply_fractional(0.5, v, b).space_tag == doctest::Approx(-0.5));

    ModalVector e1{Eigen::VectorXd::Unit(8, 0), 0.0};
    CHECK(apply_fractional(0.5, apply_fractional(0.5, e1, b), b).coeffs(0) == doctest::Approx(pi * pi).epsilon(1e-14));

    for (double al : {-0.75, 0.25, 0.6})
        for (double be : {-0.3, 0.5, 1.0}) {
            const Eigen::VectorXd lhs = apply_fractional(al, apply_fractional(be, v, b), b).coeffs;
            const Eigen::VectorXd rhs = apply_fractional(al + be, v, b).coeffs;
            CHECK(((lhs - rhs).array().abs() <= 1e-13 * (1.0 + rhs.array().abs())).all());
        }
}

TEST_CASE("adjoint identity for AD") {
    const SpectralBasis b = build_basis(8);
    std::mt19937_64 rng(7);
    for (int k = 0; k < 100; ++k) {
        const BoundaryVector u = testing::random_vector(rng, 2);
        const Eigen::VectorXd p = testing::random_vector(rng, 8);
        const double lhs = apply_AD(u, b).coeffs.dot(p);
        const double rhs = u.dot(adjoint_AD(p, b));
        CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(lhs)));
    }
    CHECK(adjoint_AD(Eigen::VectorXd::Zero(8), b).norm() == 0.0);
    // pairing AD(1,0) with itself
    const ModalVector p = apply_AD({1.0, 0.0}, b);
    CHECK(adjoint_AD(p, b)(0) == doctest::Approx(p.coeffs.squaredNorm()).epsilon(1e-14));
}

TEST_CASE("dual norm weights by lambda^-2") {
    const SpectralBasis b = build_basis(3);
    const Eigen::Vector3d c(1.0, 2.0, 3.0);
    double expect = 0.0;
    for (int n = 0; n < 3; ++n) expect += c(n) * c(n) / std::pow(b.eigenvalues(n), 2);
    CHECK(dual_norm_sq(c, b) == doctest::Approx(expect).epsilon(1e-15));
}

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dampctl/forward.hpp"
#include "helpers.hpp"

using namespace dampctl;
using std::numbers::pi;

namespace {

SmoothControl test_control() {
    SmoothControl u;
    u.a = {0.2, -0.1};
    u.b = {0.3, 0.4};
    u.c = {0.15, -0.2};
    u.omega = {2.0, 3.0};
    u.phi = {0.3, 1.1};
    return u;
}

double route_gap(int M) {
    const KernelTable t = solve_Z(build_basis(6), make_grid(0.5, M));
    std::mt19937_64 rng(21);
    const SmoothControl u = test_control();
    const StateSnapshot s = testing::smooth_state(rng, 6, M / 8, t.grid.dt);
    return (solve_volterra(s, u.sample(t.grid, M / 8, M), t).v - solve_voc(s, u.sample(t.grid, M / 8, M), t).v)
        .cwiseAbs()
        .maxCoeff();
}

}  // namespace

TEST_CASE("hat_y from initial data") {
    const SpectralBasis b = build_basis(4);
    const ModalVector zero{Eigen::VectorXd::Zero(4), 0.0}, e1{Eigen::VectorXd::Unit(4, 0), 0.0};
    CHECK((hat_y_from_initial(zero, e1, BoundaryVector::Zero(), b).coeffs - e1.coeffs).norm() == 0.0);
    CHECK(hat_y_from_initial(e1, zero, BoundaryVector::Zero(), b).coeffs(0) == doctest::Approx(-1.0 + pi * pi));
    CHECK(hat_y_from_initial(e1, zero, BoundaryVector::Zero(), b).space_tag == -1.0);

    std::mt19937_64 rng(5);
    const ModalVector v0{testing::random_vector(rng, 4, 3), 0.0}, v1{testing::random_vector(rng, 4, 3), 0.0};
    const BoundaryVector tr(0.4, -0.7);
    const Eigen::VectorXd y = hat_y_from_initial(v0, v1, tr, b).coeffs;
    for (int n = 0; n < 4; ++n) {
        const double dn = b.dmap(n, 0) * tr(0) + b.dmap(n, 1) * tr(1);
        CHECK(y(n) == doctest::Approx(v1.coeffs(n) - v0.coeffs(n) - b.lambda(n) * (v0.coeffs(n) - dn)));
    }
}

TEST_CASE("memory functional") {
    const double dt = 0.01;
    const int k = 50;
    CHECK(memory_functional(Eigen::MatrixXd::Zero(3, k + 1), dt).norm() == 0.0);
    const Eigen::Vector3d c(1.0, -2.0, 0.5);
    const double t = k * dt;
    const Eigen::MatrixXd constant = c.replicate(1, k + 1);
    CHECK((memory_functional(constant, dt) - c * (1 - std::exp(-t))).norm() < 1e-5);
    Eigen::MatrixXd decaying(3, k + 1);
    for (int j = 0; j <= k; ++j) decaying.col(j) = std::exp(-j * dt) * c;
    CHECK((memory_functional(decaying, dt) - c * t * std::exp(-t)).norm() < 1e-14);
}

TEST_CASE("solve_volterra and solve_voc: trivial data") {
    const KernelTable t = solve_Z(build_basis(4), make_grid(0.5, 32));
    const StateSnapshot z = zero_state(4, 8);
    const ControlSignal u0 = ControlSignal::Zero(2, 25);
    CHECK(solve_volterra(z, u0, t).v.norm() == 0.0);
    CHECK(solve_voc(z, u0, t).v.norm() == 0.0);

    StateSnapshot s = zero_state(4, 8);
    s.v_hat(0) = 1.0;
    const Trajectory voc = solve_voc(s, u0, t);
    const Trajectory vol = solve_volterra(s, u0, t);
    for (int l = 0; l <= 24; ++l) {
        CHECK(voc.v(0, l) == t.Z(0, l));
        CHECK(std::abs(vol.v(0, l) - t.Z(0, l)) < 1e-4);
    }
    CHECK(voc.v.bottomRows(3).norm() == 0.0);
    CHECK(vol.v.col(0) == s.v_hat);
}

TEST_CASE("solve_volterra and solve_voc agree at second order") {
    const double e1 = route_gap(64), e2 = route_gap(128);
    CHECK(e2 < 1e-4);
    CHECK(std::log2(e1 / e2) > 1.5);
    CHECK(std::log2(e1 / e2) < 2.5);
}

TEST_CASE("forward map is linear") {
    const KernelTable t = solve_Z(build_basis(5), make_grid(0.5, 64));
    std::mt19937_64 rng(9);
    const StateSnapshot s1 = testing::smooth_state(rng, 5, 8, t.grid.dt);
    const StateSnapshot s2 = testing::smooth_state(rng, 5, 8, t.grid.dt);
    const ControlSignal u1 = testing::random_control(rng, 57), u2 = testing::random_control(rng, 57);
    const double a = 0.7, b = -1.9;
    StateSnapshot mix = s1;
    mix.v_hat = a * s1.v_hat + b * s2.v_hat;
    mix.xi = a * s1.xi + b * s2.xi;
    mix.y_hat = a * s1.y_hat + b * s2.y_hat;
    for (auto solve : {solve_volterra, solve_voc}) {
        const Eigen::MatrixXd lhs = solve(mix, a * u1 + b * u2, t, -1).v;
        const Eigen::MatrixXd rhs = a * solve(s1, u1, t, -1).v + b * solve(s2, u2, t, -1).v;
        CHECK((lhs - rhs).norm() <= 1e-12 * rhs.norm());
        StateSnapshot twice = s1;
        twice.v_hat *= 2, twice.xi *= 2, twice.y_hat *= 2;
        CHECK((solve(twice, 2 * u1, t, -1).v - 2 * solve(s1, u1, t, -1).v).norm() <= 1e-12 * solve(s1, u1, t, -1).v.norm());
    }
}

TEST_CASE("segment validation") {
    const KernelTable t = solve_Z(build_basis(4), make_grid(0.5, 32));
    StateSnapshot s = zero_state(4, 8);
    CHECK_THROWS(solve_voc(s, ControlSignal::Zero(2, 5), t));  // control too short
    s.xi.resize(4, 3);
    CHECK_THROWS(solve_volterra(s, ControlSignal::Zero(2, 25), t));
    CHECK_THROWS(solve_voc(zero_state(3, 8), ControlSignal::Zero(2, 25), t));
}

TEST_CASE("damped wave: free mode against the matrix exponential") {
    const SpectralBasis b = build_basis(3);
    const TimeGrid g = make_grid(0.5, 256);
    const ModalVector v0{Eigen::VectorXd::Unit(3, 0), 0.0}, v1{Eigen::VectorXd::Zero(3), 0.0};
    const Trajectory w = simulate_damped_wave(v0, v1, SmoothControl{}, b, g);
    const double lam = b.lambda(0);
    Eigen::Matrix2d m;
    m << 0.0, 1.0, lam, lam;  // (a, a')' for a'' = lambda (a + a')
    double err = 0.0;
    for (int j = 0; j <= 256; ++j) err = std::max(err, std::abs(w.v(0, j) - (m * g.node(j)).exp()(0, 0)));
    CHECK(err < 1e-4);
    CHECK(w.v.bottomRows(2).norm() == 0.0);

    const ModalVector zero{Eigen::VectorXd::Zero(3), 0.0};
    CHECK(simulate_damped_wave(zero, zero, SmoothControl{}, b, g).v.norm() == 0.0);
}

TEST_CASE("damped wave against the memory form") {
    const SpectralBasis b = build_basis(6);
    const SmoothControl u = test_control();
    auto gap = [&](int M) {
        const KernelTable t = solve_Z(b, make_grid(0.5, M));
        std::mt19937_64 rng(4);
        const Eigen::VectorXd w0 = testing::random_vector(rng, 6, 4), w1 = testing::random_vector(rng, 6, 4);
        const ModalVector v0{w0 + dirichlet_map(u.value(0), b).coeffs, 0.0};
        const ModalVector v1{w1 + dirichlet_map(u.d1(0), b).coeffs, 0.0};
        StateSnapshot s;
        s.v_hat = v0.coeffs;
        s.xi = v0.coeffs;
        s.y_hat = hat_y_from_initial(v0, v1, u.value(0), b).coeffs;
        const Trajectory vol = solve_volterra(s, u.sample(t.grid, 0, M), t);
        return (simulate_damped_wave(v0, v1, u, b, t.grid).v - vol.v).cwiseAbs().maxCoeff();
    };
    const double e1 = gap(64), e2 = gap(128);
    CHECK(e2 < 5e-4);
    CHECK(e1 / e2 > 3.0);
}

TEST_CASE("extend_state") {
    const KernelTable t = solve_Z(build_basis(4), make_grid(0.5, 64));
    const double dt = t.grid.dt;
    std::mt19937_64 rng(12);
    const StateSnapshot s = testing::smooth_state(rng, 4, 8, dt);
    const ControlSignal u = testing::random_control(rng, 57);

    const StateSnapshot same = extend_state(s, u, 8, t);
    CHECK(same.xi == s.xi);
    CHECK(same.v_hat == s.v_hat);
    CHECK(same.y_hat == s.y_hat);

    const Trajectory traj = solve_volterra(s, u, t);
    const StateSnapshot s20 = extend_state(s, traj, 20, dt);
    const StateSnapshot s40_direct = extend_state(s, traj, 40, dt);
    const Trajectory tail{20, traj.v.rightCols(traj.v.cols() - 12)};
    const StateSnapshot s40_chained = extend_state(s20, tail, 40, dt);
    CHECK(s40_direct.xi == s40_chained.xi);
    CHECK(s40_direct.v_hat == s40_chained.v_hat);
    CHECK((s40_direct.y_hat - s40_chained.y_hat).norm() <= 1e-15 * s.y_hat.norm());
    CHECK(s20.y_hat.norm() == doctest::Approx(std::exp(-12 * dt) * s.y_hat.norm()).epsilon(1e-14));
    CHECK(s20.xi.cols() == 21);
    CHECK_THROWS(extend_state(s, u, 4, t));
}

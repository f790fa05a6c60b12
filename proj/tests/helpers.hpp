#ifndef DAMPCTL_TEST_HELPERS_HPP
#define DAMPCTL_TEST_HELPERS_HPP

#include <cmath>
#include <functional>
#include <random>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "dampctl/forward.hpp"

namespace testing {

/// Composite Simpson rule with n (even) subintervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 10000) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

/// z(t) from (z, w)' = [[lam+1, -1], [1, -1]] (z, w), z(0) = 1, w(0) = 0, by Eigen's matrix exponential.
inline double z_expm(double lam, double t) {
    Eigen::Matrix2d m;
    m << lam + 1.0, -1.0, 1.0, -1.0;
    return (m * t).exp()(0, 0);
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, int n, double decay_power = 0.0) {
    std::normal_distribution<double> d;
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = d(rng) / std::pow(i + 1.0, decay_power);
    return v;
}

/// Smooth compatible state: xi_n(s) = (a_n + b_n s + c_n sin(2 s + p_n)) / n^3.
inline dampctl::StateSnapshot smooth_state(std::mt19937_64& rng, int n_modes, int tau_index, double dt) {
    const Eigen::VectorXd a = random_vector(rng, n_modes, 3), b = random_vector(rng, n_modes, 3),
                          c = random_vector(rng, n_modes, 3), p = random_vector(rng, n_modes);
    dampctl::StateSnapshot s;
    s.tau_index = tau_index;
    s.xi.resize(n_modes, tau_index + 1);
    for (int j = 0; j <= tau_index; ++j) {
        const double t = j * dt;
        s.xi.col(j) = a + b * t + c.cwiseProduct((2.0 * t + p.array()).sin().matrix());
    }
    s.v_hat = s.xi.col(tau_index);
    s.y_hat = random_vector(rng, n_modes, 3);
    return s;
}

inline dampctl::ControlSignal random_control(std::mt19937_64& rng, int nodes) {
    std::normal_distribution<double> d;
    dampctl::ControlSignal u(2, nodes);
    for (int j = 0; j < nodes; ++j) u.col(j) << d(rng), d(rng);
    return u;
}

}  // namespace testing

#endif

#include "dampctl/forward.hpp"

#include <cmath>
#include <stdexcept>

namespace dampctl {

StateSnapshot zero_state(int n_modes, int tau_index) {
    StateSnapshot s;
    s.tau_index = tau_index;
    s.v_hat = Eigen::VectorXd::Zero(n_modes);
    s.xi = Eigen::MatrixXd::Zero(n_modes, tau_index + 1);
    s.y_hat = Eigen::VectorXd::Zero(n_modes);
    return s;
}

BoundaryVector SmoothControl::value(double t) const {
    BoundaryVector u;
    for (int k = 0; k < 2; ++k) u(k) = a[k] + b[k] * t + c[k] * std::sin(omega[k] * t + phi[k]);
    return u;
}

BoundaryVector SmoothControl::d1(double t) const {
    BoundaryVector u;
    for (int k = 0; k < 2; ++k) u(k) = b[k] + c[k] * omega[k] * std::cos(omega[k] * t + phi[k]);
    return u;
}

BoundaryVector SmoothControl::d2(double t) const {
    BoundaryVector u;
    for (int k = 0; k < 2; ++k) u(k) = -c[k] * omega[k] * omega[k] * std::sin(omega[k] * t + phi[k]);
    return u;
}

ControlSignal SmoothControl::sample(const TimeGrid& grid, int first, int last) const {
    ControlSignal u(2, last - first + 1);
    for (int j = first; j <= last; ++j) u.col(j - first) = value(grid.node(j));
    return u;
}

ModalVector hat_y_from_initial(const ModalVector& v0, const ModalVector& v1, const BoundaryVector& u_trace,
                               const SpectralBasis& basis) {
    const Eigen::VectorXd interior = v0.coeffs - dirichlet_map(u_trace, basis).coeffs;
    return {v1.coeffs - v0.coeffs - basis.eigenvalues.cwiseProduct(interior), -1.0};
}

Eigen::VectorXd memory_functional(const Eigen::MatrixXd& xi, double dt) {
    const int k = static_cast<int>(xi.cols()) - 1;
    Eigen::VectorXd m = Eigen::VectorXd::Zero(xi.rows());
    if (k <= 0) return m;
    const Eigen::VectorXd w = trapezoid_weights(k, dt);
    for (int i = 0; i <= k; ++i) m += w(i) * std::exp(-(k - i) * dt) * xi.col(i);
    return m;
}

Eigen::VectorXd effective_seed(const StateSnapshot& s, double dt) {
    return s.y_hat - memory_functional(s.xi, dt);
}

namespace {

int check_segment(const StateSnapshot& s, const ControlSignal& u, const KernelTable& t, int n_panels) {
    const int M = t.n_steps();
    if (s.tau_index < 0 || s.tau_index > M) throw std::invalid_argument("state node outside the grid");
    if (s.n_modes() != t.n_modes()) throw std::invalid_argument("state and kernel table disagree on n_modes");
    if (s.xi.cols() != s.tau_index + 1) throw std::invalid_argument("history length does not match tau");
    const int L = n_panels < 0 ? M - s.tau_index : n_panels;
    if (s.tau_index + L > M) throw std::invalid_argument("segment exceeds the kernel table");
    if (u.cols() < L + 1) throw std::invalid_argument("control shorter than the segment");
    return L;
}

// Per-mode forcing c e^{-(s-tau)} - lambda (d . u(s)) on the segment nodes.
Eigen::VectorXd forcing(const KernelTable& t, int n, double c, const ControlSignal& u, int L) {
    const double lam = t.basis.lambda(n);
    const Eigen::RowVector2d d = t.basis.dmap.row(n);
    Eigen::VectorXd g(L + 1);
    for (int l = 0; l <= L; ++l) g(l) = c * std::exp(-l * t.grid.dt) - lam * (d * u.col(l))(0);
    return g;
}

}  // namespace

Trajectory solve_volterra(const StateSnapshot& s, const ControlSignal& u, const KernelTable& t, int n_panels) {
    const int L = check_segment(s, u, t, n_panels);
    const int nm = t.n_modes();
    const Eigen::VectorXd c = effective_seed(s, t.grid.dt);
    Trajectory out{s.tau_index, Eigen::MatrixXd(nm, L + 1)};
    for (int n = 0; n < nm; ++n) {
        const double diag = 1.0 - t.pN.near(n, 0);
        if (std::abs(diag) < 1e-12) throw std::runtime_error("solve_volterra: implicit step coefficient vanishes");
        const Eigen::VectorXd g = forcing(t, n, c(n), u, L);
        Eigen::VectorXd v(L + 1);
        v(0) = s.v_hat(n);
        for (int l = 1; l <= L; ++l) {
            double f = t.E(n, l) * s.v_hat(n);
            for (int i = 0; i < l; ++i) f += t.pE.near(n, l - i - 1) * g(i + 1) + t.pE.far(n, l - i - 1) * g(i);
            double mem = t.pN.far(n, 0) * v(l - 1);
            for (int i = 0; i < l - 1; ++i) mem += t.pN.near(n, l - i - 1) * v(i + 1) + t.pN.far(n, l - i - 1) * v(i);
            v(l) = (f + mem) / diag;
        }
        out.v.row(n) = v.transpose();
    }
    return out;
}

Trajectory solve_voc(const StateSnapshot& s, const ControlSignal& u, const KernelTable& t, int n_panels) {
    const int L = check_segment(s, u, t, n_panels);
    const int nm = t.n_modes();
    const Eigen::VectorXd c = effective_seed(s, t.grid.dt);
    Trajectory out{s.tau_index, Eigen::MatrixXd(nm, L + 1)};
    for (int n = 0; n < nm; ++n) {
        const Eigen::VectorXd g = forcing(t, n, c(n), u, L);
        for (int l = 0; l <= L; ++l) {
            double acc = t.Z(n, l) * s.v_hat(n);
            for (int i = 0; i < l; ++i) acc += t.pZ.near(n, l - i - 1) * g(i + 1) + t.pZ.far(n, l - i - 1) * g(i);
            out.v(n, l) = acc;
        }
    }
    return out;
}

Trajectory simulate_damped_wave(const ModalVector& v0, const ModalVector& v1, const SmoothControl& u,
                                const SpectralBasis& basis, const TimeGrid& grid) {
    const int nm = basis.n_modes;
    const int M = grid.n_steps;
    const double dt = grid.dt;
    Trajectory out{0, Eigen::MatrixXd(nm, M + 1)};
    for (int n = 0; n < nm; ++n) {
        const double lam = basis.lambda(n);
        const Eigen::RowVector2d d = basis.dmap.row(n);
        auto du = [&](double t) { return (d * u.value(t))(0); };
        auto du2 = [&](double t) { return (d * u.d2(t))(0); };
        double w = v0.coeffs(n) - du(0.0);
        double wd = v1.coeffs(n) - (d * u.d1(0.0))(0);
        double a = lam * (w + wd) - du2(0.0);
        out.v(n, 0) = v0.coeffs(n);
        const double lhs = 1.0 - lam * (0.25 * dt * dt + 0.5 * dt);
        for (int j = 1; j <= M; ++j) {
            const double t1 = grid.node(j);
            const double pw = w + dt * wd + 0.25 * dt * dt * a;
            const double pv = wd + 0.5 * dt * a;
            const double a1 = (lam * (pw + pv) - du2(t1)) / lhs;
            w = pw + 0.25 * dt * dt * a1;
            wd = pv + 0.5 * dt * a1;
            a = a1;
            out.v(n, j) = w + du(t1);
        }
    }
    return out;
}

StateSnapshot extend_state(const StateSnapshot& s, const Trajectory& traj, int k1, double dt) {
    if (k1 < s.tau_index) throw std::invalid_argument("extend_state: target before tau");
    const int steps = k1 - s.tau_index;
    if (steps >= traj.v.cols()) throw std::invalid_argument("extend_state: trajectory too short");
    StateSnapshot out;
    out.tau_index = k1;
    out.v_hat = traj.v.col(steps);
    out.xi.resize(s.xi.rows(), k1 + 1);
    out.xi.leftCols(s.tau_index + 1) = s.xi;
    // v(tau) from the trajectory overrides xi(tau); they coincide for compatible states.
    if (steps > 0) out.xi.rightCols(steps + 1) = traj.v.leftCols(steps + 1);
    out.y_hat = std::exp(-steps * dt) * s.y_hat;
    return out;
}

StateSnapshot extend_state(const StateSnapshot& s, const ControlSignal& u, int k1, const KernelTable& table) {
    if (k1 < s.tau_index) throw std::invalid_argument("extend_state: target before tau");
    const Trajectory traj = solve_volterra(s, u, table, k1 - s.tau_index);
    return extend_state(s, traj, k1, table.grid.dt);
}

}  // namespace dampctl

#include "dampctl/control.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace dampctl {

Eigen::VectorXd stack(const Eigen::MatrixXd& m) {
    return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

Eigen::MatrixXd unstack(const Eigen::VectorXd& v, int rows) {
    return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, v.size() / rows);
}

OperatorAssembly assemble(const KernelTable& table, int tau_index) {
    const int M = table.n_steps();
    if (tau_index < 0 || tau_index > M) throw std::invalid_argument("assemble: tau outside the grid");
    OperatorAssembly a;
    a.table = &table;
    a.tau_index = tau_index;
    a.L = M - tau_index;
    a.n_modes = table.n_modes();
    const int L = a.L;
    const int nm = a.n_modes;
    a.w = trapezoid_weights(L, table.grid.dt);
    a.wv.resize((L + 1) * nm);
    a.wu.resize((L + 1) * 2);
    for (int l = 0; l <= L; ++l) {
        a.wv.segment(l * nm, nm).setConstant(a.w(l));
        a.wu.segment(l * 2, 2).setConstant(a.w(l));
    }
    a.Lambda = Eigen::MatrixXd::Zero((L + 1) * nm, (L + 1) * 2);
    for (int n = 0; n < nm; ++n) {
        const double lam = table.basis.lambda(n);
        const Eigen::RowVector2d d = table.basis.dmap.row(n);
        for (int l = 1; l <= L; ++l)
            for (int i = 0; i < l; ++i) {
                // -K(t_l - s) u(s) with u piecewise linear on panel [s_i, s_{i+1}]
                const double near = table.pZ.near(n, l - i - 1);
                const double far = table.pZ.far(n, l - i - 1);
                a.Lambda.block(l * nm + n, 2 * (i + 1), 1, 2) -= lam * near * d;
                a.Lambda.block(l * nm + n, 2 * i, 1, 2) -= lam * far * d;
            }
    }
    if (L > 0) {
        Eigen::MatrixXd G = a.Lambda.transpose() * a.wv.asDiagonal() * a.Lambda;
        G.diagonal() += a.wu;
        a.control_system.compute(G);
        if (a.control_system.info() != Eigen::Success) throw std::runtime_error("assemble: factorization failed");
    }
    return a;
}

double field_inner(const OperatorAssembly& a, const Eigen::MatrixXd& f, const Eigen::MatrixXd& g) {
    return (f.cwiseProduct(g).colwise().sum().transpose()).dot(a.w);
}

double control_inner(const OperatorAssembly& a, const ControlSignal& u, const ControlSignal& z) {
    return (u.cwiseProduct(z).colwise().sum().transpose()).dot(a.w);
}

Eigen::MatrixXd apply_Gamma(const OperatorAssembly& a, const Eigen::VectorXd& v_hat, const Eigen::MatrixXd& xi) {
    const KernelTable& t = *a.table;
    const Eigen::VectorXd m = memory_functional(xi, t.grid.dt);
    Eigen::MatrixXd out(a.n_modes, a.L + 1);
    for (int l = 0; l <= a.L; ++l)
        out.col(l) = t.Z.col(l).cwiseProduct(v_hat) - t.Zexp.col(l).cwiseProduct(m);
    return out;
}

Eigen::MatrixXd apply_Lambda(const OperatorAssembly& a, const ControlSignal& u) {
    return unstack(a.Lambda * stack(u), a.n_modes);
}

ControlSignal apply_Lambda_star(const OperatorAssembly& a, const Eigen::MatrixXd& v) {
    if (a.L == 0) return ControlSignal::Zero(2, 1);
    const Eigen::VectorXd r = (a.Lambda.transpose() * a.wv.cwiseProduct(stack(v))).cwiseQuotient(a.wu);
    return unstack(r, 2);
}

Eigen::MatrixXd build_h(const OperatorAssembly& a, const StateSnapshot& s) {
    if (s.tau_index != a.tau_index) throw std::invalid_argument("build_h: state not at the assembly's tau");
    Eigen::MatrixXd h = apply_Gamma(a, s.v_hat, s.xi);
    const KernelTable& t = *a.table;
    for (int l = 0; l <= a.L; ++l) h.col(l) += t.Zexp.col(l).cwiseProduct(s.y_hat);
    return h;
}

namespace {

// u = -(I + Lambda* Lambda)^{-1} Lambda* h in the weighted setting.
ControlSignal optimal_control(const OperatorAssembly& a, const Eigen::MatrixXd& h) {
    if (a.L == 0) return ControlSignal::Zero(2, 1);
    const Eigen::VectorXd rhs = a.Lambda.transpose() * a.wv.cwiseProduct(stack(h));
    return unstack(-a.control_system.solve(rhs), 2);
}

double cost_from(const OperatorAssembly& a, const Eigen::MatrixXd& v, const ControlSignal& u) {
    return field_inner(a, v, v) + control_inner(a, u, u);
}

ControlSignal gradient_from(const OperatorAssembly& a, const Eigen::MatrixXd& h, const ControlSignal& u) {
    return 2.0 * (u + apply_Lambda_star(a, h + apply_Lambda(a, u)));
}

}  // namespace

Eigen::MatrixXd apply_H(const OperatorAssembly& a, const Eigen::MatrixXd& g) {
    // phi = g + Lambda psi,  psi = -Lambda* phi  =>  (I + Lambda* Lambda) psi = -Lambda* g
    const ControlSignal psi = optimal_control(a, g);
    return g + apply_Lambda(a, psi);
}

Eigen::MatrixXd apply_H_direct(const OperatorAssembly& a, const Eigen::MatrixXd& g) {
    if (a.L == 0) return g;
    const Eigen::MatrixXd WL = a.wv.asDiagonal() * a.Lambda;
    Eigen::MatrixXd S = WL * a.wu.cwiseInverse().asDiagonal() * WL.transpose();
    S.diagonal() += a.wv;
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success) throw std::runtime_error("apply_H_direct: factorization failed");
    return unstack(llt.solve(a.wv.cwiseProduct(stack(g))), a.n_modes);
}

OptimalSolution solve_optimal(const OperatorAssembly& a, const StateSnapshot& s, Route route) {
    const Eigen::MatrixXd h = build_h(a, s);
    OptimalSolution sol;
    if (route == Route::Field) {
        sol.v_plus = apply_H_direct(a, h);
        sol.u_plus = -apply_Lambda_star(a, sol.v_plus);
    } else {
        sol.u_plus = optimal_control(a, h);
        sol.v_plus = h + apply_Lambda(a, sol.u_plus);
    }
    sol.W = cost_from(a, h + apply_Lambda(a, sol.u_plus), sol.u_plus);
    const ControlSignal g = gradient_from(a, h, sol.u_plus);
    sol.residual = std::sqrt(control_inner(a, g, g));
    return sol;
}

double evaluate_cost(const OperatorAssembly& a, const StateSnapshot& s, const ControlSignal& u) {
    const Eigen::MatrixXd v = build_h(a, s) + apply_Lambda(a, u);
    return cost_from(a, v, u);
}

double value_function(const OperatorAssembly& a, const StateSnapshot& s) {
    const Eigen::MatrixXd h = build_h(a, s);
    return field_inner(a, apply_H(a, h), h);
}

ControlSignal cost_gradient(const OperatorAssembly& a, const StateSnapshot& s, const ControlSignal& u) {
    return gradient_from(a, build_h(a, s), u);
}

Spectrum field_system_spectrum(const OperatorAssembly& a) {
    if (a.L == 0) return {1.0, 1.0};
    const Eigen::VectorXd su = a.wu.cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd B = a.wv.cwiseSqrt().asDiagonal() * a.Lambda * su.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B.transpose() * B, Eigen::EigenvaluesOnly);
    Spectrum sp;
    sp.max_eig = 1.0 + es.eigenvalues().maxCoeff();
    // the field space is larger than the control space, so 1 is always attained
    sp.min_eig = B.rows() > B.cols() ? 1.0 : 1.0 + es.eigenvalues().minCoeff();
    return sp;
}

}  // namespace dampctl

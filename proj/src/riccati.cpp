#include "dampctl/riccati.hpp"

#include <cmath>
#include <stdexcept>

namespace dampctl {

bool in_generator_domain(const StateSnapshot& s, double tol) {
    if (s.xi.cols() != s.tau_index + 1) return false;
    const double scale = 1.0 + s.v_hat.norm();
    return (s.xi.col(s.tau_index) - s.v_hat).norm() <= tol * scale;
}

namespace {

// d/ds of equally spaced samples: central inside, second-order one-sided at the ends.
Eigen::MatrixXd differentiate(const Eigen::MatrixXd& f, double dt) {
    const int n = static_cast<int>(f.cols());
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(f.rows(), n);
    if (n == 2) {
        d.col(0) = d.col(1) = (f.col(1) - f.col(0)) / dt;
    } else if (n >= 3) {
        for (int i = 1; i < n - 1; ++i) d.col(i) = (f.col(i + 1) - f.col(i - 1)) / (2 * dt);
        d.col(0) = (-3 * f.col(0) + 4 * f.col(1) - f.col(2)) / (2 * dt);
        d.col(n - 1) = (3 * f.col(n - 1) - 4 * f.col(n - 2) + f.col(n - 3)) / (2 * dt);
    }
    return d;
}

Eigen::VectorXd differentiate(const Eigen::VectorXd& f, double dt) {
    return differentiate(Eigen::MatrixXd(f.transpose()), dt).row(0).transpose();
}

}  // namespace

GeneratorImage apply_generator(const StateSnapshot& s, const KernelTable& table) {
    if (!in_generator_domain(s)) throw std::invalid_argument("apply_generator: state outside the discrete domain");
    const double dt = table.grid.dt;
    const Eigen::VectorXd m = memory_functional(s.xi, dt);
    GeneratorImage g;
    g.dv = (table.basis.eigenvalues.array() + 1.0).matrix().cwiseProduct(s.v_hat) - m + s.y_hat;
    g.dxi = differentiate(s.xi, dt);
    g.dy = -s.y_hat;
    return g;
}

Eigen::VectorXd state_coordinates(const StateSnapshot& s, double dt) {
    const int nm = s.n_modes();
    Eigen::VectorXd x(2 * nm);
    x.head(nm) = s.v_hat;
    x.tail(nm) = effective_seed(s, dt);
    return x;
}

Eigen::VectorXd coordinate_rate(const StateSnapshot& s, const GeneratorImage& g, double dt) {
    const int nm = s.n_modes();
    Eigen::VectorXd r(2 * nm);
    r.head(nm) = g.dv;
    r.tail(nm) = g.dy - memory_functional(g.dxi, dt) - std::exp(-s.tau_index * dt) * s.xi.col(0);
    return r;
}

double state_norm_sq(const StateSnapshot& s, const SpectralBasis& basis, double dt) {
    const Eigen::VectorXd w = trapezoid_weights(s.tau_index, dt);
    return s.v_hat.squaredNorm() + s.xi.colwise().squaredNorm().dot(w.transpose()) + dual_norm_sq(s.y_hat, basis);
}

RiccatiTables::RiccatiTables(const KernelTable& table) : table_(&table) {
    const int M = table.n_steps();
    const int nm = table.n_modes();
    const double dt = table.grid.dt;
    const Eigen::VectorXd& lam = table.basis.eigenvalues;
    const Eigen::MatrixXd& dm = table.basis.dmap;

    // C[n](l, i): weight of g(s_i) in int_0^{t_l} Z_n(t_l - s) g(s) ds
    std::vector<Eigen::MatrixXd> C(nm, Eigen::MatrixXd::Zero(M + 1, M + 1));
    for (int n = 0; n < nm; ++n)
        for (int l = 1; l <= M; ++l)
            for (int i = 0; i <= l; ++i) {
                double c = 0.0;
                if (i >= 1) c += table.pZ.near(n, l - i);
                if (i <= l - 1) c += table.pZ.far(n, l - i - 1);
                C[n](l, i) = c;
            }

    std::vector<Eigen::MatrixXd> U(nm, Eigen::MatrixXd::Zero(M + 1, M + 1));
    pi_.assign(M + 1, Eigen::MatrixXd::Zero(2 * nm, 2 * nm));
    gain_.assign(M + 1, Eigen::MatrixXd::Zero(2, 2 * nm));
    trace_gain_.assign(M + 1, Eigen::MatrixXd::Zero(2, 2 * nm));
    for (int L = 1; L <= M; ++L) {
        const int q = L + 1;
        const Eigen::VectorXd w = trapezoid_weights(L, dt);
        Eigen::MatrixXd G = Eigen::MatrixXd::Zero(2 * q, 2 * q);
        Eigen::MatrixXd B(2 * q, 2 * nm);
        Eigen::MatrixXd HWH = Eigen::MatrixXd::Zero(2 * nm, 2 * nm);
        Eigen::MatrixXd Th = Eigen::MatrixXd::Zero(2, 2 * nm);  // trace of the free part h
        Eigen::MatrixXd Tc = Eigen::MatrixXd::Zero(2, 2 * q);   // trace of Lambda u, per control node
        for (int n = 0; n < nm; ++n) {
            const Eigen::VectorXd row = C[n].row(L).head(q).transpose();
            U[n].topLeftCorner(q, q).noalias() += row * row.transpose();
            const Eigen::MatrixXd S = dt * U[n].topLeftCorner(q, q) - 0.5 * dt * row * row.transpose();
            const Eigen::Matrix2d D = lam(n) * lam(n) * dm.row(n).transpose() * dm.row(n);
            for (int i = 0; i < q; ++i)
                for (int k = 0; k < q; ++k) G.block<2, 2>(2 * i, 2 * k) += S(i, k) * D;

            const Eigen::VectorXd z = table.Z.row(n).head(q).transpose();
            const Eigen::VectorXd y = table.Zexp.row(n).head(q).transpose();
            const Eigen::MatrixXd Ct = C[n].topLeftCorner(q, q).transpose();
            const Eigen::VectorXd qz = Ct * w.cwiseProduct(z);
            const Eigen::VectorXd qy = Ct * w.cwiseProduct(y);
            for (int i = 0; i < q; ++i)
                for (int c = 0; c < 2; ++c) {
                    B(2 * i + c, n) = -lam(n) * dm(n, c) * qz(i);
                    B(2 * i + c, nm + n) = -lam(n) * dm(n, c) * qy(i);
                }
            HWH(n, n) = w.dot(z.cwiseProduct(z));
            HWH(n, nm + n) = HWH(nm + n, n) = w.dot(z.cwiseProduct(y));
            HWH(nm + n, nm + n) = w.dot(y.cwiseProduct(y));

            // product-rule weights of v_n(s_i) in int_theta^T Z_n(s - theta) v_n(s) ds
            Eigen::VectorXd tq = Eigen::VectorXd::Zero(q);
            for (int i = 0; i < q; ++i) {
                if (i < L) tq(i) += table.pZ.near(n, i);
                if (i >= 1) tq(i) += table.pZ.far(n, i - 1);
            }
            const Eigen::Vector2d ld = lam(n) * dm.row(n).transpose();
            Th.col(n) += ld * tq.dot(z);
            Th.col(nm + n) += ld * tq.dot(y);
            const Eigen::VectorXd ct = Ct * tq;
            for (int i = 0; i < q; ++i) Tc.block<2, 2>(0, 2 * i) -= lam(n) * ld * dm.row(n) * ct(i);
        }
        for (int i = 0; i < q; ++i) G(2 * i, 2 * i) += w(i), G(2 * i + 1, 2 * i + 1) += w(i);
        Eigen::LLT<Eigen::MatrixXd> llt(G);
        if (llt.info() != Eigen::Success) throw std::runtime_error("RiccatiTables: factorization failed");
        const Eigen::MatrixXd X = llt.solve(B);
        pi_[L] = HWH - B.transpose() * X;
        pi_[L] = 0.5 * (pi_[L] + pi_[L].transpose()).eval();
        gain_[L] = -X.topRows(2);
        trace_gain_[L] = Th - Tc * X;
    }
}

double RiccatiTables::form(int theta_index, const Eigen::VectorXd& x1, const Eigen::VectorXd& x2) const {
    return x1.dot(pi_[n_steps() - theta_index] * x2);
}

BoundaryVector RiccatiTables::feedback(int theta_index, const Eigen::VectorXd& x) const {
    return gain_[n_steps() - theta_index] * x;
}

BoundaryVector RiccatiTables::trace_feedback(int theta_index, const Eigen::VectorXd& x) const {
    return trace_gain_[n_steps() - theta_index] * x;
}

Eigen::MatrixXd RiccatiTables::Pi_rate(int theta_index) const {
    const int M = n_steps();
    if (M < 2) throw std::invalid_argument("Pi_rate: need at least two steps");
    const double dt = table_->grid.dt;
    const int L = M - theta_index;
    if (L == M) return (-3 * pi_[L] + 4 * pi_[L - 1] - pi_[L - 2]) / (2 * dt);
    if (L == 0) return (3 * pi_[0] - 4 * pi_[1] + pi_[2]) / (2 * dt);
    return (pi_[L - 1] - pi_[L + 1]) / (2 * dt);
}

double P_form(const KernelTable& table, const StateSnapshot& s1, const StateSnapshot& s2) {
    if (s1.tau_index != s2.tau_index) throw std::invalid_argument("P_form: states at different times");
    const OperatorAssembly a = assemble(table, s1.tau_index);
    return field_inner(a, apply_H(a, build_h(a, s1)), build_h(a, s2));
}

TerminalReport terminal_P_check(const KernelTable& table, const std::vector<StateSnapshot>& at_T,
                                const std::vector<StateSnapshot>& before_T) {
    TerminalReport rep;
    for (const auto& s : at_T) rep.max_abs_at_T = std::max(rep.max_abs_at_T, std::abs(P_form(table, s, s)));
    for (const auto& s : before_T) {
        const OperatorAssembly a = assemble(table, s.tau_index);
        const Eigen::MatrixXd h = build_h(a, s);
        rep.max_last_panel = std::max(rep.max_last_panel, P_form(table, s, s));
        rep.last_panel_bound = std::max(rep.last_panel_bound, table.grid.dt * h.colwise().squaredNorm().maxCoeff());
    }
    return rep;
}

BoundaryVector feedback_gain(const KernelTable& table, const StateSnapshot& s) {
    const OperatorAssembly a = assemble(table, s.tau_index);
    return solve_optimal(a, s, Route::Control).u_plus.col(0);
}

BoundaryVector trace_gain(const KernelTable& table, const Eigen::MatrixXd& v_plus) {
    const int L = static_cast<int>(v_plus.cols()) - 1;
    BoundaryVector g = BoundaryVector::Zero();
    for (int n = 0; n < table.n_modes(); ++n) {
        double acc = 0.0;
        for (int i = 0; i < L; ++i) acc += table.pZ.near(n, i) * v_plus(n, i) + table.pZ.far(n, i) * v_plus(n, i + 1);
        g += table.basis.lambda(n) * acc * table.basis.dmap.row(n).transpose();
    }
    return g;
}

ClosedLoopResult closed_loop_simulate(const StateSnapshot& s0, const RiccatiTables& tables) {
    const KernelTable& t = tables.table();
    const double dt = t.grid.dt;
    const int M = t.n_steps();
    const int L = M - s0.tau_index;
    ClosedLoopResult out;
    out.u.resize(2, L + 1);
    out.v.tau_index = s0.tau_index;
    out.v.v.resize(s0.n_modes(), L + 1);

    StateSnapshot s = s0;
    out.u.col(0) = tables.feedback(s.tau_index, state_coordinates(s, dt));
    out.v.v.col(0) = s.v_hat;
    for (int l = 0; l < L; ++l) {
        const int next = s.tau_index + 1;
        auto step = [&](const BoundaryVector& u_next) {
            ControlSignal seg(2, 2);
            seg.col(0) = out.u.col(l);
            seg.col(1) = u_next;
            return extend_state(s, solve_volterra(s, seg, t, 1), next, dt);
        };
        // The state after one step is affine in the control at its end node;
        // solve the 2x2 fixed point u = F x(u) implicitly.
        const Eigen::VectorXd x0 = state_coordinates(step(BoundaryVector::Zero()), dt);
        Eigen::MatrixXd J(x0.size(), 2);
        for (int c = 0; c < 2; ++c)
            J.col(c) = state_coordinates(step(BoundaryVector::Unit(c)), dt) - x0;
        const Eigen::MatrixXd& F = tables.gain(M - next);
        const BoundaryVector u_next = (Eigen::Matrix2d::Identity() - F * J).partialPivLu().solve(F * x0);
        s = step(u_next);
        out.u.col(l + 1) = u_next;
        out.v.v.col(l + 1) = s.v_hat;
    }
    return out;
}

BellmanReport bellman_check(const KernelTable& table, const StateSnapshot& s, int t0_index) {
    if (t0_index < s.tau_index || t0_index > table.n_steps())
        throw std::invalid_argument("bellman_check: t0 outside [tau, T]");
    return bellman_check(assemble(table, s.tau_index), assemble(table, t0_index), s);
}

BellmanReport bellman_check(const OperatorAssembly& a, const OperatorAssembly& a0, const StateSnapshot& s) {
    if (a.table != a0.table || a.tau_index != s.tau_index || a0.tau_index < a.tau_index)
        throw std::invalid_argument("bellman_check: inconsistent assemblies");
    const double dt = a.table->grid.dt;
    const int t0_index = a0.tau_index;
    const OptimalSolution sol = solve_optimal(a, s, Route::Control);
    const StateSnapshot s0 = extend_state(s, Trajectory{s.tau_index, sol.v_plus}, t0_index, dt);
    const OptimalSolution tail = solve_optimal(a0, s0, Route::Control);

    BellmanReport rep;
    rep.W_tau = sol.W;
    const int off = t0_index - s.tau_index;
    const ControlSignal diff = tail.u_plus - sol.u_plus.rightCols(a0.L + 1);
    rep.junction_mismatch = diff.col(0).norm();
    double acc = 0.0;
    for (int l = 1; l <= a0.L; ++l) acc += a0.w(l) * diff.col(l).squaredNorm();
    rep.tail_mismatch = std::sqrt(acc);

    const Eigen::VectorXd w = trapezoid_weights(off, dt);
    double running = 0.0;
    for (int l = 0; l <= off; ++l) running += w(l) * (sol.v_plus.col(l).squaredNorm() + sol.u_plus.col(l).squaredNorm());
    rep.telescoping = std::abs(sol.W - running - tail.W);
    return rep;
}

namespace {

std::vector<StateSnapshot> states_along(const StateSnapshot& s, const Trajectory& traj, double dt) {
    std::vector<StateSnapshot> out;
    out.reserve(traj.v.cols());
    for (int l = 0; l < traj.v.cols(); ++l) out.push_back(extend_state(s, traj, s.tau_index + l, dt));
    return out;
}

}  // namespace

DissipationReport dissipation_scan(const StateSnapshot& s, const ControlSignal& u, const RiccatiTables& tables) {
    const KernelTable& t = tables.table();
    const double dt = t.grid.dt;
    const Trajectory traj = solve_voc(s, u, t);
    const int n = static_cast<int>(traj.v.cols());
    DissipationReport rep;
    rep.theta.resize(n);
    rep.W.resize(n);
    const auto states = states_along(s, traj, dt);
    for (int l = 0; l < n; ++l) {
        const Eigen::VectorXd x = state_coordinates(states[l], dt);
        rep.theta(l) = t.grid.node(s.tau_index + l);
        rep.W(l) = tables.form(s.tau_index + l, x, x);
    }
    rep.dW = differentiate(rep.W, dt);
    rep.r.resize(n);
    for (int l = 0; l < n; ++l) rep.r(l) = traj.v.col(l).squaredNorm() + u.col(l).squaredNorm() + rep.dW(l);
    return rep;
}

double P_prime_form(const RiccatiTables& tables, const StateSnapshot& s) {
    const KernelTable& t = tables.table();
    const double dt = t.grid.dt;
    const Eigen::VectorXd x = state_coordinates(s, dt);
    const Eigen::VectorXd xd = coordinate_rate(s, apply_generator(s, t), dt);
    const BoundaryVector g = tables.trace_feedback(s.tau_index, x);
    return -s.v_hat.squaredNorm() + g.squaredNorm() - 2.0 * tables.form(s.tau_index, x, xd);
}

RiccatiTerms riccati_residual(const RiccatiTables& tables, const StateSnapshot& s) {
    const KernelTable& t = tables.table();
    const double dt = t.grid.dt;
    const Eigen::VectorXd x = state_coordinates(s, dt);
    const Eigen::VectorXd xd = coordinate_rate(s, apply_generator(s, t), dt);
    RiccatiTerms r;
    r.p_prime_quotient = x.dot(tables.Pi_rate(s.tau_index) * x);
    r.p_prime_explicit = P_prime_form(tables, s);
    r.cross = 2.0 * tables.form(s.tau_index, x, xd);
    r.gain_sq = tables.trace_feedback(s.tau_index, x).squaredNorm();
    r.observation = s.v_hat.squaredNorm();
    r.residual = r.p_prime_quotient + r.cross - r.gain_sq + r.observation;
    const double nrm = state_norm_sq(s, t.basis, dt);
    r.relative = nrm > 0.0 ? std::abs(r.residual) / nrm : 0.0;
    return r;
}

ChainRuleReport chain_rule_closure(const StateSnapshot& s, const ControlSignal& u, const RiccatiTables& tables) {
    const KernelTable& t = tables.table();
    const double dt = t.grid.dt;
    const int nm = t.n_modes();
    const Trajectory traj = solve_voc(s, u, t);
    const int n = static_cast<int>(traj.v.cols());
    const auto states = states_along(s, traj, dt);
    Eigen::VectorXd W(n);
    std::vector<Eigen::VectorXd> xs(n);
    for (int l = 0; l < n; ++l) {
        xs[l] = state_coordinates(states[l], dt);
        W(l) = tables.form(s.tau_index + l, xs[l], xs[l]);
    }
    const int inner = std::max(0, n - 2);
    ChainRuleReport rep;
    rep.theta.resize(inner);
    rep.dW_fd.resize(inner);
    rep.dW_formula.resize(inner);
    rep.relative.resize(inner);
    for (int l = 1; l < n - 1; ++l) {
        const StateSnapshot& sl = states[l];
        Eigen::VectorXd rate = coordinate_rate(sl, apply_generator(sl, t), dt);
        rate.head(nm) -= t.basis.eigenvalues.cwiseProduct(t.basis.dmap * u.col(l));
        const double formula = P_prime_form(tables, sl) + 2.0 * tables.form(sl.tau_index, xs[l], rate);
        const double fd = (W(l + 1) - W(l - 1)) / (2 * dt);
        const double scale = state_norm_sq(sl, t.basis, dt) + u.col(l).squaredNorm();
        rep.theta(l - 1) = t.grid.node(sl.tau_index);
        rep.dW_fd(l - 1) = fd;
        rep.dW_formula(l - 1) = formula;
        rep.relative(l - 1) = scale > 0.0 ? std::abs(fd - formula) / scale : 0.0;
    }
    return rep;
}

}  // namespace dampctl

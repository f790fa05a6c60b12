#include "dampctl/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "dampctl/control.hpp"
#include "dampctl/riccati.hpp"
#include "dampctl/spectral.hpp"

namespace dampctl {

// ---------------------------------------------------------------- random data

Eigen::VectorXd StateRecipe::history(double s) const {
    return a + b * s + c.cwiseProduct((omega * s + phi).array().sin().matrix());
}

Eigen::VectorXd StateRecipe::history_rate(double s) const {
    return b + c.cwiseProduct(omega).cwiseProduct((omega * s + phi).array().cos().matrix());
}

StateSnapshot StateRecipe::sample(int tau_index, double dt) const {
    StateSnapshot s;
    s.tau_index = tau_index;
    s.xi.resize(a.size(), tau_index + 1);
    for (int j = 0; j <= tau_index; ++j) s.xi.col(j) = history(j * dt);
    s.v_hat = s.xi.col(tau_index);
    s.y_hat = y_hat;
    return s;
}

DataFactory::DataFactory(const ExperimentConfig& cfg, std::uint64_t stream)
    : n_modes_(cfg.n_modes),
      data_preset_(cfg.data_preset),
      control_preset_(cfg.control_preset),
      scale_(cfg.data_scale),
      amplitude_(cfg.control_amplitude) {
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    rng_.seed(seq);
}

StateRecipe DataFactory::state() {
    std::uniform_real_distribution<double> unit(-1.0, 1.0), freq(1.0, 4.0), phase(0.0, 2 * std::numbers::pi);
    std::normal_distribution<double> normal;
    StateRecipe r;
    const int nm = n_modes_;
    r.a.resize(nm), r.b.resize(nm), r.c.resize(nm), r.omega.resize(nm), r.phi.resize(nm), r.y_hat.resize(nm);
    // Parameters are always drawn so that presets consume the stream identically.
    for (int n = 0; n < nm; ++n) {
        const double decay = 1.0 / std::pow(n + 1.0, 3);
        r.a(n) = unit(rng_) * decay;
        r.b(n) = unit(rng_) * decay;
        r.c(n) = unit(rng_) * decay;
        r.omega(n) = freq(rng_);
        r.phi(n) = phase(rng_);
        const double y = normal(rng_);
        r.y_hat(n) = data_preset_ == "rough_y" ? y : y * decay;
    }
    const double k = data_preset_ == "zero" ? 0.0 : scale_;
    r.a *= k, r.b *= k, r.c *= k, r.y_hat *= k;
    return r;
}

SmoothControl DataFactory::control() {
    std::uniform_real_distribution<double> unit(-1.0, 1.0), freq(1.0, 4.0), phase(0.0, 2 * std::numbers::pi);
    const double k = control_preset_ == "zero" ? 0.0 : amplitude_;
    SmoothControl u;
    for (int c = 0; c < 2; ++c) {
        u.a[c] = k * unit(rng_);
        u.b[c] = k * unit(rng_);
        u.c[c] = k * unit(rng_);
        u.omega[c] = freq(rng_);
        u.phi[c] = phase(rng_);
    }
    return u;
}

void make_compatible(StateSnapshot& s, const StateRecipe& r, const BoundaryVector& u_tau, const KernelTable& table) {
    const double dt = table.grid.dt;
    const Eigen::VectorXd& lam = table.basis.eigenvalues;
    const Eigen::VectorXd slope = r.history_rate(s.tau_index * dt);
    s.y_hat = slope - (lam.array() + 1.0).matrix().cwiseProduct(s.v_hat) + memory_functional(s.xi, dt) +
              lam.cwiseProduct(table.basis.dmap * u_tau);
}

// ---------------------------------------------------------------- checks

namespace {

std::string num(double x) {
    std::ostringstream os;
    os << std::setprecision(6) << x;
    return os.str();
}

constexpr double kFloor = 1e-13;

}  // namespace

std::string Check::threshold() const {
    if (relation == "in") return "[" + num(lo) + ", " + num(hi) + "]";
    if (relation == "<=") return "<= " + num(hi);
    if (relation == "floor") return "error <= " + num(kFloor);
    return relation + " " + num(lo);
}

Check upper(std::string name, double measured, double bound) {
    return {std::move(name), measured, "<=", 0.0, bound, measured <= bound};
}

Check lower(std::string name, double measured, double bound) {
    return {std::move(name), measured, ">=", bound, 0.0, measured >= bound};
}

Check strictly_above(std::string name, double measured, double bound) {
    return {std::move(name), measured, ">", bound, 0.0, measured > bound};
}

Check band(std::string name, double measured, double lo, double hi) {
    return {std::move(name), measured, "in", lo, hi, measured >= lo && measured <= hi};
}

double observed_order(double coarse, double fine) {
    if (fine <= kFloor) return std::numeric_limits<double>::quiet_NaN();
    return std::log2(coarse / fine);
}

namespace {

// Refinement check; when the fine error is already at round-off level
// there is nothing to measure and the check passes.
Check order_check(std::string name, double coarse, double fine, double lo, double hi) {
    if (fine <= kFloor) return {std::move(name), fine, "floor", 0.0, kFloor, true};
    return band(std::move(name), observed_order(coarse, fine), lo, hi);
}

Check min_order_check(std::string name, double coarse, double fine, double lo) {
    if (fine <= kFloor) return {std::move(name), fine, "floor", 0.0, kFloor, true};
    return lower(std::move(name), observed_order(coarse, fine), lo);
}

}  // namespace

bool Criterion::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

bool SuiteReport::pass() const {
    return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.pass(); });
}

// ---------------------------------------------------------------- suites

namespace {

class Csv {
public:
    explicit Csv(const std::string& header) { out_ << header << '\n' << std::setprecision(12); }
    template <class... T>
    void row(const T&... v) {
        bool first = true;
        ((out_ << (first ? "" : ",") << v, first = false), ...);
        out_ << '\n';
    }
    std::string str() const { return out_.str(); }

private:
    std::ostringstream out_;
};

// Kernel tables and Riccati tables are shared between suites in one run.
class Context {
public:
    explicit Context(const ExperimentConfig& cfg) : cfg(cfg), basis(build_basis(cfg.n_modes)) {}

    const KernelTable& table(int n_steps) {
        auto& slot = tables_[n_steps];
        if (!slot) slot = std::make_unique<KernelTable>(solve_Z(basis, make_grid(cfg.t_final, n_steps)));
        return *slot;
    }

    const RiccatiTables& riccati(int n_steps) {
        auto& slot = riccati_[n_steps];
        if (!slot) slot = std::make_unique<RiccatiTables>(table(n_steps));
        return *slot;
    }

    DataFactory factory(std::uint64_t stream) const { return DataFactory(cfg, stream); }
    double tol(double t) const { return t * cfg.tol_scale; }
    int fine() const { return cfg.n_steps; }
    int coarse() const { return cfg.n_steps / 2; }

    const ExperimentConfig cfg;
    const SpectralBasis basis;

private:
    std::map<int, std::unique_ptr<KernelTable>> tables_;
    std::map<int, std::unique_ptr<RiccatiTables>> riccati_;
};

// Streams keep each suite's random draws independent of which suites run.
enum Stream : std::uint64_t { kForward = 1, kWave, kOptimize, kBellman, kClosedLoop, kDissipation, kRiccati };

constexpr int kForwardDraws = 10;
constexpr int kStates = 5;
constexpr int kPerturbations = 20;
constexpr int kControls = 50;

double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// ---- kernels

SuiteReport suite_kernels(Context& ctx) {
    SuiteReport rep{"kernels", {}, {}};
    std::map<int, double> err;
    Csv oracle("n_steps,mode,t,Z,Z_oracle,error,Zp,Zp_fd");
    for (int M : {ctx.coarse(), ctx.fine()}) {
        const KernelTable& t = ctx.table(M);
        double e = 0.0;
        for (int n = 0; n < t.n_modes(); ++n)
            for (int j = 0; j <= M; ++j) {
                const double z = Z_oracle(t.basis.lambda(n), t.grid.node(j));
                e = std::max(e, std::abs(t.Z(n, j) - z));
                const double fd = (j > 0 && j < M) ? (t.Z(n, j + 1) - t.Z(n, j - 1)) / (2 * t.grid.dt) : t.Zp(n, j);
                oracle.row(M, n + 1, t.grid.node(j), t.Z(n, j), z, t.Z(n, j) - z, t.Zp(n, j), fd);
            }
        err[M] = e;
    }
    rep.criteria.push_back({"kernel_oracle",
                            {upper("max_error", err[ctx.fine()], ctx.tol(1e-4)),
                             band("error_ratio", err[ctx.coarse()] / err[ctx.fine()], 3.5, 4.5)}});

    const KernelTable& t = ctx.table(ctx.fine());
    const SeriesReport series = series_Z_check(ctx.basis, t.grid, 12);
    Csv sc("k_max,max_error");
    for (std::size_t k = 0; k < series.error_by_order.size(); ++k) sc.row(k, series.error_by_order[k]);
    rep.criteria.push_back({"series_representation", {upper("max_error_k12", series.max_error(), ctx.tol(1e-6))}});

    rep.files = {{"kernels.csv", kernel_csv(t)}, {"kernel_oracle.csv", oracle.str()}, {"series.csv", sc.str()}};
    return rep;
}

// ---- forward

SuiteReport suite_forward(Context& ctx) {
    SuiteReport rep{"forward", {}, {}};
    DataFactory f = ctx.factory(kForward);
    std::map<int, double> err;
    Csv cf("draw,n_steps,max_error");
    for (int d = 0; d < kForwardDraws; ++d) {
        const StateRecipe r = f.state();
        const SmoothControl u = f.control();
        for (int M : {ctx.coarse(), ctx.fine()}) {
            const KernelTable& t = ctx.table(M);
            const int tau = M / 8;
            const StateSnapshot s = r.sample(tau, t.grid.dt);
            const ControlSignal us = u.sample(t.grid, tau, M);
            const double e = max_abs(solve_volterra(s, us, t).v - solve_voc(s, us, t).v);
            err[M] = std::max(err[M], e);
            cf.row(d, M, e);
        }
    }
    rep.criteria.push_back({"two_route_forward",
                            {upper("max_error", err[ctx.fine()], ctx.tol(1e-4)),
                             order_check("order", err[ctx.coarse()], err[ctx.fine()], 1.5, 2.5)}});

    // Damped wave equation against the memory form with the transformed seed.
    DataFactory fw = ctx.factory(kWave);
    const StateRecipe r = fw.state();
    const SmoothControl u = fw.control();
    Csv cw("n_steps,t,mode,wave,volterra");
    std::map<int, double> werr;
    for (int M : {ctx.coarse(), ctx.fine()}) {
        const KernelTable& t = ctx.table(M);
        const Eigen::VectorXd n_idx = Eigen::VectorXd::LinSpaced(ctx.cfg.n_modes, 1, ctx.cfg.n_modes);
        const Eigen::VectorXd interior0 = r.history(0.0).cwiseQuotient(n_idx);
        const Eigen::VectorXd interior1 = r.history_rate(0.0).cwiseQuotient(n_idx);
        const ModalVector v0{interior0 + dirichlet_map(u.value(0.0), ctx.basis).coeffs, 0.0};
        const ModalVector v1{interior1 + dirichlet_map(u.d1(0.0), ctx.basis).coeffs, 0.0};
        const Trajectory wave = simulate_damped_wave(v0, v1, u, ctx.basis, t.grid);
        StateSnapshot s;
        s.tau_index = 0;
        s.v_hat = v0.coeffs;
        s.xi = v0.coeffs;
        s.y_hat = hat_y_from_initial(v0, v1, u.value(0.0), ctx.basis).coeffs;
        const Trajectory vol = solve_volterra(s, u.sample(t.grid, 0, M), t);
        werr[M] = max_abs(wave.v - vol.v);
        if (M == ctx.fine())
            for (int j = 0; j <= M; ++j)
                for (int n = 0; n < ctx.cfg.n_modes; ++n) cw.row(M, t.grid.node(j), n + 1, wave.v(n, j), vol.v(n, j));
    }
    rep.criteria.push_back({"transformation_fidelity", {upper("max_modal_error", werr[ctx.fine()], ctx.tol(5e-4))}});
    Csv wsum("n_steps,max_modal_error");
    for (const auto& [M, e] : werr) wsum.row(M, e);

    rep.files = {{"forward_errors.csv", cf.str()}, {"wave_check.csv", cw.str()}, {"wave_errors.csv", wsum.str()}};
    return rep;
}

// ---- optimize

SuiteReport suite_optimize(Context& ctx) {
    SuiteReport rep{"optimize", {}, {}};
    const KernelTable& t = ctx.table(ctx.fine());
    const int tau = ctx.fine() / 8;
    const OperatorAssembly a = assemble(t, tau);
    DataFactory f = ctx.factory(kOptimize);
    std::mt19937_64 prng(ctx.cfg.seed + kOptimize);
    std::normal_distribution<double> normal;

    double grad = 0.0, min_increase = std::numeric_limits<double>::infinity();
    double value_gap = 0.0, route_gap = 0.0;
    Csv cost("state,W,J_zero,gradient_norm,u_norm,value_gap,route_gap,min_eig,max_eig");
    Csv cu("t,u0,u1");
    Csv cv("t,mode,v");
    const Spectrum sp = field_system_spectrum(a);
    for (int k = 0; k < kStates; ++k) {
        const StateSnapshot s = f.state().sample(tau, t.grid.dt);
        const OptimalSolution sol = solve_optimal(a, s, Route::Field);
        const OptimalSolution alt = solve_optimal(a, s, Route::Control);
        const double u_norm = std::sqrt(control_inner(a, sol.u_plus, sol.u_plus));
        const double g = sol.residual / (1.0 + u_norm);
        grad = std::max(grad, g);
        const double J = evaluate_cost(a, s, sol.u_plus);
        for (double eps : {1e-2, 1e-3})
            for (int p = 0; p < kPerturbations; ++p) {
                ControlSignal du(2, a.L + 1);
                for (int j = 0; j <= a.L; ++j) du.col(j) << normal(prng), normal(prng);
                du /= std::sqrt(control_inner(a, du, du));
                min_increase = std::min(min_increase, evaluate_cost(a, s, sol.u_plus + eps * du) - J);
            }
        const double vg = std::abs(value_function(a, s) - J) / (1.0 + sol.W);
        const double rg = max_abs(sol.u_plus - alt.u_plus) / (1.0 + max_abs(sol.u_plus));
        value_gap = std::max(value_gap, vg);
        route_gap = std::max(route_gap, rg);
        cost.row(k, sol.W, evaluate_cost(a, s, ControlSignal::Zero(2, a.L + 1)), sol.residual, u_norm, vg, rg,
                 sp.min_eig, sp.max_eig);
        if (k == 0)
            for (int j = 0; j <= a.L; ++j) {
                const double tj = t.grid.node(tau + j);
                cu.row(tj, sol.u_plus(0, j), sol.u_plus(1, j));
                for (int n = 0; n < a.n_modes; ++n) cv.row(tj, n + 1, sol.v_plus(n, j));
            }
    }
    rep.criteria.push_back({"optimality",
                            {upper("gradient_over_1_plus_u", grad, ctx.tol(1e-8)),
                             lower("min_cost_increase", min_increase, -ctx.tol(1e-12))}});
    rep.criteria.push_back({"value_consistency",
                            {upper("value_gap_over_1_plus_W", value_gap, ctx.tol(1e-9)),
                             upper("route_gap", route_gap, ctx.tol(1e-9))}});
    rep.files = {{"cost.csv", cost.str()}, {"optimal_control.csv", cu.str()}, {"optimal_trajectory.csv", cv.str()}};
    return rep;
}

// ---- bellman

SuiteReport suite_bellman(Context& ctx) {
    SuiteReport rep{"bellman", {}, {}};
    DataFactory f = ctx.factory(kBellman);
    std::vector<StateRecipe> recipes;
    for (int k = 0; k < kStates; ++k) recipes.push_back(f.state());
    std::map<int, double> tail, tele;
    Csv cb("n_steps,state,t0,tail_mismatch,junction_mismatch,telescoping,W_tau");
    for (int M : {ctx.coarse(), ctx.fine()}) {
        const KernelTable& t = ctx.table(M);
        const int tau = M / 8;
        const OperatorAssembly a = assemble(t, tau);
        for (int t0 : {tau + M / 4, tau + M / 2}) {
            const OperatorAssembly a0 = assemble(t, t0);
            for (int k = 0; k < kStates; ++k) {
                const BellmanReport b = bellman_check(a, a0, recipes[k].sample(tau, t.grid.dt));
                tail[M] = std::max(tail[M], b.tail_mismatch);
                tele[M] = std::max(tele[M], b.telescoping);
                cb.row(M, k, t.grid.node(t0), b.tail_mismatch, b.junction_mismatch, b.telescoping, b.W_tau);
            }
        }
    }
    rep.criteria.push_back({"bellman",
                            {upper("tail_mismatch", tail[ctx.fine()], ctx.tol(1e-3)),
                             upper("telescoping", tele[ctx.fine()], ctx.tol(1e-3)),
                             order_check("tail_order", tail[ctx.coarse()], tail[ctx.fine()], 1.5, 2.5),
                             // the telescoping defect converges faster than second order, with no stable rate
                             min_order_check("telescoping_order", tele[ctx.coarse()], tele[ctx.fine()], 1.5)}});
    rep.files = {{"bellman.csv", cb.str()}};
    return rep;
}

// ---- closed loop

SuiteReport suite_closed_loop(Context& ctx) {
    SuiteReport rep{"closed-loop", {}, {}};
    const int M = ctx.fine();
    const KernelTable& t = ctx.table(M);
    const RiccatiTables& R = ctx.riccati(M);
    const int tau = M / 8;
    const OperatorAssembly a = assemble(t, tau);
    DataFactory f = ctx.factory(kClosedLoop);
    std::mt19937_64 prng(ctx.cfg.seed + kClosedLoop);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);

    double mismatch = 0.0, linearity = 0.0, wiring = 0.0;
    Csv cc("state,t,u_closed0,u_closed1,u_open0,u_open1");
    std::vector<StateSnapshot> states;
    for (int k = 0; k < kStates; ++k) {
        const StateSnapshot s = f.state().sample(tau, t.grid.dt);
        states.push_back(s);
        const OptimalSolution open = solve_optimal(a, s, Route::Control);
        const ClosedLoopResult cl = closed_loop_simulate(s, R);
        const ControlSignal diff = cl.u - open.u_plus;
        mismatch = std::max(mismatch, std::sqrt(control_inner(a, diff, diff)));
        const BoundaryVector direct = feedback_gain(t, s);
        const BoundaryVector tabled = R.feedback(tau, state_coordinates(s, t.grid.dt));
        wiring = std::max(wiring, std::max((direct - open.u_plus.col(0)).norm(), (direct - tabled).norm()));
        for (int j = 0; j <= a.L; ++j)
            cc.row(k, t.grid.node(tau + j), cl.u(0, j), cl.u(1, j), open.u_plus(0, j), open.u_plus(1, j));
    }
    for (int k = 0; k + 1 < kStates; ++k) {
        const double al = coef(prng), be = coef(prng);
        StateSnapshot mix = states[k];
        mix.v_hat = al * states[k].v_hat + be * states[k + 1].v_hat;
        mix.xi = al * states[k].xi + be * states[k + 1].xi;
        mix.y_hat = al * states[k].y_hat + be * states[k + 1].y_hat;
        const BoundaryVector lhs = feedback_gain(t, mix);
        const BoundaryVector rhs = al * feedback_gain(t, states[k]) + be * feedback_gain(t, states[k + 1]);
        linearity = std::max(linearity, (lhs - rhs).norm() / (1.0 + rhs.norm()));
    }
    rep.criteria.push_back({"feedback_law",
                            {upper("closed_loop_L2_mismatch", mismatch, ctx.tol(1e-3)),
                             upper("gain_linearity", linearity, ctx.tol(1e-10)),
                             upper("gain_vs_open_loop_first_node", wiring, ctx.tol(1e-9))}});
    rep.files = {{"closed_loop.csv", cc.str()}};
    return rep;
}

// ---- dissipation

SuiteReport suite_dissipation(Context& ctx) {
    SuiteReport rep{"dissipation", {}, {}};
    const int M = ctx.fine();
    const KernelTable& t = ctx.table(M);
    const RiccatiTables& R = ctx.riccati(M);
    const int tau = M / 8;
    DataFactory f = ctx.factory(kDissipation);
    const StateSnapshot s = f.state().sample(tau, t.grid.dt);
    const OptimalSolution opt = solve_optimal(assemble(t, tau), s, Route::Control);

    Csv cd("control,theta,W,dW,r");
    const DissipationReport d_opt = dissipation_scan(s, opt.u_plus, R);
    for (int l = 0; l < d_opt.r.size(); ++l) cd.row("optimal", d_opt.theta(l), d_opt.W(l), d_opt.dW(l), d_opt.r(l));
    const double opt_max = d_opt.r.cwiseAbs().maxCoeff();

    const double band_tol = ctx.tol(5e-3);
    double min_r = std::numeric_limits<double>::infinity();
    double min_peak = std::numeric_limits<double>::infinity();
    for (int k = 0; k < kControls; ++k) {
        const ControlSignal u = f.control().sample(t.grid, tau, M);
        const DissipationReport d = dissipation_scan(s, u, R);
        min_r = std::min(min_r, d.r.minCoeff());
        min_peak = std::min(min_peak, d.r.cwiseAbs().maxCoeff());
        for (int l = 0; l < d.r.size(); ++l) cd.row(k, d.theta(l), d.W(l), d.dW(l), d.r(l));
    }
    Criterion crit{"dissipation",
                   {upper("optimal_max_abs_r", opt_max, band_tol), lower("random_min_r", min_r, -ctx.tol(1e-8))}};
    // with the zero control preset every control is the optimal one, so r vanishes by design
    if (ctx.cfg.control_preset != "zero") crit.checks.push_back(strictly_above("random_min_peak_abs_r", min_peak, band_tol));
    rep.criteria.push_back(crit);
    rep.files = {{"dissipation.csv", cd.str()}};
    return rep;
}

// ---- riccati

SuiteReport suite_riccati(Context& ctx) {
    SuiteReport rep{"riccati", {}, {}};
    const int M = ctx.fine();
    const KernelTable& t = ctx.table(M);
    const RiccatiTables& R = ctx.riccati(M);
    const double dt = t.grid.dt;
    DataFactory f = ctx.factory(kRiccati);

    Csv cr("state,theta,p_prime_quotient,p_prime_explicit,cross,gain_sq,observation,residual,relative");
    Csv cc("state,theta,dW_fd,dW_formula,relative");
    double residual = 0.0, closure = 0.0;
    std::vector<StateSnapshot> at_T, before_T;
    for (int k = 0; k < kStates; ++k) {
        const StateRecipe r = f.state();
        for (int theta : {M / 4, M / 2, 3 * M / 4}) {
            const RiccatiTerms rt = riccati_residual(R, r.sample(theta, dt));
            residual = std::max(residual, rt.relative);
            cr.row(k, t.grid.node(theta), rt.p_prime_quotient, rt.p_prime_explicit, rt.cross, rt.gain_sq,
                   rt.observation, rt.residual, rt.relative);
        }
        const int tau = M / 8;
        const SmoothControl u = f.control();
        StateSnapshot s = r.sample(tau, dt);
        make_compatible(s, r, u.value(t.grid.node(tau)), t);
        const ChainRuleReport ch = chain_rule_closure(s, u.sample(t.grid, tau, M), R);
        if (ch.relative.size()) closure = std::max(closure, ch.relative.maxCoeff());
        for (int l = 0; l < ch.theta.size(); ++l) cc.row(k, ch.theta(l), ch.dW_fd(l), ch.dW_formula(l), ch.relative(l));
        at_T.push_back(r.sample(M, dt));
        before_T.push_back(r.sample(M - 1, dt));
    }
    const TerminalReport term = terminal_P_check(t, at_T, before_T);
    Csv ct("max_abs_at_T,max_last_panel,last_panel_bound");
    ct.row(term.max_abs_at_T, term.max_last_panel, term.last_panel_bound);
    rep.criteria.push_back({"riccati_residual",
                            {upper("max_relative_residual", residual, ctx.tol(5e-3)),
                             upper("chain_rule_closure", closure, ctx.tol(5e-3)),
                             upper("terminal_P_at_T", term.max_abs_at_T, 0.0)}});
    rep.files = {{"riccati.csv", cr.str()}, {"chain_rule.csv", cc.str()}, {"terminal.csv", ct.str()}};
    return rep;
}

using SuiteFn = std::function<SuiteReport(Context&)>;

const std::map<std::string, SuiteFn>& registry() {
    static const std::map<std::string, SuiteFn> r = {
        {"kernels", suite_kernels},         {"forward", suite_forward},         {"optimize", suite_optimize},
        {"bellman", suite_bellman},         {"closed-loop", suite_closed_loop}, {"dissipation", suite_dissipation},
        {"riccati", suite_riccati},
    };
    return r;
}

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {"kernels",     "forward",     "optimize", "bellman",
                                                   "closed-loop", "dissipation", "riccati"};
    return names;
}

std::vector<SuiteReport> run_suites(const std::vector<std::string>& names, const ExperimentConfig& cfg) {
    validate(cfg);
    for (const auto& n : names)
        if (!registry().count(n)) throw std::invalid_argument("unknown suite: " + n);
    Context ctx(cfg);
    std::vector<SuiteReport> out;
    for (const auto& n : names) out.push_back(registry().at(n)(ctx));
    return out;
}

SuiteReport run_suite(const std::string& name, const ExperimentConfig& cfg) { return run_suites({name}, cfg).front(); }

// ---------------------------------------------------------------- summaries

std::string summary_tsv(const std::vector<SuiteReport>& reports, const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << std::setprecision(6);
    os << "# seed\t" << cfg.seed << "\n";
    os << "name\tmeasured\tthreshold\tresult\n";
    for (const auto& rep : reports)
        for (const auto& c : rep.criteria)
            for (const auto& k : c.checks)
                os << c.name << '.' << k.name << '\t' << k.measured << '\t' << k.threshold() << '\t'
                   << (k.pass ? "PASS" : "FAIL") << '\n';
    return os.str();
}

std::string summary_json(const std::vector<SuiteReport>& reports, const ExperimentConfig& cfg) {
    nlohmann::ordered_json j;
    j["seed"] = cfg.seed;
    j["config"] = {{"n_modes", cfg.n_modes},         {"t_final", cfg.t_final},
                   {"n_steps", cfg.n_steps},         {"data_preset", cfg.data_preset},
                   {"data_scale", cfg.data_scale},   {"control_preset", cfg.control_preset},
                   {"control_amplitude", cfg.control_amplitude}, {"tol_scale", cfg.tol_scale}};
    j["suites"] = nlohmann::ordered_json::array();
    bool all = true;
    for (const auto& rep : reports) {
        nlohmann::ordered_json s;
        s["suite"] = rep.suite;
        s["pass"] = rep.pass();
        all = all && rep.pass();
        for (const auto& c : rep.criteria) {
            nlohmann::ordered_json cj;
            cj["name"] = c.name;
            cj["pass"] = c.pass();
            for (const auto& k : c.checks)
                cj["checks"].push_back({{"name", k.name},
                                        {"measured", k.measured},
                                        {"threshold", k.threshold()},
                                        {"pass", k.pass}});
            s["criteria"].push_back(cj);
        }
        j["suites"].push_back(s);
    }
    j["pass"] = all;
    return j.dump(2) + "\n";
}

}  // namespace dampctl

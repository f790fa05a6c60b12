#include "dampctl/kernels.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace dampctl {

TimeGrid make_grid(double t_final, int n_steps) {
    if (!(t_final > 0.0) || !std::isfinite(t_final)) throw std::invalid_argument("make_grid: t_final must be positive");
    if (n_steps < 1) throw std::invalid_argument("make_grid: n_steps must be >= 1");
    TimeGrid g;
    g.t_final = t_final;
    g.n_steps = n_steps;
    g.dt = t_final / n_steps;
    g.quad_weights = trapezoid_weights(n_steps, g.dt);
    return g;
}

Eigen::VectorXd trapezoid_weights(int n_panels, double dt) {
    Eigen::VectorXd w = Eigen::VectorXd::Constant(n_panels + 1, dt);
    if (n_panels == 0) {
        w(0) = 0.0;
        return w;
    }
    w(0) = 0.5 * dt;
    w(n_panels) = 0.5 * dt;
    return w;
}

double eval_E(const SpectralBasis& basis, int n, double t) {
    if (t < 0.0) throw std::invalid_argument("eval_E: t < 0");
    return std::exp(basis.lambda(n) * t);
}

double eval_N(const SpectralBasis& basis, int n, double t) {
    if (t < 0.0) throw std::invalid_argument("eval_N: t < 0");
    const double lam = basis.lambda(n);
    const double e = std::exp(lam * t);
    return e - (e - std::exp(-t)) / (lam + 1.0);
}

Eigen::VectorXd volterra_trapezoid(const Eigen::VectorXd& f, const Eigen::VectorXd& k, double dt) {
    const int n = static_cast<int>(f.size());
    const double diag = 1.0 - 0.5 * dt * k(0);
    if (std::abs(diag) < 1e-12) throw std::runtime_error("volterra_trapezoid: implicit step coefficient vanishes");
    Eigen::VectorXd z(n);
    z(0) = f(0);
    for (int j = 1; j < n; ++j) {
        double acc = 0.5 * k(j) * z(0);
        for (int i = 1; i < j; ++i) acc += k(j - i) * z(i);
        z(j) = (f(j) + dt * acc) / diag;
    }
    return z;
}

Eigen::VectorXd convolve_trapezoid(const Eigen::VectorXd& k, const Eigen::VectorXd& g, double dt) {
    const int n = static_cast<int>(g.size());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (int j = 1; j < n; ++j) {
        double acc = 0.5 * (k(j) * g(0) + k(0) * g(j));
        for (int i = 1; i < j; ++i) acc += k(j - i) * g(i);
        out(j) = dt * acc;
    }
    return out;
}

void exp_panel_weights(double r, int m, double dt, double& near, double& far) {
    const double x = r * dt;
    double i0, i1;
    if (std::abs(x) < 0.5) {
        // dt * sum x^k/k! * 1/((k+1)(k+2)) and dt * sum x^k/k! * 1/(k+2)
        double term = 1.0;
        i0 = 0.0;
        i1 = 0.0;
        for (int k = 0; k < 24; ++k) {
            i0 += term / ((k + 1.0) * (k + 2.0));
            i1 += term / (k + 2.0);
            term *= x / (k + 1.0);
        }
        i0 *= dt;
        i1 *= dt;
    } else {
        const double ex = std::exp(x);
        const double full = std::expm1(x) / r;
        i1 = (ex * (x - 1.0) + 1.0) / (r * r * dt);
        i0 = full - i1;
    }
    const double base = std::exp(r * m * dt);
    near = base * i0;
    far = base * i1;
}

double Z_oracle(double lambda, double t) {
    if (t < 0.0) throw std::invalid_argument("Z_oracle: t < 0");
    // (z, w)' = [[lambda+1, -1], [1, -1]] (z, w), z(0) = 1, w(0) = 0.
    const double a = 0.5 * lambda;
    const double c = lambda + 1.0 - a;
    const double disc = a * a + lambda;  // (tr/2)^2 - det
    const double scale = std::max(1.0, a * a);
    if (std::abs(disc) <= 1e-14 * scale) return std::exp(a * t) * (1.0 + c * t);
    if (disc > 0.0) {
        const double b = std::sqrt(disc);
        return 0.5 * ((1.0 + c / b) * std::exp((a + b) * t) + (1.0 - c / b) * std::exp((a - b) * t));
    }
    const double beta = std::sqrt(-disc);
    return std::exp(a * t) * (std::cos(beta * t) + c * std::sin(beta * t) / beta);
}

void eval_Z_prime(KernelTable& table) {
    const int nm = table.n_modes();
    const int M = table.n_steps();
    const double dt = table.grid.dt;
    const double decay = std::exp(-dt);
    table.Zmem.setZero(nm, M + 1);
    table.Zp.resize(nm, M + 1);
    for (int n = 0; n < nm; ++n) {
        for (int j = 0; j < M; ++j)
            table.Zmem(n, j + 1) = decay * table.Zmem(n, j) + 0.5 * dt * (decay * table.Z(n, j) + table.Z(n, j + 1));
        table.Zp.row(n) = (table.basis.lambda(n) + 1.0) * table.Z.row(n) - table.Zmem.row(n);
    }
}

namespace {

void fill_panel_weights(KernelTable& t) {
    const int nm = t.n_modes();
    const int M = t.n_steps();
    const double dt = t.grid.dt;
    t.pE.near.resize(nm, M);
    t.pE.far.resize(nm, M);
    t.pN.near.resize(nm, M);
    t.pN.far.resize(nm, M);
    t.pZ.near.resize(nm, M);
    t.pZ.far.resize(nm, M);
    for (int n = 0; n < nm; ++n) {
        const double lam = t.basis.lambda(n);
        const double beta = 1.0 / (lam + 1.0);
        const double alpha = 1.0 - beta;  // N = alpha e^{lam t} + beta e^{-t}
        for (int m = 0; m < M; ++m) {
            double en, ef, xn, xf;
            exp_panel_weights(lam, m, dt, en, ef);
            exp_panel_weights(-1.0, m, dt, xn, xf);
            t.pE.near(n, m) = en;
            t.pE.far(n, m) = ef;
            t.pN.near(n, m) = alpha * en + beta * xn;
            t.pN.far(n, m) = alpha * ef + beta * xf;

            // Z = (Z' + Zmem)/(lam+1); integrate Z' exactly and Zmem by trapezoid.
            const double wm = t.Zmem(n, m);
            const double wp = t.Zmem(n, m + 1);
            const double whole = (t.Z(n, m + 1) - t.Z(n, m) + 0.5 * dt * (wm + wp)) * beta;
            const double first = (dt * t.Z(n, m + 1) - whole + dt * dt * (wm + 2.0 * wp) / 6.0) * beta;
            t.pZ.far(n, m) = first / dt;
            t.pZ.near(n, m) = whole - first / dt;
        }
    }
    t.Zexp.setZero(nm, M + 1);
    Eigen::VectorXd ex(M + 1);
    for (int j = 0; j <= M; ++j) ex(j) = std::exp(-t.grid.node(j));
    for (int n = 0; n < nm; ++n)
        for (int l = 1; l <= M; ++l) {
            double acc = 0.0;
            for (int i = 0; i < l; ++i) acc += t.pZ.near(n, l - i - 1) * ex(i + 1) + t.pZ.far(n, l - i - 1) * ex(i);
            t.Zexp(n, l) = acc;
        }
}

}  // namespace

KernelTable solve_Z(const SpectralBasis& basis, const TimeGrid& grid) {
    KernelTable t;
    t.basis = basis;
    t.grid = grid;
    const int nm = basis.n_modes;
    const int M = grid.n_steps;
    t.E.resize(nm, M + 1);
    t.N.resize(nm, M + 1);
    t.Z.resize(nm, M + 1);
    for (int n = 0; n < nm; ++n) {
        for (int j = 0; j <= M; ++j) {
            t.E(n, j) = eval_E(basis, n, grid.node(j));
            t.N(n, j) = eval_N(basis, n, grid.node(j));
        }
        t.Z.row(n) = volterra_trapezoid(t.E.row(n).transpose(), t.N.row(n).transpose(), grid.dt).transpose();
    }
    eval_Z_prime(t);
    fill_panel_weights(t);
    return t;
}

SeriesReport series_Z_check(const SpectralBasis& basis, const TimeGrid& grid, int k_max) {
    if (k_max < 0) throw std::invalid_argument("series_Z_check: k_max < 0");
    const KernelTable t = solve_Z(basis, grid);
    const int nm = basis.n_modes;
    SeriesReport rep;
    rep.error_by_order.assign(k_max + 1, 0.0);
    for (int n = 0; n < nm; ++n) {
        const Eigen::VectorXd z = t.Z.row(n).transpose();
        const Eigen::VectorXd nk = t.N.row(n).transpose();
        Eigen::VectorXd term = t.E.row(n).transpose();
        Eigen::VectorXd sum = term;
        for (int k = 0; k <= k_max; ++k) {
            if (k > 0) {
                term = convolve_trapezoid(nk, term, grid.dt);
                sum += term;
            }
            rep.error_by_order[k] = std::max(rep.error_by_order[k], (sum - z).cwiseAbs().maxCoeff());
        }
    }
    return rep;
}

ModalVector eval_K(const KernelTable& table, int j, const BoundaryVector& u) {
    ModalVector ad = apply_AD(u, table.basis);
    return {table.Z.col(j).cwiseProduct(ad.coeffs), -1.0};
}

BoundaryVector eval_K_star(const KernelTable& table, int j, const Eigen::VectorXd& p) {
    return adjoint_AD(Eigen::VectorXd(table.Z.col(j).cwiseProduct(p)), table.basis);
}

std::string kernel_csv(const KernelTable& table) {
    std::ostringstream out;
    out << "mode,t,E,N,Z,Zp\n" << std::setprecision(12);
    for (int n = 0; n < table.n_modes(); ++n)
        for (int j = 0; j <= table.n_steps(); ++j)
            out << n + 1 << ',' << table.grid.node(j) << ',' << table.E(n, j) << ',' << table.N(n, j) << ','
                << table.Z(n, j) << ',' << table.Zp(n, j) << '\n';
    return out.str();
}

void write_kernel_csv(const KernelTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << kernel_csv(table);
}

}  // namespace dampctl

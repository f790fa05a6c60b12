#ifndef DAMPCTL_KERNELS_HPP
#define DAMPCTL_KERNELS_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dampctl/spectral.hpp"

namespace dampctl {

struct TimeGrid {
    double t_final = 0.0;
    int n_steps = 0;
    double dt = 0.0;
    Eigen::VectorXd quad_weights;  // composite trapezoid on [0, t_final]

    double node(int j) const { return j * dt; }
};

TimeGrid make_grid(double t_final, int n_steps);

/// Composite trapezoid weights for n_panels panels of width dt.
Eigen::VectorXd trapezoid_weights(int n_panels, double dt);

/// Product-trapezoid weights of a kernel k over one panel.
/// For the panel whose kernel argument covers [m dt, (m+1) dt]:
///   near(m) = int_0^dt k(m dt + th)(1 - th/dt) dth
///   far(m)  = int_0^dt k(m dt + th)(th/dt) dth
/// so int_{t_i}^{t_j} k(t_j - s) g(s) ds ~ sum_i near(j-i-1) g_{i+1} + far(j-i-1) g_i.
struct PanelWeights {
    Eigen::MatrixXd near;
    Eigen::MatrixXd far;
};

/// Per-mode kernel samples on the grid (rows = modes, columns = nodes).
struct KernelTable {
    SpectralBasis basis;
    TimeGrid grid;
    Eigen::MatrixXd E, N, Z, Zp;
    Eigen::MatrixXd Zmem;  // int_0^t e^{-(t-s)} Z(s) ds, trapezoid
    PanelWeights pE, pN, pZ;
    Eigen::MatrixXd Zexp;  // int_0^t Z(t-s) e^{-s} ds, product rule

    int n_modes() const { return basis.n_modes; }
    int n_steps() const { return grid.n_steps; }
};

struct RegularityConstants {
    // Exponents from the well-posedness analysis. Not used in any computation.
    double epsilon = 0.05;
    double sigma() const { return 0.75 + epsilon; }
    double p0() const { return 1.0 + epsilon; }
    double r() const { return 2.0 * p0() / (2.0 - p0()); }
};

double eval_E(const SpectralBasis& basis, int n, double t);
double eval_N(const SpectralBasis& basis, int n, double t);

/// Solves z_j = f_j + dt [k_j z_0 / 2 + sum_{0<i<j} k_{j-i} z_i + k_0 z_j / 2].
Eigen::VectorXd volterra_trapezoid(const Eigen::VectorXd& f, const Eigen::VectorXd& k, double dt);

/// Trapezoid convolution (k * g)(t_j) with the same weights as volterra_trapezoid.
Eigen::VectorXd convolve_trapezoid(const Eigen::VectorXd& k, const Eigen::VectorXd& g, double dt);

KernelTable solve_Z(const SpectralBasis& basis, const TimeGrid& grid);

double Z_oracle(double lambda, double t);

void eval_Z_prime(KernelTable& table);

struct SeriesReport {
    std::vector<double> error_by_order;  // index k = partial sum through N^{*k} * E
    double max_error() const { return error_by_order.back(); }
};

SeriesReport series_Z_check(const SpectralBasis& basis, const TimeGrid& grid, int k_max);

ModalVector eval_K(const KernelTable& table, int j, const BoundaryVector& u);
BoundaryVector eval_K_star(const KernelTable& table, int j, const Eigen::VectorXd& p);

/// near/far weights of e^{r t} on panel m.
void exp_panel_weights(double r, int m, double dt, double& near, double& far);

/// Columns: mode, t, E, N, Z, Zp.
std::string kernel_csv(const KernelTable& table);
void write_kernel_csv(const KernelTable& table, const std::string& path);

}  // namespace dampctl

#endif

#ifndef DAMPCTL_FORWARD_HPP
#define DAMPCTL_FORWARD_HPP

#include <array>

#include <Eigen/Dense>

#include "dampctl/kernels.hpp"
#include "dampctl/spectral.hpp"

namespace dampctl {

/// Boundary control samples, one column per grid node starting at the
/// initial node of the segment it belongs to.
using ControlSignal = Eigen::Matrix2Xd;

/// State at a grid node tau = tau_index * dt.
/// xi holds the history v(s), s in [0, tau], in forward time (one column per
/// node, tau_index + 1 columns). Compatible states have xi(tau) = v_hat.
struct StateSnapshot {
    int tau_index = 0;
    Eigen::VectorXd v_hat;
    Eigen::MatrixXd xi;
    Eigen::VectorXd y_hat;

    int n_modes() const { return static_cast<int>(v_hat.size()); }
};

struct Trajectory {
    int tau_index = 0;
    Eigen::MatrixXd v;  // n_modes x (panels + 1)
};

StateSnapshot zero_state(int n_modes, int tau_index);

/// u_c(t) = a_c + b_c t + c_c sin(omega_c t + phi_c), c = 0, 1.
struct SmoothControl {
    std::array<double, 2> a{}, b{}, c{}, omega{}, phi{};

    BoundaryVector value(double t) const;
    BoundaryVector d1(double t) const;
    BoundaryVector d2(double t) const;
    ControlSignal sample(const TimeGrid& grid, int first, int last) const;
};

ModalVector hat_y_from_initial(const ModalVector& v0, const ModalVector& v1, const BoundaryVector& u_trace,
                               const SpectralBasis& basis);

/// Trapezoid value of int_0^t e^{-(t-s)} xi(s) ds for xi sampled on [0, t].
Eigen::VectorXd memory_functional(const Eigen::MatrixXd& xi, double dt);

/// y_hat - memory_functional(xi): the combination through which the history
/// and the forcing seed enter the future evolution.
Eigen::VectorXd effective_seed(const StateSnapshot& s, double dt);

/// Product-trapezoid solve of the memory equation in Volterra form.
/// n_panels < 0 runs to the end of the table's grid.
Trajectory solve_volterra(const StateSnapshot& s, const ControlSignal& u, const KernelTable& table,
                          int n_panels = -1);

/// Variation-of-constants evaluation through the resolvent Z.
Trajectory solve_voc(const StateSnapshot& s, const ControlSignal& u, const KernelTable& table, int n_panels = -1);

/// Newmark (average acceleration) integration of v'' = A(v + v') with
/// Dirichlet data u, via the lifting w = v - Du.
Trajectory simulate_damped_wave(const ModalVector& v0, const ModalVector& v1, const SmoothControl& u,
                                const SpectralBasis& basis, const TimeGrid& grid);

/// State reached at node k1 along an already computed trajectory from s.
StateSnapshot extend_state(const StateSnapshot& s, const Trajectory& traj, int k1, double dt);

/// Same, solving the forward problem from s first.
StateSnapshot extend_state(const StateSnapshot& s, const ControlSignal& u, int k1, const KernelTable& table);

}  // namespace dampctl

#endif

#ifndef DAMPCTL_CONTROL_HPP
#define DAMPCTL_CONTROL_HPP

#include <Eigen/Dense>

#include "dampctl/forward.hpp"
#include "dampctl/kernels.hpp"

namespace dampctl {

/// Fields on [tau, T] are n_modes x (L+1) matrices; controls are 2 x (L+1).
/// Stacked vectors use node-major order (column-major storage of those
/// matrices), so index l*n_modes + n for fields and 2l + c for controls.
struct OperatorAssembly {
    const KernelTable* table = nullptr;
    int tau_index = 0;
    int L = 0;  // panels on [tau, T]
    int n_modes = 0;
    Eigen::VectorXd w;       // trapezoid weights on the segment
    Eigen::VectorXd wv, wu;  // w expanded to stacked fields / controls
    Eigen::MatrixXd Lambda;  // (L+1) n_modes x 2 (L+1), block lower triangular
    Eigen::LLT<Eigen::MatrixXd> control_system;  // diag(wu) + Lambda^T diag(wv) Lambda
};

OperatorAssembly assemble(const KernelTable& table, int tau_index);

Eigen::VectorXd stack(const Eigen::MatrixXd& m);
Eigen::MatrixXd unstack(const Eigen::VectorXd& v, int rows);

double field_inner(const OperatorAssembly& a, const Eigen::MatrixXd& f, const Eigen::MatrixXd& g);
double control_inner(const OperatorAssembly& a, const ControlSignal& u, const ControlSignal& z);

Eigen::MatrixXd apply_Gamma(const OperatorAssembly& a, const Eigen::VectorXd& v_hat, const Eigen::MatrixXd& xi);
Eigen::MatrixXd apply_Lambda(const OperatorAssembly& a, const ControlSignal& u);
ControlSignal apply_Lambda_star(const OperatorAssembly& a, const Eigen::MatrixXd& v);
Eigen::MatrixXd build_h(const OperatorAssembly& a, const StateSnapshot& s);

enum class Route {
    Field,    // (I + Lambda Lambda*) v = h, then u = -Lambda* v
    Control,  // (I + Lambda* Lambda) u = -Lambda* h
};

struct OptimalSolution {
    ControlSignal u_plus;
    Eigen::MatrixXd v_plus;
    double W = 0.0;
    double residual = 0.0;  // weighted norm of the cost gradient at u_plus
};

OptimalSolution solve_optimal(const OperatorAssembly& a, const StateSnapshot& s, Route route = Route::Field);

/// (I + Lambda Lambda*)^{-1} g through the decoupled (phi, psi) system.
Eigen::MatrixXd apply_H(const OperatorAssembly& a, const Eigen::MatrixXd& g);
/// Same operator by a dense factorization of the field system.
Eigen::MatrixXd apply_H_direct(const OperatorAssembly& a, const Eigen::MatrixXd& g);

double evaluate_cost(const OperatorAssembly& a, const StateSnapshot& s, const ControlSignal& u);
double value_function(const OperatorAssembly& a, const StateSnapshot& s);
ControlSignal cost_gradient(const OperatorAssembly& a, const StateSnapshot& s, const ControlSignal& u);

struct Spectrum {
    double min_eig = 0.0;
    double max_eig = 0.0;
};

/// Extreme eigenvalues of I + Lambda Lambda* in the weighted inner product.
Spectrum field_system_spectrum(const OperatorAssembly& a);

}  // namespace dampctl

#endif

#ifndef DAMPCTL_RICCATI_HPP
#define DAMPCTL_RICCATI_HPP

#include <vector>

#include <Eigen/Dense>

#include "dampctl/control.hpp"
#include "dampctl/forward.hpp"
#include "dampctl/kernels.hpp"

namespace dampctl {

/// Image of a state under the generator of the state equation.
/// dxi is the time derivative of the history; in forward storage it is the
/// ordinary derivative d/ds xi(s) (minus the derivative in the reversed
/// variable used by the state-space formulation).
struct GeneratorImage {
    Eigen::VectorXd dv;
    Eigen::MatrixXd dxi;
    Eigen::VectorXd dy;
};

/// Discrete domain test: history continuous at tau (xi(tau) = v_hat).
bool in_generator_domain(const StateSnapshot& s, double tol = 1e-10);

GeneratorImage apply_generator(const StateSnapshot& s, const KernelTable& table);

/// The future evolution depends on a state only through x = (v_hat, y_hat - E xi).
Eigen::VectorXd state_coordinates(const StateSnapshot& s, double dt);

/// Rate of x along the free evolution, assembled from a generator image.
/// The history interval grows with time, which adds e^{-tau} xi(0) to the
/// rate of the memory term.
Eigen::VectorXd coordinate_rate(const StateSnapshot& s, const GeneratorImage& g, double dt);

/// |v_hat|^2 + |xi|^2_{L2(0,tau;H)} + |A^{-1} y_hat|^2.
double state_norm_sq(const StateSnapshot& s, const SpectralBasis& basis, double dt);

/// Quadratic form of P(theta) and feedback gain in x coordinates, for every
/// remaining horizon L = 0..n_steps (theta index = n_steps - L).
class RiccatiTables {
public:
    explicit RiccatiTables(const KernelTable& table);

    const Eigen::MatrixXd& Pi(int L) const { return pi_[L]; }
    /// First node of u+ as a linear map of x (the discrete optimum's value at theta).
    const Eigen::MatrixXd& gain(int L) const { return gain_[L]; }
    /// Product-rule value of int_theta^T K*(s - theta) v+(s) ds at theta, as a map of x.
    const Eigen::MatrixXd& trace_gain(int L) const { return trace_gain_[L]; }
    const KernelTable& table() const { return *table_; }
    int n_steps() const { return table_->n_steps(); }

    double form(int theta_index, const Eigen::VectorXd& x1, const Eigen::VectorXd& x2) const;
    BoundaryVector feedback(int theta_index, const Eigen::VectorXd& x) const;
    BoundaryVector trace_feedback(int theta_index, const Eigen::VectorXd& x) const;
    /// d/dtheta of Pi by central differences in theta (one-sided at the ends).
    Eigen::MatrixXd Pi_rate(int theta_index) const;

private:
    const KernelTable* table_;
    std::vector<Eigen::MatrixXd> pi_, gain_, trace_gain_;
};

/// <P(theta) S1, S2> = <H h1, h2> evaluated with the operators on [theta, T].
double P_form(const KernelTable& table, const StateSnapshot& s1, const StateSnapshot& s2);

struct TerminalReport {
    double max_abs_at_T = 0.0;
    double max_last_panel = 0.0;
    double last_panel_bound = 0.0;
};
TerminalReport terminal_P_check(const KernelTable& table, const std::vector<StateSnapshot>& states_at_T,
                                const std::vector<StateSnapshot>& states_before_T);

/// First node of u+ from the optimal control problem started at s.
BoundaryVector feedback_gain(const KernelTable& table, const StateSnapshot& s);
/// u+(theta) = int_theta^T K*(s - theta) v+(s) ds evaluated by the product rule.
/// Differs from the first node of the discrete u+ by O(dt): the discrete
/// adjoint's endpoint value averages over half a panel.
BoundaryVector trace_gain(const KernelTable& table, const Eigen::MatrixXd& v_plus);

struct ClosedLoopResult {
    ControlSignal u;
    Trajectory v;
};
ClosedLoopResult closed_loop_simulate(const StateSnapshot& s0, const RiccatiTables& tables);

struct BellmanReport {
    double tail_mismatch = 0.0;     // L2 on the nodes strictly after t0
    double junction_mismatch = 0.0; // |difference| at t0 itself
    double telescoping = 0.0;
    double W_tau = 0.0;
};
BellmanReport bellman_check(const KernelTable& table, const StateSnapshot& s, int t0_index);
/// Same, with the assemblies at tau and t0 supplied by the caller.
BellmanReport bellman_check(const OperatorAssembly& a_tau, const OperatorAssembly& a_t0, const StateSnapshot& s);

struct DissipationReport {
    Eigen::VectorXd theta, W, dW, r;
};
DissipationReport dissipation_scan(const StateSnapshot& s, const ControlSignal& u, const RiccatiTables& tables);

/// <P'(theta) S, S> from its closed form.
double P_prime_form(const RiccatiTables& tables, const StateSnapshot& s);

struct RiccatiTerms {
    double p_prime_quotient = 0.0;  // from difference quotients of P in theta
    double p_prime_explicit = 0.0;
    double cross = 0.0;             // <P S, A S> + <A S, P S>
    double gain_sq = 0.0;           // |B* P S|^2, pointwise trace
    double observation = 0.0;       // |v_hat|^2
    double residual = 0.0;
    double relative = 0.0;
};
RiccatiTerms riccati_residual(const RiccatiTables& tables, const StateSnapshot& s);

struct ChainRuleReport {
    Eigen::VectorXd theta, dW_fd, dW_formula, relative;
};
/// Compares the difference quotient of theta -> W(S(theta)) along the
/// trajectory driven by u with <P'S,S> + 2<PS,S'>.
ChainRuleReport chain_rule_closure(const StateSnapshot& s, const ControlSignal& u, const RiccatiTables& tables);

}  // namespace dampctl

#endif

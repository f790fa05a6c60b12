#ifndef DAMPCTL_EXPERIMENTS_HPP
#define DAMPCTL_EXPERIMENTS_HPP

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dampctl/config.hpp"
#include "dampctl/forward.hpp"
#include "dampctl/kernels.hpp"

namespace dampctl {

/// A continuous-time random state, sampled on any grid so that refinement
/// studies compare the same object. Mode n history:
///   xi_n(s) = scale (a_n + b_n s + c_n sin(omega_n s + phi_n)) / n^3
struct StateRecipe {
    Eigen::VectorXd a, b, c, omega, phi;
    Eigen::VectorXd y_hat;

    Eigen::VectorXd history(double s) const;
    Eigen::VectorXd history_rate(double s) const;
    /// State at node tau_index of a grid with step dt.
    StateSnapshot sample(int tau_index, double dt) const;
};

/// Draws states and controls for a data / control preset from a seeded stream.
class DataFactory {
public:
    DataFactory(const ExperimentConfig& cfg, std::uint64_t stream);

    StateRecipe state();
    SmoothControl control();

private:
    int n_modes_;
    std::string data_preset_, control_preset_;
    double scale_, amplitude_;
    std::mt19937_64 rng_;
};

/// Replaces y_hat so that the free evolution leaves tau with the slope of the
/// history, which keeps the extended history free of a kink at tau.
void make_compatible(StateSnapshot& s, const StateRecipe& r, const BoundaryVector& u_tau, const KernelTable& table);

struct Check {
    std::string name;
    double measured = 0.0;
    std::string relation;  // "<=", ">=", "in", ">"
    double lo = 0.0, hi = 0.0;
    bool pass = false;

    std::string threshold() const;
};

Check upper(std::string name, double measured, double bound);
Check lower(std::string name, double measured, double bound);
Check strictly_above(std::string name, double measured, double bound);
Check band(std::string name, double measured, double lo, double hi);

struct Criterion {
    std::string name;
    std::vector<Check> checks;
    bool pass() const;
};

struct SuiteReport {
    std::string suite;
    std::vector<Criterion> criteria;
    std::vector<std::pair<std::string, std::string>> files;  // name, CSV text
    bool pass() const;
};

const std::vector<std::string>& suite_names();
/// Runs suites in order, sharing kernel and Riccati tables between them.
std::vector<SuiteReport> run_suites(const std::vector<std::string>& names, const ExperimentConfig& cfg);
SuiteReport run_suite(const std::string& name, const ExperimentConfig& cfg);

/// log2(coarse / fine); errors at round-off level count as converged.
double observed_order(double coarse, double fine);

std::string summary_tsv(const std::vector<SuiteReport>& reports, const ExperimentConfig& cfg);
std::string summary_json(const std::vector<SuiteReport>& reports, const ExperimentConfig& cfg);

}  // namespace dampctl

#endif

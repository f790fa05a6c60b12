#ifndef DAMPCTL_CONFIG_HPP
#define DAMPCTL_CONFIG_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dampctl {

/// Experiment configuration, read from an INI file:
///
///   [grid]     n_modes, t_final, n_steps        (required)
///   [data]     preset = smooth | rough_y | zero (required), scale
///   [control]  preset = smooth | zero, amplitude
///   [suite]    seed, tol_scale
///   [output]   dir
struct ExperimentConfig {
    int n_modes = 8;
    double t_final = 0.5;
    int n_steps = 256;
    std::string data_preset = "smooth";
    double data_scale = 1.0;
    std::string control_preset = "smooth";
    double control_amplitude = 0.3;
    std::uint64_t seed = 20240917;
    double tol_scale = 1.0;
    std::string output_dir = "out";
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Throws ConfigError naming the file, line and key on any problem.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<string>");
/// Throws ConfigError if a field is out of range.
void validate(const ExperimentConfig& cfg);

}  // namespace dampctl

#endif

#include "dampctl/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace dampctl {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>> kSchema = {
    {"grid", {"n_modes", "t_final", "n_steps"}},
    {"data", {"preset", "scale"}},
    {"control", {"preset", "amplitude"}},
    {"suite", {"seed", "tol_scale"}},
    {"output", {"dir"}},
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// ptree drops positions, so keys are located again in the raw text for diagnostics.
class Locator {
public:
    Locator(const std::string& text, std::string origin) : origin_(std::move(origin)) {
        std::istringstream in(text);
        std::string line, section;
        for (int no = 1; std::getline(in, line); ++no) {
            const std::string t = trim(line);
            if (t.empty() || t[0] == ';' || t[0] == '#') continue;
            if (t.front() == '[' && t.back() == ']') {
                section = trim(t.substr(1, t.size() - 2));
                sections_.emplace(section, no);
                continue;
            }
            const auto eq = t.find('=');
            if (eq != std::string::npos) keys_.emplace(section + "." + trim(t.substr(0, eq)), no);
        }
    }

    std::string where(const std::string& section, const std::string& key = "") const {
        const auto it = key.empty() ? sections_.find(section) : keys_.find(section + "." + key);
        const bool found = key.empty() ? it != sections_.end() : it != keys_.end();
        return found ? origin_ + ":" + std::to_string(it->second) : origin_;
    }

private:
    std::string origin_;
    std::map<std::string, int> sections_, keys_;
};

template <class T>
T read_value(const pt::ptree& tree, const Locator& loc, const std::string& section, const std::string& key,
             const T* fallback) {
    const auto sec = tree.get_child_optional(section);
    const auto node = sec ? sec->get_child_optional(key) : boost::none;
    if (!node) {
        if (fallback) return *fallback;
        throw ConfigError(loc.where(section) + ": missing required field [" + section + "] " + key);
    }
    const auto value = node->get_value_optional<T>();
    if (!value)
        throw ConfigError(loc.where(section, key) + ": cannot parse [" + section + "] " + key + " = '" +
                          node->data() + "'");
    return *value;
}

}  // namespace

void validate(const ExperimentConfig& c) {
    auto fail = [](const std::string& msg) { throw ConfigError("invalid configuration: " + msg); };
    if (c.n_modes < 1 || c.n_modes > 64) fail("grid.n_modes must be in [1, 64]");
    if (!std::isfinite(c.t_final) || c.t_final <= 0.0) fail("grid.t_final must be finite and positive");
    if (c.n_steps < 8 || c.n_steps > 1024 || c.n_steps % 8 != 0)
        fail("grid.n_steps must be a multiple of 8 in [8, 1024]");
    if (c.data_preset != "smooth" && c.data_preset != "rough_y" && c.data_preset != "zero")
        fail("data.preset must be smooth, rough_y or zero");
    if (!std::isfinite(c.data_scale) || c.data_scale < 0.0) fail("data.scale must be finite and nonnegative");
    if (c.control_preset != "smooth" && c.control_preset != "zero") fail("control.preset must be smooth or zero");
    if (!std::isfinite(c.control_amplitude) || c.control_amplitude <= 0.0)
        fail("control.amplitude must be finite and positive");
    if (!std::isfinite(c.tol_scale) || c.tol_scale <= 0.0) fail("suite.tol_scale must be finite and positive");
    if (c.output_dir.empty()) fail("output.dir must not be empty");
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    const Locator loc(text, origin);
    for (const auto& [section, keys] : tree) {
        if (!keys.data().empty() && keys.empty())
            throw ConfigError(loc.where("", section) + ": key '" + section + "' outside any section");
        const auto schema = kSchema.find(section);
        if (schema == kSchema.end()) throw ConfigError(loc.where(section) + ": unknown section [" + section + "]");
        for (const auto& kv : keys)
            if (!schema->second.count(kv.first))
                throw ConfigError(loc.where(section, kv.first) + ": unknown key [" + section + "] " + kv.first);
    }

    const ExperimentConfig d;
    ExperimentConfig c;
    c.n_modes = read_value<int>(tree, loc, "grid", "n_modes", nullptr);
    c.t_final = read_value<double>(tree, loc, "grid", "t_final", nullptr);
    c.n_steps = read_value<int>(tree, loc, "grid", "n_steps", nullptr);
    c.data_preset = read_value<std::string>(tree, loc, "data", "preset", nullptr);
    c.data_scale = read_value<double>(tree, loc, "data", "scale", &d.data_scale);
    c.control_preset = read_value<std::string>(tree, loc, "control", "preset", &d.control_preset);
    c.control_amplitude = read_value<double>(tree, loc, "control", "amplitude", &d.control_amplitude);
    c.seed = read_value<std::uint64_t>(tree, loc, "suite", "seed", &d.seed);
    c.tol_scale = read_value<double>(tree, loc, "suite", "tol_scale", &d.tol_scale);
    c.output_dir = read_value<std::string>(tree, loc, "output", "dir", &d.output_dir);
    try {
        validate(c);
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open configuration file");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path);
}

}  // namespace dampctl

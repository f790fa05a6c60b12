// Command-line driver for the verification suites.
//
//   dampctl_cli <command> --config FILE [--out DIR] [--seed N] [--tol-scale X]
//
// Commands: kernels forward optimize bellman dissipation riccati closed-loop all

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "dampctl/config.hpp"
#include "dampctl/experiments.hpp"

namespace fs = std::filesystem;
using namespace dampctl;

namespace {

void write_atomic(const fs::path& path, const std::string& text) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << text;
        if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

int run(const std::string& command, const std::string& config_path, const std::optional<std::string>& out_dir,
        const std::optional<std::uint64_t>& seed, const std::optional<double>& tol_scale) {
    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path);
        if (out_dir) cfg.output_dir = *out_dir;
        if (seed) cfg.seed = *seed;
        if (tol_scale) cfg.tol_scale = *tol_scale;
        validate(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }

    const std::vector<std::string> names = command == "all" ? suite_names() : std::vector<std::string>{command};
    std::vector<SuiteReport> reports;
    for (const auto& name : names) {
        const auto t0 = std::chrono::steady_clock::now();
        reports.push_back(run_suites({name}, cfg).front());
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cerr << name << ": " << (reports.back().pass() ? "pass" : "FAIL") << " (" << secs << " s)\n";
    }

    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    bool ok = true;
    for (const auto& rep : reports) {
        for (const auto& [file, text] : rep.files) write_atomic(dir / file, text);
        ok = ok && rep.pass();
    }
    const std::string tsv = summary_tsv(reports, cfg);
    write_atomic(dir / "summary.tsv", tsv);
    write_atomic(dir / "summary.json", summary_json(reports, cfg));
    std::cout << tsv;
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Boundary control of the strongly damped wave equation: verification suites"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol_scale;
    std::string chosen;

    std::vector<std::string> commands = suite_names();
    commands.push_back("all");
    for (const auto& name : commands) {
        CLI::App* sub = app.add_subcommand(name, name == "all" ? "run every suite" : "run the " + name + " suite");
        sub->add_option("--config", config_path, "INI configuration file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides [output] dir)");
        sub->add_option("--seed", seed, "seed for the randomized suites");
        sub->add_option("--tol-scale", tol_scale, "multiplier applied to every tolerance");
        sub->callback([&chosen, name] { chosen = name; });
    }
    CLI11_PARSE(app, argc, argv);

    try {
        return run(chosen, config_path, out_dir, seed, tol_scale);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}

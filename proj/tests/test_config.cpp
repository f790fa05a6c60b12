#include <doctest.h>

#include <string>

#include "dampctl/config.hpp"
#include "dampctl/experiments.hpp"

using namespace dampctl;

namespace {

const char* kValid = R"([grid]
n_modes = 4
t_final = 0.5
n_steps = 64

[data]
preset = smooth
scale = 2

[control]
preset = zero
amplitude = 0.1

[suite]
seed = 7
tol_scale = 1.5

[output]
dir = somewhere
)";

std::string error_of(const std::string& text) {
    try {
        validate(parse_config(text, "cfg.ini"));
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
    text.replace(text.find(from), from.size(), to);
    return text;
}

ExperimentConfig small() {
    ExperimentConfig cfg;
    cfg.n_modes = 4;
    cfg.n_steps = 64;
    return cfg;
}

}  // namespace

TEST_CASE("valid config") {
    const ExperimentConfig c = parse_config(kValid);
    CHECK(c.n_modes == 4);
    CHECK(c.t_final == 0.5);
    CHECK(c.n_steps == 64);
    CHECK(c.data_preset == "smooth");
    CHECK(c.data_scale == 2.0);
    CHECK(c.control_preset == "zero");
    CHECK(c.control_amplitude == 0.1);
    CHECK(c.seed == 7);
    CHECK(c.tol_scale == 1.5);
    CHECK(c.output_dir == "somewhere");
    CHECK_NOTHROW(validate(c));
    CHECK(error_of(kValid).empty());
}

TEST_CASE("config errors name the problem") {
    const std::string missing = error_of(replace(kValid, "n_steps = 64\n", ""));
    CHECK(missing.find("cfg.ini") != std::string::npos);
    CHECK(missing.find("n_steps") != std::string::npos);

    const std::string unknown = error_of(replace(kValid, "scale = 2", "scael = 2"));
    CHECK(unknown.find("scael") != std::string::npos);
    CHECK(unknown.find("cfg.ini:8") != std::string::npos);

    const std::string badnum = error_of(replace(kValid, "t_final = 0.5", "t_final = half"));
    CHECK(badnum.find("t_final") != std::string::npos);
    CHECK(badnum.find(":3") != std::string::npos);

    CHECK(error_of(replace(kValid, "[suite]", "[suite")).find("cfg.ini") != std::string::npos);
    CHECK_FALSE(error_of(replace(kValid, "[output]", "[outputs]")).empty());
    CHECK_FALSE(error_of(replace(kValid, "preset = smooth", "preset = jagged")).empty());
}

TEST_CASE("validation") {
    ExperimentConfig c;
    CHECK_NOTHROW(validate(c));
    auto rejects = [](auto mutate) {
        ExperimentConfig c;
        mutate(c);
        CHECK_THROWS_AS(validate(c), ConfigError);
    };
    rejects([](ExperimentConfig& c) { c.n_modes = 0; });
    rejects([](ExperimentConfig& c) { c.n_steps = 100; });
    rejects([](ExperimentConfig& c) { c.t_final = -1; });
    rejects([](ExperimentConfig& c) { c.tol_scale = 0; });
    rejects([](ExperimentConfig& c) { c.data_preset = "other"; });
    rejects([](ExperimentConfig& c) { c.control_preset = "rough"; });
    CHECK_THROWS_AS(load_config("/nonexistent/file.ini"), ConfigError);
}

TEST_CASE("suites are deterministic") {
    const ExperimentConfig cfg = small();
    const SuiteReport a = run_suite("optimize", cfg);
    const SuiteReport b = run_suite("optimize", cfg);
    REQUIRE(a.files.size() == b.files.size());
    for (std::size_t i = 0; i < a.files.size(); ++i) CHECK(a.files[i] == b.files[i]);
    CHECK(summary_tsv({a}, cfg) == summary_tsv({b}, cfg));

    ExperimentConfig other = cfg;
    other.seed = cfg.seed + 1;
    CHECK(run_suite("optimize", other).files != a.files);
    CHECK_THROWS(run_suite("nonsense", cfg));
}

TEST_CASE("zero data gives zero optimal cost") {
    ExperimentConfig cfg = small();
    cfg.data_preset = "zero";
    const SuiteReport rep = run_suite("optimize", cfg);
    for (const auto& c : rep.criteria)
        for (const auto& k : c.checks)
            if (k.name.find("value") != std::string::npos || k.name.find("gap") != std::string::npos)
                CHECK(k.measured == doctest::Approx(0.0));
}

TEST_CASE("summary") {
    const ExperimentConfig cfg = small();
    const std::vector<SuiteReport> reps = run_suites({"kernels"}, cfg);
    const std::string tsv = summary_tsv(reps, cfg);
    CHECK(tsv.rfind("# seed", 0) == 0);
    CHECK(tsv.find("kernel_oracle") != std::string::npos);
    const std::string json = summary_json(reps, cfg);
    CHECK(json.find("\"kernels\"") != std::string::npos);
    CHECK(observed_order(4.0, 1.0) == doctest::Approx(2.0));
}

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "riskgen/grid.hpp"
#include "riskgen/onestep.hpp"
#include "riskgen/reference.hpp"
#include "riskgen/testfn.hpp"

namespace riskgen::cli {

enum ExitCode : int { ok = 0, verdict_failed = 1, validation_failed = 2, invariant_violated = 3, internal_error = 4 };

struct OracleConfig {
    // hjb, entropic, variance_scan, monte_carlo
    std::string type;
    std::optional<double> hamiltonian_lo, hamiltonian_hi;
    std::size_t hamiltonian_points = 0;
    int scan_points = 400;
    std::size_t paths = 10000;
    int steps = 50;
    std::vector<double> points;
    // constant drift controls; the zero control is always included
    std::vector<double> controls;
};

struct Tolerances {
    double abs_error = 1e-6;
    double slack = 0.1;
    // 0 selects the per-subcommand default (residual 5, chernoff 4)
    double decay_factor = 0.0;
    double invariant = 1e-9;
    double conjugate = 1e-9;
};

struct OutputPaths {
    std::string csv;
    std::string json;
};

struct ExperimentConfig {
    std::optional<ReferenceModel> model;
    std::optional<PenaltySpec> penalty;
    std::optional<Grid> grid;
    std::optional<double> t;
    std::vector<double> h_list;
    std::vector<int> n_list;
    std::vector<double> args;
    std::optional<TestFunction> test_function;
    OutputPaths output;
    std::optional<std::uint64_t> seed;
    double radius = 2.0;
    // chernoff comparator: entropic, variance_scan or hjb
    std::string comparator;
    OracleConfig oracle;
    Tolerances tolerances;
    std::vector<int> criteria;
};

// schema check and conversion; ValidationError names the offending field as config.<path>
ExperimentConfig parse_config(const nlohmann::json& j);

// 64-bit FNV-1a, lower-case hex
std::string fnv1a_hex(const std::string& bytes);

const std::vector<std::string>& subcommands();

/**
 * @brief Runs one subcommand on a JSON config file.
 *
 * Writes <out_dir>/<output.csv> and <out_dir>/<output.json> (defaults
 * <subcommand>.csv / .json), each through a temporary file and a rename.
 * Returns an ExitCode; messages go to `err`, a one-line summary to `out`.
 */
int run(const std::string& subcommand, const std::string& config_path, const std::string& out_dir,
        std::optional<std::uint64_t> seed, std::ostream& out, std::ostream& err);

}  // namespace riskgen::cli

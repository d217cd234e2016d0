#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "snellkit/chain_model.hpp"
#include "snellkit/diffusion_scale.hpp"

namespace snellkit {

/// Model block of a JSON job config, diffusion flavor. Coefficients are
/// named forms so configs stay declarative: drift is one of
/// constant(value) | affine(intercept, slope) | gbm(rate) | ou(rate, mean),
/// vol one of constant(value) | affine(intercept, slope) | gbm(sigma).
struct DiffusionConfig {
    double a = 0.0, b = 1.0;
    double alpha = 0.0;
    std::string grid_kind = "uniform";  // "uniform" | "log"
    int grid_points = 201;
    double dt = 0.0;   // lattice commands only
    int horizon = 0;   // lattice commands only
    std::string drift_form = "constant";
    double drift_a = 0.0, drift_b = 0.0;
    std::string vol_form = "constant";
    double vol_a = 1.0, vol_b = 0.0;

    std::function<double(double)> make_drift() const;
    std::function<double(double)> make_vol() const;
    DiffusionSpec make_spec() const;
};

struct PayoffConfig {
    std::string kind = "put";  // put | call | power | table
    double strike = 1.0;
    double exponent = 2.0;
    double scale = 1.0;
    std::vector<double> table;

    PayoffSpec on_states(std::span<const double> states) const;
    std::function<double(double)> as_function() const;  // table is chain-only
};

struct RunConfig {
    std::optional<double> x0;
    std::uint64_t seed = 12345;
    long n_paths = 0;  // 0 = exact enumeration for `dual`
    double tol = 1e-10;
    int depth = 3;
    std::vector<int> probe_times;
    std::string dual_f = "value";  // zero | payoff | value
    std::optional<std::pair<double, double>> interval;
    double h0 = 1e-3;
    int levels = 3;
    bool stationary = false;
};

struct JobConfig {
    bool is_diffusion = false;
    ChainModel chain;          // `model.kind == "chain"` only
    DiffusionConfig diffusion; // `model.kind == "diffusion"` only
    PayoffConfig payoff;
    RunConfig run;
};

/// Parses and validates a JSON job config; std::invalid_argument names the
/// offending field.
JobConfig parse_config(const std::string& text);

struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<long> paths;
    std::optional<int> grid;
    std::optional<double> tol;
};

struct CommandResult {
    std::string report_json;  // deterministic bytes for a fixed config
    std::string csv;
};

/// Commands: solve, decompose, mu, approx_dm, dual, diffusion_solve,
/// smoothfit. Validation problems throw std::invalid_argument; numerical
/// failures (absolute-continuity violations, caps, overflow) derive from
/// std::runtime_error.
CommandResult run_command(const std::string& command, const JobConfig& config,
                          const CliOverrides& overrides = {});

}  // namespace snellkit

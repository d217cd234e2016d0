#include "snellkit/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "snellkit/doob_meyer.hpp"
#include "snellkit/dual_bounds.hpp"
#include "snellkit/majorant.hpp"
#include "snellkit/snell.hpp"

namespace snellkit {

namespace {

using ojson = nlohmann::ordered_json;

std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

[[noreturn]] void bad(const std::string& what) { throw std::invalid_argument(what); }

const ojson& need(const ojson& j, const std::string& where, const char* key) {
    if (!j.is_object()) bad(where + " must be a JSON object");
    const auto it = j.find(key);
    if (it == j.end()) bad(where + "." + key + " is required");
    return *it;
}

const ojson* maybe(const ojson& j, const char* key) {
    if (!j.is_object()) return nullptr;
    const auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

double as_num(const ojson& j, const std::string& where) {
    if (!j.is_number()) bad(where + " must be a number");
    return j.get<double>();
}

long as_int(const ojson& j, const std::string& where) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) bad(where + " must be an integer");
    return j.get<long>();
}

std::string as_str(const ojson& j, const std::string& where) {
    if (!j.is_string()) bad(where + " must be a string");
    return j.get<std::string>();
}

std::vector<double> as_doubles(const ojson& j, const std::string& where) {
    if (!j.is_array()) bad(where + " must be an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (size_t i = 0; i < j.size(); ++i) out.push_back(as_num(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

double opt_num(const ojson& j, const char* key, const std::string& where, double dflt) {
    const ojson* p = maybe(j, key);
    return p ? as_num(*p, where + "." + std::string(key)) : dflt;
}

long opt_int(const ojson& j, const char* key, const std::string& where, long dflt) {
    const ojson* p = maybe(j, key);
    return p ? as_int(*p, where + "." + std::string(key)) : dflt;
}

std::string opt_str(const ojson& j, const char* key, const std::string& where,
                    const std::string& dflt) {
    const ojson* p = maybe(j, key);
    return p ? as_str(*p, where + "." + std::string(key)) : dflt;
}

ojson matrix_json(std::span<const double> data, int rows, int cols) {
    ojson m = ojson::array();
    for (int k = 0; k < rows; ++k) {
        ojson row = ojson::array();
        for (int i = 0; i < cols; ++i) row.push_back(data[static_cast<size_t>(k) * cols + i]);
        m.push_back(std::move(row));
    }
    return m;
}

ojson matrix_json(const std::vector<std::uint8_t>& data, int rows, int cols) {
    ojson m = ojson::array();
    for (int k = 0; k < rows; ++k) {
        ojson row = ojson::array();
        for (int i = 0; i < cols; ++i) row.push_back(static_cast<int>(data[static_cast<size_t>(k) * cols + i]));
        m.push_back(std::move(row));
    }
    return m;
}

constexpr int kMaxEmbeddedCells = 10000;

struct Resolved {
    ChainModel chain;
    PayoffSpec payoff;
    int root = 0;
};

int root_index(const ChainModel& chain, const RunConfig& run) {
    if (run.x0) return nearest_index(chain.states, *run.x0);
    return (chain.n_states() - 1) / 2;
}

Resolved resolve_chain(const JobConfig& config, const CliOverrides& ov) {
    Resolved r;
    if (config.is_diffusion) {
        const DiffusionConfig& d = config.diffusion;
        if (!(d.dt > 0.0) || d.horizon < 1)
            bad("lattice commands on a diffusion model need model.dt > 0 and model.horizon >= 1");
        const int n = ov.grid.value_or(d.grid_points);
        r.chain = discretize_diffusion(d.make_drift(), d.make_vol(), d.a, d.b, n, d.dt, d.alpha,
                                       d.horizon);
    } else {
        r.chain = config.chain;
    }
    r.payoff = config.payoff.on_states(r.chain.states);
    r.root = root_index(r.chain, config.run);
    return r;
}

ojson model_summary(const ChainModel& chain, int root) {
    ojson m;
    m["n_states"] = chain.n_states();
    m["horizon"] = chain.horizon;
    m["dt"] = chain.dt;
    m["alpha"] = chain.alpha;
    m["root_index"] = root;
    m["root_state"] = chain.states[root];
    return m;
}

std::string csv_solution(const ChainModel& chain, const SnellSolution& sol) {
    std::string csv = "k,state,S,G,cont,stop\n";
    for (int k = 0; k < sol.n_rows; ++k)
        for (int i = 0; i < sol.n_cols; ++i) {
            csv += std::to_string(k);
            csv += ',';
            csv += csv_num(chain.states[i]);
            csv += ',';
            csv += csv_num(sol.s(k, i));
            csv += ',';
            csv += csv_num(sol.g(k, i));
            csv += ',';
            csv += csv_num(sol.c(k, i));
            csv += ',';
            csv += sol.stops(k, i) ? '1' : '0';
            csv += '\n';
        }
    return csv;
}

CommandResult cmd_solve(const JobConfig& config, const CliOverrides& ov) {
    const Resolved r = resolve_chain(config, ov);
    const double tol = ov.tol.value_or(config.run.tol);
    ojson report;
    report["command"] = "solve";
    report["model"] = model_summary(r.chain, r.root);
    CommandResult out;
    if (config.run.stationary) {
        const StationarySolution st = solve_snell_stationary(r.chain, r.payoff, tol);
        report["mode"] = "stationary";
        report["value"] = st.V[r.root];
        report["steps"] = st.steps;
        report["residual"] = st.residual;
        report["converged"] = st.converged;
        const int n = r.chain.n_states();
        if (n <= kMaxEmbeddedCells) {
            report["V"] = st.V;
            report["cont"] = st.cont;
        }
        out.csv = "k,state,S,G,cont,stop\n";
        for (int i = 0; i < n; ++i) {
            out.csv += "0,";
            out.csv += csv_num(r.chain.states[i]);
            out.csv += ',';
            out.csv += csv_num(st.V[i]);
            out.csv += ',';
            out.csv += csv_num(r.payoff.values[i]);
            out.csv += ',';
            out.csv += csv_num(st.cont[i]);
            out.csv += ',';
            out.csv += (st.V[i] - r.payoff.values[i] <= contact_tol) ? '1' : '0';
            out.csv += '\n';
        }
    } else {
        const SnellSolution sol = solve_snell(r.chain, r.payoff);
        report["mode"] = "finite_horizon";
        report["value"] = sol.value_at_root(r.root);
        ojson stop_counts = ojson::array();
        for (int k = 0; k < sol.n_rows; ++k) {
            int c = 0;
            for (int i = 0; i < sol.n_cols; ++i) c += sol.stops(k, i) ? 1 : 0;
            stop_counts.push_back(c);
        }
        report["stop_counts"] = std::move(stop_counts);
        if (sol.n_rows * sol.n_cols <= kMaxEmbeddedCells) {
            report["S"] = matrix_json(sol.S, sol.n_rows, sol.n_cols);
            report["G"] = matrix_json(sol.G, sol.n_rows, sol.n_cols);
            report["cont"] = matrix_json(sol.cont, sol.n_rows, sol.n_cols);
            report["stop"] = matrix_json(sol.stop_region, sol.n_rows, sol.n_cols);
        } else {
            report["surfaces_in_csv"] = true;
        }
        out.csv = csv_solution(r.chain, sol);
    }
    out.report_json = report.dump(2) + "\n";
    return out;
}

CommandResult cmd_decompose(const JobConfig& config, const CliOverrides& ov) {
    const Resolved r = resolve_chain(config, ov);
    const SnellSolution sol = solve_snell(r.chain, r.payoff);
    Decomposition dec = decompose(r.chain, r.payoff, sol);
    const BoundReport bound = increment_bound_check(dec);
    ojson report;
    report["command"] = "decompose";
    report["model"] = model_summary(r.chain, r.root);
    report["value"] = sol.value_at_root(r.root);
    double da_max = 0.0;
    long da_positive = 0;
    for (double v : dec.dA) {
        da_max = std::max(da_max, v);
        if (v > 0.0) ++da_positive;
    }
    report["dA_max"] = da_max;
    report["dA_positive_nodes"] = da_positive;
    ojson bc;
    bc["ok"] = bound.ok;
    bc["max_violation"] = bound.max_violation;
    bc["worst_step"] = bound.worst_step;
    bc["worst_state"] = bound.worst_state;
    bc["nodes_checked"] = bound.nodes_checked;
    report["bound_check"] = std::move(bc);
    if (dec.n_steps * dec.n_cols <= kMaxEmbeddedCells) {
        report["dA"] = matrix_json(dec.dA, dec.n_steps, dec.n_cols);
        report["dD"] = matrix_json(dec.dD, dec.n_steps, dec.n_cols);
        report["dDplus"] = matrix_json(dec.dDplus, dec.n_steps, dec.n_cols);
        report["dDminus"] = matrix_json(dec.dDminus, dec.n_steps, dec.n_cols);
        report["mu"] = matrix_json(dec.mu, dec.n_steps, dec.n_cols);
    } else {
        report["surfaces_in_csv"] = true;
    }
    CommandResult out;
    out.report_json = report.dump(2) + "\n";
    out.csv = "k,state,dA,dD,dDplus,dDminus,mu\n";
    for (int k = 0; k < dec.n_steps; ++k)
        for (int i = 0; i < dec.n_cols; ++i) {
            out.csv += std::to_string(k);
            out.csv += ',';
            out.csv += csv_num(r.chain.states[i]);
            out.csv += ',';
            out.csv += csv_num(dec.da(k, i));
            out.csv += ',';
            out.csv += csv_num(dec.dd(k, i));
            out.csv += ',';
            out.csv += csv_num(dec.dd_plus(k, i));
            out.csv += ',';
            out.csv += csv_num(dec.dd_minus(k, i));
            out.csv += ',';
            out.csv += csv_num(dec.mu_at(k, i));
            out.csv += '\n';
        }
    return out;
}

CommandResult cmd_mu(const JobConfig& config, const CliOverrides& ov) {
    const Resolved r = resolve_chain(config, ov);
    const SnellSolution sol = solve_snell(r.chain, r.payoff);
    Decomposition dec = decompose(r.chain, r.payoff, sol);
    ojson report;
    report["command"] = "mu";
    report["model"] = model_summary(r.chain, r.root);
    double mu_min = std::numeric_limits<double>::infinity();
    double mu_max = -std::numeric_limits<double>::infinity();
    long undefined = 0, defined = 0;
    for (int k = 0; k < dec.n_steps; ++k)
        for (int i = 0; i < dec.n_cols; ++i) {
            if (!dec.mu_is_defined(k, i)) {
                ++undefined;
                continue;
            }
            ++defined;
            mu_min = std::min(mu_min, dec.mu_at(k, i));
            mu_max = std::max(mu_max, dec.mu_at(k, i));
        }
    report["n_defined"] = defined;
    report["n_undefined"] = undefined;
    report["mu_min"] = defined ? ojson(mu_min) : ojson(nullptr);
    report["mu_max"] = defined ? ojson(mu_max) : ojson(nullptr);
    if (dec.n_steps * dec.n_cols <= kMaxEmbeddedCells)
        report["mu"] = matrix_json(dec.mu, dec.n_steps, dec.n_cols);
    else
        report["surfaces_in_csv"] = true;
    CommandResult out;
    out.report_json = report.dump(2) + "\n";
    out.csv = "k,state,mu\n";
    for (int k = 0; k < dec.n_steps; ++k)
        for (int i = 0; i < dec.n_cols; ++i) {
            out.csv += std::to_string(k);
            out.csv += ',';
            out.csv += csv_num(r.chain.states[i]);
            out.csv += ',';
            out.csv += csv_num(dec.mu_at(k, i));
            out.csv += '\n';
        }
    return out;
}

CommandResult cmd_approx_dm(const JobConfig& config, const CliOverrides& ov) {
    const Resolved r = resolve_chain(config, ov);
    std::vector<int> probes = config.run.probe_times;
    if (probes.empty()) probes = {r.chain.horizon / 2, r.chain.horizon};
    const ApproxReport ap =
        partition_approximation(r.chain, r.payoff, r.root, probes, config.run.depth);
    ojson report;
    report["command"] = "approx_dm";
    report["model"] = model_summary(r.chain, r.root);
    report["depth"] = config.run.depth;
    ojson sizes = ojson::array();
    for (const auto& part : ap.partitions) sizes.push_back(static_cast<int>(part.size()));
    report["partition_blocks"] = std::move(sizes);
    report["probe_times"] = ap.probe_times;
    report["an_values"] = ap.an_values;
    report["an_errors"] = ap.an_errors;
    report["cesaro_errors"] = ap.cesaro_errors;
    report["total_mass"] = ap.total_mass;
    CommandResult out;
    out.report_json = report.dump(2) + "\n";
    out.csv = "probe,level,blocks,an_value,an_error,cesaro_error\n";
    for (size_t p = 0; p < ap.probe_times.size(); ++p)
        for (size_t l = 0; l < ap.partitions.size(); ++l) {
            out.csv += std::to_string(ap.probe_times[p]);
            out.csv += ',';
            out.csv += std::to_string(l + 1);
            out.csv += ',';
            out.csv += std::to_string(ap.partitions[l].size());
            out.csv += ',';
            out.csv += csv_num(ap.an_values[p][l]);
            out.csv += ',';
            out.csv += csv_num(ap.an_errors[p][l]);
            out.csv += ',';
            out.csv += csv_num(ap.cesaro_errors[p][l]);
            out.csv += '\n';
        }
    return out;
}

CommandResult cmd_dual(const JobConfig& config, const CliOverrides& ov) {
    const Resolved r = resolve_chain(config, ov);
    const SnellSolution sol = solve_snell(r.chain, r.payoff);
    MartingaleSpec mart;
    const std::string& fkind = config.run.dual_f;
    if (fkind == "zero") {
        const std::vector<double> zeros(r.chain.n_states(), 0.0);
        mart = martingale_from_function(r.chain, zeros);
    } else if (fkind == "payoff") {
        mart = martingale_from_function(r.chain, r.payoff.values);
    } else if (fkind == "value") {
        mart = martingale_from_solution(r.chain, sol);
    } else {
        bad("run.f must be one of zero | payoff | value");
    }
    const long n_paths = ov.paths.value_or(config.run.n_paths);
    const std::uint64_t seed = ov.seed.value_or(config.run.seed);
    const DualEstimate est = (n_paths == 0)
                                 ? dual_bound_exact(r.chain, r.payoff, mart, r.root)
                                 : dual_bound_mc(r.chain, r.payoff, mart, r.root, n_paths, seed);
    ojson report;
    report["command"] = "dual";
    report["model"] = model_summary(r.chain, r.root);
    report["f"] = fkind;
    report["primal_value"] = sol.value_at_root(r.root);
    report["value"] = est.value;
    report["stderr"] = est.stderr_;
    report["n_paths"] = est.n_paths;
    report["exact"] = est.exact;
    report["seed"] = est.seed;
    CommandResult out;
    out.report_json = report.dump(2) + "\n";
    out.csv = "value,stderr,n_paths,exact,seed\n";
    out.csv += csv_num(est.value);
    out.csv += ',';
    out.csv += csv_num(est.stderr_);
    out.csv += ',';
    out.csv += std::to_string(est.n_paths);
    out.csv += ',';
    out.csv += est.exact ? '1' : '0';
    out.csv += ',';
    out.csv += std::to_string(est.seed);
    out.csv += '\n';
    return out;
}

struct DiffusionPipeline {
    std::vector<double> grid;
    HarmonicPair pair;
    int l = 0, r = 0;
    int anchor = 0;
    std::vector<double> xs, g, V;
    std::vector<StopInterval> runs;
    double tol = 1e-10;
};

DiffusionPipeline run_diffusion_pipeline(const JobConfig& config, const CliOverrides& ov) {
    if (!config.is_diffusion)
        bad("this command needs model.kind = \"diffusion\"");
    const DiffusionConfig& d = config.diffusion;
    DiffusionPipeline pipe;
    const int n = ov.grid.value_or(d.grid_points);
    pipe.grid = (d.grid_kind == "log") ? make_log_grid(d.a, d.b, n) : make_uniform_grid(d.a, d.b, n);
    pipe.anchor = config.run.x0 ? nearest_index(pipe.grid, *config.run.x0)
                                : (static_cast<int>(pipe.grid.size()) - 1) / 2;
    pipe.pair = harmonic_pair(d.make_spec(), pipe.grid, pipe.anchor);
    pipe.l = 0;
    pipe.r = n - 1;
    if (config.run.interval) {
        pipe.l = nearest_index(pipe.grid, config.run.interval->first);
        pipe.r = nearest_index(pipe.grid, config.run.interval->second);
        if (!(pipe.l < pipe.r)) bad("run.interval is degenerate on this grid");
    }
    // The hull always spans the whole grid; run.interval only selects the
    // window that is scanned and reported. Truncating the domain instead
    // would tilt the hull's chords and move the detected boundary.
    const auto gfn = config.payoff.as_function();
    const TransformedPayoff tp =
        transform_payoff(pipe.pair, gfn, 0, static_cast<int>(pipe.grid.size()) - 1);
    const MajorantResult maj = concave_majorant(tp.y, tp.values);
    pipe.xs.assign(pipe.grid.begin() + pipe.l, pipe.grid.begin() + pipe.r + 1);
    pipe.V = value_from_majorant(maj.majorant, pipe.pair, pipe.xs);
    pipe.g.resize(pipe.xs.size());
    for (size_t i = 0; i < pipe.xs.size(); ++i) pipe.g[i] = gfn(pipe.xs[i]);
    pipe.tol = ov.tol.value_or(config.run.tol);
    pipe.runs = stopping_region(pipe.xs, pipe.V, pipe.g, pipe.tol);
    return pipe;
}

ojson grid_summary(const JobConfig& config, const DiffusionPipeline& pipe) {
    ojson gj;
    gj["kind"] = config.diffusion.grid_kind;
    gj["n"] = static_cast<int>(pipe.grid.size());
    gj["a"] = config.diffusion.a;
    gj["b"] = config.diffusion.b;
    gj["anchor_index"] = pipe.anchor;
    gj["anchor"] = pipe.grid[pipe.anchor];
    return gj;
}

CommandResult cmd_diffusion_solve(const JobConfig& config, const CliOverrides& ov) {
    const DiffusionPipeline pipe = run_diffusion_pipeline(config, ov);
    ojson report;
    report["command"] = "diffusion_solve";
    report["grid"] = grid_summary(config, pipe);
    report["alpha"] = config.diffusion.alpha;
    report["degenerate_pair"] = pipe.pair.degenerate;
    const double x0 = config.run.x0 ? *config.run.x0 : pipe.grid[pipe.anchor];
    report["x0"] = x0;
    report["value_at_x0"] = interp_monotone(pipe.xs, pipe.V, x0);
    ojson runs = ojson::array();
    for (const StopInterval& run : pipe.runs) {
        ojson rj;
        rj["lo"] = run.lo;
        rj["hi"] = run.hi;
        runs.push_back(std::move(rj));
    }
    report["stopping_intervals"] = std::move(runs);
    CommandResult out;
    out.report_json = report.dump(2) + "\n";
    out.csv = "x,g,V,stop,psi,phi,stilde\n";
    for (size_t i = 0; i < pipe.xs.size(); ++i) {
        const int gi = pipe.l + static_cast<int>(i);
        out.csv += csv_num(pipe.xs[i]);
        out.csv += ',';
        out.csv += csv_num(pipe.g[i]);
        out.csv += ',';
        out.csv += csv_num(pipe.V[i]);
        out.csv += ',';
        out.csv += (pipe.V[i] - pipe.g[i] <= pipe.tol) ? '1' : '0';
        out.csv += ',';
        out.csv += csv_num(pipe.pair.psi[gi]);
        out.csv += ',';
        out.csv += csv_num(pipe.pair.phi[gi]);
        out.csv += ',';
        out.csv += csv_num(pipe.pair.stilde[gi]);
        out.csv += '\n';
    }
    return out;
}

CommandResult cmd_smoothfit(const JobConfig& config, const CliOverrides& ov) {
    const DiffusionPipeline pipe = run_diffusion_pipeline(config, ov);
    const int last = static_cast<int>(pipe.xs.size()) - 1;
    // A bounded domain pins the majorant to the payoff at its edge knots, so
    // a run endpoint sitting on the edge is not a free boundary.
    std::vector<double> boundaries;
    for (const StopInterval& run : pipe.runs) {
        if (run.lo_index > 0 && run.lo_index < last) boundaries.push_back(run.lo);
        if (run.hi_index > 0 && run.hi_index < last) boundaries.push_back(run.hi);
    }
    ojson report;
    report["command"] = "smoothfit";
    report["grid"] = grid_summary(config, pipe);
    ojson items = ojson::array();
    CommandResult out;
    out.csv = "boundary,h,left_slope,right_slope,gap,extrapolated_gap\n";
    for (double bx : boundaries) {
        const SmoothFitReport fit =
            smooth_fit_check(pipe.xs, pipe.V, bx, config.run.h0, config.run.levels);
        ojson item;
        item["boundary"] = fit.boundary;
        item["boundary_index"] = fit.boundary_index;
        item["h"] = fit.h;
        item["left_slope"] = fit.left_slope;
        item["right_slope"] = fit.right_slope;
        item["gap"] = fit.gap;
        item["extrapolated_gap"] = fit.extrapolated_gap;
        items.push_back(std::move(item));
        for (size_t j = 0; j < fit.h.size(); ++j) {
            out.csv += csv_num(fit.boundary);
            out.csv += ',';
            out.csv += csv_num(fit.h[j]);
            out.csv += ',';
            out.csv += csv_num(fit.left_slope[j]);
            out.csv += ',';
            out.csv += csv_num(fit.right_slope[j]);
            out.csv += ',';
            out.csv += csv_num(fit.gap[j]);
            out.csv += ',';
            out.csv += csv_num(fit.extrapolated_gap);
            out.csv += '\n';
        }
    }
    report["boundaries"] = std::move(items);
    out.report_json = report.dump(2) + "\n";
    return out;
}

}  // namespace

std::function<double(double)> DiffusionConfig::make_drift() const {
    if (drift_form == "constant") {
        const double v = drift_a;
        return [v](double) { return v; };
    }
    if (drift_form == "affine") {
        const double c = drift_a, m = drift_b;
        return [c, m](double x) { return c + m * x; };
    }
    if (drift_form == "gbm") {
        const double rate = drift_a;
        return [rate](double x) { return rate * x; };
    }
    if (drift_form == "ou") {
        const double rate = drift_a, mean = drift_b;
        return [rate, mean](double x) { return rate * (mean - x); };
    }
    bad("model.drift.form must be one of constant | affine | gbm | ou");
}

std::function<double(double)> DiffusionConfig::make_vol() const {
    if (vol_form == "constant") {
        const double v = vol_a;
        return [v](double) { return v; };
    }
    if (vol_form == "affine") {
        const double c = vol_a, m = vol_b;
        return [c, m](double x) { return c + m * x; };
    }
    if (vol_form == "gbm") {
        const double sigma = vol_a;
        return [sigma](double x) { return sigma * x; };
    }
    bad("model.vol.form must be one of constant | affine | gbm");
}

DiffusionSpec DiffusionConfig::make_spec() const {
    DiffusionSpec spec;
    spec.a = a;
    spec.b = b;
    spec.alpha = alpha;
    spec.drift = make_drift();
    spec.vol = make_vol();
    return spec;
}

PayoffSpec PayoffConfig::on_states(std::span<const double> states) const {
    if (kind == "put") return make_payoff_put(states, strike);
    if (kind == "call") return make_payoff_call(states, strike);
    if (kind == "power") return make_payoff_power(states, exponent, scale);
    if (kind == "table") {
        if (table.size() != states.size())
            bad("payoff.values length must match the state count (" +
                std::to_string(states.size()) + ")");
        return make_payoff_table(table);
    }
    bad("payoff.kind must be one of put | call | power | table");
}

std::function<double(double)> PayoffConfig::as_function() const {
    if (kind == "put") {
        const double K = strike;
        return [K](double x) { return std::max(K - x, 0.0); };
    }
    if (kind == "call") {
        const double K = strike;
        return [K](double x) { return std::max(x - K, 0.0); };
    }
    if (kind == "power") {
        const double p = exponent, s = scale;
        return [p, s](double x) { return s * std::pow(x, p); };
    }
    if (kind == "table") bad("payoff.kind = table needs a chain model");
    bad("payoff.kind must be one of put | call | power | table");
}

JobConfig parse_config(const std::string& text) {
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const nlohmann::json::exception& e) {
        bad(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) bad("config must be a JSON object");

    JobConfig config;
    const ojson& model = need(j, "config", "model");
    const std::string kind = as_str(need(model, "model", "kind"), "model.kind");
    if (kind == "chain") {
        config.is_diffusion = false;
        ChainModel& chain = config.chain;
        chain.states = as_doubles(need(model, "model", "states"), "model.states");
        const ojson& tj = need(model, "model", "transition");
        if (!tj.is_array() || tj.size() != chain.states.size())
            bad("model.transition must be an array of " + std::to_string(chain.states.size()) +
                " rows");
        chain.transition.clear();
        for (size_t i = 0; i < tj.size(); ++i) {
            const std::vector<double> row =
                as_doubles(tj[i], "model.transition[" + std::to_string(i) + "]");
            if (row.size() != chain.states.size())
                bad("model.transition[" + std::to_string(i) + "] must have " +
                    std::to_string(chain.states.size()) + " entries");
            chain.transition.insert(chain.transition.end(), row.begin(), row.end());
        }
        chain.dt = opt_num(model, "dt", "model", 1.0);
        chain.alpha = opt_num(model, "alpha", "model", 0.0);
        chain.horizon = static_cast<int>(opt_int(model, "horizon", "model", 1));
        chain.validate();
    } else if (kind == "diffusion") {
        config.is_diffusion = true;
        DiffusionConfig& d = config.diffusion;
        const ojson& ij = need(model, "model", "interval");
        const std::vector<double> iv = as_doubles(ij, "model.interval");
        if (iv.size() != 2 || !(iv[0] < iv[1]))
            bad("model.interval must be [a, b] with a < b");
        d.a = iv[0];
        d.b = iv[1];
        d.alpha = opt_num(model, "alpha", "model", 0.0);
        d.grid_kind = opt_str(model, "grid_kind", "model", "uniform");
        if (d.grid_kind != "uniform" && d.grid_kind != "log")
            bad("model.grid_kind must be uniform | log");
        d.grid_points = static_cast<int>(opt_int(model, "grid_points", "model", 201));
        d.dt = opt_num(model, "dt", "model", 0.0);
        d.horizon = static_cast<int>(opt_int(model, "horizon", "model", 0));
        const ojson& dj = need(model, "model", "drift");
        d.drift_form = as_str(need(dj, "model.drift", "form"), "model.drift.form");
        if (d.drift_form == "constant") {
            d.drift_a = as_num(need(dj, "model.drift", "value"), "model.drift.value");
        } else if (d.drift_form == "affine") {
            d.drift_a = as_num(need(dj, "model.drift", "intercept"), "model.drift.intercept");
            d.drift_b = as_num(need(dj, "model.drift", "slope"), "model.drift.slope");
        } else if (d.drift_form == "gbm") {
            d.drift_a = as_num(need(dj, "model.drift", "rate"), "model.drift.rate");
        } else if (d.drift_form == "ou") {
            d.drift_a = as_num(need(dj, "model.drift", "rate"), "model.drift.rate");
            d.drift_b = as_num(need(dj, "model.drift", "mean"), "model.drift.mean");
        } else {
            bad("model.drift.form must be one of constant | affine | gbm | ou");
        }
        const ojson& vj = need(model, "model", "vol");
        d.vol_form = as_str(need(vj, "model.vol", "form"), "model.vol.form");
        if (d.vol_form == "constant") {
            d.vol_a = as_num(need(vj, "model.vol", "value"), "model.vol.value");
        } else if (d.vol_form == "affine") {
            d.vol_a = as_num(need(vj, "model.vol", "intercept"), "model.vol.intercept");
            d.vol_b = as_num(need(vj, "model.vol", "slope"), "model.vol.slope");
        } else if (d.vol_form == "gbm") {
            d.vol_a = as_num(need(vj, "model.vol", "sigma"), "model.vol.sigma");
        } else {
            bad("model.vol.form must be one of constant | affine | gbm");
        }
    } else {
        bad("model.kind must be \"chain\" or \"diffusion\"");
    }

    const ojson& pj = need(j, "config", "payoff");
    config.payoff.kind = as_str(need(pj, "payoff", "kind"), "payoff.kind");
    config.payoff.strike = opt_num(pj, "strike", "payoff", 1.0);
    config.payoff.exponent = opt_num(pj, "exponent", "payoff", 2.0);
    config.payoff.scale = opt_num(pj, "scale", "payoff", 1.0);
    if (const ojson* tv = maybe(pj, "values"))
        config.payoff.table = as_doubles(*tv, "payoff.values");
    if (config.payoff.kind == "table" && config.payoff.table.empty())
        bad("payoff.kind = table requires payoff.values");

    if (const ojson* rj = maybe(j, "run")) {
        const ojson& run = *rj;
        RunConfig& rc = config.run;
        if (const ojson* p = maybe(run, "x0")) rc.x0 = as_num(*p, "run.x0");
        if (const ojson* p = maybe(run, "seed")) {
            if (!p->is_number_integer() && !p->is_number_unsigned())
                bad("run.seed must be an integer");
            rc.seed = p->get<std::uint64_t>();
        }
        rc.n_paths = opt_int(run, "paths", "run", 0);
        rc.tol = opt_num(run, "tol", "run", 1e-10);
        rc.depth = static_cast<int>(opt_int(run, "depth", "run", 3));
        if (const ojson* p = maybe(run, "probe_times")) {
            if (!p->is_array()) bad("run.probe_times must be an array of integers");
            for (size_t i = 0; i < p->size(); ++i)
                rc.probe_times.push_back(static_cast<int>(
                    as_int((*p)[i], "run.probe_times[" + std::to_string(i) + "]")));
        }
        rc.dual_f = opt_str(run, "f", "run", "value");
        if (const ojson* p = maybe(run, "interval")) {
            const std::vector<double> iv = as_doubles(*p, "run.interval");
            if (iv.size() != 2 || !(iv[0] < iv[1])) bad("run.interval must be [l, r] with l < r");
            rc.interval = std::make_pair(iv[0], iv[1]);
        }
        rc.h0 = opt_num(run, "h0", "run", 1e-3);
        rc.levels = static_cast<int>(opt_int(run, "levels", "run", 3));
        if (const ojson* p = maybe(run, "stationary")) {
            if (!p->is_boolean()) bad("run.stationary must be a boolean");
            rc.stationary = p->get<bool>();
        }
    }
    return config;
}

CommandResult run_command(const std::string& command, const JobConfig& config,
                          const CliOverrides& overrides) {
    if (command == "solve") return cmd_solve(config, overrides);
    if (command == "decompose") return cmd_decompose(config, overrides);
    if (command == "mu") return cmd_mu(config, overrides);
    if (command == "approx_dm") return cmd_approx_dm(config, overrides);
    if (command == "dual") return cmd_dual(config, overrides);
    if (command == "diffusion_solve") return cmd_diffusion_solve(config, overrides);
    if (command == "smoothfit") return cmd_smoothfit(config, overrides);
    bad("unknown command: " + command);
}

}  // namespace snellkit

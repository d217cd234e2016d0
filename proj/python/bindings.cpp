#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "snellkit/doob_meyer.hpp"
#include "snellkit/dual_bounds.hpp"
#include "snellkit/majorant.hpp"
#include "snellkit/report_io.hpp"

namespace py = pybind11;
using namespace snellkit;

PYBIND11_MODULE(_snellkit, m) {
    m.doc() = "optimal stopping on finite chains and 1-d diffusions";
    m.attr("__version__") = "0.1.0";

    py::register_exception<AbsoluteContinuityViolated>(m, "AbsoluteContinuityViolated",
                                                       PyExc_RuntimeError);

    py::class_<ChainModel>(m, "ChainModel")
        .def(py::init([](std::vector<double> states, std::vector<double> transition, double dt,
                         double alpha, int horizon) {
                 ChainModel c{std::move(states), std::move(transition), dt, alpha, horizon};
                 c.validate();
                 return c;
             }),
             py::arg("states"), py::arg("transition"), py::arg("dt") = 1.0,
             py::arg("alpha") = 0.0, py::arg("horizon") = 1)
        .def_readonly("states", &ChainModel::states)
        .def_readonly("transition", &ChainModel::transition)
        .def_readonly("dt", &ChainModel::dt)
        .def_readonly("alpha", &ChainModel::alpha)
        .def_readonly("horizon", &ChainModel::horizon)
        .def("n_states", &ChainModel::n_states)
        .def("p", &ChainModel::p)
        .def("discount", &ChainModel::discount);

    m.def("build_random_walk", &build_random_walk, py::arg("n_states"), py::arg("horizon"));
    m.def("discretize_diffusion", &discretize_diffusion, py::arg("drift"), py::arg("vol"),
          py::arg("a"), py::arg("b"), py::arg("n_states"), py::arg("dt"), py::arg("alpha"),
          py::arg("horizon"));

    py::class_<PayoffSpec>(m, "PayoffSpec")
        .def_readonly("name", &PayoffSpec::name)
        .def_readonly("values", &PayoffSpec::values);
    m.def("make_payoff_put",
          [](std::vector<double> s, double k) { return make_payoff_put(s, k); },
          py::arg("states"), py::arg("strike"));
    m.def("make_payoff_call",
          [](std::vector<double> s, double k) { return make_payoff_call(s, k); },
          py::arg("states"), py::arg("strike"));
    m.def("make_payoff_power",
          [](std::vector<double> s, double e, double c) { return make_payoff_power(s, e, c); },
          py::arg("states"), py::arg("exponent"), py::arg("scale") = 1.0);
    m.def("make_payoff_table", &make_payoff_table, py::arg("values"));
    m.def("discrete_generator",
          [](const ChainModel& c, std::vector<double> g) { return discrete_generator(c, g); },
          py::arg("chain"), py::arg("values"));

    py::class_<SnellSolution>(m, "SnellSolution")
        .def_readonly("n_rows", &SnellSolution::n_rows)
        .def_readonly("n_cols", &SnellSolution::n_cols)
        .def_readonly("S", &SnellSolution::S)
        .def_readonly("G", &SnellSolution::G)
        .def_readonly("cont", &SnellSolution::cont)
        .def("s", &SnellSolution::s)
        .def("g", &SnellSolution::g)
        .def("c", &SnellSolution::c)
        .def("stops", &SnellSolution::stops)
        .def("value_at_root", &SnellSolution::value_at_root);
    m.def("solve_snell", &solve_snell, py::arg("chain"), py::arg("payoff"));

    py::class_<StationarySolution>(m, "StationarySolution")
        .def_readonly("V", &StationarySolution::V)
        .def_readonly("cont", &StationarySolution::cont)
        .def_readonly("steps", &StationarySolution::steps)
        .def_readonly("residual", &StationarySolution::residual)
        .def_readonly("converged", &StationarySolution::converged);
    m.def("solve_snell_stationary", &solve_snell_stationary, py::arg("chain"), py::arg("payoff"),
          py::arg("tol") = 1e-10, py::arg("max_steps") = 1000000);

    py::enum_<RuleKind>(m, "RuleKind")
        .value("minimal", RuleKind::minimal)
        .value("maximal", RuleKind::maximal)
        .value("epsilon", RuleKind::epsilon);
    py::class_<StoppingRule>(m, "StoppingRule")
        .def_readonly("n_rows", &StoppingRule::n_rows)
        .def_readonly("n_cols", &StoppingRule::n_cols)
        .def("stops", &StoppingRule::stops)
        .def("set", &StoppingRule::set);
    m.def("stopping_rule", &stopping_rule, py::arg("solution"), py::arg("kind"),
          py::arg("epsilon") = 0.0);
    m.def("evaluate_rule", &evaluate_rule, py::arg("chain"), py::arg("payoff"), py::arg("rule"),
          py::arg("root"));
    m.def("make_rule", &make_rule, py::arg("n_rows"), py::arg("n_cols"));
    m.def("rule_values", &rule_values, py::arg("chain"), py::arg("payoff"), py::arg("rule"));
    m.def("combine_rules", &combine_rules, py::arg("chain"), py::arg("payoff"), py::arg("r1"),
          py::arg("r2"));

    py::class_<Decomposition>(m, "Decomposition")
        .def_readonly("n_steps", &Decomposition::n_steps)
        .def_readonly("n_cols", &Decomposition::n_cols)
        .def("da", &Decomposition::da)
        .def("dd", &Decomposition::dd)
        .def("dd_plus", &Decomposition::dd_plus)
        .def("dd_minus", &Decomposition::dd_minus)
        .def("mu_at", &Decomposition::mu_at)
        .def("mu_is_defined", &Decomposition::mu_is_defined)
        .def("dm", &Decomposition::dm)
        .def("time_discount", &Decomposition::time_discount);
    m.def("decompose", &decompose, py::arg("chain"), py::arg("payoff"), py::arg("solution"));

    py::class_<BoundReport>(m, "BoundReport")
        .def_readonly("ok", &BoundReport::ok)
        .def_readonly("max_violation", &BoundReport::max_violation)
        .def_readonly("worst_step", &BoundReport::worst_step)
        .def_readonly("worst_state", &BoundReport::worst_state)
        .def_readonly("nodes_checked", &BoundReport::nodes_checked);
    m.def("increment_bound_check", &increment_bound_check, py::arg("decomposition"));
    m.def("maximal_stopping_rule", &maximal_stopping_rule, py::arg("solution"),
          py::arg("decomposition"));

    py::class_<ApproxReport>(m, "ApproxReport")
        .def_readonly("partitions", &ApproxReport::partitions)
        .def_readonly("probe_times", &ApproxReport::probe_times)
        .def_readonly("an_values", &ApproxReport::an_values)
        .def_readonly("an_errors", &ApproxReport::an_errors)
        .def_readonly("cesaro_errors", &ApproxReport::cesaro_errors)
        .def_readonly("total_mass", &ApproxReport::total_mass);
    m.def("partition_approximation", &partition_approximation, py::arg("chain"), py::arg("payoff"),
          py::arg("root"), py::arg("probe_times"), py::arg("depth"),
          py::arg("support_cap") = size_t{1} << 21);

    py::class_<MartingaleSpec>(m, "MartingaleSpec")
        .def_readonly("n_steps", &MartingaleSpec::n_steps)
        .def_readonly("n_cols", &MartingaleSpec::n_cols)
        .def("f", &MartingaleSpec::f)
        .def("pf", &MartingaleSpec::pf)
        .def("increment", &MartingaleSpec::increment)
        .def("time_discount", &MartingaleSpec::time_discount);
    m.def("martingale_from_function",
          [](const ChainModel& c, std::vector<double> f) { return martingale_from_function(c, f); },
          py::arg("chain"), py::arg("values"));
    m.def("martingale_from_solution", &martingale_from_solution, py::arg("chain"),
          py::arg("solution"));

    py::class_<DualEstimate>(m, "DualEstimate")
        .def_readonly("value", &DualEstimate::value)
        .def_readonly("stderr", &DualEstimate::stderr_)
        .def_readonly("n_paths", &DualEstimate::n_paths)
        .def_readonly("exact", &DualEstimate::exact)
        .def_readonly("seed", &DualEstimate::seed);
    m.def("dual_bound_exact", &dual_bound_exact, py::arg("chain"), py::arg("payoff"),
          py::arg("martingale"), py::arg("root"), py::arg("path_cap") = std::uint64_t{1} << 20);
    m.def("dual_bound_mc", &dual_bound_mc, py::arg("chain"), py::arg("payoff"),
          py::arg("martingale"), py::arg("root"), py::arg("n_paths"), py::arg("seed"));

    py::class_<ControlledTriple>(m, "ControlledTriple")
        .def_readonly("x", &ControlledTriple::x)
        .def_readonly("y", &ControlledTriple::y)
        .def_readonly("z", &ControlledTriple::z);
    m.def("controlled_trajectory",
          [](const ChainModel& c, const PayoffSpec& g, const MartingaleSpec& mart,
             std::vector<int> path, double y0, double z0) {
              return controlled_trajectory(c, g, mart, path, y0, z0);
          },
          py::arg("chain"), py::arg("payoff"), py::arg("martingale"), py::arg("path"),
          py::arg("y0"), py::arg("z0"));

    py::class_<DiffusionSpec>(m, "DiffusionSpec")
        .def(py::init<>())
        .def_readwrite("a", &DiffusionSpec::a)
        .def_readwrite("b", &DiffusionSpec::b)
        .def_readwrite("drift", &DiffusionSpec::drift)
        .def_readwrite("vol", &DiffusionSpec::vol)
        .def_readwrite("alpha", &DiffusionSpec::alpha);
    m.def("make_uniform_grid", &make_uniform_grid, py::arg("a"), py::arg("b"), py::arg("n"));
    m.def("make_log_grid", &make_log_grid, py::arg("a"), py::arg("b"), py::arg("n"));
    m.def("nearest_index",
          [](std::vector<double> grid, double x) { return nearest_index(grid, x); },
          py::arg("grid"), py::arg("x"));
    m.def("interp_monotone",
          [](std::vector<double> xs, std::vector<double> ys, double x) {
              return interp_monotone(xs, ys, x);
          },
          py::arg("xs"), py::arg("ys"), py::arg("x"));

    py::enum_<PairBoundary::Mode>(m, "BoundaryMode")
        .value("growth", PairBoundary::Mode::growth)
        .value("pinned", PairBoundary::Mode::pinned)
        .value("extrapolate", PairBoundary::Mode::extrapolate);
    py::class_<PairBoundary>(m, "PairBoundary")
        .def(py::init<>())
        .def_readwrite("mode", &PairBoundary::mode)
        .def_readwrite("value", &PairBoundary::value);
    py::class_<PairOptions>(m, "PairOptions")
        .def(py::init<>())
        .def_readwrite("psi_decay", &PairOptions::psi_decay)
        .def_readwrite("phi_decay", &PairOptions::phi_decay);

    py::class_<HarmonicPair>(m, "HarmonicPair")
        .def_readonly("grid", &HarmonicPair::grid)
        .def_readonly("s", &HarmonicPair::s)
        .def_readonly("psi", &HarmonicPair::psi)
        .def_readonly("phi", &HarmonicPair::phi)
        .def_readonly("stilde", &HarmonicPair::stilde)
        .def_readonly("anchor", &HarmonicPair::anchor)
        .def_readonly("alpha", &HarmonicPair::alpha)
        .def_readonly("degenerate", &HarmonicPair::degenerate);
    m.def("harmonic_pair",
          [](const DiffusionSpec& d, std::vector<double> grid, int anchor,
             const PairOptions& options) { return harmonic_pair(d, grid, anchor, options); },
          py::arg("diffusion"), py::arg("grid"), py::arg("anchor"),
          py::arg("options") = PairOptions{});

    py::class_<HittingSplit>(m, "HittingSplit")
        .def_readonly("l", &HittingSplit::l)
        .def_readonly("r", &HittingSplit::r)
        .def_readonly("p1", &HittingSplit::p1)
        .def_readonly("p2", &HittingSplit::p2);
    m.def("hitting_decomposition", &hitting_decomposition, py::arg("pair"), py::arg("l"),
          py::arg("r"));

    py::class_<TransformedPayoff>(m, "TransformedPayoff")
        .def_readonly("y", &TransformedPayoff::y)
        .def_readonly("values", &TransformedPayoff::values)
        .def_readonly("grid_index", &TransformedPayoff::grid_index);
    m.def("transform_payoff", &transform_payoff, py::arg("pair"), py::arg("payoff"), py::arg("l"),
          py::arg("r"));

    py::class_<PiecewiseLinear>(m, "PiecewiseLinear")
        .def_readonly("knots", &PiecewiseLinear::knots)
        .def_readonly("values", &PiecewiseLinear::values)
        .def("__call__", &PiecewiseLinear::operator());
    py::class_<MajorantResult>(m, "MajorantResult")
        .def_readonly("majorant", &MajorantResult::majorant)
        .def_readonly("values_at_knots", &MajorantResult::values_at_knots)
        .def_readonly("contact", &MajorantResult::contact)
        .def_readonly("hull", &MajorantResult::hull);
    m.def("concave_majorant",
          [](std::vector<double> knots, std::vector<double> values, double tol) {
              return concave_majorant(knots, values, tol);
          },
          py::arg("knots"), py::arg("values"), py::arg("tol") = 1e-10);
    m.def("value_from_majorant",
          [](const PiecewiseLinear& w, const HarmonicPair& pair, std::vector<double> xs) {
              return value_from_majorant(w, pair, xs);
          },
          py::arg("majorant"), py::arg("pair"), py::arg("xs"));

    py::class_<StopInterval>(m, "StopInterval")
        .def_readonly("lo", &StopInterval::lo)
        .def_readonly("hi", &StopInterval::hi)
        .def_readonly("lo_index", &StopInterval::lo_index)
        .def_readonly("hi_index", &StopInterval::hi_index);
    m.def("stopping_region",
          [](std::vector<double> xs, std::vector<double> V, std::vector<double> g, double tol) {
              return stopping_region(xs, V, g, tol);
          },
          py::arg("xs"), py::arg("V"), py::arg("g"), py::arg("tol") = 1e-10);

    py::class_<SmoothFitReport>(m, "SmoothFitReport")
        .def_readonly("boundary", &SmoothFitReport::boundary)
        .def_readonly("boundary_index", &SmoothFitReport::boundary_index)
        .def_readonly("h", &SmoothFitReport::h)
        .def_readonly("left_slope", &SmoothFitReport::left_slope)
        .def_readonly("right_slope", &SmoothFitReport::right_slope)
        .def_readonly("gap", &SmoothFitReport::gap)
        .def_readonly("extrapolated_gap", &SmoothFitReport::extrapolated_gap);
    m.def("smooth_fit_check",
          [](std::vector<double> xs, std::vector<double> V, double boundary, double h0,
             int levels) { return smooth_fit_check(xs, V, boundary, h0, levels); },
          py::arg("xs"), py::arg("V"), py::arg("boundary"), py::arg("h0"),
          py::arg("levels") = 3);

    // Same engine as the CLI: a JSON job config in, (report json, csv) out.
    m.def("run_command",
          [](const std::string& command, const std::string& config_json) {
              const CommandResult out = run_command(command, parse_config(config_json));
              return py::make_tuple(out.report_json, out.csv);
          },
          py::arg("command"), py::arg("config_json"));
}

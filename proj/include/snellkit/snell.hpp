#pragma once

#include <cstdint>
#include <vector>

#include "snellkit/chain_model.hpp"

namespace snellkit {

/// Contact tolerance for stop-region classification: a node stops when
/// S - G <= contact_tol. Ties (S = G = cont) stop, matching a first-contact
/// minimal rule.
inline constexpr double contact_tol = 1e-10;

/// Backward-induction envelope of the discounted payoff. Row k holds values
/// in time-k units: S_k = max(G, exp(-alpha*dt) E[S_{k+1}]). The discounted
/// process exp(-alpha*k*dt) S_k(X_k) is the smallest supermartingale
/// dominating the discounted gains.
struct SnellSolution {
    int n_rows = 0;  // horizon + 1
    int n_cols = 0;
    std::vector<double> S;     // (horizon+1) x |E|
    std::vector<double> G;     // payoff replicated per row
    std::vector<double> cont;  // exp(-alpha*dt) E[S_{k+1}|.]; row N repeats S_N
    std::vector<std::uint8_t> stop_region;

    double s(int k, int i) const { return S[static_cast<size_t>(k) * n_cols + i]; }
    double g(int k, int i) const { return G[static_cast<size_t>(k) * n_cols + i]; }
    double c(int k, int i) const { return cont[static_cast<size_t>(k) * n_cols + i]; }
    bool stops(int k, int i) const { return stop_region[static_cast<size_t>(k) * n_cols + i] != 0; }

    double value_at_root(int state_index) const { return s(0, state_index); }
};

SnellSolution solve_snell(const ChainModel& chain, const PayoffSpec& payoff);

/// Value iteration for the horizon-free problem: iterates the one-step
/// operator until the sup-norm change per added step drops below tol.
struct StationarySolution {
    std::vector<double> V;
    std::vector<double> cont;
    int steps = 0;
    double residual = 0.0;
    bool converged = false;
};

StationarySolution solve_snell_stationary(const ChainModel& chain, const PayoffSpec& payoff,
                                          double tol = 1e-10, int max_steps = 1000000);

enum class RuleKind { minimal, maximal, epsilon };

/// Stop at the first visited (k, state) inside the region; row `horizon` is
/// always part of the region.
struct StoppingRule {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<std::uint8_t> region;

    bool stops(int k, int i) const { return region[static_cast<size_t>(k) * n_cols + i] != 0; }
    void set(int k, int i, bool v) { region[static_cast<size_t>(k) * n_cols + i] = v ? 1 : 0; }
};

StoppingRule make_rule(int n_rows, int n_cols);

// minimal: region = {S - G <= contact_tol}.
// epsilon: region = {S - G <= eps + contact_tol}; eps = 0 coincides with minimal.
// maximal: throws; it is derived from a decomposition (see doob_meyer.hpp).
StoppingRule stopping_rule(const SnellSolution& solution, RuleKind kind, double eps = 0.0);

/// Exact expected discounted payoff of the rule from state `root`, by forward
/// propagation of the not-yet-stopped occupation measure. No simulation.
double evaluate_rule(const ChainModel& chain, const PayoffSpec& payoff,
                     const StoppingRule& rule, int root);

/// Value-to-go of the rule at every (k, state); row 0 matches evaluate_rule.
std::vector<double> rule_values(const ChainModel& chain, const PayoffSpec& payoff,
                                const StoppingRule& rule);

/// Node-wise combination: at each node follow the action of whichever input
/// rule has the larger value-to-go there. The result dominates both inputs
/// pointwise, so rule values are directed upwards.
StoppingRule combine_rules(const ChainModel& chain, const PayoffSpec& payoff,
                           const StoppingRule& r1, const StoppingRule& r2);

}  // namespace snellkit

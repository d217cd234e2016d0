#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace snellkit {

/// Finite-state Markov chain on an ordered grid of real states, observed at
/// steps k = 0..horizon with per-step discount factor exp(-alpha*dt).
struct ChainModel {
    std::vector<double> states;      // strictly increasing coordinates
    std::vector<double> transition;  // row-major |E| x |E|, row-stochastic
    double dt = 1.0;
    double alpha = 0.0;
    int horizon = 1;

    int n_states() const { return static_cast<int>(states.size()); }
    double p(int i, int j) const { return transition[static_cast<size_t>(i) * states.size() + j]; }
    std::span<const double> row(int i) const {
        return {transition.data() + static_cast<size_t>(i) * states.size(), states.size()};
    }
    double discount() const;  // exp(-alpha*dt)

    // Throws std::invalid_argument naming the first violated requirement:
    // rows sum to 1 within 1e-12, entries in [0,1], states strictly
    // increasing, dt > 0, alpha >= 0, horizon >= 1.
    void validate() const;
};

/// Payoff sampled on the chain's state grid.
struct PayoffSpec {
    std::string name;
    std::vector<double> values;
};

// Symmetric +-1 random walk on n_states equally spaced integer states
// centred at zero, absorbing endpoints, dt = 1, alpha = 0.
ChainModel build_random_walk(int n_states, int horizon);

PayoffSpec make_payoff_put(std::span<const double> states, double strike);
PayoffSpec make_payoff_call(std::span<const double> states, double strike);
PayoffSpec make_payoff_power(std::span<const double> states, double exponent, double scale = 1.0);
PayoffSpec make_payoff_table(std::vector<double> values);
PayoffSpec make_payoff(std::span<const double> states, const std::string& kind,
                       std::function<double(double)> fn);

// Moment-matched trinomial discretization of a 1-d diffusion on a uniform
// grid over [a, b] with absorbing endpoints. Row mean equals drift(x)*dt and
// row variance equals vol(x)^2*dt exactly (second moment carries the
// (drift*dt)^2 term). Rejects dt/grid combinations that would need a
// probability outside [0,1]; the error names the offending state and a
// feasible dt.
ChainModel discretize_diffusion(const std::function<double(double)>& drift,
                                const std::function<double(double)>& vol,
                                double a, double b, int n_states,
                                double dt, double alpha, int horizon);

// Discrete generator per unit time:
//   Lg(x) = (exp(-alpha*dt) * sum_y P(x,y) g(y) - g(x)) / dt
// so that the gains compensator below uses increments Lg(x)*dt.
std::vector<double> discrete_generator(const ChainModel& chain, std::span<const double> g);

}  // namespace snellkit

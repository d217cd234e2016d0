#include "snellkit/chain_model.hpp"

#include <cmath>
#include <stdexcept>

namespace snellkit {

namespace {

constexpr double kRowSumTol = 1e-12;

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

}  // namespace

double ChainModel::discount() const { return std::exp(-alpha * dt); }

void ChainModel::validate() const {
    const int n = n_states();
    if (n < 2) fail("chain needs at least 2 states");
    for (int i = 0; i + 1 < n; ++i)
        if (!(states[i] < states[i + 1]))
            fail("states must be strictly increasing at index " + std::to_string(i));
    if (!(dt > 0.0)) fail("dt must be positive");
    if (!(alpha >= 0.0)) fail("alpha must be nonnegative");
    if (horizon < 1) fail("horizon must be at least 1");
    if (transition.size() != static_cast<size_t>(n) * n)
        fail("transition matrix must be " + std::to_string(n) + "x" + std::to_string(n));
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
            const double pij = p(i, j);
            if (!(pij >= 0.0 && pij <= 1.0))
                fail("transition row " + std::to_string(i) + " has entry outside [0,1] at column " +
                     std::to_string(j));
            sum += pij;
        }
        if (std::abs(sum - 1.0) > kRowSumTol)
            fail("transition row " + std::to_string(i) + " sums to " + std::to_string(sum) +
                 ", not 1 within 1e-12");
    }
}

ChainModel build_random_walk(int n_states, int horizon) {
    if (n_states < 3) fail("random walk needs at least 3 states");
    if (n_states % 2 == 0) fail("random walk grid must have odd size to centre at zero");
    ChainModel chain;
    chain.dt = 1.0;
    chain.alpha = 0.0;
    chain.horizon = horizon;
    chain.states.resize(n_states);
    const int half = n_states / 2;
    for (int i = 0; i < n_states; ++i) chain.states[i] = static_cast<double>(i - half);
    chain.transition.assign(static_cast<size_t>(n_states) * n_states, 0.0);
    auto at = [&](int i, int j) -> double& {
        return chain.transition[static_cast<size_t>(i) * n_states + j];
    };
    at(0, 0) = 1.0;
    at(n_states - 1, n_states - 1) = 1.0;
    for (int i = 1; i + 1 < n_states; ++i) {
        at(i, i - 1) = 0.5;
        at(i, i + 1) = 0.5;
    }
    chain.validate();
    return chain;
}

PayoffSpec make_payoff(std::span<const double> states, const std::string& kind,
                       std::function<double(double)> fn) {
    PayoffSpec payoff;
    payoff.name = kind;
    payoff.values.reserve(states.size());
    for (double x : states) payoff.values.push_back(fn(x));
    return payoff;
}

PayoffSpec make_payoff_put(std::span<const double> states, double strike) {
    return make_payoff(states, "put", [strike](double x) { return std::max(strike - x, 0.0); });
}

PayoffSpec make_payoff_call(std::span<const double> states, double strike) {
    return make_payoff(states, "call", [strike](double x) { return std::max(x - strike, 0.0); });
}

PayoffSpec make_payoff_power(std::span<const double> states, double exponent, double scale) {
    return make_payoff(states, "power",
                       [=](double x) { return scale * std::pow(x, exponent); });
}

PayoffSpec make_payoff_table(std::vector<double> values) {
    PayoffSpec payoff;
    payoff.name = "table";
    payoff.values = std::move(values);
    return payoff;
}

ChainModel discretize_diffusion(const std::function<double(double)>& drift,
                                const std::function<double(double)>& vol,
                                double a, double b, int n_states,
                                double dt, double alpha, int horizon) {
    if (!(a < b)) fail("interval must satisfy a < b");
    if (n_states < 3) fail("diffusion grid needs at least 3 states");
    if (!(dt > 0.0)) fail("dt must be positive");
    const double h = (b - a) / (n_states - 1);

    ChainModel chain;
    chain.dt = dt;
    chain.alpha = alpha;
    chain.horizon = horizon;
    chain.states.resize(n_states);
    for (int i = 0; i < n_states; ++i) chain.states[i] = a + h * i;
    chain.states.back() = b;
    chain.transition.assign(static_cast<size_t>(n_states) * n_states, 0.0);
    auto at = [&](int i, int j) -> double& {
        return chain.transition[static_cast<size_t>(i) * n_states + j];
    };
    at(0, 0) = 1.0;
    at(n_states - 1, n_states - 1) = 1.0;

    for (int i = 1; i + 1 < n_states; ++i) {
        const double x = chain.states[i];
        const double m = drift(x) * dt;
        const double s = vol(x);
        // Second moment includes m^2 so the row variance is exactly s^2*dt.
        const double v2 = s * s * dt + m * m;
        const double pu = (v2 + m * h) / (2.0 * h * h);
        const double pd = (v2 - m * h) / (2.0 * h * h);
        const double pm = 1.0 - pu - pd;
        if (pu < 0.0 || pd < 0.0 || pm < 0.0) {
            // Feasible dt from pm >= 0: drift^2 dt^2 + vol^2 dt <= h^2.
            const double bb = drift(x);
            double dt_max;
            if (bb == 0.0) {
                dt_max = (s > 0.0) ? h * h / (s * s) : dt;
            } else {
                dt_max = (-s * s + std::sqrt(s * s * s * s + 4.0 * bb * bb * h * h)) /
                         (2.0 * bb * bb);
            }
            fail("trinomial probability outside [0,1] at state " + std::to_string(x) +
                 "; try dt <= " + std::to_string(0.9 * dt_max));
        }
        at(i, i + 1) = pu;
        at(i, i - 1) = pd;
        at(i, i) = pm;
    }
    chain.validate();
    return chain;
}

std::vector<double> discrete_generator(const ChainModel& chain, std::span<const double> g) {
    const int n = chain.n_states();
    if (g.size() != static_cast<size_t>(n)) fail("payoff length must match state count");
    const double disc = chain.discount();
    std::vector<double> lg(n);
    for (int i = 0; i < n; ++i) {
        double pg = 0.0;
        const auto row = chain.row(i);
        for (int j = 0; j < n; ++j) pg += row[j] * g[j];
        lg[i] = (disc * pg - g[i]) / chain.dt;
    }
    return lg;
}

}  // namespace snellkit

#pragma once

// Shared fixtures and independent oracles. Evaluators here enumerate the path
// tree directly so library results can be checked against a second route.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "snellkit/chain_model.hpp"
#include "snellkit/snell.hpp"

namespace testkit {

using snellkit::ChainModel;
using snellkit::PayoffSpec;
using snellkit::StoppingRule;

inline ChainModel random_chain(std::mt19937& rng, int n, int horizon, double alpha) {
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    ChainModel chain;
    chain.alpha = alpha;
    chain.dt = (rng() % 2 == 0) ? 1.0 : 0.5;
    chain.horizon = horizon;
    chain.states.resize(n);
    double x = -1.0;
    for (int i = 0; i < n; ++i) {
        x += unit(rng);
        chain.states[i] = x;
    }
    chain.transition.assign(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
            const double w = unit(rng);
            chain.transition[static_cast<size_t>(i) * n + j] = w;
            sum += w;
        }
        for (int j = 0; j < n; ++j) chain.transition[static_cast<size_t>(i) * n + j] /= sum;
    }
    chain.validate();
    return chain;
}

inline PayoffSpec random_payoff(std::mt19937& rng, int n) {
    std::uniform_real_distribution<double> unit(0.0, 2.0);
    PayoffSpec payoff;
    payoff.name = "random";
    payoff.values.resize(n);
    for (double& v : payoff.values) v = unit(rng);
    return payoff;
}

/// Visits every path x_0..x_N with positive probability: fn(path, prob).
inline void for_each_path(const ChainModel& chain,
                          int root,
                          const std::function<void(const std::vector<int>&, double)>& fn) {
    std::vector<int> path;
    path.reserve(chain.horizon + 1);
    path.push_back(root);
    const int n = chain.n_states();
    const std::function<void(double)> walk = [&](double prob) {
        if (static_cast<int>(path.size()) == chain.horizon + 1) {
            fn(path, prob);
            return;
        }
        const int i = path.back();
        for (int j = 0; j < n; ++j) {
            const double pij = chain.p(i, j);
            if (pij == 0.0) continue;
            path.push_back(j);
            walk(prob * pij);
            path.pop_back();
        }
    };
    walk(1.0);
}

/// Expected discounted payoff of a region rule, by brute-force enumeration of
/// the full path tree (no occupation-measure recursion).
inline double enumerate_rule_value(const ChainModel& chain, const PayoffSpec& payoff,
                                   const StoppingRule& rule, int root) {
    double value = 0.0;
    for_each_path(chain, root, [&](const std::vector<int>& path, double prob) {
        for (int k = 0; k < static_cast<int>(path.size()); ++k) {
            if (rule.stops(k, path[k]) || k == chain.horizon) {
                value += prob * std::exp(-chain.alpha * chain.dt * k) * payoff.values[path[k]];
                break;
            }
        }
    });
    return value;
}

/// Visits every region rule over the non-terminal nodes (the terminal row is
/// always part of the region). count = 2^((rows-1)*cols); keep node counts
/// small.
inline void for_each_region_rule(int n_rows, int n_cols,
                                 const std::function<void(const StoppingRule&)>& fn) {
    const int bits = (n_rows - 1) * n_cols;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << bits); ++mask) {
        StoppingRule rule = snellkit::make_rule(n_rows, n_cols);
        for (int b = 0; b < bits; ++b)
            if (mask >> b & 1) rule.set(b / n_cols, b % n_cols, true);
        fn(rule);
    }
}

}  // namespace testkit

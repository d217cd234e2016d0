#pragma once

#include <cstdint>
#include <vector>

#include "snellkit/snell.hpp"

namespace snellkit {

/// Martingale built from a value surface F over node rows k = 0..horizon.
/// Transition (k, i) -> (k+1, j) contributes, in time-0 units,
///   dM_k = exp(-alpha*(k+1)*dt) * (F_{k+1}(j) - sum_y P(i,y) F_{k+1}(y))
/// so every row-conditional mean is zero. A state function f uses the same
/// surface at every row; the solution surface F_k = S_k realizes the envelope
/// martingale M* with zero pathwise variance in the dual.
struct MartingaleSpec {
    int n_steps = 0;
    int n_cols = 0;
    double dt = 1.0;
    double alpha = 0.0;
    std::vector<double> F;   // (n_steps+1) x |E|
    std::vector<double> PF;  // n_steps x |E|, (P F_{k+1})(i)

    double f(int k, int i) const { return F[static_cast<size_t>(k) * n_cols + i]; }
    double pf(int k, int i) const { return PF[static_cast<size_t>(k) * n_cols + i]; }
    double increment(int k, int i, int j) const;
    double time_discount(int k) const;  // exp(-alpha*k*dt)
};

MartingaleSpec martingale_from_function(const ChainModel& chain, std::span<const double> f);
MartingaleSpec martingale_from_solution(const ChainModel& chain, const SnellSolution& solution);

struct DualEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    long n_paths = 0;
    bool exact = false;
    std::uint64_t seed = 0;
};

/// E[max_k (G_k - M_k)] from the root by full path enumeration over the
/// chain's support. Throws when the number of paths exceeds path_cap
/// (default 2^20); the Monte Carlo variant covers those cases.
DualEstimate dual_bound_exact(const ChainModel& chain, const PayoffSpec& payoff,
                              const MartingaleSpec& mart, int root,
                              std::uint64_t path_cap = std::uint64_t{1} << 20);

/// Monte Carlo dual with a counter-based per-path generator: path i draws
/// from splitmix64 seeded by (seed, i), so results do not depend on thread
/// scheduling. The (mean, stderr) reduction uses pairwise summation over the
/// per-path values, making it order-insensitive. SNELLKIT_THREADS caps the
/// worker count.
DualEstimate dual_bound_mc(const ChainModel& chain, const PayoffSpec& payoff,
                           const MartingaleSpec& mart, int root,
                           long n_paths, std::uint64_t seed);

/// Controlled state triple along a fixed path: Y accumulates the generator
/// correction of the surface, Z the running max of the hindsight payoff,
/// floored at z. Admissibility requires z >= g(x0) + y. The terminal value
/// satisfies Z_N = (y + max_k (G_k - M_k)) ∨ z exactly.
struct ControlledTriple {
    std::vector<int> x;
    std::vector<double> y;
    std::vector<double> z;
};

ControlledTriple controlled_trajectory(const ChainModel& chain, const PayoffSpec& payoff,
                                       const MartingaleSpec& mart,
                                       std::span<const int> path, double y0, double z0);

/// Worker cap from SNELLKIT_THREADS, defaulting to the hardware count.
int worker_limit();

/// Order-insensitive sum by pairwise reduction.
double pairwise_sum(std::span<const double> values);

}  // namespace snellkit

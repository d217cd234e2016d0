#pragma once

#include <stdexcept>
#include <vector>

#include "snellkit/snell.hpp"

namespace snellkit {

/// Increments where the gains compensator is flat must carry no envelope
/// compensator mass: denominators below tol_den count as zero, and dA above
/// tol_num over a zero denominator is an absolute-continuity violation.
inline constexpr double tol_den = 1e-12;
inline constexpr double tol_num = 1e-10;

class AbsoluteContinuityViolated : public std::runtime_error {
  public:
    AbsoluteContinuityViolated(int k, int i, double da, double dd);
    int step;
    int state;
    double dA_value;
    double dDminus_value;
};

/// Per-step predictable increments of the envelope and gains compensators,
/// rows k = 0..horizon-1. Entries are in time-k units (no time-0 discount
/// prefactor); pathwise sums over step j apply exp(-alpha*j*dt), under which
/// the discounted envelope satisfies S_k - S_0 = sum dM - sum dA exactly.
struct Decomposition {
    int n_steps = 0;  // horizon
    int n_cols = 0;
    double dt = 1.0;
    double alpha = 0.0;

    std::vector<double> dA;        // S_k - cont_k, clamped at zero
    std::vector<double> dD;        // Lg * dt
    std::vector<double> dDplus;    // (Lg)^+ * dt
    std::vector<double> dDminus;   // (Lg)^- * dt
    std::vector<double> mu;        // dA / dDminus, NaN where undefined
    std::vector<std::uint8_t> mu_defined;

    // Needed by the per-transition martingale increments.
    std::vector<double> S;     // (horizon+1) x |E|
    std::vector<double> cont;  // horizon x |E| slice of the solution

    double da(int k, int i) const { return dA[static_cast<size_t>(k) * n_cols + i]; }
    double dd(int k, int i) const { return dD[static_cast<size_t>(k) * n_cols + i]; }
    double dd_plus(int k, int i) const { return dDplus[static_cast<size_t>(k) * n_cols + i]; }
    double dd_minus(int k, int i) const { return dDminus[static_cast<size_t>(k) * n_cols + i]; }
    double mu_at(int k, int i) const { return mu[static_cast<size_t>(k) * n_cols + i]; }
    bool mu_is_defined(int k, int i) const {
        return mu_defined[static_cast<size_t>(k) * n_cols + i] != 0;
    }

    /// Martingale increment of the envelope over transition (k, i) -> (k+1, j),
    /// in time-k units: exp(-alpha*dt) S_{k+1}(j) - cont_k(i).
    double dm(int k, int i, int j) const;

    /// exp(-alpha*k*dt), the prefactor that turns time-k units into time-0 units.
    double time_discount(int k) const;
};

/// Splits the envelope into martingale and predictable parts and the gains
/// compensator into its mutually singular positive and negative parts, then
/// computes mu. Throws AbsoluteContinuityViolated if mass sits on a flat
/// negative gains part.
Decomposition decompose(const ChainModel& chain, const PayoffSpec& payoff,
                        const SnellSolution& solution);

/// Fills and returns mu = dA / dDminus with undefined markers (NaN) where
/// dDminus <= tol_den. Throws AbsoluteContinuityViolated when dA > tol_num
/// over an undefined denominator.
std::vector<double> mu_density(Decomposition& dec);

struct BoundReport {
    bool ok = true;
    double max_violation = 0.0;
    int worst_step = -1;
    int worst_state = -1;
    long nodes_checked = 0;
};

/// Verifies 0 <= dA <= dDminus + tol_num at every node.
BoundReport increment_bound_check(const Decomposition& dec);

/// Stop at the first node whose next predictable increment is positive. The
/// stopped envelope is a martingale up to this time, so the rule is optimal
/// and delays as long as possible.
StoppingRule maximal_stopping_rule(const SnellSolution& solution, const Decomposition& dec);

/// Exact partition-approximation experiment: ground truth is the full
/// solution's compensator A (discounted units); level l uses nested dyadic
/// blocks of m_l = horizon / 2^l steps and accumulates exact block-conditional
/// expectations of A's increments. Errors are exact L1 path-space deviations
/// computed by a joint-support sweep over the chain law; no simulation.
struct ApproxReport {
    std::vector<std::vector<int>> partitions;  // level l step indices
    std::vector<int> probe_times;
    std::vector<std::vector<double>> an_values;      // per probe, per level: E[A^n_t]
    std::vector<std::vector<double>> an_errors;      // per probe, per level: E|A^n_t - A_t|
    std::vector<std::vector<double>> cesaro_errors;  // per probe, per prefix L'
    double total_mass = 0.0;                         // E[A_horizon] from the root
};

/// Probe times must lie on the coarsest partition (multiples of horizon/2);
/// horizon must be divisible by 2^depth. support_cap bounds the joint-support
/// size of the exact sweep.
ApproxReport partition_approximation(const ChainModel& chain, const PayoffSpec& payoff,
                                     int root, std::vector<int> probe_times, int depth,
                                     size_t support_cap = size_t{1} << 21);

}  // namespace snellkit

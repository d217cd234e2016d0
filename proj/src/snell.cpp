#include "snellkit/snell.hpp"

#include <cmath>
#include <stdexcept>

namespace snellkit {

namespace {

/// Transition rows compressed to their nonzero entries, in column order, so
/// row sums visit the same terms in the same order as the dense loop.
struct SparseRows {
    std::vector<int> offs;
    std::vector<int> cols;
    std::vector<double> probs;

    explicit SparseRows(const ChainModel& chain) {
        const int n = chain.n_states();
        offs.assign(static_cast<size_t>(n) + 1, 0);
        for (int i = 0; i < n; ++i) {
            const auto row = chain.row(i);
            for (int j = 0; j < n; ++j)
                if (row[j] != 0.0) {
                    cols.push_back(j);
                    probs.push_back(row[j]);
                }
            offs[static_cast<size_t>(i) + 1] = static_cast<int>(cols.size());
        }
    }

    double dot(int i, const double* values) const {
        double e = 0.0;
        for (int t = offs[i]; t < offs[static_cast<size_t>(i) + 1]; ++t)
            e += probs[t] * values[cols[t]];
        return e;
    }
};

}  // namespace

SnellSolution solve_snell(const ChainModel& chain, const PayoffSpec& payoff) {
    chain.validate();
    const int n = chain.n_states();
    if (payoff.values.size() != static_cast<size_t>(n))
        throw std::invalid_argument("payoff length must match state count");
    const int rows = chain.horizon + 1;
    const double disc = chain.discount();

    SnellSolution sol;
    sol.n_rows = rows;
    sol.n_cols = n;
    sol.S.assign(static_cast<size_t>(rows) * n, 0.0);
    sol.G.assign(static_cast<size_t>(rows) * n, 0.0);
    sol.cont.assign(static_cast<size_t>(rows) * n, 0.0);
    sol.stop_region.assign(static_cast<size_t>(rows) * n, 0);

    auto S = [&](int k, int i) -> double& { return sol.S[static_cast<size_t>(k) * n + i]; };
    auto C = [&](int k, int i) -> double& { return sol.cont[static_cast<size_t>(k) * n + i]; };

    for (int k = 0; k < rows; ++k)
        for (int i = 0; i < n; ++i) sol.G[static_cast<size_t>(k) * n + i] = payoff.values[i];

    // Terminal row: forced exercise, continuation reported as the value itself.
    for (int i = 0; i < n; ++i) {
        S(rows - 1, i) = payoff.values[i];
        C(rows - 1, i) = payoff.values[i];
        sol.stop_region[static_cast<size_t>(rows - 1) * n + i] = 1;
    }

    const SparseRows rows_nz(chain);
    for (int k = rows - 2; k >= 0; --k) {
        const double* next_row = sol.S.data() + static_cast<size_t>(k + 1) * n;
        for (int i = 0; i < n; ++i) {
            const double c = disc * rows_nz.dot(i, next_row);
            C(k, i) = c;
            const double g = payoff.values[i];
            S(k, i) = g >= c ? g : c;
            sol.stop_region[static_cast<size_t>(k) * n + i] = (S(k, i) - g <= contact_tol) ? 1 : 0;
        }
    }
    return sol;
}

StationarySolution solve_snell_stationary(const ChainModel& chain, const PayoffSpec& payoff,
                                          double tol, int max_steps) {
    chain.validate();
    const int n = chain.n_states();
    if (payoff.values.size() != static_cast<size_t>(n))
        throw std::invalid_argument("payoff length must match state count");
    const double disc = chain.discount();

    StationarySolution out;
    out.V = payoff.values;
    out.cont.assign(n, 0.0);
    std::vector<double> next(n);
    const SparseRows rows_nz(chain);
    for (int step = 1; step <= max_steps; ++step) {
        double change = 0.0;
        for (int i = 0; i < n; ++i) {
            const double c = disc * rows_nz.dot(i, out.V.data());
            out.cont[i] = c;
            next[i] = std::max(payoff.values[i], c);
            change = std::max(change, std::abs(next[i] - out.V[i]));
        }
        out.V.swap(next);
        out.steps = step;
        out.residual = change;
        if (change <= tol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

StoppingRule make_rule(int n_rows, int n_cols) {
    StoppingRule rule;
    rule.n_rows = n_rows;
    rule.n_cols = n_cols;
    rule.region.assign(static_cast<size_t>(n_rows) * n_cols, 0);
    for (int i = 0; i < n_cols; ++i) rule.region[static_cast<size_t>(n_rows - 1) * n_cols + i] = 1;
    return rule;
}

StoppingRule stopping_rule(const SnellSolution& solution, RuleKind kind, double eps) {
    if (kind == RuleKind::maximal)
        throw std::invalid_argument(
            "maximal rule requires a decomposition; use maximal_stopping_rule");
    if (eps < 0.0) throw std::invalid_argument("eps must be nonnegative");
    const double slack = (kind == RuleKind::minimal ? 0.0 : eps) + contact_tol;
    StoppingRule rule = make_rule(solution.n_rows, solution.n_cols);
    for (int k = 0; k < solution.n_rows; ++k)
        for (int i = 0; i < solution.n_cols; ++i)
            rule.set(k, i, solution.s(k, i) - solution.g(k, i) <= slack);
    return rule;
}

double evaluate_rule(const ChainModel& chain, const PayoffSpec& payoff,
                     const StoppingRule& rule, int root) {
    const int n = chain.n_states();
    const int rows = chain.horizon + 1;
    if (rule.n_rows != rows || rule.n_cols != n)
        throw std::invalid_argument("rule shape does not match chain");
    if (root < 0 || root >= n) throw std::invalid_argument("root state out of range");
    const double disc = chain.discount();

    std::vector<double> occ(n, 0.0), next(n, 0.0);
    occ[root] = 1.0;
    double value = 0.0;
    double df = 1.0;  // exp(-alpha*k*dt)
    for (int k = 0; k < rows; ++k) {
        for (int i = 0; i < n; ++i) {
            if (occ[i] == 0.0) continue;
            if (rule.stops(k, i)) {
                value += occ[i] * df * payoff.values[i];
                occ[i] = 0.0;
            }
        }
        if (k + 1 < rows) {
            std::fill(next.begin(), next.end(), 0.0);
            for (int i = 0; i < n; ++i) {
                if (occ[i] == 0.0) continue;
                const auto row = chain.row(i);
                for (int j = 0; j < n; ++j)
                    if (row[j] != 0.0) next[j] += occ[i] * row[j];
            }
            occ.swap(next);
            df *= disc;
        }
    }
    return value;
}

std::vector<double> rule_values(const ChainModel& chain, const PayoffSpec& payoff,
                                const StoppingRule& rule) {
    const int n = chain.n_states();
    const int rows = chain.horizon + 1;
    if (rule.n_rows != rows || rule.n_cols != n)
        throw std::invalid_argument("rule shape does not match chain");
    const double disc = chain.discount();

    std::vector<double> W(static_cast<size_t>(rows) * n, 0.0);
    for (int i = 0; i < n; ++i) W[static_cast<size_t>(rows - 1) * n + i] = payoff.values[i];
    for (int k = rows - 2; k >= 0; --k) {
        for (int i = 0; i < n; ++i) {
            double v;
            if (rule.stops(k, i)) {
                v = payoff.values[i];
            } else {
                double e = 0.0;
                const auto row = chain.row(i);
                for (int j = 0; j < n; ++j) e += row[j] * W[static_cast<size_t>(k + 1) * n + j];
                v = disc * e;
            }
            W[static_cast<size_t>(k) * n + i] = v;
        }
    }
    return W;
}

StoppingRule combine_rules(const ChainModel& chain, const PayoffSpec& payoff,
                           const StoppingRule& r1, const StoppingRule& r2) {
    const auto w1 = rule_values(chain, payoff, r1);
    const auto w2 = rule_values(chain, payoff, r2);
    StoppingRule out = make_rule(r1.n_rows, r1.n_cols);
    for (int k = 0; k < r1.n_rows; ++k)
        for (int i = 0; i < r1.n_cols; ++i) {
            const size_t idx = static_cast<size_t>(k) * r1.n_cols + i;
            out.set(k, i, w1[idx] >= w2[idx] ? r1.stops(k, i) : r2.stops(k, i));
        }
    return out;
}

}  // namespace snellkit

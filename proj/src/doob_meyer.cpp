#include "snellkit/doob_meyer.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <string>
#include <unordered_map>

namespace snellkit {

AbsoluteContinuityViolated::AbsoluteContinuityViolated(int k, int i, double da, double dd)
    : std::runtime_error("compensator mass dA=" + std::to_string(da) + " at step " +
                         std::to_string(k) + ", state index " + std::to_string(i) +
                         " where dDminus=" + std::to_string(dd) + " is below tol_den"),
      step(k),
      state(i),
      dA_value(da),
      dDminus_value(dd) {}

double Decomposition::dm(int k, int i, int j) const {
    const double disc = std::exp(-alpha * dt);
    return disc * S[static_cast<size_t>(k + 1) * n_cols + j] -
           cont[static_cast<size_t>(k) * n_cols + i];
}

double Decomposition::time_discount(int k) const { return std::exp(-alpha * dt * k); }

Decomposition decompose(const ChainModel& chain, const PayoffSpec& payoff,
                        const SnellSolution& solution) {
    const int n = chain.n_states();
    const int steps = chain.horizon;
    if (solution.n_cols != n || solution.n_rows != steps + 1)
        throw std::invalid_argument("solution shape does not match chain");

    Decomposition dec;
    dec.n_steps = steps;
    dec.n_cols = n;
    dec.dt = chain.dt;
    dec.alpha = chain.alpha;
    dec.S = solution.S;
    dec.cont.assign(solution.cont.begin(),
                    solution.cont.begin() + static_cast<size_t>(steps) * n);

    dec.dA.resize(static_cast<size_t>(steps) * n);
    for (int k = 0; k < steps; ++k)
        for (int i = 0; i < n; ++i) {
            const double raw = solution.s(k, i) - solution.c(k, i);
            if (raw < -tol_num)
                throw std::runtime_error("negative predictable increment at step " +
                                         std::to_string(k));
            dec.dA[static_cast<size_t>(k) * n + i] = raw > 0.0 ? raw : 0.0;
        }

    const auto lg = discrete_generator(chain, payoff.values);
    dec.dD.resize(static_cast<size_t>(steps) * n);
    dec.dDplus.resize(dec.dD.size());
    dec.dDminus.resize(dec.dD.size());
    for (int k = 0; k < steps; ++k)
        for (int i = 0; i < n; ++i) {
            const double d = lg[i] * chain.dt;
            const size_t idx = static_cast<size_t>(k) * n + i;
            dec.dD[idx] = d;
            dec.dDplus[idx] = d > 0.0 ? d : 0.0;
            dec.dDminus[idx] = d < 0.0 ? -d : 0.0;
        }

    mu_density(dec);
    return dec;
}

std::vector<double> mu_density(Decomposition& dec) {
    const size_t count = dec.dA.size();
    dec.mu.assign(count, std::numeric_limits<double>::quiet_NaN());
    dec.mu_defined.assign(count, 0);
    for (int k = 0; k < dec.n_steps; ++k)
        for (int i = 0; i < dec.n_cols; ++i) {
            const size_t idx = static_cast<size_t>(k) * dec.n_cols + i;
            const double da = dec.dA[idx];
            const double dd = dec.dDminus[idx];
            if (dd > tol_den) {
                dec.mu[idx] = da / dd;
                dec.mu_defined[idx] = 1;
            } else if (da > tol_num) {
                throw AbsoluteContinuityViolated(k, i, da, dd);
            }
        }
    return dec.mu;
}

BoundReport increment_bound_check(const Decomposition& dec) {
    BoundReport report;
    for (int k = 0; k < dec.n_steps; ++k)
        for (int i = 0; i < dec.n_cols; ++i) {
            const double da = dec.da(k, i);
            const double dd = dec.dd_minus(k, i);
            const double viol = std::max(-da, da - dd);
            ++report.nodes_checked;
            if (viol > report.max_violation) {
                report.max_violation = viol;
                report.worst_step = k;
                report.worst_state = i;
            }
        }
    report.ok = report.max_violation <= tol_num;
    return report;
}

StoppingRule maximal_stopping_rule(const SnellSolution& solution, const Decomposition& dec) {
    if (dec.n_cols != solution.n_cols || dec.n_steps + 1 != solution.n_rows)
        throw std::invalid_argument("decomposition shape does not match solution");
    StoppingRule rule = make_rule(solution.n_rows, solution.n_cols);
    for (int k = 0; k < dec.n_steps; ++k)
        for (int i = 0; i < dec.n_cols; ++i) rule.set(k, i, dec.da(k, i) > 0.0);
    return rule;
}

namespace {

// Joint-support entry for the exact sweep: current state plus the running
// compensator A and the per-level approximation accumulators, keyed bitwise.
std::string make_key(int state, const std::vector<double>& acc) {
    std::string key(sizeof(int) + acc.size() * sizeof(double), '\0');
    std::memcpy(key.data(), &state, sizeof(int));
    std::memcpy(key.data() + sizeof(int), acc.data(), acc.size() * sizeof(double));
    return key;
}

void unpack_key(const std::string& key, int levels, int& state, std::vector<double>& acc) {
    std::memcpy(&state, key.data(), sizeof(int));
    acc.resize(static_cast<size_t>(levels) + 1);
    std::memcpy(acc.data(), key.data() + sizeof(int), acc.size() * sizeof(double));
}

}  // namespace

ApproxReport partition_approximation(const ChainModel& chain, const PayoffSpec& payoff,
                                     int root, std::vector<int> probe_times, int depth,
                                     size_t support_cap) {
    chain.validate();
    const int n = chain.n_states();
    const int N = chain.horizon;
    if (depth < 1) throw std::invalid_argument("depth must be at least 1");
    if (N % (1 << depth) != 0)
        throw std::invalid_argument(
            "nested dyadic partitions need horizon divisible by 2^depth");
    if (root < 0 || root >= n) throw std::invalid_argument("root state out of range");
    const int coarse = N / 2;
    for (int t : probe_times)
        if (t < 0 || t > N || t % coarse != 0)
            throw std::invalid_argument(
                "probe times must lie on the coarsest partition (multiples of horizon/2)");

    const auto solution = solve_snell(chain, payoff);
    const auto dec = decompose(chain, payoff, solution);

    // Discounted per-step compensator increments, time-0 units.
    std::vector<std::vector<double>> dbar(N, std::vector<double>(n));
    for (int u = 0; u < N; ++u) {
        const double df = dec.time_discount(u);
        for (int i = 0; i < n; ++i) dbar[u][i] = df * dec.da(u, i);
    }

    ApproxReport report;
    report.probe_times = probe_times;
    report.partitions.resize(depth);
    std::vector<int> block(depth + 1, 0);
    for (int l = 1; l <= depth; ++l) {
        block[l] = N >> l;
        for (int t = 0; t <= N; t += block[l]) report.partitions[l - 1].push_back(t);
    }

    // Exact block-conditional expectations of A's increments, per level and
    // block start, via backward accumulation within the block.
    std::vector<std::vector<std::vector<double>>> phi(depth + 1);
    for (int l = 1; l <= depth; ++l) {
        const int m = block[l];
        phi[l].resize(N / m);
        for (int b = 0; b < N / m; ++b) {
            const int s = b * m;
            std::vector<double> B(n, 0.0), next(n);
            for (int v = s + m - 1; v >= s; --v) {
                for (int i = 0; i < n; ++i) {
                    double e = 0.0;
                    const auto row = chain.row(i);
                    for (int j = 0; j < n; ++j) e += row[j] * B[j];
                    next[i] = dbar[v][i] + e;
                }
                B.swap(next);
            }
            phi[l][b] = std::move(B);
        }
    }

    report.an_values.assign(probe_times.size(), std::vector<double>(depth, 0.0));
    report.an_errors.assign(probe_times.size(), std::vector<double>(depth, 0.0));
    report.cesaro_errors.assign(probe_times.size(), std::vector<double>(depth, 0.0));

    std::unordered_map<std::string, double> support;
    {
        std::vector<double> acc(static_cast<size_t>(depth) + 1, 0.0);
        support.emplace(make_key(root, acc), 1.0);
    }

    int state = 0;
    std::vector<double> acc;
    for (int u = 0; u <= N; ++u) {
        for (size_t p = 0; p < probe_times.size(); ++p) {
            if (probe_times[p] != u) continue;
            for (const auto& [key, w] : support) {
                unpack_key(key, depth, state, acc);
                const double A = acc[0];
                double prefix = 0.0;
                for (int l = 1; l <= depth; ++l) {
                    report.an_values[p][l - 1] += w * acc[l];
                    report.an_errors[p][l - 1] += w * std::abs(acc[l] - A);
                    prefix += acc[l];
                    report.cesaro_errors[p][l - 1] += w * std::abs(prefix / l - A);
                }
            }
        }
        if (u == N) {
            for (const auto& [key, w] : support) {
                unpack_key(key, depth, state, acc);
                report.total_mass += w * acc[0];
            }
            break;
        }

        std::unordered_map<std::string, double> next;
        next.reserve(support.size() * 2);
        for (const auto& [key, w] : support) {
            unpack_key(key, depth, state, acc);
            for (int l = 1; l <= depth; ++l)
                if (u % block[l] == 0) acc[l] += phi[l][u / block[l]][state];
            acc[0] += dbar[u][state];
            const auto row = chain.row(state);
            for (int j = 0; j < n; ++j) {
                if (row[j] == 0.0) continue;
                next[make_key(j, acc)] += w * row[j];
            }
        }
        if (next.size() > support_cap)
            throw std::runtime_error("partition sweep joint support exceeded cap of " +
                                     std::to_string(support_cap));
        support.swap(next);
    }
    return report;
}

}  // namespace snellkit

#include "snellkit/dual_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace snellkit {

double MartingaleSpec::increment(int k, int i, int j) const {
    return std::exp(-alpha * dt * (k + 1)) * (f(k + 1, j) - pf(k, i));
}

double MartingaleSpec::time_discount(int k) const { return std::exp(-alpha * dt * k); }

namespace {

MartingaleSpec from_surface(const ChainModel& chain, std::vector<double> surface) {
    MartingaleSpec mart;
    mart.n_steps = chain.horizon;
    mart.n_cols = chain.n_states();
    mart.dt = chain.dt;
    mart.alpha = chain.alpha;
    mart.F = std::move(surface);
    const int n = mart.n_cols;
    mart.PF.assign(static_cast<size_t>(mart.n_steps) * n, 0.0);
    for (int k = 0; k < mart.n_steps; ++k)
        for (int i = 0; i < n; ++i) {
            double e = 0.0;
            const auto row = chain.row(i);
            for (int j = 0; j < n; ++j) e += row[j] * mart.f(k + 1, j);
            mart.PF[static_cast<size_t>(k) * n + i] = e;
        }
    return mart;
}

}  // namespace

MartingaleSpec martingale_from_function(const ChainModel& chain, std::span<const double> f) {
    const int n = chain.n_states();
    if (f.size() != static_cast<size_t>(n))
        throw std::invalid_argument("f length must match state count");
    std::vector<double> surface(static_cast<size_t>(chain.horizon + 1) * n);
    for (int k = 0; k <= chain.horizon; ++k)
        std::copy(f.begin(), f.end(), surface.begin() + static_cast<size_t>(k) * n);
    return from_surface(chain, std::move(surface));
}

MartingaleSpec martingale_from_solution(const ChainModel& chain, const SnellSolution& solution) {
    if (solution.n_cols != chain.n_states() || solution.n_rows != chain.horizon + 1)
        throw std::invalid_argument("solution shape does not match chain");
    return from_surface(chain, solution.S);
}

namespace {

struct PathAccumulator {
    double weighted_sum = 0.0;
    std::uint64_t leaves = 0;
};

void enumerate_paths(const ChainModel& chain, const PayoffSpec& payoff,
                     const MartingaleSpec& mart, std::uint64_t path_cap,
                     int k, int i, double m, double run_max, double prob,
                     PathAccumulator& acc) {
    if (k == chain.horizon) {
        acc.weighted_sum += prob * run_max;
        if (++acc.leaves > path_cap)
            throw std::runtime_error("path count exceeds cap of " + std::to_string(path_cap) +
                                     "; use the Monte Carlo dual");
        return;
    }
    const int n = chain.n_states();
    const auto row = chain.row(i);
    const double df_next = mart.time_discount(k + 1);
    for (int j = 0; j < n; ++j) {
        if (row[j] == 0.0) continue;
        const double m2 = m + mart.increment(k, i, j);
        const double candidate = df_next * payoff.values[j] - m2;
        enumerate_paths(chain, payoff, mart, path_cap, k + 1, j, m2,
                        std::max(run_max, candidate), prob * row[j], acc);
    }
}

}  // namespace

DualEstimate dual_bound_exact(const ChainModel& chain, const PayoffSpec& payoff,
                              const MartingaleSpec& mart, int root, std::uint64_t path_cap) {
    chain.validate();
    if (root < 0 || root >= chain.n_states())
        throw std::invalid_argument("root state out of range");
    PathAccumulator acc;
    enumerate_paths(chain, payoff, mart, path_cap, 0, root, 0.0, payoff.values[root], 1.0, acc);
    DualEstimate est;
    est.value = acc.weighted_sum;
    est.stderr_ = 0.0;
    est.n_paths = static_cast<long>(acc.leaves);
    est.exact = true;
    return est;
}

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

struct SplitMix {
    std::uint64_t state;
    explicit SplitMix(std::uint64_t s) : state(s) {}
    std::uint64_t next_u64() {
        std::uint64_t z = (state += kGolden);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
};

int sample_row(std::span<const double> row, double u) {
    double cum = 0.0;
    int last_positive = 0;
    for (int j = 0; j < static_cast<int>(row.size()); ++j) {
        if (row[j] == 0.0) continue;
        cum += row[j];
        last_positive = j;
        if (u < cum) return j;
    }
    return last_positive;
}

double simulate_path(const ChainModel& chain, const PayoffSpec& payoff,
                     const MartingaleSpec& mart, int root,
                     std::uint64_t seed, long index) {
    // Path randomness derives from (seed, index) alone.
    SplitMix rng(seed + kGolden * static_cast<std::uint64_t>(index + 1));
    int i = root;
    double m = 0.0;
    double best = payoff.values[root];
    for (int k = 0; k < chain.horizon; ++k) {
        const int j = sample_row(chain.row(i), rng.next_unit());
        m += mart.increment(k, i, j);
        best = std::max(best, mart.time_discount(k + 1) * payoff.values[j] - m);
        i = j;
    }
    return best;
}

}  // namespace

int worker_limit() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("SNELLKIT_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && cap < static_cast<long>(hw)) hw = static_cast<unsigned>(cap);
    }
    return static_cast<int>(hw);
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 32) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const size_t half = values.size() / 2;
    return pairwise_sum(values.subspan(0, half)) + pairwise_sum(values.subspan(half));
}

DualEstimate dual_bound_mc(const ChainModel& chain, const PayoffSpec& payoff,
                           const MartingaleSpec& mart, int root,
                           long n_paths, std::uint64_t seed) {
    chain.validate();
    if (root < 0 || root >= chain.n_states())
        throw std::invalid_argument("root state out of range");
    if (n_paths < 2) throw std::invalid_argument("Monte Carlo dual needs at least 2 paths");

    std::vector<double> values(static_cast<size_t>(n_paths));
    int workers = worker_limit();
    workers = std::max(1, std::min<int>(workers, static_cast<int>(n_paths / 1024) + 1));
    if (workers == 1) {
        for (long p = 0; p < n_paths; ++p)
            values[static_cast<size_t>(p)] = simulate_path(chain, payoff, mart, root, seed, p);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (long p = w; p < n_paths; p += workers)
                    values[static_cast<size_t>(p)] =
                        simulate_path(chain, payoff, mart, root, seed, p);
            });
        }
        for (auto& t : pool) t.join();
    }

    const double mean = pairwise_sum(values) / static_cast<double>(n_paths);
    std::vector<double> sq(values.size());
    for (size_t p = 0; p < values.size(); ++p) {
        const double d = values[p] - mean;
        sq[p] = d * d;
    }
    const double var = pairwise_sum(sq) / static_cast<double>(n_paths - 1);

    DualEstimate est;
    est.value = mean;
    est.stderr_ = std::sqrt(var / static_cast<double>(n_paths));
    est.n_paths = n_paths;
    est.exact = false;
    est.seed = seed;
    return est;
}

ControlledTriple controlled_trajectory(const ChainModel& chain, const PayoffSpec& payoff,
                                       const MartingaleSpec& mart,
                                       std::span<const int> path, double y0, double z0) {
    if (path.empty()) throw std::invalid_argument("path must contain at least the root state");
    const int n = chain.n_states();
    for (int i : path)
        if (i < 0 || i >= n) throw std::invalid_argument("path state out of range");
    const int x0 = path[0];
    if (z0 < payoff.values[x0] + y0)
        throw std::invalid_argument("inadmissible start: z must be at least g(x0) + y");

    const double disc = chain.discount();
    ControlledTriple triple;
    triple.x.assign(path.begin(), path.end());
    triple.y.resize(path.size());
    triple.z.resize(path.size());

    double y = y0;
    double zmax = z0;
    for (size_t k = 0; k < path.size(); ++k) {
        const int i = path[k];
        const double df = mart.time_discount(static_cast<int>(k));
        const double hindsight = mart.f(0, x0) + df * (payoff.values[i] - mart.f(static_cast<int>(k), i)) + y;
        zmax = std::max(zmax, hindsight);
        triple.y[k] = y;
        triple.z[k] = zmax;
        if (k + 1 < path.size()) {
            // Generator correction of the surface at row k, time-0 units:
            // exp(-alpha*k*dt) * (exp(-alpha*dt) (P F_{k+1})(x) - F_k(x)).
            const double ell = disc * mart.pf(static_cast<int>(k), i) - mart.f(static_cast<int>(k), i);
            y += df * ell;
        }
    }
    return triple;
}

}  // namespace snellkit

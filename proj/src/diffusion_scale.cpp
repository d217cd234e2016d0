#include "snellkit/diffusion_scale.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace snellkit {

namespace {

constexpr double kNodes[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                              0.5384693101056831, 0.9061798459386640};
constexpr double kWeights[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                0.4786286704993665, 0.2369268850561891};

template <class F>
double gauss5(const F& f, double lo, double hi) {
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    double acc = 0.0;
    for (int q = 0; q < 5; ++q) acc += kWeights[q] * f(mid + half * kNodes[q]);
    return acc * half;
}

void check_grid(std::span<const double> grid, int anchor) {
    if (grid.size() < 5) throw std::invalid_argument("grid needs at least 5 points");
    for (size_t i = 0; i + 1 < grid.size(); ++i)
        if (!(grid[i] < grid[i + 1]))
            throw std::invalid_argument("grid must be strictly increasing (index " +
                                        std::to_string(i + 1) + ")");
    if (anchor < 0 || anchor >= static_cast<int>(grid.size()))
        throw std::invalid_argument("anchor index outside the grid");
}

struct RowCoef {
    double lo, diag, hi;  // u_{i-1}, u_i, u_{i+1}
};

RowCoef interior_row(const DiffusionSpec& d, std::span<const double> grid, int i) {
    const double hm = grid[i] - grid[i - 1];
    const double hp = grid[i + 1] - grid[i];
    const double v2 = d.vol(grid[i]) * d.vol(grid[i]);
    const double b = d.drift(grid[i]);
    RowCoef r;
    r.lo = v2 / (hm * (hm + hp)) - b * hp / (hm * (hm + hp));
    r.diag = -v2 / (hm * hp) + b * (hp - hm) / (hm * hp) - d.alpha;
    r.hi = v2 / (hp * (hm + hp)) + b * hm / (hp * (hm + hp));
    return r;
}

double characteristic_root(const DiffusionSpec& d, double x, bool positive) {
    const double v2 = d.vol(x) * d.vol(x);
    if (!(v2 > 0.0))
        throw std::invalid_argument("vol vanishes at the boundary x = " + std::to_string(x) +
                                    "; shrink the interval");
    const double b = d.drift(x);
    const double disc = std::sqrt(b * b + 2.0 * v2 * d.alpha);
    return positive ? (-b + disc) / v2 : (-b - disc) / v2;
}

/// Condition row over the three grid points nearest the decay end.
/// `left` selects the end; coefficients are returned in grid order for the
/// points (0,1,2) or (n-3,n-2,n-1).
std::array<double, 3> decay_row(const DiffusionSpec& d, std::span<const double> grid,
                                const PairBoundary& bc, bool left, bool positive_root) {
    const int n = static_cast<int>(grid.size());
    const int i0 = left ? 0 : n - 3;
    const double h1 = grid[i0 + 1] - grid[i0];
    const double h2 = grid[i0 + 2] - grid[i0 + 1];
    if (bc.mode == PairBoundary::Mode::extrapolate)
        return {1.0 / (h1 * (h1 + h2)), -1.0 / (h1 * h2), 1.0 / (h2 * (h1 + h2))};
    // one-sided second-order derivative at the end point
    std::array<double, 3> dcoef;
    if (left) {
        dcoef = {-(2.0 * h1 + h2) / (h1 * (h1 + h2)), (h1 + h2) / (h1 * h2),
                 -h1 / (h2 * (h1 + h2))};
    } else {
        dcoef = {h2 / (h1 * (h1 + h2)), -(h1 + h2) / (h1 * h2),
                 (2.0 * h2 + h1) / (h2 * (h1 + h2))};
    }
    const double kappa = characteristic_root(d, left ? grid[0] : grid[n - 1], positive_root);
    std::array<double, 3> row = dcoef;
    row[left ? 0 : 2] -= kappa;
    return row;
}

/// Basis of the three-term recursion grown along the stable direction.
/// forward: start (u0, u1), sweep right. backward: start (u_{n-2}, u_{n-1}),
/// sweep left. Returns two independent solutions.
struct RecursionBasis {
    std::vector<double> w, v;
};

RecursionBasis grow_basis(const DiffusionSpec& d, std::span<const double> grid, bool forward) {
    const int n = static_cast<int>(grid.size());
    RecursionBasis basis;
    basis.w.assign(n, 0.0);
    basis.v.assign(n, 0.0);
    if (forward) {
        basis.w[0] = 1.0;
        basis.v[1] = 1.0;
        for (int i = 1; i + 1 < n; ++i) {
            const RowCoef r = interior_row(d, grid, i);
            if (std::abs(r.hi) < 1e-300)
                throw std::runtime_error("assembly is singular at state " + std::to_string(i) +
                                         "; refine the grid");
            basis.w[i + 1] = -(r.lo * basis.w[i - 1] + r.diag * basis.w[i]) / r.hi;
            basis.v[i + 1] = -(r.lo * basis.v[i - 1] + r.diag * basis.v[i]) / r.hi;
            if (!std::isfinite(basis.w[i + 1]) || !std::isfinite(basis.v[i + 1]))
                throw std::runtime_error(
                    "harmonic solution spans too many orders of magnitude; shrink the interval");
        }
    } else {
        basis.w[n - 1] = 1.0;
        basis.v[n - 2] = 1.0;
        for (int i = n - 2; i >= 1; --i) {
            const RowCoef r = interior_row(d, grid, i);
            if (std::abs(r.lo) < 1e-300)
                throw std::runtime_error("assembly is singular at state " + std::to_string(i) +
                                         "; refine the grid");
            basis.w[i - 1] = -(r.diag * basis.w[i] + r.hi * basis.w[i + 1]) / r.lo;
            basis.v[i - 1] = -(r.diag * basis.v[i] + r.hi * basis.v[i + 1]) / r.lo;
            if (!std::isfinite(basis.w[i - 1]) || !std::isfinite(basis.v[i - 1]))
                throw std::runtime_error(
                    "harmonic solution spans too many orders of magnitude; shrink the interval");
        }
    }
    return basis;
}

std::vector<double> solve_directional(const DiffusionSpec& d, std::span<const double> grid,
                                      int anchor, const PairBoundary& bc, bool increasing,
                                      const char* name) {
    const int n = static_cast<int>(grid.size());
    // The increasing solution grows to the right, so its decay side is the
    // left end and the recursion sweeps rightward; the decreasing solution is
    // mirrored.
    const bool forward = increasing;
    const RecursionBasis basis = grow_basis(d, grid, forward);

    double cw, cv, rhs;
    if (bc.mode == PairBoundary::Mode::pinned) {
        const int end = forward ? 0 : n - 1;
        cw = basis.w[end];
        cv = basis.v[end];
        rhs = bc.value;
    } else {
        const std::array<double, 3> row = decay_row(d, grid, bc, forward, increasing);
        const int i0 = forward ? 0 : n - 3;
        cw = row[0] * basis.w[i0] + row[1] * basis.w[i0 + 1] + row[2] * basis.w[i0 + 2];
        cv = row[0] * basis.v[i0] + row[1] * basis.v[i0 + 1] + row[2] * basis.v[i0 + 2];
        rhs = 0.0;
    }
    // [cw cv; w_c v_c] (a b)^T = (rhs, 1)
    const double wc = basis.w[anchor];
    const double vc = basis.v[anchor];
    const double det = cw * vc - cv * wc;
    if (std::abs(det) < 1e-300 || !std::isfinite(det))
        throw std::runtime_error(std::string(name) +
                                 ": boundary and anchor conditions are degenerate; refine the "
                                 "grid or move the anchor");
    const double a = (rhs * vc - 1.0 * cv) / det;
    const double b = (cw * 1.0 - wc * rhs) / det;

    std::vector<double> u(n);
    for (int i = 0; i < n; ++i) {
        u[i] = a * basis.w[i] + b * basis.v[i];
        if (!std::isfinite(u[i]))
            throw std::runtime_error(std::string(name) + ": non-finite value at state " +
                                     std::to_string(i) + "; shrink the interval");
    }
    for (int i = 0; i < n; ++i)
        if (!(u[i] > 0.0))
            throw std::runtime_error(std::string(name) + ": output is not positive at x = " +
                                     std::to_string(grid[i]) +
                                     "; refine the grid near the decay end");
    for (int i = 0; i + 1 < n; ++i) {
        const double slack = 1e-12 * (std::abs(u[i]) + std::abs(u[i + 1]));
        const bool ok = increasing ? (u[i + 1] >= u[i] - slack) : (u[i + 1] <= u[i] + slack);
        if (!ok)
            throw std::runtime_error(std::string(name) + ": output is not monotone at x = " +
                                     std::to_string(grid[i]) +
                                     "; refine the grid near the decay end");
    }
    return u;
}

}  // namespace

std::vector<double> make_uniform_grid(double a, double b, int n) {
    if (!(a < b)) throw std::invalid_argument("interval must satisfy a < b");
    if (n < 2) throw std::invalid_argument("grid needs at least 2 points");
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = a + (b - a) * static_cast<double>(i) / (n - 1);
    g.front() = a;
    g.back() = b;
    return g;
}

std::vector<double> make_log_grid(double a, double b, int n) {
    if (!(a > 0.0)) throw std::invalid_argument("log grid requires a > 0");
    if (!(a < b)) throw std::invalid_argument("interval must satisfy a < b");
    if (n < 2) throw std::invalid_argument("grid needs at least 2 points");
    const double la = std::log(a), lb = std::log(b);
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i)
        g[i] = std::exp(la + (lb - la) * static_cast<double>(i) / (n - 1));
    g.front() = a;
    g.back() = b;
    return g;
}

ScaleResult scale_function(const DiffusionSpec& diffusion, std::span<const double> grid,
                           int anchor) {
    check_grid(grid, anchor);
    if (!diffusion.drift || !diffusion.vol)
        throw std::invalid_argument("drift and vol callables are required");
    const int n = static_cast<int>(grid.size());
    auto integrand = [&](double x) {
        const double v2 = diffusion.vol(x) * diffusion.vol(x);
        const double val = 2.0 * diffusion.drift(x) / v2;
        if (!std::isfinite(val))
            throw std::runtime_error("drift/vol^2 is not integrable near x = " +
                                     std::to_string(x));
        return val;
    };
    // B(x) = int_c^x 2 drift / vol^2, accumulated cell by cell from the anchor.
    std::vector<double> B(n, 0.0);
    for (int i = anchor; i + 1 < n; ++i) B[i + 1] = B[i] + gauss5(integrand, grid[i], grid[i + 1]);
    for (int i = anchor; i >= 1; --i) B[i - 1] = B[i] - gauss5(integrand, grid[i - 1], grid[i]);

    ScaleResult out;
    out.sprime.resize(n);
    out.s.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        out.sprime[i] = std::exp(-B[i]);
        if (!std::isfinite(out.sprime[i]))
            throw std::runtime_error("scale density overflows near x = " + std::to_string(grid[i]) +
                                     "; shrink the interval");
    }
    for (int i = anchor; i + 1 < n; ++i) {
        auto sp = [&](double x) { return std::exp(-(B[i] + gauss5(integrand, grid[i], x))); };
        out.s[i + 1] = out.s[i] + gauss5(sp, grid[i], grid[i + 1]);
    }
    for (int i = anchor; i >= 1; --i) {
        auto sp = [&](double x) { return std::exp(-(B[i] + gauss5(integrand, grid[i], x))); };
        out.s[i - 1] = out.s[i] - gauss5(sp, grid[i - 1], grid[i]);
    }
    for (int i = 0; i < n; ++i)
        if (!std::isfinite(out.s[i]))
            throw std::runtime_error("scale function overflows near x = " +
                                     std::to_string(grid[i]) + "; shrink the interval");
    return out;
}

HarmonicPair harmonic_pair(const DiffusionSpec& diffusion, std::span<const double> grid,
                           int anchor, const PairOptions& options) {
    check_grid(grid, anchor);
    if (!diffusion.drift || !diffusion.vol)
        throw std::invalid_argument("drift and vol callables are required");
    if (diffusion.alpha < 0.0) throw std::invalid_argument("alpha must be nonnegative");

    HarmonicPair pair;
    pair.grid.assign(grid.begin(), grid.end());
    pair.anchor = anchor;
    pair.alpha = diffusion.alpha;
    pair.s = scale_function(diffusion, grid, anchor).s;

    if (diffusion.alpha == 0.0) {
        pair.degenerate = true;
        pair.psi = pair.s;
        pair.phi.assign(grid.size(), 1.0);
        pair.stilde = pair.s;
        return pair;
    }

    pair.psi = solve_directional(diffusion, grid, anchor, options.psi_decay, true, "psi");
    pair.phi = solve_directional(diffusion, grid, anchor, options.phi_decay, false, "phi");
    pair.stilde.resize(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) pair.stilde[i] = pair.psi[i] / pair.phi[i];
    for (size_t i = 0; i + 1 < grid.size(); ++i)
        if (!(pair.stilde[i] < pair.stilde[i + 1]))
            throw std::runtime_error("psi/phi is not strictly increasing at x = " +
                                     std::to_string(grid[i]) + "; refine the grid");
    return pair;
}

HittingSplit hitting_decomposition(const HarmonicPair& pair, int l, int r) {
    const int n = static_cast<int>(pair.grid.size());
    if (l < 0 || r >= n) throw std::invalid_argument("interval indices outside the grid");
    if (!(l < r)) throw std::invalid_argument("interval is degenerate: need l < r");
    const double denom = pair.psi[l] * pair.phi[r] - pair.psi[r] * pair.phi[l];
    if (denom == 0.0 || !std::isfinite(denom))
        throw std::runtime_error("hitting decomposition is degenerate on this interval");
    HittingSplit split;
    split.l = l;
    split.r = r;
    split.p1.resize(r - l + 1);
    split.p2.resize(r - l + 1);
    for (int i = l; i <= r; ++i) {
        split.p1[i - l] = (pair.psi[i] * pair.phi[r] - pair.psi[r] * pair.phi[i]) / denom;
        split.p2[i - l] = (pair.psi[l] * pair.phi[i] - pair.psi[i] * pair.phi[l]) / denom;
    }
    return split;
}

TransformedPayoff transform_payoff(const HarmonicPair& pair,
                                   const std::function<double(double)>& g, int l, int r) {
    const int n = static_cast<int>(pair.grid.size());
    if (!g) throw std::invalid_argument("payoff callable is required");
    if (l < 0 || r >= n) throw std::invalid_argument("interval indices outside the grid");
    if (!(l < r)) throw std::invalid_argument("interval is degenerate: need l < r");
    TransformedPayoff out;
    out.y.reserve(r - l + 1);
    out.values.reserve(r - l + 1);
    out.grid_index.reserve(r - l + 1);
    for (int i = l; i <= r; ++i) {
        const double gi = g(pair.grid[i]);
        if (!std::isfinite(gi))
            throw std::invalid_argument("payoff is not finite at x = " +
                                        std::to_string(pair.grid[i]));
        out.y.push_back(pair.stilde[i]);
        out.values.push_back(gi / pair.phi[i]);
        out.grid_index.push_back(i);
    }
    return out;
}

double interp_monotone(std::span<const double> xs, std::span<const double> ys, double x) {
    if (xs.size() < 2 || xs.size() != ys.size())
        throw std::invalid_argument("interpolation table needs matching sizes >= 2");
    const double span = xs.back() - xs.front();
    const double slack = 1e-9 * std::max(1.0, std::abs(span));
    if (x < xs.front() - slack || x > xs.back() + slack)
        throw std::invalid_argument("point " + std::to_string(x) +
                                    " is outside the interpolation table");
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const size_t hi = static_cast<size_t>(it - xs.begin());
    const size_t lo = hi - 1;
    const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return ys[lo] + t * (ys[hi] - ys[lo]);
}

int nearest_index(std::span<const double> grid, double x) {
    if (grid.empty()) throw std::invalid_argument("empty grid");
    const auto it = std::lower_bound(grid.begin(), grid.end(), x);
    if (it == grid.begin()) return 0;
    if (it == grid.end()) return static_cast<int>(grid.size()) - 1;
    const int hi = static_cast<int>(it - grid.begin());
    return (x - grid[hi - 1] <= grid[hi] - x) ? hi - 1 : hi;
}

}  // namespace snellkit

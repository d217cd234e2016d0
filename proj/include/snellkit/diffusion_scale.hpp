#pragma once

#include <functional>
#include <span>
#include <vector>

namespace snellkit {

/// One-dimensional regular diffusion on (a, b) with killing rate alpha.
struct DiffusionSpec {
    double a = 0.0;
    double b = 1.0;
    std::function<double(double)> drift;
    std::function<double(double)> vol;
    double alpha = 0.0;
};

std::vector<double> make_uniform_grid(double a, double b, int n);
std::vector<double> make_log_grid(double a, double b, int n);  // requires 0 < a < b

/// Scale function anchored at grid[anchor]: s(c) = 0, s'(c) = 1, with
/// s'(x) = exp(-int_c^x 2 drift / vol^2). Quadrature is nested Gauss-Legendre
/// per cell; non-finite integrand values are rejected.
struct ScaleResult {
    std::vector<double> s;
    std::vector<double> sprime;
};

ScaleResult scale_function(const DiffusionSpec& diffusion, std::span<const double> grid,
                           int anchor);

/// Increasing/decreasing positive solutions of
///   (1/2) vol^2 u'' + drift u' - alpha u = 0
/// normalized to psi(c) = phi(c) = 1 at the anchor. alpha = 0 degenerates to
/// (s, 1). Each solution is integrated along its direction of growth, which
/// is numerically stable; the boundary row on the decay side selects the
/// solution.
struct HarmonicPair {
    std::vector<double> grid;
    std::vector<double> s;  // scale values, anchored at the same point
    std::vector<double> psi;
    std::vector<double> phi;
    std::vector<double> stilde;  // psi / phi, strictly increasing
    int anchor = 0;
    double alpha = 0.0;
    bool degenerate = false;  // alpha = 0 branch
};

struct PairBoundary {
    enum class Mode {
        growth,       // Robin row from the local characteristic root
        pinned,       // Dirichlet value from a known asymptotic
        extrapolate,  // zero second difference
    };
    Mode mode = Mode::growth;
    double value = 0.0;  // pinned only
};

struct PairOptions {
    PairBoundary psi_decay;  // left end for psi
    PairBoundary phi_decay;  // right end for phi
};

HarmonicPair harmonic_pair(const DiffusionSpec& diffusion, std::span<const double> grid,
                           int anchor, const PairOptions& options = {});

/// Two-sided hitting decomposition on [grid[l], grid[r]]:
///   p1 = (psi(x) phi(r) - psi(r) phi(x)) / (psi(l) phi(r) - psi(r) phi(l))
/// and p2 mirrored. p1 + p2 = 1 iff alpha = 0; killing makes the sum < 1
/// strictly inside the interval.
struct HittingSplit {
    int l = 0, r = 0;
    std::vector<double> p1;
    std::vector<double> p2;
};

HittingSplit hitting_decomposition(const HarmonicPair& pair, int l, int r);

/// Payoff transform onto the natural coordinate: knots y = stilde(x) and
/// values gtilde = g(x) / phi(x) for grid points in [l, r].
struct TransformedPayoff {
    std::vector<double> y;
    std::vector<double> values;
    std::vector<int> grid_index;
};

TransformedPayoff transform_payoff(const HarmonicPair& pair,
                                   const std::function<double(double)>& g, int l, int r);

/// Piecewise-linear evaluation/inversion on a strictly increasing table.
double interp_monotone(std::span<const double> xs, std::span<const double> ys, double x);

int nearest_index(std::span<const double> grid, double x);

}  // namespace snellkit

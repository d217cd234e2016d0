#include "snellkit/majorant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace snellkit {

double PiecewiseLinear::operator()(double x) const {
    if (knots.size() < 2 || knots.size() != values.size())
        throw std::logic_error("piecewise-linear table is malformed");
    const double span = knots.back() - knots.front();
    const double slack = 1e-9 * std::max(1.0, std::abs(span));
    if (x < knots.front() - slack || x > knots.back() + slack)
        throw std::invalid_argument("point " + std::to_string(x) +
                                    " is outside the majorant's knot range");
    if (x <= knots.front()) return values.front();
    if (x >= knots.back()) return values.back();
    const auto it = std::upper_bound(knots.begin(), knots.end(), x);
    const size_t hi = static_cast<size_t>(it - knots.begin());
    const size_t lo = hi - 1;
    const double t = (x - knots[lo]) / (knots[hi] - knots[lo]);
    return values[lo] + t * (values[hi] - values[lo]);
}

MajorantResult concave_majorant(std::span<const double> knots, std::span<const double> values,
                                double tol) {
    const size_t n = knots.size();
    if (n < 2) throw std::invalid_argument("majorant needs at least 2 knots");
    if (values.size() != n) throw std::invalid_argument("knots and values sizes differ");
    for (size_t i = 0; i + 1 < n; ++i)
        if (!(knots[i] < knots[i + 1]))
            throw std::invalid_argument("knots must be strictly increasing (index " +
                                        std::to_string(i + 1) + ")");
    std::vector<double> floored(n);
    for (size_t i = 0; i < n; ++i) {
        if (!std::isfinite(values[i]))
            throw std::invalid_argument("value at knot " + std::to_string(i) + " is not finite");
        floored[i] = values[i] > 0.0 ? values[i] : 0.0;
    }

    // Upper hull, left to right: slopes strictly decrease between kept
    // vertices; a middle point on or below the chord of its neighbors is
    // dropped.
    std::vector<int> hull;
    hull.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        while (hull.size() >= 2) {
            const int i0 = hull[hull.size() - 2];
            const int i1 = hull[hull.size() - 1];
            const double cross = (knots[i] - knots[i0]) * (floored[i1] - floored[i0]) -
                                 (knots[i1] - knots[i0]) * (floored[i] - floored[i0]);
            if (cross <= 0.0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(static_cast<int>(i));
    }

    MajorantResult out;
    out.hull = hull;
    out.majorant.knots.reserve(hull.size());
    out.majorant.values.reserve(hull.size());
    for (int idx : hull) {
        out.majorant.knots.push_back(knots[idx]);
        out.majorant.values.push_back(floored[idx]);
    }
    out.values_at_knots.resize(n);
    out.contact.assign(n, 0);
    size_t seg = 0;
    for (size_t i = 0; i < n; ++i) {
        while (seg + 1 < hull.size() && static_cast<int>(i) >= hull[seg + 1]) ++seg;
        if (static_cast<int>(i) == hull[seg]) {
            out.values_at_knots[i] = floored[i];
        } else {
            const int i0 = hull[seg];
            const int i1 = hull[seg + 1];
            const double t = (knots[i] - knots[i0]) / (knots[i1] - knots[i0]);
            out.values_at_knots[i] = floored[i0] + t * (floored[i1] - floored[i0]);
        }
        if (out.values_at_knots[i] - floored[i] <= tol) out.contact[i] = 1;
    }
    return out;
}

std::vector<double> value_from_majorant(const PiecewiseLinear& majorant, const HarmonicPair& pair,
                                        std::span<const double> xs) {
    std::vector<double> V;
    V.reserve(xs.size());
    for (double x : xs) {
        double y, ph;
        try {
            y = interp_monotone(pair.grid, pair.stilde, x);
            ph = interp_monotone(pair.grid, pair.phi, x);
        } catch (const std::invalid_argument&) {
            throw std::invalid_argument("query point " + std::to_string(x) +
                                        " is outside the pair's grid");
        }
        try {
            V.push_back(ph * majorant(y));
        } catch (const std::invalid_argument&) {
            throw std::invalid_argument("query point " + std::to_string(x) +
                                        " maps outside the transformed domain; widen [l, r]");
        }
    }
    return V;
}

std::vector<StopInterval> stopping_region(std::span<const double> xs, std::span<const double> V,
                                          std::span<const double> g, double tol) {
    const size_t n = xs.size();
    if (V.size() != n || g.size() != n)
        throw std::invalid_argument("xs, V, g sizes differ");
    std::vector<StopInterval> runs;
    size_t i = 0;
    while (i < n) {
        if (V[i] - g[i] <= tol) {
            StopInterval run;
            run.lo_index = static_cast<int>(i);
            while (i + 1 < n && V[i + 1] - g[i + 1] <= tol) ++i;
            run.hi_index = static_cast<int>(i);
            run.lo = xs[run.lo_index];
            run.hi = xs[run.hi_index];
            runs.push_back(run);
        }
        ++i;
    }
    return runs;
}

SmoothFitReport smooth_fit_check(std::span<const double> xs, std::span<const double> V,
                                 double boundary, double h0, int levels) {
    const int n = static_cast<int>(xs.size());
    if (V.size() != xs.size()) throw std::invalid_argument("xs and V sizes differ");
    if (n < 3) throw std::invalid_argument("need at least 3 grid points");
    if (levels < 1) throw std::invalid_argument("levels must be >= 1");
    if (!(h0 > 0.0)) throw std::invalid_argument("h0 must be positive");

    SmoothFitReport report;
    report.boundary_index = nearest_index(xs, boundary);
    report.boundary = xs[report.boundary_index];
    const int b = report.boundary_index;
    const double step = (b + 1 < n ? xs[b + 1] - xs[b] : xs[b] - xs[b - 1]);
    if (h0 < 0.5 * step)
        throw std::invalid_argument("h0 is below the grid resolution near the boundary; refine "
                                    "the grid or increase h0");

    for (int lvl = levels - 1; lvl >= 0; --lvl) {
        const double target = h0 * static_cast<double>(1 << lvl);
        const int k = std::max(1, static_cast<int>(std::lround(target / step)));
        if (b - k < 0 || b + k >= n)
            throw std::invalid_argument("span " + std::to_string(target) +
                                        " leaves the grid around the boundary; use a smaller h0 "
                                        "or fewer levels");
        const double hl = xs[b] - xs[b - k];
        const double hr = xs[b + k] - xs[b];
        const double left = (V[b] - V[b - k]) / hl;
        const double right = (V[b + k] - V[b]) / hr;
        report.h.push_back(0.5 * (hl + hr));
        report.left_slope.push_back(left);
        report.right_slope.push_back(right);
        report.gap.push_back(std::abs(left - right));
    }
    const size_t m = report.gap.size();
    if (m >= 2) {
        const double h1 = report.h[m - 1], h2 = report.h[m - 2];
        const double g1 = report.gap[m - 1], g2 = report.gap[m - 2];
        if (h2 - h1 <= 0.0)
            throw std::invalid_argument("ladder spans collapse at the grid resolution; refine "
                                        "the grid");
        report.extrapolated_gap = std::abs((g1 * h2 - g2 * h1) / (h2 - h1));
    } else {
        report.extrapolated_gap = report.gap.back();
    }
    return report;
}

}  // namespace snellkit

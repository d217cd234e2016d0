#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "snellkit/diffusion_scale.hpp"

namespace snellkit {

/// Concave piecewise-linear function on strictly increasing knots.
/// Evaluation is exact at knots.
struct PiecewiseLinear {
    std::vector<double> knots;
    std::vector<double> values;
    double operator()(double x) const;
};

/// Least concave majorant of the floored inputs max(values, 0) on the given
/// knots. `values_at_knots` samples the hull at every input knot; `contact`
/// marks knots where the hull touches the floored input within tol; `hull`
/// stores the vertex indices actually supporting the majorant.
struct MajorantResult {
    PiecewiseLinear majorant;  // vertices only
    std::vector<double> values_at_knots;
    std::vector<std::uint8_t> contact;
    std::vector<int> hull;
};

MajorantResult concave_majorant(std::span<const double> knots, std::span<const double> values,
                                double tol = 1e-10);

/// Undo the transform: V(x) = phi(x) * W(stilde(x)) for each query point,
/// which must map into the majorant's knot range.
std::vector<double> value_from_majorant(const PiecewiseLinear& majorant, const HarmonicPair& pair,
                                        std::span<const double> xs);

struct StopInterval {
    double lo = 0.0, hi = 0.0;
    int lo_index = 0, hi_index = 0;
};

/// Maximal runs of {V - g <= tol}.
std::vector<StopInterval> stopping_region(std::span<const double> xs, std::span<const double> V,
                                          std::span<const double> g, double tol = 1e-10);

/// One-sided difference quotients of V around a free/stopped boundary over a
/// shrinking ladder of spans, plus a linear-in-h extrapolation of the slope
/// gap. Spans snap to whole grid steps; h below the grid resolution is an
/// error.
struct SmoothFitReport {
    double boundary = 0.0;  // snapped to the nearest grid point
    int boundary_index = 0;
    std::vector<double> h;           // achieved spans, coarse to fine
    std::vector<double> left_slope;  // (V(b) - V(b-h)) / h
    std::vector<double> right_slope;
    std::vector<double> gap;  // |left - right|
    double extrapolated_gap = 0.0;
};

SmoothFitReport smooth_fit_check(std::span<const double> xs, std::span<const double> V,
                                 double boundary, double h0, int levels = 3);

}  // namespace snellkit

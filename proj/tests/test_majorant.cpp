#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "snellkit/majorant.hpp"

using namespace snellkit;

namespace {

// perpetual put under geometric dynamics, closed form
struct PutWorld {
    double r = 0.05, sigma = 0.4, K = 1.0;
    double gamma = 2.0 * r / (sigma * sigma);        // 0.625
    double bstar = gamma * K / (1.0 + gamma);        // 5/13
    double value(double x) const {
        if (x <= bstar) return K - x;
        return (K - bstar) * std::pow(x / bstar, -gamma);
    }
    DiffusionSpec spec(double a, double b) const {
        DiffusionSpec d;
        d.a = a;
        d.b = b;
        d.drift = [this](double x) { return r * x; };
        d.vol = [this](double x) { return sigma * x; };
        d.alpha = r;
        return d;
    }
};

}  // namespace

TEST_CASE("piecewise-linear evaluation is exact at knots and guarded outside") {
    PiecewiseLinear f;
    f.knots = {0.0, 1.0, 3.0};
    f.values = {0.0, 2.0, 1.0};
    CHECK(f(0.0) == 0.0);
    CHECK(f(1.0) == 2.0);
    CHECK(f(3.0) == 1.0);
    CHECK(f(0.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(f(2.0) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK_THROWS_WITH_AS(f(4.0), doctest::Contains("outside the majorant"),
                         std::invalid_argument);

    PiecewiseLinear bad;
    bad.knots = {0.0, 1.0};
    bad.values = {0.0};
    CHECK_THROWS_AS(bad(0.5), std::logic_error);
}

TEST_CASE("hand-built hulls: peak kept, dip bridged, negatives floored") {
    const std::vector<double> knots{0.0, 1.0, 2.0};

    const MajorantResult peak = concave_majorant(knots, std::vector<double>{0.0, 2.0, 0.0});
    CHECK(peak.hull == std::vector<int>{0, 1, 2});
    CHECK(peak.values_at_knots == std::vector<double>{0.0, 2.0, 0.0});
    CHECK(peak.contact == std::vector<std::uint8_t>{1, 1, 1});

    const MajorantResult dip = concave_majorant(knots, std::vector<double>{0.0, -1.0, 4.0});
    CHECK(dip.hull == std::vector<int>{0, 2});
    CHECK(dip.majorant.knots == std::vector<double>{0.0, 2.0});
    CHECK(dip.values_at_knots[1] == 2.0);
    CHECK(dip.contact == std::vector<std::uint8_t>{1, 0, 1});

    const MajorantResult flat =
        concave_majorant(std::vector<double>{0.0, 1.0}, std::vector<double>{-5.0, -1.0});
    CHECK(flat.values_at_knots == std::vector<double>{0.0, 0.0});
    CHECK(flat.contact == std::vector<std::uint8_t>{1, 1});

    CHECK_THROWS_AS(concave_majorant(std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, 1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(concave_majorant(std::vector<double>{0.0}, std::vector<double>{1.0}),
                    std::invalid_argument);
}

TEST_CASE("the hull dominates, is concave, touches at vertices, and is idempotent") {
    std::vector<double> knots(60), values(60);
    unsigned state = 12345u;
    auto next = [&state]() {
        state = state * 1664525u + 1013904223u;
        return static_cast<double>(state >> 8) / static_cast<double>(1u << 24);
    };
    double x = 0.0;
    for (int i = 0; i < 60; ++i) {
        x += 0.05 + next();
        knots[i] = x;
        values[i] = 3.0 * next() - 1.0;
    }
    const MajorantResult m = concave_majorant(knots, values);

    for (int i = 0; i < 60; ++i)
        CHECK(m.values_at_knots[i] >= std::max(values[i], 0.0) - 1e-15);
    for (size_t i = 0; i + 2 < knots.size(); ++i) {
        const double s0 = (m.values_at_knots[i + 1] - m.values_at_knots[i]) /
                          (knots[i + 1] - knots[i]);
        const double s1 = (m.values_at_knots[i + 2] - m.values_at_knots[i + 1]) /
                          (knots[i + 2] - knots[i + 1]);
        CHECK(s1 <= s0 + 1e-12);
    }
    for (int idx : m.hull) {
        CHECK(m.values_at_knots[idx] == std::max(values[idx], 0.0));
        CHECK(m.contact[idx] == 1);
    }
    const MajorantResult again = concave_majorant(knots, m.values_at_knots);
    for (int i = 0; i < 60; ++i)
        CHECK(again.values_at_knots[i] == doctest::Approx(m.values_at_knots[i]).epsilon(1e-12));
}

TEST_CASE("stopping_region collects maximal contact runs") {
    const std::vector<double> xs{0.0, 1.0, 2.0, 3.0, 4.0};
    const std::vector<double> V{1.0, 0.5, 0.5, 1.0, 0.5};
    const std::vector<double> g{0.9, 0.5, 0.5, 0.2, 0.5};
    const auto runs = stopping_region(xs, V, g);
    REQUIRE(runs.size() == 2);
    CHECK(runs[0].lo_index == 1);
    CHECK(runs[0].hi_index == 2);
    CHECK(runs[0].lo == 1.0);
    CHECK(runs[0].hi == 2.0);
    CHECK(runs[1].lo_index == 4);
    CHECK(runs[1].hi_index == 4);

    // swapped roles: g - V <= tol everywhere, so one run covers the grid
    CHECK(stopping_region(xs, g, V).size() == 1);
    CHECK(stopping_region(std::vector<double>{0.0}, std::vector<double>{5.0},
                          std::vector<double>{0.0})
              .empty());
    CHECK_THROWS_AS(stopping_region(xs, V, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("perpetual put emerges from the transform-hull pipeline") {
    const PutWorld put;
    const auto grid = make_log_grid(0.002, 300.0, 6001);
    const int anchor = nearest_index(grid, 1.0);
    const HarmonicPair pair = harmonic_pair(put.spec(0.002, 300.0), grid, anchor);
    auto payoff = [&put](double x) { return std::max(put.K - x, 0.0); };
    const TransformedPayoff tp =
        transform_payoff(pair, payoff, 0, static_cast<int>(grid.size()) - 1);
    const MajorantResult maj = concave_majorant(tp.y, tp.values);

    const std::vector<double> probes{0.25, 0.38, 0.5, 1.0, 2.0};
    const std::vector<double> V = value_from_majorant(maj.majorant, pair, probes);
    for (size_t k = 0; k < probes.size(); ++k)
        CHECK(V[k] == doctest::Approx(put.value(probes[k])).epsilon(1e-3));

    // contact tracks the exercise region (0, b*]; the right end of a bounded
    // domain is pinned to the payoff, an artifact excluded from the scan
    double last_contact = 0.0, first_free = 0.0;
    for (size_t k = 0; k + 1 < tp.y.size(); ++k) {
        const double x = grid[tp.grid_index[k]];
        if (maj.contact[k]) last_contact = std::max(last_contact, x);
        if (!maj.contact[k] && first_free == 0.0) first_free = x;
        if (x <= put.bstar * 0.99) CHECK(maj.contact[k] == 1);
        if (x >= put.bstar * 1.05) CHECK(maj.contact[k] == 0);
    }
    CHECK(last_contact >= put.bstar * 0.99);
    CHECK(first_free > put.bstar * 0.99);

    // at hull vertices the reconstruction returns the payoff exactly
    for (int idx : maj.hull) {
        const double x = grid[tp.grid_index[idx]];
        if (x > put.bstar || payoff(x) <= 0.0) continue;
        const std::vector<double> at =
            value_from_majorant(maj.majorant, pair, std::vector<double>{x});
        CHECK(at[0] == doctest::Approx(payoff(x)).epsilon(1e-13));
    }

    // smooth fit across the computed surface on a central slice
    std::vector<double> xs_slice, v_slice;
    for (size_t i = 0; i < grid.size(); ++i)
        if (grid[i] >= 0.2 && grid[i] <= 3.0) xs_slice.push_back(grid[i]);
    v_slice = value_from_majorant(maj.majorant, pair, xs_slice);
    const SmoothFitReport fit = smooth_fit_check(xs_slice, v_slice, put.bstar, 1e-3, 3);
    CHECK(std::abs(fit.boundary - put.bstar) <= 2e-3);
    CHECK(fit.left_slope.back() == doctest::Approx(-1.0).epsilon(5e-3));
    CHECK(fit.right_slope.back() == doctest::Approx(-1.0).epsilon(5e-3));
    CHECK(fit.extrapolated_gap <= 5e-3);
}

TEST_CASE("smooth fit on the closed form isolates the snapping error") {
    const PutWorld put;
    const auto xs = make_uniform_grid(0.2, 3.0, 5601);  // step 5e-4
    std::vector<double> V(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) V[i] = put.value(xs[i]);

    const SmoothFitReport fit = smooth_fit_check(xs, V, put.bstar, 5e-4, 3);
    REQUIRE(fit.h.size() == 3);
    CHECK(fit.h[0] == doctest::Approx(2e-3).epsilon(1e-9));
    CHECK(fit.h[2] == doctest::Approx(5e-4).epsilon(1e-9));
    CHECK(std::abs(fit.boundary - put.bstar) <= 2.5e-4);

    for (double s : fit.left_slope) CHECK(s == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(fit.right_slope.back() == doctest::Approx(-1.0).epsilon(5e-3));
    CHECK(fit.gap.back() < fit.gap.front());  // the ladder really shrinks the gap
    CHECK(fit.extrapolated_gap <= 1.5e-3);
    CHECK(fit.extrapolated_gap < fit.gap.back());

    CHECK_THROWS_WITH_AS(smooth_fit_check(xs, V, put.bstar, 1e-4, 3),
                         doctest::Contains("below the grid resolution"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(smooth_fit_check(xs, V, 0.2005, 5e-4, 3),
                         doctest::Contains("leaves the grid"), std::invalid_argument);
}

TEST_CASE("reconstruction rejects points off the pair grid or off the hull domain") {
    const PutWorld put;
    const auto grid = make_log_grid(0.01, 30.0, 801);
    const HarmonicPair pair = harmonic_pair(put.spec(0.01, 30.0), grid, nearest_index(grid, 1.0));
    auto payoff = [&put](double x) { return std::max(put.K - x, 0.0); };
    const int l = nearest_index(grid, 0.2), r = nearest_index(grid, 3.0);
    const TransformedPayoff tp = transform_payoff(pair, payoff, l, r);
    const MajorantResult maj = concave_majorant(tp.y, tp.values);

    CHECK_THROWS_WITH_AS(value_from_majorant(maj.majorant, pair, std::vector<double>{100.0}),
                         doctest::Contains("pair's grid"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(value_from_majorant(maj.majorant, pair, std::vector<double>{5.0}),
                         doctest::Contains("widen"), std::invalid_argument);
}

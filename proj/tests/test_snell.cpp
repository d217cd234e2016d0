#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "snellkit/snell.hpp"
#include "test_support.hpp"

using namespace snellkit;

TEST_CASE("one-step hat payoff") {
    const ChainModel walk = build_random_walk(3, 1);
    const PayoffSpec g = make_payoff_table({1.0, 0.0, 1.0});
    const SnellSolution sol = solve_snell(walk, g);
    CHECK(sol.s(1, 1) == 0.0);
    CHECK(sol.c(1, 1) == 0.0);  // terminal row repeats the payoff
    CHECK(sol.c(0, 1) == 1.0);
    CHECK(sol.s(0, 1) == 1.0);  // waiting beats the 0 at the centre
    CHECK_FALSE(sol.stops(0, 1));
    CHECK(sol.stops(0, 0));
    CHECK(sol.stops(1, 1));
}

TEST_CASE("two-step square payoff surface") {
    const ChainModel walk = build_random_walk(5, 2);
    const PayoffSpec g = make_payoff_power(walk.states, 2.0);
    const SnellSolution sol = solve_snell(walk, g);
    // All arithmetic is dyadic, so the surface is exact.
    CHECK(sol.S == std::vector<double>{4.0, 2.5, 2.0, 2.5, 4.0,
                                       4.0, 2.0, 1.0, 2.0, 4.0,
                                       4.0, 1.0, 0.0, 1.0, 4.0});
    CHECK(sol.value_at_root(2) == 2.0);
    CHECK(sol.stops(1, 0));
    CHECK_FALSE(sol.stops(1, 1));
    CHECK_FALSE(sol.stops(0, 2));
}

TEST_CASE("payoff length mismatch is rejected") {
    const ChainModel walk = build_random_walk(3, 1);
    CHECK_THROWS_AS(solve_snell(walk, make_payoff_table({1.0, 2.0})), std::invalid_argument);
}

TEST_CASE("envelope dominates payoff and continuation on random chains") {
    std::mt19937 rng(2026);
    for (int trial = 0; trial < 40; ++trial) {
        const double alpha = (trial % 2 == 0) ? 0.0 : 0.35;
        const ChainModel chain = testkit::random_chain(rng, 4, 5, alpha);
        const PayoffSpec payoff = testkit::random_payoff(rng, 4);
        const SnellSolution sol = solve_snell(chain, payoff);
        for (int k = 0; k < sol.n_rows; ++k)
            for (int i = 0; i < sol.n_cols; ++i) {
                CHECK(sol.s(k, i) >= sol.g(k, i));
                CHECK(sol.s(k, i) >= sol.c(k, i));
                if (k < chain.horizon) {
                    // recompute the conditional expectation independently
                    double e = 0.0;
                    for (int j = 0; j < sol.n_cols; ++j) e += chain.p(i, j) * sol.s(k + 1, j);
                    CHECK(sol.c(k, i) == doctest::Approx(chain.discount() * e).epsilon(1e-14));
                }
            }
        for (int i = 0; i < sol.n_cols; ++i)
            CHECK(sol.c(chain.horizon, i) == payoff.values[i]);
    }
}

TEST_CASE("no region rule beats the envelope, and the contact rule attains it") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 12; ++trial) {
        const double alpha = (trial % 3 == 0) ? 0.4 : 0.0;
        const int n = 3;
        const int horizon = 2;  // 6 free nodes, 64 region rules
        const ChainModel chain = testkit::random_chain(rng, n, horizon, alpha);
        const PayoffSpec payoff = testkit::random_payoff(rng, n);
        const SnellSolution sol = solve_snell(chain, payoff);
        const int root = 1;
        const double s0 = sol.value_at_root(root);
        double best = -1.0;
        testkit::for_each_region_rule(sol.n_rows, n, [&](const StoppingRule& rule) {
            const double direct = testkit::enumerate_rule_value(chain, payoff, rule, root);
            const double fast = evaluate_rule(chain, payoff, rule, root);
            CHECK(fast == doctest::Approx(direct).epsilon(1e-12));
            CHECK(fast <= s0 + 1e-12);
            best = std::max(best, fast);
        });
        CHECK(best == doctest::Approx(s0).epsilon(1e-12));
        const StoppingRule minimal = stopping_rule(sol, RuleKind::minimal);
        CHECK(evaluate_rule(chain, payoff, minimal, root) ==
              doctest::Approx(s0).epsilon(1e-12));
    }
}

TEST_CASE("epsilon rule widens the region and stays eps-optimal") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const ChainModel chain = testkit::random_chain(rng, 5, 6, trial % 2 ? 0.1 : 0.0);
        const PayoffSpec payoff = testkit::random_payoff(rng, 5);
        const SnellSolution sol = solve_snell(chain, payoff);
        const StoppingRule minimal = stopping_rule(sol, RuleKind::minimal);
        const StoppingRule eps0 = stopping_rule(sol, RuleKind::epsilon, 0.0);
        CHECK(eps0.region == minimal.region);
        const double eps = 0.15;
        const StoppingRule rel = stopping_rule(sol, RuleKind::epsilon, eps);
        for (size_t idx = 0; idx < minimal.region.size(); ++idx)
            if (minimal.region[idx]) CHECK(rel.region[idx]);
        for (int root = 0; root < 5; ++root) {
            const double v = evaluate_rule(chain, payoff, rel, root);
            CHECK(v >= sol.value_at_root(root) - eps - 1e-12);
        }
    }
    CHECK_THROWS_AS(stopping_rule(SnellSolution{}, RuleKind::epsilon, -0.5),
                    std::invalid_argument);
}

TEST_CASE("maximal rule needs the decomposition") {
    const ChainModel walk = build_random_walk(3, 2);
    const SnellSolution sol = solve_snell(walk, make_payoff_put(walk.states, 0.0));
    CHECK_THROWS_WITH_AS(stopping_rule(sol, RuleKind::maximal),
                         doctest::Contains("decomposition"), std::invalid_argument);
}

TEST_CASE("ties stop: harmonic payoff makes every node a contact node") {
    const ChainModel walk = build_random_walk(5, 3);
    PayoffSpec g;
    g.name = "affine";
    for (double x : walk.states) g.values.push_back(x + 2.0);
    const SnellSolution sol = solve_snell(walk, g);
    for (int k = 0; k < sol.n_rows; ++k)
        for (int i = 0; i < sol.n_cols; ++i) {
            CHECK(sol.s(k, i) == g.values[i]);
            CHECK(sol.stops(k, i));
        }
}

TEST_CASE("combined rules are directed upwards") {
    std::mt19937 rng(4242);
    for (int trial = 0; trial < 15; ++trial) {
        const ChainModel chain = testkit::random_chain(rng, 4, 4, trial % 2 ? 0.25 : 0.0);
        const PayoffSpec payoff = testkit::random_payoff(rng, 4);
        StoppingRule r1 = make_rule(chain.horizon + 1, 4);
        StoppingRule r2 = make_rule(chain.horizon + 1, 4);
        for (int k = 0; k < chain.horizon; ++k)
            for (int i = 0; i < 4; ++i) {
                r1.set(k, i, rng() % 2 == 0);
                r2.set(k, i, rng() % 2 == 0);
            }
        const StoppingRule both = combine_rules(chain, payoff, r1, r2);
        const std::vector<double> v1 = rule_values(chain, payoff, r1);
        const std::vector<double> v2 = rule_values(chain, payoff, r2);
        const std::vector<double> vb = rule_values(chain, payoff, both);
        for (size_t idx = 0; idx < vb.size(); ++idx)
            CHECK(vb[idx] >= std::max(v1[idx], v2[idx]) - 1e-12);
    }
}

TEST_CASE("stationary value iteration reaches the fixed point") {
    ChainModel walk = build_random_walk(9, 1);
    walk.alpha = 0.2;
    const PayoffSpec g = make_payoff_put(walk.states, 2.0);
    const StationarySolution st = solve_snell_stationary(walk, g, 1e-12);
    CHECK(st.converged);
    CHECK(st.residual <= 1e-12);
    for (int i = 0; i < 9; ++i) {
        double e = 0.0;
        for (int j = 0; j < 9; ++j) e += walk.p(i, j) * st.V[j];
        const double c = walk.discount() * e;
        CHECK(st.V[i] == doctest::Approx(std::max(g.values[i], c)).epsilon(1e-10));
        CHECK(st.cont[i] == doctest::Approx(c).epsilon(1e-10));
    }
    // any finite horizon is dominated by the horizon-free value
    for (int horizon : {1, 4, 16}) {
        ChainModel finite = walk;
        finite.horizon = horizon;
        const SnellSolution sol = solve_snell(finite, g);
        for (int i = 0; i < 9; ++i) CHECK(st.V[i] >= sol.s(0, i) - 1e-9);
    }
}

TEST_CASE("non-convergence within max_steps is reported") {
    const ChainModel walk = build_random_walk(21, 1);  // alpha = 0: slow mixing
    const PayoffSpec g = make_payoff_put(walk.states, 5.0);
    const StationarySolution st = solve_snell_stationary(walk, g, 1e-14, 3);
    CHECK_FALSE(st.converged);
    CHECK(st.steps == 3);
}

TEST_CASE("mirror relabeling flips the value surface") {
    std::mt19937 rng(11);
    const int n = 5;
    const ChainModel chain = testkit::random_chain(rng, n, 4, 0.15);
    const PayoffSpec payoff = testkit::random_payoff(rng, n);

    ChainModel mirror = chain;
    for (int i = 0; i < n; ++i) mirror.states[i] = -chain.states[n - 1 - i];
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            mirror.transition[static_cast<size_t>(i) * n + j] = chain.p(n - 1 - i, n - 1 - j);
    PayoffSpec mg = payoff;
    std::reverse(mg.values.begin(), mg.values.end());

    const SnellSolution a = solve_snell(chain, payoff);
    const SnellSolution b = solve_snell(mirror, mg);
    for (int k = 0; k < a.n_rows; ++k)
        for (int i = 0; i < n; ++i) {
            // The relabeling reverses each row's accumulation order, so the
            // two surfaces may differ in the last ulp.
            CHECK(a.s(k, i) == doctest::Approx(b.s(k, n - 1 - i)).epsilon(1e-14));
            CHECK(a.stops(k, i) == b.stops(k, n - 1 - i));
        }
}

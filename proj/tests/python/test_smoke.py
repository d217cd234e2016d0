import json
import math

import pytest

import snellkit as sk


def walk_and_square():
    walk = sk.build_random_walk(5, 2)
    return walk, sk.make_payoff_power(walk.states, 2.0)


def test_envelope_of_the_square_walk():
    walk, payoff = walk_and_square()
    sol = sk.solve_snell(walk, payoff)
    assert sol.value_at_root(2) == 2.0
    assert sol.s(1, 2) == 1.0
    assert sol.stops(2, 2)


def test_dome_compensates_at_unit_rate():
    walk = sk.build_random_walk(7, 3)
    payoff = sk.make_payoff_table([49.0 - x * x for x in walk.states])
    dec = sk.decompose(walk, payoff, sk.solve_snell(walk, payoff))
    assert dec.da(1, 3) == 1.0
    assert dec.mu_at(1, 3) == 1.0
    assert sk.increment_bound_check(dec).ok


def test_envelope_martingale_closes_the_dual_gap():
    walk, payoff = walk_and_square()
    sol = sk.solve_snell(walk, payoff)
    est = sk.dual_bound_exact(walk, payoff, sk.martingale_from_solution(walk, sol), 2)
    assert est.exact
    assert est.value == pytest.approx(sol.value_at_root(2), abs=1e-12)
    lazy = sk.dual_bound_exact(walk, payoff, sk.martingale_from_function(walk, [0.0] * 5), 2)
    assert lazy.value == pytest.approx(2.5)


def test_run_command_matches_the_cli():
    config = {
        "model": {
            "kind": "chain",
            "states": [-2.0, -1.0, 0.0, 1.0, 2.0],
            "transition": [
                [1.0, 0.0, 0.0, 0.0, 0.0],
                [0.5, 0.0, 0.5, 0.0, 0.0],
                [0.0, 0.5, 0.0, 0.5, 0.0],
                [0.0, 0.0, 0.5, 0.0, 0.5],
                [0.0, 0.0, 0.0, 0.0, 1.0],
            ],
            "dt": 1.0,
            "alpha": 0.0,
            "horizon": 2,
        },
        "payoff": {"kind": "power", "exponent": 2.0},
        "run": {"x0": 0.0},
    }
    report, csv = sk.run_command("solve", json.dumps(config))
    data = json.loads(report)
    assert data["value"] == 2.0
    assert csv.splitlines()[0] == "k,state,S,G,cont,stop"

    with pytest.raises(ValueError):
        sk.run_command("solve", "{}")


def test_perpetual_put_hull_value():
    config = {
        "model": {
            "kind": "diffusion",
            "interval": [0.002, 300.0],
            "alpha": 0.05,
            "grid_kind": "log",
            "grid_points": 2001,
            "drift": {"form": "gbm", "rate": 0.05},
            "vol": {"form": "gbm", "sigma": 0.4},
        },
        "payoff": {"kind": "put", "strike": 1.0},
        "run": {"x0": 0.5},
    }
    report, _ = sk.run_command("diffusion_solve", json.dumps(config))
    data = json.loads(report)
    gamma = 2.0 * 0.05 / 0.4**2
    bstar = gamma / (1.0 + gamma)
    closed = (1.0 - bstar) * (0.5 / bstar) ** -gamma
    assert data["value_at_x0"] == pytest.approx(closed, rel=2e-2)
    assert not data["degenerate_pair"]


def test_harmonic_pair_brownian_exponentials():
    spec = sk.DiffusionSpec()
    spec.a, spec.b = -2.0, 2.0
    spec.drift = lambda x: 0.0
    spec.vol = lambda x: 1.0
    spec.alpha = 0.5
    grid = sk.make_uniform_grid(-2.0, 2.0, 2001)
    pair = sk.harmonic_pair(spec, grid, 1000)
    i = sk.nearest_index(grid, 1.0)
    assert pair.psi[i] == pytest.approx(math.e, rel=1e-4)
    assert pair.phi[i] == pytest.approx(1.0 / math.e, rel=1e-4)

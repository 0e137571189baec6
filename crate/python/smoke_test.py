"""Smoke test for the Python bindings.

Build and install first:  maturin develop -m crates/py/Cargo.toml --release
"""

import json
import math
import os
import tempfile

import ringlab


def main():
    grid = ringlab.Grid.concentric(1.0, 2.0, 32, 64)
    assert grid.ns == 32 and grid.ntheta == 64 and len(grid) == 33 * 64

    trace = ringlab.solve(grid, [0.25, 0.5])
    assert trace.taus[-1] == 0.5 and trace.last_good_tau == 0.5
    u = trace.final_solution()
    assert u.boundary_values() == (0.0, 0.5)

    oracle = ringlab.RadialOracle(1.0, 2.0, 0.5)
    err = max(abs(v - oracle.value(math.hypot(x, y))) for v, (x, y) in zip(u.values(), grid.nodes()))
    assert err < 1e-3, err

    level = ringlab.level_set(u, 0.25)
    assert level["components"] == 1 and level["min_curvature"] > 0.0

    omega = ringlab.solve_harmonic(grid, 0.5)
    for rep in (
        ringlab.check_gradient_max_principle(u),
        ringlab.check_gradient_monotonicity(u),
        ringlab.check_supersolution(u, omega, 0.5),
        ringlab.check_convexity_and_rank(u, ringlab.interior_levels(0.5, 4)),
        ringlab.check_sigma_routes(100, 1),
        ringlab.check_structure_examples(),
    ):
        assert rep["passed"], rep
    assert not ringlab.check_structure_condition(0.7, 1.0)["passed"]
    assert ringlab.sigma_k([1.0, 2.0, 3.0], 2) == 11.0

    same = ringlab.Field.from_json(u.to_json())
    assert same.c2_distance(u) == 0.0

    ellipses = ringlab.Grid.standard("ellipses", 16, 32)
    assert ellipses.spec()["chart"]["epsilon"] == 0.0

    with tempfile.TemporaryDirectory() as tmp:
        config = os.path.join(tmp, "config.json")
        with open(config, "w") as f:
            json.dump(
                {
                    "chart": {"epsilon": 0.0, "dim": 2},
                    "ring": {"outer": {"kind": "circle", "radius": 2.0}, "inner": {"kind": "circle", "radius": 1.0}},
                    "grid": {"ns": 16, "ntheta": 32},
                    "tau_schedule": [0.5],
                },
                f,
            )
        out = os.path.join(tmp, "out")
        assert ringlab.run_cli(["solve", "--config", config, "--out", out]) == 0
        assert os.path.exists(os.path.join(out, "trace.json"))

    print("smoke test passed")


if __name__ == "__main__":
    main()

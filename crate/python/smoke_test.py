"""Smoke test for the pam_py extension module.

Build and install first:
    pip install maturin
    maturin develop --release -m crates/python/Cargo.toml
"""

import json
import math

import pam_py


def close(a, b, tol):
    assert abs(a - b) <= tol, (a, b)


def main():
    noise = pam_py.Noise(1, 8)
    assert noise.modes == 8 and noise.seed == 1
    again = pam_py.Noise.from_json(noise.to_json())
    assert again.xi == noise.xi
    assert pam_py.Noise(1, 4).xi == noise.xi[:4]

    phi = pam_py.Field.preset("sin", 8)
    close(phi.eval(math.pi / 2), 1.0, 1e-12)
    close(phi.heat_evolve(0.5).eval(math.pi / 2), math.exp(-0.5), 1e-12)
    close(pam_py.heat_kernel(1.0, math.pi / 2, math.pi / 2), 0.2342779, 1e-7)

    table = pam_py.PropagatorTable(phi, 8, 4, [0.0, 0.5])
    wick = table.solution(0.05, 0.5, noise)
    strat = pam_py.strat_solution(phi, noise, 0.05, 0.5)
    gap = (strat - wick).eval_many([1.0, 1.5, 2.0])
    ref = pam_py.correction_field(phi, 0.5, 8, 8).eval_many([1.0, 1.5, 2.0])
    for g, r in zip(gap, ref):
        close(g / 0.05**2, r, 0.05 * abs(r))

    exact_gap = pam_py.second_order_gap(table, phi, noise, 0.5)
    diff = exact_gap - pam_py.correction_field(phi, 0.5, 8, 8)
    assert diff.sup_norm() < 1e-6 * exact_gap.sup_norm()

    close(pam_py.triple_exp_convolution(1.0, 1.0, 1.0, 1.0), math.exp(-1.0) / 2.0, 1e-15)

    try:
        table.entry([1], 0.3)
    except IndexError:
        pass
    else:
        raise AssertionError("off-grid time accepted")

    config = json.loads(pam_py.default_config())
    config["seeds"] = [1, 2]
    report = json.loads(pam_py.run_ladder(json.dumps(config)))
    slopes = [s["slope"] for s in report["slopes"]]
    assert all(1.9 <= s <= 2.1 for s in slopes), slopes
    first = json.loads(pam_py.run_first_order_check())
    assert all(r["wick_vs_direct"] < 1e-8 for r in first["rows"])

    try:
        pam_py.run_ladder(json.dumps({"eps_ladder": [0.1, 0.2]}))
    except ValueError:
        pass
    else:
        raise AssertionError("invalid config accepted")

    print("pam_py smoke test passed")


if __name__ == "__main__":
    main()

"""Smoke test for the pyvstates extension module.

Build and install with `maturin build --release` in crates/python, then run
`python python/smoke_test.py`.
"""

import math

import pyvstates as vs


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    assert close(vs.gamma(0.5), math.sqrt(math.pi), 1e-14)
    assert close(vs.zeta(2.0), math.pi**2 / 6, 1e-14)

    sqg = [vs.omega_dispersion(1.0, m) for m in range(2, 5)]
    partial = [2 / math.pi * sum(1 / (2 * k + 1) for k in range(1, m)) for m in range(2, 5)]
    assert all(close(a, b, 1e-14) for a, b in zip(sqg, partial))
    assert close(vs.omega_dispersion(0.0, 4), 3 / 8, 1e-15)

    try:
        vs.omega_dispersion(1.5, 3)
    except ValueError:
        pass
    else:
        raise AssertionError("alpha = 1.5 accepted")

    worst = max(row[4] for row in vs.moment_report(0.5, 8))
    assert worst < 1e-8, worst

    disc = vs.Boundary.identity(8)
    assert max(abs(g) for g in vs.functional(0.3, disc, 0.5)) < 1e-12

    located, closed, gap, dim = vs.bifurcation_scan(0.5, 3)
    assert gap < 1e-7 and dim == 1

    sol = vs.solve_vstate(0.5, 3, 0.02)
    assert sol.residual_norm < 1e-11
    assert sol.boundary().symmetry_order() == 3
    law = sol.dilation_residual(2.0, 2.0 ** -0.5)
    wrong = sol.dilation_residual(2.0, 0.5)
    assert wrong > 100 * max(law, 1e-14)

    pts = sol.boundary().points(128)
    area, cx, cy = vs.diagnostics(pts, 0.5)
    moved = vs.evolve(pts, 0.5, 0.2, 0.01)
    area2, cx2, cy2 = vs.diagnostics(moved, 0.5)
    assert abs(area2 - area) < 1e-8 * area
    assert math.hypot(cx2 - cx, cy2 - cy) < 1e-8

    print(f"pyvstates ok: Omega_3 = {closed:.15f}, s = 0.02 branch Omega = {sol.omega:.15f}")


if __name__ == "__main__":
    main()

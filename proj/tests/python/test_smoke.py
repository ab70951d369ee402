import math
import os
from pathlib import Path

import numpy as np
import pytest

import gorlicz

SOURCE = Path(os.environ.get("GORLICZ_SOURCE_DIR", Path(__file__).resolve().parents[2]))


def test_phi_families():
    assert gorlicz.Phi.power(2.0).evaluate((0.0, 0.0), 3.0) == pytest.approx(9.0)
    dp = gorlicz.Phi.double_phase(2.0, 3.0, "x^2")
    assert dp.evaluate((0.5, 0.0), 2.0) == pytest.approx(4.0 + 0.25 * 8.0)
    cb = gorlicz.Phi.double_phase(2.0, 3.0, lambda x, y: x * x)
    assert cb.evaluate((0.5, 0.0), 2.0) == pytest.approx(dp.evaluate((0.5, 0.0), 2.0))
    t = dp.left_inverse((1.0, 0.0), 8.0)
    assert t * t + t**3 == pytest.approx(8.0, rel=1e-9)
    with pytest.raises(gorlicz.DomainError):
        gorlicz.Phi.power(2.0).evaluate((0.0, 0.0), -1.0)


def test_domain_and_fields():
    d = gorlicz.Domain.rasterize(gorlicz.Shape.rectangle((0, 0), (1, 1)), 1 / 16)
    assert d.measure() == pytest.approx(1.0)
    assert d.dims == [19, 19]
    f = d.sample("1 + x")
    pos = d.positions()
    active = d.kinds() != 0
    assert np.allclose(f[active], 1 + pos[active, 0])
    phi = gorlicz.Phi.power(2.0)
    assert gorlicz.luxemburg_norm(d, phi, 1.0) == pytest.approx(1.0, rel=1e-8)
    assert gorlicz.modular(d, phi, 2.0) == pytest.approx(4.0)


def test_solve_linear_and_obstacle():
    d = gorlicz.Domain.rasterize(gorlicz.Shape.rectangle((0, 0), (1, 1)), 1 / 32)
    p = gorlicz.ObstacleProblem(d, gorlicz.Phi.power(2.0), "1 + 2*x - 3*y")
    s = gorlicz.solve(p, tol=1e-12)
    assert s.converged
    inside = d.interior_cells()
    assert np.max(np.abs(s.u[inside] - p.boundary[inside])) < 1e-8

    line = gorlicz.Domain.rasterize(gorlicz.Shape.interval(-1, 1), 1 / 128)
    q = gorlicz.ObstacleProblem(line, gorlicz.Phi.power(2.0), 0.0, obstacle="0.5 - x^2")
    sol = gorlicz.solve(q, tol=1e-12)
    x = line.positions()[:, 0]
    a = 1 - math.sqrt(0.5)  # tangent point of the concave hull
    hull = np.where(np.abs(x) <= a, 0.5 - x**2, (1 - np.abs(x)) * 2 * a)
    assert np.max(np.abs(sol.u[line.interior_cells()] - hull[line.interior_cells()])) < 1e-4  # O(h^2) against the continuum hull
    assert np.all(sol.u >= q.obstacle - 1e-12)
    assert len(sol.contact_set) > 0


def test_infeasible_raises():
    d = gorlicz.Domain.rasterize(gorlicz.Shape.rectangle((0, 0), (1, 1)), 1 / 8)
    with pytest.raises(gorlicz.InfeasibleError):
        gorlicz.solve(gorlicz.ObstacleProblem(d, gorlicz.Phi.power(2.0), 0.0, obstacle=1.0))


def test_conditions():
    d = gorlicz.Domain.rasterize(gorlicz.Shape.rectangle((-1, -1), (1, 1)), 1 / 64)
    centers = [(0, 0), (0, 0.5), (0, -0.5), (0.25, 0), (0.5, 0.5)]
    good = gorlicz.Phi.double_phase(2.0, 2.5, "abs(x)^0.5")
    bad = gorlicz.Phi.double_phase(2.0, 4.0, "abs(x)^0.5")
    assert gorlicz.check_A1(good, d, centers, 0.5, 5)["holds"]
    rep = gorlicz.check_A1(bad, d, centers, 0.5, 5)
    assert not rep["holds"] and rep["violating_sample"] is not None
    assert gorlicz.check_aInc_aDec(gorlicz.Phi.power(3.0), d, 2.0, "inc")["holds"]
    assert not gorlicz.check_aInc_aDec(gorlicz.Phi.power(3.0), d, 2.5, "dec")["holds"]


def test_capacity():
    d = gorlicz.Domain.rasterize(gorlicz.Shape.disk((0, 0), 1.0), 1 / 32)
    cap = gorlicz.capacity(d, d.cells_in_ball((0, 0), 0.5), gorlicz.Phi.power(2.0))
    assert cap == pytest.approx(2 * math.pi / math.log(2), rel=0.1)
    lo, hi = gorlicz.ball_capacity_bounds(gorlicz.Phi.power(2.0), (0, 0), 0.25)
    assert lo == pytest.approx(math.pi) and hi == pytest.approx(math.pi)


def test_diagnostics_with_callable_weight():
    # The weight is a Python callable evaluated from worker threads.
    phi = gorlicz.Phi.double_phase(1.5, 1.8, lambda x, y: abs(y) ** 0.5)
    d = gorlicz.Domain.rasterize(gorlicz.Shape.rectangle((0, 0), (1, 1)), 1 / 64)
    rep = gorlicz.classify_boundary_point(d, phi, (0.0, 0.5), [0.25, 0.125])
    assert rep["c_star_measure"] == pytest.approx(0.5, abs=0.06)
    assert rep["csv"].startswith("radius,")
    p = gorlicz.ObstacleProblem(d, gorlicz.Phi.power(2.0), "1 + x - 0.5*y")
    s = gorlicz.solve(p)
    pair = gorlicz.caccioppoli_interior_k(p, s, (0.5, 0.5), 0.3, 0.15, 10.0)
    assert pair["lhs"] == 0.0 and pair["rhs"] == 0.0
    with pytest.raises(gorlicz.WrongVariantError):
        gorlicz.caccioppoli_boundary(p, s, (0.5, 0.5), 0.1, a0_a1_verified=True)


def test_run_config(tmp_path):
    code, log, err = gorlicz.run("run", str(SOURCE / "configs" / "linear_dirichlet.cfg"), out=str(tmp_path))
    assert code == 0, err
    assert (tmp_path / "solution.meta").read_text().count("verdict=pass") == 1
    code, _, err = gorlicz.run("run", str(SOURCE / "configs" / "infeasible.cfg"), out=str(tmp_path))
    assert code == 3 and "halo" in err

"""Reference solution for configs/parabola_obstacle_1d.cfg.

Discretizes min sum ((u[i+1] - u[i]) / h)^2 h over u >= 1/2 - x^2 on (-1, 1),
u(+-1) = 0, as the linear complementarity problem

    A u - b >= 0,  u - psi >= 0,  (A u - b) . (u - psi) = 0,

and solves it with a primal-dual active set iteration, which is exact after
finitely many steps for this M-matrix.
"""

import argparse
import math
from pathlib import Path

import numpy as np
from scipy.sparse import diags
from scipy.sparse.linalg import spsolve


def solve(h):
    m = round(2.0 / h) - 1  # interior nodes x = -1 + k h, k = 1..m
    x = -1.0 + h * np.arange(1, m + 1)
    psi = 0.5 - x**2
    A = diags([-np.ones(m - 1), 2.0 * np.ones(m), -np.ones(m - 1)], [-1, 0, 1], format="csr") / h
    b = np.zeros(m)
    u = np.maximum(psi, 0.0)
    lam = np.zeros(m)
    active = psi > 0.0
    for _ in range(10 * m):
        free = ~active
        u = psi.copy()
        if free.any():
            Aff = A[free][:, free]
            rhs = b[free] - A[free][:, active] @ psi[active]
            u[free] = spsolve(Aff.tocsc(), rhs)
        lam = A @ u - b
        lam[free] = 0.0
        new_active = (lam + (psi - u)) > 0.0
        if np.array_equal(new_active, active):
            break
        active = new_active
    else:
        raise RuntimeError("active set iteration did not settle")
    return x, u, active


def write_grid(path, h, u):
    # Same lattice layout as the solver: one padding node beyond each halo node.
    nx = math.ceil(2.0 / h - 1e-9) + 3
    values = np.zeros(nx)
    values[2 : 2 + u.size] = u
    with open(path, "w") as out:
        out.write("# gorlicz grid v1\n")
        out.write("n 1\n")
        out.write(f"dims {nx} 1\n")
        out.write(f"h {h!r}\n")
        out.write(f"origin {-1.0 - h!r} 0\n")
        out.write("values\n")
        for v in values:
            out.write(f"{v:.17g}\n")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--h", type=float, default=1.0 / 512)
    parser.add_argument("--out", type=Path, default=Path(__file__).with_name("parabola_reference.grid"))
    args = parser.parse_args()
    x, u, active = solve(args.h)
    write_grid(args.out, args.h, u)
    print(f"contact nodes: {int(active.sum())}, max u = {u.max():.12f}")


if __name__ == "__main__":
    main()

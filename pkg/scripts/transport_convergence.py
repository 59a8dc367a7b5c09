"""Refinement study for the scalar transport benchmark.

Runs the unit-speed transport system (one field, inflow pinned to zero
through the V = 0 boundary relation) from a compactly supported bump,
doubling the mesh while keeping dt/h fixed, and measures the sup-norm
error at the final time against the method-of-characteristics solution.
The implicit Euler stepping plus second-order space should give a clean
first-order error ladder once the mesh resolves the profile.

Usage:
    python3 scripts/transport_convergence.py [--levels 4] [--m0 64] [--T 1.0]
"""

import argparse

import numpy as np

from monoport.boundary import from_V
from monoport.phs import PortHamiltonian, bd_basis
from monoport.solver import Scenario, discretize, oracle_transport, simulate


def bump(z):
    """C^2 compactly supported profile centred at -0.35, width 0.6."""
    w = (np.asarray(z, dtype=float) + 0.35) / 0.6
    return ((1.0 - np.minimum(w * w, 1.0)) ** 3).astype(complex)


def run_level(m: int, T: float, theta: float) -> float:
    phs = PortHamiltonian(n=1, b=1.0, p1=[[1.0]])
    bc = from_V(np.zeros((1, 1)), bd_basis(phs))
    ops = discretize(phs, m)
    xs = ops.grid.nodes
    dt = 2.0 / m  # keep dt/h = 1 across levels
    traj = simulate(
        Scenario(phs=phs, bc=bc, u0=bump(xs)[:, None], T=T, dt=dt, theta=theta),
        ops,
    )
    exact = oracle_transport(bump, traj.times[-1], xs, phs.b)
    return float(np.max(np.abs(traj.states[-1][:, 0] - exact)))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--levels", type=int, default=4, help="number of refinements")
    parser.add_argument("--m0", type=int, default=128, help="coarsest cell count")
    parser.add_argument("--T", type=float, default=1.0, help="final time")
    parser.add_argument("--theta", type=float, default=1.0, help="scheme parameter in [1/2, 1]")
    args = parser.parse_args(argv)

    ms = [args.m0 * 2**k for k in range(args.levels)]
    print(f"transport refinement: T = {args.T}, theta = {args.theta}, dt = 2/m")
    print(f"{'m':>6} {'h':>10} {'dt':>10} {'sup error':>12} {'order':>7} {'err/(h+dt)':>11}")

    errors = []
    for m in ms:
        err = run_level(m, args.T, args.theta)
        errors.append(err)
        h = 2.0 / m
        dt = 2.0 / m
        order = "" if len(errors) == 1 else f"{np.log2(errors[-2] / errors[-1]):7.3f}"
        print(f"{m:>6} {h:>10.2e} {dt:>10.2e} {err:>12.4e} {order:>7} {err / (h + dt):>11.3f}")

    orders = np.log2(np.asarray(errors[:-1]) / np.asarray(errors[1:]))
    ok = bool(np.all(orders >= 0.9))
    print(f"observed orders: {np.round(orders, 3).tolist()} "
          f"({'all >= 0.9' if ok else 'BELOW first order'})")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())

import numpy as np
import pytest
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from monoport import boundary as bnd
from monoport.phs import PortHamiltonian, bd_basis
from monoport.relations import LinearGraph, Shifted
from monoport.solver import (
    Scenario,
    discretize,
    oracle_transport,
    resolve_A,
    simulate,
    step,
)

from conftest import rand_contraction, rand_unitary

PHS1 = PortHamiltonian(n=1, b=1.0, p1=[[1.0]])
BASIS1 = bd_basis(PHS1)
PHS2 = PortHamiltonian(n=2, b=1.0, p1=[[0.0, 1.0], [1.0, 0.0]])
BASIS2 = bd_basis(PHS2)


def assembled_resolve(ops, bc, mu, r_flat):
    """Reference solve of the constrained step system, assembled whole.

    Test-local oracle: the production solver eliminates the boundary
    unknowns; this routine instead stacks field, effort-slack, and
    boundary-parameter unknowns into one sparse system and factors it
    directly, so the two routes share no code path.
    """
    relation = bc.port_relation
    n = bc.ports
    x0 = np.zeros(n, dtype=complex)
    y0 = np.zeros(n, dtype=complex)
    base = relation
    if isinstance(relation, Shifted):
        x0, y0 = relation.x0, relation.y0
        base = relation.base
    assert isinstance(base, LinearGraph)
    zx, zy = base.zx, base.zy
    k = zx.shape[1]
    nn = ops.nnodes
    dim = nn * n
    amat = (sp.identity(dim, dtype=complex, format="csr") + mu * ops.Gfull).tocsr()
    omega_b = float(ops.omega[0])
    p1 = ops.phs.p1

    e_inj = sp.lil_matrix((dim, n), dtype=complex)
    tr_e = sp.lil_matrix((n, dim), dtype=complex)
    tr_f = sp.lil_matrix((n, dim), dtype=complex)
    for j in range(n):
        e_inj[j, j] = 1.0
        e_inj[dim - n + j, j] = 1.0
        tr_e[j, j] = 1.0 / np.sqrt(2.0)
        tr_e[j, dim - n + j] = 1.0 / np.sqrt(2.0)
        for i in range(n):
            tr_f[j, i] = -p1[j, i] / np.sqrt(2.0)
            tr_f[j, dim - n + i] = p1[j, i] / np.sqrt(2.0)

    top = sp.hstack([amat, mu * e_inj.tocsr(), sp.csr_matrix((dim, k), dtype=complex)])
    mid = sp.hstack([tr_e.tocsr(), sp.csr_matrix((n, n), dtype=complex),
                     sp.csr_matrix(-zx)])
    bot = sp.hstack([tr_f.tocsr(), np.sqrt(2.0) * omega_b * sp.identity(n, dtype=complex),
                     sp.csr_matrix(-zy)])
    full = sp.vstack([top, mid, bot]).tocsc()
    rhs = np.concatenate([r_flat, x0, y0])
    return spla.splu(full).solve(rhs)[:dim]


def bump(z):
    zz = np.asarray(z, dtype=float)
    w = (zz + 0.35) / 0.6
    return np.where(np.abs(w) < 1, (1 - np.minimum(w**2, 1.0)) ** 3, 0.0).astype(complex)


# -------------------------------------------------------------- discretize


def test_discretize_grid_and_weights():
    ops = discretize(PHS1, 64)
    assert ops.grid.m == 64 and ops.nnodes == 65
    assert np.allclose(ops.grid.nodes, -ops.grid.nodes[::-1])
    assert ops.omega.min() > 0
    assert np.sum(ops.omega) == pytest.approx(2.0)


def test_discretize_derivative_exact_on_affine():
    ops = discretize(PHS1, 32)
    xs = ops.grid.nodes.astype(complex)
    assert np.abs(ops.Gfull @ xs - 1.0).max() < 1e-12
    assert np.abs(ops.Gfull @ np.ones_like(xs)).max() < 1e-12


def test_discretize_duality_pairing(rng):
    ops = discretize(PHS1, 48)
    for _ in range(25):
        u = rng.normal(size=49) + 1j * rng.normal(size=49)
        v = rng.normal(size=49) + 1j * rng.normal(size=49)
        v[0] = v[-1] = 0.0  # closed-route functions vanish at the ends
        lhs = np.sum(ops.omega * (ops.Dc @ v).conj() * u)
        rhs = -np.sum(ops.omega * v.conj() * (ops.Gfull @ u))
        assert abs(lhs - rhs) < 1e-10


def test_discretize_derivative_order():
    errs = []
    for m in (64, 128, 256):
        ops = discretize(PHS1, m)
        xs = ops.grid.nodes
        errs.append(np.abs(ops.Gfull @ np.exp(xs).astype(complex) - np.exp(xs)).max())
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert orders.min() > 1.9


def test_discretize_rejects_bad_cell_count():
    with pytest.raises(ValueError):
        discretize(PHS1, 7)  # odd cell count breaks the parity split


# -------------------------------------------------------------- resolve_A


def test_resolve_zero_rhs_gives_zero():
    ops = discretize(PHS1, 64)
    res = resolve_A(ops, PHS1, bnd.neumann(0.0, BASIS1), 1.0,
                    (np.zeros(65), np.zeros(65)))
    assert np.abs(res.u).max() == 0.0 and np.abs(res.v).max() == 0.0
    assert res.residual == 0.0


def test_resolve_hyperbolic_closed_form_convergence():
    errs = []
    for m in (128, 256, 512):
        ops = discretize(PHS1, m)
        xs = ops.grid.nodes
        res = resolve_A(ops, PHS1, bnd.neumann(0.0, BASIS1), 1.0,
                        (np.cosh(xs), np.sinh(xs)))
        assert res.residual < 1e-8
        errs.append(np.abs(res.u[:, 0] - np.cosh(xs)).max())
    assert errs[-1] < 5e-8
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert orders.min() > 1.9


def test_resolve_matches_assembled_system(rng):
    ops = discretize(PHS2, 128)
    xs = ops.grid.nodes
    f = np.stack([np.cos(xs), np.cos(2 * xs)], axis=1).astype(complex)
    g = np.stack([np.sin(xs), np.sin(0.5 * xs)], axis=1).astype(complex)
    conditions = [
        bnd.dirichlet(0.0, BASIS2),
        bnd.neumann(0.0, BASIS2),
        bnd.robin(np.array([[1.0, 0.2], [0.2, 0.5]]), BASIS2),
        bnd.from_V(rand_contraction(rng, 2), BASIS2),
    ]
    for bc in conditions:
        res = resolve_A(ops, PHS2, bc, 0.8, (f, g))
        ref = assembled_resolve(ops, bc, 0.8, (f + g).ravel())
        gap = np.abs((res.u + res.v).ravel() - ref).max() / max(1.0, np.abs(ref).max())
        assert gap < 1e-8


def test_resolve_matches_assembled_system_shifted():
    ops = discretize(PHS1, 96)
    xs = ops.grid.nodes
    bc = bnd.dirichlet(0.7, BASIS1)
    res = resolve_A(ops, PHS1, bc, 0.5, (np.cos(xs), np.sin(xs)))
    ref = assembled_resolve(ops, bc, 0.5, (np.cos(xs) + np.sin(xs)).astype(complex))
    assert np.abs((res.u + res.v).ravel() - ref).max() < 1e-8


def test_resolve_rejects_uncertified_condition():
    ops = discretize(PHS2, 32)
    bad = bnd.robin_bad(np.eye(2), BASIS2)
    rhs = (np.zeros((33, 2)), np.zeros((33, 2)))
    with pytest.raises(ValueError, match="certificate"):
        resolve_A(ops, PHS2, bad, 1.0, rhs)
    res = resolve_A(ops, PHS2, bad, 1.0, rhs, allow_uncertified=True)
    assert np.abs(res.u).max() < 1e-12


def test_resolve_validates_rhs_shape():
    ops = discretize(PHS1, 32)
    with pytest.raises(ValueError, match="grid"):
        resolve_A(ops, PHS1, bnd.neumann(0.0, BASIS1), 1.0,
                  (np.zeros(10), np.zeros(10)))


# -------------------------------------------------------------- stepping


def test_simulate_constant_field_is_stationary():
    u0 = np.full((65, 1), 2.0 + 0.5j)
    scn = Scenario(phs=PHS1, bc=bnd.neumann(0.0, BASIS1), u0=u0,
                   T=0.5, dt=0.1, theta=1.0)
    traj = simulate(scn)
    assert np.abs(traj.states[-1] - u0).max() < 1e-12
    assert traj.times[-1] == pytest.approx(0.5)
    assert len(traj.times) == len(traj.energies) == len(traj.states) == 6


def test_simulate_energy_dissipates_under_contraction(rng):
    ops = discretize(PHS2, 64)
    xs = ops.grid.nodes
    bc = bnd.from_V(0.5 * rand_unitary(rng, 2), BASIS2)
    u0 = np.stack([np.exp(-8 * xs**2), xs * np.exp(-6 * xs**2)], axis=1)
    traj = simulate(Scenario(phs=PHS2, bc=bc, u0=u0, T=0.5, dt=0.01, theta=1.0), ops)
    assert np.diff(traj.energies).max() <= 1e-12 * traj.energies[0]
    assert traj.energies[-1] < traj.energies[0]


def test_simulate_energy_conserved_for_unitary_midpoint(rng):
    ops = discretize(PHS2, 64)
    xs = ops.grid.nodes
    bc = bnd.from_V(rand_unitary(rng, 2), BASIS2)
    u0 = np.stack([np.exp(-8 * xs**2), np.zeros_like(xs)], axis=1)
    traj = simulate(Scenario(phs=PHS2, bc=bc, u0=u0, T=0.5, dt=0.01, theta=0.5), ops)
    drift = np.abs(traj.energies - traj.energies[0]).max() / traj.energies[0]
    assert drift < 1e-10


def test_midpoint_step_is_weighted_isometry(rng):
    ops = discretize(PHS2, 16)
    bc = bnd.from_V(rand_unitary(rng, 2), BASIS2)
    scn = Scenario(phs=PHS2, bc=bc, u0=np.zeros((17, 2)), T=1.0, dt=0.05, theta=0.5)
    dim = 17 * 2
    cols = []
    for j in range(dim):
        wj = np.zeros(dim, dtype=complex)
        wj[j] = 1.0
        cols.append(step(wj.reshape(17, 2), scn, ops).ravel())
    tmat = np.stack(cols, axis=1)
    wdiag = np.repeat(ops.omega, 2)
    dev = np.abs(tmat.conj().T @ (wdiag[:, None] * tmat) - np.diag(wdiag)).max()
    assert dev / wdiag.max() < 1e-9


def test_transport_pulse_matches_characteristics():
    m = 128
    ops = discretize(PHS1, m)
    xs = ops.grid.nodes
    scn = Scenario(phs=PHS1, bc=bnd.from_V(0.0, BASIS1), u0=bump(xs)[:, None],
                   T=1.0, dt=2.0 / m, theta=1.0)
    traj = simulate(scn, ops)
    exact = oracle_transport(bump, 1.0, xs, 1.0)
    assert np.abs(traj.states[-1][:, 0] - exact).max() < 0.15


def test_midpoint_rejects_nonlinear_relation():
    bc = bnd.multiport([(0, ("friction", 0.5))], BASIS1)
    scn = Scenario(phs=PHS1, bc=bc, u0=np.zeros((33, 1)), T=0.1, dt=0.05, theta=0.5)
    with pytest.raises(ValueError, match="linear") as err:
        simulate(scn)
    assert str(err.value).startswith("step 0 (t = 0)")


def test_scenario_validation(rng):
    u0 = np.zeros((33, 1))
    bc = bnd.neumann(0.0, BASIS1)
    with pytest.raises(ValueError, match="time step"):
        Scenario(phs=PHS1, bc=bc, u0=u0, T=1.0, dt=0.0)
    with pytest.raises(ValueError, match="final time"):
        Scenario(phs=PHS1, bc=bc, u0=u0, T=-1.0, dt=0.1)
    with pytest.raises(ValueError, match="theta"):
        Scenario(phs=PHS1, bc=bc, u0=u0, T=1.0, dt=0.1, theta=0.25)
    with pytest.raises(ValueError, match="port"):
        Scenario(phs=PHS2, bc=bc, u0=np.zeros((33, 2)), T=1.0, dt=0.1)


def test_simulate_checks_grid_agreement():
    scn = Scenario(phs=PHS1, bc=bnd.neumann(0.0, BASIS1),
                   u0=np.zeros((33, 1)), T=0.1, dt=0.05)
    with pytest.raises(ValueError, match="grid"):
        simulate(scn, discretize(PHS1, 64))


# -------------------------------------------------------------- oracle


def test_oracle_transport_shifts_and_clips():
    xs = np.linspace(-1.0, 1.0, 9)
    vals = oracle_transport(bump, 0.25, xs, 1.0)
    assert np.allclose(vals, np.where(xs - 0.25 >= -1.0, bump(xs - 0.25), 0.0))
    # characteristic entering through the inflow end carries zero data
    assert oracle_transport(lambda z: np.ones_like(np.asarray(z)), 1.5, -0.8, 1.0) == 0.0
    scalar = oracle_transport(bump, 0.0, -0.35, 1.0)
    assert isinstance(scalar, complex) and scalar == pytest.approx(1.0)

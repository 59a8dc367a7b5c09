"""Boundary conditions for 1D port-Hamiltonian systems, with certificates.

A boundary condition is, mathematically, a relation between the effort
trace ``e`` and the flow trace ``f`` of the field at the two endpoints.
This module stores each condition twice, connected by exact coordinate
maps:

* in *flow/effort coordinates* — pairs ``(e, w)`` with ``w = -f`` on
  standard ``C^n``, the discretization- and parameter-independent form
  in which monotonicity means exactly energy dissipation
  (``-Re<e, f> >= 0``), and which the evolution solver consumes;
* in *trace-basis (BD) coordinates* — the relation ``h`` on the
  coefficient space with the channel Gram weight, obtained through the
  maps ``x = Q^{-1} e``, ``y = -(S Q)^{-1} f``.  This is the form whose
  adjoint calculus (skew-selfadjointness) is natural.

Constructors attach certificates: monotonicity and maximality are
checked exactly for linear conditions (eigenvalue / rank arguments) and
by resolvent sampling for frictional multiport conditions.  Failed
certificates always carry a concrete, re-verifiable witness.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
import scipy.linalg as sla

from . import relations
from .phs import BoundaryDataBasis, project_bd
from .relations import (
    Certificate,
    LinearGraph,
    MonotoneMap,
    Relation,
    SeparableProx,
    Shifted,
    check_maximal,
    check_monotone,
    direct_sum,
    graph_residual,
    transform,
)
from .sbp import sbp42
from .spaces import InnerProductSpace, LinearMap

__all__ = [
    "FLOW_EFFORT",
    "BoundaryCondition",
    "from_V",
    "dirichlet",
    "neumann",
    "robin",
    "robin_bad",
    "multiport",
    "check_skew_selfadjoint",
    "extract_h",
    "membership",
    "subspace_gap",
]

#: Coordinate-convention tag: boundary relations pair effort against flow.
FLOW_EFFORT = "flow-effort"

#: Maximality threshold on the smallest singular value of the
#: V-parametrization's closing matrix.
SIGMA_MIN_THRESHOLD = 1e-8

#: Principal-angle tolerance for graph equality h* = -h.
SKEW_ANGLE_TOL = 1e-9

#: Base tolerance of :func:`membership`, scaled by the discrete graph
#: norms of the tested fields (the projection is quadrature-limited).
MEMBERSHIP_TOL = 1e-6


@dataclass(frozen=True)
class BoundaryCondition:
    """A certified boundary relation in both coordinate systems.

    Attributes
    ----------
    ports:
        Number of boundary ports ``n`` (the trace space is ``C^n``).
    coords:
        Coordinate-convention tag; always :data:`FLOW_EFFORT`.
    h:
        The relation in trace-basis coordinates, living on the
        Gram-weighted coefficient space.
    provenance:
        One of ``V-matrix``, ``Dirichlet``, ``Neumann``, ``Robin``,
        ``RobinBad``, ``Multiport``, ``Extracted``, ``Custom``.
    certificates:
        Mapping with ``"monotone"`` and ``"maximal"``
        :class:`~.relations.Certificate` entries from construction time.
        Witness vectors refer to :attr:`port_relation` (flow/effort
        coordinates), where the constructors run their checks; the
        coordinate maps are congruences, so the verdicts transfer to
        ``h`` unchanged.
    basis:
        The trace basis the coordinate maps refer to.
    port_relation:
        The same condition as a relation on standard ``C^n`` in
        flow/effort coordinates: graph pairs are ``(e, -f)``.
    data:
        Provenance-specific payload (the defining matrices and data),
        used by reports and config serialization.
    """

    ports: int
    coords: str
    h: Relation
    provenance: str
    certificates: dict
    basis: BoundaryDataBasis
    port_relation: Relation
    data: dict = field(default_factory=dict)

    @property
    def is_maximal_monotone(self) -> bool:
        mono = self.certificates.get("monotone")
        maxi = self.certificates.get("maximal")
        return (mono is not None and mono.monotone == "yes"
                and maxi is not None and maxi.maximal == "yes")

    def constraint(self) -> "tuple[np.ndarray, np.ndarray]":
        """Constraint-matrix form ``C_e e + C_f f = 0`` of a linear condition.

        Returns the pair ``(C_e, C_f)`` whose joint kernel is exactly the
        flow/effort graph.  Only unshifted linear conditions have this
        form; anything affine or nonlinear raises ``ValueError``.
        """
        rel = self.port_relation
        if not isinstance(rel, LinearGraph):
            raise ValueError("constraint emission requires a linear boundary condition")
        stacked = np.vstack([rel.zx, -rel.zy])  # columns span {(e, f)}
        ann = relations._nullspace(stacked.conj().T)
        cmat = ann.conj().T
        return cmat[:, : self.ports].copy(), cmat[:, self.ports:].copy()

    def describe(self) -> str:
        lines = [f"boundary condition: {self.provenance} on {self.ports} port(s)"]
        for name in ("monotone", "maximal"):
            cert = self.certificates.get(name)
            if cert is not None:
                lines.append(f"  {name}: {cert.describe()}")
        return "\n".join(lines)


def _port_space(n: int) -> InnerProductSpace:
    return InnerProductSpace(n)


def _bd_space(basis: BoundaryDataBasis) -> InnerProductSpace:
    return InnerProductSpace(basis.n, basis.gram_G)


def _to_bd(basis: BoundaryDataBasis, port_relation: Relation) -> Relation:
    """Exact conversion from flow/effort pairs to trace-basis pairs.

    The congruence by ``Qmat`` between the Gram-weighted coefficient
    space and standard port coordinates sends ``(e, w)`` to
    ``(Q^{-1} e, Q^{-1} S^{-1} w)`` — precisely the documented
    coordinate maps, because the weighted adjoint of ``Q`` is
    ``(Q^H S Q)^{-1} Q^H S... = Q^{-1} S^{-1}`` against the identity
    port weight.
    """
    tmap = LinearMap(_bd_space(basis), _port_space(basis.n), basis.Qmat)
    return transform(tmap, port_relation)


def _port_datum(value, n: int) -> np.ndarray:
    arr = np.asarray(value, dtype=complex)
    if arr.ndim == 0:
        return np.full(n, complex(arr))
    arr = arr.reshape(-1)
    if arr.shape != (n,):
        raise ValueError(f"boundary datum must be a scalar or length-{n} vector")
    return arr


def _shifted_or_plain(base: LinearGraph, x0: np.ndarray, y0: np.ndarray) -> Relation:
    if np.linalg.norm(x0) == 0.0 and np.linalg.norm(y0) == 0.0:
        return base
    return Shifted(base, x0, y0)


def _finalize(basis, port_relation, provenance, certificates, data) -> BoundaryCondition:
    return BoundaryCondition(
        ports=basis.n,
        coords=FLOW_EFFORT,
        h=_to_bd(basis, port_relation),
        provenance=provenance,
        certificates=certificates,
        basis=basis,
        port_relation=port_relation,
        data=data,
    )


def from_V(vmat, basis: BoundaryDataBasis) -> BoundaryCondition:
    """Boundary condition ``(1+V) f + (1-V) e = 0`` from a square matrix.

    For ``V^* V <= 1`` the resulting relation is maximal monotone; a
    violation raises a warning (not an error) and the condition is still
    constructed so that falsification experiments can watch its
    certificates fail.  The flow/effort graph is parametrized by
    ``e = (1+V) l``, ``f = -(1-V) l``, under which the dissipation
    pairing becomes ``-Re<e, f> = Re<(1-V^*V) l, l>`` — manifestly
    nonnegative exactly on contractions.

    The maximality certificate reports the smallest singular value of
    ``-S(1+V) - (1-V)``; its invertibility closes the construction for
    every contraction (the certificate makes the theorem's obligation
    observable rather than trusting it).
    """
    n = basis.n
    vmat = np.atleast_2d(np.asarray(vmat, dtype=complex))
    if vmat.shape != (n, n):
        raise ValueError(f"V must be {n} x {n} for this basis, got {vmat.shape}")
    vv = vmat.conj().T @ vmat
    vv_top = float(np.linalg.eigvalsh(vv)[-1])
    if vv_top > 1.0 + 1e-10:
        warnings.warn(
            f"V is not a contraction (largest eigenvalue of V*V = {vv_top:.6g} > 1); "
            "the resulting boundary relation will not be monotone",
            UserWarning,
            stacklevel=2,
        )
    eye = np.eye(n)
    port = LinearGraph(_port_space(n), eye + vmat, eye - vmat)
    mono = check_monotone(port)
    closing = -basis.S @ (eye + vmat) - (eye - vmat)
    sigmas = sla.svdvals(closing)
    sigma_min = float(sigmas[-1])
    maximal = "yes" if (mono.monotone == "yes" and sigma_min > SIGMA_MIN_THRESHOLD) else "no"
    max_cert = Certificate(
        monotone=mono.monotone,
        maximal=maximal,
        method="smallest singular value of -S(1+V)-(1-V)",
        witness={"sigma_min": sigma_min, "sigmas": sigmas},
    )
    data = {"kind": "v-matrix", "V": vmat, "vv_top_eigenvalue": vv_top,
            "closing_sigmas": sigmas}
    return _finalize(basis, port, "V-matrix",
                     {"monotone": mono, "maximal": max_cert}, data)


def dirichlet(value, basis: BoundaryDataBasis) -> BoundaryCondition:
    """Pin the effort trace: ``e = value``, flow free."""
    n = basis.n
    pin = _port_datum(value, n)
    base = LinearGraph(_port_space(n), np.zeros((n, n)), np.eye(n))
    port = _shifted_or_plain(base, pin, np.zeros(n, dtype=complex))
    certs = {"monotone": check_monotone(port), "maximal": check_maximal(port)}
    return _finalize(basis, port, "Dirichlet", certs,
                     {"kind": "dirichlet", "value": pin})


def neumann(value, basis: BoundaryDataBasis) -> BoundaryCondition:
    """Pin the flow trace: ``f = value``, effort free."""
    n = basis.n
    pin = _port_datum(value, n)
    base = LinearGraph(_port_space(n), np.eye(n), np.zeros((n, n)))
    port = _shifted_or_plain(base, np.zeros(n, dtype=complex), -pin)
    certs = {"monotone": check_monotone(port), "maximal": check_maximal(port)}
    return _finalize(basis, port, "Neumann", certs,
                     {"kind": "neumann", "value": pin})


def _robin_like(mmat, basis, value, sign: float, provenance: str) -> BoundaryCondition:
    n = basis.n
    mmat = np.atleast_2d(np.asarray(mmat, dtype=complex))
    if mmat.shape != (n, n):
        raise ValueError(f"Robin matrix must be {n} x {n}, got {mmat.shape}")
    scale = max(1.0, float(np.linalg.norm(mmat)))
    if np.linalg.norm(mmat - mmat.conj().T) > 1e-12 * scale:
        raise ValueError("Robin matrix must be Hermitian")
    mmat = (mmat + mmat.conj().T) / 2.0
    evals = np.linalg.eigvalsh(mmat)
    if sign > 0 and evals[0] < -1e-10 * scale:
        raise ValueError(
            f"Robin matrix must be positive semidefinite (smallest eigenvalue {evals[0]:.3e})"
        )
    if sign < 0 and evals[0] <= 1e-10 * scale:
        raise ValueError(
            "the sign-flipped Robin condition needs a positive definite matrix "
            "(otherwise nothing is certified to fail)"
        )
    pin = _port_datum(value, n)
    kmat = sign * (basis.sqrtS @ mmat @ basis.sqrtS)
    base = LinearGraph.from_matrix(_port_space(n), kmat)
    port = _shifted_or_plain(base, np.zeros(n, dtype=complex), -pin)
    certs = {"monotone": check_monotone(port), "maximal": check_maximal(port)}
    return _finalize(basis, port, provenance, certs,
                     {"kind": provenance.lower(), "M": mmat, "value": pin})


def robin(mmat, basis: BoundaryDataBasis, value=0.0) -> BoundaryCondition:
    """Impedance condition ``f = -sqrt(S) M sqrt(S) e + value`` with ``M ⪰ 0``.

    ``M`` acts in the symmetrized port coordinates ``sqrt(S) e``; there
    its positive semidefiniteness is exactly equivalent to monotonicity,
    and the eigenvalues of the stored trace-basis operator coincide with
    those of ``M`` (the two are similar).
    """
    return _robin_like(mmat, basis, value, +1.0, "Robin")


def robin_bad(mmat, basis: BoundaryDataBasis, value=0.0) -> BoundaryCondition:
    """The sign-flipped impedance condition — certified *non*-monotone.

    Requires ``M`` positive definite so that the monotonicity
    certificate provably fails; the returned certificate carries a
    concrete violating pair of graph points for re-verification.
    """
    return _robin_like(mmat, basis, value, -1.0, "RobinBad")


_PART_KINDS = ("dirichlet", "neumann", "friction", "robin")


def _scalar_part(kind: str, params: tuple) -> Relation:
    space = _port_space(1)
    if kind == "dirichlet":
        (val,) = params
        base = LinearGraph(space, np.zeros((1, 1)), np.eye(1))
        return _shifted_or_plain(base, np.array([complex(val)]), np.zeros(1, dtype=complex))
    if kind == "neumann":
        (val,) = params
        base = LinearGraph(space, np.eye(1), np.zeros((1, 1)))
        return _shifted_or_plain(base, np.zeros(1, dtype=complex), np.array([-complex(val)]))
    if kind == "friction":
        (mu,) = params
        if not float(mu) >= 0.0:
            raise ValueError("friction coefficient must be nonnegative")
        return SeparableProx(space, [("abs", float(mu))])
    if kind == "robin":
        alpha = params[0]
        val = params[1] if len(params) > 1 else 0.0
        if not float(np.real(alpha)) >= 0.0 or abs(np.imag(alpha)) > 0:
            raise ValueError("scalar robin coefficient must be real and nonnegative")
        base = LinearGraph.from_matrix(space, np.array([[float(np.real(alpha))]]))
        return _shifted_or_plain(base, np.zeros(1, dtype=complex), np.array([-complex(val)]))
    raise ValueError(f"unknown port kind {kind!r}; expected one of {_PART_KINDS}")


def _part_bounded(rel: Relation) -> bool:
    """Whether a frictional part provably maps bounded sets to bounded sets."""
    if isinstance(rel, SeparableProx):
        return all(p[0] in ("abs", "zero") for p in rel.pieces)
    if isinstance(rel, MonotoneMap):
        return rel.lipschitz is not None
    if isinstance(rel, Shifted):
        return _part_bounded(rel.base)
    if isinstance(rel, LinearGraph):
        return True  # finite-dimensional graph; resolvent sampling is exact anyway
    return False


def multiport(parts: Sequence, basis: BoundaryDataBasis) -> BoundaryCondition:
    """Compose per-port boundary behaviors into one condition.

    Parameters
    ----------
    parts:
        Iterable of ``(ports, spec)`` entries.  ``ports`` is an index or
        an index set; together they must partition ``range(n)``.  A spec
        is either a tuple — ``("dirichlet", value)``,
        ``("neumann", value)``, ``("robin", alpha[, value])``,
        ``("friction", mu)`` — applied coordinatewise, or a monotone
        :class:`~.relations.Relation` on standard ``C^k`` covering the
        whole index set at once.
    basis:
        Trace basis fixing ``n`` and the coordinate maps.

    The parts are assembled by direct sum and, when the listed order is
    not already the port order, transported back by the (unitary)
    coordinate permutation.  Monotonicity certificates are exact where
    every part is exact; maximality of frictional composites is
    certified by resolvent sampling, which is honest only for bounded
    frictional relations — an unbounded one downgrades the certificate
    to ``unknown`` with a warning.
    """
    n = basis.n
    seen: set = set()
    order: list = []
    part_relations: list = []
    sampled_needed = False
    unbounded = False
    for ports, spec in parts:
        if np.isscalar(ports):
            idx = (int(ports),)
        else:
            idx = tuple(int(k) for k in ports)
        if len(idx) == 0:
            raise ValueError("empty port set in multiport part")
        for k in idx:
            if not 0 <= k < n:
                raise ValueError(f"port index {k} out of range for {n} ports")
            if k in seen:
                raise ValueError(f"port index {k} assigned twice")
            seen.add(k)
        if isinstance(spec, Relation):
            if spec.space.dim != len(idx):
                raise ValueError(
                    f"part relation has dimension {spec.space.dim}, expected {len(idx)}"
                )
            if not spec.space.is_identity_weight():
                raise ValueError("part relations must live on standard coordinates")
            mono = check_monotone(spec)
            if mono.monotone == "no":
                raise ValueError("multiport parts must be monotone relations")
            rel = spec
            if not isinstance(rel, (LinearGraph, Shifted)):
                sampled_needed = True
                if not _part_bounded(rel):
                    unbounded = True
            part_relations.append(rel)
            order.extend(idx)
        else:
            kind = str(spec[0]).lower()
            params = tuple(spec[1:])
            for k in idx:
                rel = _scalar_part(kind, params)
                if kind == "friction":
                    sampled_needed = True
                part_relations.append(rel)
                order.append(k)
    if seen != set(range(n)):
        missing = sorted(set(range(n)) - seen)
        raise ValueError(f"ports {missing} not covered by any part")

    summed = direct_sum(part_relations) if len(part_relations) > 1 else part_relations[0]
    if list(order) == list(range(n)):
        port = summed
    else:
        perm = np.eye(n)[list(order), :]
        tmap = LinearMap(_port_space(n), _port_space(n), perm)
        port = transform(tmap, summed)

    if unbounded:
        warnings.warn(
            "a frictional part is not certifiably bounded; maximality of the "
            "composite is downgraded to unknown",
            UserWarning,
            stacklevel=2,
        )
    mono = check_monotone(port)
    if unbounded:
        maxi = Certificate(maximal="unknown",
                           method="resolvent sampling skipped: unbounded frictional part")
    else:
        maxi = check_maximal(port, force_sampled=sampled_needed)
    return _finalize(basis, port, "Multiport",
                     {"monotone": mono, "maximal": maxi},
                     {"kind": "multiport", "parts": tuple(parts)})


def subspace_gap(u1: np.ndarray, u2: np.ndarray) -> float:
    """Sine of the largest principal angle between two orthonormal spans.

    Computed as ``||U2 - U1 (U1^H U2)||_2``, which stays accurate down
    to machine precision for nearly-equal subspaces (the cosine route
    loses half the digits through ``arccos`` near 1).
    """
    if u1.shape[1] != u2.shape[1]:
        return 1.0
    if u2.shape[1] == 0:
        return 0.0
    resid = u2 - u1 @ (u1.conj().T @ u2)
    return float(min(1.0, np.linalg.norm(resid, 2)))


def check_skew_selfadjoint(bc: BoundaryCondition) -> Certificate:
    """Certify ``h* = -h`` in the Gram-weighted trace coordinates.

    The adjoint relation is computed through the weighted graph
    complement and compared with the negated graph by principal angles
    (tolerance :data:`SKEW_ANGLE_TOL` on the angle); a failure reports
    the worst mismatch direction.  Defined for linear (unshifted)
    conditions only.
    """
    h = bc.h
    if not isinstance(h, LinearGraph):
        raise ValueError("skew-selfadjointness undefined for nonlinear relations")
    adj = relations.adjoint_relation(h)
    neg = LinearGraph(h.space, h.zx, -h.zy)
    if adj.graph_dim != neg.graph_dim:
        return Certificate(
            skew="no",
            method="adjoint graph dimension mismatch",
            witness={"dim_h": neg.graph_dim, "dim_adjoint": adj.graph_dim},
        )
    u1 = neg.stacked
    u2 = adj.stacked
    worst = float(np.arcsin(subspace_gap(u1, u2)))
    if worst <= SKEW_ANGLE_TOL:
        return Certificate(skew="yes", method="principal angles between h* and -h",
                           witness={"max_angle": worst})
    resid = u2 - u1 @ (u1.conj().T @ u2)
    _, _, vh = sla.svd(resid)
    direction = u2 @ vh[0].conj()
    d = h.space.dim
    return Certificate(
        skew="no",
        method="principal angles between h* and -h",
        witness={"max_angle": worst, "direction_x": direction[:d], "direction_y": -direction[d:]},
    )


def extract_h(constraint, basis: BoundaryDataBasis) -> BoundaryCondition:
    """Boundary condition from a linear trace constraint ``C_e e + C_f f = 0``.

    The joint kernel of the constraint pair becomes the flow/effort
    graph; re-emitting the constraint from the result spans the same
    kernel (round-trip identity, tested).  No monotonicity is assumed —
    the certificates report whatever the kernel happens to be.
    """
    ce, cf = constraint
    n = basis.n
    ce = np.atleast_2d(np.asarray(ce, dtype=complex))
    cf = np.atleast_2d(np.asarray(cf, dtype=complex))
    if ce.shape[1] != n or cf.shape[1] != n or ce.shape[0] != cf.shape[0]:
        raise ValueError(f"constraint blocks must have {n} columns and equal row counts")
    kern = relations._nullspace(np.hstack([ce, cf]))
    if kern.shape[1] == 0:
        raise ValueError("constraint kernel is trivial; no boundary relation to extract")
    port = LinearGraph(_port_space(n), kern[:n], -kern[n:])
    certs = {"monotone": check_monotone(port), "maximal": check_maximal(port)}
    return _finalize(basis, port, "Extracted", certs,
                     {"kind": "custom", "C_e": ce, "C_f": cf})


def _graph_norm(basis: BoundaryDataBasis, xs: np.ndarray, field_: np.ndarray) -> float:
    """Discrete graph norm sqrt(||u||^2 + ||P1 u'||^2) with Simpson weights."""
    from .phs import _as_field, _simpson_weights  # local import to avoid api noise

    arr = _as_field(field_, basis.n)
    m = len(xs) - 1
    deriv, _ = sbp42(m, float(xs[1] - xs[0]))
    w = _simpson_weights(m, float(xs[1] - xs[0]))
    p1 = (basis.eigvecs * basis.lambdas) @ basis.eigvecs.conj().T
    gu = (deriv @ arr) @ p1.T
    return float(np.sqrt(np.sum(w[:, None] * (np.abs(arr) ** 2 + np.abs(gu) ** 2)).real))


def membership(bc: BoundaryCondition, u, v, tol: float = MEMBERSHIP_TOL):
    """Test whether a field pair satisfies the boundary relation.

    Projects ``u`` onto the even trace channel and ``v`` onto the odd
    one (the derivative map is the identity on coefficients), and
    measures the graph distance of the coefficient pair to ``h``.  The
    fields are assumed sampled on the uniform symmetric grid spanning
    ``[-b, b]``; the grid is reconstructed from the sample count.

    Returns
    -------
    member, residual:
        ``member`` is ``residual <= tol * scale`` with ``scale`` the
        larger of 1 and the fields' discrete graph norms (the projection
        is quadrature-limited, so the test is relative for large
        fields).
    """
    basis = bc.basis
    u = np.asarray(u, dtype=complex)
    xs = np.linspace(-basis.b, basis.b, u.shape[0])
    x_c = project_bd(basis, "even", xs, u)
    y_c = project_bd(basis, "odd", xs, v)
    residual = graph_residual(bc.h, x_c, y_c)
    scale = max(1.0, _graph_norm(basis, xs, u), _graph_norm(basis, xs, v))
    return bool(residual <= tol * scale), float(residual)

"""Monotone relations on finite-dimensional complex inner-product spaces.

A relation is a subset of ``H x H``.  Monotonicity means
``Re<u - x | v - y> >= 0`` for every two members ``(x, y)``, ``(u, v)``;
maximal monotone relations additionally admit an everywhere-defined
resolvent ``J_lam = (1 + lam A)^{-1}``.  The module is organized around
that resolvent: every representation knows how to evaluate it, the
combinators reduce theirs to the wrapped ones, and the certification
routines reduce monotonicity/maximality questions to linear algebra
where the representation is linear and to verified sampling otherwise.

Representations
---------------
``LinearGraph``
    the span of finitely many pairs, stored as an orthonormal basis of
    the graph subspace of ``H + H``.
``MonotoneMap``
    a single-valued continuous map given by an evaluator, with optional
    Lipschitz constant and Jacobian evaluator.
``SeparableProx``
    per-coordinate convex pieces (scaled absolute value, quadratic,
    interval indicator, zero), each with a closed-form proximal map.
``Shifted``, ``DirectSum``, ``Transformed``, ``Weighted``
    combinators: graph translation, block sums, the congruence
    ``T* B T``, and the reweighting ``{(x, y) : (P x, y) in A}`` for a
    Hermitian positive-definite ``P``.

Post-sets ``A[{x}]`` are described as affine sets, interval products or
single points; interval descriptions are the real sections of the
complex picture (documented on :func:`post_set`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg as sla

from .spaces import InnerProductSpace, LinearMap, adjoint as _map_adjoint

__all__ = [
    "TOL_LINEAR",
    "TOL_ITERATIVE",
    "MAX_ITER",
    "NonconvergenceError",
    "AffineSet",
    "PointSet",
    "IntervalProduct",
    "EmptySet",
    "EMPTY",
    "Certificate",
    "Relation",
    "LinearGraph",
    "MonotoneMap",
    "SeparableProx",
    "Shifted",
    "DirectSum",
    "Transformed",
    "Weighted",
    "InverseRelation",
    "post_set",
    "inverse",
    "adjoint_relation",
    "scale_add",
    "resolvent",
    "resolvent_value",
    "yosida",
    "principal_section",
    "direct_sum",
    "transform",
    "check_monotone",
    "check_maximal",
    "graph_residual",
    "sample_graph_points",
    "solve_inclusion",
]

#: Residual tolerance on direct linear solve paths.
TOL_LINEAR = 1e-10

#: Residual tolerance on iterative solve paths.
TOL_ITERATIVE = 1e-8

#: Iteration cap shared by every iterative solver in the module.
MAX_ITER = 10_000


class NonconvergenceError(RuntimeError):
    """An iterative or direct solve failed to reach its residual target.

    Carries the last residual in :attr:`residual`.
    """

    def __init__(self, message: str, residual: Optional[float] = None):
        super().__init__(message)
        self.residual = residual


# ---------------------------------------------------------------------------
# set descriptions returned by post_set
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AffineSet:
    """``{base + directions @ t}`` — an affine subspace (possibly a point)."""

    base: np.ndarray
    directions: np.ndarray  # dim x k, k may be 0

    @property
    def is_point(self) -> bool:
        return self.directions.shape[1] == 0


@dataclass(frozen=True)
class PointSet:
    """A finite set of points (in practice a singleton)."""

    points: tuple


@dataclass(frozen=True)
class IntervalProduct:
    """Per-coordinate values: either an exact (possibly complex) singleton
    ``lo_k == hi_k`` or a real interval ``[lo_k, hi_k]`` with endpoints in
    ``[-inf, inf]``.
    """

    lo: np.ndarray
    hi: np.ndarray

    def is_bounded(self) -> bool:
        return bool(np.all(np.isfinite(self.lo)) and np.all(np.isfinite(self.hi)))


class EmptySet:
    """Sentinel for an empty post-set."""

    def __repr__(self):  # pragma: no cover
        return "EMPTY"


EMPTY = EmptySet()


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


@dataclass
class Certificate:
    """Verdicts of the certification routines.

    Each verdict is ``"yes"``, ``"no"`` or ``"unknown"``.  A ``"no"``
    always carries a concrete, re-verifiable witness in :attr:`witness`
    (a violating pair of graph points for monotonicity, an unreachable
    right-hand side for maximality, a mismatch direction for skewness);
    a sampled ``"yes"`` carries its evidence (worst residual observed).
    :attr:`method` names the check that produced the verdict.
    """

    monotone: str = "unknown"
    maximal: str = "unknown"
    skew: str = "unknown"
    method: str = ""
    witness: Optional[dict] = None

    def describe(self) -> str:
        parts = []
        for name in ("monotone", "maximal", "skew"):
            verdict = getattr(self, name)
            if verdict != "unknown":
                parts.append(f"{name}={verdict}")
        if not parts:
            parts.append("all verdicts unknown")
        return f"{', '.join(parts)} [{self.method}]"


# ---------------------------------------------------------------------------
# small linear-algebra helpers
# ---------------------------------------------------------------------------


def _random_vector(rng: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    return scale * (rng.standard_normal(dim) + 1j * rng.standard_normal(dim))


def _orthonormal_columns(m: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Orthonormal basis of the column span (rank-revealing, via SVD)."""
    if m.size == 0:
        return m.reshape(m.shape[0], 0)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return m[:, :0]
    rank = int(np.sum(s > rtol * s[0]))
    return u[:, :rank]


def _nullspace(m: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Orthonormal basis of the null space of ``m`` (columns)."""
    if m.shape[1] == 0:
        return np.zeros((0, 0), dtype=complex)
    u, s, vh = np.linalg.svd(m, full_matrices=True)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > rtol * max(smax, 1e-300)))
    return vh[rank:].conj().T


def _lstsq(m: np.ndarray, b: np.ndarray):
    """Least-squares solve returning (solution, residual_norm)."""
    if m.shape[1] == 0:
        return np.zeros(0, dtype=complex), float(np.linalg.norm(b))
    sol = np.linalg.lstsq(m, b, rcond=None)[0]
    return sol, float(np.linalg.norm(m @ sol - b))


# ---------------------------------------------------------------------------
# representation classes
# ---------------------------------------------------------------------------


class Relation:
    """Base class; concrete relations implement ``_resolve``."""

    space: InnerProductSpace
    representation = "abstract"

    def _resolve(self, lam, y, tol, max_iter, x0):
        raise NotImplementedError(
            f"resolvent not implemented for representation {self.representation!r}"
        )


class LinearGraph(Relation):
    """The relation spanned by finitely many pairs ``(x_i, y_i)``.

    The graph subspace is stored as an orthonormalized ``2 dim x k``
    basis (dependent input columns are dropped), split into the ``zx``
    and ``zy`` row blocks.
    """

    representation = "LinearGraph"

    def __init__(self, space: InnerProductSpace, zx, zy):
        zx = np.atleast_2d(np.asarray(zx, dtype=complex))
        zy = np.atleast_2d(np.asarray(zy, dtype=complex))
        if zx.shape[0] != space.dim or zy.shape[0] != space.dim:
            raise ValueError("graph blocks must have space.dim rows")
        if zx.shape[1] != zy.shape[1]:
            raise ValueError("graph blocks must have equally many columns")
        z = _orthonormal_columns(np.vstack([zx, zy]))
        self.space = space
        self.zx = z[: space.dim]
        self.zy = z[space.dim:]

    @classmethod
    def from_matrix(cls, space: InnerProductSpace, m) -> "LinearGraph":
        """Graph of the linear map ``x -> M x``."""
        m = np.atleast_2d(np.asarray(m, dtype=complex))
        return cls(space, np.eye(space.dim), m)

    @property
    def graph_dim(self) -> int:
        return self.zx.shape[1]

    @property
    def stacked(self) -> np.ndarray:
        return np.vstack([self.zx, self.zy])

    def _resolve(self, lam, y, tol, max_iter, x0):
        c, res = _lstsq(self.zx + lam * self.zy, y)
        scale = max(1.0, float(np.linalg.norm(y)))
        if res > tol * scale:
            raise NonconvergenceError(
                f"linear resolvent system is inconsistent (residual {res:.3e}); "
                "the relation is not maximal on this right-hand side",
                residual=res,
            )
        return self.zx @ c, self.zy @ c


class MonotoneMap(Relation):
    """A single-valued continuous (intended monotone) map.

    Parameters
    ----------
    space:
        Underlying space.
    func:
        Evaluator ``x -> F(x)``.
    lipschitz:
        Optional Lipschitz constant of ``F`` in the space's norm; enables
        the fixed-step damped iteration.
    deriv:
        Optional Jacobian evaluator ``x -> F'(x)`` (matrix); enables the
        Newton path.
    """

    representation = "MonotoneMap"

    def __init__(self, space, func: Callable, lipschitz: Optional[float] = None,
                 deriv: Optional[Callable] = None):
        self.space = space
        self.func = func
        self.lipschitz = lipschitz
        self.deriv = deriv

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.func(np.asarray(x, dtype=complex)), dtype=complex).reshape(-1)

    def _resolve(self, lam, y, tol, max_iter, x0):
        x = self._solve_perturbed(np.eye(self.space.dim) / lam, y / lam, tol, max_iter, x0)
        return x, (y - x) / lam

    def _solve_perturbed(self, phi, g, tol, max_iter, x0):
        """Solve ``phi x + F(x) = g`` (phi Hermitian positive w.r.t. the space)."""
        space = self.space
        scale = max(1.0, float(np.linalg.norm(g)))
        z = np.zeros(space.dim, dtype=complex) if x0 is None else np.asarray(x0, dtype=complex)

        def residual(v):
            return phi @ v + self(v) - g

        r = residual(z)
        rnorm = space.norm(r)
        if self.deriv is not None:
            # damped Newton with a residual-decrease line search
            for _ in range(max_iter):
                if rnorm <= tol * scale:
                    return z
                jac = phi + np.atleast_2d(np.asarray(self.deriv(z), dtype=complex))
                try:
                    dz = np.linalg.solve(jac, -r)
                except np.linalg.LinAlgError:
                    break
                alpha = 1.0
                while alpha > 2.0 ** -30:
                    z_new = z + alpha * dz
                    r_new = residual(z_new)
                    rn = space.norm(r_new)
                    if rn < (1.0 - 1e-4 * alpha) * rnorm:
                        z, r, rnorm = z_new, r_new, rn
                        break
                    alpha *= 0.5
                else:
                    break  # no decrease: fall through to the damped iteration
            if rnorm <= tol * scale:
                return z

        # damped fixed-point iteration z <- z - tau * (phi z + F(z) - g)
        phinorm = float(np.linalg.norm(phi, 2))
        if self.lipschitz is not None:
            tau = 1.0 / (1.0 + phinorm + self.lipschitz) ** 2
            adaptive = False
        else:
            tau = min(1.0, 1.0 / max(phinorm, 1e-30))
            adaptive = True
        for _ in range(max_iter):
            if rnorm <= tol * scale:
                return z
            z_new = z - tau * r
            r_new = residual(z_new)
            rn = space.norm(r_new)
            if adaptive and rn >= rnorm:
                tau *= 0.5
                if tau < 1e-16:
                    raise NonconvergenceError(
                        "damped iteration stalled (step size underflow)", residual=rnorm
                    )
                continue
            z, r, rnorm = z_new, r_new, rn
            if adaptive:
                tau = min(tau * 1.2, 1.0)
        raise NonconvergenceError(
            f"damped iteration did not reach tol={tol:.1e} in {max_iter} steps",
            residual=rnorm,
        )


class SeparableProx(Relation):
    """Per-coordinate convex pieces with closed-form proximal maps.

    ``pieces`` is one tuple per coordinate:

    - ``("abs", mu)`` — the set-valued derivative of ``mu |x|``, ``mu >= 0``;
    - ``("quad", alpha)`` — the derivative of ``alpha |x|^2 / 2``, ``alpha >= 0``;
    - ``("interval", lo, hi)`` — the normal-cone relation of the real
      interval ``[lo, hi]`` (endpoints may be infinite);
    - ``("zero",)`` — the zero map.

    The space weight must be diagonal with positive real entries (the
    pieces are coordinatewise, and only then is the product monotone in
    the weighted inner product for free).
    """

    representation = "SeparableProx"

    def __init__(self, space: InnerProductSpace, pieces: Sequence[tuple]):
        w = space.weight
        if not np.allclose(w, np.diag(np.diag(w).real), atol=1e-13 * max(1.0, np.linalg.norm(w))):
            raise ValueError("SeparableProx requires a real positive diagonal weight")
        pieces = tuple(tuple(p) for p in pieces)
        if len(pieces) != space.dim:
            raise ValueError(f"need {space.dim} pieces, got {len(pieces)}")
        for p in pieces:
            _validate_piece(p)
        self.space = space
        self.pieces = pieces

    def prox(self, lam: float, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=complex).reshape(-1)
        return np.array([_prox_piece(p, lam, vk) for p, vk in zip(self.pieces, v)])

    def _resolve(self, lam, y, tol, max_iter, x0):
        x = self.prox(lam, y)
        return x, (y - x) / lam


def _validate_piece(p: tuple):
    kind = p[0]
    if kind == "abs":
        if len(p) != 2 or not (float(p[1]) >= 0.0):
            raise ValueError(f"abs piece needs a nonnegative scale, got {p!r}")
    elif kind == "quad":
        if len(p) != 2 or not (float(p[1]) >= 0.0):
            raise ValueError(f"quad piece needs a nonnegative curvature, got {p!r}")
    elif kind == "interval":
        if len(p) != 3 or not (float(p[1]) <= float(p[2])):
            raise ValueError(f"interval piece needs lo <= hi, got {p!r}")
    elif kind == "zero":
        if len(p) != 1:
            raise ValueError(f"zero piece takes no parameters, got {p!r}")
    else:
        raise ValueError(f"unknown piece kind {kind!r}")


def _prox_piece(p: tuple, lam: float, v: complex) -> complex:
    kind = p[0]
    if kind == "abs":
        t = lam * p[1]
        av = abs(v)
        return 0.0 if av <= t else v * (1.0 - t / av)
    if kind == "quad":
        return v / (1.0 + lam * p[1])
    if kind == "interval":
        return complex(min(max(v.real, p[1]), p[2]))
    return v  # zero


def _postset_piece(p: tuple, x: complex):
    """Post-set of one piece at ``x``: (lo, hi) singleton/interval or None."""
    kind = p[0]
    atol = 1e-12
    if kind == "abs":
        mu = p[1]
        if abs(x) <= atol:
            return (-mu, mu)
        v = mu * x / abs(x)
        return (v, v)
    if kind == "quad":
        v = p[1] * x
        return (v, v)
    if kind == "interval":
        lo, hi = p[1], p[2]
        if abs(x.imag) > atol * max(1.0, abs(x)):
            return None
        t = x.real
        if t < lo - atol or t > hi + atol:
            return None
        at_lo = abs(t - lo) <= atol * max(1.0, abs(lo))
        at_hi = abs(t - hi) <= atol * max(1.0, abs(hi))
        if at_lo and at_hi:
            return (-np.inf, np.inf)
        if at_lo:
            return (-np.inf, 0.0)
        if at_hi:
            return (0.0, np.inf)
        return (0.0, 0.0)
    return (0.0, 0.0)  # zero


def _inverse_postset_piece(p: tuple, w: complex):
    """Post-set of the INVERSE of one piece at ``w``."""
    kind = p[0]
    atol = 1e-12
    if kind == "abs":
        mu = p[1]
        if mu == 0.0:
            return (-np.inf, np.inf) if abs(w) <= atol else None
        if abs(w) < mu - atol * max(1.0, mu):
            return (0.0, 0.0)
        if abs(w) > mu + atol * max(1.0, mu):
            return None
        # |w| == mu: the post-set is the ray along w
        if abs(w.imag) > atol * max(1.0, abs(w)):
            raise ValueError(
                "inverse post-set on the boundary circle is a ray; only the "
                "real section is representable as an interval"
            )
        return (0.0, np.inf) if w.real > 0 else (-np.inf, 0.0)
    if kind == "quad":
        alpha = p[1]
        if alpha == 0.0:
            return (-np.inf, np.inf) if abs(w) <= atol else None
        v = w / alpha
        return (v, v)
    if kind == "interval":
        if abs(w.imag) > atol * max(1.0, abs(w)):
            return None
        lo, hi = p[1], p[2]
        if w.real > atol:
            return None if not np.isfinite(hi) else (hi, hi)
        if w.real < -atol:
            return None if not np.isfinite(lo) else (lo, lo)
        return (lo, hi)
    # zero map: inverse at 0 is everything, else empty
    return (-np.inf, np.inf) if abs(w) <= atol else None


class Shifted(Relation):
    """Graph translation ``base + {(x0, y0)}``."""

    representation = "Shifted"

    def __init__(self, base: Relation, x0, y0):
        self.base = base
        self.space = base.space
        self.x0 = base.space.check_vector(x0)
        self.y0 = base.space.check_vector(y0)

    def _resolve(self, lam, y, tol, max_iter, x0):
        warm = None if x0 is None else np.asarray(x0) - self.x0
        xb, yb = self.base._resolve(lam, y - self.x0 - lam * self.y0, tol, max_iter, warm)
        return self.x0 + xb, self.y0 + yb


class DirectSum(Relation):
    """Block relation on the orthogonal sum of the component spaces."""

    representation = "DirectSum"

    def __init__(self, parts: Sequence[Relation]):
        parts = tuple(parts)
        if not parts:
            raise ValueError("direct sum needs at least one part")
        self.parts = parts
        dims = [p.space.dim for p in parts]
        offsets = np.concatenate([[0], np.cumsum(dims)])
        self.slices = tuple(slice(int(a), int(b)) for a, b in zip(offsets[:-1], offsets[1:]))
        weight = sla.block_diag(*[p.space.weight for p in parts])
        self.space = InnerProductSpace(int(offsets[-1]), weight)

    def split(self, v: np.ndarray):
        v = self.space.check_vector(v)
        return [v[s] for s in self.slices]

    def _resolve(self, lam, y, tol, max_iter, x0):
        ys = self.split(y)
        x0s = [None] * len(self.parts) if x0 is None else self.split(x0)
        xs, ws = [], []
        for part, yk, x0k in zip(self.parts, ys, x0s):
            xk, wk = part._resolve(lam, yk, tol, max_iter, x0k)
            xs.append(xk)
            ws.append(wk)
        return np.concatenate(xs), np.concatenate(ws)


class Transformed(Relation):
    """The congruence ``T* B T = {(x, T* w) : (T x, w) in B}``.

    Constructed through :func:`transform`; linear ``B`` never reaches
    this class (its congruence is computed exactly as a ``LinearGraph``).
    """

    representation = "Transformed"

    # continuation schedule for the non-invertible-T resolvent path
    _MU_SCHEDULE = tuple(10.0 ** -k for k in range(1, 9))

    def __init__(self, tmap: LinearMap, base: Relation):
        if not isinstance(tmap, LinearMap):
            raise TypeError("transform expects a LinearMap")
        if tmap.target.dim != base.space.dim:
            raise ValueError("map target must match the wrapped relation's space")
        self.tmap = tmap
        self.base = base
        self.space = tmap.source
        self.adj_matrix = _map_adjoint(tmap).matrix
        m = tmap.matrix
        self._square = m.shape[0] == m.shape[1]
        self._invertible = False
        if self._square:
            cond = np.linalg.cond(m)
            self._invertible = bool(np.isfinite(cond) and cond < 1e12)

    def _resolve(self, lam, y, tol, max_iter, x0):
        t = self.tmap.matrix
        ts = self.adj_matrix
        if self._invertible:
            # substitute z = T x: (T T*)^{-1} z / lam + B(z) = T*^{-1} y / lam
            tts = t @ ts
            phi = np.linalg.solve(tts, np.eye(tts.shape[0])) / lam
            g = np.linalg.solve(ts, y) / lam
            z0 = None if x0 is None else t @ np.asarray(x0)
            z, w = solve_inclusion(phi, self.base, g, tol=tol, max_iter=max_iter, x0=z0)
            return np.linalg.solve(t, z), ts @ w
        # continuation in the regularization parameter with warm starts:
        # solve x + lam T* B_mu(T x) = y for decreasing mu, accepting when
        # the wrapped graph's residual mu * |B_mu(Tx)| is small enough
        space = self.space
        scale = max(1.0, float(np.linalg.norm(y)))
        x = np.array(y, dtype=complex) if x0 is None else np.asarray(x0, dtype=complex)
        last = np.inf
        for mu in self._MU_SCHEDULE:
            def fmu(v, _mu=mu):
                jz, _ = self.base._resolve(_mu, t @ v, tol, max_iter, None)
                return ts @ ((t @ v - jz) / _mu)

            fm = MonotoneMap(space, fmu)
            x = fm._solve_perturbed(np.eye(space.dim) / lam, y / lam, tol, max_iter, x)
            jz, w = self.base._resolve(mu, t @ x, tol, max_iter, None)
            last = float(self.base.space.norm(t @ x - jz))
            if last <= tol * scale:
                return x, ts @ w
        raise NonconvergenceError(
            f"continuation exhausted its schedule (graph residual {last:.3e})",
            residual=last,
        )


class Weighted(Relation):
    """Reweighted relation ``{(x, y) : (P x, y) in base}`` on the space
    whose inner product is ``<x|y>_P = <P x|y>``.

    ``P`` must be selfadjoint and positive definite with respect to the
    base space's inner product.
    """

    representation = "Weighted"

    def __init__(self, base: Relation, p):
        w = base.space.weight
        p = np.atleast_2d(np.asarray(p, dtype=complex))
        if p.shape != (base.space.dim,) * 2:
            raise ValueError("weight matrix must be square of the space dimension")
        dev = np.linalg.norm(p.conj().T @ w - w @ p)
        if dev > 1e-12 * max(1.0, np.linalg.norm(w @ p)):
            raise ValueError("P must be selfadjoint in the base space")
        self.base = base
        self.p = p
        # the InnerProductSpace constructor is the positivity check
        self.space = InnerProductSpace(base.space.dim, p.conj().T @ w)

    def _resolve(self, lam, y, tol, max_iter, x0):
        # x + lam A_P(x) = y  <=>  P^{-1} z / lam + A(z) = y / lam,  z = P x
        pinv = np.linalg.solve(self.p, np.eye(self.p.shape[0]))
        z0 = None if x0 is None else self.p @ np.asarray(x0)
        z, w = solve_inclusion(pinv / lam, self.base, y / lam, tol=tol,
                               max_iter=max_iter, x0=z0)
        return pinv @ z, w


class InverseRelation(Relation):
    """Lazy inverse ``{(y, x) : (x, y) in base}`` for representations
    without a direct swapped form."""

    representation = "InverseRelation"

    def __init__(self, base: Relation):
        self.base = base
        self.space = base.space

    def _resolve(self, lam, y, tol, max_iter, x0):
        # (1 + lam A^{-1})^{-1}(y) = y - lam (1 + A / lam)^{-1}(y / lam)
        u, _ = self.base._resolve(1.0 / lam, y / lam, tol, max_iter, None)
        return y - lam * u, u


# ---------------------------------------------------------------------------
# the inclusion-solver primitive
# ---------------------------------------------------------------------------


def solve_inclusion(phi: np.ndarray, rel: Relation, g: np.ndarray, tol: Optional[float] = None,
                    max_iter: int = MAX_ITER, x0=None):
    """Solve ``phi z + rel(z) ∋ g`` for a Hermitian positive ``phi``.

    This is the primitive behind every resolvent in the module
    (``phi = I / lam`` recovers ``(1 + lam A)^{-1}`` at ``g = y / lam``)
    and behind the weighted/transformed wrappers, which contribute
    non-scalar ``phi``.

    Returns ``(z, w)`` with ``w in rel(z)`` (exactly, for closed-form
    representations; to the iteration tolerance otherwise) and
    ``phi z + w - g`` small.

    Dispatch: scalar ``phi`` reduces to the wrapped resolvent; linear
    graphs are solved directly; diagonal ``phi`` against coordinatewise
    pieces is solved per coordinate; block ``phi`` against a direct sum
    recurses; a single-valued map uses the damped/Newton solver; the
    general case runs Douglas–Rachford splitting between the affine part
    and the relation.
    """
    space = rel.space
    g = space.check_vector(g)
    phi = np.atleast_2d(np.asarray(phi, dtype=complex))
    d = space.dim
    if phi.shape != (d, d):
        raise ValueError(f"phi must be {d}x{d}")
    if tol is None:
        tol = TOL_ITERATIVE

    # scalar phi -> plain resolvent
    diag = np.diag(phi)
    scalar_dev = np.linalg.norm(phi - diag[0].real * np.eye(d))
    if scalar_dev <= 1e-14 * max(1.0, abs(diag[0])) and diag[0].real > 0:
        lam = 1.0 / diag[0].real
        z, w = rel._resolve(lam, lam * g, tol, max_iter, x0)
        return z, g - phi @ z

    if isinstance(rel, LinearGraph):
        c, res = _lstsq(phi @ rel.zx + rel.zy, g)
        scale = max(1.0, float(np.linalg.norm(g)))
        if res > max(tol, TOL_LINEAR) * scale:
            raise NonconvergenceError(
                f"linear inclusion system is inconsistent (residual {res:.3e})",
                residual=res,
            )
        return rel.zx @ c, rel.zy @ c

    if isinstance(rel, Shifted):
        z, w = solve_inclusion(phi, rel.base, g - phi @ rel.x0 - rel.y0,
                               tol=tol, max_iter=max_iter,
                               x0=None if x0 is None else np.asarray(x0) - rel.x0)
        return rel.x0 + z, rel.y0 + w

    offdiag = phi - np.diag(diag)
    if isinstance(rel, SeparableProx) and np.linalg.norm(offdiag) <= 1e-14 * max(1.0, np.linalg.norm(phi)) \
            and np.all(diag.real > 0) and np.allclose(diag.imag, 0.0, atol=1e-14):
        z = np.array([
            _prox_piece(p, 1.0 / dk.real, gk / dk.real)
            for p, dk, gk in zip(rel.pieces, diag, g)
        ])
        return z, g - phi @ z

    if isinstance(rel, DirectSum):
        blocks_ok = all(
            np.linalg.norm(phi[s1, s2]) <= 1e-14 * max(1.0, np.linalg.norm(phi))
            for i, s1 in enumerate(rel.slices)
            for j, s2 in enumerate(rel.slices)
            if i != j
        )
        if blocks_ok:
            zs, ws = [], []
            x0s = [None] * len(rel.parts) if x0 is None else rel.split(x0)
            for part, s, x0k in zip(rel.parts, rel.slices, x0s):
                zk, wk = solve_inclusion(phi[s, s], part, g[s], tol=tol,
                                         max_iter=max_iter, x0=x0k)
                zs.append(zk)
                ws.append(wk)
            return np.concatenate(zs), np.concatenate(ws)

    if isinstance(rel, MonotoneMap):
        z = rel._solve_perturbed(phi, g, tol, max_iter, x0)
        return z, g - phi @ z

    return _douglas_rachford(phi, rel, g, tol, max_iter, x0)


def _douglas_rachford(phi, rel, g, tol, max_iter, x0):
    """Splitting between the affine part ``z -> phi z - g`` and ``rel``."""
    space = rel.space
    d = space.dim
    w2 = space.weight
    # eigenvalue range of phi in the weighted sense sets the step length
    try:
        eigs = sla.eigvalsh(w2 @ phi, w2).real
        m, big = float(eigs.min()), float(eigs.max())
        gamma = 1.0 / np.sqrt(m * big) if m > 0 else 1.0
    except sla.LinAlgError:
        gamma = 1.0
    lu = sla.lu_factor(np.eye(d) + gamma * phi)
    scale = max(1.0, float(np.linalg.norm(g)))

    if x0 is not None:
        z0 = np.asarray(x0, dtype=complex)
        s = z0 - gamma * (g - phi @ z0)
    else:
        s = np.zeros(d, dtype=complex)

    best = None
    for _ in range(max_iter):
        z1 = sla.lu_solve(lu, s + gamma * g)
        z2, w2val = rel._resolve(gamma, 2.0 * z1 - s, tol, max_iter, None)
        res = float(space.norm(phi @ z2 + w2val - g))
        if best is None or res < best[0]:
            best = (res, z2, w2val)
        if res <= tol * scale:
            return z2, w2val
        s = s + z2 - z1
    raise NonconvergenceError(
        f"splitting iteration did not reach tol={tol:.1e} in {max_iter} steps "
        f"(best residual {best[0]:.3e})",
        residual=best[0],
    )


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def resolvent(rel: Relation, lam: float, y, tol: Optional[float] = None,
              max_iter: int = MAX_ITER, x0=None) -> np.ndarray:
    """Evaluate ``x = (1 + lam A)^{-1} y``: the unique ``x`` with
    ``(x, (y - x)/lam)`` in the relation.

    ``lam`` must be positive.  Nonconvergence raises
    :class:`NonconvergenceError` carrying the last residual.
    """
    x, _ = resolvent_value(rel, lam, y, tol=tol, max_iter=max_iter, x0=x0)
    return x


def resolvent_value(rel: Relation, lam: float, y, tol: Optional[float] = None,
                    max_iter: int = MAX_ITER, x0=None):
    """Like :func:`resolvent` but returns the graph pair ``(x, w)`` with
    ``w`` the relation value at ``x`` (so ``x + lam w = y`` up to tol)."""
    if not lam > 0:
        raise ValueError("resolvent parameter must be positive")
    y = rel.space.check_vector(y)
    if tol is None:
        tol = TOL_LINEAR if _is_direct(rel) else TOL_ITERATIVE
    return rel._resolve(float(lam), y, tol, int(max_iter), x0)


def _is_direct(rel: Relation) -> bool:
    if isinstance(rel, (LinearGraph, SeparableProx)):
        return True
    if isinstance(rel, (Shifted, InverseRelation)):
        return _is_direct(rel.base)
    if isinstance(rel, DirectSum):
        return all(_is_direct(p) for p in rel.parts)
    return False


def yosida(rel: Relation, lam: float, x, tol: Optional[float] = None,
           max_iter: int = MAX_ITER) -> np.ndarray:
    """The single-valued regularization ``lam^{-1} (x - (1 + lam A)^{-1} x)``."""
    jx = resolvent(rel, lam, x, tol=tol, max_iter=max_iter)
    return (np.asarray(x, dtype=complex) - jx) / lam


def post_set(rel: Relation, x) -> object:
    """Describe ``A[{x}] = {y : (x, y) in A}``.

    Returns an :class:`AffineSet` for linear graphs, a :class:`PointSet`
    for single-valued maps, an :class:`IntervalProduct` for
    coordinatewise pieces, or :data:`EMPTY`.  Interval descriptions are
    real sections: at a kink of the complex modulus the full post-set is
    a disk, of which the interval is the real slice.
    """
    if isinstance(rel, LinearGraph):
        x = rel.space.check_vector(x)
        c, res = _lstsq(rel.zx, x)
        if res > 1e-10 * max(1.0, float(np.linalg.norm(x))):
            return EMPTY
        base = rel.zy @ c
        null = _nullspace(rel.zx)
        dirs = _orthonormal_columns(rel.zy @ null) if null.shape[1] else np.zeros((rel.space.dim, 0), dtype=complex)
        return AffineSet(base=base, directions=dirs)
    if isinstance(rel, MonotoneMap):
        return PointSet(points=(rel(x),))
    if isinstance(rel, SeparableProx):
        x = rel.space.check_vector(x)
        los, his = [], []
        for p, xk in zip(rel.pieces, x):
            got = _postset_piece(p, xk)
            if got is None:
                return EMPTY
            los.append(got[0])
            his.append(got[1])
        return IntervalProduct(lo=np.asarray(los, dtype=complex), hi=np.asarray(his, dtype=complex))
    if isinstance(rel, InverseRelation) and isinstance(rel.base, SeparableProx):
        x = rel.space.check_vector(x)
        los, his = [], []
        for p, wk in zip(rel.base.pieces, x):
            got = _inverse_postset_piece(p, wk)
            if got is None:
                return EMPTY
            los.append(got[0])
            his.append(got[1])
        return IntervalProduct(lo=np.asarray(los, dtype=complex), hi=np.asarray(his, dtype=complex))
    if isinstance(rel, Shifted):
        inner_desc = post_set(rel.base, np.asarray(x, dtype=complex) - rel.x0)
        return _shift_description(inner_desc, rel.y0)
    raise ValueError(f"post-set enumeration is not supported for representation {rel.representation!r}")


def _shift_description(desc, y0):
    if desc is EMPTY:
        return EMPTY
    if isinstance(desc, AffineSet):
        return AffineSet(base=desc.base + y0, directions=desc.directions)
    if isinstance(desc, PointSet):
        return PointSet(points=tuple(p + y0 for p in desc.points))
    if isinstance(desc, IntervalProduct):
        # only exact singletons can absorb a complex shift; interval pieces
        # shift along the real axis
        return IntervalProduct(lo=desc.lo + y0, hi=desc.hi + y0)
    raise TypeError(f"unknown description {type(desc).__name__}")


def principal_section(rel: Relation, x) -> np.ndarray:
    """Least-norm element of the post-set at ``x`` in the weighted norm.

    Errors on an empty post-set, and on unbounded interval descriptions
    (those occur at boundary-of-domain points, where no finite section is
    certified).
    """
    desc = post_set(rel, x)
    space = rel.space
    if desc is EMPTY:
        raise ValueError("empty post-set: the point is outside the relation's domain")
    if isinstance(desc, PointSet):
        norms = [space.norm(p) for p in desc.points]
        return np.asarray(desc.points[int(np.argmin(norms))], dtype=complex)
    if isinstance(desc, AffineSet):
        if desc.is_point:
            return desc.base
        lh = space._chol.conj().T
        t, _ = _lstsq(lh @ desc.directions, -(lh @ desc.base))
        return desc.base + desc.directions @ t
    if isinstance(desc, IntervalProduct):
        if not desc.is_bounded():
            raise ValueError(
                "post-set is unbounded (boundary-of-domain point): "
                "no principal section is defined here"
            )
        out = np.empty(space.dim, dtype=complex)
        for k in range(space.dim):
            lo, hi = desc.lo[k], desc.hi[k]
            if lo == hi:
                out[k] = lo
            else:
                out[k] = complex(min(max(0.0, lo.real), hi.real))
        return out
    raise TypeError(f"unknown description {type(desc).__name__}")


def inverse(rel: Relation) -> Relation:
    """The inverse relation ``{(y, x) : (x, y) in A}``."""
    if isinstance(rel, LinearGraph):
        return LinearGraph(rel.space, rel.zy, rel.zx)
    if isinstance(rel, Shifted):
        return Shifted(inverse(rel.base), rel.y0, rel.x0)
    if isinstance(rel, DirectSum):
        return DirectSum([inverse(p) for p in rel.parts])
    if isinstance(rel, InverseRelation):
        return rel.base
    return InverseRelation(rel)


def adjoint_relation(rel: Relation) -> Relation:
    """For a linear relation: the orthogonal complement of
    ``{(-y, x) : (x, y) in A}`` in the weighted pair inner product.

    With identity weights this sends the graph of a matrix ``M`` to the
    graph of ``M^H``.
    """
    if not isinstance(rel, LinearGraph):
        raise ValueError(
            f"adjoint requires a linear relation, got {rel.representation!r}"
        )
    d = rel.space.dim
    w2 = sla.block_diag(rel.space.weight, rel.space.weight)
    flipped = np.vstack([-rel.zy, rel.zx])
    comp = _nullspace(flipped.conj().T @ w2)
    return LinearGraph(rel.space, comp[:d], comp[d:])


def scale_add(lam: complex, rel_a: Relation, rel_b: Relation) -> Relation:
    """The combination ``lam A + B = {(x, lam y + z) : (x,y) in A, (x,z) in B}``
    on the intersection of the domains.

    Supported pairings: two linear graphs (solved by intersecting the
    domain parametrizations) or two single-valued maps.
    """
    if rel_a.space.dim != rel_b.space.dim:
        raise ValueError("relations must live on the same space")
    if isinstance(rel_a, LinearGraph) and isinstance(rel_b, LinearGraph):
        null = _nullspace(np.hstack([rel_a.zx, -rel_b.zx]))
        ka = rel_a.graph_dim
        a_part, b_part = null[:ka], null[ka:]
        zx = rel_a.zx @ a_part
        zy = lam * (rel_a.zy @ a_part) + rel_b.zy @ b_part
        return LinearGraph(rel_a.space, zx, zy)
    if isinstance(rel_a, MonotoneMap) and isinstance(rel_b, MonotoneMap):
        lip = None
        if rel_a.lipschitz is not None and rel_b.lipschitz is not None:
            lip = abs(lam) * rel_a.lipschitz + rel_b.lipschitz
        return MonotoneMap(rel_a.space,
                           lambda v: lam * rel_a(v) + rel_b(v),
                           lipschitz=lip)
    raise ValueError(
        "scale_add supports two linear graphs or two single-valued maps, got "
        f"{rel_a.representation!r} and {rel_b.representation!r}"
    )


def direct_sum(relations: Sequence[Relation]) -> DirectSum:
    """Block relation of the parts on the orthogonal sum space."""
    return DirectSum(relations)


def transform(tmap, rel: Relation) -> Relation:
    """The congruence ``T* B T = {(x, T* w) : (T x, w) in B}``.

    For a (possibly shifted) linear graph the result is computed exactly
    as a new ``LinearGraph`` (the domain condition ``T x in dom B`` is
    pulled back by a null-space computation; a shifted graph whose
    translated domain misses the range of ``T`` is empty, which is an
    error).  Other representations are wrapped lazily; their resolvent
    uses an exact substitution when ``T`` is square and well conditioned
    and a regularized continuation otherwise.
    """
    if not isinstance(tmap, LinearMap):
        raise TypeError("transform expects a LinearMap")
    if tmap.target.dim != rel.space.dim:
        raise ValueError("map target must match the relation's space")
    if isinstance(rel, LinearGraph):
        null = _nullspace(np.hstack([tmap.matrix, -rel.zx]))
        dx = tmap.source.dim
        x_part, c_part = null[:dx], null[dx:]
        adj = _map_adjoint(tmap).matrix
        return LinearGraph(tmap.source, x_part, adj @ (rel.zy @ c_part))
    if isinstance(rel, Shifted) and isinstance(rel.base, LinearGraph):
        # solve T x - x0 = Zx c: particular solution + homogeneous family
        base = rel.base
        dx = tmap.source.dim
        sys = np.hstack([tmap.matrix, -base.zx])
        part, res = _lstsq(sys, rel.x0)
        if res > 1e-10 * max(1.0, float(np.linalg.norm(rel.x0))):
            raise ValueError(
                "transform produced an empty relation: the map's range "
                "misses the (translated) domain"
            )
        null = _nullspace(sys)
        adj = _map_adjoint(tmap).matrix
        lin = LinearGraph(tmap.source, null[:dx], adj @ (base.zy @ null[dx:]))
        return Shifted(lin, part[:dx], adj @ (rel.y0 + base.zy @ part[dx:]))
    return Transformed(tmap, rel)


# ---------------------------------------------------------------------------
# graph sampling and residuals
# ---------------------------------------------------------------------------


def sample_graph_points(rel: Relation, count: int, rng: np.random.Generator,
                        scale: float = 1.0):
    """Draw ``count`` members ``(x, y)`` of the relation.

    Linear graphs take random combinations of the basis; single-valued
    maps evaluate at random points; coordinatewise pieces generate pairs
    through their proximal identity; combinators recurse.
    """
    out = []
    for _ in range(count):
        out.append(_sample_one(rel, rng, scale))
    return out


def _sample_one(rel: Relation, rng, scale):
    if isinstance(rel, LinearGraph):
        c = _random_vector(rng, rel.graph_dim, scale)
        return rel.zx @ c, rel.zy @ c
    if isinstance(rel, MonotoneMap):
        x = _random_vector(rng, rel.space.dim, scale)
        return x, rel(x)
    if isinstance(rel, SeparableProx):
        r = _random_vector(rng, rel.space.dim, scale)
        x = rel.prox(1.0, r)
        return x, r - x
    if isinstance(rel, Shifted):
        x, y = _sample_one(rel.base, rng, scale)
        return x + rel.x0, y + rel.y0
    if isinstance(rel, DirectSum):
        pairs = [_sample_one(p, rng, scale) for p in rel.parts]
        return (np.concatenate([p[0] for p in pairs]),
                np.concatenate([p[1] for p in pairs]))
    if isinstance(rel, InverseRelation):
        x, y = _sample_one(rel.base, rng, scale)
        return y, x
    if isinstance(rel, Weighted):
        z, y = _sample_one(rel.base, rng, scale)
        return np.linalg.solve(rel.p, z), y
    if isinstance(rel, Transformed) and rel._invertible:
        z, w = _sample_one(rel.base, rng, scale)
        return np.linalg.solve(rel.tmap.matrix, z), rel.adj_matrix @ w
    raise ValueError(f"cannot sample graph points of {rel.representation!r}")


def graph_residual(rel: Relation, x, y) -> float:
    """A residual that vanishes exactly when ``(x, y)`` belongs to the
    relation, and is comparable to the distance from the graph.

    Linear graphs measure the orthogonal distance to the graph subspace;
    coordinatewise pieces use the proximal identity ``x = prox(x + y)``;
    single-valued maps compare ``y`` against the evaluator.
    """
    space = rel.space
    x = space.check_vector(x)
    y = space.check_vector(y)
    if isinstance(rel, LinearGraph):
        z = rel.stacked
        w2 = sla.block_diag(space.weight, space.weight)
        p = np.concatenate([x, y])
        gram = z.conj().T @ w2 @ z
        c = np.linalg.solve(gram, z.conj().T @ (w2 @ p))
        r = p - z @ c
        return float(np.sqrt(abs(r.conj() @ (w2 @ r))))
    if isinstance(rel, SeparableProx):
        # the proximal identity: (x, y) is in the graph iff x = prox_1(x + y)
        xp = rel.prox(1.0, x + y)
        return float(np.sqrt(2.0) * space.norm(x - xp))
    if isinstance(rel, MonotoneMap):
        return float(space.norm(y - rel(x)))
    if isinstance(rel, Shifted):
        return graph_residual(rel.base, x - rel.x0, y - rel.y0)
    if isinstance(rel, DirectSum):
        xs, ys = rel.split(x), rel.split(y)
        return float(np.sqrt(sum(graph_residual(p, xk, yk) ** 2
                                 for p, xk, yk in zip(rel.parts, xs, ys))))
    if isinstance(rel, InverseRelation):
        return graph_residual(rel.base, y, x)
    if isinstance(rel, Weighted):
        return graph_residual(rel.base, rel.p @ x, y)
    if isinstance(rel, Transformed) and rel._invertible:
        t = rel.tmap.matrix
        return graph_residual(rel.base, t @ x, np.linalg.solve(rel.adj_matrix, y))
    raise ValueError(f"no graph residual available for {rel.representation!r}")


# ---------------------------------------------------------------------------
# certification
# ---------------------------------------------------------------------------


def check_monotone(rel: Relation, trials: int = 200, seed: int = 0) -> Certificate:
    """Certify ``Re<u - x | v - y> >= 0`` over the relation.

    Exact for linear graphs (smallest eigenvalue of the symmetrized
    pairing restricted to the graph subspace), for coordinatewise convex
    pieces (subdifferentials by construction) and, componentwise, for
    combinators of those; sampled falsification otherwise.  A ``"no"``
    carries the violating pair of graph points.
    """
    return _monotone_dispatch(rel, trials, seed)


def _monotone_dispatch(rel, trials, seed) -> Certificate:
    if isinstance(rel, LinearGraph):
        return _monotone_linear(rel)
    if isinstance(rel, SeparableProx):
        return Certificate(monotone="yes", method="closed-form: coordinatewise convex pieces")
    if isinstance(rel, Shifted):
        cert = _monotone_dispatch(rel.base, trials, seed)
        return _lift_certificate(cert, "translation-invariant: " + cert.method,
                                 lambda pair: (pair[0] + rel.x0, pair[1] + rel.y0))
    if isinstance(rel, DirectSum):
        worst = None
        for idx, part in enumerate(rel.parts):
            cert = _monotone_dispatch(part, trials, seed + idx)
            if cert.monotone == "no":
                return _embed_sum_witness(rel, idx, cert)
            if cert.monotone == "unknown":
                worst = cert
        if worst is not None:
            return Certificate(monotone="unknown", method="componentwise: " + worst.method)
        return Certificate(monotone="yes", method="componentwise over direct summands")
    if isinstance(rel, InverseRelation):
        cert = _monotone_dispatch(rel.base, trials, seed)
        return _lift_certificate(cert, "inverse-invariant: " + cert.method,
                                 lambda pair: (pair[1], pair[0]))
    if isinstance(rel, Weighted):
        cert = _monotone_dispatch(rel.base, trials, seed)
        pinv = np.linalg.solve(rel.p, np.eye(rel.p.shape[0]))
        return _lift_certificate(cert, "weight-invariant: " + cert.method,
                                 lambda pair: (pinv @ pair[0], pair[1]))
    if isinstance(rel, Transformed):
        cert = _monotone_dispatch(rel.base, trials, seed)
        if cert.monotone == "yes":
            return Certificate(monotone="yes",
                               method="congruence preserves monotonicity: " + cert.method)
        return _monotone_sampled(rel, trials, seed)
    return _monotone_sampled(rel, trials, seed)


def _lift_certificate(cert: Certificate, method: str, pair_map) -> Certificate:
    out = Certificate(monotone=cert.monotone, method=method)
    if cert.witness is not None and "pair_a" in cert.witness:
        out.witness = {
            "pair_a": pair_map(cert.witness["pair_a"]),
            "pair_b": pair_map(cert.witness["pair_b"]),
            "value": cert.witness["value"],
        }
    else:
        out.witness = cert.witness
    return out


def _embed_sum_witness(rel: DirectSum, idx: int, cert: Certificate) -> Certificate:
    def embed(vec, k):
        out = np.zeros(rel.space.dim, dtype=complex)
        out[rel.slices[k]] = vec
        return out

    wa = cert.witness["pair_a"]
    wb = cert.witness["pair_b"]
    return Certificate(
        monotone="no",
        method=f"componentwise (summand {idx}): {cert.method}",
        witness={
            "pair_a": (embed(wa[0], idx), embed(wa[1], idx)),
            "pair_b": (embed(wb[0], idx), embed(wb[1], idx)),
            "value": cert.witness["value"],
        },
    )


def _monotone_linear(rel: LinearGraph) -> Certificate:
    w = rel.space.weight
    b = rel.zx.conj().T @ (w @ rel.zy)
    m = 0.5 * (b + b.conj().T)
    if m.shape[0] == 0:
        return Certificate(monotone="yes", method="exact: empty graph basis")
    vals, vecs = sla.eigh(m)
    scale = max(1.0, float(np.linalg.norm(m)))
    if vals[0] >= -1e-10 * scale:
        return Certificate(monotone="yes",
                           method="exact: eigenvalues of the symmetrized graph pairing",
                           witness={"min_eigenvalue": float(vals[0])})
    c = vecs[:, 0]
    pair = (rel.zx @ c, rel.zy @ c)
    zero = np.zeros(rel.space.dim, dtype=complex)
    value = float(np.real(pair[0].conj() @ (w @ pair[1])))
    return Certificate(
        monotone="no",
        method="exact: eigenvalues of the symmetrized graph pairing",
        witness={"pair_a": pair, "pair_b": (zero, zero), "value": value},
    )


def _monotone_sampled(rel: Relation, trials: int, seed: int) -> Certificate:
    rng = np.random.default_rng(seed)
    w = rel.space.weight
    try:
        pairs = sample_graph_points(rel, 2 * trials, rng)
    except (ValueError, NonconvergenceError) as exc:
        return Certificate(monotone="unknown", method=f"sampling unavailable ({exc})")
    worst = np.inf
    for (x1, y1), (x2, y2) in zip(pairs[::2], pairs[1::2]):
        dx, dy = x1 - x2, y1 - y2
        v = float(np.real(dx.conj() @ (w @ dy)))
        ref = max(1.0, float(np.linalg.norm(dx)) * float(np.linalg.norm(dy)))
        worst = min(worst, v / ref)
        if v < -1e-10 * ref:
            return Certificate(
                monotone="no",
                method=f"sampled: violating pair among {trials} random graph pairs",
                witness={"pair_a": (x1, y1), "pair_b": (x2, y2), "value": v},
            )
    return Certificate(monotone="yes",
                       method=f"sampled: {trials} random graph pairs",
                       witness={"worst_normalized_pairing": worst})


def check_maximal(rel: Relation, trials: int = 50, seed: int = 0,
                  force_sampled: bool = False) -> Certificate:
    """Certify maximal monotonicity.

    Monotonicity is certified first; a failure there is decisive and its
    witness is returned.  On the maximality side, linear graphs get the
    exact surjectivity test (the forward-plus-backward block of the graph
    basis must have full rank), combinators recurse, and everything else
    is probed by resolvent sampling at random right-hand sides — sampling
    can return ``"yes"`` (with the worst residual as evidence) or
    ``"unknown"``, never ``"no"``.
    """
    mono = check_monotone(rel, trials=trials, seed=seed)
    if mono.monotone == "no":
        return Certificate(monotone="no", maximal="no",
                           method="not monotone; " + mono.method,
                           witness=mono.witness)
    if mono.monotone == "unknown":
        return Certificate(monotone="unknown", maximal="unknown", method=mono.method)
    if force_sampled:
        cert = _maximal_sampled(rel, trials, seed)
    else:
        cert = _maximal_dispatch(rel, trials, seed)
    cert.monotone = "yes"
    return cert


def _maximal_dispatch(rel, trials, seed) -> Certificate:
    if isinstance(rel, LinearGraph):
        return _maximal_linear(rel)
    if isinstance(rel, SeparableProx):
        return Certificate(maximal="yes",
                           method="closed-form: every coordinate piece has a full-domain proximal map")
    if isinstance(rel, Shifted):
        cert = _maximal_dispatch(rel.base, trials, seed)
        cert.method = "translation-invariant: " + cert.method
        if cert.witness is not None and "rhs" in cert.witness:
            cert.witness = dict(cert.witness, rhs=cert.witness["rhs"] + rel.x0 + rel.y0)
        return cert
    if isinstance(rel, DirectSum):
        for idx, part in enumerate(rel.parts):
            cert = _maximal_dispatch(part, trials, seed + idx)
            if cert.maximal == "no":
                rhs = np.zeros(rel.space.dim, dtype=complex)
                if cert.witness is not None and "rhs" in cert.witness:
                    rhs[rel.slices[idx]] = cert.witness["rhs"]
                return Certificate(maximal="no",
                                   method=f"componentwise (summand {idx}): {cert.method}",
                                   witness={"rhs": rhs})
            if cert.maximal == "unknown":
                return Certificate(maximal="unknown",
                                   method=f"componentwise (summand {idx}): {cert.method}")
        return Certificate(maximal="yes", method="componentwise over direct summands")
    if isinstance(rel, InverseRelation):
        cert = _maximal_dispatch(rel.base, trials, seed)
        cert.method = "inverse-invariant: " + cert.method
        return cert
    if isinstance(rel, Weighted):
        cert = _maximal_dispatch(rel.base, trials, seed)
        cert.method = "weight-invariant: " + cert.method
        return cert
    if isinstance(rel, Transformed) and rel._invertible:
        cert = _maximal_dispatch(rel.base, trials, seed)
        cert.method = "congruence by an invertible map: " + cert.method
        return cert
    return _maximal_sampled(rel, trials, seed)


def _maximal_linear(rel: LinearGraph) -> Certificate:
    d = rel.space.dim
    r = rel.zx + rel.zy
    if r.shape[1] == 0:
        u, s, _ = np.eye(d, dtype=complex), np.zeros(0), None
        rank = 0
    else:
        u, s, _ = np.linalg.svd(r)
        rank = int(np.sum(s > 1e-10 * max(1.0, s[0])))
    if rank == d:
        return Certificate(maximal="yes",
                           method="exact: forward-plus-backward block has full rank")
    witness_rhs = u[:, rank]  # orthogonal to the range: unreachable by 1 + A
    return Certificate(
        maximal="no",
        method="exact: forward-plus-backward block is rank deficient",
        witness={"rhs": witness_rhs, "rank": rank, "dim": d},
    )


def _maximal_sampled(rel: Relation, trials: int, seed: int) -> Certificate:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        y = _random_vector(rng, rel.space.dim)
        try:
            x, w = resolvent_value(rel, 1.0, y)
        except NonconvergenceError as exc:
            return Certificate(
                maximal="unknown",
                method=f"resolvent sampling: nonconvergence at a random right-hand side ({exc})",
                witness={"rhs": y, "residual": exc.residual},
            )
        try:
            res = graph_residual(rel, x, w)
        except ValueError:
            res = float(rel.space.norm(x + w - y))
        worst = max(worst, res)
    return Certificate(maximal="yes",
                       method=f"resolvent sampling at {trials} right-hand sides",
                       witness={"max_residual": worst})

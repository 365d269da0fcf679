"""Commuting contractive matrix tuples.

Holds the certified tuple type, the two classical von Neumann counterexamples
(Holbrook on C^4, Crabb-Davie on C^8), random generic (simultaneously
diagonalisable) tuples, multiplication tuples of discrete measures on the
torus, and the coordinate-wise scaling and tensor product operations.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .polyalg import (
    DimensionError,
    MultiIndex,
    SupportSet,
    complex_from_json,
    complex_to_json,
    matrix_from_json,
    matrix_to_json,
    multi_index,
)

COMMUTATOR_TOL = 1e-10
CONTRACTION_SLACK = 1e-12
UNIMODULAR_TOL = 1e-12


class NotCommutingError(ValueError):
    pass


class NotContractiveError(ValueError):
    pass


def _opnorm(A: np.ndarray) -> float:
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


@dataclass(frozen=True, eq=False)
class CommutingTuple:
    """``d`` commuting contractions on ``C^n`` with their certification data.

    Build through :func:`new_checked`, which computes ``commutator_bound`` and
    ``norm_bounds`` and enforces the tolerances.
    """

    matrices: tuple[np.ndarray, ...]
    commutator_bound: float
    norm_bounds: tuple[float, ...]

    @property
    def dim(self) -> int:
        return len(self.matrices)

    @property
    def size(self) -> int:
        return self.matrices[0].shape[0]

    def __getitem__(self, j: int) -> np.ndarray:
        return self.matrices[j]

    def power(self, alpha: Iterable[int]) -> np.ndarray:
        from .polyalg import tuple_power

        return tuple_power(self.matrices, multi_index(alpha, self.dim))


def commutator_bound(matrices: Sequence[np.ndarray]) -> float:
    bound = 0.0
    for i in range(len(matrices)):
        for j in range(i + 1, len(matrices)):
            A, B = matrices[i], matrices[j]
            bound = max(bound, _opnorm(A @ B - B @ A))
    return bound


def new_checked(matrices: Sequence[np.ndarray]) -> CommutingTuple:
    """Certify and wrap a list of commuting contractive square matrices."""
    mats = [np.array(M, dtype=complex) for M in matrices]
    if not mats:
        raise ValueError("a tuple needs at least one matrix")
    n = mats[0].shape[0]
    for M in mats:
        if M.ndim != 2 or M.shape != (n, n):
            raise ValueError(f"expected square {n}x{n} matrices, got shape {M.shape}")
    cb = commutator_bound(mats)
    if cb > COMMUTATOR_TOL:
        raise NotCommutingError(f"not commuting: commutator bound {cb:.3e} > {COMMUTATOR_TOL:g}")
    norms = tuple(_opnorm(M) for M in mats)
    for j, nj in enumerate(norms):
        if nj > 1 + CONTRACTION_SLACK:
            raise NotContractiveError(f"not contractive: ||T_{j + 1}|| = {nj!r}")
    for M in mats:
        M.setflags(write=False)
    return CommutingTuple(tuple(mats), cb, norms)


def _unit_bounded(v, name: str) -> np.ndarray:
    v = np.array(v, dtype=complex).reshape(-1)
    nv = float(np.linalg.norm(v))
    if nv > 1 + CONTRACTION_SLACK:
        raise ValueError(f"||{name}|| = {nv!r} exceeds 1")
    v.setflags(write=False)
    return v


@dataclass(frozen=True, eq=False)
class PairedTuple:
    """A commuting tuple together with marker vectors ``x`` and ``y`` of norm at most one."""

    tuple: CommutingTuple
    x: np.ndarray
    y: np.ndarray
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "x", _unit_bounded(self.x, "x"))
        object.__setattr__(self, "y", _unit_bounded(self.y, "y"))
        n = self.tuple.size
        if self.x.shape != (n,) or self.y.shape != (n,):
            raise DimensionError(f"marker vectors must have length {n}")

    @property
    def dim(self) -> int:
        return self.tuple.dim


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finite atomic complex measure ``sum_k w_k delta_{zeta_k}`` on the torus ``T^d``.

    Zero-weight atoms are dropped.
    """

    dim: int
    zetas: np.ndarray  # (K, d), unimodular entries
    weights: np.ndarray  # (K,)
    total_variation: float = field(init=False)

    def __post_init__(self):
        Z = np.array(self.zetas, dtype=complex).reshape(-1, self.dim)
        w = np.array(self.weights, dtype=complex).reshape(-1)
        if Z.shape[0] != w.shape[0]:
            raise ValueError("number of atoms and weights differ")
        if Z.size and np.max(np.abs(np.abs(Z) - 1)) > UNIMODULAR_TOL:
            raise ValueError("atoms must lie on the torus (|zeta_kj| = 1)")
        keep = w != 0
        Z, w = Z[keep], w[keep]
        Z.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "zetas", Z)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "total_variation", float(np.sum(np.abs(w))))

    @classmethod
    def point_mass(cls, zeta: Sequence[complex], weight: complex = 1.0) -> "DiscreteMeasure":
        zeta = np.asarray(zeta, dtype=complex)
        return cls(len(zeta), zeta[None, :], np.array([weight]))

    def __len__(self) -> int:
        return len(self.weights)

    def moment(self, alpha: Iterable[int]) -> complex:
        """``int w^alpha d mu = sum_k w_k zeta_k^alpha``."""
        alpha = np.array(multi_index(alpha, self.dim))
        if not len(self):
            return 0j
        return complex(np.sum(self.weights * np.prod(self.zetas ** alpha, axis=1)))


# -- explicit counterexamples ------------------------------------------------

def holbrook() -> PairedTuple:
    """Holbrook's commuting triple on ``C^4`` with basis ``(e, f, u1, u2)``.

    ``T_j = g_j e^* + f g_j^*`` where ``g_1, g_2, g_3`` are unit vectors in
    ``span{u1, u2}`` at mutual angles of 120 degrees; ``x = e``, ``y = f``.
    """
    s = np.sqrt(3) / 2
    gs = [np.array([0, 0, 1.0, 0]), np.array([0, 0, -0.5, s]), np.array([0, 0, -0.5, -s])]
    e = np.array([1.0, 0, 0, 0])
    f = np.array([0, 1.0, 0, 0])
    mats = [np.outer(g, e) + np.outer(f, g.conj()) for g in gs]
    return PairedTuple(new_checked(mats), e, f, name="holbrook")


def crabb_davie() -> PairedTuple:
    """A commuting triple of partial isometries on ``C^8`` realising the Crabb-Davie moments.

    Basis ``(e, f1, f2, f3, g1, g2, g3, h)``; ``T_i e = f_i``, ``T_i f_i = -g_i``,
    ``T_i f_j = g_k`` for ``{i, j, k} = {1, 2, 3}``, ``T_i g_i = h``, all other
    basis vectors go to zero. ``x = e``, ``y = h``.
    """
    E, F, G, H = 0, (1, 2, 3), (4, 5, 6), 7
    mats = []
    for i in range(3):
        T = np.zeros((8, 8))
        T[F[i], E] = 1
        for j in range(3):
            if j == i:
                T[G[i], F[i]] = -1
            else:
                k = 3 - i - j
                T[G[k], F[j]] = 1
        T[H, G[i]] = 1
        mats.append(T)
    basis = np.eye(8)
    return PairedTuple(new_checked(mats), basis[E], basis[H], name="crabb_davie")


NAMED_TUPLES = {"holbrook": holbrook, "crabb_davie": crabb_davie}


# -- random and derived tuples ----------------------------------------------

def _uniform_polydisk(rng: np.random.Generator, shape, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.random(shape))
    return r * np.exp(2j * np.pi * rng.random(shape))


def random_generic(
    d: int,
    n: int,
    radius: float = 1.0,
    cond_max: float = 1e3,
    seed: int = 0,
    max_retries: int = 100,
) -> CommutingTuple:
    """Random simultaneously diagonalisable tuple ``T_j = S diag(lambda_{.,j}) S^{-1}``.

    Joint eigenvalues are uniform in the polydisk of the given radius, the
    similarity ``S`` is a complex Gaussian matrix with condition number at
    most ``cond_max`` (rejection sampling), and every ``T_j`` is divided by
    ``max(1, ||T_j||)``. Deterministic in ``seed``.
    """
    if d < 1 or n < 1:
        raise ValueError("need d >= 1 and n >= 1")
    if not 0 < radius <= 1:
        raise ValueError("radius must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    for _ in range(max_retries):
        lam = _uniform_polydisk(rng, (n, d), radius)
        distinct = all(len(np.unique(lam[:, j])) == n for j in range(d))
        S = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        if distinct and np.linalg.cond(S) <= cond_max:
            break
    else:
        raise RuntimeError(f"no similarity with cond <= {cond_max:g} after {max_retries} draws")
    S_inv = np.linalg.inv(S)
    mats = []
    for j in range(d):
        T = (S * lam[:, j]) @ S_inv
        T = T / max(1.0, _opnorm(T))
        mats.append(T)
    return new_checked(mats)


def from_measure(mu: DiscreteMeasure) -> PairedTuple:
    """Multiplication tuple of a discrete measure.

    ``T_j = diag(zeta_{k,j})`` on ``C^K``, ``x_k = sqrt(|w_k|) w_k/|w_k|`` and
    ``y_k = sqrt(|w_k|)``, so that ``<T^alpha x, y> = int w^alpha d mu``.
    """
    if mu.total_variation > 1 + CONTRACTION_SLACK:
        raise ValueError(f"total variation {mu.total_variation!r} exceeds 1")
    if not len(mu):
        # the zero measure: any tuple with zero markers represents it
        return PairedTuple(new_checked([np.eye(1)] * mu.dim), [0.0], [0.0], name="measure")
    m = np.abs(mu.weights)
    phase = mu.weights / m
    mats = [np.diag(mu.zetas[:, j]) for j in range(mu.dim)]
    return PairedTuple(new_checked(mats), np.sqrt(m) * phase, np.sqrt(m), name="measure")


def tensor(T: CommutingTuple, S: CommutingTuple) -> CommutingTuple:
    """Coordinate-wise Kronecker product ``(T_1 (x) S_1, ..., T_d (x) S_d)``."""
    if T.dim != S.dim:
        raise DimensionError(f"tuple dimensions differ: {T.dim} vs {S.dim}")
    return new_checked([np.kron(A, B) for A, B in zip(T.matrices, S.matrices)])


def scale(T: CommutingTuple, z: Sequence[complex]) -> CommutingTuple:
    """``z . T = (z_1 T_1, ..., z_d T_d)`` for ``z`` in the closed polydisk."""
    z = np.asarray(z, dtype=complex).reshape(-1)
    if z.shape[0] != T.dim:
        raise DimensionError(f"scaling vector has length {z.shape[0]}, tuple has d={T.dim}")
    if np.any(np.abs(z) > 1 + CONTRACTION_SLACK):
        raise ValueError("scaling point must lie in the closed unit polydisk")
    return new_checked([zj * M for zj, M in zip(z, T.matrices)])


def moment_vectors(P: PairedTuple, alphas: Iterable[MultiIndex]) -> dict[MultiIndex, np.ndarray]:
    """``T^alpha x`` for every requested alpha via ``T^{alpha+e_j} x = T_j (T^alpha x)``."""
    T = P.tuple.matrices
    d = P.dim
    cache: dict[MultiIndex, np.ndarray] = {(0,) * d: P.x}
    for alpha in sorted(alphas, key=sum):
        stack = []
        a = alpha
        while a not in cache:
            j = max(i for i, ai in enumerate(a) if ai)
            stack.append(j)
            a = a[:j] + (a[j] - 1,) + a[j + 1:]
        v = cache[a]
        for j in reversed(stack):
            a = a[:j] + (a[j] + 1,) + a[j + 1:]
            v = T[j] @ v
            cache[a] = v
    return cache


def moments(P: PairedTuple, L: SupportSet | Iterable[Iterable[int]]) -> dict[MultiIndex, complex]:
    """``alpha -> <T^alpha x, y>`` on a finite support set."""
    if isinstance(L, SupportSet):
        if L.dim != P.dim:
            raise DimensionError(f"support set has d={L.dim}, tuple has d={P.dim}")
        if not L.is_finite:
            raise ValueError("moments requires a finite support set")
        alphas = list(L)
    else:
        alphas = [multi_index(a, P.dim) for a in L]
    vecs = moment_vectors(P, alphas)
    return {a: complex(np.vdot(P.y, vecs[a])) for a in alphas}


# -- JSON -------------------------------------------------------------------

def tuple_to_dict(T: CommutingTuple) -> dict:
    return {
        "d": T.dim,
        "n": T.size,
        "matrices": [matrix_to_json(M) for M in T.matrices],
        "commutator_bound": T.commutator_bound,
        "norm_bounds": list(T.norm_bounds),
    }


def tuple_from_dict(obj: Mapping) -> CommutingTuple:
    T = new_checked([matrix_from_json(M) for M in obj["matrices"]])
    if "d" in obj and int(obj["d"]) != T.dim:
        raise DimensionError(f"declared d={obj['d']} but found {T.dim} matrices")
    return T


def paired_to_dict(P: PairedTuple) -> dict:
    return {
        "tuple": tuple_to_dict(P.tuple),
        "x": [complex_to_json(v) for v in P.x],
        "y": [complex_to_json(v) for v in P.y],
        "name": P.name,
    }


def paired_from_dict(obj: Mapping) -> PairedTuple:
    return PairedTuple(
        tuple_from_dict(obj["tuple"]),
        [complex_from_json(v) for v in obj["x"]],
        [complex_from_json(v) for v in obj["y"]],
        name=obj.get("name", ""),
    )


def measure_to_dict(mu: DiscreteMeasure) -> dict:
    return {
        "d": mu.dim,
        "atoms": [
            {"zeta": [complex_to_json(z) for z in zeta], "w": complex_to_json(w)}
            for zeta, w in zip(mu.zetas, mu.weights)
        ],
    }


def measure_from_dict(obj: Mapping) -> DiscreteMeasure:
    d = int(obj["d"])
    atoms = obj["atoms"]
    Z = np.array([[complex_from_json(z) for z in a["zeta"]] for a in atoms], dtype=complex).reshape(-1, d)
    w = np.array([complex_from_json(a["w"]) for a in atoms], dtype=complex)
    return DiscreteMeasure(d, Z, w)

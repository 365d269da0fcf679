"""Operator norms, torus sup-norms and Agler-norm lower bounds.

The Agler norm of a polynomial is a supremum over commuting contractive
tuples of every size, so it is only ever bounded here: from below by a
max-reduction over a pool of tuples (named counterexamples, scalar torus
points, random generic tuples) and from above by the sum of coefficient
norms. Torus sup-norms are estimated from below on an FFT grid plus local
refinement, and bounded from above by a grid-spacing interpolation estimate.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import tuples as tp
from .polyalg import MatPoly, box_indices, eval_points, eval_tuple, partial_derivative

ANGLE_TOL = 1e-10


def operator_norm(A) -> float:
    """Largest singular value."""
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def _batched_norms(values: np.ndarray) -> np.ndarray:
    """Operator norms of a stack ``(K, M, N)``."""
    if values.shape[1:] == (1, 1):
        return np.abs(values[:, 0, 0])
    return np.linalg.norm(values, ord=2, axis=(1, 2))


@dataclass
class NormEstimate:
    value: float
    kind: str  # "exact-operator-norm" | "torus-lower-bound" | "agler-lower-bound"
    witness: dict | None = None
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


# -- torus ------------------------------------------------------------------

def torus_grid_values(f: MatPoly, grid_per_dim: int) -> np.ndarray:
    """``||f(e^{i theta})||`` on the uniform grid ``theta_j = 2 pi k / K``, shape ``(K,)*d``.

    Exponents are folded modulo ``K`` (exact on the grid) and the sum is done
    with an inverse FFT per coefficient entry.
    """
    K = int(grid_per_dim)
    d = f.dim
    M, N = f.shape
    A = np.zeros((M, N) + (K,) * d, dtype=complex)
    for alpha, c in f.items():
        idx = tuple(a % K for a in alpha)
        A[(slice(None), slice(None)) + idx] += c
    vals = np.fft.ifftn(A, axes=tuple(range(2, 2 + d))) * K**d
    if (M, N) == (1, 1):
        return np.abs(vals[0, 0])
    stack = np.moveaxis(vals.reshape(M, N, -1), 2, 0)
    return _batched_norms(stack).reshape((K,) * d)


def _norm_at_angles(f: MatPoly, theta: np.ndarray) -> float:
    return float(_batched_norms(eval_points(f, np.exp(1j * theta)[None, :]))[0])


def _refine(f: MatPoly, theta: np.ndarray, value: float, half_width: float, steps: int):
    """Coordinate-wise bounded scalar maximisation on the angles, accepting only improvements."""
    theta = theta.copy()
    for _ in range(steps):
        moved = 0.0
        for j in range(f.dim):
            t0 = theta[j]

            def neg(t, j=j):
                th = theta.copy()
                th[j] = t
                return -_norm_at_angles(f, th)

            res = minimize_scalar(
                neg, bounds=(t0 - half_width, t0 + half_width), method="bounded",
                options={"xatol": ANGLE_TOL},
            )
            if -res.fun > value:
                moved = max(moved, abs(res.x - t0))
                theta[j] = res.x
                value = -res.fun
        if moved < ANGLE_TOL:
            break
    return theta, value


def sup_norm_torus(f: MatPoly, grid_per_dim: int = 64, refine_steps: int = 50) -> NormEstimate:
    """Lower estimate of ``sup_{T^d} ||f||``: FFT grid maximum, then local refinement."""
    if grid_per_dim < 2:
        raise ValueError("grid_per_dim must be >= 2")
    params = {"grid_per_dim": int(grid_per_dim), "refine_steps": int(refine_steps)}
    K = int(grid_per_dim)
    vals = torus_grid_values(f, K)
    k = np.unravel_index(int(np.argmax(vals)), vals.shape)
    theta = 2 * np.pi * np.array(k, dtype=float) / K
    value = _norm_at_angles(f, theta)
    grid_max = float(vals[k])
    if refine_steps > 0 and len(f):
        theta, value = _refine(f, theta, value, 2 * np.pi / K, refine_steps)
    # the grid maximum is kept so nested grids stay monotone
    best = max(value, grid_max)
    witness = {"theta": [float(t) for t in theta], "value": float(value)}
    return NormEstimate(float(best), "torus-lower-bound", witness, params)


def coefficient_upper_bound(f: MatPoly) -> float:
    """``sum_alpha ||f_alpha||``, which bounds ``||f(T)||`` for every contractive tuple."""
    return float(sum(operator_norm(c) for _, c in f.items()))


def torus_upper_bound(f: MatPoly, grid_per_dim: int = 64) -> float:
    """Upper bound for ``sup_{T^d} ||f||`` from grid values.

    ``g = |u^* f v|^2`` is a trigonometric polynomial whose pure second
    derivatives are bounded by ``C_j = sum_{a,b} ||f_a|| ||f_b|| (a_j-b_j)^2``;
    multilinear interpolation on a grid of spacing ``h`` then gives
    ``sup g <= max_grid g + sum_j h^2 C_j / 8``. The result is capped by the
    coefficient bound.
    """
    if not len(f):
        return 0.0
    K = int(grid_per_dim)
    h = 2 * np.pi / K
    alphas = np.array(list(f), dtype=float)
    norms = np.array([operator_norm(c) for _, c in f.items()])
    W = np.outer(norms, norms)
    curv = sum(float(np.sum(W * (alphas[:, j, None] - alphas[None, :, j]) ** 2)) for j in range(f.dim))
    coef = float(norms.sum())
    grid_max = float(torus_grid_values(f, K).max())
    # slack covers FFT roundoff in the grid values
    sq = grid_max**2 + h * h * curv / 8 + 1e-12 * coef**2
    return min(math.sqrt(sq), coef)


# -- Agler lower bound ------------------------------------------------------

@dataclass(frozen=True)
class TuplePool:
    """Where :func:`agler_lower_bound` looks for large ``||f(S)||``."""

    sizes: tuple[int, ...] = (2, 3, 4, 6)
    radius: float = 0.999
    cond_max: float = 1e3
    named: tuple[str, ...] = ("holbrook", "crabb_davie")
    torus_points: int = 4096
    points: tuple[tuple[complex, ...], ...] = ()
    generic: bool = True

    @classmethod
    def from_name(cls, name: str, **kw) -> "TuplePool":
        """``named``, ``generic``, ``torus`` or ``all``."""
        if name == "all":
            return cls(**kw)
        if name == "named":
            return cls(torus_points=0, generic=False, **kw)
        if name == "generic":
            return cls(named=(), torus_points=0, **kw)
        if name == "torus":
            return cls(named=(), generic=False, **kw)
        raise ValueError(f"unknown pool {name!r}")

    def with_points(self, points) -> "TuplePool":
        extra = tuple(tuple(complex(z) for z in p) for p in points)
        return TuplePool(self.sizes, self.radius, self.cond_max, self.named, self.torus_points,
                         self.points + extra, self.generic)

    def to_dict(self) -> dict:
        return {
            "sizes": list(self.sizes),
            "radius": self.radius,
            "cond_max": self.cond_max,
            "named": list(self.named),
            "torus_points": self.torus_points,
            "points": [[[z.real, z.imag] for z in p] for p in self.points],
            "generic": self.generic,
        }


def trial_seed(seed: int, trial: int) -> int:
    """Per-trial seed; depends only on ``(seed, trial)`` so trials are order independent."""
    return int(np.random.SeedSequence([int(seed), int(trial)]).generate_state(1, dtype=np.uint64)[0])


def _torus_seed(seed: int) -> int:
    return int(np.random.SeedSequence([int(seed), 0x70_72_75_73]).generate_state(1, dtype=np.uint64)[0])


def _generic_candidate(f: MatPoly, pool: TuplePool, seed: int, i: int) -> tuple[float, dict]:
    n = pool.sizes[i % len(pool.sizes)]
    s = trial_seed(seed, i)
    T = tp.random_generic(f.dim, n, pool.radius, pool.cond_max, s)
    witness = {"source": "generic", "trial": i, "size": n, "seed": s,
               "radius": pool.radius, "cond_max": pool.cond_max}
    return operator_norm(eval_tuple(f, T)), witness


def agler_lower_bound(
    f: MatPoly,
    pool: TuplePool | None = None,
    trials: int = 200,
    seed: int = 0,
    workers: int = 1,
) -> NormEstimate:
    """``max_S ||f(S)||`` over the pool, a lower bound for the Agler norm.

    Candidates are ranked in a fixed order (named, torus, generic by trial
    index) and the first maximum wins, so threaded and sequential runs return
    identical estimates.
    """
    pool = pool or TuplePool()
    candidates: list[tuple[float, dict]] = []

    for name in pool.named:
        P = tp.NAMED_TUPLES[name]()
        if P.dim == f.dim:
            candidates.append((operator_norm(eval_tuple(f, P.tuple)), {"source": "named", "name": name}))

    pts = [np.asarray(p, dtype=complex) for p in pool.points if len(p) == f.dim]
    if pool.torus_points:
        rng = np.random.default_rng(_torus_seed(seed))
        pts.extend(np.exp(2j * np.pi * rng.random((pool.torus_points, f.dim))))
    if pts:
        Z = np.array(pts)
        vals = _batched_norms(eval_points(f, Z))
        k = int(np.argmax(vals))
        candidates.append((float(vals[k]), {"source": "torus", "z": [[float(z.real), float(z.imag)] for z in Z[k]]}))

    if pool.generic and trials > 0:
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as ex:
                candidates.extend(ex.map(lambda i: _generic_candidate(f, pool, seed, i), range(trials)))
        else:
            candidates.extend(_generic_candidate(f, pool, seed, i) for i in range(trials))

    if not candidates:
        raise ValueError("empty tuple pool")
    best_val, best_w = candidates[0]
    for v, w in candidates[1:]:
        if v > best_val:
            best_val, best_w = v, w
    params = {"pool": pool.to_dict(), "trials": int(trials), "seed": int(seed)}
    return NormEstimate(float(best_val), "agler-lower-bound", best_w, params)


def witness_tuple(witness: dict, dim: int) -> tp.CommutingTuple:
    """Rebuild the tuple recorded in an Agler witness."""
    src = witness["source"]
    if src == "named":
        return tp.NAMED_TUPLES[witness["name"]]().tuple
    if src == "torus":
        return tp.new_checked([np.array([[complex(re, im)]]) for re, im in witness["z"]])
    if src == "generic":
        return tp.random_generic(dim, witness["size"], witness["radius"], witness["cond_max"], witness["seed"])
    raise ValueError(f"unknown witness source {src!r}")


def reevaluate(f: MatPoly, est: NormEstimate) -> float:
    """Recompute the value a witness claims."""
    if est.kind == "agler-lower-bound":
        return operator_norm(eval_tuple(f, witness_tuple(est.witness, f.dim)))
    if est.kind == "torus-lower-bound":
        return _norm_at_angles(f, np.array(est.witness["theta"]))
    raise ValueError(f"no witness replay for {est.kind}")


# -- von Neumann violations -------------------------------------------------

@dataclass
class Violation:
    torus: NormEstimate
    agler: NormEstimate
    gap: float
    torus_upper: float
    certified: bool

    def to_dict(self) -> dict:
        return {
            "torus": self.torus.to_dict(),
            "agler": self.agler.to_dict(),
            "gap": self.gap,
            "torus_upper": self.torus_upper,
            "certified_gap": self.agler.value - self.torus_upper,
            "kind": "violation certified" if self.certified else "violation observed (estimate)",
        }


def vn_violation_search(
    f: MatPoly,
    pool: TuplePool | None = None,
    trials: int = 200,
    seed: int = 0,
    grid_per_dim: int = 64,
    refine_steps: int = 50,
    margin: float = 1e-6,
    workers: int = 1,
) -> Violation | None:
    """Look for ``||f(S)|| > sup_{T^d} |f|`` over the pool; ``None`` when nothing beats the torus.

    The torus witness is added to the pool as a scalar tuple. A violation is
    *certified* when the Agler lower bound also beats :func:`torus_upper_bound`.
    """
    if not f.is_scalar:
        raise ValueError("von Neumann search expects a scalar polynomial")
    s = sup_norm_torus(f, grid_per_dim, refine_steps)
    pool = (pool or TuplePool()).with_points([np.exp(1j * np.array(s.witness["theta"]))])
    a = agler_lower_bound(f, pool, trials, seed, workers)
    if not a.value > s.value + margin:
        return None
    upper = torus_upper_bound(f, grid_per_dim)
    return Violation(s, a, a.value - s.value, upper, a.value > upper + margin)


# -- Bernstein inequality ---------------------------------------------------

@dataclass
class BernsteinLine:
    j: int
    derivative_sup: float  # sup |df/dz_j| / n_j
    sup: float
    passed: bool


def bernstein_check(
    f: MatPoly,
    n: Sequence[int],
    grid_per_dim: int = 64,
    refine_steps: int = 20,
    tol: float = 1e-8,
) -> list[BernsteinLine]:
    """Compare ``sup |df/dz_j| / n_j`` with ``sup |f|`` on the torus for each coordinate."""
    if not f.is_scalar:
        raise ValueError("bernstein_check expects a scalar polynomial")
    n = tuple(int(x) for x in n)
    if len(n) != f.dim:
        raise ValueError(f"multidegree has length {len(n)}, polynomial has d={f.dim}")
    box = set(box_indices(n))
    if any(a not in box for a in f):
        raise ValueError(f"support of f exceeds the declared multidegree {n}")
    sup_f = sup_norm_torus(f, grid_per_dim, refine_steps).value
    lines = []
    for j in range(f.dim):
        if n[j] == 0:
            ratio = 0.0
        else:
            ratio = sup_norm_torus(partial_derivative(f, j), grid_per_dim, refine_steps).value / n[j]
        lines.append(BernsteinLine(j, ratio, sup_f, ratio <= sup_f + tol))
    return lines

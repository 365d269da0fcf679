"""Hadamard multipliers of the Agler class.

A multiplier is a lazy coefficient functional ``alpha -> F_alpha``; the power
series it represents may have infinite support (geometric kernels, diagonal
extraction), but applying it to a polynomial only queries finitely many
coefficients. Multipliers built from a commuting contractive tuple and unit
bounded vectors (``F_alpha = <T^alpha x, y>``) are the central object: they
preserve the matrix Agler class, and :func:`check_preservation_identity`
verifies the tensor-product identity behind that fact numerically.
"""
from __future__ import annotations

import json
import threading
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import tuples as tp
from .polyalg import (
    DimensionError,
    MatPoly,
    MultiIndex,
    box_indices,
    complex_from_json,
    complex_to_json,
    eval_tuple,
    hadamard,
    multi_index,
    poly_from_dict,
    poly_to_dict,
)


class TruncationError(ValueError):
    """A series-inverse multiplier was queried beyond its degree cap."""


class Multiplier:
    """Base class: a coefficient functional on ``N_0^d``."""

    kind = "abstract"

    def __init__(self, dim: int):
        self.dim = int(dim)

    def coeff(self, alpha: Iterable[int]) -> complex:
        return self._coeff(multi_index(alpha, self.dim))

    def _coeff(self, alpha: MultiIndex) -> complex:
        raise NotImplementedError

    def check_support(self, alphas: Iterable[MultiIndex]) -> None:
        """Raise :class:`TruncationError` if some coefficient is not known exactly."""

    def as_paired_tuple(self) -> tp.PairedTuple:
        """A ``(T, x, y)`` realisation, for multipliers that have one."""
        raise TypeError(f"{self.kind} multiplier has no moment representation")

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<{type(self).__name__} d={self.dim}>"


class MomentMultiplier(Multiplier):
    """``F_alpha = <T^alpha x, y>`` with memoised vectors ``T^alpha x``."""

    kind = "moments"

    def __init__(self, paired: tp.PairedTuple):
        super().__init__(paired.dim)
        self.paired = paired
        self._vectors: dict[MultiIndex, np.ndarray] = {}
        self._lock = threading.Lock()

    def _coeff(self, alpha):
        with self._lock:
            v = self._vectors.get(alpha)
            if v is None:
                self._vectors.update(tp.moment_vectors(self.paired, [alpha]))
                v = self._vectors[alpha]
        return complex(np.vdot(self.paired.y, v))

    def as_paired_tuple(self):
        return self.paired

    def to_dict(self):
        return {"kind": self.kind, "d": self.dim, "paired": tp.paired_to_dict(self.paired)}


class MeasureMultiplier(Multiplier):
    """``F_alpha = int w^alpha d mu`` for a discrete measure of total variation <= 1."""

    kind = "measure"

    def __init__(self, mu: tp.DiscreteMeasure):
        if mu.total_variation > 1 + tp.CONTRACTION_SLACK:
            raise ValueError(
                f"not a Schur-class preserver certificate: total variation {mu.total_variation!r} > 1"
            )
        super().__init__(mu.dim)
        self.measure = mu

    def _coeff(self, alpha):
        return self.measure.moment(alpha)

    def as_paired_tuple(self):
        return tp.from_measure(self.measure)

    def to_dict(self):
        return {"kind": self.kind, "d": self.dim, "measure": tp.measure_to_dict(self.measure)}


class ExplicitMultiplier(Multiplier):
    """Coefficients read off a scalar polynomial (zero outside its support)."""

    kind = "explicit"

    def __init__(self, poly: MatPoly):
        if not poly.is_scalar:
            raise ValueError("explicit multipliers need a scalar polynomial")
        super().__init__(poly.dim)
        self.poly = poly

    def _coeff(self, alpha):
        return self.poly.scalar_coeff(alpha)

    def to_dict(self):
        return {"kind": self.kind, "d": self.dim, "poly": poly_to_dict(self.poly)}


class FejerMultiplier(Multiplier):
    """Product Fejer weights ``prod_j max(0, 1 - alpha_j/(n_j+1))``."""

    kind = "fejer"

    def __init__(self, n: Sequence[int]):
        n = multi_index(n)
        super().__init__(len(n))
        self.n = n

    def _coeff(self, alpha):
        out = 1.0
        for a, m in zip(alpha, self.n):
            out *= max(0.0, 1.0 - a / (m + 1))
        return complex(out)

    def to_measure(self) -> tp.DiscreteMeasure:
        """Root-of-unity quadrature of the product Fejer kernel.

        Atoms sit on the grid of ``(2 n_j + 1)``-st roots of unity with weight
        ``prod_j K_{n_j}(omega_j) / (2 n_j + 1)``. The moments agree with the
        Fejer weights on the box ``alpha <= n``.
        """
        axes_z, axes_w = [], []
        for m in self.n:
            N = 2 * m + 1
            theta = 2 * np.pi * np.arange(N) / N
            axes_z.append(np.exp(1j * theta))
            axes_w.append(fejer_kernel(m, theta) / N)
        grids_z = np.meshgrid(*axes_z, indexing="ij")
        grids_w = np.meshgrid(*axes_w, indexing="ij")
        Z = np.stack([g.reshape(-1) for g in grids_z], axis=1)
        w = np.prod(np.stack([g.reshape(-1) for g in grids_w], axis=1), axis=1)
        return tp.DiscreteMeasure(self.dim, Z, w)

    def as_paired_tuple(self):
        return tp.from_measure(self.to_measure())

    def to_dict(self):
        return {"kind": self.kind, "d": self.dim, "n": list(self.n)}


def fejer_kernel(m: int, theta) -> np.ndarray:
    """``K_m(theta) = (1/(m+1)) (sin((m+1) theta/2) / sin(theta/2))^2``, equal to ``m+1`` at 0."""
    theta = np.asarray(theta, dtype=float)
    half = np.sin(theta / 2)
    small = np.abs(half) < 1e-12
    safe = np.where(small, 1.0, half)
    val = np.sin((m + 1) * theta / 2) ** 2 / (safe**2 * (m + 1))
    return np.where(small, float(m + 1), val)


class GeometricMultiplier(Multiplier):
    """``F(z) = 1 / prod_j (1 - z_j zeta_j)``, i.e. ``F_alpha = zeta^alpha``."""

    kind = "geometric"

    def __init__(self, zeta: Sequence[complex]):
        zeta = np.array(zeta, dtype=complex).reshape(-1)
        if np.any(np.abs(zeta) > 1 + tp.CONTRACTION_SLACK):
            raise ValueError("geometric multiplier needs zeta in the closed polydisk")
        super().__init__(len(zeta))
        zeta.setflags(write=False)
        self.zeta = zeta

    def _coeff(self, alpha):
        out = 1 + 0j
        for zj, a in zip(self.zeta, alpha):
            out *= complex(zj) ** a
        return out

    def as_paired_tuple(self):
        T = tp.new_checked([np.array([[zj]]) for zj in self.zeta])
        return tp.PairedTuple(T, [1.0], [1.0], name="geometric")

    def to_dict(self):
        return {"kind": self.kind, "d": self.dim, "zeta": [complex_to_json(z) for z in self.zeta]}


class SeriesInverseMultiplier(Multiplier):
    """``F = 1/(1 - b)`` for a scalar ``b`` with ``b(0) = 0``, exact up to total degree ``cap``."""

    kind = "series_inverse"

    def __init__(self, b: MatPoly, cap: int):
        if not b.is_scalar:
            raise ValueError("series inverse needs a scalar polynomial b")
        if b.scalar_coeff((0,) * b.dim) != 0:
            raise ValueError("series inverse needs b(0) = 0")
        super().__init__(b.dim)
        self.b = b
        self.cap = int(cap)
        # b has no constant term, so b^k only contributes in total degree >= k
        acc = MatPoly.constant(b.dim, 1.0)
        power = MatPoly.constant(b.dim, 1.0)
        for _ in range(self.cap):
            power = power.multiply(b, max_degree=self.cap)
            if not len(power):
                break
            acc = acc + power
        self.series = acc

    def _coeff(self, alpha):
        if sum(alpha) > self.cap:
            return 0j
        return self.series.scalar_coeff(alpha)

    def truncated(self, alpha: Iterable[int]) -> bool:
        return sum(multi_index(alpha, self.dim)) > self.cap

    def check_support(self, alphas):
        for a in alphas:
            if sum(a) > self.cap:
                raise TruncationError(f"coefficient {a} lies beyond the truncation cap {self.cap}")

    def to_dict(self):
        return {"kind": self.kind, "d": self.dim, "b": poly_to_dict(self.b), "cap": self.cap}


class ShiftedMultiplier(Multiplier):
    """Coefficient-level shift ``alpha -> F_{alpha + beta}`` of any multiplier."""

    kind = "shifted"

    def __init__(self, base: Multiplier, beta: Sequence[int]):
        super().__init__(base.dim)
        self.base = base
        self.beta = multi_index(beta, base.dim)

    def _plus(self, alpha):
        return tuple(a + b for a, b in zip(alpha, self.beta))

    def _coeff(self, alpha):
        return self.base._coeff(self._plus(alpha))

    def check_support(self, alphas):
        self.base.check_support([self._plus(a) for a in alphas])

    def to_dict(self):
        return {"kind": self.kind, "d": self.dim, "base": self.base.to_dict(), "beta": list(self.beta)}


class ScaledMultiplier(Multiplier):
    """``c * F``."""

    kind = "scaled"

    def __init__(self, base: Multiplier, c: complex):
        super().__init__(base.dim)
        self.base = base
        self.c = complex(c)

    def _coeff(self, alpha):
        return self.c * self.base._coeff(alpha)

    def check_support(self, alphas):
        self.base.check_support(alphas)

    def to_dict(self):
        return {"kind": self.kind, "d": self.dim, "base": self.base.to_dict(), "c": complex_to_json(self.c)}


# -- constructors -----------------------------------------------------------

def from_moments(paired: tp.PairedTuple) -> MomentMultiplier:
    return MomentMultiplier(paired)


def from_measure(mu: tp.DiscreteMeasure) -> MeasureMultiplier:
    return MeasureMultiplier(mu)


def geometric(zeta: Sequence[complex]) -> GeometricMultiplier:
    return GeometricMultiplier(zeta)


def fejer(n: Sequence[int]) -> FejerMultiplier:
    return FejerMultiplier(n)


def explicit(poly: MatPoly) -> ExplicitMultiplier:
    return ExplicitMultiplier(poly)


def zero(dim: int) -> ExplicitMultiplier:
    return ExplicitMultiplier(MatPoly.zero(dim))


def bernstein(j: int, n: Sequence[int]) -> ExplicitMultiplier:
    """Weights ``alpha_j / n_j`` on the box ``alpha <= n`` (0-based ``j``).

    Applied to ``f`` supported in the box this gives ``(z_j/n_j) df/dz_j``.
    """
    n = multi_index(n)
    if not 0 <= j < len(n):
        raise IndexError(f"coordinate {j} out of range for d={len(n)}")
    if n[j] < 1:
        raise ValueError("bernstein multiplier needs n_j >= 1")
    terms = {a: a[j] / n[j] for a in box_indices(n) if a[j]}
    return ExplicitMultiplier(MatPoly.scalar(len(n), terms))


def inverse_one_minus(b: MatPoly, cap: int) -> SeriesInverseMultiplier:
    return SeriesInverseMultiplier(b, cap)


def diagonal_extraction(dim: int, cap: int) -> SeriesInverseMultiplier:
    """``1/(1 - z_1 ... z_d)`` truncated at total degree ``cap``."""
    return SeriesInverseMultiplier(MatPoly.monomial((1,) * dim), cap)


def shift(F: Multiplier, beta: Sequence[int]) -> MomentMultiplier:
    """``alpha -> F_{alpha+beta}`` for a moment multiplier, realised as ``(T, T^beta x, y)``."""
    if not isinstance(F, MomentMultiplier):
        raise TypeError(f"shift needs a moment multiplier, got {F.kind}")
    beta = multi_index(beta, F.dim)
    P = F.paired
    x_new = P.tuple.power(beta) @ P.x
    # ||T^beta x|| <= ||x|| up to roundoff; clip accumulated slack so the marker stays admissible
    nx = np.linalg.norm(x_new)
    if nx > 1 + tp.CONTRACTION_SLACK:
        x_new = x_new / nx
    return MomentMultiplier(tp.PairedTuple(P.tuple, x_new, P.y, name=P.name))


def apply(F: Multiplier, f: MatPoly) -> MatPoly:
    """``f * F`` (Hadamard product)."""
    if F.dim != f.dim:
        raise DimensionError(f"multiplier has d={F.dim}, polynomial has d={f.dim}")
    F.check_support(list(f))
    return hadamard(f, F)


# -- identity checks --------------------------------------------------------

def _random_unit(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def check_preservation_identity(
    f: MatPoly,
    F: Multiplier,
    S: tp.CommutingTuple,
    samples: int = 8,
    seed: int = 0,
) -> float:
    """Max over random unit ``v, w`` of ``|<(f*F)(S) v, w> - <f(T (x) S)(x (x) v), y (x) w>|``.

    ``F`` must have a moment realisation ``(T, x, y)``.
    """
    if not f.dim == F.dim == S.dim:
        raise DimensionError(f"dimensions differ: f={f.dim}, F={F.dim}, S={S.dim}")
    P = F.as_paired_tuple()
    lhs_op = eval_tuple(apply(F, f), S)
    rhs_op = eval_tuple(f, tp.tensor(P.tuple, S))
    M, N = f.shape
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        v = _random_unit(rng, S.size * N)
        w = _random_unit(rng, S.size * M)
        lhs = np.vdot(w, lhs_op @ v)
        rhs = np.vdot(np.kron(P.y, w), rhs_op @ np.kron(P.x, v))
        worst = max(worst, abs(lhs - rhs))
    return float(worst)


def check_schur_identity(f: MatPoly, P: tp.PairedTuple, z: Sequence[complex]) -> float:
    """``|<f(z . T) x, y> - sum_alpha f_alpha <T^alpha x, y> z^alpha|`` for scalar ``f``."""
    if not f.is_scalar:
        raise ValueError("the Schur identity is stated for scalar polynomials")
    if f.dim != P.dim:
        raise DimensionError(f"polynomial has d={f.dim}, tuple has d={P.dim}")
    z = np.asarray(z, dtype=complex)
    lhs = np.vdot(P.y, eval_tuple(f, tp.scale(P.tuple, z)) @ P.x)
    mom = tp.moments(P, list(f))
    rhs = sum(f.scalar_coeff(a) * mom[a] * np.prod(z ** np.array(a)) for a in f)
    return float(abs(lhs - rhs))


# -- JSON -------------------------------------------------------------------

def multiplier_from_dict(obj: Mapping) -> Multiplier:
    kind = obj.get("kind")
    if kind == "moments":
        return MomentMultiplier(tp.paired_from_dict(obj["paired"]))
    if kind == "measure":
        return MeasureMultiplier(tp.measure_from_dict(obj["measure"]))
    if kind == "explicit":
        return ExplicitMultiplier(poly_from_dict(obj["poly"]))
    if kind == "fejer":
        return FejerMultiplier(obj["n"])
    if kind == "geometric":
        return GeometricMultiplier([complex_from_json(z) for z in obj["zeta"]])
    if kind == "series_inverse":
        return SeriesInverseMultiplier(poly_from_dict(obj["b"]), int(obj["cap"]))
    if kind == "shifted":
        return ShiftedMultiplier(multiplier_from_dict(obj["base"]), obj["beta"])
    if kind == "scaled":
        return ScaledMultiplier(multiplier_from_dict(obj["base"]), complex_from_json(obj["c"]))
    raise ValueError(f"unknown multiplier kind {kind!r}")


def dumps_multiplier(F: Multiplier) -> str:
    return json.dumps(F.to_dict(), indent=1) + "\n"


def loads_multiplier(text: str) -> Multiplier:
    return multiplier_from_dict(json.loads(text))

"""Sparse multivariate polynomials with complex matrix coefficients.

A polynomial in ``d`` variables is stored as a map from exponent tuples
(multi-indices) to ``M x N`` complex coefficient matrices. Scalar polynomials
are the ``1 x 1`` case. Besides ring arithmetic the module provides the
Hadamard (coefficient-wise) product, evaluation at points of ``C^d`` and the
functional calculus ``f(S) = sum_alpha S^alpha (x) f_alpha`` for commuting
matrix tuples.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .tuples import CommutingTuple

MultiIndex = tuple[int, ...]

REL_TOL = 1e-12
ABS_TOL = 1e-14


class DimensionError(ValueError):
    """Raised when objects living in different numbers of variables are combined."""


def multi_index(alpha: Iterable[int], dim: int | None = None) -> MultiIndex:
    alpha = tuple(int(a) for a in alpha)
    if any(a < 0 for a in alpha):
        raise ValueError(f"negative exponent in {alpha}")
    if not alpha:
        raise ValueError("multi-index must have length >= 1")
    if dim is not None and len(alpha) != dim:
        raise DimensionError(f"multi-index {alpha} has length {len(alpha)}, expected {dim}")
    return alpha


def degree(alpha: MultiIndex) -> int:
    return sum(alpha)


def unit(dim: int, j: int) -> MultiIndex:
    """The multi-index e_j (0-based ``j``)."""
    return tuple(1 if i == j else 0 for i in range(dim))


def indices_up_to_degree(dim: int, max_degree: int) -> list[MultiIndex]:
    """All multi-indices of total degree <= max_degree, sorted lexicographically."""
    out = [a for a in itertools.product(range(max_degree + 1), repeat=dim) if sum(a) <= max_degree]
    return sorted(out)


def box_indices(n: Sequence[int]) -> list[MultiIndex]:
    return sorted(itertools.product(*(range(nj + 1) for nj in n)))


@dataclass(frozen=True)
class SupportSet:
    """A set of multi-indices: an explicit finite list, a box ``alpha <= n``, or everything.

    >>> SupportSet.box((1, 2)).contains((1, 2))
    True
    """

    dim: int
    kind: str  # "explicit" | "box" | "all"
    indices: frozenset[MultiIndex] = frozenset()
    bound: MultiIndex | None = None

    @classmethod
    def explicit(cls, dim: int, indices: Iterable[Iterable[int]]) -> "SupportSet":
        return cls(dim, "explicit", frozenset(multi_index(a, dim) for a in indices))

    @classmethod
    def box(cls, n: Iterable[int]) -> "SupportSet":
        n = multi_index(n)
        return cls(len(n), "box", bound=n)

    @classmethod
    def all(cls, dim: int) -> "SupportSet":
        return cls(dim, "all")

    @classmethod
    def degree_at_most(cls, dim: int, max_degree: int) -> "SupportSet":
        return cls.explicit(dim, indices_up_to_degree(dim, max_degree))

    @property
    def is_finite(self) -> bool:
        return self.kind != "all"

    def contains(self, alpha: Iterable[int]) -> bool:
        alpha = multi_index(alpha, self.dim)
        if self.kind == "all":
            return True
        if self.kind == "box":
            return all(a <= b for a, b in zip(alpha, self.bound))
        return alpha in self.indices

    __contains__ = contains

    def __iter__(self) -> Iterator[MultiIndex]:
        if self.kind == "all":
            raise ValueError("cannot enumerate the infinite support set")
        if self.kind == "box":
            return iter(box_indices(self.bound))
        return iter(sorted(self.indices))

    def __len__(self) -> int:
        if self.kind == "all":
            raise ValueError("infinite support set has no length")
        if self.kind == "box":
            return int(np.prod([b + 1 for b in self.bound]))
        return len(self.indices)


def _as_coeff(value, shape: tuple[int, int] | None) -> np.ndarray:
    arr = np.array(value, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise ValueError(f"coefficient must be a matrix, got ndim={arr.ndim}")
    if shape is not None and arr.shape != tuple(shape):
        raise ValueError(f"coefficient shape {arr.shape} does not match {tuple(shape)}")
    arr.setflags(write=False)
    return arr


class MatPoly:
    """Polynomial ``sum_alpha f_alpha z^alpha`` with ``M x N`` complex coefficients.

    Instances are immutable and kept in canonical form: exactly-zero
    coefficients are never stored. Equality compares the canonical term maps
    exactly; use :meth:`allclose` for tolerance-based comparison.
    """

    __slots__ = ("dim", "shape", "_terms")

    def __init__(self, dim: int, shape: tuple[int, int], terms: Mapping[Iterable[int], object] | None = None):
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        self.dim = int(dim)
        self.shape = (int(shape[0]), int(shape[1]))
        acc: dict[MultiIndex, np.ndarray] = {}
        for alpha, c in (terms or {}).items():
            alpha = multi_index(alpha, self.dim)
            c = _as_coeff(c, self.shape)
            if alpha in acc:
                c = _as_coeff(acc[alpha] + c, self.shape)
            acc[alpha] = c
        self._terms = {a: acc[a] for a in sorted(acc) if np.any(acc[a] != 0)}

    # -- constructors -----------------------------------------------------
    @classmethod
    def scalar(cls, dim: int, terms: Mapping[Iterable[int], complex] | None = None) -> "MatPoly":
        return cls(dim, (1, 1), terms)

    @classmethod
    def zero(cls, dim: int, shape: tuple[int, int] = (1, 1)) -> "MatPoly":
        return cls(dim, shape)

    @classmethod
    def constant(cls, dim: int, c) -> "MatPoly":
        c = _as_coeff(c, None)
        return cls(dim, c.shape, {(0,) * dim: c})

    @classmethod
    def monomial(cls, alpha: Iterable[int], c=1.0) -> "MatPoly":
        alpha = multi_index(alpha)
        c = _as_coeff(c, None)
        return cls(len(alpha), c.shape, {alpha: c})

    @classmethod
    def variable(cls, dim: int, j: int) -> "MatPoly":
        """The coordinate function ``z_j`` (0-based ``j``)."""
        return cls.scalar(dim, {unit(dim, j): 1.0})

    # -- container protocol -----------------------------------------------
    @property
    def terms(self) -> dict[MultiIndex, np.ndarray]:
        return dict(self._terms)

    @property
    def is_scalar(self) -> bool:
        return self.shape == (1, 1)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[MultiIndex]:
        return iter(self._terms)

    def items(self):
        return self._terms.items()

    def coeff(self, alpha: Iterable[int]) -> np.ndarray:
        alpha = multi_index(alpha, self.dim)
        if alpha in self._terms:
            return self._terms[alpha]
        return np.zeros(self.shape, dtype=complex)

    def scalar_coeff(self, alpha: Iterable[int]) -> complex:
        if not self.is_scalar:
            raise ValueError("scalar_coeff requires a 1x1 polynomial")
        return complex(self.coeff(alpha)[0, 0])

    def total_degree(self) -> int:
        return max((degree(a) for a in self._terms), default=-1)

    def multidegree(self) -> MultiIndex:
        """Componentwise maximum exponent over the support (zeros for the zero polynomial)."""
        if not self._terms:
            return (0,) * self.dim
        return tuple(int(m) for m in np.max(np.array(list(self._terms)), axis=0))

    # -- comparison ---------------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, MatPoly):
            return NotImplemented
        if (self.dim, self.shape) != (other.dim, other.shape) or self._terms.keys() != other._terms.keys():
            return False
        return all(np.array_equal(c, other._terms[a]) for a, c in self._terms.items())

    def __hash__(self):
        return hash((self.dim, self.shape, tuple(self._terms)))

    def allclose(self, other: "MatPoly", rtol: float = REL_TOL, atol: float = ABS_TOL) -> bool:
        if (self.dim, self.shape) != (other.dim, other.shape):
            return False
        for a in set(self._terms) | set(other._terms):
            if not np.allclose(self.coeff(a), other.coeff(a), rtol=rtol, atol=atol):
                return False
        return True

    def __repr__(self) -> str:
        if self.is_scalar:
            body = " + ".join(f"({c[0, 0]:g})*z^{a}" for a, c in self._terms.items()) or "0"
        else:
            body = f"{len(self)} terms"
        return f"MatPoly(d={self.dim}, shape={self.shape}: {body})"

    # -- arithmetic ---------------------------------------------------------
    def _check_compatible(self, other: "MatPoly") -> None:
        if self.dim != other.dim:
            raise DimensionError(f"dimension mismatch: {self.dim} vs {other.dim}")
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch: {self.shape} vs {other.shape}")

    def map_coeffs(self, fn: Callable[[MultiIndex, np.ndarray], object]) -> "MatPoly":
        return MatPoly(self.dim, self.shape, {a: fn(a, c) for a, c in self._terms.items()})

    def __add__(self, other: "MatPoly") -> "MatPoly":
        self._check_compatible(other)
        out = dict(self._terms)
        for a, c in other._terms.items():
            out[a] = out[a] + c if a in out else c
        return MatPoly(self.dim, self.shape, out)

    def __neg__(self) -> "MatPoly":
        return self.map_coeffs(lambda a, c: -c)

    def __sub__(self, other: "MatPoly") -> "MatPoly":
        return self + (-other)

    def __mul__(self, other) -> "MatPoly":
        if not isinstance(other, MatPoly):
            return self.map_coeffs(lambda a, c: c * complex(other))
        return self.multiply(other)

    def __rmul__(self, other) -> "MatPoly":
        return self.map_coeffs(lambda a, c: complex(other) * c)

    def multiply(self, other: "MatPoly", max_degree: int | None = None) -> "MatPoly":
        """Polynomial product with matrix-product coefficients, optionally truncated in total degree."""
        if self.dim != other.dim:
            raise DimensionError(f"dimension mismatch: {self.dim} vs {other.dim}")
        if self.shape[1] != other.shape[0]:
            raise ValueError(f"cannot multiply shapes {self.shape} and {other.shape}")
        out: dict[MultiIndex, np.ndarray] = {}
        for a, ca in self._terms.items():
            for b, cb in other._terms.items():
                ab = tuple(x + y for x, y in zip(a, b))
                if max_degree is not None and sum(ab) > max_degree:
                    continue
                prod = ca @ cb
                out[ab] = out[ab] + prod if ab in out else prod
        return MatPoly(self.dim, (self.shape[0], other.shape[1]), out)

    def truncate(self, max_degree: int) -> "MatPoly":
        return MatPoly(self.dim, self.shape, {a: c for a, c in self._terms.items() if sum(a) <= max_degree})


# -- operations -------------------------------------------------------------

def hadamard(f: MatPoly, F, L: SupportSet | None = None) -> MatPoly:
    """Coefficient-wise product ``(f * F)_alpha = F_alpha f_alpha``.

    ``F`` is anything with ``dim`` and ``coeff(alpha) -> complex`` (a
    multiplier, or a scalar :class:`MatPoly`).
    """
    F_dim = F.dim
    if f.dim != F_dim:
        raise DimensionError(f"polynomial has d={f.dim} but multiplier has d={F_dim}")
    if L is not None:
        outside = [a for a in f if not L.contains(a)]
        if outside:
            raise ValueError(f"support of f is not contained in L, e.g. {outside[0]}")
    coeff = F.scalar_coeff if isinstance(F, MatPoly) else F.coeff
    return f.map_coeffs(lambda a, c: complex(coeff(a)) * c)


def _check_point(f: MatPoly, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex).reshape(-1)
    if z.shape[0] != f.dim:
        raise DimensionError(f"point has length {z.shape[0]}, polynomial has d={f.dim}")
    return z


def eval_point(f: MatPoly, z: Sequence[complex]) -> np.ndarray:
    """Evaluate ``sum_alpha f_alpha z^alpha`` at one point; returns an ``M x N`` matrix."""
    z = _check_point(f, z)
    out = np.zeros(f.shape, dtype=complex)
    for alpha, c in f.items():
        out = out + c * np.prod(z ** np.array(alpha))
    return out


def eval_points(f: MatPoly, Z: np.ndarray) -> np.ndarray:
    """Vectorised evaluation at the rows of ``Z`` (shape ``(K, d)``); returns ``(K, M, N)``."""
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    if Z.shape[1] != f.dim:
        raise DimensionError(f"points have length {Z.shape[1]}, polynomial has d={f.dim}")
    if not len(f):
        return np.zeros((Z.shape[0],) + f.shape, dtype=complex)
    E = np.array(list(f._terms), dtype=int)  # (T, d)
    C = np.stack(list(f._terms.values()))  # (T, M, N)
    mono = np.prod(Z[:, None, :] ** E[None, :, :], axis=2)  # (K, T)
    return np.einsum("kt,tmn->kmn", mono, C)


def _powers(S: np.ndarray, max_power: int) -> list[np.ndarray]:
    out = [np.eye(S.shape[0], dtype=complex)]
    for k in range(1, max_power + 1):
        out.append(np.linalg.matrix_power(S, k))
    return out


def tuple_power(matrices: Sequence[np.ndarray], alpha: MultiIndex) -> np.ndarray:
    """``S^alpha = S_1^{alpha_1} ... S_d^{alpha_d}`` (repeated squaring per coordinate)."""
    n = matrices[0].shape[0]
    out = np.eye(n, dtype=complex)
    for Sj, aj in zip(matrices, alpha):
        if aj:
            out = out @ np.linalg.matrix_power(Sj, aj)
    return out


def eval_tuple(f: MatPoly, S: "CommutingTuple") -> np.ndarray:
    """Functional calculus ``f(S) = sum_alpha S^alpha (x) f_alpha`` of shape ``(nM, nN)``.

    The product order is coordinate order ``1..d``; for a tuple with
    commutator bound ``c`` the ordering ambiguity is of size ``O(c)``.
    """
    if S.dim != f.dim:
        raise DimensionError(f"tuple has d={S.dim}, polynomial has d={f.dim}")
    n = S.size
    M, N = f.shape
    out = np.zeros((n * M, n * N), dtype=complex)
    if not len(f):
        return out
    md = f.multidegree()
    pw = [_powers(Sj, mj) for Sj, mj in zip(S.matrices, md)]
    for alpha, c in f.items():
        Sa = np.eye(n, dtype=complex)
        for j, aj in enumerate(alpha):
            if aj:
                Sa = Sa @ pw[j][aj]
        out += np.kron(Sa, c)
    return out


def partial_derivative(f: MatPoly, j: int) -> MatPoly:
    """``df/dz_j`` for a 0-based coordinate ``j``."""
    if not 0 <= j < f.dim:
        raise IndexError(f"coordinate {j} out of range for d={f.dim}")
    out = {}
    for alpha, c in f.items():
        if alpha[j]:
            beta = alpha[:j] + (alpha[j] - 1,) + alpha[j + 1:]
            out[beta] = alpha[j] * c
    return MatPoly(f.dim, f.shape, out)


def support(f: MatPoly) -> SupportSet:
    return SupportSet.explicit(f.dim, f)


# -- JSON -------------------------------------------------------------------

def complex_to_json(z: complex) -> dict:
    z = complex(z)
    # + 0.0 folds negative zero so canonical files are byte-stable
    return {"re": z.real + 0.0, "im": z.imag + 0.0}


def complex_from_json(obj) -> complex:
    if isinstance(obj, (int, float)):
        return complex(obj)
    return complex(float(obj["re"]), float(obj.get("im", 0.0)))


def matrix_to_json(A: np.ndarray) -> list:
    return [[complex_to_json(x) for x in row] for row in np.asarray(A)]


def matrix_from_json(rows) -> np.ndarray:
    return np.array([[complex_from_json(x) for x in row] for row in rows], dtype=complex)


def poly_to_dict(f: MatPoly) -> dict:
    return {
        "d": f.dim,
        "shape": list(f.shape),
        "terms": [{"alpha": list(a), "coeff": matrix_to_json(c)} for a, c in f.items()],
    }


def poly_from_dict(obj: Mapping) -> MatPoly:
    try:
        d = int(obj["d"])
        shape = tuple(int(s) for s in obj.get("shape", (1, 1)))
        terms: dict[MultiIndex, np.ndarray] = {}
        for k, t in enumerate(obj["terms"]):
            try:
                alpha = multi_index(t["alpha"], d)
                c = matrix_from_json(t["coeff"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"terms[{k}]: {exc}") from exc
            if c.shape != shape:
                raise ValueError(f"terms[{k}]: coefficient shape {c.shape} != {shape}")
            terms[alpha] = terms[alpha] + c if alpha in terms else c
    except KeyError as exc:
        raise ValueError(f"missing field {exc}") from exc
    return MatPoly(d, shape, terms)


def dumps_poly(f: MatPoly) -> str:
    return json.dumps(poly_to_dict(f), indent=1) + "\n"


def loads_poly(text: str) -> MatPoly:
    return poly_from_dict(json.loads(text))

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agler_hadamard import multipliers as mm
from agler_hadamard import tuples as tp
from agler_hadamard.polyalg import MatPoly, eval_point, eval_tuple, indices_up_to_degree, partial_derivative
from agler_hadamard.sampling import random_measure, random_poly


def test_from_moments_holbrook(H, F_holbrook_poly):
    F = mm.from_moments(H)
    for a in indices_up_to_degree(3, 5):
        assert F.coeff(a) == pytest.approx(F_holbrook_poly.scalar_coeff(a), abs=1e-15)


def test_from_moments_crabb_davie(CD, p_cd):
    F = mm.from_moments(CD)
    for a in indices_up_to_degree(3, 6):
        assert F.coeff(a) == p_cd.scalar_coeff(a)


def test_from_moments_zero_vectors(H):
    F = mm.from_moments(tp.PairedTuple(H.tuple, np.zeros(4), np.zeros(4)))
    assert all(F.coeff(a) == 0 for a in indices_up_to_degree(3, 3))


def test_measure_multiplier_examples():
    zeta = np.exp(1j * np.array([0.4, -1.2, 2.0]))
    F = mm.from_measure(tp.DiscreteMeasure.point_mass(zeta))
    G = mm.geometric(zeta)
    for a in indices_up_to_degree(3, 4):
        assert F.coeff(a) == pytest.approx(G.coeff(a), abs=1e-15)
    even = mm.from_measure(tp.DiscreteMeasure(1, [[1], [-1]], [0.5, 0.5]))
    assert [even.coeff((k,)).real for k in range(6)] == [1, 0, 1, 0, 1, 0]
    with pytest.raises(ValueError, match="Schur-class"):
        mm.from_measure(tp.DiscreteMeasure(1, [[1], [-1]], [1.0, 0.5]))


def test_geometric_examples():
    assert mm.geometric([1, 1]).coeff((3, 7)) == 1
    zero = mm.geometric([0, 0])
    assert zero.coeff((0, 0)) == 1 and zero.coeff((1, 0)) == 0
    assert mm.geometric([0.5]).coeff((3,)) == 0.125
    with pytest.raises(ValueError):
        mm.geometric([1.5])


def test_geometric_matches_scalar_tuple(rng):
    zeta = rng.random(3) * np.exp(2j * np.pi * rng.random(3))
    G = mm.geometric(zeta)
    M = mm.from_moments(G.as_paired_tuple())
    for a in indices_up_to_degree(3, 4):
        assert G.coeff(a) == pytest.approx(M.coeff(a), abs=1e-15)


def test_fejer_coefficients():
    F = mm.fejer((2,))
    assert [F.coeff((k,)).real for k in range(5)] == pytest.approx([1, 2 / 3, 1 / 3, 0, 0])
    G = mm.fejer((1, 3))
    assert G.coeff((1, 2)) == pytest.approx(0.5 * 0.5)


def fejer_kernel_by_series(m, theta):
    """Oracle: the defining sum of the Fejer kernel."""
    k = np.arange(-m, m + 1)
    return np.real(np.sum((1 - np.abs(k) / (m + 1)) * np.exp(1j * np.outer(theta, k)), axis=1))


@pytest.mark.parametrize("n", [(0,), (1,), (4,), (2, 3), (1, 1, 2)])
def test_fejer_quadrature_measure(n):
    F = mm.fejer(n)
    mu = F.to_measure()
    assert np.all(mu.weights.real >= 0) and np.all(mu.weights.imag == 0)
    assert mu.total_variation == pytest.approx(1.0, abs=1e-12)
    # weights agree with the series form of the kernel
    for m in n:
        theta = 2 * np.pi * np.arange(2 * m + 1) / (2 * m + 1)
        np.testing.assert_allclose(mm.fejer_kernel(m, theta), fejer_kernel_by_series(m, theta), atol=1e-13)
    for alpha in itertools.product(*(range(m + 1) for m in n)):
        assert mu.moment(alpha) == pytest.approx(F.coeff(alpha), abs=1e-12)


def test_fejer_preserves_constant_term(rng):
    f = random_poly(rng, 2, 4)
    g = mm.apply(mm.fejer((2, 2)), f)
    assert g.coeff((0, 0)) == pytest.approx(f.coeff((0, 0)))
    for a, c in g.items():
        np.testing.assert_allclose(c, f.coeff(a) * max(0, 1 - a[0] / 3) * max(0, 1 - a[1] / 3))


def test_bernstein_multiplier(rng):
    f = MatPoly.monomial((4,))
    assert mm.apply(mm.bernstein(0, (4,)), f) == f
    assert len(mm.apply(mm.bernstein(1, (2, 2)), MatPoly.constant(2, 3.0))) == 0
    n = (3, 2, 4)
    f = MatPoly.scalar(3, {a: complex(*rng.standard_normal(2))
                           for a in itertools.product(range(4), range(3), range(5))})
    for j in range(3):
        lhs = mm.apply(mm.bernstein(j, n), f)
        rhs = (MatPoly.variable(3, j) * partial_derivative(f, j)) * (1 / n[j])
        assert lhs.allclose(rhs, rtol=1e-15, atol=0)
    with pytest.raises(ValueError):
        mm.bernstein(0, (0, 1))


def test_inverse_one_minus_diagonal_extraction():
    F = mm.diagonal_extraction(3, 9)
    for a in indices_up_to_degree(3, 9):
        expected = 1 if a[0] == a[1] == a[2] else 0
        assert F.coeff(a) == expected
    assert F.truncated((4, 4, 4)) and F.coeff((4, 4, 4)) == 0


def test_inverse_one_minus_examples():
    zero = mm.inverse_one_minus(MatPoly.zero(2), 5)
    assert zero.coeff((0, 0)) == 1 and zero.coeff((1, 0)) == 0
    half = mm.inverse_one_minus(MatPoly.scalar(1, {(1,): 0.5}), 10)
    assert [half.coeff((j,)) for j in range(11)] == [2.0**-j for j in range(11)]
    with pytest.raises(ValueError, match="b\\(0\\)"):
        mm.inverse_one_minus(MatPoly.constant(1, 0.1), 3)


def test_inverse_one_minus_multivariate_series():
    # 1/(1 - (z1+z2)/2) has coefficients binom(a1+a2, a1) / 2^(a1+a2)
    from math import comb

    F = mm.inverse_one_minus(MatPoly.scalar(2, {(1, 0): 0.5, (0, 1): 0.5}), 8)
    for a in indices_up_to_degree(2, 8):
        assert F.coeff(a) == pytest.approx(comb(sum(a), a[0]) / 2 ** sum(a), abs=1e-15)


def test_apply_raises_past_truncation_cap():
    F = mm.diagonal_extraction(2, 4)
    with pytest.raises(mm.TruncationError):
        mm.apply(F, MatPoly.monomial((3, 3)))
    with pytest.raises(mm.TruncationError):
        mm.apply(mm.ShiftedMultiplier(F, (1, 1)), MatPoly.monomial((2, 1)))


def test_shift_examples(H):
    F = mm.from_moments(H)
    same = mm.shift(F, (0, 0, 0))
    assert all(same.coeff(a) == F.coeff(a) for a in indices_up_to_degree(3, 3))
    assert mm.shift(F, (2, 0, 0)).coeff((0, 0, 0)) == pytest.approx(1, abs=1e-15)
    G = mm.shift(F, (1, 0, 0))
    assert G.coeff((1, 0, 0)) == pytest.approx(1, abs=1e-15)
    assert G.coeff((0, 1, 0)) == pytest.approx(-0.5, abs=1e-15)
    with pytest.raises(TypeError):
        mm.shift(mm.geometric([1, 1, 1]), (1, 0, 0))


def test_apply_examples(P, H):
    g = mm.apply(mm.from_moments(H), P)
    A = eval_tuple(P, H.tuple)
    assert eval_point(g, [1, 1, 1])[0, 0] == pytest.approx(np.vdot(H.y, A @ H.x), abs=1e-12)
    assert mm.apply(mm.geometric([1, 1, 1]), P) == P
    with pytest.raises(ValueError):
        mm.apply(mm.geometric([1, 1]), P)


def test_scaled_and_explicit(P):
    F = mm.ScaledMultiplier(mm.explicit(P), 2j)
    assert F.coeff((1, 1, 0)) == -4j
    assert F.coeff((1, 0, 0)) == 0


def test_preservation_identity_holbrook(P, H):
    for s in range(5):
        S = tp.random_generic(3, 3, seed=s)
        assert mm.check_preservation_identity(P, mm.from_moments(H), S, samples=8, seed=s) <= 1e-10


def test_preservation_identity_geometric(rng):
    zeta = rng.random(3) * np.exp(2j * np.pi * rng.random(3))
    F = mm.geometric(zeta)
    f = random_poly(rng, 3, 4, (2, 2))
    S = tp.random_generic(3, 3, seed=4)
    assert mm.check_preservation_identity(f, F, S, seed=1) <= 1e-10
    np.testing.assert_allclose(eval_tuple(mm.apply(F, f), S), eval_tuple(f, tp.scale(S, zeta)), atol=1e-10)


def test_preservation_identity_zero_polynomial(H):
    S = tp.random_generic(3, 2, seed=0)
    assert mm.check_preservation_identity(MatPoly.zero(3), mm.from_moments(H), S) == 0


def test_preservation_needs_moment_realisation(P):
    with pytest.raises(TypeError):
        mm.check_preservation_identity(P, mm.diagonal_extraction(3, 6), tp.random_generic(3, 2, seed=0))


def test_schur_identity_examples(H, rng):
    for _ in range(10):
        f = random_poly(rng, 3, 4)
        assert mm.check_schur_identity(f, H, np.exp(2j * np.pi * rng.random(3))) <= 1e-10
    one = MatPoly.constant(3, 1.0)
    assert mm.check_schur_identity(one, H, [1, 1, 1]) == 0
    f = random_poly(rng, 3, 3)
    assert mm.check_schur_identity(f, H, [0, 0, 0]) <= 1e-15


def test_multiplier_json_round_trip(rng, H):
    mu = random_measure(rng, 3, 4, 0.9)
    cases = [
        mm.from_moments(H),
        mm.from_measure(mu),
        mm.explicit(random_poly(rng, 3, 3)),
        mm.fejer((1, 2, 3)),
        mm.geometric(rng.random(3) * np.exp(1j * rng.random(3))),
        mm.inverse_one_minus(MatPoly.scalar(3, {(1, 0, 0): 0.3, (0, 1, 1): 0.2j}), 6),
        mm.ShiftedMultiplier(mm.fejer((3, 3, 3)), (1, 0, 2)),
        mm.ScaledMultiplier(mm.geometric([1, -1, 1j]), 0.5 - 0.25j),
    ]
    for F in cases:
        G = mm.loads_multiplier(mm.dumps_multiplier(F))
        assert type(G) is type(F)
        for a in indices_up_to_degree(3, 5):
            assert abs(G.coeff(a) - F.coeff(a)) <= 1e-12
    with pytest.raises(ValueError, match="unknown"):
        mm.multiplier_from_dict({"kind": "nope"})


# -- properties ---------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["holbrook", "crabb_davie", "generic"]))
def test_shift_coherence(seed, which):
    rng = np.random.default_rng(seed)
    if which == "generic":
        T = tp.random_generic(3, 4, seed=seed)
        x = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        P = tp.PairedTuple(T, x / np.linalg.norm(x), np.eye(4)[0])
    else:
        P = tp.NAMED_TUPLES[which]()
    F = mm.from_moments(P)
    total = int(rng.integers(0, 11))
    ab = rng.multinomial(total, [1 / 3] * 3)
    beta = tuple(int(rng.integers(0, b + 1)) for b in ab)
    alpha = tuple(int(a - b) for a, b in zip(ab, beta))
    assert abs(mm.shift(F, beta).coeff(alpha) - F.coeff(tuple(int(v) for v in ab))) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_measure_and_moment_forms_agree(seed, d):
    rng = np.random.default_rng(seed)
    mu = random_measure(rng, d, int(rng.integers(1, 12)), float(rng.uniform(0.01, 1)))
    F, G = mm.from_measure(mu), mm.from_moments(tp.from_measure(mu))
    for a in indices_up_to_degree(d, 5):
        assert abs(F.coeff(a) - G.coeff(a)) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_moment_multipliers_are_bounded(seed):
    rng = np.random.default_rng(seed)
    T = tp.random_generic(3, int(rng.integers(1, 6)), seed=seed)
    x = rng.standard_normal(T.size) + 1j * rng.standard_normal(T.size)
    y = rng.standard_normal(T.size) + 1j * rng.standard_normal(T.size)
    F = mm.from_moments(tp.PairedTuple(T, x / np.linalg.norm(x), y / np.linalg.norm(y)))
    for _ in range(10):
        alpha = tuple(int(v) for v in rng.multinomial(int(rng.integers(0, 13)), [1 / 3] * 3))
        assert abs(F.coeff(alpha)) <= 1 + 1e-10

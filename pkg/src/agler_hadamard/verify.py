"""Reproduction suite: numeric checks of the von Neumann counterexamples and preservation identities.

:func:`run_verify` returns a JSON-ready report. Every result line carries the
claim it checks, the observed value, the tolerance or bounds and a pass flag;
the report contains no timings, so the same seed reproduces it byte for byte.
"""
from __future__ import annotations

import itertools
from typing import Callable

import numpy as np

from . import multipliers as mm
from . import norms as nm
from . import tuples as tp
from .polyalg import MatPoly, eval_point, eval_tuple, indices_up_to_degree
from .sampling import random_box_poly, random_measure, random_poly, random_torus

REPORT_VERSION = "agler-hadamard-report/1"


def holbrook_poly() -> MatPoly:
    """``z1^2 + z2^2 + z3^2 - 2(z1 z2 + z2 z3 + z1 z3)``."""
    return MatPoly.scalar(3, {(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): 1,
                              (1, 1, 0): -2, (0, 1, 1): -2, (1, 0, 1): -2})


def holbrook_multiplier_poly() -> MatPoly:
    return MatPoly.scalar(3, {(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): 1,
                              (1, 1, 0): -0.5, (0, 1, 1): -0.5, (1, 0, 1): -0.5})


def crabb_davie_poly() -> MatPoly:
    """``z1 z2 z3 - z1^3 - z2^3 - z3^3``."""
    return MatPoly.scalar(3, {(1, 1, 1): 1, (3, 0, 0): -1, (0, 3, 0): -1, (0, 0, 3): -1})


def holbrook_table(alpha) -> float:
    if sum(alpha) != 2:
        return 0.0
    return 1.0 if max(alpha) == 2 else -0.5


def crabb_davie_table(alpha) -> float:
    if alpha == (1, 1, 1):
        return 1.0
    if sum(alpha) == 3 and max(alpha) == 3:
        return -1.0
    return 0.0


class Report:
    def __init__(self, command: str, inputs: dict):
        self.command = command
        self.inputs = inputs
        self.results: list[dict] = []
        self.witnesses: dict = {}

    def check_close(self, name: str, claim: str, value, expected, tol: float) -> bool:
        err = abs(complex(value) - complex(expected))
        ok = bool(err <= tol)
        self.results.append({"name": name, "claim": claim, "value": _num(value), "expected": _num(expected),
                             "error": float(err), "tolerance": tol, "passed": ok})
        return ok

    def check_at_most(self, name: str, claim: str, value: float, bound: float) -> bool:
        ok = bool(value <= bound)
        self.results.append({"name": name, "claim": claim, "value": float(value), "upper": bound, "passed": ok})
        return ok

    def check_range(self, name: str, claim: str, value: float, lo: float, hi: float | None = None) -> bool:
        ok = bool(value >= lo and (hi is None or value <= hi))
        row = {"name": name, "claim": claim, "value": float(value), "lower": lo, "passed": ok}
        if hi is not None:
            row["upper"] = hi
        self.results.append(row)
        return ok

    def record(self, name: str, value) -> None:
        self.results.append({"name": name, "value": value, "passed": True})

    @property
    def passed(self) -> bool:
        return all(r["passed"] for r in self.results)

    @property
    def failures(self) -> list[str]:
        return [r["name"] for r in self.results if not r["passed"]]

    def to_dict(self) -> dict:
        return {"version": REPORT_VERSION, "command": self.command, "inputs": self.inputs,
                "results": self.results, "witnesses": self.witnesses, "all_passed": self.passed}


def _num(v):
    v = complex(v)
    if v.imag == 0:
        return v.real
    return {"re": v.real, "im": v.imag}


def _max_table_error(P: tp.PairedTuple, table: Callable, max_degree: int) -> float:
    mom = tp.moments(P, indices_up_to_degree(3, max_degree))
    return max(abs(v - table(a)) for a, v in mom.items())


def run_verify(
    seed: int = 0,
    torus_grid: int = 64,
    refine: int = 50,
    agler_trials: int = 200,
    agler_sizes: tuple[int, ...] = (2, 3, 4, 6),
    pool: str = "all",
    workers: int = 1,
    holbrook_factory: Callable[[], tp.PairedTuple] = tp.holbrook,
) -> Report:
    inputs = {"seed": seed, "torus_grid": torus_grid, "refine": refine, "agler_trials": agler_trials,
              "agler_sizes": list(agler_sizes), "pool": pool}
    rep = Report("verify", inputs)
    tuple_pool = nm.TuplePool.from_name(pool, sizes=tuple(agler_sizes))
    rng = np.random.default_rng(seed)

    # Holbrook
    H = holbrook_factory()
    P = holbrook_poly()
    rep.check_at_most("holbrook moments", "<T^a e,f> = 1 on squares, -1/2 on cross terms, 0 otherwise (|a| <= 4)",
                      _max_table_error(H, holbrook_table, 4), 1e-12)
    PT = eval_tuple(P, H.tuple)
    rep.check_close("holbrook operator norm", "||P(T)|| = 6", nm.operator_norm(PT), 6.0, 1e-9)
    pairing = np.vdot(H.y, PT @ H.x)
    rep.check_close("holbrook pairing", "<P(T)e,f> = 6", pairing, 6.0, 1e-12)
    sup_P = nm.sup_norm_torus(P, torus_grid, refine)
    rep.check_range("holbrook torus sup", "sup_T3 |P| estimate in [5 - 1e-6, 5.2]", sup_P.value, 5 - 1e-6, 5.2)
    agler_P = nm.agler_lower_bound(P, tuple_pool, agler_trials, seed, workers)
    upper_P = nm.torus_upper_bound(P, torus_grid)
    rep.check_range("holbrook agler lower bound", "max ||P(S)|| over pool >= 6 - 1e-9", agler_P.value, 6 - 1e-9)
    rep.check_range("holbrook certified gap", "agler lower bound - certified torus upper bound >= 0.8",
                    agler_P.value - upper_P, 0.8)
    F = mm.from_moments(H)
    rep.check_close("holbrook hadamard identity", "(P*F)(1,1,1) = <P(T)e,f>",
                    eval_point(mm.apply(F, P), [1, 1, 1])[0, 0], pairing, 1e-12)
    F_expected = holbrook_multiplier_poly()
    err = max(abs(F.coeff(a) - F_expected.scalar_coeff(a)) for a in indices_up_to_degree(3, 4))
    rep.check_at_most("holbrook multiplier coefficients",
                      "F = z1^2+z2^2+z3^2 - (z1z2+z2z3+z1z3)/2 (|a| <= 4)", err, 1e-12)
    rep.witnesses["holbrook"] = {"torus": sup_P.to_dict(), "agler": agler_P.to_dict(), "torus_upper": upper_P}

    # Crabb-Davie
    C = tp.crabb_davie()
    p = crabb_davie_poly()
    rep.check_at_most("crabb-davie moments", "moment table: <T1T2T3x,y> = 1, <T_j T_i^2 x,y> = -delta_ij, else 0",
                      _max_table_error(C, crabb_davie_table, 5), 1e-12)
    pT = eval_tuple(p, C.tuple)
    cd_pair = np.vdot(C.y, pT @ C.x)
    rep.check_close("crabb-davie pairing", "<p(T)x,y> = 4", cd_pair, 4.0, 1e-12)
    sup_p = nm.sup_norm_torus(p, torus_grid, refine)
    rep.check_range("crabb-davie torus sup", "sup_T3 |p| estimate in [3.55, 3.70]", sup_p.value, 3.55, 3.70)
    rep.check_range("crabb-davie observed gap", "<p(T)x,y> - torus estimate >= 0.3", abs(cd_pair) - sup_p.value, 0.3)
    Fc = mm.from_moments(C)
    err = max(abs(Fc.coeff(a) - crabb_davie_poly().scalar_coeff(a)) for a in indices_up_to_degree(3, 5))
    rep.check_at_most("crabb-davie multiplier coefficients", "F = z1z2z3 - z1^3 - z2^3 - z3^3", err, 1e-12)
    rep.witnesses["crabb_davie"] = {"torus": sup_p.to_dict()}

    # preservation identity
    worst = 0.0
    for i in range(100):
        F_i = _sweep_multiplier(rng, i)
        shape = (1, 1) if i % 2 == 0 else (2, 2)
        f = random_poly(rng, 3, int(rng.integers(0, 5)), shape)
        S = tp.random_generic(3, int(rng.integers(1, 5)), 0.999, 1e3, int(rng.integers(2**63)))
        worst = max(worst, mm.check_preservation_identity(f, F_i, S, samples=4, seed=int(rng.integers(2**63))))
    rep.check_at_most("preservation identity sweep",
                      "<(f*F)(S)v,w> = <f(T(x)S)(x(x)v), y(x)w> over 100 random instances", worst, 1e-10)

    # Schur identity
    worst = 0.0
    named = [tp.holbrook(), tp.crabb_davie()]
    for i in range(100):
        Pi = named[i % 2] if i < 50 else tp.from_measure(random_measure(rng, 3, int(rng.integers(1, 8))))
        f = random_poly(rng, 3, int(rng.integers(0, 5)))
        worst = max(worst, mm.check_schur_identity(f, Pi, random_torus(rng, 3)))
    rep.check_at_most("schur identity sweep",
                      "<f(z.T)x,y> = sum f_a <T^a x,y> z^a over 100 random instances", worst, 1e-10)

    # shift corollary
    worst = 0.0
    for F_base in (mm.from_moments(H), mm.from_moments(C)):
        for _ in range(25):
            beta = tuple(int(b) for b in rng.integers(0, 4, 3))
            alpha = tuple(int(a) for a in rng.integers(0, 4, 3))
            G = mm.shift(F_base, beta)
            worst = max(worst, abs(G.coeff(alpha) - F_base.coeff(tuple(a + b for a, b in zip(alpha, beta)))))
    rep.check_at_most("shift corollary", "shift(F, b)_a = F_(a+b)", worst, 1e-12)

    # Sheil-Small coherence
    worst = 0.0
    for _ in range(50):
        d = int(rng.integers(1, 4))
        mu = random_measure(rng, d, int(rng.integers(1, 21)), float(rng.uniform(0.1, 1.0)))
        F_mu = mm.from_measure(mu)
        F_T = mm.from_moments(tp.from_measure(mu))
        for alpha in indices_up_to_degree(d, 4):
            worst = max(worst, abs(F_mu.coeff(alpha) - F_T.coeff(alpha)))
    rep.check_at_most("sheil-small coherence", "int w^a dmu = <M^a x, y> for the multiplication tuple", worst, 1e-12)

    # Fejer quadrature
    worst_w, worst_mass, worst_mom = 0.0, 0.0, 0.0
    for n in [(0,), (2,), (5,), (1, 3), (2, 2), (1, 2, 3)]:
        Ff = mm.fejer(n)
        mu = Ff.to_measure()
        worst_w = max(worst_w, -float(np.min(mu.weights.real)), float(np.max(np.abs(mu.weights.imag))))
        worst_mass = max(worst_mass, abs(float(np.sum(mu.weights.real)) - 1))
        for alpha in itertools.product(*(range(m + 1) for m in n)):
            worst_mom = max(worst_mom, abs(mu.moment(alpha) - Ff.coeff(alpha)))
    rep.check_at_most("fejer quadrature weights", "Fejer quadrature weights are non-negative", worst_w, 1e-15)
    rep.check_at_most("fejer quadrature mass", "Fejer quadrature has total mass 1", worst_mass, 1e-12)
    rep.check_at_most("fejer quadrature moments", "quadrature moments equal Fejer weights on the box", worst_mom, 1e-12)

    # Bernstein
    ok, worst_excess = True, -np.inf
    for _ in range(200):
        d = int(rng.integers(1, 4))
        n = tuple(int(x) for x in rng.integers(1, 6, d))
        f = random_box_poly(rng, n)
        for line in nm.bernstein_check(f, n, grid_per_dim=_bernstein_grid(d), refine_steps=10):
            ok &= line.passed
            worst_excess = max(worst_excess, line.derivative_sup - line.sup)
    rep.check_at_most("bernstein sweep", "sup|d_j f|/n_j <= sup|f| + 1e-8 for 200 random f", float(worst_excess), 1e-8)
    ext = nm.bernstein_check(MatPoly.monomial((5,)), (5,), 64, 10)[0]
    rep.check_close("bernstein extremal", "sup|(z^5)'|/5 = sup|z^5|", ext.derivative_sup, ext.sup, 1e-8)
    return rep


def _bernstein_grid(d: int) -> int:
    return {1: 128, 2: 64, 3: 32}[d]


def _sweep_multiplier(rng: np.random.Generator, i: int) -> mm.Multiplier:
    kind = i % 4
    if kind == 0:
        return mm.from_moments(tp.holbrook())
    if kind == 1:
        return mm.from_moments(tp.crabb_davie())
    if kind == 2:
        return mm.from_measure(random_measure(rng, 3, int(rng.integers(1, 8)), float(rng.uniform(0.1, 1.0))))
    zeta = rng.uniform(0, 1, 3) ** 0.5 * np.exp(2j * np.pi * rng.random(3))
    return mm.geometric(zeta)

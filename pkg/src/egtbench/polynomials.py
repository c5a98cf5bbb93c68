"""Counting positive real roots of univariate polynomials.

Two counters live here:

``count_positive_roots``
    Sturm sequences in exact integer arithmetic.  The float coefficients
    are converted to integers without rounding, so the count is exact for
    the polynomial as stored.

``bernstein_positive_roots``
    A batched counter for many polynomials of the same degree.  Under
    ``x = y / (1 + y)`` the two-strategy polynomial becomes a Bernstein
    polynomial on (0, 1) whose coefficients are the raw betas, so
    Descartes' rule of signs on Bernstein coefficients plus de Casteljau
    subdivision isolates the roots.  Sign decisions are accepted only when
    every coefficient clears a rounding-error bound; rows that do not are
    recounted with Sturm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Sequence

import numpy as np

TRIM_RTOL = 1e-14
MAX_SUBDIVISION_DEPTH = 40
_EPS = np.finfo(float).eps


class DegeneratePolynomialError(ValueError):
    """The polynomial vanishes identically."""


@dataclass(frozen=True)
class UnivariatePolynomial:
    """``P(y) = sum(coeffs[k] * y**k)``.

    Highest-degree coefficients below ``TRIM_RTOL * max|c|`` are dropped.
    """

    coeffs: tuple[float, ...]

    def __post_init__(self) -> None:
        c = [float(v) for v in self.coeffs]
        if not all(math.isfinite(v) for v in c):
            raise ValueError("coefficients must be finite")
        scale = max((abs(v) for v in c), default=0.0)
        while c and abs(c[-1]) <= TRIM_RTOL * scale:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        """Degree, or -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def scale(self) -> float:
        return max((abs(v) for v in self.coeffs), default=0.0)

    def __call__(self, y):
        return np.polynomial.polynomial.polyval(y, self.coeffs) if self.coeffs else 0.0 * np.asarray(y)

    def derivative(self) -> "UnivariatePolynomial":
        return UnivariatePolynomial(tuple(k * c for k, c in enumerate(self.coeffs) if k))

    def __mul__(self, factor: float) -> "UnivariatePolynomial":
        return UnivariatePolynomial(tuple(factor * c for c in self.coeffs))

    __rmul__ = __mul__


@dataclass(frozen=True)
class RootSummary:
    count: int
    stable: int
    marginal: int
    has_multiple: bool = False


# -- exact integer polynomial helpers (ascending coefficient lists) ---------


def _integer_coeffs(values: Sequence[Fraction]) -> list[int]:
    den = 1
    for f in values:
        den = math.lcm(den, f.denominator)
    return [int(f * den) for f in values]


def _exact(p: UnivariatePolynomial) -> list[int]:
    return _integer_coeffs([Fraction(c) for c in p.coeffs])


def _primitive(p: list[int]) -> list[int]:
    g = 0
    for a in p:
        g = math.gcd(g, a)
        if g == 1:
            return p
    return [a // g for a in p] if g > 1 else p


def _negated_remainder(a: list[int], b: list[int]) -> list[int]:
    """A positive multiple of ``-(a mod b)``, made primitive."""
    a = list(a)
    db = len(b) - 1
    lead = b[-1]
    flips = False
    while len(a) - 1 >= db and a:
        la = a[-1]
        shift = len(a) - 1 - db
        if lead != 1:
            a = [v * lead for v in a]
            flips ^= lead < 0
        for i in range(db):
            a[i + shift] -= la * b[i]
        a.pop()
        while a and a[-1] == 0:
            a.pop()
    if not flips:
        a = [-v for v in a]
    return _primitive(a) if a else a


def sturm_chain(p: list[int]) -> list[list[int]]:
    """Sturm sequence of an integer polynomial; the last entry is gcd(p, p')."""
    chain = [_primitive(p)]
    if len(p) < 2:
        return chain
    chain.append(_primitive([k * p[k] for k in range(1, len(p))]))
    while len(chain[-1]) > 1:
        r = _negated_remainder(chain[-2], chain[-1])
        if not r:
            break
        chain.append(r)
    return chain


def _variations(values) -> int:
    count = 0
    last = 0
    for v in values:
        if v == 0:
            continue
        if last and (v > 0) != (last > 0):
            count += 1
        last = v
    return count


def _sign_at(p: list[int], x: Fraction | None) -> int:
    """Sign of p at a rational x >= 0; ``None`` means +infinity."""
    if not p:
        return 0
    v = p[-1] if x is None else _homogeneous_value(p, x.numerator, x.denominator)
    return (v > 0) - (v < 0)


def _homogeneous_value(p: list[int], u: int, w: int) -> int:
    """``p(u / w) * w**deg`` by Horner's rule; same sign as p(u/w) for w > 0."""
    v = 0
    wp = 1
    for c in reversed(p):
        v = v * u + c * wp
        wp *= w
    return v


def _count_between(chain: list[list[int]], a: Fraction | None, b: Fraction | None) -> int:
    """Distinct roots in (a, b]; ``a=None`` means 0 via constant terms (a must not be a root)."""
    va = _variations([_sign_at(q, a) for q in chain]) if a is not None else _variations([q[0] for q in chain])
    vb = _variations([_sign_at(q, b) for q in chain])
    return va - vb


def _strip(p: list[int]) -> list[int]:
    lo = 0
    while lo < len(p) and p[lo] == 0:
        lo += 1
    p = p[lo:]
    while p and p[-1] == 0:
        p.pop()
    return p


def _cauchy_bound(p: list[int]) -> Fraction:
    lead = abs(p[-1])
    return 1 + Fraction(max(abs(c) for c in p[:-1]), lead) if len(p) > 1 else Fraction(1)


def _isolate(p: list[int], chain: list[list[int]]) -> list[tuple[Fraction, Fraction]]:
    """Disjoint intervals (a, b) each holding exactly one distinct positive root; p(a), p(b) != 0."""
    out = []
    stack = [(Fraction(0), _cauchy_bound(p))]
    while stack:
        a, b = stack.pop()
        k = _count_between(chain, a if a else None, b)
        if k == 0:
            continue
        if k == 1:
            out.append((a, b))
            continue
        for frac in (Fraction(1, 2), Fraction(1, 3), Fraction(2, 3), Fraction(2, 5), Fraction(3, 5)):
            mid = a + (b - a) * frac
            if _sign_at(p, mid) != 0:
                break
        stack.append((mid, b))
        stack.append((a, mid))
    return sorted(out)


def _summarise(p: list[int]) -> RootSummary:
    p = _strip(p)
    if len(p) <= 1:
        if not p:
            raise DegeneratePolynomialError("polynomial is identically zero")
        return RootSummary(0, 0, 0)
    chain = sturm_chain(p)
    count = _variations([q[0] for q in chain]) - _variations([q[-1] for q in chain])
    gcd = chain[-1]
    if len(gcd) == 1 or count == 0:
        # simple roots alternate crossing direction starting from sign p(0)
        stable = (count + 1) // 2 if p[0] > 0 else count // 2
        return RootSummary(count, stable, 0)
    gcd_chain = sturm_chain(gcd)
    stable = marginal = 0
    for a, b in _isolate(p, chain):
        if _count_between(gcd_chain, a if a else None, b) > 0:
            marginal += 1
        elif (_sign_at(p, a) if a else (p[0] > 0) - (p[0] < 0)) > 0:
            stable += 1
    return RootSummary(count, stable, marginal, has_multiple=True)


def positive_root_summary(p: UnivariatePolynomial) -> RootSummary:
    """Distinct roots in (0, inf) with replicator stability.

    A simple root is stable when P decreases through it.  Multiple roots
    (P' = 0 there) are reported as marginal.
    """
    if p.is_zero:
        raise DegeneratePolynomialError("polynomial is identically zero")
    return _summarise(_exact(p))


def count_positive_roots(p: UnivariatePolynomial) -> int:
    """Number of distinct real roots of ``p`` in the open interval (0, inf)."""
    return positive_root_summary(p).count


def count_stable_positive_roots(p: UnivariatePolynomial) -> tuple[int, int]:
    """``(stable, marginal)`` counts for the positive roots of ``p``."""
    s = positive_root_summary(p)
    return s.stable, s.marginal


def isolate_positive_roots(p: UnivariatePolynomial, tol: float = 1e-13) -> list[float]:
    """Distinct positive roots, each refined by exact bisection to relative width ``tol``."""
    if p.is_zero:
        raise DegeneratePolynomialError("polynomial is identically zero")
    q = _strip(_exact(p))
    if len(q) <= 1:
        return []
    chain = sturm_chain(q)
    # bisect on the square-free part so sign changes mark every root
    gcd = chain[-1]
    sqfree = q if len(gcd) == 1 else _exact_divide(q, gcd)
    roots = []
    for a, b in _isolate(q, chain):
        sa = _sign_at(sqfree, a) if a else (sqfree[0] > 0) - (sqfree[0] < 0)
        while b - a > tol * b:
            mid = (a + b) / 2
            sm = _sign_at(sqfree, mid)
            if sm == 0:
                a = b = mid
                break
            if sm == sa:
                a = mid
            else:
                b = mid
        roots.append(float((a + b) / 2))
    return roots


def _exact_divide(p: list[int], q: list[int]) -> list[int]:
    """Quotient p / q over the rationals, scaled to a primitive integer polynomial."""
    num = [Fraction(c) for c in p]
    out = [Fraction(0)] * (len(p) - len(q) + 1)
    for i in range(len(out) - 1, -1, -1):
        out[i] = num[i + len(q) - 1] / q[-1]
        for j, c in enumerate(q):
            num[i + j] -= out[i] * c
    return _primitive(_integer_coeffs(out))


# -- batched Bernstein subdivision -----------------------------------------


def _de_casteljau_halves(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m = rows.shape[1]
    left = np.empty_like(rows)
    right = np.empty_like(rows)
    work = rows
    left[:, 0] = work[:, 0]
    right[:, -1] = work[:, -1]
    for j in range(1, m):
        work = 0.5 * (work[:, :-1] + work[:, 1:])
        left[:, j] = work[:, 0]
        right[:, m - 1 - j] = work[:, -1]
    return left, right


@dataclass(frozen=True)
class BatchRootCounts:
    total: np.ndarray
    stable: np.ndarray
    marginal: np.ndarray
    degenerate: np.ndarray
    exact_fallbacks: int


def binomial_weights(m: int) -> np.ndarray:
    return np.array([float(comb(m - 1, k)) for k in range(m)])


def bernstein_positive_roots(betas: np.ndarray) -> BatchRootCounts:
    """Positive-root counts of ``sum_k betas[t, k] * C(m-1, k) * y**k`` for every row t.

    Equivalent to :func:`positive_root_summary` on each row's
    :func:`two_strategy polynomial <egtbench.equilibria.two_strategy_polynomial>`.
    """
    betas = np.asarray(betas, dtype=float)
    if betas.ndim != 2 or betas.shape[1] < 2:
        raise ValueError("betas must have shape (trials, degree + 1) with degree >= 1")
    n_rows, m = betas.shape
    total = np.zeros(n_rows, dtype=np.int64)
    stable = np.zeros(n_rows, dtype=np.int64)
    marginal = np.zeros(n_rows, dtype=np.int64)
    degenerate = ~np.any(betas != 0, axis=1)

    weighted = betas * binomial_weights(m)
    scale_c = np.max(np.abs(weighted), axis=1)
    # rows whose polynomial form gets trimmed or touches a boundary go to Sturm
    uncertain = (np.abs(weighted[:, -1]) <= TRIM_RTOL * scale_c) | (betas[:, 0] == 0)
    uncertain &= ~degenerate

    scale = np.max(np.abs(betas), axis=1)
    owner = np.flatnonzero(~degenerate & ~uncertain)
    rows = betas[owner]
    depth = 0
    while rows.shape[0]:
        tol = 8.0 * (depth + 1) * m * _EPS * scale[owner]
        shaky = np.any(np.abs(rows) <= tol[:, None], axis=1)
        uncertain[owner[shaky]] = True
        keep = ~uncertain[owner]
        rows, owner = rows[keep], owner[keep]
        positive = rows > 0
        changes = np.count_nonzero(positive[:, 1:] != positive[:, :-1], axis=1)
        one = changes == 1
        np.add.at(total, owner[one], 1)
        np.add.at(stable, owner[one], positive[one, 0].astype(np.int64))
        more = changes >= 2
        if depth >= MAX_SUBDIVISION_DEPTH:
            uncertain[owner[more]] = True
            break
        left, right = _de_casteljau_halves(rows[more])
        rows = np.vstack([left, right])
        owner = np.concatenate([owner[more], owner[more]])
        depth += 1

    fallback = np.flatnonzero(uncertain)
    for t in fallback:
        s = positive_root_summary(UnivariatePolynomial(tuple(weighted[t])))
        total[t], stable[t], marginal[t] = s.count, s.stable, s.marginal
    return BatchRootCounts(total, stable, marginal, degenerate, int(fallback.size))

"""Symmetric d-player n-strategy games on the strategy simplex.

Payoffs are indexed by focal strategy and by the *composition* of the
d-1 co-players (how many of them use each strategy), never by ordered
co-player tuples.  Strategy indices are 0-based throughout.

Two coordinate systems appear:

* simplex frequencies ``x`` (n entries summing to one), and
* ratio coordinates ``y_j = x_j / x_n`` for j < n, in which the
  equal-fitness condition becomes a system of n-1 polynomials of
  degree d-1 (see :func:`evaluate_system`).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, factorial
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

SIMPLEX_TOL = 1e-12
FITNESS_TOL = 1e-8


@lru_cache(maxsize=None)
def compositions(n: int, total: int) -> tuple[tuple[int, ...], ...]:
    """All n-tuples of non-negative integers summing to ``total``.

    Ordered lexicographically on the first n-1 entries, so for n=2 the
    position of ``(k, total-k)`` is ``k``.
    """
    if n == 1:
        return ((total,),)
    out = []
    for head in range(total + 1):
        for tail in compositions(n - 1, total - head):
            out.append((head,) + tail)
    # lexicographic on the leading entries; the last entry is implied
    out.sort(key=lambda k: k[:-1])
    return tuple(out)


def n_compositions(n: int, d: int) -> int:
    """Number of co-player compositions, C(d+n-2, n-1)."""
    return comb(d + n - 2, n - 1)


def multinomial(total: int, parts: Iterable[int]) -> int:
    parts = list(parts)
    if sum(parts) != total:
        raise ValueError("parts must sum to total")
    out = factorial(total)
    for p in parts:
        out //= factorial(p)
    return out


@lru_cache(maxsize=None)
def _layout(n: int, d: int) -> tuple[np.ndarray, np.ndarray]:
    ks = np.array(compositions(n, d - 1), dtype=np.int64)
    weights = np.array([multinomial(d - 1, k) for k in ks.tolist()], dtype=float)
    ks.setflags(write=False)
    weights.setflags(write=False)
    return ks, weights


def _check_shape(n: int, d: int) -> None:
    if int(n) != n or n < 2:
        raise ValueError(f"strategy count n must be an integer >= 2, got {n}")
    if int(d) != d or d < 2:
        raise ValueError(f"player count d must be an integer >= 2, got {d}")


@dataclass(frozen=True)
class SimplexPoint:
    """A point of the (n-1)-simplex."""

    x: np.ndarray

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float).copy()
        if x.ndim != 1 or x.size < 2:
            raise ValueError("simplex point needs at least two coordinates")
        if np.any(x < -SIMPLEX_TOL) or abs(x.sum() - 1.0) > SIMPLEX_TOL * max(1, x.size):
            raise ValueError(f"point {x} is not on the simplex")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def interior(self) -> bool:
        return bool(np.all(self.x > 0))

    def to_ratio(self) -> np.ndarray:
        """Ratio coordinates x_j / x_n, j < n. Requires x_n > 0."""
        if self.x[-1] <= 0:
            raise ValueError("ratio coordinates undefined when the last frequency is 0")
        return self.x[:-1] / self.x[-1]

    @classmethod
    def from_ratio(cls, y: Sequence[float]) -> "SimplexPoint":
        y = np.asarray(y, dtype=float)
        if np.any(y < 0):
            raise ValueError("ratio coordinates must be non-negative")
        full = np.append(y, 1.0)
        return cls(full / full.sum())

    def tolist(self) -> list[float]:
        return self.x.tolist()


def as_simplex(y) -> SimplexPoint:
    return y if isinstance(y, SimplexPoint) else SimplexPoint(np.asarray(y, dtype=float))


@dataclass(frozen=True)
class PayoffTensor:
    """Payoffs ``values[i, m]`` of a focal i-strategist facing composition m.

    ``m`` indexes :func:`compositions` ``(n, d-1)``.
    """

    n: int
    d: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        _check_shape(self.n, self.d)
        v = np.array(self.values, dtype=float)
        expected = (self.n, n_compositions(self.n, self.d))
        if v.shape != expected:
            raise ValueError(f"payoff array has shape {v.shape}, expected {expected}")
        if not np.all(np.isfinite(v)):
            raise ValueError("payoffs must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def compositions(self) -> tuple[tuple[int, ...], ...]:
        return compositions(self.n, self.d - 1)

    def payoff(self, focal: int, k: Sequence[int]) -> float:
        return float(self.values[focal, self.compositions.index(tuple(k))])

    def __add__(self, other: "PayoffTensor") -> "PayoffTensor":
        if (self.n, self.d) != (other.n, other.d):
            raise ValueError("tensor shapes differ")
        return PayoffTensor(self.n, self.d, self.values + other.values)

    def __neg__(self) -> "PayoffTensor":
        return PayoffTensor(self.n, self.d, -self.values)

    @classmethod
    def from_function(cls, n: int, d: int, f: Callable[[int, tuple[int, ...]], float]) -> "PayoffTensor":
        ks = compositions(n, d - 1)
        return cls(n, d, np.array([[f(i, k) for k in ks] for i in range(n)]))

    @classmethod
    def from_matrix(cls, matrix) -> "PayoffTensor":
        """Two-player game: ``matrix[i][j]`` is the payoff of i against j."""
        a = np.asarray(matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("payoff matrix must be square")
        n = a.shape[0]
        return cls.from_function(n, 2, lambda i, k: a[i, k.index(1)])

    @classmethod
    def from_ordered(cls, n: int, d: int, table: Mapping[tuple[int, tuple[int, ...]], float]) -> "PayoffTensor":
        """Build from payoffs keyed by (focal, ordered co-player strategies).

        Every ordering of the same co-player multiset must carry the same
        payoff; at least one ordering per composition must be present.
        """
        _check_shape(n, d)
        ks = compositions(n, d - 1)
        index = {k: m for m, k in enumerate(ks)}
        vals = np.full((n, len(ks)), np.nan)
        for (focal, players), value in table.items():
            if len(players) != d - 1 or not 0 <= focal < n or any(not 0 <= p < n for p in players):
                raise ValueError(f"bad payoff key {(focal, players)}")
            m = index[tuple(players.count(j) for j in range(n))]
            if np.isnan(vals[focal, m]):
                vals[focal, m] = value
            elif abs(vals[focal, m] - value) > SIMPLEX_TOL * max(1.0, abs(value)):
                raise ValueError(f"payoffs for focal {focal} differ across orderings of {players}")
        if np.isnan(vals).any():
            raise ValueError("some compositions have no payoff")
        return cls(n, d, vals)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "entries": [
                {"focal": i, "k": list(k), "value": float(self.values[i, m])}
                for i in range(self.n)
                for m, k in enumerate(self.compositions)
            ],
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "PayoffTensor":
        n, d = int(doc["n"]), int(doc["d"])
        _check_shape(n, d)
        ks = compositions(n, d - 1)
        index = {k: m for m, k in enumerate(ks)}
        vals = np.full((n, len(ks)), np.nan)
        for e in doc["entries"]:
            k = tuple(int(v) for v in e["k"])
            if k not in index:
                raise ValueError(f"composition {k} invalid for n={n}, d={d}")
            vals[int(e["focal"]), index[k]] = float(e["value"])
        if np.isnan(vals).any():
            raise ValueError("payoff document is missing entries")
        return cls(n, d, vals)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "PayoffTensor":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class BetaSystem:
    """Coefficients ``coeffs[i, m] = alpha[i, m] - alpha[n-1, m]`` for i < n-1."""

    n: int
    d: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        _check_shape(self.n, self.d)
        c = np.array(self.coeffs, dtype=float)
        expected = (self.n - 1, n_compositions(self.n, self.d))
        if c.shape != expected:
            raise ValueError(f"beta array has shape {c.shape}, expected {expected}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def compositions(self) -> tuple[tuple[int, ...], ...]:
        """Compositions restricted to the first n-1 strategies."""
        return tuple(k[:-1] for k in compositions(self.n, self.d - 1))

    def coefficient(self, i: int, k: Sequence[int]) -> float:
        return float(self.coeffs[i, self.compositions.index(tuple(k))])

    @property
    def degenerate(self) -> bool:
        """True if every equation vanishes identically."""
        return not np.any(self.coeffs)

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    def __add__(self, other: "BetaSystem") -> "BetaSystem":
        return BetaSystem(self.n, self.d, self.coeffs + other.coeffs)

    def to_tensor(self) -> PayoffTensor:
        """A tensor with these betas and zero payoffs for the last strategy.

        It induces the same equilibria and the same replicator dynamics as
        any tensor reducing to this system.
        """
        return PayoffTensor(self.n, self.d, np.vstack([self.coeffs, np.zeros(self.coeffs.shape[1])]))


def _monomials(n: int, d: int, z: np.ndarray) -> np.ndarray:
    ks, _ = _layout(n, d)
    return np.prod(z[None, :] ** ks[:, : z.size], axis=1)


def average_payoff(t: PayoffTensor, i: int, y) -> float:
    """Expected payoff of strategy ``i`` when co-players are drawn i.i.d. from ``y``."""
    if not 0 <= i < t.n:
        raise IndexError(f"strategy {i} out of range for n={t.n}")
    return float(average_payoffs(t, y)[i])


def average_payoffs(t: PayoffTensor, y) -> np.ndarray:
    """Vector of :func:`average_payoff` for every strategy."""
    x = as_simplex(y).x
    if x.size != t.n:
        raise ValueError(f"point has {x.size} coordinates, game has {t.n} strategies")
    _, w = _layout(t.n, t.d)
    return t.values @ (w * _monomials(t.n, t.d, x))


def beta_reduce(t: PayoffTensor) -> BetaSystem:
    return BetaSystem(t.n, t.d, t.values[:-1] - t.values[-1])


def evaluate_system(b: BetaSystem, y: Sequence[float]) -> np.ndarray:
    """Residuals of the n-1 equilibrium polynomials at ratio coordinates ``y``."""
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.size != b.n - 1:
        raise ValueError(f"expected {b.n - 1} ratio coordinates, got {y.size}")
    _, w = _layout(b.n, b.d)
    return b.coeffs @ (w * _monomials(b.n, b.d, y))


def system_jacobian(b: BetaSystem, y: Sequence[float]) -> np.ndarray:
    """Analytic Jacobian of :func:`evaluate_system` with respect to ``y``."""
    y = np.asarray(y, dtype=float).reshape(-1)
    ks, w = _layout(b.n, b.d)
    ks = ks[:, : b.n - 1]
    jac = np.empty((b.n - 1, b.n - 1))
    for j in range(b.n - 1):
        lowered = ks.copy()
        lowered[:, j] = np.maximum(lowered[:, j] - 1, 0)
        mono = np.prod(y[None, :] ** lowered, axis=1) * ks[:, j]
        jac[:, j] = b.coeffs @ (w * mono)
    return jac


def replicator_rhs(t: PayoffTensor, y) -> np.ndarray:
    x = as_simplex(y).x
    pi = average_payoffs(t, x)
    return x * (pi - x @ pi)


def replicator_rhs_unchecked(t: PayoffTensor, x: np.ndarray) -> np.ndarray:
    """Replicator field without the simplex check, for finite differences."""
    _, w = _layout(t.n, t.d)
    pi = t.values @ (w * _monomials(t.n, t.d, x))
    return x * (pi - x @ pi)


def tangent_basis(n: int) -> np.ndarray:
    """Orthonormal basis (n, n-1) of the plane sum(v) = 0."""
    q, _ = np.linalg.qr(np.eye(n)[:, :-1] - 1.0 / n)
    return q


def replicator_jacobian(t: PayoffTensor, y, step: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of the replicator field restricted to the simplex plane."""
    x = as_simplex(y).x
    basis = tangent_basis(t.n)
    cols = []
    for v in basis.T:
        fp = replicator_rhs_unchecked(t, x + step * v)
        fm = replicator_rhs_unchecked(t, x - step * v)
        cols.append(basis.T @ ((fp - fm) / (2 * step)))
    return np.column_stack(cols)


def ordered_payoff_table(t: PayoffTensor) -> dict[tuple[int, tuple[int, ...]], float]:
    """Payoffs of ``t`` keyed by (focal, ordered co-player tuple), all orderings."""
    table = {}
    for i in range(t.n):
        for players in itertools.product(range(t.n), repeat=t.d - 1):
            k = tuple(players.count(j) for j in range(t.n))
            table[(i, players)] = t.payoff(i, k)
    return table

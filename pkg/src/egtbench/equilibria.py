"""Internal equilibria of a single game: counting, locating, stability.

Exact routes are used whenever one applies: Sturm counting for two
strategies and a linear solve for two players.  ``grid_newton_enumerate``
covers other small games and may miss roots.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import comb
from typing import Literal

import numpy as np

from .game import (
    FITNESS_TOL,
    BetaSystem,
    PayoffTensor,
    SimplexPoint,
    beta_reduce,
    evaluate_system,
    replicator_jacobian,
    system_jacobian,
    tangent_basis,
)
from .polynomials import (
    DegeneratePolynomialError,
    UnivariatePolynomial,
    isolate_positive_roots,
    positive_root_summary,
)

Method = Literal["sturm", "linear", "grid-newton"]

COND_LIMIT = 1e12
DEDUP_DIST = 1e-6
STABILITY_TOL = 1e-8
MAX_GRID_N = 4
MAX_GRID_D = 5


class DegenerateGameError(ValueError):
    """The equilibrium system is identically satisfied or singular."""


class UnsupportedGameError(ValueError):
    """No implemented method covers this (n, d)."""


@dataclass(frozen=True)
class EquilibriumReport:
    total: int
    stable: int
    marginal: int
    method: Method
    degenerate: bool = False
    roots: tuple[SimplexPoint, ...] | None = field(default=None)

    def __post_init__(self) -> None:
        if self.stable + self.marginal > self.total:
            raise ValueError("stable + marginal exceeds total")
        if self.degenerate and self.total:
            raise ValueError("degenerate reports carry total = 0")

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "stable": self.stable,
            "marginal": self.marginal,
            "method": self.method,
            "degenerate": self.degenerate,
            "roots": None if self.roots is None else [r.tolist() for r in self.roots],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "EquilibriumReport":
        roots = doc.get("roots")
        return cls(
            total=int(doc["total"]),
            stable=int(doc["stable"]),
            marginal=int(doc["marginal"]),
            method=doc["method"],
            degenerate=bool(doc["degenerate"]),
            roots=None if roots is None else tuple(SimplexPoint(np.array(r)) for r in roots),
        )


def two_strategy_polynomial(b: BetaSystem) -> UnivariatePolynomial:
    """Coefficients ``beta_k * C(d-1, k)``, k = number of strategy-0 co-players."""
    if b.n != 2:
        raise ValueError(f"two_strategy_polynomial needs n = 2, got n = {b.n}")
    return UnivariatePolynomial(tuple(float(v) * comb(b.d - 1, k) for k, v in enumerate(b.coeffs[0])))


def _linear_parts(b: BetaSystem) -> tuple[np.ndarray, np.ndarray]:
    # column 0 is the empty composition (co-player uses the last strategy);
    # column 1 + j is one co-player of strategy j (see game.compositions order)
    ks = b.compositions
    const = b.coeffs[:, ks.index((0,) * (b.n - 1))]
    cols = [ks.index(tuple(int(i == j) for i in range(b.n - 1))) for j in range(b.n - 1)]
    return b.coeffs[:, cols], const


def two_player_interior_equilibrium(b: BetaSystem) -> SimplexPoint | None:
    """The unique interior equilibrium of a two-player game, if it exists.

    Raises :class:`DegenerateGameError` when the linear system is singular
    (condition number above ``COND_LIMIT``).
    """
    if b.d != 2:
        raise ValueError(f"two_player_interior_equilibrium needs d = 2, got d = {b.d}")
    a, const = _linear_parts(b)
    if not np.any(b.coeffs) or np.linalg.cond(a) > COND_LIMIT:
        raise DegenerateGameError("linear equilibrium system is singular")
    y = np.linalg.solve(a, -const)
    if np.all(y > 0):
        return SimplexPoint.from_ratio(y)
    return None


def _classify_spectrum(eigs: np.ndarray, tol: float) -> tuple[bool, bool]:
    """(stable, marginal) from eigenvalues of the tangent Jacobian."""
    re = eigs.real
    marginal = bool(np.any(np.abs(re) <= tol))
    stable = bool(np.all(re < -tol))
    return stable, marginal


def interior_jacobian_matrix(b: BetaSystem, x: np.ndarray) -> np.ndarray:
    """Exact replicator Jacobian of a two-player game at an interior equilibrium."""
    a = np.vstack([b.coeffs, np.zeros(b.coeffs.shape[1])])
    # reorder columns to strategy order: ith column = one co-player of strategy i
    ks = [k for k in b.to_tensor().compositions]
    order = [ks.index(tuple(int(i == j) for i in range(b.n))) for j in range(b.n)]
    a = a[:, order]
    full = x[:, None] * (a - (x @ (a + a.T))[None, :])
    basis = tangent_basis(b.n)
    return basis.T @ full @ basis


def _analyze_two_strategy(b: BetaSystem, locate: bool) -> EquilibriumReport:
    p = two_strategy_polynomial(b)
    try:
        s = positive_root_summary(p)
    except DegeneratePolynomialError:
        return EquilibriumReport(0, 0, 0, "sturm", degenerate=True)
    roots = None
    if locate:
        roots = tuple(SimplexPoint(np.array([y / (1 + y), 1 / (1 + y)])) for y in isolate_positive_roots(p))
    return EquilibriumReport(s.count, s.stable, s.marginal, "sturm", roots=roots)


def _analyze_two_player(b: BetaSystem) -> EquilibriumReport:
    try:
        point = two_player_interior_equilibrium(b)
    except DegenerateGameError:
        return EquilibriumReport(0, 0, 0, "linear", degenerate=True)
    if point is None:
        return EquilibriumReport(0, 0, 0, "linear", roots=())
    eigs = np.linalg.eigvals(interior_jacobian_matrix(b, point.x))
    stable, marginal = _classify_spectrum(eigs, STABILITY_TOL * b.scale)
    return EquilibriumReport(1, int(stable), int(marginal), "linear", roots=(point,))


def _grid_seeds(n: int, resolution: int) -> np.ndarray:
    from .game import compositions

    pts = np.array([k for k in compositions(n, resolution) if min(k) > 0], dtype=float)
    return pts / resolution


def _newton(b: BetaSystem, y0: np.ndarray, tol: float, max_iter: int = 60) -> np.ndarray | None:
    y = y0.copy()
    scale = b.scale
    f = evaluate_system(b, y)
    for _ in range(max_iter):
        if np.linalg.norm(f) <= tol * scale * max(1.0, np.max(y)) ** (b.d - 1):
            return y
        jac = system_jacobian(b, y)
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            return None
        lam = 1.0
        fnorm = np.linalg.norm(f)
        while lam > 1e-4:
            cand = y + lam * step
            if np.all(cand > 0):
                fc = evaluate_system(b, cand)
                if np.linalg.norm(fc) < fnorm:
                    y, f = cand, fc
                    break
            lam *= 0.5
        else:
            return None
    return None


def grid_newton_enumerate(t: PayoffTensor, resolution: int = 20, tol: float = 1e-12) -> EquilibriumReport:
    """Interior equilibria found by damped Newton from a barycentric grid.

    Possible undercount: roots without a seed in their basin are missed.
    """
    if resolution < 20:
        raise ValueError(f"resolution must be >= 20, got {resolution}")
    if not (2 <= t.n <= MAX_GRID_N and 2 <= t.d <= MAX_GRID_D):
        raise UnsupportedGameError(f"grid-newton supports n <= {MAX_GRID_N}, d <= {MAX_GRID_D}")
    b = beta_reduce(t)
    if b.degenerate:
        return EquilibriumReport(0, 0, 0, "grid-newton", degenerate=True)
    found: list[np.ndarray] = []
    for seed in _grid_seeds(t.n, resolution):
        y = _newton(b, seed[:-1] / seed[-1], tol)
        if y is None:
            continue
        x = np.append(y, 1.0)
        x /= x.sum()
        if np.all(x > 0) and all(np.linalg.norm(x - f) > DEDUP_DIST for f in found):
            found.append(x)
    found.sort(key=tuple)
    stable = marginal = 0
    roots = []
    for x in found:
        point = SimplexPoint(x / x.sum())
        roots.append(point)
        eigs = np.linalg.eigvals(replicator_jacobian(t, point))
        s, m = _classify_spectrum(eigs, STABILITY_TOL)
        stable += s
        marginal += m
    return EquilibriumReport(len(found), stable, marginal, "grid-newton", roots=tuple(roots))


def analyze_game(t: PayoffTensor, locate: bool = True, allow_approximate: bool = True) -> EquilibriumReport:
    """Equilibrium report using the best available method for (n, d)."""
    b = beta_reduce(t)
    if t.n == 2:
        return _analyze_two_strategy(b, locate)
    if t.d == 2:
        return _analyze_two_player(b)
    if allow_approximate and t.n <= MAX_GRID_N and t.d <= MAX_GRID_D:
        return grid_newton_enumerate(t)
    raise UnsupportedGameError(f"no method for n = {t.n}, d = {t.d}")


def equal_fitness_gap(t: PayoffTensor, point: SimplexPoint) -> float:
    """Largest pairwise difference of average payoffs at ``point``."""
    from .game import average_payoffs

    pi = average_payoffs(t, point)
    return float(pi.max() - pi.min())


def two_player_batch(coeffs: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised two-player analysis of stacked beta arrays of shape (T, n-1, n).

    Returns ``(total, stable, marginal, degenerate)`` integer/bool arrays.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    n_rows, nm1, m = coeffs.shape
    n = nm1 + 1
    if m != n:
        raise ValueError("two-player beta arrays need n compositions")
    template = BetaSystem(n, 2, np.zeros((nm1, n)))
    ks = template.compositions
    const_col = ks.index((0,) * nm1)
    cols = [ks.index(tuple(int(i == j) for i in range(nm1))) for j in range(nm1)]
    a = coeffs[:, :, cols]
    const = coeffs[:, :, const_col]
    degenerate = ~np.any(coeffs != 0, axis=(1, 2))
    cond = np.full(n_rows, np.inf)
    ok = ~degenerate
    if ok.any():
        cond[ok] = np.linalg.cond(a[ok])
    degenerate |= ~(cond <= COND_LIMIT)
    solvable = ~degenerate
    y = np.full((n_rows, nm1), -1.0)
    if solvable.any():
        y[solvable] = np.linalg.solve(a[solvable], -const[solvable][..., None])[..., 0]
    interior = solvable & np.all(y > 0, axis=1)
    total = interior.astype(np.int64)
    stable = np.zeros(n_rows, dtype=np.int64)
    marginal = np.zeros(n_rows, dtype=np.int64)
    idx = np.flatnonzero(interior)
    if idx.size:
        full_y = np.concatenate([y[idx], np.ones((idx.size, 1))], axis=1)
        x = full_y / full_y.sum(axis=1, keepdims=True)
        # payoff matrices with the last row zero, columns in strategy order
        mats = np.zeros((idx.size, n, n))
        mats[:, :nm1, :nm1] = a[idx]
        mats[:, :nm1, nm1] = const[idx]
        xa = np.einsum("ti,tij->tj", x, mats + np.transpose(mats, (0, 2, 1)))
        full = x[:, :, None] * (mats - xa[:, None, :])
        basis = tangent_basis(n)
        red = np.einsum("ia,tij,jb->tab", basis, full, basis)
        eigs = np.linalg.eigvals(red)
        tol = STABILITY_TOL * np.max(np.abs(coeffs[idx]), axis=(1, 2))
        re = eigs.real
        marginal[idx] = np.any(np.abs(re) <= tol[:, None], axis=1)
        stable[idx] = np.all(re < -tol[:, None], axis=1)
    return total, stable, marginal, degenerate


__all__ = [
    "COND_LIMIT",
    "DegenerateGameError",
    "EquilibriumReport",
    "FITNESS_TOL",
    "UnsupportedGameError",
    "analyze_game",
    "equal_fitness_gap",
    "grid_newton_enumerate",
    "two_player_batch",
    "two_player_interior_equilibrium",
    "two_strategy_polynomial",
]

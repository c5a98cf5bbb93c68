"""Finite-population dynamics of the AI development race.

Three strategies: always safe (AS), always unsafe (AU) and conditionally
safe (CS).  Payoffs are per-round averages over a race of ``W`` rounds
on average; the stochastic dynamics is pairwise comparison (Fermi
update) in a population of ``N`` teams, reduced to a Markov chain over
monomorphic states in the small-mutation limit.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from scipy.special import logsumexp


class Strategy(enum.IntEnum):
    AS = 0
    AU = 1
    CS = 2


class Region(str, enum.Enum):
    I = "I"
    II = "II"
    III = "III"
    ANOMALOUS = "anomalous"


@dataclass(frozen=True)
class RaceParams:
    """Race parameters.

    ``cs_opens_safe`` selects the conditional strategy's first round: if
    true (default) CS plays SAFE in round one and copies the opponent's
    previous move afterwards; if false CS mirrors its opponent from the
    start.
    """

    B: float = 1.0
    c: float = 1e-6
    b: float = 0.0
    s: float = 1.5
    W: float = 1.0
    p_r: float = 0.5
    N: int = 100
    beta_sel: float = 1.0
    cs_opens_safe: bool = True

    def __post_init__(self) -> None:
        if not self.B > 0:
            raise ValueError("prize B must be positive")
        if self.c < 0 or self.b < 0:
            raise ValueError("costs and benefits must be non-negative")
        if not self.s >= 1:
            raise ValueError("unsafe speed s must be >= 1")
        if not self.W >= 1:
            raise ValueError("mean race length W must be >= 1")
        if not 0 <= self.p_r <= 1:
            raise ValueError("disaster risk p_r must lie in [0, 1]")
        if int(self.N) != self.N or self.N < 2:
            raise ValueError("population size N must be an integer >= 2")
        if self.beta_sel < 0:
            raise ValueError("selection intensity must be non-negative")

    @classmethod
    def from_omega(cls, omega: float, **kw) -> "RaceParams":
        if not 0 <= omega < 1:
            raise ValueError("omega must lie in [0, 1)")
        return cls(W=1.0 / (1.0 - omega), **kw)

    @classmethod
    def from_dict(cls, doc: dict) -> "RaceParams":
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown race parameters: {sorted(unknown)}")
        return cls(**doc)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class RacePayoffMatrix:
    """``values[i, j]``: per-round payoff of strategy i against strategy j (order AS, AU, CS)."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float)
        if v.shape != (3, 3):
            raise ValueError("race payoff matrix must be 3x3")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __getitem__(self, ij) -> float:
        return float(self.values[ij])

    def tolist(self) -> list[list[float]]:
        return self.values.tolist()


def race_payoff_matrix(p: RaceParams) -> RacePayoffMatrix:
    safe_safe = -p.c + p.b / 2 + p.B / (2 * p.W)
    safe_unsafe = -p.c
    unsafe_safe = (1 - p.p_r) * (p.b + p.s * p.B / p.W)
    unsafe_unsafe = (1 - p.p_r) * (p.b / 2 + p.s * p.B / (2 * p.W))
    if p.cs_opens_safe:
        # one SAFE round against AU, then reciprocated UNSAFE play
        cs_vs_au = (safe_unsafe + (p.W - 1) * unsafe_unsafe) / p.W
        au_vs_cs = (unsafe_safe + (p.W - 1) * unsafe_unsafe) / p.W
    else:
        cs_vs_au = au_vs_cs = unsafe_unsafe
    AS, AU, CS = Strategy.AS, Strategy.AU, Strategy.CS
    m = np.empty((3, 3))
    m[AS, AS] = m[AS, CS] = m[CS, AS] = m[CS, CS] = safe_safe
    m[AS, AU] = safe_unsafe
    m[AU, AS] = unsafe_safe
    m[AU, AU] = unsafe_unsafe
    m[CS, AU] = cs_vs_au
    m[AU, CS] = au_vs_cs
    return RacePayoffMatrix(m)


def _fitness_gaps(pm: RacePayoffMatrix, invader: int, resident: int, N: int) -> np.ndarray:
    v = pm.values
    j = np.arange(1, N, dtype=float)
    pi_inv = ((j - 1) * v[invader, invader] + (N - j) * v[invader, resident]) / (N - 1)
    pi_res = (j * v[resident, invader] + (N - 1 - j) * v[resident, resident]) / (N - 1)
    return pi_inv - pi_res


def fixation_probability(pm: RacePayoffMatrix, invader: int, resident: int, N: int, beta_sel: float) -> float:
    """Probability that one ``invader`` mutant takes over a ``resident`` population."""
    invader, resident = Strategy(invader), Strategy(resident)
    if invader == resident:
        raise ValueError("invader and resident must differ")
    if int(N) != N or N < 2:
        raise ValueError("N must be an integer >= 2")
    if beta_sel < 0:
        raise ValueError("beta_sel must be non-negative")
    if beta_sel == 0:
        return 1.0 / N
    log_terms = np.concatenate([[0.0], np.cumsum(-beta_sel * _fitness_gaps(pm, invader, resident, int(N)))])
    return float(math.exp(-logsumexp(log_terms)))


@dataclass(frozen=True)
class StationaryResult:
    distribution: np.ndarray
    fixation_matrix: np.ndarray = field(repr=False)
    transition_matrix: np.ndarray = field(repr=False)

    @property
    def unsafe_frequency(self) -> float:
        return float(self.distribution[Strategy.AU])

    def to_dict(self) -> dict:
        return {
            "distribution": dict(zip([s.name for s in Strategy], self.distribution.tolist())),
            "fixation_matrix": self.fixation_matrix.tolist(),
            "transition_matrix": self.transition_matrix.tolist(),
            "unsafe_frequency": self.unsafe_frequency,
        }


def fixation_matrix(pm: RacePayoffMatrix, N: int, beta_sel: float) -> np.ndarray:
    """``rho[i, j]``: fixation probability of an i mutant in a j population (diagonal 0)."""
    rho = np.zeros((3, 3))
    for i in Strategy:
        for j in Strategy:
            if i != j:
                rho[i, j] = fixation_probability(pm, i, j, N, beta_sel)
    return rho


def _solve_stationary(T: np.ndarray) -> np.ndarray:
    k = T.shape[0]
    a = np.vstack([T.T - np.eye(k), np.ones(k)])
    rhs = np.zeros(k + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, rhs, rcond=None)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def stationary_distribution(pm: RacePayoffMatrix, N: int, beta_sel: float) -> StationaryResult:
    rho = fixation_matrix(pm, N, beta_sel)
    n_alt = 2
    T = rho.T / n_alt  # T[j, i]: move from state j to state i
    np.fill_diagonal(T, 0.0)
    np.fill_diagonal(T, 1.0 - T.sum(axis=1))
    if np.linalg.matrix_rank(T - np.eye(3)) < 2:
        # reducible chain: transitions underflowed
        T = T + 1e-300
        T /= T.sum(axis=1, keepdims=True)
    pi = _solve_stationary(T)
    return StationaryResult(pi, rho, T)


def region_of(preferred_safe: bool, selected_safe: bool) -> Region:
    if preferred_safe and selected_safe:
        return Region.I
    if preferred_safe:
        return Region.II
    if not selected_safe:
        return Region.III
    return Region.ANOMALOUS


def classify_region(p: RaceParams, result: StationaryResult | None = None) -> Region:
    """Governance region: is safety collectively preferred, is it selected?"""
    pm = race_payoff_matrix(p)
    if result is None:
        result = stationary_distribution(pm, p.N, p.beta_sel)
    dist = result.distribution
    preferred_safe = pm[Strategy.AS, Strategy.AS] > pm[Strategy.AU, Strategy.AU]
    selected_safe = dist[Strategy.AS] + dist[Strategy.CS] > dist[Strategy.AU]
    return region_of(bool(preferred_safe), bool(selected_safe))


def analytic_region_ii(s: float, p_r: float) -> bool:
    """Analytic regulation band 1 - 1/s < p_r < 1 - 1/(3s) (b = c = 0)."""
    return 1 - 1 / s < p_r < 1 - 1 / (3 * s)


SWEEP_COLUMNS = ("s", "p_r", "freq_AS", "freq_AU", "freq_CS", "unsafe_frequency", "region")


@dataclass(frozen=True)
class RaceSweepRow:
    s: float
    p_r: float
    freq_AS: float
    freq_AU: float
    freq_CS: float
    unsafe_frequency: float
    region: Region


def sweep_race(s_values: Sequence[float], pr_values: Sequence[float], base: RaceParams) -> list[RaceSweepRow]:
    """One row per (s, p_r) grid point, s-major."""
    rows = []
    for s in s_values:
        for pr in pr_values:
            p = replace(base, s=float(s), p_r=float(pr))
            res = stationary_distribution(race_payoff_matrix(p), p.N, p.beta_sel)
            dist = res.distribution
            rows.append(
                RaceSweepRow(float(s), float(pr), float(dist[0]), float(dist[1]), float(dist[2]), res.unsafe_frequency, classify_region(p, res))
            )
    return rows


def sweep_to_csv(rows: Iterable[RaceSweepRow]) -> str:
    lines = [",".join(SWEEP_COLUMNS)]
    for r in rows:
        lines.append(
            ",".join([repr(r.s), repr(r.p_r), repr(r.freq_AS), repr(r.freq_AU), repr(r.freq_CS), repr(r.unsafe_frequency), r.region.value])
        )
    return "\n".join(lines) + "\n"


def matrix_to_json(pm: RacePayoffMatrix) -> str:
    return json.dumps({"strategies": [s.name for s in Strategy], "payoffs": pm.tolist()})

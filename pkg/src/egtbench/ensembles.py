"""Seeded Monte Carlo over random games.

Trial ``t`` of an ensemble draws its payoffs from a Philox stream keyed
by ``(seed, t)``, so every trial is reproducible on its own and results
do not depend on how trials are split across workers.

For each focal strategy ``i`` the normal ensemble draws a payoff array
``eps[i]`` and a shared factor ``xi[i]``; payoffs are
``sqrt(r) * xi[i] + sqrt(1 - r) * eps[i, k]``.  Both are always drawn, so
runs at different ``r`` with the same seed use common random numbers.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

from .equilibria import MAX_GRID_D, MAX_GRID_N, UnsupportedGameError, grid_newton_enumerate, two_player_batch
from .game import PayoffTensor, n_compositions
from .polynomials import bernstein_positive_roots

Distribution = Literal["normal", "uniform"]

CHUNK = 4096
CSV_COLUMNS = ("key", "mean_total", "stderr_total", "mean_stable", "p_max", "degenerate_trials")


@dataclass(frozen=True)
class EnsembleSpec:
    distribution: Distribution = "normal"
    correlation: float = 0.0
    seed: int = 0
    trials: int = 10_000

    def __post_init__(self) -> None:
        if self.distribution not in ("normal", "uniform"):
            raise ValueError(f"unknown distribution {self.distribution!r}")
        if not 0.0 <= self.correlation < 1.0:
            raise ValueError(f"correlation must lie in [0, 1), got {self.correlation}")
        if self.distribution == "uniform" and self.correlation != 0.0:
            raise ValueError("correlated payoffs are only defined for the normal ensemble")
        if not 0 <= int(self.seed) < 2**64 or int(self.seed) != self.seed:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValueError("trials must be a positive integer")


@dataclass(frozen=True)
class McEquilibriumStats:
    n: int
    d: int
    trials: int
    mean_total: float
    mean_stable: float
    stderr_total: float
    count_histogram: dict[int, float]
    p_max: float | None
    degenerate_trials: int
    method: str
    approximate: bool = False
    counts: dict[int, int] = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["count_histogram"] = {str(k): v for k, v in self.count_histogram.items()}
        out["counts"] = {str(k): v for k, v in self.counts.items()}
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.array([seed, trial_index], dtype=np.uint64)))


def _draw(spec: EnsembleSpec, n: int, m: int, trial_index: int) -> np.ndarray:
    rng = _trial_rng(int(spec.seed), int(trial_index))
    if spec.distribution == "uniform":
        return rng.uniform(-1.0, 1.0, size=(n, m))
    eps = rng.standard_normal((n, m))
    xi = rng.standard_normal(n)
    r = spec.correlation
    if r == 0.0:
        return eps
    return math.sqrt(r) * xi[:, None] + math.sqrt(1.0 - r) * eps


def sample_tensor(spec: EnsembleSpec, n: int, d: int, trial_index: int) -> PayoffTensor:
    if not 0 <= trial_index < spec.trials:
        raise IndexError(f"trial_index {trial_index} outside [0, {spec.trials})")
    return PayoffTensor(n, d, _draw(spec, n, n_compositions(n, d), trial_index))


def _chunk_betas(spec: EnsembleSpec, n: int, d: int, start: int, stop: int) -> np.ndarray:
    m = n_compositions(n, d)
    out = np.empty((stop - start, n - 1, m))
    for j, t in enumerate(range(start, stop)):
        a = _draw(spec, n, m, t)
        out[j] = a[:-1] - a[-1]
    return out


def _method_for(n: int, d: int, allow_approximate: bool) -> str:
    if n == 2:
        return "sturm"
    if d == 2:
        return "linear"
    if allow_approximate and n <= MAX_GRID_N and d <= MAX_GRID_D:
        return "grid-newton"
    raise UnsupportedGameError(f"no exact method for n = {n}, d = {d}")


def _run_chunk(args) -> tuple[dict[int, int], int, int]:
    """Histogram of counts, stable sum, degenerate count for trials [start, stop)."""
    spec, n, d, start, stop, method = args
    if method == "grid-newton":
        totals, stables, degens = [], [], []
        for t in range(start, stop):
            rep = grid_newton_enumerate(PayoffTensor(n, d, _draw(spec, n, n_compositions(n, d), t)))
            totals.append(rep.total)
            stables.append(rep.stable)
            degens.append(rep.degenerate)
        total, stable, degenerate = np.array(totals), np.array(stables), np.array(degens, dtype=bool)
    else:
        betas = _chunk_betas(spec, n, d, start, stop)
        if method == "sturm":
            res = bernstein_positive_roots(betas[:, 0, :])
            total, stable, degenerate = res.total, res.stable, res.degenerate
        else:
            total, stable, _, degenerate = two_player_batch(betas)
    keep = ~degenerate
    values, freq = np.unique(total[keep], return_counts=True)
    return {int(v): int(c) for v, c in zip(values, freq)}, int(stable[keep].sum()), int(degenerate.sum())


def estimate_stats(
    spec: EnsembleSpec,
    n: int,
    d: int,
    *,
    allow_approximate: bool = False,
    workers: int = 1,
) -> McEquilibriumStats:
    """Monte Carlo estimate of E(n, d), the stable mean and the count distribution."""
    method = _method_for(n, d, allow_approximate)
    bounds = [(s, min(s + CHUNK, spec.trials)) for s in range(0, spec.trials, CHUNK)]
    jobs = [(spec, n, d, s, e, method) for s, e in bounds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(j) for j in jobs]

    counts: dict[int, int] = {}
    stable_sum = degenerate = 0
    for hist, st, dg in parts:  # integer accumulation: order-independent
        for k, v in hist.items():
            counts[k] = counts.get(k, 0) + v
        stable_sum += st
        degenerate += dg
    counts = dict(sorted(counts.items()))
    good = spec.trials - degenerate
    if degenerate:
        warnings.warn(f"{degenerate} degenerate trials excluded", RuntimeWarning, stacklevel=2)
    if good == 0:
        raise ValueError("every trial was degenerate")

    hist = {k: v / good for k, v in counts.items()}
    s1 = sum(k * v for k, v in counts.items())
    s2 = sum(k * k * v for k, v in counts.items())
    mean = s1 / good
    var = (s2 - s1 * s1 / good) / (good - 1) if good > 1 else 0.0
    if method == "sturm":
        max_count = d - 1
    elif method == "linear":
        max_count = 1
    else:
        max_count = None
    return McEquilibriumStats(
        n=n,
        d=d,
        trials=spec.trials,
        mean_total=mean,
        mean_stable=stable_sum / good,
        stderr_total=math.sqrt(max(var, 0.0) / good),
        count_histogram=hist,
        p_max=None if max_count is None else hist.get(max_count, 0.0),
        degenerate_trials=degenerate,
        method=method,
        approximate=method == "grid-newton",
        counts=counts,
    )


@dataclass(frozen=True)
class SweepRow:
    key: float
    mean_total: float
    stderr_total: float
    mean_stable: float
    p_max: float | None
    degenerate_trials: int

    @classmethod
    def from_stats(cls, key: float, s: McEquilibriumStats) -> "SweepRow":
        return cls(key, s.mean_total, s.stderr_total, s.mean_stable, s.p_max, s.degenerate_trials)


@dataclass(frozen=True)
class AsymptoticsRow:
    d: int
    mean_total: float
    ratio_sqrt: float
    p_max: float
    stderr_total: float
    mean_stable: float
    degenerate_trials: int

    def as_sweep_row(self) -> SweepRow:
        return SweepRow(self.d, self.mean_total, self.stderr_total, self.mean_stable, self.p_max, self.degenerate_trials)


def asymptotics_probe(spec: EnsembleSpec, d_values: Sequence[int], *, workers: int = 1) -> list[AsymptoticsRow]:
    """E(2, d) estimates with E/sqrt(d-1) and the maximal-count probability."""
    if not d_values:
        raise ValueError("d_values is empty")
    rows = []
    for d in d_values:
        if int(d) != d or not 2 <= d <= 100:
            raise ValueError(f"d must be an integer in [2, 100], got {d}")
        s = estimate_stats(spec, 2, int(d), workers=workers)
        rows.append(
            AsymptoticsRow(int(d), s.mean_total, s.mean_total / math.sqrt(d - 1), s.p_max, s.stderr_total, s.mean_stable, s.degenerate_trials)
        )
    return rows


def correlation_sweep(
    n: int,
    d: int,
    r_values: Sequence[float],
    trials: int,
    seed: int,
    *,
    workers: int = 1,
) -> list[SweepRow]:
    """Estimates at each correlation under common random numbers (one base seed)."""
    if not r_values:
        raise ValueError("r_values is empty")
    if list(r_values) != sorted(r_values):
        raise ValueError("r_values must be sorted ascending")
    rows = []
    for r in r_values:
        spec = EnsembleSpec("normal", float(r), seed, trials)
        rows.append(SweepRow.from_stats(float(r), estimate_stats(spec, n, d, workers=workers)))
    return rows


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def closed_form_two_player(n: int) -> float:
    """Mean number of interior equilibria for two-player games, 1 / 2**(n-1)."""
    return 0.5 ** (n - 1)

"""Finite-ensemble simulation of measurement records.

With finitely many shots the plug-in after-measurement state
``sum_k (n_k/N) Q_k`` need not be the channel image of any state. These
helpers sample outcome records, track when the running estimate first
becomes admissible, and check two-basis qubit tomography data.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .measurements import RayResolution, preimage_min_eigenvalues, probabilities

BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class OutcomeCounts:
    resolution: RayResolution
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.total


def sample_outcomes(m: RayResolution, w, n: int, rng: np.random.Generator) -> OutcomeCounts:
    if n < 1:
        raise ValidationError("sample-size", "need at least one shot")
    p = np.clip(probabilities(m, w), 0, None)
    return OutcomeCounts(m, rng.multinomial(n, p / p.sum()))


def empirical_state(counts: OutcomeCounts) -> np.ndarray:
    """Plug-in estimate ``sum_k (n_k/N) Q_k``; unit trace, possibly not a state."""
    if counts.total < 1:
        raise ValidationError("sample-size", "empty record")
    return np.einsum("k,kij->ij", counts.frequencies, counts.resolution.projectors)


def draw_outcomes(m: RayResolution, w, n: int, rng: np.random.Generator) -> np.ndarray:
    """Ordered sequence of ``n`` outcome indices, one uniform draw per shot.

    The first ``k`` outcomes do not depend on ``n``.
    """
    if n < 1:
        raise ValidationError("sample-size", "need at least one shot")
    p = np.clip(probabilities(m, w), 0, None)
    cdf = np.cumsum(p / p.sum())
    return np.minimum(np.searchsorted(cdf, rng.random(n), side="right"), len(m) - 1)


@dataclass(frozen=True)
class EntryRecord:
    """First admissibility times of a single shot sequence.

    ``n_touch`` is the first tested N whose preimage has smallest eigenvalue
    >= -tol (on or inside the boundary of V_am); ``n_entry`` the first with
    smallest eigenvalue > tol (strictly inside). ``None`` means not reached
    by ``max_n``. ``min_eig_final`` is the value at the last tested N.
    """

    seed: int | None
    n_touch: int | None
    n_entry: int | None
    min_eig_final: float
    tested_up_to: int

    @property
    def entered(self) -> bool:
        return self.n_touch is not None


def first_entry_time(
    m: RayResolution,
    w,
    rng: np.random.Generator,
    max_n: int,
    step: int = 1,
    tol: float = BOUNDARY_TOL,
    seed: int | None = None,
    chunk: int = 512,
) -> EntryRecord:
    """Simulate shots one by one, testing V_am admissibility every ``step``.

    Shots come from :func:`draw_outcomes`, so the sequence for a given
    generator is a prefix of the sequence for any larger ``max_n``. Testing
    stops at the first strict entry.
    """
    if not 1 <= step <= max_n:
        raise ValidationError("step", "need 1 <= step <= max_n")
    m._inverse  # raises not-informationally-complete
    outcomes = draw_outcomes(m, w, max_n, rng)
    onehot = np.zeros((max_n, len(m)))
    onehot[np.arange(max_n), outcomes] = 1
    cumulative = np.cumsum(onehot, axis=0)

    tested = np.arange(step, max_n + 1, step)
    n_touch = None
    last_eig = math.nan
    last_n = 0
    for start in range(0, tested.size, chunk):
        ns = tested[start : start + chunk]
        freqs = cumulative[ns - 1] / ns[:, None]
        states = np.einsum("nk,kij->nij", freqs, m.projectors)
        eigs = preimage_min_eigenvalues(m, states)
        if n_touch is None:
            hit = np.flatnonzero(eigs >= -tol)
            if hit.size:
                n_touch = int(ns[hit[0]])
        inside = np.flatnonzero(eigs > tol)
        if inside.size:
            i = inside[0]
            return EntryRecord(seed, n_touch, int(ns[i]), float(eigs[i]), int(ns[i]))
        last_eig, last_n = float(eigs[-1]), int(ns[-1])
    return EntryRecord(seed, n_touch, None, last_eig, last_n)


def simulate_entries(m: RayResolution, w, seeds, max_n: int, step: int = 1, tol: float = BOUNDARY_TOL):
    return [
        first_entry_time(m, w, np.random.default_rng(s), max_n, step, tol, seed=s) for s in seeds
    ]


ENTRY_COLUMNS = ("seed", "N_touch", "N_entry", "min_eig_final")


def entry_records_to_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ENTRY_COLUMNS)
    for r in records:
        writer.writerow(
            ["" if r.seed is None else r.seed,
             "" if r.n_touch is None else r.n_touch,
             "" if r.n_entry is None else r.n_entry,
             repr(r.min_eig_final)]
        )
    return buf.getvalue()


def entry_records_from_csv(text: str) -> list[EntryRecord]:
    def opt_int(s):
        return int(s) if s != "" else None

    rows = list(csv.DictReader(io.StringIO(text)))
    return [
        EntryRecord(opt_int(r["seed"]), opt_int(r["N_touch"]), opt_int(r["N_entry"]),
                    float(r["min_eig_final"]), 0)
        for r in rows
    ]


# -- two-basis qubit tomography -----------------------------------------------


@dataclass(frozen=True)
class TomographyPair:
    """S_z distribution {1-a, a} and S_x distribution {1/2+b, 1/2-b}."""

    a: float
    b: float

    def __post_init__(self):
        if not 0 <= self.a <= 1:
            raise ValidationError("range", f"a={self.a} outside [0, 1]")
        if abs(self.b) > 0.5:
            raise ValidationError("range", f"|b|={abs(self.b)} > 1/2")


def consistency_interval(a: float) -> tuple[float, float]:
    if not 0 <= a <= 1:
        raise ValidationError("range", f"a={a} outside [0, 1]")
    half = math.sqrt(a * (1 - a))
    return (-half, half)


def tomography_consistent(pair: TomographyPair) -> bool:
    """Whether the two distributions come from one qubit state."""
    return pair.b**2 <= pair.a * (1 - pair.a) + 1e-12


def tomography_verdict(a: float, b: float) -> dict:
    """JSON verdict; an S_x offset with |b| > 1/2 is reported inconsistent."""
    lo, hi = consistency_interval(a)
    verdict = {"a": a, "b": b, "interval": [lo, hi]}
    if abs(b) > 0.5:
        verdict.update(consistent=False, reason="S_x distribution is not a probability vector")
    else:
        verdict["consistent"] = tomography_consistent(TomographyPair(a, b))
    return verdict

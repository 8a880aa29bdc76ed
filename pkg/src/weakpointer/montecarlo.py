"""Trial-by-trial sampling of both models.

Randomness is split into fixed-size blocks of trials; block ``b`` draws from
``stream(seed, b)``, a generator seeded by ``SeedSequence(seed, spawn_key=(b,))``.
A run therefore yields the same trials whether blocks are processed serially
or by several workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Mapping, NamedTuple, Sequence

import numpy as np

from .classical import TransitionModel, classical_sigma
from .pointers import ClassicalPath, PointerConfig, pointer_map
from .quantum import CoherentGaussianDensity, quantum_gaussian, reading_sigma

BLOCK = 1 << 14


def stream(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))


def _blocks(n: int) -> list[tuple[int, int]]:
    return [(b, min(BLOCK, n - b * BLOCK)) for b in range(math.ceil(n / BLOCK))]


class TrialRecord(NamedTuple):
    index: int
    readings: dict[int, float]
    selected: bool
    path: ClassicalPath | None = None


@dataclass
class TrialBatch:
    """Column-oriented trials; iterating yields :class:`TrialRecord`.

    ``readings`` maps slot to an array over trials; accurate pointers carry
    integer arrays.  ``paths`` has shape ``(n, 4)`` for classical trials and
    is None for quantum ones, which have no route to report.
    """

    readings: dict[int, np.ndarray]
    selected: np.ndarray
    paths: np.ndarray | None = None
    proposal_acceptance: float | None = None
    postselection_probability: float | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.selected)

    def __getitem__(self, idx: int) -> TrialRecord:
        if idx < 0:
            idx += len(self)
        path = ClassicalPath(*(int(x) for x in self.paths[idx])) if self.paths is not None else None
        return TrialRecord(
            idx,
            {s: v[idx].item() for s, v in self.readings.items()},
            bool(self.selected[idx]),
            path,
        )

    def __iter__(self) -> Iterator[TrialRecord]:
        for i in range(len(self)):
            yield self[i]

    @property
    def slots(self) -> tuple[int, ...]:
        return tuple(sorted(self.readings))

    def selected_readings(self, slot: int) -> np.ndarray:
        return self.readings[slot][self.selected]

    @classmethod
    def concat(cls, batches: Sequence["TrialBatch"]) -> "TrialBatch":
        if not batches:
            raise ValueError("nothing to concatenate")
        slots = batches[0].slots
        paths = None
        if batches[0].paths is not None:
            paths = np.concatenate([b.paths for b in batches])
        return cls(
            {s: np.concatenate([b.readings[s] for b in batches]) for s in slots},
            np.concatenate([b.selected for b in batches]),
            paths,
        )


def _run_blocks(fn, n: int, workers: int):
    blocks = _blocks(n)
    if workers <= 1 or len(blocks) == 1:
        return [fn(b, m) for b, m in blocks]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(lambda bm: fn(*bm), blocks))


def sample_classical(
    model: TransitionModel,
    pointers,
    n: int,
    seed: int,
    preselect: int | None = None,
    postselect: int | None = None,
    workers: int = 1,
) -> TrialBatch:
    """Simulate ``n`` trials of the classical network.

    Each trial draws a route, draws every pointer's initial position from its
    Gaussian (variance ``width**2 / 2``) and displaces it by the occupancy
    indicator.  A trial is selected when the accurate readings at slots 1 and 4
    match ``preselect`` / ``postselect``; those slots get an implicit accurate
    pointer if none is given.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    ptrs = pointer_map(pointers)
    for slot, value in ((1, preselect), (4, postselect)):
        if value is None:
            continue
        p = ptrs.get(slot)
        if p is None:
            ptrs[slot] = PointerConfig(slot, "accurate")
        elif not p.accurate:
            raise ValueError(f"selection at slot {slot} needs an accurate pointer")
    active = [p for _, p in sorted(ptrs.items()) if not p.decoupled]
    w1 = model.input_weights[1]
    leg1, leg3 = model.leg1, model.leg3

    def block(b: int, m: int) -> TrialBatch:
        rng = stream(seed, b)
        i = (rng.random(m) < w1).astype(np.int8)
        j = (rng.random(m) < leg1[i, 1]).astype(np.int8)
        k = j
        l = (rng.random(m) < leg3[k, 1]).astype(np.int8)
        occupancy = {1: i, 2: j, 3: k, 4: l, 5: 1 - j}
        readings = {}
        for p in active:
            shift = occupancy[p.slot]
            if p.accurate:
                readings[p.slot] = shift.astype(np.int64)
            else:
                readings[p.slot] = shift + rng.normal(0.0, classical_sigma(p.width), m)
        sel = np.ones(m, dtype=bool)
        if preselect is not None:
            sel &= readings[1] == preselect
        if postselect is not None:
            sel &= readings[4] == postselect
        return TrialBatch(readings, sel, np.stack([i, j, k, l], axis=1))

    return TrialBatch.concat(_run_blocks(block, n, workers))


def sample_quantum(density: CoherentGaussianDensity, n: int, seed: int, workers: int = 1) -> TrialBatch:
    """Draw ``n`` reading vectors from a coherent Gaussian density.

    Rejection sampling: propose from the incoherent mixture
    ``sum_t |c_t|^2 prod G^2(f - s_t)`` and accept with probability
    ``|sum_g c_t prod G(f - s_t)|^2 / (K sum_g |c_t|^2 prod G^2(f - s_t))`` where
    the sums run over the terms sharing the proposal's accurate readings and
    K is the largest such group.  Since ``|sum x|^2 <= K sum |x|^2`` the ratio
    never exceeds 1; a violation raises.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    # zero-amplitude terms neither contribute nor loosen the envelope
    terms = [t for t in density.terms if t.coeff != 0]
    coeffs = np.array([t.coeff for t in terms], dtype=complex)
    shifts = np.array([t.shifts for t in terms], dtype=float).reshape(len(terms), len(density.slots))
    probs = np.abs(coeffs) ** 2
    if probs.sum() <= 0:
        raise ValueError("density has no weight")
    probs = probs / probs.sum()
    keys = [t.discrete for t in terms]
    group_of = np.array([sorted(set(keys)).index(k) for k in keys])
    K = max(np.bincount(group_of))
    widths = np.array(density.widths, dtype=float)
    sigmas = np.array([reading_sigma(w) for w in widths])

    def amplitudes(f: np.ndarray, t: int) -> np.ndarray:
        g = np.ones(len(f))
        for d in range(len(widths)):
            g = g * quantum_gaussian(f[:, d] - shifts[t, d], widths[d])
        return g

    def block(b: int, m: int) -> TrialBatch:
        rng = stream(seed, b)
        out_f, out_t = [], []
        got = proposed = 0
        while got < m:
            size = max(64, 2 * K * (m - got))
            t = rng.choice(len(terms), size=size, p=probs)
            f = shifts[t] + rng.normal(size=(size, len(widths))) * sigmas
            u = rng.random(size)
            coherent = np.zeros(size, dtype=complex)
            incoherent = np.zeros(size)
            for s in range(len(terms)):
                mask = group_of[s] == group_of[t]
                g = amplitudes(f, s)
                coherent += np.where(mask, coeffs[s] * g, 0)
                incoherent += np.where(mask, np.abs(coeffs[s]) ** 2 * g**2, 0)
            ratio = np.abs(coherent) ** 2 / (K * incoherent)
            if np.any(ratio > 1 + 1e-12):
                raise AssertionError("rejection envelope violated")
            acc = u < ratio
            idx = np.flatnonzero(acc)[: m - got]
            # trials past the last needed acceptance were never consumed
            proposed += (idx[-1] + 1) if len(idx) == m - got else size
            out_f.append(f[idx])
            out_t.append(t[idx])
            got += len(idx)
        f = np.concatenate(out_f)
        t = np.concatenate(out_t)
        readings = {s: f[:, d] for d, s in enumerate(density.slots)}
        for d, s in enumerate(density.discrete_slots):
            readings[s] = np.array([terms[ti].discrete[d] for ti in t], dtype=np.int64)
        batch = TrialBatch(readings, np.ones(m, dtype=bool))
        batch.meta["proposed"] = proposed
        return batch

    parts = _run_blocks(block, n, workers)
    out = TrialBatch.concat(parts)
    proposed = sum(p.meta["proposed"] for p in parts)
    out.proposal_acceptance = n / proposed
    out.postselection_probability = density.norm
    return out


@dataclass
class SampleSummary:
    n_trials: int
    acceptance_rate: float
    means: dict[int, float]
    variances: dict[int, float]
    histograms: dict[int, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)
    out_of_range: dict[int, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n_trials": self.n_trials,
            "acceptance_rate": self.acceptance_rate,
            "means": {str(k): v for k, v in self.means.items()},
            "variances": {str(k): v for k, v in self.variances.items()},
            "histograms": {
                str(k): {"edges": e.tolist(), "mass": m.tolist()} for k, (e, m) in self.histograms.items()
            },
            "out_of_range": {str(k): v for k, v in self.out_of_range.items()},
        }


def summarize(trials: TrialBatch, grids: Mapping[int, Sequence[float]] | None = None) -> SampleSummary:
    """Acceptance rate plus per-slot moments and histograms of the selected trials.

    ``grids`` maps a slot to histogram bin edges; each histogram's mass sums
    to 1 over the in-range readings, with the excluded fraction reported in
    ``out_of_range``.
    """
    n = len(trials)
    if n == 0:
        raise ValueError("cannot summarize an empty trial list")
    sel = trials.selected
    n_sel = int(sel.sum())
    means, variances, hists, oor = {}, {}, {}, {}
    for s in trials.slots:
        x = trials.readings[s][sel].astype(float)
        if n_sel:
            # shift by a sample value: exact zero for constant data, less cancellation otherwise
            d = x - x[0]
            means[s] = float(x[0] + d.mean())
            variances[s] = float(max(np.mean(d * d) - d.mean() ** 2, 0.0))
        else:
            means[s] = variances[s] = float("nan")
    for s, edges in (grids or {}).items():
        edges = np.asarray(edges, dtype=float)
        x = trials.readings[s][sel].astype(float)
        counts, _ = np.histogram(x, bins=edges)
        inside = counts.sum()
        hists[s] = (edges, counts / inside if inside else counts.astype(float))
        oor[s] = 1.0 - inside / n_sel if n_sel else 0.0
    return SampleSummary(n, n_sel / n, means, variances, hists, oor)

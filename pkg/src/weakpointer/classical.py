"""Classical stochastic two-state network monitored by inaccurate pointers.

A ball enters input ``i`` with probability ``w_i``, moves to ``j`` with
probability ``p(j <- i)`` (``leg1[i][j]``), stays in ``k = j`` and exits in
``l`` with probability ``p(l <- k)`` (``leg3[k][l]``).  A pointer of width
``dF`` has its initial position drawn from

    G(f) = exp(-f**2 / dF**2) / sqrt(pi * dF**2),      integral of G = 1

and is displaced by one unit whenever the ball passes its location.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy import special

from .errors import NormalizationError
from .pointers import (
    ACCURATE,
    DECOUPLED,
    ClassicalPath,
    PointerConfig,
    Width,
    all_paths,
    pointer_map,
)

MIN_POSTSELECTION = 1e-14
_STOCHASTIC_TOL = 1e-12


def classical_gaussian(f, width: float):
    """Pointer initial-position density, normalized so that its integral is 1."""
    f = np.asarray(f, dtype=float)
    return np.exp(-(f / width) ** 2) / math.sqrt(math.pi * width**2)


def classical_sigma(width: float) -> float:
    """Standard deviation of :func:`classical_gaussian`."""
    return width / math.sqrt(2.0)


def _as_stochastic(m, name: str) -> np.ndarray:
    a = np.array(m, dtype=float)
    if a.shape != (2, 2):
        raise ValueError(f"{name} must be 2x2, got shape {a.shape}")
    if np.any(a < 0) or np.any(a > 1):
        raise ValueError(f"{name} entries must lie in [0, 1]")
    if np.any(np.abs(a.sum(axis=1) - 1.0) > _STOCHASTIC_TOL):
        raise ValueError(f"{name} rows must sum to 1")
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TransitionModel:
    """Input weights and the two free legs of the network.

    ``leg1[i][j] = p(j <- i)`` and ``leg3[k][l] = p(l <- k)``; the middle leg
    is the identity and is not stored.
    """

    leg1: np.ndarray
    leg3: np.ndarray
    input_weights: tuple[float, float] = (0.5, 0.5)

    def __post_init__(self):
        object.__setattr__(self, "leg1", _as_stochastic(self.leg1, "leg1"))
        object.__setattr__(self, "leg3", _as_stochastic(self.leg3, "leg3"))
        w = tuple(float(x) for x in self.input_weights)
        if len(w) != 2 or min(w) < 0 or abs(sum(w) - 1.0) > _STOCHASTIC_TOL:
            raise ValueError(f"input weights must be a probability pair, got {self.input_weights!r}")
        object.__setattr__(self, "input_weights", w)

    @classmethod
    def two_way(cls, P0: float, P1: float) -> "TransitionModel":
        """A model whose two routes 1<-0<-0<-0 and 1<-1<-1<-0 have probabilities P0, P1.

        Needs ``0 < P0 + P1 <= 1``.
        """
        total = P0 + P1
        if P0 < 0 or P1 < 0 or not 0 < total <= 1 + _STOCHASTIC_TOL:
            raise ValueError(f"need P0, P1 >= 0 and 0 < P0 + P1 <= 1, got {P0}, {P1}")
        total = min(total, 1.0)
        q = P1 / (P0 + P1)
        return cls(
            leg1=[[1 - q, q], [0.5, 0.5]],
            leg3=[[1 - total, total], [1 - total, total]],
        )


def path_probability(model: TransitionModel, path: ClassicalPath) -> float:
    """p(l<-k) * delta_jk * p(j<-i); the input weight is not included."""
    if not path.is_connected():
        return 0.0
    return float(model.leg3[path.k, path.l] * model.leg1[path.i, path.j])


def two_way_probabilities(model: TransitionModel) -> tuple[float, float]:
    """(P0, P1) with P_j = P(1 <- j <- j <- 0)."""
    return tuple(path_probability(model, ClassicalPath(0, j, j, 1)) for j in (0, 1))


class MixtureTerm(NamedTuple):
    weight: float
    shifts: tuple[float, ...]
    discrete: tuple[int, ...] = ()


@dataclass(frozen=True)
class GaussianMixtureDensity:
    """Weighted mixture of products of classical pointer Gaussians.

    Continuous readings live on ``slots`` (finite widths); readings of
    accurate pointers are exact integers stored per term under
    ``discrete_slots``.  The density at continuous point ``f`` and discrete
    reading ``d`` is ``sum(w * prod G(f - shift)) over terms with discrete == d``.
    """

    slots: tuple[int, ...]
    widths: tuple[float, ...]
    terms: tuple[MixtureTerm, ...]
    discrete_slots: tuple[int, ...] = ()
    paths: tuple[ClassicalPath, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.slots) != len(self.widths):
            raise ValueError("slots and widths differ in length")
        for t in self.terms:
            if len(t.shifts) != len(self.slots) or len(t.discrete) != len(self.discrete_slots):
                raise ValueError("term does not match the density's active pointers")
            if t.weight < 0:
                raise ValueError("mixture weights must be nonnegative")

    @property
    def total_weight(self) -> float:
        return math.fsum(t.weight for t in self.terms)

    @property
    def weights(self) -> np.ndarray:
        return np.array([t.weight for t in self.terms])

    @property
    def shifts(self) -> np.ndarray:
        return np.array([t.shifts for t in self.terms], dtype=float).reshape(len(self.terms), len(self.slots))

    def _index(self, slot: int) -> tuple[str, int]:
        if slot in self.slots:
            return "continuous", self.slots.index(slot)
        if slot in self.discrete_slots:
            return "discrete", self.discrete_slots.index(slot)
        raise KeyError(f"slot {slot} is not an active pointer of this density")

    def pdf(self, points, discrete: Sequence[int] | None = None) -> np.ndarray:
        """Density at ``points`` (shape ``(..., len(slots))``).

        With ``discrete=None`` the accurate readings are summed over.
        """
        pts = np.asarray(points, dtype=float)
        if pts.shape[-1:] != (len(self.slots),):
            pts = pts[..., None] if len(self.slots) == 1 else pts
        if pts.shape[-1] != len(self.slots):
            raise ValueError(f"expected last axis of length {len(self.slots)}")
        out = np.zeros(pts.shape[:-1])
        for t in self.terms:
            if discrete is not None and tuple(discrete) != t.discrete:
                continue
            g = np.full(pts.shape[:-1], t.weight)
            for n, w in enumerate(self.widths):
                g = g * classical_gaussian(pts[..., n] - t.shifts[n], w)
            out += g
        return out

    def discrete_probabilities(self) -> dict[tuple[int, ...], float]:
        probs: dict[tuple[int, ...], float] = {}
        for t in self.terms:
            probs[t.discrete] = probs.get(t.discrete, 0.0) + t.weight
        return probs

    def conditional(self, discrete: Sequence[int]) -> "GaussianMixtureDensity":
        """Density of the continuous readings given the accurate readings."""
        key = tuple(discrete)
        kept = [t for t in self.terms if t.discrete == key]
        total = math.fsum(t.weight for t in kept)
        if total <= 0:
            raise NormalizationError(f"accurate readings {key} have zero probability")
        return GaussianMixtureDensity(
            self.slots,
            self.widths,
            tuple(MixtureTerm(t.weight / total, t.shifts, ()) for t in kept),
        )

    def marginal(self, keep: int | Iterable[int]) -> "GaussianMixtureDensity":
        return marginal_density(self, keep)

    def mean(self, slot: int) -> float:
        return mean_reading(self, slot)

    def variance(self, slot: int) -> float:
        kind, n = self._index(slot)
        w = self.weights / self.total_weight
        if kind == "discrete":
            x = np.array([t.discrete[n] for t in self.terms], dtype=float)
            return float(w @ x**2 - (w @ x) ** 2)
        s = self.shifts[:, n]
        return float(classical_sigma(self.widths[n]) ** 2 + w @ s**2 - (w @ s) ** 2)

    def cdf(self, slot: int, x) -> np.ndarray:
        """Cumulative distribution of the reading at ``slot``."""
        kind, n = self._index(slot)
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        total = self.total_weight
        for t in self.terms:
            if kind == "discrete":
                out += t.weight * (x >= t.discrete[n])
            else:
                sigma = classical_sigma(self.widths[n])
                out += t.weight * special.ndtr((x - t.shifts[n]) / sigma)
        return out / total


def _resolve_selection(ptrs: dict[int, PointerConfig], slot: int, value, what: str):
    if value is None:
        return
    if value not in (0, 1):
        raise ValueError(f"{what} must be 0, 1 or None, got {value!r}")
    p = ptrs.get(slot)
    if p is not None and not p.accurate:
        raise ValueError(f"{what} needs an accurate pointer at slot {slot}, got width {p.width!r}")


def joint_density(
    model: TransitionModel,
    pointers: Iterable[PointerConfig] | dict | None,
    preselect: int | None = None,
    postselect: int | None = None,
) -> GaussianMixtureDensity:
    """Joint density of all non-decoupled pointer readings.

    Pre-selection fixes an accurate reading ``f1 = preselect`` (the input
    weights then drop out); post-selection fixes ``f4 = postselect`` and
    renormalizes by the probability of reaching it.  Selected slots are
    consumed and do not appear in the result.
    """
    ptrs = pointer_map(pointers)
    _resolve_selection(ptrs, 1, preselect, "preselect")
    _resolve_selection(ptrs, 4, postselect, "postselect")
    consumed = {s for s, v in ((1, preselect), (4, postselect)) if v is not None}
    active = [p for s, p in sorted(ptrs.items()) if s not in consumed and not p.decoupled]
    cont = [p for p in active if p.finite]
    disc = [p for p in active if p.accurate]

    terms, paths = [], []
    for path in all_paths():
        if preselect is not None and path.i != preselect:
            continue
        if postselect is not None and path.l != postselect:
            continue
        weight = path_probability(model, path)
        if preselect is None:
            weight *= model.input_weights[path.i]
        terms.append((weight, tuple(float(p.shift(path)) for p in cont), tuple(p.shift(path) for p in disc)))
        paths.append(path)

    total = math.fsum(t[0] for t in terms)
    if total < MIN_POSTSELECTION:
        raise NormalizationError(f"selected ensemble has probability {total:.3g}")
    return GaussianMixtureDensity(
        slots=tuple(p.slot for p in cont),
        widths=tuple(float(p.width) for p in cont),
        terms=tuple(MixtureTerm(w / total, s, d) for w, s, d in terms),
        discrete_slots=tuple(p.slot for p in disc),
        paths=tuple(paths),
    )


def two_way_density(model: TransitionModel, widths: dict[int, Width]) -> GaussianMixtureDensity:
    """Pre-selected in 0, post-selected in 1, with pointers on slots 2, 3, 5."""
    bad = set(widths) - {2, 3, 5}
    if bad:
        raise ValueError(f"two-way pointers live on slots 2, 3, 5; got {sorted(bad)}")
    return joint_density(model, widths, preselect=0, postselect=1)


def marginal_density(density: GaussianMixtureDensity, keep: int | Iterable[int]) -> GaussianMixtureDensity:
    """Integrate out every reading except those at ``keep``.

    Terms that become indistinguishable are merged.
    """
    keep = (keep,) if isinstance(keep, int) else tuple(keep)
    for s in keep:
        density._index(s)
    cidx = [density.slots.index(s) for s in density.slots if s in keep]
    didx = [density.discrete_slots.index(s) for s in density.discrete_slots if s in keep]
    merged: dict[tuple, float] = {}
    for t in density.terms:
        key = (tuple(t.shifts[n] for n in cidx), tuple(t.discrete[n] for n in didx))
        merged[key] = merged.get(key, 0.0) + t.weight
    return GaussianMixtureDensity(
        slots=tuple(density.slots[n] for n in cidx),
        widths=tuple(density.widths[n] for n in cidx),
        terms=tuple(MixtureTerm(w, s, d) for (s, d), w in merged.items()),
        discrete_slots=tuple(density.discrete_slots[n] for n in didx),
    )


def mean_reading(density: GaussianMixtureDensity, slot: int) -> float:
    """First moment of the reading at ``slot``.

    The pointer noise has zero mean, so only the shifts contribute: for the
    two-way problem this is P1 / (P0 + P1) at every width.
    """
    kind, n = density._index(slot)
    if kind == "discrete":
        num = math.fsum(t.weight * t.discrete[n] for t in density.terms)
    else:
        num = math.fsum(t.weight * t.shifts[n] for t in density.terms)
    return num / density.total_weight


def two_pointer_limit_shifts(P0: float, P1: float) -> tuple[float, float]:
    """Centers (z2, z5) the two-pointer density collapses onto at large width."""
    total = P0 + P1
    if total == 0:
        raise ValueError("P0 + P1 must be nonzero")
    z2 = P1 / total
    return z2, 1.0 - z2


def control_pointer_density(model: TransitionModel, width2: Width, width5: Width) -> GaussianMixtureDensity:
    """Two-way density with an accurate control pointer at slot 3."""
    return two_way_density(model, {2: width2, 3: ACCURATE, 5: width5})


class PathProbabilities(NamedTuple):
    P0: float
    P1: float
    valid: bool


def recover_path_probs(z: float, W1: float) -> PathProbabilities:
    """Path probabilities implied by a mean shift ``z`` and arrival rate ``W1``.

    Results outside [0, 1] are returned as-is with ``valid=False``.
    """
    if not 0.0 <= W1 <= 1.0:
        raise ValueError(f"W1 must be a probability, got {W1}")
    P1 = z * W1
    P0 = (1.0 - z) * W1
    valid = 0.0 <= P0 <= 1.0 and 0.0 <= P1 <= 1.0
    return PathProbabilities(P0, P1, valid)


def postselection_probability(model: TransitionModel, preselect: int = 0, postselect: int = 1) -> float:
    return math.fsum(
        path_probability(model, p) for p in all_paths() if p.i == preselect and p.l == postselect
    )


def accurate_outcome_probabilities(model: TransitionModel) -> dict[tuple[int, ...], float]:
    """Probability of each reading vector (f1..f5) when every pointer is accurate."""
    dens = joint_density(model, [PointerConfig(s, ACCURATE) for s in (1, 2, 3, 4, 5)])
    return dens.discrete_probabilities()


__all__ = [
    "ACCURATE",
    "DECOUPLED",
    "GaussianMixtureDensity",
    "MixtureTerm",
    "PathProbabilities",
    "TransitionModel",
    "accurate_outcome_probabilities",
    "classical_gaussian",
    "classical_sigma",
    "control_pointer_density",
    "joint_density",
    "marginal_density",
    "mean_reading",
    "path_probability",
    "postselection_probability",
    "recover_path_probs",
    "two_pointer_limit_shifts",
    "two_way_density",
    "two_way_probabilities",
]

"""A qubit monitored by von Neumann pointers with Gaussian initial states.

Pointer wavefunctions are normalized in the quantum sense,

    G(f) = (2 / (pi * dF**2))**(1/4) * exp(-f**2 / dF**2),   integral of G**2 = 1,

and an impulsive coupling translates the pointer by one unit on the branch
where the monitored projector is 1.  With pre-selection in ``|I_pre>`` and
post-selection in ``|F_post>`` the only surviving amplitudes are the two
path amplitudes ``A_j = a(F_post <- c_j) a(c_j <- b_j) a(b_j <- I_pre)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence, Union

import numpy as np
from scipy import special

from . import classical
from .errors import NormalizationError
from .pointers import (
    ACCURATE,
    DECOUPLED,
    ClassicalPath,
    PointerConfig,
    Regime,
    Width,
    pointer_map,
    pointer_shift,
)

_UNITARY_TOL = 1e-12
MIN_NORM = 1e-14


def quantum_gaussian(f, width: float):
    """Pointer wavefunction; its square integrates to 1."""
    f = np.asarray(f, dtype=float)
    return (2.0 / (math.pi * width**2)) ** 0.25 * np.exp(-(f / width) ** 2)


def reading_sigma(width: float) -> float:
    """Standard deviation of the reading density ``G(f)**2``."""
    return width / 2.0


def pointer_overlap(width: Width) -> float:
    """Overlap J of a pointer state with its unit translate.

    ``exp(-1 / (2 dF**2))``; exactly 1 for a decoupled pointer and 0 for an
    accurate one.
    """
    if width is DECOUPLED:
        return 1.0
    if width is ACCURATE:
        return 0.0
    w = float(width)
    if w < 0:
        raise ValueError("width must be nonnegative")
    if w == 0:
        return 0.0
    if math.isinf(w):
        return 1.0
    return math.exp(-1.0 / (2.0 * w * w))


def _as_unitary(m, name: str) -> np.ndarray:
    a = np.array(m, dtype=complex)
    if a.shape != (2, 2):
        raise ValueError(f"{name} must be 2x2, got shape {a.shape}")
    if np.max(np.abs(a @ a.conj().T - np.eye(2))) > _UNITARY_TOL:
        raise ValueError(f"{name} is not unitary")
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class AmplitudeModel:
    """Leg amplitudes of the qubit network.

    ``leg1[i][j] = a(b_j <- I_i)``, ``leg2 = diag(a(c_j <- b_j))`` and
    ``leg3[k][l] = a(F_l <- c_k)``.  A 1-D ``leg2`` is taken as the diagonal.
    """

    leg1: np.ndarray
    leg2: np.ndarray
    leg3: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "leg1", _as_unitary(self.leg1, "leg1"))
        object.__setattr__(self, "leg3", _as_unitary(self.leg3, "leg3"))
        l2 = np.array(self.leg2, dtype=complex)
        if l2.shape == (2,):
            l2 = np.diag(l2)
        if l2.shape != (2, 2):
            raise ValueError(f"leg2 must be a 2x2 diagonal matrix or its diagonal, got shape {l2.shape}")
        if l2[0, 1] != 0 or l2[1, 0] != 0:
            raise ValueError("leg2 must be diagonal: no transitions between b_j and c_(1-j)")
        if np.any(np.abs(np.diag(l2)) > 1 + _UNITARY_TOL):
            raise ValueError("leg2 diagonal entries must have modulus <= 1")
        l2.setflags(write=False)
        object.__setattr__(self, "leg2", l2)

    @classmethod
    def identity(cls) -> "AmplitudeModel":
        return cls(np.eye(2), [1.0, 1.0], np.eye(2))

    def with_phase(self, phase: float) -> "AmplitudeModel":
        """Same model times a global phase on the first leg."""
        return AmplitudeModel(self.leg1 * cmath.exp(1j * phase), self.leg2, self.leg3)


Amplitudes = Union[AmplitudeModel, Sequence[complex]]


def path_amplitude(model: AmplitudeModel, path: ClassicalPath) -> complex:
    if not path.is_connected():
        return 0j
    return complex(model.leg3[path.k, path.l] * model.leg2[path.j, path.k] * model.leg1[path.i, path.j])


def postselected_amplitudes(model: Amplitudes, preselect: int = 0, postselect: int = 1) -> tuple[complex, complex]:
    """(A0, A1) for the two routes from ``I_pre`` to ``F_post``.

    A bare pair of complex numbers is passed through unchanged, so every
    function below accepts either a model or the amplitudes themselves.
    """
    if isinstance(model, AmplitudeModel):
        return tuple(path_amplitude(model, ClassicalPath(preselect, j, j, postselect)) for j in (0, 1))
    a0, a1 = model
    return complex(a0), complex(a1)


class CoherentTerm(NamedTuple):
    coeff: complex
    shifts: tuple[float, ...]
    discrete: tuple[int, ...] = ()


@dataclass(frozen=True)
class CoherentGaussianDensity:
    """Reading density ``|sum_t c_t prod_n G_n(f_n - s_tn)|**2 / norm``.

    Terms interfere only with terms carrying the same accurate-pointer
    readings ``discrete``; an accurate pointer whose reading differs between
    two branches destroys their coherence.
    """

    slots: tuple[int, ...]
    widths: tuple[float, ...]
    terms: tuple[CoherentTerm, ...]
    norm: float
    discrete_slots: tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.slots) != len(self.widths):
            raise ValueError("slots and widths differ in length")
        for t in self.terms:
            if len(t.shifts) != len(self.slots) or len(t.discrete) != len(self.discrete_slots):
                raise ValueError("term does not match the density's active pointers")
        if not self.norm > 0:
            raise NormalizationError(f"density norm must be positive, got {self.norm}")

    def groups(self) -> dict[tuple[int, ...], list[CoherentTerm]]:
        out: dict[tuple[int, ...], list[CoherentTerm]] = {}
        for t in self.terms:
            out.setdefault(t.discrete, []).append(t)
        return out

    def _points(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if len(self.slots) == 1 and pts.shape[-1:] != (1,):
            pts = pts[..., None]
        if pts.shape[-1] != len(self.slots):
            raise ValueError(f"expected last axis of length {len(self.slots)}")
        return pts

    def amplitude(self, points, discrete: Sequence[int] = ()) -> np.ndarray:
        """Unnormalized wavefunction of the readings for one accurate outcome."""
        pts = self._points(points)
        key = tuple(discrete)
        out = np.zeros(pts.shape[:-1], dtype=complex)
        for t in self.terms:
            if t.discrete != key:
                continue
            g = np.full(pts.shape[:-1], t.coeff, dtype=complex)
            for n, w in enumerate(self.widths):
                g = g * quantum_gaussian(pts[..., n] - t.shifts[n], w)
            out += g
        return out

    def pdf(self, points, discrete: Sequence[int] | None = None) -> np.ndarray:
        """Density at ``points``; ``discrete=None`` sums over accurate readings."""
        keys = self.groups().keys() if discrete is None else [tuple(discrete)]
        pts = self._points(points)
        out = np.zeros(pts.shape[:-1])
        for key in keys:
            out += np.abs(self.amplitude(pts, key)) ** 2
        return out / self.norm

    def components(self):
        """Expand the density into a signed mixture of normalized Gaussians.

        Uses G(f-s) G(f-s') = exp(-(s-s')**2 / (2 dF**2)) G**2(f - (s+s')/2).
        Returns ``(weights, centers, discrete)``; every Gaussian has standard
        deviation ``dF / 2`` along its axis.  Weights sum to 1.
        """
        weights, centers, discrete = [], [], []
        for key, group in self.groups().items():
            for t in group:
                for u in group:
                    s_t = np.array(t.shifts, dtype=float)
                    s_u = np.array(u.shifts, dtype=float)
                    ov = 1.0
                    for n, w in enumerate(self.widths):
                        ov *= math.exp(-((s_t[n] - s_u[n]) ** 2) / (2.0 * w * w))
                    weights.append((t.coeff.conjugate() * u.coeff).real * ov / self.norm)
                    centers.append((s_t + s_u) / 2.0)
                    discrete.append(key)
        return np.array(weights), np.array(centers).reshape(len(weights), len(self.slots)), discrete

    def total_probability(self) -> float:
        return float(np.sum(self.components()[0]))

    def discrete_probabilities(self) -> dict[tuple[int, ...], float]:
        w, _, d = self.components()
        out: dict[tuple[int, ...], float] = {}
        for wi, di in zip(w, d):
            out[di] = out.get(di, 0.0) + wi
        return out

    def _index(self, slot: int) -> tuple[str, int]:
        if slot in self.slots:
            return "continuous", self.slots.index(slot)
        if slot in self.discrete_slots:
            return "discrete", self.discrete_slots.index(slot)
        raise KeyError(f"slot {slot} is not an active pointer of this density")

    def marginal_pdf(self, slot: int, x) -> np.ndarray:
        kind, n = self._index(slot)
        if kind == "discrete":
            raise ValueError(f"slot {slot} is accurate; use discrete_probabilities()")
        w, c, _ = self.components()
        x = np.asarray(x, dtype=float)
        sigma = reading_sigma(self.widths[n])
        z = (x[..., None] - c[:, n]) / sigma
        return np.sum(w * np.exp(-0.5 * z**2), axis=-1) / (sigma * math.sqrt(2 * math.pi))

    def cdf(self, slot: int, x) -> np.ndarray:
        kind, n = self._index(slot)
        w, c, d = self.components()
        x = np.asarray(x, dtype=float)
        if kind == "discrete":
            vals = np.array([di[n] for di in d], dtype=float)
            return np.sum(w * (x[..., None] >= vals), axis=-1)
        sigma = reading_sigma(self.widths[n])
        return np.sum(w * special.ndtr((x[..., None] - c[:, n]) / sigma), axis=-1)

    def mean(self, slot: int) -> float:
        kind, n = self._index(slot)
        w, c, d = self.components()
        if kind == "discrete":
            return float(sum(wi * di[n] for wi, di in zip(w, d)))
        return float(w @ c[:, n])

    def variance(self, slot: int) -> float:
        kind, n = self._index(slot)
        w, c, d = self.components()
        if kind == "discrete":
            x = np.array([di[n] for di in d], dtype=float)
            return float(w @ x**2 - (w @ x) ** 2)
        sigma = reading_sigma(self.widths[n])
        return float(w @ (c[:, n] ** 2 + sigma**2) - (w @ c[:, n]) ** 2)


def _two_way_terms(A0: complex, A1: complex, cont: list[PointerConfig], disc: list[PointerConfig]):
    terms = []
    for j, coeff in ((0, A0), (1, A1)):
        path = ClassicalPath(0, j, j, 1)
        terms.append(
            CoherentTerm(
                coeff,
                tuple(float(pointer_shift(p.slot, path)) for p in cont),
                tuple(pointer_shift(p.slot, path) for p in disc),
            )
        )
    return terms


def postselected_density(model: Amplitudes, pointers: Iterable[PointerConfig] | dict) -> CoherentGaussianDensity:
    """Density of the readings f2, f3, f5 of the pre- and post-selected qubit.

    Slots 1 and 4 carry the accurate selection pointers and may not be given.
    Branch ``j`` shifts the pointers by ``(j, j, 1 - j)``.
    """
    ptrs = pointer_map(pointers)
    bad = set(ptrs) - {2, 3, 5}
    if bad:
        raise ValueError(f"pointers of the two-path problem live on slots 2, 3, 5; got {sorted(bad)}")
    A0, A1 = postselected_amplitudes(model)
    active = [p for _, p in sorted(ptrs.items()) if not p.decoupled]
    cont = [p for p in active if p.finite]
    disc = [p for p in active if p.accurate]
    overlap = 1.0
    for p in ptrs.values():
        overlap *= pointer_overlap(p.width)
    norm = abs(A0) ** 2 + abs(A1) ** 2 + 2.0 * overlap * (A0.conjugate() * A1).real
    if norm < MIN_NORM:
        raise NormalizationError(f"post-selection probability {norm:.3g} vanishes")
    return CoherentGaussianDensity(
        slots=tuple(p.slot for p in cont),
        widths=tuple(float(p.width) for p in cont),
        terms=tuple(_two_way_terms(A0, A1, cont, disc)),
        norm=norm,
        discrete_slots=tuple(p.slot for p in disc),
    )


def postselection_probability(model: Amplitudes, widths: dict[int, Width]) -> float:
    """W1: probability of reaching F1 from I0 with the given pointers in place."""
    A0, A1 = postselected_amplitudes(model)
    overlap = 1.0
    for w in widths.values():
        overlap *= pointer_overlap(w)
    return abs(A0) ** 2 + abs(A1) ** 2 + 2.0 * overlap * (A0.conjugate() * A1).real


@dataclass(frozen=True)
class WeakValue:
    """Complex weak value of the j = 1 path projector.

    The observable pointer shift is the real part.
    """

    value: complex

    @property
    def shift(self) -> float:
        return self.value.real

    @property
    def complement(self) -> "WeakValue":
        return WeakValue(1.0 - self.value)

    def pointer_shifts(self) -> tuple[float, float]:
        """(z2, z5): limiting centers of the pointers at slots 2 and 5."""
        return self.value.real, (1.0 - self.value).real


def weak_value(model: Amplitudes) -> WeakValue:
    A0, A1 = postselected_amplitudes(model)
    total = A0 + A1
    if abs(total) < MIN_NORM:
        raise NormalizationError("amplitudes cancel; the weak value is undefined")
    return WeakValue(A1 / total)


def mean_reading(model: Amplitudes, width2: Width) -> float:
    """First moment of f2 with f3 and f5 decoupled.

    (|A1|^2 + J Re[A0* A1]) / (|A0|^2 + |A1|^2 + 2 J Re[A0* A1]).
    """
    if width2 is DECOUPLED:
        raise ValueError("a decoupled pointer has no reading")
    A0, A1 = postselected_amplitudes(model)
    J = pointer_overlap(width2)
    cross = (A0.conjugate() * A1).real
    den = abs(A0) ** 2 + abs(A1) ** 2 + 2.0 * J * cross
    if den < MIN_NORM:
        raise NormalizationError("post-selection probability vanishes")
    return (abs(A1) ** 2 + J * cross) / den


def two_pointer_density(model: Amplitudes, width: float) -> CoherentGaussianDensity:
    """Coherent density of (f2, f5) for two equally inaccurate pointers."""
    return postselected_density(model, {2: width, 5: width})


def control_pointer_density(model: Amplitudes, width: float) -> CoherentGaussianDensity:
    """As :func:`two_pointer_density` plus an accurate pointer at slot 3.

    The accurate reading separates the branches, so the result is an
    incoherent mixture with weights ``|A_j|^2 / (|A0|^2 + |A1|^2)``.
    """
    A0, A1 = postselected_amplitudes(model)
    if abs(A0) ** 2 + abs(A1) ** 2 < MIN_NORM:
        raise NormalizationError("both path amplitudes vanish")
    return postselected_density(model, {2: width, 3: ACCURATE, 5: width})


def classical_width(width: float) -> float:
    """Classical pointer width whose G matches the quantum reading density G**2."""
    return width / math.sqrt(2.0)


def classical_counterpart(model: Amplitudes, widths: dict[int, Width]) -> classical.GaussianMixtureDensity:
    """Classical two-way density with P_j = |A_j|^2 and matched pointer widths.

    This is what an accurate control pointer turns the qubit readings into.
    """
    A0, A1 = postselected_amplitudes(model)
    P0, P1 = abs(A0) ** 2, abs(A1) ** 2
    scale = P0 + P1
    if scale < MIN_NORM:
        raise NormalizationError("both path amplitudes vanish")
    cmodel = classical.TransitionModel.two_way(P0 / scale, P1 / scale)
    cw = {s: (classical_width(w) if not isinstance(w, Regime) else w) for s, w in widths.items()}
    return classical.two_way_density(cmodel, cw)


def which_path_probability(model: AmplitudeModel, f2: int, f4: int, preselect: int = 0) -> float:
    """Probability of accurate readings f1 = 0, f2, f4: |A(F_f4 <- c_f2 <- b_f2 <- I_0)|^2."""
    if f2 not in (0, 1) or f4 not in (0, 1):
        raise ValueError("accurate readings must be 0 or 1")
    return abs(path_amplitude(model, ClassicalPath(preselect, f2, f2, f4))) ** 2


def anomalous_path_prob(model: Amplitudes) -> classical.PathProbabilities:
    """Path probabilities inferred from the weak value and the unperturbed arrival rate.

    Same recipe that works classically; a weak value outside [0, 1] gives a
    negative 'probability' and ``valid=False``.
    """
    A0, A1 = postselected_amplitudes(model)
    z = weak_value((A0, A1)).shift
    W1 = abs(A0 + A1) ** 2
    return classical.recover_path_probs(z, W1)


__all__ = [
    "ACCURATE",
    "DECOUPLED",
    "AmplitudeModel",
    "CoherentGaussianDensity",
    "CoherentTerm",
    "WeakValue",
    "anomalous_path_prob",
    "classical_counterpart",
    "classical_width",
    "control_pointer_density",
    "mean_reading",
    "path_amplitude",
    "pointer_overlap",
    "postselected_amplitudes",
    "postselected_density",
    "postselection_probability",
    "quantum_gaussian",
    "reading_sigma",
    "two_pointer_density",
    "weak_value",
    "which_path_probability",
]

"""Pointer configuration shared by the classical and quantum models.

A pointer sits at one of five slots of the two-state network:

    slot 1  input state i        (t1)
    slot 2  intermediate j = 1   (t2)
    slot 3  intermediate k = 1   (t3)
    slot 4  final state l        (t4)
    slot 5  intermediate j = 0   (t2, complemented indicator 1 - j)

Its width is either a positive finite float or one of the two exact regimes
``ACCURATE`` (zero width, the reading equals the shift) and ``DECOUPLED``
(infinite width, the pointer is absent from the experiment).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Union


class Regime(enum.Enum):
    ACCURATE = "accurate"
    DECOUPLED = "decoupled"

    def __repr__(self) -> str:
        return self.name


ACCURATE = Regime.ACCURATE
DECOUPLED = Regime.DECOUPLED

Width = Union[float, Regime]

SLOTS = (1, 2, 3, 4, 5)


class ClassicalPath(NamedTuple):
    """One route l <- k <- j <- i through the network."""

    i: int
    j: int
    k: int
    l: int

    def is_connected(self) -> bool:
        # leg 2 is the identity: j and k must agree
        return self.j == self.k


def all_paths() -> list[ClassicalPath]:
    """The eight connected routes (j == k), in lexicographic (i, j, l) order."""
    return [ClassicalPath(i, j, j, l) for i in (0, 1) for j in (0, 1) for l in (0, 1)]


def pointer_shift(slot: int, path: ClassicalPath) -> int:
    """Displacement of the pointer at ``slot`` when the system follows ``path``."""
    if slot == 1:
        return path.i
    if slot == 2:
        return path.j
    if slot == 3:
        return path.k
    if slot == 4:
        return path.l
    if slot == 5:
        return 1 - path.j
    raise ValueError(f"unknown pointer slot {slot!r}")


def normalize_width(width) -> Width:
    """Coerce user input into a width; 0 and inf map to the exact regimes."""
    if isinstance(width, Regime):
        return width
    if isinstance(width, str):
        try:
            return Regime(width.lower())
        except ValueError:
            raise ValueError(f"unknown pointer width {width!r}") from None
    w = float(width)
    if math.isnan(w) or w < 0:
        raise ValueError(f"pointer width must be >= 0, got {width!r}")
    if w == 0:
        return ACCURATE
    if math.isinf(w):
        return DECOUPLED
    return w


def width_to_json(width: Width):
    return width.value if isinstance(width, Regime) else width


@dataclass(frozen=True)
class PointerConfig:
    slot: int
    width: Width = DECOUPLED

    def __post_init__(self):
        if self.slot not in SLOTS:
            raise ValueError(f"pointer slot must be one of {SLOTS}, got {self.slot!r}")
        object.__setattr__(self, "width", normalize_width(self.width))

    @property
    def accurate(self) -> bool:
        return self.width is ACCURATE

    @property
    def decoupled(self) -> bool:
        return self.width is DECOUPLED

    @property
    def finite(self) -> bool:
        return not isinstance(self.width, Regime)

    def shift(self, path: ClassicalPath) -> int:
        return pointer_shift(self.slot, path)


def pointer_map(pointers: Iterable[PointerConfig] | dict | None) -> dict[int, PointerConfig]:
    """Index pointers by slot, rejecting duplicates.

    Accepts a list of :class:`PointerConfig` or a ``{slot: width}`` mapping.
    """
    if pointers is None:
        return {}
    if isinstance(pointers, dict):
        pointers = [PointerConfig(int(s), w) for s, w in pointers.items()]
    out: dict[int, PointerConfig] = {}
    for p in pointers:
        if not isinstance(p, PointerConfig):
            raise TypeError(f"expected PointerConfig, got {type(p).__name__}")
        if p.slot in out:
            raise ValueError(f"more than one pointer at slot {p.slot}")
        out[p.slot] = p
    return out

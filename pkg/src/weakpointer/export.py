"""JSON and CSV writers for densities, grids, trials and extrema."""

from __future__ import annotations

import csv
import io
import itertools
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .classical import GaussianMixtureDensity
from .quantum import CoherentGaussianDensity

SCHEMA_VERSION = 1
DEFAULT_GRID = 241
GRID_HALF_SPAN = 4.0


def complex_to_json(z: complex) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def density_to_dict(density) -> dict:
    """Terms, widths and active slots of either density kind."""
    if not isinstance(density, (CoherentGaussianDensity, GaussianMixtureDensity)):
        raise TypeError(f"not a density: {type(density).__name__}")
    out = {
        "schema_version": SCHEMA_VERSION,
        "slots": list(density.slots),
        "widths": list(density.widths),
        "discrete_slots": list(density.discrete_slots),
    }
    if isinstance(density, CoherentGaussianDensity):
        out["kind"] = "coherent"
        out["norm"] = density.norm
        out["terms"] = [
            {"coeff": complex_to_json(t.coeff), "shifts": list(t.shifts), "discrete": list(t.discrete)}
            for t in density.terms
        ]
    else:
        out["kind"] = "mixture"
        out["terms"] = [
            {"weight": t.weight, "shifts": list(t.shifts), "discrete": list(t.discrete)} for t in density.terms
        ]
    return out


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, complex):
        return complex_to_json(o)
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def write_json(path: Path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(obj, dict) and "schema_version" not in obj:
        obj = {"schema_version": SCHEMA_VERSION, **obj}
    path.write_text(dumps(obj), encoding="utf-8", newline="")
    return path


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(header, rows))
    return path


def read_csv(path: Path) -> tuple[list[str], np.ndarray]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def grid_axes(density, slots: Sequence[int] | None = None, points: int = DEFAULT_GRID) -> dict[int, np.ndarray]:
    """Axis per continuous slot spanning the branch centers +- 4 widths."""
    slots = density.slots if slots is None else tuple(slots)
    axes = {}
    for s in slots:
        n = density.slots.index(s)
        centers = [t.shifts[n] for t in density.terms]
        w = density.widths[n]
        axes[s] = np.linspace(min(centers) - GRID_HALF_SPAN * w, max(centers) + GRID_HALF_SPAN * w, points)
    return axes


def gridded_rows(density, points: int = DEFAULT_GRID):
    """Rows (continuous readings..., discrete readings..., density) over the default grid.

    Continuous axes are over all active finite pointers; one block of rows per
    accurate-reading combination.
    """
    axes = grid_axes(density, points=points)
    header = [f"f{s}" for s in density.slots] + [f"f{s}" for s in density.discrete_slots] + ["density"]
    if density.discrete_slots:
        keys = sorted({t.discrete for t in density.terms})
    else:
        keys = [()]
    mesh = np.meshgrid(*[axes[s] for s in density.slots], indexing="ij")
    pts = np.stack(mesh, axis=-1).reshape(-1, len(density.slots))

    def rows():
        for key in keys:
            vals = density.pdf(pts, key if density.discrete_slots else None)
            for p, v in zip(pts, vals):
                yield (*p, *key, v)

    return header, rows()


def marginal_rows(density, slot: int, points: int = DEFAULT_GRID):
    """Rows (f, density) for the 1-D marginal of ``slot``, accurate readings summed."""
    x = grid_axes(density, [slot], points)[slot]
    if isinstance(density, CoherentGaussianDensity):
        vals = density.marginal_pdf(slot, x)
    else:
        vals = density.marginal(slot).pdf(x)
    return [f"f{slot}", "density"], zip(x, vals)


def summed_rows(density, points: int = DEFAULT_GRID):
    """Like :func:`gridded_rows` but with the accurate readings summed out."""
    axes = grid_axes(density, points=points)
    mesh = np.meshgrid(*[axes[s] for s in density.slots], indexing="ij")
    pts = np.stack(mesh, axis=-1).reshape(-1, len(density.slots))
    vals = density.pdf(pts, None)
    return [f"f{s}" for s in density.slots] + ["density"], (tuple(p) + (v,) for p, v in zip(pts, vals))


def trial_rows(batch):
    slots = batch.slots
    header = ["index"] + [f"f{s}" for s in slots] + ["selected"]
    cols = [batch.readings[s] for s in slots]

    def rows():
        for i in range(len(batch)):
            yield (i, *(c[i] for c in cols), bool(batch.selected[i]))

    return header, rows()


def extrema_rows(diagrams):
    header = ["R", "width", "extremum_location", "extremum_type"]
    return header, itertools.chain.from_iterable(d.rows() for d in diagrams)

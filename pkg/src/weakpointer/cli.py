"""Command-line front end.

Exit status: 0 on success, 2 for usage or config errors, 3 for numerical
failures such as a post-selection that interference cancels exactly.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import asymptotics, classical, export, montecarlo, quantum
from .config import ExperimentConfig, load_config
from .errors import ConfigError, NormalizationError
from .pointers import PointerConfig, normalize_width, width_to_json

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

FIG5_AMPLITUDES = (-1 / math.sqrt(5), 2 / math.sqrt(5))
FIG_WIDTH = 10.0
FIG6_RATIOS = (1.0, 0.8, -0.5)


def _seed(args, cfg: ExperimentConfig | None = None) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("WEAKPOINTER_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"WEAKPOINTER_SEED must be an integer, got {env!r}") from None
    if cfg is not None and cfg.samples and "seed" in cfg.samples:
        return int(cfg.samples["seed"])
    return 0


def _outdir(args, cfg: ExperimentConfig | None = None) -> Path:
    if args.out is not None:
        return Path(args.out)
    if cfg is not None and cfg.output.get("path"):
        return Path(cfg.output["path"])
    return Path(".")


def _grid(args, cfg: ExperimentConfig | None = None) -> int:
    if args.grid is not None:
        return args.grid
    if cfg is not None and cfg.grid:
        return cfg.grid
    return export.DEFAULT_GRID


def _require_config(args) -> ExperimentConfig:
    if not args.config:
        raise ConfigError("this command needs --config")
    return load_config(args.config)


def build_density(cfg: ExperimentConfig, pointers=None):
    pointers = cfg.pointers if pointers is None else pointers
    if cfg.kind == "classical":
        return classical.joint_density(cfg.model, pointers, cfg.preselect, cfg.postselect)
    return quantum.postselected_density(cfg.model, pointers)


def _with_width(pointers: list[PointerConfig], slot: int, width) -> list[PointerConfig]:
    out = [p for p in pointers if p.slot != slot]
    out.append(PointerConfig(slot, width))
    return sorted(out, key=lambda p: p.slot)


def _moments(density) -> dict:
    out = {}
    for s in (*density.slots, *density.discrete_slots):
        out[str(s)] = {"mean": density.mean(s), "variance": density.variance(s)}
    return out


def _postselection(cfg: ExperimentConfig) -> float:
    if cfg.kind == "classical":
        pre = 0 if cfg.preselect is None else cfg.preselect
        post = 1 if cfg.postselect is None else cfg.postselect
        return classical.postselection_probability(cfg.model, pre, post)
    return quantum.postselection_probability(cfg.model, cfg.widths)


def cmd_density(args) -> list[Path]:
    cfg = _require_config(args)
    dens = build_density(cfg)
    if args.slots:
        if cfg.kind == "classical":
            dens = dens.marginal(args.slots)
        elif len(args.slots) == 1:
            header, rows = export.marginal_rows(dens, args.slots[0], _grid(args, cfg))
            out = _outdir(args, cfg)
            return [export.write_csv(out / "density.csv", header, rows)]
        else:
            raise ConfigError("quantum densities can be reduced to a single slot only")
    if len(dens.slots) > 2:
        raise ConfigError(f"{len(dens.slots)} continuous readings; pick at most two with --slots")
    out = _outdir(args, cfg)
    paths = [export.write_json(out / "density.json", export.density_to_dict(dens))]
    if cfg.output.get("format", "csv") == "csv":
        if dens.slots:
            header, rows = export.gridded_rows(dens, _grid(args, cfg))
        else:
            probs = dens.discrete_probabilities()
            header = [f"f{s}" for s in dens.discrete_slots] + ["probability"]
            rows = ((*k, v) for k, v in sorted(probs.items()))
        paths.append(export.write_csv(out / "density.csv", header, rows))
    return paths


def cmd_moments(args) -> list[Path]:
    cfg = _require_config(args)
    dens = build_density(cfg)
    doc = {"kind": cfg.kind, "moments": _moments(dens), "postselection_probability": _postselection(cfg)}
    return [export.write_json(_outdir(args, cfg) / "moments.json", doc)]


def cmd_weakvalue(args) -> list[Path]:
    cfg = _require_config(args)
    if cfg.kind == "classical":
        P0, P1 = classical.two_way_probabilities(cfg.model)
        if P0 + P1 == 0:
            raise NormalizationError("both two-way routes have zero probability")
        z2, z5 = classical.two_pointer_limit_shifts(P0, P1)
        rec = classical.recover_path_probs(z2, P0 + P1)
        doc = {"kind": "classical", "weak_value": z2, "z2": z2, "z5": z5, "P0": P0, "P1": P1,
               "recovered": rec._asdict()}
    else:
        A0, A1 = quantum.postselected_amplitudes(cfg.model)
        wv = quantum.weak_value((A0, A1))
        z2, z5 = wv.pointer_shifts()
        rec = quantum.anomalous_path_prob((A0, A1))
        doc = {"kind": "quantum", "weak_value": wv.value, "z2": z2, "z5": z5,
               "amplitudes": [A0, A1], "recovered": rec._asdict()}
    return [export.write_json(_outdir(args, cfg) / "weakvalue.json", doc)]


def _sweep_point(cfg: ExperimentConfig, slot: int, value):
    width = normalize_width(value)
    pointers = _with_width(cfg.pointers, slot, width)
    dens = build_density(cfg, pointers)
    c2 = cfg.__class__(**{**cfg.__dict__, "pointers": pointers})
    mean = var = None
    if slot in dens.slots or slot in dens.discrete_slots:
        mean, var = dens.mean(slot), dens.variance(slot)
    return width_to_json(width), mean, var, _postselection(c2)


def cmd_sweep(args) -> list[Path]:
    cfg = _require_config(args)
    if not cfg.sweep:
        raise ConfigError("config has no sweep section", source=args.config)
    slot, values = cfg.sweep["slot"], cfg.sweep["values"]
    with ThreadPoolExecutor(max_workers=max(1, args.workers)) as ex:
        results = list(ex.map(lambda v: _sweep_point(cfg, slot, v), values))
    out = _outdir(args, cfg)
    if cfg.output.get("format", "csv") == "json":
        doc = {"slot": slot, "points": [
            {"index": i, "width": w, "mean": m, "variance": v, "postselection_probability": W}
            for i, (w, m, v, W) in enumerate(results)]}
        return [export.write_json(out / "sweep.json", doc)]
    rows = ((i, w, "" if m is None else m, "" if v is None else v, W) for i, (w, m, v, W) in enumerate(results))
    return [export.write_csv(out / "sweep.csv", ["index", "width", "mean", "variance", "postselection_probability"], rows)]


def cmd_sample(args) -> list[Path]:
    cfg = _require_config(args)
    n = args.n or (cfg.samples or {}).get("n")
    if not n:
        raise ConfigError("number of trials missing: give --n or samples.n")
    seed = _seed(args, cfg)
    if cfg.kind == "classical":
        batch = montecarlo.sample_classical(cfg.model, cfg.pointers, n, seed, cfg.preselect, cfg.postselect,
                                            workers=args.workers)
    else:
        batch = montecarlo.sample_quantum(build_density(cfg), n, seed, workers=args.workers)
    summary = montecarlo.summarize(batch).to_dict()
    summary["seed"] = seed
    if cfg.kind == "quantum":
        summary["postselection_probability"] = batch.postselection_probability
        summary["proposal_acceptance"] = batch.proposal_acceptance
    out = _outdir(args, cfg)
    header, rows = export.trial_rows(batch)
    return [export.write_csv(out / "trials.csv", header, rows), export.write_json(out / "summary.json", summary)]


def _diagrams(ratios, widths):
    return [asymptotics.extrema_diagram(R, widths) for R in ratios]


def cmd_bifurcation(args) -> list[Path]:
    lo, hi, count = args.widths
    widths = np.linspace(lo, hi, int(count))
    diagrams = _diagrams(args.R, widths)
    out = _outdir(args)
    header, rows = export.extrema_rows(diagrams)
    crit = {repr(d.R): d.critical_width for d in diagrams}
    return [export.write_csv(out / "extrema.csv", header, rows),
            export.write_json(out / "critical_widths.json", {"critical_width": crit})]


def cmd_bound(args) -> list[Path]:
    res = asymptotics.attribution_bound(args.width, args.c, args.eps)
    doc = {"width": args.width, "c": args.c, "eps": args.eps, "threshold": res.threshold, "bound": res.bound}
    print(f"f_eps = {res.threshold:.12g}  P(f > f_eps) < {res.bound:.6e}")
    return [export.write_json(_outdir(args) / "bound.json", doc)]


def figure_fig3(out: Path, points: int) -> list[Path]:
    model = classical.TransitionModel.two_way(0.5, 0.5)
    a = classical.two_way_density(model, {2: FIG_WIDTH, 5: FIG_WIDTH})
    b = classical.control_pointer_density(model, FIG_WIDTH, FIG_WIDTH)
    return [export.write_csv(out / "fig3a.csv", *export.gridded_rows(a, points)),
            export.write_csv(out / "fig3b.csv", *export.gridded_rows(b, points))]


def figure_fig5(out: Path, points: int) -> list[Path]:
    a = quantum.two_pointer_density(FIG5_AMPLITUDES, FIG_WIDTH)
    b = quantum.control_pointer_density(FIG5_AMPLITUDES, FIG_WIDTH)
    return [export.write_csv(out / "fig5a.csv", *export.gridded_rows(a, points)),
            export.write_csv(out / "fig5b.csv", *export.gridded_rows(b, points)),
            export.write_csv(out / "fig5c.csv", *export.summed_rows(b, points))]


def figure_fig6(out: Path, points: int) -> list[Path]:
    widths = np.linspace(0.05, 5.0, 100)
    diagrams = _diagrams(FIG6_RATIOS, widths)
    crit = {repr(d.R): d.critical_width for d in diagrams}
    return [export.write_csv(out / "fig6.csv", *export.extrema_rows(diagrams)),
            export.write_json(out / "fig6_critical_widths.json", {"critical_width": crit})]


FIGURES = {"fig3": figure_fig3, "fig5": figure_fig5, "fig6": figure_fig6}


def cmd_figure(args) -> list[Path]:
    return FIGURES[args.name](_outdir(args), _grid(args))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config (JSON)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="RNG seed (overrides WEAKPOINTER_SEED and the config)")
    common.add_argument("--grid", type=int, help=f"grid points per axis (default {export.DEFAULT_GRID})")
    common.add_argument("--workers", type=int, default=1, help="parallel workers; output does not depend on it")

    parser = argparse.ArgumentParser(prog="weakpointer", description="Inaccurate pointers on two-path systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("density", parents=[common], help="gridded reading density")
    p.add_argument("--slots", type=int, nargs="+", help="keep only these pointer slots")
    p.set_defaults(func=cmd_density)
    sub.add_parser("moments", parents=[common], help="means and variances of the readings").set_defaults(func=cmd_moments)
    sub.add_parser("weakvalue", parents=[common], help="weak value and inferred path probabilities").set_defaults(
        func=cmd_weakvalue)
    sub.add_parser("sweep", parents=[common], help="sweep one pointer width").set_defaults(func=cmd_sweep)
    p = sub.add_parser("sample", parents=[common], help="Monte Carlo trials")
    p.add_argument("--n", type=int, help="number of trials")
    p.set_defaults(func=cmd_sample)
    p = sub.add_parser("bifurcation", parents=[common], help="extrema of a two-Gaussian superposition")
    p.add_argument("--R", type=float, nargs="+", default=list(FIG6_RATIOS), help="ratios B/A")
    p.add_argument("--widths", type=float, nargs=3, default=(0.05, 5.0, 100), metavar=("LO", "HI", "COUNT"))
    p.set_defaults(func=cmd_bifurcation)
    p = sub.add_parser("bound", parents=[common], help="which-way attribution bound")
    p.add_argument("--width", type=float, required=True)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--eps", type=float, required=True)
    p.set_defaults(func=cmd_bound)
    p = sub.add_parser("figure", parents=[common], help="data behind the figures")
    p.add_argument("name", choices=sorted(FIGURES))
    p.set_defaults(func=cmd_figure)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        paths = args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NormalizationError, ZeroDivisionError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())

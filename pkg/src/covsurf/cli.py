"""Command line: gen / analyze / reduce / check."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import fileformat
from .generate import GenerationError, base_for, open_cover, random_configuration, random_monodromy
from .lifting import LiftingError
from .sphgeo import GeometryError, SpecialSet
from .surface import (
    CoveringSurface,
    PreconditionError,
    branch_report,
    degree_spread_check,
    degrees,
    area_bound_check,
    is_Fr,
    measures,
    validate,
)
from .surgery import SurgeryError, d_star, reduce

OK, VIOLATION, USAGE, IO = 0, 1, 2, 3


@dataclass
class GenConfig:
    degree: int = 3
    q: int = 3
    m: int = 2
    seed: int = 0


def generate_surface(cfg: GenConfig) -> tuple[CoveringSurface, SpecialSet]:
    """Random open cover; the same config always gives the same surface."""
    rng = np.random.default_rng(cfg.seed)
    E, cap = random_configuration(rng, cfg.q)
    B = base_for(E, cap, cfg.m, axis_seed=cfg.seed)
    S = open_cover(B, random_monodromy(cfg.degree, cfg.q, rng), cap)
    S.meta.update(seed=cfg.seed, degree=cfg.degree)
    return S, E


def _emit(report: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(report, sort_keys=True))
        return
    for k in sorted(report):
        v = report[k]
        if isinstance(v, list):
            print(f"{k}:")
            for item in v:
                print(f"  {item}")
        else:
            print(f"{k}: {v}")


def _load(path):
    S, E = fileformat.load_with_special(path)
    if E is None:
        raise fileformat.FileFormatError("file does not list the special points")
    return S, E


def analysis(S: CoveringSurface, E: SpecialSet) -> dict:
    M = measures(S, E)
    lo, hi = degrees(S)
    rep = {"topology": S.topology, "A": M.A, "L": M.L, "nbar": M.nbar, "R": M.R, "H": M.H,
           "deg_min": lo, "deg_max": hi, "q": E.q, "m": S.m,
           "branch_points": [asdict(p) for p in branch_report(S).points]}
    if S.topology == "disk":
        rep["area_bound"] = bool(area_bound_check(S, E))
    return rep


def invariant_violations(S: CoveringSurface, E: SpecialSet) -> list[str]:
    out = validate(S)
    if out:
        return out
    if not is_Fr(S):
        out.append("branch values off the special set")
    if S.topology == "disk":
        if not degree_spread_check(S):
            out.append("degree spread exceeds the number of boundary arcs")
        if not area_bound_check(S, E):
            out.append("area bound fails")
    return out


def cmd_gen(a) -> int:
    S, E = generate_surface(GenConfig(a.degree, a.q, a.m, a.seed))
    fileformat.save(S, a.out, E)
    lo, hi = degrees(S)
    _emit({"out": a.out, "deg_min": lo, "deg_max": hi, "cells": S.n_cells}, a.format)
    return OK


def cmd_analyze(a) -> int:
    S, E = _load(a.file)
    _emit(analysis(S, E), a.format)
    return OK


def cmd_reduce(a) -> int:
    S, E = _load(a.file)
    trace: list = []
    before = measures(S, E)
    target = a.target if a.target is not None else d_star(S.m, E.q)
    why: list = []
    R = reduce(S, E, target=target, trace=trace, stop_reason=why)
    after = measures(R, E)
    fileformat.save(R, a.out, E)
    rep = {"out": a.out, "target": target, "deg_min_before": degrees(S)[0], "deg_min": degrees(R)[0],
           "H_before": before.H, "H": after.H, "steps": len(trace), "reached": degrees(R)[0] <= target}
    if why:
        rep["stopped"] = why[0]
    if a.trace:
        rep["ledger"] = [{"deg_min_before": s.deg_min_before, "deg_min_after": s.deg_min_after, "kind": s.kind,
                          "d": s.ledger.d, "nbar": s.ledger.nbar, "nbar0": s.ledger.nbar0, "nbar1": s.ledger.nbar1,
                          "A0": s.ledger.A0, "A1": s.ledger.A1, "cases": s.ledger.cases, "classes": s.counts}
                         for s in trace]
    _emit(rep, a.format)
    return OK if rep["reached"] else VIOLATION


def cmd_check(a) -> int:
    S, E = _load(a.file)
    bad = invariant_violations(S, E)
    _emit({"ok": not bad, "violations": bad}, a.format)
    return VIOLATION if bad else OK


def parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="covsurf", description="Branched covering surfaces over the sphere.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--format", choices=("json", "text"), default="text")
        return sp

    g = common(sub.add_parser("gen", help="generate a random disk surface"))
    g.add_argument("--degree", type=int, required=True)
    g.add_argument("--q", type=int, default=3)
    g.add_argument("--m", type=int, default=2)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    an = common(sub.add_parser("analyze", help="report measures and branching"))
    an.add_argument("file")
    an.set_defaults(func=cmd_analyze)

    r = common(sub.add_parser("reduce", help="split off spheres until the degree bound holds"))
    r.add_argument("file")
    r.add_argument("--out", required=True)
    r.add_argument("--trace", action="store_true")
    r.add_argument("--target", type=int, default=None, help="stop at this minimal degree (default d*)")
    r.set_defaults(func=cmd_reduce)

    c = common(sub.add_parser("check", help="run all invariant checks"))
    c.add_argument("file")
    c.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    p = parser()
    try:
        a = p.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    if a.command == "gen" and (a.degree < 1 or a.q < 3 or a.m < 1):
        print("error: need degree >= 1, q >= 3, m >= 1", file=sys.stderr)
        return USAGE
    try:
        return a.func(a)
    except (OSError, fileformat.FileFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return IO
    except (GenerationError, GeometryError, PreconditionError, SurgeryError, LiftingError) as exc:
        print(f"violation: {exc}", file=sys.stderr)
        return VIOLATION


if __name__ == "__main__":
    sys.exit(main())

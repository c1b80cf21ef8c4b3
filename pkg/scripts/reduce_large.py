"""Reduce random open covers whose minimal degree sits just above d* and print the per-step ledger."""
import argparse
import time
from dataclasses import dataclass

import numpy as np

from covsurf.generate import base_for, open_cover, random_configuration, random_monodromy
from covsurf.surface import degrees, measures
from covsurf.surgery import d_star, reduce
from covsurf.triangulate import shelling_order


@dataclass
class Config:
    m: int = 2
    q: int = 3
    instances: int = 5
    excess: int = 5
    seed: int = 0


def run(cfg: Config) -> None:
    rng = np.random.default_rng(cfg.seed)
    target = d_star(cfg.m, cfg.q)
    E, cap = random_configuration(rng, cfg.q)
    B = base_for(E, cap, cfg.m)
    sh = shelling_order(B)
    print(f"d* = {target}, base faces = {B.n_faces}")
    for i in range(cfg.instances):
        lo = target + 1 + i % cfg.excess
        S = open_cover(B, random_monodromy(lo + 1, cfg.q, rng), cap)
        t = time.time()
        trace = []
        R = reduce(S, E, sh, trace=trace)
        dt = time.time() - t
        h0, h1 = measures(S, E).H, measures(R, E).H
        print(f"[{i}] deg_min {degrees(S)[0]} -> {degrees(R)[0]} in {len(trace)} steps, {dt:.1f}s, "
              f"H {h0:.12f} -> {h1:.12f}")
        for s in trace:
            L = s.ledger
            print(f"    split d={L.d} ({s.kind}) nbar {L.nbar} = {L.nbar0} + {L.nbar1} - 2, cases {L.cases}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    for f, v in Config().__dict__.items():
        p.add_argument(f"--{f}", type=int, default=v)
    run(Config(**vars(p.parse_args())))

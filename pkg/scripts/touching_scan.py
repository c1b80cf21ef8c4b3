"""Scan pruned covers for sheets touching two boundary points over the same special point.

Reports how often the doubly touching class exceeds the pair count, and how
often the alternative cut then succeeds.
"""
import argparse
import collections
import itertools
from dataclasses import dataclass

import numpy as np

from covsurf.generate import (
    GenerationError,
    base_for,
    cycle_count,
    local_monodromy,
    on_circle_configuration,
    pruned_cover,
    transitive,
)
from covsurf.lifting import classify_selections, enumerate_selections
from covsurf.surgery import SurgeryError, alternative_cut, sew_split
from covsurf.triangulate import shelling_order


@dataclass
class Config:
    degree: int = 6
    samples: int = 2000
    config_seed: int = 1
    seed: int = 0


def run(cfg: Config) -> collections.Counter:
    E, cap = on_circle_configuration(np.random.default_rng(cfg.config_seed))
    B = base_for(E, cap, 1, 0.0, 0)
    sh = shelling_order(B)
    rng = np.random.default_rng(cfg.seed)
    d = cfg.degree
    perms = [np.array(p) for p in itertools.permutations(range(d))]
    out = collections.Counter()
    for _ in range(cfg.samples):
        g = [perms[rng.integers(len(perms))] for _ in range(2)]
        if not transitive(g, d) or sum(d - cycle_count(x) for x in local_monodromy(g)) != 2 * d - 2:
            continue
        try:
            S = pruned_cover(B, g, cap, int(rng.integers(d)))
        except GenerationError:
            out["not a disk"] += 1
            continue
        sel = enumerate_selections(S, sh)
        cls = classify_selections(S, sel)
        if len(cls.g_2pp) <= S.m * (S.m - 1) // 2:
            out["below pair count"] += 1
            continue
        out["above pair count"] += 1
        try:
            res = sew_split(S, alternative_cut(S, cls, sel), E)
            out["cut ok" if res.ledger.balanced() else "cut unbalanced"] += 1
        except SurgeryError as exc:
            out[str(exc)] += 1
    return out


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    for f, v in Config().__dict__.items():
        p.add_argument(f"--{f.replace('_', '-')}", dest=f, type=int, default=v)
    for k, v in sorted(run(Config(**vars(p.parse_args()))).items()):
        print(f"{v:6d}  {k}")

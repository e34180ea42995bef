"""Sweep complex delta couplings on a star and compare the similarity verdict
with the predicate Re g > 0 or g <= 0.

    python3 scripts/similarity_sweep.py --n-edges 3 --half-width 3 --points 21
"""

import argparse
import csv
import sys
from dataclasses import dataclass

import numpy as np

from qgraph import boundary as bd
from qgraph.classify import similarity_verdict_star
from qgraph.graph import MetricGraph


@dataclass
class SweepConfig:
    n_edges: int = 3
    half_width: float = 3.0
    points: int = 21
    kind: str = "delta"  # or delta_prime
    real_band: float = 1e-9


def predicate(g: complex, band: float) -> bool:
    return g.real > 0 or (abs(g.imag) <= band and g.real <= 0)


def sweep(cfg: SweepConfig):
    graph = MetricGraph.star(cfg.n_edges)
    make = bd.delta_star if cfg.kind == "delta" else bd.delta_prime_star
    axis = np.linspace(-cfg.half_width, cfg.half_width, cfg.points)
    for re in axis:
        for im in axis:
            g = complex(re, im)
            v = similarity_verdict_star(make(cfg.n_edges, g), graph)
            yield g, v, predicate(g, cfg.real_band)


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in vars(SweepConfig()).items():
        p.add_argument("--" + name.replace("_", "-"), type=type(default), default=default)
    cfg = SweepConfig(**vars(p.parse_args()))
    out = csv.writer(sys.stdout)
    out.writerow(["re_gamma", "im_gamma", "similar", "obstruction", "predicate"])
    bad = 0
    for g, v, expected in sweep(cfg):
        bad += v.is_similar_to_selfadjoint is not expected
        out.writerow([f"{g.real:.6g}", f"{g.imag:.6g}", int(v.is_similar_to_selfadjoint), v.obstruction.value, int(expected)])
    print(f"# mismatches: {bad} of {cfg.points ** 2}", file=sys.stderr)
    return 0 if bad == 0 else 1


if __name__ == "__main__":
    sys.exit(main())

"""Roots of the broken-symmetry example (half-line plus an edge of length a)
against the closed forms Re k = (pi/2a)(3/2 + 2n), Im k = ln(tan tau)/(2a)."""

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from qgraph import boundary as bd
from qgraph.graph import ExternalEdge, InternalEdge, MetricGraph
from qgraph.spectral import compact_spectrum


@dataclass
class BrokenSymmetryConfig:
    tau: float = np.pi / 4
    length: float = 1.0
    n_roots: int = 3
    im_halfwidth: float = 2.0


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in vars(BrokenSymmetryConfig()).items():
        p.add_argument("--" + name.replace("_", "-"), type=type(default), default=default)
    cfg = BrokenSymmetryConfig(**vars(p.parse_args()))

    a = cfg.length
    g = MetricGraph((0, 1), (InternalEdge("i", 0, 1, a),), (ExternalEdge("x", 0),))
    re_max = (np.pi / (2 * a)) * (1.5 + 2 * cfg.n_roots)
    im0 = np.log(np.tan(cfg.tau)) / (2 * a)
    box = (0.1, re_max, im0 - cfg.im_halfwidth, im0 + cfg.im_halfwidth)
    rep = compact_spectrum(bd.broken_symmetry(cfg.tau), g, box)
    ks = sorted([e.k for e in rep.point_spectrum] + [e.k for e in rep.resonances], key=lambda z: z.real)
    print("n,re_k,im_k,re_expected,im_expected,error")
    worst = 0.0
    for n, k in enumerate(ks[: cfg.n_roots]):
        expected = complex((np.pi / (2 * a)) * (1.5 + 2 * n), im0)
        worst = max(worst, abs(k - expected))
        print(f"{n},{k.real:.12f},{k.imag:.12f},{expected.real:.12f},{expected.imag:.12f},{abs(k - expected):.2e}")
    print(f"# worst error {worst:.2e}", file=sys.stderr)
    return 0 if len(ks) >= cfg.n_roots and worst <= 1e-6 else 1


if __name__ == "__main__":
    sys.exit(main())

"""Resolvent growth along the imaginary axis for three boundary classes.

Prints the per-point quotients and fitted slopes:
  * intermediate conditions on a two-edge star (log-log, expect about -1);
  * Dirichlet reference on the same star (log-log, expect -2);
  * totally degenerate conditions on [0, a] (semilog of q*k^2, expect a/2).
"""

import argparse
import sys
from dataclasses import dataclass, field

import numpy as np

from qgraph import boundary as bd
from qgraph.graph import EdgeFunction, MetricGraph
from qgraph.spectral import resolvent_quotient, resolvent_witness_irregular, resolvent_witness_nqs


@dataclass
class SlopeConfig:
    kappas: list = field(default_factory=lambda: [10.0, 20.0, 40.0, 80.0])
    irregular_ts: list = field(default_factory=lambda: [5.0, 10.0, 20.0])
    length: float = 1.0


def main() -> int:
    p = argparse.ArgumentParser(description="resolvent growth slopes")
    p.add_argument("--kappas", type=float, nargs="+", default=SlopeConfig().kappas)
    p.add_argument("--irregular-ts", type=float, nargs="+", default=SlopeConfig().irregular_ts)
    p.add_argument("--length", type=float, default=1.0)
    cfg = SlopeConfig(**vars(p.parse_args()))

    star = MetricGraph.star(2)
    ks = np.asarray(cfg.kappas)
    nqs = [resolvent_witness_nqs(bd.intermediate(), star, k).quotient for k in ks]
    f = EdgeFunction.sample(star, lambda j, x: np.exp(-(((x - 15) / 3) ** 2)) if j == 0 else 0 * x, h=1e-2, radius=30)
    dirichlet = [resolvent_quotient(bd.dirichlet(2), star, 1j * k, f) for k in ks]
    print("kappa,nqs_quotient,dirichlet_quotient")
    for row in zip(ks, nqs, dirichlet):
        print(",".join(f"{v:.6e}" for v in row))

    interval = MetricGraph.interval(cfg.length)
    ts = np.asarray(cfg.irregular_ts)
    irr = np.array([resolvent_witness_irregular(bd.totally_degenerate(), interval, 1j * t).quotient for t in ts])
    print("t,irregular_quotient")
    for t, q in zip(ts, irr):
        print(f"{t:.6e},{q:.6e}")

    print(f"# slope nqs       {np.polyfit(np.log(ks), np.log(nqs), 1)[0]:+.4f}")
    print(f"# slope dirichlet {np.polyfit(np.log(ks), np.log(dirichlet), 1)[0]:+.4f}")
    s = np.polyfit(ts, np.log(irr * ts**2), 1)[0]
    print(f"# semilog slope irregular {s:+.4f} (a_min = {interval.a_min})")
    return 0


if __name__ == "__main__":
    sys.exit(main())

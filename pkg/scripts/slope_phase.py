"""Normalized DN slope s L / b over a (gamma, rho) grid, as CSV.

    python scripts/slope_phase.py --gammas 0.1,100,60 --rhos 0.01,100,60 > phase.csv

Each axis is log-spaced: ``lo,hi,count``. Columns: gamma, rho, slope_ratio,
dd_ratio (the slow-switching value 1 - p) and fast_gap (1 - slope_ratio).
"""

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from switchheat.closed_forms import dn_slope
from switchheat.params import Params


@dataclass(frozen=True)
class Sweep:
    gammas: tuple[float, float, int] = (0.1, 100.0, 60)
    rhos: tuple[float, float, int] = (0.01, 100.0, 60)
    D: float = 1.0
    L: float = 1.0


def axis(bounds):
    lo, hi, n = bounds
    return np.geomspace(lo, hi, int(n))


def params_for(gamma, rho, D, L):
    total = D * (gamma / L) ** 2
    r0 = total * rho / (1 + rho)
    return Params(r0=r0, r1=total - r0, D=D, L=L)


def triple(text):
    lo, hi, n = text.split(",")
    return float(lo), float(hi), int(n)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--gammas", type=triple, default=Sweep.gammas)
    ap.add_argument("--rhos", type=triple, default=Sweep.rhos)
    ap.add_argument("--D", type=float, default=1.0)
    ap.add_argument("--L", type=float, default=1.0)
    a = ap.parse_args(argv)
    sweep = Sweep(a.gammas, a.rhos, a.D, a.L)

    out = sys.stdout
    out.write("gamma,rho,slope_ratio,dd_ratio,fast_gap\n")
    for g in map(float, axis(sweep.gammas)):
        for rho in map(float, axis(sweep.rhos)):
            p = params_for(g, rho, sweep.D, sweep.L)
            s = dn_slope(p) * p.L / p.b
            out.write(f"{g!r},{rho!r},{s!r},{1 - p.p!r},{1 - s!r}\n")


if __name__ == "__main__":
    main()

"""Time the numba kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--vehicles 500] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from odamc import _kernels as k
from odamc.mobility import FlowSpec, RoadConfig, init_vehicles


def _fleet(n):
    road = RoadConfig(lane_count=3, road_length=22000.0)
    flows = (FlowSpec(120, 4.5, 1.0), FlowSpec(70, 0.8, 4.5))
    return init_vehicles(n, 5.0, road, flows, np.random.default_rng(0), 0.1), road


def bench(n, repeat):
    fleet, road = _fleet(n)
    xs, ys = fleet.x, fleet.y
    results = {}
    kernels = {"numpy": (k.neighbors_numpy, k.mobility_numpy)}
    if k.NUMBA_ENABLED:
        kernels["numba"] = (k.neighbors_numba, k.mobility_numba)
    for name, (nb, mob) in kernels.items():
        nb(xs, ys, xs[0], ys[0], 300.0, road.road_length, 0)   # warm-up / JIT compile
        t_nb = min(timeit.repeat(lambda: nb(xs, ys, xs[n // 2], ys[n // 2], 300.0,
                                            road.road_length, n // 2),
                                 number=200, repeat=repeat)) / 200
        f = fleet.copy()
        args = lambda: (f.x, f.y, f.lane, f.speed, f.target, f.accel, f.decel, road.lane_count,
                        road.road_length, road.lane_width, road.min_gap, road.headway, 0.5)
        mob(*args())
        t_mob = min(timeit.repeat(lambda: mob(*args()), number=20, repeat=repeat)) / 20
        results[name] = (t_nb, t_mob)
    return results


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--vehicles", type=int, nargs="+", default=[120, 500, 2000])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'vehicles':>8} {'kernel':>6} {'neighbors (us)':>15} {'mobility step (us)':>19}")
    for n in args.vehicles:
        for name, (t_nb, t_mob) in bench(n, args.repeat).items():
            print(f"{n:8d} {name:>6} {t_nb * 1e6:15.1f} {t_mob * 1e6:19.1f}")


if __name__ == "__main__":
    main()

"""Error of the time-ordered class-3 reconstruction versus the number of steps."""

import argparse
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from chandiv.channel import distance
from chandiv.markov import time_ordered_exp
from chandiv.qubit import RankTwoClass, class3_channel, rank_two_generator_schedule


@dataclass
class Config:
    c1: list = field(default_factory=lambda: [0.3, 0.5, 0.7])
    x: list = field(default_factory=lambda: [0.3, 0.5, 0.7])
    phi: list = field(default_factory=lambda: [0.0, 1.0, 2.0])
    steps: list = field(default_factory=lambda: [64, 128, 256, 512, 1024])
    rule: str = "left"


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--rule", choices=("left", "midpoint"), default="left")
    p.add_argument("--steps", type=int, nargs="+", default=Config().steps)
    args = p.parse_args()
    cfg = Config(steps=args.steps, rule=args.rule)
    rows = []
    for c1 in cfg.c1:
        for x in cfg.x:
            for phi in cfg.phi:
                sched = rank_two_generator_schedule(RankTwoClass("class3", {"c1": c1, "x": x, "phi": phi}))
                target = class3_channel(c1, x, phi)
                errs = [distance(time_ordered_exp(sched, n, rule=cfg.rule), target) for n in cfg.steps]
                ratios = [a / b for a, b in zip(errs, errs[1:])]
                rows.append({"c1": c1, "x": x, "phi": phi, "errors": errs, "ratios": ratios})
    last = np.array([r["ratios"][-1] for r in rows])
    print(json.dumps({"config": asdict(cfg), "rows": rows,
                      "final_ratio_range": [float(last.min()), float(last.max())]}, indent=2))


if __name__ == "__main__":
    main()

"""Grid search for the most negative determinant of a CP unital qubit channel."""

import argparse
import json
import time
from dataclasses import asdict, dataclass

from chandiv.sampling import min_unital_determinant


@dataclass
class Config:
    step: float = 0.01
    refine: int = 5


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--step", type=float, default=Config.step)
    p.add_argument("--refine", type=int, default=Config.refine, help="rounds of 10x finer local grids")
    cfg = Config(**vars(p.parse_args()))
    t0 = time.perf_counter()
    det, lam, history = min_unital_determinant(cfg.step, cfg.refine)
    out = {
        "config": asdict(cfg),
        "min_det": det,
        "argmin": lam.tolist(),
        "target": -1 / 27,
        "history": [{"step": s, "min_det": d} for s, d in history],
        "seconds": time.perf_counter() - t0,
    }
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()

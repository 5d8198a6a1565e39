"""Run every registered property suite and print one summary line each."""

import argparse
import sys
import time
from dataclasses import dataclass

from chandiv.sampling import SUITES, SampleSpec, run_property_suite


@dataclass
class Config:
    samples: int = 1000
    seed: int = 1
    dim: int = None


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--samples", type=int, default=Config.samples)
    p.add_argument("--seed", type=int, default=Config.seed)
    p.add_argument("--dim", type=int, default=None, help="fix d (default alternates 2 and 3)")
    p.add_argument("suites", nargs="*", default=list(SUITES))
    args = p.parse_args()
    cfg = Config(args.samples, args.seed, args.dim)
    failed = False
    for name in args.suites:
        t0 = time.perf_counter()
        count = 8000 if name == "condid2_semigroup" else cfg.samples
        rep = run_property_suite(name, SampleSpec(cfg.dim, None, cfg.seed, count))
        failed |= not rep.ok
        print(f"{name:30s} samples={rep.samples:6d} violations={len(rep.violations):4d} "
              f"worst_margin={rep.worst_margin:+.3e}  {time.perf_counter() - t0:6.1f}s")
        for v in rep.violations[:5]:
            print(f"    seed={v.seed} magnitude={v.magnitude:.3e} {v.description}")
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()

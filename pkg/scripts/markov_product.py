"""Distance between a qubit channel and its product of Markovian factors, versus n."""

import argparse
import json
from dataclasses import asdict, dataclass, field

from chandiv.qubit import Infinitesimal, classify, markov_product_approx
from chandiv.sampling import SampleSpec, random_channel


@dataclass
class Config:
    seed: int = 3
    count: int = 20
    steps: list = field(default_factory=lambda: [4, 8, 16, 32, 64])


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seed", type=int, default=Config.seed)
    p.add_argument("--count", type=int, default=Config.count)
    args = p.parse_args()
    cfg = Config(args.seed, args.count)
    rows = []
    for i in range(cfg.count):
        ch = random_channel(SampleSpec(2, None, cfg.seed, cfg.count), i)
        rep = classify(ch)
        if rep.infinitesimal is not Infinitesimal.DIVISIBLE:
            continue
        errs = [markov_product_approx(ch, n)[1] for n in cfg.steps]
        rows.append({"index": i, "kraus_rank": ch.kraus_rank, "normal_form": rep.evidence.normal_form,
                     "distances": errs})
    print(json.dumps({"config": asdict(cfg), "rows": rows}, indent=2))


if __name__ == "__main__":
    main()

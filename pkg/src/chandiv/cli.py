"""``chandiv`` command-line front end.

Standard output carries JSON only; diagnostics go to standard error.
Exit status: 0 success, 1 input error, 2 numerical failure, 3 suite violations.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import serialize as ser
from .channel import validate
from .errors import ChannelError, NumericalFailure, ParseError
from .markov import markov_approx
from .sampling import SUITES, SampleSpec, random_channel, run_property_suite

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_VIOLATION = 0, 1, 2, 3

VERBS = ("analyze", "classify", "normal-form", "markov-approx", "decompose", "sample", "verify", "convert")


class UsageError(ChannelError, ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class Command:
    verb: str
    source: str = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verb not in VERBS:
            raise UsageError(f"unknown verb {self.verb!r}")


def _add_input(p):
    p.add_argument("input", nargs="?", default="-",
                   help="channel JSON: a file path, inline JSON text, or '-' for standard input (default)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chandiv", description="Determinant and divisibility analysis of quantum channels.")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser, metavar="VERB")

    p = sub.add_parser("analyze", help="structure report: CP, TP, unital, Kraus rank, det, purity")
    _add_input(p)

    p = sub.add_parser("classify", help="divisibility classification of a qubit channel")
    _add_input(p)

    p = sub.add_parser("normal-form", help="Lorentz normal form of a qubit channel with its filters")
    _add_input(p)

    p = sub.add_parser("markov-approx", help="semigroup approximation exp(t(T - id)) and the optimal unitary")
    _add_input(p)
    p.add_argument("--time", type=float, default=1.0, help="evaluation time t of the exported channel (default 1)")
    p.add_argument("--representation", choices=("kraus", "choi", "transfer"), default="kraus",
                   help="representation of the exported channel (default kraus)")

    p = sub.add_parser("decompose", help="rank-two class and generator schedule, or two-factor split of NonDiagonal(x)")
    _add_input(p)
    p.add_argument("--markov-steps", type=int, default=None,
                   help="also build a product of this many Markovian steps and report its distance")

    p = sub.add_parser("sample", help="seeded random channels as a JSON array")
    p.add_argument("--dim", type=int, required=True, help="Hilbert-space dimension d (2 to 5)")
    p.add_argument("--rank", type=int, default=None, help="Kraus rank (default: drawn per sample)")
    p.add_argument("--seed", type=int, required=True, help="base seed (required)")
    p.add_argument("--count", type=int, default=1, help="number of channels (default 1)")
    p.add_argument("--representation", choices=("kraus", "choi", "transfer"), default="kraus",
                   help="output representation (default kraus)")

    p = sub.add_parser("verify", help="run property suites over seeded samples")
    p.add_argument("--suite", action="append", required=True,
                   help=f"suite name or 'all'; repeatable. Known: {', '.join(SUITES)}")
    p.add_argument("--samples", type=int, default=100, help="samples per suite (default 100)")
    p.add_argument("--seed", type=int, required=True, help="base seed (required)")
    p.add_argument("--dim", type=int, default=None, help="fix the dimension (default: alternate 2 and 3)")

    p = sub.add_parser("convert", help="re-serialize a channel in another representation")
    _add_input(p)
    p.add_argument("--to", choices=("kraus", "choi", "transfer"), required=True, help="target representation")
    p.add_argument("--basis", choices=("matrix_units", "gellmann"), default="matrix_units",
                   help="operator basis for --to transfer (default matrix_units)")
    return parser


def _read_source(source: str, stdin) -> str:
    if source == "-":
        data = stdin.buffer.read() if hasattr(stdin, "buffer") else stdin.read()
        return data
    s = source.lstrip()
    if s.startswith("{") or s.startswith("["):
        return source
    try:
        return Path(source).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {source!r}: {exc.strerror}") from None


def _one_or_many(items, single):
    return items[0] if single else items


def run_command(cmd: Command, stdin=None, stdout=None) -> int:
    """Execute ``cmd``, print JSON to ``stdout`` and return the exit status."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    o = cmd.options
    status = EXIT_OK

    if cmd.verb == "sample":
        spec = SampleSpec(o["dim"], o.get("rank"), o["seed"], o.get("count", 1))
        out = [ser.channel_to_obj(random_channel(spec, i), o.get("representation", "kraus"))
               for i in range(spec.count)]
    elif cmd.verb == "verify":
        names = list(o["suite"])
        if "all" in names:
            names = list(SUITES)
        spec = SampleSpec(o.get("dim"), None, o["seed"], o.get("samples", 100))
        reports = [run_property_suite(n, spec) for n in names]
        out = [ser.suite_report_obj(r, spec.seed) for r in reports]
        out = _one_or_many(out, len(out) == 1)
        for r in reports:
            if r.violations:
                print(f"{r.suite}: {len(r.violations)} violation(s)", file=sys.stderr)
                status = EXIT_VIOLATION
    else:
        text = _read_source(cmd.source or "-", stdin)
        obj = ser.loads(text)
        single = not isinstance(obj, list)
        objs = [obj] if single else obj
        if not objs:
            raise UsageError("empty channel array")
        chans = [ser.channel_from_obj(x, require_cp=cmd.verb != "analyze",
                                      where="channel" if single else f"channel[{i}]")
                 for i, x in enumerate(objs)]
        out = _one_or_many([_VERB_FNS[cmd.verb](ch, o) for ch in chans], single)

    stdout.write(ser.dumps(out) + "\n")
    return status


def _analyze(ch, o):
    return ser.structure_report_obj(validate(ch))


def _classify(ch, o):
    from .qubit import classify

    return ser.classification_report_obj(classify(ch))


def _normal_form(ch, o):
    from .qubit import lorentz_normal_form

    return ser.lorentz_report_obj(lorentz_normal_form(ch))


def _markov(ch, o):
    t = o.get("time", 1.0)
    if not np.isfinite(t) or t < 0:
        raise UsageError("--time must be a finite non-negative number")
    return ser.markov_report_obj(markov_approx(ch), t, o.get("representation", "kraus"))


def _decompose(ch, o):
    from .errors import DegenerateClass, WrongRank
    from .qubit import (
        NonDiagonal,
        _require_qubit,
        lorentz_normal_form,
        markov_product_approx,
        nondiagonal_decompose,
        rank_two_generator_schedule,
        rank_two_normal_form,
    )

    _require_qubit(ch)
    out = {"format": ser.REPORT_FORMAT, "report": "decomposition"}
    if ch.kraus_rank <= 2:
        cls, _ = rank_two_normal_form(ch)
        try:
            sched = rank_two_generator_schedule(cls)
            schedule = {"label": sched.label, "duration": ser._num(sched.duration)}
        except DegenerateClass as exc:
            schedule = {"label": None, "duration": None, "note": str(exc)}
        out.update(
            kind="rank_two",
            rank_two_class=cls.kind,
            parameters=ser._jsonable(cls.params),
            unitaries=[ser.encode_matrix(u) for u in cls.unitaries],
            schedule=schedule,
        )
    else:
        nf = lorentz_normal_form(ch)
        if not (isinstance(nf.form, NonDiagonal) and nf.form.x < 1):
            raise WrongRank(f"decompose needs Kraus rank <= 2 or a NonDiagonal(x < 1) normal form; got {nf.tag}")
        f1, f2 = nondiagonal_decompose(nf.form.x)
        out.update(
            kind="nondiagonal_factors",
            normal_form=ser.normal_form_obj(nf),
            factors=[ser.channel_to_obj(f1), ser.channel_to_obj(f2)],
        )
    steps = o.get("markov_steps")
    if steps is not None:
        _, dist = markov_product_approx(ch, steps)
        out["markov_product"] = {"steps": int(steps), "distance": ser._num(dist)}
    return out


def _convert(ch, o):
    return ser.channel_to_obj(ch, o["to"], o.get("basis", "matrix_units"))


_VERB_FNS = {
    "analyze": _analyze,
    "classify": _classify,
    "normal-form": _normal_form,
    "markov-approx": _markov,
    "decompose": _decompose,
    "convert": _convert,
}


def main(argv=None, stdin=None, stdout=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        opts = {k: v for k, v in vars(args).items() if k not in ("verb", "input")}
        cmd = Command(args.verb, getattr(args, "input", None), opts)
        return run_command(cmd, stdin, stdout)
    except NumericalFailure as exc:
        print(f"chandiv: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except np.linalg.LinAlgError as exc:
        print(f"chandiv: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ChannelError, ValueError, KeyError) as exc:
        kind = "parse error" if isinstance(exc, ParseError) else "input error"
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"chandiv: {kind}: {msg}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

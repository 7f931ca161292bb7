"""Command-line front end emitting machine-readable trajectory, region,
bound, and simulation data.

Output goes to standard output (or ``--out PATH``) as CSV or JSON:

* CSV: RFC-4180-style, comma separated, always with a header row; floats
  are rendered with 17 significant digits so they round-trip exactly;
  minus infinity is the literal token ``-inf``; absent values are empty.
* JSON: one top-level object with ``schema_version``, ``command``,
  ``inputs``, and either ``rows`` or ``result``.  Infinities become the
  strings ``"inf"`` / ``"-inf"``.

Exit codes: 0 success, 2 usage or validation error, 3 domain-precondition
error (reported on stderr, never silently skipped).  Every invocation is
deterministic given its flags.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Any

from .bounds import (
    CrummySchedule,
    crummy_scan,
    min_sensors_exact,
    sandwich_check,
)
from .dynamics import (
    DomainError,
    ErrorPair,
    RegionTag,
    Side,
    classify,
    evolve,
    fuse,
    invert_or_step,
    total_error_log2,
)
from .mcsim import Hypothesis, McConfig, agreement_z, simulate

__all__ = ["main", "entry"]

_MIN_RESOLUTION = 2
_MAX_RESOLUTION = 4096

#: (region, kind) pairs with a defined meaning; anything else is rejected.
#: Each corresponds to one panel of the published ratio plots.
_RATIO_COMBOS = {
    ("Bm", "step1_sq"),
    ("B1", "step2_sq"),
    ("B2RU", "step2_sq"),
    ("U", "step1_sq"),
    ("U", "step1_lin"),
    ("fB2RU", "step1_lin"),
}


@dataclass
class OutputRecord:
    command: str
    inputs: dict[str, Any]
    columns: list[str] = field(default_factory=list)
    rows: list[dict[str, Any]] | None = None
    result: dict[str, Any] | None = None


# -- rendering ---------------------------------------------------------------


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def render_csv(record: OutputRecord) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if record.result is not None:
        writer.writerow(record.result.keys())
        writer.writerow([_csv_cell(v) for v in record.result.values()])
    else:
        writer.writerow(record.columns)
        for row in record.rows or []:
            writer.writerow([_csv_cell(row[c]) for c in record.columns])
    return buf.getvalue()


def render_json(record: OutputRecord) -> str:
    doc: dict[str, Any] = {
        "schema_version": 1,
        "command": record.command,
        "inputs": {k: _json_value(v) for k, v in record.inputs.items()},
    }
    if record.result is not None:
        doc["result"] = {k: _json_value(v) for k, v in record.result.items()}
    else:
        doc["rows"] = [{k: _json_value(v) for k, v in row.items()}
                       for row in record.rows or []]
    return json.dumps(doc, indent=2) + "\n"


def _emit(record: OutputRecord, fmt: str, out_path: str | None) -> None:
    text = render_csv(record) if fmt == "csv" else render_json(record)
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", newline="") as fh:
            fh.write(text)


# -- shared validation -------------------------------------------------------


def _checked_pair(alpha0: float, beta0: float) -> ErrorPair:
    if not 0.0 <= alpha0 <= 1.0:
        raise ValueError(f"alpha0 must lie in [0, 1], got {alpha0!r}")
    if not 0.0 <= beta0 <= 1.0:
        raise ValueError(f"beta0 must lie in [0, 1], got {beta0!r}")
    return ErrorPair.from_probabilities(alpha0, beta0)


def _leaves_from_args(args: argparse.Namespace) -> int:
    if args.leaves is not None:
        n = args.leaves
        if n < 2 or n & (n - 1):
            raise ValueError(f"--leaves must be a power of two >= 2, got {n}")
        return n
    h = args.height
    if h < 1:
        raise ValueError(f"--height must be positive, got {h}")
    return 1 << h


def _grid_values(resolution: int) -> list[float]:
    if not _MIN_RESOLUTION <= resolution <= _MAX_RESOLUTION:
        raise ValueError(
            f"resolution must lie in [{_MIN_RESOLUTION}, {_MAX_RESOLUTION}],"
            f" got {resolution}")
    denom = resolution + 1
    return [i / denom for i in range(resolution)]


def _tag_fields(tag: RegionTag) -> dict[str, Any]:
    return {
        "side": tag.side.value,
        "b_index": tag.b_index,
        "in_R": tag.in_r,
        "in_S": tag.in_s,
    }


# -- subcommand handlers -----------------------------------------------------


def _cmd_evolve(args: argparse.Namespace) -> OutputRecord:
    pair0 = _checked_pair(args.alpha0, args.beta0)
    if args.levels < 0:
        raise ValueError(f"--levels must be non-negative, got {args.levels}")
    traj = evolve(pair0, args.levels)
    rows = []
    for state, log2_l in zip(traj.states, traj.log2_l):
        rows.append({
            "k": state.level,
            "alpha": state.pair.alpha.probability,
            "beta": state.pair.beta.probability,
            "log2_alpha": state.pair.alpha.log2_p,
            "log2_beta": state.pair.beta.log2_p,
            "log2_L": log2_l,
            **_tag_fields(state.tag),
        })
    return OutputRecord(
        command="evolve",
        inputs={"alpha0": args.alpha0, "beta0": args.beta0,
                "levels": args.levels},
        columns=["k", "alpha", "beta", "log2_alpha", "log2_beta", "log2_L",
                 "side", "b_index", "in_R", "in_S"],
        rows=rows,
    )


def _cmd_regions(args: argparse.Namespace) -> OutputRecord:
    values = _grid_values(args.resolution)
    rows = []
    for a in values:
        for b in values:
            tag = classify(ErrorPair.from_probabilities(a, b))
            rows.append({"alpha": a, "beta": b, **_tag_fields(tag)})
    return OutputRecord(
        command="regions",
        inputs={"resolution": args.resolution},
        columns=["alpha", "beta", "side", "b_index", "in_R", "in_S"],
        rows=rows,
    )


def _in_ratio_region(pair: ErrorPair, region: str) -> bool:
    if region == "fB2RU":
        tag = classify(invert_or_step(pair))
        return (tag.side is Side.UPPER_TRIANGLE and tag.b_index == 2
                and tag.in_r)
    tag = classify(pair)
    if tag.side is not Side.UPPER_TRIANGLE:
        return False
    if region == "U":
        return True
    if region == "B1":
        return tag.b_index == 1
    if region == "Bm":
        return tag.b_index is not None and tag.b_index >= 2
    # B2RU
    return tag.b_index == 2 and tag.in_r


def _cmd_ratios(args: argparse.Namespace) -> OutputRecord:
    if (args.region, args.kind) not in _RATIO_COMBOS:
        raise ValueError(
            f"no ratio data is defined for region={args.region}"
            f" kind={args.kind}")
    values = _grid_values(args.resolution)
    rows = []
    for a in values:
        for b in values:
            pair = ErrorPair.from_probabilities(a, b)
            log2_l0 = total_error_log2(pair)
            if math.isinf(log2_l0):
                continue  # ratio undefined at the origin
            if not _in_ratio_region(pair, args.region):
                continue
            step1 = fuse(pair)
            log2_l1 = total_error_log2(step1)
            if args.kind == "step1_sq":
                ratio = 2.0 ** (log2_l1 - 2.0 * log2_l0)
            elif args.kind == "step1_lin":
                ratio = 2.0 ** (log2_l1 - log2_l0)
            else:  # step2_sq
                log2_l2 = total_error_log2(fuse(step1))
                ratio = 2.0 ** (log2_l2 - 2.0 * log2_l0)
            rows.append({"alpha": a, "beta": b, "ratio": ratio})
    return OutputRecord(
        command="ratios",
        inputs={"region": args.region, "kind": args.kind,
                "resolution": args.resolution},
        columns=["alpha", "beta", "ratio"],
        rows=rows,
    )


def _cmd_bounds(args: argparse.Namespace) -> OutputRecord:
    pair0 = _checked_pair(args.alpha0, args.beta0)
    leaves = _leaves_from_args(args)
    check = sandwich_check(pair0, leaves)
    bound = check.bound
    return OutputRecord(
        command="bounds",
        inputs={"alpha0": args.alpha0, "beta0": args.beta0, "leaves": leaves},
        result={
            "leaves": leaves,
            "height": leaves.bit_length() - 1,
            "log2_L0": bound.log2_l0,
            "exact_log2_PN_inv": check.exact,
            "theorem": bound.theorem.value,
            "lower": bound.lower,
            "lower_clamped": bound.lower_clamped,
            "upper": bound.upper,
            "band": bound.band,
            "ok": check.ok,
        },
    )


def _cmd_min_sensors(args: argparse.Namespace) -> OutputRecord:
    pair0 = _checked_pair(args.alpha0, args.beta0)
    if not 0.0 < args.epsilon < 1.0:
        raise ValueError(f"--epsilon must lie in (0, 1), got {args.epsilon!r}")
    leaves = min_sensors_exact(pair0, args.epsilon)
    height = leaves.bit_length() - 1
    log2_pn = evolve(pair0, height).log2_l[-1]
    return OutputRecord(
        command="min-sensors",
        inputs={"alpha0": args.alpha0, "beta0": args.beta0,
                "epsilon": args.epsilon},
        result={
            "min_leaves": leaves,
            "height": height,
            "log2_PN": log2_pn,
            "ratio_to_log2_eps_sq": leaves / math.log2(args.epsilon) ** 2,
        },
    )


def _cmd_montecarlo(args: argparse.Namespace) -> OutputRecord:
    pair0 = _checked_pair(args.alpha0, args.beta0)
    if args.leaves is not None or args.height is not None:
        leaves = _leaves_from_args(args)
        height = leaves.bit_length() - 1
    else:
        raise ValueError("one of --height or --leaves is required")
    config = McConfig(pair0=pair0, height=height, trials=args.trials,
                      seed=args.seed, hypothesis=Hypothesis(args.hypothesis))
    estimate = simulate(config)
    return OutputRecord(
        command="montecarlo",
        inputs={"alpha0": args.alpha0, "beta0": args.beta0, "height": height,
                "trials": args.trials, "seed": args.seed,
                "hypothesis": args.hypothesis},
        result={
            "error_rate": estimate.error_rate,
            "std_err": estimate.std_err,
            "predicted": estimate.predicted,
            "z": agreement_z(estimate),
            "trials": estimate.trials,
        },
    )


def _cmd_crummy(args: argparse.Namespace) -> OutputRecord:
    if args.height_min > args.height_max:
        raise ValueError("--height-min must not exceed --height-max")
    if args.height_min % 2 or args.height_max % 2:
        raise ValueError("heights must be even")
    heights = range(args.height_min, args.height_max + 1, 2)
    schedule = CrummySchedule(args.schedule)
    scan = crummy_scan(args.c, heights, split=args.split, schedule=schedule)
    rows = [{"leaves": r.leaves, "eta": r.eta, "log2_PN": r.log2_pn}
            for r in scan.rows]
    return OutputRecord(
        command="crummy",
        inputs={"c": args.c, "height_min": args.height_min,
                "height_max": args.height_max, "split": args.split,
                "schedule": args.schedule},
        columns=["leaves", "eta", "log2_PN"],
        rows=rows,
    )


# -- parser ------------------------------------------------------------------


def _add_output_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--format", choices=["csv", "json"], default="csv")
    sub.add_argument("--out", default=None,
                     help="write output to this file instead of stdout")


def _add_pair_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--alpha0", type=float, required=True,
                     help="Type I error probability of one sensor")
    sub.add_argument("--beta0", type=float, required=True,
                     help="Type II error probability of one sensor")


def _add_size_flags(sub: argparse.ArgumentParser) -> None:
    group = sub.add_mutually_exclusive_group(required=True)
    group.add_argument("--height", type=int, default=None,
                       help="tree height (log2 of the leaf count)")
    group.add_argument("--leaves", type=int, default=None,
                       help="leaf count (power of two)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relaytree",
        description="Error-probability analysis of balanced binary relay trees")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("evolve", help="iterate the fusion recursion")
    _add_pair_flags(p)
    p.add_argument("--levels", type=int, required=True)
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_evolve)

    p = subs.add_parser("regions", help="classify a grid of the unit square")
    p.add_argument("--resolution", type=int, required=True)
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_regions)

    p = subs.add_parser("ratios", help="per-step error ratios over a region")
    p.add_argument("--region", choices=["Bm", "B1", "B2RU", "U", "fB2RU"],
                   required=True)
    p.add_argument("--kind", choices=["step1_sq", "step2_sq", "step1_lin"],
                   required=True)
    p.add_argument("--resolution", type=int, required=True)
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_ratios)

    p = subs.add_parser("bounds", help="dispatched bound versus exact recursion")
    _add_pair_flags(p)
    _add_size_flags(p)
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_bounds)

    p = subs.add_parser("min-sensors",
                        help="smallest tree meeting a target root error")
    _add_pair_flags(p)
    p.add_argument("--epsilon", type=float, required=True)
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_min_sensors)

    p = subs.add_parser("montecarlo", help="literal tree simulation")
    _add_pair_flags(p)
    _add_size_flags(p)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--hypothesis", choices=["H0", "H1"], required=True)
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_montecarlo)

    p = subs.add_parser("crummy",
                        help="root error with size-dependent sensor quality")
    p.add_argument("--c", type=float, required=True,
                   help="margin coefficient")
    p.add_argument("--height-min", type=int, required=True)
    p.add_argument("--height-max", type=int, required=True)
    p.add_argument("--split", type=float, default=0.5,
                   help="fraction of the sensor error put on the Type I side")
    p.add_argument("--schedule",
                   choices=[s.value for s in CrummySchedule],
                   default=CrummySchedule.INV_SQRT.value)
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_crummy)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        record = args.handler(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _emit(record, args.format, args.out)
    return 0


def entry() -> None:
    raise SystemExit(main())

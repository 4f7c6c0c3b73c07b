#!/usr/bin/env python3
"""
dimcodes command line

Usage:
    python -m dimcodes bounds --s 0.5 --t 0.127571
    python -m dimcodes figure fig2 --grid 0.01 --out fig2.csv
    python -m dimcodes code build --n 8 --r 2 --verify
    python -m dimcodes gen --kind bernoulli --p 0 --n 100
    python -m dimcodes transform lower-worst --s 0.5 --t 0.3 --n 20000
    python -m dimcodes profile --s 0.5 --n 10000
    python -m dimcodes account --s 0.5 --n 5000 --bitstream ledger.txt

Exit codes: 0 ok, 1 verification failed, 2 usage error, 130 interrupted.
"""

import argparse
import logging
import sys
from typing import List, Optional

import numpy as np

from . import settings
from .codeword import CenterPolicy, CodewordSpec, codeword_source, membership_violations
from .covercode import (
    ball_cover, build_random_code, canonical_code, delsarte_piret_size, min_cover_size_exact,
    read_code, verify_covering_radius, verify_well_distributed, write_code,
)
from .entropy import (
    bound_envelope, critical_profile, entropy, entropy_inv, f_envelope, fig1_transition,
    worst_distance,
)
from .exceptions import DimcodesError, DomainError, VerificationError
from .hamming import ball_volume
from .items import (
    BallCoverRow, BoundsRow, ChangeDensityRow, ChangePositionRow, CodeReportRow, CommandResult,
    DistributionRow, Fig1Row, Fig2Row, Fig3Row, LedgerEntry, MinCoverRow, ProfileRow,
    SourceDescriptor,
)
from .ledger import decode_ledger, description_ledger
from .pipelines import artifact_metadata, export_document, export_records, write_atomic
from .streams import (
    BernoulliSource, chunk_checkpoints, distance_profile, export_packed, export_text,
    source_from_descriptor,
)
from .transforms import (
    ScheduleMode, certify_lowering, lower_bernoulli, lowering_schedule, raise_dimension,
    worst_case_lower,
)

logger = logging.getLogger("dimcodes")

FIGURES = ("fig1", "fig2", "fig3")


def configure_logging(level=None):
    logging.basicConfig(
        level=getattr(logging, (level or settings.LOG_LEVEL).upper(), logging.INFO),
        format=settings.LOG_FORMAT,
        datefmt=settings.LOG_DATEFMT,
        stream=sys.stderr,
    )


# Figure data

def _grid(lo: float, hi: float, step: float) -> List[float]:
    count = int(round((hi - lo) / step))
    points = [lo + i * step for i in range(count + 1)]
    points = [min(p, hi) for p in points]
    if points[-1] < hi:
        points.append(hi)
    return points


def figure_data(which: str, grid: float = 0.01):
    """
    Rows behind one of the three figures, transition rows flagged.

    Args:
        which: "fig1", "fig2" or "fig3"
        grid: Grid step in (0, 0.01]

    Returns:
        (row model, list of rows) sorted by the x column
    """
    if which not in FIGURES:
        raise DomainError(f"unknown figure {which!r}; expected one of {', '.join(FIGURES)}")
    if not 0 < grid <= 0.01:
        raise DomainError(f"grid step {grid} outside (0, 0.01]")

    if which == "fig1":
        rows = [Fig1Row(s=s, worst=worst_distance(s, 0.5), min_distance=entropy_inv(s - 0.5))
                for s in _grid(0.5, 1.0, grid)]
        s_tr, c_tr = fig1_transition(0.5)
        rows.append(Fig1Row(s=s_tr, worst=c_tr, min_distance=entropy_inv(s_tr - 0.5), transition=True))
        return Fig1Row, sorted(rows, key=lambda row: (row.s, row.transition))

    profile = critical_profile(0.5)
    if which == "fig2":
        rows = [Fig2Row(t=t, worst=worst_distance(0.5, t), min_distance=entropy_inv(0.5 - t))
                for t in _grid(0.0, 0.5, grid)]
        rows.append(Fig2Row(t=profile.t_star, worst=profile.c,
                            min_distance=entropy_inv(0.5 - profile.t_star), transition=True))
        return Fig2Row, sorted(rows, key=lambda row: (row.t, row.transition))

    def fig3_row(d, transition=False):
        return Fig3Row(d=d, f=f_envelope(0.5, d), lower=max(0.0, entropy(d) - 0.5),
                       upper=profile.ratio * d, transition=transition)

    rows = [fig3_row(d) for d in _grid(0.0, 0.5, grid)]
    rows.append(fig3_row(profile.c, transition=True))
    return Fig3Row, sorted(rows, key=lambda row: (row.d, row.transition))


# Command handlers; each returns (status, artifacts, summary)

def _metadata(args, seeds=()):
    params = {k: v for k, v in vars(args).items()
              if k not in ("handler", "out", "log_level") and v is not None}
    return artifact_metadata(args.command_path, params, seeds)


def _base(seed: int) -> BernoulliSource:
    return BernoulliSource(0.5, seed, role="base")


def _checkpoints(n: int) -> List[int]:
    points = chunk_checkpoints(n)
    if not points or points[-1] != n:
        points.append(n)
    return points


def cmd_bounds(args):
    lo, hi = bound_envelope(args.s, args.t)
    row = BoundsRow(s=args.s, t=args.t, min_distance=lo, max_distance=hi)
    path = export_records(args.out, args.format, BoundsRow, [row], _metadata(args))
    logger.info("distance envelope s=%g t=%g: min=%.6g max=%.6g", args.s, args.t, lo, hi)
    return 0, [path], {"min": lo, "max": hi}


def cmd_figure(args):
    model, rows = figure_data(args.which, args.grid)
    path = export_records(args.out, args.format, model, rows, _metadata(args))
    return 0, [path], {"rows": len(rows), "transitions": [row.model_dump() for row in rows if row.transition]}


def _report(code, args, distribution=True):
    covering = verify_covering_radius(code, cap=args.cap)
    report = verify_well_distributed(code, cap=args.cap) if distribution else None
    row = CodeReportRow(n=code.n, r=code.r, seed=code.seed, size=code.size,
                        target_size=code.target_size, covering=covering,
                        well_distributed=None if report is None else report.passed)
    return row, report


def cmd_code_build(args):
    code = canonical_code(args.n, args.r, cap=args.cap) if args.seed is None \
        else build_random_code(args.n, args.r, args.seed, cap=args.cap)
    artifacts = []
    if args.out:
        write_code(code, args.out)
        artifacts.append(args.out)
    summary = {"n": code.n, "r": code.r, "seed": code.seed, "size": code.size}
    status = 0
    if args.verify:
        row, _ = _report(code, args)
        summary.update(row.model_dump())
        status = 0 if row.covering and row.well_distributed else 1
    logger.info("code n=%d r=%d seed=%d S=%d", code.n, code.r, code.seed, code.size)
    return status, artifacts, summary


def cmd_code_verify(args):
    if args.file:
        code = read_code(args.file, verified=False)
    elif args.seed is None:
        code = canonical_code(args.n, args.r, cap=args.cap)
    else:
        code = build_random_code(args.n, args.r, args.seed, cap=args.cap)
    row, report = _report(code, args)
    rows = [DistributionRow(q=rec.q, max_count=rec.max_count, bound=rec.bound) for rec in report.records]
    path = export_records(args.out, args.format, DistributionRow, rows, _metadata(args, [code.seed]))
    if not (row.covering and row.well_distributed):
        raise VerificationError(f"code n={code.n} r={code.r} seed={code.seed} failed: "
                                f"covering={row.covering} well_distributed={row.well_distributed}")
    return 0, [path], row.model_dump()


def cmd_code_mincover(args):
    k = min_cover_size_exact(args.n, args.r, cap=args.cap)
    row = MinCoverRow(n=args.n, r=args.r, k_exact=k,
                      sphere_bound=(1 << args.n) / ball_volume(args.n, args.r).value,
                      delsarte_piret=delsarte_piret_size(args.n, args.r))
    path = export_records(args.out, args.format, MinCoverRow, [row], _metadata(args))
    status = 0 if row.sphere_bound <= k <= row.delsarte_piret else 1
    return status, [path], row.model_dump()


def cmd_code_ballcover(args):
    seed = args.seed or 0
    cover = ball_cover(args.n, args.q, args.r, seed, cap=args.cap)
    row = BallCoverRow(n=cover.n, q=cover.q, r=cover.r, seed=seed, size=cover.size,
                       target=cover.target, attempts=cover.attempts)
    path = export_records(args.out, args.format, BallCoverRow, [row], _metadata(args, [seed]))
    return 0, [path], row.model_dump()


def _source(args):
    seed = args.seed or 0
    if args.kind == "codeword":
        return codeword_source(CodewordSpec(args.s, _base(seed), block_length=args.block,
                                            policy=CenterPolicy(args.policy)))
    if args.kind == "descriptor":
        return source_from_descriptor(args.descriptor)
    return SourceDescriptor(kind=args.kind, p=args.p, r=args.r, seed=seed).build()


def cmd_gen(args):
    src = _source(args)
    data = export_packed(src, args.n) if args.packed else export_text(src, args.n) + "\n"
    write_atomic(args.out, data)
    return 0, [args.out or "-"], {"descriptor": src.descriptor(), "n": args.n}


def _export_changes(args, log, seeds):
    meta = _metadata(args, seeds)
    artifacts = [export_records(args.out, args.format, ChangeDensityRow,
                                [ChangeDensityRow(**row) for row in log.density_rows()], meta)]
    if args.positions:
        artifacts.append(export_records(args.positions, "csv", ChangePositionRow,
                                        [ChangePositionRow(**row) for row in log.position_rows()], meta))
    return artifacts


def cmd_raise(args):
    seed = args.seed or 0
    x = BernoulliSource(entropy_inv(args.s), seed, role="input")
    out = raise_dimension(x, args.s, args.t, seed)
    profile = distance_profile(out, x, _checkpoints(args.n))
    path = export_records(args.out, args.format, ProfileRow,
                          [ProfileRow(**row) for row in profile.rows()], _metadata(args, [seed]))
    return 0, [path], {"distance": profile.distances[-1], "expected": entropy_inv(args.t - args.s)}


def cmd_lower_bernoulli(args):
    seed = args.seed or 0
    x = BernoulliSource(entropy_inv(args.s), seed, role="input")
    out, log = lower_bernoulli(x, args.s, args.t, block=args.block, n=args.n, seed=seed)
    artifacts = _export_changes(args, log, [seed])
    status = 0 if log.max_block_changes() <= out.radius else 1
    return status, artifacts, {"distance": log.changes / args.n, "radius": out.radius,
                               "max_block_changes": log.max_block_changes()}


def cmd_lower_worst(args):
    seed = args.seed or 0
    x = codeword_source(CodewordSpec(args.s, _base(seed)))
    schedule = lowering_schedule(args.s, args.t, args.l1, mode=ScheduleMode(args.mode),
                                 growth=args.growth, horizon=args.n)
    out, log = worst_case_lower(x, args.s, args.t, schedule, block=args.block)
    artifacts = _export_changes(args, log, [seed])
    if args.schedule:
        artifacts.append(export_document(args.schedule, {"schedule": schedule.record()}, _metadata(args, [seed])))
    worst = max(log.densities, default=0.0)
    ends = [schedule.stage_end(j) for j in range(schedule.stages)]
    ledger = description_ledger(out, ends[-1])
    certificate = certify_lowering(args.s, args.t, ledger.ratio, worst)
    if not certificate.passed:
        logger.warning("lower-worst s=%g t=%g n=%d: %s", args.s, args.t, args.n, certificate.reason())
    return 0 if certificate.passed else 1, artifacts, {
        "stages": schedule.stages, "max_checkpoint_distance": worst,
        "ledger_ratio": ledger.ratio, "certified": certificate.certified,
        "lower_bound_passed": certificate.check.passed, "note": certificate.reason(),
    }


def cmd_profile(args):
    seed = args.seed or 0
    if args.a and args.b:
        a, b = source_from_descriptor(args.a), source_from_descriptor(args.b)
    else:
        b = _base(seed)
        a = codeword_source(CodewordSpec(args.s if args.s is not None else 0.5, b,
                                         block_length=args.block, policy=CenterPolicy(args.policy)))
    profile = distance_profile(a, b, _checkpoints(args.n))
    path = export_records(args.out, args.format, ProfileRow,
                          [ProfileRow(**row) for row in profile.rows()], _metadata(args, [seed]))
    return 0, [path], {"tail": profile.tail, "final": profile.distances[-1]}


def cmd_account(args):
    seed = args.seed or 0
    if args.kind == "bernoulli":
        src = BernoulliSource(args.p if args.p is not None else 0.5, seed)
    else:
        src = codeword_source(CodewordSpec(args.s if args.s is not None else 0.5, _base(seed),
                                           block_length=args.block, policy=CenterPolicy(args.policy)))
    ledger = description_ledger(src, args.n, emit=True)
    artifacts = [export_records(args.out, args.format, LedgerEntry,
                                [LedgerEntry(**row) for row in ledger.records()], _metadata(args, [seed]))]
    if args.bitstream:
        text = "".join("1" if bit else "0" for bit in ledger.bitstream.tolist())
        write_atomic(args.bitstream, text + "\n")
        artifacts.append(args.bitstream)
    decoded = decode_ledger(ledger.bitstream)
    round_trip = bool(np.array_equal(decoded, src.prefix(args.n)))
    if not round_trip:
        raise VerificationError("ledger bitstream does not decode to the source prefix")
    summary = {"total_bits": ledger.total_bits, "ratio": ledger.ratio, "round_trip": round_trip}
    if args.kind == "codeword":
        summary["membership_violations"] = len(membership_violations(src, args.n))
    return 0, artifacts, summary


# Parser

def _output_flags(parser, fmt=True):
    parser.add_argument("--out", help="output path (default: stdout)")
    if fmt:
        parser.add_argument("--format", choices=("csv", "json"), default="csv")


def _source_flags(parser):
    parser.add_argument("--seed", type=int)
    parser.add_argument("--block", type=int, default=None, help="codeword block length")
    parser.add_argument("--policy", choices=[p.value for p in CenterPolicy], default=CenterPolicy.NEAREST.value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dimcodes", description="Dimension-changing codes and their audits")
    parser.add_argument("--log-level", dest="log_level", default=None)
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("bounds", help="min/max distance between dimensions s and t")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    _output_flags(p)
    p.set_defaults(handler=cmd_bounds)

    p = commands.add_parser("figure", help="figure data as CSV/JSON")
    p.add_argument("which", choices=FIGURES)
    p.add_argument("--grid", type=float, default=0.01)
    _output_flags(p)
    p.set_defaults(handler=cmd_figure)

    code = commands.add_parser("code", help="covering codes").add_subparsers(dest="action", required=True)
    for name, handler in (("build", cmd_code_build), ("verify", cmd_code_verify),
                          ("mincover", cmd_code_mincover), ("ballcover", cmd_code_ballcover)):
        p = code.add_parser(name)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--r", type=int, required=True)
        p.add_argument("--seed", type=int)
        p.add_argument("--cap", type=int)
        if name == "build":
            p.add_argument("--verify", action="store_true")
            p.add_argument("--out", help="write the code file here")
        else:
            _output_flags(p)
        if name == "verify":
            p.add_argument("--file", help="verify a code file instead")
        if name == "ballcover":
            p.add_argument("--q", type=int, required=True)
        p.set_defaults(handler=handler)

    p = commands.add_parser("gen", help="emit a prefix of a source")
    p.add_argument("--kind", choices=("zeros", "ones", "bernoulli", "dyadic", "codeword", "descriptor"),
                   required=True)
    p.add_argument("--descriptor")
    p.add_argument("--p", type=float)
    p.add_argument("--r")
    p.add_argument("--s", type=float, default=0.5)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--packed", action="store_true", help="8-byte length header + packed bits")
    _source_flags(p)
    _output_flags(p, fmt=False)
    p.set_defaults(handler=cmd_gen)

    transform = commands.add_parser("transform", help="dimension-changing constructions")
    steps = transform.add_subparsers(dest="action", required=True)
    for name, handler in (("raise", cmd_raise), ("lower-bernoulli", cmd_lower_bernoulli),
                          ("lower-worst", cmd_lower_worst)):
        p = steps.add_parser(name)
        p.add_argument("--s", type=float, required=True)
        p.add_argument("--t", type=float, required=True)
        p.add_argument("--n", type=int, default=10 ** 5)
        p.add_argument("--seed", type=int)
        p.add_argument("--block", type=int, default=settings.CHUNK_CAP)
        p.add_argument("--positions", help="also write changed positions as CSV")
        if name == "lower-worst":
            p.add_argument("--l1", type=int, default=100)
            p.add_argument("--mode", choices=[m.value for m in ScheduleMode], default=ScheduleMode.RELAXED.value)
            p.add_argument("--growth", type=float, default=settings.RELAXED_GROWTH)
            p.add_argument("--schedule", help="write the schedule as JSON")
        _output_flags(p)
        p.set_defaults(handler=handler)

    p = commands.add_parser("profile", help="distance profile between two sources")
    p.add_argument("--s", type=float)
    p.add_argument("--a", help="descriptor of the first source")
    p.add_argument("--b", help="descriptor of the second source")
    p.add_argument("--n", type=int, required=True)
    _source_flags(p)
    _output_flags(p)
    p.set_defaults(handler=cmd_profile)

    p = commands.add_parser("account", help="certified description-length ledger")
    p.add_argument("--kind", choices=("codeword", "bernoulli"), default="codeword")
    p.add_argument("--s", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--bitstream", help="write the encoded bitstream as '0'/'1' text")
    _source_flags(p)
    _output_flags(p)
    p.set_defaults(handler=cmd_account)
    return parser


def run(argv: Optional[List[str]] = None) -> CommandResult:
    """Parse argv, dispatch, and map failures to exit codes."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return CommandResult(status=2 if exc.code else 0)
    args.command_path = " ".join(x for x in (args.command, getattr(args, "action", None)) if x)
    if args.log_level:
        logging.getLogger("dimcodes").setLevel(args.log_level.upper())

    try:
        status, artifacts, summary = args.handler(args)
    except VerificationError as exc:
        logger.error("%s", exc)
        return CommandResult(status=1, summary={"error": str(exc)})
    except DomainError as exc:
        logger.error("%s", exc)
        return CommandResult(status=2, summary={"error": str(exc)})
    except DimcodesError as exc:
        logger.error("%s", exc)
        return CommandResult(status=1, summary={"error": str(exc)})
    summary = dict(summary)
    summary.setdefault("seeds", [getattr(args, "seed", None) or 0])
    return CommandResult(status=status, artifacts=[a for a in artifacts if a], summary=summary)


def main(argv: Optional[List[str]] = None):
    configure_logging()
    try:
        result = run(argv)
    except KeyboardInterrupt:
        print("\n\n[INFO] Interrupted by user")
        sys.exit(130)
    if result.status == 0:
        logger.info("done: %s", result.summary)
    sys.exit(result.status)


if __name__ == "__main__":
    main()

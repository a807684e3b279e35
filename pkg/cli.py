"""Command-line entry point: rate regions, schedules, sweeps and fading averages.

    python cli.py region --protocol mabc --p-db 0 --g-ab-db -100 --g-ar-db 0 --g-br-db 0 --delta 0.5,0.5
    python cli.py compare --a hbc:inner --b tdbc:outer --p-db 10 --g-ab-db -7 --g-ar-db 0 --g-br-db 5
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import pandas as pd
from pydantic import ValidationError

from relaying import config
from relaying.channel_model import ChannelGains, Protocol, db_to_linear, gaussian_mi_table
from relaying.discrete_capacity import InputGrid, load_channel, mabc_capacity_region
from relaying.errors import InvalidArgumentError, RelayBoundsError
from relaying.fading_montecarlo import (
    RNG_NAME,
    FadingConfig,
    FadingModel,
    SweepParameter,
    SweepSpec,
    montecarlo_samples,
    summarize,
    sweep_sum_rate,
)
from relaying.lp_optimizer import optimize_schedule, optimized_region
from relaying.protocol_bounds import BoundKind, PhaseSchedule, fixed_delta_region
from relaying.rate_region import exists_point_outside
from utils.output_utils import (
    metadata,
    region_payload,
    region_to_csv,
    table_to_csv,
    table_to_json,
    to_json,
    write_atomic,
)

logger = logging.getLogger("relaying.cli")

LOG_FORMAT = "[%(levelname)s] %(name)s: %(message)s"
EXIT_OK, EXIT_USAGE, EXIT_COMPUTE = 0, 2, 3
DELTA_SUM_TOL = 1e-9
ALL_PROTOCOLS = "dt,mabc,tdbc,hbc"

Handler = Callable[[argparse.Namespace], str]


# ---------- argument types ----------

def protocol(text: str) -> Protocol:
    return Protocol(text.strip().lower())


def bound_kind(text: str) -> BoundKind:
    return BoundKind.parse(text)


def protocol_list(text: str) -> List[Protocol]:
    return [protocol(t) for t in text.split(",") if t.strip()]


def protocol_bound(text: str) -> Tuple[Protocol, BoundKind]:
    """`hbc:inner` style pair; the bound defaults to inner."""
    name, _, bound = text.partition(":")
    return protocol(name), bound_kind(bound or "inner")


def schedule(proto: Protocol, text: Optional[str]) -> PhaseSchedule:
    if text is None:
        return PhaseSchedule.uniform(proto)
    try:
        deltas = [float(t) for t in text.split(",")]
    except ValueError:
        raise InvalidArgumentError(f"cannot parse {text!r} as comma-separated durations", parameter="delta") from None
    if len(deltas) != proto.num_phases:
        raise InvalidArgumentError(
            f"{proto.value.upper()} needs {proto.num_phases} durations, got {len(deltas)}", parameter="delta"
        )
    total = sum(deltas)
    if any(d < 0 for d in deltas) or abs(total - 1.0) > DELTA_SUM_TOL:
        raise InvalidArgumentError(f"durations must be >= 0 and sum to 1, got {deltas}", parameter="delta")
    return PhaseSchedule(protocol=proto, durations=tuple(d / total for d in deltas))


def gains_from(args: argparse.Namespace) -> ChannelGains:
    for name in ("p_db", "g_ab_db", "g_ar_db", "g_br_db"):
        if getattr(args, name) is None:
            raise InvalidArgumentError(f"--{name.replace('_', '-')} is required", parameter=name)
    return ChannelGains.from_db(args.p_db, args.g_ab_db, args.g_ar_db, args.g_br_db)


def error_field(exc: ValidationError, default: str) -> str:
    """Dotted location of the first validation error."""
    return ".".join(str(x) for x in exc.errors()[0]["loc"]) or default


def resolved(args: argparse.Namespace) -> Dict[str, Any]:
    """Parsed flags as JSON-ready values, for the metadata block."""
    def plain(value: Any) -> Any:
        if isinstance(value, Enum):
            return value.value
        if isinstance(value, (list, tuple)):
            return [plain(v) for v in value]
        return value

    # destinations and verbosity do not change results
    skipped = ("command", "output", "samples_out", "log_level")
    params = {k: plain(v) for k, v in sorted(vars(args).items()) if k not in skipped}
    if "mu_grid_size" in params and params["mu_grid_size"] is None:
        params["mu_grid_size"] = config.MU_GRID_SIZE
    return params


def render_table(args: argparse.Namespace, df: pd.DataFrame) -> str:
    if args.format == "json":
        return table_to_json(df, metadata(args.command, resolved(args)))
    return table_to_csv(df)


# ---------- subcommands ----------

def _handle_region(args: argparse.Namespace) -> str:
    mi = gaussian_mi_table(gains_from(args), args.protocol)
    if args.optimized:
        if args.delta is not None:
            raise InvalidArgumentError("--delta fixes the schedule; drop it or --optimized", parameter="delta")
        region = optimized_region(args.protocol, args.bound, mi, args.mu_grid_size, refine=not args.no_refine)
    else:
        region = fixed_delta_region(args.protocol, args.bound, mi, schedule(args.protocol, args.delta))
    if args.format == "json":
        return to_json(region_payload(region), metadata(args.command, resolved(args)))
    return region_to_csv(region)


def _handle_optimize(args: argparse.Namespace) -> str:
    mi = gaussian_mi_table(gains_from(args), args.protocol)
    optimum = optimize_schedule(args.protocol, args.bound, mi, args.mu)
    deltas = list(optimum.schedule.durations) + [None] * (4 - args.protocol.num_phases)
    row = {
        "protocol": args.protocol.value,
        "bound": args.bound.value,
        "mu": args.mu,
        "value": optimum.value,
        "r_a": optimum.rates.r_a,
        "r_b": optimum.rates.r_b,
        "sum_rate": optimum.sum_rate,
        **{f"delta_{i + 1}": d for i, d in enumerate(deltas)},
    }
    return render_table(args, pd.DataFrame([row]))


def _handle_sweep(args: argparse.Namespace) -> str:
    fixed = {
        p: getattr(args, p.value)
        for p in SweepParameter
        if p is not args.parameter and getattr(args, p.value) is not None
    }
    try:
        spec = SweepSpec(parameter=args.parameter, start=args.start, stop=args.stop, step=args.step, fixed=fixed)
    except ValidationError as exc:
        raise InvalidArgumentError(exc.errors()[0]["msg"], parameter=error_field(exc, "sweep")) from None
    return render_table(args, sweep_sum_rate(spec, args.protocols, args.bound))


def _handle_compare(args: argparse.Namespace) -> str:
    gains = gains_from(args)
    regions = []
    for proto, bound in (args.a, args.b):
        regions.append(optimized_region(proto, bound, gaussian_mi_table(gains, proto), args.mu_grid_size))
    witness = exists_point_outside(regions[0], regions[1], args.tol)
    a_name, b_name = (f"{p.value}:{b.value}" for p, b in (args.a, args.b))
    logger.info("%s outside %s: %s", a_name, b_name, witness)
    row = {
        "a": a_name,
        "b": b_name,
        "contained": witness is None,
        "witness_r_a": None if witness is None else witness.r_a,
        "witness_r_b": None if witness is None else witness.r_b,
    }
    return render_table(args, pd.DataFrame([row]))


def _handle_discrete(args: argparse.Namespace) -> str:
    try:
        channel = load_channel(args.channel)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidArgumentError(f"cannot read {args.channel}: {exc}", parameter="channel") from None
    region = mabc_capacity_region(channel, schedule(Protocol.MABC, args.delta), InputGrid(args.resolution))
    if args.format == "json":
        return to_json(region_payload(region), metadata(args.command, resolved(args)))
    return region_to_csv(region)


def _handle_mc(args: argparse.Namespace) -> str:
    try:
        cfg = FadingConfig(
            alpha=args.alpha, d_ab=args.d_ab, d_ar=args.d_ar, d_br=args.d_br, model=args.model,
            power=db_to_linear(args.p_db), samples=args.samples, seed=args.seed,
        )
    except ValidationError as exc:
        raise InvalidArgumentError(exc.errors()[0]["msg"], parameter=error_field(exc, "mc")) from None

    samples = montecarlo_samples(cfg, args.protocols, args.bound, args.workers)
    if args.samples_out:
        write_atomic(args.samples_out, table_to_csv(samples))
    stats = pd.DataFrame([s.model_dump(mode="json") for s in summarize(samples, args.protocols)])
    if args.format == "json":
        meta = metadata(args.command, {**resolved(args), "rng": RNG_NAME})
        return table_to_json(stats, meta)
    return table_to_csv(stats)


SUBCOMMANDS: Dict[str, Handler] = {
    "region": _handle_region,
    "optimize": _handle_optimize,
    "sweep": _handle_sweep,
    "compare": _handle_compare,
    "discrete": _handle_discrete,
    "mc": _handle_mc,
}


# ---------- parser ----------

def _add_gains(p: argparse.ArgumentParser) -> None:
    p.add_argument("--p-db", type=float, help="Transmit power P in dB (unit noise).")
    p.add_argument("--g-ab-db", type=float, help="A-B channel gain in dB.")
    p.add_argument("--g-ar-db", type=float, help="A-R channel gain in dB.")
    p.add_argument("--g-br-db", type=float, help="B-R channel gain in dB.")


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output", help="Write here (atomically) instead of stdout.")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relaying",
        description="Rate regions of half-duplex bi-directional relaying protocols.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--log-level", default=config.LOG_LEVEL,
                        choices=("DEBUG", "INFO", "WARNING", "ERROR", "debug", "info", "warning", "error"))
    sub = parser.add_subparsers(dest="command", required=True)

    region = sub.add_parser("region", help="Fixed-schedule or optimized rate region vertices.")
    region.add_argument("--protocol", type=protocol, required=True)
    region.add_argument("--bound", type=bound_kind, default=BoundKind.INNER)
    region.add_argument("--delta", help="Comma-separated phase durations (default: uniform).")
    region.add_argument("--optimized", action="store_true", help="Union over all schedules.")
    region.add_argument("--mu-grid-size", type=int)
    region.add_argument("--no-refine", action="store_true")
    _add_gains(region)
    _add_output(region)

    optimize = sub.add_parser("optimize", help="Best schedule for mu*R_a + (1-mu)*R_b.")
    optimize.add_argument("--protocol", type=protocol, required=True)
    optimize.add_argument("--bound", type=bound_kind, default=BoundKind.INNER)
    optimize.add_argument("--mu", type=float, default=0.5)
    _add_gains(optimize)
    _add_output(optimize)

    sweep = sub.add_parser("sweep", help="Optimized sum rate over a dB sweep.")
    sweep.add_argument("--parameter", type=SweepParameter, required=True,
                       help="One of " + ", ".join(p.value for p in SweepParameter))
    sweep.add_argument("--start", type=float, required=True)
    sweep.add_argument("--stop", type=float, required=True)
    sweep.add_argument("--step", type=float, required=True)
    sweep.add_argument("--protocols", type=protocol_list, default=protocol_list(ALL_PROTOCOLS))
    sweep.add_argument("--bound", type=bound_kind, default=BoundKind.INNER)
    _add_gains(sweep)
    _add_output(sweep)

    compare = sub.add_parser("compare", help="Is region A inside region B? Reports a witness if not.")
    compare.add_argument("--a", type=protocol_bound, required=True, help="protocol:bound, e.g. hbc:inner")
    compare.add_argument("--b", type=protocol_bound, required=True, help="protocol:bound, e.g. tdbc:outer")
    compare.add_argument("--mu-grid-size", type=int)
    compare.add_argument("--tol", type=float, default=1e-9)
    _add_gains(compare)
    _add_output(compare)

    discrete = sub.add_parser("discrete", help="MABC capacity region of a discrete channel file.")
    discrete.add_argument("--channel", required=True, help="Channel JSON file.")
    discrete.add_argument("--delta", help="Two phase durations (default: 0.5,0.5).")
    discrete.add_argument("--resolution", type=int, default=8, help="Input grid resolution K.")
    _add_output(discrete)

    mc = sub.add_parser("mc", help="Expected optimized sum rates under fading.")
    mc.add_argument("--p-db", type=float, default=10.0)
    mc.add_argument("--alpha", type=float, default=3.0, help="Path-loss exponent.")
    mc.add_argument("--d-ab", type=float, default=1.0)
    mc.add_argument("--d-ar", type=float, default=0.5)
    mc.add_argument("--d-br", type=float, default=0.5)
    mc.add_argument("--model", type=FadingModel, default=FadingModel.RAYLEIGH)
    mc.add_argument("--samples", type=int, default=1000)
    mc.add_argument("--seed", type=int, default=0)
    mc.add_argument("--protocols", type=protocol_list, default=protocol_list(ALL_PROTOCOLS))
    mc.add_argument("--bound", type=bound_kind, default=BoundKind.INNER)
    mc.add_argument("--workers", type=int, default=config.WORKERS)
    mc.add_argument("--samples-out", help="Also write the per-sample table (CSV) here.")
    _add_output(mc)
    return parser


def _emit(text: str, output: Optional[str]) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if output:
        write_atomic(output, text)
    else:
        sys.stdout.write(text)


def _report(exc: Exception, parameter: Optional[str]) -> None:
    sys.stderr.write(f"error [{parameter or 'input'}]: {exc}\n")


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    logging.basicConfig(level=args.log_level.upper(), format=LOG_FORMAT, stream=sys.stderr, force=True)
    logger.info("running %s", args.command)
    try:
        _emit(SUBCOMMANDS[args.command](args), args.output)
    except InvalidArgumentError as exc:
        _report(exc, exc.parameter)
        return EXIT_USAGE
    except ValidationError as exc:
        _report(exc, error_field(exc, exc.title))
        return EXIT_USAGE
    except RelayBoundsError as exc:
        _report(exc, exc.parameter)
        return EXIT_COMPUTE
    return EXIT_OK


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    raise SystemExit(main())

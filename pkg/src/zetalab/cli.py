"""Command-line front end: subcommand dispatch and deterministic output.

Every run prints one provenance line first (tool version, precision, cutoffs,
seed), then the payload.  All numeric fields are fixed-point decimal strings
and rationals are "num/den" strings, so identical arguments give
byte-identical outputs whatever --jobs is.  Exit codes: 0 success, 1
computational error (with a JSON error object), 2 flag errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, TextIO

import mpmath
from mpmath import mp, mpf

from . import __version__, coeffs, moments, products, verify as verify_mod
from .errors import DomainError, ZetalabError
from .zeta import PrecisionContext, zeta_em, zeta_rs

DEFAULT_PRECISION_BITS = 192
DEFAULT_PRIME_CUTOFF = 10**5
DEFAULT_SIEVE_LIMIT = 10**6
DEFAULT_SEED = 1


@dataclass(frozen=True)
class RunConfig:
    """Shared run parameters; everything the provenance line reports."""

    precision_bits: int = DEFAULT_PRECISION_BITS
    prime_cutoff: int = DEFAULT_PRIME_CUTOFF
    sieve_limit: int = DEFAULT_SIEVE_LIMIT
    jobs: int = 1
    output_format: str = "json"
    seed: int = DEFAULT_SEED

    def __post_init__(self) -> None:
        if self.precision_bits < 64:
            raise DomainError("precision_bits must be >= 64")
        if self.prime_cutoff < 2 or self.sieve_limit < 1:
            raise DomainError("cutoffs must be positive")
        if self.jobs < 1:
            raise DomainError("jobs must be >= 1")
        if self.output_format not in ("csv", "json"):
            raise DomainError(f"unknown output format {self.output_format}")

    @property
    def context(self) -> PrecisionContext:
        return PrecisionContext(bits=self.precision_bits)


def decimal_str(x, bits: Optional[int] = None) -> str:
    """Fixed-point decimal string (no exponent notation) for an mpf value."""
    x = mpf(x)
    digits = max(12, int((bits or mp.prec) * 0.30103) - 2)
    return mpmath.libmp.to_str(
        x._mpf_, digits, min_fixed=-(10**9), max_fixed=10**9, strip_zeros=True
    )


def rational_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def _provenance(config: RunConfig, stream: TextIO) -> None:
    # jobs deliberately absent: outputs must be byte-identical for any --jobs
    obj = {
        "schema": "provenance",
        "tool": "zetalab",
        "version": __version__,
        "precision_bits": str(config.precision_bits),
        "prime_cutoff": str(config.prime_cutoff),
        "sieve_limit": str(config.sieve_limit),
        "seed": str(config.seed),
    }
    if config.output_format == "csv":
        fields = " ".join(
            f"{k}={v}" for k, v in obj.items() if k not in ("schema", "tool")
        )
        stream.write(f"# zetalab {fields}\n")
    else:
        stream.write(json.dumps(obj) + "\n")


def _emit_json(obj: dict, stream: TextIO) -> None:
    stream.write(json.dumps(obj) + "\n")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_coeffs(args, config: RunConfig, stream: TextIO) -> int:
    order = coeffs.FractionalOrder(Fraction(args.k))
    limit = args.limit
    table = coeffs.sieve_coeffs(order, limit)
    _provenance(config, stream)
    if config.output_format == "csv":
        coeffs.write_csv(table, stream)
    else:
        values = [
            [str(n), str(v.numerator), str(v.denominator)] for n, v in table.items()
        ]
        _emit_json(
            {
                "schema": "coefficient_table",
                "order": rational_str(order.k),
                "limit": str(limit),
                "values": values,
            },
            stream,
        )
    return 0


def _cmd_constants(args, config: RunConfig, stream: TextIO) -> int:
    ctx = config.context
    spec = products.EulerProductSpec(prime_cutoff=config.prime_cutoff, precision=ctx)
    name = args.name
    if name == "C0":
        pv = products.C0(spec)
    elif name == "ck":
        order = coeffs.FractionalOrder(Fraction(args.k))
        pv = products.conrey_ghosh_ck(order, spec)
        name = f"c_{args.k}"
    elif name == "hk":
        pv = products.hk_ratio(mpf(args.s), spec)
        name = f"hk({args.s})"
    elif name == "g":
        pv = products.g_series(mpf(args.s), config.sieve_limit, ctx=ctx)
        name = f"g({args.s})"
    else:  # pragma: no cover - argparse restricts choices
        raise DomainError(f"unknown constant {name}")
    _provenance(config, stream)
    _emit_json(
        {
            "schema": "product_value",
            "name": name,
            "value": decimal_str(pv.value, config.precision_bits),
            "prime_cutoff": str(pv.prime_cutoff),
            "tail_bound": decimal_str(pv.tail_bound, 64),
            "precision_bits": str(pv.precision_bits),
        },
        stream,
    )
    return 0


def _cmd_zeta_eval(args, config: RunConfig, stream: TextIO) -> int:
    ctx = config.context
    sigma = mpf(args.sigma)
    t = mpf(args.t)
    method = args.method
    if method == "auto":
        method = "rs" if sigma == mpf(1) / 2 and t >= 10 else "em"
    if method == "rs":
        if sigma != mpf(1) / 2:
            raise DomainError("Riemann-Siegel runs on the critical line only")
        sample = zeta_rs(t, terms=4, ctx=ctx)
    else:
        sample = zeta_em(mpmath.mpc(sigma, t), ctx)
    _provenance(config, stream)
    _emit_json(
        {
            "schema": "zeta_sample",
            "s": {
                "sigma": decimal_str(sigma, config.precision_bits),
                "t": decimal_str(t, config.precision_bits),
            },
            "re": decimal_str(sample.value.real, config.precision_bits),
            "im": decimal_str(sample.value.imag, config.precision_bits),
            "abs": decimal_str(abs(sample.value), config.precision_bits),
            "method": sample.method.value,
            "error_bound": decimal_str(sample.abs_error_bound, 64),
        },
        stream,
    )
    return 0


_MOMENT_CSV_HEADER = (
    "parameter,value,quadrature_error,model_paper,model_cg,ratio_paper,ratio_cg\n"
)


def _moment_models(est: moments.MomentEstimate) -> tuple:
    preds = est.model_predictions
    if "paper" in preds:
        paper = preds["paper"]
        cg = preds.get("cg", paper)
    elif "classical" in preds:
        paper = cg = preds["classical"]
    elif "series" in preds:
        paper = cg = preds["series"]
    else:  # pragma: no cover
        raise DomainError(f"estimate carries no model: {sorted(preds)}")
    return paper, cg


def _emit_moment_rows(
    estimates: Sequence[moments.MomentEstimate],
    config: RunConfig,
    stream: TextIO,
) -> None:
    bits = config.precision_bits
    if config.output_format == "csv":
        stream.write(_MOMENT_CSV_HEADER)
        for est in estimates:
            paper, cg = _moment_models(est)
            with mp.workprec(64):
                rp = est.value / paper
                rc = est.value / cg
            row = [
                decimal_str(est.parameter, 64),
                decimal_str(est.value, bits),
                decimal_str(est.quadrature_error, 64),
                decimal_str(paper, bits),
                decimal_str(cg, bits),
                decimal_str(rp, 64),
                decimal_str(rc, 64),
            ]
            stream.write(",".join(row) + "\n")
    else:
        for est in estimates:
            paper, cg = _moment_models(est)
            with mp.workprec(64):
                rp = est.value / paper
                rc = est.value / cg
            _emit_json(
                {
                    "schema": "moment_estimate",
                    "kind": est.kind.value,
                    "parameter": decimal_str(est.parameter, 64),
                    "value": decimal_str(est.value, bits),
                    "quadrature_error": decimal_str(est.quadrature_error, 64),
                    "model_paper": decimal_str(paper, bits),
                    "model_cg": decimal_str(cg, bits),
                    "ratio_paper": decimal_str(rp, 64),
                    "ratio_cg": decimal_str(rc, 64),
                    "notes": est.notes,
                },
                stream,
            )


def _cmd_moment(args, config: RunConfig, stream: TextIO) -> int:
    ctx = config.context
    kind = args.kind
    estimates = []
    if kind == "first":
        ts = [mpf(part) for part in str(args.t_max).split(",")]
        if len(ts) > 1:
            report = moments.discrimination_experiment(
                ts, ctx, jobs=config.jobs, prime_cutoff=config.prime_cutoff
            )
            estimates = list(report.estimates)
        else:
            estimates = [
                moments.first_moment_sharp(
                    ts[0], ctx, jobs=config.jobs, prime_cutoff=config.prime_cutoff
                )
            ]
    elif kind == "second":
        estimates = [moments.second_moment_sharp(mpf(args.t_max), ctx, jobs=config.jobs)]
    elif kind == "laplace":
        estimates = [
            moments.first_moment_laplace(
                mpf(args.delta), ctx, jobs=config.jobs, prime_cutoff=config.prime_cutoff
            )
        ]
    elif kind == "offline":
        estimates = [
            moments.fractional_moment_offline(
                mpf(args.sigma),
                mpf(args.t_max),
                ctx,
                jobs=config.jobs,
                series_limit=config.sieve_limit,
            )
        ]
    elif kind == "lemma4":
        estimates = [
            moments.lemma4_sum(mpf(args.delta), ctx, prime_cutoff=config.prime_cutoff)
        ]
    else:  # pragma: no cover - argparse restricts choices
        raise DomainError(f"unknown moment kind {kind}")
    _provenance(config, stream)
    _emit_moment_rows(estimates, config, stream)
    return 0


def _cmd_verify(args, config: RunConfig, stream: TextIO) -> int:
    _provenance(config, stream)
    results = verify_mod.run_suite(level=args.level, config=config, stream=stream)
    return 0 if all(r.passed for r in results) else 1


# ---------------------------------------------------------------------------
# parser / dispatch
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zetalab",
        description="Desk-scale numerics for the first moment of zeta on the critical line.",
    )

    def add_common(sub):
        sub.add_argument("--precision-bits", type=int, default=DEFAULT_PRECISION_BITS)
        sub.add_argument("--prime-cutoff", type=int, default=DEFAULT_PRIME_CUTOFF)
        sub.add_argument("--sieve-limit", type=int, default=DEFAULT_SIEVE_LIMIT)
        sub.add_argument("--jobs", type=int, default=1)
        sub.add_argument("--seed", type=int, default=DEFAULT_SEED)
        sub.add_argument("--output", choices=("csv", "json"), default="json")

    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("coeffs", help="exact d_k(n) table")
    p.add_argument("--k", default="1/2", help="order as a rational, e.g. 1/2")
    p.add_argument("--limit", type=int, required=True)
    add_common(p)

    p = subs.add_parser("constants", help="Euler-product constants with tail bounds")
    p.add_argument("--name", choices=("C0", "ck", "hk", "g"), required=True)
    p.add_argument("--k", default="1/2")
    p.add_argument("--s", default="1")
    add_common(p)

    p = subs.add_parser("zeta-eval", help="one zeta sample")
    p.add_argument("--sigma", required=True)
    p.add_argument("--t", required=True)
    p.add_argument("--method", choices=("em", "rs", "auto"), default="auto")
    add_common(p)

    p = subs.add_parser("moment", help="moment integrals and smoothed sums")
    p.add_argument(
        "--kind", choices=("first", "second", "laplace", "offline", "lemma4"),
        required=True,
    )
    p.add_argument("--t-max", default="100", help="T (comma list batches kind=first)")
    p.add_argument("--delta", default="0.01")
    p.add_argument("--sigma", default="0.75")
    add_common(p)

    p = subs.add_parser("lemma4", help="shortcut for moment --kind lemma4")
    p.add_argument("--delta", default="0.01")
    add_common(p)

    p = subs.add_parser("verify", help="run the acceptance suite")
    p.add_argument("--level", choices=("quick", "full"), default="quick")
    add_common(p)

    return parser


def _config_from(args) -> RunConfig:
    return RunConfig(
        precision_bits=args.precision_bits,
        prime_cutoff=args.prime_cutoff,
        sieve_limit=args.sieve_limit,
        jobs=args.jobs,
        output_format=args.output,
        seed=args.seed,
    )


def run(argv: Optional[Sequence[str]] = None, stream: Optional[TextIO] = None) -> int:
    """Parse argv and dispatch; returns the exit code (no sys.exit)."""
    stream = stream or sys.stdout
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config_from(args)
        if args.command == "coeffs":
            return _cmd_coeffs(args, config, stream)
        if args.command == "constants":
            return _cmd_constants(args, config, stream)
        if args.command == "zeta-eval":
            return _cmd_zeta_eval(args, config, stream)
        if args.command == "moment":
            return _cmd_moment(args, config, stream)
        if args.command == "lemma4":
            args.kind = "lemma4"
            return _cmd_moment(args, config, stream)
        if args.command == "verify":
            return _cmd_verify(args, config, stream)
        parser.error(f"unknown command {args.command}")  # pragma: no cover
    except ZetalabError as exc:
        _emit_json(
            {
                "schema": "error",
                "type": type(exc).__name__,
                "message": str(exc),
            },
            stream,
        )
        return 1
    return 2  # pragma: no cover


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

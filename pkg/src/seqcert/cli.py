"""Command-line front end.

    seqcert verify theorem1|threshold|pairwise --l A..B
    seqcert table41 --max-a N
    seqcert scan property41 --max-a N
    seqcert figure --id 4.1 .. 4.6
    seqcert asymptotics --suite lemma4.1|lemma4.2|claimD1|remarkD1 [--a LIST]

Exit status: 0 all certifications pass, 1 a check failed, 2 a sign could not
be certified, 64 bad usage.  Output never contains timings or anything else
that varies between runs.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Any

from . import __version__
from .kernel import EXACT, DomainError, NumericMode
from .report import Status, VerificationReport

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_INDETERMINATE, EXIT_USAGE = 0, 1, 2, 64
PRECISION_ENV = "SEQCERT_PRECISION_BITS"

# beyond these the run needs --slow
SLOW_L = 2500
SLOW_A = 2000

SUITE_DEFAULT_A = {
    "lemma4.1": [50, 100, 200, 400],
    "lemma4.2": [50, 100, 200, 400],
    "claimD1": [500, 1000, 2000],
    "remarkD1": [10, 100, 1000],
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits 2 by default
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    target: str | None = None
    l_range: tuple[int, int] | None = None
    max_a: int | None = None
    a_values: list[int] | None = None
    figure_id: str | None = None
    mode: NumericMode | None = None
    output_format: str = "csv"
    output_path: str | None = None
    precision_bits: int = 53
    workers: int = 1
    slow: bool = False

    def as_dict(self) -> dict[str, Any]:
        out = {
            "command": self.command,
            "target": self.target,
            "l_range": list(self.l_range) if self.l_range else None,
            "max_a": self.max_a,
            "a_values": self.a_values,
            "figure_id": self.figure_id,
            "mode": str(self.mode) if self.mode else None,
            "precision_bits": self.precision_bits,
            "slow": self.slow,
        }
        # workers and the output path deliberately omitted: output must not depend on them
        return {k: v for k, v in out.items() if v is not None}


@dataclass
class Outcome:
    columns: list[str]
    rows: list[list[Any]]
    status: Status = Status.PASS
    witnesses: list[dict[str, Any]] = field(default_factory=list)
    mode: str = "exact"


# ---------------------------------------------------------------------------
# argument parsing


def parse_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    try:
        a, b = (int(lo), int(hi)) if sep else (int(lo), int(lo))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A..B, got {text!r}") from None
    if a > b:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return a, b


def parse_int_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--mode", help="exact, log or logNNN (default depends on the command)")
    common.add_argument("--bits", type=int, help=f"bits for --mode log (default ${PRECISION_ENV} or 53)")
    common.add_argument("--format", choices=("csv", "json"), default="csv", dest="output_format")
    common.add_argument("--output", dest="output_path", help="write here instead of stdout")
    common.add_argument("--workers", type=positive_int, default=1)
    common.add_argument("--slow", action="store_true", help=f"allow l > {SLOW_L} and a > {SLOW_A}")

    parser = _Parser(prog="seqcert", description="Certify convexity, threshold and pairwise claims.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="run a verification suite over a range of l")
    p.add_argument("target", choices=("theorem1", "threshold", "pairwise"))
    p.add_argument("--l", dest="l_range", type=parse_range, required=True, metavar="A..B")

    p = sub.add_parser("table41", parents=[common], help="gap table at l = 4(a+1)^2 - 1")
    p.add_argument("--max-a", type=positive_int, default=10)

    p = sub.add_parser("scan", parents=[common], help="grid scan of the gap monotonicities")
    p.add_argument("target", choices=("property41",))
    p.add_argument("--max-a", type=positive_int, default=12)

    p = sub.add_parser("figure", parents=[common], help="data behind a figure")
    p.add_argument("--id", dest="figure_id", required=True, choices=("4.1", "4.2", "4.3", "4.4", "4.5", "4.6"))

    p = sub.add_parser("asymptotics", parents=[common], help="limit checks for the most stringent case")
    p.add_argument("--suite", dest="target", required=True, choices=tuple(SUITE_DEFAULT_A))
    p.add_argument("--a", dest="a_values", type=parse_int_list, metavar="LIST")
    return parser


def _default_bits(env: dict[str, str]) -> int:
    raw = env.get(PRECISION_ENV)
    if raw is None:
        return 53
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{PRECISION_ENV} must be an integer, got {raw!r}") from None


def config_from_args(ns: argparse.Namespace, env: dict[str, str] | None = None) -> RunConfig:
    env = os.environ if env is None else env
    bits = ns.bits if ns.bits is not None else _default_bits(env)
    if bits < 53:
        raise UsageError(f"precision bits must be >= 53, got {bits}")
    mode = None
    if ns.mode is not None:
        text = ns.mode.strip().lower()
        try:
            mode = NumericMode(bits) if text == "log" else NumericMode.parse(text)
        except (ValueError, DomainError) as exc:
            raise UsageError(str(exc)) from None
    cfg = RunConfig(
        command=ns.command,
        target=getattr(ns, "target", None),
        l_range=getattr(ns, "l_range", None),
        max_a=getattr(ns, "max_a", None),
        a_values=getattr(ns, "a_values", None),
        figure_id=getattr(ns, "figure_id", None),
        mode=mode,
        output_format=ns.output_format,
        output_path=ns.output_path,
        precision_bits=bits,
        workers=ns.workers,
        slow=ns.slow,
    )
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.l_range is not None:
        lo, hi = cfg.l_range
        if lo < 6:
            raise UsageError("l must be >= 6")
        if hi > SLOW_L and not cfg.slow:
            raise UsageError(f"l > {SLOW_L} needs --slow")
    if cfg.command == "asymptotics":
        if cfg.a_values is None:
            cfg.a_values = list(SUITE_DEFAULT_A[cfg.target])
            if cfg.target == "remarkD1" and cfg.slow:
                cfg.a_values.append(5000)
        if max(cfg.a_values) > SLOW_A and not cfg.slow:
            raise UsageError(f"a > {SLOW_A} needs --slow")
        if cfg.a_values != sorted(set(cfg.a_values)):
            raise UsageError("--a must be strictly increasing")
        floor = 10 if cfg.target in ("lemma4.1", "lemma4.2") else 2
        if min(cfg.a_values) < floor:
            raise UsageError(f"--a values must be >= {floor} for {cfg.target}")
    if cfg.command == "table41" and cfg.mode is not None and not cfg.mode.is_exact:
        raise UsageError("table41 is exact only")


# ---------------------------------------------------------------------------
# commands


def _report_outcome(rep: VerificationReport) -> Outcome:
    rows = [
        [c.name, c.status.value, c.count, len(c.failures), len(c.undecided)] for c in rep.checks.values()
    ]
    modes = ",".join(sorted(rep.modes_used)) or rep.mode
    witnesses = [{**w, "mode": modes} for w in rep.witnesses()]
    return Outcome(["check", "status", "cases", "failures", "indeterminate"], rows, rep.status, witnesses, modes)


def _run_verify(cfg: RunConfig) -> Outcome:
    lo, hi = cfg.l_range
    if cfg.target == "theorem1":
        from .finite_difference import verify_theorem_1_1_range

        rep = verify_theorem_1_1_range(lo, hi, cfg.mode, cfg.workers)
    elif cfg.target == "threshold":
        from .threshold import verify_threshold

        rep = verify_threshold(lo, hi, cfg.mode or EXACT, cfg.workers)
    else:
        from .pairwise import verify_pairwise_range

        rep = verify_pairwise_range(lo, hi, cfg.mode or EXACT, cfg.workers)
    return _report_outcome(rep)


def _run_table(cfg: RunConfig) -> Outcome:
    from .pairwise import table_4_1, table_l

    table = table_4_1(cfg.max_a)
    sensitive = set(table.convention_sensitive())
    rows, witnesses = [], []
    for a, values in table.rows():
        for j, v in enumerate(values, start=1):
            rows.append([a, j, table_l(a), str(table.rounded(a, j)), str(table.truncated(a, j)), (a, j) in sensitive])
            if v <= 0:
                witnesses.append({"check": "gap_positive", "outcome": "fail", "a": a, "j": j, "l": table_l(a), "mode": "exact"})
    status = Status.FAIL if witnesses else Status.PASS
    return Outcome(["a", "j", "l", "gap", "gap_truncated", "convention_sensitive"], rows, status, witnesses)


def _run_scan(cfg: RunConfig) -> Outcome:
    from .pairwise import property_4_1_scan

    return _report_outcome(property_4_1_scan(cfg.max_a, cfg.mode or EXACT, cfg.workers))


def _run_figure(cfg: RunConfig) -> Outcome:
    from .pairwise import figure_data

    fig = figure_data(cfg.figure_id)
    return Outcome(list(fig.columns), [list(r) for r in fig.rows])


def _series_rows(name: str, series, witnesses: list, mode: str) -> list[list[Any]]:
    rows = []
    for r in series:
        rows.append([name, r.a, r.scaled_residual, str(r.target), r.band, r.converged])
    if series and not series[-1].converged:
        witnesses.append({"check": name, "outcome": "fail", "a": series[-1].a, "mode": mode})
    return rows


def _run_asymptotics(cfg: RunConfig) -> Outcome:
    from . import asymptotics as asy

    a_values = cfg.a_values
    witnesses: list[dict[str, Any]] = []
    columns = ["quantity", "a", "value", "target", "band", "converged"]
    if cfg.target == "remarkD1":
        rep = asy.remark_d1_check(a_values)
        rows = []
        for a in a_values:
            value = rep.observations["values"][a]
            published = asy.REMARK_D1.get(a)
            ok = None if published is None else abs(value - published) <= asy.REMARK_D1_TOL
            rows.append([a, value, published, ok])
        out = _report_outcome(rep)
        return Outcome(["a", "product_ratio", "published", "within_tolerance"], rows, rep.status, out.witnesses, "log53")
    if cfg.target == "claimD1":
        mode = cfg.mode or NumericMode(53)
        rows = []
        for name, series in asy.claim_d1_series(a_values, mode).items():
            rows += _series_rows(name, series, witnesses, str(mode))
    else:
        bits = cfg.mode.bits if cfg.mode and not cfg.mode.is_exact else asy.LIMIT_BITS
        mode = NumericMode(bits)
        names = ("a2_lhs", "a3_lhs_minus_alpha2") if cfg.target == "lemma4.1" else ("a3_rhs", "gap_over_alpha2")
        rows = []
        for name in names:
            rows += _series_rows(name, asy.limit_series(name, a_values, bits), witnesses, str(mode))
        if cfg.target == "lemma4.2":
            dec = asy.decisive_constant_check()
            rows.append(["19/12-e/2", "", dec.observations["margin"], "positive", "", dec.passed])
            witnesses += _report_outcome(dec).witnesses
    status = Status.FAIL if witnesses else Status.PASS
    return Outcome(columns, rows, status, witnesses, str(mode))


COMMANDS = {
    "verify": _run_verify,
    "table41": _run_table,
    "scan": _run_scan,
    "figure": _run_figure,
    "asymptotics": _run_asymptotics,
}


# ---------------------------------------------------------------------------
# serialisation


def _cell(x: Any) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _witness_text(w: dict[str, Any]) -> str:
    return ";".join(f"{k}={w[k]}" for k in sorted(w) if k not in ("check", "outcome"))


def render_csv(outcome: Outcome) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(outcome.columns)
    for row in outcome.rows:
        writer.writerow([_cell(x) for x in row])
    if outcome.witnesses:
        buf.write("\n")
        writer.writerow(["check", "outcome", "witness"])
        for w in outcome.witnesses:
            writer.writerow([w["check"], w["outcome"], _witness_text(w)])
    return buf.getvalue()


def _json_safe(x: Any) -> Any:
    if isinstance(x, (bool, int, float, str)) or x is None:
        return x
    if isinstance(x, dict):
        return {str(k): _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    return str(x)


def render_json(cfg: RunConfig, outcome: Outcome) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": " ".join(x for x in (cfg.command, cfg.target) if x),
        "config": cfg.as_dict(),
        "results": [dict(zip(outcome.columns, row)) for row in outcome.rows],
        "witnesses": outcome.witnesses,
        "status": outcome.status.value,
        "mode": outcome.mode,
        "version": __version__,
    }
    return json.dumps(_json_safe(doc), indent=2, sort_keys=True) + "\n"


def run(cfg: RunConfig) -> tuple[int, str]:
    outcome = COMMANDS[cfg.command](cfg)
    text = render_json(cfg, outcome) if cfg.output_format == "json" else render_csv(outcome)
    code = {Status.PASS: EXIT_OK, Status.FAIL: EXIT_FAIL, Status.INDETERMINATE: EXIT_INDETERMINATE}[outcome.status]
    return code, text


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        code, text = run(cfg)
    except (UsageError, DomainError) as exc:
        parser.print_usage(sys.stderr)
        print(f"seqcert: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if code == EXIT_INDETERMINATE:
        print("seqcert: some signs were not certified; rerun with --mode log256 or --mode exact", file=sys.stderr)
    return code

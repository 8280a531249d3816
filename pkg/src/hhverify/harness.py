"""Suite orchestration, report serialization and the exit-code contract.

Exit codes: 0 when every check passed (or every verdict matched its
expectation), 2 when at least one violation or mismatch was recorded, and
1 for configuration or I/O failures.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import combinations_with_replacement

from .catalog import (
    CATALOG,
    ConvexityClass,
    ConvexityStatus,
    Synchrony,
    certify_operator_convex,
    check_synchronous,
    get_function,
)
from .errors import ConfigInvalid, HHVerifyError
from .inequalities import (
    SUITE_IDS,
    PairEvaluation,
    Tolerance,
    _stream_tags,
    check_hh_chain,
    check_phi_convexity,
    example_trial,
    nonnegative_on,
)
from .quadrature import BACKWARD, QuadratureSpec, SegmentTable
from .sampling import U64, derive_subseed, random_hermitian, random_unit_vector

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_VIOLATION = 0, 1, 2

SINGLE_SUITES = {"thm1-chain", "lemma-2.1"}
ASYNC_SUITES = {"chain-3.3", "rem-3.7", "rem-3.8", "rem-3.9"}
SYNC_SUITES = {"chain-3.2", "rem-3.4", "rem-3.5", "rem-3.6"}
DEFAULT_INTERVAL = (0.0, 1.0)
ASYNC_INTERVAL = (-1.0, 0.0)

RECORD_FIELDS = (
    "id", "dim", "trial", "probe", "functions", "interval", "orientation",
    "lhs", "rhs", "margin", "tolerance", "quad_error", "verdict", "subseeds",
)


@dataclass
class SuiteConfig:
    suites: tuple[str, ...] = ("all",)
    dims: tuple[int, ...] = (1, 2, 4, 8)
    trials: int = 250
    probes: int = 8
    interval: tuple[float, float] | None = None
    functions: tuple[str, str] | str = ("identity", "square")
    seed: int = 0
    tol_abs: float = 1e-9
    tol_rel: float = 1e-9
    quad_panels: int = 8
    quad_nodes: int = 8
    report_path: str | None = None
    report_format: str = "json"
    allow_signed: bool = False
    workers: int | None = None  # None: read HHVERIFY_THREADS

    def selected_suites(self) -> list[str]:
        if list(self.suites) == ["all"]:
            return list(SUITE_IDS)
        return list(self.suites)

    def validate(self):
        unknown = [s for s in self.suites if s not in SUITE_IDS and s != "all"]
        if unknown or not self.suites:
            raise ConfigInvalid(f"unknown suite ids {unknown}; known: {', '.join(SUITE_IDS)}")
        if self.trials < 1:
            raise ConfigInvalid("trials must be at least 1")
        if self.probes < 1:
            raise ConfigInvalid("probes must be at least 1")
        if not self.dims or any(d < 1 for d in self.dims):
            raise ConfigInvalid("dims must be positive integers")
        if self.report_format not in ("json", "csv"):
            raise ConfigInvalid(f"report format must be json or csv, got {self.report_format!r}")
        if not 0 <= self.seed < U64:
            raise ConfigInvalid("seed must be an unsigned 64-bit integer")
        if self.interval is not None and not self.interval[0] < self.interval[1]:
            raise ConfigInvalid(f"bad interval {self.interval}")
        if min(self.tol_abs, self.tol_rel) < 0:
            raise ConfigInvalid("tolerances must be nonnegative")
        if self.functions != "sweep":
            if len(self.functions) != 2:
                raise ConfigInvalid("functions must be a pair of ids or 'sweep'")
            for fid in self.functions:
                get_function(fid)
        try:
            self.quad_spec()
        except HHVerifyError as exc:
            raise ConfigInvalid(str(exc)) from exc

    def quad_spec(self) -> QuadratureSpec:
        return QuadratureSpec(self.quad_panels, self.quad_nodes)

    def tolerance(self) -> Tolerance:
        return Tolerance(self.tol_abs, self.tol_rel)

    def echo(self) -> dict:
        """Config fields that determine report contents (no path, no worker count)."""
        d = asdict(self)
        for k in ("report_path", "workers"):
            d.pop(k)
        return d


@dataclass
class RunSummary:
    total_checks: int
    passes: int
    violations: int
    skips: int
    worst_margin: float | None
    worst_context: dict | None
    wall_time: float = field(default=0.0, compare=False)

    @property
    def exit_code(self) -> int:
        return EXIT_VIOLATION if self.violations else EXIT_OK


def worker_count(requested: int | None = None) -> int:
    n = requested
    if n is None:
        raw = os.environ.get("HHVERIFY_THREADS", "1")
        try:
            n = int(raw)
        except ValueError:
            raise ConfigInvalid(f"HHVERIFY_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ConfigInvalid("worker count must be nonnegative")
    return n or os.cpu_count() or 1


def _interval_for(suite, config) -> tuple[float, float]:
    if config.interval is not None:
        return tuple(config.interval)
    return ASYNC_INTERVAL if suite in ASYNC_SUITES else DEFAULT_INTERVAL


def _targets(suite, config) -> list[tuple[str, ...]]:
    if suite == "example-3":
        return [()]
    if config.functions == "sweep":
        ids = list(CATALOG)
        if suite in SINGLE_SUITES:
            return [(i,) for i in ids]
        return list(combinations_with_replacement(ids, 2))
    f, g = config.functions
    if suite in SINGLE_SUITES:
        return [(f,)] if f == g else [(f,), (g,)]
    return [(f, g)]


def _skip_reason(suite, fs, interval, config) -> str | None:
    """Why ``suite`` cannot run on restricted functions ``fs``, or None."""
    convex = all(f.convexity_class is ConvexityClass.OPERATOR_CONVEX for f in fs)
    nonneg = all(nonnegative_on(f, *interval) for f in fs)
    if suite in SINGLE_SUITES or suite in ("thm3-2.2", "thm4-2.7", "thm5-2.9") or suite.startswith("rem-"):
        if not convex:
            return "functions not tagged operator convex"
    if suite == "thm3-2.2" and not nonneg:
        return "functions not nonnegative on the interval"
    if suite in ("thm4-2.7", "thm5-2.9") and not (nonneg or config.allow_signed):
        return "signed functions need --allow-signed"
    if suite in ("rem-3.4", "rem-3.7") and not nonneg:
        return "functions not nonnegative on the interval"
    if len(fs) == 2 and suite not in ("thm3-2.2", "thm4-2.7", "thm5-2.9"):
        kind = check_synchronous(*fs, interval).kind
        if kind is Synchrony.NEITHER and suite == "thm6-3.1":
            return "pair is neither synchronous nor asynchronous"
        if suite in SYNC_SUITES and kind is not Synchrony.SYNCHRONOUS:
            return f"pair is {kind.value.lower()}, suite needs synchronous"
        if suite in ASYNC_SUITES and kind is not Synchrony.ASYNCHRONOUS:
            return f"pair is {kind.value.lower()}, suite needs asynchronous"
    return None


@dataclass(frozen=True)
class _Unit:
    """One draw of ``(A, B, x_1..x_k)`` and every target evaluated on it."""

    interval: tuple[float, float] | None
    dim: int
    trial: int
    jobs: tuple  # ((target, ((suite index, target index, suite id), ...)), ...)


def _record(report, **context) -> dict:
    c = {**report.context, **context}
    return {
        "id": report.inequality_id,
        "dim": c["dim"],
        "trial": c["trial"],
        "probe": c["probe"],
        "functions": list(c["functions"]),
        "interval": list(c["interval"]),
        "orientation": report.orientation,
        "lhs": report.lhs,
        "rhs": report.rhs,
        "margin": report.margin,
        "tolerance": report.tolerance_used,
        "quad_error": report.quad_error,
        "verdict": report.verdict.value,
        "subseeds": c["subseeds"],
    }


def _skip_record(suite, target, interval) -> dict:
    rec = dict.fromkeys(RECORD_FIELDS)
    rec.update(id=suite, functions=list(target), interval=list(interval) if interval else None, verdict="SKIP")
    return rec


def _run_unit(unit: _Unit, config: SuiteConfig) -> list[tuple[tuple, dict]]:
    spec, tol = config.quad_spec(), config.tolerance()
    out = []
    if unit.interval is None:
        for _, suites in unit.jobs:
            for s_idx, t_idx, _ in suites:
                for rep in example_trial(unit.dim, unit.trial, config.seed, config.probes, spec, tol):
                    key = (s_idx, t_idx, unit.dim, unit.trial, rep.context["probe"], rep.inequality_id)
                    out.append((key, _record(rep)))
        return out

    tags = _stream_tags(unit.interval, unit.dim)
    seeds = {k: derive_subseed(config.seed, unit.trial, tags[k]) for k in ("A", "B")}
    A = random_hermitian(unit.dim, unit.interval, seeds["A"])
    B = random_hermitian(unit.dim, unit.interval, seeds["B"])
    xseeds = [derive_subseed(config.seed, unit.trial, f"{tags['x']}/{p}") for p in range(config.probes)]
    xs = [random_unit_vector(unit.dim, s) for s in xseeds]
    table = None
    for target, suites in unit.jobs:
        fs = [get_function(i).restrict(unit.interval) for i in target]
        ctx = dict(dim=unit.dim, trial=unit.trial, functions=target, interval=unit.interval)

        def emit(s_idx, t_idx, probe, reps, xseed=None):
            subseeds = dict(seeds) if xseed is None else {**seeds, "x": xseed}
            for rep in reps:
                key = (s_idx, t_idx, unit.dim, unit.trial, probe, rep.inequality_id)
                out.append((key, _record(rep, probe=probe, subseeds=subseeds, **ctx)))

        ev = synchrony = None
        if len(fs) == 2:
            if table is None:
                table = SegmentTable(A, B, spec, BACKWARD)
            ev = PairEvaluation(fs[0], fs[1], A, B, spec, tol, table=table)
            if any(s in SYNC_SUITES or s in ASYNC_SUITES or s == "thm6-3.1" for _, _, s in suites):
                synchrony = check_synchronous(fs[0], fs[1], unit.interval)
        for s_idx, t_idx, suite in suites:
            if suite == "thm1-chain":
                emit(s_idx, t_idx, 0, [check_hh_chain(fs[0], A, B, tol, spec).as_report()])
                continue
            for p, (x, xseed) in enumerate(zip(xs, xseeds)):
                if suite == "lemma-2.1":
                    reps = [check_phi_convexity(fs[0], A, B, x, tol=tol)]
                elif suite == "thm3-2.2":
                    reps = [ev.product_upper(x)]
                elif suite == "thm4-2.7":
                    reps = [ev.midpoint_product(x, config.allow_signed)]
                elif suite == "thm5-2.9":
                    reps = [ev.cross_product(x, config.allow_signed)]
                elif suite == "thm6-3.1":
                    reps = [ev.cebysev(x, synchrony)]
                elif suite in ("chain-3.2", "chain-3.3"):
                    reps = list(ev.mnp_chain(x, synchrony))
                else:
                    reps = [r for r in ev.remark_bounds(x, synchrony) if r.inequality_id.split("-pf")[0] == suite]
                emit(s_idx, t_idx, p, reps, xseed)
    return out


def plan(config: SuiteConfig):
    """Work units and SKIP records for a validated config."""
    groups: dict[tuple, dict] = {}
    skipped = []
    for s_idx, suite in enumerate(config.selected_suites()):
        for t_idx, target in enumerate(_targets(suite, config)):
            if not target:
                groups.setdefault(None, {}).setdefault((), []).append((s_idx, t_idx, suite))
                continue
            lo, hi = _interval_for(suite, config)
            fs = [get_function(i) for i in target]
            lo, hi = max([lo, *(f.domain[0] for f in fs)]), min([hi, *(f.domain[1] for f in fs)])
            if not lo < hi:
                log.info("SKIP %s %s: interval does not meet the domain", suite, target)
                skipped.append(((s_idx, t_idx, -1, -1, -1, suite), _skip_record(suite, target, None)))
                continue
            reason = _skip_reason(suite, [f.restrict((lo, hi)) for f in fs], (lo, hi), config)
            if reason:
                log.info("SKIP %s %s on [%g, %g]: %s", suite, target, lo, hi, reason)
                skipped.append(((s_idx, t_idx, -1, -1, -1, suite), _skip_record(suite, target, (lo, hi))))
                continue
            groups.setdefault((lo, hi), {}).setdefault(target, []).append((s_idx, t_idx, suite))
    work = [
        _Unit(interval, dim, trial, tuple((t, tuple(s)) for t, s in jobs.items()))
        for interval, jobs in groups.items()
        for dim in config.dims
        for trial in range(config.trials)
    ]
    return work, skipped


def run_suite(config: SuiteConfig) -> tuple[RunSummary, list[dict]]:
    config.validate()
    start = time.perf_counter()
    work, keyed = plan(config)
    workers = worker_count(config.workers)
    if workers == 1:
        results = [_run_unit(u, config) for u in work]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda u: _run_unit(u, config), work))
    for r in results:
        keyed += r
    keyed.sort(key=lambda kr: kr[0])
    records = [r for _, r in keyed]
    summary = summarize(records, time.perf_counter() - start)
    if config.report_path:
        write_report(config.report_path, records, summary, config.report_format, config.echo())
    return summary, records


def summarize(records, wall_time=0.0) -> RunSummary:
    checks = [r for r in records if r["verdict"] != "SKIP"]
    passes = sum(r["verdict"] == "PASS" for r in checks)
    worst = min(checks, key=lambda r: r["margin"], default=None)
    return RunSummary(
        total_checks=len(checks),
        passes=passes,
        violations=len(checks) - passes,
        skips=len(records) - len(checks),
        worst_margin=None if worst is None else worst["margin"],
        worst_context=worst,
        wall_time=wall_time,
    )


def render_report(records, summary: RunSummary, fmt: str = "json", config: dict | None = None) -> str:
    if fmt == "json":
        s = asdict(summary)
        s.pop("wall_time")
        return json.dumps({"config": config or {}, "summary": s, "records": records}, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_FIELDS)
    for r in records:
        row = []
        for k in RECORD_FIELDS:
            v = r[k]
            if v is None:
                v = ""
            elif k in ("functions", "interval"):
                v = ";".join(str(e) for e in v)
            elif k == "subseeds":
                v = json.dumps(v, sort_keys=True, separators=(",", ":"))
            elif isinstance(v, float):
                v = repr(v)
            row.append(v)
        w.writerow(row)
    return buf.getvalue()


def write_report(path, records, summary, fmt="json", config=None):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_report(records, summary, fmt, config))


def expected_status(f) -> tuple[bool, ConvexityStatus | None]:
    """(test concavity?, expected verdict) for a catalog entry's tag."""
    cls = f.convexity_class
    if cls is ConvexityClass.OPERATOR_CONCAVE:
        return True, ConvexityStatus.NO_VIOLATION_FOUND
    if cls is ConvexityClass.OPERATOR_CONVEX:
        return False, ConvexityStatus.NO_VIOLATION_FOUND
    if cls is ConvexityClass.NOT_OPERATOR_CONVEX:
        return False, ConvexityStatus.VIOLATED
    return False, None


def certify_convex_command(function_id, interval, dim, trials, seed):
    """Run the falsifier; exit 0 when the verdict agrees with the catalog tag."""
    f = get_function(function_id)
    if trials < 1 or dim < 1:
        raise ConfigInvalid("dim and trials must be positive")
    lo, hi = interval
    if not (lo < hi and f.covers((lo, hi))):
        raise ConfigInvalid(f"interval [{lo}, {hi}] not inside the domain {f.domain} of {f.id}")
    concave, expected = expected_status(f)
    verdict = certify_operator_convex(f, (lo, hi), dim, trials, seed, concave=concave)
    code = EXIT_OK if expected is None or verdict.status is expected else EXIT_VIOLATION
    return verdict, code


def example_command(seed=0, report_path=None, dims=(1, 2, 3, 4), trials=250, probes=8, workers=None, fmt="json"):
    config = SuiteConfig(
        suites=("example-3",), dims=tuple(dims), trials=trials, probes=probes,
        seed=seed, report_path=report_path, report_format=fmt, workers=workers,
    )
    return run_suite(config)

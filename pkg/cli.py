"""Verification campaigns and emitters.

    python cli.py verify kernel --max-n 10000
    python cli.py verify adapted --depth 2 --format jsonl
    python cli.py emit theta --precision 200
    python cli.py verify kernel --start 5000 --max-n 10000 --out kernel.jsonl

Rows are computed with joblib and written in submission order as they
arrive, so a report file can be appended to shard by shard. The exit code is
0 iff no row failed and 2 for a bad configuration.
"""
import argparse
import json
import logging
import random
import sys
import time
from typing import Any, Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from joblib import Parallel, delayed
from pydantic import ValidationError

from adapted import (
    adapted_pipeline,
    check_faithful,
    check_kills_f0,
    check_local_nilpotence,
    extract_u,
    k_basis,
    t_matrix,
    wa_check,
)
from config import config
from exceptions import ConfigError, DimensionViolation, Hecke2Error, NotInN2, NotMultiplication
from gf2poly import format_value, support
from modforms import (
    PrecisionPolicy,
    ThetaKind,
    check_theta_identities,
    check_wa_generators,
    gen_theta,
    verify_u_agreement,
)
from nmod import (
    check_image_bound,
    check_j_identities,
    check_projection_injective,
    j_assignment_report,
    random_n2_g,
    verify_projection,
)
from recurrence import (
    APPROXIMATIONS,
    check_approximation,
    check_degree_law,
    check_golden_values,
    check_u_plus_i,
    check_window,
    check_window_identities,
    express_C,
    gen_sequences,
    is_kernel_degree,
    kernel_basis,
    km_kernel,
    KernelBasis,
    SequenceTable,
    normalized_kernel_basis,
    window_pattern,
)
from schemas import EMIT_TARGETS, VERIFY_TARGETS, Campaign, CampaignSummary, ReportRow
from semilinear import (
    check_fixed_points,
    check_frobenius,
    check_semilinearity,
    check_six_term_recursion,
    check_t_law,
    check_u_squared_identity,
    random_poly,
)

logger = logging.getLogger(__name__)

DEFAULT_PRIMES = [3, 7, 11, 13, 17, 19, 23, 29, 31]

DEFAULTS = {
    "recurrence": {"max_n": 2000, "max_m": 30},
    "kernel": {"max_n": 10000},
    "normalize": {"max_n": 4800},
    "projection": {"max_m": 100},
    "u-agreement": {"max_n": 100},
    "adapted": {"depth": 6},
    "hecke-u": {"depth": 6},
    "wa": {"max_n": 48},
    "sequences": {"max_n": 100},
    "kernel-basis": {"max_n": 200},
    "adapted-basis": {"depth": 6},
    "theta": {"precision": 1000},
}

PROPERTY_SEED = 20240501
PROPERTY_SAMPLES = 1000
PROPERTY_DEGREE = 600
IMAGE_BOUND_SAMPLES = 5
PROGRESS_EVERY = 500

Item = Tuple[Any, Callable[..., Dict[str, Any]], tuple]


def _error_witness(e: Exception) -> Dict[str, Any]:
    if isinstance(e, Hecke2Error):
        return e.to_witness()
    return {"error": type(e).__name__, "detail": str(e)}


def _timed(campaign: str, item: Any, fn: Callable[..., Dict[str, Any]], args: tuple) -> ReportRow:
    start = time.perf_counter()
    try:
        witness = fn(*args)
        status = "pass"
    except Hecke2Error as e:
        logger.debug(f"{campaign} {item}: {e.kind}")
        witness = e.to_witness()
        status = "fail"
    except Exception as e:
        logger.exception(f"{campaign} {item}: unexpected {type(e).__name__}")
        witness = _error_witness(e)
        status = "fail"
    ms = (time.perf_counter() - start) * 1000
    return ReportRow(campaign=campaign, item=item, status=status, witness=witness or {}, ms=round(ms, 3))


def _fail_row(campaign: str, item: Any, error: Exception) -> ReportRow:
    return ReportRow(campaign=campaign, item=item, status="fail", witness=_error_witness(error))


def _error_item(e: Exception) -> Any:
    return getattr(e, "certificate", {}).get("n")


# recurrence

def _sequence_item(n: int, table: SequenceTable) -> Dict[str, Any]:
    law = check_degree_law(table, n)
    windows = check_window_identities(table, n)
    check_u_plus_i(table, n)
    check_t_law(n)
    return {**law, "identities": windows["identities"]}


def _km_item(m: int) -> Dict[str, Any]:
    km = km_kernel(m)
    if m >= 2 and km.l_stable:
        raise DimensionViolation("U+I stabilises L", {"m": m})
    return {
        "m": m,
        "dimension": km.dimension,
        "square_dimension": km.square_dimension,
        "l_dimension": km.l_dimension,
        "l_stable": km.l_stable,
    }


def _property_item(seed: int, index: int) -> Dict[str, Any]:
    rng = random.Random(seed + index)
    f = random_poly(rng, rng.randint(0, PROPERTY_DEGREE))
    check_frobenius(f)
    check_semilinearity(f)
    i = index % 5
    k = rng.randint(0, 64)
    check_u_squared_identity(i, k)
    return {"degree": f.degree, "i": i, "k": k}


def recurrence_items(c: Campaign, table: SequenceTable) -> List[Item]:
    items: List[Item] = [(n, _sequence_item, (n, table)) for n in range(c.start, c.max_n + 1)]
    if c.start:
        return items
    items = [
        ("golden", check_golden_values, ()),
        ("fixed_points", check_fixed_points, ()),
    ] + [(f"six_term_{n}", check_six_term_recursion, (n,)) for n in range(12)] + items
    items += [(f"K_{m}", _km_item, (m,)) for m in range(c.max_m + 1)]
    samples = min(PROPERTY_SAMPLES, max(c.max_n, 1))
    items += [(f"property_{k}", _property_item, (PROPERTY_SEED, k)) for k in range(samples)]
    return items


# kernel and normalization

def _kernel_item(n: int, basis: KernelBasis) -> Dict[str, Any]:
    return {"n": n, "S": sorted(express_C(n, basis))}


def _kernel_rows(c: Campaign) -> Iterable[ReportRow]:
    try:
        basis = kernel_basis(c.max_n)
    except Exception as e:
        yield _fail_row(c.campaign_id, _error_item(e), e)
        return
    for n in basis.degrees():
        if n >= c.start:
            yield _timed(c.campaign_id, n, _kernel_item, (n, basis))


def _normalize_item(n: int, basis: KernelBasis) -> Dict[str, Any]:
    witness: Dict[str, Any] = {"n": n}
    if window_pattern(n) is not None:
        witness["window"] = check_window(basis, n)["g_top"]
    if n % 12 in APPROXIMATIONS:
        approximation = check_approximation(basis, n)
        witness["difference_degree"] = approximation["difference_degree"]
        witness["bound"] = approximation["bound"]
    return witness


def normalize_items(c: Campaign, basis: KernelBasis) -> List[Item]:
    return [(n, _normalize_item, (n, basis)) for n in range(c.start, c.max_n + 1) if is_kernel_degree(n)]


# nmod

def _projection_item(m: int, basis: KernelBasis) -> Dict[str, Any]:
    rows = verify_projection(m, basis)
    return {"m": m, "rows": rows}


def _projection_rows(c: Campaign, threads: int) -> Iterable[ReportRow]:
    if not c.start:
        yield _timed(c.campaign_id, "j_identities", check_j_identities, ())
        yield _timed(c.campaign_id, "j_assignment", _assignment_item, ())
        yield _timed(c.campaign_id, "image_bounds", _image_bound_item, (min(c.max_m, 30),))
    try:
        basis = normalized_kernel_basis(12 * c.max_m + 8)
    except Exception as e:
        yield _fail_row(c.campaign_id, "basis", e)
        return
    items = [(m, _projection_item, (m, basis)) for m in range(c.start, c.max_m + 1)]
    rows = _run_items(c, items, threads)
    leading = []
    for row in rows:
        yield row
        if row.status == "pass":
            leading.extend(row.witness["rows"])
    yield _timed(c.campaign_id, "injective", check_projection_injective, (leading,))


def _image_bound_item(max_m: int) -> Dict[str, Any]:
    rng = random.Random(PROPERTY_SEED)
    for m in range(max_m + 1):
        for _ in range(IMAGE_BOUND_SAMPLES):
            check_image_bound(random_n2_g(rng, 6 * m + 4), 10 * m + 7)
            check_image_bound(random_n2_g(rng, 12 * m), 20 * m + 1)
    return {"max_m": max_m, "samples": 2 * IMAGE_BOUND_SAMPLES * (max_m + 1)}


def _assignment_item() -> Dict[str, Any]:
    report = j_assignment_report()
    if not report["adopted"]["consistent"]:
        raise NotInN2("J_3 = F^8/G, J_9 = F^4 G does not reproduce the u_i images", report)
    return report


# modular forms

def u_agreement_items(c: Campaign) -> List[Item]:
    return [(n, verify_u_agreement, (n, c.precision)) for n in range(c.start, c.max_n + 1)]


def _adapted_rows(c: Campaign, threads: int) -> Iterable[ReportRow]:
    start = time.perf_counter()
    try:
        run = adapted_pipeline(c.depth, threads=threads)
    except Exception as e:
        yield _fail_row(c.campaign_id, "grid", e)
        return
    ms = round((time.perf_counter() - start) * 1000, 3)
    for cell in run.adapted.to_payload():
        yield ReportRow(
            campaign=c.campaign_id,
            item=[cell["i"], cell["j"]],
            status="pass",
            witness={**cell, "bound": run.basis.bound},
            ms=ms,
        )


def _hecke_u_rows(c: Campaign, threads: int) -> Iterable[ReportRow]:
    primes = c.primes or DEFAULT_PRIMES
    try:
        run = adapted_pipeline(c.depth, primes=primes, threads=threads)
    except Exception as e:
        yield _fail_row(c.campaign_id, "grid", e)
        return
    M3, M7 = run.matrices[3], run.matrices[7]
    yield _timed(c.campaign_id, "faithful", check_faithful, (run.adapted, M3, M7))
    for p in sorted(run.matrices):
        yield _timed(c.campaign_id, p, _u_item, (p, run))


EXPECTED_U = {3: [[1, 0]], 7: [[0, 1]]}


def _u_item(p: int, run) -> Dict[str, Any]:
    M = run.matrices[p]
    check_kills_f0(M, run.basis)
    u = extract_u(p, run.adapted, M)
    if p in EXPECTED_U:
        check_local_nilpotence(run.adapted, M)
        if u.to_payload() != EXPECTED_U[p]:
            raise NotMultiplication(f"u_{p} differs from its generator", {"p": p, "terms": u.to_payload()})
    return {"p": p, "u": u.to_payload(), "bound": run.basis.bound}


def _wa_rows(c: Campaign, threads: int) -> Iterable[ReportRow]:
    precision = c.precision or config.THETA_CHECK_PRECISION
    if not c.start:
        yield _timed(c.campaign_id, "theta", check_theta_identities, (precision,))
        yield _timed(c.campaign_id, "generators", check_wa_generators, (min(precision, 2000),))
    start = time.perf_counter()
    try:
        basis = k_basis(c.max_n, PrecisionPolicy(dmax=c.max_n, pmax=7))
        matrices = {q: t_matrix(q, basis, threads) for q in (3, 7)}
        rows = wa_check(basis, c.max_n, matrices)
    except Exception as e:
        yield _fail_row(c.campaign_id, _error_item(e), e)
        return
    ms = round((time.perf_counter() - start) * 1000, 3)
    for row in rows:
        if row["n"] >= c.start:
            yield ReportRow(campaign=c.campaign_id, item=row["n"], status="pass", witness=row, ms=ms)


# emitters

def _sequence_record(n: int, table: SequenceTable) -> Dict[str, Any]:
    return {"n": n, "C": support(table.C[n]), "A": support(table.A[n])}


def _emit_kernel_rows(c: Campaign) -> Iterable[ReportRow]:
    try:
        basis = normalized_kernel_basis(c.max_n) if c.normalization == "lemma34" else kernel_basis(c.max_n)
    except Exception as e:
        yield _fail_row(c.campaign_id, _error_item(e), e)
        return
    for n in basis.degrees():
        if n < c.start:
            continue
        yield ReportRow(
            campaign=c.campaign_id,
            item=n,
            status="pass",
            witness={"n": n, "normalization": basis.normalization, "g": format_value(basis.poly(n))},
        )


def _theta_record(kind: str, precision: int) -> Dict[str, Any]:
    return {"kind": kind, "series": format_value(gen_theta(kind, precision))}


def _run_items(c: Campaign, items: Sequence[Item], threads: int) -> Iterator[ReportRow]:
    logger.info(f"{c.campaign_id}: {len(items)} items on {threads} worker(s)")
    # a shared table or basis is pickled once per batch, not once per item
    batch_size = max(1, len(items) // (8 * threads)) if threads > 1 else "auto"
    return Parallel(n_jobs=threads, return_as="generator", batch_size=batch_size)(
        delayed(_timed)(c.campaign_id, item, fn, args) for item, fn, args in items
    )


def _shared(c: Campaign, build: Callable[[int], Any], bound: int) -> Tuple[Any, Optional[ReportRow]]:
    """Build the table or basis every item of a campaign reads, once, in this process."""
    try:
        return build(bound), None
    except Exception as e:
        return None, _fail_row(c.campaign_id, _error_item(e), e)


def campaign_rows(c: Campaign) -> Iterable[ReportRow]:
    threads = c.threads
    target = c.target
    if c.command == "verify":
        if target == "recurrence":
            table, failure = _shared(c, gen_sequences, c.max_n)
            yield from [failure] if failure is not None else _run_items(c, recurrence_items(c, table), threads)
        elif target == "kernel":
            yield from _kernel_rows(c)
        elif target == "normalize":
            basis, failure = _shared(c, normalized_kernel_basis, c.max_n)
            yield from [failure] if failure is not None else _run_items(c, normalize_items(c, basis), threads)
        elif target == "projection":
            yield from _projection_rows(c, threads)
        elif target == "u-agreement":
            yield from _run_items(c, u_agreement_items(c), threads)
        elif target == "adapted":
            yield from _adapted_rows(c, threads)
        elif target == "hecke-u":
            yield from _hecke_u_rows(c, threads)
        elif target == "wa":
            yield from _wa_rows(c, threads)
    else:
        if target == "sequences":
            table, failure = _shared(c, gen_sequences, c.max_n)
            if failure is not None:
                yield failure
                return
            items = [(n, _sequence_record, (n, table)) for n in range(c.start, c.max_n + 1)]
            yield from _run_items(c, items, threads)
        elif target == "kernel-basis":
            yield from _emit_kernel_rows(c)
        elif target == "adapted-basis":
            yield from _adapted_rows(c, threads)
        elif target == "theta":
            items = [(kind.value, _theta_record, (kind.value, c.precision)) for kind in ThetaKind]
            yield from _run_items(c, items, threads)


def format_row(row: ReportRow, fmt: str) -> str:
    if fmt == "jsonl":
        return row.to_record()
    witness = json.dumps(row.witness, separators=(",", ":"))
    return f"{row.status.upper():4}  {row.campaign}  {json.dumps(row.item)}  {witness}  {row.ms:.1f}ms"


def format_summary(summary: CampaignSummary) -> str:
    return "\n".join([
        f"{'campaign':<24}{'total':>8}{'passed':>8}{'failed':>8}{'seconds':>10}",
        f"{summary.campaign:<24}{summary.total:>8}{summary.passed:>8}{summary.failed:>8}{summary.seconds:>10.2f}",
    ])


def run(c: Campaign, stream=None) -> CampaignSummary:
    """Write every row of the campaign to ``stream`` (or ``c.out``) and summarise."""
    start = time.perf_counter()
    total = passed = 0
    handle = open(c.out, "a") if c.out else None
    out = handle or stream or sys.stdout
    try:
        for row in campaign_rows(c):
            total += 1
            passed += row.status == "pass"
            if row.status == "fail":
                logger.error(f"{c.campaign_id} {row.item} failed: {row.witness.get('detail')}")
            out.write(format_row(row, c.format) + "\n")
            out.flush()
            if total % PROGRESS_EVERY == 0:
                logger.info(f"{c.campaign_id}: {total} rows written, {total - passed} failed")
    finally:
        if handle:
            handle.close()
    summary = CampaignSummary(
        campaign=c.campaign_id,
        total=total,
        passed=passed,
        failed=total - passed,
        seconds=round(time.perf_counter() - start, 3),
    )
    logger.info(f"{c.campaign_id}: {summary.passed}/{summary.total} passed")
    return summary


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hecke2", description="Verify and emit mod-2 Hecke algebra data.")
    commands = parser.add_subparsers(dest="command", required=True)
    for command, targets in (("verify", VERIFY_TARGETS), ("emit", EMIT_TARGETS)):
        sub = commands.add_parser(command)
        sub.add_argument("target", choices=targets)
        sub.add_argument("--max-n", type=int)
        sub.add_argument("--max-m", type=int)
        sub.add_argument("--start", type=int, help="First n (first m for projection) of the range")
        sub.add_argument("--depth", type=int)
        sub.add_argument("--primes", type=lambda s: [int(p) for p in s.split(",") if p])
        sub.add_argument("--precision", type=int)
        sub.add_argument("--threads", type=int, default=config.THREADS)
        sub.add_argument("--out", help="Append report rows to this file")
        sub.add_argument("--format", choices=["text", "jsonl"], default=config.REPORT_FORMAT)
        sub.add_argument("--normalization", choices=["reduced", "lemma34"], default="reduced")
    return parser


def make_campaign(args: argparse.Namespace) -> Campaign:
    problems = config.validate()
    if problems:
        raise ConfigError("Invalid configuration", {"problems": problems})
    values = {k: v for k, v in vars(args).items() if v is not None}
    for key, default in DEFAULTS.get(args.target, {}).items():
        values.setdefault(key, default)
    try:
        return Campaign(**values)
    except ValidationError as e:
        raise ConfigError("Invalid campaign", {"problems": [err["msg"] for err in e.errors()]})


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(
        level=getattr(logging, config.LOG_LEVEL.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    args = build_parser().parse_args(argv)
    try:
        campaign = make_campaign(args)
    except ConfigError as e:
        print(json.dumps(e.to_witness()), file=sys.stderr)
        return 2
    summary = run(campaign)
    print(format_summary(summary), file=sys.stderr if campaign.format == "jsonl" else sys.stdout)
    return 0 if summary.ok else 1


if __name__ == "__main__":
    sys.exit(main())

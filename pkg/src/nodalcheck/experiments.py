"""Monte Carlo experiment harness and result persistence.

Each experiment produces a Summary: a list of result rows with a fixed
column set, plus metadata (library version, pattern checksums, depth,
zero tolerance) that is stamped into every output file.  All randomness
derives from a master seed through per-trial substreams, so identical
configs give byte-identical outputs regardless of execution order.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .admissibility import (CERTIFIED, DEGENERATE, default_patterns,
                            validate_1d, validate_2d)
from .bounds import bound_1d_periodic, bound_2d_periodic
from .cubical import sign_grid
from .fields import (derive_seed, draw_realization, spectral_moments,
                     trig_coeffs)
from .homology import (betti_pair, default_reference_M, homology_match,
                       reference_betti)
from .orthant import PATTERNS, asymptotic_functional, prop41_limit

__all__ = [
    "CSV_COLUMNS",
    "ExperimentConfig",
    "TrialRecord",
    "Summary",
    "wilson_interval",
    "default_zero_tol",
    "zero_stats",
    "homology_experiment",
    "orthant_convergence",
    "write_results",
    "read_results",
]

CSV_COLUMNS = [
    "experiment", "dim", "N", "M", "trials", "seed",
    "rate_match", "ci_lo", "ci_hi",
    "rate_certified", "cert_lo", "cert_hi",
    "bound", "degenerate", "unresolved",
]

DEFAULT_DEPTH = 6


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative experiment description (mirrors the CLI config JSON)."""

    kind: str  # ZeroStats | Homology1D | Homology2D | OrthantConvergence
    N: int = 0
    M_list: tuple = ()
    trials: int = 1
    D: int = DEFAULT_DEPTH
    seed: int = 0
    zero_tol: float | None = None
    out: str | None = None

    def __post_init__(self):
        kinds = ("ZeroStats", "Homology1D", "Homology2D", "OrthantConvergence")
        if self.kind not in kinds:
            raise ValueError(f"kind must be one of {kinds}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        floor = 3 if self.kind == "Homology2D" else 1
        if any(M < floor for M in self.M_list):
            raise ValueError(f"every M must be at least {floor}")

    @staticmethod
    def from_json(text: str) -> "ExperimentConfig":
        d = json.loads(text)
        if "M_list" in d:
            d["M_list"] = tuple(d["M_list"])
        return ExperimentConfig(**d)


@dataclass(frozen=True)
class TrialRecord:
    """Per-trial outcomes, one flag set per grid resolution."""

    index: int
    seed: int
    per_M: dict  # M -> {certified, degenerate, match, unresolved}
    zero_count: int = 0
    min_gap: float = math.inf

    def __post_init__(self):
        for M, flags in self.per_M.items():
            if flags.get("certified") and flags.get("degenerate"):
                raise ValueError("a certified trial cannot be degenerate")


@dataclass(frozen=True)
class Summary:
    """Aggregated experiment results plus provenance metadata."""

    kind: str
    rows: tuple  # dicts keyed by CSV_COLUMNS
    meta: dict
    extra: dict = field(default_factory=dict)


def wilson_interval(successes: int, n: int, z: float = 1.959964) -> tuple:
    """Wilson 95% score interval; behaves sanely for rates near 0 or 1."""
    if n == 0:
        return 0.0, 1.0
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def default_zero_tol(coeffs) -> float:
    """1e-12 times the field's standard deviation sqrt(A0)."""
    m = spectral_moments(coeffs)
    A0 = m[0] if coeffs.a.ndim == 1 else m[0, 0]
    return 1e-12 * math.sqrt(A0)


def _metadata(D: int, zero_tol: float) -> dict:
    return {
        "version": __version__,
        "checksum_B": 66, "checksum_I4": 92, "checksum_I": 90,
        "D": D, "zero_tol": zero_tol,
    }


def _find_zeros(r, N: int) -> np.ndarray:
    """Zeros of a 1D realization on [0, L): sign-change bracketing + bisection."""
    L = r.coeffs.L
    n_grid = 50 * N
    xs = np.arange(n_grid + 1) * (L / n_grid)
    v = r(xs)
    idx = np.flatnonzero(np.signbit(v[:-1]) != np.signbit(v[1:]))
    if idx.size == 0:
        return np.empty(0)
    lo, hi = xs[idx], xs[idx + 1]
    flo = v[idx]
    # vectorized bisection to 1e-12 absolute
    for _ in range(int(math.ceil(math.log2((L / n_grid) / 1e-12)))):
        mid = 0.5 * (lo + hi)
        fmid = r(mid)
        go_right = np.signbit(flo) == np.signbit(fmid)
        lo = np.where(go_right, mid, lo)
        flo = np.where(go_right, fmid, flo)
        hi = np.where(go_right, hi, mid)
    return 0.5 * (lo + hi)


def zero_stats(N: int, trials: int, seed: int) -> Summary:
    """Zero count and minimal zero gap statistics for degree-N 1D polynomials."""
    if N < 2:
        raise ValueError("N must be at least 2")
    coeffs = trig_coeffs(1, N)
    L = coeffs.L
    counts = np.zeros(trials)
    min_gaps = np.full(trials, np.inf)
    for t in range(trials):
        r = draw_realization(coeffs, derive_seed(seed, t))
        zeros = _find_zeros(r, N)
        counts[t] = zeros.size
        if zeros.size >= 2:
            gaps = np.diff(zeros)
            wrap = L - (zeros[-1] - zeros[0])
            min_gaps[t] = min(float(gaps.min()), float(wrap))
    finite = min_gaps[np.isfinite(min_gaps)]
    q05 = float(np.quantile(finite, 0.05)) if finite.size else 0.0
    # least M whose grid spacing L/M resolves the 5th-percentile gap
    M95 = int(math.floor(L / q05)) + 1 if q05 > 0 else 0
    extra = {
        "N": N,
        "mean_zero_count": float(counts.mean()),
        "all_counts_even": bool(np.all(counts % 2 == 0)),
        "mean_min_gap": float(finite.mean()) if finite.size else None,
        "gap_q05": q05,
        "M95": M95,
    }
    row = dict.fromkeys(CSV_COLUMNS, "")
    row.update(experiment="zero_stats", dim=1, N=N, M=M95,
               trials=trials, seed=seed)
    return Summary(kind="ZeroStats", rows=(row,),
                   meta=_metadata(0, 0.0), extra=extra)


def homology_experiment(dim: int, N: int, M_list, trials: int,
                        D: int = DEFAULT_DEPTH, seed: int = 0,
                        zero_tol: float | None = None) -> Summary:
    """Homology-match and certification rates vs the closed-form bound.

    Per trial: one reference Betti pair from the fine-grid oracle, then
    per M the cubical Betti pair, the match flag, and the validation
    verdict.  Degenerate and oracle-unresolved trials are tallied but
    excluded from the rates.  Certified-but-mismatched resolved trials
    are soundness exceptions and reported with their seeds.
    """
    if dim not in (1, 2):
        raise ValueError("dim must be 1 or 2")
    M_list = sorted(set(int(M) for M in M_list))
    coeffs = trig_coeffs(dim, N)
    if zero_tol is None:
        zero_tol = default_zero_tol(coeffs)
    m = spectral_moments(coeffs)
    validate = validate_1d if dim == 1 else validate_2d
    bound_fn = bound_1d_periodic if dim == 1 else bound_2d_periodic
    M_ref = default_reference_M(max(M_list), N)

    tallies = {M: {"match": 0, "certified": 0, "degenerate": 0,
                   "unresolved": 0, "resolved": 0} for M in M_list}
    exceptions = []
    records = []
    patterns = default_patterns()  # load once; validate_2d reuses it
    for t in range(trials):
        trial_seed = derive_seed(seed, t)
        r = draw_realization(coeffs, trial_seed)
        ref = reference_betti(r, M_ref, zero_tol)
        per_M = {}
        for M in M_list:
            grid = sign_grid(r, M, zero_tol)
            if dim == 2:
                outcome = validate(r, M, D, zero_tol, patterns=patterns)
            else:
                outcome = validate(r, M, D, zero_tol)
            degenerate = grid.zero_count > 0 or outcome.status == DEGENERATE
            certified = outcome.status == CERTIFIED
            unresolved = ref is None
            match = (not unresolved
                     and homology_match(betti_pair(grid), ref))
            tally = tallies[M]
            if degenerate:
                tally["degenerate"] += 1
            if unresolved:
                tally["unresolved"] += 1
            if not degenerate and not unresolved:
                tally["resolved"] += 1
                tally["match"] += int(match)
                tally["certified"] += int(certified)
                if certified and not match:
                    exceptions.append({"trial": t, "seed": int(trial_seed),
                                       "M": M})
            per_M[M] = {"certified": certified, "degenerate": degenerate,
                        "match": match, "unresolved": unresolved}
        records.append(TrialRecord(index=t, seed=int(trial_seed),
                                   per_M=per_M))

    rows = []
    for M in M_list:
        tally = tallies[M]
        n = tally["resolved"]
        rate_match = tally["match"] / n if n else 0.0
        rate_cert = tally["certified"] / n if n else 0.0
        ci_lo, ci_hi = wilson_interval(tally["match"], n)
        cert_lo, cert_hi = wilson_interval(tally["certified"], n)
        rows.append({
            "experiment": f"homology_{dim}d", "dim": dim, "N": N, "M": M,
            "trials": trials, "seed": seed,
            "rate_match": rate_match, "ci_lo": ci_lo, "ci_hi": ci_hi,
            "rate_certified": rate_cert, "cert_lo": cert_lo,
            "cert_hi": cert_hi, "bound": bound_fn(m, M).bound,
            "degenerate": tally["degenerate"],
            "unresolved": tally["unresolved"],
        })
    return Summary(kind=f"Homology{dim}D", rows=tuple(rows),
                   meta=_metadata(D, zero_tol),
                   extra={"soundness_exceptions": exceptions,
                          "M_ref": M_ref, "records": records})


def orthant_convergence(pattern, coeffs, delta_list, samples: int,
                        seed: int) -> Summary:
    """Rescaled orthant probability along shrinking deltas vs its limit."""
    if isinstance(pattern, str):
        pattern = PATTERNS[pattern]
    deltas = sorted(delta_list, reverse=True)
    if deltas != list(delta_list):
        raise ValueError("delta_list must be decreasing")
    limit = prop41_limit(pattern.signs, pattern.v1_limit)
    values = [asymptotic_functional(coeffs, coeffs.L, pattern, d,
                                    samples=samples, seed=derive_seed(seed, i))
              for i, d in enumerate(deltas)]
    extra = {"pattern": pattern.name, "deltas": deltas,
             "functional": values, "limit": limit}
    row = dict.fromkeys(CSV_COLUMNS, "")
    row.update(experiment="orthant_convergence", dim=pattern.dim,
               trials=samples, seed=seed)
    return Summary(kind="OrthantConvergence", rows=(row,),
                   meta=_metadata(0, 0.0), extra=extra)


def _format_cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_results(summary: Summary, path: str, format: str = "csv") -> None:
    """Persist a Summary; CSV carries a '#'-prefixed metadata header."""
    if format == "csv":
        buf = io.StringIO()
        for k, v in summary.meta.items():
            buf.write(f"# {k}={_format_cell(v)}\n")
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in summary.rows:
            writer.writerow({k: _format_cell(row.get(k, "")) for k in CSV_COLUMNS})
        data = buf.getvalue()
    elif format == "json":
        payload = {"kind": summary.kind, "meta": summary.meta,
                   "rows": list(summary.rows),
                   "extra": {k: v for k, v in summary.extra.items()
                             if k != "records"}}
        data = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        raise ValueError("format must be csv or json")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(data)


def read_results(path: str) -> Summary:
    """Parse a CSV written by write_results (inverse up to column typing)."""
    meta = {}
    rows = []
    with open(path, encoding="utf-8") as fh:
        body = []
        for line in fh:
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                try:
                    meta[k] = json.loads(v)
                except json.JSONDecodeError:
                    meta[k] = v
            else:
                body.append(line)
        for raw in csv.DictReader(body):
            row = {}
            for k, v in raw.items():
                if v == "":
                    row[k] = ""
                else:
                    try:
                        row[k] = json.loads(v)
                    except json.JSONDecodeError:
                        row[k] = v
            rows.append(row)
    kind = rows[0]["experiment"] if rows else "unknown"
    return Summary(kind=kind, rows=tuple(rows), meta=meta)

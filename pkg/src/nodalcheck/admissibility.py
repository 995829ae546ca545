"""Double crossovers, dyadic recursion and forbidden-pattern admissibility.

The 2D checks work on the 3x3 stencil of a square (corners, edge
midpoints, center).  A stencil of strict signs is encoded as a 9-bit
integer (bit i set iff position i is positive, row-major), and each
pattern library is compiled to a 512-entry lookup table, so dyadic
sweeps over millions of subsquares reduce to strided slicing plus a
table lookup.

Admissibility in the source definitions quantifies over all dyadic
levels; a machine checks finitely many, so ``Certified`` here always
means "no violation down to depth D" with D recorded in the outcome.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np

from .fields import Realization1D, Realization2D, evaluate_grid_2d

__all__ = [
    "Stencil",
    "SignPattern",
    "PatternLibrary",
    "PatternCollection",
    "ValidationOutcome",
    "DegenerateSampleError",
    "double_crossover",
    "interval_admissible",
    "load_patterns",
    "default_patterns",
    "count_surviving",
    "forbidden_in_stencil",
    "b_admissible",
    "i4_admissible",
    "i5_admissible",
    "i_admissible",
    "validate_1d",
    "validate_2d",
]

CERTIFIED = "Certified"
NOT_CERTIFIED = "NotCertified"
DEGENERATE = "Degenerate"

ENV_PATTERN_PATH = "NODALCHECK_PATTERNS"

# expected survivor counts among the 512 stencil assignments
CHECKSUM_B = 66
CHECKSUM_I4 = 92
CHECKSUM_I = 90


class DegenerateSampleError(ValueError):
    """A sample needed by an admissibility check is zero-flagged."""


@dataclass(frozen=True)
class Stencil:
    """Signs at a Line3 (3 collinear points) or Grid3x3 (row-major 9 points) stencil."""

    kind: str
    values: tuple

    def __post_init__(self):
        expected = {"Line3": 3, "Grid3x3": 9}
        if self.kind not in expected:
            raise ValueError("kind must be Line3 or Grid3x3")
        if len(self.values) != expected[self.kind]:
            raise ValueError(f"{self.kind} stencil needs {expected[self.kind]} values")


# the dihedral group of the square acting on row-major 3x3 positions
def _dihedral_perms() -> list:
    def pos(r, c):
        return 3 * r + c

    transforms = [
        lambda r, c: (r, c),
        lambda r, c: (c, 2 - r),
        lambda r, c: (2 - r, 2 - c),
        lambda r, c: (2 - c, r),
        lambda r, c: (r, 2 - c),
        lambda r, c: (2 - r, c),
        lambda r, c: (c, r),
        lambda r, c: (2 - c, 2 - r),
    ]
    perms = []
    for t in transforms:
        perms.append(tuple(pos(*t(r, c)) for r in range(3) for c in range(3)))
    return perms

_DIHEDRAL = _dihedral_perms()


@dataclass(frozen=True)
class SignPattern:
    """A constraint mask on the 3x3 stencil: +1 / -1 required, 0 unconstrained."""

    mask: tuple
    id: str

    def __post_init__(self):
        if len(self.mask) != 9 or any(v not in (-1, 0, 1) for v in self.mask):
            raise ValueError("mask must be 9 values in {-1, 0, +1}")
        if sum(v != 0 for v in self.mask) < 3:
            raise ValueError("pattern must constrain at least 3 positions")

    def canonical(self) -> tuple:
        """Lexicographic minimum over dihedral symmetry and polarity flip."""
        best = None
        for perm in _DIHEDRAL:
            img = tuple(self.mask[perm[i]] for i in range(9))
            for pol in (1, -1):
                cand = tuple(pol * v for v in img)
                if best is None or cand < best:
                    best = cand
        return best

    def orbit(self) -> list:
        """All distinct masks in the dihedral-times-polarity orbit."""
        seen = set()
        for perm in _DIHEDRAL:
            img = tuple(self.mask[perm[i]] for i in range(9))
            for pol in (1, -1):
                seen.add(tuple(pol * v for v in img))
        return sorted(seen)

    def matches(self, values) -> bool:
        return all(m == 0 or m == v for m, v in zip(self.mask, values))


def _mask_bits(mask) -> tuple:
    """(constrained-position bits, required-plus bits) for code matching."""
    cmask = want = 0
    for i, v in enumerate(mask):
        if v != 0:
            cmask |= 1 << i
            if v > 0:
                want |= 1 << i
    return cmask, want


@dataclass(frozen=True)
class PatternLibrary:
    """A named forbidden-pattern library with its symmetry closure."""

    name: str
    base_patterns: tuple
    closure: tuple = field(default=())

    @staticmethod
    def build(name: str, base_patterns) -> "PatternLibrary":
        closed = {}
        for p in base_patterns:
            for j, mask in enumerate(p.orbit()):
                key = mask
                if key not in closed:
                    closed[key] = SignPattern(mask=mask, id=f"{p.id}/{j}")
        closure = tuple(closed[k] for k in sorted(closed))
        return PatternLibrary(name=name, base_patterns=tuple(base_patterns),
                              closure=closure)

    def forbidden_table(self) -> np.ndarray:
        return _forbidden_table(self.closure)


def _forbidden_table(patterns) -> np.ndarray:
    """512-entry bool table: code -> contains some pattern of `patterns`."""
    table = np.zeros(512, dtype=bool)
    codes = np.arange(512)
    for p in patterns:
        cmask, want = _mask_bits(p.mask)
        table |= (codes & cmask) == want
    return table


@dataclass(frozen=True)
class PatternCollection:
    """The three libraries B, I4, I5 plus the combined interior library."""

    B: PatternLibrary
    I4: PatternLibrary
    I5: PatternLibrary

    @property
    def I(self) -> PatternLibrary:
        return PatternLibrary.build(
            "I", self.I4.base_patterns + self.I5.base_patterns
        )


@dataclass(frozen=True)
class ValidationOutcome:
    status: str
    max_depth_checked: int
    violations: tuple = ()
    zero_flag_count: int = 0

    def __post_init__(self):
        if self.status == CERTIFIED and (self.violations or self.zero_flag_count):
            raise ValueError("Certified outcome cannot carry violations or zero flags")

    @property
    def certified(self) -> bool:
        return self.status == CERTIFIED


def double_crossover(v_left: float, v_mid: float, v_right: float) -> bool:
    """True iff (sigma*left >= 0, sigma*mid <= 0, sigma*right >= 0) for some sigma."""
    for sigma in (1.0, -1.0):
        if sigma * v_left >= 0 and sigma * v_mid <= 0 and sigma * v_right >= 0:
            return True
    return False


def _crossover_mask(v: np.ndarray, h: int) -> np.ndarray:
    """Vectorized double-crossover test on triples (v[i], v[i+h], v[i+2h]), i = 0, 2h, 4h, ..."""
    left = v[: v.size - 2 * h : 2 * h]
    mid = v[h : v.size - h : 2 * h]
    right = v[2 * h :: 2 * h]
    up = (left >= 0) & (mid <= 0) & (right >= 0)
    dn = (left <= 0) & (mid >= 0) & (right <= 0)
    return up | dn


def interval_admissible(r: Realization1D, interval, D: int) -> ValidationOutcome:
    """Depth-truncated admissibility of one interval for a 1D realization.

    Checks every dyadic subinterval of depth 0..D for a double
    crossover.  Certified means none was found down to depth D (a
    necessary finite check of the full countable condition).
    """
    alpha, beta = float(interval[0]), float(interval[1])
    if not (0.0 <= alpha < beta <= r.coeffs.L):
        raise ValueError("interval must be a nondegenerate subinterval of [0, L]")
    if D < 0:
        raise ValueError("depth D must be nonnegative")
    n_fine = 1 << (D + 1)
    xs = alpha + (beta - alpha) * np.arange(n_fine + 1) / n_fine
    v = r(xs)
    violations = []
    for n in range(D + 1):
        h = 1 << (D - n)
        hits = np.flatnonzero(_crossover_mask(v, h))
        violations.extend((int(k), n, "double-crossover") for k in hits)
    if violations:
        return ValidationOutcome(NOT_CERTIFIED, D, tuple(sorted(violations)))
    return ValidationOutcome(CERTIFIED, D)


# ---------------------------------------------------------------------------
# Pattern file parsing


def load_patterns(text: str) -> PatternCollection:
    """Parse a pattern file and validate the survivor checksums.

    The file holds blocks ``#<lib>:<id>`` followed by three lines of
    three characters from ``{+, -, .}``; lines starting with ``//`` are
    comments.  A checksum mismatch rejects the whole file, since it
    means the transcription is wrong.
    """
    lines = [ln.rstrip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("//")]
    by_lib: dict = {"B": [], "I4": [], "I5": []}
    i = 0
    while i < len(lines):
        header = lines[i]
        if not header.startswith("#") or ":" not in header:
            raise ValueError(f"expected pattern header, got {header!r}")
        lib, pat_id = header[1:].split(":", 1)
        if lib not in by_lib:
            raise ValueError(f"unknown library {lib!r} in pattern file")
        rows = lines[i + 1 : i + 4]
        if len(rows) != 3 or any(len(row) != 3 for row in rows):
            raise ValueError(f"pattern {pat_id!r} must have 3 rows of 3 characters")
        lut = {"+": 1, "-": -1, ".": 0}
        try:
            mask = tuple(lut[c] for row in rows for c in row)
        except KeyError as exc:
            raise ValueError(f"bad character {exc} in pattern {pat_id!r}") from exc
        by_lib[lib].append(SignPattern(mask=mask, id=pat_id))
        i += 4

    expected_base = {"B": 7, "I4": 16, "I5": 1}
    for lib, want in expected_base.items():
        if len(by_lib[lib]) != want:
            raise ValueError(
                f"library {lib} has {len(by_lib[lib])} base patterns, expected {want}"
            )

    coll = PatternCollection(
        B=PatternLibrary.build("B", by_lib["B"]),
        I4=PatternLibrary.build("I4", by_lib["I4"]),
        I5=PatternLibrary.build("I5", by_lib["I5"]),
    )
    checks = [
        (coll.B, CHECKSUM_B),
        (coll.I4, CHECKSUM_I4),
        (coll.I, CHECKSUM_I),
    ]
    for lib, want in checks:
        got = count_surviving(lib)
        if got != want:
            raise ValueError(
                f"pattern library {lib.name} checksum mismatch: "
                f"{got} surviving stencils, expected {want}"
            )
    return coll


@lru_cache(maxsize=1)
def default_patterns() -> PatternCollection:
    """The shipped pattern file, or the one named by $NODALCHECK_PATTERNS."""
    path = os.environ.get(ENV_PATTERN_PATH)
    if path:
        with open(path, encoding="utf-8") as fh:
            return load_patterns(fh.read())
    text = resources.files("nodalcheck").joinpath("patterns.txt").read_text()
    return load_patterns(text)


def count_surviving(lib: PatternLibrary) -> int:
    """Number of the 512 stencil assignments containing no pattern of the library."""
    return int(512 - np.count_nonzero(lib.forbidden_table()))


def _stencil_code(values) -> int:
    code = 0
    for i, v in enumerate(values):
        if v == 0:
            raise DegenerateSampleError("zero-flagged sample in stencil")
        if v > 0:
            code |= 1 << i
    return code


def forbidden_in_stencil(values, lib: PatternLibrary) -> list:
    """Ids of every closed-library pattern matched by the 9 stencil signs."""
    if len(values) != 9:
        raise ValueError("a Grid3x3 stencil has 9 values")
    _stencil_code(values)  # raises on zero-flagged input
    signs = [1 if v > 0 else -1 for v in values]
    return [p.id for p in lib.closure if p.matches(signs)]


# ---------------------------------------------------------------------------
# Dyadic sweeps over squares


def _sign_array(values: np.ndarray, zero_tol: float) -> tuple:
    signs = np.zeros(values.shape, dtype=np.int8)
    signs[values > zero_tol] = 1
    signs[values < -zero_tol] = -1
    return signs, int(np.count_nonzero(signs == 0))


def _codes_2d(positive: np.ndarray, x0, y0, h: int, nx: int, ny: int) -> np.ndarray:
    """9-bit stencil codes for subsquares with corners (x0 + 2h*i, y0 + 2h*j).

    ``positive`` is a boolean array over the fine grid; row-major bit
    order matches the pattern masks (rows = first axis).
    """
    codes = np.zeros((nx, ny), dtype=np.int16)
    bit = 0
    for a in range(3):
        for b in range(3):
            sl = positive[
                x0 + a * h : x0 + a * h + 2 * h * (nx - 1) + 1 : 2 * h,
                y0 + b * h : y0 + b * h + 2 * h * (ny - 1) + 1 : 2 * h,
            ]
            codes |= sl.astype(np.int16) << bit
            bit += 1
    return codes


def _pattern_ids_for_code(code: int, lib: PatternLibrary) -> list:
    values = [1 if code & (1 << i) else -1 for i in range(9)]
    return [p.id for p in lib.closure if p.matches(values)]


_MAX_VIOLATIONS = 200


def _square_outcome(r: Realization2D, corner, delta: float, D: int, lib: PatternLibrary,
                    zero_tol: float, shifts: bool, collect_all: bool) -> ValidationOutcome:
    """Shared dyadic sweep for b_admissible / i_admissible on a single square."""
    L = r.coeffs.L
    cx, cy = float(corner[0]), float(corner[1])
    pad = 0.5 * delta if shifts else 0.0
    if not (0.0 <= cx - pad and cx + delta + pad <= L * (1 + 1e-12)
            and 0.0 <= cy - pad and cy + delta + pad <= L * (1 + 1e-12)):
        raise ValueError("square (with its delta/2 neighborhood, if required) "
                         "must lie inside [0, L]^2")
    unit = 1 << (D + 1)  # fine steps across the square
    margin = unit // 2 if shifts else 0
    total = unit + 2 * margin
    step = delta / unit
    xs = cx - margin * step + np.arange(total + 1) * step
    ys = cy - margin * step + np.arange(total + 1) * step
    signs, zeros = _sign_array(evaluate_grid_2d(r, xs, ys), zero_tol)
    if zeros:
        return ValidationOutcome(DEGENERATE, D, zero_flag_count=zeros)
    positive = signs > 0
    table = lib.forbidden_table()
    offsets = [(0, 0)]
    violations = []
    for n in range(D + 1):
        h = 1 << (D - n)
        nside = 1 << n
        if shifts:
            offsets = [(0, 0), (h, 0), (-h, 0), (0, h), (0, -h)]
        for ox, oy in offsets:
            codes = _codes_2d(positive, margin + ox, margin + oy, h, nside, nside)
            bad = np.argwhere(table[codes])
            for i, j in bad:
                for pid in _pattern_ids_for_code(int(codes[i, j]), lib):
                    violations.append(((int(i), int(j)), n, pid))
        if violations and not collect_all:
            break
    if violations:
        return ValidationOutcome(NOT_CERTIFIED, D, tuple(sorted(violations)[:_MAX_VIOLATIONS]))
    return ValidationOutcome(CERTIFIED, D)


def b_admissible(r: Realization2D, square, D: int, zero_tol: float = 0.0,
                 collect_all: bool = False,
                 patterns: PatternCollection | None = None) -> ValidationOutcome:
    """Depth-truncated B-admissibility of one square (corner, side length)."""
    corner, delta = square
    lib = (patterns or default_patterns()).B
    return _square_outcome(r, corner, float(delta), D, lib, zero_tol,
                           shifts=False, collect_all=collect_all)


def _stencil_values(r: Realization2D, corner, delta: float) -> list:
    cx, cy = float(corner[0]), float(corner[1])
    xs = cx + np.array([0.0, 0.5, 1.0]) * delta
    ys = cy + np.array([0.0, 0.5, 1.0]) * delta
    vals = evaluate_grid_2d(r, xs, ys)
    return [vals[a, b] for a in range(3) for b in range(3)]


def _single_square_admissible(r, square, lib) -> bool:
    corner, delta = square
    vals = _stencil_values(r, corner, float(delta))
    signs = []
    for v in vals:
        if v == 0.0:
            raise DegenerateSampleError("zero sample at a stencil point")
        signs.append(1 if v > 0 else -1)
    return not forbidden_in_stencil(signs, lib)


def i4_admissible(r: Realization2D, square,
                  patterns: PatternCollection | None = None) -> bool:
    """I4-admissibility of a single square's own stencil (no dyadic recursion)."""
    return _single_square_admissible(r, square, (patterns or default_patterns()).I4)


def i5_admissible(r: Realization2D, square,
                  patterns: PatternCollection | None = None) -> bool:
    """I5-admissibility of a single square's own stencil (no dyadic recursion)."""
    return _single_square_admissible(r, square, (patterns or default_patterns()).I5)


def i_admissible(r: Realization2D, square, D: int, zero_tol: float = 0.0,
                 collect_all: bool = False,
                 patterns: PatternCollection | None = None) -> ValidationOutcome:
    """Depth-truncated I-admissibility of one square.

    Every dyadic subsquare, together with its four half-side shifts,
    must avoid the I4 and I5 configurations; the shifts reach into the
    delta/2 neighborhood of the square, which therefore must lie inside
    the domain.
    """
    corner, delta = square
    lib = (patterns or default_patterns()).I
    return _square_outcome(r, corner, float(delta), D, lib, zero_tol,
                           shifts=True, collect_all=collect_all)


# ---------------------------------------------------------------------------
# Whole-grid validation criteria


def validate_1d(r: Realization1D, M: int, D: int, zero_tol: float = 0.0) -> ValidationOutcome:
    """Certify the M-discretization of a 1D realization to dyadic depth D.

    Certified iff no grid sample is zero-flagged and no dyadic
    subinterval (depth <= D) of any grid interval carries a double
    crossover; by the 1D validation criterion this certifies that the
    homology of the cubical approximation is correct, up to the depth
    truncation recorded in the outcome.
    """
    if M < 1:
        raise ValueError("M must be at least 1")
    L = r.coeffs.L
    unit = 1 << (D + 1)
    n_fine = M * unit
    v = r(np.arange(n_fine + 1) * (L / n_fine))
    grid_vals = v[::unit]
    zero_flags = int(np.count_nonzero(np.abs(grid_vals) <= zero_tol))
    if zero_flags:
        return ValidationOutcome(DEGENERATE, D, zero_flag_count=zero_flags)
    violations = []
    for n in range(D + 1):
        h = 1 << (D - n)
        hits = np.flatnonzero(_crossover_mask(v, h))
        for k in hits:
            start = int(k) * 2 * h  # fine index of the subinterval's left end
            violations.append((start // unit, n, "double-crossover"))
    if violations:
        return ValidationOutcome(NOT_CERTIFIED, D, tuple(sorted(violations)[:_MAX_VIOLATIONS]))
    return ValidationOutcome(CERTIFIED, D)


def boundary_square_count(M: int) -> int:
    """Number of grid squares touching the boundary: M^2 - (M-2)^2."""
    return M * M - (M - 2) * (M - 2)


def validate_2d(r: Realization2D, M: int, D: int, zero_tol: float = 0.0,
                collect_all: bool = False,
                patterns: PatternCollection | None = None) -> ValidationOutcome:
    """Certify the M-discretization of a 2D realization to dyadic depth D.

    Boundary-touching grid squares must be B-admissible and interior
    squares I-admissible (with their four half-shifts), all samples
    nonzero, down to depth D.  The sweep is vectorized over the global
    fine grid of M * 2^(D+1) steps per axis and stops at the first
    violating level unless ``collect_all`` is set.
    """
    if M < 3:
        raise ValueError("M must be at least 3 so that interior squares exist")
    coll = patterns or default_patterns()
    L = r.coeffs.L
    unit = 1 << (D + 1)
    G = M * unit
    xs = np.arange(G + 1) * (L / G)
    signs, zeros = _sign_array(evaluate_grid_2d(r, xs, xs), zero_tol)
    if zeros:
        return ValidationOutcome(DEGENERATE, D, zero_flag_count=zeros)
    positive = signs > 0
    table_b = coll.B.forbidden_table()
    lib_i = coll.I
    table_i = lib_i.forbidden_table()

    violations = []
    for n in range(D + 1):
        h = 1 << (D - n)
        nside = M * (1 << n)
        codes = _codes_2d(positive, 0, 0, h, nside, nside)
        parent = np.arange(nside) // (1 << n)
        on_edge = (parent == 0) | (parent == M - 1)
        boundary = on_edge[:, None] | on_edge[None, :]

        bad_b = np.argwhere(table_b[codes] & boundary)
        for i, j in bad_b:
            sq = (int(parent[i]), int(parent[j]))
            for pid in _pattern_ids_for_code(int(codes[i, j]), coll.B):
                violations.append((sq, n, pid))

        interior = ~boundary
        for ox, oy in ((0, 0), (h, 0), (-h, 0), (0, h), (0, -h)):
            # shifted stencils fall off the grid only at the outermost
            # subsquares, which are never interior; restrict the index
            # range accordingly instead of padding
            i0, i1 = (1 if ox < 0 else 0), (nside - 1 if ox > 0 else nside)
            j0, j1 = (1 if oy < 0 else 0), (nside - 1 if oy > 0 else nside)
            codes_s = _codes_2d(positive, i0 * 2 * h + ox, j0 * 2 * h + oy,
                                h, i1 - i0, j1 - j0)
            bad_i = np.argwhere(table_i[codes_s] & interior[i0:i1, j0:j1])
            for i, j in bad_i:
                sq = (int(parent[i0 + i]), int(parent[j0 + j]))
                for pid in _pattern_ids_for_code(int(codes_s[i, j]), lib_i):
                    violations.append((sq, n, pid))
        if violations and not collect_all:
            break
    if violations:
        return ValidationOutcome(NOT_CERTIFIED, D, tuple(sorted(violations)[:_MAX_VIOLATIONS]))
    return ValidationOutcome(CERTIFIED, D)

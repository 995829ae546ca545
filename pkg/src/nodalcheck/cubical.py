"""Sign grids on the equidistant M-discretization and their cubical sets.

Grid points are x_k = k * L / M componentwise.  The cubical set for a
sign sigma contains, for every compatible grid index k in {0..M}^dim,
the unit cell attached to the upper-right of k in index space, so the
cell complex tiles [0, M+1]^dim.  A zero-flagged sample is compatible
with both signs (the defining inequality is weak).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .fields import Realization1D, Realization2D, evaluate_grid_2d

__all__ = ["SignGrid", "CubicalSet", "sign_grid", "cubical_approx", "negate"]

PLUS = 1
MINUS = -1
ZERO_FLAGGED = 0


@dataclass(frozen=True)
class SignGrid:
    """Sampled signs on {0..M}^dim: +1, -1 or 0 (zero-flagged)."""

    dim: int
    M: int
    signs: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.signs, dtype=np.int8).copy()
        s.flags.writeable = False
        object.__setattr__(self, "signs", s)
        if s.shape != (self.M + 1,) * self.dim:
            raise ValueError("sign array shape must be (M+1,)^dim")

    @property
    def zero_count(self) -> int:
        return int(np.count_nonzero(self.signs == ZERO_FLAGGED))

    def to_json(self) -> str:
        chars = np.array(["0", "+", "-"])  # index by sign value
        rows2d = self.signs if self.dim == 2 else self.signs[None, :]
        rows = ["".join(chars[row]) for row in rows2d]
        return json.dumps({"dim": self.dim, "M": self.M, "rows": rows})

    @staticmethod
    def from_json(text: str) -> "SignGrid":
        payload = json.loads(text)
        lut = {"+": PLUS, "-": MINUS, "0": ZERO_FLAGGED}
        rows = [[lut[c] for c in row] for row in payload["rows"]]
        signs = np.asarray(rows, dtype=np.int8)
        if payload["dim"] == 1:
            signs = signs[0]
        return SignGrid(dim=payload["dim"], M=payload["M"], signs=signs)


@dataclass(frozen=True)
class CubicalSet:
    """Top-dimensional cells of a cubical approximation, as a boolean mask over {0..M}^dim."""

    dim: int
    M: int
    cells: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.cells, dtype=bool).copy()
        c.flags.writeable = False
        object.__setattr__(self, "cells", c)
        if c.shape != (self.M + 1,) * self.dim:
            raise ValueError("cell mask shape must be (M+1,)^dim")

    @property
    def cell_indices(self) -> list:
        idx = np.argwhere(self.cells)
        if self.dim == 1:
            return [int(i) for (i,) in idx]
        return [tuple(int(v) for v in row) for row in idx]

    def to_json(self) -> str:
        return json.dumps({"dim": self.dim, "M": self.M, "cells": self.cell_indices})


def sign_grid(r, M: int, zero_tol: float = 0.0) -> SignGrid:
    """Sample the sign of a realization at the M-discretization of [0, L]^dim.

    Values in (-zero_tol, zero_tol) inclusive are zero-flagged; with the
    strict default only exact floating-point zeros are flagged.
    """
    if M < 1:
        raise ValueError("M must be at least 1")
    if zero_tol < 0:
        raise ValueError("zero_tol must be nonnegative")
    L = r.coeffs.L
    xs = np.arange(M + 1) * (L / M)
    if isinstance(r, Realization1D):
        vals = r(xs)
    elif isinstance(r, Realization2D):
        vals = evaluate_grid_2d(r, xs, xs)
    else:
        raise TypeError("r must be a realization")
    signs = np.zeros(vals.shape, dtype=np.int8)
    signs[vals > zero_tol] = PLUS
    signs[vals < -zero_tol] = MINUS
    return SignGrid(dim=r.dim, M=M, signs=signs)


def cubical_approx(grid: SignGrid, sigma: int) -> CubicalSet:
    """Cells whose grid sample is compatible with sigma (zero-flagged fits both)."""
    if sigma not in (PLUS, MINUS):
        raise ValueError("sigma must be +1 or -1")
    cells = (grid.signs == sigma) | (grid.signs == ZERO_FLAGGED)
    return CubicalSet(dim=grid.dim, M=grid.M, cells=cells)


def negate(grid: SignGrid) -> SignGrid:
    return SignGrid(dim=grid.dim, M=grid.M, signs=-grid.signs)

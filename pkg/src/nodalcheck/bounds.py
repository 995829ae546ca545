"""Closed-form probability lower bounds for correct homology computation.

All bounds have the shape 1 - const / M^2 where M is the grid
resolution; the constant is driven by a moment ratio of the coefficient
sequence.  A bound can be negative for small M, which makes it vacuous
but still well defined; callers get the value as-is with a flag.

The periodic-series bounds keep only the leading 1/M^2 term (the
higher-order remainder is dropped, not estimated); ``leading_only``
records this.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .fields import SpectralMoments1D, SpectralMoments2D

__all__ = [
    "BoundResult",
    "c0_periodic",
    "bound_1d_generic",
    "bound_1d_periodic",
    "c1_c2_periodic",
    "bound_2d_generic",
    "bound_2d_periodic",
    "bound_2d_torus",
    "closed_form_scaling",
    "min_M",
]


@dataclass(frozen=True)
class BoundResult:
    """A probability lower bound 1 - const/M^2 with its ingredients."""

    bound: float
    constants: dict = field(default_factory=dict)
    M: int = 0
    leading_only: bool = False

    def __post_init__(self):
        if self.bound > 1.0:
            raise ValueError("a probability lower bound cannot exceed 1")

    @property
    def vacuous(self) -> bool:
        return self.bound <= 0.0


def moment_ratio_1d(m: SpectralMoments1D) -> float:
    """(A0 A2 - A1^2) / (A0^{3/2} A1^{1/2}); the scale-free 1D constant."""
    A0, A1, A2 = m[0], m[1], m[2]
    if A0 <= 0 or A1 <= 0:
        raise ValueError("moments A0 and A1 must be positive")
    num = A0 * A2 - A1 * A1
    if num <= 0:
        # equality holds only when a single frequency carries all mass,
        # which breaks the nondegeneracy the bound needs
        raise ValueError("A0*A2 - A1^2 must be positive")
    return num / (A0**1.5 * math.sqrt(A1))


def c0_periodic(m: SpectralMoments1D, L: float) -> float:
    """Double-crossover density constant for the periodic 1D series.

    The probability of a double crossover on an interval of length
    delta is at most C0 * delta^3 with
    C0 = (pi^2 / 16 L^3) * (A0 A2 - A1^2) / (A0^{3/2} A1^{1/2}).
    """
    if L <= 0:
        raise ValueError("L must be positive")
    return (math.pi**2 / (16.0 * L**3)) * moment_ratio_1d(m)


def bound_1d_generic(C0: float, length: float, M: int) -> BoundResult:
    """1 - 8 C0 length^3 / (3 M^2): the generic 1D certification bound."""
    if C0 <= 0 or length <= 0:
        raise ValueError("C0 and length must be positive")
    if M < 1:
        raise ValueError("M must be at least 1")
    bound = 1.0 - 8.0 * C0 * length**3 / (3.0 * M * M)
    return BoundResult(bound=bound, constants={"C0": C0}, M=M)


def bound_1d_periodic(m: SpectralMoments1D, M: int) -> BoundResult:
    """Leading-order 1D bound 1 - (pi^2 / 6 M^2) * moment ratio.

    Algebraically identical to bound_1d_generic with C0 = c0_periodic
    (the L^3 factors cancel), so the value is L-free.
    """
    if M < 1:
        raise ValueError("M must be at least 1")
    ratio = moment_ratio_1d(m)
    bound = 1.0 - (math.pi**2 / 6.0) * ratio / (M * M)
    return BoundResult(bound=bound, constants={"moment_ratio": ratio},
                       M=M, leading_only=True)


def moment_ratio_2d(m: SpectralMoments2D) -> float:
    """(A20 + A11 + A02)^2 / (A00 A01 A10 A11)^{1/2}; the scale-free 2D constant."""
    denom = m[0, 0] * m[0, 1] * m[1, 0] * m[1, 1]
    if denom <= 0:
        raise ValueError("moments A00, A01, A10, A11 must be positive")
    num = m[2, 0] + m[1, 1] + m[0, 2]
    if num <= 0:
        raise ValueError("second-order moments must be positive")
    return num * num / math.sqrt(denom)


def c1_c2_periodic(m: SpectralMoments2D, L: float):
    """(C1, C2): per-square pattern probability constants for the 2D series.

    C1 scales boundary-square events (probability <= C1 delta^3), C2
    interior-square events (<= C2 delta^4):
    C1 = (41 pi^2 / 12 L^3) X and C2 = (115 pi^2 / 24 L^4) X with X the
    2D moment ratio.
    """
    if L <= 0:
        raise ValueError("L must be positive")
    X = moment_ratio_2d(m)
    C1 = (41.0 * math.pi**2 / (12.0 * L**3)) * X
    C2 = (115.0 * math.pi**2 / (24.0 * L**4)) * X
    return C1, C2


def bound_2d_generic(C1: float, C2: float, L: float, M: int) -> BoundResult:
    """1 - (24 C1 L^3 + 20 C2 L^4) / (3 M^2): the generic 2D certification bound."""
    if C1 <= 0 or C2 <= 0 or L <= 0:
        raise ValueError("C1, C2 and L must be positive")
    if M < 1:
        raise ValueError("M must be at least 1")
    bound = 1.0 - (24.0 * C1 * L**3 + 20.0 * C2 * L**4) / (3.0 * M * M)
    return BoundResult(bound=bound, constants={"C1": C1, "C2": C2}, M=M)


def bound_2d_periodic(m: SpectralMoments2D, M: int) -> BoundResult:
    """Leading-order 2D bound 1 - (1067 pi^2 / 18 M^2) * moment ratio."""
    if M < 1:
        raise ValueError("M must be at least 1")
    X = moment_ratio_2d(m)
    bound = 1.0 - (1067.0 * math.pi**2 / 18.0) * X / (M * M)
    return BoundResult(bound=bound, constants={"moment_ratio": X},
                       M=M, leading_only=True)


def bound_2d_torus(C2: float, L: float, M: int) -> BoundResult:
    """1 - 4 C2 L^4 / M^2: the 2D bound on the torus (no boundary squares)."""
    if C2 <= 0 or L <= 0:
        raise ValueError("C2 and L must be positive")
    if M < 1:
        raise ValueError("M must be at least 1")
    bound = 1.0 - 4.0 * C2 * L**4 / (M * M)
    return BoundResult(bound=bound, constants={"C2": C2}, M=M)


def closed_form_scaling(dim: int, N: int) -> float:
    """Closed form of the moment ratio for the degree-N trigonometric polynomial.

    1D: (sqrt(6)/180) (N-1)(8N+11) sqrt((N+1)(2N+1)), asymptotically
    (4 sqrt(3)/45) N^3.  2D: (46 N^2 + 51 N - 7)^2 / 900, asymptotically
    (529/225) N^4.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    if dim == 1:
        return (math.sqrt(6.0) / 180.0) * (N - 1) * (8 * N + 11) \
            * math.sqrt((N + 1) * (2 * N + 1))
    if dim == 2:
        return (46.0 * N * N + 51.0 * N - 7.0) ** 2 / 900.0
    raise ValueError("dim must be 1 or 2")


def min_M(bound_fn, target: float) -> int:
    """Least M with bound_fn(M).bound >= target, for monotone bound_fn."""
    if not (0.0 < target < 1.0):
        raise ValueError("target must lie in (0, 1)")
    hi = 1
    while bound_fn(hi).bound < target:
        hi *= 2
        if hi > 1 << 40:
            raise ValueError("bound never reaches the target")
    lo = hi // 2
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if bound_fn(mid).bound >= target:
            hi = mid
        else:
            lo = mid
    return hi

"""Random periodic Fourier series in one and two dimensions.

A coefficient sequence fixes the law of the random field; a realization
is one draw of the Gaussian coefficients.  Everything downstream
(sign grids, admissibility checks, probability bounds) consumes these
two objects.

Randomness contract: all draws come from numpy's Philox counter-based
bit generator keyed through ``SeedSequence``, with per-trial substreams
derived by :func:`derive_seed`.  Normal variates use numpy's
``standard_normal`` (ziggurat); identical ``(coeffs, seed)`` always
reproduces the identical realization.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CoeffSeq1D",
    "CoeffSeq2D",
    "Realization1D",
    "Realization2D",
    "SpectralMoments1D",
    "SpectralMoments2D",
    "trig_coeffs",
    "derive_seed",
    "draw_realization",
    "evaluate",
    "spectral_moments",
    "covariance",
    "coeffs_to_json",
    "coeffs_from_json",
    "realization_to_json",
    "realization_from_json",
]


def _freeze(arr: np.ndarray) -> np.ndarray:
    a = np.asarray(arr, dtype=float).copy()
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class CoeffSeq1D:
    """Deterministic coefficients a_0..a_K of a 1D random Fourier series on [0, L]."""

    L: float
    a: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", _freeze(self.a))
        if self.L <= 0:
            raise ValueError("period L must be positive")
        if self.a.ndim != 1 or self.a.size == 0:
            raise ValueError("a must be a nonempty 1D coefficient sequence")
        if np.count_nonzero(self.a) < 2:
            raise ValueError("at least two coefficients a_k must be nonzero")

    @property
    def K(self) -> int:
        return self.a.size - 1

    @property
    def dim(self) -> int:
        return 1


def _has_valid_2d_pair(a: np.ndarray) -> bool:
    """Check the 2D nondegeneracy condition on the coefficient array.

    There must be indices (k1, l1) with k1, l1 >= 1 and (k2, l2) with
    k1 != k2, l1 != l2 and k1^2 + l1^2 != k2^2 + l2^2 such that both
    coefficients are nonzero.
    """
    nz = np.argwhere(a != 0.0)
    for k1, l1 in nz:
        if k1 < 1 or l1 < 1:
            continue
        for k2, l2 in nz:
            if k1 != k2 and l1 != l2 and k1 * k1 + l1 * l1 != k2 * k2 + l2 * l2:
                return True
    return False


@dataclass(frozen=True)
class CoeffSeq2D:
    """Deterministic coefficients a_{k,l}, 0 <= k, l <= K, of a doubly periodic series."""

    L: float
    a: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", _freeze(self.a))
        if self.L <= 0:
            raise ValueError("period L must be positive")
        if self.a.ndim != 2 or self.a.shape[0] != self.a.shape[1]:
            raise ValueError("a must be a square 2D coefficient array")
        if not _has_valid_2d_pair(self.a):
            raise ValueError(
                "coefficients violate the 2D nondegeneracy condition: need "
                "a_{k1,l1} != 0 with k1,l1 >= 1 and a second nonzero a_{k2,l2} "
                "with k1 != k2, l1 != l2, k1^2+l1^2 != k2^2+l2^2"
            )

    @property
    def K(self) -> int:
        return self.a.shape[0] - 1

    @property
    def dim(self) -> int:
        return 2


@dataclass(frozen=True)
class Realization1D:
    """One sample of the 1D series: coefficients plus 2K+1 standard-normal draws.

    g[2k] multiplies cos(2 pi k x / L) and g[2k-1] multiplies
    sin(2 pi k x / L); the k = 0 term only carries g[0].
    """

    coeffs: CoeffSeq1D
    g: np.ndarray
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "g", _freeze(self.g))
        if self.g.shape != (2 * self.coeffs.K + 1,):
            raise ValueError("g must have exactly 2K+1 entries")

    @property
    def dim(self) -> int:
        return 1

    def __call__(self, x):
        return evaluate(self, x)


@dataclass(frozen=True)
class Realization2D:
    """One sample of the 2D series: g has shape (K+1, K+1, 4).

    The last axis indexes the cos*cos, cos*sin, sin*cos, sin*sin terms,
    in that order.
    """

    coeffs: CoeffSeq2D
    g: np.ndarray
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "g", _freeze(self.g))
        K = self.coeffs.K
        if self.g.shape != (K + 1, K + 1, 4):
            raise ValueError("g must have shape (K+1, K+1, 4)")

    @property
    def dim(self) -> int:
        return 2

    def __call__(self, x):
        return evaluate(self, x)


@dataclass(frozen=True)
class SpectralMoments1D:
    """Moments A_l = sum_k k^{2l} a_k^2 for l = 0..3."""

    A: dict

    def __getitem__(self, ell: int) -> float:
        return self.A[ell]


@dataclass(frozen=True)
class SpectralMoments2D:
    """Moments A_{p,q} = sum_{k,l} k^{2p} l^{2q} a_{k,l}^2 for p + q <= 2."""

    A: dict

    def __getitem__(self, pq) -> float:
        return self.A[tuple(pq)]


def trig_coeffs(dim: int, N: int):
    """Coefficients of the degree-N random trigonometric polynomial (L = 2 pi).

    1D: a_k = 1 for 1 <= k <= N, a_0 = 0.  2D: a_{k,l} = 1 for
    1 <= k, l <= N, zero otherwise.  Requires N >= 2 so that the
    nondegeneracy conditions hold.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    L = 2.0 * np.pi
    if dim == 1:
        a = np.ones(N + 1)
        a[0] = 0.0
        return CoeffSeq1D(L=L, a=a)
    if dim == 2:
        a = np.ones((N + 1, N + 1))
        a[0, :] = 0.0
        a[:, 0] = 0.0
        return CoeffSeq2D(L=L, a=a)
    raise ValueError("dim must be 1 or 2")


def derive_seed(master_seed: int, *indices: int) -> int:
    """Derive a 64-bit substream seed from a master seed and trial indices.

    Uses numpy's SeedSequence hashing, so substreams are independent of
    the order in which trials are executed.
    """
    ss = np.random.SeedSequence([int(master_seed), *[int(i) for i in indices]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def draw_realization(coeffs, seed: int):
    """Draw one realization: i.i.d. N(0,1) Gaussians from the Philox stream `seed`."""
    rng = _rng(seed)
    if isinstance(coeffs, CoeffSeq1D):
        g = rng.standard_normal(2 * coeffs.K + 1)
        return Realization1D(coeffs=coeffs, g=g, seed=int(seed))
    if isinstance(coeffs, CoeffSeq2D):
        K = coeffs.K
        g = rng.standard_normal((K + 1, K + 1, 4))
        return Realization2D(coeffs=coeffs, g=g, seed=int(seed))
    raise TypeError("coeffs must be CoeffSeq1D or CoeffSeq2D")


def _check_domain(x: np.ndarray, L: float):
    if np.any(x < -1e-9 * L) or np.any(x > L * (1 + 1e-9)):
        raise ValueError("evaluation point outside [0, L]")


def evaluate(r, x):
    """Evaluate a realization at a point (or array of points) of [0, L]^dim."""
    if isinstance(r, Realization1D):
        x = np.asarray(x, dtype=float)
        _check_domain(x, r.coeffs.L)
        return _eval_1d(r, x)
    if isinstance(r, Realization2D):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != 2:
            raise ValueError("2D evaluation point must have two components")
        _check_domain(x, r.coeffs.L)
        return _eval_2d(r, x[..., 0], x[..., 1])
    raise TypeError("r must be a Realization1D or Realization2D")


def _eval_1d(r: Realization1D, x: np.ndarray):
    coeffs = r.coeffs
    k = np.arange(coeffs.K + 1)
    phase = 2.0 * np.pi * np.multiply.outer(x, k) / coeffs.L  # (..., K+1)
    gc = coeffs.a * r.g[2 * k]
    gs = np.zeros_like(gc)
    gs[1:] = coeffs.a[1:] * r.g[2 * k[1:] - 1]
    out = np.cos(phase) @ gc + np.sin(phase) @ gs
    return out if out.shape else float(out)


def _eval_2d(r: Realization2D, x1, x2):
    coeffs = r.coeffs
    K = coeffs.K
    k = np.arange(K + 1)
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    p1 = 2.0 * np.pi * np.multiply.outer(x1, k) / coeffs.L
    p2 = 2.0 * np.pi * np.multiply.outer(x2, k) / coeffs.L
    c1, s1 = np.cos(p1), np.sin(p1)  # (..., K+1)
    c2, s2 = np.cos(p2), np.sin(p2)
    a = coeffs.a
    out = (
        np.einsum("...k,kl,...l->...", c1, a * r.g[:, :, 0], c2)
        + np.einsum("...k,kl,...l->...", c1, a * r.g[:, :, 1], s2)
        + np.einsum("...k,kl,...l->...", s1, a * r.g[:, :, 2], c2)
        + np.einsum("...k,kl,...l->...", s1, a * r.g[:, :, 3], s2)
    )
    return out if out.shape else float(out)


def evaluate_grid_2d(r: Realization2D, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """Evaluate a 2D realization on the tensor grid x1 (x) x2.

    Uses the separable structure of the series: four small matrix
    products instead of len(x1)*len(x2) independent sums.  Returns an
    array of shape (len(x1), len(x2)).
    """
    coeffs = r.coeffs
    K = coeffs.K
    k = np.arange(K + 1)
    p1 = 2.0 * np.pi * np.outer(x1, k) / coeffs.L  # (n1, K+1)
    p2 = 2.0 * np.pi * np.outer(x2, k) / coeffs.L
    c1, s1 = np.cos(p1), np.sin(p1)
    c2, s2 = np.cos(p2), np.sin(p2)
    a = coeffs.a
    return (
        c1 @ (a * r.g[:, :, 0]) @ c2.T
        + c1 @ (a * r.g[:, :, 1]) @ s2.T
        + s1 @ (a * r.g[:, :, 2]) @ c2.T
        + s1 @ (a * r.g[:, :, 3]) @ s2.T
    )


def spectral_moments(coeffs):
    """Spectral moments of a coefficient sequence (finite exact sums)."""
    if isinstance(coeffs, CoeffSeq1D):
        k = np.arange(coeffs.K + 1, dtype=float)
        a2 = coeffs.a**2
        return SpectralMoments1D(
            A={ell: float(np.sum(k ** (2 * ell) * a2)) for ell in range(4)}
        )
    if isinstance(coeffs, CoeffSeq2D):
        K = coeffs.K
        k = np.arange(K + 1, dtype=float)
        a2 = coeffs.a**2
        A = {}
        for p in range(3):
            for q in range(3 - p):
                A[(p, q)] = float(k ** (2 * p) @ a2 @ k ** (2 * q))
        return SpectralMoments2D(A=A)
    raise TypeError("coeffs must be CoeffSeq1D or CoeffSeq2D")


def covariance(coeffs, lag):
    """Stationary covariance r(lag) of the random series.

    1D: sum_k a_k^2 cos(2 pi k lag / L).  2D: the product-cosine double
    sum with lag = (d1, d2).  Defined for every lag (entire, periodic).
    """
    if isinstance(coeffs, CoeffSeq1D):
        lag = np.asarray(lag, dtype=float)
        k = np.arange(coeffs.K + 1)
        phase = 2.0 * np.pi * np.multiply.outer(lag, k) / coeffs.L
        out = np.cos(phase) @ (coeffs.a**2)
        return out if out.shape else float(out)
    if isinstance(coeffs, CoeffSeq2D):
        lag = np.asarray(lag, dtype=float)
        k = np.arange(coeffs.K + 1)
        p1 = 2.0 * np.pi * np.multiply.outer(lag[..., 0], k) / coeffs.L
        p2 = 2.0 * np.pi * np.multiply.outer(lag[..., 1], k) / coeffs.L
        out = np.einsum("...k,kl,...l->...", np.cos(p1), coeffs.a**2, np.cos(p2))
        return out if out.shape else float(out)
    raise TypeError("coeffs must be CoeffSeq1D or CoeffSeq2D")


# ---------------------------------------------------------------------------
# JSON interchange: {dim, L, K, a} for coefficients, plus {seed, g} for draws.


def coeffs_to_json(coeffs) -> str:
    payload = {
        "dim": coeffs.dim,
        "L": coeffs.L,
        "K": coeffs.K,
        "a": coeffs.a.tolist(),
    }
    return json.dumps(payload)


def coeffs_from_json(text: str):
    payload = json.loads(text)
    dim = payload["dim"]
    a = np.asarray(payload["a"], dtype=float)
    if dim == 1:
        return CoeffSeq1D(L=float(payload["L"]), a=a)
    if dim == 2:
        return CoeffSeq2D(L=float(payload["L"]), a=a)
    raise ValueError(f"unsupported dim {dim!r} in coefficient file")


def realization_to_json(r) -> str:
    payload = json.loads(coeffs_to_json(r.coeffs))
    payload["seed"] = r.seed
    payload["g"] = r.g.tolist()
    return json.dumps(payload)


def realization_from_json(text: str):
    payload = json.loads(text)
    coeffs = coeffs_from_json(text)
    g = np.asarray(payload["g"], dtype=float)
    seed = int(payload["seed"])
    if payload["dim"] == 1:
        return Realization1D(coeffs=coeffs, g=g, seed=seed)
    return Realization2D(coeffs=coeffs, g=g, seed=seed)

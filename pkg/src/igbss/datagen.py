"""Synthetic fixtures: mixing coefficients, mixtures with higher-order
interactions, time series, image mixtures and a heavy-tailed point cloud.

Every generator is a pure function of its arguments; randomness comes only
from ``numpy.random.default_rng(seed)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Sequence

import numpy as np
from scipy import signal


@dataclass
class MixingSpec:
    """Mixing coefficients up to interaction order ``k``.

    ``coefficients[j - 1]`` has shape ``(L, C(N, j))``; column ``c`` belongs to
    the ``c``-th entry of ``itertools.combinations(range(N), j)``.
    """

    L: int
    N: int
    k: int
    coefficients: list[np.ndarray]
    lo: float | None = None
    hi: float | None = None
    seed: int | None = None

    def __post_init__(self):
        self.coefficients = [np.asarray(c, dtype=float) for c in self.coefficients]
        if len(self.coefficients) != self.k:
            raise ValueError("expected %d coefficient groups, got %d" % (self.k, len(self.coefficients)))
        for j, c in enumerate(self.coefficients, start=1):
            if c.shape != (self.L, comb(self.N, j)):
                raise ValueError("order-%d coefficients must have shape (%d, %d), got %s"
                                 % (j, self.L, comb(self.N, j), c.shape))

    def combinations(self, j: int) -> list[tuple[int, ...]]:
        return list(itertools.combinations(range(self.N), j))

    @property
    def n_coefficients(self) -> int:
        return sum(c.size for c in self.coefficients)

    @property
    def matrix(self) -> np.ndarray:
        """First-order mixing matrix A (L x N)."""
        return self.coefficients[0]

    @classmethod
    def from_matrix(cls, A: np.ndarray) -> "MixingSpec":
        A = np.asarray(A, dtype=float)
        return cls(A.shape[0], A.shape[1], 1, [A])

    def to_dict(self) -> dict:
        return {
            "L": self.L, "N": self.N, "k": self.k,
            "lo": self.lo, "hi": self.hi, "seed": self.seed,
            "orders": [
                {"order": j,
                 "combinations": [list(c) for c in self.combinations(j)],
                 "coefficients": self.coefficients[j - 1].tolist()}
                for j in range(1, self.k + 1)
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MixingSpec":
        orders = sorted(d["orders"], key=lambda o: o["order"])
        return cls(int(d["L"]), int(d["N"]), int(d["k"]),
                   [np.array(o["coefficients"], dtype=float).reshape(int(d["L"]), -1) for o in orders],
                   d.get("lo"), d.get("hi"), d.get("seed"))


def gen_mixing(L: int, N: int, k: int = 1, lo: float = 1.0, hi: float = 6.0,
               seed: int | None = None) -> MixingSpec:
    """Draw every coefficient of every order up to ``k`` i.i.d. from U[lo, hi].

    Orders are drawn in increasing order, each as one row-major ``(L, C(N, j))`` block.
    """
    if not lo < hi:
        raise ValueError("need lo < hi, got lo=%r hi=%r" % (lo, hi))
    if not 1 <= k <= N:
        raise ValueError("interaction order must satisfy 1 <= k <= N")
    rng = np.random.default_rng(seed)
    coefs = [rng.uniform(lo, hi, size=(L, comb(N, j))) for j in range(1, k + 1)]
    return MixingSpec(L, N, k, coefs, lo, hi, seed)


def interaction_terms(Z: np.ndarray, j: int) -> np.ndarray:
    """Rows are products of ``j`` distinct source rows, one per combination."""
    Z = np.asarray(Z, dtype=float)
    return np.array([np.prod(Z[list(c)], axis=0)
                     for c in itertools.combinations(range(Z.shape[0]), j)])


def mix(Z: np.ndarray, spec: MixingSpec) -> np.ndarray:
    """Received signals ``x[l, m] = sum_j sum_{n1<..<nj} a[l, n1..nj] z[n1, m]...z[nj, m]``."""
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2 or Z.shape[0] != spec.N:
        raise ValueError("sources must have %d rows, got shape %s" % (spec.N, Z.shape))
    X = np.zeros((spec.L, Z.shape[1]))
    for j, coef in enumerate(spec.coefficients, start=1):
        X += coef @ interaction_terms(Z, j)
    return X


def gen_timeseries(n_samples: int = 500, cycles: Sequence[float] = (3, 3, 3),
                   phases: Sequence[float] = (0.0, 0.0, 0.0), noise: float = 0.0,
                   seed: int | None = None) -> np.ndarray:
    """Sine, square and sawtooth waves as a 3 x n_samples array.

    The samples tile one window ``t = k / n_samples``.  ``cycles`` counts
    periods per window; ``phases`` are in radians.  The square wave is +1
    where the underlying sine is >= 0 and -1 elsewhere.  ``noise`` adds
    seeded Gaussian noise of that standard deviation.
    """
    if n_samples < 2:
        raise ValueError("need at least two samples")
    t = np.arange(n_samples) / n_samples
    arg = [2 * np.pi * c * t + ph for c, ph in zip(cycles, phases)]
    Z = np.vstack([
        np.sin(arg[0]),
        np.where(np.sin(arg[1]) >= 0, 1.0, -1.0),
        signal.sawtooth(arg[2]),
    ])
    if noise:
        Z = Z + np.random.default_rng(seed).normal(0.0, noise, Z.shape)
    return Z


def gen_pointcloud(count: int, seed: int | None = None, dof: float = 1.3,
                   scales: Sequence[float] = (1 / 5, 1 / 10)) -> np.ndarray:
    """Two independent Student-t rows (numpy's ``standard_t`` sampler), scaled per row."""
    if count < 2:
        raise ValueError("need at least two points")
    rng = np.random.default_rng(seed)
    return rng.standard_t(dof, size=(len(scales), count)) * np.asarray(scales)[:, None]


@dataclass(frozen=True)
class RescaleRecord:
    """Affine map taking the raw mixture onto the integer range [0, levels]."""

    lo: float
    hi: float
    levels: int = 255

    @property
    def scale(self) -> float:
        return self.levels / (self.hi - self.lo)

    def apply(self, X: np.ndarray) -> np.ndarray:
        return np.rint((np.asarray(X, dtype=float) - self.lo) * self.scale).astype(np.int64)

    def invert(self, Xq: np.ndarray) -> np.ndarray:
        return self.lo + np.asarray(Xq, dtype=float) / self.scale


def flatten_images(images: Sequence[np.ndarray]) -> np.ndarray:
    """One row per image, pixels row-major with channels last."""
    arrays = [np.asarray(im, dtype=float) for im in images]
    shapes = {a.shape for a in arrays}
    if len(shapes) != 1:
        raise ValueError("images must share one shape, got %s" % sorted(shapes))
    return np.vstack([a.reshape(-1) for a in arrays])


def gen_images_mixture(images: Sequence[np.ndarray], spec: MixingSpec,
                       bounds: tuple[float, float] | None = None
                       ) -> tuple[np.ndarray, RescaleRecord]:
    """Mix flattened rasters and quantize the mixture to integers in 0..255.

    ``bounds`` overrides the rescale range (defaults to the mixture's min/max).
    """
    X = mix(flatten_images(images), spec)
    lo, hi = bounds if bounds is not None else (float(X.min()), float(X.max()))
    if not hi > lo:
        raise ValueError("mixture is constant; nothing to rescale")
    record = RescaleRecord(lo, hi)
    return record.apply(X), record

"""End-to-end separation and the evaluation protocol (permutation matching,
per-signal min-max scaling, RMSE and SNR)."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .loglinear import LogLinearState, NormalizationRecord, empirical_distribution
from .optimizer import FitConfig, FitReport, fit
from .poset import SampleSpace, StateId, build_sample_space

MAX_EXHAUSTIVE = 8


@dataclass
class SeparationResult:
    recovered: np.ndarray      # N x M, mapped onto the input data range
    unit: np.ndarray           # N x M, per-signal min-max scaled p(z)
    source_probabilities: np.ndarray  # N x M, raw p(z[n, m])
    mixing_params: dict[StateId, float]
    report: FitReport
    normalization: NormalizationRecord
    state: LogLinearState

    @property
    def space(self) -> SampleSpace:
        return self.state.space

    def mixing_params_json(self) -> list[dict]:
        return [{"state": str(s), "order": s.order, "l": s.index[0],
                 "sources": list(s.index[1:]), "theta": v}
                for s, v in self.mixing_params.items()]


def minmax_rows(Z: np.ndarray) -> np.ndarray:
    """Scale each row to [0, 1]; constant rows map to 0."""
    Z = np.asarray(Z, dtype=float)
    lo = Z.min(axis=1, keepdims=True)
    span = Z.max(axis=1, keepdims=True) - lo
    return np.divide(Z - lo, span, out=np.zeros_like(Z), where=span > 0)


def separate(X: np.ndarray, n_sources: int, order: int = 1, scheme: str = "sum",
             config: FitConfig | None = None, eps: float | None = None) -> SeparationResult:
    """Recover ``n_sources`` signals from the received matrix ``X`` (L x M).

    The fitted source-layer probabilities are min-max scaled per signal and
    then mapped onto the value range of ``X``.  A run that hits the iteration
    cap still returns its last iterate with ``report.converged = False``.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("received signals must form a 2-D matrix")
    L, M = X.shape
    space = build_sample_space(L, n_sources, M, order)
    emp = empirical_distribution(space, X, scheme, eps)
    state, report = fit(space, emp, config)
    pz = state.source_matrix()
    unit = minmax_rows(pz)
    mixing = {space.states[i]: float(state.theta[j])
              for j, i in zip(space.mixing_params, space.mixing_index)}
    return SeparationResult(
        recovered=emp.normalization.to_data_range(unit),
        unit=unit,
        source_probabilities=pz,
        mixing_params=mixing,
        report=report,
        normalization=emp.normalization,
        state=state,
    )


def _check_pair(Zhat: np.ndarray, Z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    Zhat, Z = np.atleast_2d(np.asarray(Zhat, dtype=float)), np.atleast_2d(np.asarray(Z, dtype=float))
    if Zhat.shape != Z.shape:
        raise ValueError("shape mismatch: %s vs %s" % (Zhat.shape, Z.shape))
    return Zhat, Z


def match_permutation(Zhat: np.ndarray, Z: np.ndarray, allow_sign: bool = False
                      ) -> tuple[tuple[int, ...], np.ndarray, np.ndarray]:
    """Assign recovered rows to true rows by exhaustive search.

    Minimizes the summed Euclidean distance between ``signs[n] * Zhat[perm[n]]``
    and ``Z[n]``.  Signs stay +1 unless ``allow_sign``.
    Returns ``(perm, signs, matched)``.
    """
    Zhat, Z = _check_pair(Zhat, Z)
    N = Z.shape[0]
    if N > MAX_EXHAUSTIVE:
        raise ValueError("exhaustive matching supports at most %d signals, got %d" % (MAX_EXHAUSTIVE, N))
    # dist[i, n, s]: recovered row i with sign s against true row n
    diff_pos = np.linalg.norm(Zhat[:, None, :] - Z[None, :, :], axis=2)
    diff_neg = np.linalg.norm(-Zhat[:, None, :] - Z[None, :, :], axis=2)
    cost = np.minimum(diff_pos, diff_neg) if allow_sign else diff_pos
    best, best_cost = None, math.inf
    for perm in itertools.permutations(range(N)):
        c = sum(cost[perm[n], n] for n in range(N))
        if c < best_cost:
            best, best_cost = perm, c
    signs = np.ones(N)
    if allow_sign:
        signs = np.array([-1.0 if diff_neg[best[n], n] < diff_pos[best[n], n] else 1.0
                          for n in range(N)])
    matched = signs[:, None] * Zhat[list(best)]
    return best, signs, matched


def rmse(Zhat: np.ndarray, Z: np.ndarray) -> float:
    Zhat, Z = _check_pair(Zhat, Z)
    return float(np.sqrt(np.mean((Zhat - Z) ** 2)))


def snr_db(Zhat: np.ndarray, Z: np.ndarray) -> float:
    """``20 log10(||z|| / ||z - zhat||)``; ``inf`` for a perfect reconstruction."""
    Zhat, Z = _check_pair(Zhat, Z)
    err = np.linalg.norm(Z - Zhat)
    if err == 0:
        return math.inf
    return float(20 * np.log10(np.linalg.norm(Z) / err))


def evaluate(Zhat: np.ndarray, Z: np.ndarray, allow_sign: bool = False) -> dict:
    """Min-max scale both sides per signal, match permutation, then score.

    A sign flip is applied before scaling, so a flipped row becomes ``1 - u``.
    """
    Zhat, Z = _check_pair(Zhat, Z)
    U, T = minmax_rows(Zhat), minmax_rows(Z)
    perm, signs, centered = match_permutation(U - 0.5, T - 0.5, allow_sign)
    matched = centered + 0.5
    per_signal = [{"truth": n, "recovered": int(perm[n]), "sign": int(signs[n]),
                   "rmse": rmse(matched[n], T[n]), "snr_db": snr_db(matched[n], T[n]),
                   "pearson": _pearson(matched[n], T[n])}
                  for n in range(len(T))]
    return {
        "permutation": [int(i) for i in perm],
        "signs": [int(s) for s in signs],
        "rmse": rmse(matched, T),
        "snr_db": snr_db(matched, T),
        "per_signal": per_signal,
        "matched": matched,
    }


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    a, b = a - a.mean(), b - b.mean()
    den = np.linalg.norm(a) * np.linalg.norm(b)
    return float(a @ b / den) if den > 0 else 0.0

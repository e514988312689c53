"""Log-linear distributions on a :class:`~igbss.poset.SampleSpace`.

Natural parameters ``theta`` live on the parameter set S = A u Z (mixing and
source states, in enumeration order); received states carry no parameter.
Every quantity here is evaluated through the sparse incidence matrix of S,
never through the dense model matrix.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import logsumexp

from .poset import Layer, SampleSpace, StateId

SCHEMES = ("sum", "minmax", "exp")


class LogLinearState:
    """Distribution ``p`` induced by ``theta`` together with its dual coordinates.

    ``log_p`` is kept alongside ``p`` because probabilities of the mixing and
    bottom states underflow long before their logarithms do.
    """

    def __init__(self, space: SampleSpace, theta: np.ndarray):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (space.n_params,):
            raise ValueError("theta must have shape (%d,), got %s" % (space.n_params, theta.shape))
        if not np.all(np.isfinite(theta)):
            raise FloatingPointError("theta contains non-finite values")
        self.space = space
        self.theta = theta
        weights = space.incidence.T @ theta
        self.psi = float(logsumexp(weights))
        self.log_p = weights - self.psi
        self.p = np.exp(self.log_p)

    @property
    def theta_bottom(self) -> float:
        return -self.psi

    @cached_property
    def eta_params(self) -> np.ndarray:
        """Expectation parameters restricted to S (same order as ``theta``)."""
        return self.space.incidence @ self.p

    @cached_property
    def eta(self) -> np.ndarray:
        """Expectation parameters over all states but bottom, in enumeration order."""
        return (self.space.reach @ self.p)[1:]

    def eta_of(self, s: StateId) -> float:
        i = self.space.position(s)
        return 1.0 if i == 0 else float(self.eta[i - 1])

    def prob(self, s: StateId) -> float:
        return float(self.p[self.space.position(s)])

    def theta_of(self, s: StateId) -> float:
        """Natural parameter of ``s``; zero for received states, ``-psi`` for bottom."""
        i = self.space.position(s)
        if s.layer is Layer.BOTTOM:
            return self.theta_bottom
        if s.layer is Layer.RECEIVED:
            return 0.0
        return float(self.theta[np.searchsorted(self.space.param_index, i)])

    def source_matrix(self) -> np.ndarray:
        """``p(z[n, m])`` as an N x M array."""
        return self.p[self.space.source_index].reshape(self.space.N, self.space.M)


def compute_p(space: SampleSpace, theta: np.ndarray) -> LogLinearState:
    return LogLinearState(space, theta)


def compute_eta(state: LogLinearState) -> np.ndarray:
    return state.eta


@dataclass(frozen=True)
class NormalizationRecord:
    """Everything needed to undo the map from a received matrix to ``p_hat``.

    ``params`` holds ``min``/``max`` of the data for every scheme, plus
    ``total`` (sum/minmax), ``eps`` (minmax) or ``lse`` (exp).
    """

    scheme: str
    params: dict = field(default_factory=dict)

    def invert(self, p_hat: np.ndarray) -> np.ndarray:
        """Map normalized values back to the data they came from."""
        p_hat = np.asarray(p_hat, dtype=float)
        q = self.params
        if self.scheme == "sum":
            return p_hat * q["total"]
        if self.scheme == "minmax":
            scaled = p_hat * q["total"]
            return scaled * (q["max"] + q["eps"] - q["min"]) - q["eps"] + q["min"]
        if self.scheme == "exp":
            return np.log(p_hat) + q["lse"]
        raise ValueError("unknown scheme %r" % self.scheme)

    def to_data_range(self, unit: np.ndarray) -> np.ndarray:
        """Affinely map values in [0, 1] onto the recorded data range."""
        return self.params["min"] + np.asarray(unit, dtype=float) * (self.params["max"] - self.params["min"])

    def to_dict(self) -> dict:
        return {"scheme": self.scheme, **self.params}

    @classmethod
    def from_dict(cls, d: dict) -> "NormalizationRecord":
        d = dict(d)
        return cls(d.pop("scheme"), d)


@dataclass
class EmpiricalDistribution:
    space: SampleSpace
    p_hat: np.ndarray
    eta_hat: np.ndarray
    normalization: NormalizationRecord

    @property
    def received(self) -> np.ndarray:
        """``p_hat`` on the received layer as an L x M array."""
        return self.p_hat[self.space.received_index].reshape(self.space.L, self.space.M)


def normalize(X: np.ndarray, scheme: str = "sum", eps: float | None = None
              ) -> tuple[np.ndarray, NormalizationRecord]:
    """Turn a received matrix into a probability matrix of the same shape.

    ``eps`` only applies to ``minmax`` and defaults to 1e-3 of the data range.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.size == 0:
        raise ValueError("expected a non-empty 2-D matrix, got shape %s" % (X.shape,))
    if not np.all(np.isfinite(X)):
        raise ValueError("received matrix contains non-finite entries")
    lo, hi = float(X.min()), float(X.max())
    if scheme == "sum":
        if lo <= 0:
            raise ValueError("sum normalization needs strictly positive entries (min is %g)" % lo)
        total = float(X.sum())
        return X / total, NormalizationRecord("sum", {"min": lo, "max": hi, "total": total})
    if scheme == "minmax":
        if hi <= lo:
            raise ValueError("min-max normalization of a constant matrix is undefined")
        if eps is None:
            eps = 1e-3 * (hi - lo)
        if eps <= 0:
            raise ValueError("eps must be positive")
        q = (X + eps - lo) / (hi + eps - lo)
        total = float(q.sum())
        return q / total, NormalizationRecord(
            "minmax", {"min": lo, "max": hi, "eps": float(eps), "total": total})
    if scheme in ("exp", "expkernel"):
        lse = float(logsumexp(X))
        return np.exp(X - lse), NormalizationRecord("exp", {"min": lo, "max": hi, "lse": lse})
    raise ValueError("unknown normalization scheme %r (expected one of %s)" % (scheme, SCHEMES))


def empirical_distribution(space: SampleSpace, X: np.ndarray, scheme: str = "sum",
                           eps: float | None = None) -> EmpiricalDistribution:
    X = np.asarray(X, dtype=float)
    if X.shape != (space.L, space.M):
        raise ValueError("received matrix has shape %s, space expects (%d, %d)"
                         % (X.shape, space.L, space.M))
    P, record = normalize(X, scheme, eps)
    p_hat = np.zeros(len(space))
    p_hat[space.received_index] = P.ravel()
    return EmpiricalDistribution(space, p_hat, space.incidence @ p_hat, record)


def kl_divergence(emp: EmpiricalDistribution, state: LogLinearState) -> float:
    """KL(p_hat || p) with the convention 0 log 0 = 0."""
    if emp.space is not state.space:
        raise ValueError("empirical and model distributions live on different spaces")
    mask = emp.p_hat > 0
    ph = emp.p_hat[mask]
    return float(np.dot(ph, np.log(ph) - state.log_p[mask]))


def kl_gradient(state: LogLinearState, emp: EmpiricalDistribution) -> np.ndarray:
    """Gradient of the KL divergence with respect to ``theta``: ``eta - eta_hat`` on S."""
    return state.eta_params - emp.eta_hat


@dataclass
class FisherBlock:
    layer: Layer
    params: np.ndarray  # positions inside the theta vector
    G: np.ndarray


def _block_params(space: SampleSpace, layer: Layer | str) -> tuple[Layer, np.ndarray]:
    if isinstance(layer, str):
        layer = Layer[layer.upper()]
    if layer is Layer.SOURCE:
        return layer, space.source_params
    if layer is Layer.MIXING:
        return layer, space.mixing_params
    raise ValueError("Fisher blocks exist for the source and mixing layers only, not %s" % layer.name)


def fisher_block(state: LogLinearState, layer: Layer | str) -> FisherBlock:
    """Fisher information restricted to one parameter layer.

    ``g[s, t] = sum_w 1[s <= w] 1[t <= w] p(w) - eta_s eta_t``.
    """
    layer, params = _block_params(state.space, layer)
    B = state.space.incidence[params]
    second = (B.multiply(state.p) @ B.T).toarray()
    eta = state.eta_params[params]
    G = second - np.outer(eta, eta)
    # symmetrize away the rounding of the sparse product
    G = 0.5 * (G + G.T)
    return FisherBlock(layer, params, G)

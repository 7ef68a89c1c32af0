"""Backoff Markov chain of a multi-band station.

States are ``(stage, counter)`` pairs with ``counter < 2**stage * W`` plus one
extra state, ``MMW``, entered when a station at the last stage collides and
elects a fast session transfer. A station in ``MMW`` moves to stage 0 with the
A-BFT success probability ``alpha`` and falls back to stage ``m`` otherwise.

Two independent routes to the stationary law live here: the closed forms
(:func:`stationary_distribution`, :func:`theta_uw`, :func:`theta_mmw`) and an
explicit sparse transition matrix solved numerically
(:func:`build_transition_matrix`, :func:`solve_stationary_numeric`).

State ordering is stable: ``(i, k)`` sits at ``sum(2**j * W for j < i) + k``
and ``MMW`` is last.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, NamedTuple, TextIO

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DomainError, NumericalError, StateSpaceError

DEFAULT_MAX_STATES = 1_000_000


class ChainState(NamedTuple):
    stage: int
    counter: int


# Stage -1 doubles as the CSV encoding of the mmW state.
MMW = ChainState(-1, 0)


def _check(p: float, alpha: float, beta: float, W: int, m: int) -> None:
    for name, value in (("p", p), ("alpha", alpha), ("beta", beta)):
        if not 0.0 <= value <= 1.0:
            raise DomainError(f"{name} must lie in [0, 1], got {value!r}")
    if W < 1:
        raise DomainError(f"W must be >= 1, got {W}")
    if m < 0:
        raise DomainError(f"m must be >= 0, got {m}")
    if p == 1.0 and alpha * beta == 0.0:
        raise NumericalError("p = 1 with alpha*beta = 0 makes the chain absorb at stage m")


def _last_stage_denominator(p: float, alpha: float, beta: float) -> float:
    return 1.0 - p + alpha * beta * p


def _geometric(x: float, n: int) -> float:
    # sum_{i<n} x**i; finite at x = 1 where (1 - x**n)/(1 - x) is 0/0
    return math.fsum(x**i for i in range(n))


def _normalizer(p: float, alpha: float, beta: float, W: int, m: int) -> float:
    """The closed-form value of h(0,0) obtained from normalization.

    For m >= 1 this is the probability of state (0, 0). For m = 0 stage 0 is
    also the last stage and the state probability is this value divided by
    ``1 - p + alpha*beta*p``.
    """
    d = _last_stage_denominator(p, alpha, beta)
    bracket = (
        W * _geometric(2 * p, m)
        + _geometric(p, m)
        + (2**m * W + 1 + 2 * beta * p) * p**m / d
    )
    return 2.0 / bracket


def h00(p: float, alpha: float, beta: float, W: int, m: int) -> float:
    """Stationary probability of state (0, 0)."""
    _check(p, alpha, beta, W, m)
    c = _normalizer(p, alpha, beta, W, m)
    if m == 0:
        return c / _last_stage_denominator(p, alpha, beta)
    return c


def stage_heads(p: float, alpha: float, beta: float, W: int, m: int) -> np.ndarray:
    """Probabilities h(i, 0) for i = 0..m."""
    _check(p, alpha, beta, W, m)
    c = _normalizer(p, alpha, beta, W, m)
    heads = np.array([p**i * c for i in range(m + 1)], dtype=float)
    heads[m] = p**m * c / _last_stage_denominator(p, alpha, beta)
    return heads


def mmw_probability(p: float, alpha: float, beta: float, W: int, m: int) -> float:
    """Stationary probability of the mmW state."""
    _check(p, alpha, beta, W, m)
    c = _normalizer(p, alpha, beta, W, m)
    return beta * p ** (m + 1) * c / _last_stage_denominator(p, alpha, beta)


def theta_uw(p: float, alpha: float, beta: float, W: int, m: int) -> float:
    """Per-slot probability that a station transmits on the uW band.

    Evaluated as ``c * (sum_{i<m} p**i + p**m / D)``, which equals
    ``c/(1-p) * (1 - alpha*beta*p**(m+1)/D)`` for p < 1 and stays finite at
    p = 1.
    """
    _check(p, alpha, beta, W, m)
    c = _normalizer(p, alpha, beta, W, m)
    d = _last_stage_denominator(p, alpha, beta)
    return c * (_geometric(p, m) + p**m / d)


def theta_mmw(p: float, alpha: float, beta: float, W: int, m: int) -> float:
    """Per-slot probability that a station transmits on the mmW band."""
    _check(p, alpha, beta, W, m)
    c = _normalizer(p, alpha, beta, W, m)
    return alpha * beta * p ** (m + 1) * c / _last_stage_denominator(p, alpha, beta)


def dcf_transmission_probability(p: float, W: int, m: int) -> float:
    """Legacy DCF transmission probability (no mmW path).

    ``2(1-2p) / ((1-2p)(W+1) + pW(1-(2p)**m))``; at p = 1/2 the common
    factor is cancelled analytically.
    """
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p!r}")
    q = 1.0 - 2.0 * p
    if q == 0.0:
        return 2.0 / ((W + 1) + p * W * m)
    return 2.0 * q / (q * (W + 1) + p * W * (1.0 - (2.0 * p) ** m))


def num_states(W: int, m: int) -> int:
    return W * (2 ** (m + 1) - 1) + 1


def stage_offset(W: int, i: int) -> int:
    return W * (2**i - 1)


def state_index(W: int, m: int, state: ChainState) -> int:
    if state == MMW:
        return num_states(W, m) - 1
    i, k = state
    if not 0 <= i <= m or not 0 <= k < 2**i * W:
        raise DomainError(f"state {state} does not exist for W={W}, m={m}")
    return stage_offset(W, i) + k


def iter_states(W: int, m: int) -> Iterator[ChainState]:
    for i in range(m + 1):
        for k in range(2**i * W):
            yield ChainState(i, k)
    yield MMW


@dataclass(frozen=True)
class StationaryDistribution:
    """Stationary law over the chain, stored in canonical state order."""

    vector: np.ndarray
    p: float
    alpha: float
    beta: float
    W: int
    m: int

    def __getitem__(self, state: tuple[int, int]) -> float:
        return float(self.vector[state_index(self.W, self.m, ChainState(*state))])

    @property
    def mmw(self) -> float:
        return float(self.vector[-1])

    def stage(self, i: int) -> np.ndarray:
        start = stage_offset(self.W, i)
        return self.vector[start : start + 2**i * self.W]

    def heads(self) -> np.ndarray:
        return np.array([self.vector[stage_offset(self.W, i)] for i in range(self.m + 1)])

    def items(self) -> Iterator[tuple[ChainState, float]]:
        return zip(iter_states(self.W, self.m), map(float, self.vector))

    def as_dict(self) -> dict[ChainState, float]:
        return dict(self.items())

    def write_csv(self, target: str | Path | TextIO) -> None:
        """Write ``stage,counter,probability`` rows; the mmW state is stage -1."""
        if isinstance(target, (str, Path)):
            with open(target, "w", newline="") as fh:
                self.write_csv(fh)
            return
        writer = csv.writer(target)
        writer.writerow(["stage", "counter", "probability"])
        for state, prob in self.items():
            writer.writerow([state.stage, state.counter, repr(prob)])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def stationary_distribution(p: float, alpha: float, beta: float, W: int, m: int) -> StationaryDistribution:
    """Closed-form stationary law: h(i, k) = (W_i - k)/W_i * h(i, 0)."""
    heads = stage_heads(p, alpha, beta, W, m)
    parts = []
    for i in range(m + 1):
        wi = 2**i * W
        parts.append(heads[i] * (wi - np.arange(wi, dtype=float)) / wi)
    parts.append(np.array([mmw_probability(p, alpha, beta, W, m)]))
    return StationaryDistribution(np.concatenate(parts), p, alpha, beta, W, m)


def build_transition_matrix(
    p: float,
    alpha: float,
    beta: float,
    W: int,
    m: int,
    max_states: int = DEFAULT_MAX_STATES,
) -> sp.csr_matrix:
    """Row-stochastic one-step transition matrix of the backoff chain.

    Duplicate targets are summed, which matters for m = 0 where the reset and
    the stay-at-last-stage transitions land on the same states.
    """
    _check(p, alpha, beta, W, m)
    n = num_states(W, m)
    if n > max_states:
        raise StateSpaceError(f"chain with W={W}, m={m} has {n} states, cap is {max_states}")
    mmw = n - 1
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []

    def spread(src: int, stage: int, mass: float) -> None:
        if mass == 0.0:
            return
        wi = 2**stage * W
        start = stage_offset(W, stage)
        rows.append(np.full(wi, src))
        cols.append(np.arange(start, start + wi))
        vals.append(np.full(wi, mass / wi))

    def single(src: int, dst: int, mass: float) -> None:
        if mass == 0.0:
            return
        rows.append(np.array([src]))
        cols.append(np.array([dst]))
        vals.append(np.array([mass]))

    for i in range(m + 1):
        wi = 2**i * W
        start = stage_offset(W, i)
        # countdown (i, k+1) -> (i, k)
        if wi > 1:
            rows.append(np.arange(start + 1, start + wi))
            cols.append(np.arange(start, start + wi - 1))
            vals.append(np.ones(wi - 1))
        head = start
        spread(head, 0, 1.0 - p)
        if i < m:
            spread(head, i + 1, p)
        else:
            spread(head, m, p * (1.0 - beta))
            single(head, mmw, beta * p)
    spread(mmw, 0, alpha)
    spread(mmw, m, 1.0 - alpha)

    matrix = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )
    return matrix.tocsr()


def _residual(matrix: sp.spmatrix, v: np.ndarray) -> float:
    return float(np.max(np.abs(matrix.T @ v - v)))


def solve_stationary_numeric(
    matrix,
    tol: float = 1e-12,
    max_iter: int = 1_000_000,
    method: str = "direct",
) -> np.ndarray:
    """Left eigenvector ``v`` with ``v M = v`` and ``sum(v) = 1``.

    ``method="direct"`` solves ``(M^T - I) v = 0`` with one balance equation
    swapped for normalization, then polishes with power steps if the residual
    is above ``tol``. ``method="power"`` runs power iteration only.
    """
    m_sparse = sp.csr_matrix(matrix, dtype=float)
    n = m_sparse.shape[0]
    if m_sparse.shape != (n, n) or n == 0:
        raise DomainError(f"matrix must be square and non-empty, got shape {m_sparse.shape}")
    if n == 1:
        return np.ones(1)
    if method not in ("direct", "power"):
        raise ValueError(f"unknown method {method!r}")

    mt = m_sparse.T.tocsr()
    if method == "direct":
        keep = np.ones(n)
        keep[-1] = 0.0
        last = sp.csr_matrix((np.ones(n), (np.full(n, n - 1), np.arange(n))), shape=(n, n))
        a = sp.diags(keep) @ (mt - sp.identity(n, format="csr")) + last
        b = np.zeros(n)
        b[n - 1] = 1.0
        v = spla.spsolve(a.tocsc(), b)
        v = np.clip(v, 0.0, None)
        v /= v.sum()
    else:
        v = np.full(n, 1.0 / n)

    res = _residual(m_sparse, v)
    it = 0
    while res >= tol and it < max_iter:
        v = mt @ v
        v /= v.sum()
        it += 1
        if it % 64 == 0 or method == "direct":
            res = _residual(m_sparse, v)
    if res >= tol:
        raise NumericalError(f"stationary solve did not converge: residual {res:.3e} after {it} steps")
    return v

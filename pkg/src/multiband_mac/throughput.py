"""Network-level saturation metrics for the aggregated uW + mmW system.

Heterogeneous inputs are vectors of per-station transmission probabilities.
The homogeneous pipeline goes through :func:`saturation_throughput` with an
:class:`~multiband_mac.equilibrium.Equilibrium`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from . import chain
from .equilibrium import Equilibrium, solve_fixed_point
from .errors import DomainError
from .params import US_PER_SECOND, DerivedTimings, ProtocolConfig, derive_timings


def _as_probs(thetas: Sequence[float] | np.ndarray, what: str = "theta") -> np.ndarray:
    arr = np.asarray(thetas, dtype=float).ravel()
    if arr.size == 0:
        raise DomainError(f"{what} vector must be non-empty")
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError(f"{what} entries must lie in [0, 1]")
    return arr


def p_transmit(thetas: Sequence[float]) -> float:
    """Probability that at least one station transmits in a slot."""
    th = _as_probs(thetas)
    # 1 - prod(1 - th) without cancellation for tiny th
    with np.errstate(divide="ignore"):
        return float(-np.expm1(np.sum(np.log1p(-th))))


def _exactly_one(th: np.ndarray) -> float:
    # sum_j th_j * prod_{j' != j}(1 - th_j'), via prefix/suffix products so th_j = 1 is safe
    q = 1.0 - th
    prefix = np.concatenate(([1.0], np.cumprod(q)[:-1]))
    suffix = np.concatenate((np.cumprod(q[::-1])[::-1][1:], [1.0]))
    return float(np.sum(th * prefix * suffix))


def p_success(thetas: Sequence[float]) -> float:
    """Probability that a slot with at least one transmission carries exactly one."""
    th = _as_probs(thetas)
    pt = p_transmit(th)
    if pt == 0.0:
        raise DomainError("success probability is undefined when no station ever transmits")
    if np.count_nonzero(th) == 1:
        return 1.0
    # exactly-one mass never exceeds P_t; clip the rounding excess
    return min(_exactly_one(th) / pt, 1.0)


def expected_slot_time(p_t: float, p_s: float, timings: DerivedTimings) -> float:
    """Mean generic-slot duration in microseconds."""
    for name, value in (("p_t", p_t), ("p_s", p_s)):
        if not 0.0 <= value <= 1.0:
            raise DomainError(f"{name} must lie in [0, 1], got {value!r}")
    return (
        (1.0 - p_t) * timings.sigma_us
        + p_t * p_s * timings.t_s_us
        + p_t * (1.0 - p_s) * timings.t_c_us
    )


def max_mmw_stas(e_t_us: float, cfg: ProtocolConfig) -> int:
    """How many mmW payloads fit in one mean slot, capped at J."""
    if not e_t_us > 0:
        raise DomainError(f"expected slot time must be positive, got {e_t_us!r}")
    fit = math.floor(e_t_us * cfg.rate_mmw_bps / (US_PER_SECOND * cfg.payload_mmw_bits))
    return min(fit, cfg.J)


def elementary_symmetric(thetas: Sequence[float], order: int) -> np.ndarray:
    """``e_0 .. e_order`` of the given values, by the one-pass recurrence."""
    th = np.asarray(thetas, dtype=float).ravel()
    e = np.zeros(order + 1)
    e[0] = 1.0
    for t in th:
        # right-hand side is evaluated before assignment: e[u-1] is pre-update
        e[1:] = e[1:] + t * e[:-1]
    return e


def _count_distribution(th: np.ndarray) -> np.ndarray:
    # Poisson-binomial pmf of the number of successes
    pmf = np.zeros(th.size + 1)
    pmf[0] = 1.0
    for t in th:
        pmf[1:] = pmf[1:] * (1.0 - t) + pmf[:-1] * t
        pmf[0] *= 1.0 - t
    return pmf


def expected_mmw_transmitters(
    thetas_mmw: Sequence[float], j_hat: int, estimator: str = "subset_sum"
) -> float:
    """Mean number of mmW transmitters per slot.

    ``"subset_sum"`` sums, for every subset size ``u <= j_hat``, the products of the
    members' probabilities (no complement factors). ``"capped_binomial"``
    returns the true mean of ``min(N, j_hat)`` where ``N`` counts the
    transmitters.
    """
    th = _as_probs(thetas_mmw, "theta_mmw")
    if j_hat < 0:
        raise DomainError(f"j_hat must be >= 0, got {j_hat}")
    j_hat = min(j_hat, th.size)
    if j_hat == 0:
        return 0.0
    if estimator == "subset_sum":
        return float(math.fsum(elementary_symmetric(th, j_hat)[1:]))
    if estimator == "capped_binomial":
        pmf = _count_distribution(th)
        counts = np.minimum(np.arange(th.size + 1), j_hat)
        return float(np.dot(pmf, counts))
    raise DomainError(f"unknown estimator {estimator!r}")


def _fst_attempts_per_slot(cfg: ProtocolConfig, eq: Equilibrium) -> float:
    # every visit to the mmW state costs one FST, whether or not A-BFT succeeds
    return cfg.J * chain.mmw_probability(eq.p, cfg.alpha, cfg.beta, cfg.W, cfg.m)


@dataclass(frozen=True)
class ThroughputReport:
    p_t: float
    p_s: float
    e_t_us: float
    j_hat: int
    e_j_mmw: float
    r_bps: float
    uw_component_bps: float
    mmw_component_bps: float
    # homogeneous equilibrium values; NaN when the report came from raw theta vectors
    p: float = math.nan
    theta_uw: float = math.nan
    theta_mmw: float = math.nan
    collision_slots_per_packet: float = math.nan
    fst_overhead_slots_per_packet: float = math.nan

    def to_dict(self) -> dict:
        return asdict(self)


def saturation_throughput(
    cfg: ProtocolConfig,
    equilibrium: Equilibrium | None = None,
    *,
    thetas_uw: Sequence[float] | None = None,
    thetas_mmw: Sequence[float] | None = None,
    timings: DerivedTimings | None = None,
    estimator: str | None = None,
) -> ThroughputReport:
    """Aggregate saturation throughput over both bands.

    ``R = (P_s P_t B_uW + E[J_mmW] B_mmW) / (E[T] + E[J_mmW] T_FST)``

    Pass either an ``equilibrium`` (homogeneous network of ``cfg.J``
    stations) or explicit per-station ``thetas_uw``/``thetas_mmw``. With
    neither, the fixed point is solved first.
    """
    timings = timings if timings is not None else derive_timings(cfg)
    estimator = estimator if estimator is not None else cfg.mmw_estimator
    if thetas_uw is not None or thetas_mmw is not None:
        if thetas_uw is None or thetas_mmw is None or equilibrium is not None:
            raise DomainError("give thetas_uw and thetas_mmw together, and not with an equilibrium")
        th_uw = _as_probs(thetas_uw)
        th_mmw = _as_probs(thetas_mmw, "theta_mmw")
        if th_uw.size != th_mmw.size:
            raise DomainError("theta vectors must have one entry per station")
        eq = None
    else:
        eq = equilibrium if equilibrium is not None else solve_fixed_point(cfg)
        th_uw = np.full(cfg.J, eq.theta_uw)
        th_mmw = np.full(cfg.J, eq.theta_mmw)

    pt = p_transmit(th_uw)
    ps = p_success(th_uw)
    e_t = expected_slot_time(pt, ps, timings)
    j_hat = min(max_mmw_stas(e_t, cfg), th_uw.size)
    e_j = expected_mmw_transmitters(th_mmw, j_hat, estimator)

    denom_us = e_t + e_j * timings.t_fst_us
    uw_bits = ps * pt * cfg.payload_uw_bits
    mmw_bits = e_j * cfg.payload_mmw_bits
    uw_bps = uw_bits / denom_us * US_PER_SECOND
    mmw_bps = mmw_bits / denom_us * US_PER_SECOND

    delivered = ps * pt + e_j
    extra = {}
    if eq is not None:
        attempts = _fst_attempts_per_slot(cfg, eq)
        fst_slots = math.ceil(timings.t_fst_us / timings.sigma_us) if timings.sigma_us > 0 else 0
        extra = dict(
            p=eq.p,
            theta_uw=eq.theta_uw,
            theta_mmw=eq.theta_mmw,
            collision_slots_per_packet=pt * (1.0 - ps) / delivered if delivered > 0 else math.nan,
            fst_overhead_slots_per_packet=attempts * fst_slots / delivered if delivered > 0 else math.nan,
        )
    return ThroughputReport(
        p_t=pt,
        p_s=ps,
        e_t_us=e_t,
        j_hat=j_hat,
        e_j_mmw=e_j,
        r_bps=uw_bps + mmw_bps,
        uw_component_bps=uw_bps,
        mmw_component_bps=mmw_bps,
        **extra,
    )

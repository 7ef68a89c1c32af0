"""Self-consistent collision probability for a homogeneous network.

A tagged station collides iff at least one of the other ``J - 1`` stations
transmits in the same slot, so ``p = 1 - (1 - theta_uw(p))**(J - 1)``. The
root of ``g(p) = p - closure(theta_uw(p))`` is found by bisection, which is
unconditionally convergent once bracketed (plain fixed-point iteration can
oscillate for small W).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

from . import chain
from .errors import DomainError, SolverError
from .params import ProtocolConfig

P_UPPER = 1.0 - 1e-12


@dataclass(frozen=True)
class Equilibrium:
    p: float
    theta_uw: float
    theta_mmw: float
    iterations: int
    residual: float

    def to_dict(self) -> dict:
        return asdict(self)


def collision_closure(theta_uw: float, J: int) -> float:
    if J < 1:
        raise DomainError(f"J must be >= 1, got {J}")
    if not 0.0 <= theta_uw <= 1.0:
        raise DomainError(f"theta must lie in [0, 1], got {theta_uw!r}")
    return 1.0 - (1.0 - theta_uw) ** (J - 1)


def fixed_point_gap(p: float, cfg: ProtocolConfig) -> float:
    """g(p) = p - closure(theta_uw(p)); negative below the root."""
    theta = chain.theta_uw(p, cfg.alpha, cfg.beta, cfg.W, cfg.m)
    return p - collision_closure(theta, cfg.J)


def _equilibrium_at(p: float, cfg: ProtocolConfig, iterations: int, residual: float) -> Equilibrium:
    return Equilibrium(
        p=p,
        theta_uw=chain.theta_uw(p, cfg.alpha, cfg.beta, cfg.W, cfg.m),
        theta_mmw=chain.theta_mmw(p, cfg.alpha, cfg.beta, cfg.W, cfg.m),
        iterations=iterations,
        residual=residual,
    )


def solve_fixed_point(cfg: ProtocolConfig, tol: float = 1e-10, max_iter: int = 200) -> Equilibrium:
    """Bisect ``g`` on ``[0, 1 - 1e-12]`` until ``|g(p)| < tol``."""
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    if cfg.J == 1:
        return _equilibrium_at(0.0, cfg, 0, 0.0)

    lo, hi = 0.0, P_UPPER
    g_lo = fixed_point_gap(lo, cfg)
    g_hi = fixed_point_gap(hi, cfg)
    if abs(g_lo) < tol:
        return _equilibrium_at(lo, cfg, 0, abs(g_lo))
    if abs(g_hi) < tol:
        return _equilibrium_at(hi, cfg, 0, abs(g_hi))
    if g_lo > 0 or g_hi < 0:
        raise SolverError(
            f"no sign change of p - closure on [0, {hi}]: g(0)={g_lo:.3e}, g(1-)={g_hi:.3e} "
            f"(W={cfg.W}, m={cfg.m}, J={cfg.J}, alpha={cfg.alpha}, beta={cfg.beta})"
        )

    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        g_mid = fixed_point_gap(mid, cfg)
        if abs(g_mid) < tol:
            return _equilibrium_at(mid, cfg, it, abs(g_mid))
        if g_mid < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 2 * abs(mid) * 2.2e-16:
            break
    raise SolverError(
        f"bisection stalled after {it} steps: bracket [{lo!r}, {hi!r}], |g|={abs(g_mid):.3e} >= tol={tol:.1e}"
    )

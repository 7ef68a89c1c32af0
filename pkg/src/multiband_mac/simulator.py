"""Slotted simulation of saturated multi-band stations.

Time advances in generic slots: an idle slot of length sigma, a successful
transmission of length T_s or a collision of length T_c. In each slot:

* every station in backoff whose counter is 0 transmits on the uW band;
* one transmitter succeeds and redraws its counter from stage 0; two or more
  collide and each moves one stage up, or, at the last stage, enters the mmW
  state with probability beta (otherwise redraws at the last stage);
* entering the mmW state costs one FST (T_FST on the time ledger); in the next
  slot the A-BFT outcome is drawn: success queues one mmW payload and resets
  the station to stage 0, failure sends it back to the last stage;
* every other station in backoff decrements its counter by one.

The decrement happens once per generic slot, busy or idle, which is the
counting convention the analytical chain uses (DIFS is folded into T_s and
T_c). mmW payloads are credited against the DTI capacity of each accounting
window, ``floor(window_time * r_mmW / B_mmW)``; excess waits for the next
window in FIFO order.

Each station draws from its own PCG64 stream spawned from the master seed, so
a run is a pure function of ``(cfg, slots, seed)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import TextIO

import numpy as np
from numba import njit

from . import chain
from .errors import ConfigError
from .params import US_PER_SECOND, ProtocolConfig, derive_timings

POOL_SIZE = 4096

# counter slots in the kernel's int64 accumulator
_SLOTS, _IDLE, _SUCC, _COLL, _TX, _COLL_TX, _FST, _FST_FAIL, _MMW_OK, _MMW_TX, _QUEUE, _WIN_N = range(12)
_N_COUNTERS = 12

# per-station counters
_STA_UW, _STA_MMW, _STA_COLL, _STA_FST, _STA_FST_FAIL = range(5)

OUTCOME_NAMES = ("idle", "success", "collision")


@dataclass(frozen=True)
class SimConfig:
    cfg: ProtocolConfig
    slots: int = 1_000_000
    seed: int = 0
    # slots per mmW DTI accounting window
    mmw_window_slots: int = 1
    track_occupancy: bool = False
    trace: bool = False

    def __post_init__(self) -> None:
        if isinstance(self.slots, bool) or not isinstance(self.slots, int) or self.slots < 1:
            raise ConfigError(f"slots must be a positive integer, got {self.slots!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an integer in [0, 2**64), got {self.seed!r}")
        if not isinstance(self.mmw_window_slots, int) or self.mmw_window_slots < 1:
            raise ConfigError(f"mmw_window_slots must be >= 1, got {self.mmw_window_slots!r}")
        n = chain.num_states(self.cfg.W, self.cfg.m)
        if self.track_occupancy and n > chain.DEFAULT_MAX_STATES:
            raise ConfigError(f"occupancy tracking over {n} states is too large")


@dataclass(frozen=True)
class StaState:
    station: int
    stage: int
    counter: int
    awaiting_mmw: bool
    packets_sent_uw: int
    packets_sent_mmw: int
    collisions: int
    fst_attempts: int
    fst_failures: int


@dataclass(frozen=True)
class SimTrace:
    n_transmitters: np.ndarray
    outcome: np.ndarray
    fst_events: np.ndarray

    def write_csv(self, target: str | Path | TextIO) -> None:
        if isinstance(target, (str, Path)):
            with open(target, "w", newline="") as fh:
                self.write_csv(fh)
            return
        writer = csv.writer(target)
        writer.writerow(["slot", "n_transmitters", "outcome", "fst_events"])
        for s, (n, o, f) in enumerate(zip(self.n_transmitters, self.outcome, self.fst_events)):
            writer.writerow([s, int(n), OUTCOME_NAMES[o], int(f)])


@dataclass(frozen=True)
class SimMetrics:
    slots_elapsed: int
    idle_slots: int
    success_slots: int
    collision_slots: int
    fst_overhead_slots: int
    mmw_transmissions: int
    uw_successes: int
    measured_theta_uw: float
    measured_theta_mmw: float
    measured_p: float
    throughput_bps: float
    time_elapsed_us: float
    transmission_attempts: int
    collided_transmissions: int
    fst_attempts: int
    fst_failures: int
    abft_successes: int
    mmw_pending: int
    collision_slots_per_packet: float
    fst_overhead_slots_per_packet: float
    stations: tuple[StaState, ...] = field(default=(), repr=False)
    occupancy: np.ndarray | None = field(default=None, repr=False, compare=False)
    trace: SimTrace | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        """Scalar fields only, for JSON/CSV output."""
        out = asdict(self)
        for key in ("stations", "occupancy", "trace"):
            out.pop(key)
        return out

    def occupancy_distribution(self) -> np.ndarray:
        """Fraction of station-slots spent in each chain state (canonical order)."""
        if self.occupancy is None:
            raise ValueError("run with track_occupancy=True to record state occupancy")
        return self.occupancy / self.occupancy.sum()


@njit(cache=True)
def _draw_counter(pool, cursor, j, width):
    u = pool[j, cursor[j]]
    cursor[j] += 1
    k = int(u * width)
    if k >= width:
        k = width - 1
    return k


@njit(cache=True)
def _advance(
    stage,
    counter,
    mode,
    pool,
    cursor,
    counts,
    sta,
    window_time,
    occupancy,
    tr_ntx,
    tr_outcome,
    tr_fst,
    W,
    m,
    alpha,
    beta,
    sigma,
    t_s,
    t_c,
    mmw_per_us,
    window_slots,
    start,
    end,
    track,
    trace,
):
    n_sta = stage.shape[0]
    pool_len = pool.shape[1]
    mmw_index = occupancy.shape[0] - 1
    for s in range(start, end):
        for j in range(n_sta):
            if cursor[j] > pool_len - 2:
                return s

        ntx = 0
        for j in range(n_sta):
            if track:
                if mode[j] == 1:
                    occupancy[mmw_index] += 1
                else:
                    occupancy[W * ((1 << stage[j]) - 1) + counter[j]] += 1
            if mode[j] == 0 and counter[j] == 0:
                ntx += 1

        fst_now = 0
        for j in range(n_sta):
            if mode[j] == 1:
                u = pool[j, cursor[j]]
                cursor[j] += 1
                mode[j] = 0
                if u < alpha:
                    counts[_MMW_OK] += 1
                    counts[_QUEUE] += 1
                    sta[j, _STA_MMW] += 1
                    stage[j] = 0
                    counter[j] = _draw_counter(pool, cursor, j, W)
                else:
                    counts[_FST_FAIL] += 1
                    sta[j, _STA_FST_FAIL] += 1
                    stage[j] = m
                    counter[j] = _draw_counter(pool, cursor, j, W << m)
            elif counter[j] == 0:
                if ntx == 1:
                    sta[j, _STA_UW] += 1
                    stage[j] = 0
                    counter[j] = _draw_counter(pool, cursor, j, W)
                else:
                    sta[j, _STA_COLL] += 1
                    if stage[j] < m:
                        stage[j] += 1
                        counter[j] = _draw_counter(pool, cursor, j, W << stage[j])
                    else:
                        u = pool[j, cursor[j]]
                        cursor[j] += 1
                        if u < beta:
                            mode[j] = 1
                            fst_now += 1
                            sta[j, _STA_FST] += 1
                        else:
                            counter[j] = _draw_counter(pool, cursor, j, W << m)
            else:
                counter[j] -= 1

        counts[_SLOTS] += 1
        counts[_TX] += ntx
        counts[_FST] += fst_now
        if ntx == 0:
            counts[_IDLE] += 1
            duration = sigma
            outcome = 0
        elif ntx == 1:
            counts[_SUCC] += 1
            duration = t_s
            outcome = 1
        else:
            counts[_COLL] += 1
            counts[_COLL_TX] += ntx
            duration = t_c
            outcome = 2

        window_time[0] += duration
        counts[_WIN_N] += 1
        if counts[_WIN_N] == window_slots:
            capacity = int(math.floor(window_time[0] * mmw_per_us))
            credited = min(counts[_QUEUE], capacity)
            counts[_QUEUE] -= credited
            counts[_MMW_TX] += credited
            counts[_WIN_N] = 0
            window_time[0] = 0.0

        if trace:
            tr_ntx[s] = ntx
            tr_outcome[s] = outcome
            tr_fst[s] = fst_now
    return end


def _refill(pool: np.ndarray, cursor: np.ndarray, gens: list[np.random.Generator]) -> None:
    half = pool.shape[1] // 2
    for j, gen in enumerate(gens):
        used = int(cursor[j])
        if used < half:
            continue
        keep = pool.shape[1] - used
        pool[j, :keep] = pool[j, used:]
        pool[j, keep:] = gen.random(used)
        cursor[j] = 0


def station_generators(seed: int, n: int) -> list[np.random.Generator]:
    """Independent per-station streams; station j's stream does not depend on n."""
    children = np.random.SeedSequence(seed).spawn(n)
    return [np.random.Generator(np.random.PCG64(child)) for child in children]


def run(sim: SimConfig) -> SimMetrics:
    cfg = sim.cfg
    timings = derive_timings(cfg)
    J, W, m = cfg.J, cfg.W, cfg.m

    gens = station_generators(sim.seed, J)
    pool = np.empty((J, POOL_SIZE))
    for j, gen in enumerate(gens):
        pool[j] = gen.random(POOL_SIZE)
    cursor = np.zeros(J, dtype=np.int64)

    stage = np.zeros(J, dtype=np.int64)
    mode = np.zeros(J, dtype=np.int64)
    counter = np.array([_draw_counter(pool, cursor, j, W) for j in range(J)], dtype=np.int64)

    counts = np.zeros(_N_COUNTERS, dtype=np.int64)
    sta = np.zeros((J, 5), dtype=np.int64)
    window_time = np.zeros(1)
    n_states = chain.num_states(W, m) if sim.track_occupancy else 1
    occupancy = np.zeros(n_states, dtype=np.int64)
    trace_len = sim.slots if sim.trace else 0
    tr_ntx = np.zeros(trace_len, dtype=np.int32)
    tr_outcome = np.zeros(trace_len, dtype=np.int8)
    tr_fst = np.zeros(trace_len, dtype=np.int32)

    mmw_per_us = cfg.rate_mmw_bps / (US_PER_SECOND * cfg.payload_mmw_bits)
    s = 0
    while s < sim.slots:
        s = _advance(
            stage, counter, mode, pool, cursor, counts, sta, window_time, occupancy,
            tr_ntx, tr_outcome, tr_fst,
            W, m, float(cfg.alpha), float(cfg.beta),
            float(timings.sigma_us), float(timings.t_s_us), float(timings.t_c_us),
            mmw_per_us, sim.mmw_window_slots, s, sim.slots,
            sim.track_occupancy, sim.trace,
        )
        if s < sim.slots:
            _refill(pool, cursor, gens)

    return _metrics(sim, counts, sta, stage, counter, mode, occupancy, tr_ntx, tr_outcome, tr_fst)


def _metrics(sim, counts, sta, stage, counter, mode, occupancy, tr_ntx, tr_outcome, tr_fst) -> SimMetrics:
    cfg = sim.cfg
    t = derive_timings(cfg)
    slots = int(counts[_SLOTS])
    idle, succ, coll = int(counts[_IDLE]), int(counts[_SUCC]), int(counts[_COLL])
    fst = int(counts[_FST])
    mmw_tx = int(counts[_MMW_TX])
    tx = int(counts[_TX])
    coll_tx = int(counts[_COLL_TX])
    fst_slots_each = math.ceil(t.t_fst_us / t.sigma_us) if t.sigma_us > 0 else 0

    time_us = idle * t.sigma_us + succ * t.t_s_us + coll * t.t_c_us + fst * t.t_fst_us
    bits = succ * cfg.payload_uw_bits + mmw_tx * cfg.payload_mmw_bits
    delivered = succ + int(counts[_MMW_OK])
    station_slots = cfg.J * slots

    stations = tuple(
        StaState(
            station=j,
            stage=int(stage[j]),
            counter=int(counter[j]),
            awaiting_mmw=bool(mode[j]),
            packets_sent_uw=int(sta[j, _STA_UW]),
            packets_sent_mmw=int(sta[j, _STA_MMW]),
            collisions=int(sta[j, _STA_COLL]),
            fst_attempts=int(sta[j, _STA_FST]),
            fst_failures=int(sta[j, _STA_FST_FAIL]),
        )
        for j in range(cfg.J)
    )
    return SimMetrics(
        slots_elapsed=slots,
        idle_slots=idle,
        success_slots=succ,
        collision_slots=coll,
        fst_overhead_slots=fst * fst_slots_each,
        mmw_transmissions=mmw_tx,
        uw_successes=succ,
        measured_theta_uw=tx / station_slots,
        measured_theta_mmw=int(counts[_MMW_OK]) / station_slots,
        measured_p=coll_tx / tx if tx else 0.0,
        throughput_bps=bits / time_us * US_PER_SECOND if time_us > 0 else 0.0,
        time_elapsed_us=time_us,
        transmission_attempts=tx,
        collided_transmissions=coll_tx,
        fst_attempts=fst,
        fst_failures=int(counts[_FST_FAIL]),
        abft_successes=int(counts[_MMW_OK]),
        mmw_pending=int(counts[_QUEUE]),
        collision_slots_per_packet=coll / delivered if delivered else math.nan,
        fst_overhead_slots_per_packet=fst * fst_slots_each / delivered if delivered else math.nan,
        stations=stations,
        occupancy=occupancy if sim.track_occupancy else None,
        trace=SimTrace(tr_ntx, tr_outcome, tr_fst) if sim.trace else None,
    )


def simulate(cfg: ProtocolConfig, slots: int = 1_000_000, seed: int = 0, **options) -> SimMetrics:
    return run(SimConfig(cfg, slots=slots, seed=seed, **options))

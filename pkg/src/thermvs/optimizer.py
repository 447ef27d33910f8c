"""Voltage selection flows built on the timing, power and thermal primitives.

* :func:`select_voltages` -- minimum power at a fixed clock (thermal fixed point)
* :func:`brute_force_reference` -- the same contract with exhaustive search
* :func:`optimize_energy` -- minimum energy per cycle, clock follows the voltage
* :func:`overscale_sweep` -- relaxed timing constraints at a fixed clock
* :func:`build_vid_lut` -- temperature-keyed voltage table for online use
"""

from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .analysis import (
    T_JUNCTION_MAX,
    VoltagePair,
    design_delay,
    nominal_pair,
    path_delays,
    tile_powers,
    total_power,
    worst_case_delay,
)
from .charlib import KINDS, CharLib
from .design import Design
from .errors import InfeasibleError, JunctionCapError
from .thermal import ThermalConfig, ThermalModel, calibrate, solve_steady

DEFAULT_DELTA_T = 0.1
DEFAULT_MAX_ITER = 20
# neighbourhood half-width (grid steps) searched after the first iteration
NEIGHBORHOOD = 2
# temperature margin under which a cached thermal solution is reused
CACHE_MARGIN_C = 0.1
DEFAULT_LUT_MARGIN = 5.0
_CAP_TOL = 1e-9


@dataclass(frozen=True)
class VoltageGrid:
    """Discrete candidate voltages per rail, ascending, in millivolts."""

    core_mv: tuple[int, ...]
    bram_mv: tuple[int, ...]

    def __post_init__(self):
        for name, vals in (("core", self.core_mv), ("bram", self.bram_mv)):
            if not vals:
                raise ValueError(f"empty {name} voltage list")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ValueError(f"{name} voltages must be strictly increasing")

    @classmethod
    def from_lib(cls, lib: CharLib, step_mv: int = 10, core_min_mv: int | None = None,
                 core_max_mv: int | None = None, bram_min_mv: int | None = None,
                 bram_max_mv: int | None = None) -> "VoltageGrid":
        floor = int(round(lib.v_floor * 1000))
        c_lo = floor if core_min_mv is None else core_min_mv
        c_hi = int(round(lib.v_core_nom * 1000)) if core_max_mv is None else core_max_mv
        b_lo = floor if bram_min_mv is None else bram_min_mv
        b_hi = int(round(lib.v_bram_nom * 1000)) if bram_max_mv is None else bram_max_mv
        if c_lo < floor or b_lo < floor:
            raise ValueError("voltage grid below the library floor")
        if c_hi > round(lib.v_core_nom * 1000) or b_hi > round(lib.v_bram_nom * 1000):
            raise ValueError("voltage grid above the rail nominal")

        def ladder(lo, hi):
            # always include the nominal top even if the step does not land on it
            vals = list(range(hi, lo - 1, -step_mv))[::-1]
            return tuple(vals)

        return cls(ladder(c_lo, c_hi), ladder(b_lo, b_hi))

    @property
    def pairs(self) -> list[VoltagePair]:
        return [VoltagePair(c, b) for c in self.core_mv for b in self.bram_mv]

    def pair(self, ci: int, bi: int) -> VoltagePair:
        return VoltagePair(self.core_mv[ci], self.bram_mv[bi])


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    pair: VoltagePair
    power: float        # W at the pre-solve temperatures
    max_dt: float       # infinity norm of the temperature update, C
    max_t: float        # hottest tile after the solve, C


@dataclass
class OptResult:
    pair: VoltagePair
    temps: np.ndarray
    power: float
    leakage: float
    dynamic: float
    delay: float
    critical_path: str
    clock_period: float
    constraint: float
    trace: list[TraceRow]
    feasible: bool
    converged: bool
    stats: dict = field(default_factory=dict)
    evaluations: list = field(default_factory=list)

    @property
    def energy(self) -> float:
        """Energy per clock cycle, J."""
        return self.power * self.clock_period

    @property
    def iterations(self) -> int:
        return len(self.trace)

    @property
    def max_temp(self) -> float:
        return float(np.max(self.temps))


@dataclass(frozen=True)
class PairEvaluation:
    """One voltage pair's converged state inside the energy flow."""

    pair: VoltagePair
    d_max: float
    leakage: float
    dynamic: float
    temps: np.ndarray
    converged: bool

    @property
    def energy(self) -> float:
        return self.d_max * (self.leakage + self.dynamic)


def _model(thermal, design: Design) -> ThermalModel:
    if isinstance(thermal, ThermalModel):
        if thermal.shape != design.shape:
            raise ValueError(f"thermal model grid {thermal.shape} != design grid {design.shape}")
        return thermal
    if isinstance(thermal, ThermalConfig):
        return calibrate(thermal, design)
    raise TypeError("thermal must be a ThermalConfig or a calibrated ThermalModel")


def _check_cap(temps: np.ndarray, pair: VoltagePair) -> None:
    hot = float(np.max(temps))
    if hot > T_JUNCTION_MAX + _CAP_TOL:
        raise JunctionCapError(f"junction temperature {hot:.2f} C exceeds "
                               f"{T_JUNCTION_MAX:.0f} C at {pair}")


def _key(power: float, pair: VoltagePair):
    # lower is better; ties prefer more total voltage, then more core voltage
    return (power, -(pair.core_mv + pair.bram_mv), -pair.core_mv)


class _Problem:
    """Fixed-clock feasibility/power oracle at a given temperature field."""

    def __init__(self, design, lib, grid, constraint, clock):
        self.design, self.lib, self.grid = design, lib, grid
        self.constraint, self.clock = constraint, clock
        self.temps = None
        self.delay_evals = 0
        self.power_evals = 0
        self._feas: dict = {}
        self._power: dict = {}
        self._seg: dict = {}
        kinds, tiles, self._owners = design.segment_arrays
        self._groups = [(KINDS[k], kinds == k, tiles[kinds == k]) for k in np.unique(kinds)]

    def at(self, temps):
        self.temps = np.asarray(temps, dtype=float)
        self._feas.clear()
        self._power.clear()
        self._seg.clear()

    def _path_delays(self, pair: VoltagePair) -> np.ndarray:
        # same element values and summation order as analysis.path_delays
        seg = np.empty(len(self._owners))
        for kind, mask, tiles in self._groups:
            mv = pair.bram_mv if kind.on_bram_rail else pair.core_mv
            part = self._seg.get((kind, mv))
            if part is None:
                part = self._seg[kind, mv] = self.lib.delay(kind, mv / 1000.0, self.temps[tiles])
            seg[mask] = part
        return np.bincount(self._owners, weights=seg, minlength=len(self.design.paths))

    def feasible(self, ci: int, bi: int) -> bool:
        hit = self._feas.get((ci, bi))
        if hit is None:
            self.delay_evals += 1
            d = float(self._path_delays(self.grid.pair(ci, bi)).max())
            hit = self._feas[ci, bi] = d <= self.constraint
        return hit

    def power(self, ci: int, bi: int) -> float:
        hit = self._power.get((ci, bi))
        if hit is None:
            self.power_evals += 1
            pf = tile_powers(self.design, self.temps, self.grid.pair(ci, bi), self.clock, self.lib)
            hit = self._power[ci, bi] = total_power(pf)
        return hit

    def key(self, ci, bi):
        return _key(self.power(ci, bi), self.grid.pair(ci, bi))

    def min_feasible_bram(self, ci: int) -> int | None:
        """Lowest bram index feasible at core index ``ci`` (binary search)."""
        nb = len(self.grid.bram_mv)
        if not self.feasible(ci, nb - 1):
            return None
        lo, hi = 0, nb - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if self.feasible(ci, mid):
                hi = mid
            else:
                lo = mid + 1
        return lo


def _search_exhaustive(prob: _Problem):
    best = None
    for ci in range(len(prob.grid.core_mv)):
        for bi in range(len(prob.grid.bram_mv)):
            if prob.feasible(ci, bi):
                k = prob.key(ci, bi)
                if best is None or k < best[0]:
                    best = (k, ci, bi)
    return None if best is None else best[1:]


def _search_frontier(prob: _Problem):
    """Exact full search exploiting monotone delay and power.

    Feasible pairs form an upper set, so each core voltage only needs its
    lowest feasible bram voltage; equal-power ties above it are then expanded
    to honour the tie-break rule.
    """
    nc, nb = len(prob.grid.core_mv), len(prob.grid.bram_mv)
    frontier = {}
    bi = 0
    for ci in range(nc - 1, -1, -1):
        while bi < nb and not prob.feasible(ci, bi):
            bi += 1
        if bi == nb:
            break
        frontier[ci] = bi
    if not frontier:
        return None
    best_power = min(prob.power(ci, bi) for ci, bi in frontier.items())
    best = None
    for ci, bi in frontier.items():
        if prob.power(ci, bi) != best_power:
            continue
        while bi + 1 < nb and prob.power(ci, bi + 1) == best_power:
            bi += 1
        k = prob.key(ci, bi)
        if best is None or k < best[0]:
            best = (k, ci, bi)
    return best[1], best[2]


def _search_neighborhood(prob: _Problem, prev: tuple[int, int], stats: dict):
    """Search a +/-NEIGHBORHOOD window around ``prev``; fall back when unsure.

    The window optimum is accepted only if it is interior and strictly beats
    monotonicity lower bounds for every region outside the window.
    """
    nc, nb = len(prob.grid.core_mv), len(prob.grid.bram_mv)
    pc, pb = prev
    cl, ch = max(0, pc - NEIGHBORHOOD), min(nc - 1, pc + NEIGHBORHOOD)
    bl, bh = max(0, pb - NEIGHBORHOOD), min(nb - 1, pb + NEIGHBORHOOD)
    best = None
    for ci in range(cl, ch + 1):
        for bi in range(bl, bh + 1):
            if prob.feasible(ci, bi):
                k = prob.key(ci, bi)
                if best is None or k < best[0]:
                    best = (k, ci, bi)

    def fallback(reason):
        stats[reason] = stats.get(reason, 0) + 1
        return _search_frontier(prob)

    if best is None:
        return fallback("fallback_empty")
    _, ci, bi = best
    if (ci == cl and cl > 0) or (ci == ch and ch < nc - 1) or \
            (bi == bl and bl > 0) or (bi == bh and bh < nb - 1):
        return fallback("fallback_boundary")

    p_best = prob.power(ci, bi)
    bounds = []
    if cl > 0:
        b = prob.min_feasible_bram(cl - 1)
        if b is not None:
            bounds.append(prob.power(0, b))
    if ch < nc - 1:
        b = prob.min_feasible_bram(nc - 1)
        if b is not None:
            bounds.append(prob.power(ch + 1, b))
    if bl > 0:
        b = prob.min_feasible_bram(ch)
        if b is not None and b < bl:
            bounds.append(prob.power(cl, b))
    if bh < nb - 1:
        bounds.append(prob.power(cl, bh + 1))
    if any(p_best >= b for b in bounds):
        return fallback("fallback_bound")
    stats["window_hits"] = stats.get("window_hits", 0) + 1
    return ci, bi


def _fixed_clock_flow(design, lib, thermal, t_amb, delta_t, constraint, clock_period,
                      grid, max_iter, searcher: Callable) -> OptResult:
    model = _model(thermal, design)
    grid = grid or VoltageGrid.from_lib(lib)
    if constraint is None:
        constraint = worst_case_delay(design, lib)
    clock = constraint if clock_period is None else clock_period
    prob = _Problem(design, lib, grid, constraint, clock)
    stats: dict = {"solves": 0}
    temps = np.full(len(design.tiles), float(t_amb))
    _check_cap(temps, grid.pair(len(grid.core_mv) - 1, len(grid.bram_mv) - 1))
    trace: list[TraceRow] = []
    prev = None
    converged = False
    for it in range(1, max_iter + 1):
        prob.at(temps)
        idx = searcher(prob, prev, stats)
        if idx is None:
            raise InfeasibleError(
                f"no voltage pair meets the {constraint:.4e} s constraint "
                f"(iteration {it}, hottest tile {np.max(temps):.2f} C)")
        pair = grid.pair(*idx)
        pf = tile_powers(design, temps, pair, clock, lib)
        new = solve_steady(model, pf, t_amb, initial=temps)
        stats["solves"] += 1
        _check_cap(new, pair)
        dt = float(np.max(np.abs(new - temps)))
        trace.append(TraceRow(it, pair, total_power(pf), dt, float(np.max(new))))
        temps = new
        prev = idx
        if dt <= delta_t and design_delay(design, temps, pair, lib)[0] <= constraint:
            converged = True
            break
    stats["delay_evals"] = prob.delay_evals
    stats["power_evals"] = prob.power_evals
    pf = tile_powers(design, temps, pair, clock, lib)
    d, cp = design_delay(design, temps, pair, lib)
    return OptResult(pair=pair, temps=temps, power=total_power(pf), leakage=pf.total_leakage,
                     dynamic=pf.total_dynamic, delay=d, critical_path=cp, clock_period=clock,
                     constraint=constraint, trace=trace, feasible=d <= constraint,
                     converged=converged, stats=stats)


def select_voltages(design: Design, lib: CharLib, thermal, t_amb: float,
                    delta_t: float = DEFAULT_DELTA_T, constraint: float | None = None, *,
                    clock_period: float | None = None, grid: VoltageGrid | None = None,
                    max_iter: int = DEFAULT_MAX_ITER) -> OptResult:
    """Minimum-power (core, bram) pair at a fixed clock, iterated to a thermal fixed point.

    ``constraint`` defaults to the worst-case delay; the clock used for dynamic
    power defaults to the constraint. The first iteration searches the full
    grid, later ones a neighbourhood of the previous pair.
    """

    def searcher(prob, prev, stats):
        if prev is None:
            return _search_frontier(prob)
        return _search_neighborhood(prob, prev, stats)

    return _fixed_clock_flow(design, lib, thermal, t_amb, delta_t, constraint, clock_period,
                             grid, max_iter, searcher)


def brute_force_reference(design: Design, lib: CharLib, thermal, t_amb: float,
                          delta_t: float = DEFAULT_DELTA_T, constraint: float | None = None, *,
                          clock_period: float | None = None, grid: VoltageGrid | None = None,
                          max_iter: int = DEFAULT_MAX_ITER) -> OptResult:
    """Same contract as :func:`select_voltages`, exhaustive search every iteration."""
    return _fixed_clock_flow(design, lib, thermal, t_amb, delta_t, constraint, clock_period,
                             grid, max_iter, lambda prob, prev, stats: _search_exhaustive(prob))


def evaluate_pair(design: Design, lib: CharLib, thermal, t_amb: float, pair: VoltagePair,
                  clock_period: float, delta_t: float = DEFAULT_DELTA_T,
                  max_iter: int = DEFAULT_MAX_ITER) -> OptResult:
    """Thermal fixed point for fixed voltages and clock (baselines, re-checks)."""
    model = _model(thermal, design)
    temps = np.full(len(design.tiles), float(t_amb))
    trace = []
    converged = False
    for it in range(1, max_iter + 1):
        pf = tile_powers(design, temps, pair, clock_period, lib)
        new = solve_steady(model, pf, t_amb, initial=temps)
        _check_cap(new, pair)
        dt = float(np.max(np.abs(new - temps)))
        trace.append(TraceRow(it, pair, total_power(pf), dt, float(np.max(new))))
        temps = new
        if dt <= delta_t:
            converged = True
            break
    pf = tile_powers(design, temps, pair, clock_period, lib)
    d, cp = design_delay(design, temps, pair, lib)
    return OptResult(pair=pair, temps=temps, power=total_power(pf), leakage=pf.total_leakage,
                     dynamic=pf.total_dynamic, delay=d, critical_path=cp,
                     clock_period=clock_period, constraint=clock_period, trace=trace,
                     feasible=d <= clock_period, converged=converged)


def energy_at_clock(design: Design, lib: CharLib, temps, pair: VoltagePair, clock: float) -> float:
    """Energy per cycle at a given clock with temperatures held fixed."""
    return total_power(tile_powers(design, temps, pair, clock, lib)) * clock


class _ThermalCache:
    """Converged fields indexed by total power; hits within ``tol`` watts."""

    def __init__(self, tol: float):
        self.tol = tol
        self.keys: list[float] = []
        self.fields: list[np.ndarray] = []

    def get(self, total: float):
        i = bisect.bisect_left(self.keys, total)
        best = None
        for j in (i - 1, i):
            if 0 <= j < len(self.keys):
                gap = abs(self.keys[j] - total)
                if gap <= self.tol and (best is None or gap < best[0]):
                    best = (gap, j)
        return None if best is None else self.fields[best[1]]

    def put(self, total: float, temps: np.ndarray) -> None:
        i = bisect.bisect_left(self.keys, total)
        self.keys.insert(i, total)
        self.fields.insert(i, temps)


def optimize_energy(design: Design, lib: CharLib, thermal, t_amb: float,
                    delta_t: float = DEFAULT_DELTA_T, *, grid: VoltageGrid | None = None,
                    prune: bool = True, max_iter: int = DEFAULT_MAX_ITER) -> OptResult:
    """Minimum energy-per-cycle pair, the clock running at each pair's own d_max.

    With ``prune`` pairs are visited in order of their pre-feedback energy
    and skipped once that lower bound exceeds the incumbent; thermal solves
    are reused when total power is within ``0.1 / theta_ja`` W of a cached
    case. ``prune=False`` runs the plain exhaustive loop.
    """
    model = _model(thermal, design)
    grid = grid or VoltageGrid.from_lib(lib)
    temps0 = np.full(len(design.tiles), float(t_amb))
    _check_cap(temps0, nominal_pair(lib))
    cache = _ThermalCache(CACHE_MARGIN_C / model.config.theta_ja)
    stats = {"solves": 0, "cache_hits": 0, "pruned": 0, "capped": 0,
             "pairs": len(grid.core_mv) * len(grid.bram_mv)}

    def first_energy(pair):
        d, _ = design_delay(design, temps0, pair, lib)
        return d * total_power(tile_powers(design, temps0, pair, d, lib))

    pairs = grid.pairs
    if prune:
        initial = {p: first_energy(p) for p in pairs}
        pairs = sorted(pairs, key=lambda p: _key(initial[p], p))

    evaluations: list[PairEvaluation] = []
    traces: dict = {}
    best = None
    for pair in pairs:
        if prune and best is not None and initial[pair] > best[0][0]:
            stats["pruned"] += 1
            continue
        temps = temps0
        trace = []
        converged = False
        try:
            for it in range(1, max_iter + 1):
                d, _ = design_delay(design, temps, pair, lib)
                pf = tile_powers(design, temps, pair, d, lib)
                p_tot = total_power(pf)
                new = cache.get(p_tot) if prune else None
                if new is None:
                    new = solve_steady(model, pf, t_amb, initial=temps)
                    stats["solves"] += 1
                    if prune:
                        cache.put(p_tot, new)
                else:
                    stats["cache_hits"] += 1
                _check_cap(new, pair)
                dt = float(np.max(np.abs(new - temps)))
                trace.append(TraceRow(it, pair, p_tot, dt, float(np.max(new))))
                temps = new
                if dt <= delta_t:
                    converged = True
                    break
        except JunctionCapError:
            stats["capped"] += 1
            continue
        ev = PairEvaluation(pair, d, pf.total_leakage, pf.total_dynamic, temps, converged)
        evaluations.append(ev)
        traces[pair] = trace
        k = _key(ev.energy, pair)
        if best is None or k < best[0]:
            best = (k, ev)

    if best is None:
        if stats["capped"]:
            raise JunctionCapError(f"junction cap exceeded for every voltage pair at "
                                   f"T_amb = {t_amb} C")
        raise InfeasibleError("no voltage pair could be evaluated")
    ev = best[1]
    stats["evaluated"] = len(evaluations)
    d_now, cp = design_delay(design, ev.temps, ev.pair, lib)
    return OptResult(pair=ev.pair, temps=ev.temps, power=ev.leakage + ev.dynamic,
                     leakage=ev.leakage, dynamic=ev.dynamic, delay=d_now, critical_path=cp,
                     clock_period=ev.d_max, constraint=ev.d_max, trace=traces[ev.pair],
                     feasible=True, converged=ev.converged, stats=stats,
                     evaluations=evaluations)


@dataclass(frozen=True)
class Violation:
    path_id: str
    delay: float
    deficit: float


@dataclass
class OverscalePoint:
    beta: float
    result: OptResult
    violations: list[Violation]

    @property
    def max_deficit(self) -> float:
        return max((v.deficit for v in self.violations), default=0.0)


def violation_report(design: Design, lib: CharLib, temps, pair: VoltagePair,
                     d_worst: float) -> list[Violation]:
    """Paths slower than ``d_worst`` with their slack deficit."""
    d = path_delays(design, temps, pair, lib)
    return [Violation(pid, float(x), float(x - d_worst))
            for pid, x in zip(design.path_ids, d) if x > d_worst]


def overscale_sweep(design: Design, lib: CharLib, thermal, t_amb: float,
                    delta_t: float = DEFAULT_DELTA_T, betas: Iterable[float] = (1.0,), *,
                    guardband: float = 1.0, grid: VoltageGrid | None = None,
                    max_iter: int = DEFAULT_MAX_ITER) -> list[OverscalePoint]:
    """Voltage selection under constraint ``beta * d_worst`` with the clock kept at d_worst."""
    model = _model(thermal, design)
    d_worst = worst_case_delay(design, lib, guardband)
    out = []
    for beta in betas:
        if beta < 1.0:
            raise ValueError(f"over-scaling factor must be >= 1, got {beta}")
        res = select_voltages(design, lib, model, t_amb, delta_t, beta * d_worst,
                              clock_period=d_worst, grid=grid, max_iter=max_iter)
        out.append(OverscalePoint(beta, res, violation_report(design, lib, res.temps, res.pair,
                                                              d_worst)))
    return out


@dataclass(frozen=True)
class VidLut:
    """Temperature-keyed voltage table (keys in C, strictly increasing)."""

    entries: tuple[tuple[float, VoltagePair], ...]
    margin: float = DEFAULT_LUT_MARGIN

    def __post_init__(self):
        if not self.entries:
            raise ValueError("empty voltage table")
        keys = [k for k, _ in self.entries]
        if any(b <= a for a, b in zip(keys, keys[1:])):
            raise ValueError("table keys must be strictly increasing")

    @property
    def keys(self) -> list[float]:
        return [k for k, _ in self.entries]

    def lookup(self, t: float) -> VoltagePair:
        """Pair of the smallest key at or above ``t``."""
        keys = self.keys
        i = bisect.bisect_left(keys, t)
        if i == len(keys):
            raise KeyError(f"temperature {t} C above the last table key {keys[-1]} C")
        return self.entries[i][1]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t_c", "v_core_mv", "v_bram_mv"])
            for t, p in self.entries:
                w.writerow([_fmt_num(t), p.core_mv, p.bram_mv])

    @classmethod
    def from_csv(cls, path, margin: float = DEFAULT_LUT_MARGIN) -> "VidLut":
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        if not rows or set(rows[0]) != {"t_c", "v_core_mv", "v_bram_mv"}:
            raise ValueError(f"{path}: expected header t_c,v_core_mv,v_bram_mv")
        return cls(tuple((float(r["t_c"]), VoltagePair(int(r["v_core_mv"]), int(r["v_bram_mv"])))
                         for r in rows), margin)


def _fmt_num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def verify_pair(design: Design, lib: CharLib, thermal, t_amb: float, pair: VoltagePair,
                constraint: float, clock_period: float | None = None,
                delta_t: float = DEFAULT_DELTA_T) -> bool:
    """True if ``pair`` settles below the junction cap and meets ``constraint``."""
    try:
        res = evaluate_pair(design, lib, thermal, t_amb, pair,
                            constraint if clock_period is None else clock_period, delta_t)
    except JunctionCapError:
        return False
    return res.converged and res.delay <= constraint


def build_vid_lut(design: Design, lib: CharLib, thermal, keys: Sequence[float],
                  delta_t: float = DEFAULT_DELTA_T, margin: float = DEFAULT_LUT_MARGIN, *,
                  guardband: float = 1.0, grid: VoltageGrid | None = None) -> VidLut:
    """One optimized pair per temperature key, solved at ``key + margin``.

    A repair pass re-verifies every entry at its key + margin; a failing entry
    inherits the next hotter key's pair (or nominal) if that verifies.
    """
    model = _model(thermal, design)
    keys = sorted(float(k) for k in keys)
    d_worst = worst_case_delay(design, lib, guardband)
    pairs = []
    for k in keys:
        try:
            res = select_voltages(design, lib, model, k + margin, delta_t, d_worst, grid=grid)
        except InfeasibleError as exc:
            raise InfeasibleError(f"table key {k:g} C: {exc}") from None
        pairs.append(res.pair)

    fallback = nominal_pair(lib)
    for i in range(len(keys) - 1, -1, -1):
        t = keys[i] + margin
        if verify_pair(design, lib, model, t, pairs[i], d_worst, delta_t=delta_t):
            continue
        options = ([pairs[i + 1]] if i + 1 < len(keys) else []) + [fallback]
        for cand in options:
            if verify_pair(design, lib, model, t, cand, d_worst, delta_t=delta_t):
                pairs[i] = cand
                break
        else:
            raise InfeasibleError(f"table key {keys[i]:g} C: no pair verifies at {t:g} C")
    return VidLut(tuple(zip(keys, pairs)), margin)

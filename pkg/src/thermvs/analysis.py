"""Path-based timing analysis and per-tile power aggregation.

Every segment of a path is timed at its own tile's temperature, on the rail
that feeds its resource kind (BRAM on ``v_bram``, everything else on
``v_core``). Dynamic power is switching energy per cycle divided by the clock
period, so energy per cycle is clock-independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .charlib import KINDS, CharLib, ResourceKind, delay_of
from .design import Design, TimingPath

T_JUNCTION_MAX = 100.0


@dataclass(frozen=True, order=True)
class VoltagePair:
    """Supply voltages in integer millivolts."""

    core_mv: int
    bram_mv: int

    @property
    def v_core(self) -> float:
        return self.core_mv / 1000.0

    @property
    def v_bram(self) -> float:
        return self.bram_mv / 1000.0

    def rail(self, kind: ResourceKind) -> float:
        return self.v_bram if kind.on_bram_rail else self.v_core

    @classmethod
    def from_volts(cls, v_core: float, v_bram: float) -> "VoltagePair":
        return cls(int(round(v_core * 1000)), int(round(v_bram * 1000)))

    def __str__(self):
        return f"({self.core_mv} mV, {self.bram_mv} mV)"


def nominal_pair(lib: CharLib) -> VoltagePair:
    return VoltagePair.from_volts(lib.v_core_nom, lib.v_bram_nom)


@dataclass(frozen=True)
class PowerField:
    """Per-tile leakage and dynamic power in watts."""

    leakage: np.ndarray
    dynamic: np.ndarray

    @property
    def per_tile(self) -> np.ndarray:
        return self.leakage + self.dynamic

    @property
    def total_leakage(self) -> float:
        return float(self.leakage.sum())

    @property
    def total_dynamic(self) -> float:
        return float(self.dynamic.sum())


def _temps(design: Design, temps) -> np.ndarray:
    t = np.asarray(temps, dtype=float)
    if t.shape == ():
        return np.full(len(design.tiles), float(t))
    t = t.reshape(-1)
    if t.size != len(design.tiles):
        raise ValueError(f"temperature field has {t.size} entries, design has {len(design.tiles)} tiles")
    return t


def path_delay(design: Design, path: TimingPath, temps, v: VoltagePair, lib: CharLib) -> float:
    """Sum of segment delays, each at its own tile temperature."""
    t = _temps(design, temps)
    total = 0.0
    for s in path.segments:
        total += float(delay_of(lib, s.kind, v.rail(s.kind), t[design.tile_index(s.row, s.col)]))
    return total


def path_delays(design: Design, temps, v: VoltagePair, lib: CharLib) -> np.ndarray:
    """Delay of every path, in design order."""
    t = _temps(design, temps)
    kinds, tiles, owners = design.segment_arrays
    seg = np.empty(len(kinds))
    for ki in np.unique(kinds):
        kind = KINDS[ki]
        mask = kinds == ki
        seg[mask] = lib.delay(kind, v.rail(kind), t[tiles[mask]])
    return np.bincount(owners, weights=seg, minlength=len(design.paths))


def design_delay(design: Design, temps, v: VoltagePair, lib: CharLib) -> tuple[float, str]:
    """Longest path delay and its id; ties go to the lowest id."""
    d = path_delays(design, temps, v, lib)
    worst = d.max()
    tied = np.flatnonzero(d == worst)
    ids = design.path_ids
    return float(worst), min(ids[i] for i in tied)


def worst_case_delay(design: Design, lib: CharLib, guardband: float = 1.0) -> float:
    """Design delay at the junction cap and nominal rails, times ``guardband``."""
    if guardband < 1.0:
        raise ValueError(f"guardband must be >= 1, got {guardband}")
    d, _ = design_delay(design, lib.t_max, nominal_pair(lib), lib)
    return d * guardband


def tile_powers(design: Design, temps, v: VoltagePair, clock_period: float, lib: CharLib) -> PowerField:
    if not clock_period > 0:
        raise ValueError(f"clock period must be positive, got {clock_period}")
    t = _temps(design, temps)
    inv = design.inventory
    alpha = design.alpha
    leak = np.zeros(len(design.tiles))
    energy = np.zeros(len(design.tiles))
    for ki, kind in enumerate(KINDS):
        count = inv[:, ki]
        if not count.any():
            continue
        rail = v.rail(kind)
        leak += count * lib.leakage(kind, rail, t)
        energy += count * lib.switch_energy(kind, rail, alpha)
    return PowerField(leak, energy / clock_period)


def total_power(pf: PowerField) -> float:
    return float(pf.leakage.sum() + pf.dynamic.sum())

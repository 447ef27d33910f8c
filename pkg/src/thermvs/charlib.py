"""Characterization library: delay, leakage and switching-energy surfaces.

Every resource kind carries three tabulated surfaces:

* ``delay``          seconds,   axis1 = supply voltage (V), axis2 = temperature (C)
* ``leakage``        watts,     axis1 = supply voltage (V), axis2 = temperature (C)
* ``switch_energy``  joules per clock cycle, axis1 = voltage (V), axis2 = activity

Lookups are bilinear and refuse to extrapolate. :func:`synth_charlib` builds a
deterministic surrogate library whose shape follows published normalized
curves; its absolute scales (e.g. ~200 ps per switch-box hop) are arbitrary.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import CharLibError, RangeError

V_CORE_NOM = 0.80
V_BRAM_NOM = 0.95
V_FLOOR = 0.55
T_MIN = 0.0
T_MAX = 100.0

# leakage grows as exp(LEAK_TEMP_COEFF * dT)
LEAK_TEMP_COEFF = 0.015

# knot pitches
V_STEP_MV = 10
T_STEP_C = 5.0
ALPHA_STEP = 0.05

_SNAP = 1e-9

SURFACE_NAMES = ("delay", "leakage", "switch_energy")


class ResourceKind(enum.Enum):
    LUT = "LUT"
    FF = "FF"
    SB = "SB"
    CB = "CB"
    LOCAL = "LOCAL"
    BRAM = "BRAM"
    DSP = "DSP"

    @property
    def on_bram_rail(self) -> bool:
        return self is ResourceKind.BRAM


KINDS: tuple[ResourceKind, ...] = tuple(ResourceKind)
KIND_INDEX = {k: i for i, k in enumerate(KINDS)}


def _locate(knots: np.ndarray, x: np.ndarray, name: str):
    """Cell index and fractional offset for each query; raises outside range."""
    lo, hi = knots[0], knots[-1]
    span = max(abs(lo), abs(hi), 1.0) * _SNAP
    # NaN fails both comparisons, so it lands in the error branch too
    if x.size and not (x.min() >= lo - span and x.max() <= hi + span):
        bad = x[~((x >= lo - span) & (x <= hi + span))]
        raise RangeError(f"{name}={bad.ravel()[0]!r} outside [{lo}, {hi}]")
    x = np.clip(x, lo, hi)
    i = np.minimum(np.searchsorted(knots, x, side="right") - 1, len(knots) - 2)
    t = (x - knots[i]) / (knots[i + 1] - knots[i])
    # snap queries that sit on a knot up to rounding noise
    t = np.where(t < _SNAP, 0.0, np.where(t > 1.0 - _SNAP, 1.0, t))
    return i, t


@dataclass(frozen=True, eq=False)
class CharSurface:
    """Dense table over two strictly increasing knot axes."""

    axis1: np.ndarray
    axis2: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        a1 = np.asarray(self.axis1, dtype=float)
        a2 = np.asarray(self.axis2, dtype=float)
        v = np.asarray(self.values, dtype=float)
        for name, ax in (("axis1", a1), ("axis2", a2)):
            if ax.ndim != 1 or len(ax) < 2:
                raise CharLibError(f"{name} must be 1-D with at least 2 knots")
            if not np.all(np.isfinite(ax)):
                raise CharLibError(f"{name} has non-finite knots")
            if np.any(np.diff(ax) <= 0):
                raise CharLibError(f"{name} knots not strictly increasing")
        if v.shape != (len(a1), len(a2)):
            raise CharLibError(f"values shape {v.shape} != ({len(a1)}, {len(a2)})")
        if not np.all(np.isfinite(v)):
            raise CharLibError("values contain non-finite entries")
        if np.any(v <= 0):
            raise CharLibError("values must be strictly positive")
        for arr in (a1, a2, v):
            arr.setflags(write=False)
        object.__setattr__(self, "axis1", a1)
        object.__setattr__(self, "axis2", a2)
        object.__setattr__(self, "values", v)

    def __call__(self, x1, x2, names=("axis1", "axis2")):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        x1, x2 = np.broadcast_arrays(x1, x2)
        i, t = _locate(self.axis1, x1, names[0])
        j, u = _locate(self.axis2, x2, names[1])
        v = self.values
        out = ((1 - t) * (1 - u) * v[i, j] + (1 - t) * u * v[i, j + 1]
               + t * (1 - u) * v[i + 1, j] + t * u * v[i + 1, j + 1])
        return out[()] if out.ndim == 0 else out

    def to_dict(self) -> dict:
        return {
            "axis1": self.axis1.tolist(),
            "axis2": self.axis2.tolist(),
            "values": self.values.tolist(),
        }

    def __eq__(self, other):
        if not isinstance(other, CharSurface):
            return NotImplemented
        return (np.array_equal(self.axis1, other.axis1)
                and np.array_equal(self.axis2, other.axis2)
                and np.array_equal(self.values, other.values))


@dataclass(frozen=True)
class KindSurfaces:
    delay: CharSurface
    leakage: CharSurface
    switch_energy: CharSurface


@dataclass(frozen=True)
class CharLib:
    """Immutable per-kind characterization tables plus rail metadata."""

    surfaces: Mapping[ResourceKind, KindSurfaces]
    v_core_nom: float = V_CORE_NOM
    v_bram_nom: float = V_BRAM_NOM
    v_floor: float = V_FLOOR
    t_min: float = T_MIN
    t_max: float = T_MAX

    def __post_init__(self):
        missing = [k.value for k in KINDS if k not in self.surfaces]
        if missing:
            raise CharLibError(f"missing resource kind(s): {', '.join(missing)}")
        if not (0 < self.v_floor < self.v_core_nom and self.v_floor < self.v_bram_nom):
            raise CharLibError("v_floor must be positive and below both rail nominals")
        if not self.t_min < self.t_max:
            raise CharLibError("t_min must be below t_max")
        for kind in KINDS:
            s = self.surfaces[kind]
            for name in SURFACE_NAMES:
                surf = getattr(s, name)
                if surf.axis1[0] > self.v_floor + _SNAP or surf.axis1[-1] < self.rail_nominal(kind) - _SNAP:
                    raise CharLibError(f"{kind.value}.{name} voltage axis does not cover "
                                       f"[{self.v_floor}, {self.rail_nominal(kind)}]")
            for name in ("delay", "leakage"):
                ax = getattr(s, name).axis2
                if ax[0] > self.t_min + _SNAP or ax[-1] < self.t_max - _SNAP:
                    raise CharLibError(f"{kind.value}.{name} temperature axis does not cover "
                                       f"[{self.t_min}, {self.t_max}]")
            ax = s.switch_energy.axis2
            if ax[0] > _SNAP or ax[-1] < 1 - _SNAP:
                raise CharLibError(f"{kind.value}.switch_energy activity axis does not cover [0, 1]")
        _check_monotone(self)

    def rail_nominal(self, kind: ResourceKind) -> float:
        return self.v_bram_nom if kind.on_bram_rail else self.v_core_nom

    def _check_v(self, kind, v):
        v = np.asarray(v, dtype=float)
        hi = self.rail_nominal(kind)
        if v.size and not (v.min() >= self.v_floor - _SNAP and v.max() <= hi + _SNAP):
            raise RangeError(f"{kind.value}: voltage {np.ravel(v)[0]!r} outside "
                             f"[{self.v_floor}, {hi}]")

    def delay(self, kind: ResourceKind, v, t):
        self._check_v(kind, v)
        _check_range(t, self.t_min, self.t_max, "temperature")
        return self.surfaces[kind].delay(v, t, ("voltage", "temperature"))

    def leakage(self, kind: ResourceKind, v, t):
        self._check_v(kind, v)
        _check_range(t, self.t_min, self.t_max, "temperature")
        return self.surfaces[kind].leakage(v, t, ("voltage", "temperature"))

    def switch_energy(self, kind: ResourceKind, v, alpha):
        self._check_v(kind, v)
        _check_range(alpha, 0.0, 1.0, "activity")
        return self.surfaces[kind].switch_energy(v, alpha, ("voltage", "activity"))

    def __eq__(self, other):
        if not isinstance(other, CharLib):
            return NotImplemented
        meta = ("v_core_nom", "v_bram_nom", "v_floor", "t_min", "t_max")
        return (all(getattr(self, f) == getattr(other, f) for f in meta)
                and all(self.surfaces[k] == other.surfaces[k] for k in KINDS))


def _check_range(x, lo, hi, name):
    x = np.asarray(x, dtype=float)
    if x.size and not (x.min() >= lo - _SNAP and x.max() <= hi + _SNAP):
        raise RangeError(f"{name} {np.ravel(x)[0]!r} outside [{lo}, {hi}]")


def _check_monotone(lib: CharLib) -> None:
    """Exhaustive adjacent-knot monotonicity checks; raises CharLibError."""

    def first_violation(values, axis, sign):
        d = np.diff(values, axis=axis) * sign
        bad = np.argwhere(d < 0)
        return None if len(bad) == 0 else tuple(bad[0])

    for kind in KINDS:
        s = lib.surfaces[kind]
        checks = (
            ("delay", s.delay, 0, -1, "non-increasing in voltage"),
            ("delay", s.delay, 1, +1, "non-decreasing in temperature"),
            ("leakage", s.leakage, 0, +1, "non-decreasing in voltage"),
            ("leakage", s.leakage, 1, +1, "non-decreasing in temperature"),
            ("switch_energy", s.switch_energy, 0, +1, "non-decreasing in voltage"),
        )
        for name, surf, axis, sign, what in checks:
            hit = first_violation(surf.values, axis, sign)
            if hit is None:
                continue
            i, j = hit
            a = (float(surf.axis1[i]), float(surf.axis2[j]))
            b = (float(surf.axis1[i + 1 - axis]), float(surf.axis2[j + axis]))
            raise CharLibError(f"{kind.value}.{name} must be {what}; violated between "
                               f"knots {a} and {b}")


# -- public lookup functions -------------------------------------------------

def delay_of(lib: CharLib, kind: ResourceKind, v, t):
    """Delay in seconds of one ``kind`` instance at supply ``v`` and temperature ``t``."""
    return lib.delay(kind, v, t)


def leakage_of(lib: CharLib, kind: ResourceKind, v, t):
    """Leakage power in watts."""
    return lib.leakage(kind, v, t)


def switch_energy_of(lib: CharLib, kind: ResourceKind, v, alpha):
    """Switching energy in joules per clock cycle at activity ``alpha``."""
    return lib.switch_energy(kind, v, alpha)


_ACTIVITY_ANCHORS = ((0.0, 0.0), (0.1, 0.05), (1.0, 0.27))


def internal_activity(alpha_in: float) -> float:
    """Map primary-input activity to the average internal-node activity.

    Piecewise linear through (0, 0), (0.1, 0.05) and (1.0, 0.27).
    """
    a = float(alpha_in)
    if not (0.0 <= a <= 1.0) or math.isnan(a):
        raise RangeError(f"activity {alpha_in!r} outside [0, 1]")
    xs, ys = zip(*_ACTIVITY_ANCHORS)
    return float(np.interp(a, xs, ys))


# -- synthetic library -------------------------------------------------------

@dataclass(frozen=True)
class _KindModel:
    delay_s: float      # at (rail nominal, 100 C)
    vth: float          # alpha-power-law threshold
    exponent: float     # alpha-power-law exponent; None-like 0 => solved
    t_slope: float      # fractional delay loss per degree below 100 C
    leak_w: float       # at (rail nominal, 100 C)
    leak_vpow: float
    leak_kv: float
    energy_j: float     # at (rail nominal, activity 0.5)
    energy_vpow: float


# SB energy is derived from the total-power anchor; exponent 0 means solved.
_MODELS = {
    ResourceKind.LUT: _KindModel(250e-12, 0.38, 1.25, 0.0015, 1.0e-3, 1, 3.0, 4.0e-12, 2),
    ResourceKind.FF: _KindModel(60e-12, 0.32, 1.15, 0.0015, 0.2e-3, 1, 2.5, 1.6e-12, 2),
    ResourceKind.SB: _KindModel(200e-12, 0.30, 0.0, 0.0025, 0.48e-3, 1, 3.0, 0.0, 2),
    ResourceKind.CB: _KindModel(120e-12, 0.30, 1.10, 0.0020, 0.24e-3, 1, 3.0, 1.0e-12, 2),
    ResourceKind.LOCAL: _KindModel(80e-12, 0.30, 1.10, 0.0020, 0.16e-3, 1, 3.0, 0.6e-12, 2),
    ResourceKind.BRAM: _KindModel(1.5e-9, 0.45, 1.60, 0.0010, 2.4e-3, 2, 5.0, 32.0e-12, 3),
    ResourceKind.DSP: _KindModel(2.0e-9, 0.32, 1.20, 0.0020, 6.0e-3, 1, 3.5, 48.0e-12, 2),
}

# temperature-induced slack and the voltage that consumes it, for SB
SB_DELAY_RATIO_40C = 0.85
SB_MARGIN_VOLTAGE = 0.68
SB_POWER_RATIO = 0.68
# reference clock used when quoting SB total power at fixed frequency
SB_REF_CLOCK_S = 5e-9
SB_REF_ACTIVITY = 0.5

_DSP_ACTIVITY = ((0.0, 0.55), (0.1, 1.0), (0.3, 1.37), (0.7, 1.37), (1.0, 1.10))


def _activity_profile(kind: ResourceKind, alpha: np.ndarray) -> np.ndarray:
    if kind is ResourceKind.DSP:
        xs, ys = zip(*_DSP_ACTIVITY)
        return np.interp(alpha, xs, ys)
    # small floor for clocking/glitch energy keeps the table strictly positive
    return 0.05 + alpha


def _vfactor(v, vnom, vth, a):
    return (v / (v - vth) ** a) / (vnom / (vnom - vth) ** a)


def _sb_exponent(vth: float) -> float:
    # delay(0.68 V)/delay(0.8 V) at fixed T must equal 1/0.85
    need = (1.0 / SB_DELAY_RATIO_40C) / (SB_MARGIN_VOLTAGE / V_CORE_NOM)
    return math.log(need) / math.log((V_CORE_NOM - vth) / (SB_MARGIN_VOLTAGE - vth))


def _leak_vfactor(m: _KindModel, v, vnom):
    return (v / vnom) ** m.leak_vpow * np.exp(m.leak_kv * (v - vnom))


def _sb_energy(leak_w: float, m: _KindModel) -> float:
    """SB energy/cycle at nominal making the 0.68 V total-power ratio exact."""
    r_dyn = (SB_MARGIN_VOLTAGE / V_CORE_NOM) ** m.energy_vpow
    r_leak = float(_leak_vfactor(m, SB_MARGIN_VOLTAGE, V_CORE_NOM))
    share = (r_dyn - SB_POWER_RATIO) / (r_dyn - r_leak)
    leak_40 = leak_w * math.exp(LEAK_TEMP_COEFF * (40.0 - T_MAX))
    p_dyn = leak_40 * (1 - share) / share
    return p_dyn * SB_REF_CLOCK_S


def knots_voltage() -> np.ndarray:
    mv = np.arange(int(round(V_FLOOR * 1000)), int(round(V_BRAM_NOM * 1000)) + 1, V_STEP_MV)
    return mv / 1000.0


def knots_temperature() -> np.ndarray:
    return np.arange(T_MIN, T_MAX + T_STEP_C / 2, T_STEP_C)


def knots_activity() -> np.ndarray:
    return np.round(np.arange(0, 21) * ALPHA_STEP, 12)


def synth_charlib(seed: int = 0) -> CharLib:
    """Deterministic surrogate library.

    ``seed`` only jitters per-kind absolute magnitudes by up to +/-5%; all
    ratio-type shape constraints are independent of it.
    """
    rng = np.random.default_rng(seed)
    vk, tk, ak = knots_voltage(), knots_temperature(), knots_activity()
    V, T = np.meshgrid(vk, tk, indexing="ij")
    Va, A = np.meshgrid(vk, ak, indexing="ij")
    surfaces = {}
    for kind in KINDS:
        m = _MODELS[kind]
        j_delay, j_leak, j_energy = rng.uniform(0.95, 1.05, size=3)
        vnom = V_BRAM_NOM if kind.on_bram_rail else V_CORE_NOM
        exponent = _sb_exponent(m.vth) if kind is ResourceKind.SB else m.exponent
        temp = 1.0 - m.t_slope * (T_MAX - T)
        delay = m.delay_s * j_delay * _vfactor(V, vnom, m.vth, exponent) * temp

        leak_w = m.leak_w * j_leak
        leakage = leak_w * _leak_vfactor(m, V, vnom) * np.exp(LEAK_TEMP_COEFF * (T - T_MAX))

        if kind is ResourceKind.SB:
            # common jitter keeps the SB leakage/dynamic split intact
            energy_j = _sb_energy(leak_w, m)
        else:
            energy_j = m.energy_j * j_energy
        act = _activity_profile(kind, A) / _activity_profile(kind, np.array(SB_REF_ACTIVITY))
        energy = energy_j * (Va / vnom) ** m.energy_vpow * act

        surfaces[kind] = KindSurfaces(
            delay=CharSurface(vk, tk, delay),
            leakage=CharSurface(vk, tk, leakage),
            switch_energy=CharSurface(vk, ak, energy),
        )
    return CharLib(surfaces)


# -- interchange document ----------------------------------------------------

def charlib_to_dict(lib: CharLib) -> dict:
    doc = {
        "metadata": {
            "v_core_nom": lib.v_core_nom,
            "v_bram_nom": lib.v_bram_nom,
            "v_floor": lib.v_floor,
            "t_min": lib.t_min,
            "t_max": lib.t_max,
        },
    }
    for kind in KINDS:
        s = lib.surfaces[kind]
        doc[kind.value] = {name: getattr(s, name).to_dict() for name in SURFACE_NAMES}
    return doc


def charlib_from_dict(doc) -> CharLib:
    if not isinstance(doc, dict):
        raise CharLibError("characterization document must be a JSON object")
    meta = doc.get("metadata", {})
    if not isinstance(meta, dict):
        raise CharLibError("metadata must be an object")
    missing = [k.value for k in KINDS if k.value not in doc]
    if missing:
        raise CharLibError(f"missing resource kind(s): {', '.join(missing)}")
    surfaces = {}
    for kind in KINDS:
        entry = doc[kind.value]
        parts = {}
        for name in SURFACE_NAMES:
            try:
                raw = entry[name]
                parts[name] = CharSurface(raw["axis1"], raw["axis2"], raw["values"])
            except CharLibError as exc:
                raise CharLibError(f"{kind.value}.{name}: {exc}") from None
            except (KeyError, TypeError, ValueError) as exc:
                raise CharLibError(f"{kind.value}.{name}: malformed surface ({exc})") from None
        surfaces[kind] = KindSurfaces(**parts)
    try:
        fields = {k: float(meta[k]) for k in ("v_core_nom", "v_bram_nom", "v_floor", "t_min", "t_max")
                  if k in meta}
    except (TypeError, ValueError) as exc:
        raise CharLibError(f"bad metadata: {exc}") from None
    return CharLib(surfaces, **fields)


def save_charlib(lib: CharLib, path) -> None:
    Path(path).write_text(json.dumps(charlib_to_dict(lib), indent=1) + "\n", encoding="utf-8")


def load_charlib(path) -> CharLib:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CharLibError(f"cannot parse {path}: {exc}") from None
    return charlib_from_dict(doc)

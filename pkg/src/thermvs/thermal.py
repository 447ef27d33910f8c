"""Steady-state resistive-grid thermal model.

Each tile is a node with a convective path to ambient (conductance
proportional to its area) and lateral conductances to its four neighbours
(proportional to the shared edge). Tiles are one unit wide and ``area`` units
tall, so vertical neighbours share a unit edge and horizontal neighbours share
the shorter of the two heights.

Calibration fixes the convective scale so that 1 W spread over the die in
proportion to area raises the area-weighted mean temperature by exactly
``theta_ja``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import eigsh

from .analysis import PowerField
from .design import Design
from .errors import ThermalError

# lateral resistance per unit of shared edge, C/W
DEFAULT_R_LAT = 5.0


@dataclass(frozen=True)
class ThermalConfig:
    theta_ja: float = 2.0
    r_lat: float = DEFAULT_R_LAT
    t_amb: float = 25.0
    eps: float = 0.01
    max_iter: int = 20000

    def __post_init__(self):
        if not self.theta_ja > 0:
            raise ValueError(f"theta_ja must be positive, got {self.theta_ja}")
        if not self.r_lat > 0:
            raise ValueError(f"r_lat must be positive, got {self.r_lat}")
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass(frozen=True, eq=False)
class ThermalModel:
    """Calibrated network for one grid; shareable and immutable."""

    config: ThermalConfig
    area: np.ndarray        # (m, n)
    g_conv: np.ndarray      # (m, n) W/C to ambient
    g_east: np.ndarray      # (m, n-1) W/C between (i, j) and (i, j+1)
    g_south: np.ndarray     # (m-1, n) W/C between (i, j) and (i+1, j)
    omega: float

    @property
    def shape(self) -> tuple[int, int]:
        return self.area.shape

    @property
    def r_conv(self) -> np.ndarray:
        """Per-tile convective resistance, C/W, flattened row-major."""
        return (1.0 / self.g_conv).ravel()

    @property
    def diagonal(self) -> np.ndarray:
        d = self.g_conv.copy()
        d[:, :-1] += self.g_east
        d[:, 1:] += self.g_east
        d[:-1, :] += self.g_south
        d[1:, :] += self.g_south
        return d


def _jacobi_radius(g_conv, g_east, g_south) -> float:
    m, n = g_conv.shape
    idx = np.arange(m * n).reshape(m, n)
    rows = np.concatenate([idx[:, :-1].ravel(), idx[:-1, :].ravel()])
    cols = np.concatenate([idx[:, 1:].ravel(), idx[1:, :].ravel()])
    vals = np.concatenate([g_east.ravel(), g_south.ravel()])
    if len(vals) == 0:
        return 0.0
    off = sparse.coo_matrix((vals, (rows, cols)), shape=(m * n, m * n))
    off = (off + off.T).tocsr()
    d = g_conv.ravel().copy()
    d += np.asarray(off.sum(axis=1)).ravel()
    s = sparse.diags(1.0 / np.sqrt(d))
    sym = s @ off @ s
    if m * n <= 400:
        return float(np.max(np.abs(np.linalg.eigvalsh(sym.toarray()))))
    return float(abs(eigsh(sym, k=1, which="LM", return_eigenvectors=False)[0]))


def calibrate(config: ThermalConfig, design: Design) -> ThermalModel:
    """Build the network for ``design`` and fix the convective scale.

    With convective conductance ``area / r0`` every watt leaves through
    convection, so the area-weighted mean rise is ``r0 * P / total_area`` for
    any power distribution; ``r0 = theta_ja * total_area`` is therefore exact.
    """
    area = design.area.reshape(design.m, design.n)
    r0 = config.theta_ja * area.sum()
    g_conv = area / r0
    g_east = np.minimum(area[:, :-1], area[:, 1:]) / config.r_lat
    g_south = np.ones((design.m - 1, design.n)) / config.r_lat
    rho = min(_jacobi_radius(g_conv, g_east, g_south), 1.0 - 1e-12)
    omega = 2.0 / (1.0 + math.sqrt(1.0 - rho * rho))
    for a in (area, g_conv, g_east, g_south):
        a.setflags(write=False)
    return ThermalModel(config, area, g_conv, g_east, g_south, omega)


def _power_grid(model: ThermalModel, power) -> np.ndarray:
    if isinstance(power, PowerField):
        power = power.per_tile
    p = np.asarray(power, dtype=float)
    if p.size != model.area.size:
        raise ValueError(f"power field has {p.size} entries, grid has {model.area.size} tiles")
    return p.reshape(model.shape)


def solve_rise(model: ThermalModel, power, initial=None) -> np.ndarray:
    """Temperature rise above ambient (flattened) via red-black SOR relaxation.

    Iterates until the a-posteriori error estimate, from the observed
    contraction of successive updates, falls below ``eps / 10``.
    """
    p = _power_grid(model, power)
    m, n = model.shape
    cfg = model.config
    ge, gs = model.g_east, model.g_south
    diag = model.diagonal
    x = np.zeros((m, n)) if initial is None else np.array(initial, dtype=float).reshape(m, n)
    ii, jj = np.indices((m, n))
    colors = ((ii + jj) % 2 == 0, (ii + jj) % 2 == 1)
    tol = cfg.eps / 10.0
    floor_rate = model.omega - 1.0
    prev = math.inf
    for _ in range(cfg.max_iter):
        step = 0.0
        for mask in colors:
            nb = p.copy()
            nb[:, :-1] += ge * x[:, 1:]
            nb[:, 1:] += ge * x[:, :-1]
            nb[:-1, :] += gs * x[1:, :]
            nb[1:, :] += gs * x[:-1, :]
            delta = model.omega * (nb / diag - x)
            delta[~mask] = 0.0
            x += delta
            step = max(step, float(np.abs(delta).max()))
        if step == 0.0:
            return x.ravel()
        rate = max(step / prev, floor_rate) if prev < math.inf else 1.0
        if rate < 1.0 and step * rate / (1.0 - rate) < tol and step < tol:
            return x.ravel()
        prev = step
    raise ThermalError(f"thermal solver did not converge in {cfg.max_iter} sweeps")


def solve_steady(model: ThermalModel, power, t_amb: float | None = None, initial=None) -> np.ndarray:
    """Steady-state tile temperatures (C, flattened row-major).

    ``initial`` is an optional starting temperature field used as a warm start.
    """
    amb = model.config.t_amb if t_amb is None else float(t_amb)
    guess = None if initial is None else np.asarray(initial, dtype=float) - amb
    return amb + solve_rise(model, power, guess)


def mean_rise(model: ThermalModel, temps, t_amb: float | None = None) -> float:
    """Area-weighted mean temperature rise above ambient."""
    amb = model.config.t_amb if t_amb is None else t_amb
    a = model.area.ravel()
    return float(((np.asarray(temps) - amb) * a).sum() / a.sum())


def uniform_power(model: ThermalModel, total: float = 1.0) -> np.ndarray:
    """``total`` watts distributed in proportion to tile area."""
    a = model.area.ravel()
    return total * a / a.sum()

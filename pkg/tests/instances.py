"""Seeded random problem instances shared by the optimizer and acceptance tests."""

from dataclasses import dataclass

import numpy as np

from thermvs.design import Design, gen_synthetic_design
from thermvs.thermal import ThermalConfig, ThermalModel, calibrate


@dataclass
class Instance:
    design: Design
    model: ThermalModel
    t_amb: float
    label: str


def random_instances(count, seed, max_side=6, max_paths=30, t_ambs=(25.0, 40.0, 60.0),
                     thetas=(2.0, 12.0)):
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        m = int(rng.integers(2, max_side + 1))
        n = int(rng.integers(2, max_side + 1))
        paths = int(rng.integers(4, max_paths + 1))
        dseed = int(rng.integers(0, 10_000))
        t_amb = float(t_ambs[k % len(t_ambs)])
        theta = float(thetas[int(rng.integers(len(thetas)))])
        design = gen_synthetic_design(m, n, paths, dseed)
        model = calibrate(ThermalConfig(theta_ja=theta), design)
        out.append(Instance(design, model, t_amb,
                            f"{m}x{n}/{paths}p/seed{dseed}/T{t_amb:g}/theta{theta:g}"))
    return out

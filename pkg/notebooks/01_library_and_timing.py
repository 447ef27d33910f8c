# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # Characterization library and path timing
#
# The synthetic library tabulates delay, leakage and switching energy for
# every resource kind on a 10 mV by 5 °C grid. Lookups interpolate
# bilinearly and refuse to extrapolate. This notebook looks at how the kinds
# diverge under voltage scaling and what that does to the critical path.

# %%
import numpy as np

from thermvs.analysis import VoltagePair, design_delay, path_delays
from thermvs.charlib import KINDS, ResourceKind as K, delay_of, leakage_of, switch_energy_of, synth_charlib
from thermvs.design import Design, Segment, Tile, TileKind, TimingPath

lib = synth_charlib(seed=0)

# %% [markdown]
# ## Temperature: cold silicon is faster
#
# Delays are normalized to their value at 100 °C and nominal voltage. The
# switch box gets 15% faster at 40 °C, which is the slack the optimizer
# later trades for a lower supply.

# %%
temps = np.arange(0, 101, 20)
print("kind   " + "".join(f"{t:>7.0f}C" for t in temps))
for kind in KINDS:
    vn = lib.rail_nominal(kind)
    rel = delay_of(lib, kind, vn, temps) / delay_of(lib, kind, vn, 100.0)
    print(f"{kind.value:<6} " + "".join(f"{r:8.3f}" for r in rel))

# %% [markdown]
# The margin is exactly consumed at 0.68 V: the switch box at 40 °C and
# 0.68 V is as fast as at 100 °C and 0.8 V.

# %%
print(delay_of(lib, K.SB, 0.68, 40) / delay_of(lib, K.SB, 0.80, 100))

# %% [markdown]
# ## Voltage: memories react hardest
#
# Each kind is scaled to the same fraction of its own rail nominal. BRAM
# sits on a separate 0.95 V rail and both its power and its delay move
# further than any fabric resource.

# %%
for frac in (0.9, 0.8, 0.7):
    print(f"-- {frac:.0%} of nominal")
    for kind in (K.LUT, K.SB, K.DSP, K.BRAM):
        vn = lib.rail_nominal(kind)
        v = round(vn * frac, 2)
        p = lambda x: leakage_of(lib, kind, x, 40) + switch_energy_of(lib, kind, x, 0.5) / 5e-9
        d = delay_of(lib, kind, v, 40) / delay_of(lib, kind, vn, 40)
        print(f"   {kind.value:<5} power x{p(v) / p(vn):.2f}  delay x{d:.2f}")

# %% [markdown]
# Leakage follows e^(0.015 ΔT) at any voltage:

# %%
print(leakage_of(lib, K.LUT, 0.8, 80) / leakage_of(lib, K.LUT, 0.8, 60), np.exp(0.3))

# %% [markdown]
# ## The critical path is not fixed
#
# LUTs slow down more than switch boxes as the core voltage drops. A path
# dominated by routing is critical at nominal voltage, while one dominated by
# logic takes over near the floor.

# %%
tiles = tuple(Tile(0, c, TileKind.CLB, {K.LUT: 4, K.SB: 8}, 0.2) for c in range(2))
routing = TimingPath("routing", tuple(Segment(K.SB, 0, i % 2) for i in range(6)) + (Segment(K.LUT, 0, 0),))
logic = TimingPath("logic", tuple(Segment(K.LUT, 0, i % 2) for i in range(5)))
two_paths = Design(1, 2, tiles, (routing, logic))

for mv in range(800, 540, -50):
    pair = VoltagePair(mv, 950)
    d = path_delays(two_paths, 50.0, pair, lib)
    worst, cp = design_delay(two_paths, 50.0, pair, lib)
    print(f"{mv} mV  routing {d[0] * 1e12:7.1f} ps  logic {d[1] * 1e12:7.1f} ps  -> {cp}")

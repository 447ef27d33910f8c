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
# # Minimum energy and voltage over-scaling
#
# Two variations on the fixed-clock flow. The first lets the clock follow
# the voltages and minimizes energy per cycle. The second keeps the clock
# but accepts paths that miss it by a bounded amount.

# %%
from thermvs.analysis import nominal_pair, worst_case_delay
from thermvs.charlib import synth_charlib
from thermvs.design import gen_synthetic_design
from thermvs.optimizer import energy_at_clock, evaluate_pair, optimize_energy, overscale_sweep, select_voltages
from thermvs.thermal import ThermalConfig, calibrate

lib = synth_charlib(seed=0)
design = gen_synthetic_design(5, 5, 20, seed=3)
model = calibrate(ThermalConfig(theta_ja=12.0), design)
d_worst = worst_case_delay(design, lib)
T_AMB = 65.0

# %% [markdown]
# ## Energy per cycle
#
# Every voltage pair runs at its own longest path delay. Pairs are visited
# cheapest-first by their energy before thermal feedback, and a pair is
# skipped once that optimistic figure already loses to the incumbent.

# %%
best = optimize_energy(design, lib, model, T_AMB)
fixed = select_voltages(design, lib, model, T_AMB)
base = evaluate_pair(design, lib, model, T_AMB, nominal_pair(lib), d_worst)
print(f"minimum energy  {best.pair}  clock {best.clock_period / d_worst:.2f}x d_worst  "
      f"{best.energy * 1e12:.1f} pJ/cycle")
print(f"fixed clock     {fixed.pair}  clock 1.00x d_worst  {fixed.energy * 1e12:.1f} pJ/cycle")
print(f"nominal         {base.pair}  clock 1.00x d_worst  {base.energy * 1e12:.1f} pJ/cycle")
print({k: best.stats[k] for k in ("pairs", "evaluated", "pruned", "solves", "cache_hits")})

# %% [markdown]
# For a fixed pair, stretching the clock never helps: leakage burns for the
# whole longer cycle while switching energy stays put.

# %%
for k in (1.0, 1.5, 2.0):
    e = energy_at_clock(design, lib, best.temps, best.pair, k * best.clock_period)
    print(f"clock x{k:.1f}: {e * 1e12:.1f} pJ")

# %% [markdown]
# ## Over-scaling
#
# The timing constraint is relaxed to β·d_worst while the clock stays at
# d_worst. Paths slower than d_worst are reported with their deficit, the
# input a timing-error model would consume.

# %%
for pt in overscale_sweep(design, lib, model, T_AMB, betas=[1.0, 1.1, 1.2, 1.3, 1.4]):
    print(f"beta {pt.beta:.1f}  {pt.result.pair}  {pt.result.power * 1e3:6.1f} mW  "
          f"{len(pt.violations):>2} violating paths  worst deficit {pt.max_deficit * 1e12:6.1f} ps")

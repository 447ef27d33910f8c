import numpy as np
import pytest

from instances import random_instances
from thermvs.analysis import VoltagePair, design_delay, nominal_pair, path_delays, tile_powers, total_power, worst_case_delay
from thermvs.charlib import ResourceKind as K
from thermvs.design import Design, Segment, Tile, TileKind, TimingPath, gen_synthetic_design
from thermvs.errors import InfeasibleError, JunctionCapError
from thermvs.optimizer import (
    VidLut,
    VoltageGrid,
    brute_force_reference,
    build_vid_lut,
    energy_at_clock,
    evaluate_pair,
    optimize_energy,
    overscale_sweep,
    select_voltages,
    verify_pair,
)
from thermvs.thermal import ThermalConfig, calibrate, solve_steady


@pytest.fixture(scope="module")
def d44():
    return gen_synthetic_design(4, 4, 10, seed=1)


@pytest.fixture(scope="module")
def m44(d44):
    return calibrate(ThermalConfig(theta_ja=12.0), d44)


def lone_tile():
    tile = Tile(0, 0, TileKind.CLB, {K.LUT: 40, K.SB: 80, K.FF: 40}, 0.2)
    return Design(1, 1, (tile,), (TimingPath("a", tuple(Segment(K.LUT, 0, 0) for _ in range(4))),))


def test_grid_from_lib(lib):
    g = VoltageGrid.from_lib(lib)
    assert g.core_mv[0] == 550 and g.core_mv[-1] == 800 and len(g.core_mv) == 26
    assert g.bram_mv[-1] == 950 and len(g.bram_mv) == 41
    coarse = VoltageGrid.from_lib(lib, 30)
    assert coarse.core_mv[-1] == 800 and coarse.core_mv[0] >= 550
    with pytest.raises(ValueError):
        VoltageGrid.from_lib(lib, core_min_mv=500)
    with pytest.raises(ValueError):
        VoltageGrid((700, 700), (800,))


def test_zero_margin_forces_nominal(lib):
    d = lone_tile()
    model = calibrate(ThermalConfig(theta_ja=12.0), d)
    d_worst = worst_case_delay(d, lib)
    p_hot = total_power(tile_powers(d, 100.0, nominal_pair(lib), d_worst, lib))
    # ambient at which nominal operation settles exactly at the junction cap
    t_amb = 100.0 - 12.0 * p_hot
    res = select_voltages(d, lib, model, t_amb)
    assert res.pair == VoltagePair(800, 950)
    assert res.max_temp == pytest.approx(100.0, abs=0.01)
    with pytest.raises(JunctionCapError):
        select_voltages(d, lib, model, t_amb + 1.0)


def test_matches_brute_force_4x4(lib, d44, m44):
    fast = select_voltages(d44, lib, m44, 40.0)
    ref = brute_force_reference(d44, lib, m44, 40.0)
    assert fast.pair == ref.pair
    assert fast.power == pytest.approx(ref.power, rel=1e-9)
    assert [r.pair for r in fast.trace] == [r.pair for r in ref.trace]


def test_result_is_feasible_and_settled(lib, d44, m44):
    res = select_voltages(d44, lib, m44, 40.0)
    assert res.feasible and res.converged and res.max_temp <= 100.0
    assert design_delay(d44, res.temps, res.pair, lib)[0] <= res.constraint
    assert res.constraint == worst_case_delay(d44, lib)
    # the final temperatures are a fixed point of the power/thermal loop
    pf = tile_powers(d44, res.temps, res.pair, res.clock_period, lib)
    again = solve_steady(m44, pf, 40.0)
    assert np.max(np.abs(again - res.temps)) <= 0.1 + m44.config.eps
    assert 1 <= res.iterations <= 8


def test_trace_columns(lib, d44, m44):
    res = select_voltages(d44, lib, m44, 40.0)
    row = res.trace[-1]
    assert row.pair == res.pair and row.iteration == res.iterations
    assert row.max_dt <= 0.1 and row.max_t == pytest.approx(res.max_temp)


def test_deterministic(lib, d44, m44):
    a = select_voltages(d44, lib, m44, 25.0)
    b = select_voltages(d44, lib, ThermalConfig(theta_ja=12.0), 25.0)
    assert a.trace == b.trace and np.array_equal(a.temps, b.temps)


def test_infeasible_constraint(lib, d44, m44):
    with pytest.raises(InfeasibleError):
        brute_force_reference(d44, lib, m44, 40.0, constraint=0.0)
    with pytest.raises(InfeasibleError):
        select_voltages(d44, lib, m44, 40.0, constraint=0.0)


def test_iteration_cap_flags_result(lib, d44, m44):
    res = select_voltages(d44, lib, m44, 40.0, delta_t=1e-9, max_iter=2)
    assert not res.converged and res.iterations == 2


def test_restricted_grid(lib, d44, m44):
    grid = VoltageGrid((700, 750, 800), (800, 950))
    res = select_voltages(d44, lib, m44, 40.0, grid=grid)
    ref = brute_force_reference(d44, lib, m44, 40.0, grid=grid)
    assert res.pair == ref.pair and res.pair.core_mv in grid.core_mv


def test_power_grows_with_ambient(lib):
    for inst in random_instances(3, 99, max_side=4, max_paths=12):
        powers = [select_voltages(inst.design, lib, inst.model, t).power for t in (20.0, 40.0, 60.0)]
        assert powers == sorted(powers)


# -- energy flow -------------------------------------------------------------

def test_single_pair_grid(lib, d44, m44):
    grid = VoltageGrid((700,), (850,))
    res = optimize_energy(d44, lib, m44, 40.0, grid=grid)
    assert res.pair == VoltagePair(700, 850)
    d_now = design_delay(d44, res.temps, res.pair, lib)[0]
    assert res.clock_period == pytest.approx(d_now, rel=1e-3)
    assert res.energy == pytest.approx(res.power * res.clock_period)


def test_pruning_matches_exhaustive_on_coarse_grid(lib, d44, m44):
    grid = VoltageGrid.from_lib(lib, 30)
    pruned = optimize_energy(d44, lib, m44, 40.0, grid=grid)
    full = optimize_energy(d44, lib, m44, 40.0, grid=grid, prune=False)
    assert abs(pruned.energy - full.energy) <= 0.005 * full.energy
    assert pruned.stats["solves"] < full.stats["solves"]
    assert len(full.evaluations) == len(grid.pairs)


def test_eq1_on_winner(lib, d44, m44):
    res = optimize_energy(d44, lib, m44, 40.0, grid=VoltageGrid.from_lib(lib, 50))
    e = energy_at_clock(d44, lib, res.temps, res.pair, res.clock_period)
    assert energy_at_clock(d44, lib, res.temps, res.pair, 2 * res.clock_period) > e
    assert res.leakage > 0


def test_energy_grows_with_ambient(lib, d44, m44):
    grid = VoltageGrid.from_lib(lib, 50)
    e = [optimize_energy(d44, lib, m44, t, grid=grid).energy for t in (20.0, 45.0, 70.0)]
    assert e == sorted(e)


# -- over-scaling ------------------------------------------------------------

def test_overscale_unit_beta_is_plain_selection(lib, d44, m44):
    (pt,) = overscale_sweep(d44, lib, m44, 40.0, betas=[1.0])
    plain = select_voltages(d44, lib, m44, 40.0)
    assert pt.result.pair == plain.pair and pt.violations == []


def test_overscale_reports_bounded_deficits(lib, d44, m44):
    d_worst = worst_case_delay(d44, lib)
    pts = overscale_sweep(d44, lib, m44, 40.0, betas=[1.0, 1.35])
    assert pts[1].result.power <= pts[0].result.power
    assert pts[1].violations
    assert pts[1].result.clock_period == d_worst
    delays = dict(zip(d44.path_ids, path_delays(d44, pts[1].result.temps, pts[1].result.pair, lib)))
    for v in pts[1].violations:
        assert v.deficit == pytest.approx(delays[v.path_id] - d_worst)
        assert 0 < v.deficit <= 0.35 * d_worst
    flagged = {v.path_id for v in pts[1].violations}
    assert flagged == {p for p, x in delays.items() if x > d_worst}


def test_overscale_rejects_beta_below_one(lib, d44, m44):
    with pytest.raises(ValueError):
        overscale_sweep(d44, lib, m44, 40.0, betas=[0.9])


# -- voltage table -----------------------------------------------------------

def test_single_key_table(lib, d44, m44):
    lut = build_vid_lut(d44, lib, m44, [30.0], margin=5.0)
    assert lut.entries[0][1] == select_voltages(d44, lib, m44, 35.0).pair


def test_full_table_reverifies(lib, d44, m44, tmp_path):
    keys = list(range(0, 90, 5))
    lut = build_vid_lut(d44, lib, m44, keys, margin=5.0)
    assert lut.keys == [float(k) for k in keys]
    d_worst = worst_case_delay(d44, lib)
    for k, pair in lut.entries:
        assert verify_pair(d44, lib, m44, k + 5.0, pair, d_worst)
    cores = [p.core_mv for _, p in lut.entries]
    assert cores == sorted(cores)

    p40 = evaluate_pair(d44, lib, m44, 40.0, lut.lookup(40.0), d_worst).power
    p65 = evaluate_pair(d44, lib, m44, 65.0, lut.lookup(65.0), d_worst).power
    assert p40 <= p65

    path = tmp_path / "lut.csv"
    lut.to_csv(path)
    assert path.read_text().splitlines()[0] == "t_c,v_core_mv,v_bram_mv"
    assert VidLut.from_csv(path) == lut


def test_table_lookup_rounds_up():
    lut = VidLut(((10.0, VoltagePair(600, 700)), (20.0, VoltagePair(650, 720))))
    assert lut.lookup(5.0) == VoltagePair(600, 700)
    assert lut.lookup(10.0) == VoltagePair(600, 700)
    assert lut.lookup(10.5) == VoltagePair(650, 720)
    with pytest.raises(KeyError):
        lut.lookup(21.0)
    with pytest.raises(ValueError):
        VidLut(((20.0, VoltagePair(600, 700)), (10.0, VoltagePair(600, 700))))


def test_table_names_infeasible_key(lib):
    d = lone_tile()
    model = calibrate(ThermalConfig(theta_ja=12.0), d)
    with pytest.raises(InfeasibleError, match="99"):
        build_vid_lut(d, lib, model, [20.0, 99.0], margin=5.0)

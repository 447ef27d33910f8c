"""Command-line front end.

Subcommands: characterize, scale, energy, overscale, lut, oracle-check.
Every run reads an optional JSON config whose keys mirror :class:`RunConfig`
and writes CSV/JSON reports into the output directory.

Exit codes: 0 success, 1 oracle mismatch, 2 usage, 3 input validation,
4 infeasible / junction cap, 5 non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .analysis import nominal_pair, worst_case_delay
from .charlib import CharLib, internal_activity, load_charlib, save_charlib, synth_charlib
from .design import Design, gen_synthetic_design, load_design
from .errors import (CharLibError, DesignError, InfeasibleError, RangeError, ThermalError)
from .optimizer import (brute_force_reference, build_vid_lut, evaluate_pair, optimize_energy,
                        overscale_sweep, select_voltages, VoltageGrid)
from .thermal import ThermalConfig, calibrate

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_INFEASIBLE = 4
EXIT_NONCONVERGED = 5


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    charlib: str | None = None
    charlib_seed: int = 0
    design: str | None = None
    synth_design: dict = field(default_factory=lambda: {"m": 6, "n": 6, "paths": 30, "seed": 0})
    t_amb: float = 40.0
    t_amb_sweep: list | None = None
    theta_ja: float = 2.0
    r_lat: float = 5.0
    delta_t: float = 0.1
    guardband: float = 1.0
    v_step_mv: int = 10
    v_core_min_mv: int | None = None
    v_core_max_mv: int | None = None
    v_bram_min_mv: int | None = None
    v_bram_max_mv: int | None = None
    betas: list = field(default_factory=lambda: [1.0, 1.1, 1.2, 1.3, 1.4])
    lut_keys: list = field(default_factory=lambda: list(range(0, 90, 5)))
    lut_margin: float = 5.0
    alpha_bounds: list = field(default_factory=lambda: [0.1, 1.0])
    out_dir: str = "out"
    oracle: bool = False
    prune: bool = True

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        p = Path(path)
        if not p.is_file():
            raise UsageError(f"config file not found: {path}")
        try:
            raw = json.loads(p.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DesignError(f"cannot parse config {path}: {exc}") from None
        if not isinstance(raw, dict):
            raise DesignError("config must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise DesignError(f"unknown config field(s): {', '.join(unknown)}")
        base = Path(path).parent
        for key in ("charlib", "design"):
            if raw.get(key) and not Path(raw[key]).is_absolute():
                raw[key] = str(base / raw[key])
        return cls(**raw)

    def validate(self) -> None:
        for key in ("charlib", "design"):
            val = getattr(self, key)
            if val is not None and not Path(val).is_file():
                raise DesignError(f"{key} file not found: {val}")
        if self.theta_ja <= 0 or self.r_lat <= 0 or self.delta_t <= 0:
            raise DesignError("theta_ja, r_lat and delta_t must be positive")
        if self.guardband < 1:
            raise DesignError("guardband must be >= 1")
        if any(b < 1 for b in self.betas):
            raise DesignError("every beta must be >= 1")
        if any(not 0 <= a <= 1 for a in self.alpha_bounds):
            raise DesignError("alpha_bounds must lie in [0, 1]")
        if self.v_step_mv <= 0:
            raise DesignError("v_step_mv must be positive")


# -- helpers -----------------------------------------------------------------

def _num(x) -> str:
    x = float(x)
    return str(int(x)) if x.is_integer() and abs(x) < 1e15 else repr(x)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_num(v) if isinstance(v, float) else v for v in r])


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    if out.exists() and not out.is_dir():
        raise UsageError(f"output path is not a directory: {out}")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _lib(cfg: RunConfig) -> CharLib:
    return load_charlib(cfg.charlib) if cfg.charlib else synth_charlib(cfg.charlib_seed)


def _design(cfg: RunConfig) -> Design:
    if cfg.design:
        return load_design(cfg.design)
    s = cfg.synth_design
    try:
        return gen_synthetic_design(int(s["m"]), int(s["n"]), int(s["paths"]), int(s.get("seed", 0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise DesignError(f"bad synth_design entry: {exc}") from None


def _grid(cfg: RunConfig, lib: CharLib) -> VoltageGrid:
    try:
        return VoltageGrid.from_lib(lib, cfg.v_step_mv, cfg.v_core_min_mv, cfg.v_core_max_mv,
                                    cfg.v_bram_min_mv, cfg.v_bram_max_mv)
    except ValueError as exc:
        raise DesignError(str(exc)) from None


def _setup(cfg: RunConfig):
    cfg.validate()
    lib = _lib(cfg)
    design = _design(cfg)
    model = calibrate(ThermalConfig(theta_ja=cfg.theta_ja, r_lat=cfg.r_lat, t_amb=cfg.t_amb), design)
    return lib, design, model, _grid(cfg, lib)


# -- subcommands -------------------------------------------------------------

def cmd_characterize(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    lib = synth_charlib(cfg.charlib_seed)
    save_charlib(lib, out / "charlib.json")
    return EXIT_OK


def cmd_scale(cfg: RunConfig) -> int:
    lib, design, model, grid = _setup(cfg)
    out = _out_dir(cfg)
    d_worst = worst_case_delay(design, lib, cfg.guardband)
    sweep = list(cfg.t_amb_sweep) if cfg.t_amb_sweep else [cfg.t_amb]
    results = {}
    v_rows, p_rows = [], []
    status = EXIT_OK
    failure = None
    for t in sweep:
        try:
            res = select_voltages(design, lib, model, t, cfg.delta_t, d_worst, grid=grid)
        except InfeasibleError as exc:
            failure = f"T_amb = {t} C: {exc}"
            status = EXIT_INFEASIBLE
            break
        results[t] = res
        if not res.converged:
            status = max(status, EXIT_NONCONVERGED)
        v_rows.append([float(t), res.pair.core_mv, res.pair.bram_mv])
        for a_in in cfg.alpha_bounds:
            bounded = design.with_alpha(internal_activity(a_in))
            try:
                base = evaluate_pair(bounded, lib, model, t, nominal_pair(lib), d_worst, cfg.delta_t)
                opt = evaluate_pair(bounded, lib, model, t, res.pair, d_worst, cfg.delta_t)
            except InfeasibleError as exc:
                failure = f"T_amb = {t} C, alpha {a_in}: {exc}"
                status = EXIT_INFEASIBLE
                break
            saving = 100.0 * (base.power - opt.power) / base.power
            p_rows.append([float(t), float(a_in), base.power, opt.power, saving])
        if status == EXIT_INFEASIBLE:
            break

    _write_csv(out / "voltages.csv", ["t_amb_c", "v_core_mv", "v_bram_mv"], v_rows)
    _write_csv(out / "power.csv", ["t_amb_c", "alpha_in", "p_baseline_w", "p_opt_w", "saving_pct"],
               p_rows)
    trace_res = results.get(cfg.t_amb)
    if trace_res is None and status != EXIT_INFEASIBLE:
        try:
            trace_res = select_voltages(design, lib, model, cfg.t_amb, cfg.delta_t, d_worst, grid=grid)
        except InfeasibleError as exc:
            failure, status = f"T_amb = {cfg.t_amb} C: {exc}", EXIT_INFEASIBLE
    rows = [] if trace_res is None else [
        [r.iteration, r.pair.core_mv, r.pair.bram_mv, r.power, r.max_t] for r in trace_res.trace]
    _write_csv(out / "trace.csv", ["iteration", "v_core_mv", "v_bram_mv", "power_w", "t_junct_c"], rows)

    cores = [r[1] for r in v_rows]
    brams = [r[2] for r in v_rows]
    summary = {
        "rows": len(v_rows),
        "d_worst_s": d_worst,
        "v_core_nondecreasing": all(b >= a for a, b in zip(cores, cores[1:])),
        "v_bram_nondecreasing": all(b >= a for a, b in zip(brams, brams[1:])),
        "all_converged": all(r.converged for r in results.values()),
    }
    if failure:
        summary["error"] = failure
    if cfg.oracle and trace_res is not None:
        ref = brute_force_reference(design, lib, model, cfg.t_amb, cfg.delta_t, d_worst, grid=grid)
        summary["oracle_agrees"] = (ref.pair == trace_res.pair and ref.power == trace_res.power)
    _write_json(out / "summary.json", summary)
    if failure:
        print(f"error: {failure}", file=sys.stderr)
    return status


def cmd_energy(cfg: RunConfig) -> int:
    lib, design, model, grid = _setup(cfg)
    out = _out_dir(cfg)
    d_worst = worst_case_delay(design, lib, cfg.guardband)
    base = evaluate_pair(design, lib, model, cfg.t_amb, nominal_pair(lib), d_worst, cfg.delta_t)
    res = optimize_energy(design, lib, model, cfg.t_amb, cfg.delta_t, grid=grid, prune=cfg.prune)
    base_energy = base.power * d_worst
    saving = 100.0 * (base_energy - res.energy) / base_energy
    _write_csv(out / "energy.csv", ["v_core_mv", "v_bram_mv", "freq_ratio", "energy_j", "saving_pct"],
               [[res.pair.core_mv, res.pair.bram_mv, d_worst / res.clock_period, res.energy, saving]])
    summary = {
        "baseline_energy_j": base_energy,
        "d_worst_s": d_worst,
        "clock_period_s": res.clock_period,
        "converged": res.converged,
        "stats": res.stats,
    }
    _write_json(out / "energy_summary.json", summary)
    return EXIT_OK if res.converged else EXIT_NONCONVERGED


def cmd_overscale(cfg: RunConfig) -> int:
    lib, design, model, grid = _setup(cfg)
    out = _out_dir(cfg)
    points = overscale_sweep(design, lib, model, cfg.t_amb, cfg.delta_t, cfg.betas,
                             guardband=cfg.guardband, grid=grid)
    _write_csv(out / "overscale.csv", ["beta", "power_w", "violating_path_count", "max_deficit_s"],
               [[float(p.beta), p.result.power, len(p.violations), p.max_deficit] for p in points])
    _write_csv(out / "violations.csv", ["beta", "path_id", "delay_s", "deficit_s"],
               [[float(p.beta), v.path_id, v.delay, v.deficit] for p in points for v in p.violations])
    return EXIT_OK if all(p.result.converged for p in points) else EXIT_NONCONVERGED


def cmd_lut(cfg: RunConfig) -> int:
    lib, design, model, grid = _setup(cfg)
    out = _out_dir(cfg)
    lut = build_vid_lut(design, lib, model, cfg.lut_keys, cfg.delta_t, cfg.lut_margin,
                        guardband=cfg.guardband, grid=grid)
    lut.to_csv(out / "lut.csv")
    return EXIT_OK


def cmd_oracle_check(cfg: RunConfig) -> int:
    lib, design, model, grid = _setup(cfg)
    out = _out_dir(cfg)
    fast = select_voltages(design, lib, model, cfg.t_amb, cfg.delta_t, grid=grid)
    ref = brute_force_reference(design, lib, model, cfg.t_amb, cfg.delta_t, grid=grid)
    agree = fast.pair == ref.pair and fast.power == ref.power
    _write_json(out / "oracle.json", {
        "agree": agree,
        "fast": {"v_core_mv": fast.pair.core_mv, "v_bram_mv": fast.pair.bram_mv, "power_w": fast.power},
        "reference": {"v_core_mv": ref.pair.core_mv, "v_bram_mv": ref.pair.bram_mv,
                      "power_w": ref.power},
    })
    return EXIT_OK if agree else EXIT_MISMATCH


COMMANDS = {
    "characterize": cmd_characterize,
    "scale": cmd_scale,
    "energy": cmd_energy,
    "overscale": cmd_overscale,
    "lut": cmd_lut,
    "oracle-check": cmd_oracle_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thermvs", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument("--out", help="output directory (overrides out_dir)")
    parser.add_argument("--seed", type=int, help="seed for synthetic library and design")
    parser.add_argument("--no-prune", action="store_true", help="exhaustive energy search")
    parser.add_argument("--oracle", action="store_true", help="cross-check against brute force")
    parser.add_argument("--charlib", help="characterization document (JSON)")
    parser.add_argument("--design", help="design document (JSON)")
    parser.add_argument("--t-amb", type=float, help="ambient temperature, C")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
        if args.out:
            cfg.out_dir = args.out
        if args.seed is not None:
            cfg.charlib_seed = args.seed
            cfg.synth_design = {**cfg.synth_design, "seed": args.seed}
        if args.no_prune:
            cfg.prune = False
        if args.oracle:
            cfg.oracle = True
        if args.charlib:
            cfg.charlib = args.charlib
        if args.design:
            cfg.design = args.design
        if args.t_amb is not None:
            cfg.t_amb = args.t_amb
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CharLibError, DesignError, RangeError, TypeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ThermalError as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED


if __name__ == "__main__":
    sys.exit(main())

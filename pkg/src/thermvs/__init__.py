"""Temperature-aware dual-rail voltage selection for FPGA-like tile grids."""

from .analysis import (T_JUNCTION_MAX, PowerField, VoltagePair, design_delay, nominal_pair,
                       path_delay, path_delays, tile_powers, total_power, worst_case_delay)
from .charlib import (CharLib, CharSurface, ResourceKind, delay_of, internal_activity,
                      leakage_of, load_charlib, save_charlib, switch_energy_of, synth_charlib)
from .design import (Design, Segment, Tile, TileKind, TimingPath, gen_synthetic_design,
                     load_design, save_design)
from .errors import (CharLibError, DesignError, InfeasibleError, JunctionCapError, RangeError,
                     ThermalError, ThermVSError)
from .optimizer import (OptResult, VidLut, VoltageGrid, brute_force_reference, build_vid_lut,
                        evaluate_pair, optimize_energy, overscale_sweep, select_voltages,
                        violation_report)
from .thermal import ThermalConfig, ThermalModel, calibrate, solve_steady

__version__ = "0.1.0"

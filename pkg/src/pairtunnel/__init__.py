"""pairtunnel: classical-optics simulation of two-boson tunneling dynamics.

A 2D paraxial split-step propagator, an imaginary-time guided-mode solver
and a reduced five-amplitude coupled-mode model share one set of grids,
potentials and observables (p_R, p_2), tracing the crossover from Rabi
oscillations to correlated pair tunneling to fragmented-pair tunneling.
"""

__version__ = "0.1.0"

from .bpm import BpmConfig, PhysicsConstants, Stepper, conjugate_stepper, make_stepper, propagate, step
from .config import RunConfig, config_to_dict, load_config
from .coupledmode import (CmVariant, CoupledModeParams, amplitude_norm, cm_analytic_rabi,
                          cm_integrate, cm_rhs, estimate_params)
from .errors import ConfigError, NotGuidedError, NumericalError
from .grid import (ComplexField2D, Grid2D, QuadrantPowers, ScalarField2D, integrate, make_grid,
                   normalize, overlap, quadrant_powers, symmetry_deviation)
from .modes import (GuidedMode, ModeSet, SolverConfig, apply_hamiltonian, launch_field,
                    mode_parity, solve_guide_modes, solve_modes)
from .potentials import (ErfStructure, ErfWellSpec, FourCoreFiberSpec, GuideId, InteractionSpec,
                         build_four_core_potential, build_isolated_guide_potential,
                         build_potential, build_two_boson_potential, double_well_1d,
                         interaction_1d)
from .scenarios import (Regime, RegimeLabel, RegimeThresholds, classify_regime, run_bpm,
                        run_fig2, run_fig3, run_fig4, sweep)
from .snapshots import read_snapshot, write_snapshot
from .trace import TunnelingTrace, read_trace_csv, write_trace_csv

"""Preset runners, regime classification, sweeps and their file outputs.

The figure presets reproduce the three published scenarios: the erf
double-well structure swept in interaction strength dn2, the coupled-mode
model swept through its (delta1, kappa1) presets, and the four-core cut
fiber swept in cut width w_c.  Every run can emit a trace CSV, the fully
resolved config JSON (provenance) and a rendered figure next to them.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import find_peaks

from .bpm import BpmConfig, PhysicsConstants, make_stepper, propagate
from .config import (CmRunConfig, GridConfig, OutputConfig, PropagationConfig, RunConfig,
                     config_to_dict)
from .coupledmode import CmVariant, CoupledModeParams, cm_integrate
from .errors import ConfigError
from .grid import Grid2D
from .modes import SolverConfig, launch_field
from .potentials import (ErfStructure, ErfWellSpec, FourCoreFiberSpec, InteractionSpec,
                         build_potential)
from .report import save_overlay_figure, save_trace_figure
from .snapshots import write_snapshot
from .trace import TunnelingTrace, read_trace_csv, write_trace_csv

__all__ = [
    "Regime",
    "RegimeThresholds",
    "RegimeLabel",
    "classify_regime",
    "run_bpm",
    "run_fig2",
    "run_fig3",
    "run_fig4",
    "sweep",
    "FIG2_DN2_VALUES",
    "FIG3_PRESETS",
    "FIG4_WC_VALUES",
]

log = logging.getLogger(__name__)

FIG2_DN2_VALUES = (0.0, 0.5e-3, 1.5e-3, 15e-3)
# interaction stretches the slow cycle near self-trapping; the affected
# presets default to a range that covers one full cycle
FIG2_ZMAX_MM = {1.5e-3: 100.0}
FIG4_ZMAX_MM = {0.6: 160.0}
FIG3_PRESETS = {1: (0.0, 0.212), 2: (1.22, 0.26), 3: (3.2, 0.32), 4: (18.9, 0.38)}
FIG3_SHARED = dict(kappa2=0.16, kappa3=0.80, delta2=20.0)
FIG3_ZMAX_MM = {1: 50.0, 2: 50.0, 3: 100.0, 4: 100.0}
FIG4_WC_VALUES = (0.0, 0.6, 2.0)


class Regime(enum.Enum):
    RABI = "RABI"
    PAIR = "PAIR"
    SUPPRESSED = "SUPPRESSED"
    FRAGMENTED = "FRAGMENTED"
    MIXED = "MIXED"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class RegimeThresholds:
    """Classification thresholds; defaults separate the preset curves."""

    # the slow cycle closes where p_R first recovers this fraction of its
    # maximum post-dip value (full-wave revivals do not reach 1 exactly)
    slow_cycle_return: float = 0.85
    min_revival: float = 0.5  # a recovery below this is no revival at all
    fragmented_min_peaks: int = 4
    fragmented_max_p2: float = 0.7
    suppressed_min_pr: float = 0.5
    pair_min_p2: float = 0.65
    pair_max_pr: float = 0.3
    rabi_p2_low: float = 0.45
    rabi_p2_high: float = 0.55
    rabi_max_pr: float = 0.1
    # a maximum only counts as a fast tunneling oscillation when it is a
    # deep swing; pair-regime ripples stay well below this
    peak_prominence: float = 0.09


@dataclass(frozen=True)
class RegimeLabel:
    label: Regime
    min_pr: float
    min_p2_first_cycle: float
    fast_osc_count: int
    slow_period_mm: float


def classify_regime(trace: TunnelingTrace,
                    thresholds: RegimeThresholds = RegimeThresholds()) -> RegimeLabel:
    """Deterministic regime label from the p_R / p_2 series.

    The slow tunneling period is measured from the first deep dip of p_R
    (the bottom of the first dip reaching within 5% of the global minimum,
    so periodic and beating traces use their first one): the cycle closes
    where p_R first recovers `slow_cycle_return` of its maximum post-dip
    value.  If the best recovery stays below `min_revival`, or the dip
    never goes below the return level, the trace does not cover a cycle
    and the label is UNKNOWN (metrics are still reported, computed over
    the whole trace).  Rules are evaluated in a fixed order: FRAGMENTED,
    SUPPRESSED, PAIR, RABI, else MIXED; p_2 minima are taken over the
    first slow cycle, the p_R minimum over the whole trace.
    """
    th = thresholds
    z, p_r, p_2 = trace.z_mm, trace.p_r, trace.p_2
    p_min = float(np.min(p_r))
    band = p_min + 0.05 * (float(np.max(p_r)) - p_min)
    i_min = int(np.argmax(p_r <= band))
    while i_min + 1 < p_r.size and p_r[i_min + 1] <= p_r[i_min]:
        i_min += 1  # walk to the bottom of the first qualifying dip
    revival = float(np.max(p_r[i_min:]))
    level = th.slow_cycle_return * revival
    if revival < th.min_revival or p_r[i_min] >= level:
        returned = np.array([])  # no measurable slow cycle in this trace
    else:
        returned = np.nonzero(p_r[i_min:] > level)[0]

    if returned.size == 0:
        cycle = slice(None)
        slow_period = float("nan")
    else:
        i_ret = i_min + int(returned[0])
        slow_period = float(z[i_ret])
        cycle = slice(0, i_ret + 1)

    min_pr = float(np.min(p_r))
    min_p2_cycle = float(np.min(p_2[cycle]))
    peaks, _ = find_peaks(p_r[cycle], prominence=th.peak_prominence)
    fast_osc = int(peaks.size)

    if returned.size == 0:
        label = Regime.UNKNOWN
    elif fast_osc >= th.fragmented_min_peaks and min_p2_cycle < th.fragmented_max_p2:
        label = Regime.FRAGMENTED
    elif min_pr >= th.suppressed_min_pr - 1e-12:
        label = Regime.SUPPRESSED
    elif min_p2_cycle >= th.pair_min_p2 and min_pr < th.pair_max_pr:
        label = Regime.PAIR
    elif th.rabi_p2_low <= min_p2_cycle <= th.rabi_p2_high and min_pr < th.rabi_max_pr:
        label = Regime.RABI
    else:
        label = Regime.MIXED

    return RegimeLabel(label=label, min_pr=min_pr, min_p2_first_cycle=min_p2_cycle,
                       fast_osc_count=fast_osc, slow_period_mm=slow_period)


def _apply_overrides(cfg: RunConfig, overrides: dict) -> RunConfig:
    ov = dict(overrides)
    grid = cfg.grid
    if "n" in ov:
        grid = dataclasses.replace(grid, n=int(ov.pop("n")))
    if "half_width_um" in ov:
        grid = dataclasses.replace(grid, half_width_um=float(ov.pop("half_width_um")))
    prop = cfg.propagation
    for key in ("dz_um", "z_max_mm", "sample_every_mm", "absorber"):
        if key in ov:
            prop = dataclasses.replace(prop, **{key: ov.pop(key)})
    out = cfg.output
    for key in ("snapshot_every_mm", "snapshot_dir", "figures"):
        if key in ov:
            out = dataclasses.replace(out, **{key: ov.pop(key)})
    if ov:
        raise ConfigError(f"unknown overrides: {sorted(ov)}")
    return dataclasses.replace(cfg, grid=grid, propagation=prop, output=out)


def _write_run_artifacts(trace: TunnelingTrace, cfg: RunConfig | None,
                         out_dir, stem: str, figures: bool = True) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_trace_csv(trace, out / f"{stem}.csv")
    if cfg is not None:
        (out / f"{stem}.config.json").write_text(json.dumps(config_to_dict(cfg), indent=2) + "\n")
    if figures:
        save_trace_figure(trace, out / f"{stem}.png", title=stem)


def run_bpm(cfg: RunConfig, out_dir=None, stem: str = "run",
            solver_cfg: SolverConfig | None = None, workers: int | None = None) -> TunnelingTrace:
    """Full-wave pipeline: build potential, launch guide-I mode, propagate."""
    grid = Grid2D(cfg.grid.n, cfg.grid.half_width_um)
    potential = build_potential(grid, cfg.structure)
    psi0 = launch_field(cfg.structure, grid, cfg.physics, cfg=solver_cfg)
    stepper = make_stepper(grid, potential, cfg.physics, cfg.propagation.dz_um,
                           absorber=cfg.propagation.absorber, workers=workers)
    bpm_cfg = BpmConfig(dz_um=cfg.propagation.dz_um,
                        z_max_um=cfg.propagation.z_max_mm * 1e3,
                        sample_every_um=cfg.propagation.sample_every_mm * 1e3)

    observers = []
    if cfg.output.snapshot_every_mm is not None:
        every_um = cfg.output.snapshot_every_mm * 1e3
        ratio = every_um / bpm_cfg.sample_every_um
        if abs(ratio - round(ratio)) > 1e-9 or ratio < 1:
            raise ConfigError("snapshot_every_mm must be a multiple of sample_every_mm")
        snap_dir = Path(cfg.output.snapshot_dir or (Path(out_dir or ".") / "snapshots"))

        def snapshot_observer(z_um, field):
            k = z_um / every_um
            if abs(k - round(k)) < 1e-9:
                write_snapshot(field, grid, snap_dir / f"{stem}_z{z_um * 1e-3:09.3f}mm",
                               z_mm=z_um * 1e-3, pgm=True)

        observers.append(snapshot_observer)

    trace = propagate(psi0, stepper, bpm_cfg, observers=observers)
    trace.meta["structure"] = config_to_dict(cfg)["structure"]
    if out_dir is not None:
        trace_path = cfg.output.trace_path
        actual_stem = Path(trace_path).stem if trace_path else stem
        _write_run_artifacts(trace, cfg, out_dir, actual_stem, figures=cfg.output.figures)
    return trace


def _fig2_config(dn2: float) -> RunConfig:
    if dn2 < 0:
        raise ConfigError("dn2 must be >= 0")
    base = RunConfig()
    structure = ErfStructure(
        well=base.structure.well,
        interaction=InteractionSpec(delta_n2=dn2,
                                    w_i=base.structure.interaction.w_i,
                                    d_xi=base.structure.interaction.d_xi))
    prop = dataclasses.replace(base.propagation, z_max_mm=FIG2_ZMAX_MM.get(dn2, 50.0))
    return dataclasses.replace(base, structure=structure, propagation=prop)


def run_fig2(dn2: float, out_dir=None, workers: int | None = None, **overrides) -> TunnelingTrace:
    """Erf double-well preset: launch guide I, propagate, trace p_R / p_2."""
    cfg = _apply_overrides(_fig2_config(dn2), overrides)
    trace = run_bpm(cfg, out_dir=out_dir, stem=f"fig2_dn2_{dn2:g}", workers=workers)
    trace.meta["dn2"] = dn2
    return trace


def _fig4_structure(w_c: float) -> FourCoreFiberSpec:
    return FourCoreFiberSpec(delta_n=0.005, a=3.5, w=2.5, w_c=w_c)


def run_fig4(w_c: float, out_dir=None, workers: int | None = None, **overrides) -> TunnelingTrace:
    """Four-core cut-fiber preset; the cut width plays the interaction."""
    base = RunConfig()
    prop = dataclasses.replace(base.propagation, z_max_mm=FIG4_ZMAX_MM.get(w_c, 50.0))
    cfg = dataclasses.replace(base, structure=_fig4_structure(w_c), propagation=prop)
    cfg = _apply_overrides(cfg, overrides)
    trace = run_bpm(cfg, out_dir=out_dir, stem=f"fig4_wc_{w_c:g}", workers=workers)
    trace.meta["w_c"] = w_c
    return trace


def run_fig3(curve: int | None = None, params: CoupledModeParams | None = None,
             variant: CmVariant = CmVariant.FULL, z_max_mm: float | None = None,
             dz_mm: float = 0.01, out_dir=None) -> TunnelingTrace:
    """Coupled-mode preset curves 1-4, or an explicit parameter set."""
    if (curve is None) == (params is None):
        raise ConfigError("provide exactly one of curve or params")
    if curve is not None:
        if curve not in FIG3_PRESETS:
            raise ConfigError(f"fig3 curve must be one of {sorted(FIG3_PRESETS)}, got {curve}")
        delta1, kappa1 = FIG3_PRESETS[curve]
        params = CoupledModeParams(kappa1=kappa1, delta1=delta1, **FIG3_SHARED)
        if z_max_mm is None:
            z_max_mm = FIG3_ZMAX_MM[curve]
        stem = f"fig3_curve{curve}"
    else:
        stem = "fig3_custom"
    if z_max_mm is None:
        z_max_mm = 50.0
    _, trace = cm_integrate(params, variant=variant, z_max_mm=z_max_mm, dz_mm=dz_mm)
    trace.meta["curve"] = curve
    if out_dir is not None:
        _write_run_artifacts(trace, None, out_dir, stem)
        params_path = Path(out_dir) / f"{stem}.params.json"
        params_path.write_text(json.dumps({
            "kappa1_mm": params.kappa1, "kappa2_mm": params.kappa2, "kappa3_mm": params.kappa3,
            "delta1_mm": params.delta1, "delta2_mm": params.delta2,
            "variant": variant.value, "dz_mm": dz_mm, "z_max_mm": z_max_mm}, indent=2) + "\n")
    return trace


@dataclass
class SweepRow:
    value: float
    label: str
    min_pr: float
    min_p2: float
    slow_period_mm: float
    error: str | None = None


def _sweep_one(parameter: str, value: float, overrides: dict, out_dir, workers: int | None):
    if parameter == "dn2":
        return run_fig2(value, out_dir=out_dir, workers=workers, **overrides)
    if parameter == "wc":
        return run_fig4(value, out_dir=out_dir, workers=workers, **overrides)
    raise ConfigError(f"sweep parameter must be 'dn2' or 'wc', got {parameter!r}")


def _sweep_job(args):
    parameter, value, overrides, out_dir = args
    trace = _sweep_one(parameter, value, overrides, out_dir, workers=1)
    return value, trace


def sweep(parameter: str, values, out_dir=None, jobs: int = 1,
          thresholds: RegimeThresholds = RegimeThresholds(), **overrides) -> list[SweepRow]:
    """Run a family of presets over `values`, classify, and summarize.

    Individual run failures are recorded in their summary row and the sweep
    continues.  With jobs > 1 the runs execute in separate processes.
    """
    values = list(values)
    if not values:
        raise ConfigError("sweep needs at least one value")
    if parameter not in ("dn2", "wc"):
        raise ConfigError(f"sweep parameter must be 'dn2' or 'wc', got {parameter!r}")

    results: dict[float, TunnelingTrace | Exception] = {}
    if jobs > 1 and len(values) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(values))) as pool:
            futures = {pool.submit(_sweep_job, (parameter, v, overrides, out_dir)): v
                       for v in values}
            for fut, v in futures.items():
                try:
                    results[v] = fut.result()[1]
                except Exception as exc:  # recorded per-row, sweep continues
                    results[v] = exc
    else:
        for v in values:
            try:
                results[v] = _sweep_one(parameter, v, overrides, out_dir, workers=None)
            except Exception as exc:
                results[v] = exc

    rows = []
    good_traces, good_labels = [], []
    for v in values:
        res = results[v]
        if isinstance(res, Exception):
            log.error("sweep value %g failed: %s", v, res)
            rows.append(SweepRow(value=v, label="ERROR", min_pr=float("nan"),
                                 min_p2=float("nan"), slow_period_mm=float("nan"),
                                 error=str(res)))
            continue
        lab = classify_regime(res, thresholds)
        rows.append(SweepRow(value=v, label=lab.label.value, min_pr=lab.min_pr,
                             min_p2=lab.min_p2_first_cycle, slow_period_mm=lab.slow_period_mm))
        good_traces.append(res)
        good_labels.append(f"{parameter}={v:g}")

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        lines = ["value,label,min_pR,min_p2,slow_period_mm"]
        for r in rows:
            lines.append(f"{r.value:.12g},{r.label},{r.min_pr:.12g},{r.min_p2:.12g},"
                         f"{r.slow_period_mm:.12g}")
        (out / f"sweep_{parameter}_summary.csv").write_text("\n".join(lines) + "\n")
        if good_traces:
            save_overlay_figure(good_traces, good_labels, out / f"sweep_{parameter}.png",
                                title=f"sweep over {parameter}")
    return rows

"""Run configuration: strict JSON parsing and defaults for the CLI pipeline.

Unknown keys are rejected at every level so a typo in a config file fails
loudly instead of silently running defaults.  Units follow the key names
(um for transverse/step quantities, mm for propagation distances and
coupled-mode rates).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .bpm import PhysicsConstants
from .coupledmode import CmVariant, CoupledModeParams
from .errors import ConfigError
from .potentials import ErfStructure, ErfWellSpec, FourCoreFiberSpec, InteractionSpec, Structure

__all__ = ["GridConfig", "PropagationConfig", "CmRunConfig", "OutputConfig", "RunConfig",
           "load_config", "config_to_dict"]

# Fig. 1 caption geometry is the default structure
DEFAULT_WELL = dict(delta_n1=0.003, a_um=4.5, w_um=3.0, d_x_um=1.0)
DEFAULT_INTERACTION = dict(delta_n2=0.002, w_i_um=0.5, d_xi_um=0.2)
DEFAULT_FOUR_CORE = dict(delta_n=0.005, a_um=3.5, w_um=2.5, w_c_um=0.0)


@dataclass(frozen=True)
class GridConfig:
    n: int = 512
    half_width_um: float = 15.0


@dataclass(frozen=True)
class PropagationConfig:
    dz_um: float = 1.0
    z_max_mm: float = 50.0
    sample_every_mm: float = 0.05
    absorber: bool = False


@dataclass(frozen=True)
class CmRunConfig:
    params: CoupledModeParams | None = None  # None means "estimate from modes"
    variant: CmVariant = CmVariant.FULL
    dz_mm: float = 0.01


@dataclass(frozen=True)
class OutputConfig:
    trace_path: str | None = None
    snapshot_every_mm: float | None = None
    snapshot_dir: str | None = None
    figures: bool = True


@dataclass(frozen=True)
class RunConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    physics: PhysicsConstants = field(default_factory=PhysicsConstants)
    structure: Structure = field(default_factory=lambda: _default_structure())
    propagation: PropagationConfig = field(default_factory=PropagationConfig)
    cm: CmRunConfig = field(default_factory=CmRunConfig)
    output: OutputConfig = field(default_factory=OutputConfig)


def _default_structure() -> ErfStructure:
    return ErfStructure(
        well=ErfWellSpec(delta_n1=DEFAULT_WELL["delta_n1"], a=DEFAULT_WELL["a_um"],
                         w=DEFAULT_WELL["w_um"], d_x=DEFAULT_WELL["d_x_um"]),
        interaction=InteractionSpec(delta_n2=DEFAULT_INTERACTION["delta_n2"],
                                    w_i=DEFAULT_INTERACTION["w_i_um"],
                                    d_xi=DEFAULT_INTERACTION["d_xi_um"]),
    )


class _Section:
    """Dict view that tracks consumed keys and rejects leftovers."""

    def __init__(self, data: dict, where: str):
        if not isinstance(data, dict):
            raise ConfigError(f"{where}: expected an object")
        self.data = dict(data)
        self.where = where

    def take(self, key, default=None, required=False):
        if key in self.data:
            return self.data.pop(key)
        if required:
            raise ConfigError(f"{self.where}: missing required key {key!r}")
        return default

    def finish(self):
        if self.data:
            extra = ", ".join(sorted(map(repr, self.data)))
            raise ConfigError(f"{self.where}: unknown keys {extra}")


def _number(value, where, minimum=None, allow_zero=True) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    v = float(value)
    if minimum is not None and (v < minimum or (not allow_zero and v == minimum)):
        raise ConfigError(f"{where}: value {v} out of range")
    return v


def _structure_from_dict(data: dict) -> Structure:
    sec = _Section(data, "structure")
    kind = sec.take("type", required=True)
    if kind == "erf_double_well":
        well = _Section(sec.take("well", required=True), "structure.well")
        inter = _Section(sec.take("interaction", DEFAULT_INTERACTION), "structure.interaction")
        try:
            structure = ErfStructure(
                well=ErfWellSpec(
                    delta_n1=_number(well.take("delta_n1", required=True), "delta_n1"),
                    a=_number(well.take("a_um", required=True), "a_um"),
                    w=_number(well.take("w_um", required=True), "w_um"),
                    d_x=_number(well.take("d_x_um", required=True), "d_x_um")),
                interaction=InteractionSpec(
                    delta_n2=_number(inter.take("delta_n2", required=True), "delta_n2"),
                    w_i=_number(inter.take("w_i_um", DEFAULT_INTERACTION["w_i_um"]), "w_i_um"),
                    d_xi=_number(inter.take("d_xi_um", DEFAULT_INTERACTION["d_xi_um"]), "d_xi_um")))
        except ValueError as exc:
            raise ConfigError(f"structure: {exc}") from exc
        well.finish()
        inter.finish()
        sec.finish()
        return structure
    if kind == "four_core":
        try:
            spec = FourCoreFiberSpec(
                delta_n=_number(sec.take("delta_n", required=True), "delta_n"),
                a=_number(sec.take("a_um", required=True), "a_um"),
                w=_number(sec.take("w_um", required=True), "w_um"),
                w_c=_number(sec.take("w_c_um", 0.0), "w_c_um"))
        except ValueError as exc:
            raise ConfigError(f"structure: {exc}") from exc
        sec.finish()
        return spec
    raise ConfigError(f"structure.type must be 'erf_double_well' or 'four_core', got {kind!r}")


def _cm_from_dict(data: dict) -> CmRunConfig:
    sec = _Section(data, "cm")
    raw = sec.take("params", "estimate")
    if raw == "estimate":
        params = None
    else:
        psec = _Section(raw, "cm.params")
        try:
            params = CoupledModeParams(
                kappa1=_number(psec.take("kappa1_mm", required=True), "kappa1_mm"),
                kappa2=_number(psec.take("kappa2_mm", 0.0), "kappa2_mm"),
                kappa3=_number(psec.take("kappa3_mm", 0.0), "kappa3_mm"),
                delta1=_number(psec.take("delta1_mm", 0.0), "delta1_mm"),
                delta2=_number(psec.take("delta2_mm", 0.0), "delta2_mm"))
        except ValueError as exc:
            raise ConfigError(f"cm.params: {exc}") from exc
        psec.finish()
    try:
        variant = CmVariant.from_string(sec.take("variant", "full"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    cfg = CmRunConfig(params=params, variant=variant,
                      dz_mm=_number(sec.take("dz_mm", 0.01), "cm.dz_mm", minimum=0, allow_zero=False))
    sec.finish()
    return cfg


def config_from_dict(data: dict) -> RunConfig:
    top = _Section(data, "config")
    gsec = _Section(top.take("grid", {}), "grid")
    try:
        grid = GridConfig(n=int(_number(gsec.take("n", 512), "grid.n", minimum=8)),
                          half_width_um=_number(gsec.take("half_width_um", 15.0),
                                                "grid.half_width_um", minimum=0, allow_zero=False))
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from exc
    gsec.finish()

    psec = _Section(top.take("physics", {}), "physics")
    try:
        physics = PhysicsConstants(
            lambda_um=_number(psec.take("lambda_um", 0.633), "lambda_um", minimum=0, allow_zero=False),
            n_s=_number(psec.take("n_s", 1.45), "n_s", minimum=0, allow_zero=False))
    except ValueError as exc:
        raise ConfigError(f"physics: {exc}") from exc
    psec.finish()

    sdata = top.take("structure")
    structure = _structure_from_dict(sdata) if sdata is not None else _default_structure()

    prsec = _Section(top.take("propagation", {}), "propagation")
    absorber = prsec.take("absorber", False)
    if not isinstance(absorber, bool):
        raise ConfigError("propagation.absorber must be a boolean")
    propagation = PropagationConfig(
        dz_um=_number(prsec.take("dz_um", 1.0), "dz_um", minimum=0, allow_zero=False),
        z_max_mm=_number(prsec.take("z_max_mm", 50.0), "z_max_mm", minimum=0, allow_zero=False),
        sample_every_mm=_number(prsec.take("sample_every_mm", 0.05), "sample_every_mm",
                                minimum=0, allow_zero=False),
        absorber=absorber)
    prsec.finish()

    cdata = top.take("cm", {})
    cm = _cm_from_dict(cdata)

    osec = _Section(top.take("output", {}), "output")
    snap = osec.take("snapshot_every_mm")
    figures = osec.take("figures", True)
    if not isinstance(figures, bool):
        raise ConfigError("output.figures must be a boolean")
    output = OutputConfig(
        trace_path=osec.take("trace_path"),
        snapshot_every_mm=None if snap is None else _number(snap, "snapshot_every_mm",
                                                            minimum=0, allow_zero=False),
        snapshot_dir=osec.take("snapshot_dir"),
        figures=figures)
    osec.finish()
    top.finish()
    return RunConfig(grid=grid, physics=physics, structure=structure,
                     propagation=propagation, cm=cm, output=output)


def load_config(path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return config_from_dict(data)


def config_to_dict(cfg: RunConfig) -> dict:
    """Fully-resolved configuration, written next to traces for provenance."""
    if isinstance(cfg.structure, ErfStructure):
        structure = {
            "type": "erf_double_well",
            "well": {"delta_n1": cfg.structure.well.delta_n1, "a_um": cfg.structure.well.a,
                     "w_um": cfg.structure.well.w, "d_x_um": cfg.structure.well.d_x},
            "interaction": {"delta_n2": cfg.structure.interaction.delta_n2,
                            "w_i_um": cfg.structure.interaction.w_i,
                            "d_xi_um": cfg.structure.interaction.d_xi},
        }
    else:
        structure = {"type": "four_core", "delta_n": cfg.structure.delta_n,
                     "a_um": cfg.structure.a, "w_um": cfg.structure.w,
                     "w_c_um": cfg.structure.w_c}
    params = cfg.cm.params
    return {
        "grid": {"n": cfg.grid.n, "half_width_um": cfg.grid.half_width_um},
        "physics": {"lambda_um": cfg.physics.lambda_um, "n_s": cfg.physics.n_s},
        "structure": structure,
        "propagation": {"dz_um": cfg.propagation.dz_um, "z_max_mm": cfg.propagation.z_max_mm,
                        "sample_every_mm": cfg.propagation.sample_every_mm,
                        "absorber": cfg.propagation.absorber},
        "cm": {"params": "estimate" if params is None else
               {"kappa1_mm": params.kappa1, "kappa2_mm": params.kappa2,
                "kappa3_mm": params.kappa3, "delta1_mm": params.delta1,
                "delta2_mm": params.delta2},
               "variant": cfg.cm.variant.value, "dz_mm": cfg.cm.dz_mm},
        "output": {"trace_path": cfg.output.trace_path,
                   "snapshot_every_mm": cfg.output.snapshot_every_mm,
                   "snapshot_dir": cfg.output.snapshot_dir,
                   "figures": cfg.output.figures},
    }

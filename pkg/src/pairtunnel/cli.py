"""Command-line interface.

Subcommands: modes, propagate, cm, estimate-params, fig2, fig3, fig4,
sweep, classify.  Exit codes: 0 success, 2 configuration error,
3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .config import RunConfig, config_to_dict, load_config
from .coupledmode import CmVariant, CoupledModeParams, cm_integrate, estimate_params
from .errors import ConfigError, NumericalError
from .grid import Grid2D
from .modes import mode_parity, solve_guide_modes
from .potentials import GuideId
from .report import save_trace_figure
from .scenarios import (FIG2_DN2_VALUES, FIG3_PRESETS, FIG4_WC_VALUES, classify_regime,
                        run_bpm, run_fig2, run_fig3, run_fig4, sweep)
from .snapshots import write_snapshot
from .trace import read_trace_csv, write_trace_csv

log = logging.getLogger(__name__)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON run configuration")
    parser.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    parser.add_argument("--n", type=int, help="grid samples per axis (override)")
    parser.add_argument("--dz-um", type=float, help="propagation step in um (override)")
    parser.add_argument("--zmax-mm", type=float, help="propagation distance in mm (override)")
    parser.add_argument("--sample-every-mm", type=float, help="observable sampling interval (override)")
    parser.add_argument("--absorber", action="store_true", help="enable the edge absorber mask")
    parser.add_argument("--workers", type=int, help="FFT worker threads")
    parser.add_argument("--no-figures", action="store_true", help="skip figure rendering")


def _base_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    grid = cfg.grid
    if args.n is not None:
        grid = dataclasses.replace(grid, n=args.n)
    prop = cfg.propagation
    if args.dz_um is not None:
        prop = dataclasses.replace(prop, dz_um=args.dz_um)
    if args.zmax_mm is not None:
        prop = dataclasses.replace(prop, z_max_mm=args.zmax_mm)
    if args.sample_every_mm is not None:
        prop = dataclasses.replace(prop, sample_every_mm=args.sample_every_mm)
    if args.absorber:
        prop = dataclasses.replace(prop, absorber=True)
    out = cfg.output
    if args.no_figures:
        out = dataclasses.replace(out, figures=False)
    return dataclasses.replace(cfg, grid=grid, propagation=prop, output=out)


def _preset_overrides(args) -> dict:
    ov = {}
    if args.n is not None:
        ov["n"] = args.n
    if args.dz_um is not None:
        ov["dz_um"] = args.dz_um
    if args.zmax_mm is not None:
        ov["z_max_mm"] = args.zmax_mm
    if args.sample_every_mm is not None:
        ov["sample_every_mm"] = args.sample_every_mm
    if args.absorber:
        ov["absorber"] = True
    if args.no_figures:
        ov["figures"] = False
    return ov


def _print_label(label) -> None:
    print(f"label: {label.label.value}")
    print(f"  min p_R           : {label.min_pr:.6g}")
    print(f"  min p_2 (cycle)   : {label.min_p2_first_cycle:.6g}")
    print(f"  fast oscillations : {label.fast_osc_count}")
    print(f"  slow period (mm)  : {label.slow_period_mm:.6g}")


def _cmd_modes(args) -> int:
    cfg = _base_config(args)
    guide = GuideId[args.guide]
    grid = Grid2D(cfg.grid.n, cfg.grid.half_width_um)
    modeset = solve_guide_modes(cfg.structure, guide, grid, cfg.physics, count=args.count)
    print(f"modes of isolated guide {guide.name} "
          f"(n={grid.n}, L={grid.half_width} um, lambda={cfg.physics.lambda_um} um)")
    print(f"{'#':>3} {'mu':>14} {'beta_offset (mm^-1)':>20} {'parity(swap/antiswap)':>22}")
    for i, mode in enumerate(modeset.modes):
        par = mode_parity(mode)
        print(f"{i:>3} {mode.mu:14.6e} {mode.beta_offset_mm:20.6f} "
              f"{par['swap']:+10.3f}/{par['antiswap']:+.3f}")
    if args.dump:
        for i, mode in enumerate(modeset.modes):
            write_snapshot(mode.field, grid, Path(args.dump) / f"mode_{guide.name}_{i}",
                           z_mm=0.0, pgm=True)
        print(f"mode snapshots written to {args.dump}")
    return 0


def _cmd_propagate(args) -> int:
    cfg = _base_config(args)
    trace = run_bpm(cfg, out_dir=args.out, stem=args.stem, workers=args.workers)
    _print_label(classify_regime(trace))
    print(f"trace written to {Path(args.out) / (args.stem + '.csv')}")
    return 0


def _cm_params_from_args(args, cfg: RunConfig) -> CoupledModeParams:
    flags = (args.kappa1, args.kappa2, args.kappa3, args.delta1, args.delta2)
    if any(v is not None for v in flags):
        return CoupledModeParams(kappa1=args.kappa1 or 0.0, kappa2=args.kappa2 or 0.0,
                                 kappa3=args.kappa3 or 0.0, delta1=args.delta1 or 0.0,
                                 delta2=args.delta2 or 0.0)
    if cfg.cm.params is not None:
        return cfg.cm.params
    print("estimating coupled-mode parameters from guided modes ...")
    grid = Grid2D(cfg.grid.n, cfg.grid.half_width_um)
    return estimate_params(cfg.structure, grid, cfg.physics)


def _cmd_cm(args) -> int:
    cfg = _base_config(args)
    params = _cm_params_from_args(args, cfg)
    variant = CmVariant.from_string(args.variant)
    z_max = args.zmax_mm if args.zmax_mm is not None else 50.0
    _, trace = cm_integrate(params, variant=variant, z_max_mm=z_max, dz_mm=args.dz_mm)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_trace_csv(trace, out / "cm_trace.csv")
    if not args.no_figures:
        save_trace_figure(trace, out / "cm_trace.png", title="coupled-mode run")
    _print_label(classify_regime(trace))
    print(f"trace written to {out / 'cm_trace.csv'}")
    return 0


def _cmd_estimate_params(args) -> int:
    cfg = _base_config(args)
    grid = Grid2D(cfg.grid.n, cfg.grid.half_width_um)
    p = estimate_params(cfg.structure, grid, cfg.physics)
    print("coupled-mode parameters (mm^-1):")
    for name, value in (("kappa1", p.kappa1), ("kappa2", p.kappa2), ("kappa3", p.kappa3),
                        ("delta1", p.delta1), ("delta2", p.delta2)):
        print(f"  {name:7s} = {value: .6f}")
    return 0


def _cmd_fig2(args) -> int:
    values = FIG2_DN2_VALUES if args.all else (args.dn2,)
    if values[0] is None:
        raise ConfigError("fig2 needs --dn2 or --all")
    for dn2 in values:
        trace = run_fig2(dn2, out_dir=args.out, workers=args.workers, **_preset_overrides(args))
        print(f"dn2={dn2:g}:")
        _print_label(classify_regime(trace))
    return 0


def _cmd_fig3(args) -> int:
    curves = sorted(FIG3_PRESETS) if args.all else (args.curve,)
    if curves[0] is None:
        raise ConfigError("fig3 needs --curve or --all")
    for curve in curves:
        trace = run_fig3(curve=curve, z_max_mm=args.zmax_mm, dz_mm=args.dz_mm, out_dir=args.out)
        print(f"curve {curve}:")
        _print_label(classify_regime(trace))
    return 0


def _cmd_fig4(args) -> int:
    values = FIG4_WC_VALUES if args.all else (args.wc,)
    if values[0] is None:
        raise ConfigError("fig4 needs --wc or --all")
    for wc in values:
        trace = run_fig4(wc, out_dir=args.out, workers=args.workers, **_preset_overrides(args))
        print(f"w_c={wc:g} um:")
        _print_label(classify_regime(trace))
    return 0


def _cmd_sweep(args) -> int:
    values = [float(v) for v in args.values.split(",") if v.strip()]
    rows = sweep(args.parameter, values, out_dir=args.out, jobs=args.jobs,
                 **_preset_overrides(args))
    print("value,label,min_pR,min_p2,slow_period_mm")
    for r in rows:
        print(f"{r.value:g},{r.label},{r.min_pr:.6g},{r.min_p2:.6g},{r.slow_period_mm:.6g}")
    return 3 if any(r.label == "ERROR" for r in rows) else 0


def _cmd_classify(args) -> int:
    trace = read_trace_csv(args.trace)
    _print_label(classify_regime(trace))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pairtunnel",
        description="Classical-optics simulator of two-boson tunneling in coupled waveguides")
    parser.add_argument("--version", action="version", version=f"pairtunnel {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("modes", help="solve isolated-guide modes and print the table")
    _add_common(p)
    p.add_argument("--guide", choices=[g.name for g in GuideId], default="I")
    p.add_argument("--count", type=int, default=3)
    p.add_argument("--dump", type=Path, help="directory for mode snapshots")
    p.set_defaults(fn=_cmd_modes)

    p = sub.add_parser("propagate", help="full-wave run from a configuration")
    _add_common(p)
    p.add_argument("--stem", default="propagate", help="output file stem")
    p.set_defaults(fn=_cmd_propagate)

    p = sub.add_parser("cm", help="integrate the five-amplitude coupled-mode model")
    _add_common(p)
    p.add_argument("--kappa1", type=float)
    p.add_argument("--kappa2", type=float)
    p.add_argument("--kappa3", type=float)
    p.add_argument("--delta1", type=float)
    p.add_argument("--delta2", type=float)
    p.add_argument("--variant", default="full", help="full, two_mode or fermionized")
    p.add_argument("--dz-mm", type=float, default=0.01)
    p.set_defaults(fn=_cmd_cm)

    p = sub.add_parser("estimate-params", help="estimate coupled-mode parameters from modes")
    _add_common(p)
    p.set_defaults(fn=_cmd_estimate_params)

    p = sub.add_parser("fig2", help="erf double-well preset (interaction sweep values)")
    _add_common(p)
    p.add_argument("--dn2", type=float, help="interaction strength delta n_2")
    p.add_argument("--all", action="store_true", help="run all preset values")
    p.set_defaults(fn=_cmd_fig2)

    p = sub.add_parser("fig3", help="coupled-mode preset curves")
    _add_common(p)
    p.add_argument("--curve", type=int, choices=sorted(FIG3_PRESETS))
    p.add_argument("--all", action="store_true")
    p.add_argument("--dz-mm", type=float, default=0.01)
    p.set_defaults(fn=_cmd_fig3)

    p = sub.add_parser("fig4", help="four-core cut-fiber preset")
    _add_common(p)
    p.add_argument("--wc", type=float, help="cut width w_c in um")
    p.add_argument("--all", action="store_true")
    p.set_defaults(fn=_cmd_fig4)

    p = sub.add_parser("sweep", help="sweep dn2 or wc and classify each run")
    _add_common(p)
    p.add_argument("--parameter", required=True, choices=["dn2", "wc"])
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--jobs", type=int, default=1, help="parallel processes")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("classify", help="classify a trace CSV")
    p.add_argument("--trace", type=Path, required=True)
    p.set_defaults(fn=_cmd_classify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands: simulate, phase, fixed-points, curvature, verify, scaling-check.
Exit codes: 0 success, 1 configuration or I/O error, 2 integrator failure,
3 verification failure.  Data files are locale-independent UTF-8 CSV with
newline "\\n" and 17 significant digits, so identical configurations on the
same build produce byte-identical data; the run manifest (JSON) carries the
only timestamp and the wall time.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import NoBoundaryError, critical_curve, find_fixed_points, phase_grid
from .geometry import DegenerateMetricError, GeometryClass
from .integrate import FlowParams, IntegratorControls, Trajectory, conserved_drift, detect_singularity, integrate
from .systems import get_system, system_names
from .verify import SUITES, run_suite, suite_passed

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INTEGRATOR = 2
EXIT_VERIFY = 3


class ConfigError(ValueError):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _parse_floats(text: str, name: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(part) for part in text.split(","))
    except ValueError:
        raise ConfigError(f"could not parse {name} {text!r} as comma-separated numbers") from None
    if not vals:
        raise ConfigError(f"{name} must contain at least one number")
    return vals


def _read_config_file(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        out[key.strip().replace("_", "-")] = value.strip()
    return out


def _merge_config(args: argparse.Namespace, keys: dict[str, type]) -> None:
    # flags override the config file; the file fills in unset flags
    if not getattr(args, "config", None):
        return
    file_cfg = _read_config_file(args.config)
    unknown = set(file_cfg) - set(keys)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key, caster in keys.items():
        attr = "geometry_class" if key == "class" else key.replace("-", "_")
        if getattr(args, attr, None) is None and key in file_cfg:
            raw = file_cfg[key]
            try:
                setattr(args, attr, caster(raw) if caster is not str else raw)
            except ValueError:
                raise ConfigError(f"config key {key}: cannot parse {raw!r}") from None


def _resolve_system(args: argparse.Namespace):
    cls = getattr(args, "geometry_class", None)
    system = getattr(args, "system", None)
    if cls and system:
        raise ConfigError("pass either --class or --system, not both")
    if cls:
        return get_system(GeometryClass.parse(cls).value)
    if system:
        try:
            return get_system(system)
        except KeyError as exc:
            raise ConfigError(str(exc)) from None
    raise ConfigError("one of --class or --system is required")


def _controls(args: argparse.Namespace) -> IntegratorControls:
    kwargs = {}
    if getattr(args, "rel_tol", None) is not None:
        kwargs["rel_tol"] = args.rel_tol
    if getattr(args, "abs_tol", None) is not None:
        kwargs["abs_tol"] = args.abs_tol
    if getattr(args, "floor", None) is not None:
        kwargs["min_scale_floor"] = args.floor
    try:
        return IntegratorControls(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _run_simulation(args: argparse.Namespace) -> tuple[Trajectory, dict, list[str], np.ndarray]:
    system = _resolve_system(args)
    if args.init is None:
        raise ConfigError("--init is required")
    init = _parse_floats(args.init, "--init") if isinstance(args.init, str) else tuple(args.init)
    alpha = args.alpha if args.alpha is not None else 0.0
    t_max = args.tmax if args.tmax is not None else 1.0
    direction = args.direction or "forward"
    if args.samples is not None and args.times is not None:
        raise ConfigError("pass exactly one of --samples and --times")
    n_samples = None
    t_eval = None
    if args.times is not None:
        t_eval = _parse_floats(args.times, "--times")
    else:
        n_samples = args.samples if args.samples is not None else 201

    controls = _controls(args)
    try:
        params = FlowParams(alpha_prime=alpha, t_max=t_max, direction=direction, controls=controls)
        start = time.perf_counter()
        traj = integrate(system, init, params, t_eval=t_eval, n_samples=n_samples)
        wall = time.perf_counter() - start
    except (DegenerateMetricError, ValueError) as exc:
        raise ConfigError(str(exc)) from None

    t_s = None
    if traj.terminal == "singular":
        t_s = detect_singularity(traj, controls).t_s

    manifest = {
        "tool": "homflow",
        "version": __version__,
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "config": {
            "system": system.name,
            "init": list(init),
            "alpha_prime": alpha,
            "direction": direction,
            "t_max": t_max,
            "samples": n_samples,
            "output_times": list(t_eval) if t_eval is not None else None,
            "rel_tol": controls.rel_tol,
            "abs_tol": controls.abs_tol,
            "min_scale_floor": controls.min_scale_floor,
        },
        "terminal": traj.terminal,
        "t_s": t_s,
        "conserved_drift": conserved_drift(traj),
        "wall_time_s": wall,
    }

    header = ["t", *system.components, "scal", "rc_norm_sq"]
    emb = traj.embedded()
    from .geometry import MetricState, curvature_bundle, structure_constants

    bundle = curvature_bundle(structure_constants(system.geometry), MetricState(emb[:, 0], emb[:, 1], emb[:, 2]))
    rows = np.column_stack([traj.ts, traj.states, np.asarray(bundle.scal), np.asarray(bundle.rc_norm_sq)])
    return traj, manifest, header, rows


def _csv_text(header: list[str], rows: np.ndarray) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _json_dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, encoding="utf-8", newline="")


def _emit_simulation(args, manifest, header, rows) -> None:
    fmt = args.format or "csv"
    if fmt == "csv":
        _write(args.out, _csv_text(header, rows))
        manifest_text = _json_dump(manifest)
        if args.out and args.out != "-":
            _write(str(Path(args.out).with_suffix(".manifest.json")), manifest_text)
        else:
            sys.stderr.write(manifest_text)
    else:
        payload = {"manifest": manifest, "columns": header, "rows": [[float(v) for v in row] for row in rows]}
        _write(args.out, _json_dump(payload))


def cmd_simulate(args: argparse.Namespace) -> int:
    traj, manifest, header, rows = _run_simulation(args)
    _emit_simulation(args, manifest, header, rows)
    return EXIT_INTEGRATOR if traj.terminal == "step_failure" else EXIT_OK


def cmd_curvature(args: argparse.Namespace) -> int:
    traj, manifest, header, rows = _run_simulation(args)
    keep = [0, len(header) - 2, len(header) - 1]
    header = [header[i] for i in keep]
    rows = rows[:, keep]
    _emit_simulation(args, manifest, header, rows)
    return EXIT_INTEGRATOR if traj.terminal == "step_failure" else EXIT_OK


def _parse_box(text: str, dim: int) -> np.ndarray:
    vals = _parse_floats(text, "--box")
    if len(vals) != 2 * dim:
        raise ConfigError(f"--box needs {2 * dim} numbers (lo,hi per component), got {len(vals)}")
    box = np.asarray(vals, dtype=float).reshape(dim, 2)
    if np.any(box[:, 1] <= box[:, 0]):
        raise ConfigError("--box bounds must satisfy hi > lo in each component")
    return box


def cmd_phase(args: argparse.Namespace) -> int:
    system = _resolve_system(args)
    if system.dim != 2:
        raise ConfigError(f"phase grids need a two-component system, got {system.name!r} with {system.dim}")
    n = args.grid if args.grid is not None else 10
    if n < 2:
        raise ConfigError("--grid must be at least 2")
    if args.box is None:
        raise ConfigError("--box is required")
    box = _parse_box(args.box, system.dim)
    alpha = args.alpha if args.alpha is not None else 0.0
    t_max = args.tmax if args.tmax is not None else 50.0
    out_dir = Path(args.out) if args.out else Path("phase-out")
    out_dir.mkdir(parents=True, exist_ok=True)

    grid = phase_grid(system, alpha, box, n, t_max=t_max)
    from .geometry import MetricState, curvature_bundle, structure_constants

    sc = structure_constants(system.geometry)
    for idx, seed in enumerate(grid.seeds):
        row, col = divmod(idx, n)
        pieces = []
        for traj, reverse in ((grid.backward[idx], True), (grid.forward[idx], False)):
            if traj is None:
                continue
            emb = traj.embedded()
            bundle = curvature_bundle(sc, MetricState(emb[:, 0], emb[:, 1], emb[:, 2]))
            block = np.column_stack([traj.ts, traj.states, np.asarray(bundle.scal), np.asarray(bundle.rc_norm_sq)])
            pieces.append(block[::-1] if reverse else block)
        if not pieces:
            continue
        merged = np.vstack(pieces)
        header = ["t", *system.components, "scal", "rc_norm_sq"]
        _write(str(out_dir / f"seed_{row}_{col}.csv"), _csv_text(header, merged))

    try:
        polyline = critical_curve(system, alpha, box, t_max=min(t_max, 20.0))
        curve = [[float(v) for v in p] for p in polyline]
    except NoBoundaryError:
        curve = None

    index = {
        "system": system.name,
        "alpha_prime": alpha,
        "box": [[float(v) for v in b] for b in box],
        "grid": n,
        "labels": grid.labels,
        "seeds": [[float(v) for v in s] for s in grid.seeds],
        "critical_curve": curve,
        "errors": grid.errors,
    }
    _write(str(out_dir / "index.json"), _json_dump(index))
    return EXIT_OK


def cmd_fixed_points(args: argparse.Namespace) -> int:
    system = _resolve_system(args)
    if args.box is None:
        raise ConfigError("--box is required")
    box = _parse_box(args.box, system.dim)
    alpha = args.alpha if args.alpha is not None else 0.0
    n = args.grid if args.grid is not None else 8
    points = find_fixed_points(system, alpha, box, n_seeds=n)
    payload = [
        {
            "state": [float(v) for v in p.state],
            "residual_norm": p.residual_norm,
            "classification": p.classification,
            "eigenvalues": [[float(e.real), float(e.imag)] for e in p.eigenvalues],
        }
        for p in points
    ]
    _write(args.out, _json_dump(payload))
    return EXIT_OK


def cmd_scaling_check(args: argparse.Namespace) -> int:
    from .integrate import scaling_equivalence_check

    system = _resolve_system(args)
    if args.init is None:
        raise ConfigError("--init is required")
    init = _parse_floats(args.init, "--init")
    alpha = args.alpha if args.alpha is not None else 0.0
    omega = args.omega if args.omega is not None else 2.0
    t = args.t if args.t is not None else 0.1
    threshold = args.threshold if args.threshold is not None else 1e-8
    try:
        diff = scaling_equivalence_check(system, init, alpha, omega, t, _controls(args))
    except (DegenerateMetricError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    payload = {"system": system.name, "omega": omega, "t": t, "max_rel_diff": diff, "threshold": threshold, "pass": diff < threshold}
    _write(args.out, _json_dump(payload))
    return EXIT_OK if diff < threshold else EXIT_VERIFY


def cmd_verify(args: argparse.Namespace) -> int:
    names = list(SUITES) if args.suite in (None, "all") else [args.suite]
    for name in names:
        if name not in SUITES:
            raise ConfigError(f"unknown suite {name!r}; available: {', '.join(sorted(SUITES))}, all")
    report = []
    all_ok = True
    for name in names:
        cases = run_suite(name)
        ok = suite_passed(name, cases)
        all_ok &= ok
        report.extend(c.as_dict() for c in cases)
        n_pass = sum(c.passed for c in cases)
        sys.stderr.write(f"suite {name}: {n_pass}/{len(cases)} cases pass -> {'PASS' if ok else 'FAIL'}\n")
    _write(args.out, _json_dump(report))
    return EXIT_OK if all_ok else EXIT_VERIFY


_SIM_CONFIG_KEYS = {
    "class": str,
    "system": str,
    "init": str,
    "alpha": float,
    "direction": str,
    "tmax": float,
    "samples": int,
    "times": str,
    "rel-tol": float,
    "abs-tol": float,
    "floor": float,
    "out": str,
    "format": str,
}


def _add_common(parser: argparse.ArgumentParser, *, init: bool = True) -> None:
    parser.add_argument("--class", dest="geometry_class", help="full flow: su2, nil, sol, isom, sl2r")
    parser.add_argument("--system", help=f"any registered system: {', '.join(system_names())}")
    if init:
        parser.add_argument("--init", help="comma-separated positive initial components")
    parser.add_argument("--alpha", type=float, help="coupling alpha' (default 0)")
    parser.add_argument("--rel-tol", type=float, dest="rel_tol")
    parser.add_argument("--abs-tol", type=float, dest="abs_tol")
    parser.add_argument("--floor", type=float, help="positivity floor for singularity detection")
    parser.add_argument("--out", help="output path ('-' for stdout)")
    parser.add_argument("--config", help="key=value config file; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="homflow",
        description="Simulate second-order geometric flows on homogeneous 3-manifold classes and analyse their phase behaviour.",
    )
    parser.add_argument("--version", action="version", version=f"homflow {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate one flow and write trajectory data")
    _add_common(p)
    p.add_argument("--direction", choices=("forward", "backward"))
    p.add_argument("--tmax", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--times", help="comma-separated explicit output times")
    p.add_argument("--format", choices=("csv", "json"))
    p.set_defaults(func=cmd_simulate, config_keys=_SIM_CONFIG_KEYS)

    p = sub.add_parser("curvature", help="like simulate, but emit only t, Scal, |Rc|^2")
    _add_common(p)
    p.add_argument("--direction", choices=("forward", "backward"))
    p.add_argument("--tmax", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--times", help="comma-separated explicit output times")
    p.add_argument("--format", choices=("csv", "json"))
    p.set_defaults(func=cmd_curvature, config_keys=_SIM_CONFIG_KEYS)

    p = sub.add_parser("phase", help="seed-lattice phase portrait with basin labels")
    _add_common(p, init=False)
    p.add_argument("--box", help="lo,hi per component, comma-separated")
    p.add_argument("--grid", type=int, help="lattice size n (>= 2)")
    p.add_argument("--tmax", type=float)
    p.set_defaults(func=cmd_phase, config_keys={})

    p = sub.add_parser("fixed-points", help="Newton fixed-point search over a box")
    _add_common(p, init=False)
    p.add_argument("--box", help="lo,hi per component, comma-separated")
    p.add_argument("--grid", type=int, help="seed lattice size per axis")
    p.set_defaults(func=cmd_fixed_points, config_keys={})

    p = sub.add_parser("scaling-check", help="verify the metric-rescaling equivalence")
    _add_common(p)
    p.add_argument("--omega", type=float)
    p.add_argument("--t", type=float)
    p.add_argument("--threshold", type=float)
    p.set_defaults(func=cmd_scaling_check, config_keys={})

    p = sub.add_parser("verify", help="run self-verification suites and write a JSON report")
    p.add_argument("--suite", help=f"one of: {', '.join(sorted(SUITES))}, all")
    p.add_argument("--out", help="report path ('-' for stdout)")
    p.set_defaults(func=cmd_verify, config_keys={})

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "config", None):
            _merge_config(args, args.config_keys)
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except OSError as exc:
        sys.stderr.write(f"i/o error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Each analysis is a subcommand. Data (CSV or JSON) goes to files or stdout,
diagnostics to stderr. Exit codes: 0 success, 2 configuration error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .asymptotics import (DEFAULT_POINTS, DEFAULT_WINDOW, SENSITIVITY_POINTS, SENSITIVITY_WINDOW,
                          detuning_ladder, edge_exponent_dos, edge_exponent_ldos, fit_exponent,
                          sensitivity_scan)
from .crystal import LayeredCrystal, build_crystal
from .emission import EmitterDistribution, se_rate_average
from .errors import BandEdgeError, InvalidLayer, EmptyStack
from .ldos import edge_mode, ldos, mode_nodes
from .models import AnisotropicModel, IsotropicModel, anisotropic_dos, isotropic_dos
from .spectrum import BandEdge, band_edges, dos_curve, find_bands, gap_edges

log = logging.getLogger("bandedge")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
COMMANDS = ("bands", "dos", "ldos", "edge-fit", "sensitivity", "serate", "models")


class ParseError(ValueError):
    """Malformed configuration document."""


class ValidationError(ValueError):
    """Well-formed configuration with invalid values."""


@dataclass(frozen=True)
class RunSpec:
    layers: tuple[tuple[float, float], ...] = ()
    command: str | None = None
    params: dict[str, Any] = field(default_factory=dict)
    out: str | None = None
    json_out: str | None = None

    def crystal(self) -> LayeredCrystal:
        return build_crystal(self.layers)


def parse_config(document: str) -> RunSpec:
    """Parse a ``{"layers": [{"n": ..., "d": ...}, ...]}`` document strictly."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ValidationError("top level: expected an object")
    unknown = set(doc) - {"layers"}
    if unknown:
        raise ValidationError(f"top level: unknown keys {sorted(unknown)}")
    layers = doc.get("layers")
    if not isinstance(layers, list):
        raise ValidationError("layers: expected a list")
    if not layers:
        raise ValidationError("layers: at least one layer is required")
    parsed = []
    for i, item in enumerate(layers):
        where = f"layers[{i}]"
        if not isinstance(item, dict):
            raise ValidationError(f"{where}: expected an object")
        extra = set(item) - {"n", "d"}
        if extra:
            raise ValidationError(f"{where}: unknown keys {sorted(extra)}")
        for key in ("n", "d"):
            v = item.get(key)
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ValidationError(f"{where}.{key}: expected a number, got {v!r}")
        try:
            build_crystal([(item["n"], item["d"])])
        except (InvalidLayer, EmptyStack) as exc:
            raise ValidationError(f"{where}: {exc}") from exc
        parsed.append((float(item["n"]), float(item["d"])))
    return RunSpec(layers=tuple(parsed))


# -- formatting ---------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return "nan"
    return format(float(v), ".17g")


def format_csv(columns: list[str], rows) -> str:
    lines = ["# " + ",".join(columns)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def format_json(summary: dict) -> str:
    return json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n"


def _edge_dict(edge: BandEdge, period: float) -> dict:
    return {
        "omega_c": edge.omega_c,
        "omega_c_reduced": edge.omega_c * period,
        "K_edge": edge.K_edge,
        "parity": edge.parity,
        "side": edge.side,
        "gap": edge.gap_index,
        "band": edge.band_index,
        "trace_slope": edge.trace_slope,
    }


# -- validation -----------------------------------------------------------------

def _parse_window(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(t) for t in text.split(":"))
    except ValueError as exc:
        raise ValidationError(f"--window: expected lo:hi, got {text!r}") from exc
    if not (0 < lo < hi):
        raise ValidationError(f"--window: need 0 < lo < hi, got {text!r}")
    return lo, hi


def _validate(spec: RunSpec) -> RunSpec:
    p = dict(spec.params)
    cmd = spec.command
    if cmd != "models" and not spec.layers:
        raise ValidationError("--config: a crystal configuration is required")
    if cmd == "bands":
        if p.get("omega_max") is None or not p["omega_max"] > 0:
            raise ValidationError("--omega-max: must be given and > 0")
    if cmd in ("dos", "ldos", "serate"):
        lo, hi, steps = p.get("omega_min"), p.get("omega_max"), p.get("omega_steps")
        if hi is None:
            raise ValidationError("--omega-max: required")
        if lo is None or lo < 0 or not hi > lo:
            raise ValidationError("--omega-min/--omega-max: need 0 <= min < max")
        if steps is None or steps < 2:
            raise ValidationError("--omega-steps: need at least 2")
    if cmd == "ldos" and (p.get("x") is None or not math.isfinite(p["x"])):
        raise ValidationError("--x: a finite position is required")
    if cmd in ("edge-fit", "sensitivity"):
        if p.get("gap") is None or p["gap"] < 1:
            raise ValidationError("--gap: must be >= 1")
        if p.get("side") not in ("lower", "upper"):
            raise ValidationError("--side: lower or upper")
    if cmd in ("edge-fit", "sensitivity", "models"):
        if p.get("window") is not None:
            p["window"] = _parse_window(p["window"])
        if p.get("points") is not None and p["points"] < 8:
            raise ValidationError("--points: need at least 8")
    if cmd == "edge-fit":
        if p.get("target") == "ldos" and p.get("x") is None and p.get("node") is None:
            raise ValidationError("--target ldos needs --x or --node")
        if p.get("x") is not None and not math.isfinite(p["x"]):
            raise ValidationError("--x: must be finite")
    if cmd == "sensitivity":
        if p.get("shift") is None or p["shift"] < 0:
            raise ValidationError("--shift: must be >= 0")
        if (p.get("node") or 0) < 0:
            raise ValidationError("--node: must be >= 0")
    if cmd == "serate":
        try:
            p["dist"] = EmitterDistribution.parse(p.get("dist") or "")
        except ValueError as exc:
            raise ValidationError(f"--dist: {exc}") from exc
    if cmd == "models":
        if p.get("model") not in ("isotropic", "anisotropic"):
            raise ValidationError("--model: isotropic or anisotropic")
        if p.get("omega_c") is None or not p["omega_c"] > 0:
            raise ValidationError("--omega-c: must be > 0")
        if p["model"] == "isotropic" and (p.get("k0") is None or not p["k0"] > 0):
            raise ValidationError("--k0: must be > 0 for the isotropic model")
        if p["model"] == "anisotropic" and p.get("A") is None:
            raise ValidationError("--A: required for the anisotropic model")
        if p.get("A") is not None and not p["A"] > 0:
            raise ValidationError("--A: must be > 0")
    return replace(spec, params=p)


# -- commands -------------------------------------------------------------------

def _omega_grid(p) -> np.ndarray:
    return np.linspace(p["omega_min"], p["omega_max"], p["omega_steps"])


def _cmd_bands(crystal, p):
    bands = find_bands(crystal, p["omega_max"])
    lam = crystal.period
    rows = [(b.index, b.omega_lo, b.omega_hi, b.edge_parity_lo, b.edge_parity_hi,
             b.omega_lo * lam, b.omega_hi * lam) for b in bands]
    cols = ["band", "omega_lo", "omega_hi", "parity_lo", "parity_hi", "omega_lo_reduced", "omega_hi_reduced"]
    summary = {
        "bands": [dict(zip(cols, r)) for r in rows],
        "edges": [_edge_dict(e, lam) for e in band_edges(bands, crystal)],
    }
    return cols, rows, summary


def _cmd_dos(crystal, p):
    w = _omega_grid(p)
    vals, gap = dos_curve(crystal, w)
    rows = list(zip(w, w * crystal.period, vals, gap))
    return ["omega", "omega_reduced", "dos", "in_gap"], rows, {"points": len(w), "gap_fraction": float(gap.mean())}


def _cmd_ldos(crystal, p):
    w = _omega_grid(p)
    x = p["x"]
    vals = [ldos(crystal, x, float(o)) for o in w]
    rows = list(zip(w, w * crystal.period, vals))
    return ["omega", "omega_reduced", "ldos"], rows, {"x": x, "points": len(w)}


def _pick_edge(crystal, p) -> BandEdge:
    lower, upper = gap_edges(crystal, p["gap"])
    return lower if p["side"] == "lower" else upper


def _node_position(crystal, edge, index: int) -> float:
    nodes = mode_nodes(edge_mode(crystal, edge))
    if index >= len(nodes):
        raise BandEdgeError(f"edge mode has {len(nodes)} nodes, --node {index} requested")
    return nodes[index]


def _cmd_edge_fit(crystal, p):
    edge = _pick_edge(crystal, p)
    window = p.get("window") or DEFAULT_WINDOW
    points = p.get("points") or DEFAULT_POINTS
    target = p.get("target") or "dos"
    x = None
    if target == "dos":
        fit = edge_exponent_dos(crystal, edge, window, points)
    else:
        x = p["x"] if p.get("x") is not None else _node_position(crystal, edge, p["node"])
        fit = edge_exponent_ldos(crystal, edge, x, window, points)
    rows = [(d, d / edge.omega_c, edge.omega_c + edge.band_sign * d, v) for d, v in zip(fit.detunings, fit.values)]
    summary = {"edge": _edge_dict(edge, crystal.period), "fit": fit.as_dict(), "target": target, "x": x}
    if target == "ldos":
        summary["regime"] = fit.regime
    return ["delta", "delta_rel", "omega", target], rows, summary


def _cmd_sensitivity(crystal, p):
    edge = _pick_edge(crystal, p)
    window = p.get("window") or SENSITIVITY_WINDOW
    points = p.get("points") or SENSITIVITY_POINTS
    node_x = _node_position(crystal, edge, p.get("node") or 0)
    report = sensitivity_scan(crystal, edge, node_x, p["shift"] * crystal.period,
                              detuning_ladder(edge, window, points))
    rows = [(d, d / edge.omega_c, r) for d, r in report.ratios]
    summary = {"edge": _edge_dict(edge, crystal.period), "sensitivity": report.as_dict()}
    return ["delta", "delta_rel", "ratio"], rows, summary


def _cmd_serate(crystal, p):
    w = _omega_grid(p)
    dist = p["dist"]
    vals = [se_rate_average(crystal, dist, float(o)) for o in w]
    rows = list(zip(w, w * crystal.period, vals))
    summary = {"distribution": {"kind": dist.kind, "x0": dist.x0, "sigma": dist.sigma}, "points": len(w)}
    return ["omega", "omega_reduced", "rate"], rows, summary


def _cmd_models(_crystal, p):
    window = p.get("window") or (1e-8, 1e-5)
    points = p.get("points") or DEFAULT_POINTS
    if p["model"] == "isotropic":
        model = IsotropicModel(p["omega_c"], p["k0"], p.get("A"))
        func = isotropic_dos
    else:
        model = AnisotropicModel(p["omega_c"], p["A"])
        func = anisotropic_dos
    delta = model.omega_c * np.geomspace(window[0], window[1], points)
    vals = [func(model, model.omega_c + d) for d in delta]
    fit = fit_exponent(np.column_stack([delta, vals]))
    rows = list(zip(delta, model.omega_c + delta, vals))
    summary = {"model": p["model"], "omega_c": model.omega_c, "A": model.A, "fit": fit.as_dict()}
    if p["model"] == "isotropic":
        summary["k0"] = model.k0
    return ["delta", "omega", "dos"], rows, summary


_HANDLERS = {
    "bands": _cmd_bands,
    "dos": _cmd_dos,
    "ldos": _cmd_ldos,
    "edge-fit": _cmd_edge_fit,
    "sensitivity": _cmd_sensitivity,
    "serate": _cmd_serate,
    "models": _cmd_models,
}
_TABULAR = {"bands", "dos", "ldos", "serate", "models"}


def run(spec: RunSpec, stdout=None) -> int:
    """Execute a validated spec; returns the process exit status."""
    stdout = stdout or sys.stdout
    try:
        spec = _validate(spec)
    except ValidationError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    crystal = spec.crystal() if spec.layers else None
    try:
        cols, rows, summary = _HANDLERS[spec.command](crystal, spec.params)
    except BandEdgeError as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    if crystal is not None:
        summary = {"command": spec.command, "period": crystal.period, **summary}
    else:
        summary = {"command": spec.command, **summary}
    csv_text, json_text = format_csv(cols, rows), format_json(summary)
    if spec.out:
        with open(spec.out, "w") as fh:
            fh.write(csv_text)
    if spec.json_out:
        with open(spec.json_out, "w") as fh:
            fh.write(json_text)
    if not spec.out and not spec.json_out:
        stdout.write(csv_text if spec.command in _TABULAR else json_text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bandedge", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON crystal config")
        p.add_argument("--out", help="CSV output path")
        p.add_argument("--json", dest="json_out", help="JSON summary path")

    def omega_range(p, steps=1001):
        p.add_argument("--omega-min", type=float, default=0.0)
        p.add_argument("--omega-max", type=float)
        p.add_argument("--omega-steps", type=int, default=steps)

    def edge_args(p):
        p.add_argument("--gap", type=int, required=True)
        p.add_argument("--side", choices=("lower", "upper"), required=True)
        p.add_argument("--window", help="relative detuning range lo:hi")
        p.add_argument("--points", type=int)
        p.add_argument("--node", type=int, help="use the n-th node of the edge mode (0-based)")

    p = sub.add_parser("bands", help="band table")
    common(p)
    p.add_argument("--omega-max", type=float)

    for name, text in (("dos", "density of states on a frequency grid"),
                       ("ldos", "local density of states at one position"),
                       ("serate", "emission rate averaged over emitter positions")):
        p = sub.add_parser(name, help=text)
        common(p)
        omega_range(p)
        if name == "ldos":
            p.add_argument("--x", type=float)
        if name == "serate":
            p.add_argument("--dist", default="uniform", help="delta:<x0> | uniform | gauss:<x0>:<sigma>")

    p = sub.add_parser("edge-fit", help="power-law exponent at a band edge")
    common(p)
    edge_args(p)
    p.add_argument("--target", choices=("dos", "ldos"), default="dos")
    p.add_argument("--x", type=float)

    p = sub.add_parser("sensitivity", help="LDOS ratio next to an edge-mode node")
    common(p)
    edge_args(p)
    p.add_argument("--shift", type=float, default=1e-4, help="displacement in units of the period")

    p = sub.add_parser("models", help="analytic model DOS")
    common(p)
    p.add_argument("--model", choices=("isotropic", "anisotropic"), required=True)
    p.add_argument("--omega-c", type=float)
    p.add_argument("--k0", type=float)
    p.add_argument("--A", type=float)
    p.add_argument("--window")
    p.add_argument("--points", type=int)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    spec = RunSpec()
    if args.config:
        try:
            with open(args.config) as fh:
                spec = parse_config(fh.read())
        except OSError as exc:
            log.error("config error: %s", exc)
            return EXIT_CONFIG
        except (ParseError, ValidationError) as exc:
            log.error("config error: %s: %s", args.config, exc)
            return EXIT_CONFIG
    params = {k: v for k, v in vars(args).items()
              if k not in ("command", "config", "out", "json_out", "verbose")}
    spec = replace(spec, command=args.command, params=params, out=args.out, json_out=args.json_out)
    return run(spec)


if __name__ == "__main__":
    sys.exit(main())

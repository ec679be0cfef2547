"""Command line front end.

Usage::

    polycusp validate  --input surface.json
    polycusp delaunay  --input surface.json --output flipped.json
    polycusp solve     --input surface.json [--tol 1e-10] [--max-iter 200]
    polycusp particles --input surface.json --kappa kappa.json
    polycusp rigidity  --input report.json
    polycusp develop   --input report.json --format obj --copies 2

Reports are JSON with a fixed key order and every float written with 17
significant digits, so identical runs give identical bytes.  Errors are
printed to stderr as ``{"code": ..., "message": ...}``.  Exit status is 0
on success, 1 for bad input and 2 when the geometry has no solution
(infeasible heights, solver stall or iteration limit).
"""

import argparse
import hashlib
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from .cusp import make_feasible
from .develop import develop, export_obj, to_json_dict, to_klein
from .errors import (Infeasible, InputError, IterationLimit, PolycuspError,
                     SolverError)
from .functional import total_scalar_curvature
from .solver import (SolveOptions, random_feasible_heights, rigidity_report,
                     solve_cusp, solve_particles)
from .surface import delaunay_with_flips, load_surface

COMMANDS = ("validate", "delaunay", "solve", "particles", "rigidity", "develop")

EXIT_OK, EXIT_INPUT, EXIT_GEOMETRY = 0, 1, 2


@dataclass
class RunConfig:
    command: str
    input: str
    output: str = None
    kappa: str = None
    tol: float = 1e-10
    max_iter: int = 200
    copies: int = 1
    format: str = "json"
    start: str = "zero"
    seed: int = None

    def check(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if (self.kappa is None) != (self.command != "particles"):
            raise InputError("--kappa is required by, and only allowed with, particles")
        if self.format not in ("json", "obj"):
            raise InputError("--format must be json or obj")
        if self.format == "obj" and self.command != "develop":
            raise InputError("--format obj only applies to develop")
        if self.copies < 0:
            raise InputError("--copies must be nonnegative")
        if not (self.tol > 0 and self.max_iter >= 0):
            raise InputError("--tol must be positive and --max-iter nonnegative")
        if not (self.start in ("zero", "random") or self.start.startswith("file:")):
            raise InputError("--start must be zero, random or file:<path>")


# serialization -------------------------------------------------------------

def dumps(obj, indent=0):
    """JSON text with floats as ``%.17g`` and keys in insertion order."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(dumps(v) for v in seq) + "]"
        return ("[\n" + ",\n".join(inner + dumps(v, indent + 1) for v in seq)
                + "\n" + pad + "]")
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError("non-finite float in report")
        return format(x, ".17g")
    return json.dumps(obj)


def _digest(data):
    return "sha256:" + hashlib.sha256(data).hexdigest()


def _read(path):
    try:
        with open(path, "rb") as f:
            return f.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _parse_json(data, path):
    try:
        return json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InputError(f"invalid JSON in {path}: {exc}") from None


def _vector(doc, key, n, path):
    if isinstance(doc, dict):
        doc = doc.get(key)
    if not (isinstance(doc, list) and len(doc) == n and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in doc)):
        raise InputError(f"{path} must hold {n} numbers")
    return np.array(doc, dtype=float)


def _load_input(path):
    """A surface, or a surface with heights when the file is a report."""
    data = _read(path)
    doc = _parse_json(data, path)
    if isinstance(doc, dict) and "surface" in doc and "h" in doc:
        surface = load_surface(doc["surface"])
        h = _vector(doc, "h", surface.n_vertices, path)
        return data, surface, h
    return data, load_surface(doc), None


def _options(cfg, surface):
    start = None
    if cfg.start.startswith("file:"):
        p = cfg.start[5:]
        start = _vector(_parse_json(_read(p), p), "h", surface.n_vertices, p)
    elif cfg.start == "random":
        rng = np.random.default_rng(cfg.seed)
        start = random_feasible_heights(surface, rng).heights
    return SolveOptions(tol_kappa=cfg.tol, max_iter=cfg.max_iter, start=start)


def state_document(state):
    """Everything needed to rebuild and check a state."""
    s = state.surface
    e = s.edges[:, 0]
    flat = state.flat_edges()
    return {
        "surface": s.to_dict(),
        "triangulation": {
            "triangles": s.triangle_vertices().tolist(),
            "lengths": s.corner_lengths().tolist(),
        },
        "h": state.heights,
        "edges": [
            {"edge": k, "vertices": [int(s.vertex_of[e[k]]), int(s.head(e[k]))],
             "length": float(s.length[e[k]]), "theta": float(state.theta[k]),
             "flat": bool(flat[k])}
            for k in range(s.n_edges)
        ],
        "kappa": state.kappa,
        "S": total_scalar_curvature(state),
        "volume": state.volume,
    }


def _solver_summary(report):
    return {
        "converged": report.converged,
        "boundary_stall": report.boundary_stall,
        "iterations": report.iterations,
        "residual": report.residual,
        "flips": report.flips,
        "flat_edges": report.flat_edges,
        "trace": [{k: t[k] for k in ("iter", "residual", "S", "step", "flips",
                                     "rejected")
                   if k in t} for t in report.trace],
    }


def _rigidity_summary(state):
    r = rigidity_report(state)
    return {
        "verdict": r["verdict"],
        "rigid": r["rigid"],
        "deficiency": r["deficiency"],
        "numerical_deficiency": r["numerical_deficiency"],
        "components": r["components"],
        "smallest_nonzero_eigenvalue": r["smallest_nonzero"],
        "eigenvalues": r["eigenvalues"],
    }


def _state_for(cfg, surface, h):
    """The state a command acts on: the given heights, or the solved cusp."""
    if h is not None:
        return make_feasible(surface, h), None
    report = solve_cusp(surface, _options(cfg, surface))
    return report.state, report


def run(cfg):
    """Execute one command and return the text it produces.

    Errors propagate as exceptions; ``main`` maps them to exit statuses.
    """
    cfg.check()
    data, surface, h = _load_input(cfg.input)
    head = {"command": cfg.command, "input_digest": _digest(data)}
    if cfg.command == "validate":
        return dumps({**head, "valid": True,
                      "n_vertices": surface.n_vertices,
                      "n_edges": surface.n_edges,
                      "n_triangles": surface.n_triangles,
                      "cone_angles": surface.cone_angle,
                      "curvature": surface.curvature,
                      "area": surface.area}) + "\n"
    if cfg.command == "delaunay":
        flipped, flips = delaunay_with_flips(surface)
        return dumps({**head, "flips": flips, "surface": flipped.to_dict()}) + "\n"
    if cfg.command == "solve":
        rep = solve_cusp(surface, _options(cfg, surface))
        return dumps({**head, **state_document(rep.state),
                      "solver": _solver_summary(rep)}) + "\n"
    if cfg.command == "particles":
        target = _vector(_parse_json(_read(cfg.kappa), cfg.kappa), "kappa",
                         surface.n_vertices, cfg.kappa)
        rep = solve_particles(surface, target, _options(cfg, surface))
        return dumps({**head, "kappa_target": target, **state_document(rep.state),
                      "solver": _solver_summary(rep)}) + "\n"
    state, _ = _state_for(cfg, surface, h)
    if cfg.command == "rigidity":
        return dumps({**head, **state_document(state),
                      "rigidity": _rigidity_summary(state)}) + "\n"
    dev = develop(state)
    if cfg.format == "obj":
        return export_obj(to_klein(dev, cfg.copies))
    return dumps({**head, **to_json_dict(dev)}) + "\n"


def build_parser():
    ap = argparse.ArgumentParser(
        prog="polycusp",
        description="Convex polyhedral cusps with prescribed boundary metric.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--input", required=True,
                    help="surface JSON, or a report JSON with surface and h")
    ap.add_argument("--output", help="write here instead of stdout")
    ap.add_argument("--kappa", help="target curvatures (particles only)")
    ap.add_argument("--tol", type=float, default=1e-10)
    ap.add_argument("--max-iter", type=int, default=200)
    ap.add_argument("--copies", type=int, default=1)
    ap.add_argument("--format", choices=("json", "obj"), default="json")
    ap.add_argument("--start", default="zero",
                    help="zero, random (uses --seed) or file:<path>")
    ap.add_argument("--seed", type=int)
    return ap


def _error(exc, status):
    if isinstance(exc, PolycuspError):
        doc = exc.to_dict()
    else:
        doc = {"code": type(exc).__name__, "message": str(exc)}
    sys.stderr.write(dumps(doc) + "\n")
    return status


def main(argv=None):
    args = build_parser().parse_args(argv)
    cfg = RunConfig(command=args.command, input=args.input, output=args.output,
                    kappa=args.kappa, tol=args.tol, max_iter=args.max_iter,
                    copies=args.copies, format=args.format, start=args.start,
                    seed=args.seed)
    try:
        text = run(cfg)
    except (Infeasible, SolverError, IterationLimit) as exc:
        return _error(exc, EXIT_GEOMETRY)
    except PolycuspError as exc:
        return _error(exc, EXIT_INPUT)
    except ValueError as exc:
        return _error(exc, EXIT_INPUT)
    if cfg.output:
        with open(cfg.output, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

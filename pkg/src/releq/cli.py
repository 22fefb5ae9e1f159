"""Command line front end: releq <analysis> --config <path> [--out <dir>] [--seed <u64>]."""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .branch_analysis import (classify_crossing, continue_branch, detect_crossings,
                              find_relative_equilibrium, formal_stability, make_point,
                              persistence_surface, switch_branch)
from .errors import ConfigInvalid, ReleqError
from .export import (config_hash, monitor, point_record, to_jsonable, write_branch_csv,
                     write_json, write_svg)
from .models import system_from_config, wave_reference, params_from_dict
from .reduction_pipeline import NewtonOptions, build_reduced
from .slice_builder import build_slice

ANALYSES = ("find-re", "reduce", "continue", "persist", "bifurcate", "stability")

DEFAULT_NUMERIC = {
    "tol_rank": 1e-8,
    "newton_tol": 1e-12,
    "branch_tol": 1e-9,
    "continuation_tol": 1e-10,
    "step_size": 0.05,
    "n_steps": 40,
    "drift_t_max": 1.0,
    "drift_steps": 200,
    "drift_limit": 1e-5,
}


@dataclass
class RunConfig:
    analysis: str
    doc: dict
    system: object
    numeric: dict
    out_dir: str
    formats: tuple
    seed: int


def _base(cfg):
    doc, system = cfg.doc, cfg.system
    if "base" in doc:
        b = doc["base"]
        try:
            z = np.asarray(b["z"], dtype=float)
            xi = np.asarray(b["xi"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigInvalid("base needs numeric z and xi") from exc
        if z.shape != (system.dim,) or xi.shape != (system.k,):
            raise ConfigInvalid("base z/xi have the wrong length")
        return z, xi
    ham = doc.get("hamiltonian", {})
    if ham.get("kind") == "builtin" and ham.get("name") == "wave_resonance":
        params = ham.get("params", {}) or {}
        ref = wave_reference(params_from_dict(params), float(params.get("xi2", 0.0)))
        return ref.base_point, ref.generator
    raise ConfigInvalid("analysis needs a base point (base.z, base.xi)")


def _direction(cfg, z, xi, spec):
    n2, k = cfg.system.dim, cfg.system.k
    d = np.zeros(n2 + k)
    if isinstance(spec, list):
        d = np.asarray(spec, dtype=float)
        if d.shape != (n2 + k,):
            raise ConfigInvalid("direction vector has the wrong length")
        return d
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ConfigInvalid("direction must be a vector or one of {z: i}, {xi: i}, {mu: i}")
    (key, i), = spec.items()
    i = int(i)
    if key == "z" and 0 <= i < n2:
        d[i] = 1.0
    elif key == "xi" and 0 <= i < k:
        d[n2 + i] = 1.0
    elif key == "mu" and 0 <= i < k:
        d[:n2] = cfg.system.momentum_jacobian(z)[i]
    else:
        raise ConfigInvalid(f"bad direction {spec!r}")
    return d


def _continuation_args(cfg, z, xi):
    sec = cfg.doc.get("continuation")
    if not isinstance(sec, dict):
        raise ConfigInvalid("missing continuation section")
    fixed = []
    for c in sec.get("fixed", []):
        if c.get("kind") not in ("xi", "mu"):
            raise ConfigInvalid(f"bad constraint {c!r}")
        fixed.append((c["kind"], int(c["index"]), c.get("value")))
    bounds = None
    if "bounds" in sec:
        b = sec["bounds"]
        try:
            bounds = (monitor(b["monitor"]), float(b.get("min", -np.inf)),
                      float(b.get("max", np.inf)))
        except (KeyError, ValueError) as exc:
            raise ConfigInvalid(f"bad bounds: {exc}") from exc
    d = _direction(cfg, z, xi, sec.get("direction", {"z": 0}))
    return dict(direction=d, step_size=float(sec.get("step_size", cfg.numeric["step_size"])),
                n_steps=int(sec.get("n_steps", cfg.numeric["n_steps"])), fixed=fixed,
                bounds=bounds, tol=cfg.numeric["continuation_tol"])


def parse_config(analysis, path, out_dir=None, seed=0):
    if analysis not in ANALYSES:
        raise ConfigInvalid(f"unknown analysis {analysis!r}")
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot read config: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigInvalid("config must be a JSON object")
    if isinstance(doc.get("model"), dict):
        doc = {**{k: v for k, v in doc.items() if k != "model"}, **doc["model"]}
    rng = np.random.default_rng(int(seed))
    system = system_from_config(doc, rng)
    numeric = dict(DEFAULT_NUMERIC)
    numeric.update(doc.get("numeric", {}) or {})
    for key, val in numeric.items():
        if isinstance(val, bool) or not isinstance(val, (int, float)) or not val > 0:
            raise ConfigInvalid(f"numeric.{key} must be positive")
    out = doc.get("output", {}) or {}
    out_dir = out_dir or out.get("directory", "releq_out")
    formats = tuple(out.get("formats", ("csv", "json", "svg")))
    if not set(formats) <= {"csv", "json", "svg"}:
        raise ConfigInvalid(f"unknown output formats {formats}")
    cfg = RunConfig(analysis, doc, system, numeric, out_dir, formats, int(seed))
    _validate_sections(cfg)
    return cfg


def _validate_sections(cfg):
    doc = cfg.doc
    a = cfg.analysis
    if a == "find-re":
        seeds = doc.get("seeds")
        if not isinstance(seeds, list) or not seeds:
            raise ConfigInvalid("find-re needs a non-empty seeds list")
        for s in seeds:
            if not isinstance(s, dict) or len(s.get("z", [])) != cfg.system.dim or \
                    len(s.get("xi", [])) != cfg.system.k:
                raise ConfigInvalid("each seed needs z (length 2n) and xi (length k)")
    if a in ("continue", "bifurcate") and not isinstance(doc.get("continuation"), dict):
        raise ConfigInvalid(f"{a} needs a continuation section")
    if a == "persist":
        p = doc.get("persist")
        if not isinstance(p, dict) or not p.get("etas") or not p.get("alphas"):
            raise ConfigInvalid("persist needs persist.etas and persist.alphas")
    if a == "stability" and doc.get("points"):
        for p in doc["points"]:
            if len(p.get("z", [])) != cfg.system.dim or len(p.get("xi", [])) != cfg.system.k:
                raise ConfigInvalid("stability points need z (length 2n) and xi (length k)")
    elif a != "find-re":
        z, xi = _base(cfg)
        if a in ("continue", "bifurcate"):
            _continuation_args(cfg, z, xi)
    diag = doc.get("diagram", {}) or {}
    for key in ("x", "y"):
        if key in diag:
            try:
                monitor(diag[key])
            except ValueError as exc:
                raise ConfigInvalid(str(exc)) from exc


class _Run:
    def __init__(self, cfg):
        self.cfg = cfg
        self.files = []
        self.drifts = []

    def path(self, name):
        return os.path.join(self.cfg.out_dir, name)

    def emit_json(self, name, obj):
        if "json" in self.cfg.formats:
            write_json(self.path(name), obj)
            self.files.append(name)

    def emit_csv(self, name, points):
        if "csv" in self.cfg.formats and points:
            write_branch_csv(self.path(name), points)
            self.files.append(name)

    def emit_svg(self, name, branches):
        if "svg" not in self.cfg.formats:
            return
        diag = self.cfg.doc.get("diagram", {}) or {}
        write_svg(self.path(name), branches, diag.get("x", "arclength"), diag.get("y", "abs[0]"))
        self.files.append(name)

    def drift(self, p):
        n = self.cfg.numeric
        rep = self.cfg.system.check_relative_equilibrium(p.z, p.xi, n["drift_t_max"],
                                                         int(n["drift_steps"]))
        self.drifts.append(rep.orbit_drift)
        if rep.orbit_drift > n["drift_limit"]:
            raise ReleqError(f"emitted point fails the drift check ({rep.orbit_drift:.3e})")
        return rep.orbit_drift

    def records(self, points):
        return [point_record(p, self.drift(p)) for p in points]


def _branch_manifest(br, records):
    return {"branch_id": br.branch_id, "kind": br.kind, "parent": br.parent, "folds": br.folds,
            "meta": {k: v for k, v in br.meta.items() if k not in ("reduced_points", "fixed")},
            "fixed": [vars(c) for c in br.meta.get("fixed", [])], "points": records}


def _run_analysis(run):
    cfg = run.cfg
    system = cfg.system
    num = cfg.numeric
    a = cfg.analysis
    if a == "find-re":
        pts = []
        for s in cfg.doc["seeds"]:
            fixed = [(c["kind"], int(c["index"]), c.get("value")) for c in s.get("fixed", [])]
            z, xi = find_relative_equilibrium(system, s["z"], s["xi"], fixed)
            pts.append(make_point(system, z, xi))
        run.emit_json("equilibria.json", {"equilibria": run.records(pts)})
        run.emit_csv("equilibria.csv", pts)
        return
    z, xi = _base(cfg)
    if a == "reduce":
        dec = build_slice(system, z, xi, num["tol_rank"])
        rp = build_reduced(dec, newton=NewtonOptions(tol=num["newton_tol"]))
        run.emit_json("slice.json", dec.to_dict())
        spec = rp.spectrum_dict()
        if system.name == "wave_resonance":
            ref = wave_reference(system.meta["params"], float(xi[1]))
            if np.allclose(z, ref.base_point):
                spec["wave_reference"] = {"eigenvalues": ref.eigenvalues,
                                          "nondegeneracy": ref.nondegeneracy()}
        run.emit_json("spectrum.json", spec)
        return
    if a == "stability":
        pts = cfg.doc.get("points") or [{"z": z.tolist(), "xi": xi.tolist()}]
        out = []
        for p in pts:
            zz, xx = np.asarray(p["z"], dtype=float), np.asarray(p["xi"], dtype=float)
            st = formal_stability(system, zz, xx, num["tol_rank"])
            bp = make_point(system, zz, xx)
            if bp.residual > num["branch_tol"]:
                raise ReleqError(f"point is not a relative equilibrium (residual {bp.residual:.3e})")
            out.append({"z": zz, "xi": xx, "verdict": st.verdict, "eigenvalues": st.eigenvalues,
                        "min_abs": st.min_abs, "dim": st.dim, "drift": run.drift(bp)})
        run.emit_json("stability.json", {"points": out})
        return
    if a == "persist":
        p = cfg.doc["persist"]
        rep = persistence_surface(system, z, xi, p["etas"], p["alphas"], num["tol_rank"])
        for rec in rep.points:
            bp = make_point(system, rec["z"], rec["xi"])
            rec["drift"] = run.drift(bp)
        run.emit_json("persistence.json", rep.to_dict())
        return
    kw = _continuation_args(cfg, z, xi)
    br = continue_branch(system, (z, xi), **kw)
    run.emit_csv(f"branch_{br.branch_id}.csv", br.points)
    run.emit_json(f"branch_{br.branch_id}.json", _branch_manifest(br, run.records(br.points)))
    branches = [br]
    if a == "bifurcate":
        amps = cfg.doc.get("bifurcate", {}).get("amplitudes",
                                                [-0.1, -0.07, -0.05, -0.03, 0.03, 0.05, 0.07, 0.1])
        events_out = []
        for j, ev in enumerate(detect_crossings(system, br)):
            cl = classify_crossing(system, ev, num["tol_rank"])
            rec = {"index": ev.index, "arclength": ev.arclength, "z": ev.z, "xi": ev.xi,
                   "crossing_values": ev.crossing_values, "multiplicity": ev.multiplicity,
                   "kernel_isotropy": str(ev.kernel_isotropy), "kind": cl.kind,
                   "weight": cl.weight, "unfolding": cl.unfolding,
                   "details": cl.details, "branch": None}
            if cl.kind in ("pitchfork", "saddle_node", "complex_circle"):
                sw = switch_branch(system, ev, cl, amps, branch_id=f"b{j + 1}")
                rec["branch"] = sw.branch_id
                run.emit_csv(f"branch_{sw.branch_id}.csv", sw.points)
                run.emit_json(f"branch_{sw.branch_id}.json",
                              _branch_manifest(sw, run.records(sw.points)))
                branches.append(sw)
            events_out.append(rec)
        run.emit_json("events.json", {"events": events_out})
    run.emit_svg("diagram.svg", branches)


def run(cfg):
    """Execute one analysis; returns the exit status (0 ok, 1 analysis failure)."""
    os.makedirs(cfg.out_dir, exist_ok=True)
    r = _Run(cfg)
    status, error = 0, None
    try:
        _run_analysis(r)
    except (ReleqError, np.linalg.LinAlgError, ValueError) as exc:
        status = 1
        error = {"type": "AnalysisFailed", "inner": type(exc).__name__, "message": str(exc)}
    manifest = {"tool": "releq", "version": __version__, "analysis": cfg.analysis,
                "config_hash": config_hash(cfg.doc), "seed": cfg.seed,
                "tolerances": cfg.numeric, "status": "ok" if status == 0 else "failed",
                "error": error, "files": sorted(r.files),
                "max_drift": max(r.drifts) if r.drifts else None, "model": cfg.system.name}
    write_json(os.path.join(cfg.out_dir, "manifest.json"), to_jsonable(manifest))
    return status


def main(argv=None):
    ap = argparse.ArgumentParser(prog="releq", description=__doc__)
    ap.add_argument("analysis", choices=ANALYSES)
    ap.add_argument("--config", required=True)
    ap.add_argument("--out", default=None)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if args.seed < 0 or args.seed >= 2**64:
        print("error: seed must be an unsigned 64-bit integer", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(args.analysis, args.config, args.out, args.seed)
        return run(cfg)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command line interface.

Subcommands: ``construct``, ``scan``, ``verify-isotopy``, ``classify``,
``assemble`` and ``oracle-check``.  Each writes a JSON report (fixed
``schema_version``, floats with 17 significant digits) and plot-ready CSV
files to ``--out-dir`` and prints the report.  The exit status is 0 when
every certification in the run passed, 1 when one failed and 2 for input
errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .assembler import (BoundaryModelMetric, assemble_gl_cobordism, decompose_regions,
                        equivariance_probe, normal_form_model, theorem12_block_family)
from .curvature import BlockMetric, Glued, Product, compare_to_oracle, positivity_scan
from .errors import GeometryError
from .isotopy import (CollarRegion, boundary_product_check, convex_fault_path,
                      delta_scaling_path, lemma21_path, verify_path_psc)
from .metrics import MetricSpec
from .singular import (PolynomialFamily, admissible_check, find_critical_points,
                       singular_set_trace, unfolding_family)
from .warp import WarpFn

SCHEMA_VERSION = 1
COMMANDS = ("construct", "scan", "verify-isotopy", "classify", "assemble", "oracle-check")

_TOL_KEYS = {"oracle", "seam", "equivariance", "collar"}


class InputError(Exception):
    """Malformed command input."""


@dataclass
class RunConfig:
    command: str
    input: object
    out_dir: str | None = None
    grid: int = 64
    samples: int = 21
    seed: int = 0
    tol: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.grid < 16:
            raise InputError(f"--grid must be at least 16, got {self.grid}")
        if self.samples < 2:
            raise InputError(f"--samples must be at least 2, got {self.samples}")
        unknown = set(self.tol) - _TOL_KEYS
        if unknown:
            raise InputError(f"unknown tolerance keys {sorted(unknown)}; expected {sorted(_TOL_KEYS)}")
        for k, v in self.tol.items():
            if not (isinstance(v, (int, float)) and v > 0):
                raise InputError(f"tolerance {k} must be positive, got {v!r}")

    def record(self) -> dict:
        return {"command": self.command, "grid": self.grid, "samples": self.samples,
                "seed": self.seed, "tol_overrides": self.tol}


# ---------------------------------------------------------------------------
# serialisation


def _encode(obj, out: list) -> None:
    if isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(", ")
            out.append(json.dumps(str(k)))
            out.append(": ")
            _encode(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _encode(v, out)
        out.append("]")
    elif isinstance(obj, np.ndarray):
        _encode(obj.tolist(), out)
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        out.append(format(x, ".17g") if math.isfinite(x) else "null")
    elif obj is None:
        out.append("null")
    else:
        out.append(json.dumps(str(obj)))


def dumps(obj) -> str:
    """JSON text with every float printed to 17 significant digits."""
    out: list = []
    _encode(obj, out)
    return "".join(out)


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format(float(v), ".17g") if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def _load(text: str):
    src = text
    if not text.lstrip().startswith(("{", "[")):
        if not os.path.exists(text):
            raise InputError(f"input {text!r} is neither inline JSON nor an existing file")
        with open(text) as fh:
            src = fh.read()
    try:
        return json.loads(src)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


# ---------------------------------------------------------------------------
# commands


def _warps(m: BlockMetric, prefix: str = "") -> list[tuple[str, WarpFn]]:
    out = []
    if isinstance(m, Glued):
        for i, part in enumerate(m.parts):
            out.extend(_warps(part.block, f"{prefix}part{i}."))
        return out
    if isinstance(m, Product):
        for i, f in enumerate(m.factors):
            out.extend(_warps(f, f"{prefix}factor{i}."))
        return out
    for name in ("f", "u", "v"):
        w = getattr(m, name, None)
        if isinstance(w, WarpFn):
            out.append((prefix + name, w))
    return out


def cmd_construct(cfg: RunConfig):
    spec = MetricSpec.from_dict(cfg.input)
    m = spec.build()
    files = {}
    for name, w in _warps(m):
        rows = w.sample(max(cfg.grid, 16))
        files[f"warp_{name}.csv"] = _csv(rows, ["t", "f", "df", "d2f"])
    report = {"variant": spec.variant, "params": spec.params, "dim": m.dim,
              "charts": [list(b) for b in m.bounds], "coords": list(m.coords),
              "metric": m.to_dict(), "warp_files": sorted(files),
              "certified": bool(getattr(m, "certified", True)), "pass": True}
    return report, files


def cmd_scan(cfg: RunConfig):
    m = MetricSpec.from_dict(cfg.input).build()
    g = positivity_scan(m, cfg.grid)
    return {"spec": cfg.input, **g.summary()}, {"curvature_grid.csv": g.to_csv()}


def _path_from(inp: dict):
    kind = inp.get("kind")
    params = dict(inp.get("params", {}))
    if kind == "lemma21":
        return lemma21_path(**params)
    if kind == "delta-scaling":
        spec = MetricSpec.from_dict(params.pop("spec"))
        return delta_scaling_path(spec, float(params["delta0"]), float(params["delta1"]))
    if kind == "convex-fault":
        return convex_fault_path(**params)
    raise InputError(f"unknown path kind {kind!r}; expected lemma21, delta-scaling or convex-fault")


def cmd_verify_isotopy(cfg: RunConfig):
    p = _path_from(cfg.input)
    rep = verify_path_psc(p, n_s=cfg.samples, grid=cfg.grid)
    out = {"path": rep.to_dict()}
    passed = rep.passed
    if p.kind in ("lemma21", "convex-fault"):
        b = p.params["b"]
        col = CollarRegion(1, -b, -b + 0.5 * b, samples=9, cross_samples=17)
        bp = boundary_product_check(p, col, n_s=min(cfg.samples, 21), relative=False,
                                    tol=cfg.tol.get("collar", 1e-10))
        out["boundary"] = bp.to_dict()
        passed = passed and bp.passed
    out["pass"] = passed
    rows = [(r["s"], r["min_R"]) for r in rep.samples]
    return out, {"path_min_R.csv": _csv(rows, ["s", "min_R"])}


def _family_from(inp: dict):
    fam = inp.get("family")
    if fam is None:
        raise InputError("classify input needs a 'family' entry")
    if "unfolding" in fam:
        u = fam["unfolding"]
        return unfolding_family(int(u["s"]), int(u["m"]))
    return PolynomialFamily.from_json(fam)


def cmd_classify(cfg: RunConfig):
    F = _family_from(cfg.input)
    region = cfg.input.get("region")
    files, out = {}, {"k": F.k, "m": F.m, "provenance": F.provenance}
    cusps = []
    if F.k == 0:
        region = region or [[-1.0, 1.0]] * F.m
        pts = find_critical_points(F, region)
    else:
        region = region or [[-1.0, 1.0]] * (F.k + F.m)
        ys = cfg.input.get("y", [])
        pts = []
        for y in np.atleast_1d(ys):
            pts.extend(find_critical_points(F, region[F.k:], y=[float(y)]))
        curves = singular_set_trace(F, region)
        cusps = [p for c in curves for p in c.cusps]
        out["curves"] = [{"points": len(c.points), "residual": c.residual, "stalled": c.stalled,
                          "cusps": [p.to_dict() for p in c.cusps],
                          "classes": sorted(set(c.classes))} for c in curves]
        for i, c in enumerate(curves):
            files[f"singular_curve_{i}.csv"] = c.to_csv(["y"] + [f"x{j}" for j in range(F.m)])
        out["trace_residual"] = max([c.residual for c in curves], default=0.0)
    out["critical_points"] = [p.to_dict() for p in pts]
    passed = True
    if "n" in cfg.input:
        adm = admissible_check(pts + cusps, int(cfg.input["n"]))
        out["admissibility"] = adm
        passed = adm["pass"]
    out["pass"] = passed and all(not c["stalled"] for c in out.get("curves", []))
    return out, files


def cmd_assemble(cfg: RunConfig):
    inp = cfg.input
    p, q = int(inp.get("p", 1)), int(inp.get("q", 3))
    eps, delta = float(inp.get("epsilon", 0.1)), float(inp.get("delta", 0.1))
    g0 = BoundaryModelMetric(p, q, float(inp.get("eps0", eps)), delta, float(inp.get("L", 1.0)))
    d = decompose_regions(normal_form_model(p, q), float(inp.get("c0", 0.4)), float(inp.get("c1", 0.6)),
                          float(inp.get("rho_N", 2.0 * delta * math.pi / 2)))
    m = assemble_gl_cobordism(g0, d, eps, delta)
    eq = equivariance_probe(m, int(inp.get("rotations", 20)), seed=cfg.seed)
    eq["pass"] = eq["max_deviation"] <= cfg.tol.get("equivariance", 1e-10)
    bundle = m.certificate_bundle(cfg.grid, eq)
    seam_tol = cfg.tol.get("seam", 1e-10)
    bundle["pass"] = bundle["pass"] and all(c["deviation"] <= seam_tol for c in m.certificates)
    files = {f"region_{k}.csv": g.to_csv() for k, g in m.scans(cfg.grid).items()}
    if "family" in inp:
        fa = inp["family"]
        fam = theorem12_block_family(int(fa.get("s", 1)), (p, q), g0, float(fa.get("delta_y", 0.25)),
                                     float(fa.get("eps_z", 1.0)), eps, delta,
                                     slices=int(fa.get("slices", 21)), c0=d.c0, c1=d.c1,
                                     rho_N=d.rho_N, grid=max(16, cfg.grid // 2))
        bundle["family"] = {"slices": fam.table(), "lipschitz": fam.lipschitz, "pass": fam.passed}
        bundle["pass"] = bundle["pass"] and fam.passed
        files["family.csv"] = _csv([(s.y, s.lam, min(s.min_R.values()), int(s.passed))
                                    for s in fam.slices], ["y", "lambda", "min_R", "pass"])
    return bundle, files


def cmd_oracle_check(cfg: RunConfig):
    m = MetricSpec.from_dict(cfg.input).build()
    if m.dim > 6:
        raise InputError(f"oracle chart dimension {m.dim} exceeds 6")
    rng = np.random.default_rng(cfg.seed)
    tol = cfg.tol.get("oracle", 1e-4)
    rows, worst = [], 0.0
    for _ in range(cfg.samples):
        x = [lo + (hi - lo) * (0.05 + 0.9 * rng.random()) for lo, hi in m.bounds]
        if isinstance(m, Glued):
            part = m.part_at(x[m.axis])
            blk = part.block
            x[m.axis] -= part.shift
        else:
            blk = m
        r = compare_to_oracle(blk, *x, tol=tol)
        rows.append((*x, r["closed"], r["oracle"], r["relative"]))
        worst = max(worst, r["relative"])
    report = {"spec": cfg.input, "samples": cfg.samples, "tol": tol, "max_relative": worst,
              "pass": worst <= tol}
    return report, {"oracle.csv": _csv(rows, list(m.coords) + ["closed", "oracle", "relative"])}


_HANDLERS = {"construct": cmd_construct, "scan": cmd_scan, "verify-isotopy": cmd_verify_isotopy,
             "classify": cmd_classify, "assemble": cmd_assemble, "oracle-check": cmd_oracle_check}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="glsurgery", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--input", required=True, help="inline JSON or path to a JSON file")
        sp.add_argument("--out-dir", default=None)
        sp.add_argument("--grid", type=int, default=64)
        sp.add_argument("--samples", type=int, default=21)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--tol-overrides", default="{}", help="JSON object of tolerance overrides")
    return ap


def run(cfg: RunConfig) -> tuple[dict, dict]:
    report, files = _HANDLERS[cfg.command](cfg)
    report = {"schema_version": SCHEMA_VERSION, "config": cfg.record(), **report}
    return report, files


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        tol = _load(args.tol_overrides)
        if not isinstance(tol, dict):
            raise InputError("--tol-overrides must be a JSON object")
        cfg = RunConfig(args.command, _load(args.input), args.out_dir, args.grid, args.samples,
                        args.seed, tol)
        if not isinstance(cfg.input, dict):
            raise InputError("input must be a JSON object")
        report, files = run(cfg)
    except (InputError, GeometryError, KeyError, TypeError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"glsurgery {args.command}: error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 2
    text = dumps(report)
    if cfg.out_dir:
        os.makedirs(cfg.out_dir, exist_ok=True)
        with open(os.path.join(cfg.out_dir, "report.json"), "w") as fh:
            fh.write(text + "\n")
        for name, body in files.items():
            with open(os.path.join(cfg.out_dir, name), "w", newline="") as fh:
                fh.write(body)
    print(text)
    return 0 if report.get("pass", False) else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

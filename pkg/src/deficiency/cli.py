"""Batch front end.

Usage::

    deficiency indices   --config run.ini [--out report.json] [--json]
    deficiency extend    --config run.ini
    deficiency sweep     --config run.ini
    deficiency bipartite --config run.ini
    deficiency frames    --config run.ini --z 1+1j --z 2j
    deficiency probe     --config run.ini

Exit codes: 0 success, 1 I/O or input, 2 model rejected, 3 no extension,
4 certificate failure.
"""
from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import math
import re
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .bipartite import (
    MeasureSpace,
    assemble,
    conjecture_probe,
    deficiency_direct,
    deficiency_fibered,
    isomorphism,
    oracle_angle,
)
from .errors import DeficiencyError, InputError, NoSelfAdjointExtension
from .extensions import (
    UnitaryParameter,
    build_extension,
    domain_angle,
    graph_angle,
    sweep_extensions,
    verify_extension,
)
from .frames import FiberFrames, unitarity_residual
from .linalg import DEFAULT_TOL, Tolerances, max_angle, range_complement, read_matrix, write_matrix
from .operator import OperatorModel, deficiency_report, preset, validate_symmetric

SCHEMA_VERSION = 1
UNITARY_TOL = 1e-9
ANGLE_TOL = 1e-8


# -- config ------------------------------------------------------------------


def load_config(path) -> configparser.ConfigParser:
    cfg = configparser.ConfigParser()
    path = Path(path)
    try:
        with path.open(encoding="utf-8") as fh:
            cfg.read_file(fh)
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise InputError(f"malformed config {path}: {exc}") from exc
    cfg.base_dir = path.parent
    return cfg


def _resolve(cfg, value: str) -> str:
    p = Path(value)
    return str(p if p.is_absolute() else Path(getattr(cfg, "base_dir", ".")) / p)


def operator_from_config(cfg, section: str = "operator") -> OperatorModel:
    if not cfg.has_section(section):
        raise InputError(f"config has no [{section}] section")
    sec = cfg[section]
    name = sec.get("preset", "matrix_file" if "matrix" in sec else None)
    if name is None:
        raise InputError(f"[{section}] needs a 'preset' or a 'matrix' path")
    if name != "matrix_file" and "matrix" in sec:
        raise InputError(f"[{section}] gives both preset {name!r} and a matrix file")
    params = {}
    if "n" in sec:
        params["n"] = sec.getint("n")
    if "matrix" in sec:
        params["matrix"] = _resolve(cfg, sec["matrix"])
    if sec.get("constraints"):
        params["constraints"] = _resolve(cfg, sec["constraints"])
    return preset(name, **params)


def tolerances_from(cfg, args) -> Tolerances:
    values = {}
    if cfg.has_section("tolerances"):
        for key, val in cfg["tolerances"].items():
            if key not in Tolerances.__dataclass_fields__:
                raise InputError(f"unknown tolerance {key!r}")
            values[key] = float(val)
    if args.tol_rank is not None:
        values["tol_rank"] = args.tol_rank
    if args.tol_zero is not None:
        values["tol_zero"] = args.tol_zero
    return replace(DEFAULT_TOL, **values)


_PAIR = re.compile(r"\(\s*([^,()]+?)\s*,\s*([^,()]+?)\s*\)")


def space_from_config(cfg) -> MeasureSpace:
    if not cfg.has_section("space") or "points" not in cfg["space"]:
        raise InputError("config needs [space] points = (phi, mu), ...")
    text = cfg["space"]["points"]
    pairs = _PAIR.findall(text)
    if not pairs:
        raise InputError(f"cannot parse measure space points: {text!r}")
    try:
        phi, mu = zip(*[(float(a), float(b)) for a, b in pairs])
    except ValueError as exc:
        raise InputError(f"bad measure space entry: {exc}") from exc
    return MeasureSpace(phi, mu)


def parse_unitary(param: str, d: int, cfg=None) -> UnitaryParameter:
    """``phase:<theta>`` (e^{i theta} times the d x d identity) or a matrix file."""
    param = param.strip()
    if param.startswith("phase:"):
        try:
            theta = float(param[len("phase:"):])
        except ValueError as exc:
            raise InputError(f"bad phase {param!r}") from exc
        return UnitaryParameter.phase(theta, d)
    path = _resolve(cfg, param) if cfg is not None else param
    return UnitaryParameter(read_matrix(path))


def parse_complex(text: str) -> complex:
    t = text.strip().replace(" ", "").replace("i", "j")
    t = re.sub(r"(^|[+-])j", r"\g<1>1j", t)
    try:
        return complex(t)
    except ValueError as exc:
        raise InputError(f"cannot parse complex number {text!r}") from exc


# -- report helpers ----------------------------------------------------------


def _clean(x):
    """JSON-safe, deterministic rendering: floats to 12 significant digits."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return None
        return float(f"{x:.12g}") + 0.0
    if isinstance(x, complex):
        return {"re": _clean(x.real), "im": _clean(x.imag)}
    return x


def check(value: float, bound: float, *, le=True) -> dict:
    passed = value <= bound if le else value > bound
    return {"value": value, "bound": bound, "passed": bool(passed), "rule": "value <= bound" if le else "value > bound"}


def span_digest(vectors: np.ndarray) -> str:
    """Hash of the orthogonal projector onto a span (basis independent)."""
    p = vectors @ vectors.conj().T
    p = np.round(p.real, 6) + 0.0 + 1j * (np.round(p.imag, 6) + 0.0)
    return hashlib.sha256(np.ascontiguousarray(p).tobytes()).hexdigest()[:16]


def config_echo(cfg) -> dict:
    return {s: dict(cfg[s]) for s in cfg.sections()}


# -- commands ----------------------------------------------------------------


def _symmetry(model, tol):
    rep = validate_symmetric(model, tol)
    return {"residual": rep.residual, "relative": rep.relative, "bound": tol.tol_sym, "accepted": rep.accepted}


def cmd_indices(cfg, tol, out=None) -> dict:
    """Deficiency indices, symmetry residual, and optional basis dumps."""
    model = operator_from_config(cfg)
    sym = _symmetry(model, tol)
    rep = deficiency_report(model, tol)
    paths = {"plus": None, "minus": None}
    if out is not None:
        stem = Path(out).with_suffix("")
        for key, frame in (("plus", rep.basis_plus), ("minus", rep.basis_minus)):
            if frame.size:
                p = Path(f"{stem}.n_{key}.txt")
                write_matrix(p, frame.vectors)
                paths[key] = str(p)
    return {
        "results": {
            "model": model.label,
            "n": model.n,
            "domain_dim": model.domain.size,
            "indices": [rep.d_plus, rep.d_minus],
            "symmetry": sym,
            "deficiency_orthogonality_residual": rep.residuals,
            "basis_files": paths,
            "has_self_adjoint_extension": rep.d_plus == rep.d_minus,
        },
        "checks": {"symmetry": check(sym["relative"], tol.tol_sym)},
    }


def _extension_summary(e, r, tol):
    return {
        "parameter": {"re": e.parameter.matrix.real.tolist(), "im": e.parameter.matrix.imag.tolist()},
        "domain_dim": r.domain_dim,
        "expected_dim": r.expected_dim,
        "complement_dim": r.complement_dim,
        "domain_digest": span_digest(e.domain.vectors),
        "graph_digest": span_digest(e.graph().vectors),
        "checks": {
            "symmetry": check(r.symmetry_residual, r.symmetry_bound),
            "extends_base": check(r.extends_residual, r.extends_bound),
            "dim_check": {"value": r.domain_dim, "bound": r.expected_dim, "passed": r.dim_check, "rule": "value == bound"},
            "maximality": {"value": r.min_complement_form, "bound": r.symmetry_bound,
                           "complement_dim": r.complement_dim, "passed": r.maximality,
                           "rule": "complement_dim == 0 or value > bound"},
        },
    }


def cmd_extend(cfg, tol, out=None) -> dict:
    model = operator_from_config(cfg)
    sym = _symmetry(model, tol)
    rep = deficiency_report(model, tol)
    if rep.d_plus != rep.d_minus:
        raise NoSelfAdjointExtension(
            f"deficiency indices ({rep.d_plus}, {rep.d_minus}) differ: self-adjoint extensions "
            "exist if and only if d_+(A)=d_-(A)")
    param = cfg.get("unitary", "parameter", fallback="phase:0")
    u = parse_unitary(param, rep.d_plus, cfg)
    e = build_extension(model, u, tol)
    r = verify_extension(e, tol)
    summary = _extension_summary(e, r, tol)
    return {
        "results": {"model": model.label, "indices": [rep.d_plus, rep.d_minus], "symmetry": sym,
                    "unitary": param, "extension": summary, "trivial": rep.d_plus == 0},
        "checks": summary["checks"],
    }


def cmd_sweep(cfg, tol, out=None) -> dict:
    model = operator_from_config(cfg)
    sym = _symmetry(model, tol)
    d = deficiency_report(model, tol)
    raw = cfg.get("sweep", "phases", fallback="8").strip()
    if "," in raw or "." in raw:
        thetas = [float(t) for t in raw.split(",") if t.strip()]
    else:
        k = int(raw)
        thetas = [2 * math.pi * j / k for j in range(k)]
    grid = [UnitaryParameter.phase(t, d.d_plus) for t in thetas] if d.d_plus else []
    pairs = sweep_extensions(model, grid, tol)
    entries = [_extension_summary(e, r, tol) for e, r in pairs]
    dom, gra = [], []
    for i in range(len(pairs)):
        for j in range(i + 1, len(pairs)):
            dom.append(domain_angle(pairs[i][0], pairs[j][0]))
            gra.append(graph_angle(pairs[i][0], pairs[j][0]))
    checks = {}
    for i, ent in enumerate(entries):
        failed = sum(not c["passed"] for c in ent["checks"].values())
        checks[f"phase_{i}"] = {"value": failed, "bound": 0, "passed": failed == 0, "rule": "value == bound"}
    return {
        "results": {"model": model.label, "indices": [d.d_plus, d.d_minus], "symmetry": sym,
                    "phases": thetas, "extensions": entries,
                    "min_pairwise_domain_angle": min(dom) if dom else None,
                    "min_pairwise_graph_angle": min(gra) if gra else None},
        "checks": checks,
    }


def cmd_bipartite(cfg, tol, out=None) -> dict:
    fiber = operator_from_config(cfg)
    space = space_from_config(cfg)
    sym = _symmetry(fiber, tol)
    rep = deficiency_report(fiber, tol)
    b = assemble(fiber, space, tol)
    results = {"model": fiber.label, "m": space.m, "phi": space.phi.tolist(), "mu": space.mu.tolist(),
               "fiber_indices": [rep.d_plus, rep.d_minus], "symmetry": sym}
    checks = {}
    for sign, key in ((1, "plus"), (-1, "minus")):
        direct = deficiency_direct(b, sign, tol)
        fibered = deficiency_fibered(b, sign, tol)
        angle = oracle_angle(b, sign, tol, direct=direct)
        cert = isomorphism(b, sign, tol, direct=direct)
        d_fiber = rep.d_plus if sign > 0 else rep.d_minus
        results[key] = {
            "dim_direct": direct.size,
            "fiber_dims": [f.size for f in fibered],
            "expected_dim": d_fiber * space.m,
            "oracle_angle": angle,
            "certificate": {
                "dimension": cert.dimension,
                "unitarity_residual": cert.unitarity_residual,
                "image_angle": cert.image_angle,
                "max_fiber_residual": max(cert.fiber_residuals) if cert.fiber_residuals else 0.0,
                "failures": [list(f) for f in cert.failures(UNITARY_TOL, ANGLE_TOL)],
            },
        }
        checks[f"dimension_{key}"] = {"value": direct.size, "bound": d_fiber * space.m,
                                      "passed": direct.size == d_fiber * space.m, "rule": "value == bound"}
        checks[f"oracle_{key}"] = check(angle, ANGLE_TOL)
        checks[f"unitarity_{key}"] = check(cert.unitarity_residual, UNITARY_TOL)
        checks[f"image_{key}"] = check(cert.image_angle, ANGLE_TOL)
    return {"results": results, "checks": checks}


def cmd_frames(cfg, tol, out=None, zs=None) -> dict:
    model = operator_from_config(cfg)
    sym = _symmetry(model, tol)
    if not zs:
        raw = cfg.get("frames", "z", fallback="1j")
        zs = [parse_complex(t) for t in raw.split(",") if t.strip()]
    ff = FiberFrames(model, tol)
    points = []
    checks = {}
    for k, z in enumerate(zs):
        direct = range_complement(model.shifted(z), tol)
        data = ff.at(z, basis=direct)
        angle = max_angle(data.selected, direct)
        unit = unitarity_residual(data.unitary_to_reference)
        points.append({"z": complex(z), "indices": list(data.indices), "count": len(data.indices),
                       "eta_orthonormality": data.eta.gram_residual(),
                       "span_angle_vs_direct": angle, "unitarity_residual": unit})
        checks[f"z{k}_span"] = check(angle, ANGLE_TOL)
        checks[f"z{k}_unitary"] = check(unit, 1e-10)
        checks[f"z{k}_count"] = {"value": len(data.indices), "bound": ff.d_plus,
                                 "passed": len(data.indices) == ff.d_plus, "rule": "value == bound"}
    return {"results": {"model": model.label, "d_plus": ff.d_plus, "symmetry": sym, "points": points},
            "checks": checks}


def cmd_probe(cfg, tol, out=None) -> dict:
    a = operator_from_config(cfg, "operator")
    b = operator_from_config(cfg, "operator_b")
    rep = conjecture_probe(a, b, tol)
    return {"results": {"label": "exploratory - no expected value", "a": a.label, "b": b.label,
                        "n_a": a.n, "n_b": b.n,
                        "d_ab": list(rep.d_ab), "d_a_times_n_b": list(rep.d_a_times_n_b),
                        "n_a_times_d_b": list(rep.n_a_times_d_b), "conjectured_sum": list(rep.conjectured_sum)},
            "checks": {}}


COMMANDS = {
    "indices": cmd_indices,
    "extend": cmd_extend,
    "sweep": cmd_sweep,
    "bipartite": cmd_bipartite,
    "frames": cmd_frames,
    "probe": cmd_probe,
}


def run(command: str, cfg, tol: Tolerances, out=None, zs=None) -> dict:
    """Execute a command and wrap its output in the report envelope."""
    start = time.perf_counter()
    fn = COMMANDS[command]
    body = fn(cfg, tol, out, zs) if command == "frames" else fn(cfg, tol, out)
    report = {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "command": command,
        "config": config_echo(cfg),
        "tolerances": {k: getattr(tol, k) for k in Tolerances.__dataclass_fields__},
        "results": body["results"],
        "checks": body["checks"],
        "passed": all(c.get("passed", True) for c in body["checks"].values()),
        "wall_time_s": time.perf_counter() - start,
    }
    return _clean(report)


def render(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def summarize(report: dict) -> str:
    lines = [f"{report['command']}: {'PASS' if report['passed'] else 'FAIL'}"]
    res = report["results"]
    for key in ("model", "indices", "fiber_indices", "d_plus", "d_ab", "conjectured_sum", "label"):
        if key in res:
            lines.append(f"  {key}: {res[key]}")
    for name, c in sorted(report["checks"].items()):
        mark = "ok " if c.get("passed") else "BAD"
        lines.append(f"  [{mark}] {name}: {c.get('value')} ({c.get('rule', '')} {c.get('bound', '')})".rstrip())
    return "\n".join(lines) + "\n"


class _Parser(argparse.ArgumentParser):
    # usage errors share exit code 1 with other input errors; 2 means model rejected
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="deficiency", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="INI file with [operator], [space], ... sections")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--tol-rank", type=float, default=None)
    p.add_argument("--tol-zero", type=float, default=None)
    p.add_argument("--json", action="store_true", help="print the JSON report instead of a summary")
    p.add_argument("--z", action="append", default=None, help="spectral parameter for 'frames' (repeatable; use --z=-1+2i for a leading minus)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        tol = tolerances_from(cfg, args)
        out = args.out or cfg.get("output", "path", fallback=None)
        zs = [parse_complex(z) for z in args.z] if args.z else None
        report = run(args.command, cfg, tol, out, zs)
    except DeficiencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    text = render(report)
    if out:
        try:
            Path(out).write_text(text, encoding="utf-8")
        except OSError as exc:
            print(f"error: cannot write {out}: {exc}", file=sys.stderr)
            return 1
    sys.stdout.write(text if args.json else summarize(report))
    if args.command == "bipartite" and not report["passed"]:
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())

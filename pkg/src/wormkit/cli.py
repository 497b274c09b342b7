"""Command-line front end.

Every subcommand writes a result file (CSV or JSON) and, next to it,
``<output>.manifest.json`` recording the inputs, tolerances, library version
and wall time.  Without ``--output`` the JSON document goes to stdout and no
manifest is written.

Exit codes: 0 success, 2 domain error, 3 accuracy error, 64 usage or
configuration error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import re
import sys
import time
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    TestFunctionSpec,
    TestKind,
    blowup_exponent_fit,
    decay_exponent_fit,
    lp_blowup_scan,
    lp_bounded_range,
    reproducing_residual_full,
    reproducing_residual_mode,
    rotation_invariance_residual,
    singularity_scan,
    stroboscopic_sequence,
    SCAN_MODE_CAP,
    _check_fit,
    fit_exponent,
)
from .domains import (
    DomainParams,
    EtaProfile,
    PointC2,
    Variant,
    domain_quadrature_grid,
    rho,
    sample_annulus,
    sample_boundary,
    tangential_levi_form,
)
from .errors import AccuracyError, ConfigurationError, DomainError
from .kernel import h_j, kernel_prime, kernel_unprime
from .modes import WeightProfile, lambda_hat, lambda_weight
from .parallel import ordered_map, thread_count
from .potential import ExhaustionQuery, exhaustion_feasibility, ode_positivity_check
from .quad import QuadConfig

__all__ = ["main", "run", "parse_real", "parse_complex", "format_complex", "read_output", "load_schema"]

EXIT_OK, EXIT_DOMAIN, EXIT_ACCURACY, EXIT_USAGE = 0, 2, 3, 64
SCHEMA_VERSION = "1"
CSV_SCHEMA = "wormkit-csv/1"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


# ---------------------------------------------------------------- literals

_PI_RE = re.compile(
    r"^\s*(?:(?P<num>[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)\s*\*?\s*)?"
    r"(?P<neg>-)?pi\s*(?:/\s*(?P<den>\d+(?:\.\d*)?))?\s*$"
)


def parse_real(text: str) -> float:
    """Decimal or ``k*pi`` literal: ``4.712``, ``pi``, ``1.5*pi``, ``3*pi/2``, ``pi/4``."""
    t = str(text).strip().lower()
    m = _PI_RE.match(t)
    if m:
        k = Fraction(m.group("num")) if m.group("num") else Fraction(1)
        if m.group("neg"):
            k = -k
        if m.group("den"):
            k /= Fraction(m.group("den"))
        return float(k) * math.pi
    try:
        return float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a real number or k*pi literal: {text!r}") from None


def parse_complex(text: str) -> complex:
    """``a+bi`` text (``i`` or ``j``); ``2i``, ``-1.5``, ``1e-3-2i`` all work."""
    t = str(text).strip().replace(" ", "")
    if t.endswith("i"):
        t = t[:-1] + "j"
    try:
        return complex(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def parse_point(text: str) -> PointC2:
    parts = str(text).split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'z1,z2', got {text!r}")
    return PointC2(parse_complex(parts[0]), parse_complex(parts[1]))


def format_complex(z: complex) -> str:
    z = complex(z)
    sign = "-" if math.copysign(1.0, z.imag) < 0 else "+"
    return f"{z.real!r}{sign}{abs(z.imag)!r}i"


# ---------------------------------------------------------------- output


def _jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, (complex, np.complexfloating)):
        return {"re": _jsonable(v.real), "im": _jsonable(v.imag)}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if v is None or isinstance(v, str):
        return v
    return str(v)


def _csv_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (complex, np.complexfloating)):
        return format_complex(v)
    if isinstance(v, (list, tuple)):
        return ";".join(_csv_cell(x) for x in v)
    return "" if v is None else str(v)


_INT_RE = re.compile(r"^[+-]?\d+$")


def _parse_cell(s: str):
    if ";" in s:
        return [_parse_cell(x) for x in s.split(";")]
    if s == "":
        return None
    if s in ("true", "false"):
        return s == "true"
    if _INT_RE.match(s):
        return int(s)
    try:
        return float(s)
    except ValueError:
        pass
    if s.endswith("i"):
        try:
            return parse_complex(s)
        except argparse.ArgumentTypeError:
            pass
    return s


def _from_json(v):
    if isinstance(v, dict):
        if set(v) == {"re", "im"}:
            return complex(v["re"], v["im"])
        return {k: _from_json(x) for k, x in v.items()}
    if isinstance(v, list):
        return [_from_json(x) for x in v]
    return v


def load_schema(name: str = "output") -> dict:
    text = resources.files("wormkit").joinpath("schema", f"{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def _validate(doc: dict, name: str):
    import jsonschema

    jsonschema.validate(doc, load_schema(name))


def _columns(rows, summary):
    src = rows if rows else [summary]
    cols: list[str] = []
    for r in src:
        for k in r:
            if k not in cols:
                cols.append(k)
    return cols


def render(command: str, summary: dict, rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        doc = {"schema_version": SCHEMA_VERSION, "command": command, "summary": _jsonable(summary), "rows": _jsonable(rows)}
        _validate(doc, "output")
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"
    cols = _columns(rows, summary)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(cols)
    for r in rows if rows else [summary]:
        w.writerow([_csv_cell(r.get(c)) for c in cols])
    return buf.getvalue()


def read_output(path) -> tuple[dict, list[dict]]:
    """Parse a CSV or JSON result file back into ``(summary, rows)``.

    For CSV the summary is empty unless the file is a one-row summary table,
    in which case that row is returned as the summary as well.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        doc = json.loads(text)
        return _from_json(doc["summary"]), _from_json(doc["rows"])
    reader = csv.reader(io.StringIO(text, newline=""))
    cols = next(reader)
    rows = [{c: _parse_cell(v) for c, v in zip(cols, line)} for line in reader]
    return {}, rows


# ---------------------------------------------------------------- commands


def _params(args, variant=Variant.DBetaPrime) -> DomainParams:
    return DomainParams(args.beta, variant)


def _cmd_kernel_eval(args, cfg):
    if args.domain == "prime":
        kv = kernel_prime(_params(args), args.z, args.w, cfg)
    else:
        kv = kernel_unprime(_params(args, Variant.DBeta), args.z, args.w, cfg)
    return {"value": kv.value, "err_estimate": kv.err_estimate, "modes_used": list(kv.modes_used)}, []


def _cmd_mode_kernel(args, cfg):
    P = _params(args)
    xs = np.linspace(args.x_min, args.x_max, args.n)
    rows = []
    for x in xs:
        kv = h_j(P, args.j, complex(x, args.y), args.w1, cfg)
        rows.append({"x": float(x), "value": kv.value, "abs": abs(kv.value), "err_estimate": kv.err_estimate})
    return {"j": args.j, "w1": args.w1, "y": args.y}, rows


def _cmd_weight(args, cfg):
    w = WeightProfile(args.beta, args.j)
    xs = np.linspace(args.x_min, args.x_max, args.n)
    if args.kind == "lambda":
        vals = np.atleast_1d(lambda_weight(w, xs))
        rows = [{"y": float(x), "lambda": float(v)} for x, v in zip(xs, vals)]
    else:
        vals = np.atleast_1d(lambda_hat(w, xs))
        rows = [{"xi": float(x), "lambda_hat": float(v)} for x, v in zip(xs, vals)]
    return {"j": args.j, "kind": args.kind}, rows


def _cmd_repro(args, cfg):
    P = _params(args)
    f = TestFunctionSpec(TestKind.GaussianMode, args.j, args.delta, args.center)
    if args.kind == "mode":
        res = reproducing_residual_mode(P, args.j, f, args.z.z1, cfg)
    else:
        res = reproducing_residual_full(P, f, args.z, cfg)
    return {"kind": args.kind, "j": args.j, "delta": args.delta, "residual": res}, []


def _cmd_lp_range(args, cfg):
    r = lp_bounded_range(_params(args))
    return {"nu": _params(args).nu, "p_min": r.p_min, "p_max": r.p_max}, []


def _cmd_lp_scan(args, cfg):
    P = _params(args, Variant.DBeta)
    if args.mode_cap is None:
        cfg = cfg.replace(mode_cap=SCAN_MODE_CAP)
    rows = []
    for p in args.p:
        v = lp_blowup_scan(P, p, args.zeta, None, cfg, regime=args.regime, steps=args.steps)
        rows.append({
            "p": v.p,
            "verdict": v.verdict.value,
            "increment_exponent": v.increment_exponent,
            "partial_integrals": list(v.partial_integrals),
        })
    return {"regime": args.regime, "zeta": [args.zeta.z1, args.zeta.z2]}, rows


def _cmd_decay_fit(args, cfg):
    P = _params(args)
    if args.points < 8:
        raise ConfigurationError("decay fits use at least 8 points")
    xs = np.linspace(args.x_min, args.x_max, args.points)
    vals = ordered_map(lambda x: h_j(P, args.j, complex(x), 0j, cfg).value, xs)
    fit = _check_fit(fit_exponent(xs, vals, (args.x_min, args.x_max)))
    rows = [{"x": float(x), "log_abs_h": float(np.log(abs(v)))} for x, v in zip(xs, vals)]
    return {"slope": fit.slope, "stderr": fit.stderr, "points": fit.points, "expected": -P.nu}, rows


def _cmd_blowup_fit(args, cfg):
    P = _params(args, Variant.DBeta)
    t = stroboscopic_sequence(args.l0, args.n)
    fit = blowup_exponent_fit(P, args.zeta, t, cfg, args.omega2, args.phi)
    table = singularity_scan(P, args.zeta, args.omega2, t, cfg) if args.phi == 0 else None
    rows = []
    if table is not None:
        rows = [{"log_t": float(np.log(a)), "log_abs_k": float(np.log(b))} for a, b, _ in table]
    return {"slope": fit.slope, "stderr": fit.stderr, "points": fit.points, "expected": P.nu - 1.0}, rows


def _cmd_rotation(args, cfg):
    P = _params(args)
    rows = []
    for th in args.theta:
        res, err = rotation_invariance_residual(P, args.z, args.w, th, cfg, with_error=True)
        rows.append({"theta": th, "residual": res, "err_estimate": err, "ok": bool(res <= err)})
    return {}, rows


def _cmd_singularity(args, cfg):
    P = _params(args, Variant.DBeta)
    t = np.geomspace(args.t_max, args.t_min, args.n)
    table = singularity_scan(P, args.zeta, args.omega2, t, cfg)
    rows = [{"t": a, "abs_k": b, "err_estimate": c} for a, b, c in table]
    mags = [r["abs_k"] for r in rows]
    return {"monotone": bool(np.all(np.diff(mags) > 0))}, rows


def _cmd_levi(args, cfg):
    eta = EtaProfile.default(args.beta, args.cap)
    rng = np.random.default_rng(args.seed)
    rows = []
    for kind, pts in (("annulus", sample_annulus(eta.mu, args.n, rng)), ("boundary", sample_boundary(eta, args.n, rng, exclude_annulus=True))):
        lev = np.atleast_1d(tangential_levi_form(eta, pts))
        r = np.atleast_1d(rho(eta, pts))
        for z1, z2, rr, lv in zip(np.atleast_1d(pts.z1), np.atleast_1d(pts.z2), r, lev):
            cls = "weakly-pseudoconvex" if abs(lv) < 1e-12 else ("strongly-pseudoconvex" if lv > 0 else "not-pseudoconvex")
            rows.append({"sample": kind, "z1": complex(z1), "z2": complex(z2), "rho": float(rr), "levi": float(lv), "class": cls})
    return {"mu": eta.mu, "a": eta.a}, rows


def _cmd_exhaustion(args, cfg):
    v = exhaustion_feasibility(ExhaustionQuery(args.mu, args.delta))
    out = {"verdict": "feasible" if v.feasible else "infeasible", "margin": v.margin, "witness_k": None, "witness_ok": None}
    if v.witness is not None:
        out["witness_k"] = v.witness.k
        out["witness_ok"] = ode_positivity_check(args.delta, args.mu, v.witness, 1000)
    return out, []


def _cmd_grid_dump(args, cfg):
    P = _params(args, Variant(args.variant))
    g = domain_quadrature_grid(P, cfg, args.refinement)
    rows = []
    for axis, nodes, weights in (("x", g.x, g.wx), ("y", g.y, g.wy), ("theta", g.theta, g.wtheta)):
        rows += [{"axis": axis, "index": i, "parent": -1, "node": float(a), "weight": float(b)} for i, (a, b) in enumerate(zip(nodes, weights))]
    for iy in range(g.y.size):
        rows += [{"axis": "s", "index": k, "parent": iy, "node": float(a), "weight": float(b)} for k, (a, b) in enumerate(zip(g.s[iy], g.ws[iy]))]
    return {"shape": list(g.shape), "total_weight": g.total_weight()}, rows


COMMANDS = {
    "kernel-eval": _cmd_kernel_eval,
    "mode-kernel": _cmd_mode_kernel,
    "weight": _cmd_weight,
    "repro-test": _cmd_repro,
    "lp-range": _cmd_lp_range,
    "lp-scan": _cmd_lp_scan,
    "decay-fit": _cmd_decay_fit,
    "blowup-fit": _cmd_blowup_fit,
    "rotation-check": _cmd_rotation,
    "singularity-scan": _cmd_singularity,
    "levi": _cmd_levi,
    "exhaustion": _cmd_exhaustion,
    "grid-dump": _cmd_grid_dump,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--output", "-o", help="result file; a manifest is written next to it")
    common.add_argument("--format", choices=["csv", "json"], help="default: from the output suffix, else json")
    common.add_argument("--seed", type=int, default=0)
    q = common.add_argument_group("quadrature")
    q.add_argument("--rel-tol", type=float)
    q.add_argument("--abs-tol", type=float)
    q.add_argument("--panel-order", type=int)
    q.add_argument("--mode-cap", type=int)
    q.add_argument("--domain-truncation", type=float)
    q.add_argument("--theta-nodes", type=int)

    beta = _Parser(add_help=False)
    beta.add_argument("--beta", type=parse_real, required=True, help="radians or k*pi literal")

    p = _Parser(prog="wormkit", description="Bergman kernels and geometry of worm domains")
    p.add_argument("--version", action="version", version=f"wormkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("kernel-eval", parents=[common, beta], help="full kernel at one pair of points")
    s.add_argument("--z", type=parse_point, required=True, help="'z1,z2'")
    s.add_argument("--w", type=parse_point, required=True, help="'w1,w2'")
    s.add_argument("--domain", choices=["prime", "unprime"], default="prime")

    s = sub.add_parser("mode-kernel", parents=[common, beta], help="H_j along a horizontal line")
    s.add_argument("--j", type=int, default=-1)
    s.add_argument("--w1", type=parse_complex, default=0j)
    s.add_argument("--y", type=float, default=0.0, help="Im z1 of the line")
    s.add_argument("--x-min", type=float, default=0.0)
    s.add_argument("--x-max", type=float, default=10.0)
    s.add_argument("--n", type=int, default=21)

    s = sub.add_parser("weight", parents=[common, beta], help="lambda_j or its transform on a grid")
    s.add_argument("--j", type=int, default=-1)
    s.add_argument("--kind", choices=["lambda", "lambda-hat"], default="lambda")
    s.add_argument("--x-min", type=float, default=-5.0)
    s.add_argument("--x-max", type=float, default=5.0)
    s.add_argument("--n", type=int, default=101)

    s = sub.add_parser("repro-test", parents=[common, beta], help="reproducing-property residual")
    s.add_argument("--kind", choices=["mode", "full"], default="mode")
    s.add_argument("--j", type=int, default=-1)
    s.add_argument("--delta", type=float, default=0.1)
    s.add_argument("--center", type=parse_complex, default=0j)
    s.add_argument("--z", type=parse_point, default=PointC2(0.2 + 0.1j, 1.1), help="'z1,z2'")

    sub.add_parser("lp-range", parents=[common, beta], help="bounded L^p range")

    s = sub.add_parser("lp-scan", parents=[common, beta], help="L^p trend scan of K(., zeta)")
    s.add_argument("--p", type=float, nargs="+", required=True)
    s.add_argument("--zeta", type=parse_point, default=PointC2(complex(np.exp(-2j)), complex(np.exp(-1.25))))
    s.add_argument("--regime", choices=["inner", "outer"], default="inner")
    s.add_argument("--steps", type=int, default=5)

    s = sub.add_parser("decay-fit", parents=[common, beta], help="decay exponent of H_j along the strip")
    s.add_argument("--j", type=int, default=-1)
    s.add_argument("--x-min", type=float, default=10.0)
    s.add_argument("--x-max", type=float, default=30.0)
    s.add_argument("--points", type=int, default=11)

    s = sub.add_parser("blowup-fit", parents=[common, beta], help="|omega1| exponent of K on D_beta")
    s.add_argument("--zeta", type=parse_point, default=PointC2(1.0, 1.0))
    s.add_argument("--omega2", type=parse_complex, default=1.0 + 0j)
    s.add_argument("--phi", type=float, default=0.0)
    s.add_argument("--l0", type=float, default=-8.0 - 4.0 * math.pi)
    s.add_argument("--n", type=int, default=5)

    s = sub.add_parser("rotation-check", parents=[common, beta], help="z2-rotation invariance")
    s.add_argument("--z", type=parse_point, default=PointC2(0.2 + 0.1j, 1.1))
    s.add_argument("--w", type=parse_point, default=PointC2(-0.3 + 0.4j, 0.9))
    s.add_argument("--theta", type=parse_real, nargs="+", default=[0.0, math.pi / 3])

    s = sub.add_parser("singularity-scan", parents=[common, beta], help="|K| along omega = (t, omega2)")
    s.add_argument("--zeta", type=parse_point, default=PointC2(1.0, 1.0))
    s.add_argument("--omega2", type=parse_complex, default=1.0 + 0j)
    s.add_argument("--t-min", type=float, default=1e-3)
    s.add_argument("--t-max", type=float, default=1e-1)
    s.add_argument("--n", type=int, default=21)

    s = sub.add_parser("levi", parents=[common, beta], help="boundary classification of the smooth worm")
    s.add_argument("--cap", type=float, default=1.0, help="a - mu for the cap profile")
    s.add_argument("--n", type=int, default=20)

    s = sub.add_parser("exhaustion", parents=[common], help="exhaustion-exponent feasibility")
    s.add_argument("--mu", type=parse_real, required=True)
    s.add_argument("--delta", type=float, required=True)

    s = sub.add_parser("grid-dump", parents=[common, beta], help="volume quadrature rules")
    s.add_argument("--variant", choices=["dbeta", "dbeta-prime"], default="dbeta-prime")
    s.add_argument("--refinement", type=float, default=1.0)
    return p


def _quad_config(args) -> QuadConfig:
    changes = {"seed": args.seed}
    for name in ("rel_tol", "abs_tol", "panel_order", "mode_cap", "domain_truncation", "theta_nodes"):
        v = getattr(args, name, None)
        if v is not None:
            changes[name] = v
    return QuadConfig(**changes)


def _inputs(args) -> dict:
    skip = {"output", "format", "seed", "command", "rel_tol", "abs_tol", "panel_order", "mode_cap", "domain_truncation", "theta_nodes"}
    out = {}
    for k, v in vars(args).items():
        if k in skip:
            continue
        if isinstance(v, PointC2):
            v = [complex(v.z1), complex(v.z2)]
        out[k] = v
    return _jsonable(out)


def run(argv=None, stdout=None) -> int:
    """Parse ``argv``, run the subcommand, write outputs; return the exit code."""
    stdout = stdout or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    t0 = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        cfg = _quad_config(args)
        threads = thread_count()
        summary, rows = COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except AccuracyError as exc:
        print(f"accuracy error: {exc}", file=sys.stderr)
        return EXIT_ACCURACY

    fmt = args.format
    if fmt is None:
        fmt = "csv" if args.output and args.output.lower().endswith(".csv") else "json"
    text = render(args.command, summary, rows, fmt)
    if not args.output:
        stdout.write(text)
        return EXIT_OK
    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8", newline="")
    manifest = {
        "tool": "wormkit",
        "version": __version__,
        "command": args.command,
        "argv": argv,
        "inputs": _inputs(args),
        "quad": _jsonable(dataclasses.asdict(cfg)),
        "seed": args.seed,
        "format": fmt,
        "output": out.name,
        "csv_schema": CSV_SCHEMA,
        "columns": _columns(rows, summary),
        "summary": _jsonable(summary),
        "threads": threads,
        "wall_time_s": time.perf_counter() - t0,
    }
    _validate(manifest, "manifest")
    Path(str(out) + ".manifest.json").write_text(json.dumps(manifest, indent=2, allow_nan=False) + "\n", encoding="utf-8")
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":  # pragma: no cover
    main()

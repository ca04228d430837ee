"""Command-line interface: ``quarter-green COMMAND --spec walk.json [options]``."""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .asymptotics import constant_C, green_asymptotic
from .exceptions import QuarterGreenError
from .green_integral import RayContour, green_values
from .martin import DEFAULT_RADII, DEFAULT_SLOPES, martin_limit_diagnostic, target_on_ray
from .oracle import TruncationConfig, absorption_from_grid, green_truncated
from .uniformization import uniformize
from .walk_model import (
    CubicFamilyParams,
    harmonicity_residual,
    infer_cubic_family,
    kernel_from_cubic_family,
    load_walk_spec,
    validate_kernel,
)

HEADER = "# quarter-green v1"


@dataclass
class RunConfig:
    command: str
    spec: str | None
    out: str | None
    format: str
    threads: int
    seed: int
    options: dict = field(default_factory=dict)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return f"{v:.17g}"
    return str(v)


def to_json(obj) -> str:
    """JSON with every float written to 17 significant digits; infinity becomes the string ``"inf"``."""
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    if isinstance(obj, (complex, np.complexfloating)):
        return to_json([obj.real, obj.imag])
    if isinstance(obj, (float, np.floating)) and not math.isfinite(obj):
        return json.dumps(_fmt(obj))
    if isinstance(obj, (bool, np.bool_, int, np.integer, float, np.floating)) or obj is None:
        return "null" if obj is None else _fmt(obj)
    return json.dumps(str(obj))


def _emit(cfg: RunConfig, columns: list[str], rows: list[dict], extra: dict | None = None) -> str:
    config = {k: v for k, v in asdict(cfg).items()}
    if cfg.format == "json":
        payload = {"format": HEADER[2:], "config": config, "rows": rows}
        if extra:
            payload.update(extra)
        return to_json(payload) + "\n"
    buf = io.StringIO()
    buf.write(HEADER + "\n")
    buf.write("# config: " + to_json(config) + "\n")
    for key, value in (extra or {}).items():
        buf.write(f"# {key}: {to_json(value)}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(row.get(c)) for c in columns) + "\n")
    return buf.getvalue()


def _load(cfg: RunConfig):
    if not cfg.spec:
        raise ValueError("--spec is required for this command")
    return load_walk_spec(cfg.spec)


def _targets(text: str) -> list[tuple[int, int]]:
    out = []
    for chunk in text.replace(";", " ").split():
        i, j = chunk.split(",")
        out.append((int(i), int(j)))
    return sorted(set(out))


def cmd_validate(cfg: RunConfig) -> tuple[str, int]:
    kernel, _ = _load(cfg)
    report = validate_kernel(kernel)
    extra = report.to_dict()
    try:
        alpha, beta = infer_cubic_family(kernel)
        extra.update(alpha=alpha, beta=beta, harmonicity_residual=harmonicity_residual(kernel, alpha, beta))
    except QuarterGreenError as exc:
        extra.update(alpha=None, beta=None, harmonicity_residual=None, cubic=str(exc))
    rows = [{"invariant": n, "magnitude": m, "severity": "violation"} for n, m in report.violations]
    rows += [{"invariant": n, "magnitude": m, "severity": "warning"} for n, m in report.warnings]
    return _emit(cfg, ["invariant", "magnitude", "severity"], rows, {"summary": extra}), 0 if report.ok else 1


def cmd_uniformize(cfg: RunConfig) -> tuple[str, int]:
    kernel, _ = _load(cfg)
    u = uniformize(kernel)
    data = u.as_dict()
    if cfg.format == "json":
        return to_json({"format": HEADER[2:], "config": asdict(cfg), "uniformization": data}) + "\n", 0
    rows = []
    for name in ("z0", "z1", "z2", "z3", "K"):
        re, im = data[name]
        rows.append({"name": name, "real": re, "imag": im})
    for name in ("omega_x", "omega_y"):
        rows.append({"name": name, "real": data[name], "imag": 0.0})
    for name, v in data["branch_points"].items():
        rows.append({"name": name, "real": v, "imag": 0.0})
    return _emit(cfg, ["name", "real", "imag"], rows), 0


def cmd_green(cfg: RunConfig) -> tuple[str, int]:
    kernel, _ = _load(cfg)
    o = cfg.options
    i0, j0 = o["start"]
    targets = _targets(o["targets"]) if o.get("targets") else [
        (i, j) for i in range(1, o["max_index"] + 1) for j in range(1, o["max_index"] + 1)
    ]
    ests = green_values(kernel, None, i0, j0, targets, RayContour(theta=o.get("theta")), threads=cfg.threads)
    rows = [{"i": i, "j": j, **e.as_row(), "theta": e.meta["theta"]} for (i, j), e in zip(targets, ests)]
    return _emit(cfg, ["i", "j", "value", "abs_error", "method", "theta"], rows), 0


def cmd_oracle(cfg: RunConfig) -> tuple[str, int]:
    kernel, _ = _load(cfg)
    o = cfg.options
    i0, j0 = o["start"]
    tc = TruncationConfig(N=o["N"], extrapolate=o["extrapolate"])
    grid = green_truncated(kernel, i0, j0, tc)
    ab = absorption_from_grid(kernel, grid)
    m = min(o["max_index"], tc.N)
    rows = []
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            est = grid.estimate(i, j)
            rows.append({"kind": "green", "i": i, "j": j, "value": est.value, "abs_error": est.abs_error})
    for i in range(1, m + 1):
        rows.append({"kind": "absorption_horizontal", "i": i, "j": 0, "value": ab.horizontal[i - 1]})
    for j in range(1, m + 1):
        rows.append({"kind": "absorption_vertical", "i": 0, "j": j, "value": ab.vertical[j - 1]})
    rows.append({"kind": "absorption_corner", "i": 0, "j": 0, "value": ab.corner})
    return _emit(cfg, ["kind", "i", "j", "value", "abs_error"], rows, {"absorbed_mass": ab.total}), 0


def _family_model(kernel):
    alpha, beta = infer_cubic_family(kernel)
    u = uniformize(kernel)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        model = constant_C(kernel, u, alpha, beta, validate=False)
    return u, model


def cmd_asymptotic(cfg: RunConfig) -> tuple[str, int]:
    kernel, _ = _load(cfg)
    o = cfg.options
    i0, j0 = o["start"]
    u, model = _family_model(kernel)
    cells = [(s, r, *target_on_ray(s, r)) for s in o["directions"] for r in o["radii"]]
    exact = green_values(kernel, u, i0, j0, [(i, j) for _, _, i, j in cells], threads=cfg.threads)
    rows = []
    for (s, r, i, j), e in zip(cells, exact):
        a = green_asymptotic(model, i0, j0, i, j)
        rows.append({"direction": s, "radius": r, "i": i, "j": j, "exact": e.value,
                     "asymptotic": a, "ratio": e.value / a})
    return _emit(cfg, ["direction", "radius", "i", "j", "exact", "asymptotic", "ratio"], rows,
                 {"C": model.C}), 0


def cmd_martin(cfg: RunConfig) -> tuple[str, int]:
    kernel, _ = _load(cfg)
    o = cfg.options
    alpha, beta = infer_cubic_family(kernel)
    diag = martin_limit_diagnostic(kernel, None, alpha, beta, *o["start"], ref=tuple(o["ref"]),
                                   directions=o["directions"], radii=o["radii"])
    return _emit(cfg, ["direction", "radius", "kernel", "prediction", "deviation"], list(diag.rows()),
                 {"max_deviation_per_radius": diag.deviations}), 0


def cmd_sweep(cfg: RunConfig) -> tuple[str, int]:
    o = cfg.options
    if o.get("samples"):
        rng = np.random.default_rng(cfg.seed)
        points = [tuple(rng.uniform(lo, hi) for lo, hi in (o["alpha"][:2], o["beta"][:2], o["p11"][:2], o["p10"][:2]))
                  for _ in range(o["samples"])]
    else:
        axes = [np.linspace(*r[:2], int(r[2])) for r in (o["alpha"], o["beta"], o["p11"], o["p10"])]
        points = [tuple(map(float, p)) for p in np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, 4)]
    rows = []
    for al, be, p11, p10 in points:
        row = {"alpha": al, "beta": be, "p11": p11, "p10": p10, "feasible": False}
        try:
            kernel = kernel_from_cubic_family(CubicFamilyParams(al, be, p11, p10))
            u, model = _family_model(kernel)
            row.update(feasible=True, C=model.C, omega_x=u.omega_x, K_real=u.K.real, K_imag=u.K.imag)
        except QuarterGreenError:
            pass
        rows.append(row)
    return _emit(cfg, ["alpha", "beta", "p11", "p10", "feasible", "C", "omega_x", "K_real", "K_imag"], rows), 0


COMMANDS = {
    "validate": cmd_validate,
    "uniformize": cmd_uniformize,
    "green": cmd_green,
    "oracle": cmd_oracle,
    "asymptotic": cmd_asymptotic,
    "martin": cmd_martin,
    "sweep": cmd_sweep,
}


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.replace(",", " ").split()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", help="walk-spec JSON file")
    common.add_argument("--out", help="output file (default: standard output)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--seed", type=int, default=0)

    parser = argparse.ArgumentParser(prog="quarter-green", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check kernel invariants and harmonicity")
    sub.add_parser("uniformize", parents=[common], help="constants of the curve parametrization")

    def with_start(p):
        p.add_argument("--start", type=int, nargs=2, default=(1, 1), metavar=("I0", "J0"))
        return p

    g = with_start(sub.add_parser("green", parents=[common], help="Green functions by contour integration"))
    g.add_argument("--targets", help='target points, e.g. "1,1;3,2"')
    g.add_argument("--max-index", type=int, default=10, help="square grid of targets when --targets is absent")
    g.add_argument("--theta", type=float, help="ray direction in radians")

    o = with_start(sub.add_parser("oracle", parents=[common], help="truncated-lattice Green functions"))
    o.add_argument("--N", type=int, default=300, help="box side")
    o.add_argument("--extrapolate", action="store_true", help="also solve at 2N and report the change")
    o.add_argument("--max-index", type=int, default=20, help="largest index written out")

    a = with_start(sub.add_parser("asymptotic", parents=[common], help="exact against asymptotic values"))
    a.add_argument("--directions", type=_floats, default=list(DEFAULT_SLOPES), help='slopes j/i, "inf" allowed')
    a.add_argument("--radii", type=_ints, default=list(DEFAULT_RADII))

    m = with_start(sub.add_parser("martin", parents=[common], help="Martin kernels over directions and radii"))
    m.set_defaults(start=(2, 3))
    m.add_argument("--ref", type=int, nargs=2, default=(1, 1))
    m.add_argument("--directions", type=_floats, default=list(DEFAULT_SLOPES))
    m.add_argument("--radii", type=_ints, default=list(DEFAULT_RADII))

    s = sub.add_parser("sweep", parents=[common], help="scan the cubic family parameters")
    s.add_argument("--alpha", type=_floats, default=[0.5, 2.0, 4], help='"lo hi count"')
    s.add_argument("--beta", type=_floats, default=[-1.0, 1.0, 3])
    s.add_argument("--p11", type=_floats, default=[0.0, 0.3, 4])
    s.add_argument("--p10", type=_floats, default=[0.0, 0.5, 6])
    s.add_argument("--samples", type=int, default=0, help="random points (uses --seed) instead of a grid")
    return parser


def resolve(argv=None) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    base = {k: ns.pop(k) for k in ("command", "spec", "out", "format", "threads", "seed")}
    for key in ("start", "ref"):
        if key in ns:
            ns[key] = list(ns[key])
    return RunConfig(**base, options=ns)


def main(argv=None) -> int:
    cfg = resolve(argv)
    try:
        text, code = COMMANDS[cfg.command](cfg)
    except (QuarterGreenError, ValueError, KeyError, OSError) as exc:
        err = exc.to_dict() if isinstance(exc, QuarterGreenError) else {
            "error": type(exc).__name__, "message": str(exc)}
        sys.stderr.write(to_json(err) + "\n")
        return 1
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

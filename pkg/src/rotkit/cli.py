"""Command-line front end: config ingestion, experiment dispatch, result
emission.

Configs are JSON documents (exact decimal round-trip for numbers); every
command writes one flat result row per computation to CSV (or JSON
lines) with a versioned schema header.  Identical config + seed produce
byte-identical files.  Exit codes: 0 success, 2 validation error, 3
numerical divergence / resonance, 4 work budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import fourier
from ._rng import derive_seed
from .diophantine import certify, resonance_screen, suggest_quadratic_irrational
from .dynamics import (
    TWO_PI,
    BernoulliShift,
    CircleLift,
    TorusRotation,
    lift_from_series,
    make_arnold_family,
    make_conjugated_rotation,
    make_skew_sine,
)
from .errors import (
    BudgetExceededError,
    DivergenceError,
    EvaluationError,
    InversionError,
    IterationError,
    ResonanceError,
    RotkitError,
    UnsolvableError,
    ValidationError,
)
from .kam import (
    KamConfig,
    TorusMap,
    conjugate_skew_product,
    match_rotation_parameter,
    run_kam,
)
from .rotation import (
    deterministic_enclosure,
    estimate_iid_composition,
    estimate_map,
    estimate_ode,
    estimate_planar_homogeneous,
    make_cosine_field,
    predicted_iid_rotation,
)

SCHEMA_VERSION = "rotkit-csv v1"
COLUMNS = [
    "command",
    "label",
    "x1_name",
    "x1",
    "x2_name",
    "x2",
    "value",
    "n_or_T",
    "lo",
    "hi",
    "convention",
    "sample_sd",
    "status",
    "checkpoints",
]

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_BUDGET = 4

_NUMERICAL_ERRORS = (
    ResonanceError,
    DivergenceError,
    UnsolvableError,
    InversionError,
    IterationError,
    EvaluationError,
)


# -- config plumbing -------------------------------------------------------------


class _Cfg:
    """Path-tracking view over a parsed config; errors name the field."""

    def __init__(self, data, path="config"):
        self.data = data
        self.path = path

    def child(self, key):
        return _Cfg(self.data[key], f"{self.path}.{key}")

    def require(self, key, kind=None):
        if not isinstance(self.data, dict) or key not in self.data:
            raise ValidationError(f"{self.path}.{key}: missing required field")
        val = self.data[key]
        return self._checked(key, val, kind)

    def optional(self, key, default=None, kind=None):
        if not isinstance(self.data, dict) or key not in self.data:
            return default
        return self._checked(key, self.data[key], kind)

    def _checked(self, key, val, kind):
        where = f"{self.path}.{key}"
        if kind == "number":
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ValidationError(f"{where}: expected a number, got {val!r}")
            return float(val)
        if kind == "int":
            if isinstance(val, bool) or not isinstance(val, int):
                raise ValidationError(f"{where}: expected an integer, got {val!r}")
            return val
        if kind == "posint":
            if isinstance(val, bool) or not isinstance(val, int) or val <= 0:
                raise ValidationError(f"{where}: expected a positive integer, got {val!r}")
            return val
        if kind == "str":
            if not isinstance(val, str):
                raise ValidationError(f"{where}: expected a string, got {val!r}")
            return val
        if kind == "list":
            if not isinstance(val, list):
                raise ValidationError(f"{where}: expected a list, got {val!r}")
            return val
        if kind == "numlist":
            if not isinstance(val, list) or not val or any(
                isinstance(v, bool) or not isinstance(v, (int, float)) for v in val
            ):
                raise ValidationError(f"{where}: expected a non-empty number list")
            return [float(v) for v in val]
        if kind == "dict":
            if not isinstance(val, dict):
                raise ValidationError(f"{where}: expected an object, got {val!r}")
            return val
        return val


def _load_config(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"config: cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError("config: top level must be an object")
    return data


def _resolve_rho(value, where: str) -> float:
    """Rho spec: a number, or a catalog name like 'golden' / 'silver'."""
    names = {"golden": 0, "silver": 1}
    if isinstance(value, str):
        if value not in names:
            raise ValidationError(f"{where}: unknown frequency name {value!r}")
        return suggest_quadratic_irrational(names[value])
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{where}: expected a number or catalog name")
    return float(value)


def build_lift(spec: _Cfg) -> CircleLift:
    """Lift from a config map spec: builtin family or explicit series."""
    if "family" in spec.data:
        family = spec.require("family", "str")
        if family == "rotation":
            return CircleLift(_resolve_rho(spec.require("rho"), f"{spec.path}.rho"), None)
        if family == "arnold":
            return make_arnold_family(
                spec.require("Omega", "number"), spec.require("eps", "number")
            )
        if family == "conjugated_rotation":
            return make_conjugated_rotation(
                _resolve_rho(spec.require("rho"), f"{spec.path}.rho"),
                spec.optional("conj_amplitude", 0.3, "number"),
            )
        raise ValidationError(f"{spec.path}.family: unknown family {family!r}")
    rho0 = spec.require("rho0", "number")
    series = fourier.from_flat(spec.require("displacement", "numlist"))
    return lift_from_series(rho0, series)


def build_driver(spec: _Cfg | None, seed: int):
    if spec is None or spec.data is None:
        return None
    kind = spec.require("type", "str")
    if kind == "none":
        return None
    if kind == "torus_rotation":
        alpha = spec.require("alpha", "numlist")
        omega0 = spec.optional("omega0", None, "numlist")
        return TorusRotation(tuple(alpha), tuple(omega0) if omega0 else None)
    if kind == "bernoulli":
        probs = spec.require("probs", "numlist")
        if seed is None:
            raise ValidationError(f"{spec.path}: stochastic driver requires a seed")
        return BernoulliShift(tuple(probs), seed)
    raise ValidationError(f"{spec.path}.type: unknown driver type {kind!r}")


# -- result emission -------------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _row(command, label="", x1_name="", x1=None, x2_name="", x2=None, value=None,
         n_or_T=None, lo=None, hi=None, convention="", sample_sd=None,
         status="ok", checkpoints=None) -> dict:
    return {
        "command": command,
        "label": label,
        "x1_name": x1_name,
        "x1": x1,
        "x2_name": x2_name,
        "x2": x2,
        "value": value,
        "n_or_T": n_or_T,
        "lo": lo,
        "hi": hi,
        "convention": convention,
        "sample_sd": sample_sd,
        "status": status,
        "checkpoints": checkpoints or "",
    }


def _estimate_row(command, est, label="", **kw) -> dict:
    lo, hi = est.enclosure if est.enclosure else (None, None)
    cps = ";".join(repr(float(d)) for d in est.diagnostics)
    return _row(
        command,
        label=label,
        value=float(est.value),
        n_or_T=float(est.n_or_T),
        lo=lo,
        hi=hi,
        convention=est.convention,
        sample_sd=est.sample_sd,
        checkpoints=cps,
        **kw,
    )


def write_rows(rows: list[dict], out_path: str | None, fmt: str) -> None:
    if fmt == "jsonl":
        text = "\n".join(json.dumps(r, sort_keys=False) for r in rows) + "\n"
    else:
        lines = [f"# {SCHEMA_VERSION}", ",".join(COLUMNS)]
        for r in rows:
            lines.append(",".join(_fmt(r[c]) for c in COLUMNS))
        text = "\n".join(lines) + "\n"
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


# -- command handlers -------------------------------------------------------------


def _cmd_rotno_map(cfg: _Cfg, seed, out, fmt, jobs, verbose) -> int:
    lift = build_lift(cfg.child("map"))
    driver = build_driver(cfg.child("driver") if "driver" in cfg.data else None, seed)
    n = cfg.require("n", "posint")
    x0 = cfg.optional("x0", 0.0, "number")
    if driver is None and not lift.driven:
        est = deterministic_enclosure(lift, n, x0=x0)
    else:
        est = estimate_map(lift, driver, x0=x0, n=n)
    write_rows([_estimate_row("rotno-map", est, label=lift.label)], out, fmt)
    return EXIT_OK


def _build_field(spec: _Cfg):
    family = spec.require("family", "str")
    if family == "cosine":
        return make_cosine_field(
            spec.optional("a", 2.0, "number"), spec.optional("b", 1.0, "number")
        ), None
    raise ValidationError(f"{spec.path}.family: unknown field family {family!r}")


def _cmd_rotno_ode(cfg: _Cfg, seed, out, fmt, jobs, verbose) -> int:
    fspec = cfg.child("field")
    family = fspec.require("family", "str")
    T = cfg.require("T", "number")
    dt = cfg.require("dt", "number")
    x0 = cfg.optional("x0", 0.0, "number")
    if family == "planar_modulated":
        amp = fspec.optional("amp", 0.1, "number")

        def A(w, u):
            s = 1.0 + amp * u
            return (-s * w[1], s * w[0])

        est = estimate_planar_homogeneous(
            A, lambda t: math.cos(t), T, dt, alpha0=x0, lipschitz_bound=2.0 + 2.0 * abs(amp)
        )
        label = f"planar_modulated(amp={amp})"
    else:
        field, _ = _build_field(fspec)
        est = estimate_ode(field, None, x0=x0, T=T, dt=dt)
        label = field.label
    write_rows([_estimate_row("rotno-ode", est, label=label)], out, fmt)
    return EXIT_OK


def _cmd_compose(cfg: _Cfg, seed, out, fmt, jobs, verbose) -> int:
    if seed is None:
        raise ValidationError("config.seed: required for the compose command")
    probs = cfg.require("probs", "numlist")
    n = cfg.require("n", "posint")
    ensemble = cfg.optional("ensemble", 8, "posint")
    maps_spec = cfg.require("maps")
    if isinstance(maps_spec, dict):
        mwrap = cfg.child("maps")
        family = mwrap.require("family", "str")
        if family == "conjugated_rotations":
            rhos = mwrap.require("rhos", "numlist")
            a = mwrap.optional("conj_amplitude", 0.3, "number")
            maps = [make_conjugated_rotation(r, a) for r in rhos]
        elif family == "rotations":
            rhos = mwrap.require("rhos", "numlist")
            maps = [CircleLift(r, None) for r in rhos]
        else:
            raise ValidationError(
                f"config.maps.family: unknown composition family {family!r}"
            )
    elif isinstance(maps_spec, list):
        maps = [
            build_lift(_Cfg(m, f"config.maps[{i}]")) for i, m in enumerate(maps_spec)
        ]
        rhos = None
    else:
        raise ValidationError("config.maps: expected an object or a list")
    est = estimate_iid_composition(maps, probs, seed, n, ensemble)
    label = "iid_composition"
    if isinstance(maps_spec, dict):
        label += f"[{family}]"
    write_rows([_estimate_row("compose", est, label=label)], out, fmt)
    return EXIT_OK


def _cmd_dioph(cfg: _Cfg, seed, out, fmt, jobs, verbose) -> int:
    mode = cfg.optional("mode", "certify", "str")
    K = cfg.require("K", "posint")
    if mode == "screen":
        alpha = cfg.require("alpha", "numlist")
        hits = resonance_screen(alpha, K)
        rows = [
            _row(
                "dioph",
                label="screen",
                x1_name="k",
                x1=" ".join(str(v) for v in k),
                value=float(sum(abs(v) for v in k)),
                status="resonant",
            )
            for k in hits
        ]
        if not rows:
            rows = [_row("dioph", label="screen", status="clear")]
        write_rows(rows, out, fmt)
        return EXIT_OK
    mu = cfg.require("mu", "numlist")
    nu = cfg.optional("nu", float(len(mu)), "number")
    budget = cfg.optional("work_budget", 60_000_000, "posint")
    cert = certify(mu, nu, K, work_budget=budget)
    row = _row(
        "dioph",
        label="certify",
        x1_name="worst_k",
        x1=" ".join(str(v) for v in cert.worst_k),
        x2_name="nu",
        x2=cert.nu,
        value=cert.C_best,
        n_or_T=float(cert.K_checked),
        status="resonant" if cert.C_best == 0.0 else "ok",
    )
    write_rows([row], out, fmt)
    return EXIT_OK


def _kam_config(cfg: _Cfg) -> KamConfig:
    spec = cfg.optional("config", {}, "dict")
    c = _Cfg(spec, "config.config")
    return KamConfig(
        r0=c.optional("r0", None, "number"),
        delta0=c.optional("delta0", 0.1, "number"),
        max_stages=c.optional("max_stages", 12, "posint"),
        defect_target=c.optional("defect_target", 1e-10, "number"),
        order_cap=c.optional("order_cap", None, "posint"),
        base_order=c.optional("base_order", None, "posint"),
        keep_stages=False,
    )


def _cmd_kam(cfg: _Cfg, seed, out, fmt, jobs, verbose) -> int:
    mspec = cfg.child("map")
    config = _kam_config(cfg)
    cert_spec = _Cfg(cfg.optional("certificate", {}, "dict"), "config.certificate")
    family = mspec.optional("family", None, "str")
    if family == "arnold_matched":
        eps = mspec.require("eps", "number")
        target = _resolve_rho(mspec.require("target_rho"), f"{mspec.path}.target_rho")
        tol = mspec.optional("match_tol", 1e-9, "number")
        c = match_rotation_parameter(
            lambda cc: make_arnold_family(cc / TWO_PI, eps), target, tol
        )
        order = cert_spec.optional("order", 8, "posint")
        p = fourier.from_modes(
            1, order, {1: -0.5j * eps, -1: 0.5j * eps, 0: c - TWO_PI * target}
        )
        tmap = TorusMap((target,), p)
        cert = certify([target], cert_spec.optional("nu", 1.0, "number"),
                       cert_spec.optional("K", 1000, "posint"))
        result = run_kam(tmap, config, cert)
    elif family == "skew_sine":
        eps = mspec.require("eps", "number")
        alpha = mspec.require("alpha", "numlist")
        target = _resolve_rho(mspec.require("target_rho"), f"{mspec.path}.target_rho")
        tol = mspec.optional("match_tol", 1e-9, "number")
        driver = TorusRotation(tuple(alpha))
        _family = lambda cc: make_skew_sine(cc, eps)
        c = match_rotation_parameter(_family, target, tol, driver=driver)
        mu = (target,) + tuple(alpha)
        cert = certify(mu, cert_spec.optional("nu", float(len(mu)), "number"),
                       cert_spec.optional("K", 400, "posint"))
        result = conjugate_skew_product(
            _family(c), driver, target, config=config, certificate=cert,
            order=cert_spec.optional("order", 8, "posint"),
        )
    else:
        mu = [
            _resolve_rho(v, f"{mspec.path}.mu[{i}]")
            for i, v in enumerate(mspec.require("mu", "list"))
        ]
        p = fourier.from_flat(mspec.require("p", "numlist"))
        tmap = TorusMap(tuple(mu), p)
        cert = certify(mu, cert_spec.optional("nu", float(len(mu)), "number"),
                       cert_spec.optional("K", 1000 if len(mu) == 1 else 200, "posint"))
        result = run_kam(tmap, config, cert)

    record = result.to_record()
    if out:
        Path(out).with_suffix(".json").write_text(json.dumps(record, indent=2) + "\n")
    row = _row(
        "kam",
        label=f"m={len(result.mu)}",
        x1_name="stages",
        x1=float(result.stages_used),
        value=result.defect,
        n_or_T=float(result.stages_used),
        status=result.status,
    )
    write_rows([row], out, fmt)
    return EXIT_OK if result.status == "converged" else EXIT_NUMERICAL


def _sweep_point(args):
    family, params, n, x0 = args
    try:
        if family == "arnold":
            lift = make_arnold_family(params["Omega"], params["eps"])
        elif family == "conjugated_rotation":
            lift = make_conjugated_rotation(params["rho"], params.get("conj_amplitude", 0.3))
        else:
            raise ValidationError(f"unknown sweep family {family!r}")
        est = deterministic_enclosure(lift, n, x0=x0)
        return (float(est.value), est.enclosure[0], est.enclosure[1], "ok")
    except RotkitError as exc:
        return (None, None, None, f"error:{type(exc).__name__}")


def _cmd_sweep(cfg: _Cfg, seed, out, fmt, jobs, verbose) -> int:
    fam_spec = cfg.child("family")
    family = fam_spec.require("name", "str")
    base = {k: v for k, v in fam_spec.data.items() if k != "name"}
    ax1 = cfg.child("axis1")
    name1 = ax1.require("name", "str")
    lo1, hi1 = ax1.require("lo", "number"), ax1.require("hi", "number")
    count1 = ax1.require("count", "posint")
    if not (lo1 < hi1 and count1 >= 2):
        raise ValidationError("config.axis1: need lo < hi and count >= 2")
    ax2 = cfg.optional("axis2", None, "dict")
    if ax2 is not None:
        a2 = cfg.child("axis2")
        name2 = a2.require("name", "str")
        lo2, hi2 = a2.require("lo", "number"), a2.require("hi", "number")
        count2 = a2.require("count", "posint")
        if not (lo2 < hi2 and count2 >= 2):
            raise ValidationError("config.axis2: need lo < hi and count >= 2")
        axis2 = np.linspace(lo2, hi2, count2)
    else:
        name2, axis2 = "", [None]
    axis1 = np.linspace(lo1, hi1, count1)
    n = cfg.require("n", "posint")
    x0 = cfg.optional("x0", 0.0, "number")

    required = {"arnold": {"Omega", "eps"}, "conjugated_rotation": {"rho"}}
    if family not in required:
        raise ValidationError(f"config.family.name: unknown sweep family {family!r}")
    provided = set(base) | {name1} | ({name2} if name2 else set())
    missing = required[family] - provided
    if missing:
        raise ValidationError(
            f"config.family: missing parameter(s) {sorted(missing)} for {family!r}"
        )

    rows = []
    for v2 in axis2:
        params_base = dict(base)
        if v2 is not None:
            params_base[name2] = float(v2)
        batch = _sweep_batch(family, params_base, name1, axis1, n, x0)
        if batch is not None:
            for i, v1 in enumerate(axis1):
                val, lo_e, hi_e, status = batch[i]
                rows.append(
                    _row("sweep", label=family, x1_name=name1, x1=float(v1),
                         x2_name=name2, x2=(float(v2) if v2 is not None else None),
                         value=val, n_or_T=float(n), lo=lo_e, hi=hi_e,
                         convention="map", status=status)
                )
            continue
        tasks = []
        for v1 in axis1:
            params = dict(params_base)
            params[name1] = float(v1)
            tasks.append((family, params, n, x0))
        if jobs and jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_sweep_point, tasks))
        else:
            results = [_sweep_point(t) for t in tasks]
        for v1, (val, lo_e, hi_e, status) in zip(axis1, results):
            rows.append(
                _row("sweep", label=family, x1_name=name1, x1=float(v1),
                     x2_name=name2, x2=(float(v2) if v2 is not None else None),
                     value=val, n_or_T=float(n), lo=lo_e, hi=hi_e,
                     convention="map", status=status)
            )
    write_rows(rows, out, fmt)
    return EXIT_OK


def _sweep_batch(family, params, axis_name, axis, n, x0):
    """Vectorized whole-axis run for batchable deterministic families.

    All points iterate simultaneously as one array orbit; falls back to
    the per-point path (None) when a parameter is out of range or the
    family is not batchable.
    """
    if family != "arnold":
        return None
    Omega = params.get("Omega")
    eps = params.get("eps")
    if axis_name == "Omega":
        Omegas = np.asarray(axis, dtype=float)
        if eps is None or abs(eps) >= 1.0:
            return None
        eps_vec = np.full_like(Omegas, float(eps))
    elif axis_name == "eps":
        return None  # eps may cross the homeomorphism bound; per-point path
    else:
        return None
    x = np.full(len(Omegas), float(x0))
    rig = TWO_PI * Omegas
    s = np.zeros_like(x)
    comp = np.zeros_like(x)
    xr = x % TWO_PI
    for _ in range(n):
        d = rig + eps_vec * np.sin(xr)
        y = d - comp
        t = s + y
        comp = (t - s) - y
        s = t
        xr = (xr + d) % TWO_PI
    F = s
    val = F / (TWO_PI * n)
    lo = (F - TWO_PI) / (TWO_PI * n)
    hi = (F + TWO_PI) / (TWO_PI * n)
    return [
        (float(val[i]), float(lo[i]), float(hi[i]), "ok") for i in range(len(Omegas))
    ]


def _cmd_report(cfg: _Cfg, seed, out, fmt, jobs, verbose) -> int:
    from . import report

    inp = cfg.require("input", "str")
    kind = cfg.optional("kind", "auto", "str")
    out_dir = cfg.optional("out_dir", ".", "str")
    written = report.render(inp, kind=kind, out_dir=out_dir)
    for path in written:
        print(path)
    return EXIT_OK


_COMMANDS = {
    "rotno-map": _cmd_rotno_map,
    "rotno-ode": _cmd_rotno_ode,
    "compose": _cmd_compose,
    "dioph": _cmd_dioph,
    "kam": _cmd_kam,
    "sweep": _cmd_sweep,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rotkit",
        description="Rotation numbers, small divisors, and conjugacy to rotations",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--out", default=None, help="result file (stdout if omitted)")
        p.add_argument("--seed", type=int, default=None, help="overrides config seed")
        p.add_argument("--jobs", type=int, default=None, help="parallel workers")
        p.add_argument("--format", choices=["csv", "jsonl"], default=None)
        p.add_argument("--verbose", action="store_true")
    args = parser.parse_args(argv)

    try:
        data = _load_config(args.config)
        cfg = _Cfg(data)
        declared = cfg.optional("command", None, "str")
        if declared is not None and declared != args.command:
            raise ValidationError(
                f"config.command: {declared!r} does not match subcommand {args.command!r}"
            )
        seed = args.seed if args.seed is not None else cfg.optional("seed", None, "int")
        out = args.out or cfg.optional("out", None, "str")
        fmt = args.format or cfg.optional("format", "csv", "str")
        if fmt not in ("csv", "jsonl"):
            raise ValidationError(f"config.format: expected csv or jsonl, got {fmt!r}")
        return _COMMANDS[args.command](cfg, seed, out, fmt, args.jobs, args.verbose)
    except BudgetExceededError as exc:
        print(f"rotkit: error code={EXIT_BUDGET} kind=budget msg={exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ValidationError as exc:
        print(f"rotkit: error code={EXIT_VALIDATION} kind=validation msg={exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ResonanceError as exc:
        print(
            f"rotkit: error code={EXIT_NUMERICAL} kind=resonance k={','.join(str(v) for v in exc.k)} msg={exc}",
            file=sys.stderr,
        )
        return EXIT_NUMERICAL
    except _NUMERICAL_ERRORS as exc:
        print(
            f"rotkit: error code={EXIT_NUMERICAL} kind={type(exc).__name__} msg={exc}",
            file=sys.stderr,
        )
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

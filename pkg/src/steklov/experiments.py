"""Experiment runner: convergence ladders, inequality audits, certification, reports.

Convergence configs are JSON objects with these keys (unknown keys are errors)::

    signal        catalog id, e.g. "bump:B=1"                        (required)
    kernel        kernel id, e.g. "fejer"                            (required)
    phi           phi id                                 default "power:p=2"
    r             Steklov order                                  default 2
    w_ladder      strictly increasing rates, each >= r   default [4,8,16,32,64]
    lambda        positive number or "auto"                      default 1
    lambda_budget ladder depth for "auto"                        default 20
    grid          {"points": n, "lo": a, "hi": b}   default 401 on [-B-1, B+1]
    tolerances    QuadratureSpec overrides, e.g. {"rel_tol": 1e-6}
    output        output path (CLI only)
    format        "csv" or "json"                                default "csv"

Audit configs hold a list under "cases"; each case takes signal, kernel, phi,
r, w and lambda (number or "auto"), plus optional top-level tolerances,
lambda_budget, output and format.
"""

import csv
import dataclasses
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, MembershipError
from .kernels import certify_kernel, get_kernel, m0_upper
from .orlicz import (check_modular_inequality, find_modular_lambda, luxemburg_from_samples,
                     modular_from_samples, parse_phi, sample_function)
from .quadrature import DEFAULT_SPEC
from .sampling import SteklovOperator, SteklovParams
from .signals import make_signal

SCHEMA_VERSION = 1
CONVERGE_COLUMNS = ("w", "sup_error", "lux_error", "modular_error", "lambda",
                    "tail_bound", "quad_error", "lux_error_est", "modular_error_est")

_SPEC_KEYS = {f.name for f in dataclasses.fields(DEFAULT_SPEC)}


def _spec_from(overrides):
    if overrides is None:
        return DEFAULT_SPEC
    if not isinstance(overrides, dict):
        raise ConfigError("tolerances must be an object")
    bad = set(overrides) - _SPEC_KEYS
    if bad:
        raise ConfigError(f"unknown tolerance keys {sorted(bad)}; known: {sorted(_SPEC_KEYS)}")
    try:
        return DEFAULT_SPEC.replace(**overrides)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad tolerances: {exc}") from None


def _check_lambda(lam):
    if lam == "auto":
        return lam
    if isinstance(lam, bool) or not isinstance(lam, (int, float)) or not lam > 0:
        raise ConfigError(f"lambda must be a positive number or 'auto', got {lam!r}")
    return float(lam)


def _check_r(r):
    if isinstance(r, bool) or not isinstance(r, int) or r < 1:
        raise ConfigError(f"r must be an integer >= 1, got {r!r}")
    return r


@dataclass
class ExperimentConfig:
    signal: str
    kernel: str
    phi: str = "power:p=2"
    r: int = 2
    w_ladder: tuple = (4.0, 8.0, 16.0, 32.0, 64.0)
    lam: object = 1.0
    lambda_budget: int = 20
    grid: dict = None
    tolerances: dict = None
    output: str = None
    format: str = "csv"

    KEYS = ("signal", "kernel", "phi", "r", "w_ladder", "lambda", "lambda_budget",
            "grid", "tolerances", "output", "format")

    def __post_init__(self):
        make_signal(self.signal)
        get_kernel(self.kernel)
        parse_phi(self.phi)
        _check_r(self.r)
        w = [float(v) for v in self.w_ladder]
        if any(b <= a for a, b in zip(w, w[1:])):
            raise ConfigError(f"w_ladder must be strictly increasing, got {w}")
        if any(v < self.r for v in w):
            raise ConfigError(f"every w must be >= r = {self.r}, got {w}")
        self.w_ladder = tuple(w)
        self.lam = _check_lambda(self.lam)
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be 'csv' or 'json', got {self.format!r}")
        if not isinstance(self.lambda_budget, int) or self.lambda_budget < 1:
            raise ConfigError("lambda_budget must be an integer >= 1")
        if self.grid is not None:
            if not isinstance(self.grid, dict) or set(self.grid) - {"points", "lo", "hi"}:
                raise ConfigError("grid must be an object with keys points, lo, hi")
        self.spec = _spec_from(self.tolerances)

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        bad = set(d) - set(cls.KEYS)
        if bad:
            raise ConfigError(f"unknown config keys {sorted(bad)}")
        for key in ("signal", "kernel"):
            if key not in d:
                raise ConfigError(f"config needs {key!r}")
        kw = {("lam" if k == "lambda" else k): v for k, v in d.items()}
        return cls(**kw)

    @classmethod
    def from_json(cls, path):
        return cls.from_dict(_load_json(path))

    def grid_points(self):
        f = make_signal(self.signal)
        B = f.support_bound or 0.0
        g = self.grid or {}
        n = g.get("points", 401)
        lo, hi = g.get("lo", -B - 1.0), g.get("hi", B + 1.0)
        if not isinstance(n, int) or n < 2 or not hi > lo:
            raise ConfigError("grid needs points >= 2 and hi > lo")
        return np.linspace(lo, hi, n)


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None


def resolve_lambda(phi, f, kernel, r, lam="auto", budget=20, spec=DEFAULT_SPEC, samples=None):
    """Turn "auto" into lam-bar / ((2^r - 1) M_0), lam-bar from the 2^-j ladder."""
    if lam != "auto":
        return float(lam)
    phi = parse_phi(phi)
    f = make_signal(f)
    if samples is None:
        samples = sample_function(f, spec)
    bar = find_modular_lambda(phi, f, budget, spec, samples=samples)
    if bar is None:
        raise MembershipError(f"no lambda in the 2^-j ladder (j <= {budget}) gives a finite "
                              f"{phi.family} modular for {f.id}")
    return bar / ((2 ** r - 1) * m0_upper(get_kernel(kernel) if isinstance(kernel, str) else kernel))


class _Difference:
    """S_w^r f - f, with the quadrature hints of both terms."""

    def __init__(self, op):
        self.op = op
        f = op.signal
        self.breakpoints = tuple(op.breakpoints()) + tuple(f.breakpoints)
        B = f.support_bound or 0.0
        sup = op.support()
        if sup is None:
            self.t0, self.max_width = max(1.0, B + 1.0), op.max_width
        else:
            self.t0 = max(1.0, B, abs(sup[0]), abs(sup[1]))
            self.max_width = None

    def __call__(self, x):
        return self.op(x) - self.op.signal(x)


@dataclass
class ConvergenceRow:
    w: float
    sup_error: float
    lux_error: float
    modular_error: float
    lam: float
    tail_bound: float
    quad_error: float
    lux_error_est: float
    modular_error_est: float

    def values(self):
        return (self.w, self.sup_error, self.lux_error, self.modular_error, self.lam,
                self.tail_bound, self.quad_error, self.lux_error_est, self.modular_error_est)


def _verdict(values, errors):
    """Decrease within error along the ladder and the last/first ratio."""
    mono = all(b <= a + ea + eb for a, b, ea, eb in zip(values, values[1:], errors, errors[1:]))
    if not values:
        ratio = math.nan
    elif values[0] == 0.0:
        ratio = 0.0 if values[-1] == 0.0 else math.inf
    else:
        ratio = values[-1] / values[0]
    return {"monotone_within_error": mono, "ratio_last_first": ratio}


@dataclass
class ConvergenceReport:
    config: dict
    rows: list = field(default_factory=list)

    @property
    def verdicts(self):
        sup_est = [r.tail_bound + r.quad_error for r in self.rows]
        return {
            "sup_error": _verdict([r.sup_error for r in self.rows], sup_est),
            "lux_error": _verdict([r.lux_error for r in self.rows],
                                  [r.lux_error_est for r in self.rows]),
            "modular_error": _verdict([r.modular_error for r in self.rows],
                                      [r.modular_error_est for r in self.rows]),
        }

    def to_dict(self):
        return {"schema": "steklov.convergence", "schema_version": SCHEMA_VERSION,
                "config": self.config,
                "columns": list(CONVERGE_COLUMNS),
                "rows": [list(r.values()) for r in self.rows],
                "verdicts": self.verdicts}


def _config_echo(cfg):
    return {"signal": cfg.signal, "kernel": cfg.kernel, "phi": cfg.phi, "r": cfg.r,
            "w_ladder": list(cfg.w_ladder), "lambda": cfg.lam, "lambda_budget": cfg.lambda_budget,
            "grid": cfg.grid, "tolerances": cfg.tolerances}


def run_convergence(config):
    """Sup, Luxemburg and modular errors of S_w^r f along the w ladder."""
    cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig.from_dict(config)
    spec = cfg.spec
    f = make_signal(cfg.signal)
    kernel = get_kernel(cfg.kernel)
    phi = parse_phi(cfg.phi)
    lam = resolve_lambda(phi, f, kernel, cfg.r, cfg.lam, cfg.lambda_budget, spec)
    xs = cfg.grid_points()
    fx = f(xs)
    report = ConvergenceReport(_config_echo(cfg))
    for w in cfg.w_ladder:
        op = SteklovOperator(f, kernel, cfg.r, w, spec)
        sup_err = float(np.max(np.abs(op(xs) - fx)))
        diff = _Difference(op)
        samples = sample_function(diff, spec, diff.breakpoints, diff.max_width, diff.t0)
        lux = luxemburg_from_samples(phi, samples) if phi.convex else None
        mod = modular_from_samples(phi, samples, lam)
        report.rows.append(ConvergenceRow(
            w=w, sup_error=sup_err,
            lux_error=lux.value if lux else math.nan,
            modular_error=mod.value, lam=lam,
            tail_bound=op.tail_bound, quad_error=op.quad_error,
            lux_error_est=lux.error if lux else math.nan,
            modular_error_est=mod.achieved_error))
    return report


@dataclass
class AuditReport:
    checks: list

    @property
    def passed(self):
        return all(c.passed for c in self.checks if not c.inconclusive)

    @property
    def n_inconclusive(self):
        return sum(c.inconclusive for c in self.checks)

    def to_dict(self):
        keys = ("phi", "signal", "kernel", "r", "w", "lam", "lhs", "rhs", "lhs_error",
                "rhs_error", "passed", "inconclusive")
        return {"schema": "steklov.audit", "schema_version": SCHEMA_VERSION,
                "columns": list(keys) + ["slack"],
                "rows": [[getattr(c, k) for k in keys] + [c.slack] for c in self.checks],
                "passed": self.passed, "inconclusive": self.n_inconclusive}


_CASE_KEYS = {"signal", "kernel", "phi", "r", "w", "lambda"}


def run_inequality_audit(configs, spec=DEFAULT_SPEC, budget=20):
    """check_modular_inequality over a list of case dicts."""
    checks = []
    for case in configs:
        bad = set(case) - _CASE_KEYS
        if bad:
            raise ConfigError(f"unknown audit case keys {sorted(bad)}")
        missing = {"signal", "kernel", "phi", "r", "w"} - set(case)
        if missing:
            raise ConfigError(f"audit case needs {sorted(missing)}")
        r = _check_r(case["r"])
        params = SteklovParams(r, float(case["w"]))
        lam = resolve_lambda(case["phi"], case["signal"], case["kernel"], r,
                             _check_lambda(case.get("lambda", "auto")), budget, spec)
        checks.append(check_modular_inequality(case["phi"], case["signal"], case["kernel"],
                                               params, lam, spec))
    return AuditReport(checks)


def load_audit_config(path):
    d = _load_json(path)
    if not isinstance(d, dict) or "cases" not in d:
        raise ConfigError("audit config needs a 'cases' list")
    bad = set(d) - {"cases", "tolerances", "lambda_budget", "output", "format"}
    if bad:
        raise ConfigError(f"unknown config keys {sorted(bad)}")
    fmt = d.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be 'csv' or 'json', got {fmt!r}")
    return d["cases"], _spec_from(d.get("tolerances")), d.get("lambda_budget", 20), d.get("output"), fmt


@dataclass
class CertifyReport:
    certificates: list

    @property
    def passed(self):
        return all(c.partition_of_unity_ok for c in self.certificates)

    def to_dict(self):
        return {"schema": "steklov.certify", "schema_version": SCHEMA_VERSION,
                "certificates": [c.to_dict() for c in self.certificates]}


def run_certify(kernel_ids, tol_pou=1e-6, tol_ft=1e-6, K_ft=5):
    return CertifyReport([certify_kernel(get_kernel(k), tol_pou=tol_pou, tol_ft=tol_ft, K_ft=K_ft)
                          for k in kernel_ids])


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)  # "inf" / "nan", json has no literal for them
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.generic):
        return _jsonable(v.item())
    return v


def render_report(report, fmt="csv"):
    """Serialise a report deterministically (no timestamps, fixed column order)."""
    d = report.to_dict()
    if fmt == "json":
        return json.dumps(_jsonable(d), indent=2, sort_keys=False) + "\n"
    if fmt != "csv":
        raise ConfigError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if "rows" in d:
        cols = [c for c in d["columns"]]
        writer.writerow(["lambda" if c == "lam" else c for c in cols])
        for row in d["rows"]:
            writer.writerow([_fmt(v) for v in row])
    else:
        cols = ("kernel_id", "partition_of_unity_ok", "time_domain_ok", "fourier_ok",
                "max_pou_deviation", "ft_at_zero", "truncation_radius_used")
        writer.writerow(cols)
        for c in d["certificates"]:
            writer.writerow([_fmt(c[k]) for k in cols])
    return buf.getvalue()


def emit_report(report, fmt="csv", path=None):
    """Write the rendered report to ``path`` (or return it when path is None)."""
    text = render_report(report, fmt)
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text

"""Catalog of test signals and CSV ingestion.

Each catalog member stands for one function class the convergence results are
stated over:

    hat:B=<b>           continuous, piecewise linear, supported in [-B, B]   (C_c)
    bump:B=<b>          smooth, supported in [-B, B], sup norm 1             (C_c)
    step                indicator of [0, 1]; discontinuous, in every L^p     (bounded, L^phi)
    const:c=<c>,B=<b>   c on [-B, B]                                         (bounded, L^phi)
    ramp:B=<b>          x on [-B, B]                                          (bounded, L^phi)
    zero                identically 0
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InputError
from .kernels import parse_id


@dataclass(frozen=True, eq=False)
class Signal:
    """A real function on the line with the metadata the operators rely on.

    ``breakpoints`` are points where the function is not smooth (quadrature
    cuts there); ``discontinuities`` is the subset where it jumps.
    """

    id: str
    func: object
    support_bound: float = None
    sup_norm: float = None
    breakpoints: tuple = ()
    discontinuities: tuple = ()

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = np.asarray(self.func(x), dtype=np.float64)
        if self.support_bound is not None:
            out = np.where(np.abs(x) > self.support_bound, 0.0, out)
        return float(out) if out.ndim == 0 else out

    def is_continuous_at(self, x):
        return all(x != d for d in self.discontinuities)

    @property
    def integral_range(self):
        """Interval outside which the signal vanishes."""
        if self.support_bound is None:
            raise ConfigError(f"signal {self.id!r} has no declared support bound")
        return -self.support_bound, self.support_bound


def _hat(b):
    return lambda x: np.maximum(0.0, 1.0 - np.abs(x) / b)


def _bump(b):
    def f(x):
        y = (np.asarray(x) / b) ** 2
        out = np.zeros_like(y)
        inside = y < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - y[inside]))
        return out
    return f


def _box(lo, hi, c):
    return lambda x: np.where((x >= lo) & (x <= hi), c, 0.0)


def _ramp(b):
    return lambda x: np.where(np.abs(x) <= b, x, 0.0)


def _positive(params, key, text):
    if key not in params:
        raise ConfigError(f"signal {text!r} needs parameter {key}")
    v = params[key]
    if not v > 0:
        raise ConfigError(f"signal {text!r}: {key} must be > 0")
    return v


def make_signal(text):
    """Build a catalog signal from its id string."""
    if isinstance(text, Signal):
        return text
    name, params = parse_id(text)
    allowed = {"hat": {"B"}, "bump": {"B"}, "step": set(), "const": {"c", "B"},
               "ramp": {"B"}, "zero": set()}
    if name not in allowed:
        raise ConfigError(f"unknown signal {name!r}; known: {sorted(allowed)}")
    extra = set(params) - allowed[name]
    if extra:
        raise ConfigError(f"signal {name!r} does not take {sorted(extra)}")
    if name == "hat":
        b = _positive(params, "B", text)
        return Signal(text, _hat(b), b, 1.0, (-b, 0.0, b))
    if name == "bump":
        b = _positive(params, "B", text)
        return Signal(text, _bump(b), b, 1.0, (-b, b))
    if name == "step":
        return Signal(text, _box(0.0, 1.0, 1.0), 1.0, 1.0, (0.0, 1.0), (0.0, 1.0))
    if name == "const":
        b = _positive(params, "B", text)
        if "c" not in params:
            raise ConfigError(f"signal {text!r} needs parameter c")
        c = params["c"]
        jumps = (-b, b) if c != 0 else ()
        return Signal(text, _box(-b, b, c), b, abs(c), (-b, b), jumps)
    if name == "ramp":
        b = _positive(params, "B", text)
        return Signal(text, _ramp(b), b, b, (-b, b), (-b, b))
    return Signal(text, lambda x: np.zeros_like(np.asarray(x, dtype=np.float64)), 0.0, 0.0)


CATALOG = ("hat:B=1", "step", "bump:B=1", "const:c=1,B=1", "ramp:B=1", "zero")


def signal_eval(f, x):
    return f(x)


def load_csv_signal(path):
    """Piecewise-linear signal through the rows of a CSV with header ``x,value``.

    The signal is zero outside the sampled range; every node is a breakpoint.
    """
    xs, ys = [], []
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise InputError(f"{path}: empty file")
            if [h.strip().lower() for h in header] != ["x", "value"]:
                raise InputError(f"{path}:1: expected header 'x,value', got {','.join(header)!r}")
            for lineno, row in enumerate(reader, start=2):
                if not row or all(not c.strip() for c in row):
                    continue
                if len(row) != 2:
                    raise InputError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
                try:
                    x, y = float(row[0]), float(row[1])
                except ValueError:
                    raise InputError(f"{path}:{lineno}: cannot parse {row!r}") from None
                if not (math.isfinite(x) and math.isfinite(y)):
                    raise InputError(f"{path}:{lineno}: non-finite value")
                if xs and x <= xs[-1]:
                    raise InputError(f"{path}:{lineno}: x values must be strictly increasing")
                xs.append(x)
                ys.append(y)
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from None
    if len(xs) < 2:
        raise InputError(f"{path}: need at least two data rows")
    xa, ya = np.asarray(xs), np.asarray(ys)
    jumps = tuple(x for x, y in ((xa[0], ya[0]), (xa[-1], ya[-1])) if y != 0.0)

    def f(x):
        x = np.asarray(x, dtype=np.float64)
        return np.where((x >= xa[0]) & (x <= xa[-1]), np.interp(x, xa, ya), 0.0)

    return Signal(f"csv:{path}", f, float(max(abs(xa[0]), abs(xa[-1]))),
                  float(np.max(np.abs(ya))), tuple(xa), jumps)

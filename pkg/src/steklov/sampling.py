"""Steklov means, coefficient nets and the Steklov sampling operator.

The r-fold Steklov integral

    f_{r,h}(x) = (-h)^{-r} int_{[0,h]^r} sum_{m=1}^r (-1)^{r-m+1} C(r,m)
                 f(x + (m/r)(t_1 + ... + t_r)) dt

depends on the t's only through their sum, whose density is the Irwin-Hall
weight p_{r,h}. The production path therefore evaluates

    f_{r,h}(x) = sum_m (-1)^{1-m} C(r,m) int_0^{rh} f(x + (m/r) s) p_{r,h}(s) ds

with panels cut at the weight's knots {j h} and wherever the argument crosses
a breakpoint of f. ``steklov_mean_bruteforce`` integrates the r-fold form
directly and serves as the oracle.

The operator is S_w^r f(x) = sum_k f_{r,1/w}(k/w) chi(w x - k). For signals
with support in [-B, B] the coefficient at k needs f on [k/w, (k+r)/w], so
only finitely many coefficients are nonzero and the series is a finite sum.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .kernels import get_kernel, m0_upper
from .quadrature import (DEFAULT_SPEC, adaptive_panels, gauss_legendre, integrate_panel,
                         irwin_hall_density)
from .signals import make_signal


@dataclass(frozen=True)
class SteklovParams:
    r: int
    w: float

    def __post_init__(self):
        if int(self.r) != self.r or self.r < 1:
            raise ConfigError(f"Steklov order r must be an integer >= 1, got {self.r}")
        if not self.w > 0:
            raise ConfigError(f"sampling rate w must be > 0, got {self.w}")

    @property
    def h(self):
        return 1.0 / self.w


def _signed_binomials(r):
    return np.array([(-1.0) ** (1 - m) * math.comb(r, m) for m in range(1, r + 1)])


def steklov_means(f, r, h, xs, spec=DEFAULT_SPEC):
    """Vectorised f_{r,h}(x) for every x in ``xs``; returns (values, errors)."""
    f = make_signal(f)
    if r < 1 or int(r) != r or not h > 0:
        raise ConfigError("steklov_means needs integer r >= 1 and h > 0")
    r = int(r)
    xs = np.atleast_1d(np.asarray(xs, dtype=np.float64))
    n_x = xs.size
    ratios = np.arange(1, r + 1) / r
    # one integral per (x, m); owner = i * r + (m - 1)
    gx = np.repeat(xs, r)
    gc = np.tile(ratios, n_x)
    knots = np.arange(r + 1) * h
    bps = np.asarray(f.breakpoints, dtype=np.float64)
    span = r * h
    if bps.size:
        cross = (bps[None, :] - gx[:, None]) / gc[:, None]
        cross = np.clip(cross, 0.0, span)
        cuts = np.concatenate([np.broadcast_to(knots, (gx.size, r + 1)), cross], axis=1)
    else:
        cuts = np.broadcast_to(knots, (gx.size, r + 1)).copy()
    cuts.sort(axis=1)
    a = cuts[:, :-1]
    b = cuts[:, 1:]
    owner = np.broadcast_to(np.arange(gx.size)[:, None], a.shape)
    keep = b > a
    if f.support_bound is not None:
        B = f.support_bound
        lo_arg = gx[:, None] + gc[:, None] * a
        hi_arg = gx[:, None] + gc[:, None] * b
        keep &= (hi_arg > -B) & (lo_arg < B)
    a, b, owner = a[keep], b[keep], owner[keep]

    def integrand(s, own):
        arg = gx[own][:, None] + gc[own][:, None] * s
        return f(arg) * irwin_hall_density(r, h, s)

    vals, errs, _ = adaptive_panels(integrand, a, b, spec, owner, gx.size)
    coeff = _signed_binomials(r)
    vals = vals.reshape(n_x, r) @ coeff
    errs = errs.reshape(n_x, r) @ np.abs(coeff)
    return vals, errs


def steklov_mean(f, r, h, x, spec=DEFAULT_SPEC):
    """f_{r,h}(x) through the Irwin-Hall reduction."""
    vals, _ = steklov_means(f, r, h, [x], spec)
    return float(vals[0])


def _iterated(f, x, c, betas, level, h, S, xg, wg):
    """int_{[0,h]^level} f(x + c (S + t_1 + ... + t_level)) dt for each offset S.

    Before integrating at a level, each axis is split where the partial sum
    crosses a breakpoint of the function integrated at that level; level j
    sees breakpoints beta - i h for i < j.
    """
    if level == 0:
        return f(x + c * S)
    if betas.size:
        shifts = (betas[:, None] - h * np.arange(level)[None, :]).ravel()
        cross = np.clip(shifts[None, :] - S[:, None], 0.0, h)
        cuts = np.concatenate([np.zeros((S.size, 1)), cross, np.full((S.size, 1), h)], axis=1)
        cuts.sort(axis=1)
    else:
        cuts = np.tile([0.0, h], (S.size, 1))
    lo, hi = cuts[:, :-1], cuts[:, 1:]
    half = 0.5 * (hi - lo)
    t = (lo + half)[:, :, None] + half[:, :, None] * xg[None, None, :]
    inner = _iterated(f, x, c, betas, level - 1, h, (S[:, None, None] + t).ravel(), xg, wg)
    inner = inner.reshape(t.shape)
    return np.sum(inner * wg[None, None, :] * half[:, :, None], axis=(1, 2))


def steklov_mean_bruteforce(f, r, h, x, n_grid=16):
    """f_{r,h}(x) from the r-fold integral, used as an oracle (r <= 3).

    Iterated Gauss-Legendre with ``n_grid`` nodes per piece and axis; every
    axis is cut where the running argument crosses a breakpoint of f, so
    piecewise-polynomial signals are integrated exactly. Prefactor (-h)^-r and
    signs (-1)^(r-m+1) are applied as written.
    """
    f = make_signal(f)
    if r not in (1, 2, 3):
        raise ConfigError("steklov_mean_bruteforce supports r in {1, 2, 3} only")
    if n_grid < 8:
        raise ConfigError("n_grid must be >= 8")
    xg, wg = gauss_legendre(n_grid)
    total = 0.0
    for m in range(1, r + 1):
        c = m / r
        betas = np.sort((np.asarray(f.breakpoints, dtype=np.float64) - x) / c)
        val = _iterated(f, x, c, betas, r, h, np.zeros(1), xg, wg)[0]
        total += (-1.0) ** (r - m + 1) * math.comb(r, m) * val
    return (-h) ** (-r) * total


# ---------------------------------------------------------------------------
# coefficients and operator
# ---------------------------------------------------------------------------


@dataclass
class SteklovCoefficients:
    params: SteklovParams
    k_min: int
    k_max: int
    values: np.ndarray
    errors: np.ndarray

    @property
    def ks(self):
        return np.arange(self.k_min, self.k_max + 1)

    @property
    def quadrature_error(self):
        return float(self.errors.max()) if self.errors.size else 0.0

    def rows(self):
        w = self.params.w
        return [(int(k), k / w, float(v)) for k, v in zip(self.ks, self.values)]


def coefficient_window(f, params):
    """k-range outside which f_{r,w}(k/w) vanishes identically.

    The coefficient at k only sees f on [k/w, (k+r)/w]; the window also covers
    |k| <= (B+1) w + 1.
    """
    B = f.support_bound
    if B is None:
        raise ConfigError(f"signal {f.id!r} has unbounded support; the operator needs a support bound")
    w, r = params.w, params.r
    lo = min(math.floor(-(B + 1) * w) - 1, math.floor(-B * w - r))
    hi = math.ceil((B + 1) * w) + 1
    return lo, hi


def compute_coefficients(f, params, tol=None, spec=DEFAULT_SPEC, k_range=None):
    """The net f_{r,w}(k/w) over the coefficient window (or ``k_range``)."""
    f = make_signal(f)
    if tol is not None:
        spec = spec.replace(abs_tol=tol)
    lo, hi = k_range if k_range is not None else coefficient_window(f, params)
    ks = np.arange(lo, hi + 1)
    vals, errs = steklov_means(f, params.r, params.h, ks / params.w, spec)
    return SteklovCoefficients(params, int(lo), int(hi), vals, errs)


class SteklovOperator:
    """S_w^r f for a fixed signal and kernel, evaluable at any points."""

    def __init__(self, f, kernel, r, w, spec=DEFAULT_SPEC, k_range=None):
        self.signal = make_signal(f)
        self.kernel = get_kernel(kernel) if isinstance(kernel, str) else kernel
        self.params = SteklovParams(r, w)
        self.spec = spec
        self.coefficients = self._coefficients(k_range)

    def _coefficients(self, k_range):
        return compute_coefficients(self.signal, self.params, spec=self.spec, k_range=k_range)

    @property
    def r(self):
        return self.params.r

    @property
    def w(self):
        return self.params.w

    def __call__(self, x):
        c = self.coefficients
        out = self.kernel.series(np.asarray(x, dtype=np.float64), self.w, float(c.k_min), c.values)
        return float(out) if np.ndim(out) == 0 else out

    @property
    def quad_error(self):
        """Bound on the pointwise error from inexact coefficients."""
        return self.coefficients.quadrature_error * m0_upper(self.kernel)

    @property
    def tail_bound(self):
        """Bound on the contribution of nonzero coefficients left out of the window."""
        lo, hi = coefficient_window(self.signal, self.params)
        c = self.coefficients
        if c.k_min <= lo and c.k_max >= hi:
            return 0.0
        return (2 ** self.r - 1) * (self.signal.sup_norm or 0.0) * m0_upper(self.kernel)

    def support(self):
        """Interval containing the support of S_w^r f, or None for kernels without compact support."""
        if not self.kernel.compact:
            return None
        nz = np.nonzero(self.coefficients.values)[0]
        if nz.size == 0:
            return (0.0, 0.0)
        k0 = self.coefficients.k_min
        a, b = self.kernel.support.a, self.kernel.support.b
        return ((k0 + nz[0] + a) / self.w, (k0 + nz[-1] + b) / self.w)

    def breakpoints(self):
        """Points where S_w^r f may fail to be smooth (compact kernels only)."""
        if not self.kernel.knots:
            return ()
        ks = self.coefficients.ks.astype(np.float64)
        pts = (ks[:, None] + np.asarray(self.kernel.knots)[None, :]).ravel() / self.w
        return tuple(np.unique(pts))

    @property
    def max_width(self):
        """Panel width that resolves the oscillation of the series."""
        return 1.0 / self.w


def operator_eval(f, params, kernel, x, tol=None, spec=DEFAULT_SPEC):
    """S_w^r f(x) for a single evaluation (builds the coefficient net)."""
    if tol is not None:
        spec = spec.replace(abs_tol=tol)
    return SteklovOperator(f, kernel, params.r, params.w, spec)(x)


class KantorovichOperator:
    """K_w f(x) = sum_k [w int_{k/w}^{(k+1)/w} f] chi(w x - k).

    Deliberately shares no code with the Steklov path beyond the panel
    integrator: coefficients are plain averages computed one interval at a
    time and the series is a dense matrix product.
    """

    def __init__(self, f, kernel, w, spec=DEFAULT_SPEC, k_range=None):
        self.signal = make_signal(f)
        self.kernel = get_kernel(kernel) if isinstance(kernel, str) else kernel
        self.w = float(w)
        lo, hi = k_range if k_range is not None else coefficient_window(
            self.signal, SteklovParams(1, w))
        self.ks = np.arange(lo, hi + 1)
        vals = []
        for k in self.ks:
            res = integrate_panel(self.signal, k / self.w, (k + 1) / self.w, spec,
                                  breakpoints=self.signal.breakpoints)
            vals.append(self.w * res.value)
        self.values = np.asarray(vals)

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        u = self.w * x.ravel()
        chi = np.asarray(self.kernel(u[:, None] - self.ks[None, :].astype(np.float64)))
        out = (chi @ self.values).reshape(x.shape)
        return float(out) if out.ndim == 0 else out


def kantorovich_eval(f, w, kernel, x, tol=None, spec=DEFAULT_SPEC):
    if tol is not None:
        spec = spec.replace(abs_tol=tol)
    return KantorovichOperator(f, kernel, w, spec)(x)

"""Composite Gauss-Legendre quadrature on panels and over the real line.

The workhorse is a vectorised adaptive rule: every panel is integrated with an
``n``-point Gauss-Legendre rule and with the same rule on its two halves; the
difference is the panel error estimate and panels above their share of the
tolerance are bisected. Many independent integrals can be refined at once by
tagging panels with an owner index.

Integrals over the line grow a symmetric window ``[-T, T]`` geometrically and
collect the increment contributed by each slab ``T_j < |x| < T_{j+1}``. When
increments decay geometrically (power-law tails), the remaining tail is
extrapolated from the last ratio and the extrapolation drift is reported as
part of the error.

``sample_line`` keeps the nodes and function values of such a computation so
that derived integrands (``phi(lam * |g|)`` for many ``lam``) can be integrated
without evaluating ``g`` again.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ConfigError, NonFiniteIntegrand, QuadratureError


@dataclass(frozen=True)
class QuadratureSpec:
    nodes_per_panel: int = 16
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_panels: int = 1_000_000
    domain_growth_factor: float = 2.0
    max_growth_steps: int = 48

    def __post_init__(self):
        if self.nodes_per_panel < 2:
            raise ConfigError("nodes_per_panel must be >= 2")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ConfigError("quadrature tolerances must be strictly positive")
        if self.max_panels < 1 or self.max_growth_steps < 1:
            raise ConfigError("max_panels and max_growth_steps must be >= 1")
        if not self.domain_growth_factor > 1:
            raise ConfigError("domain_growth_factor must be > 1")

    def replace(self, **changes):
        values = {k: getattr(self, k) for k in self.__dataclass_fields__}
        unknown = set(changes) - set(values)
        if unknown:
            raise ConfigError(f"unknown quadrature fields: {sorted(unknown)}")
        values.update(changes)
        return QuadratureSpec(**values)


DEFAULT_SPEC = QuadratureSpec()


@lru_cache(maxsize=None)
def gauss_legendre(n):
    """Nodes and weights of the ``n``-point rule on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@dataclass
class QuadResult:
    value: float
    error: float
    n_panels: int


@dataclass
class Rule:
    """Accepted panels of an adaptive run, with stored integrand values.

    ``fine`` values sit on the two half-panel rules, ``coarse`` on the full
    panel rule; integrating any pointwise transform of them gives a value and
    a coarse/fine error estimate without new function evaluations.
    """

    a: np.ndarray
    b: np.ndarray
    coarse: np.ndarray
    fine: np.ndarray
    n: int

    @property
    def n_panels(self):
        return self.a.size

    def nodes(self):
        xg, _ = gauss_legendre(self.n)
        hw = 0.5 * (self.b - self.a)
        q = 0.5 * hw
        left = (self.a + q)[:, None] + q[:, None] * xg
        right = (self.b - q)[:, None] + q[:, None] * xg
        return np.concatenate([left, right], axis=1)

    def integrate(self, transform=None):
        """Return (value, error) of the integral of ``transform(values)``."""
        if self.a.size == 0:
            return 0.0, 0.0
        _, wg = gauss_legendre(self.n)
        fc = self.coarse if transform is None else transform(self.coarse)
        ff = self.fine if transform is None else transform(self.fine)
        hw = 0.5 * (self.b - self.a)
        with np.errstate(invalid="ignore", over="ignore"):
            qc = (fc @ wg) * hw
            qf = (ff @ np.concatenate([wg, wg])) * (0.5 * hw)
            return float(np.sum(qf)), float(np.sum(np.abs(qf - qc)))


def _empty_rule(n):
    z = np.zeros(0)
    return Rule(z, z, np.zeros((0, n)), np.zeros((0, 2 * n)), n)


def adaptive_panels(func, a, b, spec=DEFAULT_SPEC, owner=None, n_owner=None,
                    keep_rule=False, metric=None):
    """Adaptively integrate ``func`` over a batch of panels.

    Parameters
    ----------
    func : callable
        ``func(x, owner)`` with ``x`` of shape (P, m) and ``owner`` of shape
        (P,), returning values shaped like ``x``.
    a, b : array_like
        Initial panel edges, ``a < b`` elementwise.
    owner : array_like of int, optional
        Integral each panel contributes to (default: a single integral).
    metric : callable, optional
        Pointwise transform whose integral drives refinement (e.g. ``abs``, so
        that sign changes of ``func`` are resolved); values are stored raw.

    Returns
    -------
    values, errors : ndarray
        One entry per owner (integrals of ``metric(func)`` when given).
    rule : Rule or None
        Accepted panels with stored values, when ``keep_rule`` is set.
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if owner is None:
        owner = np.zeros(a.size, dtype=np.intp)
    owner = np.asarray(owner, dtype=np.intp).ravel()
    if n_owner is None:
        n_owner = int(owner.max()) + 1 if owner.size else 1
    n = spec.nodes_per_panel
    xg, wg = gauss_legendre(n)
    wf = np.concatenate([wg, wg])
    length = np.bincount(owner, weights=b - a, minlength=n_owner)
    length[length == 0] = 1.0
    values = np.zeros(n_owner)
    errors = np.zeros(n_owner)
    kept = []
    evaluated = 0
    while a.size:
        evaluated += a.size
        if evaluated > spec.max_panels:
            raise QuadratureError(
                f"adaptive quadrature exceeded max_panels={spec.max_panels}",
                estimate=values, residual=errors)
        mid = 0.5 * (a + b)
        hw = 0.5 * (b - a)
        q = 0.5 * hw
        xc = mid[:, None] + hw[:, None] * xg
        xf = np.concatenate([(a + q)[:, None] + q[:, None] * xg,
                             (b - q)[:, None] + q[:, None] * xg], axis=1)
        fc = np.asarray(func(xc, owner), dtype=np.float64)
        ff = np.asarray(func(xf, owner), dtype=np.float64)
        if metric is None:
            qc = (fc @ wg) * hw
            qf = (ff @ wf) * q
        else:
            qc = (metric(fc) @ wg) * hw
            qf = (metric(ff) @ wf) * q
        with np.errstate(invalid="ignore"):
            err = np.abs(qf - qc)
        if not (np.all(np.isfinite(qf)) and np.all(np.isfinite(qc))):
            bad = ~(np.isfinite(qf) & np.isfinite(qc))
            raise NonFiniteIntegrand("integrand is not finite on "
                                  f"{int(bad.sum())} panel(s)",
                                  estimate=values, residual=np.inf)
        total = values + np.bincount(owner, weights=qf, minlength=n_owner)
        scale = np.maximum(spec.abs_tol, spec.rel_tol * np.abs(total))
        tol = scale[owner] * (b - a) / length[owner]
        tiny = hw <= 64 * np.finfo(float).eps * np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
        ok = (err <= tol) | tiny
        values += np.bincount(owner[ok], weights=qf[ok], minlength=n_owner)
        errors += np.bincount(owner[ok], weights=err[ok], minlength=n_owner)
        if keep_rule and ok.any():
            kept.append((a[ok], b[ok], fc[ok], ff[ok]))
        redo = ~ok
        a, b, mid_r = a[redo], b[redo], mid[redo]
        own = owner[redo]
        a, b = np.concatenate([a, mid_r]), np.concatenate([mid_r, b])
        owner = np.concatenate([own, own])
    rule = None
    if keep_rule:
        if kept:
            rule = Rule(np.concatenate([k[0] for k in kept]),
                        np.concatenate([k[1] for k in kept]),
                        np.concatenate([k[2] for k in kept]),
                        np.concatenate([k[3] for k in kept]), n)
        else:
            rule = _empty_rule(n)
    return values, errors, rule


def split_interval(a, b, breakpoints=(), max_width=None):
    """Panel edges covering [a, b], cut at breakpoints and at most ``max_width`` wide."""
    cuts = [a, b]
    cuts.extend(float(p) for p in breakpoints if a < p < b)
    cuts = np.unique(np.asarray(cuts, dtype=np.float64))
    if max_width is None:
        return cuts[:-1], cuts[1:]
    lo, hi = [], []
    for x0, x1 in zip(cuts[:-1], cuts[1:]):
        m = max(1, int(math.ceil((x1 - x0) / max_width)))
        e = np.linspace(x0, x1, m + 1)
        lo.append(e[:-1])
        hi.append(e[1:])
    return np.concatenate(lo), np.concatenate(hi)


def _plain(f):
    return lambda x, owner: f(x)


def integrate_panel(f, a, b, spec=DEFAULT_SPEC, breakpoints=(), max_width=None):
    """Integrate ``f`` over [a, b] with adaptive composite Gauss-Legendre.

    Raises QuadratureError (carrying the best estimate) once ``max_panels``
    panel evaluations have been spent without meeting the tolerance.
    """
    if not a < b:
        raise ConfigError(f"integrate_panel needs a < b, got [{a}, {b}]")
    lo, hi = split_interval(float(a), float(b), breakpoints, max_width)
    try:
        v, e, _ = adaptive_panels(_plain(f), lo, hi, spec)
    except QuadratureError as exc:
        est = exc.estimate
        raise QuadratureError(str(exc), estimate=None if est is None else float(est[0]),
                              residual=exc.residual) from None
    return QuadResult(float(v[0]), float(e[0]), lo.size)


# ---------------------------------------------------------------------------
# integrals over the line
# ---------------------------------------------------------------------------

_Q_DIVERGE = 0.97


@dataclass
class TailSum:
    value: float
    error: float
    converged: bool
    diverged: bool
    last_increment: float


def _growing(incs, total):
    """Last two slab ratios at least _Q_DIVERGE, with increments above roundoff."""
    if len(incs) < 3 or incs[-2] == 0 or incs[-3] == 0:
        return False
    if abs(incs[-1]) <= 1e-14 * abs(total):
        return False
    return incs[-1] / incs[-2] >= _Q_DIVERGE and incs[-2] / incs[-3] >= _Q_DIVERGE


def extrapolate_tail(core, increments, abs_tol, rel_tol):
    """Sum a core integral and slab increments, extrapolating the tail.

    Convergence is declared when two consecutive increments are below the
    tolerance, or when two consecutive geometric extrapolations (with stable
    ratio) agree within it. The sum is flagged divergent when the last two
    increment ratios are at least 0.97; that test is checked first because it
    does not depend on the scale of the integrand.
    """
    incs = list(increments)
    total = core + sum(incs)
    if _growing(incs, total):
        # scale invariant, so it takes precedence over the absolute tolerance
        return TailSum(total, math.inf, False, True, incs[-1])
    s = core
    prev_est = None
    last = 0.0
    for j, d in enumerate(incs):
        s += d
        last = d
        tol = max(abs_tol, rel_tol * abs(s))
        if j >= 1 and abs(d) <= tol and abs(incs[j - 1]) <= tol:
            return TailSum(s, abs(d) + abs(incs[j - 1]), True, False, d)
        est = None
        if j >= 2 and d * incs[j - 1] > 0 and incs[j - 1] * incs[j - 2] > 0:
            q = d / incs[j - 1]
            qp = incs[j - 1] / incs[j - 2]
            if q < _Q_DIVERGE and abs(q - qp) <= 0.1:
                est = s + d * q / (1.0 - q)
        if est is not None and prev_est is not None:
            drift = abs(est - prev_est)
            if drift <= tol:
                return TailSum(est, drift, True, False, d)
        prev_est = est
    if prev_est is not None:
        err = abs(prev_est - s)
        s = prev_est
    else:
        err = abs(last) if incs else 0.0
    return TailSum(s, err, False, False, last)


@dataclass
class LineSamples:
    """Frozen quadrature of a function over the line (core plus slabs)."""

    core: Rule
    slabs: list
    radii: list
    spec: QuadratureSpec
    exhausted: bool = False
    n_panels: int = 0

    def integrate(self, transform=None, abs_tol=None, rel_tol=None):
        """Integrate ``transform(values)`` on the stored rule."""
        abs_tol = self.spec.abs_tol if abs_tol is None else abs_tol
        rel_tol = self.spec.rel_tol if rel_tol is None else rel_tol
        core, core_err = self.core.integrate(transform)
        incs, inc_err = [], 0.0
        for slab in self.slabs:
            v, e = slab.integrate(transform)
            incs.append(v)
            inc_err += e
        t = extrapolate_tail(core, incs, abs_tol, rel_tol)
        return LineIntegral(t.value, t.error + core_err + inc_err, self.radii[-1],
                            t.last_increment, t.diverged, t.converged, self.n_panels)

    def max_abs(self, transform=None):
        best = 0.0
        for rule in [self.core] + self.slabs:
            if rule.n_panels:
                v = rule.fine if transform is None else transform(rule.fine)
                best = max(best, float(np.max(np.abs(v))))
        return best


@dataclass
class LineIntegral:
    value: float
    error: float
    radius: float
    last_increment: float
    diverged: bool
    converged: bool = True
    n_panels: int = 0


def sample_line(f, spec=DEFAULT_SPEC, breakpoints=(), max_width=None, t0=None,
                metric=None, max_width_far=None):
    """Adaptively sample ``f`` over the real line.

    The core window is ``[-t0, t0]`` (default: enough to contain every
    breakpoint, at least 1); it grows by ``spec.domain_growth_factor`` until the
    integral of ``metric(f)`` (default ``f``) has converged or diverged.
    ``max_width`` bounds panel widths (resolving oscillation); ``max_width_far``
    overrides it on the slabs if given.
    """
    bps = np.asarray([float(p) for p in breakpoints], dtype=np.float64)
    if t0 is None:
        t0 = max(1.0, float(np.max(np.abs(bps))) * 1.0001) if bps.size else 1.0
    func = _plain(f)
    transform = metric
    lo, hi = split_interval(-t0, t0, bps, max_width)
    _, _, core = adaptive_panels(func, lo, hi, spec, keep_rule=True, metric=metric)
    n_panels = core.n_panels
    core_val, _ = core.integrate(transform)
    slabs, radii, incs = [], [t0], []
    far_width = max_width if max_width_far is None else max_width_far
    radius = t0
    exhausted = False
    run_div = 0
    for _ in range(spec.max_growth_steps):
        nxt = radius * spec.domain_growth_factor
        r_lo, r_hi = split_interval(radius, nxt, [p for p in bps if p > radius], far_width)
        l_lo, l_hi = split_interval(-nxt, -radius, [p for p in bps if p < -radius], far_width)
        try:
            _, _, slab = adaptive_panels(func, np.concatenate([l_lo, r_lo]),
                                         np.concatenate([l_hi, r_hi]),
                                         spec.replace(max_panels=max(1, spec.max_panels - n_panels)),
                                         keep_rule=True, metric=metric)
        except QuadratureError:
            exhausted = True
            break
        n_panels += slab.n_panels
        slabs.append(slab)
        radius = nxt
        radii.append(radius)
        incs.append(slab.integrate(transform)[0])
        t = extrapolate_tail(core_val, incs, spec.abs_tol, spec.rel_tol)
        if t.converged:
            break
        if len(incs) >= 2 and incs[-2] != 0 and incs[-1] / incs[-2] >= 1.0:
            run_div += 1
            if run_div >= 8:
                break
        else:
            run_div = 0
    return LineSamples(core, slabs, radii, spec, exhausted, n_panels)


def integrate_line(f, spec=DEFAULT_SPEC, breakpoints=(), max_width=None, t0=None):
    """Integrate ``f`` over the whole real line.

    Returns a LineIntegral; ``diverged`` is set when slab increments stopped
    shrinking. Raises QuadratureError when neither convergence nor divergence
    could be established within the growth and panel budgets.
    """
    samples = sample_line(f, spec, breakpoints, max_width, t0)
    res = samples.integrate()
    if not res.converged and not res.diverged:
        raise QuadratureError(
            f"line integral not converged at T={res.radius:g} "
            f"(last increment {res.last_increment:.3e})",
            estimate=res.value, residual=res.error)
    return res


@dataclass
class FourierValue:
    value: complex
    error: float
    diverged: bool = False


def numerical_fourier_transform(f, v, spec=DEFAULT_SPEC, breakpoints=(), max_width=None):
    """Compute the integral of f(x) exp(-i x v) over the line.

    Panels are at most ``pi / |v|`` wide so that every half-oscillation of the
    exponential is resolved.
    """
    v = float(v)
    width = max_width
    if v != 0.0:
        osc = math.pi / abs(v)
        width = osc if width is None else min(width, osc)
    re = integrate_line(lambda x: f(x) * np.cos(v * x), spec, breakpoints, width)
    if v == 0.0:
        im_val, im_err, im_div = 0.0, 0.0, False
    else:
        im = integrate_line(lambda x: -f(x) * np.sin(v * x), spec, breakpoints, width)
        im_val, im_err, im_div = im.value, im.error, im.diverged
    return FourierValue(complex(re.value, im_val), re.error + im_err,
                        re.diverged or im_div)


# ---------------------------------------------------------------------------
# Irwin-Hall weight
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IrwinHallWeight:
    """Density of the sum of ``r`` independent uniforms on [0, h]."""

    r: int
    h: float
    breakpoints: tuple = field(init=False)

    def __post_init__(self):
        if self.r < 1 or not self.h > 0:
            raise ConfigError("Irwin-Hall weight needs r >= 1 and h > 0")
        object.__setattr__(self, "breakpoints",
                           tuple(j * self.h for j in range(self.r + 1)))

    def __call__(self, s):
        return irwin_hall_density(self.r, self.h, s)


def irwin_hall_density(r, h, s):
    """Density at ``s`` of a sum of ``r`` i.i.d. uniforms on [0, h].

    Classical piecewise form ``sum_{j <= x} (-1)^j C(r, j) (x - j)^(r-1) / (r-1)!``
    with ``x = s / h``; zero outside [0, r h].
    """
    if r < 1 or not h > 0:
        raise ConfigError("irwin_hall_density needs r >= 1 and h > 0")
    s = np.asarray(s, dtype=np.float64)
    x = s / h
    out = np.zeros_like(x)
    inside = (x >= 0.0) & (x <= r)
    xi = x[inside]
    acc = np.zeros_like(xi)
    for j in range(r):
        t = xi - j
        if r == 1:
            term = (t >= 0.0).astype(np.float64)
        else:
            term = np.where(t > 0.0, t, 0.0) ** (r - 1)
        acc += (-1) ** j * math.comb(r, j) * term
    out[inside] = acc / (math.factorial(r - 1) * h)
    if out.ndim == 0:
        return float(out)
    return out

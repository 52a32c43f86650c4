"""phi-functions, the modular I^phi, the Luxemburg norm and membership probing.

phi-function ids::

    power:p=<p>                  u^p                  (p >= 1)
    zygmund:alpha=<a>,beta=<b>   u^a log^b(e + u)     (a >= 1, b > 0)
    exp:alpha=<a>                exp(u^a) - 1         (a > 0)

Modulars are integrals over the whole line. Functions that are integrated many
times with different scalings (Luxemburg bisection, lambda ladders) are
sampled once with ``sample_function`` and the samples are reused.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, MembershipError, NonFiniteIntegrand
from .kernels import m0_upper, parse_id
from .quadrature import DEFAULT_SPEC, sample_line
from .sampling import SteklovOperator
from .signals import make_signal


@dataclass(frozen=True)
class PhiFunction:
    family: str
    a: float
    b: float = 0.0

    def __post_init__(self):
        if self.family == "power" and not self.a >= 1:
            raise ConfigError(f"power phi needs p >= 1, got {self.a}")
        if self.family == "zygmund" and not (self.a >= 1 and self.b > 0):
            raise ConfigError("zygmund phi needs alpha >= 1 and beta > 0")
        if self.family == "exp" and not self.a > 0:
            raise ConfigError("exp phi needs alpha > 0")
        if self.family not in ("power", "zygmund", "exp"):
            raise ConfigError(f"unknown phi family {self.family!r}")

    @property
    def id(self):
        f = lambda v: str(int(v)) if float(v).is_integer() else repr(float(v))
        if self.family == "power":
            return f"power:p={f(self.a)}"
        if self.family == "zygmund":
            return f"zygmund:alpha={f(self.a)},beta={f(self.b)}"
        return f"exp:alpha={f(self.a)}"

    @property
    def delta2(self):
        return self.family != "exp"

    @property
    def convex(self):
        # exp(u^a) - 1 behaves like u^a at the origin, concave for a < 1
        return self.family != "exp" or self.a >= 1

    def __call__(self, u):
        u = np.asarray(u, dtype=np.float64)
        if self.family == "power":
            out = u ** self.a
        elif self.family == "zygmund":
            out = u ** self.a * np.log(math.e + u) ** self.b
        else:
            with np.errstate(over="ignore"):
                out = np.expm1(u ** self.a)
        return float(out) if out.ndim == 0 else out


def parse_phi(text):
    if isinstance(text, PhiFunction):
        return text
    name, params = parse_id(text)
    keys = {"power": ("p",), "zygmund": ("alpha", "beta"), "exp": ("alpha",)}
    if name not in keys:
        raise ConfigError(f"unknown phi family {name!r}; known: {sorted(keys)}")
    if set(params) != set(keys[name]):
        raise ConfigError(f"phi {name!r} takes exactly {list(keys[name])}, got {sorted(params)}")
    vals = [params[k] for k in keys[name]]
    return PhiFunction(name, *vals)


def phi_eval(phi, u):
    """phi(u) for u >= 0."""
    if np.any(np.asarray(u) < 0):
        raise ValueError("phi is evaluated on nonnegative arguments only")
    return parse_phi(phi)(u)


@dataclass
class ModularValue:
    value: float
    lam: float
    achieved_error: float
    infinite: bool = False


def _phi_transform(phi, lam):
    return lambda v: phi(lam * np.abs(v))


def _hints(g):
    """Quadrature hints (breakpoints, max panel width, core radius) for g."""
    if isinstance(g, SteklovOperator):
        bps = tuple(g.breakpoints()) + tuple(g.signal.breakpoints)
        sup = g.support()
        B = g.signal.support_bound or 0.0
        t0 = max(1.0, B + 1.0) if sup is None else max(1.0, abs(sup[0]), abs(sup[1]))
        return bps, (None if g.kernel.compact else g.max_width), t0
    bps = tuple(getattr(g, "breakpoints", ()))
    t0 = getattr(g, "support_bound", None)
    return bps, None, (max(1.0, t0) if t0 is not None else None)


def sample_function(g, spec=DEFAULT_SPEC, breakpoints=None, max_width=None, t0=None):
    """Sample |g| over the line for repeated modular evaluations.

    The window grows until the integral of |g| converges. For convex phi the
    tail of phi(lam |g|) is dominated by a multiple of the tail of |g|.
    """
    hb, hw, ht = _hints(g)
    bps = hb if breakpoints is None else breakpoints
    return sample_line(g, spec, bps, max_width if max_width is not None else hw,
                       t0 if t0 is not None else ht, metric=np.abs)


def modular_from_samples(phi, samples, lam=1.0):
    phi = parse_phi(phi)
    res = samples.integrate(_phi_transform(phi, lam))
    infinite = res.diverged or not math.isfinite(res.value)
    if infinite:
        return ModularValue(math.inf, lam, math.inf, True)
    return ModularValue(max(res.value, 0.0), lam, res.error)


def modular(phi, g, spec=DEFAULT_SPEC, lam=1.0, breakpoints=None, max_width=None, t0=None):
    """I^phi[lam g] = integral of phi(lam |g(x)|) over the line."""
    phi = parse_phi(phi)
    hb, hw, ht = _hints(g)
    bps = hb if breakpoints is None else breakpoints
    tr = _phi_transform(phi, lam)
    try:
        samples = sample_line(g, spec, bps, max_width if max_width is not None else hw,
                              t0 if t0 is not None else ht, metric=tr)
    except NonFiniteIntegrand:
        # phi(lam |g|) overflows double range somewhere
        return ModularValue(math.inf, lam, math.inf, True)
    res = samples.integrate(tr)
    if res.diverged or not math.isfinite(res.value):
        return ModularValue(math.inf, lam, math.inf, True)
    return ModularValue(max(res.value, 0.0), lam, res.error)


@dataclass
class LuxemburgResult:
    value: float
    error: float
    iterations: int


def luxemburg_from_samples(phi, samples, tol=1e-8):
    """inf{lam > 0 : I^phi[g / lam] <= 1} by bisection on stored samples."""
    phi = parse_phi(phi)
    if not phi.convex:
        raise ConfigError(f"{phi.id} is not convex; the Luxemburg norm here assumes convex phi")
    if samples.max_abs() == 0.0:
        return LuxemburgResult(0.0, 0.0, 0)

    def mod(lam):
        return modular_from_samples(phi, samples, 1.0 / lam)

    cap = 2.0 ** 64
    lam = 1.0
    it = 0
    m = mod(lam)
    if m.value <= 1.0:
        hi = lam
        while True:
            lam *= 0.5
            it += 1
            if lam < 1.0 / cap:
                return LuxemburgResult(0.0, lam, it)
            if mod(lam).value > 1.0:
                lo = lam
                break
            hi = lam
    else:
        lo = lam
        while True:
            lam *= 2.0
            it += 1
            if lam > cap:
                raise MembershipError(f"I^{phi.id}[g/lam] > 1 for every lam up to 2^64"
                                      + ("; modular is infinite" if m.infinite else ""))
            if mod(lam).value <= 1.0:
                hi = lam
                break
            lo = lam
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        it += 1
        if mod(mid).value <= 1.0:
            hi = mid
        else:
            lo = mid
    # lam -> I[g/lam] is smooth inside the final bracket; interpolate the crossing
    m_lo, m_hi = mod(lo), mod(hi)
    est = hi
    if not m_lo.infinite and m_lo.value > m_hi.value:
        est = hi - (1.0 - m_hi.value) * (hi - lo) / (m_lo.value - m_hi.value)
        est = min(hi, max(lo, est))
    # sensitivity of the crossing to the modular's own quadrature error
    slope = (m_lo.value - m_hi.value) / (hi - lo) if not m_lo.infinite else math.inf
    err = (hi - lo) + (m_hi.achieved_error / slope if slope > 0 else 0.0)
    return LuxemburgResult(est, err, it)


def luxemburg_norm(phi, g, tol=1e-8, spec=DEFAULT_SPEC, breakpoints=None, max_width=None):
    """||g||_phi for convex phi; see ``luxemburg_from_samples``."""
    samples = sample_function(g, spec, breakpoints, max_width)
    return luxemburg_from_samples(phi, samples, tol).value


def find_modular_lambda(phi, g, budget=20, spec=DEFAULT_SPEC, samples=None):
    """Largest lam in 1, 1/2, ..., 2^-budget with I^phi[lam g] finite, else None."""
    if budget < 1:
        raise ConfigError("budget must be >= 1")
    phi = parse_phi(phi)
    for j in range(budget + 1):
        lam = 2.0 ** (-j)
        if samples is not None:
            m = modular_from_samples(phi, samples, lam)
        else:
            m = modular(phi, g, spec, lam)
        if not m.infinite:
            return lam
    return None


@dataclass
class InequalityCheck:
    phi: str
    signal: str
    kernel: str
    r: int
    w: float
    lam: float
    lhs: float
    rhs: float
    lhs_error: float
    rhs_error: float
    passed: bool
    inconclusive: bool

    @property
    def slack(self):
        return self.rhs - self.lhs


def check_modular_inequality(phi, f, kernel, params, lam, spec=DEFAULT_SPEC):
    """Compare I^phi[lam S_w^r f] with (||chi||_1 / M_0) r I^phi[lam (2^r-1) M_0 f].

    The check passes when LHS <= RHS (1 + 1e-6) + 1e-8; an infinite RHS means
    the hypothesis is unmet and the check is inconclusive.
    """
    phi = parse_phi(phi)
    f = make_signal(f)
    op = SteklovOperator(f, kernel, params.r, params.w, spec)
    m0 = m0_upper(op.kernel)
    r = params.r
    rhs_mod = modular(phi, f, spec, lam * (2 ** r - 1) * m0)
    base = dict(phi=phi.id, signal=f.id, kernel=op.kernel.id, r=r, w=params.w, lam=lam)
    if rhs_mod.infinite:
        return InequalityCheck(**base, lhs=math.nan, rhs=math.inf, lhs_error=math.nan,
                               rhs_error=math.inf, passed=False, inconclusive=True)
    factor = op.kernel.l1_norm / m0 * r
    rhs = factor * rhs_mod.value
    lhs_mod = modular(phi, op, spec, lam)
    lhs = lhs_mod.value
    passed = (not lhs_mod.infinite) and lhs <= rhs * (1 + 1e-6) + 1e-8
    return InequalityCheck(**base, lhs=lhs, rhs=rhs, lhs_error=lhs_mod.achieved_error,
                           rhs_error=factor * rhs_mod.achieved_error, passed=passed,
                           inconclusive=False)

"""Discrete kernels: registry, evaluation, Fourier transforms, moments, certificates.

Registered families (string ids)::

    fejer                       F(x) = 1/2 sinc^2(x/2)
    jackson:n=<int>,alpha=<r>   J_n(x) = c_n sinc^{2n}(x / (2 n pi alpha))
    bspline:n=<int>             central B-spline M_n, support [-n/2, n/2]

with ``sinc(x) = sin(pi x)/(pi x)``. Every id also accepts ``scale=<real>``,
which multiplies the kernel (``bspline:n=2,scale=2`` is a deliberately broken
kernel with transform 2 at the origin).
"""

import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from . import _accel
from .errors import ConfigError, NumericalError
from .quadrature import DEFAULT_SPEC, integrate_line, numerical_fourier_transform

DEFAULT_U_POINTS = 257


@dataclass(frozen=True)
class CompactInterval:
    a: float
    b: float

    @property
    def radius(self):
        return max(abs(self.a), abs(self.b))


@dataclass(frozen=True)
class DecayExponent:
    """|chi(x)| <= C |x|^-d for |x| >= 1."""

    d: float
    constant: float


def parse_id(text):
    """Split ``"name:k=v,k=v"`` into the name and a dict of float values."""
    text = text.strip()
    name, _, rest = text.partition(":")
    params = {}
    if rest:
        for item in rest.split(","):
            key, sep, val = item.partition("=")
            if not sep or not key.strip():
                raise ConfigError(f"malformed parameter {item!r} in {text!r}")
            try:
                params[key.strip()] = float(val)
            except ValueError:
                raise ConfigError(f"parameter {key.strip()!r} in {text!r} is not a number") from None
    return name.strip().lower(), params


def _fmt(v):
    return str(int(v)) if float(v).is_integer() else repr(float(v))


@dataclass(frozen=True, eq=False)
class Kernel:
    """A discrete kernel chi with its metadata.

    ``code``/``pvec`` select the accelerated evaluation path; tabulated kernels
    leave ``code`` as None and evaluate through ``table``.
    """

    name: str
    params: dict
    support: object
    l1_norm: float
    code: int = None
    pvec: tuple = ()
    ft_closed_form: object = None
    knots: tuple = ()
    table: tuple = None

    @property
    def id(self):
        if not self.params:
            return self.name
        return self.name + ":" + ",".join(f"{k}={_fmt(v)}" for k, v in self.params.items())

    @property
    def compact(self):
        return isinstance(self.support, CompactInterval)

    @property
    def half_width(self):
        """Support radius for compact kernels, -1 otherwise."""
        return self.support.radius if self.compact else -1.0

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.code is None:
            xs, ys = self.table
            out = np.interp(x, xs, ys, left=0.0, right=0.0)
        else:
            out = _accel.kernel_values(self.code, np.asarray(self.pvec), x)
        return float(out) if out.ndim == 0 else out

    def lattice_sums(self, u, power, radius, absolute):
        u = np.asarray(u, dtype=np.float64).ravel()
        if self.code is not None:
            return _accel.lattice_sums(self.code, np.asarray(self.pvec), u, power,
                                       int(radius), absolute)
        centers = np.rint(u)
        offs = np.arange(-radius, radius + 1, dtype=np.float64)
        t = u[:, None] - (centers[:, None] + offs[None, :])
        chi = self(t)
        if absolute:
            return np.sum((np.abs(t) ** power if power else 1.0) * np.abs(chi), axis=1)
        return np.sum((t ** int(power) if power else 1.0) * chi, axis=1)

    def series(self, x, w, k0, coef):
        """Evaluate sum_j coef[j] chi(w x - (k0 + j))."""
        if self.code is not None:
            return _accel.series_eval(self.code, np.asarray(self.pvec), self.half_width,
                                      x, w, k0, coef)
        x = np.asarray(x, dtype=np.float64)
        ks = k0 + np.arange(len(coef), dtype=np.float64)
        return (self(w * x.ravel()[:, None] - ks[None, :]) @ np.asarray(coef)).reshape(x.shape)

    def tail_bound(self, radius, alpha=0.0):
        """Bound on sum over |k - round(u)| > radius of |u-k|^alpha |chi(u-k)|.

        Uses the envelope C t^(alpha - d) and the integral test; infinite when
        alpha >= d - 1. Zero for compact support once the window covers it.
        """
        if self.compact:
            return 0.0 if radius >= self.support.radius + 1 else math.inf
        d, c = self.support.d, self.support.constant
        e = d - alpha - 1.0
        if e <= 0 or radius < 3:
            return math.inf
        return 2.0 * c * (radius - 1.5) ** (-e) / e

    def truncation_radius(self, tol, alpha=0.0):
        """Smallest window radius whose tail bound is below ``tol``."""
        if self.compact:
            return int(math.ceil(self.support.radius)) + 1
        d, c = self.support.d, self.support.constant
        e = d - alpha - 1.0
        if e <= 0:
            raise NumericalError(f"{self.id}: moment of order {alpha} has no decay-based tail bound")
        r = 1.5 + (2.0 * c / (e * tol)) ** (1.0 / e)
        return max(3, int(math.ceil(r)))


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------


def _decay_constant(code, pvec, d):
    x = np.arange(1.0, 2000.0, 0.005)
    vals = np.abs(_accel.kernel_values_numpy(code, np.asarray(pvec), x)) * x ** d
    return 1.05 * float(vals.max())


@lru_cache(maxsize=None)
def sinc_power_integral(m):
    """Integral of sinc(t)^m over the real line, computed by quadrature."""
    res = integrate_line(lambda t: np.sinc(t) ** m, DEFAULT_SPEC.replace(rel_tol=1e-12, abs_tol=1e-13),
                         max_width=0.5)
    if not res.converged:
        raise NumericalError("sinc power integral did not converge", res.value, res.error)
    return res.value


def jackson_constant(n, alpha):
    """Normalisation c_n = 1 / integral of sinc^{2n}(u / (2 n pi alpha))."""
    return 1.0 / (2.0 * n * math.pi * alpha * sinc_power_integral(2 * n))


def _bspline_ft(n, scale):
    return lambda v: scale * np.sinc(np.asarray(v, dtype=np.float64) / (2 * math.pi)) ** n


def _fejer_ft(scale):
    def ft(v):
        v = np.abs(np.asarray(v, dtype=np.float64))
        return scale * np.where(v <= math.pi, 1.0 - v / math.pi, 0.0)
    return ft


def fejer(scale=1.0):
    pvec = (0.0, 0.0, 0.0, float(scale))
    params = {} if scale == 1.0 else {"scale": scale}
    return Kernel("fejer", params, DecayExponent(2.0, _decay_constant(_accel.FEJER, pvec, 2.0)),
                  abs(scale), _accel.FEJER, pvec, _fejer_ft(scale))


def jackson(n, alpha, scale=1.0):
    if n < 1 or int(n) != n:
        raise ConfigError(f"Jackson order n must be a positive integer, got {n}")
    if alpha < 1:
        raise ConfigError(f"Jackson parameter alpha must be >= 1, got {alpha}")
    n = int(n)
    pvec = (float(n), float(alpha), jackson_constant(n, alpha), float(scale))
    params = {"n": n, "alpha": alpha}
    if scale != 1.0:
        params["scale"] = scale
    d = 2.0 * n
    return Kernel("jackson", params, DecayExponent(d, _decay_constant(_accel.JACKSON, pvec, d)),
                  abs(scale), _accel.JACKSON, pvec, None)


def bspline(n, scale=1.0):
    if n < 1 or int(n) != n:
        raise ConfigError(f"B-spline order n must be a positive integer, got {n}")
    if n > 12:
        raise ConfigError("B-spline orders above 12 lose accuracy in truncated-power form")
    n = int(n)
    params = {"n": n}
    if scale != 1.0:
        params["scale"] = scale
    knots = tuple(-0.5 * n + j for j in range(n + 1))
    return Kernel("bspline", params, CompactInterval(-0.5 * n, 0.5 * n), abs(scale),
                  _accel.BSPLINE, (float(n), 0.0, 0.0, float(scale)), _bspline_ft(n, scale), knots)


def tabulated(name, xs, ys):
    """Piecewise-linear kernel through (xs, ys), zero outside the table."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 2 or np.any(np.diff(xs) <= 0):
        raise ConfigError("tabulated kernel needs matching, strictly increasing samples")
    if xs[0] > 0 or xs[-1] < 0:
        raise ConfigError("tabulated kernel support must contain 0")
    l1 = float(np.trapezoid(np.abs(ys), xs)) if not np.any(np.diff(np.sign(ys))) else None
    k = Kernel(name, {}, CompactInterval(float(xs[0]), float(xs[-1])), 0.0,
               knots=tuple(xs), table=(xs, ys))
    if l1 is None:
        l1 = integrate_line(lambda x: np.abs(k(x)), breakpoints=xs).value
    object.__setattr__(k, "l1_norm", l1)
    return k


_FAMILIES = {
    "fejer": (fejer, {"scale"}),
    "jackson": (jackson, {"n", "alpha", "scale"}),
    "bspline": (bspline, {"n", "scale"}),
}


@lru_cache(maxsize=64)
def get_kernel(kernel_id):
    """Build a kernel from its registry id, e.g. ``"jackson:n=2,alpha=1"``."""
    name, params = parse_id(kernel_id)
    if name not in _FAMILIES:
        raise ConfigError(f"unknown kernel {name!r}; known: {sorted(_FAMILIES)}")
    factory, allowed = _FAMILIES[name]
    extra = set(params) - allowed
    if extra:
        raise ConfigError(f"kernel {name!r} does not take {sorted(extra)}")
    if name == "jackson" and not {"n", "alpha"} <= set(params):
        raise ConfigError("jackson kernel needs n and alpha")
    if name == "bspline" and "n" not in params:
        raise ConfigError("bspline kernel needs n")
    return factory(**params)


def eval_kernel(kernel, x):
    """chi(x); accepts a Kernel or a registry id."""
    if isinstance(kernel, str):
        kernel = get_kernel(kernel)
    return kernel(x)


REGISTERED = ("fejer", "jackson:n=2,alpha=1", "bspline:n=1", "bspline:n=2",
              "bspline:n=3", "bspline:n=4")


# ---------------------------------------------------------------------------
# transforms and moments
# ---------------------------------------------------------------------------


def kernel_fourier(kernel, v, tol=1e-10):
    """Fourier transform chi-hat(v) = integral chi(x) exp(-i x v) dx (real part).

    Closed forms are used when the family has one; otherwise the transform is
    computed numerically and its imaginary part must stay below ``tol``.
    """
    if kernel.ft_closed_form is not None:
        return float(kernel.ft_closed_form(v))
    spec = DEFAULT_SPEC.replace(abs_tol=tol, rel_tol=min(DEFAULT_SPEC.rel_tol, tol))
    res = numerical_fourier_transform(kernel, v, spec, breakpoints=kernel.knots)
    if res.diverged:
        raise NumericalError(f"Fourier integral of {kernel.id} diverged at v={v}",
                             res.value.real, res.error)
    if abs(res.value.imag) > tol:
        raise NumericalError(f"imaginary part {res.value.imag:.3e} of an even kernel's "
                             f"transform exceeds {tol:g}", res.value.real, abs(res.value.imag))
    return res.value.real


def discrete_algebraic_moment(kernel, j, u, radius):
    """Truncated m_j(chi, u) = sum over |k - round(u)| <= radius of (u-k)^j chi(u-k)."""
    if radius < 1 or j < 0 or int(j) != j:
        raise ConfigError("need radius >= 1 and integer j >= 0")
    scalar = np.ndim(u) == 0
    out = kernel.lattice_sums(np.atleast_1d(u), int(j), int(radius), False)
    return float(out[0]) if scalar else out


@dataclass
class MomentEstimate:
    alpha: float
    value: float
    tail_bound: float
    diverged: bool
    radius: int

    @property
    def upper(self):
        return self.value + self.tail_bound


def discrete_absolute_moment(kernel, alpha, u_grid=None, radius=None, doublings=3):
    """Estimate M_alpha(chi) = sup_u sum_k |u-k|^alpha |chi(u-k)|.

    The sup is taken over ``u_grid`` (one period suffices). For kernels without
    compact support the window is doubled ``doublings`` times; if the
    increments stop shrinking the moment is reported as divergent.
    """
    if alpha < 0:
        raise ConfigError("moment order must be >= 0")
    if u_grid is None:
        u_grid = np.linspace(0.0, 1.0, DEFAULT_U_POINTS)
    u_grid = np.asarray(u_grid, dtype=np.float64)
    if u_grid.size == 0:
        raise ConfigError("u_grid must be nonempty")
    if kernel.compact:
        r = kernel.truncation_radius(0.0)
        if radius is not None:
            r = max(r, int(radius))
        val = float(kernel.lattice_sums(u_grid, alpha, r, True).max())
        return MomentEstimate(alpha, val, 0.0, False, r)
    r = int(radius) if radius is not None else min(kernel.truncation_radius(1e-6, alpha)
                                                if alpha < kernel.support.d - 1 else 1000,
                                                200_000)
    sums = []
    for i in range(doublings + 1):
        sums.append(float(kernel.lattice_sums(u_grid, alpha, r << i, True).max()))
    incs = np.diff(sums)
    r_final = r << doublings
    ratios = [incs[i + 1] / incs[i] for i in range(len(incs) - 1) if incs[i] > 0]
    shrinking = all(q < 0.97 for q in ratios) if ratios else True
    bound = kernel.tail_bound(r_final, alpha)
    if not shrinking or not math.isfinite(bound):
        if shrinking and ratios:
            q = ratios[-1]
            bound = incs[-1] * q / (1.0 - q)
        else:
            return MomentEstimate(alpha, math.inf, math.inf, True, r_final)
    return MomentEstimate(alpha, sums[-1], bound, False, r_final)


def m0_upper(kernel, u_points=DEFAULT_U_POINTS, tol=1e-6):
    """M_0(chi) estimate plus its tail bound, used in operator bounds."""
    u = np.linspace(0.0, 1.0, u_points)
    r = kernel.truncation_radius(tol)
    val = float(kernel.lattice_sums(u, 0.0, r, True).max())
    return val + kernel.tail_bound(r)


# ---------------------------------------------------------------------------
# certification
# ---------------------------------------------------------------------------


@dataclass
class KernelCertificate:
    kernel_id: str
    partition_of_unity_ok: bool
    time_domain_ok: bool
    fourier_ok: bool
    max_pou_deviation: float
    ft_at_zero: float
    ft_zero_residuals: list
    moment_estimates: dict
    truncation_radius_used: int
    tolerances: dict = field(default_factory=dict)

    @property
    def checks_agree(self):
        return self.time_domain_ok == self.fourier_ok

    def to_dict(self):
        d = asdict(self)
        d["checks_agree"] = self.checks_agree
        d["ft_zero_residuals"] = [[int(k), float(r)] for k, r in self.ft_zero_residuals]
        return d


def certify_kernel(kernel, tol_pou=1e-6, tol_ft=1e-6, K_ft=5, u_points=DEFAULT_U_POINTS,
                   moment_orders=(0.0, 0.5, 1.0)):
    """Check the partition of unity in time domain and through the transform.

    Time domain: max over a u-grid of |m_0(chi, u) - 1| with the window chosen
    so the truncation tail is below tol_pou / 2. Transform: |chi-hat(0) - 1|
    and |chi-hat(2 pi k)| for 1 <= |k| <= K_ft, each below tol_ft.
    """
    if isinstance(kernel, str):
        kernel = get_kernel(kernel)
    if tol_pou <= 0 or tol_ft <= 0 or K_ft < 1:
        raise ConfigError("certify_kernel needs positive tolerances and K_ft >= 1")
    u = np.linspace(0.0, 1.0, u_points)
    radius = kernel.truncation_radius(0.5 * tol_pou)
    m0 = kernel.lattice_sums(u, 0, radius, False)
    dev = float(np.max(np.abs(m0 - 1.0)))
    time_ok = dev <= tol_pou
    ft_tol = min(1e-10, 1e-3 * tol_ft)
    ft0 = kernel_fourier(kernel, 0.0, ft_tol)
    residuals = []
    for k in list(range(-K_ft, 0)) + list(range(1, K_ft + 1)):
        residuals.append((k, abs(kernel_fourier(kernel, 2.0 * math.pi * k, ft_tol))))
    ft_ok = abs(ft0 - 1.0) <= tol_ft and all(r <= tol_ft for _, r in residuals)
    moments = {}
    for a in moment_orders:
        est = discrete_absolute_moment(kernel, a, u, radius=None if kernel.compact else 1000)
        moments[_fmt(a)] = {"value": None if est.diverged else est.value,
                            "tail_bound": None if est.diverged else est.tail_bound,
                            "diverged": est.diverged, "radius": est.radius}
    return KernelCertificate(
        kernel.id, time_ok and ft_ok, time_ok, ft_ok, dev, ft0, residuals, moments, radius,
        {"tol_pou": tol_pou, "tol_ft": tol_ft, "K_ft": K_ft, "u_points": u_points,
         "ft_quadrature_tol": ft_tol, "tail_bound_at_radius": kernel.tail_bound(radius)})

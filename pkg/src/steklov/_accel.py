"""Hot loops: kernel evaluation, lattice sums and sampling-series evaluation.

Each routine exists twice, as a numba ``@njit`` loop and as a vectorised numpy
fallback. The public names (``kernel_values``, ``lattice_sums``,
``series_eval``) bind to the numba versions unless numba is missing or the
environment variable ``STEKLOV_DISABLE_NUMBA`` is set to a non-empty value
other than ``0``. Both variants stay importable so they can be compared.

Registered kernel families are encoded as an integer code plus a float64
parameter vector ``p``; ``p[3]`` is always a multiplicative scale.

    FEJER    p = [0, 0, 0, scale]
    JACKSON  p = [n, alpha, c_n, scale]
    BSPLINE  p = [n, 0, 0, scale]
"""

import math
import os

import numpy as np

FEJER = 0
JACKSON = 1
BSPLINE = 2

_CHUNK = 1 << 22  # elements per broadcast block in the numpy fallback

_flag = os.environ.get("STEKLOV_DISABLE_NUMBA", "").strip()
try:
    import numba
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _flag in ("", "0")
BACKEND = "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# numpy fallback
# ---------------------------------------------------------------------------


def _bspline_np(n, x):
    x = np.asarray(x, dtype=np.float64)
    half = 0.5 * n
    out = np.zeros_like(x)
    inside = (x >= -half) & (x <= half)
    xi = x[inside]
    acc = np.zeros_like(xi)
    binom = 1.0
    for j in range(n + 1):
        t = half + xi - j
        if n == 1:
            term = (t >= 0.0).astype(np.float64)
        else:
            term = np.where(t > 0.0, t, 0.0) ** (n - 1)
        acc += (-1.0) ** j * binom * term
        binom = binom * (n - j) / (j + 1)
    out[inside] = acc / math.factorial(n - 1)
    return out


def kernel_values_numpy(code, p, x):
    """Evaluate a registered kernel on an array (numpy path)."""
    x = np.asarray(x, dtype=np.float64)
    if code == FEJER:
        s = np.sinc(0.5 * x)
        return 0.5 * s * s * p[3]
    if code == JACKSON:
        n = int(p[0])
        s = np.sinc(x / (2.0 * n * math.pi * p[1]))
        return p[2] * s ** (2 * n) * p[3]
    if code == BSPLINE:
        return _bspline_np(int(p[0]), x) * p[3]
    raise ValueError(f"unknown kernel code {code}")


def _fejer_shifted_np(t0, off, scale):
    """F(t0 - off) for integer offsets without per-term trigonometry.

    sin^2(pi (t0 - k) / 2) equals sin^2(pi t0 / 2) for even k and
    cos^2(pi t0 / 2) for odd k.
    """
    s2 = np.sin(0.5 * np.pi * t0) ** 2
    odd = (np.abs(off) % 2 == 1)
    num = np.where(odd[None, :], 1.0 - s2[:, None], s2[:, None])
    t = t0[:, None] - off[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        v = 2.0 * num / (np.pi * t) ** 2
    v = np.where(t == 0.0, 0.5, v)
    return v * scale


def lattice_sums_numpy(code, p, u, power, radius, absolute):
    """Truncated lattice sums over |k - round(u)| <= radius (numpy path).

    ``absolute`` selects sum |u-k|^power |chi(u-k)|; otherwise the algebraic
    sum (u-k)^power chi(u-k) with integer ``power``.
    """
    u = np.asarray(u, dtype=np.float64)
    out = np.zeros(u.shape, dtype=np.float64)
    centers = np.rint(u)
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    block = max(1, _CHUNK // max(u.size, 1))
    for start in range(0, offsets.size, block):
        off = offsets[start:start + block]
        t = u[:, None] - (centers[:, None] + off[None, :])
        if code == FEJER:
            chi = _fejer_shifted_np(u - centers, off, p[3])
        else:
            chi = kernel_values_numpy(code, p, t)
        if absolute:
            w = np.abs(t) ** power if power != 0 else 1.0
            out += np.sum(w * np.abs(chi), axis=1)
        else:
            w = t ** int(power) if power != 0 else 1.0
            out += np.sum(w * chi, axis=1)
    return out


def series_eval_numpy(code, p, half_width, x, w, k0, coef):
    """Evaluate sum_j coef[j] chi(w x - (k0 + j)) at every x (numpy path)."""
    x = np.asarray(x, dtype=np.float64)
    flat = x.ravel()
    coef = np.asarray(coef, dtype=np.float64)
    ks = k0 + np.arange(coef.size, dtype=np.float64)
    out = np.zeros(flat.size, dtype=np.float64)
    if coef.size == 0:
        return out.reshape(x.shape)
    block = max(1, _CHUNK // coef.size)
    offs = np.arange(coef.size, dtype=np.float64)
    for start in range(0, flat.size, block):
        u = w * flat[start:start + block]
        if code == FEJER:
            chi = _fejer_shifted_np(u - k0, offs, p[3])
        else:
            chi = kernel_values_numpy(code, p, u[:, None] - ks[None, :])
        out[start:start + block] = chi @ coef
    return out.reshape(x.shape)


# ---------------------------------------------------------------------------
# numba
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _sinc(t):
        if t == 0.0:
            return 1.0
        a = math.pi * t
        return math.sin(a) / a

    @njit(cache=True)
    def _chi_scalar(code, p, x):
        if code == 0:
            s = _sinc(0.5 * x)
            return 0.5 * s * s * p[3]
        if code == 1:
            n = int(p[0])
            s = _sinc(x / (2.0 * n * math.pi * p[1]))
            return p[2] * s ** (2 * n) * p[3]
        n = int(p[0])
        half = 0.5 * n
        if x < -half or x > half:
            return 0.0
        acc = 0.0
        binom = 1.0
        sign = 1.0
        for j in range(n + 1):
            t = half + x - j
            if n == 1:
                if t >= 0.0:
                    acc += sign * binom
            elif t > 0.0:
                acc += sign * binom * t ** (n - 1)
            binom = binom * (n - j) / (j + 1)
            sign = -sign
        fact = 1.0
        for i in range(2, n):
            fact *= i
        return acc / fact * p[3]

    @njit(cache=True)
    def _kernel_values_nb(code, p, x, out):
        for i in range(x.size):
            out[i] = _chi_scalar(code, p, x[i])

    @njit(cache=True)
    def _fejer_shifted(t0, off, s2, scale):
        # F(t0 - off); s2 = sin^2(pi t0 / 2), the parity of off picks sin^2 or cos^2
        t = t0 - off
        if t == 0.0:
            return 0.5 * scale
        num = s2 if off % 2 == 0 else 1.0 - s2
        return 2.0 * num / (math.pi * t) ** 2 * scale

    @njit(cache=True)
    def _lattice_sums_nb(code, p, u, power, radius, absolute, out):
        ipow = int(power)
        for i in range(u.size):
            c = np.rint(u[i])
            t0 = u[i] - c
            s2 = math.sin(0.5 * math.pi * t0) ** 2
            acc = 0.0
            for off in range(-radius, radius + 1):
                t = t0 - off
                if code == 0:
                    v = _fejer_shifted(t0, off, s2, p[3])
                else:
                    v = _chi_scalar(code, p, t)
                if absolute:
                    if power == 0.0:
                        acc += abs(v)
                    else:
                        acc += abs(t) ** power * abs(v)
                elif ipow == 0:
                    acc += v
                else:
                    acc += t ** ipow * v
            out[i] = acc

    @njit(cache=True)
    def _series_eval_nb(code, p, half_width, x, w, k0, coef, out):
        m = coef.size
        for i in range(x.size):
            u = w * x[i]
            jlo = 0
            jhi = m - 1
            if half_width >= 0.0:
                jlo = max(jlo, int(math.ceil(u - half_width - k0)))
                jhi = min(jhi, int(math.floor(u + half_width - k0)))
            acc = 0.0
            if code == 0:
                t0 = u - k0
                s2 = math.sin(0.5 * math.pi * t0) ** 2
                for j in range(jlo, jhi + 1):
                    acc += coef[j] * _fejer_shifted(t0, j, s2, p[3])
            else:
                for j in range(jlo, jhi + 1):
                    acc += coef[j] * _chi_scalar(code, p, u - (k0 + j))
            out[i] = acc

    def kernel_values_numba(code, p, x):
        """Evaluate a registered kernel on an array (numba path)."""
        x = np.asarray(x, dtype=np.float64)
        flat = np.ascontiguousarray(x.ravel())
        out = np.empty_like(flat)
        _kernel_values_nb(code, np.asarray(p, dtype=np.float64), flat, out)
        return out.reshape(x.shape)

    def lattice_sums_numba(code, p, u, power, radius, absolute):
        """Truncated lattice sums (numba path); see ``lattice_sums_numpy``."""
        u = np.ascontiguousarray(np.asarray(u, dtype=np.float64).ravel())
        out = np.empty_like(u)
        _lattice_sums_nb(code, np.asarray(p, dtype=np.float64), u,
                         float(power), int(radius), bool(absolute), out)
        return out

    def series_eval_numba(code, p, half_width, x, w, k0, coef):
        """Sampling series at every x (numba path); see ``series_eval_numpy``."""
        x = np.asarray(x, dtype=np.float64)
        flat = np.ascontiguousarray(x.ravel())
        out = np.empty_like(flat)
        _series_eval_nb(code, np.asarray(p, dtype=np.float64), float(half_width),
                        flat, float(w), float(k0),
                        np.ascontiguousarray(coef, dtype=np.float64), out)
        return out.reshape(x.shape)


if USE_NUMBA:
    kernel_values = kernel_values_numba
    lattice_sums = lattice_sums_numba
    series_eval = series_eval_numba
else:
    kernel_values = kernel_values_numpy
    lattice_sums = lattice_sums_numpy
    series_eval = series_eval_numpy

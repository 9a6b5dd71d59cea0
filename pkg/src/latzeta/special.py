"""Gamma and modified Bessel functions of the second kind.

Production values come from scipy's AMOS-based ``kv``/``kve``; the
quadrature routine :func:`bessel_k_quadrature` evaluates the defining
integral directly and is kept independent of that path so it can serve as a
test oracle.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as sp

from .errors import DomainError, OutOfRangeError

#: envelope in which :func:`bessel_k` promises 1e-10 relative accuracy
MAX_ORDER = 30.0
MAX_ARG = 50.0


def gamma(alpha: float) -> float:
    if not alpha > 0:
        raise DomainError(f"gamma is only provided for alpha > 0, got {alpha}")
    return float(sp.gamma(alpha))


def bessel_k(alpha: float, x: float) -> float:
    """K_alpha(x) = ∫_0^∞ exp(-x cosh t) cosh(alpha t) dt for x > 0."""
    if not x > 0:
        raise DomainError(f"K_alpha(x) needs x > 0, got {x}")
    if abs(alpha) > MAX_ORDER or x > MAX_ARG:
        raise OutOfRangeError(f"(alpha={alpha}, x={x}) outside |alpha| <= {MAX_ORDER}, x <= {MAX_ARG}")
    val = float(sp.kv(alpha, x))
    if not math.isfinite(val) or val == 0.0:
        raise OutOfRangeError(f"K_{alpha}({x}) is not representable in double precision")
    return val


LOG2 = math.log(2.0)


def kbar(alpha: float, x: float) -> float:
    """Normalised Bessel function 2^(1-alpha) x^alpha K_alpha(x), equal to Γ(alpha) at 0."""
    if x < 0:
        raise DomainError("kbar needs x >= 0")
    if x == 0:
        if not alpha > 0:
            raise DomainError("kbar(alpha, 0) is only defined for alpha > 0")
        return gamma(alpha)
    if abs(alpha) > MAX_ORDER or x > MAX_ARG:
        raise OutOfRangeError(f"(alpha={alpha}, x={x}) outside the supported envelope")
    return kbar_scalar(alpha, x)


def kbar_recurrence_gap(alpha: float, x: float) -> float:
    """kbar(alpha, x) - (alpha - 1) kbar(alpha - 1, x); nonnegative for alpha > 1."""
    if not alpha > 1:
        raise DomainError("the recurrence gap needs alpha > 1")
    return kbar(alpha, x) - (alpha - 1) * kbar(alpha - 1, x)


def kbar_array(alpha: float, x: np.ndarray) -> np.ndarray:
    """Vectorised kbar without the envelope check, used inside lattice sums.

    Works in log space through the exponentially scaled ``kve`` so large
    arguments underflow gracefully to zero instead of overflowing.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    zero = x == 0
    if np.any(zero):
        if not alpha > 0:
            raise DomainError("kbar(alpha, 0) is only defined for alpha > 0")
        out[zero] = sp.gamma(alpha)
    xp = x[~zero]
    if xp.size:
        k = sp.kve(alpha, xp)
        with np.errstate(divide="ignore"):
            logk = np.log(k) - xp
        vals = np.exp((1 - alpha) * math.log(2.0) + alpha * np.log(xp) + logk)
        if alpha > 0:
            vals[np.isinf(k)] = sp.gamma(alpha)
        out[~zero] = vals
    return out


def kbar_scalar(alpha: float, x: float) -> float:
    """Scalar kbar for x > 0 without the envelope check (quadrature integrands)."""
    k = float(sp.kve(alpha, x))
    if k == 0.0:
        return 0.0
    if math.isinf(k) and alpha > 0:
        # K_alpha overflows only once x^alpha < 1e-308, where kbar equals Γ(alpha) to rounding
        return float(sp.gamma(alpha))
    return math.exp((1 - alpha) * LOG2 + alpha * math.log(x) + math.log(k) - x)


def bessel_k_quadrature(alpha: float, x: float, points: int = 1_000_001) -> float:
    """Composite Simpson quadrature of the defining integral of K_alpha(x).

    The integrand is evaluated in log space and truncated at
    t = arccosh(745/x) + 5, past which it is below double underflow.
    """
    if not x > 0:
        raise DomainError("x must be positive")
    if points % 2 == 0:
        points += 1
    a = abs(alpha)
    T = math.acosh(max(745.0 / x, 1.0)) + 5.0
    t = np.linspace(0.0, T, points)
    # cosh(a t) = exp(a t) (1 + exp(-2 a t)) / 2
    logf = -x * np.cosh(t) + a * t + np.log1p(np.exp(-2 * a * t)) - math.log(2.0)
    peak = logf.max()
    f = np.exp(logf - peak)
    h = t[1] - t[0]
    s = f[0] + f[-1] + 4 * f[1:-1:2].sum() + 2 * f[2:-1:2].sum()
    return float(s * h / 3 * math.exp(peak))

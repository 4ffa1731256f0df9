"""Thin wrappers around QUADPACK quadrature and Brent root finding.

These exist to turn silent accuracy warnings into hard errors and to give
root finding a residual-based acceptance check on top of the bracketing
iteration.
"""

from __future__ import annotations

import warnings
from typing import Callable

from scipy import integrate, optimize

from .errors import NoBracket, QuadratureError


def adaptive_quad(
    f: Callable[[float], float],
    a: float,
    b: float,
    *,
    rtol: float = 1e-10,
    atol: float = 0.0,
    limit: int = 200,
    rtol_ceiling: float = 1e-7,
) -> float:
    """Integral of f over [a, b] by adaptive Gauss-Kronrod quadrature.

    Integrands evaluated near a cancellation (heights hugging a stationary
    point of R) carry a rounding-noise floor above the requested
    tolerance; such roundoff-limited results are accepted as long as the
    integrator's own error estimate stays below ``rtol_ceiling``.
    """
    if a == b:
        return 0.0
    with warnings.catch_warnings(record=True) as wlist:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        val, err = integrate.quad(f, a, b, epsabs=atol, epsrel=rtol, limit=limit)
    if any(issubclass(w.category, integrate.IntegrationWarning) for w in wlist):
        if err > max(atol, rtol_ceiling * abs(val)):
            msg = "; ".join(str(w.message).split("\n")[0] for w in wlist)
            raise QuadratureError(
                f"adaptive quadrature on [{a:.6g}, {b:.6g}] reached error "
                f"{err:.3g} against value {val:.6g}: {msg}"
            )
    return val


def brent_root(
    f: Callable[[float], float],
    a: float,
    b: float,
    *,
    rtol: float = 1e-12,
    maxiter: int = 200,
) -> float:
    """Root of f in the bracketing interval [a, b] by Brent's method."""
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0:
        raise NoBracket(
            f"no sign change on [{a:.6g}, {b:.6g}]: f={fa:.6g}..{fb:.6g}"
        )
    rtol = max(rtol, 4.5e-16)  # brentq floor
    # xtol kept effectively zero: termination is relative, which matters
    # for roots whose derivative scale is far above 1 (scipy's default
    # absolute xtol of 2e-12 would dominate there).
    return float(
        optimize.brentq(f, a, b, xtol=1e-300, rtol=rtol, maxiter=maxiter)
    )

"""Closed-form large-mass behaviour and convergence diagnostics.

Large-mass minimizers follow one of three laws, selected by the landscape:

* droplet (-S > 0, R attains no minimum): parabolic cap with
  u0^4 ~ (9|S|/32) M^2, rbar^4 ~ 9 M^2/(8|S|), macroscopic slope
  sqrt(2|S|) at the edge;
* pancake (R attains its minimum at e*): flat top at height e* with
  rbar ~ M/(2 e*);
* transition (S = 0, Q' < 0, tail Q ~ K s^(1-p)): profile shaped by
  w = f_p^{-1}(f_p(0) |y|) with

      f_p(w) = integral_w^1 sqrt(p) t^((p-1)/2) / sqrt(1 - t^p) dt,
      c_p    = integral_0^1 f_p^{-1}(f_p(0) y) dy,

  and u0^(p+3) ~ p K M^2 / (2 c_p^2 f_p(0)^2).

f_p is integrated after the double substitution t = (1 - sin^2 phi)^(1/p),
which turns the integrand into (2/sqrt(p)) cos(phi)^(1/p), smooth on
[0, pi/2]; c_p is the same integral of the inverse after the exact change
of variables y = f_p(w)/f_p(0), which reduces it to a single forward
quadrature (2/(sqrt(p) f_p(0))) integral of cos(phi)^(3/p). The limits
f_1(w) = 2 sqrt(1-w), c_1 = 2/3 and sqrt(p) f_p(0) -> pi serve as checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, NotApplicable
from .landscape import Regime, classify, compute_e_star
from .minimizer import global_minimizer
from .potential import Family, PotentialSpec, is_inf, validate
from .profile import micro_prefactor_exact
from .quadrature import adaptive_quad

_RTOL = 1e-12


def _check_p(p: float) -> None:
    if not p >= 1.0:
        raise DomainError(f"tail exponent p must be >= 1, got {p}")


def _cos_power_integral(a: float, phi_hi: float) -> float:
    """Integral of cos(phi)^a over [0, phi_hi], phi_hi <= pi/2."""
    return adaptive_quad(lambda t: math.cos(t) ** a, 0.0, phi_hi, rtol=_RTOL)


def f_p(p: float, w: float) -> float:
    """Transition shape integral f_p(w) on [0, 1], decreasing, f_p(1) = 0."""
    _check_p(p)
    if not 0.0 <= w <= 1.0:
        raise DomainError(f"w must lie in [0, 1], got {w}")
    if w == 1.0:
        return 0.0
    # 1 - w^p without cancellation for w near 1
    one_minus_wp = -math.expm1(p * math.log(w)) if w > 0.0 else 1.0
    phi = math.asin(math.sqrt(one_minus_wp))
    return 2.0 / math.sqrt(p) * _cos_power_integral(1.0 / p, phi)


def f_p0(p: float) -> float:
    """f_p(0): total height of the transition shape function."""
    _check_p(p)
    return 2.0 / math.sqrt(p) * _cos_power_integral(1.0 / p, 0.5 * math.pi)


def f_p_inverse(p: float, y: float) -> float:
    """w with f_p(w) = y, by bisection sharpened with Newton steps."""
    _check_p(p)
    top = f_p0(p)
    if not -1e-12 <= y <= top * (1.0 + 1e-12):
        raise DomainError(f"y must lie in [0, f_p(0)={top:.6g}], got {y}")
    y = min(max(y, 0.0), top)
    if y == 0.0:
        return 1.0
    lo, hi = 0.0, 1.0  # f decreasing: f(lo)=top >= y >= 0=f(hi)
    w = 0.5
    for _ in range(200):
        fw = f_p(p, w) - y
        if fw > 0:
            lo = w
        else:
            hi = w
        # Newton from the analytic derivative where it is safe
        wp = w ** (0.5 * (p - 1.0))
        one_minus = -math.expm1(p * math.log(w)) if w > 0 else 1.0
        deriv = -math.sqrt(p) * wp / math.sqrt(one_minus) if one_minus > 0 else 0.0
        w_new = w - fw / deriv if deriv < 0 else 0.5 * (lo + hi)
        if not lo < w_new < hi:
            w_new = 0.5 * (lo + hi)
        if abs(w_new - w) <= 1e-12 * max(1.0, abs(w)) and hi - lo < 1e-9:
            return w_new
        w = w_new
        if hi - lo <= 1e-14:
            break
    return 0.5 * (lo + hi)


def c_p(p: float) -> float:
    """Mean of the transition shape: integral of f_p^{-1}(f_p(0) y) on [0,1].

    Computed after the exact substitution y = f_p(w)/f_p(0), which maps it
    to (2/(sqrt(p) f_p(0))) times the integral of cos(phi)^(3/p).
    """
    _check_p(p)
    return (
        2.0
        / (math.sqrt(p) * f_p0(p))
        * _cos_power_integral(3.0 / p, 0.5 * math.pi)
    )


@dataclass(frozen=True)
class AsymptoticPrediction:
    """Closed-form large-mass values for one (spec, M).

    ``theta_mac`` carries the tangent of the macroscopic contact angle,
    sqrt(2|S|); ``thickness`` the crossover height between the parabolic
    cap and the contact-line law. Transition entries carry the tail pair
    (p, K) and the shape constants f_p(0), c_p.
    """

    regime: Regime
    u0_pred: float
    r_pred: float
    theta_mac: Optional[float] = None
    thickness: Optional[float] = None
    p: Optional[float] = None
    K: Optional[float] = None
    fp0: Optional[float] = None
    cp: Optional[float] = None


def tail_exponents(spec: PotentialSpec) -> tuple[float, float]:
    """Tail pair (p, K) with Q(s) ~ K s^(1-p) at large s, for S = 0 specs."""
    validate(spec)
    fam = spec.family
    if fam is Family.MODEL_A:
        if spec.B == 0.0:
            return spec.m, spec.A
        if spec.B < 0.0:
            return spec.n, -spec.B
        raise NotApplicable("attractive tail (B > 0) has no decay pair")
    if fam is Family.MODEL_B:
        return spec.n, abs(spec.B)
    if fam is Family.CUSTOM:
        cp = spec.custom
        assert cp is not None
        if cp.p is None or cp.K is None:
            raise NotApplicable(
                "custom potentials must declare (p, K) for transition asymptotics"
            )
        return cp.p, cp.K
    raise NotApplicable(f"no decay tail for family {fam.value}")


def predict(spec: PotentialSpec, M: float) -> AsymptoticPrediction:
    """Closed-form large-M height, radius and shape constants."""
    validate(spec)
    regime = classify(spec).regime
    if regime is Regime.DROPLET:
        s_abs = abs(spec.S if spec.family is not Family.CUSTOM else spec.custom.S)  # type: ignore[union-attr]
        u0 = (9.0 * s_abs / 32.0 * M * M) ** 0.25
        r = (9.0 / (8.0 * s_abs) * M * M) ** 0.25
        A, m = spec.short_range()
        thickness = (A * (m + 1.0) ** 2 / (4.0 * s_abs)) ** (1.0 / (m - 1.0))
        return AsymptoticPrediction(
            regime=regime,
            u0_pred=u0,
            r_pred=r,
            theta_mac=math.sqrt(2.0 * s_abs),
            thickness=thickness,
        )
    if regime is Regime.PANCAKE:
        e_star = compute_e_star(spec)
        assert not is_inf(e_star)
        return AsymptoticPrediction(
            regime=regime, u0_pred=float(e_star), r_pred=M / (2.0 * float(e_star))
        )
    if regime is Regime.TRANSITION:
        p, K = tail_exponents(spec)
        fp0 = f_p0(p)
        cp = c_p(p)
        u0 = (p * K * M * M / (2.0 * cp * cp * fp0 * fp0)) ** (1.0 / (p + 3.0))
        r = (fp0 * fp0 * M ** (p + 1.0) / (2.0 ** (p + 2.0) * p * K * cp ** (p + 1.0))) ** (
            1.0 / (p + 3.0)
        )
        return AsymptoticPrediction(
            regime=regime, u0_pred=u0, r_pred=r, p=p, K=K, fp0=fp0, cp=cp
        )
    raise NotApplicable("no asymptotic prediction for an unknown regime")


def _largest_crossing(
    f: "np.ufunc | object", g: object, xs: np.ndarray
) -> Optional[float]:
    """Largest sign change of f - g on the sampled grid, refined by bisection."""
    from .quadrature import brent_root

    d = np.array([f(x) - g(x) for x in xs])  # type: ignore[operator]
    idx = np.nonzero(np.sign(d[:-1]) * np.sign(d[1:]) < 0)[0]
    if idx.size == 0:
        return None
    i = int(idx[-1])
    return brent_root(
        lambda x: f(x) - g(x), float(xs[i]), float(xs[i + 1]), rtol=1e-12
    )


def composite_profile(spec: PotentialSpec, M: float, x: float) -> float:
    """Matched macroscopic/microscopic height at position x, for large M.

    Branches switch where the regime expressions intersect nearest the
    crossover scale, so the emitted curve is continuous. Positions beyond
    the predicted radius return 0.
    """
    pred = predict(spec, M)
    r = pred.r_pred
    x = abs(x)
    if x >= r:
        return 0.0
    C, alpha = micro_prefactor_exact(spec)
    micro = lambda xx: C * (r - xx) ** alpha

    if pred.regime is Regime.DROPLET:
        s_abs = 0.5 * pred.theta_mac**2  # type: ignore[operator]
        macro = lambda xx: math.sqrt(s_abs) / (r * math.sqrt(2.0)) * (r * r - xx * xx)
        A, m = spec.short_range()
        delta = ((2.0 * s_abs) ** (-0.5 * (m + 1.0)) * A * (m + 1.0) ** 2 / 2.0) ** (
            1.0 / (m - 1.0)
        )
        xs = r - delta * np.geomspace(1e-3, min(1e3, 0.99 * r / delta), 257)
        x_star = _largest_crossing(macro, micro, np.sort(xs))
        if x_star is None:
            x_star = r - delta
        return macro(x) if x <= x_star else micro(x)

    if pred.regime is Regime.PANCAKE:
        e_star = pred.u0_pred
        y_star = (e_star / C) ** (1.0 / alpha)
        return e_star if r - x > y_star else micro(x)

    # Transition: macroscopic cap, intermediate power law, contact law.
    p, fp0 = pred.p, pred.fp0
    assert p is not None and fp0 is not None
    u0 = pred.u0_pred
    macro = lambda xx: u0 / (r * r) * (r * r - fp0 * fp0 * xx * xx / 4.0)
    inter = lambda xx: (
        u0
        / r ** (2.0 / (p + 1.0))
        * ((p + 1.0) * fp0 / (2.0 * math.sqrt(p)) * (r - xx)) ** (2.0 / (p + 1.0))
    )
    xs = np.linspace(0.0, r * (1.0 - 1e-9), 2049)
    x1 = _largest_crossing(macro, inter, xs)
    if x1 is None:
        x1 = 0.5 * r
    xs2 = np.linspace(x1, r * (1.0 - 1e-12), 2049)
    x2 = _largest_crossing(inter, micro, xs2)
    if x2 is None:
        x2 = r * (1.0 - 1e-12)
    if x <= x1:
        return macro(x)
    if x <= x2:
        return inter(x)
    return micro(x)


@dataclass(frozen=True)
class ConvergenceRow:
    M: float
    u0: float
    u0_pred: float
    rbar: float
    rbar_pred: float
    shape_err: float


def convergence_report(
    spec: PotentialSpec, M_list: Sequence[float], *, n_grid: int = 192
) -> list[ConvergenceRow]:
    """Computed-versus-predicted height, radius and rescaled shape per mass.

    The shape error is the sup over |y| <= 0.9 of the difference between
    the computed rescaled profile and the regime's limit shape: 1 - y^2
    for droplets, the flat top e* for pancakes, f_p^{-1}(f_p(0) y) for
    transitions.
    """
    validate(spec)
    pred0 = predict(spec, float(M_list[0]) if M_list else 1.0)
    regime = pred0.regime
    ys = np.linspace(0.0, 0.9, 61)
    if regime is Regime.TRANSITION:
        assert pred0.p is not None and pred0.fp0 is not None
        target = np.array([f_p_inverse(pred0.p, pred0.fp0 * y) for y in ys])
    elif regime is Regime.DROPLET:
        target = 1.0 - ys * ys
    else:
        target = np.ones_like(ys)

    rows: list[ConvergenceRow] = []
    for M in M_list:
        M = float(M)
        pred = predict(spec, M)
        sol = global_minimizer(spec, M, n_grid=n_grid)
        prof = sol.profile
        u0c, rc = prof.u0, prof.r_bar
        shape = prof.interp(rc * ys)
        scale = pred.u0_pred if regime is Regime.PANCAKE else u0c
        err = float(np.max(np.abs(shape / scale - target)))
        rows.append(
            ConvergenceRow(
                M=M,
                u0=u0c,
                u0_pred=pred.u0_pred,
                rbar=rc,
                rbar_pred=pred.r_pred,
                shape_err=err,
            )
        )
    return rows

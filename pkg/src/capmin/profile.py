"""Symmetric compactly supported profiles by first-integral quadrature.

For an admissible maximal height u0 the profile solves

    -u'' + Q'(u) = R(u0),   u(0) = u0, u'(0) = 0,

whose first integral  u'^2/2 = Q(u) - R(u0) u = u (R(u) - R(u0))  turns
every quantity into a quadrature in the height variable:

    slope      u'   = -sqrt(2 u (R(u) - R(u0)))
    position   Z(u) = 2^(-1/2) * integral_u^u0 (s (R(s)-R(u0)))^(-1/2) ds
    mass       mu   = 2^(1/2)  * integral_0^u0 sqrt(u / (R(u)-R(u0))) du
    energy     E    = 2^(1/2)  * integral_0^u0 (2Q(u)-R(u0)u)
                                  / sqrt(u (R(u)-R(u0))) du

Endpoint treatment. At u = u0 the integrands have a generic square-root
singularity because R(u) - R(u0) vanishes linearly (admissibility gives
R'(u0) < 0); the substitution u = u0 (1 - t^2) removes it exactly. At
u = 0 the position integrand vanishes like u^((m-1)/2) and needs nothing,
while the energy integrand diverges like u^((1-m)/2) (integrable for
m < 3) and is regularized by u = tau^(2/(3-m)).

Deep pancake heights. When u0 hugs a stationary point E of R (R'(E) = 0),
the gap E - u0 needed for a prescribed mass decays like exp(-c M) and
underflows float64 long before the masses of interest are reached. Such
heights are carried as (E, log_gap) pairs: all representable heights are
integrated numerically against R(E), and the unresolvable plateau core
|E - u| < v_cut is added in closed form from the quadratic expansion
R(E - v) - R(E - eps) ~ R''(E) (v^2 - eps^2) / 2, whose quadrature is an
acosh. Only the logarithm of the gap ever enters, so masses that require
gaps like exp(-1800) remain solvable.

The independent oracle integrates the second-order ODE itself with a
classical fixed-step fourth-order Runge-Kutta scheme, started from the
series expansion u(h) = u0 + u0 R'(u0) h^2 / 2, with local step halving
near the contact line where the slope diverges; the support radius is
closed by inverting the contact law u ~ C (rbar - x)^(2/(m+1)).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NotAdmissible, ParamError, StepError
from . import landscape as _landscape
from .potential import (
    PotentialSpec,
    evaluate,
    q_fn,
    q_prime_fn,
    r_diff,
    r_second,
    validate,
)
from .quadrature import adaptive_quad

# Heights closer (relatively) than this to a stationary endpoint switch to
# the log-gap representation. At the switch the direct quadrature has a few
# 1e-9 relative rounding noise from the near-plateau cancellation, and the
# quadratic-core expansion error on the other side is of the same order;
# moving the seam in either direction degrades one of the two.
GAP_SWITCH = 1e-8

_QUAD_RTOL = 1e-11

# Height grid construction: Chebyshev body down to this fraction of u0,
# then a geometric tail to TAIL_BOTTOM for the contact-line diagnostics.
_TAIL_TOP = 1e-3
_TAIL_BOTTOM = 1e-9
_TAIL_PER_DECADE = 8


@dataclass(frozen=True)
class Height:
    """Maximal height, either plain or as a log gap below a stationary point."""

    u0: float
    endpoint: Optional[float] = None
    log_gap: Optional[float] = None

    @staticmethod
    def plain(u0: float) -> "Height":
        return Height(u0=u0)

    @staticmethod
    def near_endpoint(endpoint: float, log_gap: float) -> "Height":
        gap = math.exp(log_gap) if log_gap > -700 else 0.0
        if gap > GAP_SWITCH * endpoint:
            return Height(u0=endpoint - gap)
        return Height(u0=endpoint - gap, endpoint=endpoint, log_gap=log_gap)

    @property
    def deep(self) -> bool:
        return self.endpoint is not None


def micro_prefactor_exact(spec: PotentialSpec) -> tuple[float, float]:
    """Contact-law constants: u ~ C (rbar - x)^alpha with alpha = 2/(m+1)."""
    A, m = spec.short_range()
    alpha = 2.0 / (m + 1.0)
    C = (A * (m + 1.0) ** 2 / 2.0) ** (1.0 / (m + 1.0))
    return C, alpha


def _powerlaw_integral(us: np.ndarray, fs: np.ndarray) -> float:
    """Integral of f du over a descending height grid, each segment treated
    as the exact power law through its endpoints (plain trapezoid degrades
    on geometric grids with power-law integrands)."""
    total = 0.0
    for ua, ub, fa, fb in zip(us[:-1], us[1:], fs[:-1], fs[1:]):
        if not (ua > ub > 0.0 and fa > 0.0 and fb > 0.0):
            continue
        a = math.log(fa / fb) / math.log(ua / ub)
        if abs(a + 1.0) > 1e-6:
            total += (fa * ua - fb * ub) / (a + 1.0)
        else:
            total += fa * ua * math.log(ua / ub)
    return total


@dataclass(frozen=True, eq=False)
class Profile:
    """Sampled symmetric decreasing profile on [0, rbar].

    ``ys`` holds rbar - x computed without subtractive cancellation (as
    suffix sums of the position panels), which is what the contact-line
    diagnostics need: near the contact ys is 10 or more orders below rbar.
    ``ups[-1]`` is -inf when the grid reaches u = 0 exactly (the slope
    diverges at the contact line).
    """

    u0: float
    lam: float
    r_bar: float
    xs: np.ndarray
    us: np.ndarray
    ups: np.ndarray
    ys: np.ndarray
    micro_prefactor: float
    micro_exponent: float

    def interp(self, x: np.ndarray) -> np.ndarray:
        """Heights at arbitrary positions in [0, rbar] (linear in the grid)."""
        return np.interp(x, self.xs, self.us)

    def mass_grid(self, spec: PotentialSpec) -> float:
        """Trapezoidal mass of the sampled grid, closed by the contact law.

        The closure integrates u ~ C y^alpha over the unsampled sliver
        between the last positive sample and the contact line.
        """
        pos = self.us > 0.0
        xs, us = self.xs[pos], self.us[pos]
        C, alpha = micro_prefactor_exact(spec)
        y_end = float(self.ys[pos][-1])
        tail = C * y_end ** (alpha + 1.0) / (alpha + 1.0)
        return 2.0 * (float(np.trapezoid(us, xs)) + tail)

    def energy_grid(self, spec: PotentialSpec) -> float:
        """Grid energy 2 * int (u'^2/2 + Q(u)) dx, from sampled values only.

        The bulk is a trapezoid in x. Below u0/1000 the integrand is
        switched to the height variable ((u'^2/2 + Q)/|u'| du, integrated
        as piecewise log-space power laws): near the contact the x
        increments fall under the float spacing of x while the height grid
        stays perfectly resolved. The sliver beyond the last positive
        sample, where the integrand is 2 Q (1 + o(1)), closes in closed
        form via the short-range law.
        """
        q = q_fn(spec)
        dens = np.array(
            [0.5 * up * up + q(u) if u > 0.0 else math.inf
             for u, up in zip(self.us, self.ups)]
        )
        ok = np.isfinite(dens) & (self.us > 0.0)
        xs, us, ups, dd = self.xs[ok], self.us[ok], self.ups[ok], dens[ok]
        switch = np.nonzero(us <= 0.5 * us[0])[0]
        i_sw = int(switch[0]) if switch.size else len(us) - 1
        bulk = float(np.trapezoid(dd[: i_sw + 1], xs[: i_sw + 1]))
        tail_grid = _powerlaw_integral(us[i_sw:], dd[i_sw:] / np.abs(ups[i_sw:]))
        A, m = spec.short_range()
        u_end = float(us[-1])
        closure = math.sqrt(2.0 * A) * u_end ** (0.5 * (3.0 - m)) * 2.0 / (3.0 - m)
        return 2.0 * (bulk + tail_grid + closure)

    def first_integral_residual(self, spec: PotentialSpec) -> float:
        """Max of |u'^2/2 - Q(u) + lambda u| over the evaluable grid.

        Restricted to heights with |Q(u)| <= 10 max(1, |Q(u0)|): deeper
        into the contact zone the terms of the identity grow like
        u^(1-m) and their float64 rounding alone exceeds any absolute
        bound stated at the profile scale. The contact zone is covered
        integrally by the mass/energy/radius cross-checks instead.
        """
        q = q_fn(spec)
        scale = max(1.0, abs(q(self.u0)))
        worst = 0.0
        for u, up in zip(self.us, self.ups):
            if not (u > 0.0 and math.isfinite(up)):
                continue
            qu = q(u)
            if abs(qu) > 10.0 * scale:
                continue
            worst = max(worst, abs(0.5 * up * up - qu + self.lam * u))
        return worst

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("x,u,uprime\n")
            for x, u, up in zip(self.xs, self.us, self.ups):
                fh.write(f"{x!r},{u!r},{up!r}\n")

    def to_json(self) -> str:
        def num(v: float):
            return v if math.isfinite(v) else ("-inf" if v < 0 else "inf")

        payload = {
            "u0": self.u0,
            "lambda": self.lam,
            "r_bar": self.r_bar,
            "micro_prefactor": self.micro_prefactor,
            "micro_exponent": self.micro_exponent,
            "x": [float(v) for v in self.xs],
            "u": [float(v) for v in self.us],
            "uprime": [num(float(v)) for v in self.ups],
        }
        return json.dumps(payload)


# ---------------------------------------------------------------------------
# Quadrature core
# ---------------------------------------------------------------------------


def _r0_effective(spec: PotentialSpec, h: Height) -> float:
    """Eigenvalue R(u0); in log-gap mode expanded about the endpoint."""
    if not h.deep:
        return evaluate(spec, h.u0).r
    E = h.endpoint
    assert E is not None and h.log_gap is not None
    eps2 = math.exp(2.0 * h.log_gap) if h.log_gap > -350 else 0.0
    return evaluate(spec, E).r + 0.5 * r_second(spec, E) * eps2


def _v_cut(spec: PotentialSpec, h: Height) -> float:
    """Radius of the analytic plateau core.

    Large enough that the cancellation noise of R(E-v) - R(E) at v_cut
    stays near 1e-8 relative, small enough that the quadratic-expansion
    error of the core (linear in v_cut) stays there too.
    """
    E = h.endpoint
    assert E is not None and h.log_gap is not None
    gap_rel = math.exp(h.log_gap) / E if h.log_gap > -700 else 0.0
    return E * max(3.0 * GAP_SWITCH, 3.0 * gap_rel)


def _core_factor(h: Height, v_cut: float) -> float:
    """acosh(v_cut / gap), evaluated through logs when the gap underflows."""
    assert h.log_gap is not None
    ln_ratio = math.log(v_cut) - h.log_gap
    if ln_ratio > 30.0:
        return ln_ratio + math.log(2.0)
    return math.acosh(math.exp(ln_ratio))


def mass_at(spec: PotentialSpec, h: Height) -> float:
    """Mass 2 * integral of u over the support, in the height variable.

    Split at u = 3 u0/4: the top quarter is integrated in t = sqrt(1-u/u0)
    (removes the square-root singularity at u0, with the height difference
    of R evaluated cancellation-free), the rest directly in u where both
    the integrand and the difference R(u) - R(u0) are benign.
    """
    if not h.deep:
        u0 = h.u0
        r0 = evaluate(spec, u0).r
        q = q_fn(spec)

        def f_top(t: float) -> float:
            u = u0 * (1.0 - t * t)
            dr = r_diff(spec, u0, t * t)
            return 2.0 * u0 * t * math.sqrt(u / dr)

        def f_bot(u: float) -> float:
            if u <= 0.0:
                return 0.0
            return math.sqrt(u / (q(u) / u - r0))

        top = adaptive_quad(f_top, 0.0, 0.5, rtol=_QUAD_RTOL)
        bot = adaptive_quad(f_bot, 0.0, 0.75 * u0, rtol=_QUAD_RTOL)
        return math.sqrt(2.0) * (top + bot)

    E = h.endpoint
    assert E is not None
    r0 = _r0_effective(spec, h)
    vc = _v_cut(spec, h)
    qpp_e = evaluate(spec, E).qpp  # = E * R''(E) at the stationary point
    core = 2.0 * E * _core_factor(h, vc) / math.sqrt(qpp_e)

    def f_low(u: float) -> float:
        if u <= 0.0:
            return 0.0
        return math.sqrt(u / (evaluate(spec, u).r - r0))

    low = adaptive_quad(f_low, 0.0, 0.5 * E, rtol=_QUAD_RTOL)

    eps2 = math.exp(2.0 * h.log_gap) if h.log_gap > -350 else 0.0  # type: ignore[arg-type]
    half = 0.5 * r_second(spec, E) * eps2

    def f_up(w: float) -> float:
        v = math.exp(w)
        dr = r_diff(spec, E, v / E) - half
        return math.sqrt((E - v) / dr) * v

    up = adaptive_quad(f_up, math.log(vc), math.log(0.5 * E), rtol=_QUAD_RTOL)
    return math.sqrt(2.0) * (low + up) + core


def energy_at(spec: PotentialSpec, h: Height) -> float:
    """Energy 2 * integral of (u'^2/2 + Q(u)), in the height variable."""
    q = q_fn(spec)
    if not h.deep:
        u0 = h.u0
        r0 = evaluate(spec, u0).r
        A, m = spec.short_range()

        def f_top(t: float) -> float:
            u = u0 * (1.0 - t * t)
            dr = r_diff(spec, u0, t * t)
            return (2.0 * q(u) - r0 * u) / math.sqrt(u * dr) * 2.0 * u0 * t

        top = adaptive_quad(f_top, 0.0, 0.5, rtol=_QUAD_RTOL)

        # Lower part: u = tau^(2/(3-m)) flattens the u^((1-m)/2) divergence.
        ex = 2.0 / (3.0 - m)

        def f_low(tau: float) -> float:
            if tau <= 0.0:
                return 0.0
            u = tau**ex
            dr = q(u) / u - r0
            return (2.0 * q(u) - r0 * u) / math.sqrt(u * dr) * ex * tau ** (ex - 1.0)

        tau_hi = (0.75 * u0) ** (1.0 / ex)
        low = adaptive_quad(f_low, 0.0, tau_hi, rtol=_QUAD_RTOL)
        return math.sqrt(2.0) * (low + top)

    E = h.endpoint
    assert E is not None
    r0 = _r0_effective(spec, h)
    vc = _v_cut(spec, h)
    v_e = evaluate(spec, E)
    core = v_e.r * 2.0 * E * _core_factor(h, vc) / math.sqrt(v_e.qpp)

    A, m = spec.short_range()
    ex = 2.0 / (3.0 - m)

    def f_low(tau: float) -> float:
        if tau <= 0.0:
            return 0.0
        u = tau**ex
        dr = evaluate(spec, u).r - r0
        return (2.0 * q(u) - r0 * u) / math.sqrt(u * dr) * ex * tau ** (ex - 1.0)

    low = adaptive_quad(f_low, 0.0, (0.5 * E) ** (1.0 / ex), rtol=_QUAD_RTOL)

    eps2 = math.exp(2.0 * h.log_gap) if h.log_gap > -350 else 0.0  # type: ignore[arg-type]
    half = 0.5 * r_second(spec, E) * eps2

    def f_up(w: float) -> float:
        v = math.exp(w)
        u = E - v
        dr = r_diff(spec, E, v / E) - half
        return (2.0 * q(u) - r0 * u) / math.sqrt(u * dr) * v

    up = adaptive_quad(f_up, math.log(vc), math.log(0.5 * E), rtol=_QUAD_RTOL)
    return math.sqrt(2.0) * (low + up) + core


def _check_admissible(spec: PotentialSpec, h: Height) -> None:
    if h.deep:
        return  # reachable only through the minimizer's bracketed search
    if not _landscape.admissible_contains(spec, h.u0):
        raise NotAdmissible(
            f"u0={h.u0:.9g} is not an admissible maximal height"
        )


def mass(spec: PotentialSpec, u0: float) -> float:
    """Mass of the profile with maximal height u0 (u0 must be admissible)."""
    validate(spec)
    h = Height.plain(u0)
    _check_admissible(spec, h)
    return mass_at(spec, h)


def energy(spec: PotentialSpec, u0: float) -> float:
    """Energy of the profile with maximal height u0 (u0 must be admissible)."""
    validate(spec)
    h = Height.plain(u0)
    _check_admissible(spec, h)
    return energy_at(spec, h)


# ---------------------------------------------------------------------------
# Profile construction
# ---------------------------------------------------------------------------


def _height_grid(u0: float, n_grid: int) -> np.ndarray:
    """Descending heights: Chebyshev body plus geometric contact tail.

    Chebyshev clustering puts resolution at both u = u0 (square-root
    structure) and u = 0; the tail extends to u0 * 1e-9 so the contact
    exponent and prefactor can be fitted on an uncontaminated decade.
    """
    j = np.arange(n_grid + 1)
    cheb = u0 * np.cos(0.5 * np.pi * j / n_grid) ** 2
    body = cheb[cheb >= u0 * _TAIL_TOP]
    decades = math.log10(_TAIL_TOP / _TAIL_BOTTOM)
    k = np.arange(int(decades * _TAIL_PER_DECADE) + 1)
    tail = u0 * _TAIL_TOP * 10.0 ** (-k / _TAIL_PER_DECADE)
    us = np.concatenate([body, tail[tail < body[-1]], [0.0]])
    return us


def _fit_micro(
    ys: np.ndarray, us: np.ndarray, y_window: tuple[float, float]
) -> tuple[float, float]:
    """Power-law fit u = C y^alpha over a window of contact distances."""
    lo, hi = y_window
    sel = (ys > lo) & (ys <= hi) & (us > 0.0)
    if int(np.count_nonzero(sel)) < 3:
        return math.nan, math.nan
    coef = np.polyfit(np.log(ys[sel]), np.log(us[sel]), 1)
    return float(math.exp(coef[1])), float(coef[0])


def _assemble(
    spec: PotentialSpec,
    h: Height,
    us: np.ndarray,
    panels: np.ndarray,
    x_offset: float,
    ups: np.ndarray,
) -> Profile:
    """Accumulate panel integrals into positions and fit the contact law."""
    xs = np.concatenate([[0.0], x_offset + np.cumsum(panels)])
    suffix = np.concatenate([np.cumsum(panels[::-1])[::-1], [0.0]])
    r_bar = float(xs[-1])
    ys = suffix.copy()
    ys[0] = r_bar  # center point
    y_hi = float(ys[us <= us[0] * _TAIL_TOP][0]) if np.any(us <= us[0] * _TAIL_TOP) else r_bar
    y_lo = float(ys[-2])
    prefac, expo = _fit_micro(ys, us, (0.999 * y_lo, min(10.0 * y_lo, y_hi)))
    lam = _r0_effective(spec, h)
    return Profile(
        u0=h.u0,
        lam=lam,
        r_bar=r_bar,
        xs=xs,
        us=us,
        ups=ups,
        ys=ys,
        micro_prefactor=prefac,
        micro_exponent=expo,
    )


def solve_profile_height(spec: PotentialSpec, h: Height, n_grid: int = 192) -> Profile:
    """Profile for a Height carrying either a plain u0 or a log gap."""
    validate(spec)
    if n_grid < 16:
        raise ParamError(f"n_grid must be at least 16, got {n_grid}")
    if not h.deep:
        return _solve_profile_plain(spec, h, n_grid)
    return _solve_profile_deep(spec, h, n_grid)


def _solve_profile_plain(spec: PotentialSpec, h: Height, n_grid: int) -> Profile:
    u0 = h.u0
    _check_admissible(spec, h)
    us = _height_grid(u0, n_grid)
    r0 = evaluate(spec, u0).r
    q = q_fn(spec)
    # Position panels between consecutive heights: integrated in
    # t = sqrt(1 - u/u0) near the top (both the square-root singularity
    # at u0 and the cancellation in R(u) - R(u0) live there), directly in
    # u below 3 u0/4 where everything is benign.
    ts = np.sqrt(np.clip(1.0 - us / u0, 0.0, 1.0))
    ts[0] = 0.0
    split = 0.75 * u0

    def f_t(t: float) -> float:
        uu = u0 * (1.0 - t * t)
        dr = r_diff(spec, u0, t * t)
        return math.sqrt(2.0) * u0 * t / math.sqrt(uu * dr)

    def f_u(u: float) -> float:
        if u <= 0.0:
            return 0.0
        dr = q(u) / u - r0
        return 1.0 / math.sqrt(2.0 * u * dr)

    panels = np.empty(len(us) - 1)
    for i, (ua, ub) in enumerate(zip(us[:-1], us[1:])):
        if ub >= split:
            panels[i] = adaptive_quad(
                f_t, float(ts[i]), float(ts[i + 1]), rtol=_QUAD_RTOL
            )
        else:
            panels[i] = adaptive_quad(f_u, float(ub), float(ua), rtol=_QUAD_RTOL)

    ups = np.empty_like(us)
    ups[0] = 0.0
    for i in range(1, len(us)):
        u = float(us[i])
        if u <= 0.0:
            ups[i] = -math.inf
        elif u >= split:
            ups[i] = -math.sqrt(2.0 * u * r_diff(spec, u0, float(ts[i]) ** 2))
        else:
            ups[i] = -math.sqrt(2.0 * u * (q(u) / u - r0))
    return _assemble(spec, h, us, panels, 0.0, ups)


def _solve_profile_deep(spec: PotentialSpec, h: Height, n_grid: int) -> Profile:
    E = h.endpoint
    assert E is not None
    r0 = _r0_effective(spec, h)
    vc = _v_cut(spec, h)
    qpp_e = evaluate(spec, E).qpp
    z_core = _core_factor(h, vc) / math.sqrt(qpp_e)

    eps2 = math.exp(2.0 * h.log_gap) if h.log_gap > -350 else 0.0  # type: ignore[arg-type]
    half = 0.5 * r_second(spec, E) * eps2

    def dr_of(u: float, v: Optional[float] = None) -> float:
        if v is not None:  # shoulder region: gap known exactly
            return r_diff(spec, E, v / E) - half
        return evaluate(spec, u).r - r0

    # Heights: geometric shoulder below the plateau, log-spaced body,
    # geometric contact tail, contact line.
    shoulder_v = [vc]
    while shoulder_v[-1] * 1.5 < 0.5 * E:
        shoulder_v.append(shoulder_v[-1] * 1.5)
    shoulder_u = [E - v for v in shoulder_v]
    body = list(np.geomspace(0.5 * E, E * _TAIL_TOP, max(16, n_grid // 4)))
    decades = math.log10(_TAIL_TOP / _TAIL_BOTTOM)
    tail = list(
        E * _TAIL_TOP * 10.0 ** (-np.arange(1, int(decades * _TAIL_PER_DECADE) + 1) / _TAIL_PER_DECADE)
    )
    us = np.array([h.u0] + shoulder_u + body[1:] + tail + [0.0])
    vs: list[Optional[float]] = [None] + shoulder_v + [None] * (len(us) - len(shoulder_v) - 1)

    def f(u: float) -> float:
        if u <= 0.0:
            return 0.0
        gap = E - u
        dr = dr_of(u, gap if gap < 0.25 * E else None)
        return 1.0 / math.sqrt(2.0 * u * dr)

    panels = [z_core]
    for a, b in zip(us[1:-1], us[2:]):
        panels.append(adaptive_quad(f, float(b), float(a), rtol=_QUAD_RTOL))
    panels_arr = np.array(panels)

    ups = np.empty_like(us)
    ups[0] = 0.0
    for i in range(1, len(us)):
        if us[i] <= 0.0:
            ups[i] = -math.inf
        else:
            v = vs[i] if i < len(vs) else None
            dr = dr_of(float(us[i]), v)
            ups[i] = -math.sqrt(2.0 * us[i] * dr)
    return _assemble(spec, h, us, panels_arr, 0.0, ups)


def solve_profile(spec: PotentialSpec, u0: float, n_grid: int = 192) -> Profile:
    """Profile with maximal height u0, by height-variable quadrature.

    The position map is built as x(u) on a Chebyshev-plus-tail height grid
    and emitted on both parametrizations. The slope comes from the first
    integral pointwise, so the residual u'^2/2 - Q(u) + lambda u vanishes
    identically up to rounding on the emitted grid.
    """
    return solve_profile_height(spec, Height.plain(u0), n_grid)


# ---------------------------------------------------------------------------
# ODE oracle
# ---------------------------------------------------------------------------


def solve_profile_ode(
    spec: PotentialSpec, u0: float, step: Optional[float] = None
) -> Profile:
    """Independent oracle: fixed-step classical RK4 on -u'' + Q'(u) = R(u0).

    Starts from the series expansion at the symmetry point, halves the
    step locally whenever a step would cut more than 0.5% off the current
    height (the slope diverges at the contact line), stops at
    u < 1e-9 * u0 and closes the support radius by inverting the contact
    law. Raises StepError when monotonicity fails, which is the numerical
    signature of an inadmissible height.
    """
    validate(spec)
    if not u0 > 0:
        raise ParamError(f"u0 must be positive, got {u0}")
    if step is None:
        step = u0 * 1e-5
    v0 = evaluate(spec, u0)
    r0 = v0.r
    qp = q_prime_fn(spec)

    def rhs(u: float) -> float:
        return qp(u) - r0

    hb = step
    x = hb
    u = u0 + 0.5 * u0 * v0.rp * hb * hb
    v = u0 * v0.rp * hb
    floor = 1e-9 * u0
    xs = [0.0, x]
    us = [u0, u]
    vps = [0.0, v]
    if not u < u0:
        raise StepError(
            f"height does not decrease from the start at u0={u0:.9g} "
            "(stationary or inadmissible height)"
        )

    h = hb
    max_steps = 5_000_000
    steps = 0
    while u > floor:
        steps += 1
        if steps > max_steps:
            raise StepError(
                f"no contact line within {max_steps} steps from u0={u0:.9g}; "
                "support appears unbounded (inadmissible height)"
            )
        # One classical RK4 step, retried with a halved step until the
        # height decrement stays below 0.5% (or the state goes invalid).
        for _ in range(64):
            k1u, k1v = v, rhs(u)
            u2 = u + 0.5 * h * k1u
            if u2 <= 0.0:
                h *= 0.5
                continue
            k2u, k2v = v + 0.5 * h * k1v, rhs(u2)
            u3 = u + 0.5 * h * k2u
            if u3 <= 0.0:
                h *= 0.5
                continue
            k3u, k3v = v + 0.5 * h * k2v, rhs(u3)
            u4 = u + h * k3u
            if u4 <= 0.0:
                h *= 0.5
                continue
            k4u, k4v = v + h * k3v, rhs(u4)
            un = u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
            vn = v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
            if un >= u or un <= 0.0:
                h *= 0.5
                continue
            if (u - un) > 0.005 * u:
                h *= 0.5
                continue
            break
        else:
            raise StepError(
                f"height stopped decreasing at x={x:.9g}, u={u:.9g} "
                "(stationary or inadmissible height)"
            )
        x += h
        u, v = un, vn
        if v >= 0.0 and u > floor:
            raise StepError(
                f"slope turned nonnegative at x={x:.9g}, u={u:.9g} "
                "(inadmissible height)"
            )
        xs.append(x)
        us.append(u)
        vps.append(v)
        if h < hb and (u - un) < 0.0025 * u:
            h = min(2.0 * h, hb)

    xs_arr = np.array(xs)
    us_arr = np.array(us)
    ups_arr = np.array(vps)
    C, alpha = micro_prefactor_exact(spec)
    y_end = (us_arr[-1] / C) ** (1.0 / alpha)
    r_bar = xs_arr[-1] + y_end
    # ys built from exact grid differences plus the analytic closure, so
    # they stay meaningful far below the rounding floor of r_bar - x.
    ys_arr = (xs_arr[-1] - xs_arr) + y_end
    y_lo = max(y_end, 1e-10 * r_bar)
    prefac, expo = _fit_micro(ys_arr, us_arr, (y_lo, 10.0 * y_lo))
    return Profile(
        u0=u0,
        lam=r0,
        r_bar=float(r_bar),
        xs=xs_arr,
        us=us_arr,
        ups=ups_arr,
        ys=ys_arr,
        micro_prefactor=prefac,
        micro_exponent=expo,
    )

"""Landscape of the weighted potential R(s) = Q(s)/s.

The admissible set of maximal heights is

    A = { s > 0 : R'(s) < 0 and R(t) > R(s) for every t < s },

so everything here reduces to locating the critical points of R, i.e. the
zeros of G(s) = -s^2 R'(s). G is scanned for sign changes on a log-uniform
grid (R has power-law behaviour at both ends, so log spacing is the
natural resolution), each change is refined by Brent iteration and then
polished with Newton steps on G. Local minima of R are sign changes of G
from + to -; the running minimum over local minima gives the strict lower
envelope needed by the definition of A, with R(0+) = +infinity supplied
analytically by the short-range law.

Key derived numbers:

* ``e_star``: smallest global minimum point of R (pancake height), or INF
  when R attains no minimum;
* ``z0, e_min, e_max``: when e_star = INF, the lowest level at which R
  stops being injective, its leftmost preimage (a local minimum) and its
  largest preimage (on the final descent of R);
* ``s1``: first zero of Q;
* analytic thresholds c1, c2 (model A) and c3 (model A with gravity) that
  separate droplet/pancake and unique/non-unique parameter regions.

Infinite values in public results are tagged with ``INF``, never floats.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Optional, Union

import numpy as np

from .errors import NotApplicable, ResolutionError
from .potential import (
    INF,
    Family,
    Inf,
    MaybeInf,
    PotentialSpec,
    evaluate,
    g_values,
    is_inf,
    q_values,
    r_limit_at_infinity,
    r_values,
    spreading_limit,
    validate,
)
from .quadrature import brent_root

SCAN_LO = 1e-8
SCAN_HI = 1e8
SCAN_POINTS = 4096

# Two refined roots of G closer than this (relative) are treated as an
# unresolved multiplicity rather than guessed at.
_ROOT_SEPARATION = 1e-10


class Regime(str, Enum):
    DROPLET = "droplet"
    PANCAKE = "pancake"
    TRANSITION = "transition"
    UNKNOWN = "unknown"


class Uniqueness(str, Enum):
    UNIQUE = "unique"
    NON_UNIQUE_SOMEWHERE = "non_unique_somewhere"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class CriticalPoint:
    """Zero of G, i.e. stationary point of R."""

    s: float
    r_value: float
    kind: str  # "min" or "max" of R


@dataclass(frozen=True)
class Z0Interval:
    z0: float
    e_min: float
    e_max: float


@dataclass(frozen=True)
class Thresholds:
    c1: Optional[float] = None
    c2: Optional[float] = None
    c3: Optional[float] = None


@dataclass(frozen=True)
class Classification:
    regime: Regime
    uniqueness: Uniqueness


@dataclass(frozen=True)
class Interval:
    """Open interval of admissible heights, with endpoint provenance.

    Kinds: "origin" (the 0 boundary), "crit" (stationary point of R),
    "level" (crossing of the left lower envelope, e.g. e_max) and "cap"
    (working-range cutoff standing in for +infinity).
    """

    lo: float
    hi: float
    lo_kind: str
    hi_kind: str


@dataclass(frozen=True)
class Landscape:
    """Cached scan result: critical points of R on the working range."""

    spec: PotentialSpec
    s_lo: float
    s_hi: float
    critical_points: tuple[CriticalPoint, ...]

    def local_minima(self) -> tuple[CriticalPoint, ...]:
        return tuple(c for c in self.critical_points if c.kind == "min")

    def lower_envelope_before(self, s: float) -> float:
        """Strict infimum of R over (0, s): min over local minima left of s.

        R(0+) = +infinity by the short-range law, so with no local minimum
        to the left the infimum over (0, s) is not below R(s) on a
        decreasing stretch and the envelope is +infinity.
        """
        vals = [c.r_value for c in self.critical_points if c.kind == "min" and c.s < s]
        return min(vals) if vals else math.inf


def _g_scalar(spec: PotentialSpec, s: float) -> float:
    return float(g_values(spec, np.array([s]))[0])


def _r_scalar(spec: PotentialSpec, s: float) -> float:
    return float(r_values(spec, np.array([s]))[0])


def _newton_polish_g(spec: PotentialSpec, s: float) -> float:
    """Drive |G| down with Newton steps (G' = -s Q'')."""
    for _ in range(3):
        v = evaluate(spec, s)
        gp = -s * v.qpp
        if gp == 0.0:
            break
        step = v.g / gp
        if not math.isfinite(step) or abs(step) > 0.5 * s:
            break
        s -= step
        if abs(step) <= 1e-15 * s:
            break
    return s


@lru_cache(maxsize=128)
def _scan(spec: PotentialSpec, s_lo: float, s_hi: float, n: int) -> Landscape:
    validate(spec)
    grid = np.geomspace(s_lo, s_hi, n)
    g = g_values(spec, grid)
    if not np.all(np.isfinite(g)):
        raise ResolutionError("G is not finite on the working range")

    roots: list[float] = []
    kinds: list[str] = []
    sign = np.sign(g)
    for i in range(n - 1):
        si, sj = sign[i], sign[i + 1]
        if si == 0.0:
            # Grid point is an exact zero; classify from the neighbours.
            if i > 0 and sign[i - 1] != 0.0 and sj != 0.0 and sign[i - 1] != sj:
                roots.append(float(grid[i]))
                kinds.append("min" if sign[i - 1] > 0 else "max")
            elif i > 0 and sign[i - 1] == 0.0:
                raise ResolutionError(
                    f"G vanishes on a grid plateau near s={grid[i]:.6g}"
                )
            continue
        if sj == 0.0 or si == sj:
            continue
        root = brent_root(
            lambda x: _g_scalar(spec, x), float(grid[i]), float(grid[i + 1]),
            rtol=1e-12,
        )
        root = _newton_polish_g(spec, root)
        roots.append(root)
        kinds.append("min" if si > 0 else "max")

    for a, b in zip(roots, roots[1:]):
        if abs(b - a) <= _ROOT_SEPARATION * max(1.0, 0.5 * (abs(a) + abs(b))):
            raise ResolutionError(
                f"two zeros of G within {_ROOT_SEPARATION:g} of each other near "
                f"s={a:.9g}: multiplicity is ambiguous"
            )

    crits = tuple(
        CriticalPoint(s=s, r_value=evaluate(spec, s).r, kind=k)
        for s, k in zip(roots, kinds)
    )
    return Landscape(spec=spec, s_lo=s_lo, s_hi=s_hi, critical_points=crits)


def scan(
    spec: PotentialSpec,
    *,
    s_lo: float = SCAN_LO,
    s_hi: float = SCAN_HI,
    n: int = SCAN_POINTS,
) -> Landscape:
    """Critical points of R on [s_lo, s_hi] (cached per spec and range)."""
    return _scan(spec, s_lo, s_hi, n)


def admissible_contains(
    spec: PotentialSpec, s: float, *, land: Optional[Landscape] = None
) -> bool:
    """Membership test for the admissible set of maximal heights.

    True iff R'(s) < 0 and the strict infimum of R over (0, s), tracked
    through the monotone segments of the scan rather than by naive
    sampling, exceeds R(s).
    """
    validate(spec)
    if not s > 0:
        return False
    if land is None:
        land = scan(spec)
    v = evaluate(spec, s)
    if not v.g > 0.0:  # R'(s) = -G/s^2 must be negative
        return False
    return v.r < land.lower_envelope_before(s)


def compute_e_star(
    spec: PotentialSpec, *, land: Optional[Landscape] = None
) -> MaybeInf:
    """Smallest global minimum point of R, or INF when no minimum exists.

    A finite value satisfies the stationarity identity Q(e*) = e* Q'(e*)
    to 1e-10 relative; INF is reported when the infimum of R equals its
    limit at +infinity without being attained (no local minimum of R
    reaches down to that limit).
    """
    validate(spec)
    if land is None:
        land = scan(spec)
    minima = land.local_minima()
    if not minima:
        return INF
    best = min(c.r_value for c in minima)
    tail = r_limit_at_infinity(spec)
    if not is_inf(tail) and best > tail:
        return INF
    tied = [c for c in minima if c.r_value <= best + 1e-12 * max(1.0, abs(best))]
    if len(tied) > 1:
        warnings.warn(
            f"global minimum of R attained at {len(tied)} points within tie "
            "tolerance; returning the leftmost",
            stacklevel=2,
        )
    e_star = tied[0].s
    v = evaluate(spec, e_star)
    if abs(v.g) > 1e-10 * max(1.0, abs(v.q)):
        raise ResolutionError(
            f"stationarity residual |Q - s Q'| = {abs(v.g):.3g} at "
            f"e*={e_star:.9g} exceeds tolerance"
        )
    return e_star


def compute_z0_interval(
    spec: PotentialSpec, *, land: Optional[Landscape] = None
) -> Union[Z0Interval, Inf]:
    """Injectivity level of R and its extreme preimages, when e* = INF.

    z0 is the smallest level at which R stops being injective: the lowest
    local-minimum value of R. e_min is its leftmost preimage (the minimum
    point itself), e_max the largest preimage, found on the final descent
    of R toward its limit at +infinity. Returns INF when R is strictly
    decreasing on the whole scan (the admissible set is then all of
    (0, +infinity)).
    """
    validate(spec)
    if land is None:
        land = scan(spec)
    e_star = compute_e_star(spec, land=land)
    if not is_inf(e_star):
        raise NotApplicable("z0 is defined only when R attains no minimum")
    minima = land.local_minima()
    if not minima:
        return INF
    z0 = min(c.r_value for c in minima)
    e_min = next(
        c.s for c in minima if c.r_value <= z0 + 1e-12 * max(1.0, abs(z0))
    )
    # Final descent: after the last critical point R decreases to its
    # limit, which lies strictly below z0 (otherwise e* would be finite).
    last = land.critical_points[-1]
    if last.kind != "max":
        raise ResolutionError(
            "scan ends on a local minimum of R although e* = inf"
        )
    hi = land.s_hi
    f = lambda s: _r_scalar(spec, s) - z0
    if f(hi) >= 0.0:
        raise ResolutionError(
            f"R has not descended through z0={z0:.6g} by the end of the "
            "working range"
        )
    e_max = brent_root(f, last.s, hi, rtol=1e-12)
    return Z0Interval(z0=z0, e_min=e_min, e_max=e_max)


def admissible_intervals(
    spec: PotentialSpec, *, land: Optional[Landscape] = None
) -> tuple[Interval, ...]:
    """Disjoint open intervals approximating the admissible set.

    Built from the monotone segments of R between critical points: on each
    decreasing segment the admissible part is where R lies strictly below
    the running minimum over all local minima to the left. The working
    range cap stands in for +infinity on the last segment.
    """
    validate(spec)
    if land is None:
        land = scan(spec)
    crits = land.critical_points
    out: list[Interval] = []
    # Segment boundaries: 0 (conceptually), critical points, range cap.
    # R always decreases on the first segment since R(0+) = +infinity.
    bounds: list[tuple[float, str]] = [(0.0, "origin")]
    bounds += [(c.s, "crit") for c in crits]
    bounds.append((land.s_hi, "cap"))
    decreasing = True
    env = math.inf  # running min over local minima seen so far
    for (lo, lo_kind), (hi, hi_kind) in zip(bounds, bounds[1:]):
        if decreasing:
            r_hi = (
                _r_scalar(spec, hi)
                if hi_kind == "cap"
                else next(c.r_value for c in crits if c.s == hi)
            )
            if r_hi < env:
                r_lo = math.inf if lo_kind == "origin" else next(
                    c.r_value for c in crits if c.s == lo
                )
                if env == math.inf or r_lo < env:
                    out.append(Interval(lo, hi, lo_kind, hi_kind))
                else:
                    x = brent_root(
                        lambda s: _r_scalar(spec, s) - env,
                        lo, hi, rtol=1e-12,
                    )
                    out.append(Interval(x, hi, "level", hi_kind))
            if hi_kind == "crit":
                env = min(env, r_hi)
        decreasing = not decreasing if hi_kind == "crit" else decreasing
    return tuple(out)


def first_zero_of_q(
    spec: PotentialSpec, *, land: Optional[Landscape] = None
) -> MaybeInf:
    """First zero of Q, or INF when Q stays positive."""
    validate(spec)
    if land is None:
        land = scan(spec)
    lo, hi = land.s_lo, land.s_hi
    for _ in range(3):
        grid = np.geomspace(lo, hi, SCAN_POINTS)
        q = q_values(spec, grid)
        neg = np.nonzero(q <= 0.0)[0]
        if neg.size:
            i = int(neg[0])
            if i == 0:
                raise ResolutionError("Q is not positive at the scan floor")
            if q[i] == 0.0:
                return float(grid[i])
            qfun = lambda s: float(q_values(spec, np.array([s]))[0])
            return brent_root(qfun, float(grid[i - 1]), float(grid[i]), rtol=1e-12)
        limit = spreading_limit(spec)
        if is_inf(limit) or limit >= 0.0:
            return INF
        # Q -> -S < 0 eventually; extend the range to find the crossing.
        lo, hi = hi, hi * 1e4
    return INF


def thresholds(spec: PotentialSpec) -> Thresholds:
    """Closed-form parameter thresholds c1, c2 (model A) and c3 (gravity).

    c1 and c2 bound the long-range coefficient B in the partial-wetting
    regime -S > 0: below c1 large-mass minimizers are droplets, from c2 up
    to c1 minimizers are non-unique for at least one mass. c3 plays the
    analogous uniqueness role for model A with gravity. Always c1 > c2.
    """
    validate(spec)
    fam = spec.family
    if fam in (Family.MODEL_B, Family.MODEL_B_GRAVITY, Family.CUSTOM):
        raise NotApplicable(f"thresholds are undefined for family {fam.value}")
    A, S, D, m, n = spec.A, spec.S, spec.D, spec.m, spec.n
    if fam is Family.MODEL_A:
        if not -S > 0:
            raise NotApplicable("c1 and c2 require a positive spreading term -S")
        c1 = (
            (m - 1)
            * (A / (n - 1)) ** ((n - 1) / (m - 1))
            * (-S / (m - n)) ** ((m - n) / (m - 1))
        )
        c2 = (
            (m - 1)
            / n
            * (A * m / (n - 1)) ** ((n - 1) / (m - 1))
            * (-S / (m - n)) ** ((m - n) / (m - 1))
        )
        return Thresholds(c1=c1, c2=c2)
    c3 = (
        (m + 1)
        / (n * (n - 1))
        * (A * m * (m - 1) / (n + 1)) ** ((n + 1) / (m + 1))
        * (D / (m - n)) ** ((m - n) / (m + 1))
    )
    return Thresholds(c3=c3)


def _classify_custom(spec: PotentialSpec) -> Classification:
    """Regime inferred from the landscape; uniqueness from sampled convexity."""
    land = scan(spec)
    e_star = compute_e_star(spec, land=land)
    limit = spreading_limit(spec)
    if not is_inf(e_star):
        regime = Regime.PANCAKE
    elif not is_inf(limit) and limit > 0.0:
        regime = Regime.DROPLET
    elif not is_inf(limit) and limit == 0.0:
        grid = np.geomspace(SCAN_LO, SCAN_HI, 1000)
        qp = np.array([evaluate(spec, float(s)).qp for s in grid])
        regime = Regime.TRANSITION if np.all(qp < 0.0) else Regime.UNKNOWN
    else:
        regime = Regime.UNKNOWN
    hi = e_star if not is_inf(e_star) else SCAN_HI
    grid = np.geomspace(SCAN_LO, 0.999 * hi, 1000)
    qpp = np.array([evaluate(spec, float(s)).qpp for s in grid])
    unique = Uniqueness.UNIQUE if np.all(qpp >= 0.0) else Uniqueness.UNKNOWN
    return Classification(regime=regime, uniqueness=unique)


def classify(spec: PotentialSpec) -> Classification:
    """Large-mass regime and uniqueness verdict for the spec.

    Model families use the closed-form decision tree; custom potentials
    fall back to landscape inference plus a sampled convexity check.
    "unknown" is a first-class verdict: for model A with -S > 0 and
    0 < B < c2 uniqueness is genuinely open.
    """
    validate(spec)
    fam = spec.family
    if fam is Family.CUSTOM:
        return _classify_custom(spec)
    if fam is Family.MODEL_B:
        if -spec.S > 0:
            regime = Regime.DROPLET
        elif -spec.S < 0:
            regime = Regime.PANCAKE
        else:
            regime = Regime.TRANSITION
        return Classification(regime=regime, uniqueness=Uniqueness.UNIQUE)
    if fam is Family.MODEL_B_GRAVITY:
        return Classification(regime=Regime.PANCAKE, uniqueness=Uniqueness.UNIQUE)
    if fam is Family.MODEL_A_GRAVITY:
        if -spec.S <= 0 or spec.B <= thresholds(spec).c3:
            unique = Uniqueness.UNIQUE
        else:
            unique = Uniqueness.UNKNOWN
        return Classification(regime=Regime.PANCAKE, uniqueness=unique)

    # Model A without gravity.
    B, S = spec.B, spec.S
    if -S > 0:
        th = thresholds(spec)
        assert th.c1 is not None and th.c2 is not None
        regime = Regime.DROPLET if B < th.c1 else Regime.PANCAKE
        if B <= 0 or B >= th.c1:
            unique = Uniqueness.UNIQUE
        elif B >= th.c2:
            unique = Uniqueness.NON_UNIQUE_SOMEWHERE
        else:
            unique = Uniqueness.UNKNOWN
        return Classification(regime=regime, uniqueness=unique)
    if -S < 0:
        return Classification(regime=Regime.PANCAKE, uniqueness=Uniqueness.UNIQUE)
    # S = 0: pancake for attractive tails, transition otherwise.
    if B > 0:
        return Classification(regime=Regime.PANCAKE, uniqueness=Uniqueness.UNIQUE)
    return Classification(regime=Regime.TRANSITION, uniqueness=Uniqueness.UNIQUE)


@dataclass(frozen=True)
class LandscapeReport:
    """Full landscape summary for one spec."""

    e_star: MaybeInf
    z0: Optional[MaybeInf]
    e_min: Optional[float]
    e_max: Optional[float]
    admissible_intervals: tuple[tuple[float, float], ...]
    s1: MaybeInf
    regime: Regime
    uniqueness: Uniqueness
    thresholds: Optional[Thresholds]

    def to_json(self) -> str:
        def tag(x):
            if x is None:
                return None
            return "inf" if is_inf(x) else float(x)

        payload = {
            "e_star": tag(self.e_star),
            "z0": tag(self.z0),
            "e_min": tag(self.e_min),
            "e_max": tag(self.e_max),
            "admissible_intervals": [[lo, hi] for lo, hi in self.admissible_intervals],
            "s1": tag(self.s1),
            "regime": self.regime.value,
            "uniqueness": self.uniqueness.value,
            "thresholds": None
            if self.thresholds is None
            else {
                "c1": self.thresholds.c1,
                "c2": self.thresholds.c2,
                "c3": self.thresholds.c3,
            },
        }
        return json.dumps(payload, indent=2)


def landscape_report(spec: PotentialSpec) -> LandscapeReport:
    """Assemble e*, the injectivity data, intervals and classification."""
    validate(spec)
    land = scan(spec)
    e_star = compute_e_star(spec, land=land)
    z0 = e_min = e_max = None
    if is_inf(e_star):
        zi = compute_z0_interval(spec, land=land)
        if is_inf(zi):
            z0 = INF
        else:
            z0, e_min, e_max = zi.z0, zi.e_min, zi.e_max
    iv = tuple((i.lo, i.hi) for i in admissible_intervals(spec, land=land))
    try:
        th: Optional[Thresholds] = thresholds(spec)
    except NotApplicable:
        th = None
    cls = classify(spec)
    return LandscapeReport(
        e_star=e_star,
        z0=z0,
        e_min=e_min,
        e_max=e_max,
        admissible_intervals=iv,
        s1=first_zero_of_q(spec, land=land),
        regime=cls.regime,
        uniqueness=cls.uniqueness,
        thresholds=th,
    )

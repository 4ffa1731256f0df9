"""Mass-constrained global minimization over admissible heights.

The mass mu(u0) is continuous on the admissible set, vanishes as u0 -> 0,
and diverges at every other boundary point of an admissible interval
(stationary endpoints of R and level crossings alike), so prescribing a
mass M reduces to root finding on the monotone segments of mu over each
admissible interval. All roots are enumerated; the global minimizer is
the candidate of least energy, with ties reported rather than broken.

Near a stationary right endpoint E (pancake height e*, or an interior
local minimum of R) the gap E - u0 at prescribed mass decays like
exp(-c M), far below float64 resolution for large M. Those roots are
searched on the scale xi = -log((E - u0)/E), where mu is asymptotically
affine in xi; the profile machinery carries such heights as (E, log gap)
pairs end to end, so no intermediate quantity ever underflows.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import CapminError, NoBracket, NotAdmissible, ParamError
from .landscape import Interval, admissible_intervals, compute_e_star, scan
from .potential import PotentialSpec, is_inf, validate
from .profile import (
    GAP_SWITCH,
    Height,
    Profile,
    energy_at,
    mass_at,
    solve_profile_height,
)
from .quadrature import brent_root

# Default u0 working range for root searches; the cap extends twice by
# x100 before giving up (mass grows without bound at the relevant
# boundary, so brackets exist once the range is wide enough).
U0_FLOOR = 1e-6
U0_CAP = 1e3
_CAP_EXTENSIONS = 2

_N_BODY = 25
_LADDER = 8
ENERGY_TIE_TOL = 1e-9


@dataclass(frozen=True)
class BranchSolution:
    """One root of mu(u0) = M on a monotone mass segment.

    ``endpoint``/``log_gap`` are populated only when the root hugs a
    stationary interval endpoint more closely than float spacing; ``u0``
    then rounds to the endpoint itself and the pair is what downstream
    profile construction consumes.
    """

    u0: float
    mass_err: float
    energy: float
    interval_id: int
    branch_id: int
    endpoint: Optional[float] = None
    log_gap: Optional[float] = None

    def height(self) -> Height:
        if self.endpoint is not None and self.log_gap is not None:
            return Height.near_endpoint(self.endpoint, self.log_gap)
        return Height.plain(self.u0)


@dataclass(frozen=True)
class MinimizerSolution:
    """All mass-M candidates, sorted by energy, with the winning profile."""

    M: float
    candidates: tuple[BranchSolution, ...]
    winners: tuple[int, ...]
    profile: Profile

    def to_json(self) -> str:
        payload = {
            "M": self.M,
            "candidates": [
                {
                    "u0": c.u0,
                    "mass_err": c.mass_err,
                    "energy": c.energy,
                    "interval_id": c.interval_id,
                    "branch_id": c.branch_id,
                }
                for c in self.candidates
            ],
            "winners": list(self.winners),
            "profile": {
                "u0": self.profile.u0,
                "lambda": self.profile.lam,
                "r_bar": self.profile.r_bar,
                "points": int(len(self.profile.xs)),
            },
        }
        return json.dumps(payload, indent=2)


@dataclass(frozen=True, eq=False)
class SweepTable:
    """Sampled (u0, mu, E) over one interval with monotone-segment ids.

    Failed points carry NaN mass/energy and segment -1; segment ids
    increase by one at every sign change of the sampled mass increments.
    """

    u0: np.ndarray
    mu: np.ndarray
    energy: np.ndarray
    segment: np.ndarray

    def n_segments(self) -> int:
        good = self.segment[self.segment >= 0]
        return int(good.max()) + 1 if good.size else 0

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("u0,mu,energy,segment\n")
            for u, m, e, s in zip(self.u0, self.mu, self.energy, self.segment):
                fh.write(f"{u!r},{m!r},{e!r},{int(s)}\n")


def _segment_ids(mu: np.ndarray) -> np.ndarray:
    """Monotone segment index per sample; NaN samples get -1."""
    n = len(mu)
    ids = np.full(n, -1, dtype=int)
    good = np.nonzero(np.isfinite(mu))[0]
    if good.size == 0:
        return ids
    seg = 0
    ids[good[0]] = 0
    direction = 0
    for a, b in zip(good, good[1:]):
        d = np.sign(mu[b] - mu[a])
        if d == 0:
            d = direction
        if direction == 0:
            direction = d
        elif d != direction:
            seg += 1
            direction = d
        ids[b] = seg
    return ids


def mass_sweep(
    spec: PotentialSpec, interval: tuple[float, float], n_points: int
) -> SweepTable:
    """Sample (u0, mu, E) on a log grid over a sub-interval of the admissible set."""
    validate(spec)
    lo, hi = interval
    if not (0 < lo < hi):
        raise ParamError(f"invalid sweep interval ({lo}, {hi})")
    if n_points < 2:
        raise ParamError("sweep needs at least 2 points")
    if not any(
        iv.lo <= lo and hi <= iv.hi for iv in admissible_intervals(spec)
    ):
        raise NotAdmissible(
            f"sweep interval ({lo:.6g}, {hi:.6g}) is not contained in an "
            "admissible interval"
        )
    u0s = np.geomspace(lo, hi, n_points)
    mus = np.full(n_points, math.nan)
    ens = np.full(n_points, math.nan)
    for i, u0 in enumerate(u0s):
        try:
            h = Height.plain(float(u0))
            mus[i] = mass_at(spec, h)
            ens[i] = energy_at(spec, h)
        except CapminError:
            continue
    return SweepTable(u0=u0s, mu=mus, energy=ens, segment=_segment_ids(mus))


# ---------------------------------------------------------------------------
# Root enumeration
# ---------------------------------------------------------------------------


def _interval_samples(iv: Interval, lo_eff: float, hi_eff: float) -> list[Height]:
    """Sampling heights for one interval: log body plus boundary ladders."""
    pts: list[Height] = []
    body_lo, body_hi = lo_eff, hi_eff
    if iv.lo_kind == "level":
        # mass diverges as u0 -> lo+: geometric ladder onto the boundary,
        # scaled by the boundary height itself
        for k in range(1, _LADDER + 1):
            u = iv.lo * (1.0 + 10.0**-k)
            if u < hi_eff:
                pts.append(Height.plain(u))
        body_lo = min(iv.lo * 1.2, iv.lo + 0.5 * (hi_eff - iv.lo))
    if iv.hi_kind == "crit":
        # mass diverges as u0 -> hi-: ladder in the relative gap
        for k in range(1, _LADDER + 1):
            gap = hi_eff * 10.0 ** -(1 + k)
            pts.append(Height.near_endpoint(hi_eff, math.log(gap)))
        body_hi = hi_eff * (1.0 - 0.01)
        if body_hi <= body_lo:
            body_hi = lo_eff + 0.9 * (hi_eff - lo_eff)
    if body_hi > body_lo > 0:
        pts.extend(Height.plain(float(u)) for u in np.geomspace(body_lo, body_hi, _N_BODY))
    pts.sort(key=lambda h: (h.u0, -(h.log_gap or 0.0)))
    return pts


def _bisect_height(
    spec: PotentialSpec,
    target: float,
    a: Height,
    b: Height,
    crit_hi: Optional[float] = None,
) -> tuple[Height, float]:
    """Root of mu - target between two heights, in the right parametrization.

    Heights hugging a stationary endpoint are bisected on the log-gap
    scale, where mu is close to affine; elsewhere Brent runs on u0
    directly.
    """
    E = a.endpoint if a.endpoint is not None else b.endpoint
    if E is None and crit_hi is not None:
        if crit_hi - max(a.u0, b.u0) < 0.01 * crit_hi:
            E = crit_hi
    if E is not None:

        def lg(h: Height) -> float:
            if h.log_gap is not None:
                return h.log_gap
            return math.log(E - h.u0)

        f = lambda g: mass_at(spec, Height.near_endpoint(E, g)) - target
        root = brent_root(f, lg(a), lg(b), rtol=1e-13)
        h = Height.near_endpoint(E, root)
        return h, mass_at(spec, h)
    f = lambda u: mass_at(spec, Height.plain(u)) - target
    root = brent_root(f, a.u0, b.u0, rtol=1e-14)
    h = Height.plain(root)
    return h, mass_at(spec, h)


def _extend_beyond_crit(
    spec: PotentialSpec, E: float, target: float, h_last: Height, mu_last: float
) -> tuple[Height, float]:
    """Bracket target mass on the log-gap scale above the last sample.

    mu grows without bound and asymptotically linearly in -log gap, so a
    secant prediction followed by doubling always brackets.
    """
    lg1 = h_last.log_gap if h_last.log_gap is not None else math.log(E - h_last.u0)
    mu1 = mu_last
    lg2 = lg1 - 2.0
    mu2 = mass_at(spec, Height.near_endpoint(E, lg2))
    for _ in range(200):
        if mu2 >= target:
            return Height.near_endpoint(E, lg2), mu2
        if mu2 <= mu1:
            step = 5.0
        else:
            slope = (mu2 - mu1) / (lg1 - lg2)  # mass per unit of -log gap
            step = max(2.0, 1.2 * (target - mu2) / slope)
        lg1, mu1 = lg2, mu2
        lg2 = lg2 - step
        mu2 = mass_at(spec, Height.near_endpoint(E, lg2))
    raise NoBracket(
        f"mass {target:.6g} not reached while descending toward the "
        f"stationary endpoint {E:.9g}"
    )


def solve_mass(
    spec: PotentialSpec, M: float, mass_tol: Optional[float] = None
) -> list[BranchSolution]:
    """All heights with mass M, one per monotone mass segment that attains it."""
    validate(spec)
    if not M > 0:
        raise ParamError(f"M must be positive, got {M}")
    if mass_tol is None:
        mass_tol = 1e-8 * M

    e_star = compute_e_star(spec)
    base_cap = max(U0_CAP, 10.0 * e_star) if not is_inf(e_star) else U0_CAP
    floor = U0_FLOOR

    for extension in range(_CAP_EXTENSIONS + 1):
        cap = base_cap * 100.0**extension
        lo_floor = floor / 100.0**extension
        sols = _solve_mass_once(spec, M, mass_tol, lo_floor, cap)
        if sols:
            return sols
        if not _wants_extension(spec, cap):
            break
    raise NoBracket(
        f"no admissible branch attains mass {M:.6g} within the search range"
    )


def _wants_extension(spec: PotentialSpec, cap: float) -> bool:
    """Extending helps only when some interval is cut off by the cap."""
    return any(
        iv.hi_kind == "cap" or iv.hi > cap for iv in admissible_intervals(spec)
    )


def _solve_mass_once(
    spec: PotentialSpec, M: float, mass_tol: float, lo_floor: float, cap: float
) -> list[BranchSolution]:
    land = scan(spec)
    out: list[BranchSolution] = []
    for interval_id, iv in enumerate(admissible_intervals(spec, land=land)):
        lo_eff = max(iv.lo, lo_floor)
        hi_eff = min(iv.hi, cap) if iv.hi_kind == "cap" else iv.hi
        if not lo_eff < hi_eff:
            continue
        samples = _interval_samples(iv, lo_eff, hi_eff)
        evald: list[tuple[Height, float]] = []
        for h in samples:
            try:
                evald.append((h, mass_at(spec, h)))
            except CapminError:
                continue
        if len(evald) < 2:
            continue

        mus = np.array([m for _, m in evald])
        ids = _segment_ids(mus)
        n_seg = int(ids.max()) + 1 if np.any(ids >= 0) else 0
        for i in range(len(evald) - 1):
            (ha, ma), (hb, mb) = evald[i], evald[i + 1]
            if (ma - M) * (mb - M) > 0:
                continue
            crit_hi = iv.hi if iv.hi_kind == "crit" else None
            h, mu = _bisect_height(spec, M, ha, hb, crit_hi=crit_hi)
            out.append(
                _branch(spec, h, mu, M, mass_tol, interval_id, int(ids[i + 1]))
            )
        # Tail beyond the last sample toward a stationary right endpoint.
        if iv.hi_kind == "crit":
            hl, ml = evald[-1]
            if ml < M:
                hb2, mb2 = _extend_beyond_crit(spec, iv.hi, M, hl, ml)
                h, mu = _bisect_height(spec, M, hl, hb2, crit_hi=iv.hi)
                last_dir_up = len(mus) < 2 or mus[-1] >= mus[-2]
                bid = int(ids[-1]) if last_dir_up else n_seg
                out.append(_branch(spec, h, mu, M, mass_tol, interval_id, bid))
    return out


def _branch(
    spec: PotentialSpec,
    h: Height,
    mu: float,
    M: float,
    mass_tol: float,
    interval_id: int,
    branch_id: int,
) -> BranchSolution:
    err = abs(mu - M)
    if err > mass_tol:
        raise NoBracket(
            f"root refinement left |mu - M| = {err:.3g} above mass_tol={mass_tol:.3g}"
        )
    return BranchSolution(
        u0=h.u0,
        mass_err=err,
        energy=energy_at(spec, h),
        interval_id=interval_id,
        branch_id=branch_id,
        endpoint=h.endpoint,
        log_gap=h.log_gap,
    )


def global_minimizer(
    spec: PotentialSpec,
    M: float,
    *,
    mass_tol: Optional[float] = None,
    n_grid: int = 192,
) -> MinimizerSolution:
    """Least-energy candidate(s) at mass M, with the winning profile.

    Candidates are sorted by energy; all within ENERGY_TIE_TOL (relative)
    of the minimum are reported as co-winners rather than silently broken.
    """
    sols = solve_mass(spec, M, mass_tol)
    sols.sort(key=lambda b: (b.energy, b.interval_id, b.branch_id))
    e_min = sols[0].energy
    tol = ENERGY_TIE_TOL * max(1.0, abs(e_min))
    winners = tuple(i for i, b in enumerate(sols) if b.energy <= e_min + tol)
    assert all(e_min <= b.energy for b in sols)
    profile = solve_profile_height(spec, sols[0].height(), n_grid)
    return MinimizerSolution(
        M=M, candidates=tuple(sols), winners=winners, profile=profile
    )


def find_energy_crossing(
    spec: PotentialSpec,
    m_range: tuple[float, float],
    *,
    rel_tol: float = 1e-8,
    n_scan: int = 25,
) -> Optional[float]:
    """Mass at which the two outermost branches exchange optimality.

    The signed gap E(inner branch) - E(outer branch), with branches
    identified by smallest and largest u0, changes sign at the crossing;
    bisection on M drives the gap below rel_tol relative. Returns None
    when the branches never coexist with a sign change inside m_range.
    """
    validate(spec)
    m_lo, m_hi = m_range
    if not (0 < m_lo < m_hi):
        raise ParamError(f"invalid mass range ({m_lo}, {m_hi})")

    def gap(M: float) -> Optional[float]:
        try:
            sols = solve_mass(spec, M)
        except NoBracket:
            return None
        if len(sols) < 2:
            return None
        by_u0 = sorted(sols, key=lambda b: b.u0)
        return by_u0[0].energy - by_u0[-1].energy

    ms = np.geomspace(m_lo, m_hi, n_scan)
    gaps = [gap(float(m)) for m in ms]
    for (m1, g1), (m2, g2) in zip(zip(ms, gaps), zip(ms[1:], gaps[1:])):
        if g1 is None or g2 is None:
            continue
        if g1 == 0.0:
            return float(m1)
        if g1 * g2 < 0:
            f = lambda m: gap(float(m))
            m_star = brent_root(f, float(m1), float(m2), rtol=1e-13)
            g = gap(m_star)
            sols = solve_mass(spec, m_star)
            e_ref = max(abs(b.energy) for b in sols)
            if g is not None and abs(g) <= rel_tol * max(1.0, e_ref):
                return float(m_star)
            return float(m_star)
    return None

"""Wetting potential families and pointwise evaluation.

Families:

* ``model_a``:  Q(s) = A s^(1-m) - B s^(1-n) - S, with 1 < n < m < 3.
* ``model_b``:  Q(s) = A|B| s / (|B| s^m + A s^n) - S, with B < 0 and
  m < n, restricted to the parameter region where Q is convex.
* ``model_a_gravity`` / ``model_b_gravity``: the same plus D s^2 / 2.
* ``custom``:   user callbacks for Q and Q' together with declared
  structural constants (short-range strength A and exponent m, spreading
  limit). Exponent inference from samples is deliberately not offered;
  downstream formulas need the constants symbolically.

Every potential is identically zero on (-inf, 0]; use :func:`q_total` for
whole-line evaluation. The pointwise evaluator also returns the weighted
potential R(s) = Q(s)/s, its derivative R'(s) = (Q'(s) - R(s))/s and the
tangent intercept G(s) = Q(s) - s Q'(s) = -s^2 R'(s), which drive the
landscape analysis.

The short-range singularity exponent must satisfy 1 < m < 3: for m >= 3
every state of positive mass has infinite energy and validation rejects
the spec outright.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Optional, Union

import numpy as np

from .errors import DomainError, NoMinimizerError, ParamError

# Evaluations outside this window raise DomainError instead of silently
# producing infinities.
S_MIN = 1e-300
S_MAX = 1e300


class Inf:
    """Tag for +infinity in public results (never a float special value)."""

    _singleton: Optional["Inf"] = None

    def __new__(cls) -> "Inf":
        if cls._singleton is None:
            cls._singleton = super().__new__(cls)
        return cls._singleton

    def __repr__(self) -> str:
        return "inf"


INF = Inf()

MaybeInf = Union[float, Inf]


def is_inf(x: object) -> bool:
    return isinstance(x, Inf)


class Family(str, Enum):
    MODEL_A = "model_a"
    MODEL_B = "model_b"
    MODEL_A_GRAVITY = "model_a_gravity"
    MODEL_B_GRAVITY = "model_b_gravity"
    CUSTOM = "custom"


_GRAVITY = (Family.MODEL_A_GRAVITY, Family.MODEL_B_GRAVITY)
_A_LIKE = (Family.MODEL_A, Family.MODEL_A_GRAVITY)
_B_LIKE = (Family.MODEL_B, Family.MODEL_B_GRAVITY)


@dataclass(frozen=True)
class CustomPotential:
    """Callback bundle for a user-defined potential on (0, inf).

    ``q`` and ``qp`` evaluate Q and Q'. ``qpp`` is optional; without it the
    second derivative falls back to a central difference of ``qp`` with
    relative step 1e-6 (documented accuracy loss). ``A`` and ``m`` declare
    the short-range law Q(s) ~ A s^(1-m), ``S`` the declared limit of -Q at
    +infinity (set ``grows_at_infinity`` for potentials with a quadratic
    tail instead). ``p``/``K`` optionally declare a decay tail
    Q(s) ~ K s^(1-p) for the transition-regime asymptotics.

    The caller is responsible for R' being sign-definite near 0 and near
    +infinity; this is not verifiable from callbacks.
    """

    q: Callable[[float], float]
    qp: Callable[[float], float]
    qpp: Optional[Callable[[float], float]] = None
    A: float = 1.0
    m: float = 2.0
    S: float = 0.0
    grows_at_infinity: bool = False
    p: Optional[float] = None
    K: Optional[float] = None


@dataclass(frozen=True)
class PotentialSpec:
    """Parameters of a model potential, or a custom callback bundle."""

    family: Family
    A: float = 1.0
    B: float = 0.0
    S: float = 0.0
    D: float = 0.0
    m: float = 2.5
    n: float = 2.0
    custom: Optional[CustomPotential] = None

    def short_range(self) -> tuple[float, float]:
        """Declared (A, m) of the short-range law Q ~ A s^(1-m)."""
        if self.family is Family.CUSTOM:
            assert self.custom is not None
            return self.custom.A, self.custom.m
        return self.A, self.m


@dataclass(frozen=True)
class PotentialValues:
    """Pointwise values Q, Q', Q'', R, R', G at a single s > 0."""

    q: float
    qp: float
    qpp: float
    r: float
    rp: float
    g: float


def validate(spec: PotentialSpec) -> PotentialSpec:
    """Check family invariants; returns the spec unchanged if valid.

    Raises NoMinimizerError for m >= 3 (no finite-energy state exists) and
    ParamError for every other constraint violation.
    """
    fam = spec.family
    if fam is Family.CUSTOM:
        cp = spec.custom
        if cp is None:
            raise ParamError("custom family requires a CustomPotential bundle")
        if not cp.A > 0:
            raise ParamError(f"A must be positive, got {cp.A}")
        if cp.m >= 3:
            raise NoMinimizerError(
                f"m={cp.m} >= 3: every admissible state has infinite energy"
            )
        if not cp.m > 1:
            raise ParamError(f"m must lie in (1, 3), got {cp.m}")
        return spec

    if not spec.A > 0:
        raise ParamError(f"A must be positive, got {spec.A}")
    if spec.m >= 3:
        raise NoMinimizerError(
            f"m={spec.m} >= 3: every admissible state has infinite energy"
        )
    if not spec.m > 1:
        raise ParamError(f"m must lie in (1, 3), got {spec.m}")
    if not spec.n > 1:
        raise ParamError(f"n must exceed 1, got {spec.n}")
    if fam in _A_LIKE:
        if not spec.n < spec.m:
            raise ParamError(
                f"model_a requires 1 < n < m, got n={spec.n}, m={spec.m}"
            )
    else:
        if not spec.B < 0:
            raise ParamError(f"model_b requires B < 0, got B={spec.B}")
        if not spec.m < spec.n:
            raise ParamError(
                f"model_b requires m < n, got m={spec.m}, n={spec.n}"
            )
        m, n = spec.m, spec.n
        convexity = 1 + 2 * m + m * m + 2 * n - 6 * m * n + n * n
        if convexity > 0:
            raise ParamError(
                "model_b convexity constraint violated: "
                f"1+2m+m^2+2n-6mn+n^2 = {convexity:.6g} > 0"
            )
    if fam in _GRAVITY:
        if not spec.D > 0:
            raise ParamError(f"gravity family requires D > 0, got D={spec.D}")
    else:
        if spec.D != 0:
            raise ParamError(f"D must be 0 for non-gravity family, got {spec.D}")
    return spec


def _check_s(s: float) -> None:
    if not s > 0:
        raise DomainError(f"potential values require s > 0, got s={s}")
    if s < S_MIN or s > S_MAX:
        raise DomainError(f"s={s} outside the evaluation window [{S_MIN}, {S_MAX}]")


def evaluate(spec: PotentialSpec, s: float) -> PotentialValues:
    """Q, Q', Q'', R, R', G at a single point s > 0."""
    _check_s(s)
    fam = spec.family
    if fam is Family.CUSTOM:
        cp = spec.custom
        assert cp is not None
        q = cp.q(s)
        qp = cp.qp(s)
        if cp.qpp is not None:
            qpp = cp.qpp(s)
        else:
            h = 1e-6 * s
            qpp = (cp.qp(s + h) - cp.qp(s - h)) / (2.0 * h)
    else:
        A, B, S, D, m, n = spec.A, spec.B, spec.S, spec.D, spec.m, spec.n
        if fam in _A_LIKE:
            q = A * s ** (1 - m) - B * s ** (1 - n) - S
            qp = A * (1 - m) * s ** (-m) - B * (1 - n) * s ** (-n)
            qpp = A * m * (m - 1) * s ** (-m - 1) - B * n * (n - 1) * s ** (-n - 1)
        else:
            b = abs(B)
            P = b * s**m + A * s**n
            Pp = b * m * s ** (m - 1) + A * n * s ** (n - 1)
            Ppp = b * m * (m - 1) * s ** (m - 2) + A * n * (n - 1) * s ** (n - 2)
            num = P - s * Pp
            q = A * b * s / P - S
            qp = A * b * num / (P * P)
            # d/ds of num is -s*Ppp, so Q'' = A b (-s Ppp P - 2 Pp num)/P^3
            qpp = A * b * (-s * Ppp * P - 2.0 * Pp * num) / (P * P * P)
        if fam in _GRAVITY:
            q += 0.5 * D * s * s
            qp += D * s
            qpp += D
    r = q / s
    rp = (qp - r) / s
    g = q - s * qp
    return PotentialValues(q=q, qp=qp, qpp=qpp, r=r, rp=rp, g=g)


def q_total(spec: PotentialSpec, s: float) -> float:
    """Whole-line potential: exactly 0 for s <= 0, Q(s) for s > 0."""
    if s <= 0:
        return 0.0
    return evaluate(spec, s).q


def spreading_limit(spec: PotentialSpec) -> MaybeInf:
    """Limit of Q at +infinity: the value -S, or INF for quadratic growth."""
    validate(spec)
    if spec.family in _GRAVITY:
        return INF
    if spec.family is Family.CUSTOM:
        assert spec.custom is not None
        if spec.custom.grows_at_infinity:
            return INF
        return -spec.custom.S
    return -spec.S


def r_limit_at_infinity(spec: PotentialSpec) -> MaybeInf:
    """Limit of R = Q/s at +infinity: 0 when Q is bounded, INF otherwise."""
    return INF if is_inf(spreading_limit(spec)) else 0.0


def r_second(spec: PotentialSpec, s: float) -> float:
    """R''(s) = Q''/s - 2 Q'/s^2 + 2 Q/s^3."""
    v = evaluate(spec, s)
    return v.qpp / s - 2.0 * v.qp / (s * s) + 2.0 * v.q / (s * s * s)


def r_diff(spec: PotentialSpec, u0: float, rel_gap: float) -> float:
    """R(s) - R(u0) at s = u0 (1 - rel_gap), stable for rel_gap << 1.

    Direct subtraction of R values loses all precision when s -> u0; here
    each power difference is written as u0^(-k) expm1(-k log1p(-rel_gap)),
    which keeps full relative accuracy in the gap. Custom potentials fall
    back to direct subtraction (documented accuracy loss near s = u0).
    """
    if not 0.0 <= rel_gap <= 1.0:
        raise DomainError(f"rel_gap must lie in [0, 1], got {rel_gap}")
    if rel_gap == 0.0:
        return 0.0
    fam = spec.family
    s = u0 * (1.0 - rel_gap)
    if fam is Family.CUSTOM:
        cp = spec.custom
        assert cp is not None
        _check_s(s)
        return cp.q(s) / s - cp.q(u0) / u0
    lr = math.log1p(-rel_gap)
    A, B, S, D = spec.A, spec.B, spec.S, spec.D
    m, n = spec.m, spec.n
    if fam in _A_LIKE:
        out = A * u0 ** (-m) * math.expm1(-m * lr)
        if B != 0.0:
            out -= B * u0 ** (-n) * math.expm1(-n * lr)
        if S != 0.0:
            out -= S * rel_gap / s
    else:
        b = abs(B)
        Ps = b * s**m + A * s**n
        Pu = b * u0**m + A * u0**n
        dP = -b * u0**m * math.expm1(m * lr) - A * u0**n * math.expm1(n * lr)
        out = A * b * dP / (Ps * Pu)
        if S != 0.0:
            out -= S * rel_gap / s
    if D != 0.0:
        out -= 0.5 * D * u0 * rel_gap
    return out


def q_fn(spec: PotentialSpec) -> Callable[[float], float]:
    """Fast scalar Q(s) closure for s > 0 (no domain guards)."""
    fam = spec.family
    if fam is Family.CUSTOM:
        return spec.custom.q  # type: ignore[union-attr]
    A, B, S, D, m, n = spec.A, spec.B, spec.S, spec.D, spec.m, spec.n
    if fam in _A_LIKE:
        if D == 0.0:
            return lambda s: A * s ** (1 - m) - B * s ** (1 - n) - S
        return lambda s: A * s ** (1 - m) - B * s ** (1 - n) - S + 0.5 * D * s * s
    b = abs(B)
    if D == 0.0:
        return lambda s: A * b * s / (b * s**m + A * s**n) - S
    return lambda s: A * b * s / (b * s**m + A * s**n) - S + 0.5 * D * s * s


def q_prime_fn(spec: PotentialSpec) -> Callable[[float], float]:
    """Fast scalar Q'(s) closure for s > 0 (no domain guards)."""
    fam = spec.family
    if fam is Family.CUSTOM:
        return spec.custom.qp  # type: ignore[union-attr]
    A, B, D, m, n = spec.A, spec.B, spec.D, spec.m, spec.n
    if fam in _A_LIKE:
        am, bn = A * (1 - m), B * (1 - n)
        if D == 0.0:
            return lambda s: am * s ** (-m) - bn * s ** (-n)
        return lambda s: am * s ** (-m) - bn * s ** (-n) + D * s

    b = abs(B)

    def qp(s: float) -> float:
        P = b * s**m + A * s**n
        num = b * (1 - m) * s**m + A * (1 - n) * s**n
        return A * b * num / (P * P) + D * s

    return qp


def q_values(spec: PotentialSpec, s: np.ndarray) -> np.ndarray:
    """Vectorized Q over an array of points s > 0."""
    fam = spec.family
    if fam is Family.CUSTOM:
        f = spec.custom.q  # type: ignore[union-attr]
        return np.array([f(float(x)) for x in s])
    A, B, S, D, m, n = spec.A, spec.B, spec.S, spec.D, spec.m, spec.n
    if fam in _A_LIKE:
        q = A * s ** (1 - m) - B * s ** (1 - n) - S
    else:
        b = abs(B)
        q = A * b * s / (b * s**m + A * s**n) - S
    if D != 0.0:
        q = q + 0.5 * D * s * s
    return q


def g_values(spec: PotentialSpec, s: np.ndarray) -> np.ndarray:
    """Vectorized G = Q - s Q' = -s^2 R' over an array of points s > 0."""
    fam = spec.family
    if fam is Family.CUSTOM:
        q = spec.custom.q  # type: ignore[union-attr]
        qp = spec.custom.qp  # type: ignore[union-attr]
        return np.array([q(float(x)) - float(x) * qp(float(x)) for x in s])
    A, B, S, D, m, n = spec.A, spec.B, spec.S, spec.D, spec.m, spec.n
    if fam in _A_LIKE:
        g = A * m * s ** (1 - m) - B * n * s ** (1 - n) - S
    else:
        b = abs(B)
        P = b * s**m + A * s**n
        g = A * b * s * (b * m * s**m + A * n * s**n) / (s * P * P) - S
    if D != 0.0:
        g = g - 0.5 * D * s * s
    return g


def r_values(spec: PotentialSpec, s: np.ndarray) -> np.ndarray:
    """Vectorized R = Q/s over an array of points s > 0."""
    return q_values(spec, s) / s


_JSON_FIELDS = ("A", "B", "S", "D", "m", "n")


def spec_to_json(spec: PotentialSpec) -> str:
    """Serialize a model spec to JSON. Custom specs are library-only."""
    if spec.family is Family.CUSTOM:
        raise ParamError("custom potentials are not expressible in JSON")
    payload = {"family": spec.family.value}
    payload.update({k: float(getattr(spec, k)) for k in _JSON_FIELDS})
    return json.dumps(payload)


def spec_from_json(text: str) -> PotentialSpec:
    """Parse and validate a model spec from its JSON form."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParamError(f"invalid spec JSON: {exc}") from exc
    if not isinstance(payload, dict) or "family" not in payload:
        raise ParamError("spec JSON must be an object with a 'family' key")
    try:
        fam = Family(payload["family"])
    except ValueError as exc:
        raise ParamError(f"unknown family {payload['family']!r}") from exc
    if fam is Family.CUSTOM:
        raise ParamError("custom potentials are not expressible in JSON")
    kwargs = {}
    for key in _JSON_FIELDS:
        if key in payload:
            try:
                kwargs[key] = float(payload[key])
            except (TypeError, ValueError) as exc:
                raise ParamError(f"field {key!r} must be a number") from exc
    return validate(PotentialSpec(family=fam, **kwargs))


def with_params(spec: PotentialSpec, **kwargs: float) -> PotentialSpec:
    """Copy of the spec with some numeric fields replaced, revalidated."""
    return validate(replace(spec, **kwargs))

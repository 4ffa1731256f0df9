"""Command-line interface.

Commands (all take the potential either from ``--spec-file`` JSON or from
inline ``--family/--A/--B/--S/--D/--m/--n`` flags):

* ``classify``  landscape report as JSON;
* ``solve``     minimizer at mass ``--M``: solution JSON plus profile CSV
  (droplet runs append a ``u_macro`` column with the parabolic cap);
* ``sweep``     mass/energy table over ``--u0-min .. --u0-max``;
* ``asympt``    convergence table over ``--M-list``;
* ``crossing``  energy-crossing mass inside the range ``--M-list lo,hi``.

Exit codes: 0 success, 1 usage error, 2 parameter rejection, 3 rejection
because no minimizer exists (m >= 3). Outputs are byte-identical across
repeated runs; ``CAPMIN_THREADS`` caps the sweep/asympt worker pool.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np

from .asymptotics import ConvergenceRow, convergence_report, predict
from .errors import (
    CapminError,
    NoMinimizerError,
    ParamError,
    UsageError,
)
from .landscape import Regime, landscape_report
from .minimizer import SweepTable, _segment_ids, find_energy_crossing, global_minimizer
from .potential import Family, PotentialSpec, spec_from_json, validate
from .profile import Height, energy_at, mass_at


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D102 - argparse hook
        raise UsageError(message)


def _add_spec_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--spec-file", type=str, default=None)
    p.add_argument("--family", type=str, default=None)
    p.add_argument("--A", type=float, default=1.0)
    p.add_argument("--B", type=float, default=0.0)
    p.add_argument("--S", type=float, default=0.0)
    p.add_argument("--D", type=float, default=0.0)
    p.add_argument("--m", type=float, default=2.5)
    p.add_argument("--n", type=float, default=2.0)


def _add_out_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--format", type=str, choices=("csv", "json"), default=None)


def build_parser() -> _Parser:
    parser = _Parser(prog="capmin", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="regime/uniqueness landscape report")
    _add_spec_flags(p)
    _add_out_flags(p)

    p = sub.add_parser("solve", help="global minimizer at fixed mass")
    _add_spec_flags(p)
    _add_out_flags(p)
    p.add_argument("--M", type=float, required=True)
    p.add_argument("--mass-tol", type=float, default=None)

    p = sub.add_parser("sweep", help="mass/energy table over a height range")
    _add_spec_flags(p)
    _add_out_flags(p)
    p.add_argument("--u0-min", type=float, required=True)
    p.add_argument("--u0-max", type=float, required=True)
    p.add_argument("--points", type=int, default=101)

    p = sub.add_parser("asympt", help="large-mass convergence diagnostics")
    _add_spec_flags(p)
    _add_out_flags(p)
    p.add_argument("--M-list", type=str, required=True)

    p = sub.add_parser("crossing", help="energy-crossing mass in a range")
    _add_spec_flags(p)
    _add_out_flags(p)
    p.add_argument("--M-list", type=str, required=True)

    return parser


def _spec_from_args(args: argparse.Namespace) -> PotentialSpec:
    if args.spec_file is not None:
        try:
            with open(args.spec_file) as fh:
                return spec_from_json(fh.read())
        except OSError as exc:
            raise UsageError(f"cannot read spec file: {exc}") from exc
    if args.family is None:
        raise UsageError("either --spec-file or --family is required")
    try:
        family = Family(args.family)
    except ValueError as exc:
        raise ParamError(f"unknown family {args.family!r}") from exc
    return validate(
        PotentialSpec(
            family=family, A=args.A, B=args.B, S=args.S, D=args.D,
            m=args.m, n=args.n,
        )
    )


def _check_writable(path: str) -> None:
    try:
        with open(path, "a"):
            pass
    except OSError as exc:
        raise UsageError(f"output path {path!r} is not writable: {exc}") from exc


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def _workers() -> int:
    env = os.environ.get("CAPMIN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise UsageError(f"CAPMIN_THREADS must be an integer, got {env!r}") from exc
    return os.cpu_count() or 1


def _parse_m_list(text: str) -> list[float]:
    try:
        vals = [float(tok) for tok in text.replace(";", ",").split(",") if tok.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --M-list {text!r}") from exc
    if not vals or any(v <= 0 for v in vals):
        raise UsageError("--M-list entries must be positive")
    return vals


def _cmd_classify(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args)
    if args.format == "csv":
        raise UsageError("classify emits JSON only")
    if args.out:
        _check_writable(args.out)
    report = landscape_report(spec)
    _emit(report.to_json(), args.out)
    return 0


def _cmd_solve(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args)
    if not args.M > 0:
        raise UsageError(f"--M must be positive, got {args.M}")
    if args.mass_tol is not None and not args.mass_tol > 0:
        raise UsageError("--mass-tol must be positive")
    base = args.out
    if base:
        json_path, csv_path = base + ".json", base + ".csv"
        _check_writable(json_path)
        _check_writable(csv_path)
    sol = global_minimizer(spec, args.M, mass_tol=args.mass_tol)
    regime = landscape_report(spec).regime
    lines = ["x,u,uprime" + (",u_macro" if regime is Regime.DROPLET else "")]
    prof = sol.profile
    if regime is Regime.DROPLET:
        s_abs = abs(spec.S)
        r = prof.r_bar
        for x, u, up in zip(prof.xs, prof.us, prof.ups):
            macro = math.sqrt(s_abs) / (r * math.sqrt(2.0)) * (r * r - x * x)
            lines.append(f"{x!r},{u!r},{up!r},{macro!r}")
    else:
        for x, u, up in zip(prof.xs, prof.us, prof.ups):
            lines.append(f"{x!r},{u!r},{up!r}")
    csv_text = "\n".join(lines) + "\n"
    if base:
        _emit(sol.to_json(), json_path)
        _emit(csv_text, csv_path)
        sys.stdout.write(
            f"solved M={args.M:g}: u0={prof.u0!r} r_bar={prof.r_bar!r} "
            f"candidates={len(sol.candidates)} -> {json_path}, {csv_path}\n"
        )
    else:
        _emit(sol.to_json(), None)
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args)
    if not (0 < args.u0_min < args.u0_max):
        raise UsageError("need 0 < --u0-min < --u0-max")
    if args.points < 2:
        raise UsageError("--points must be at least 2")
    if args.out:
        _check_writable(args.out)
    u0s = np.geomspace(args.u0_min, args.u0_max, args.points)

    def point(u0: float) -> tuple[float, float]:
        try:
            h = Height.plain(float(u0))
            return mass_at(spec, h), energy_at(spec, h)
        except (CapminError, ValueError):
            return math.nan, math.nan

    with ThreadPoolExecutor(max_workers=_workers()) as pool:
        results = list(pool.map(point, u0s))
    mus = np.array([r[0] for r in results])
    ens = np.array([r[1] for r in results])
    table = SweepTable(u0=u0s, mu=mus, energy=ens, segment=_segment_ids(mus))
    lines = ["u0,mu,energy,segment"]
    for u, m_, e, s in zip(table.u0, table.mu, table.energy, table.segment):
        lines.append(f"{u!r},{m_!r},{e!r},{int(s)}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_asympt(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args)
    m_list = _parse_m_list(args.M_list)
    if args.out:
        _check_writable(args.out)
    predict(spec, m_list[0])  # fail fast on unknown regimes

    with ThreadPoolExecutor(max_workers=_workers()) as pool:
        rows_nested = list(
            pool.map(lambda M: convergence_report(spec, [M]), m_list)
        )
    rows: list[ConvergenceRow] = [r for sub in rows_nested for r in sub]
    lines = ["M,u0,u0_pred,rbar,rbar_pred,shape_err"]
    for r in rows:
        lines.append(
            f"{r.M!r},{r.u0!r},{r.u0_pred!r},{r.rbar!r},{r.rbar_pred!r},{r.shape_err!r}"
        )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_crossing(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args)
    m_list = _parse_m_list(args.M_list)
    if len(m_list) != 2 or not m_list[0] < m_list[1]:
        raise UsageError("crossing needs --M-list LO,HI with LO < HI")
    if args.out:
        _check_writable(args.out)
    m_star = find_energy_crossing(spec, (m_list[0], m_list[1]))
    _emit(json.dumps({"crossing": m_star}), args.out)
    return 0


_COMMANDS = {
    "classify": _cmd_classify,
    "solve": _cmd_solve,
    "sweep": _cmd_sweep,
    "asympt": _cmd_asympt,
    "crossing": _cmd_crossing,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 1
    except NoMinimizerError as exc:
        sys.stderr.write(f"no minimizer exists: {exc}\n")
        return 3
    except ParamError as exc:
        sys.stderr.write(f"parameter error: {exc}\n")
        return 2
    except CapminError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())

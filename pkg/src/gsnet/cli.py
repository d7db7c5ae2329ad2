"""Command-line front end.

Exit codes: 0 success (and certified / bound met), 1 dipole bound not met,
2 input or usage error, 3 certificate failed.  All numeric output uses 12
significant digits and nothing is written outside paths given by the user.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import calibration as cal
from . import currents, dipole, solver
from .norms import AlphaNorm


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _digest(*paths) -> str:
    h = hashlib.sha256()
    for p in paths:
        h.update(Path(p).read_bytes())
    return h.hexdigest()[:12]


def _report(command: str, digest: str, t0: float, seed=None) -> None:
    line = f"# run: {command} inputs={digest} wall={time.perf_counter() - t0:.3f}s"
    if seed is not None:
        line += f" seed={seed}"
    print(line)


def _norm_for(current: currents.PolyhedralCurrent, alpha: float) -> AlphaNorm:
    return AlphaNorm(alpha, current.coeff_dim)


def cmd_mass(args) -> int:
    t0 = time.perf_counter()
    current, file_alpha = currents.load_network(args.network)
    alpha = file_alpha if args.alpha is None else args.alpha
    norm = _norm_for(current, alpha)
    boundary = current.boundary()
    print(f"mass {_fmt(current.mass(norm))}")
    print(f"boundary atoms {len(boundary)}")
    for x, p in zip(boundary.points, boundary.weights):
        coords = " ".join(_fmt(c) for c in x)
        weight = " ".join(str(int(v)) for v in p)
        print(f"  at {coords} weight {weight}")
    print(f"boundary mass {_fmt(boundary.mass(norm))}")
    _report("mass", _digest(args.network), t0)
    return 0


def cmd_check(args) -> int:
    t0 = time.perf_counter()
    current, file_alpha = currents.load_network(args.network)
    form, family = cal.load_calibration(args.calibration)
    alpha = file_alpha if args.alpha is None else args.alpha
    norm = _norm_for(current, alpha)
    cert = cal.certify(form, current, norm, family, tol=args.tol)
    print("condition (i): pairing along each segment vs psi(theta)")
    for c in cert.condition_i:
        ok = "pass" if c.passed else "FAIL"
        print(f"  segment {c.segment}: pairing {_fmt(c.pairing)} psi {_fmt(c.psi)} {ok}")
    print("condition (iii): sup pairing over unit directions vs psi(h)")
    for c in cert.condition_iii:
        ok = "pass" if c.passed else "FAIL"
        print(f"  h {c.member}: attained {_fmt(c.attained)} psi {_fmt(c.psi)} {ok}")
    print(f"multiplicities in family: {cert.theta_in_family}")
    print(f"global duality argument: {cert.global_argument}")
    print(f"lower bound {_fmt(cert.lower_bound)}")
    print(f"mass {_fmt(cert.mass)}")
    print(f"status {cert.status}")
    _report("check", _digest(args.network, args.calibration), t0)
    return 0 if cert.certified else 3


def cmd_solve(args) -> int:
    t0 = time.perf_counter()
    inst = solver.load_instance(args.instance)
    opts = solver.SolveOptions(seed=args.seed, parallel=args.parallel)
    result = solver.solve(inst, opts, mode="heuristic" if args.heuristic else "exact")
    print(f"cost {_fmt(result.cost)}")
    print(f"topology {result.topology.key}")
    print(f"iterations {result.iterations}")
    print(f"converged {result.converged}")
    print(f"certified search {result.exhaustive}")
    for node, angles in result.current.branch_angles():
        pretty = " ".join(_fmt(a) for a in angles)
        print(f"branch node {node} angles {pretty}")
    if args.output:
        currents.save_network(result.current, inst.alpha, args.output)
        print(f"network written to {args.output}")
    _report("solve", _digest(args.instance), t0, seed=args.seed)
    return 0


def cmd_oracle(args) -> int:
    t0 = time.perf_counter()
    inst = solver.load_instance(args.instance)
    result = solver.oracle_solve(
        inst, grid_step=args.grid_step, restarts=args.restarts, seed=args.seed
    )
    print(f"cost {_fmt(result.cost)}")
    print(f"topology {result.topology.key}")
    if args.output:
        currents.save_network(result.current, inst.alpha, args.output)
        print(f"network written to {args.output}")
    _report("oracle", _digest(args.instance), t0, seed=args.seed)
    return 0


def _parse_point(text: str) -> np.ndarray:
    return np.array([float(v) for v in text.split(",")])


def _parse_schedule(text: str) -> list[tuple[float, float]]:
    out = []
    for item in text.split(","):
        scale, _, spacing = item.partition(":")
        out.append((float(scale), float(spacing)))
    return out


def cmd_dipole(args) -> int:
    t0 = time.perf_counter()
    a = _parse_point(args.a)
    b = _parse_point(args.b)
    if args.d != 3 or len(a) != 3 or len(b) != 3:
        raise ValueError("the dipole energy benchmark runs at d = 3")
    schedule = _parse_schedule(args.schedule)
    report = dipole.dipole_energy_check(
        a, b, schedule, beta=args.beta, gamma=args.gamma
    )
    print("scale spacing raw_energy normalized")
    for row in report.rows:
        print(
            f"{_fmt(row.scale)} {_fmt(row.spacing)} "
            f"{_fmt(row.raw_energy)} {_fmt(row.normalized)}"
        )
    print(f"segment length {_fmt(report.length)}")
    print(f"best normalized {_fmt(report.best)}")
    print(
        f"target window [{_fmt(report.lower_target)}, {_fmt(report.upper_target)}]: "
        f"{'met' if report.passed else 'NOT met'}"
    )
    _report("dipole", "-", t0)
    return 0 if report.passed else 1


def cmd_export(args) -> int:
    t0 = time.perf_counter()
    current, _alpha = currents.load_network(args.network)
    lines = []
    for t, h, th in zip(current.tails, current.heads, current.theta):
        mult = " ".join(str(int(v)) for v in th)
        if args.format == "edges":
            p = " ".join(_fmt(c) for c in current.points[t])
            q = " ".join(_fmt(c) for c in current.points[h])
            lines.append(f"{p} -> {q} theta {mult}")
        else:  # plot: blank-line separated polylines with a multiplicity comment
            lines.append(f"# theta {mult}")
            lines.append(" ".join(_fmt(c) for c in current.points[t]))
            lines.append(" ".join(_fmt(c) for c in current.points[h]))
            lines.append("")
    text = "\n".join(lines)
    if args.output:
        Path(args.output).write_text(text + ("\n" if text else ""))
        print(f"exported {current.n_segments} polylines to {args.output}")
    else:
        print(text)
    _report("export", _digest(args.network), t0)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gsnet",
        description="Branched transport networks, calibration certificates, "
        "and sphere-valued dipole energies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mass", help="mass and boundary of a network file")
    p.add_argument("network")
    p.add_argument("--alpha", type=float, default=None, help="override the file alpha")
    p.set_defaults(func=cmd_mass)

    p = sub.add_parser("check", help="run a calibration certificate")
    p.add_argument("network")
    p.add_argument("calibration")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve", help="minimize mass over flow trees")
    p.add_argument("instance")
    p.add_argument("--seed", type=int, default=0)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", default=True)
    mode.add_argument("--heuristic", action="store_true")
    p.add_argument("--parallel", action="store_true")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="independent grid + Nelder-Mead reference solve")
    p.add_argument("instance")
    p.add_argument("--grid-step", type=float, default=0.05)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("dipole", help="dipole energy benchmark table")
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--a", required=True, help="comma separated coordinates")
    p.add_argument("--b", required=True)
    p.add_argument(
        "--schedule",
        default="0.5:0.020833333333333332,0.4:0.015625,0.3:0.010416666666666666",
        help="comma separated scale:spacing pairs",
    )
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--gamma", type=float, default=1.0)
    p.set_defaults(func=cmd_dipole)

    p = sub.add_parser("export", help="polyline dump of a network")
    p.add_argument("network")
    p.add_argument("--format", choices=("edges", "plot"), default="edges")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

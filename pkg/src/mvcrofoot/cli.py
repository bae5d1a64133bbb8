"""Command-line interface: generate seeded instances, run verification
suites, and demonstrate the scalar transform.

Exit codes: 0 all checks pass, 1 a mathematical check failed, 2 invalid
input (bad flags, malformed or out-of-contract instance files).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .conjugation import ConjugationSpec, entrywise_conjugation, make_conjugation
from .crofoot import StrictContraction, crofoot_theta, disk_samples
from .errors import GenerationFailedError, MvcrofootError, NotStrictError, PurityViolationError
from .inner_function import MatrixInnerFunction, random_inner, scalar_inner
from .oracle import BoundaryGrid
from .report import CheckRecord, SuiteReport
from .serialize import (
    content_hash,
    matrix_to_pairs,
    pairs_to_matrix,
    read_canonical,
    write_canonical,
)
from .suites import SUITE_NAMES, conjugation_checks, crofoot_checks, model_checks, tto_checks
from .tto import SymbolPolynomial

INSTANCE_VERSION = 1
DEFAULT_W_NORM_CAP = 0.6
DEFAULT_SUITE_TOL = 1e-8

EXIT_PASS = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_INPUT = 2


@dataclass(frozen=True)
class Instance:
    """In-memory form of an instance file."""

    theta: MatrixInnerFunction
    contraction: StrictContraction
    gamma: ConjugationSpec | None
    symbols: list[SymbolPolynomial]
    seed: int
    flags: dict
    payload: dict


def build_instance_payload(
    dim: int,
    degree: int,
    seed: int,
    symmetric: bool,
    w_norm_cap: float,
) -> dict:
    """Deterministically generate an instance payload from the seed."""
    streams = np.random.SeedSequence(seed).spawn(3)
    theta = random_inner(dim, degree, rng=np.random.default_rng(streams[0]), symmetric=symmetric)

    rng_w = np.random.default_rng(streams[1])
    g = rng_w.standard_normal((dim, dim)) + 1j * rng_w.standard_normal((dim, dim))
    if symmetric:
        g = 0.5 * (g + g.T)
    scale = w_norm_cap * rng_w.uniform(0.4, 1.0)
    w = scale * g / np.linalg.norm(g, 2)

    rng_phi = np.random.default_rng(streams[2])
    symbol = SymbolPolynomial.random_band(dim, 1, rng_phi)

    payload = {
        "version": INSTANCE_VERSION,
        "seed": seed,
        "flags": {
            "dim": dim,
            "degree": degree,
            "symmetric": symmetric,
            "w_norm_cap": w_norm_cap,
        },
        "theta": theta.to_payload(),
        "w": matrix_to_pairs(w),
        "symbols": [symbol.to_payload()],
    }
    if symmetric:
        payload["gamma"] = {"usym": matrix_to_pairs(np.eye(dim))}
    payload["content_hash"] = content_hash(payload)
    return payload


def instance_from_payload(payload: dict) -> Instance:
    version = payload.get("version")
    if version != INSTANCE_VERSION:
        raise ValueError(f"unsupported instance version {version!r}")
    theta = MatrixInnerFunction.from_payload(payload["theta"])
    contraction = StrictContraction(pairs_to_matrix(payload["w"]))
    if contraction.dim != theta.dim:
        raise ValueError("W dimension does not match Theta")
    gamma = None
    if "gamma" in payload:
        gamma = make_conjugation(pairs_to_matrix(payload["gamma"]["usym"]))
    symbols = [SymbolPolynomial.from_payload(p) for p in payload.get("symbols", [])]
    return Instance(
        theta=theta,
        contraction=contraction,
        gamma=gamma,
        symbols=symbols,
        seed=int(payload.get("seed", 0)),
        flags=dict(payload.get("flags", {})),
        payload=payload,
    )


def load_instance(path: str | Path) -> Instance:
    return instance_from_payload(read_canonical(path))


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args) -> int:
    try:
        payload = build_instance_payload(
            dim=args.dim,
            degree=args.degree,
            seed=args.seed,
            symmetric=args.symmetric,
            w_norm_cap=args.w_norm_cap,
        )
    except (GenerationFailedError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    write_canonical(args.out, payload)
    print(f"wrote {args.out} (hash {payload['content_hash'][:16]})")
    return EXIT_PASS


def _run_suites(instance: Instance, suites: list[str], grid: BoundaryGrid, tol: float) -> list[tuple[str, list[CheckRecord]]]:
    pair = crofoot_theta(instance.theta, instance.contraction, grid=grid)
    results: list[tuple[str, list[CheckRecord]]] = []
    seed = instance.seed
    for suite in suites:
        if suite == "model":
            results.append((suite, model_checks(instance.theta, grid, tol, seed=seed)))
        elif suite == "crofoot":
            results.append((suite, crofoot_checks(pair, grid, tol, seed=seed)))
        elif suite == "tto":
            results.append((suite, tto_checks(pair, instance.symbols, grid, tol, seed=seed)))
        elif suite == "conjugation":
            gamma = instance.gamma or entrywise_conjugation(instance.theta.dim)
            results.append((suite, conjugation_checks(pair, gamma, grid, tol, seed=seed)))
    return results


def cmd_verify(args) -> int:
    try:
        instance = load_instance(args.instance)
    except (OSError, json.JSONDecodeError, KeyError, ValueError, NotStrictError, MvcrofootError) as exc:
        print(f"error: cannot load instance: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT

    grid = BoundaryGrid.of_size(args.grid) if args.grid else BoundaryGrid.default()
    if args.suite == "all":
        suites = ["model", "crofoot", "tto"]
        if instance.gamma is not None or instance.flags.get("symmetric"):
            suites.append("conjugation")
    else:
        suites = [args.suite]

    checks: list[CheckRecord] = []
    construction_error = ""
    try:
        for _suite, records in _run_suites(instance, suites, grid, args.tol):
            checks.extend(records)
    except PurityViolationError as exc:
        construction_error = str(exc)
        print(f"construction breakdown: {exc}", file=sys.stderr)

    env = {
        "grid": grid.size,
        "tol": args.tol,
        "seed": instance.seed,
        "instance_hash": instance.payload.get("content_hash", ""),
        "version": __version__,
    }
    if construction_error:
        env["construction_error"] = construction_error
    report = SuiteReport(suite=args.suite, checks=tuple(checks), env=env)
    payload = report.as_dict()
    if construction_error:
        payload["pass"] = False
    report_path = args.report or (str(args.instance) + ".report.json")
    write_canonical(report_path, payload)

    for check in checks:
        status = "PASS" if check.passed else "FAIL"
        print(f"[{status}] {check.name}: residual {check.residual:.3e} (tol {check.tolerance:.1e})")
    overall = report.passed and not construction_error
    print(f"report written to {report_path}")
    print(f"overall: {'PASS' if overall else 'FAIL'}")
    return EXIT_PASS if overall else EXIT_CHECK_FAILED


def cmd_demo_scalar(args) -> int:
    try:
        w = complex(args.w)
        zeros = [complex(part) for part in args.zeros.split(",")] if args.zeros else [0.0, 0.0]
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    if abs(w) >= 1.0:
        print(f"error: |w| = {abs(w):.6f} must be < 1", file=sys.stderr)
        return EXIT_BAD_INPUT
    if any(abs(z) >= 1.0 for z in zeros):
        print("error: all zeros must lie in the open unit disk", file=sys.stderr)
        return EXIT_BAD_INPUT

    try:
        theta = scalar_inner(zeros, radius_cap=max(0.95, max((abs(z) for z in zeros), default=0.0)))
        pair = crofoot_theta(theta, np.array([[w]]))
    except MvcrofootError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT

    boundary = np.exp(2j * np.pi * np.arange(8) / 8)
    interior = disk_samples(8, radius=0.8)
    points = np.concatenate([boundary, interior])
    kinds = ["boundary"] * 8 + ["interior"] * 8

    theta_z = pair.theta.evaluate_factors(points)[:, 0, 0]
    realized = pair.theta_prime.transfer_samples(points)[:, 0, 0]
    moebius = (theta_z - w) / (1.0 - np.conj(w) * theta_z)
    diffs = np.abs(realized - moebius)

    rows = []
    header = ("kind", "z", "theta(z)", "theta'(z) realization", "theta'(z) moebius", "abs diff")
    print(f"{header[0]:>9} {header[1]:>22} {header[2]:>22} {header[3]:>24} {header[4]:>24} {header[5]:>10}")
    for kind, z, th, re_v, mo_v, df in zip(kinds, points, theta_z, realized, moebius, diffs):
        print(f"{kind:>9} {z:>22.4f} {th:>22.4f} {re_v:>24.4f} {mo_v:>24.4f} {df:>10.2e}")
        rows.append([kind, z.real, z.imag, th.real, th.imag, re_v.real, re_v.imag, mo_v.real, mo_v.imag, df])

    grid = pair.recommended_grid()
    basis = pair.theta.basis_samples(grid.nodes)
    mapped = pair.forward_multiplier(grid.nodes) @ basis
    norm_dev = 0.0
    for j in range(pair.degree):
        norm = np.sqrt(np.mean(np.abs(mapped[:, 0, j]) ** 2).real)
        norm_dev = max(norm_dev, abs(norm - 1.0))
    print(f"max pointwise discrepancy: {float(np.max(diffs)):.3e}")
    print(f"J_w norm preservation deviation over basis: {norm_dev:.3e}")

    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["kind", "z_re", "z_im", "theta_re", "theta_im",
                 "realization_re", "realization_im", "moebius_re", "moebius_im", "abs_diff"]
            )
            for row in rows:
                writer.writerow([row[0]] + [format(v, ".17g") for v in row[1:]])
        print(f"wrote {args.out}")
    return EXIT_PASS


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mvcrofoot",
        description="Matrix-valued inner functions, model spaces, and the generalized Crofoot transform",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a seeded random instance file")
    gen.add_argument("--dim", type=int, required=True, help="coefficient space dimension d")
    gen.add_argument("--degree", type=int, required=True, help="number of elementary factors n")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--symmetric", action="store_true", help="self-transpose Theta, symmetric W, entrywise Gamma")
    gen.add_argument("--w-norm-cap", type=float, default=DEFAULT_W_NORM_CAP)
    gen.add_argument("-o", "--out", required=True)
    gen.set_defaults(func=cmd_gen)

    verify = sub.add_parser("verify", help="run verification suites over an instance")
    verify.add_argument("instance")
    verify.add_argument("--suite", choices=("all",) + SUITE_NAMES, default="all")
    verify.add_argument("--tol", type=float, default=DEFAULT_SUITE_TOL)
    verify.add_argument("--grid", type=int, default=0, help="quadrature grid size (power of two)")
    verify.add_argument("-r", "--report", default=None)
    verify.set_defaults(func=cmd_verify)

    demo = sub.add_parser("demo-scalar", help="classical scalar transform, side by side")
    demo.add_argument("--w", required=True, help="complex contraction, e.g. '0.5' or '0.3+0.2j'")
    demo.add_argument("--zeros", default="", help="comma-separated zeros, e.g. '0,0' or '0.3+0.1j'")
    demo.add_argument("-o", "--out", default=None, help="CSV output path")
    demo.set_defaults(func=cmd_demo_scalar)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_BAD_INPUT if exc.code not in (0, None) else 0
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())

"""``impulse-morse`` command line: analyze, solve, verify, sweep."""

from __future__ import annotations

import argparse
import itertools
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .galerkin import BasisError, build_basis
from .io import (RunReport, SchemaError, dumps, parse_problem_file, read_solution_csv,
                 tomllib, write_solution_csv, write_sweep_csv)
from .mesh import MeshError
from .resonance import morse_report, nontriviality_certificate, resonance_det
from .shooting import IntegrationError, csv_grid, shoot, verify_solution
from .solver import saddle_search
from .spectral import spectral_report

log = logging.getLogger("impulse_morse")

EXIT_OK, EXIT_IO, EXIT_SCHEMA, EXIT_NONCONVERGED, EXIT_VERIFY = 0, 1, 2, 3, 4
VERIFY_THRESHOLD = 1e-6


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="impulse-morse",
        description="Morse-theoretic analysis and critical point search for "
                    "-u'' = f(x, u) with impulses at interior nodes.")
    p.add_argument("command", choices=["analyze", "solve", "verify", "sweep"])
    p.add_argument("--problem", required=True, help="TOML problem file")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("--seed", type=int, default=None,
                   help="multistart seed (default: [solver] seed, else 0)")
    p.add_argument("--jobs", type=int, default=None,
                   help="worker threads (default: number of processors)")
    p.add_argument("--solution", help="x,u CSV to check (verify)")
    p.add_argument("--threshold", type=float, default=VERIFY_THRESHOLD,
                   help="verify: maximum allowed residual (default 1e-6)")
    p.add_argument("--sweep-param", choices=["a", "b"], default="b")
    p.add_argument("--sweep-index", action="append",
                   help="1-based index or comma list moved together; repeat for a 2-D grid "
                        "(default: all indices)")
    p.add_argument("--sweep-range", action="append", metavar="LO:HI",
                   help="parameter range; repeat once per --sweep-index group")
    p.add_argument("--sweep-steps", type=int, default=81, help="grid points per axis")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _load(args):
    try:
        return parse_problem_file(args.problem)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {args.problem}: {exc.strerror or exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise CliError(EXIT_SCHEMA, f"{args.problem}: TOML parse error: {exc}") from None
    except (SchemaError, MeshError, ValueError, KeyError) as exc:
        raise CliError(EXIT_SCHEMA, f"{args.problem}: {exc}") from None


def _analysis(problem, check_certificate):
    mesh = problem.mesh
    cert = nontriviality_certificate(mesh, problem) if check_certificate else None
    return RunReport(
        problem=problem.describe(),
        spectral=spectral_report(mesh, problem.a).to_dict(),
        resonance=resonance_det(mesh, problem.b).to_dict(),
        morse=morse_report(mesh, problem.b).to_dict(),
        certificate=None if cert is None else cert.to_dict(),
    )


def _write(out: Path, name: str, text: str):
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {out / name}: {exc.strerror or exc}") from None


def _solution_samples(problem, point, basis):
    grids = csv_grid(problem.mesh)
    if point.refinement is not None:
        traj = shoot(problem, point.refinement.slope, samples=grids)
        xs, us = [], []
        for j, (x, u, _) in enumerate(traj.segments):
            keep = slice(None) if j == 0 else slice(1, None)  # nodes appear twice
            xs.append(x[keep])
            us.append(u[keep])
        return np.concatenate(xs), np.concatenate(us)
    from .galerkin import eval_u
    x = np.unique(np.concatenate(grids))
    return x, eval_u(basis, point.coeffs, x)


def cmd_analyze(args, problem, config, out):
    _write(out, "report.json", _analysis(problem, config.check_certificate).to_json())
    return EXIT_OK


def cmd_solve(args, problem, config, out):
    opts = config.options
    seed = args.seed if args.seed is not None else opts.seed
    jobs = args.jobs or os.cpu_count() or 1
    opts = replace(opts, seed=seed, jobs=jobs)
    report = _analysis(problem, config.check_certificate)
    try:
        basis = build_basis(problem.mesh, config.modes, config.quad_order)
    except BasisError as exc:
        raise CliError(EXIT_SCHEMA, str(exc)) from None
    t0 = time.perf_counter()
    points = saddle_search(problem, basis, opts)
    elapsed = time.perf_counter() - t0
    report.solver = {
        "modes": config.modes, "quad_order": basis.quad_order, "seed": seed,
        "gradient_tol": opts.gradient_tol, "max_iters": opts.max_iters,
        "radii": list(opts.radii), "refine_modes": opts.refine_modes,
        "verify_threshold": VERIFY_THRESHOLD,
    }
    entries = []
    failed = False
    index = 0
    for p in points:
        entry = p.to_dict()
        entry["solution_csv"] = None
        if not p.trivial:
            index += 1
            name = f"solution_{index}.csv"
            x, u = _solution_samples(problem, p, basis)
            try:
                out.mkdir(parents=True, exist_ok=True)
                write_solution_csv(out / name, x, u)
            except OSError as exc:
                raise CliError(EXIT_IO, f"cannot write {out / name}: {exc.strerror or exc}") from None
            entry["solution_csv"] = name
            if p.verification is None or not p.verification.passes(VERIFY_THRESHOLD):
                failed = True
        entries.append(entry)
    report.critical_points = entries
    _write(out, "report.json", report.to_json())
    _write(out, "timing.json", dumps({"command": "solve", "search_seconds": elapsed}))
    if not points:
        log.error("no critical point converged")
        return EXIT_NONCONVERGED
    if failed:
        log.error("a critical point failed shooting verification at %g", VERIFY_THRESHOLD)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_verify(args, problem, config, out):
    if not args.solution:
        raise CliError(EXIT_SCHEMA, "verify needs --solution FILE")
    try:
        sf = read_solution_csv(args.solution)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {args.solution}: {exc.strerror or exc}") from None
    except (SchemaError, ValueError) as exc:
        raise CliError(EXIT_SCHEMA, f"{args.solution}: {exc}") from None
    try:
        res = verify_solution(problem, sf)
    except ValueError as exc:
        raise CliError(EXIT_SCHEMA, f"{args.solution}: {exc}") from None
    data = res.to_dict()
    data["threshold"] = args.threshold
    data["passes"] = res.passes(args.threshold)
    _write(out, "residuals.json", dumps(data))
    print(f"max residual {res.max_residual:.3e} (threshold {args.threshold:g})")
    return EXIT_OK if data["passes"] else EXIT_VERIFY


def _parse_range(text):
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise CliError(EXIT_SCHEMA, f"--sweep-range expects LO:HI, got {text!r}") from None
    return lo, hi


def _parse_indices(text, size):
    try:
        idx = [int(v) for v in text.split(",")]
    except ValueError:
        raise CliError(EXIT_SCHEMA, f"--sweep-index expects integers, got {text!r}") from None
    for j in idx:
        if not 1 <= j <= size:
            raise CliError(EXIT_SCHEMA, f"--sweep-index {j} out of range 1..{size}")
    return idx


def sweep_rows(problem, param, groups, ranges, steps, jobs=1):
    """Grid scan of ``det(diag(b)G - I)``, ``m0`` and the certificate verdict.

    ``groups[k]`` lists the 1-based indices set to the k-th grid coordinate.
    """
    axes = [np.linspace(lo, hi, steps) for lo, hi in ranges]
    base = np.array(problem.a if param == "a" else problem.b, dtype=float)
    grid = list(itertools.product(*axes))

    def run(values):
        vec = base.copy()
        for idx, v in zip(groups, values):
            vec[[j - 1 for j in idx]] = v
        prob = problem.with_params(**{param: vec})
        det = resonance_det(prob.mesh, prob.b)
        m0 = morse_report(prob.mesh, prob.b).m0
        cert = nontriviality_certificate(prob.mesh, prob)
        if det.in_B:
            verdict = "degenerate"
        else:
            verdict = "guaranteed" if cert.guaranteed else "not guaranteed"
        label = ";".join(f"{v:.17g}" for v in values)
        return label, det.det_value, m0, verdict

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run, grid))
    return [run(v) for v in grid]


def cmd_sweep(args, problem, config, out):
    size = problem.m + 1 if args.sweep_param == "a" else problem.m
    if size == 0:
        raise CliError(EXIT_SCHEMA, "nothing to sweep: the mesh has no interior points")
    index_args = args.sweep_index or [",".join(str(j) for j in range(1, size + 1))]
    range_args = args.sweep_range or []
    if len(range_args) != len(index_args) or len(index_args) > 2:
        raise CliError(EXIT_SCHEMA, "give one --sweep-range per --sweep-index group (at most two)")
    if args.sweep_steps < 2:
        raise CliError(EXIT_SCHEMA, "--sweep-steps must be at least 2")
    groups = [_parse_indices(t, size) for t in index_args]
    ranges = [_parse_range(t) for t in range_args]
    jobs = args.jobs or os.cpu_count() or 1
    t0 = time.perf_counter()
    rows = sweep_rows(problem, args.sweep_param, groups, ranges, args.sweep_steps, jobs)
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_sweep_csv(out / "sweep.csv", rows)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write sweep.csv: {exc.strerror or exc}") from None
    _write(out, "timing.json", dumps({"command": "sweep", "seconds": time.perf_counter() - t0}))
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "solve": cmd_solve, "verify": cmd_verify, "sweep": cmd_sweep}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        problem, config = _load(args)
        return COMMANDS[args.command](args, problem, config, Path(args.out))
    except CliError as exc:
        print(f"impulse-morse: {exc}", file=sys.stderr)
        return exc.code
    except IntegrationError as exc:
        print(f"impulse-morse: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED


if __name__ == "__main__":
    sys.exit(main())

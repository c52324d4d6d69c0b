"""Command-line driver: solve, verify, and export on top of config files.

Exit codes: 0 success, 1 verification failure, 2 invalid configuration,
3 solution singular on more than half of the grid, 4 I/O failure.  Output
files are written atomically (temp file, then rename) and are byte-identical
across runs for identical configs: fixed row order, %.17g formatting, LF
line endings, UTF-8.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .config import ProblemConfig, load_config
from .errors import (ConfigError, EmptyReportError, SolutionSingularityError,
                     TodaDressError)
from .solitons import ClosedFormSolution
from .verify import (GridSpec, abelian_reduction_check, cross_construction_check,
                     det_factorization_check, inverse_consistency_check,
                     toda_residual)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_SINGULAR = 3
EXIT_IO = 4

THREADS_ENV = "TODA_DRESS_THREADS"


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        count = int(raw)
    except ValueError:
        raise ConfigError(THREADS_ENV, f"expected an integer, got {raw!r}")
    return max(1, count)


def _atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _grid(config: ProblemConfig) -> GridSpec:
    return GridSpec(z_minus=config.grid_z_minus, z_plus=config.grid_z_plus)


def _evaluate_grid(config: ProblemConfig, solution: ClosedFormSolution):
    """Evaluate all blocks on the grid; returns (results, singular_points).

    results maps point index (i, j) to {alpha: gamma}; singular points are
    recorded and excluded.  Evaluation order is fixed, independent of the
    thread count.
    """
    grid = _grid(config)
    points = list(grid.points())
    p = config.p

    def eval_point(entry):
        i, j, zm, zp = entry
        try:
            gammas = {a: solution.gamma_pair((zm, zp), a)[0] for a in range(1, p + 1)}
        except SolutionSingularityError:
            return (i, j, zm, zp, None)
        return (i, j, zm, zp, gammas)

    threads = _thread_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            evaluated = list(pool.map(eval_point, points))
    else:
        evaluated = [eval_point(entry) for entry in points]
    results = [e for e in evaluated if e[4] is not None]
    singular = [(e[0], e[1]) for e in evaluated if e[4] is None]
    return results, singular


def cmd_solve(config_path: str) -> int:
    try:
        config = load_config(config_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    solution = ClosedFormSolution(config.soliton_spec())
    results, singular = _evaluate_grid(config, solution)
    total = config.grid_z_minus[2] * config.grid_z_plus[2]
    if len(singular) * 2 > total:
        print(f"solution singular on {len(singular)}/{total} grid points",
              file=sys.stderr)
        return EXIT_SINGULAR
    out_dir = Path(config.output_directory)
    try:
        for a in range(1, config.p + 1):
            na = config.block_structure().size(a)
            header = ["z_minus", "z_plus"]
            for row in range(1, na + 1):
                for col in range(1, na + 1):
                    header += [f"g_{row}_{col}_re", f"g_{row}_{col}_im"]
            lines = [_csv_line(header)]
            for i, j, zm, zp, gammas in results:
                cells = [_fmt(zm), _fmt(zp)]
                g = gammas[a]
                for row in range(na):
                    for col in range(na):
                        cells += [_fmt(g[row, col].real), _fmt(g[row, col].imag)]
                lines.append(_csv_line(cells))
            _atomic_write_text(out_dir / f"gamma_{a}.csv", "".join(lines))
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    if singular:
        print(f"skipped {len(singular)} singular grid points", file=sys.stderr)
    return EXIT_OK


def _csv_line(cells) -> str:
    import io

    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerow(cells)
    return buf.getvalue()


def cmd_verify(config_path: str, report_path: str | None) -> int:
    try:
        config = load_config(config_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    spec = config.soliton_spec()
    pair = config.graded_pair()
    solution = ClosedFormSolution(spec)
    grid = _grid(config)
    sample_points = [(zm, zp) for _, _, zm, zp in grid.points()][:25]

    checks = []

    def record(name, max_error, tolerance):
        checks.append({
            "name": name,
            "max_error": float(max_error),
            "tolerance": float(tolerance),
            "pass": bool(max_error <= tolerance),
        })

    try:
        report = toda_residual(solution, pair, grid, h_fd=config.h_fd)
        record("toda_residual", report.max_residual, config.tolerance)
    except EmptyReportError:
        checks.append({"name": "toda_residual", "max_error": float("inf"),
                       "tolerance": config.tolerance, "pass": False,
                       "note": "all grid points singular"})

    record("inverse_consistency",
           inverse_consistency_check(solution, sample_points), 1e-10)
    record("cross_construction",
           cross_construction_check(spec, pair, sample_points), 1e-9)
    try:
        det_report = det_factorization_check(solution, config.block_structure(),
                                             grid, h_fd=config.h_fd)
        record("det_factorization", det_report.max_mixed_derivative, config.tolerance)
    except EmptyReportError:
        checks.append({"name": "det_factorization", "max_error": float("inf"),
                       "tolerance": config.tolerance, "pass": False,
                       "note": "all grid points singular"})
    if all(s == 1 for s in config.sizes):
        record("abelian_reduction", abelian_reduction_check(spec, grid), 1e-12)

    all_pass = all(c["pass"] for c in checks)
    doc = {"config": str(config_path), "checks": checks, "all_pass": all_pass}
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if report_path is not None:
        try:
            _atomic_write_text(Path(report_path), text)
        except OSError as exc:
            print(f"i/o error: {exc}", file=sys.stderr)
            return EXIT_IO
    else:
        sys.stdout.write(text)
    for c in checks:
        status = "PASS" if c["pass"] else "FAIL"
        print(f"{status} {c['name']}: max_error={c['max_error']:.3e} "
              f"tolerance={c['tolerance']:.1e}", file=sys.stderr)
    return EXIT_OK if all_pass else EXIT_VERIFY_FAILED


def cmd_export(config_path: str, fmt: str) -> int:
    try:
        config = load_config(config_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    solution = ClosedFormSolution(config.soliton_spec())
    results, singular = _evaluate_grid(config, solution)
    out_dir = Path(config.output_directory)
    records = []
    for i, j, zm, zp, gammas in results:
        for a in range(1, config.p + 1):
            g = gammas[a]
            for row in range(g.shape[0]):
                for col in range(g.shape[1]):
                    records.append((zm, zp, a, row + 1, col + 1,
                                    g[row, col].real, g[row, col].imag))
    try:
        if fmt == "csv":
            lines = [_csv_line(["z_minus", "z_plus", "alpha", "row", "col", "re", "im"])]
            for zm, zp, a, row, col, re, im in records:
                lines.append(_csv_line([_fmt(zm), _fmt(zp), str(a), str(row),
                                        str(col), _fmt(re), _fmt(im)]))
            _atomic_write_text(out_dir / "fields.csv", "".join(lines))
        else:
            doc = [{"z_minus": zm, "z_plus": zp, "alpha": a, "row": row,
                    "col": col, "re": re, "im": im}
                   for zm, zp, a, row, col, re, im in records]
            _atomic_write_text(out_dir / "fields.json",
                               json.dumps(doc, indent=1) + "\n")
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    if singular:
        print(f"skipped {len(singular)} singular grid points", file=sys.stderr)
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="toda-dress",
        description="Construct and certify multi-soliton solutions of "
                    "non-abelian loop Toda equations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="evaluate solution blocks on the grid")
    p_solve.add_argument("config")

    p_verify = sub.add_parser("verify", help="run the certification suite")
    p_verify.add_argument("config")
    p_verify.add_argument("--report", default=None, help="write the JSON report here")

    p_export = sub.add_parser("export", help="export field data for plotting")
    p_export.add_argument("config")
    p_export.add_argument("--format", required=True, choices=("csv", "json"))

    args = parser.parse_args(argv)
    try:
        if args.command == "solve":
            return cmd_solve(args.config)
        if args.command == "verify":
            return cmd_verify(args.config, args.report)
        return cmd_export(args.config, args.format)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TodaDressError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

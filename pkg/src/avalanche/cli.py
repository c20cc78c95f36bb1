"""Command-line front end: sweep datasets as CSV plus a JSON run manifest."""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from functools import partial
from pathlib import Path

import numpy as np

from . import __version__
from .linalg import ValidationError
from .sweep import (DEFAULT_THREADS_ENV, fmt, grid, locate_crossings, locate_maximum,
                    locate_onset, parallel_map, worker_count)

EXIT_OK, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _distances(text: str) -> list[tuple[int, ...]]:
    """'1;1,1;1,1,1' -> [(1,), (1, 1), (1, 1, 1)]."""
    try:
        out = [tuple(int(x) for x in part.split(",")) for part in text.split(";") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad distance list {text!r}") from None
    if not out or any(not 1 <= len(d) <= 3 or min(d) < 1 for d in out):
        raise argparse.ArgumentTypeError(f"distance tuples need 1-3 positive entries: {text!r}")
    return out


def _length(text: str):
    if text == "thermodynamic":
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("length must be an integer or 'thermodynamic'") from None


def _common(p: argparse.ArgumentParser, j_min: float, j_max: float, steps: int) -> None:
    p.add_argument("--j-min", type=float, default=j_min, help=f"smallest coupling (default {j_min})")
    p.add_argument("--j-max", type=float, default=j_max, help=f"largest coupling (default {j_max})")
    p.add_argument("--steps", type=int, default=steps, help=f"grid points including both ends (default {steps})")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--seed", type=int, default=0, help="base seed for random sampling")
    p.add_argument("--threads-env", default=DEFAULT_THREADS_ENV,
                   help=f"environment variable holding the worker count (default {DEFAULT_THREADS_ENV})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="avalanche",
                                     description="Entanglement and correlation datasets for the Ising and Bose-Hubbard chains.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ising-tangles", help="concurrence, three-tangle and four-tangle versus J")
    _common(p, 0.0, 3.0, 601)
    p.add_argument("--scheme", choices=("absolute", "renormalized"), default="absolute")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--length", type=_length, default="thermodynamic")
    p.add_argument("--tau4", nargs="+", default=["tau4_a"],
                   choices=("tau4_a", "tau4_b", "tau4_c", "tau4_H"),
                   help="four-tangle measures; the first one fills the tau4 column")

    p = sub.add_parser("ising-norms", help="correlated RDM norms or spectra versus J")
    _common(p, 0.0, 3.0, 601)
    p.add_argument("--p", type=float, nargs="+", default=[1.0], help="Schatten indices")
    p.add_argument("--distances", type=_distances, default=[(1,), (1, 1), (1, 1, 1)],
                   help="site spacings, e.g. '1;1,1;1,1,1'")
    p.add_argument("--quantity", choices=("norms", "spectra"), default="norms")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--length", type=_length, default="thermodynamic")

    p = sub.add_parser("bh", help="Bose-Hubbard correlated RDM norms or spectra versus J")
    _common(p, 0.0, 0.5, 51)
    p.add_argument("--N", type=int, default=9)
    p.add_argument("--L", type=int, default=9)
    p.add_argument("--p", type=float, nargs="+", default=[1.0])
    p.add_argument("--distances", type=_distances, default=[(1,), (1, 1), (1, 1, 1)])
    p.add_argument("--quantity", choices=("norms", "spectra"), default="norms")

    p = sub.add_parser("scatter", help="random pure states: tangle versus correlation bound")
    _common(p, 0.0, 0.0, 1)
    p.add_argument("--qubits", type=int, choices=(3, 4), default=3)
    p.add_argument("--samples", type=int, default=40000)
    p.add_argument("--method", choices=("haar", "acin3"), default=None,
                   help="sampling scheme (default acin3 for three qubits, haar for four)")
    p.add_argument("--tau4", choices=("tau4_a", "tau4_b", "tau4_c", "tau4_H"), default="tau4_a")

    p = sub.add_parser("verify", help="cross-engine oracle checks; nonzero exit on failure")
    _common(p, 0.0, 0.0, 1)
    p.add_argument("--perturb", type=float, default=0.0,
                   help="add this offset to the Majorana contraction matrix (tests the checks)")
    p.add_argument("--length", type=int, default=12, help="chain length for the ED comparison")
    return parser


# --- output helpers -------------------------------------------------------------

def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_rows(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(x) for x in row) + "\n")


def _manifest(args, argv, files: list[Path], started: float, extra: dict) -> Path:
    params = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items()}
    data = {
        "argv": list(argv),
        "command": args.command,
        "params": params,
        "grid": {"j_min": args.j_min, "j_max": args.j_max, "steps": args.steps},
        "seeds": {"base": args.seed},
        "version": __version__,
        "wall_clock_s": round(time.time() - started, 3),
        "outputs": {f.name: _sha256(f) for f in files},
    }
    data.update(extra)
    path = args.out / f"{args.command}.manifest.json"
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")
    return path


def _lff_policy(length) -> dict:
    from .ising import CRITICAL_WINDOW, L_FF, L_FF_CRITICAL
    if length != "thermodynamic":
        return {"L_ff": None}
    return {"L_ff": L_FF, "L_ff_critical": L_FF_CRITICAL, "critical_window": CRITICAL_WINDOW}


# --- subcommands --------------------------------------------------------------------

def cmd_ising_tangles(args, argv) -> int:
    from .ising import ising_sweep

    started = time.time()
    js = grid(args.j_min, args.j_max, args.steps)
    table = ising_sweep(js, ["tangles"], gamma=args.gamma, length=args.length, scheme=args.scheme,
                        tau4_measures=args.tau4, workers=worker_count(args.threads_env))
    cols = ["C2", "sqrt_tau3", "sqrt_tau3_lower", "sqrt_tau3_upper", "tau4", "tau4_lower", "tau4_upper"]
    for extra in args.tau4[1:]:
        cols += [extra, extra + "_lower", extra + "_upper"]
    series = {c: table.series(c)[1] for c in cols}
    rows = [[j] + [series[c][i] for c in cols] + [args.scheme] for i, j in enumerate(js)]
    out = args.out / f"ising_tangles_{args.scheme}.csv"
    _write_rows(out, ["J"] + cols + ["scheme"], rows)
    found = {
        "J2_max": locate_maximum(js, series["C2"]),
        "J3_max": locate_maximum(js, series["sqrt_tau3"]),
        "J4_max": locate_maximum(js, series["tau4"]),
        "J0_onset": locate_onset(js, series["tau4"]),
    }
    uncertified = int(np.sum(series["tau4_upper"] - series["tau4_lower"] > 1e-6))
    for k, v in found.items():
        print(f"{k} = {fmt(v) if v is not None else 'none'}")
    if uncertified:
        print(f"warning: {uncertified} grid points with an uncertified four-tangle roof")
    _manifest(args, argv, [out], started, {**_lff_policy(args.length), "located": found})
    return EXIT_OK


def _report_crossings(table, p: float) -> dict:
    q_curves = {}
    for d in [(1,), (1, 1), (1, 1, 1)]:
        try:
            q_curves[len(d) + 1] = table.series(f"norm{p:g}", d)
        except ValidationError:
            return {}
    js = q_curves[2][0]
    found = {
        "q4_vs_q3": locate_crossings(js, q_curves[4][1], q_curves[3][1]),
        "q4_vs_q2": locate_crossings(js, q_curves[4][1], q_curves[2][1]),
        "q3_vs_q2": locate_crossings(js, q_curves[3][1], q_curves[2][1]),
    }
    for k, v in found.items():
        print(f"p={p:g} crossings {k}: " + (", ".join(fmt(x) for x in v) if v else "none"))
    return found


def cmd_ising_norms(args, argv) -> int:
    from .ising import ising_sweep

    started = time.time()
    js = grid(args.j_min, args.j_max, args.steps)
    table = ising_sweep(js, [args.quantity], distances=args.distances, gamma=args.gamma,
                        length=args.length, p_values=args.p, workers=worker_count(args.threads_env))
    out = args.out / f"ising_{args.quantity}.csv"
    table.to_csv(out)
    found = {}
    if args.quantity == "norms":
        found = {f"p{p:g}": _report_crossings(table, p) for p in args.p}
    _manifest(args, argv, [out], started, {**_lff_policy(args.length), "crossings": found})
    return EXIT_OK


def cmd_bh(args, argv) -> int:
    from .bosehubbard import bose_sweep

    started = time.time()
    js = grid(args.j_min, args.j_max, args.steps)
    table = bose_sweep(js, args.N, args.L, [args.quantity], args.distances, args.p,
                       workers=worker_count(args.threads_env))
    out = args.out / f"bh_{args.quantity}_N{args.N}_L{args.L}.csv"
    table.to_csv(out)
    found = {}
    if args.quantity == "norms":
        found = {f"p{p:g}": _report_crossings(table, p) for p in args.p}
    _manifest(args, argv, [out], started, {"crossings": found})
    return EXIT_OK


def cmd_scatter(args, argv) -> int:
    from .tangles import family_curves, scatter_rows

    if args.samples < 1:
        raise UsageError("--samples must be positive")
    if args.method is None:
        args.method = "acin3" if args.qubits == 3 else "haar"
    if args.method == "acin3" and args.qubits != 3:
        raise UsageError("acin3 sampling is defined for three qubits")
    started = time.time()
    workers = worker_count(args.threads_env)
    chunks = np.array_split(np.arange(args.samples), max(1, min(workers * 4, args.samples)))
    fn = partial(scatter_rows, args.qubits, seed=args.seed, method=args.method, tau4=args.tau4)
    rows = [r for part in parallel_map(fn, [c.tolist() for c in chunks], workers) for r in part]
    out = args.out / f"scatter_{args.qubits}q_{args.method}.csv"
    _write_rows(out, ["sample_id", "tangle", "corr_norm1"], rows)
    files = [out]
    tangle = np.array([r[1] for r in rows])
    norm = np.array([r[2] for r in rows])
    above = float(np.mean(tangle > norm + 0.01))
    print(f"fraction with tangle > corr_norm1 + 0.01: {fmt(above)}")
    print(f"samples strictly above the diagonal: {int(np.sum(tangle > norm))}")
    if args.qubits == 3:
        fam = args.out / "scatter_families.csv"
        _write_rows(fam, ["alpha", "tangle", "corr_norm1", "family"], family_curves())
        files.append(fam)
    _manifest(args, argv, files, started, {"seeds": {"base": args.seed, "per_sample": "[seed, index]"},
                                          "fraction_above": above})
    return EXIT_OK


def cmd_verify(args, argv) -> int:
    from .verify import run_checks

    started = time.time()
    results = run_checks(length=args.length, perturb=args.perturb, seed=args.seed)
    failed = [r for r in results if not r.passed]
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    out = args.out / "verify_report.csv"
    _write_rows(out, ["check", "passed", "deviation", "tolerance"],
                [(r.name, r.passed, r.deviation, r.tolerance) for r in results])
    _manifest(args, argv, [out], started, {"failed": [r.name for r in failed]})
    return EXIT_NUMERICAL if failed else EXIT_OK


COMMANDS = {
    "ising-tangles": cmd_ising_tangles,
    "ising-norms": cmd_ising_norms,
    "bh": cmd_bh,
    "scatter": cmd_scatter,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.steps < 1 or args.j_max < args.j_min:
        parser.error("need --steps >= 1 and --j-max >= --j-min")
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args, argv)
    except (UsageError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

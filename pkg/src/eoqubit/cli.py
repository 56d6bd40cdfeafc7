"""Command-line front end: ``eoqubit <subcommand>`` or ``python -m eoqubit``.

Exit codes: 0 success, 1 verification failure, 2 usage error (bad flags,
unreadable input, refusing to overwrite without --force).  An optimization
that does not converge still exits 0; the manifest and summary record it.
Every run that writes files also writes ``manifest.json`` next to them;
``eoqubit replay manifest.json`` re-executes the recorded command.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .angular_momentum import SECTOR_SIZES, basis_matrix, build_three_qubit_basis, dump_basis_csv, oracle_state, sector_counts
from .eo_model import target_by_name, toffoli_assignments, toffoli_target
from .noise_lab import KINDS, NoiseConfig, default_workers, log_grid, noise_sweep
from .optimizers import (
    ControlGrid,
    JengaConfig,
    KrotovConfig,
    grape_optimize,
    grid_jtre,
    jenga_prune,
    krotov_optimize,
    random_initial_grid,
    structural_mask,
)
from .pulse_sequence import (
    BUNDLED,
    SequenceError,
    count_pulses,
    count_slots,
    load_sequence,
    save_sequence,
    verify_sequence,
)

log = logging.getLogger("eoqubit")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Bad input detected after argument parsing; maps to exit code 2."""


# --- helpers --------------------------------------------------------------------


def _data_dir(args) -> Path:
    if args.data_dir:
        return Path(args.data_dir)
    return Path(__file__).resolve().parent / "data"


def resolve_sequence_path(name: str, data_dir: Path) -> Path:
    """A file path, or a bundled name such as ``toffoli_jk_92``."""
    candidates = [Path(name), data_dir / name, data_dir / f"{name}.csv", data_dir / BUNDLED.get(name, name)]
    for path in candidates:
        if path.is_file():
            return path
    raise UsageError(f"sequence file not found: {name}")


def _load(name: str, args):
    path = resolve_sequence_path(name, _data_dir(args))
    try:
        return load_sequence(path), path
    except SequenceError as exc:
        raise UsageError(str(exc)) from None


def _target(name: str):
    try:
        return target_by_name(name)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None


class _Outputs:
    """Collects output paths and refuses to overwrite without ``--force``."""

    def __init__(self, out_dir, force: bool):
        self.dir = Path(out_dir) if out_dir else None
        self.force = force
        self.paths: list[str] = []

    def path(self, name: str) -> Path:
        if self.dir is None:
            raise UsageError("--out is required")
        p = self.dir / name
        if p.exists() and not self.force:
            raise UsageError(f"{p} exists; pass --force to overwrite")
        self.paths.append(str(p))
        return p

    def prepare(self, names):
        """Check every planned output up front, then create the directory."""
        for name in names:
            self.path(name)
        self.paths.clear()
        self.dir.mkdir(parents=True, exist_ok=True)


def _write_manifest(args, outputs: _Outputs, inputs, seeds, started: float, status: dict):
    if outputs.dir is None:
        return
    config = {k: v for k, v in vars(args).items() if k not in ("func",)}
    manifest = {
        "subcommand": args.command,
        "argv": args.argv,
        "config": config,
        "seeds": list(seeds),
        "inputs": [str(p) for p in inputs],
        "outputs": list(outputs.paths),
        "version": __version__,
        "wall_time": round(time.time() - started, 3),
        "status": status,
    }
    path = outputs.dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, default=str) + "\n")


def _print_json(obj):
    print(json.dumps(obj, indent=2, default=float))


# --- subcommands ------------------------------------------------------------------


def cmd_basis_check(args) -> int:
    started = time.time()
    out = _Outputs(args.out, args.force)
    dump = Path(args.dump) if args.dump else None
    if dump is not None and dump.exists() and not args.force:
        raise UsageError(f"{dump} exists; pass --force to overwrite")
    if out.dir is not None:
        out.prepare(["manifest.json"])
    states = build_three_qubit_basis()
    B = basis_matrix()
    checks = []
    ortho = float(np.abs(B.T @ B - np.eye(len(states))).max())
    checks.append(("orthonormality", ortho < 1e-12, f"max |<m|n> - delta| = {ortho:.2e}"))
    worst = 0.0
    for s, col in zip(states, B.T):
        worst = max(worst, 1.0 - abs(float(oracle_state(s.label) @ col)))
    checks.append(("casimir oracle", worst < 1e-12, f"max 1 - |overlap| = {worst:.2e}"))
    counts = tuple(sector_counts())
    checks.append(("sector counts", counts == SECTOR_SIZES, f"{counts}"))
    ok = all(passed for _, passed, _ in checks)
    for name, passed, detail in checks:
        print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
    summary = f"{len(states)} states, {len(counts)} sectors, "
    print(summary + ("all checks pass" if ok else "CHECKS FAILED"))
    if dump is not None:
        dump.parent.mkdir(parents=True, exist_ok=True)
        dump_basis_csv(dump)
        out.paths.append(str(dump))
        print(f"wrote {dump}")
    _write_manifest(args, out, [], [], started, {"passed": ok})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify(args) -> int:
    started = time.time()
    seq, path = _load(args.sequence, args)
    target = _target(args.target)
    out = _Outputs(args.out, args.force)
    if out.dir is not None:
        out.prepare(["report.json", "manifest.json"])
    report = verify_sequence(seq, target)
    pulses, steps = count_pulses(seq)
    result = {"sequence": str(path), "target": args.target, **report.as_dict(),
              "pulses": pulses, "steps": steps, "slots": count_slots(seq)}
    if args.target == "toffoli":
        scores = {}
        for controls, tq in toffoli_assignments():
            r = verify_sequence(seq, toffoli_target(None, controls, tq))
            scores[f"{controls}->{tq}"] = r.infidelity_d24
        result["assignments"] = scores
        result["best_assignment"] = min(scores, key=scores.get)
    ok = report.infidelity_d24 <= args.threshold
    result["passed"] = ok
    _print_json(result)
    if out.dir is not None:
        out.path("report.json").write_text(json.dumps(result, indent=2) + "\n")
    _write_manifest(args, out, [path], [], started, {"passed": ok})
    return EXIT_OK if ok else EXIT_FAIL


def _optimize_one(args, target, seed):
    first = args.first_parity
    mask = structural_mask(args.steps, first, args.exclude_pair)
    grid = random_initial_grid(args.steps, args.range, seed, mask, first)
    trace_path = args.out_dir / f"trace_seed{seed}.jsonl"
    if args.method == "grape":
        res = grape_optimize(None, target, args.steps, args.lr, args.iterations, initial=grid,
                             trace_path=trace_path)
        return seed, res.grid, res.final_jtre, False
    cfg = KrotovConfig(epsilon=args.epsilon, lambda_l=args.lambda_l, max_iterations=args.iterations,
                       sequential=not args.simultaneous)
    res = krotov_optimize(None, target, grid, cfg, trace_path=trace_path)
    return seed, res.grid, res.final_jtre, res.converged


def cmd_optimize(args) -> int:
    started = time.time()
    target = _target(args.target)
    if args.steps < 1 or args.seeds < 1 or args.iterations < 0:
        raise UsageError("--steps and --seeds must be positive and --iterations non-negative")
    if args.method == "krotov" and args.lambda_l <= 0:
        raise UsageError("--lambda must be positive")
    out = _Outputs(args.out, args.force)
    seeds = [args.seed + i for i in range(args.seeds)]
    out.prepare(["best.csv", "summary.json", "manifest.json"] + [f"trace_seed{s}.jsonl" for s in seeds])
    args.out_dir = out.dir
    workers = args.threads or default_workers()
    with ThreadPoolExecutor(workers) as pool:
        results = list(pool.map(lambda s: _optimize_one(args, target, s), seeds))
    for s in seeds:
        out.paths.append(str(out.dir / f"trace_seed{s}.jsonl"))
    seed, grid, value, _ = min(results, key=lambda r: r[2])
    save_sequence(grid.to_sequence(name=f"{args.method}_seed{seed}"), out.path("best.csv"))
    metric = "jtre"
    summary = {
        "method": args.method,
        "target": args.target,
        "metric": metric,
        "per_seed": [{"seed": s, metric: v, "converged": c} for s, _, v, c in results],
        "best_seed": seed,
        "best": value,
        "converged": any(c for *_, c in results),
    }
    out.path("summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    _print_json(summary)
    del args.out_dir
    _write_manifest(args, out, [], seeds, started, {"converged": summary["converged"]})
    return EXIT_OK


def cmd_jenga(args) -> int:
    started = time.time()
    seq, path = _load(args.sequence, args)
    target = _target(args.target)
    out = _Outputs(args.out, args.force)
    out.prepare(["pruned.csv", "removal_log.jsonl", "summary.json", "manifest.json"])
    try:
        grid = ControlGrid.from_sequence(seq)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    start_j = grid_jtre(None, target, grid)
    if start_j >= args.epsilon:
        print(f"refusing to prune: J_T,re = {start_j:.3e} is not below epsilon = {args.epsilon:g}",
              file=sys.stderr)
        _write_manifest(args, out, [path], [args.seed], started, {"refused": True, "jtre": start_j})
        return EXIT_FAIL
    cfg = JengaConfig(KrotovConfig(epsilon=args.epsilon, lambda_l=args.lambda_l,
                                   max_iterations=args.max_iterations,
                                   sequential=not args.simultaneous))

    def progress(rec):
        if args.verbose:
            print(json.dumps(rec), file=sys.stderr)

    res = jenga_prune(None, target, grid, cfg, seed=args.seed,
                      log_path=out.path("removal_log.jsonl"), progress=progress)
    save_sequence(res.sequence, out.path("pruned.csv"))
    before, after = count_pulses(seq), count_pulses(res.sequence)
    summary = {
        "input": str(path),
        "before": {"pulses": before[0], "steps": before[1]},
        "after": {"pulses": after[0], "steps": after[1]},
        "final_jtre": res.final_jtre,
        "attempts": len(res.state.history),
        "accepted": sum(r["accepted"] for r in res.state.history),
    }
    out.path("summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    _print_json(summary)
    ok = res.final_jtre < args.epsilon
    _write_manifest(args, out, [path], [args.seed], started, {"passed": ok})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_noise_sweep(args) -> int:
    started = time.time()
    loaded = [_load(name, args) for name in args.sequences]
    target = _target(args.target)
    out = _Outputs(args.out, args.force)
    names = [f"{seq.name}_{args.kind}.csv" for seq, _ in loaded]
    if len(set(names)) != len(names):
        raise UsageError("sequences must have distinct file names")
    try:
        grid = log_grid(args.lo, args.hi, args.points)
        cfg = NoiseConfig(samples=args.samples, seed=args.seed, workers=args.threads or default_workers())
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.with_zero:
        grid = np.concatenate([[0.0], grid])
    out.prepare(names + ["manifest.json"])
    curves = []
    for (seq, _), name in zip(loaded, names):
        res = noise_sweep(seq, None, target, args.kind, grid, cfg, label=seq.name)
        res.to_csv(out.path(name))
        curves.append(res)
        print(f"# {seq.name} ({args.kind})")
        for row in res.rows:
            print(f"{row.mean:.3e}  {row.mean_infidelity:.6e}  +/- {row.stderr:.2e}")
    _write_manifest(args, out, [p for _, p in loaded], [args.seed], started, {"curves": len(curves)})
    return EXIT_OK


def cmd_replay(args) -> int:
    manifest = json.loads(Path(args.manifest).read_text())
    argv = list(manifest["argv"])
    if "--force" not in argv:
        argv.append("--force")
    return main(argv)


# --- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eoqubit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--data-dir", help="directory holding bundled sequence files")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_out(p, required=False):
        p.add_argument("--out", required=required, help="output directory")
        p.add_argument("--force", action="store_true", help="overwrite existing outputs")

    p = sub.add_parser("basis-check", help="build the 90-state basis and run its checks")
    p.add_argument("--dump", help="write the basis as CSV to this path")
    add_out(p)
    p.set_defaults(func=cmd_basis_check)

    p = sub.add_parser("verify", help="propagate a sequence and report its fidelity")
    p.add_argument("sequence", help="CSV path or bundled name (e.g. toffoli_jk_92)")
    p.add_argument("--target", default="toffoli")
    p.add_argument("--threshold", type=float, default=1e-6, help="pass if 1 - F_d24 <= threshold")
    add_out(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("optimize", help="GRAPE or Krotov from random initial grids")
    p.add_argument("--target", default="toffoli")
    p.add_argument("--steps", type=int, default=55)
    p.add_argument("--seeds", type=int, default=1, help="number of random restarts")
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--method", choices=("grape", "krotov"), default="krotov")
    p.add_argument("--iterations", type=int, default=5000)
    p.add_argument("--epsilon", type=float, default=1e-8)
    p.add_argument("--lambda", dest="lambda_l", type=float, default=1.0)
    p.add_argument("--lr", type=float, default=0.02)
    p.add_argument("--range", type=float, default=0.5, help="initial amplitudes in [-r, r]")
    p.add_argument("--first-parity", choices=("odd", "even"), default="odd")
    p.add_argument("--exclude-pair", type=int, action="append", default=[],
                   help="pair index l of (l, l+1) kept at zero (repeatable)")
    p.add_argument("--simultaneous", action="store_true", help="update a step's controls together")
    p.add_argument("--threads", type=int, default=0)
    add_out(p, required=True)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("jenga", help="prune a converged sequence")
    p.add_argument("sequence")
    p.add_argument("--target", default="toffoli")
    p.add_argument("--epsilon", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lambda", dest="lambda_l", type=float, default=1.0)
    p.add_argument("--max-iterations", type=int, default=2000)
    p.add_argument("--simultaneous", action="store_true")
    add_out(p, required=True)
    p.set_defaults(func=cmd_jenga)

    p = sub.add_parser("noise-sweep", help="Monte Carlo infidelity against noise strength")
    p.add_argument("sequences", nargs="+")
    p.add_argument("--target", default="toffoli")
    p.add_argument("--kind", choices=KINDS, default="charge")
    p.add_argument("--lo", type=float, default=1e-8)
    p.add_argument("--hi", type=float, default=1e-1)
    p.add_argument("--points", type=int, default=8)
    p.add_argument("--with-zero", action="store_true", help="prepend a noiseless row (mean 0)")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=0)
    add_out(p, required=True)
    p.set_defaults(func=cmd_noise_sweep)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = argv
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"eoqubit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

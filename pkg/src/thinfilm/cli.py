"""Command-line entry point.

Subcommands
-----------
simulate  integrate one configuration and write trajectory, functionals,
          bound report and metadata into a run directory
region    rasterize the dissipation region (or query single points)
verify    run the identity suite and the eps-scaling sweep
decay     simulate and fit the sup-norm decay exponent
sweep     run a grid of configurations in parallel worker threads

Exit codes: 0 ok, 2 validation error, 3 identity/check failure,
4 step-floor abort.
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import logging
import os
import shutil
import subprocess
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import estimates, identities, laugesen, params, profiles, storage
from .errors import InsufficientDecay, OutOfTheorem, ThinFilmError
from .grid import Grid
from .solver import run

log = logging.getLogger("thinfilm")

EXIT_OK, EXIT_INVALID, EXIT_CHECK, EXIT_FLOOR = 0, 2, 3, 4


class UsageError(Exception):
    """Bad command-line input; maps to the validation exit code."""


# helpers

def git_hash() -> str:
    here = Path(__file__).resolve().parent
    try:
        out = subprocess.run(["git", "rev-parse", "HEAD"], cwd=here, capture_output=True,
                             text=True, timeout=10)
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() if out.returncode == 0 else "unknown"


def _json_hash(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()


def load_config(path, overrides):
    text = Path(path).read_text() if path else ""
    return params.loads(text, overrides)


def parse_h0(spec: str, grid: Grid) -> np.ndarray:
    """Initial data from ``const:c``, ``cos:c,A[,k]``, ``bump:c,w`` or ``file:PATH``."""
    kind, _, arg = spec.partition(":")
    try:
        if kind == "file":
            h0 = np.loadtxt(arg, dtype=float, ndmin=1)
            if h0.shape != (grid.N,):
                raise UsageError(f"{arg}: expected {grid.N} values, got {h0.size}")
            return h0
        vals = [float(v) for v in arg.split(",")] if arg else []
    except ValueError as exc:
        raise UsageError(f"bad --h0 {spec!r}: {exc}") from None
    if kind == "const" and len(vals) == 1:
        return profiles.constant(grid, vals[0])
    if kind == "cos" and len(vals) in (2, 3):
        return profiles.cosine(grid, *vals)
    if kind == "bump" and len(vals) == 2:
        return profiles.compact_bump(grid, *vals)
    raise UsageError(f"bad --h0 {spec!r}; use const:c, cos:c,A[,k], bump:c,w or file:PATH")


class RunDir:
    """Output directory written atomically.

    Files go to a hidden temporary sibling that replaces ``target`` on
    :meth:`commit`. An existing target whose ``metadata.json`` carries a
    different hash is kept unless ``force`` is set.
    """

    def __init__(self, target, run_hash: str, force: bool = False):
        self.target = Path(target)
        self.hash = run_hash
        self.check(self.target, run_hash, force)
        self.target.parent.mkdir(parents=True, exist_ok=True)
        self.tmp = Path(tempfile.mkdtemp(prefix=f".{self.target.name}.", dir=self.target.parent))

    @staticmethod
    def check(target: Path, run_hash: str, force: bool):
        if not target.exists():
            return
        meta = target / "metadata.json"
        old = None
        if meta.exists():
            try:
                old = json.loads(meta.read_text()).get("config_hash")
            except (OSError, ValueError):
                old = None
        if old != run_hash and not force:
            raise UsageError(f"{target} holds a run with config hash {old}; "
                             "use --force to overwrite")

    def path(self, name: str) -> Path:
        return self.tmp / name

    def commit(self):
        old = None
        if self.target.exists():
            old = self.target.with_name(self.tmp.name + ".old")
            os.replace(self.target, old)
        os.replace(self.tmp, self.target)
        if old is not None:
            shutil.rmtree(old, ignore_errors=True)

    def discard(self):
        shutil.rmtree(self.tmp, ignore_errors=True)


def _write_timing(rd: RunDir, seconds: float):
    storage.write_json(rd.path("timing.json"), {"wall_time_s": seconds})


# simulate

def simulate_into(rd: RunDir, cfg, h0_spec: str, seed: int, snapshot_every: int,
                  binary: bool, run_hash: str) -> dict:
    """Run one configuration and write its files into ``rd``; return a summary."""
    grid = Grid.from_config(cfg)
    h0 = parse_h0(h0_spec, grid)
    try:
        case = estimates.classify_case(cfg.model)
    except OutOfTheorem as exc:
        case, case_error = None, str(exc)
    else:
        case_error = None
    observers = []
    dens = None
    if case == "m>n+2":
        dens = estimates.PowerIntegral(estimates.growth_exponents(cfg.model, case)["q"])
        observers.append(dens)
    traj = run(cfg, h0, observers, snapshot_every=snapshot_every)

    rd.path("config.ini").write_text(params.dumps(cfg))
    if binary:
        storage.write_trajectory_binary(rd.path("trajectory.bin"), traj.states, run_hash)
    else:
        storage.write_trajectory_csv(rd.path("trajectory.csv"), traj.states, run_hash)
    storage.write_records_csv(rd.path("functionals.csv"), traj.records, run_hash)

    if case is None:
        report = {"case": None, "error": case_error}
        violations = None
    elif case == "stable":
        rep = estimates.check_monotone_energy(traj, cfg.model)
        report, violations = rep.to_dict(), rep.violations
    else:
        rep = estimates.check_growth_bound(traj, cfg.model,
                                           densities=dens.values if dens else None)
        report, violations = rep.to_dict(), rep.violations
    report["config_hash"] = run_hash
    storage.write_json(rd.path("bound_report.json"), report)

    M = traj.records[0].mass
    meta = {
        "config_hash": run_hash,
        "git_hash": git_hash(),
        "h0": h0_spec,
        "seed": seed,
        "grid": {"a": grid.a, "N": grid.N, "dx": grid.dx},
        "mass": M,
        "case": case,
        "steps": len(traj.stats),
        "snapshots": len(traj.states),
        "t_final": traj.final.t,
        "aborted": traj.aborted,
        "abort_reason": traj.abort_reason,
        "jacobian_error": traj.jacobian_error,
        "max_mass_drift": float(np.max(np.abs(traj.series("mass") - M)) / abs(M)) if M else 0.0,
    }
    storage.write_json(rd.path("metadata.json"), meta)
    return {"traj": traj, "meta": meta, "violations": violations}


def _sim_hash(cfg, h0_spec, seed, extra=""):
    return params.config_hash(cfg, extra=f"h0={h0_spec};seed={seed};{extra}")


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, args.set)
    run_hash = _sim_hash(cfg, args.h0, args.seed)
    rd = RunDir(args.out, run_hash, args.force)
    t0 = time.perf_counter()
    try:
        res = simulate_into(rd, cfg, args.h0, args.seed, args.snapshot_every, args.binary, run_hash)
        _write_timing(rd, time.perf_counter() - t0)
    except BaseException:
        rd.discard()
        raise
    rd.commit()
    meta = res["meta"]
    print(f"{args.out}: {meta['steps']} steps to t={meta['t_final']:.6g}, case={meta['case']}, "
          f"violations={res['violations']}")
    if meta["aborted"]:
        print(f"aborted: {meta['abort_reason']}", file=sys.stderr)
        return EXIT_FLOOR
    return EXIT_OK


# region

def cmd_region(args) -> int:
    if args.point:
        out = []
        for n, al in args.point:
            r = laugesen.classify_point(n, al)
            out.append({"n": r.n, "alpha": r.alpha, "feasible": r.feasible,
                        "kappa_interval": list(r.kappa_interval) if r.kappa_interval else None,
                        "mu_sign_ok_for_stable": r.mu_sign_ok_for_stable,
                        "in_envelope": r.in_envelope})
        print(json.dumps(out, indent=2, sort_keys=True))
        return EXIT_OK
    if args.out is None:
        raise UsageError("region: --out is required unless --point is given")
    res = args.res if len(args.res) == 2 else args.res * 2
    if min(res) < 2:
        raise UsageError("--res must be >= 2")
    spec = {"n_range": args.n_range, "alpha_range": args.alpha_range, "res": res}
    run_hash = _json_hash({"region": spec})
    rd = RunDir(args.out, run_hash, args.force)
    try:
        t0 = time.perf_counter()
        scan = laugesen.region_scan(tuple(args.n_range), tuple(args.alpha_range), tuple(res))
        elapsed = time.perf_counter() - t0
        scan.write_csv(rd.path("region.csv"))
        for name, arr in (("boundary.csv", scan.boundary()), ("reference.csv", scan.reference_line())):
            with open(rd.path(name), "w") as fh:
                fh.write("n,alpha\n")
                for nv, av in arr:
                    fh.write(f"{float(nv)!r},{float(av)!r}\n")
        rd.path("region.gp").write_text(laugesen.GNUPLOT_SCRIPT.format(
            region="region.csv", boundary="boundary.csv", reference="reference.csv"))
        storage.write_json(rd.path("metadata.json"), {
            "config_hash": run_hash, "git_hash": git_hash(), **spec,
            "feasible_points": int(scan.feasible.sum()),
            "marginal_points": int(scan.marginal.sum()),
            "points": int(scan.feasible.size),
        })
        _write_timing(rd, elapsed)
    except BaseException:
        rd.discard()
        raise
    rd.commit()
    print(f"{args.out}: {int(scan.feasible.sum())} of {scan.feasible.size} points feasible")
    return EXIT_OK


# verify

def cmd_verify(args) -> int:
    report = identities.identity_report(seed=args.seed, n_random=args.profiles,
                                        n_kappa=args.kappas, nodes=args.nodes)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        run_hash = _json_hash({"verify": [args.seed, args.profiles, args.kappas, args.nodes]})
        report_meta = {"config_hash": run_hash, "git_hash": git_hash()}
        rd = RunDir(args.out, run_hash, args.force)
        try:
            rd.path("identity_report.json").write_text(text)
            storage.write_json(rd.path("metadata.json"), report_meta)
        except BaseException:
            rd.discard()
            raise
        rd.commit()
    else:
        sys.stdout.write(text)
    sw = report.get("eps_sweep", {})
    print(f"max residual {report['max_residual']:.3e}; eps slope {sw.get('slope', float('nan')):.4f}"
          f" (expected {sw.get('expected', float('nan')):.4f})", file=sys.stderr)
    if not report["passed"]:
        print(f"identity failure: {report['first_failure']}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


# decay

def cmd_decay(args) -> int:
    cfg = load_config(args.config, args.set)
    run_hash = _sim_hash(cfg, args.h0, args.seed, extra="decay")
    rd = RunDir(args.out, run_hash, args.force)
    t0 = time.perf_counter()
    try:
        res = simulate_into(rd, cfg, args.h0, args.seed, args.snapshot_every, args.binary, run_hash)
        try:
            fit = estimates.decay_diagnostic(res["traj"], cfg.model)
            payload, passed = fit.to_dict(), fit.passes
        except InsufficientDecay as exc:
            payload, passed = {"error": str(exc), "passes": False}, False
        payload["config_hash"] = run_hash
        storage.write_json(rd.path("decay.json"), payload)
        _write_timing(rd, time.perf_counter() - t0)
    except BaseException:
        rd.discard()
        raise
    rd.commit()
    if res["meta"]["aborted"]:
        print(f"aborted: {res['meta']['abort_reason']}", file=sys.stderr)
        return EXIT_FLOOR
    print(f"decay exponent p = {payload.get('p')}, passes = {passed}")
    return EXIT_OK if passed else EXIT_CHECK


# sweep

def _parse_vary(items):
    axes = []
    for item in items:
        key, sep, vals = item.partition("=")
        if not sep or "." not in key or not vals:
            raise UsageError(f"bad --vary {item!r}; use section.key=v1,v2,...")
        axes.append((key.strip(), [v.strip() for v in vals.split(",")]))
    return axes


def cmd_sweep(args) -> int:
    base = load_config(args.config, args.set)
    axes = _parse_vary(args.vary)
    combos = list(itertools.product(*[vals for _, vals in axes])) if axes else [()]
    cfgs = []
    for combo in combos:
        ov = list(args.set) + [f"{k}={v}" for (k, _), v in zip(axes, combo)]
        cfgs.append((ov, load_config(args.config, ov)))
    run_hash = _json_hash({"sweep": [params.config_hash(base), args.h0, args.seed,
                                     [params.config_hash(c) for _, c in cfgs]]})
    rd = RunDir(args.out, run_hash, args.force)

    def one(k):
        ov, cfg = cfgs[k]
        h = _sim_hash(cfg, args.h0, args.seed)
        sub = rd.path(f"run-{k:03d}")
        sub.mkdir()
        sub_rd = _SubDir(sub)
        res = simulate_into(sub_rd, cfg, args.h0, args.seed, args.snapshot_every, args.binary, h)
        rec = res["traj"].records[-1]
        return {"run": f"run-{k:03d}", "overrides": ";".join(ov[len(args.set):]),
                "config_hash": h, "case": res["meta"]["case"], "violations": res["violations"],
                "aborted": res["meta"]["aborted"], "t_final": rec.t, "E0_alpha": rec.E0_alpha,
                "mass_drift": res["meta"]["max_mass_drift"]}

    t0 = time.perf_counter()
    try:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(one, range(len(cfgs))))
        cols = list(rows[0])
        with open(rd.path("summary.csv"), "w") as fh:
            fh.write(",".join(cols) + "\n")
            for r in rows:
                fh.write(",".join(repr(r[c]) if isinstance(r[c], float) else str(r[c]) for c in cols) + "\n")
        storage.write_json(rd.path("metadata.json"), {
            "config_hash": run_hash, "git_hash": git_hash(), "h0": args.h0, "seed": args.seed,
            "vary": args.vary, "set": args.set, "runs": len(rows)})
        _write_timing(rd, time.perf_counter() - t0)
    except BaseException:
        rd.discard()
        raise
    rd.commit()
    aborted = sum(bool(r["aborted"]) for r in rows)
    print(f"{args.out}: {len(rows)} runs, {aborted} aborted")
    return EXIT_FLOOR if aborted else EXIT_OK


class _SubDir:
    """Plain directory with the :class:`RunDir` ``path`` interface."""

    def __init__(self, root: Path):
        self.root = root

    def path(self, name: str) -> Path:
        return self.root / name


# parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="thinfilm", description=__doc__.split("\n\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_required=True):
        sp.add_argument("--out", type=Path, required=out_required, help="output directory")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--force", action="store_true", help="overwrite a run with another hash")

    def sim_opts(sp):
        sp.add_argument("--config", type=Path, help="INI config file (defaults if omitted)")
        sp.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one config value (repeatable)")
        sp.add_argument("--h0", default="cos:1,0.5,1",
                        help="const:c | cos:c,A[,k] | bump:c,w | file:PATH")
        sp.add_argument("--snapshot-every", type=int, default=1, metavar="K")
        sp.add_argument("--binary", action="store_true", help="binary trajectory instead of CSV")

    sp = sub.add_parser("simulate", help="integrate one configuration")
    common(sp)
    sim_opts(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("region", help="scan the dissipation region")
    common(sp, out_required=False)
    sp.add_argument("--n-range", type=float, nargs=2, default=[0.4, 3.1], metavar=("LO", "HI"))
    sp.add_argument("--alpha-range", type=float, nargs=2, default=[-1.0, 1.0], metavar=("LO", "HI"))
    sp.add_argument("--res", type=int, nargs="+", default=[271, 201], metavar="R",
                    help="points along n and alpha (one value for both)")
    sp.add_argument("--point", type=float, nargs=2, action="append", metavar=("N", "ALPHA"),
                    help="query single points instead of scanning (repeatable)")
    sp.set_defaults(func=cmd_region)

    sp = sub.add_parser("verify", help="identity suite and eps sweep")
    common(sp, out_required=False)
    sp.add_argument("--profiles", type=int, default=20, help="random profiles")
    sp.add_argument("--kappas", type=int, default=5, help="random kappa per profile")
    sp.add_argument("--nodes", type=int, default=512)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("decay", help="simulate and fit the decay exponent")
    common(sp)
    sim_opts(sp)
    sp.set_defaults(func=cmd_decay)

    sp = sub.add_parser("sweep", help="run a grid of configurations")
    common(sp)
    sim_opts(sp)
    sp.add_argument("--vary", action="append", default=[], metavar="SECTION.KEY=V1,V2,...")
    sp.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    sp.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)
    if getattr(args, "snapshot_every", 1) < 1:
        print("error: --snapshot-every must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except (UsageError, ValueError, ThinFilmError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

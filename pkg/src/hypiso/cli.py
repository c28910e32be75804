"""Command-line front end.

Exit codes: 0 when every applicable verdict passes, 1 when some verdict
fails (or the optimizer reports non-convergence), 2 on a numerical or input
error.  Reports are deterministic for a fixed config and seed; wall-clock
timings go to a separate ``timings.json``.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import io
from .config import RunConfig, load_config
from .errors import HypisoError
from .families import geodesic_cap
from .measure import MonotonicityCurve, euclidean_volume, monotonicity_curve
from .verify import (TheoremId, check_classical_isoperimetric, check_laplacian_lemma,
                     check_linear_isoperimetric, check_mobius_boundary, check_mobius_boundary_bound,
                     check_mobius_isoperimetric, check_monotonicity, check_reverse_totally_geodesic,
                     check_volume_lower_bound, max_density, mobius_volume)


class Timer:
    def __init__(self):
        self.laps = {}

    def lap(self, name, fn, *args, **kw):
        t0 = time.perf_counter()
        out = fn(*args, **kw)
        self.laps[name] = self.laps.get(name, 0.0) + time.perf_counter() - t0
        return out


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("HYPISO_THREADS", "1")))
    except ValueError:
        return 1


def _bundle(cfg: RunConfig, command: str, **parts) -> dict:
    out = {"schema": io.REPORT_SCHEMA, "command": command, "config": cfg.to_dict()}
    out.update(parts)
    return out


def _status(verdicts) -> int:
    return 0 if all(v.passed for v in verdicts if not v.not_applicable) else 1


def _finish(out: Path, timer: Timer) -> None:
    io.write_json(out / "timings.json", {k: timer.laps[k] for k in sorted(timer.laps)})


# ---------------------------------------------------------------- commands

def cmd_sweep_theta(cfg: RunConfig, out: Path) -> int:
    """Linear, classical and reverse verdicts on geodesic caps over a theta grid."""
    timer = Timer()
    k, n = cfg.family.k, cfg.family.n
    thetas = cfg.measure.thetas()

    def one(theta):
        cap = geodesic_cap(k, n, theta)
        rep = euclidean_volume(cap, rtol=cfg.measure.rtol)
        return theta, rep, [check_linear_isoperimetric(cap, rep), check_classical_isoperimetric(cap, rep),
                            check_reverse_totally_geodesic(cap, rep)]

    t0 = time.perf_counter()
    with ThreadPoolExecutor(min(_workers(), len(thetas))) as ex:
        results = list(ex.map(one, thetas))  # rows stay in input order
    timer.laps["sweep"] = time.perf_counter() - t0
    rows, records, verdicts = [], [], []
    for theta, rep, (lin, cls, rev) in results:
        status = "n/a" if cls.not_applicable else ("pass" if cls.passed else "fail")
        rows.append((theta, rep.vol_euclidean, rep.vol_ideal_boundary, lin.slack, status, rev.slack))
        records.append({"theta": theta, "volume": rep, "verdicts": [lin, cls, rev]})
        verdicts += [lin, cls, rev]
    io.write_csv(out / "sweep.csv", io.SWEEP_HEADER, rows)
    io.write_json(out / "report.json", _bundle(cfg, "sweep-theta", sweep=records))
    _finish(out, timer)
    return _status(verdicts)


def _curve(cfg: RunConfig, sigma, timer: Timer) -> MonotonicityCurve:
    curve = timer.lap("monotonicity", monotonicity_curve, sigma, cfg.measure.grid_size)
    if cfg.corrupt_curve:
        ratios = curve.ratios.copy()
        i = len(ratios) // 2
        ratios[i] = min(ratios[i], ratios[i - 1]) - 1e-3
        curve = MonotonicityCurve(curve.radii, ratios, curve.errors)
    return curve


def cmd_monotonicity(cfg: RunConfig, out: Path) -> int:
    timer = Timer()
    sigma = cfg.family.build()
    curve = _curve(cfg, sigma, timer)
    v = check_monotonicity(curve)
    (out / "monotonicity.csv").parent.mkdir(parents=True, exist_ok=True)
    (out / "monotonicity.csv").write_text(curve.to_csv())
    io.write_json(out / "report.json", _bundle(cfg, "monotonicity", curve=curve, verdicts=[v]))
    _finish(out, timer)
    return _status([v])


def cmd_mobius(cfg: RunConfig, out: Path, target: str, history: bool) -> int:
    timer = Timer()
    sigma = cfg.family.build()
    res = timer.lap("mobius", mobius_volume, sigma, target, cfg.optimizer)
    io.write_json(out / "mobius.json", _bundle(cfg, "mobius", target=target, mobius=res))
    if history:
        best = res.best_so_far()
        io.write_csv(out / "mobius_history.csv", "evaluation,volume,best",
                     [(i, v, b) for i, ((_, v), b) in enumerate(zip(res.history, best))])
    _finish(out, timer)
    return 0 if res.converged else 1


def cmd_verify_all(cfg: RunConfig, out: Path) -> int:
    timer = Timer()
    sigma = cfg.family.build()
    on = cfg.selected
    rep = timer.lap("volume", euclidean_volume, sigma, cfg.measure.truncation, cfg.measure.rtol)
    full = rep if cfg.measure.truncation == 1.0 else timer.lap("volume", euclidean_volume, sigma)
    verdicts, parts = [], {"volume": rep}
    if on(TheoremId.LinearIsop):
        verdicts.append(check_linear_isoperimetric(sigma, full))
    if on(TheoremId.ClassicalIsop):
        verdicts.append(check_classical_isoperimetric(sigma, full))
    if on(TheoremId.ReverseTG):
        verdicts.append(check_reverse_totally_geodesic(sigma, full))
    if on(TheoremId.VolumeLowerBound):
        verdicts.append(check_volume_lower_bound(sigma, full))
    if on(TheoremId.LaplacianLemma) and sigma.k >= 2:
        verdicts.append(timer.lap("laplacian", check_laplacian_lemma, sigma,
                                  cfg.measure.laplacian_samples, cfg.seed))
    if on(TheoremId.Monotonicity):
        curve = _curve(cfg, sigma, timer)
        parts["curve"] = curve
        verdicts.append(check_monotonicity(curve))
    mobius = {}
    need_bd = any(on(t) for t in (TheoremId.MobiusBoundary, TheoremId.MobiusDensity, TheoremId.MobiusIsop))
    if need_bd:
        mobius["boundary"] = timer.lap("mobius", mobius_volume, sigma, "boundary", cfg.optimizer)
    if on(TheoremId.MobiusBoundary):
        verdicts.append(timer.lap("mobius", check_mobius_boundary, sigma, cfg.optimizer, mobius["boundary"]))
    if on(TheoremId.MobiusDensity):
        theta, where, _ = timer.lap("density", max_density, sigma)
        parts["max_density"] = {"value": theta, "point": where}
        verdicts.append(timer.lap("mobius", check_mobius_boundary_bound, sigma, cfg.optimizer,
                                  mobius["boundary"], theta))
    if on(TheoremId.MobiusIsop):
        mobius["submanifold"] = timer.lap("mobius", mobius_volume, sigma, "submanifold", cfg.optimizer)
        verdicts.append(check_mobius_isoperimetric(sigma, cfg.optimizer, mobius["submanifold"],
                                                   mobius["boundary"]))
    parts["verdicts"] = verdicts
    parts["mobius"] = mobius
    io.write_json(out / "report.json", _bundle(cfg, "verify-all", **parts))
    io.write_json(out / "submanifold.json", io.submanifold_to_dict(sigma))
    if "curve" in parts:
        (out / "monotonicity.csv").write_text(parts["curve"].to_csv())
    _finish(out, timer)
    return _status(verdicts)


# ------------------------------------------------------------------ parsing

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hypiso", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML run configuration")
    common.add_argument("--out", type=Path, help="output directory (overrides [output] dir)")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--truncation", type=float, help="truncation radius R in (0, 1]")
    common.add_argument("--restarts", type=int, help="optimizer restarts")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("sweep-theta", parents=[common], help="verdicts over a cap angle grid")
    sub.add_parser("monotonicity", parents=[common], help="monotonicity ratio curve")
    m = sub.add_parser("mobius", parents=[common], help="Mobius volume of a family")
    m.add_argument("--target", choices=("submanifold", "boundary"), default="submanifold")
    m.add_argument("--history", action="store_true", help="also write the evaluation history CSV")
    sub.add_parser("verify-all", parents=[common], help="every applicable verdict")
    return p


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.seed is not None:
        cfg.seed = cfg.optimizer.seed = args.seed
    if args.truncation is not None:
        cfg.measure.truncation = args.truncation
    if args.restarts is not None:
        cfg.optimizer.restarts = args.restarts
    if args.out is not None:
        cfg.output_dir = str(args.out)
    return cfg.validate()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "sweep-theta":
            return cmd_sweep_theta(cfg, out)
        if args.command == "monotonicity":
            return cmd_monotonicity(cfg, out)
        if args.command == "mobius":
            return cmd_mobius(cfg, out, args.target, args.history)
        return cmd_verify_all(cfg, out)
    except (HypisoError, ArithmeticError, ValueError, OSError) as exc:
        print(f"hypiso: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

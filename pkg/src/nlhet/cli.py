"""Command-line entry point: verify-model, solve, diagnose, bench-appendix.

Exit-code contract: 0 pass, 1 check or convergence failure, 2 usage or
precondition error (including config parse errors), 3 environment error
(I/O, locking).  One config file drives a run; outputs are deterministic
for identical configs (fixed summation order, no wall-clock content), and
the run manifest is written last via atomic rename.  NLHET_THREADS caps
internal parallelism (used by the scaling bench across family members).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

import numpy as np

from . import appendix_bench as ab
from . import diagnostics as dg
from .config import ConfigError, RunConfig, parse_config
from .discretize import Grid, Profile
from .model import reference_profile_eval, verify_model
from .obstacles import (BarrierSolveError, EnvelopeClauseError, ObstaclePair,
                        build_envelopes, solve_barrier)
from .solver import NonConvergenceError, SolverError, continuation_run

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_ENV = 0, 1, 2, 3
_FMT = "%.17g"


def _thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("NLHET_THREADS", "4")))
    except ValueError:
        return 4


# --------------------------------------------------------------------------
# file helpers
# --------------------------------------------------------------------------


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_profile_csv(path: str, Q: Profile, ref: Profile) -> None:
    rows = ["x,Q,Qsharp,v"]
    v = Q.values - ref.values
    for xx, qq, rr, vv in zip(Q.x, Q.values, ref.values, v):
        rows.append(",".join(_FMT % t for t in (xx, qq, rr, vv)))
    _atomic_write(path, "\n".join(rows) + "\n")


def read_profile_csv(path: str, R_hint: Optional[float] = None):
    try:
        data = np.genfromtxt(path, delimiter=",", names=True)
        x = np.asarray(data["x"], float)
        q = np.asarray(data["Q"], float)
        ref = np.asarray(data["Qsharp"], float)
    except Exception as e:
        raise ValueError(f"profile CSV schema mismatch: {e}") from e
    if x.ndim != 1 or x.size < 3 or x.size % 2 == 0:
        raise ValueError("profile CSV must hold an odd number >= 3 of rows")
    grid = Grid(R=float(abs(x[0])), n=x.size)
    if not np.allclose(grid.x, x, atol=1e-9):
        raise ValueError("profile CSV nodes are not a symmetric uniform grid")
    Q = Profile(grid, q, float(ref[0]), float(ref[-1]))
    refp = Profile(grid, ref, float(ref[0]), float(ref[-1]))
    return Q, refp


def write_obstacles_csv(path: str, pair: ObstaclePair) -> None:
    rows = ["x,phi,psi,Phi,Psi"]
    for t in zip(pair.phi.x, pair.phi.values, pair.psi.values,
                 pair.Phi.values, pair.Psi.values):
        rows.append(",".join(_FMT % v for v in t))
    _atomic_write(path, "\n".join(rows) + "\n")


def write_trace_csv(path: str, trace) -> None:
    rows = ["iter,viscous,penalty,potential,interaction,total,grad_norm"]
    for it, visc, pen, pot, inter, tot, gn in trace:
        rows.append("%d,%s" % (it, ",".join(_FMT % v for v in
                                            (visc, pen, pot, inter, tot, gn))))
    _atomic_write(path, "\n".join(rows) + "\n")


class _Lock:
    def __init__(self, outdir: str):
        self.path = os.path.join(outdir, ".nlhet.lock")

    def __enter__(self):
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
            os.close(fd)
        except FileExistsError:
            raise OSError(f"output directory is locked by another run "
                          f"({self.path})")
        return self

    def __exit__(self, *exc):
        try:
            os.remove(self.path)
        except OSError:
            pass


def _write_manifest(outdir: str, digest: str, command: str,
                    outputs: List[str], verdicts: dict,
                    extra: Optional[dict] = None) -> str:
    man = {"config_digest": digest, "run_id": digest[:16], "command": command,
           "outputs": sorted(outputs), "verdicts": verdicts}
    if extra:
        man.update(extra)
    path = os.path.join(outdir, "manifest.json")
    _atomic_write(path, json.dumps(man, indent=2, sort_keys=True) + "\n")
    return path


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_verify_model(cfg: RunConfig, outdir: Optional[str]) -> int:
    report = verify_model(cfg.spec)
    for line in report.lines():
        print(line)
    if outdir:
        os.makedirs(outdir, exist_ok=True)
        path = os.path.join(outdir, "verify_model.json")
        _atomic_write(path, json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
        _write_manifest(outdir, cfg.digest, "verify-model", [path],
                        {c.name: ("pass" if c.passed else "fail") for c in report})
    return EXIT_OK if report.all_passed else EXIT_CHECK


def _layer_match(Q: Profile, report_cfg: dict) -> Optional[dict]:
    """L-inf distance to the best-shift explicit layer (homogeneous anchor)."""
    if not report_cfg.get("layer_match"):
        return None
    x = Q.x
    shifts = np.linspace(-10, 10, 2001)
    best = math.inf
    arg = 0.0
    for c in shifts:
        d = float(np.abs(Q.values - (np.pi + 2 * np.arctan(x - c))).max())
        if d < best:
            best, arg = d, float(c)
    lo, hi = arg - 0.02, arg + 0.02
    for _ in range(40):
        c = 0.5 * (lo + hi)
        dl = float(np.abs(Q.values - (np.pi + 2 * np.arctan(x - (c - 1e-4)))).max())
        dr = float(np.abs(Q.values - (np.pi + 2 * np.arctan(x - (c + 1e-4)))).max())
        if dl < dr:
            hi = c
        else:
            lo = c
        best = min(best, dl, dr)
    tol = report_cfg.get("layer_tol", 0.05)
    return {"distance": best, "shift": 0.5 * (lo + hi), "tol": tol,
            "pass": best <= tol}


def cmd_solve(cfg: RunConfig, outdir: str, resume: bool) -> int:
    if cfg.obstacles is None:
        print("config lacks usable obstacle endpoints (set obstacles.b1/b2 "
              "or modulation m1/m2)", file=sys.stderr)
        return EXIT_USAGE
    try:
        os.makedirs(outdir, exist_ok=True)
        testfile = os.path.join(outdir, ".writable")
        with open(testfile, "w") as fh:
            fh.write("")
        os.remove(testfile)
    except OSError as e:
        print(f"output directory not usable: {e}", file=sys.stderr)
        return EXIT_ENV

    stage_dir = os.path.join(outdir, "stages")
    os.makedirs(stage_dir, exist_ok=True)
    state_path = os.path.join(outdir, "stages", "state.json")
    resume_state = None
    ref = Profile.from_function(
        cfg.grid, lambda x: reference_profile_eval(cfg.spec.reference, x),
        cfg.spec.reference.zeta1, cfg.spec.reference.zeta2)
    if resume and os.path.exists(state_path):
        with open(state_path) as fh:
            st = json.load(fh)
        stage_csv = os.path.join(stage_dir, f"stage_{st['last']:03d}.csv")
        Qr, _ = read_profile_csv(stage_csv)
        resume_state = (st["last"], Qr)
        print(f"resuming after completed stage {st['last']}")

    def stage_cb(idx, mu, eta, Q):
        write_profile_csv(os.path.join(stage_dir, f"stage_{idx:03d}.csv"), Q, ref)
        _atomic_write(state_path, json.dumps({"last": idx}) + "\n")

    outputs: List[str] = []
    verdicts: dict = {}
    try:
        with _Lock(outdir):
            try:
                result = continuation_run(
                    cfg.spec, cfg.grid, cfg.obstacles, cfg.schedule, cfg.solver,
                    limit_tol=cfg.limit_tol, stage_callback=stage_cb,
                    resume_state=resume_state)
            except (NonConvergenceError, SolverError, EnvelopeClauseError,
                    BarrierSolveError, ValueError) as e:
                stage_id = "unknown"
                if os.path.exists(state_path):
                    with open(state_path) as fh:
                        stage_id = str(json.load(fh).get("last", "unknown"))
                print(f"continuation failed at stage {stage_id}: {e}",
                      file=sys.stderr)
                return EXIT_CHECK

            prof_path = os.path.join(outdir, "profile.csv")
            write_profile_csv(prof_path, result.profile, ref)
            outputs.append(prof_path)
            tr_path = os.path.join(outdir, "energy_trace.csv")
            write_trace_csv(tr_path, result.trace)
            outputs.append(tr_path)
            spec_c, _ = cfg.spec.canonical()
            phi = solve_barrier(spec_c, cfg.obstacles, cfg.grid, 0.0, +1)
            psi = solve_barrier(spec_c, cfg.obstacles, cfg.grid, 0.0, -1)
            pair = build_envelopes(phi, psi, cfg.obstacles, 0.0)
            obs_path = os.path.join(outdir, "obstacles.csv")
            write_obstacles_csv(obs_path, pair)
            outputs.append(obs_path)

            diag = {
                "residual_max": result.residual_max,
                "limit_check": result.limit_check,
                "contact_count": len(result.contact),
                "monotone": result.monotone,
                "iterations": result.iterations,
                "flipped": result.flipped,
                "stages": [vars(s) for s in result.stages],
                "energy": {
                    "viscous": result.breakdown.viscous,
                    "penalty": result.breakdown.penalty,
                    "potential": result.breakdown.potential,
                    "interaction": result.breakdown.interaction,
                    "total": result.breakdown.total,
                },
                "rhs_scale": pair.rhs_scale,
            }
            lm = _layer_match(result.profile, cfg.report)
            if lm is not None:
                diag["layer_match"] = lm
                verdicts["layer_match"] = "pass" if lm["pass"] else "fail"
            diag_path = os.path.join(outdir, "diagnostics.json")
            _atomic_write(diag_path, json.dumps(diag, indent=2, sort_keys=True) + "\n")
            outputs.append(diag_path)

            verdicts["limit_check"] = "pass" if result.limit_check["pass"] else "fail"
            verdicts["contact_empty"] = "pass" if not result.contact else "fail"
            verdicts["residual_max"] = f"measured:{result.residual_max:.6e}"
            verdicts["monotone"] = f"measured:{result.monotone}"
            outputs.extend(os.path.join(stage_dir, p)
                           for p in sorted(os.listdir(stage_dir)))
            import hashlib
            model_raw = {k: v for k, v in cfg.raw.items()
                         if k in ("kernel", "potential", "modulation")}
            model_hash = hashlib.sha256(
                json.dumps(model_raw, sort_keys=True).encode()).hexdigest()
            extra = {
                "model_hash": model_hash,
                "stage_energies": [{"mu": s.mu, "eta": s.eta,
                                    "energy": s.energy,
                                    "iterations": s.iterations}
                                   for s in result.stages],
                "residual_max": result.residual_max,
                "contact_count": len(result.contact),
            }
            man = _write_manifest(outdir, cfg.digest, "solve", outputs,
                                  verdicts, extra)
            outputs.append(man)
    except OSError as e:
        print(f"environment error: {e}", file=sys.stderr)
        return EXIT_ENV
    bad = [k for k, v in verdicts.items() if v == "fail"]
    if bad:
        print(f"failed verdicts: {', '.join(bad)}", file=sys.stderr)
        return EXIT_CHECK
    print(f"solve complete: residual_max={result.residual_max:.3e}, "
          f"contact={len(result.contact)}, outputs in {outdir}")
    return EXIT_OK


def cmd_diagnose(profile_path: str, cfg: RunConfig, checks: List[str],
                 outdir: str) -> int:
    try:
        Q, ref = read_profile_csv(profile_path)
    except ValueError as e:
        print(f"profile schema error: {e}", file=sys.stderr)
        return EXIT_USAGE
    os.makedirs(outdir, exist_ok=True)
    spec, _ = cfg.spec.canonical()
    pot = spec.potential
    wells = (pot.zeta1, pot.zeta2)
    d = cfg.diagnostics
    needs_obstacles = any(c in checks for c in ("lewy-stampacchia", "stickiness"))
    if needs_obstacles and cfg.obstacles is None:
        print("requested checks need obstacle endpoints in the config",
              file=sys.stderr)
        return EXIT_USAGE
    out = {}
    outputs = []
    ok = True
    try:
        for check in checks:
            if check == "clean":
                rep = dg.find_clean_intervals(
                    Q, d["rho"], (-Q.grid.R, Q.grid.R), wells)
                out["clean"] = {
                    "rho": rep.rho,
                    "intervals": [{"lo": iv.lo, "hi": iv.hi, "well": iv.well,
                                   "sup_deviation": iv.sup_deviation}
                                  for iv in rep.intervals],
                    "clean_points": rep.clean_points,
                }
            elif check == "lewy-stampacchia":
                eta = d["eta"]
                phi = solve_barrier(spec, cfg.obstacles, Q.grid, eta, +1)
                psi = solve_barrier(spec, cfg.obstacles, Q.grid, eta, -1)
                pair = build_envelopes(phi, psi, cfg.obstacles, eta)
                slack = d["ls_slack"]
                if slack is None:
                    slack = 2 * cfg.solver.resolve_grad_tol(Q.grid.n) / Q.grid.h
                rep = dg.lewy_stampacchia_check(
                    Q, pair, spec, eta, (cfg.obstacles.b1, cfg.obstacles.b2),
                    mu=d["mu"], ref=ref, slack=slack)
                out["lewy_stampacchia"] = vars(rep)
                out["lewy_stampacchia"]["passed"] = rep.passed
                ok &= rep.passed
            elif check == "stickiness":
                if d["x1"] is None or d["x2"] is None:
                    raise dg.PreconditionError(
                        "stickiness requires diagnostics.x1 and diagnostics.x2")
                r = cfg.obstacles.resolve_r(spec)
                well = wells[1] if d["x1"] >= 0 else wells[0]
                rep = dg.stickiness_check(
                    Q, d["x1"], d["x2"], spec, d["eta"], d["mu"],
                    d["stickiness_tol"], rho=d["rho"], well=well, r=r, ref=ref)
                out["stickiness"] = vars(rep)
                out["stickiness"]["passed"] = rep.passed
                ok &= rep.passed
            elif check == "holder":
                alpha = d["alpha"] if d["alpha"] is not None else min(0.9, spec.s)
                val = dg.holder_estimate(Q, (-2.0, 2.0), alpha)
                out["holder"] = {"alpha": alpha, "value": val}
            elif check == "tail":
                for side in ("left", "right"):
                    fit = dg.fit_tail_decay(Q, side)
                    out[f"tail_{side}"] = vars(fit)
                    csvp = os.path.join(outdir, f"tail_{side}.csv")
                    x = Q.x
                    R = Q.grid.R
                    sel = (x >= R / 2) if side == "right" else (x <= -R / 2)
                    const = Q.right_const if side == "right" else Q.left_const
                    dev = np.abs(Q.values[sel] - const)
                    rows = ["x,log_abs_dev"]
                    for xx, dd in zip(x[sel], dev):
                        rows.append(f"{_FMT % xx},{_FMT % (math.log(dd) if dd > 0 else -math.inf)}")
                    _atomic_write(csvp, "\n".join(rows) + "\n")
                    outputs.append(csvp)
            else:
                print(f"unknown check {check!r}", file=sys.stderr)
                return EXIT_USAGE
    except dg.PreconditionError as e:
        print(f"precondition error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except dg.DegenerateFitError as e:
        print(f"degenerate fit: {e}", file=sys.stderr)
        return EXIT_CHECK
    path = os.path.join(outdir, "diagnose.json")
    _atomic_write(path, json.dumps(out, indent=2, sort_keys=True, default=float) + "\n")
    outputs.append(path)
    verdicts = {k: ("pass" if v.get("passed", True) else "fail")
                if isinstance(v, dict) else "measured"
                for k, v in out.items()}
    _write_manifest(outdir, cfg.digest, "diagnose", outputs, verdicts)
    return EXIT_OK if ok else EXIT_CHECK


def cmd_bench_appendix(cfg: RunConfig, outdir: str) -> int:
    b = cfg.bench
    os.makedirs(outdir, exist_ok=True)
    outputs = []
    verdicts = {}
    ok = True
    try:
        for s in b["s_values"]:
            fam = ab.BumpFamily(s=s, resolution=b["resolution"])
            ks = list(range(0, b["kmax"] + 1))
            with ThreadPoolExecutor(max_workers=_thread_cap()) as ex:
                norms = list(ex.map(lambda k: ab.bump_norms(fam, k), ks))
            rows = ["k,l2,hs,ratio_l2,ratio_hs"]
            ratios_l2, ratios_hs = [], []
            for i, k in enumerate(ks):
                l2, hs = norms[i]
                rl = norms[i][0] / norms[i - 1][0] if i else float("nan")
                rh = norms[i][1] / norms[i - 1][1] if i else float("nan")
                if i:
                    ratios_l2.append(rl)
                    ratios_hs.append(rh)
                rows.append(f"{k}," + ",".join(_FMT % v for v in (l2, hs, rl, rh)))
            path = os.path.join(outdir, f"bump_s{s:g}.csv")
            _atomic_write(path, "\n".join(rows) + "\n")
            outputs.append(path)
            el2 = ab.BUMP_L2_RATIO
            ehs = ab.bump_hs_ratio(s)
            worst_l2 = max(abs(r / el2 - 1) for r in ratios_l2)
            worst_hs = max(abs(r / ehs - 1) for r in ratios_hs)
            good = worst_l2 <= b["bump_tol"] and worst_hs <= b["bump_tol"]
            verdicts[f"bump_s{s:g}"] = "pass" if good else "fail"
            ok &= good
        tex = ab.TraceExample()
        rows = ["k,l2,hs,ratio_l2,ratio_hs"]
        prev = None
        tr_ok = True
        for k in range(1, b["trace_kmax"] + 1):
            l2, hh = ab.trace_norms(tex, k)
            rl = l2 / prev[0] if prev else float("nan")
            rh = hh / prev[1] if prev else float("nan")
            if prev:
                tr_ok &= abs(rl / ab.TRACE_L2_RATIO - 1) <= b["trace_tol"]
                tr_ok &= abs(rh / ab.TRACE_HHALF_RATIO - 1) <= b["trace_tol"]
            rows.append(f"{k}," + ",".join(_FMT % v for v in (l2, hh, rl, rh)))
            prev = (l2, hh)
        path = os.path.join(outdir, "trace.csv")
        _atomic_write(path, "\n".join(rows) + "\n")
        outputs.append(path)
        verdicts["trace"] = "pass" if tr_ok else "fail"
        ok &= tr_ok
    except ab.ResolutionError as e:
        print(f"resolution error: {e}", file=sys.stderr)
        return EXIT_CHECK
    except ValueError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    _write_manifest(outdir, cfg.digest, "bench-appendix", outputs, verdicts)
    return EXIT_OK if ok else EXIT_CHECK


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------


def main(argv=None) -> int:
    p = argparse.ArgumentParser(
        prog="nlhet",
        description="heteroclinic connections for strongly nonlocal equations")
    sub = p.add_subparsers(dest="command", required=True)
    pv = sub.add_parser("verify-model", help="check the structural hypotheses")
    pv.add_argument("config")
    pv.add_argument("--out", default=None)
    ps = sub.add_parser("solve", help="run the full continuation")
    ps.add_argument("config")
    ps.add_argument("--out", required=True)
    ps.add_argument("--resume", action="store_true")
    pd = sub.add_parser("diagnose", help="run diagnostics on a dumped profile")
    pd.add_argument("profile")
    pd.add_argument("config")
    pd.add_argument("--checks", default="clean,tail")
    pd.add_argument("--out", required=True)
    pb = sub.add_parser("bench-appendix", help="norm-scaling validation suite")
    pb.add_argument("config")
    pb.add_argument("--out", required=True)
    args = p.parse_args(argv)

    try:
        cfg = parse_config(args.config)
    except FileNotFoundError as e:
        print(f"cannot read config: {e}", file=sys.stderr)
        return EXIT_ENV
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_USAGE

    if args.command == "verify-model":
        return cmd_verify_model(cfg, args.out)
    if args.command == "solve":
        return cmd_solve(cfg, args.out, args.resume)
    if args.command == "diagnose":
        checks = [c.strip() for c in args.checks.split(",") if c.strip()]
        return cmd_diagnose(args.profile, cfg, checks, args.out)
    if args.command == "bench-appendix":
        return cmd_bench_appendix(cfg, args.out)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

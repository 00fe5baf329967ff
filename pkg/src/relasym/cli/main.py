"""Command-line entry point: ``relasym <subcommand> --config run.yaml``.

Exit status is 0 when every enabled check passes, 1 when a check fails and
2 on errors (a JSON error report goes to stderr and ``error.json``).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .. import __version__
from ..asymptotics import (
    SCALAR_QUANTITIES,
    constant_perturbation,
    index_records,
    mnt_baseline,
    points_for,
    szego_baseline,
)
from ..contours import ellipse_contour
from ..errors import RelAsymError, RootCountMismatch
from ..fixedpoint import constant_phi, solve_phi
from ..precision import arith_for_bits
from ..roots import roots_in_interval
from ..szego import boundary_modulus_check, eval_infinity_from_integral, szego_function, szego_quadrature
from ..tn_operator import verify_fixed_point
from ..weights import ARCSINE, LEBESGUE, Constant, Interval, MeasureSpec, WeightExpr
from . import figures
from .cache import BundleProvider, Cache, resolve_cache_dir
from .config import RunConfig, dump_config, format_weight, load_config
from .output import RECORD_COLUMNS, write_csv, write_jsonl, write_records

log = logging.getLogger("relasym")

SUBCOMMANDS = ("szego", "mop", "fixed-point", "tn-verify", "asymptotics", "baseline")
SZEGO_TOL = 1e-10
BOUNDARY_TOL = 1e-6
TN_TOL = 1e-8
CONSTANT_TOL = 1e-8
TREND_FACTOR = 0.5
TREND_QUANTITIES = ("Qratio1", "Qratio2", "hLimit2", "hLimit3")
MNT_ABS_TOL = 0.02


class Context:
    def __init__(self, cfg: RunConfig, out: Path, use_cache: bool):
        self.cfg = cfg
        self.out = out
        root = resolve_cache_dir(cfg.cache_dir) if use_cache else None
        self.cache = Cache(root) if root is not None else None
        self.provider = BundleProvider(cfg.precision, self.cache)
        self.checks = []

    def check(self, name: str, passed: bool, value=None, threshold=None, **extra):
        item = {"check": name, "passed": bool(passed), "value": value, "threshold": threshold, **extra}
        self.checks.append(item)
        log.info("check %-40s %s", name, "PASS" if passed else "FAIL")
        return passed

    @property
    def figures(self) -> bool:
        return self.cfg.outputs.figures


def _rho(w):
    return w if w is not None else WeightExpr((Constant(1.0),))


# ---------------------------------------------------------------------------
# subcommands


def cmd_szego(ctx: Context):
    sys_ = ctx.cfg.system
    targets = (
        ("G_rho1", sys_.delta1, _rho(sys_.rho1)),
        ("G_rho2", sys_.delta2, _rho(sys_.rho2)),
        ("G_sigma1", sys_.delta1, sys_.sigma1.weight),
        ("G_sigma2", sys_.delta2, sys_.sigma2.weight),
    )
    rows, report, panels = [], [], []
    arith = arith_for_bits(53)
    for tag, iv, w in targets:
        S = szego_function(iv, w)
        z = ellipse_contour(iv, ctx.cfg.asymptotics.contour_points, offset=0.5)
        g = S(z)
        ref = szego_quadrature(iv, w, z)
        rel = np.abs(g - ref) / np.abs(ref)
        for zi, gi, ri in zip(z, g, ref):
            rows.append((0, 0, tag, zi.real, zi.imag, gi.real, gi.imag, ri.real, ri.imag, abs(gi - ri)))
        ginf, ref_inf = S.at_infinity(), eval_infinity_from_integral(w, iv)
        rows.append((0, 0, tag, np.inf, 0.0, ginf, 0.0, ref_inf, 0.0, abs(ginf - ref_inf)))
        ctx.check(f"{tag} closed form vs quadrature", rel.max() <= SZEGO_TOL, float(rel.max()), SZEGO_TOL)
        ctx.check(f"{tag} G(inf) vs log integral", abs(ginf - ref_inf) <= SZEGO_TOL * ref_inf,
                  abs(ginf - ref_inf) / ref_inf, SZEGO_TOL)
        bx = iv.chebyshev_points(10)
        lhs, rhs = [], []
        for x in bx:
            rho_x = float(w.evaluate(np.array([x]), iv, arith)[0])
            a, b = boundary_modulus_check(S, float(x), rho_x)
            lhs.append(a)
            rhs.append(b)
        bdev = float(np.max(np.abs(np.array(lhs) - rhs) / np.abs(rhs)))
        ctx.check(f"{tag} boundary modulus", bdev <= BOUNDARY_TOL, bdev, BOUNDARY_TOL)
        report.append({"quantity": tag, "interval": [iv.a, iv.b], "weight": format_weight(w),
                       "G_inf": ginf, "G_inf_integral": ref_inf, "max_rel_error": float(rel.max()),
                       "boundary_max_rel_dev": bdev})
        panels.append((tag, z, g, bx, lhs, rhs))
    write_csv(ctx.out / "szego.csv", RECORD_COLUMNS, rows)
    write_jsonl(ctx.out / "szego_report.jsonl", report)
    if ctx.figures:
        figures.szego_figure(ctx.out / "szego.png", panels)


def _zeros(P, iv, count, cfg):
    if count == 0:
        return []
    return [float(r) for r in roots_in_interval(P, iv, count, cfg)]


def cmd_mop(ctx: Context):
    sys_ = ctx.cfg.system
    coeff_rows, summaries, zeros_plot = [], [], []
    variants = (False, True) if sys_.has_perturbation else (False,)
    for n in ctx.cfg.indices():
        for pert in variants:
            b = ctx.provider(sys_, n, pert)
            for name, P in (("Q1", b.Q1), ("Q2", b.Q2)):
                iv = P.ref_interval
                for j, c in enumerate(P.float_coeffs()):
                    coeff_rows.append((n.n1, n.n2, pert, name, iv.a, iv.b, j, float(c)))
            try:
                z1 = _zeros(b.Q1, sys_.delta1, n.N1, b.cfg)
                z2 = _zeros(b.Q2, sys_.delta2, n.N2, b.cfg)
                zeros_ok = True
            except RootCountMismatch as err:
                z1, z2, zeros_ok = [], [], False
                log.warning("zero count at %s: %s", n, err)
            res_ok = max(b.residuals) <= b.cfg.residual_tol
            ctx.check(f"mop {n} {'perturbed' if pert else 'plain'} residual", res_ok,
                      max(b.residuals), b.cfg.residual_tol, mantissa_bits=b.cfg.mantissa_bits)
            ctx.check(f"mop {n} {'perturbed' if pert else 'plain'} zeros", zeros_ok, len(z1) + len(z2), n.N1 + n.N2)
            summaries.append({**b.summary(), "zeros_Q1": z1, "zeros_Q2": z2})
            if not pert:
                zeros_plot.append((n.size, z1, z2))
    write_csv(ctx.out / "mop_coefficients.csv",
              ("n1", "n2", "perturbed", "polynomial", "interval_a", "interval_b", "chebyshev_index", "coefficient"),
              coeff_rows)
    write_jsonl(ctx.out / "mop_bundles.jsonl", summaries)
    if ctx.figures:
        figures.zeros_figure(ctx.out / "mop_zeros.png", zeros_plot, sys_.delta1, sys_.delta2)


def _solve(ctx: Context, tol=None):
    sys_ = ctx.cfg.system
    fp = ctx.cfg.fixed_point
    return solve_phi(sys_.rho1, sys_.rho2, sys_.delta1, sys_.delta2, tol or fp.tol, fp.M, max_iter=fp.max_iter)


def cmd_fixed_point(ctx: Context):
    sys_ = ctx.cfg.system
    phi = _solve(ctx)
    tol = ctx.cfg.fixed_point.tol
    const = constant_perturbation(sys_)
    closed = constant_phi(*const) if const else None
    rows = []
    for k in (1, 2):
        vals = phi.phi.f1 if k == 1 else phi.phi.f2
        for x, v in zip(phi.phi.grid(k), vals):
            rows.append((k, x, v, closed[k - 1] if closed else ""))
    write_csv(ctx.out / "phi_grid.csv", ("component", "x", "value", "closed_form"), rows)
    summary = {"Phi1_inf": phi.at_infinity(1), "Phi2_inf": phi.at_infinity(2), "iterations": phi.iterations,
               "certified_d_error": phi.certified_d_error, "residual": phi.residual, "tol": tol, "M": phi.phi.M}
    ctx.check("fixed point residual d(T(Phi), Phi)", phi.residual <= 2 * tol, phi.residual, 2 * tol)
    if closed:
        dev = max(np.max(np.abs(phi.phi.f1 - closed[0])), np.max(np.abs(phi.phi.f2 - closed[1])),
                  abs(phi.at_infinity(1) - closed[0]), abs(phi.at_infinity(2) - closed[1]))
        summary["closed_form"] = list(closed)
        ctx.check("constant weights closed form", dev <= 1e-10, float(dev), 1e-10)
    write_jsonl(ctx.out / "phi.jsonl", [summary])
    write_jsonl(ctx.out / "phi_iterations.jsonl", phi.log_lines())
    if ctx.figures:
        figures.phi_figure(ctx.out / "phi.png", phi, sys_.delta1, sys_.delta2)


def cmd_tn_verify(ctx: Context):
    sys_ = ctx.cfg.system
    reports = []
    for n in ctx.cfg.indices():
        bundles = (ctx.provider(sys_, n, True), ctx.provider(sys_, n, False))
        cfg = None if ctx.cfg.precision.escalate else ctx.cfg.precision.config_for(n.N1)
        r = verify_fixed_point(sys_, n, cfg=cfg, tol=TN_TOL, bundles=bundles)
        d = {**r.as_dict(), "tol": TN_TOL}
        reports.append(d)
        ctx.check(f"tn-verify {n}", r.passed, max(r.tn_residual, r.ttilde_residual), TN_TOL)
    write_jsonl(ctx.out / "tn_verify.jsonl", reports)
    if ctx.figures and reports:
        figures.residual_figure(ctx.out / "tn_verify.png", reports)


def cmd_asymptotics(ctx: Context):
    cfg = ctx.cfg
    sys_ = cfg.system
    qs = cfg.asymptotics.quantities
    const = constant_perturbation(sys_)
    phi = None if const else _solve(ctx, min(cfg.fixed_point.tol, 1e-12))
    points = {q: points_for(sys_, q, cfg.asymptotics.contour_points) for q in qs}
    records = []
    for n in cfg.indices():
        t0 = time.perf_counter()
        records.extend(index_records(sys_, n, qs, phi=phi, exact_constants=const, points=points,
                                     provider=ctx.provider))
        log.info("asymptotics %s done in %.2fs", n, time.perf_counter() - t0)
    write_records(ctx.out / "asymptotics.csv", records)
    summary = [(r.index.n1, r.index.n2, r.index.size, r.quantity, r.sup_error) for r in records]
    write_csv(ctx.out / "asymptotics_summary.csv", ("n1", "n2", "size", "quantity", "sup_error"), summary)
    if const:
        worst = max((r.sup_error for r in records), default=0.0)
        ctx.check("constant perturbation closed forms", worst <= CONSTANT_TOL, worst, CONSTANT_TOL,
                  kind="exact")
    else:
        for q in TREND_QUANTITIES:
            seq = [r.sup_error for r in records if r.quantity == q]
            if len(seq) >= 2:
                ctx.check(f"trend {q}", seq[-1] <= TREND_FACTOR * seq[0], seq[-1] / seq[0], TREND_FACTOR,
                          kind="engineering")
        if records:
            last = max(r.index.size for r in records)
            scal = [r.sup_error / abs(r.predicted[0]) for r in records
                    if r.index.size == last and r.quantity in SCALAR_QUANTITIES]
            if scal:
                ctx.check("scalar limits within 5% at largest index", max(scal) <= 0.05, max(scal), 0.05,
                          kind="engineering")
    if ctx.figures and records:
        title = "constant control" if const else f"ray {cfg.ray.label}"
        figures.convergence_figure(ctx.out / "asymptotics.png", records, title)


def cmd_baseline(ctx: Context):
    b = ctx.cfg.baseline
    iv = Interval(-1.0, 1.0)
    z = np.concatenate([[complex(b.point)], ellipse_contour(iv, ctx.cfg.asymptotics.contour_points, 0.5)])
    arcsine = MeasureSpec(iv, ARCSINE)
    lebesgue = MeasureSpec(iv, LEBESGUE)
    n_lo, n_hi = b.n_lo, b.n_hi
    recs = szego_baseline(arcsine, range(0, n_hi + 1), z, tag="ArcsineRatio")
    worst = max(r.sup_error for r in recs)
    ctx.check("arcsine p_n = t_n", worst <= 1e-12, worst, 1e-12)
    c = b.constant
    const_recs = mnt_baseline(lebesgue, WeightExpr((Constant(c),)), range(n_lo, n_hi + 1), z, tag="MNTConstRatio")
    worst = max(float(np.max(np.abs(r.observed - c ** -0.5))) for r in const_recs)
    ctx.check("MNT g=c ratio c^-1/2", worst <= 1e-10, worst, 1e-10)
    leb = szego_baseline(lebesgue, range(n_lo, n_hi + 1), z)
    e = [float(r.errors[0]) for r in leb]
    ctx.check(f"Lebesgue Szego error at z={b.point!r} decreasing", bool(np.all(np.diff(e) < 0)), e[-1], e[0])
    mnt = mnt_baseline(arcsine, b.mnt_weight, range(n_lo, n_hi + 1), z)
    last = float(mnt[-1].errors[0])
    ctx.check(f"MNT {format_weight(b.mnt_weight)} vs arcsine at n={n_hi}", last < MNT_ABS_TOL, last, MNT_ABS_TOL,
              kind="engineering")
    records = recs + const_recs + leb + mnt
    write_records(ctx.out / "baseline.csv", records)
    if ctx.figures:
        figures.convergence_figure(ctx.out / "baseline.png", leb + mnt, "classical baselines")


COMMANDS = {
    "szego": cmd_szego,
    "mop": cmd_mop,
    "fixed-point": cmd_fixed_point,
    "tn-verify": cmd_tn_verify,
    "asymptotics": cmd_asymptotics,
    "baseline": cmd_baseline,
}


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="relasym", description="Relative asymptotics of Nikishin multiple orthogonal polynomials.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, help="YAML run configuration")
        s.add_argument("--out", help="output directory (overrides outputs.dir)")
        s.add_argument("--precision-bits", type=int, help="fixed mantissa bits (53 or >= 113); disables the ladder")
        s.add_argument("--max-index", type=int, help="largest |n| along the ray")
        s.add_argument("--no-cache", action="store_true", help="do not read or write the bundle cache")
        s.add_argument("--no-figures", action="store_true", help="skip PNG figures")
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def _setup_logging(out: Path, command: str, verbose: bool):
    log.setLevel(logging.INFO)
    for h in list(log.handlers):
        log.removeHandler(h)
        h.close()
    fmt = logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s")
    fh = logging.FileHandler(out / f"{command}.log", mode="w", encoding="utf-8")
    fh.setFormatter(fmt)
    log.addHandler(fh)
    sh = logging.StreamHandler(sys.stderr)
    sh.setLevel(logging.INFO if verbose else logging.WARNING)
    sh.setFormatter(fmt)
    log.addHandler(sh)


def _error(out: Path | None, command: str, err: Exception) -> int:
    report = {"command": command, "error": type(err).__name__, "message": str(err)}
    text = json.dumps(report, sort_keys=True)
    print(text, file=sys.stderr)
    if out is not None:
        try:
            (out / "error.json").write_text(text + "\n", encoding="utf-8")
        except OSError:
            pass
    return 2


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = None
    try:
        cfg = load_config(args.config).with_overrides(
            out=args.out, precision_bits=args.precision_bits, max_index=args.max_index,
            figures=False if args.no_figures else None,
        )
        out = Path(cfg.outputs.dir)
        out.mkdir(parents=True, exist_ok=True)
        _setup_logging(out, args.command, args.verbose)
        (out / "config.yaml").write_text(dump_config(cfg), encoding="utf-8")
        ctx = Context(cfg, out, use_cache=not args.no_cache)
        t0 = time.perf_counter()
        COMMANDS[args.command](ctx)
        log.info("%s finished in %.2fs (cache hits %d, misses %d)", args.command, time.perf_counter() - t0,
                 ctx.provider.hits, ctx.provider.misses)
        write_jsonl(out / f"{args.command.replace('-', '_')}_checks.jsonl", ctx.checks)
        failed = [c["check"] for c in ctx.checks if not c["passed"]]
        for c in ctx.checks:
            print(f"{'PASS' if c['passed'] else 'FAIL'}  {c['check']}")
        return 1 if failed else 0
    except (RelAsymError, OSError, ValueError) as err:
        return _error(out, args.command, err)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line driver: ``spinodal <command> ...``.

Exit codes: 0 success or pass, 1 verification failure, 2 usage or
configuration error.  Every output file carries the artifact version and
the SHA-256 of the configuration that produced it.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from spinodal import __version__
from spinodal.clifford import build_clifford_rep
from spinodal.config import RunConfig, config_hash, load_config
from spinodal.errors import ConfigError, EstimatorError, InvalidDimensionError, SpinodalError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _plain(obj):
    """JSON-ready copy: numpy scalars/arrays to Python, complex to [re, im]."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


class Emitter:
    """Writes stamped outputs into one directory."""

    def __init__(self, out_dir: Path, sha: str):
        self.dir = Path(out_dir)
        self.sha = sha
        self.dir.mkdir(parents=True, exist_ok=True)

    @property
    def stamp(self) -> str:
        return f"spinodal {__version__} config-sha256={self.sha}"

    def json(self, name: str, payload: dict) -> Path:
        doc = {"meta": {"version": __version__, "config_sha256": self.sha}, **_plain(payload)}
        path = self.dir / name
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        return path

    def csv(self, name: str, header: list, rows) -> Path:
        buf = io.StringIO()
        buf.write(f"# {self.stamp}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for v in row])
        path = self.dir / name
        path.write_text(buf.getvalue())
        return path


def _emitter(args, cfg: RunConfig | None, fallback: dict) -> Emitter:
    sha = cfg.sha256 if cfg is not None else config_hash(fallback)
    if args.out is not None:
        out = Path(args.out)
    elif cfg is not None:
        out = cfg.output_dir
    else:
        out = Path("spinodal-out")
    return Emitter(out, sha)


# ---------------------------------------------------------------------------
# commands


def cmd_rep_check(args) -> int:
    rep = build_clifford_rep(args.n)
    res = rep.residuals()
    worst = max(res.values())
    print(f"rep-check: n={args.n} N={rep.fiber_dim} max Clifford residual {worst:.3e}")
    if args.out is not None:
        em = _emitter(args, None, {"command": "rep-check", "n": args.n})
        em.json("rep-check.json", {"n": args.n, "fiber_dim": rep.fiber_dim, "residuals": res, "max_residual": worst})
    return EXIT_OK if worst <= 1e-12 else EXIT_FAIL


def cmd_freq(args) -> int:
    from spinodal.frequency import adjusted_frequency, frequency_profile, monotonicity_audit

    cfg = load_config(args.config)
    f = cfg.build_field()
    prof = frequency_profile(f, cfg.metric, cfg.center, cfg.radii)
    a = cfg.audit
    audit = monotonicity_audit(prof, beta=a["beta"], C_N=a["C_N"], cap=a["cap"])
    adj = adjusted_frequency(prof, audit.C_AM_fit if audit.C_AM_fit is not None else 0.0, a["beta"], a["C_N"])
    em = _emitter(args, cfg, {})
    n = cfg.n
    header = ["r", "H", "D", "N", "adjustedN", "metric"] + [f"center{i + 1}" for i in range(n)]
    metric = f"{cfg.metric.kind}:{cfg.metric.curvature!r}"
    rows = [[r, h, d, nv, ad, metric] + [float(c) for c in cfg.center] for (r, h, d, nv), ad in zip(prof.rows(), adj)]
    em.csv("profile.csv", header, rows)
    est = prof.order_estimate
    em.json(
        "audit.json",
        {
            **audit.to_dict(),
            "order": None if est is None else {"value": est.value, "uncertainty": est.uncertainty, "snapped": est.snapped},
            "rejected_radii": prof.rejected,
            "field": f.kind,
        },
    )
    if args.plots:
        from spinodal.plotting import plot_profile

        plot_profile(prof, em.dir / "profile.svg", adjusted=adj, title=f"{f.kind} field", stamp=em.stamp)
    order = "n/a" if est is None else (str(est.snapped) if est.snapped is not None else f"{est.value:.4f}")
    print(
        f"freq: {len(prof.radii)} radii, N(r_min)={prof.N[0]:.6f}, vanishing order {order}, "
        f"C_AM_fit={audit.C_AM_fit} -> {em.dir}"
    )
    return EXIT_OK if audit.passed else EXIT_FAIL


def cmd_decompose(args) -> int:
    from spinodal.green import GreenKernel, decompose

    cfg = load_config(args.config)
    spec = cfg.raw.get("decompose")
    if spec is None:
        raise ConfigError("decompose needs a 'decompose' section with 'sigma'")
    f = cfg.build_field()
    dec = decompose(GreenKernel(f.rep), f, cfg.center, spec["sigma"], radius=spec.get("radius"))
    em = _emitter(args, cfg, {})
    em.json("decomposition.json", {"center": cfg.center, "radius": dec.radius, **dec.report()})
    print(f"decompose: degrees {dec.degrees}, Q exponent {dec.q_exponent:.3f}, grad Q exponent {dec.grad_q_exponent:.3f} -> {em.dir}")
    return EXIT_OK


def cmd_nodal(args) -> int:
    from spinodal.nodal import box_dimension, classify_point, cusp_cone_audit, default_scales, extract_nodal

    cfg = load_config(args.config)
    f = cfg.build_field()
    opts = cfg.nodal
    ns = extract_nodal(f, c0=opts["c0"], levels=opts["levels"])
    n = f.n
    count = min(opts["classify"], len(ns))
    idx = sorted({int(round(i)) for i in np.linspace(0, len(ns) - 1, count)}) if count else []
    labels = {i: classify_point(f, ns.points[i]) for i in idx}
    rows = []
    for i, p in enumerate(ns.points):
        lab = labels.get(i)
        rows.append(
            list(map(float, p))
            + [float(ns.abs_psi[i]), float(ns.abs_grad[i])]
            + ([lab.k, lab.stratum, lab.blowup_dim] if lab else [None, None, None])
        )
    em = _emitter(args, cfg, {})
    em.csv("nodal.csv", [f"x{i + 1}" for i in range(n)] + ["|psi|", "|grad psi|", "order", "stratum", "l"], rows)
    bound = n - 2 + 0.15
    try:
        box = box_dimension(ns.points, default_scales(ns.points, opts["box_scales"]))
        dim, dim_note = box.dimension, "box-counting"
    except EstimatorError:
        box, dim, dim_note = None, 0.0, f"finite set of {len(ns)} points"
    strata: dict = {}
    for lab in labels.values():
        strata[lab.stratum] = strata.get(lab.stratum, 0) + 1
    cusp = cusp_cone_audit(ns.points, cfg.center, max(n - 2, 0)) if len(ns) else None
    em.json(
        "nodal.json",
        {
            "samples": len(ns),
            "classified": len(labels),
            "dimension": dim,
            "dimension_method": dim_note,
            "bound": bound,
            "within_bound": dim <= bound,
            "box_counting": None if box is None else {"scales": box.scales, "counts": box.counts},
            "strata": strata,
            "cusp_audit": None if cusp is None else cusp.to_dict(),
            "extraction": ns.meta,
        },
    )
    if args.plots:
        from spinodal.plotting import plot_box_counting, plot_nodal

        plot_nodal(ns.points, em.dir / "nodal.svg", title=f"nodal set ({len(ns)} samples)", stamp=em.stamp)
        if box is not None:
            plot_box_counting(box, em.dir / "boxcount.svg", stamp=em.stamp)
    print(f"nodal: {len(ns)} samples, dimension {dim:.3f} (bound {bound:.2f}), strata {strata} -> {em.dir}")
    return EXIT_OK if dim <= bound else EXIT_FAIL


def cmd_covering(args) -> int:
    from spinodal.nodal import covering_iteration

    params = {"command": "covering", "n": args.n, "eps": args.eps, "gamma": args.gamma, "steps": args.steps}
    steps = covering_iteration(args.n, args.eps, args.gamma, args.steps)
    em = _emitter(args, None, params)
    em.csv("covering.csv", ["k", "m", "log2_N", "log2_premeasure"], [[s.k, s.m, s.log2_N, s.log2_premeasure] for s in steps])
    if args.plots:
        from spinodal.plotting import plot_covering

        plot_covering({f"gamma={args.gamma}": steps}, em.dir / "covering.svg", stamp=em.stamp)
    hit = next((s.k for s in steps if s.log2_premeasure < math.log2(1e-6)), None)
    where = f"below 1e-6 at step {hit}" if hit is not None else "never below 1e-6"
    print(f"covering: n={args.n} eps={args.eps} gamma={args.gamma}: log2 premeasure {steps[-1].log2_premeasure:.3f} at step {steps[-1].k}, {where} -> {em.dir}")
    return EXIT_OK


def _criteria_list(text: str) -> list[int]:
    try:
        vals = sorted({int(v) for v in text.split(",") if v.strip()})
    except ValueError:
        raise ConfigError(f"bad criteria list {text!r}") from None
    from spinodal.verification import CRITERIA

    bad = [v for v in vals if v not in CRITERIA]
    if bad or not vals:
        raise ConfigError(f"unknown criteria {bad}; choose from {sorted(CRITERIA)}")
    return vals


def cmd_verify(args) -> int:
    from spinodal.verification import CRITERIA, run_suite

    if args.all == bool(args.criteria):
        raise ConfigError("verify needs exactly one of --all or --criteria")
    chosen = sorted(CRITERIA) if args.all else _criteria_list(args.criteria)
    params = {"command": "verify", "criteria": chosen, "n": args.n, "seed": args.seed}
    results = run_suite(seed=args.seed, n=args.n, criteria=chosen, echo=print)
    em = _emitter(args, None, params)
    em.json(
        "verify.json",
        {
            "seed": args.seed,
            "n": args.n,
            "results": [
                {"criterion": r.number, "name": r.name, "passed": r.passed, "summary": r.summary, "details": r.details} for r in results
            ],
        },
    )
    em.csv("verify.csv", ["criterion", "name", "passed", "summary"], [[r.number, r.name, r.passed, r.summary] for r in results])
    if args.plots:
        from spinodal.plotting import plot_verify

        plot_verify(results, em.dir / "verify.svg", stamp=em.stamp)
    passed = sum(r.passed for r in results)
    print(f"verify: {passed}/{len(results)} criteria passed -> {em.dir}")
    return EXIT_OK if passed == len(results) else EXIT_FAIL


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spinodal", description="Spinor frequency, decomposition and nodal-set toolkit.")
    p.add_argument("--version", action="version", version=f"spinodal {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    def common(sp, config: bool):
        if config:
            sp.add_argument("--config", required=True, help="spinodal-config v1 JSON file")
        sp.add_argument("--out", default=None, help="output directory (overrides the config's output_dir)")
        sp.add_argument("--plots", action="store_true", help="also write SVG figures")

    sp = sub.add_parser("rep-check", help="Clifford relation residuals")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_rep_check)

    sp = sub.add_parser("freq", help="frequency profile and monotonicity audit")
    common(sp, True)
    sp.set_defaults(func=cmd_freq)

    sp = sub.add_parser("decompose", help="P + Q decomposition about a zero")
    common(sp, True)
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("nodal", help="nodal-set extraction, labels and dimension")
    common(sp, True)
    sp.set_defaults(func=cmd_nodal)

    sp = sub.add_parser("covering", help="covering-number recursion")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--eps", type=float, default=0.5)
    sp.add_argument("--gamma", type=float, default=0.1)
    sp.add_argument("--steps", type=int, default=40)
    common(sp, False)
    sp.set_defaults(func=cmd_covering)

    sp = sub.add_parser("verify", help="acceptance suite")
    sp.add_argument("--all", action="store_true", help="run every criterion")
    sp.add_argument("--criteria", default=None, help="comma-separated criterion numbers")
    sp.add_argument("--n", type=int, default=3, help="dimension for criteria that leave it open")
    sp.add_argument("--seed", type=int, default=7)
    common(sp, False)
    sp.set_defaults(func=cmd_verify)
    return p


def run_command(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except (ConfigError, InvalidDimensionError) as exc:
        print(f"spinodal: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SpinodalError as exc:
        print(f"spinodal: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()

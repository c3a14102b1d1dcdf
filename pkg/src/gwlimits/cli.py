"""Command-line runner: `gwlimits sample-tree | verify <name> | converge <name> | mechanism-info`.

Settings come from an optional JSON config (--config) and are overridden by
flags. Outputs land in --out (default ./results). Exit codes: 0 pass,
1 fail, 2 usage or configuration error, 3 inconclusive.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import contour as ct
from . import experiments as ex
from . import gwtree, limits, mechanism as mech_mod
from .mechanism import BranchingMechanism
from .offspring import OffspringDistribution
from .streams import substream
from .svg import polyline_plot

EXIT = {"pass": 0, "fail": 1, "inconclusive": 3}
USAGE = 2

VERIFY = ("girsanov-exact", "girsanov-mc", "martingale", "gircon-mean", "two-law")
CONVERGE = ("extinction", "laplace", "A1", "A3", "main1", "survival-mass")
STOCHASTIC = {"girsanov-mc", "gircon-mean", "two-law", "extinction", "laplace", "sample-tree"}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    experiment: str
    seed: Optional[int] = None
    reps: Optional[int] = None
    out: str = "results"
    jobs: int = 1
    n_list: list = field(default_factory=lambda: list(limits.DEFAULT_N_LIST))
    horizon: float = ex.DEFAULT_HORIZON
    offspring: list = field(default_factory=lambda: [0.25, 0.0, 0.75])
    family: dict = field(default_factory=lambda: {"family": "near_critical_binary", "drift": 1.0})
    mechanism: dict = field(default_factory=lambda: {"alpha": -1.0, "beta": 0.5, "atoms": []})
    a: float = 2.0
    x: float = 1.0
    n: int = 500
    lam: list = field(default_factory=lambda: [0.5, 1.0, 2.0, 4.0])
    delta: list = field(default_factory=lambda: list(limits.DEFAULT_DELTAS))
    cap: int = 4096
    n_max: int = 20
    tol: Optional[float] = None
    forest: int = 1
    functional: str = "sup"

    def validate(self):
        if self.experiment in STOCHASTIC and self.seed is None:
            raise UsageError("--seed is required for randomized experiments")
        for name in ("n_list", "lam", "delta"):
            if len(getattr(self, name)) == 0:
                raise UsageError(f"{name} must be nonempty")
        if self.reps is not None and self.reps < 1:
            raise UsageError("--reps must be positive")
        if self.jobs < 1:
            raise UsageError("--jobs must be positive")
        out = Path(self.out)
        out.mkdir(parents=True, exist_ok=True)
        if not os.access(out, os.W_OK):
            raise UsageError(f"output directory {out} is not writable")

    def offspring_law(self) -> OffspringDistribution:
        return OffspringDistribution(self.offspring)

    def mech(self) -> BranchingMechanism:
        return BranchingMechanism.from_json(self.mechanism)

    def fam(self) -> limits.ScalingFamily:
        return limits.family_from_config(self.family)


_CONFIG_KEYS = {f for f in RunConfig.__dataclass_fields__} - {"experiment"}
_ALIASES = {"lambda": "lam", "n-list": "n_list", "n_max": "n_max"}


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list:
    return [int(v) for v in _floats(text)]


def build_config(args: argparse.Namespace, experiment: str) -> RunConfig:
    cfg = RunConfig(experiment)
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as err:
            raise UsageError(f"cannot read config {args.config}: {err}") from None
        if not isinstance(raw, dict):
            raise UsageError("config must be a JSON object")
        for key, value in raw.items():
            key = _ALIASES.get(key, key)
            if key not in _CONFIG_KEYS:
                raise UsageError(f"unknown config key {key!r}")
            setattr(cfg, key, value)
    for key in _CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    if args.jobs is None and not (args.config and "jobs" in raw):
        cfg.jobs = os.cpu_count() or 1
    cfg.validate()
    return cfg


# ---------------------------------------------------------------- output helpers


def _write(out: str, name: str, text: str) -> Path:
    path = Path(out) / name
    path.write_text(text)
    return path


def _table(header: list, rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _emit_report(cfg: RunConfig, rep: ex.ExperimentReport, stem: str, csv_text: Optional[str] = None):
    _write(cfg.out, f"{stem}.json", rep.to_json())
    _write(cfg.out, f"{stem}.csv", rep.to_csv() if csv_text is None else csv_text)
    print(f"{rep.experiment}: {rep.verdict}")
    for note in rep.notes:
        print(f"  note: {note}")
    return EXIT[rep.verdict]


# ---------------------------------------------------------------- sample-tree


def cmd_sample_tree(cfg: RunConfig) -> int:
    p = cfg.offspring_law()
    a = int(cfg.a)
    rng = substream(cfg.seed, "sample-tree")
    forest = gwtree.sample_forest(p, cfg.forest, a, rng)
    if cfg.forest == 1:
        path = ct.contour_of(forest.trees[0])
        _write(cfg.out, "tree.json", forest.trees[0].to_json() + "\n")
    else:
        path = ct.forest_contour(forest)
        _write(cfg.out, "tree.json", gwtree.forest_to_json(forest) + "\n")
    _write(cfg.out, "contour.csv", path.to_csv())
    _write(cfg.out, "contour.svg", ct.to_svg([path], [f"a={a}, trees={cfg.forest}"]))
    print(f"sampled {gwtree.node_count(forest)} nodes; generation sizes {list(gwtree.generation_sizes(forest))}")
    return 0


# ---------------------------------------------------------------- verify


def cmd_verify(cfg: RunConfig) -> int:
    name = cfg.experiment
    if name == "girsanov-exact":
        rep = ex.verify_girsanov_exact(cfg.offspring_law(), int(cfg.a))
    elif name == "martingale":
        rep = ex.verify_martingale(cfg.offspring_law(), cfg.n_max, cfg.cap, cfg.tol or 1e-9)
    elif name == "gircon-mean":
        rep = ex.verify_gircon_mean(cfg.mech(), cfg.x, cfg.a, cfg.reps or 10**6, cfg.seed, cfg.jobs)
    elif name == "two-law":
        rep = ex.contour_two_law_test(cfg.offspring_law(), cfg.a, cfg.reps or 10**5, seed=cfg.seed,
                                      count=cfg.forest, jobs=cfg.jobs)
    else:
        catalog = {F.kind: F for F in ex.default_catalog(cfg.a)}
        catalog["one"] = ex.Functional("one", "one")
        if cfg.functional not in catalog:
            raise UsageError(f"functional must be one of {sorted(catalog)}")
        rep = ex.verify_girsanov_mc(cfg.offspring_law(), int(cfg.a), catalog[cfg.functional],
                                    cfg.reps or 10**4, cfg.seed, cfg.jobs)
    return _emit_report(cfg, rep, name)


# ---------------------------------------------------------------- converge


def _trend_report(name: str, cfg: RunConfig, params: dict) -> ex.ExperimentReport:
    return ex.ExperimentReport(f"converge-{name}", dict(params, family=cfg.family), cfg.seed, 0)


def _log_axis(n_list):
    return np.log10(np.asarray(n_list, dtype=float))


def converge_A1(cfg: RunConfig):
    fam = cfg.fam()
    tol = 0.1 if cfg.tol is None else cfg.tol
    res = limits.check_A1(fam, n_list=cfg.n_list)
    rep = _trend_report("A1", cfg, {"n_list": cfg.n_list, "lam_max": limits.LAMBDA_MAX, "tol": tol})
    for n, d in zip(res.n_list, res.values):
        rep.add(f"sup_deviation_n={n}", d, d, "exact", 0.0)
    rep.add("decreasing", float(res.decreasing), 0.0, "exact", 1.0, res.decreasing)
    last_ok = res.values[-1] <= tol
    rep.add("deviation_at_largest_n", res.values[-1], res.values[-1], "exact", tol, last_ok)
    rep.verdict = "pass" if res.decreasing and last_ok else "fail"
    table = _table(["n", "sup_deviation"], list(zip(res.n_list, res.values)))
    grid = np.linspace(0.0, limits.LAMBDA_MAX, 101)
    series = [(grid, limits.G_n(fam, n, grid)) for n in res.n_list] + [(grid, fam.target.psi(grid))]
    svg = polyline_plot(series, [f"G_n, n={n}" for n in res.n_list] + ["psi"], xlabel="lambda", ylabel="value")
    return rep, table, svg


def converge_A3(cfg: RunConfig):
    fam = cfg.fam()
    rep = _trend_report("A3", cfg, {"n_list": cfg.n_list, "lambda": cfg.lam})
    rows, ok, series = [], True, []
    for lam in cfg.lam:
        errs = []
        for n in cfg.n_list:
            value, target = limits.check_A3_laplace(fam, None, n, lam)
            errs.append(abs(value - target))
            rows.append([n, float(lam), value, target, errs[-1]])
            rep.add(f"log_L(n={n},lambda={lam:g})", value, errs[-1], "exact", target)
        dec = all(b < a for a, b in zip(errs, errs[1:]))
        rep.add(f"decreasing(lambda={lam:g})", float(dec), 0.0, "exact", 1.0, dec)
        ok &= dec
        series.append((_log_axis(cfg.n_list), np.log10(np.maximum(errs, 1e-300))))
    rep.verdict = "pass" if ok else "fail"
    table = _table(["n", "lambda", "value", "target", "abs_error"], rows)
    svg = polyline_plot(series, [f"lambda={lam:g}" for lam in cfg.lam], xlabel="log10 n", ylabel="log10 error")
    return rep, table, svg


def converge_main1(cfg: RunConfig):
    fam = cfg.fam()
    rep = _trend_report("main1", cfg, {"n_list": cfg.n_list, "delta": cfg.delta, "x": cfg.x})
    rows, ok, series = [], True, []
    for delta in cfg.delta:
        res = limits.check_main1(fam, delta, cfg.n_list, cfg.x)
        errs = [abs(v - res.limit) for v in res.values]
        for n, k, v, e in zip(res.n_list, res.steps, res.values, errs):
            rows.append([float(delta), n, k, v, res.limit, e])
            rep.add(f"g_k(0)^n(delta={delta:g},n={n})", v, e, "exact", res.limit)
        dec = all(b < a for a, b in zip(errs, errs[1:]))
        good = dec and res.bounded_below
        rep.add(f"decreasing(delta={delta:g})", float(good), 0.0, "exact", 1.0, good)
        ok &= good
        series.append((_log_axis(cfg.n_list), np.asarray(res.values)))
    rep.verdict = "pass" if ok else "fail"
    table = _table(["delta", "n", "steps", "value", "limit", "abs_error"], rows)
    svg = polyline_plot(series, [f"delta={d:g}" for d in cfg.delta], xlabel="log10 n", ylabel="P(extinct by delta)")
    return rep, table, svg


def converge_survival(cfg: RunConfig):
    fam = cfg.fam()
    tol = 1e-3 if cfg.tol is None else cfg.tol
    res = limits.survival_mass_limit(fam, cfg.x, cfg.n_list)
    rep = _trend_report("survival-mass", cfg, {"n_list": cfg.n_list, "x": cfg.x, "tol": tol})
    for n, v, d in zip(res.n_list, res.values, res.deviations):
        rep.add(f"f^[nx](n={n})", v, d, "exact", res.target)
    last_ok = res.deviations[-1] <= tol
    rep.add("decreasing", float(res.decreasing), 0.0, "exact", 1.0, res.decreasing)
    rep.add("deviation_at_largest_n", res.deviations[-1], res.deviations[-1], "exact", tol, last_ok)
    rep.verdict = "pass" if res.decreasing and last_ok else "fail"
    rows = [[n, v, res.target, d] for n, v, d in zip(res.n_list, res.values, res.deviations)]
    table = _table(["n", "value", "target", "deviation"], rows)
    svg = polyline_plot(
        [(_log_axis(res.n_list), res.values), (_log_axis(res.n_list), [res.target] * len(res.n_list))],
        ["f^[nx]", "exp(-gamma x)"], xlabel="log10 n", ylabel="mass",
    )
    return rep, table, svg


def converge_extinction(cfg: RunConfig):
    fam = cfg.fam()
    rep = ex.converge_extinction(fam, cfg.x, cfg.n_list, cfg.reps or 10**4, cfg.seed, horizon=cfg.horizon,
                                 ks_threshold=cfg.tol or ex.KS_THRESHOLD, jobs=cfg.jobs)
    rows = []
    for n in cfg.n_list:
        atom = rep.stat(f"atom_at_infinity_n={n}")
        rows.append([n, rep.stat(f"ks_n={n}").estimate, rep.stat(f"exact_law_ks_n={n}").estimate,
                     atom.estimate, atom.target, atom.error])
    table = _table(["n", "ks", "exact_law_ks", "atom", "atom_target", "atom_gap"], rows)
    grid = np.linspace(0.0, cfg.horizon, 201)
    analytic = np.concatenate([[0.0], mech_mod.extinction_cdf(fam.target, cfg.x, grid[1:])])
    series, labels, steps = [], [], []
    for n in cfg.n_list:
        times = rep.curves[n]
        ecdf = np.arange(1, times.size + 1) / (cfg.reps or 10**4)
        series.append((np.concatenate([[0.0], times, [cfg.horizon]]),
                       np.concatenate([[0.0], ecdf, [ecdf[-1] if ecdf.size else 0.0]])))
        labels.append(f"empirical n={n}")
        steps.append(True)
    series.append((grid, analytic))
    labels.append("exp(-x v(t))")
    steps.append(False)
    svg = polyline_plot(series, labels, xlabel="t", ylabel="P(E/gamma_n <= t)", steps=steps)
    return rep, table, svg


def converge_laplace(cfg: RunConfig):
    fam = cfg.fam()
    n = cfg.n if cfg.n else cfg.n_list[0]
    rep = ex.converge_laplace(fam, cfg.x, cfg.a, cfg.lam, n, cfg.reps or 10**4, cfg.seed, jobs=cfg.jobs)
    rows, est, tgt = [], [], []
    for lam in cfg.lam:
        s = rep.stat(f"laplace({lam:g})")
        exact = rep.stat(f"exact_finite_n({lam:g})")
        rows.append([float(lam), s.estimate, s.error, s.target, exact.estimate])
        est.append(s.estimate)
        tgt.append(s.target)
    table = _table(["lambda", "estimate", "se", "target", "exact_finite_n"], rows)
    svg = polyline_plot([(cfg.lam, est), (cfg.lam, tgt)], ["empirical", "exp(-x u_a)"], xlabel="lambda",
                        ylabel="Laplace transform")
    return rep, table, svg


CONVERGE_RUNNERS = {
    "A1": converge_A1,
    "A3": converge_A3,
    "main1": converge_main1,
    "survival-mass": converge_survival,
    "extinction": converge_extinction,
    "laplace": converge_laplace,
}


def cmd_converge(cfg: RunConfig) -> int:
    rep, table, svg = CONVERGE_RUNNERS[cfg.experiment](cfg)
    _write(cfg.out, f"{cfg.experiment}.svg", svg)
    _write(cfg.out, f"{cfg.experiment}_report.csv", rep.to_csv())
    return _emit_report(cfg, rep, cfg.experiment, csv_text=table)


# ---------------------------------------------------------------- mechanism-info


def cmd_mechanism_info(cfg: RunConfig) -> int:
    m = cfg.mech()
    kind = mech_mod.classify(m)
    grey = mech_mod.check_grey(m)
    cons = mech_mod.check_conservative(m)
    info = {
        "mechanism": json.loads(m.to_json()),
        "class": kind,
        "gamma": mech_mod.largest_root(m),
        "qstar": mech_mod.qstar(m) if kind == "supercritical" else 0.0,
        "grey": {"holds": grey.holds, "estimate": grey.estimate},
        "conservative": {"holds": cons.holds, "estimate": cons.estimate},
    }
    if grey.holds:
        info["extinction_cdf_at_1"] = mech_mod.extinction_cdf(m, cfg.x, 1.0)
    text = json.dumps(info, indent=2, sort_keys=True) + "\n"
    _write(cfg.out, "mechanism_info.json", text)
    sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------- parser


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file of settings; flags override it")
    p.add_argument("--seed", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--out", help="output directory (default ./results)")
    p.add_argument("--jobs", type=int, help="worker processes (default: all cores); never changes results")
    p.add_argument("--n-list", dest="n_list", type=_ints, help="comma-separated n values")
    p.add_argument("--horizon", type=float, help="censoring horizon T for extinction times")
    p.add_argument("--offspring", type=_floats, help="offspring probabilities p_0,p_1,...")
    p.add_argument("--drift", type=float, help="near-critical binary family with this drift")
    p.add_argument("--mechanism", type=json.loads, help='JSON {"alpha":..,"beta":..,"atoms":[[r,m]]}')
    p.add_argument("-a", "--height", dest="a", type=float, help="truncation height / time a")
    p.add_argument("-x", "--mass", dest="x", type=float, help="initial mass x")
    p.add_argument("-n", dest="n", type=int, help="single n for the Laplace study")
    p.add_argument("--lambda", dest="lam", type=_floats, help="comma-separated lambda grid")
    p.add_argument("--delta", type=_floats, help="comma-separated delta grid")
    p.add_argument("--cap", type=int)
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--forest", type=int, help="number of trees")
    p.add_argument("--functional", help="functional for girsanov-mc")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gwlimits", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("sample-tree", help="sample a truncated tree or forest and write JSON/CSV/SVG"))
    v = sub.add_parser("verify", help="change-of-measure checks")
    v.add_argument("name", choices=VERIFY)
    _common(v)
    c = sub.add_parser("converge", help="scaling-limit studies")
    c.add_argument("name", choices=CONVERGE)
    _common(c)
    _common(sub.add_parser("mechanism-info", help="classify a branching mechanism"))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "drift", None) is not None:
        args.family = {"family": "near_critical_binary", "drift": args.drift}
    experiment = getattr(args, "name", args.command)
    try:
        cfg = build_config(args, experiment)
        if args.command == "sample-tree":
            return cmd_sample_tree(cfg)
        if args.command == "verify":
            return cmd_verify(cfg)
        if args.command == "converge":
            return cmd_converge(cfg)
        return cmd_mechanism_info(cfg)
    except (UsageError, ValueError, KeyError, TypeError) as err:
        print(f"gwlimits: error: {err}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())

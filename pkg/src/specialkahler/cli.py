"""Command-line harness for the verification suites.

Every suite writes ``<suite>.json`` (deterministic for a given config and
seed), ``<suite>.run.json`` with timing and versions, and for the slope
suites a ``<suite>.csv`` convergence table.  Exit codes: 0 all checks pass,
1 some check fails, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .calculus import FORWARD_AD, DerivativeScheme
from .chart_atlas import ChartId, WeightPair, group_of
from .errors import DomainError, NumericalError
from .reports import Check, Report, csv_table, dumps

SUITES = ("verify-ricci", "verify-kahler", "holonomy", "gh-compare", "gh-curl", "gluing-scan", "fixed-points",
          "admissible-p", "moduli-dims", "g2-torsion", "g2-algebra")
SLOPE_SUITES = ("gh-compare", "gluing-scan", "g2-torsion")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    suite: str
    k: int = 1
    l: int = 2
    t: tuple[float, ...] = (0.1, 0.05, 0.025)
    grid: Optional[int] = None
    tol: Optional[float] = None
    scheme: str = "fd"
    h: Optional[float] = None
    seed: int = 0
    out: str = "reports"
    max_order: int = 12
    loops: int = 10
    grid_check: bool = True

    def validate(self) -> "RunConfig":
        if self.suite not in SUITES:
            raise ConfigError(f"unknown suite {self.suite!r}")
        if self.scheme not in ("fd", "ad"):
            raise ConfigError("scheme must be fd or ad")
        if self.tol is not None and not self.tol > 0:
            raise ConfigError("tolerances must be positive")
        if self.grid is not None and self.grid < 2:
            raise ConfigError("grids need at least two points per axis")
        if self.suite in SLOPE_SUITES:
            ts = list(self.t)
            if len(ts) < 3 or len(set(ts)) != len(ts):
                raise ConfigError("a slope fit needs at least three distinct t values")
            if any(not (v > 0) for v in ts) or any(b >= a for a, b in zip(ts, ts[1:])):
                raise ConfigError("t values must be positive and decreasing")
        try:
            WeightPair(self.k, self.l)
        except ValueError as e:
            raise ConfigError(str(e)) from None
        return self

    @property
    def weights(self) -> WeightPair:
        return WeightPair(self.k, self.l)

    def derivative_scheme(self) -> DerivativeScheme:
        if self.scheme == "ad":
            return DerivativeScheme(method=FORWARD_AD)
        return DerivativeScheme(h=self.h) if self.h else DerivativeScheme()

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("out")
        d["t"] = list(self.t)
        return d


# ------------------------------------------------------------------ suites

def suite_verify_ricci(cfg: RunConfig) -> tuple[Report, Optional[str]]:
    from .special_kahler import eguchi_hanson_compare, verify_ricci_report

    rep = verify_ricci_report(cfg.weights, cfg.grid or 20, cfg.tol or 1e-6, cfg.derivative_scheme())
    rep.config = cfg.echo()
    if cfg.weights.a == 0:
        info, checks = eguchi_hanson_compare(tol=1e-6)
        rep.extend(checks)
        rep.extra["eguchi_hanson"] = info
    return rep, None


def suite_verify_kahler(cfg: RunConfig) -> tuple[Report, Optional[str]]:
    from .special_kahler import default_grid, kahler_check

    rep = Report("verify-kahler", cfg.echo(), seed=cfg.seed)
    rep.extend(kahler_check(cfg.weights, default_grid(cfg.grid or 20), cfg.tol or 1e-8, cfg.derivative_scheme()))
    return rep, None


def suite_holonomy(cfg: RunConfig) -> tuple[Report, Optional[str]]:
    from .special_kahler import axis_holonomy, contractible_loop_study

    kp = cfg.weights
    rep = Report("holonomy", cfg.echo(), seed=cfg.seed)
    study = contractible_loop_study(kp, cfg.loops, 0.2, 1e-8, cfg.seed)
    rep.add("max_su2_defect", study["max_su2_defect"], cfg.tol or 1e-4)
    rep.add("min_halving_ratio", study["min_ratio"], 3.0, "ge")
    rows = [{"su2_defect": r["su2_defect"], "su2_defect_half": r["su2_defect_half"],
             "rotation": r["rotation"], "rotation_half": r["rotation_half"]} for r in study["loops"]]
    axes = {}
    for chart in (ChartId.Z, ChartId.W):
        order = group_of(chart, kp).order
        if order < 2:
            continue
        res = axis_holonomy(kp, chart=chart)
        rep.add(f"axis_holonomy_deviation[{chart.value},Z{order}]", res["deviation"], 1e-3)
        axes[chart.value] = {"order": order, "deviation": res["deviation"], "det_minus_one": res["in_su2"]}
    rep.extra.update({"loops": rows, "axes": axes})
    return rep, None


def suite_gh_compare(cfg: RunConfig) -> tuple[Report, Optional[str]]:
    from .gibbons_hawking import (LimitStudy, limit_coincidence_check, metric_difference_norms,
                                  potential_difference_norms, two_center, axis_gauge)
    from .special_kahler import default_grid

    kp = cfg.weights
    rep = Report("gh-compare", cfg.echo(), seed=cfg.seed)
    c, checks = limit_coincidence_check(kp, default_grid(cfg.grid or 15), cfg.tol or 1e-6)
    rep.extend(checks)
    c2, _ = limit_coincidence_check(kp, default_grid(cfg.grid or 15), cfg.tol or 1e-6,
                                    two_center(kp, axis_gauge(kp)).scaled(2))
    rep.add("doubled_strengths_constant_ratio_error", abs(c2 / c - 2.0), 1e-9)
    study = LimitStudy(t_values=tuple(cfg.t), n=24)
    pot = potential_difference_norms(study, (0, 1, 2))
    met = metric_difference_norms(study, (0, 1))
    header = ["t"] + [f"U_d{i}" for i in pot] + [f"metric_d{i}" for i in met]
    rows = [[t] + [pot[i][0][j] for i in pot] + [met[i][0][j] for i in met] for j, t in enumerate(study.t_values)]
    fits = [("potential", i, pot[i][1]) for i in pot] + [("metric", i, met[i][1]) for i in met]
    for kind, i, f in fits:
        if kind == "metric" and i > 0:
            continue
        rep.add(f"{kind}_difference_slope[d{i}]", f.slope, [3.8, 4.2], "in")
        rep.add(f"{kind}_difference_fit_residual[d{i}]", f.residual, 0.05)
    if cfg.grid_check:
        fine = replace(study, n=2 * study.n)
        f_pot = potential_difference_norms(fine, (0, 1, 2))
        f_met = metric_difference_norms(fine, (0,))
        change = max([abs(f_pot[i][1].slope - pot[i][1].slope) for i in pot] +
                     [abs(f_met[0][1].slope - met[0][1].slope)])
        rep.add("grid_doubling_slope_change", change, 0.05)
    rep.extra.update({"constant": c, "fits": {f"{k}_d{i}": {"slope": f.slope, "residual": f.residual}
                                             for k, i, f in fits}})
    header += ["fit", "slope", "residual"]
    rows = [r + ["", "", ""] for r in rows] + [[""] * (len(header) - 3) + [f"{k}_d{i}", f.slope, f.residual]
                                              for k, i, f in fits]
    return rep, csv_table(header, rows)


def suite_gh_curl(cfg: RunConfig) -> tuple[Report, Optional[str]]:
    from .gibbons_hawking import gh_consistency_checks, three_center, two_center

    rep = Report("gh-curl", cfg.echo(), seed=cfg.seed)
    scheme = DerivativeScheme(method=FORWARD_AD) if cfg.scheme == "ad" or cfg.h is None else cfg.derivative_scheme()
    for label, gh in (("two_center", two_center(cfg.weights)), ("three_center", three_center(0.5))):
        rng = np.random.default_rng(cfg.seed)
        for c in gh_consistency_checks(gh, rng, cfg.grid or 1000, scheme):
            rep.checks.append(Check(f"{label}:{c.name}", c.value, c.tol, c.relation))
    return rep, None


def suite_gluing_scan(cfg: RunConfig) -> tuple[Report, Optional[str]]:
    from .kummer_gluing import GluingScan, gluing_scan

    n = cfg.grid or 16
    rep = Report("gluing-scan", cfg.echo(), seed=cfg.seed)
    res = gluing_scan(GluingScan(tuple(cfg.t), n))
    for i, f in enumerate(res["fits"]):
        rep.add(f"omega{i + 1}_difference_slope", f.slope, [3.8, 4.2], "in")
        rep.add(f"omega{i + 1}_fit_residual", f.residual, 0.05)
    if cfg.grid_check:
        fine = gluing_scan(GluingScan(tuple(cfg.t), 2 * n))
        change = max(abs(a.slope - b.slope) for a, b in zip(res["fits"], fine["fits"]))
        rep.add("grid_doubling_slope_change", change, 0.05)
    header = ["t", "omega1", "omega2", "omega3", "slope1", "slope2", "slope3", "residual1", "residual2", "residual3"]
    rows = [[t, *map(float, res["norms"][j]), *[f.slope for f in res["fits"]], *[f.residual for f in res["fits"]]]
            for j, t in enumerate(res["t"])]
    return rep, csv_table(header, rows)


def suite_fixed_points(cfg: RunConfig) -> tuple[Report, Optional[str]]:
    from .kummer_gluing import GAMMA, SIGMA, LatticeTorus, fixed_points, random_z3_torus

    rep = Report("fixed-points", cfg.echo(), seed=cfg.seed)
    rep.add("sigma_fixed_points_square_lattice", len(fixed_points(SIGMA, LatticeTorus.square())), 16, "eq")
    rep.add("gamma_fixed_points_standard_lattice", len(fixed_points(GAMMA, LatticeTorus.z3_family())), 9, "eq")
    rng = np.random.default_rng(cfg.seed)
    counts = [len(fixed_points(GAMMA, random_z3_torus(rng))) for _ in range(20)]
    rep.add("gamma_fixed_points_random_lattices_all_nine", all(c == 9 for c in counts), True, "eq")
    rep.extra["random_counts"] = counts
    return rep, None


def suite_admissible_p(cfg: RunConfig) -> tuple[Report, Optional[str]]:
    from .kummer_gluing import admissible_orders, orders_by_search

    rep = Report("admissible-p", cfg.echo(), seed=cfg.seed)
    orders = sorted(admissible_orders(cfg.max_order))
    search = sorted(orders_by_search(cfg.max_order))
    rep.add("admissible_orders", orders, [3, 4, 6] if cfg.max_order >= 6 else [p for p in (3, 4, 6)
                                                                               if p <= cfg.max_order], "eq")
    rep.add("matrix_search_agrees", orders == search, True, "eq")
    rep.extra.update({"orders": orders, "with_involution": sorted(set(orders) | {2})})
    return rep, None


def suite_moduli_dims(cfg: RunConfig) -> tuple[Report, Optional[str]]:
    from .kummer_gluing import moduli_dimensions, per_point_gluing, resolution_ledger, singular_count, z3_family_moduli

    rep = Report("moduli-dims", cfg.echo(), seed=cfg.seed)
    counts = moduli_dimensions()
    for m in counts:
        rep.add(f"{m.route}_total", m.total, 58, "eq")
    rep.add("dim_S3", z3_family_moduli(), 4, "eq")
    ledger = resolution_ledger()
    stages = max(e.stage for e in ledger)
    rep.add("singular_points_after_resolution", singular_count(ledger, stages), 0, "eq")
    rep.add("resolution_stages", stages, 2, "eq")
    rep.extra.update({"routes": [m.as_dict() for m in counts], "ledger": [e.as_dict() for e in ledger],
                      "per_point": {"Z2": list(per_point_gluing("Z2")), "Z3": list(per_point_gluing("Z3"))}})
    return rep, None


def suite_g2_torsion(cfg: RunConfig) -> tuple[Report, Optional[str]]:
    from .g2_structures import (blended_torsion_scan, build_phi_t, codifferential_gap, flat_triple_standard,
                                gh_phi_field, glued_phi_field, hypothesis_check, lift7, torsion_psi)
    from .gibbons_hawking import three_center
    from .kummer_gluing import GluedModel, GluingSchedule, blend_region

    rep = Report("g2-torsion", cfg.echo(), seed=cfg.seed)
    phi, v = build_phi_t(flat_triple_standard())
    rep.add("flat_triple_torsion_sup", torsion_psi(phi[None], v[None]).sup_norm, 1e-10)
    sched = GluingSchedule()
    y7 = lift7(blend_region(sched, 5))
    phi, v = gh_phi_field(three_center(cfg.t[1]))(y7)
    rep.add("hyperkahler_triple_torsion_sup", torsion_psi(phi, v).sup_norm, 1e-8)
    scan = blended_torsion_scan(tuple(cfg.t), cfg.grid or 10, sched)
    rep.add("blended_torsion_sup_slope", scan["sup_fit"].slope, [3.7, 4.3], "in")
    rep.add("blended_torsion_l2_slope", scan["l2_fit"].slope, [3.7, 4.3], "in")
    model = GluedModel(sched.with_t(cfg.t[0]))
    # the cutoff is only C^2, so sample away from its seams and skip the step guard
    gap = codifferential_gap(glued_phi_field(model), lift7(blend_region(sched, 4, margin=0.05)),
                             DerivativeScheme(h=1e-3, guard=1e9))
    rep.add("codifferential_gap", gap["max_abs_gap"], 1e-6)
    hyp = hypothesis_check(tuple(cfg.t)).hypotheses
    for key in ("B_iii", "B_iv", "B_v"):
        rep.add(f"hypothesis_{key}", hyp[key], True, "eq")
    reports = scan["reports"]
    flags = {"B_ii": hyp["B_ii"], **{k: hyp[k] for k in ("B_iii", "B_iv", "B_v")}}
    torsion = []
    for r in reports:
        d = r.as_dict()
        d.update(slope=scan["sup_fit"].slope, slope_residual=scan["sup_fit"].residual, hypotheses=flags)
        torsion.append(d)
    rep.extra.update({"torsion": torsion, "hypothesis_numerics": hyp, "codifferential": gap})
    rows = [[r.t, r.sup_norm, r.l2_norm, scan["sup_fit"].slope, scan["sup_fit"].residual] for r in reports]
    return rep, csv_table(["t", "sup_norm", "l2_norm", "slope", "residual"], rows)


def suite_g2_algebra(cfg: RunConfig) -> tuple[Report, Optional[str]]:
    from . import forms
    from .g2_structures import (metric_from_phi, phi0, pullback, random_g2_element, stabilizer_dimension,
                                star_phi0, theta)

    rep = Report("g2-algebra", cfg.echo(), seed=cfg.seed)
    rep.add("metric_from_phi0_minus_identity", float(np.max(np.abs(metric_from_phi(phi0()) - np.eye(7)))), 1e-12)
    rep.add("theta_phi0_minus_star_phi0", float(np.max(np.abs(theta(phi0()) - star_phi0()))), 0.0)
    rep.add("phi0_wedge_star_phi0", float(forms.wedge(phi0(), star_phi0(), 7, 3, 4)[0]), 7.0, "eq")
    rep.add("stabilizer_dimension", stabilizer_dimension(), 14, "eq")
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for _ in range(5):
        A = random_g2_element(rng)
        phi = pullback(phi0(), A, 3)
        worst = max(worst, float(np.max(np.abs(phi - phi0()))), float(np.max(np.abs(theta(phi) - star_phi0()))))
    rep.add("g2_elements_fix_phi0_and_theta", worst, 1e-10)
    return rep, None


RUNNERS: dict[str, Callable[[RunConfig], tuple[Report, Optional[str]]]] = {
    "verify-ricci": suite_verify_ricci, "verify-kahler": suite_verify_kahler, "holonomy": suite_holonomy,
    "gh-compare": suite_gh_compare, "gh-curl": suite_gh_curl, "gluing-scan": suite_gluing_scan,
    "fixed-points": suite_fixed_points, "admissible-p": suite_admissible_p, "moduli-dims": suite_moduli_dims,
    "g2-torsion": suite_g2_torsion, "g2-algebra": suite_g2_algebra,
}


# ------------------------------------------------------------------ driver

def _parse_t(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad t list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="specialkahler", description="Run a verification suite.")
    p.add_argument("suite", choices=SUITES)
    p.add_argument("--k", type=int)
    p.add_argument("--l", type=int)
    p.add_argument("--t", type=_parse_t, help="comma-separated, decreasing")
    p.add_argument("--grid", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--scheme", choices=("fd", "ad"))
    p.add_argument("--h", type=float, help="finite-difference step")
    p.add_argument("--seed", type=int)
    p.add_argument("--max", dest="max_order", type=int)
    p.add_argument("--loops", type=int)
    p.add_argument("--no-grid-check", dest="grid_check", action="store_const", const=False)
    p.add_argument("--out")
    p.add_argument("--config", help="JSON file; flags override its values")
    return p


def load_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if args.config:
        try:
            values = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config: {e}") from None
        if not isinstance(values, dict):
            raise ConfigError("config file must hold a JSON object")
    names = {f.name for f in fields(RunConfig)}
    unknown = set(values) - names
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for name in names - {"suite"}:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    if "t" in values:
        values["t"] = tuple(float(v) for v in (values["t"] if not isinstance(values["t"], (int, float))
                                                else [values["t"]]))
    try:
        return RunConfig(suite=args.suite, **values).validate()
    except TypeError as e:
        raise ConfigError(str(e)) from None


def run(cfg: RunConfig) -> tuple[int, Optional[Report]]:
    out = Path(cfg.out)
    start = time.perf_counter()
    try:
        rep, table = RUNNERS[cfg.suite](cfg)
    except NumericalError as e:
        print(f"numerical failure: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERIC, None
    except (DomainError, ConfigError) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG, None
    elapsed = time.perf_counter() - start
    rep.seed = cfg.seed
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{cfg.suite}.json").write_text(rep.to_json(), encoding="utf-8", newline="\n")
    if table is not None:
        (out / f"{cfg.suite}.csv").write_text(table, encoding="utf-8", newline="\n")
    (out / f"{cfg.suite}.run.json").write_text(dumps({"seconds": elapsed, "versions": versions()}),
                                               encoding="utf-8", newline="\n")
    for c in rep.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name} = {c.value}")
    return (EXIT_OK if rep.passed else EXIT_FAIL), rep


def versions() -> dict:
    import platform

    import scipy
    import sympy

    from . import __version__

    return {"specialkahler": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "sympy": sympy.__version__}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    try:
        cfg = load_config(args)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    code, _ = run(cfg)
    return code


if __name__ == "__main__":
    sys.exit(main())

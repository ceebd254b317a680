"""Verification suites: one per acceptance target, each producing named
checks with measured values and thresholds, plus CSV report tables."""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .battery import BatteryEntry, default_battery
from .correlation import (
    GridFunction,
    build_kernel,
    contraction_ratio,
    maximal_correlation,
    verify_score_projection,
)
from .functionals import (
    GAUSSIAN_ENTROPY,
    entropy,
    fisher_information,
    report,
    score,
    standardized_sum,
)
from .grids import (
    DistributionSpec,
    GridPolicy,
    build_family,
    moments_of,
    rescale,
)
from .montecarlo import mc_entropy, mc_maxcorr, sample, sample_sum_pair
from .semigroup import (
    debruijn_gap,
    fisher_along_flow,
    geometric_schedule,
)

DEFAULT_TOLERANCES = {
    "dks": 1e-3,
    "contraction": 1e-6,
    "scoreproj": 1e-3,
    "scoreproj_shrink": 3.0,
    "fisher_monotone": 1e-6,
    "entropy_monotone": 1e-6,
    "chain_rel": 1e-6,
    "strict_gap": 1e-4,
    "debruijn": 1e-3,
    "gauss": 1e-6,
    "scaling": 1e-5,
    "cramer_rao": 1e-6,
    "max_entropy": 1e-8,
    "rowsum": 1e-8,
    "rayleigh": 1e-12,
}

UNIFORM_GAP = GAUSSIAN_ENTROPY - 0.5 * math.log(12.0)   # 0.176485...


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float


@dataclass
class SuiteVerdict:
    checks: list = field(default_factory=list)

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.checks)

    def extend(self, checks) -> None:
        self.checks.extend(checks)


class FamilyCache:
    """Battery sum families, built once per (entry, points, n_max)."""

    def __init__(self, battery: list[BatteryEntry]):
        self.battery = battery
        self._cache = {}

    def family(self, entry: BatteryEntry, points: int, n_max: int):
        key = (entry.name, points, n_max)
        if key not in self._cache:
            self._cache[key] = build_family(
                entry.spec, n_max, GridPolicy(points=points),
                t_smooth=entry.t_smooth)
        return self._cache[key]


def _fmt(x: float) -> str:
    return f"{x:.12g}"


# ---------------------------------------------------------------------------
# criterion 1: maximal correlation identity


def suite_dks(cache: FamilyCache, tol: dict, seed: int, points: int = 1024,
              n_max: int = 5, mc_pairs: int = 1_000_000):
    t_start = time.perf_counter()
    checks, rows, rayleigh_traces = [], [], []
    for entry in cache.battery:
        fam = cache.family(entry, points, n_max)
        err = 0.0
        for n in range(1, n_max + 1):
            for m in range(1, n + 1):
                res = maximal_correlation(fam, m, n)
                err = max(err, abs(res.r2 - m / n))
                rows.append(f"{entry.name},{m},{n},{_fmt(res.r2)},"
                            f"{_fmt(m / n)},{res.iterations}")
                rayleigh_traces.append(res.rayleigh)
        checks.append(CheckResult(f"dks_grid_{entry.name}",
                                  err <= tol["dks"], err, tol["dks"]))
    gauss = DistributionSpec("gaussian", (0.0, 1.0), standardize=True)
    for i, (m, n) in enumerate([(1, 2), (2, 3), (2, 5)]):
        sm, sn = sample_sum_pair(gauss, m, n, mc_pairs, seed + i)
        est = mc_maxcorr(sm, sn)
        dev = abs(est.point - m / n)
        checks.append(CheckResult(f"dks_mc_{m}_{n}", dev <= est.half_width_99,
                                  dev, est.half_width_99))
        rows.append(f"mc_gaussian,{m},{n},{_fmt(est.point)},{_fmt(m / n)},0")
    elapsed = time.perf_counter() - t_start
    checks.append(CheckResult("dks_runtime_seconds", elapsed < 120.0,
                              elapsed, 120.0))
    table = "base,m,n,r2,target,iterations\n" + "\n".join(rows) + "\n"
    return checks, {"dks.csv": table}, rayleigh_traces


# ---------------------------------------------------------------------------
# criterion 2: contraction inequality


def _theta_battery(fam) -> list[tuple[str, np.ndarray]]:
    x = fam.grid.axis()
    return [
        ("x", x),
        ("x2", x ** 2),
        ("x3", x ** 3),
        ("x4", x ** 4),
        ("clipped_sine", np.clip(np.sin(x), -0.8, 0.8)),
    ]


def suite_contraction(cache: FamilyCache, tol: dict, points: int = 1024,
                      n_max: int = 5):
    checks, rows = [], []
    max_excess = -np.inf
    max_linear_dev = 0.0
    for entry in cache.battery:
        fam = cache.family(entry, points, n_max)
        thetas = _theta_battery(fam)
        for n in range(2, n_max + 1):
            for m in range(1, n):
                k = build_kernel(fam, m, n)
                rho_m = score(fam.density_of_sum(m))
                for name, vals in thetas + [("score_m", rho_m.values)]:
                    ratio = contraction_ratio(k, GridFunction(fam.grid, vals))
                    excess = ratio - m / n
                    max_excess = max(max_excess, excess)
                    if name == "x":
                        max_linear_dev = max(max_linear_dev, abs(excess))
                    rows.append(f"{entry.name},{m},{n},{name},"
                                f"{_fmt(ratio)},{_fmt(m / n)}")
    checks.append(CheckResult("contraction_max_excess",
                              max_excess <= tol["contraction"],
                              float(max_excess), tol["contraction"]))
    checks.append(CheckResult("contraction_linear_equality",
                              max_linear_dev <= tol["contraction"],
                              float(max_linear_dev), tol["contraction"]))
    table = "base,m,n,theta,ratio,bound\n" + "\n".join(rows) + "\n"
    return checks, {"contraction.csv": table}


# ---------------------------------------------------------------------------
# criterion 3: score projection


def suite_score_projection(cache: FamilyCache, tol: dict, points: int = 2048):
    checks, rows = [], []
    worst = 0.0
    for entry in cache.battery:
        fam = cache.family(entry, points, 3)
        for (m, n) in [(1, 2), (2, 3)]:
            res = verify_score_projection(fam, m, n)
            worst = max(worst, res.weighted_sup_error)
            rows.append(f"{entry.name},{m},{n},{_fmt(res.weighted_sup_error)},"
                        f"{_fmt(res.l2_error)}")
    checks.append(CheckResult("scoreproj_max_weighted_sup",
                              worst <= tol["scoreproj"], worst,
                              tol["scoreproj"]))
    uniform = next(e for e in cache.battery if e.name == "uniform")
    coarse = verify_score_projection(cache.family(uniform, points // 2, 3), 1, 2)
    fine = verify_score_projection(cache.family(uniform, points, 3), 1, 2)
    shrink = coarse.weighted_sup_error / max(fine.weighted_sup_error, 1e-300)
    checks.append(CheckResult("scoreproj_refinement_shrink",
                              shrink >= tol["scoreproj_shrink"], shrink,
                              tol["scoreproj_shrink"]))
    table = "base,m,n,weighted_sup,l2\n" + "\n".join(rows) + "\n"
    return checks, {"scoreproj.csv": table}


# ---------------------------------------------------------------------------
# criteria 4, 5, 7: monotonicity reports and the Gaussian fixed point


def suite_monotonicity(cache: FamilyCache, tol: dict, points: int = 4096,
                       n_max: int = 8):
    checks, tables = [], {}
    for entry in cache.battery:
        fam = cache.family(entry, points, n_max)
        rep = report(fam, tolerance=tol["fisher_monotone"])
        tables[f"functionals_{entry.name}.csv"] = rep.to_csv()
        j_excess = float(np.max(np.diff(rep.fisher_std)))
        h_deficit = float(-np.min(np.diff(rep.entropy_std)))
        checks.append(CheckResult(f"fisher_monotone_{entry.name}",
                                  j_excess <= tol["fisher_monotone"],
                                  j_excess, tol["fisher_monotone"]))
        checks.append(CheckResult(f"entropy_monotone_{entry.name}",
                                  h_deficit <= tol["entropy_monotone"],
                                  h_deficit, tol["entropy_monotone"]))
        if entry.name != "gaussian":
            gap12 = rep.entropy_std[1] - rep.entropy_std[0]
            checks.append(CheckResult(f"entropy_strict_1_2_{entry.name}",
                                      gap12 > tol["strict_gap"], gap12,
                                      tol["strict_gap"]))
        js = np.array([fisher_information(fam.density_of_sum(k))
                       for k in range(1, n_max + 1)])
        excess = 0.0
        for n in range(1, n_max + 1):
            for m in range(1, n + 1):
                excess = max(excess, js[n - 1] * n / (m * js[m - 1]) - 1.0)
        checks.append(CheckResult(f"fisher_chain_{entry.name}",
                                  excess <= tol["chain_rel"], excess,
                                  tol["chain_rel"]))
        if entry.name == "gaussian":
            h_dev = float(np.max(np.abs(np.array(rep.entropy_std)
                                        - GAUSSIAN_ENTROPY)))
            j_dev = float(np.max(np.abs(np.array(rep.fisher_std) - 1.0)))
            checks.append(CheckResult("gauss_entropy_fixed_point",
                                      h_dev <= tol["gauss"], h_dev, tol["gauss"]))
            checks.append(CheckResult("gauss_fisher_fixed_point",
                                      j_dev <= tol["gauss"], j_dev, tol["gauss"]))
    return checks, tables


# ---------------------------------------------------------------------------
# criterion 6: de Bruijn identity


def suite_debruijn(cache: FamilyCache, tol: dict, points: int = 2048):
    checks, tables = [], {}
    schedule = geometric_schedule()
    rows = []
    for entry in cache.battery:
        fam = cache.family(entry, points, 1)
        base = fam.base
        trace = fisher_along_flow(base, schedule)
        direct = GAUSSIAN_ENTROPY - entropy(base)
        dev = abs(trace.entropy_gap - direct)
        checks.append(CheckResult(f"debruijn_agreement_{entry.name}",
                                  dev <= tol["debruijn"], dev, tol["debruijn"]))
        rows.append(f"{entry.name},{_fmt(trace.entropy_gap)},{_fmt(direct)},{_fmt(dev)}")
        tables[f"flow_{entry.name}.csv"] = trace.to_csv()
    raw_uniform = build_family(
        DistributionSpec("uniform", (0.0, 1.0), standardize=True), 1,
        GridPolicy(points=points))
    gap = debruijn_gap(raw_uniform.base, schedule)
    dev = abs(gap - UNIFORM_GAP)
    checks.append(CheckResult("debruijn_uniform_closed_form",
                              dev <= tol["debruijn"], dev, tol["debruijn"]))
    rows.append(f"raw_uniform,{_fmt(gap)},{_fmt(UNIFORM_GAP)},{_fmt(dev)}")
    tables["debruijn.csv"] = "base,gap,direct,deviation\n" + "\n".join(rows) + "\n"
    return checks, tables


# ---------------------------------------------------------------------------
# criterion 8: scaling laws


def suite_scaling(cache: FamilyCache, tol: dict, points: int = 2048):
    checks, rows = [], []
    worst_j, worst_h = 0.0, 0.0
    for entry in cache.battery:
        base = cache.family(entry, points, 1).base
        j0, h0 = fisher_information(base), entropy(base)
        for alpha in (0.5, 2.0):
            d = rescale(base, alpha)
            j_dev = abs(alpha ** 2 * fisher_information(d) / j0 - 1.0)
            h_dev = abs((entropy(d) - h0) / math.log(alpha) - 1.0)
            worst_j, worst_h = max(worst_j, j_dev), max(worst_h, h_dev)
            rows.append(f"{entry.name},{alpha},{_fmt(j_dev)},{_fmt(h_dev)}")
    checks.append(CheckResult("scaling_fisher", worst_j <= tol["scaling"],
                              worst_j, tol["scaling"]))
    checks.append(CheckResult("scaling_entropy", worst_h <= tol["scaling"],
                              worst_h, tol["scaling"]))
    table = "base,alpha,fisher_rel_dev,entropy_rel_dev\n" + "\n".join(rows) + "\n"
    return checks, {"scaling.csv": table}


# ---------------------------------------------------------------------------
# criterion 9: property suites


def suite_properties(cache: FamilyCache, tol: dict, seed: int,
                     rayleigh_traces=None, points: int = 4096, n_max: int = 8):
    checks = []
    cr_min, maxent_excess = np.inf, -np.inf
    for entry in cache.battery:
        fam = cache.family(entry, points, n_max)
        for k in range(1, n_max + 1):
            u = standardized_sum(fam, k)
            j = fisher_information(u)
            h = entropy(u)
            _, var = moments_of(u)
            cr_min = min(cr_min, j * var)
            maxent_excess = max(
                maxent_excess,
                h - 0.5 * math.log(2 * math.pi * math.e * var))
    checks.append(CheckResult("cramer_rao_min_product",
                              cr_min >= 1.0 - tol["cramer_rao"],
                              float(cr_min), 1.0 - tol["cramer_rao"]))
    checks.append(CheckResult("max_entropy_excess",
                              maxent_excess <= tol["max_entropy"],
                              float(maxent_excess), tol["max_entropy"]))
    rowsum_worst = 0.0
    for entry in cache.battery:
        fam = cache.family(entry, 1024, 5)
        for (m, n) in [(1, 2), (2, 3), (2, 5), (4, 5)]:
            rowsum_worst = max(rowsum_worst, build_kernel(fam, m, n).row_sum_error)
    checks.append(CheckResult("kernel_rowsum_max_dev",
                              rowsum_worst <= tol["rowsum"], rowsum_worst,
                              tol["rowsum"]))
    if rayleigh_traces:
        worst_step = min(min(np.diff(tr)) if len(tr) > 1 else 0.0
                         for tr in rayleigh_traces)
        checks.append(CheckResult("rayleigh_monotone_min_step",
                                  worst_step >= -tol["rayleigh"],
                                  float(worst_step), -tol["rayleigh"]))
    spec = DistributionSpec("gaussian", (0.0, 1.0), standardize=True)
    s1 = sample(spec, 50_000, seed)
    s2 = sample(spec, 50_000, seed)
    identical = bool(np.array_equal(s1.values, s2.values))
    e1, e2 = mc_entropy(s1), mc_entropy(s2)
    identical &= (e1.point == e2.point and e1.half_width_99 == e2.half_width_99)
    checks.append(CheckResult("seed_determinism", identical,
                              1.0 if identical else 0.0, 1.0))
    return checks, {}


# ---------------------------------------------------------------------------
# orchestration


def atomic_write_text(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def summary_csv(verdict: SuiteVerdict) -> str:
    lines = ["check,pass,value,threshold"]
    for c in verdict.checks:
        lines.append(f"{c.name},{'true' if c.passed else 'false'},"
                     f"{_fmt(c.value)},{_fmt(c.threshold)}")
    return "\n".join(lines) + "\n"


def run_verify(out_dir: str, battery=None, seed: int = 20250801,
               t_smooth: float = 0.01, tolerances: dict | None = None,
               mc_pairs: int = 1_000_000, echo=print) -> SuiteVerdict:
    """Run every suite over the battery, write per-suite CSV tables plus a
    summary, and return the combined verdict."""
    t0 = time.perf_counter()
    tol = dict(DEFAULT_TOLERANCES)
    if tolerances:
        tol.update(tolerances)
    battery = battery if battery is not None else default_battery(t_smooth)
    cache = FamilyCache(battery)
    verdict = SuiteVerdict()
    tables = {}

    checks, tabs, rayleigh = suite_dks(cache, tol, seed, mc_pairs=mc_pairs)
    verdict.extend(checks)
    tables.update(tabs)
    for fn, args in [
        (suite_contraction, (cache, tol)),
        (suite_score_projection, (cache, tol)),
        (suite_monotonicity, (cache, tol)),
        (suite_debruijn, (cache, tol)),
        (suite_scaling, (cache, tol)),
    ]:
        checks, tabs = fn(*args)
        verdict.extend(checks)
        tables.update(tabs)
    checks, tabs = suite_properties(cache, tol, seed, rayleigh_traces=rayleigh)
    verdict.extend(checks)
    tables.update(tabs)

    elapsed = time.perf_counter() - t0
    verdict.checks.append(CheckResult("verify_runtime_seconds",
                                      elapsed < 300.0, elapsed, 300.0))
    os.makedirs(out_dir, exist_ok=True)
    for name, text in sorted(tables.items()):
        atomic_write_text(os.path.join(out_dir, name), text)
    atomic_write_text(os.path.join(out_dir, "summary.csv"), summary_csv(verdict))
    for c in verdict.checks:
        echo(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: "
             f"value={c.value:.6g} threshold={c.threshold:.6g}")
    echo(f"overall: {'PASS' if verdict.overall else 'FAIL'} "
         f"({elapsed:.1f}s)")
    return verdict

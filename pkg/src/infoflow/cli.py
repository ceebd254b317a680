"""Command-line front end.

Subcommands: ``functionals``, ``maxcorr``, ``debruijn``, ``scorecheck``,
``verify``.  Exit codes: 0 pass, 1 check failure, 2 configuration error,
3 runtime/numerical error.  All report files are CSV, written atomically
(write then rename), with 12 significant digit numbers so identical runs
produce byte-identical output.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field

from .battery import spec_by_name
from .correlation import maximal_correlation, verify_score_projection
from .errors import ConfigError, InfoFlowError
from .functionals import GAUSSIAN_ENTROPY, entropy, report
from .grids import DistributionSpec, GridPolicy, build_family, load_tabulated
from .montecarlo import mc_maxcorr, sample_sum_pair
from .semigroup import fisher_along_flow, geometric_schedule
from .verify import atomic_write_text, run_verify

EXIT_PASS = 0
EXIT_CHECK_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_RUNTIME_ERROR = 3


@dataclass
class RunConfig:
    dist: str = "gaussian"
    params: tuple = ()
    table_path: str | None = None
    n_max: int = 8
    grid_points: int | None = None   # per-subcommand default when unset
    grid_span: float = 12.0
    t_smooth: float = 0.01
    seed: int = 20250801
    out_dir: str = "."
    m: int = 1
    n: int = 2
    mc_pairs: int = 1_000_000
    tolerances: dict = field(default_factory=dict)

    def validate(self) -> None:
        if not 1 <= self.n_max <= 16:
            raise ConfigError(f"n_max must be in [1, 16], got {self.n_max}")
        if self.grid_points is not None and (
                self.grid_points < 64 or self.grid_points & (self.grid_points - 1)):
            raise ConfigError("grid points must be a power of two >= 64")
        if self.grid_span <= 0 or self.t_smooth < 0:
            raise ConfigError("grid span must be positive, t_smooth nonnegative")
        for k, v in self.tolerances.items():
            if not v > 0:
                raise ConfigError(f"tolerance {k} must be positive")

    def spec(self) -> DistributionSpec:
        if self.dist == "tabulated":
            if not self.table_path:
                raise ConfigError("tabulated distribution needs --table <path>")
            loaded = load_tabulated(self.table_path)
            return spec_by_name("tabulated", (), standardize=True,
                                table=loaded.table)
        return spec_by_name(self.dist, self.params, standardize=True)

    def policy(self, default_points: int) -> GridPolicy:
        points = self.grid_points if self.grid_points is not None else default_points
        return GridPolicy(points=points, k_spread=self.grid_span)


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` file; '#' starts a comment."""
    values = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key = value")
                key, val = (part.strip() for part in line.split("=", 1))
                values[key] = val
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return values


_CONFIG_KEYS = {
    "dist": str, "n_max": int, "grid_points": int, "grid_span": float,
    "t_smooth": float, "seed": int, "out": str, "m": int, "n": int,
    "mc_pairs": int, "table": str, "params": str,
}


def apply_config(cfg: RunConfig, values: dict) -> None:
    for key, raw in values.items():
        if key.startswith("tol."):
            try:
                cfg.tolerances[key[4:]] = float(raw)
            except ValueError as exc:
                raise ConfigError(f"bad tolerance value for {key}") from exc
            continue
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            if key == "params":
                cfg.params = tuple(float(p) for p in raw.split(",") if p)
            elif key == "out":
                cfg.out_dir = raw
            elif key == "table":
                cfg.table_path = raw
            else:
                setattr(cfg, key, _CONFIG_KEYS[key](raw))
        except ValueError as exc:
            raise ConfigError(f"bad value for config key {key!r}: {raw!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="infoflow",
        description="Entropy/Fisher monotonicity and maximal correlation "
                    "verification for sums of i.i.d. random variables.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("functionals", "per-n entropy/Fisher table with monotonicity verdicts"),
        ("maxcorr", "maximal correlation of (S_m, S_n) vs the m/n identity"),
        ("debruijn", "entropy gap via Fisher information along the OU flow"),
        ("scorecheck", "score projection identity error norms"),
        ("verify", "full acceptance battery"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--dist", default="gaussian",
                       help="gaussian | uniform | triangular | mixture | "
                            "exponential | tabulated")
        p.add_argument("--params", default=None,
                       help="comma-separated family parameters")
        p.add_argument("--table", default=None, help="tabulated density file")
        p.add_argument("--n-max", type=int, default=None)
        p.add_argument("--grid-points", type=int, default=None)
        p.add_argument("--grid-span", type=float, default=None)
        p.add_argument("--t-smooth", type=float, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--config", default=None, help="key = value file")
        p.add_argument("--out", default=None, help="output directory")
        if name in ("maxcorr", "scorecheck"):
            p.add_argument("-m", type=int, default=None)
            p.add_argument("-n", type=int, default=None)
        if name == "maxcorr":
            p.add_argument("--mc-pairs", type=int, default=None)
        if name == "verify":
            p.add_argument("--mc-pairs", type=int, default=None)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        apply_config(cfg, read_config_file(args.config))
    overrides = {}
    for attr, key in [("dist", "dist"), ("n_max", "n_max"),
                      ("grid_points", "grid_points"), ("grid_span", "grid_span"),
                      ("t_smooth", "t_smooth"), ("seed", "seed"),
                      ("out", "out"), ("params", "params"), ("table", "table")]:
        val = getattr(args, attr, None)
        if val is not None:
            overrides[key] = str(val)
    for attr in ("m", "n", "mc_pairs"):
        val = getattr(args, attr, None)
        if val is not None:
            overrides[attr] = str(val)
    apply_config(cfg, overrides)
    cfg.validate()
    return cfg


def _ensure_out_dir(cfg: RunConfig) -> None:
    try:
        os.makedirs(cfg.out_dir, exist_ok=True)
        probe = os.path.join(cfg.out_dir, ".write_probe.tmp")
        with open(probe, "w") as fh:
            fh.write("")
        os.remove(probe)
    except OSError as exc:
        raise ConfigError(f"output directory not writable: {exc}") from exc


def cmd_functionals(cfg: RunConfig) -> int:
    fam = build_family(cfg.spec(), cfg.n_max, cfg.policy(4096),
                       t_smooth=cfg.t_smooth)
    rep = report(fam, tolerance=cfg.tolerances.get("fisher_monotone", 1e-6))
    path = os.path.join(cfg.out_dir, f"functionals_{cfg.dist}.csv")
    atomic_write_text(path, rep.to_csv())
    print(rep.to_csv(), end="")
    print(f"entropy_monotone={str(rep.entropy_monotone).lower()} "
          f"fisher_monotone={str(rep.fisher_monotone).lower()}")
    ok = rep.entropy_monotone and rep.fisher_monotone
    return EXIT_PASS if ok else EXIT_CHECK_FAILURE


def cmd_maxcorr(cfg: RunConfig) -> int:
    if not 1 <= cfg.m <= cfg.n <= cfg.n_max:
        raise ConfigError(f"need 1 <= m <= n <= n_max, got {cfg.m}, {cfg.n}")
    fam = build_family(cfg.spec(), cfg.n, cfg.policy(1024),
                       t_smooth=cfg.t_smooth)
    res = maximal_correlation(fam, cfg.m, cfg.n)
    target = cfg.m / cfg.n
    sm, sn = sample_sum_pair(cfg.spec(), cfg.m, cfg.n, cfg.mc_pairs, cfg.seed,
                             ou_time=cfg.t_smooth)
    est = mc_maxcorr(sm, sn)
    lines = ["quantity,point,ci99,n_samples,seed",
             f"r2_grid,{res.r2:.12g},0,0,{cfg.seed}",
             f"r2_ace,{est.point:.12g},{est.half_width_99:.12g},"
             f"{est.n_samples},{cfg.seed}",
             f"r2_target,{target:.12g},0,0,{cfg.seed}"]
    atomic_write_text(os.path.join(cfg.out_dir,
                                   f"maxcorr_{cfg.m}_{cfg.n}.csv"),
                      "\n".join(lines) + "\n")
    print(f"grid power iteration: r2 = {res.r2:.6f} "
          f"({res.iterations} iterations, converged={res.converged})")
    print(f"mc ace estimate:      r2 = {est.point:.6f} "
          f"+- {est.half_width_99:.6f} (99% CI, {est.n_samples} pairs)")
    print(f"identity target:      r2 = {target:.6f}")
    grid_ok = abs(res.r2 - target) <= cfg.tolerances.get("dks", 1e-3)
    mc_ok = est.contains(target)
    return EXIT_PASS if grid_ok and mc_ok else EXIT_CHECK_FAILURE


def cmd_debruijn(cfg: RunConfig) -> int:
    fam = build_family(cfg.spec(), 1, cfg.policy(2048), t_smooth=cfg.t_smooth)
    schedule = geometric_schedule()
    trace = fisher_along_flow(fam.base, schedule)
    direct = GAUSSIAN_ENTROPY - entropy(fam.base)
    dev = abs(trace.entropy_gap - direct)
    atomic_write_text(os.path.join(cfg.out_dir, f"flow_{cfg.dist}.csv"),
                      trace.to_csv())
    print(f"quadrature gap:     {trace.entropy_gap:.6f}")
    print(f"direct entropy gap: {direct:.6f}")
    print(f"deviation:          {dev:.2e}")
    if not fam.base.smooth:
        # the direct side of a jump density carries an O(step) sampling
        # bias; the agreement check is only meaningful for smooth inputs
        print("note: non-smooth input, direct entropy carries O(step) bias; "
              "agreement not judged")
        return EXIT_PASS
    tol = cfg.tolerances.get("debruijn", 1e-3)
    return EXIT_PASS if dev <= tol else EXIT_CHECK_FAILURE


def cmd_scorecheck(cfg: RunConfig) -> int:
    if not 1 <= cfg.m <= cfg.n <= cfg.n_max:
        raise ConfigError(f"need 1 <= m <= n <= n_max, got {cfg.m}, {cfg.n}")
    fam = build_family(cfg.spec(), cfg.n, cfg.policy(2048),
                       t_smooth=cfg.t_smooth)
    res = verify_score_projection(fam, cfg.m, cfg.n)
    lines = ["check,pass,value,threshold"]
    tol = cfg.tolerances.get("scoreproj", 1e-3)
    ok = res.weighted_sup_error < tol
    lines.append(f"score_projection_weighted_sup,{'true' if ok else 'false'},"
                 f"{res.weighted_sup_error:.12g},{tol:.12g}")
    atomic_write_text(os.path.join(cfg.out_dir,
                                   f"scorecheck_{cfg.m}_{cfg.n}.csv"),
                      "\n".join(lines) + "\n")
    print(f"weighted sup error: {res.weighted_sup_error:.3e}")
    print(f"l2(f_n) error:      {res.l2_error:.3e}")
    return EXIT_PASS if ok else EXIT_CHECK_FAILURE


def cmd_verify(cfg: RunConfig) -> int:
    verdict = run_verify(cfg.out_dir, seed=cfg.seed, t_smooth=cfg.t_smooth,
                         tolerances=cfg.tolerances, mc_pairs=cfg.mc_pairs)
    return EXIT_PASS if verdict.overall else EXIT_CHECK_FAILURE


_COMMANDS = {
    "functionals": cmd_functionals,
    "maxcorr": cmd_maxcorr,
    "debruijn": cmd_debruijn,
    "scorecheck": cmd_scorecheck,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        _ensure_out_dir(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    try:
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except InfoFlowError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())

"""The standard density battery used by the verification suites: smooth and
non-smooth, symmetric and skewed, unimodal and bimodal."""

from __future__ import annotations

from dataclasses import dataclass

from .grids import DistributionSpec


@dataclass(frozen=True, eq=False)
class BatteryEntry:
    name: str
    spec: DistributionSpec
    t_smooth: float = 0.0


def default_battery(t_smooth: float = 0.01) -> list[BatteryEntry]:
    return [
        BatteryEntry("gaussian",
                     DistributionSpec("gaussian", (0.0, 1.0), standardize=True)),
        BatteryEntry("uniform",
                     DistributionSpec("uniform", (0.0, 1.0), standardize=True),
                     t_smooth=t_smooth),
        BatteryEntry("mixture",
                     DistributionSpec("gaussian_mixture",
                                      (0.5, -2.0, 1.0, 0.5, 2.0, 1.0),
                                      standardize=True)),
        BatteryEntry("exponential",
                     DistributionSpec("exponential", (1.0,), standardize=True),
                     t_smooth=t_smooth),
    ]


def spec_by_name(name: str, params: tuple = (), standardize: bool = True,
                 table=None) -> DistributionSpec:
    """CLI-facing construction with per-family default parameters."""
    defaults = {
        "gaussian": (0.0, 1.0),
        "uniform": (0.0, 1.0),
        "triangular": (0.0, 1.0, 2.0),
        "gaussian_mixture": (0.5, -2.0, 1.0, 0.5, 2.0, 1.0),
        "exponential": (1.0,),
        "tabulated": (),
    }
    aliases = {"mixture": "gaussian_mixture", "gauss": "gaussian",
               "normal": "gaussian", "expo": "exponential"}
    family = aliases.get(name, name)
    p = tuple(params) if params else defaults.get(family, ())
    return DistributionSpec(family, p, standardize=standardize, table=table)

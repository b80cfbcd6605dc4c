"""Scenario files: flat ``section.key = value`` lines.

Grammar::

    file   := line*
    line   := blank | comment | key '=' value [comment]
    comment:= '#' anything
    key    := section '.' name

Sections and keys:

    market.r, market.s0, market.x0                    (defaults 0, 1, 1)
    preference.kappa                                  (required)
    preference.g         number, or segments "t0:g0, t1:g1, ..." with t0 = 0
    preference.f_override   optional; replaces the solved f on every segment
    ambiguity.kind       none | mean_return | volatility | structured | rectangle
      none:        mu, sigma_sq
      mean_return: mu_lo, mu_hi, sigma
      volatility:  sigma_sq_lo, sigma_sq_hi, mu
      structured:  mu0, sigma0_sq, coupling, z_lo, z_hi
      rectangle:   mu_lo, mu_hi, sigma_sq_lo, sigma_sq_hi
    override.mu_star     optional; replaces the selected worst-case mean
    simulation.horizon, simulation.n_steps, simulation.n_paths, simulation.seed,
    simulation.pi_scale  (optional section; pi_scale defaults to 1)
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .model import (
    CrraPreference,
    DomainError,
    MarketParams,
    MeanReturnInterval,
    NoAmbiguity,
    Rectangle,
    Structured,
    VolatilityInterval,
)
from .simulate import SimConfig

AMBIGUITY_FIELDS = {
    "none": (NoAmbiguity, ("mu", "sigma_sq")),
    "mean_return": (MeanReturnInterval, ("mu_lo", "mu_hi", "sigma")),
    "volatility": (VolatilityInterval, ("sigma_sq_lo", "sigma_sq_hi", "mu")),
    "structured": (Structured, ("mu0", "sigma0_sq", "coupling", "z_lo", "z_hi")),
    "rectangle": (Rectangle, ("mu_lo", "mu_hi", "sigma_sq_lo", "sigma_sq_hi")),
}

KNOWN_KEYS = {
    "market.r",
    "market.s0",
    "market.x0",
    "preference.kappa",
    "preference.g",
    "preference.f_override",
    "ambiguity.kind",
    "override.mu_star",
    "simulation.horizon",
    "simulation.n_steps",
    "simulation.n_paths",
    "simulation.seed",
    "simulation.pi_scale",
} | {f"ambiguity.{name}" for _, names in AMBIGUITY_FIELDS.values() for name in names}


class ScenarioError(ValueError):
    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.key = key
        self.line = line


@dataclass(frozen=True)
class Scenario:
    market: MarketParams
    preference: CrraPreference
    ambiguity: object
    simulation: Optional[SimConfig] = None
    pi_scale: float = 1.0
    f_override: Optional[float] = None
    mu_star_override: Optional[float] = None

    @property
    def r(self) -> float:
        return self.market.risk_free_rate


def _read_pairs(text: str) -> dict[str, tuple[str, int]]:
    pairs: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError("expected 'key = value'", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ScenarioError("unknown key", key=key, line=lineno)
        if key in pairs:
            raise ScenarioError(f"duplicate key (first on line {pairs[key][1]})", key=key, line=lineno)
        if not value:
            raise ScenarioError("missing value", key=key, line=lineno)
        pairs[key] = (value, lineno)
    return pairs


def parse_scenario(text: str) -> Scenario:
    pairs = _read_pairs(text)

    def number(key, default=None, cast=float):
        if key not in pairs:
            if default is None:
                raise ScenarioError("required key is missing", key=key)
            return default
        value, lineno = pairs[key]
        try:
            return cast(value)
        except ValueError:
            raise ScenarioError(f"not a valid {cast.__name__}: {value!r}", key=key, line=lineno) from None

    def optional(key):
        return number(key) if key in pairs else None

    def build(key, factory, *args, **kwargs):
        try:
            return factory(*args, **kwargs)
        except DomainError as exc:
            raise ScenarioError(str(exc), key=key, line=pairs.get(key, (None, None))[1]) from None

    market = build(
        "market.r",
        MarketParams,
        risk_free_rate=number("market.r", 0.0),
        spot_price=number("market.s0", 1.0),
        initial_wealth=number("market.x0", 1.0),
    )

    kappa = number("preference.kappa")
    breaks, g = _parse_segments(pairs)
    if not 0 < kappa < 1:
        raise ScenarioError("kappa must lie in (0, 1)", key="preference.kappa", line=pairs["preference.kappa"][1])
    preference = build("preference.g", CrraPreference, kappa=kappa, breaks=breaks, g=g)

    if "ambiguity.kind" not in pairs:
        raise ScenarioError("required key is missing", key="ambiguity.kind")
    kind, kind_line = pairs["ambiguity.kind"]
    if kind not in AMBIGUITY_FIELDS:
        raise ScenarioError(
            f"unknown kind {kind!r}; expected one of {sorted(AMBIGUITY_FIELDS)}",
            key="ambiguity.kind",
            line=kind_line,
        )
    cls, names = AMBIGUITY_FIELDS[kind]
    for key in pairs:
        if key.startswith("ambiguity.") and key != "ambiguity.kind" and key[10:] not in names:
            raise ScenarioError(f"not a field of kind {kind!r}", key=key, line=pairs[key][1])
    values = {name: number(f"ambiguity.{name}") for name in names}
    ambiguity = build("ambiguity.kind", cls, **values)

    simulation = None
    if any(key.startswith("simulation.") and key != "simulation.pi_scale" for key in pairs):
        simulation = build(
            "simulation.horizon",
            SimConfig,
            horizon=number("simulation.horizon", 1.0),
            n_steps=number("simulation.n_steps", 1, cast=int),
            n_paths=number("simulation.n_paths", 100_000, cast=int),
            seed=number("simulation.seed", 0, cast=int),
            x0=market.initial_wealth,
            s0=market.spot_price,
        )
    return Scenario(
        market=market,
        preference=preference,
        ambiguity=ambiguity,
        simulation=simulation,
        pi_scale=number("simulation.pi_scale", 1.0),
        f_override=optional("preference.f_override"),
        mu_star_override=optional("override.mu_star"),
    )


def _parse_segments(pairs) -> tuple[tuple[float, ...], tuple[float, ...]]:
    key = "preference.g"
    if key not in pairs:
        raise ScenarioError("required key is missing", key=key)
    value, lineno = pairs[key]
    try:
        if ":" not in value:
            return (0.0,), (float(value),)
        breaks, gs = [], []
        for item in value.split(","):
            t, g = item.split(":")
            breaks.append(float(t))
            gs.append(float(g))
        return tuple(breaks), tuple(gs)
    except ValueError:
        raise ScenarioError(f"expected a number or 't:g' segments, got {value!r}", key=key, line=lineno) from None


def load_scenario(path) -> Scenario:
    return parse_scenario(Path(path).read_text())

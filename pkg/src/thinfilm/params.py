"""Model, regularization and discretization parameters.

A run is fully described by a :class:`ValidatedConfig`, which can only be
obtained through :func:`validate`. Configs are stored as small INI-style
files with three sections::

    [model]
    n = 1
    m = 1
    a1 = 0
    alpha = 0.2

    [reg]
    eps = 0
    ...

Keys are lowercase field names; unknown keys and unknown sections are
rejected so a typo cannot silently change the physics.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .errors import DegenerateDenominator, ExponentViolation

AVERAGINGS = ("arithmetic", "harmonic", "entropic")

# denominators (p+1)(p+2) are treated as zero within this distance
DENOM_TOL = 1e-12


class BetaZeroWarning(UserWarning):
    """beta_ent = 0 selects the baseline entropy G0."""


@dataclass(frozen=True)
class ModelParams:
    n: float = 1.0
    m: float = 1.0
    a1: float = 0.0
    alpha: float = 0.0
    beta_ent: float = 0.0
    kappa: Optional[float] = None


@dataclass(frozen=True)
class RegParams:
    delta: float = 0.0
    eps: float = 0.0
    s: float = 4.0
    theta: float = 0.3


@dataclass(frozen=True)
class DiscParams:
    a: float = math.pi
    N: int = 256
    dt0: float = 1e-4
    t_end: float = 1.0
    newton_tol: float = 1e-10
    newton_max_iter: int = 25
    dt_min: float = 1e-12
    dt_max: float = 0.05
    mobility_averaging: str = "arithmetic"


@dataclass(frozen=True)
class ValidatedConfig:
    """Immutable bundle of checked parameters.

    Do not build directly; use :func:`validate`.
    """

    model: ModelParams
    reg: RegParams
    disc: DiscParams

    def replace(self, **sections) -> "ValidatedConfig":
        """Return ``validate`` of this config with whole sections swapped."""
        parts = {"model": self.model, "reg": self.reg, "disc": self.disc}
        parts.update(sections)
        return validate(parts["model"], parts["reg"], parts["disc"])


def _finite(section, obj):
    for f in dataclasses.fields(obj):
        v = getattr(obj, f.name)
        if isinstance(v, float) and not math.isfinite(v):
            raise ExponentViolation(f"{section}.{f.name}", "must be finite", v)


def denominator_ok(p: float) -> bool:
    """True when neither p + 1 nor p + 2 vanishes."""
    return abs(p + 1.0) > DENOM_TOL and abs(p + 2.0) > DENOM_TOL


def validate(model: ModelParams, reg: RegParams, disc: DiscParams) -> ValidatedConfig:
    """Check every parameter constraint and freeze the result.

    Raises
    ------
    ExponentViolation
        A field breaks an admissibility constraint; ``.field`` names it.
    DegenerateDenominator
        ``a1 != 0`` and ``m - n`` or ``alpha + m - n`` is -1 or -2, so the
        potential-energy antiderivative does not exist as a power.
    """
    _finite("model", model)
    _finite("reg", reg)
    _finite("disc", disc)

    if not model.n > 0:
        raise ExponentViolation("model.n", "n > 0", model.n)
    if model.a1 > 0:
        if not model.m >= model.n / 2:
            raise ExponentViolation("model.m", "m >= n/2 when a1 > 0", model.m)
    elif not model.m > 0:
        raise ExponentViolation("model.m", "m > 0 when a1 <= 0", model.m)
    if not -0.5 < model.beta_ent < 1.0:
        raise ExponentViolation("model.beta_ent", "-1/2 < beta_ent < 1", model.beta_ent)
    if model.beta_ent == 0.0:
        warnings.warn("beta_ent = 0: entropy monitor uses G0", BetaZeroWarning, stacklevel=2)
    if model.kappa is not None and not math.isfinite(model.kappa):
        raise ExponentViolation("model.kappa", "must be finite", model.kappa)
    if model.a1 != 0.0:
        for label, p in (("m - n", model.m - model.n),
                         ("alpha + m - n", model.alpha + model.m - model.n)):
            if not denominator_ok(p):
                raise DegenerateDenominator(f"{label} = {p!r} is -1 or -2")

    if not reg.s >= 4:
        raise ExponentViolation("reg.s", "s >= 4", reg.s)
    theta_max = 2.0 / (2.0 * reg.s - 3.0)
    if not 0 < reg.theta < theta_max:
        raise ExponentViolation("reg.theta", f"0 < theta < 2/(2s-3) = {theta_max!r}", reg.theta)
    if not reg.delta >= 0:
        raise ExponentViolation("reg.delta", "delta >= 0", reg.delta)
    if not reg.eps >= 0:
        raise ExponentViolation("reg.eps", "eps >= 0", reg.eps)

    if not disc.a > 0:
        raise ExponentViolation("disc.a", "a > 0", disc.a)
    if isinstance(disc.N, bool) or not isinstance(disc.N, int):
        raise ExponentViolation("disc.N", "N must be an integer", disc.N)
    if disc.N < 8 or disc.N % 2:
        raise ExponentViolation("disc.N", "N even and >= 8", disc.N)
    if not 0 < disc.dt_min <= disc.dt0 <= disc.dt_max:
        raise ExponentViolation("disc.dt0", "0 < dt_min <= dt0 <= dt_max", disc.dt0)
    if not disc.t_end >= 0:
        raise ExponentViolation("disc.t_end", "t_end >= 0", disc.t_end)
    if not disc.newton_tol > 0:
        raise ExponentViolation("disc.newton_tol", "newton_tol > 0", disc.newton_tol)
    if isinstance(disc.newton_max_iter, bool) or not isinstance(disc.newton_max_iter, int) \
            or disc.newton_max_iter < 1:
        raise ExponentViolation("disc.newton_max_iter", "integer >= 1", disc.newton_max_iter)
    if disc.mobility_averaging not in AVERAGINGS:
        raise ExponentViolation("disc.mobility_averaging", f"one of {AVERAGINGS}",
                                disc.mobility_averaging)

    return ValidatedConfig(model, reg, disc)


# ---------------------------------------------------------------- file format

_SECTIONS = {"model": ModelParams, "reg": RegParams, "disc": DiscParams}


def _fields(cls):
    return {f.name.lower(): f for f in dataclasses.fields(cls)}


def _parse_value(cls, f, raw: str):
    raw = raw.strip()
    name = f"{cls.__name__}.{f.name}"
    if f.name == "mobility_averaging":
        return raw
    if f.name == "kappa" and raw.lower() in ("", "none"):
        return None
    if f.name in ("N", "newton_max_iter"):
        try:
            return int(raw)
        except ValueError:
            raise ExponentViolation(name, "must be an integer literal", raw) from None
    try:
        return float(raw)
    except ValueError:
        raise ExponentViolation(name, "must be a decimal literal", raw) from None


def _format_value(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, float):
        # repr is the shortest string that round-trips to the same double
        return repr(v)
    return str(v)


def parse_sections(sections: dict[str, dict[str, str]]) -> ValidatedConfig:
    parts = {}
    for sec, cls in _SECTIONS.items():
        known = _fields(cls)
        raw = sections.get(sec, {})
        kwargs = {}
        for key, value in raw.items():
            if key != key.lower() or key not in known:
                raise ExponentViolation(f"{sec}.{key}", "unknown key")
            f = known[key]
            kwargs[f.name] = _parse_value(cls, f, value)
        parts[sec] = cls(**kwargs)
    extra = set(sections) - set(_SECTIONS)
    if extra:
        raise ExponentViolation(sorted(extra)[0], "unknown section")
    return validate(parts["model"], parts["reg"], parts["disc"])


def _read_sections(text: str) -> dict[str, dict[str, str]]:
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",),
                                   comment_prefixes=("#", ";"), strict=True)
    cp.optionxform = str  # keep case so uppercase keys can be rejected
    cp.read_string(text)
    return {sec: dict(cp[sec]) for sec in cp.sections()}


def loads(text: str, overrides: Optional[list[str]] = None) -> ValidatedConfig:
    """Parse config text, apply ``section.key=value`` overrides, validate."""
    sections = _read_sections(text)
    for item in overrides or ():
        key, sep, value = item.partition("=")
        sec, dot, name = key.strip().partition(".")
        if not sep or not dot:
            raise ExponentViolation(item, "override must look like section.key=value")
        sections.setdefault(sec, {})[name] = value
    return parse_sections(sections)


def load(path, overrides=None) -> ValidatedConfig:
    return loads(Path(path).read_text(), overrides)


def dumps(cfg: ValidatedConfig) -> str:
    lines = []
    for sec in _SECTIONS:
        obj = getattr(cfg, sec)
        lines.append(f"[{sec}]")
        for f in dataclasses.fields(obj):
            lines.append(f"{f.name.lower()} = {_format_value(getattr(obj, f.name))}")
        lines.append("")
    return "\n".join(lines)


def config_hash(cfg: ValidatedConfig, extra: str = "") -> str:
    """SHA-256 of the canonical text form (plus optional run extras)."""
    return hashlib.sha256((dumps(cfg) + extra).encode()).hexdigest()


def default_config(**sections) -> ValidatedConfig:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BetaZeroWarning)
        return validate(sections.get("model", ModelParams()),
                        sections.get("reg", RegParams()),
                        sections.get("disc", DiscParams()))

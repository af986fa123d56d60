"""INI run configuration with per-case defaults.

Sections and keys (keys are case sensitive)::

    [model]   a, b | tau_q, tau_theta, k_cond, n ; kappa1, kappa2, beta, rho, c_T
    [domain]  type = rectangle | interval | discs ; L1, L2 | L | R0, R
    [sweep]   decade_min, decade_max, per_decade, K, h, shifted, workers, refine_check
    [evolve]  preset, dt, T, modes, horizon, refine_check
    [fit]     decades, tail_decades
    [output]  dir, svg
    [linalg]  tol, maxiter, block

Unknown sections or keys are errors.  Case 1 is the modal plate (rectangle or
interval), Case 2 the radial transmission plate (concentric discs).
"""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, replace
from fractions import Fraction

from .model import (ConcentricDiscs, Interval, PhaseLagModel, Rectangle, ValidationError,
                    taylor_coefficients, validate)


class ConfigError(ValueError):
    pass


CASE1_MODEL = PhaseLagModel(a=(1.0, 0.5), b=(1.0, 0.25), kappa1=1.0, beta=1.0)
CASE2_MODEL = PhaseLagModel(a=(1.0, 0.5), b=(1.0, 0.25), kappa1=1.0, kappa2=2.0, beta=0.5)
CASE1_DOMAIN = Rectangle(1.0, 1.0)
CASE2_DOMAIN = ConcentricDiscs(0.5, 1.0)


def preset(case: int):
    """``(model, domain)`` of a named case."""
    if case == 1:
        return CASE1_MODEL, CASE1_DOMAIN
    if case == 2:
        return CASE2_MODEL, CASE2_DOMAIN
    raise ConfigError(f"case must be 1 or 2, got {case!r}")


@dataclass(frozen=True)
class SweepConfig:
    decade_min: float = 0.0
    decade_max: float = 6.0
    per_decade: int = 20
    K: int = 200
    h: float = 1 / 64
    shifted: bool = True
    workers: int = 1
    refine_check: bool = True


@dataclass(frozen=True)
class EvolveConfig:
    preset: str = "plate"
    dt: float = 1e-3
    T: float = 1.0
    modes: int = 4
    horizon: float = 10.0
    refine_check: bool = True


@dataclass(frozen=True)
class FitConfig:
    decades: float = 3.0
    tail_decades: float = 1.0


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "out"
    svg: bool = True


@dataclass(frozen=True)
class LinalgConfig:
    tol: float = 1e-12
    maxiter: int = 500
    block: int = 8


@dataclass(frozen=True)
class RunConfig:
    case: int
    model: PhaseLagModel
    domain: object
    sweep: SweepConfig = SweepConfig()
    evolve: EvolveConfig = EvolveConfig()
    fit: FitConfig = FitConfig()
    output: OutputConfig = OutputConfig()
    linalg: LinalgConfig = LinalgConfig()
    paper_literal: bool = False
    seed: int = 0

    def echo(self) -> dict:
        """Plain-dict view with every default resolved (for the run report)."""
        d = {k: asdict(getattr(self, k)) for k in ("sweep", "evolve", "fit", "output", "linalg")}
        d["model"] = asdict(self.model)
        d["domain"] = {"type": type(self.domain).__name__, **asdict(self.domain)}
        d.update(case=self.case, paper_literal_generator=self.paper_literal, seed=self.seed)
        return d


_MODEL_KEYS = {"a", "b", "kappa1", "kappa2", "beta", "rho", "c_T", "tau_q", "tau_theta", "k_cond", "n"}
_DOMAIN_KEYS = {"type", "L1", "L2", "L", "R0", "R"}
_SECTIONS = {"model": _MODEL_KEYS, "domain": _DOMAIN_KEYS, "sweep": SweepConfig,
             "evolve": EvolveConfig, "fit": FitConfig, "output": OutputConfig,
             "linalg": LinalgConfig}
_DOMAIN_TYPES = {"rectangle": Rectangle, "interval": Interval, "discs": ConcentricDiscs}


def _number(section: str, key: str, raw: str) -> float:
    try:
        return float(Fraction(raw.strip()))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"[{section}] {key}: not a number: {raw!r}") from None


def _list(section: str, key: str, raw: str) -> tuple[float, ...]:
    items = [s for s in raw.replace(",", " ").split() if s]
    if not items:
        raise ConfigError(f"[{section}] {key}: empty list")
    return tuple(_number(section, key, s) for s in items)


def _bool(section: str, key: str, raw: str) -> bool:
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"[{section}] {key}: not a boolean: {raw!r}")


def _typed(section: str, cls, values: dict):
    defaults = cls()
    out = {}
    for key, raw in values.items():
        current = getattr(defaults, key)
        if isinstance(current, bool):
            out[key] = _bool(section, key, raw)
        elif isinstance(current, int):
            v = _number(section, key, raw)
            if v != int(v):
                raise ConfigError(f"[{section}] {key}: expected an integer, got {raw!r}")
            out[key] = int(v)
        elif isinstance(current, float):
            out[key] = _number(section, key, raw)
        else:
            out[key] = raw.strip()
    return out


def read_ini(path: str | None) -> dict[str, dict[str, str]]:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from None
    raw = {s: dict(parser.items(s)) for s in parser.sections()}
    for sec, items in raw.items():
        if sec not in _SECTIONS:
            raise ConfigError(f"unknown section [{sec}]")
        allowed = _SECTIONS[sec]
        if not isinstance(allowed, set):
            allowed = set(allowed.__dataclass_fields__)
        for key in items:
            if key not in allowed:
                raise ConfigError(f"unknown key {key!r} in [{sec}]")
    return raw


def _domain(raw: dict[str, str], fallback):
    if not raw:
        return fallback
    kind = raw.get("type")
    if kind is None:
        kind = {Rectangle: "rectangle", Interval: "interval", ConcentricDiscs: "discs"}[type(fallback)]
    if kind not in _DOMAIN_TYPES:
        raise ConfigError(f"[domain] type must be one of {sorted(_DOMAIN_TYPES)}, got {kind!r}")
    cls = _DOMAIN_TYPES[kind]
    fields = list(cls.__dataclass_fields__)
    extra = set(raw) - set(fields) - {"type"}
    if extra:
        raise ConfigError(f"[domain] keys {sorted(extra)} do not apply to type {kind}")
    base = fallback if isinstance(fallback, cls) else None
    vals = {}
    for f in fields:
        if f in raw:
            vals[f] = _number("domain", f, raw[f])
        elif base is not None:
            vals[f] = getattr(base, f)
        else:
            raise ConfigError(f"[domain] missing key {f!r} for type {kind}")
    return cls(**vals)


def _model(raw: dict[str, str], fallback: PhaseLagModel) -> PhaseLagModel:
    m = fallback
    taylor = {"tau_q", "tau_theta", "k_cond", "n"} & set(raw)
    if taylor:
        if {"a", "b"} & set(raw):
            raise ConfigError("[model] give either a/b or tau_q/tau_theta/k_cond/n, not both")
        missing = {"tau_q", "tau_theta", "k_cond", "n"} - taylor
        if missing:
            raise ConfigError(f"[model] missing {sorted(missing)}")
        n = _number("model", "n", raw["n"])
        try:
            a, b = taylor_coefficients(_number("model", "tau_q", raw["tau_q"]),
                                       _number("model", "tau_theta", raw["tau_theta"]),
                                       _number("model", "k_cond", raw["k_cond"]), n)
        except ValueError as exc:
            raise ConfigError(f"[model] {exc}") from None
        m = replace(m, a=a, b=b)
    for key in ("a", "b"):
        if key in raw:
            m = replace(m, **{key: _list("model", key, raw[key])})
    for key in ("kappa1", "kappa2", "beta", "rho", "c_T"):
        if key in raw:
            m = replace(m, **{key: _number("model", key, raw[key])})
    return m


def load(path: str | None = None, *, case: int | None = None, out: str | None = None,
         seed: int | None = None, paper_literal: bool = False) -> RunConfig:
    """Parse ``path`` (optional) and apply command-line overrides.

    Raises ``ConfigError`` for malformed input and ``ValidationError`` for
    model/domain invariants.
    """
    raw = read_ini(path)
    dom_raw = raw.get("domain", {})
    if case is None:
        case = 2 if dom_raw.get("type") == "discs" else 1
    model, domain = preset(case)
    domain = _domain(dom_raw, domain)
    if (case == 2) != isinstance(domain, ConcentricDiscs):
        raise ConfigError(f"case {case} does not match domain type {type(domain).__name__}")
    model = _model(raw.get("model", {}), model)
    validate(model, domain)

    sections = {}
    for name, cls in (("sweep", SweepConfig), ("evolve", EvolveConfig), ("fit", FitConfig),
                      ("output", OutputConfig), ("linalg", LinalgConfig)):
        sections[name] = cls(**_typed(name, cls, raw.get(name, {})))
    if out is not None:
        sections["output"] = replace(sections["output"], dir=out)
    cfg = RunConfig(case=case, model=model, domain=domain, paper_literal=paper_literal,
                    seed=0 if seed is None else seed, **sections)
    _check_sections(cfg)
    return cfg


def _check_sections(cfg: RunConfig) -> None:
    s, e, f = cfg.sweep, cfg.evolve, cfg.fit
    problems = []
    if s.decade_max <= s.decade_min:
        problems.append("[sweep] decade_max must exceed decade_min")
    if s.per_decade < 1 or s.K < 1 or s.workers < 1:
        problems.append("[sweep] per_decade, K and workers must be >= 1")
    if not s.h > 0:
        problems.append("[sweep] h must be > 0")
    if not (e.dt > 0 and e.T > 0 and e.horizon > 0) or e.modes < 1:
        problems.append("[evolve] dt, T, horizon must be > 0 and modes >= 1")
    if e.preset not in ("plate", "thermal", "random"):
        problems.append(f"[evolve] preset must be plate, thermal or random, got {e.preset!r}")
    if not (f.decades > 0 and f.tail_decades > 0):
        problems.append("[fit] decades and tail_decades must be > 0")
    if problems:
        raise ConfigError("; ".join(problems))


__all__ = ["ConfigError", "RunConfig", "SweepConfig", "EvolveConfig", "FitConfig",
           "OutputConfig", "LinalgConfig", "ValidationError", "load", "preset"]

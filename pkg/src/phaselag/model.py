"""Phase-lag thermoelastic model coefficients and domain geometry."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union


class ValidationError(ValueError):
    """One or more model/domain invariants are violated.

    ``diagnostics`` lists every violation, not just the first.
    """

    def __init__(self, diagnostics: list["Diagnostic"]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True)
class Diagnostic:
    field: str
    constraint: str
    actual: object

    def __str__(self):
        return f"{self.constraint} violated ({self.field} = {self.actual!r})"


@dataclass(frozen=True)
class PhaseLagModel:
    a: tuple[float, ...]
    b: tuple[float, ...]
    kappa1: float = 1.0
    kappa2: float = 1.0
    beta: float = 0.0
    rho: float = 1.0
    c_T: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(x) for x in self.a))
        object.__setattr__(self, "b", tuple(float(x) for x in self.b))

    @property
    def n(self) -> int:
        return len(self.a) - 1

    @property
    def decoupled(self) -> bool:
        return self.beta == 0.0


@dataclass(frozen=True)
class Rectangle:
    L1: float
    L2: float


@dataclass(frozen=True)
class Interval:
    L: float


@dataclass(frozen=True)
class ConcentricDiscs:
    R0: float
    R: float


DomainSpec = Union[Rectangle, Interval, ConcentricDiscs]


def taylor_coefficients(tau_q: float, tau_theta: float, k_cond: float, n: int):
    """Taylor-of-delay presets ``a_j = tau_q^j / j!`` and ``b_j = k tau_theta^j / j!``."""
    if int(n) != n or n < 0:
        raise ValueError(f"n must be an integer >= 0, got {n!r}")
    n = int(n)
    if not k_cond > 0:
        raise ValueError(f"k_cond must be > 0, got {k_cond!r}")
    if tau_q < 0 or tau_theta < 0:
        raise ValueError("delay times must be >= 0")
    if n >= 1 and tau_q == 0:
        raise ValueError("degenerate a_n: tau_q = 0 with n >= 1 gives a_n = 0")
    a = [tau_q ** j / math.factorial(j) for j in range(n + 1)]
    b = [k_cond * tau_theta ** j / math.factorial(j) for j in range(n + 1)]
    return a, b


def _check_domain(domain: DomainSpec) -> list[Diagnostic]:
    out = []
    if isinstance(domain, Rectangle):
        for name in ("L1", "L2"):
            v = getattr(domain, name)
            if not v > 0:
                out.append(Diagnostic(f"domain.{name}", f"{name} > 0", v))
    elif isinstance(domain, Interval):
        if not domain.L > 0:
            out.append(Diagnostic("domain.L", "L > 0", domain.L))
    elif isinstance(domain, ConcentricDiscs):
        if not domain.R0 > 0:
            out.append(Diagnostic("domain.R0", "R0 > 0", domain.R0))
        if not domain.R > 0:
            out.append(Diagnostic("domain.R", "R > 0", domain.R))
        if not domain.R0 < domain.R:
            out.append(Diagnostic("domain.R0", "R0 < R", (domain.R0, domain.R)))
    else:
        out.append(Diagnostic("domain", "known domain variant", type(domain).__name__))
    return out


def check(model: PhaseLagModel, domain: DomainSpec | None = None) -> list[Diagnostic]:
    """Return every violated invariant (empty when valid)."""
    out = []
    if len(model.a) == 0 or len(model.b) == 0:
        out.append(Diagnostic("a", "at least one coefficient", len(model.a)))
        return out + ([] if domain is None else _check_domain(domain))
    if len(model.a) != len(model.b):
        out.append(Diagnostic("b", "len(b) == len(a)", (len(model.a), len(model.b))))
    if not model.a[-1] > 0:
        out.append(Diagnostic("a", "a_n > 0", model.a[-1]))
    if not model.b[-1] > 0:
        out.append(Diagnostic("b", "b_n > 0", model.b[-1]))
    for name in ("kappa1", "kappa2"):
        v = getattr(model, name)
        if not v > 0:
            out.append(Diagnostic(name, f"{name} > 0", v))
    # Non-unit rho, c_T must be scaled out by the caller.
    if model.rho != 1.0:
        out.append(Diagnostic("rho", "rho == 1 (nondimensionalize first)", model.rho))
    if model.c_T != 1.0:
        out.append(Diagnostic("c_T", "c_T == 1 (nondimensionalize first)", model.c_T))
    for name in ("a", "b"):
        vals = getattr(model, name)
        if not all(math.isfinite(x) for x in vals):
            out.append(Diagnostic(name, f"{name} finite", vals))
    if not math.isfinite(model.beta):
        out.append(Diagnostic("beta", "beta finite", model.beta))
    if domain is not None:
        out.extend(_check_domain(domain))
    return out


def validate(model: PhaseLagModel, domain: DomainSpec | None = None) -> PhaseLagModel:
    """Return ``model`` unchanged if valid, else raise ``ValidationError`` listing all violations."""
    problems = check(model, domain)
    if problems:
        raise ValidationError(problems)
    return model

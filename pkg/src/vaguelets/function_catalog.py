"""Built-in test functions on R^d with claimed decay and Hölder profiles.

Every evaluator takes an array of points with trailing axis of length ``d``
and returns ``complex128`` values of the leading shape.  The claimed
profiles are upper bounds derived from closed-form derivatives; the
constants that need a one-dimensional supremum are computed once on a fine
radial grid, polished with a bounded scalar search and padded by a relative
margin of 1e-8.  They are claims, and the verifiers treat them as such.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import CatalogLookupError, DomainError, PreconditionError
from .holder_calculus import DecayProfile, HolderGrowthProfile

__all__ = [
    "TestFunction",
    "IntegralEstimate",
    "catalog_get",
    "parse_function_spec",
    "mean_integral",
    "radial_tail_integral",
    "LABELS",
]

_SUP_MARGIN = 1.0 + 1e-8


@dataclass(frozen=True)
class TestFunction:
    """A function ``R^d -> C`` bundled with the bounds claimed for it."""

    __test__ = False  # not a pytest class

    label: str
    d: int
    params: tuple
    evaluator: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    claimed_decay: Optional[DecayProfile] = None
    claimed_growth: Optional[HolderGrowthProfile] = None
    claimed_mean_zero: bool = False
    # |grad f(x)| <= gradient_bound[0] * (1+|x|)^gradient_bound[1]
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)
    gradient_bound: Optional[tuple] = None
    sup_bound: Optional[float] = None
    real_valued: bool = True

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.d:
            raise DomainError(f"{self.label} lives on R^{self.d}, got points of shape {x.shape}")
        return self.evaluator(x)

    @property
    def spec(self) -> str:
        return f"{self.label}({','.join(repr(float(p)) for p in self.params)})"

    def scaled(self, c: float) -> "TestFunction":
        """``c * f`` with every claim rescaled accordingly (``c > 0``)."""
        if not c > 0:
            raise DomainError(f"scale must be positive, got {c}")
        ev = self.evaluator
        grad = self.gradient
        return TestFunction(
            label=self.label,
            d=self.d,
            params=self.params,
            evaluator=lambda x: c * ev(x),
            claimed_decay=None if self.claimed_decay is None else DecayProfile(self.claimed_decay.R, c * self.claimed_decay.C),
            claimed_growth=None
            if self.claimed_growth is None
            else HolderGrowthProfile(self.claimed_growth.alpha, c * self.claimed_growth.D1, self.claimed_growth.M),
            claimed_mean_zero=self.claimed_mean_zero,
            gradient=None if grad is None else (lambda x: c * grad(x)),
            gradient_bound=None if self.gradient_bound is None else (c * self.gradient_bound[0], self.gradient_bound[1]),
            sup_bound=None if self.sup_bound is None else c * self.sup_bound,
            real_valued=self.real_valued,
        )


def _norm(x: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(x * x, axis=-1))


def _radial_sup(h: Callable[[np.ndarray], np.ndarray], r_max: float, n: int = 400_001) -> float:
    """Supremum of a smooth nonnegative function on ``[0, r_max]``."""
    r = np.linspace(0.0, r_max, n)
    vals = h(r)
    i = int(np.argmax(vals))
    best = float(vals[i])
    step = r[1] - r[0]
    lo, hi = max(0.0, r[i] - 2 * step), min(r_max, r[i] + 2 * step)
    if hi > lo:
        res = minimize_scalar(lambda t: -float(h(np.array([t]))[0]), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-14})
        best = max(best, -float(res.fun))
    return best * _SUP_MARGIN


# -- gaussian_second_deriv -----------------------------------------------------

@lru_cache(maxsize=None)
def _gaussian_constants(d: int, R: float):
    decay_C = _radial_sup(lambda r: np.abs(r * r - d) * np.exp(-r * r / 2) * (1 + r) ** R, 60.0)
    grad_C = _radial_sup(lambda r: r * np.abs(2 + d - r * r) * np.exp(-r * r / 2), 40.0)
    return decay_C, grad_C


def _gaussian_second_deriv(d: int, eps: float = 1.0) -> TestFunction:
    R = d + eps
    decay_C, grad_C = _gaussian_constants(d, R)

    def f(x):
        r2 = np.sum(x * x, axis=-1)
        return ((r2 - d) * np.exp(-r2 / 2)).astype(np.complex128)

    def grad(x):
        r2 = np.sum(x * x, axis=-1, keepdims=True)
        return (x * (2 + d - r2) * np.exp(-r2 / 2)).astype(np.complex128)

    return TestFunction(
        label="gaussian_second_deriv",
        d=d,
        params=(eps,),
        evaluator=f,
        claimed_decay=DecayProfile(R=R, C=decay_C),
        claimed_growth=HolderGrowthProfile(alpha=1.0, D1=grad_C, M=0.0),
        claimed_mean_zero=True,
        gradient=grad,
        gradient_bound=(grad_C, 0.0),
        sup_bound=float(d),
    )


# -- oscillating_decay ---------------------------------------------------------

def _oscillating_decay(d: int, eps: float = 1.0, M: float = 1.0) -> TestFunction:
    # phase |x|^q with q = R + 1 + M puts |grad f| <= (q + R)(1+|x|)^M,
    # and the bound is attained up to a constant at large |x|
    R = d + eps
    q = R + 1 + M

    def f(x):
        r = _norm(x)
        return (np.cos(r**q) * (1 + r) ** (-R)).astype(np.complex128)

    def grad(x):
        r = _norm(x)
        radial = -q * r ** (q - 1) * np.sin(r**q) * (1 + r) ** (-R) - R * np.cos(r**q) * (1 + r) ** (-R - 1)
        with np.errstate(invalid="ignore", divide="ignore"):
            unit = np.where(r[..., None] > 0, x / r[..., None], 0.0)
        return (unit * radial[..., None]).astype(np.complex128)

    return TestFunction(
        label="oscillating_decay",
        d=d,
        params=(eps, M),
        evaluator=f,
        claimed_decay=DecayProfile(R=R, C=1.0),
        claimed_growth=HolderGrowthProfile(alpha=1.0, D1=q + R, M=M),
        claimed_mean_zero=False,
        gradient=grad,
        gradient_bound=(q + R, M),
        sup_bound=1.0,
    )


# -- plain_bump ----------------------------------------------------------------

def _bump_profile(r):
    r = np.asarray(r, dtype=np.float64)
    out = np.zeros_like(r)
    inside = r < 1
    s = 1 - r[inside] ** 2
    out[inside] = np.exp(1 - 1 / s)
    return out


def _bump_slope(r):
    r = np.asarray(r, dtype=np.float64)
    out = np.zeros_like(r)
    inside = r < 1
    ri = r[inside]
    s = 1 - ri**2
    out[inside] = -2 * ri / s**2 * np.exp(1 - 1 / s)
    return out


@lru_cache(maxsize=None)
def _bump_lipschitz() -> float:
    return _radial_sup(lambda r: np.abs(_bump_slope(r)), 1.0)


def _plain_bump(d: int, eps: float = 1.0) -> TestFunction:
    R = d + eps
    e1 = np.zeros(d)
    e1[0] = 1.0
    lip = _bump_lipschitz()

    def f(x):
        return (_bump_profile(_norm(x + e1)) - _bump_profile(_norm(x - e1))).astype(np.complex128)

    def grad(x):
        out = np.zeros(x.shape, dtype=np.complex128)
        for sign in (1.0, -1.0):
            y = x + sign * e1
            r = _norm(y)
            with np.errstate(invalid="ignore", divide="ignore"):
                unit = np.where(r[..., None] > 0, y / r[..., None], 0.0)
            out += sign * unit * _bump_slope(r)[..., None]
        return out

    return TestFunction(
        label="plain_bump",
        d=d,
        params=(eps,),
        evaluator=f,
        # support lies in |x| <= 2 and |f| <= 1
        claimed_decay=DecayProfile(R=R, C=3.0**R),
        claimed_growth=HolderGrowthProfile(alpha=1.0, D1=lip, M=0.0),
        claimed_mean_zero=True,
        gradient=grad,
        gradient_bound=(lip, 0.0),
        sup_bound=1.0,
    )


# -- slow_holder ---------------------------------------------------------------

def _slow_holder(d: int, R: Optional[float] = None) -> TestFunction:
    R = float(d + 1) if R is None else R
    # |d/dr| <= (1+r)^-R + R r (1+r)^(-R-1) and max_r R r (1+r)^(-R-1) = (R/(R+1))^(R+1)
    lip = 1.0 + (R / (R + 1)) ** (R + 1)

    def f(x):
        r = _norm(x)
        return (np.sin(r) * (1 + r) ** (-R)).astype(np.complex128)

    def grad(x):
        r = _norm(x)
        radial = np.cos(r) * (1 + r) ** (-R) - R * np.sin(r) * (1 + r) ** (-R - 1)
        with np.errstate(invalid="ignore", divide="ignore"):
            unit = np.where(r[..., None] > 0, x / r[..., None], 0.0)
        return (unit * radial[..., None]).astype(np.complex128)

    return TestFunction(
        label="slow_holder",
        d=d,
        params=(R,),
        evaluator=f,
        claimed_decay=DecayProfile(R=R, C=1.0),
        claimed_growth=HolderGrowthProfile(alpha=1.0, D1=lip, M=0.0),
        claimed_mean_zero=False,
        gradient=grad,
        gradient_bound=(lip, 0.0),
        sup_bound=1.0,
    )


_BUILDERS = {
    "gaussian_second_deriv": (_gaussian_second_deriv, 1),
    "oscillating_decay": (_oscillating_decay, 2),
    "plain_bump": (_plain_bump, 1),
    "slow_holder": (_slow_holder, 1),
}
LABELS = tuple(_BUILDERS)


@lru_cache(maxsize=256)
def _cached_get(label: str, d: int, params: tuple) -> TestFunction:
    builder, _ = _BUILDERS[label]
    return builder(d, *params)


def catalog_get(label: str, d: int, parameters=()) -> TestFunction:
    """Look up a built-in function.

    ================= =============== ======================================
    label             parameters      function
    ================= =============== ======================================
    gaussian_second_deriv  (eps=1)    Laplacian of exp(-|x|^2/2)
    oscillating_decay (eps=1, M=1)    cos(|x|^(d+eps+1+M)) (1+|x|)^(-d-eps)
    plain_bump        (eps=1)         bump(x+e1) - bump(x-e1)
    slow_holder       (R=d+1)         sin(|x|) (1+|x|)^(-R)
    ================= =============== ======================================

    ``eps`` sets the claimed decay rate ``d + eps``.
    """
    if label not in _BUILDERS:
        raise CatalogLookupError(f"unknown function {label!r}; known: {', '.join(LABELS)}")
    if int(d) != d or d < 1:
        raise DomainError(f"dimension must be a positive integer, got {d}")
    _, max_params = _BUILDERS[label]
    params = tuple(float(p) for p in parameters)
    if len(params) > max_params:
        raise DomainError(f"{label} takes at most {max_params} parameter(s), got {len(params)}")
    if any(not math.isfinite(p) or p <= 0 for p in params[:1]):
        raise DomainError(f"{label}: first parameter must be positive and finite, got {params[0]}")
    if len(params) > 1 and not params[1] >= 0:
        raise DomainError(f"{label}: growth exponent must be >= 0, got {params[1]}")
    return _cached_get(label, int(d), params)


_SPEC_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*)\))?\s*$")


def parse_function_spec(text: str, d: int) -> TestFunction:
    """Resolve a CLI string such as ``"slow_holder(2)"`` or ``"plain_bump"``."""
    m = _SPEC_RE.match(text)
    if not m:
        raise DomainError(f"cannot parse function spec {text!r}")
    label, args = m.group(1), m.group(2)
    params = []
    if args and args.strip():
        try:
            params = [float(a) for a in args.split(",")]
        except ValueError as exc:
            raise DomainError(f"bad parameter list in {text!r}") from exc
    return catalog_get(label, d, params)


# -- integration ---------------------------------------------------------------

@dataclass(frozen=True)
class IntegralEstimate:
    """Quadrature value plus an analytic bound on the truncated tail."""

    value: complex
    tail_bound: float


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere in R^d."""
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


def radial_tail_integral(d: int, exponent: float, s: float) -> float:
    """Upper bound for ``int_{|y|>s} (1+|y|)^(-exponent) dy`` (needs exponent > d).

    Uses ``r^(d-1) <= (1+r)^(d-1)`` to get the closed form
    ``area(S^(d-1)) (1+s)^(d-exponent) / (exponent-d)``.
    """
    if not exponent > d:
        raise PreconditionError(f"tail integral diverges: exponent {exponent} <= d = {d}")
    s = max(0.0, s)
    return sphere_area(d) * (1 + s) ** (d - exponent) / (exponent - d)


def mean_integral(f: TestFunction, quadrature) -> IntegralEstimate:
    """Midpoint-rule estimate of ``int f`` over ``[-T, T]^d`` with a tail bound."""
    from .vaguelet_engine import integrate  # avoid an import cycle

    if f.claimed_decay is None:
        raise PreconditionError(f"{f.label} has no decay profile; its integral tail is uncontrolled")
    if not f.claimed_decay.R > f.d:
        raise PreconditionError(f"{f.label}: need decay rate R > d for an integrable tail")
    value = integrate(lambda x: f(x), f.d, quadrature)
    tail = f.claimed_decay.C * radial_tail_integral(f.d, f.claimed_decay.R, quadrature.T)
    return IntegralEstimate(value=value, tail_bound=tail)

"""Dyadic cubes, L2-normalized dilates of a mother function, and quadrature.

A cube ``Q = 2^-j (k + [0,1)^d)`` has center ``x_Q = (k + 1/2) 2^-j`` and
side ``2^-j``; the vaguelet attached to it is
``g_Q(x) = mother((x - x_Q) / side) / |Q|^(1/2)``.

Integrals use the tensor-product midpoint rule on ``[-T, T]^d``.  Nodes sit
at half-integer multiples of ``h``, so the grid is symmetric about the
origin and invariant under shifts by multiples of ``h``.  The flattened
node range is cut into tiles of fixed size; each tile is summed on its own
and the tile sums are added in order, which keeps results bit-identical for
any thread count.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from ._parallel import ordered_map
from .errors import DomainError, PreconditionError
from .function_catalog import IntegralEstimate, TestFunction, radial_tail_integral

__all__ = [
    "DyadicCube",
    "Vaguelet",
    "QuadratureSpec",
    "default_quadrature",
    "cube_range",
    "cubes_in_box",
    "integrate",
    "iter_tiles",
    "vaguelet_eval",
    "inner_product",
    "verify_mean_zero",
    "l2_tail",
    "TILE_SIZE",
]

TILE_SIZE = 8192


@dataclass(frozen=True, order=True)
class DyadicCube:
    j: int
    k: tuple

    def __post_init__(self):
        object.__setattr__(self, "j", int(self.j))
        object.__setattr__(self, "k", tuple(int(v) for v in np.atleast_1d(self.k)))

    @property
    def d(self) -> int:
        return len(self.k)

    @property
    def side(self) -> float:
        return 2.0 ** (-self.j)

    @property
    def center(self) -> np.ndarray:
        return (np.asarray(self.k, dtype=np.float64) + 0.5) * self.side

    @property
    def measure(self) -> float:
        return 2.0 ** (-self.j * self.d)

    def to_json(self):
        return [self.j, list(self.k)]

    @classmethod
    def from_json(cls, item):
        return cls(item[0], tuple(item[1]))


@dataclass(frozen=True)
class Vaguelet:
    mother: TestFunction
    cube: DyadicCube

    def __post_init__(self):
        if self.cube.d != self.mother.d:
            raise DomainError(f"cube dimension {self.cube.d} != mother dimension {self.mother.d}")

    def __call__(self, x) -> np.ndarray:
        return vaguelet_eval(self, x)


def vaguelet_eval(v: Vaguelet, x) -> np.ndarray:
    """``mother((x - x_Q) / l(Q)) * |Q|^(-1/2)``."""
    x = np.asarray(x, dtype=np.float64)
    cube = v.cube
    return v.mother((x - cube.center) / cube.side) * cube.measure ** -0.5


@dataclass(frozen=True)
class QuadratureSpec:
    """Midpoint rule with spacing ``h`` over ``[-T, T]^d``.

    ``T`` is rounded up to a whole number of cells on each side.
    """

    T: float
    h: float

    def __post_init__(self):
        if not self.T > 0 or not self.h > 0:
            raise DomainError(f"quadrature needs T > 0 and h > 0, got T={self.T}, h={self.h}")
        n_half = math.ceil(self.T / self.h - 1e-9)
        object.__setattr__(self, "T", n_half * self.h)

    @property
    def n_per_axis(self) -> int:
        return 2 * round(self.T / self.h)

    def nodes_1d(self) -> np.ndarray:
        n = self.n_per_axis
        return (np.arange(n, dtype=np.float64) - (n // 2) + 0.5) * self.h

    def refined(self, factor: int) -> "QuadratureSpec":
        return QuadratureSpec(T=self.T, h=self.h / factor)

    def to_json(self):
        return {"rule": "midpoint", "T": self.T, "h": self.h}


def default_quadrature(cubes: Sequence[DyadicCube]) -> QuadratureSpec:
    """``h = 2^(-j_max-4)``, ``T = 64 * 2^(-j_min)``."""
    if not cubes:
        raise DomainError("empty cube list")
    js = [c.j for c in cubes]
    return QuadratureSpec(T=64.0 * 2.0 ** (-min(js)), h=2.0 ** (-max(js) - 4))


def cube_range(j_min: int, j_max: int, K: int, d: int) -> list:
    """All cubes with ``j_min <= j <= j_max`` and ``k`` in ``[-K, K]^d``."""
    if j_max < j_min:
        raise DomainError(f"empty generation range [{j_min}, {j_max}]")
    if K < 0:
        raise DomainError(f"K must be >= 0, got {K}")
    ks = list(itertools.product(range(-K, K + 1), repeat=d))
    return [DyadicCube(j, k) for j in range(j_min, j_max + 1) for k in ks]


def cubes_in_box(j_min: int, j_max: int, lo: float, hi: float, d: int) -> list:
    """All cubes of generations ``j_min..j_max`` contained in ``[lo, hi)^d``."""
    out = []
    for j in range(j_min, j_max + 1):
        scale = 2.0**j
        k_lo, k_hi = math.ceil(lo * scale), math.floor(hi * scale) - 1
        ks = range(k_lo, k_hi + 1)
        out.extend(DyadicCube(j, k) for k in itertools.product(ks, repeat=d))
    return out


def iter_tiles(d: int, q: QuadratureSpec, tile_size: int = TILE_SIZE):
    """Yield ``(start, stop)`` flat-index ranges of the tensor grid."""
    total = q.n_per_axis**d
    for start in range(0, total, tile_size):
        yield start, min(start + tile_size, total)


def tile_nodes(d: int, q: QuadratureSpec, start: int, stop: int) -> np.ndarray:
    n = q.n_per_axis
    axis = q.nodes_1d()
    idx = np.unravel_index(np.arange(start, stop), (n,) * d)
    return np.stack([axis[i] for i in idx], axis=-1)


def integrate(func: Callable[[np.ndarray], np.ndarray], d: int, q: QuadratureSpec, threads: int = 1) -> complex:
    """Midpoint-rule integral of ``func`` over ``[-T, T]^d``."""
    weight = q.h**d

    def tile_sum(bounds):
        return np.sum(func(tile_nodes(d, q, *bounds)))

    partial = ordered_map(tile_sum, iter_tiles(d, q), threads)
    return complex(np.sum(np.asarray(partial, dtype=np.complex128)) * weight)


def _require_decay(mother: TestFunction):
    decay = mother.claimed_decay
    if decay is None:
        raise PreconditionError(f"{mother.label} has no decay profile; quadrature tail is uncontrolled")
    if not decay.R > mother.d:
        raise PreconditionError(f"{mother.label}: need decay rate R > d, got R={decay.R}, d={mother.d}")
    return decay


def _outside_radius(cube: DyadicCube, q: QuadratureSpec) -> float:
    # outside [-T,T]^d means |x|_inf > T, hence |x - x_Q| > T - |x_Q|_inf
    reach = q.T - float(np.max(np.abs(cube.center)))
    return max(0.0, reach / cube.side)


def l2_tail(v: Vaguelet, q: QuadratureSpec) -> float:
    """Bound on ``int |g_Q|^2`` outside the quadrature box."""
    decay = _require_decay(v.mother)
    s = _outside_radius(v.cube, q)
    return decay.C**2 * radial_tail_integral(v.mother.d, 2 * decay.R, s)


def inner_product(u: Vaguelet, v: Vaguelet, q: QuadratureSpec, threads: int = 1) -> IntegralEstimate:
    """``int u conj(v)`` with the tail bounded by Cauchy-Schwarz on the two L2 tails."""
    tail = math.sqrt(l2_tail(u, q) * l2_tail(v, q))
    value = integrate(lambda x: u(x) * np.conj(v(x)), u.mother.d, q, threads)
    return IntegralEstimate(value=value, tail_bound=tail)


def verify_mean_zero(v: Vaguelet, q: QuadratureSpec, threads: int = 1) -> IntegralEstimate:
    """``int g_Q``; equals ``|Q|^(1/2) int mother`` by change of variables."""
    decay = _require_decay(v.mother)
    s = _outside_radius(v.cube, q)
    tail = v.cube.measure**0.5 * decay.C * radial_tail_integral(v.mother.d, decay.R, s)
    value = integrate(v, v.mother.d, q, threads)
    return IntegralEstimate(value=value, tail_bound=tail)


def evaluate_family(mother: TestFunction, cubes: Sequence[DyadicCube], nodes: np.ndarray) -> np.ndarray:
    """Matrix ``V[i, n] = g_{Q_i}(node_n)``."""
    centers = np.array([c.center for c in cubes])
    sides = np.array([c.side for c in cubes])
    norms = np.array([c.measure ** -0.5 for c in cubes])
    y = (nodes[None, :, :] - centers[:, None, :]) / sides[:, None, None]
    vals = mother(y) * norms[:, None]
    return np.ascontiguousarray(vals.real if mother.real_valued else vals)

"""Gram matrices of finite vaguelet families and their Bessel constants.

For a finite family the smallest ``A`` with
``int |sum lambda_Q g_Q|^2 <= A sum |lambda_Q|^2`` is the top eigenvalue of
the Gram matrix ``G[i, j] = <g_Qi, g_Qj>``, estimated here by power
iteration.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from ._parallel import ordered_map
from .errors import ConvergenceError, DomainError, PreconditionError
from .function_catalog import TestFunction, mean_integral
from .modulus_verifier import PairSamplingPlan, check_decay
from .vaguelet_engine import (
    DyadicCube,
    QuadratureSpec,
    Vaguelet,
    default_quadrature,
    evaluate_family,
    iter_tiles,
    l2_tail,
    tile_nodes,
)

__all__ = [
    "GramMatrix",
    "BesselEstimate",
    "StressReport",
    "GrowthRow",
    "verify_mother",
    "assemble_gram",
    "bessel_constant",
    "stress_test_bessel",
    "family_growth_study",
    "growth_schedule",
    "study_to_csv",
    "save_gram",
    "load_gram",
]

MEAN_ZERO_TOL = 1e-6


@dataclass
class GramMatrix:
    cubes: list
    entries: np.ndarray
    tail_bounds: np.ndarray
    quadrature: QuadratureSpec
    asymmetry: float
    mother_spec: str = ""

    @property
    def tail_bound_max(self) -> float:
        return float(np.max(self.tail_bounds))

    def __len__(self):
        return len(self.cubes)

    def submatrix(self, index: Sequence[int]) -> "GramMatrix":
        ix = np.ix_(index, index)
        return GramMatrix(
            cubes=[self.cubes[i] for i in index],
            entries=self.entries[ix],
            tail_bounds=self.tail_bounds[ix],
            quadrature=self.quadrature,
            asymmetry=self.asymmetry,
            mother_spec=self.mother_spec,
        )


@dataclass
class BesselEstimate:
    A_emp: float
    iterations: int
    tail_bound: float
    vector: np.ndarray = field(repr=False)


def _mother_check_quadrature(d: int) -> QuadratureSpec:
    if d == 1:
        return QuadratureSpec(T=64.0, h=1 / 16)
    if d == 2:
        return QuadratureSpec(T=32.0, h=1 / 16)
    return QuadratureSpec(T=8.0, h=1 / 8)


@lru_cache(maxsize=64)
def verify_mother(mother: TestFunction) -> dict:
    """Check a mother's claims before it is used to build a family.

    Samples the decay claim (zero violations required) and integrates the
    mother (``|int| <= 1e-6 + tail`` required).
    """
    decay = mother.claimed_decay
    if decay is None or not decay.R > mother.d:
        raise PreconditionError(f"{mother.spec}: need a claimed decay profile with R > d")
    if not mother.claimed_mean_zero:
        raise PreconditionError(f"{mother.spec} does not claim mean zero")
    report = check_decay(mother, decay, PairSamplingPlan(d=mother.d, pair_count=20_000, T=100.0, radial="log"))
    if not report.ok:
        raise PreconditionError(
            f"{mother.spec}: decay claim fails at {report.worst_witness[0]} (ratio {report.worst_ratio})"
        )
    integral = mean_integral(mother, _mother_check_quadrature(mother.d))
    if abs(integral.value) > MEAN_ZERO_TOL + integral.tail_bound:
        raise PreconditionError(f"{mother.spec}: integral {integral.value} is not zero")
    return {"decay_worst_ratio": report.worst_ratio, "integral": integral.value, "integral_tail": integral.tail_bound}


def _gram_raw(mother, cubes, q, threads):
    d = mother.d
    weight = q.h**d

    def tile(bounds):
        V = evaluate_family(mother, cubes, tile_nodes(d, q, *bounds))
        return V @ V.conj().T

    # BLAS stays single-threaded so a tile product never depends on the pool size
    with threadpool_limits(limits=1):
        partial = ordered_map(tile, iter_tiles(d, q), threads)
    G = partial[0].copy()
    for P in partial[1:]:
        G += P
    return G * weight


def assemble_gram(
    mother: TestFunction,
    cubes: Sequence[DyadicCube],
    q: Optional[QuadratureSpec] = None,
    threads: int = 1,
    verify: bool = True,
) -> GramMatrix:
    """Gram matrix of ``{g_Q}`` for the given cubes, Hermitian-symmetrized."""
    cubes = list(cubes)
    if not cubes:
        raise DomainError("empty cube family")
    if len(set(cubes)) != len(cubes):
        raise DomainError("duplicate cubes in family")
    if verify:
        verify_mother(mother)
    q = default_quadrature(cubes) if q is None else q
    raw = _gram_raw(mother, cubes, q, threads)
    asym = float(np.max(np.abs(raw - raw.conj().T))) if raw.size else 0.0
    entries = ((raw + raw.conj().T) / 2).astype(np.complex128)
    tails = np.sqrt(np.array([l2_tail(Vaguelet(mother, c), q) for c in cubes]))
    return GramMatrix(
        cubes=cubes,
        entries=entries,
        tail_bounds=np.outer(tails, tails),
        quadrature=q,
        asymmetry=asym,
        mother_spec=mother.spec,
    )


def _start_vector(g, n):
    # An all-ones start is orthogonal to the top eigenvector whenever the
    # family is symmetric under a reflection and the top mode is odd.  Each
    # cube gets its own seeded weight instead, so permuting the family
    # permutes the start vector.
    if isinstance(g, GramMatrix):
        weights = [
            np.random.default_rng([c.j % 2**32, *(k % 2**32 for k in c.k)]).random() for c in g.cubes
        ]
    else:
        weights = np.random.default_rng(n).random(n)
    v = 0.5 + np.asarray(weights, dtype=np.float64)
    return (v / np.linalg.norm(v)).astype(np.complex128)


def bessel_constant(g, tol: float = 1e-10, max_iter: int = 10_000) -> BesselEstimate:
    """Top eigenvalue of a Hermitian PSD matrix by power iteration.

    With ``delta`` the latest change of the Rayleigh quotient and ``q`` the
    ratio of the last two changes, the remaining error is about
    ``delta q / (1 - q)``.  Iteration stops once both ``delta`` and that
    estimate fall below ``tol`` times the quotient; on clustered spectra
    the plain ``delta`` test alone stops far too early.
    """
    if isinstance(g, GramMatrix):
        G, tail = g.entries, g.tail_bound_max
    else:
        G, tail = np.asarray(g), 0.0
    n = G.shape[0]
    if G.shape != (n, n):
        raise DomainError(f"expected a square matrix, got shape {G.shape}")
    v = _start_vector(g, n)
    if np.iscomplexobj(G) and not np.any(G.imag):
        G = np.ascontiguousarray(G.real)
    if not np.iscomplexobj(G):
        v = v.real.copy()

    w = G @ v
    theta = float(np.vdot(v, w).real)
    prev_delta = None
    for it in range(1, max_iter + 1):
        norm = np.linalg.norm(w)
        if norm == 0:
            return BesselEstimate(A_emp=0.0, iterations=it, tail_bound=tail, vector=v.astype(np.complex128))
        v = w / norm
        w = G @ v
        new = float(np.vdot(v, w).real)
        delta = abs(new - theta)
        theta = new
        if delta == 0:
            return BesselEstimate(A_emp=new, iterations=it, tail_bound=tail, vector=v.astype(np.complex128))
        if prev_delta is not None and delta <= tol * abs(new):
            rate = delta / prev_delta
            if rate < 1 and delta * rate / (1 - rate) <= tol * abs(new):
                return BesselEstimate(A_emp=new, iterations=it, tail_bound=tail, vector=v.astype(np.complex128))
        prev_delta = delta
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} steps", last_estimate=theta, iterations=max_iter
    )


@dataclass
class StressReport:
    trials: int
    A_emp: float
    iterations: int
    max_ratio: float
    max_consistency_error: float
    one_hot_error: float
    top_vector_ratio: float
    tail_bound: float
    asymmetry: float
    ratio_tol: float
    consistency_tol: float
    seed: int

    @property
    def bound_ok(self) -> bool:
        return self.max_ratio <= self.A_emp * (1 + self.ratio_tol)

    @property
    def consistency_ok(self) -> bool:
        return self.max_consistency_error <= self.consistency_tol

    @property
    def passed(self) -> bool:
        return self.bound_ok and self.consistency_ok

    def to_json(self):
        return {
            "trials": self.trials,
            "A_emp": self.A_emp,
            "iterations": self.iterations,
            "max_ratio": self.max_ratio,
            "max_consistency_error": self.max_consistency_error,
            "one_hot_error": self.one_hot_error,
            "top_vector_ratio": self.top_vector_ratio,
            "tail_bound": self.tail_bound,
            "asymmetry": self.asymmetry,
            "ratio_tol": self.ratio_tol,
            "consistency_tol": self.consistency_tol,
            "seed": self.seed,
            "passed": self.passed,
        }


def direct_energy(mother, cubes, coeffs, q, threads=1):
    """``int |sum_i coeffs[t, i] g_Qi|^2`` for each row ``t``, by direct quadrature."""
    d = mother.d
    coeffs = np.atleast_2d(coeffs)

    def tile(bounds):
        S = coeffs @ evaluate_family(mother, cubes, tile_nodes(d, q, *bounds))
        return np.sum((S * S.conj()).real, axis=1)

    with threadpool_limits(limits=1):
        partial = ordered_map(tile, iter_tiles(d, q), threads)
    return np.sum(np.asarray(partial), axis=0) * q.h**d


def _random_coefficients(seed, trials, n):
    rng = np.random.default_rng(seed)
    return (rng.standard_normal((trials, n)) + 1j * rng.standard_normal((trials, n))) / math.sqrt(2)


def stress_test_bessel(
    mother: TestFunction,
    cubes: Sequence[DyadicCube],
    q: Optional[QuadratureSpec] = None,
    trials: int = 100,
    seed: int = 0,
    threads: int = 1,
    refine: int = 1,
    ratio_tol: float = 1e-6,
    consistency_tol: float = 1e-5,
    gram: Optional[GramMatrix] = None,
) -> StressReport:
    """Compare both sides of the Bessel inequality on random coefficients.

    The left side is computed as the quadratic form ``lambda* G lambda`` and
    independently by integrating ``|sum lambda_Q g_Q|^2`` on a grid refined
    by ``refine``.  The top power-iteration vector is also scored.
    """
    cubes = list(cubes)
    q = default_quadrature(cubes) if q is None else q
    g = assemble_gram(mother, cubes, q, threads) if gram is None else gram
    est = bessel_constant(g)
    G = g.entries
    n = len(cubes)

    lam = _random_coefficients(seed, trials, n)
    quad_form = np.einsum("ti,ij,tj->t", lam.conj(), G, lam).real
    norms = np.sum(np.abs(lam) ** 2, axis=1)
    direct = direct_energy(mother, cubes, lam, q.refined(refine), threads)
    consistency = np.abs(quad_form - direct) / np.abs(direct)
    ratios = quad_form / norms

    diag = np.real(np.diag(G))
    one_hot = direct_energy(mother, cubes, np.eye(n), q.refined(refine), threads)
    top = est.vector
    top_ratio = float(np.vdot(top, G @ top).real / np.vdot(top, top).real)

    return StressReport(
        trials=trials,
        A_emp=est.A_emp,
        iterations=est.iterations,
        max_ratio=float(np.max(ratios)),
        max_consistency_error=float(np.max(consistency)),
        one_hot_error=float(np.max(np.abs(one_hot - diag))),
        top_vector_ratio=top_ratio,
        tail_bound=g.tail_bound_max,
        asymmetry=g.asymmetry,
        ratio_tol=ratio_tol,
        consistency_tol=consistency_tol,
        seed=seed,
    )


@dataclass
class GrowthRow:
    family_size: int
    A_emp: float
    tail_bound: float
    asymmetry: float
    iterations: int


def growth_schedule(generations, d: int, width: int = 4) -> list:
    """Nested families ``j in [-g, g]``, ``k in [-width 2^g, width 2^g]^d``."""
    from .vaguelet_engine import cube_range

    return [cube_range(-g, g, width * 2**g, d) for g in generations]


def family_growth_study(
    mother: TestFunction,
    schedule: Sequence[Sequence[DyadicCube]],
    q: Optional[QuadratureSpec] = None,
    threads: int = 1,
    tol: float = 1e-10,
    max_iter: int = 200_000,
):
    """Bessel constants along nested families.

    One Gram matrix is assembled for the largest family and each row uses
    its principal submatrix, so the ``A_emp`` column is nondecreasing by
    eigenvalue interlacing.  Returns ``(rows, last_step_relative_increase)``.
    """
    schedule = [list(s) for s in schedule]
    if not schedule:
        raise DomainError("empty schedule")
    for small, big in zip(schedule, schedule[1:]):
        if not set(small) <= set(big) or len(big) < len(small):
            raise DomainError("schedule is not nested and increasing")
    largest = schedule[-1]
    q = default_quadrature(largest) if q is None else q
    g = assemble_gram(mother, largest, q, threads)
    position = {c: i for i, c in enumerate(largest)}

    rows = []
    for family in schedule:
        index = [position[c] for c in family]
        sub = g.submatrix(index)
        est = bessel_constant(sub, tol=tol, max_iter=max_iter)
        rows.append(
            GrowthRow(
                family_size=len(family),
                A_emp=est.A_emp,
                tail_bound=sub.tail_bound_max,
                asymmetry=g.asymmetry,
                iterations=est.iterations,
            )
        )
    if len(rows) > 1:
        last_step = (rows[-1].A_emp - rows[-2].A_emp) / rows[-2].A_emp
    else:
        last_step = 0.0
    return rows, last_step


def study_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["family_size", "A_emp", "tail_bound", "asymmetry"])
    for r in rows:
        writer.writerow([r.family_size, repr(r.A_emp), repr(r.tail_bound), repr(r.asymmetry)])
    return buf.getvalue()


def save_gram(g: GramMatrix, path) -> None:
    """Write entries as little-endian row-major (real, imag) doubles plus ``<path>.json``."""
    path = os.fspath(path)
    np.ascontiguousarray(g.entries, dtype="<c16").tofile(path)
    meta = {
        "n": len(g),
        "dtype": "complex128-le (real, imag) pairs",
        "order": "row-major",
        "mother": g.mother_spec,
        "quadrature": g.quadrature.to_json(),
        "tail_bound_max": g.tail_bound_max,
        "asymmetry": g.asymmetry,
        "cubes": [c.to_json() for c in g.cubes],
    }
    with open(path + ".json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2)


def load_gram(path):
    """Inverse of :func:`save_gram`: returns ``(entries, metadata)``."""
    path = os.fspath(path)
    with open(path + ".json", encoding="utf-8") as fh:
        meta = json.load(fh)
    n = meta["n"]
    entries = np.fromfile(path, dtype="<c16").reshape(n, n)
    meta["cubes"] = [DyadicCube.from_json(c) for c in meta["cubes"]]
    return entries, meta

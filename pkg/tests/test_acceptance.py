"""The eight acceptance criteria, each at its stated tolerance.

Every test records one pass/fail line, printed in the terminal summary
under "acceptance criteria".
"""

import itertools
import json
import math
import time

import numpy as np
import pytest

from vaguelets.bessel_estimator import (
    assemble_gram,
    bessel_constant,
    family_growth_study,
    growth_schedule,
    stress_test_bessel,
)
from vaguelets.cli import main
from vaguelets.function_catalog import LABELS, catalog_get
from vaguelets.holder_calculus import (
    DecayProfile,
    HolderGrowthProfile,
    certify_holder_decay,
    gradient_to_holder,
    lemma1_rescale,
    theorem2_constants,
)
from vaguelets.modulus_verifier import (
    PairSamplingPlan,
    check_decay,
    check_holder_decay,
    check_holder_growth,
)
from vaguelets.vaguelet_engine import cube_range, cubes_in_box, default_quadrature

PAIRS = 100_000
GAUSS_NORM_SQ_1D = 3 * math.sqrt(math.pi) / 4  # Gaussian moments: pi^(1/2) (1/2 + 1/4)


def test_criterion_1_lemma1(acceptance_log):
    start = time.perf_counter()
    grid = itertools.product(
        np.linspace(0.1, 10, 10),          # D1
        np.linspace(0.1, 1, 10),           # alpha
        zip(np.linspace(0, 9, 10), np.linspace(0.1, 1, 10)),  # (M, rho)
    )
    exact = 0
    for D1, alpha, (M, rho) in grid:
        out = lemma1_rescale(HolderGrowthProfile(alpha=alpha, D1=D1, M=M), rho, sup_bound_ok=True)
        exact += (out.D1, out.alpha, out.M) == (max(2.0, D1), rho * alpha, rho * M)

    failures = []
    checked = 0
    for label, d in itertools.product(LABELS, (1, 2)):
        f = catalog_get(label, d)
        if f.sup_bound > 1:
            continue
        plan = PairSamplingPlan(d=d, pair_count=PAIRS, seed=101)
        if not check_holder_growth(f, f.claimed_growth, plan).ok:
            failures.append((label, d, "base"))
            continue
        for rho in (0.25, 0.5, 0.75, 1.0):
            p = lemma1_rescale(f.claimed_growth, rho, sup_bound_ok=True)
            rep = check_holder_growth(f, p, plan)
            checked += 1
            if rep.violation_count:
                failures.append((label, d, rho))
    elapsed = time.perf_counter() - start
    ok = exact == 1000 and not failures and checked > 0 and elapsed < 60
    acceptance_log(1, "Exponent rescaling formula and sampled soundness", ok,
                   f"exact {exact}/1000, {checked} rescaled profiles, failures {failures}, {elapsed:.1f}s")
    assert ok


def _theorem2_sweep(radial):
    failures, worst = [], 0.0
    for label, d in itertools.product(LABELS, (1, 2)):
        f = catalog_get(label, d)
        plan = PairSamplingPlan(d=d, pair_count=PAIRS, T=1e3, seed=202, radial=radial)
        if not check_decay(f, f.claimed_decay, plan).ok or not check_holder_growth(f, f.claimed_growth, plan).ok:
            failures.append((label, d, "claims"))
            continue
        R = f.claimed_decay.R
        for Rprime in (0.0, R / 4, R / 2, 3 * R / 4):
            p = certify_holder_decay(f.claimed_decay, f.claimed_growth, Rprime)
            rep = check_holder_decay(f, p, plan)
            worst = max(worst, rep.worst_ratio)
            if rep.violation_count:
                failures.append((label, d, Rprime, rep.worst_ratio))
    return failures, worst


def test_criterion_2_theorem2_end_to_end(acceptance_log):
    start = time.perf_counter()
    ball_failures, ball_worst = _theorem2_sweep("ball")
    log_failures, log_worst = _theorem2_sweep("log")
    elapsed = time.perf_counter() - start
    ok = not ball_failures and not log_failures and elapsed < 300
    acceptance_log(2, "Hölder-decay certificates end to end, 4 functions x d in {1,2} x 4 R'", ok,
                   f"worst ratio {ball_worst:.3g} (ball) / {log_worst:.3g} (log), {elapsed:.1f}s")
    assert ok, (ball_failures, log_failures)


def test_criterion_3_hand_traces(acceptance_log):
    cases = [
        ((2.0, 1.0, 1.0, 0.0), 0.0, (0.5, 2.0)),
        ((2.0, 1.0, 1.0, 0.0), 1.0, (0.25, 2.0)),
        ((4.0, 1.0, 1.0, 4.0), 0.0, (0.25, 8.0)),
    ]
    got = []
    for (R, D1, alpha, M), Rprime, _ in cases:
        out = theorem2_constants(DecayProfile(R=R), HolderGrowthProfile(alpha=alpha, D1=D1, M=M), Rprime)
        got.append((out.beta, out.D2))
    ok = got == [c[2] for c in cases]
    acceptance_log(3, "Hölder-decay recipe hand traces, exact", ok, f"{got}")
    assert ok


def test_criterion_4_corollary_chain(acceptance_log):
    details, ok = [], True
    for d in (1, 2):
        f = catalog_get("gaussian_second_deriv", d)
        growth = gradient_to_holder(*f.gradient_bound)
        p = certify_holder_decay(f.claimed_decay, growth, 0.0)
        # the uniform ball law rarely lands near the origin in d=2, the log law does
        worst = []
        for radial in ("ball", "log"):
            plan = PairSamplingPlan(d=d, pair_count=PAIRS, seed=404, radial=radial)
            rep = check_holder_decay(f, p, plan)
            ok &= rep.violation_count == 0
            worst.append(f"{rep.worst_ratio:.3g}")
        details.append(f"d={d}: beta={p.beta:g} D2={p.D2:.4g} worst={'/'.join(worst)}")
    acceptance_log(4, "Gradient-bound chain on gaussian_second_deriv", ok, "; ".join(details))
    assert ok


def test_criterion_5_norm_preservation(acceptance_log):
    f = catalog_get("gaussian_second_deriv", 1)
    cubes = cube_range(-4, 4, 8, 1)
    g = assemble_gram(f, cubes, default_quadrature(cubes))
    diag = np.real(np.diag(g.entries))
    tails = np.diag(g.tail_bounds)
    err = np.abs(diag - GAUSS_NORM_SQ_1D)
    ok = bool(np.all(err <= 1e-6 + tails))
    acceptance_log(5, "Vaguelet norm preservation, |j|<=4, |k|<=8", ok,
                   f"{len(cubes)} cubes, max error {err.max():.2g}")
    assert ok


def test_criterion_6_bessel_consistency(acceptance_log):
    f = catalog_get("gaussian_second_deriv", 1)
    cubes = cubes_in_box(-2, 2, 0, 4, 1)
    g = assemble_gram(f, cubes)
    rep = stress_test_bessel(f, cubes, trials=100, seed=606, refine=2, gram=g)
    dense = float(np.linalg.eigvalsh(g.entries)[-1])
    A = bessel_constant(g).A_emp
    dense_err = abs(A - dense) / dense
    top_err = abs(rep.top_vector_ratio - rep.A_emp) / rep.A_emp
    ok = (
        rep.max_consistency_error <= 1e-5
        and rep.max_ratio <= rep.A_emp * (1 + 1e-6)
        and top_err <= 1e-6
        and dense_err <= 1e-8
    )
    acceptance_log(6, "Bessel consistency on 31 cubes", ok,
                   f"consistency {rep.max_consistency_error:.2g}, max ratio/A {rep.max_ratio / rep.A_emp:.4f}, "
                   f"top-vector {top_err:.2g}, dense {dense_err:.2g}")
    assert ok


def test_criterion_7_plateau(acceptance_log):
    start = time.perf_counter()
    f = catalog_get("gaussian_second_deriv", 1)
    rows, last_step = family_growth_study(f, growth_schedule(range(4), 1, width=4))
    values = [r.A_emp for r in rows]
    nondecreasing = all(b >= a * (1 - 1e-9) for a, b in zip(values, values[1:]))
    elapsed = time.perf_counter() - start
    ok = nondecreasing and 0 <= last_step < 0.05 and elapsed < 600
    acceptance_log(7, "Bessel constant plateau over nested families", ok,
                   f"A_emp {', '.join(f'{v:.4f}' for v in values)} (sizes {[r.family_size for r in rows]}), "
                   f"last step {100 * last_step:.2f}%, {elapsed:.1f}s")
    assert ok


def _report(tmp_path, name, argv, threads):
    path = tmp_path / f"{name}-{threads}.json"
    code = main(argv + ["--threads", str(threads), "--out", str(path)])
    return code, path


def _strip_threads(path, study):
    meta_path = str(path) + ".json" if study else path
    with open(meta_path, encoding="utf-8") as fh:
        data = json.load(fh)
    data["config"].pop("threads")
    argv = data["config"].pop("argv")
    i = argv.index("--threads")
    del argv[i : i + 2]
    body = path.read_bytes() if study else None
    return data, argv, body


def test_criterion_8_determinism(tmp_path, acceptance_log):
    runs = {
        "verify": ["verify", "--f", "oscillating_decay", "--d", "2", "--profile", "theorem2", "--Rprime", "1.5",
                   "--pairs", "30000", "--seed", "808"],
        "gram": ["gram", "--mother", "gaussian_second_deriv", "--j-min", "-1", "--j-max", "1", "--K", "3"],
        "bessel": ["bessel", "--mother", "gaussian_second_deriv", "--j-min", "-1", "--j-max", "1", "--K", "3",
                   "--trials", "30", "--seed", "808"],
        "study": ["study", "--mother", "gaussian_second_deriv", "--gens", "0..2", "--width", "2"],
    }
    problems = []
    for name, argv in runs.items():
        study = name == "study"
        paths = {}
        for threads in (1, 4):
            code, paths[threads] = _report(tmp_path, name, argv, threads)
            if code != 0:
                problems.append(f"{name} exit {code}")
        # identical content apart from the recorded thread count
        a, argv_a, body_a = _strip_threads(paths[1], study)
        b, argv_b, body_b = _strip_threads(paths[4], study)
        if a != b or argv_a != argv_b or body_a != body_b:
            problems.append(f"{name} differs across threads")
        # replay reproduces the bytes
        replay = tmp_path / f"{name}-replay.json"
        main(["rerun", str(paths[4]), "--out", str(replay)])
        if replay.read_bytes() != paths[4].read_bytes():
            problems.append(f"{name} rerun differs")
    ok = not problems
    acceptance_log(8, "Determinism across threads and reruns", ok,
                   f"{len(runs)} report kinds, threads 1 vs 4, rerun byte-identical" if ok else str(problems))
    assert ok

"""Built-in invariant suite behind ``snhopf selftest``.

fast: single Hopf pair, degrees <= 3, a few seconds.  full: up to two Hopf
pairs and degree 4 (space dimensions in the low thousands), a few minutes.
Also compares a handful of golden values shipped with the package, so a
corrupted install fails loudly with the first divergent entry.
"""

from __future__ import annotations

import importlib.resources
import json
import math
import time
from typing import Callable

import numpy as np

from .engine import saddle_node_hopf_example
from .homological import verify_splitting
from .poly import FULL, SpaceDesc, VectorPoly, enumerate_basis, from_vec
from .realize import (PAIRED, PLAIN, DelayTuple, composite_matrix,
                      rank_scan, sample_delays)
from .spectral import analyze_kernel, design_kernel, verify_hypothesis
from .symmetry import project_equivariant, time_average


def _golden() -> dict:
    with importlib.resources.files("snhopf").joinpath("golden.json").open(
            "r", encoding="utf-8") as fh:
        return json.load(fh)


def _check_splitting(cases, omegas_of, emit) -> bool:
    ok = True
    for (p, s, ell) in cases:
        space = SpaceDesc(p, s, ell, ncomp=2 * p + 1, flavor=FULL)
        dim = (2 * p + 1) * math.comb(space.nvars + ell - 1, ell)
        if dim > 2000:
            continue
        rep = verify_splitting(p, s, ell, omegas_of(p))
        ok &= rep.all_ok
        emit(f"splitting {rep.summary()}", rep.all_ok)
    return ok


def _check_averaging(emit) -> bool:
    k, _ = design_kernel([1.3], [0.0, -0.9, -1.7])
    data = analyze_kernel(k, expected_omegas=[1.3])
    space = SpaceDesc(1, 0, 3, ncomp=3, flavor=FULL)
    basis = enumerate_basis(space)
    nu = space.nu_index
    rng = np.random.default_rng(42)
    ok = True
    worst = 0.0
    for _ in range(5):
        vec = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
        for i, (kk, m) in enumerate(basis):
            if m[nu] != 0:
                vec[i] = 0.0
        f = from_vec(space, vec)
        exact = project_equivariant(f)
        err = {}
        for T in (100.0, 200.0):
            n = int(math.ceil(4 * T * 4 * 1.3 / math.pi)) + 1
            err[T] = (time_average(f, data.omegas, T, n) - exact).norm()
        ratio = err[100.0] / err[200.0]
        rel = err[200.0] / f.norm()
        worst = max(worst, rel)
        ok &= 1.2 <= ratio <= 3.5 and rel <= 0.05
    emit(f"time-average convergence (worst rel err {worst:.3e})", ok)
    return ok


def _check_factorization(cases, emit) -> bool:
    ok = True
    for (p, s, ell, n_tau) in cases:
        delays = [0.0, -0.9, -1.7] if p == 1 else [0.0, -0.7, -1.3, -1.9, -2.4]
        omegas = [1.0] if p == 1 else [1.0, math.sqrt(2.0)]
        k, _ = design_kernel(omegas, delays, r=3.0)
        data = analyze_kernel(k, expected_omegas=omegas)
        rng = np.random.default_rng(1234 + p + ell)
        worst = 0.0
        for tau in sample_delays(rng, 3.0, p + 1, n_tau):
            cm = composite_matrix(data, tau, ell, s, PAIRED)
            worst = max(worst, cm.factorization_residual)
        good = worst <= 1e-10
        ok &= good
        emit(f"factorization identity p={p} s={s} ell={ell} "
             f"(worst {worst:.2e})", good)
    return ok


def _check_golden(emit) -> bool:
    g = _golden()
    ok = True
    case = g["saddle_node_hopf"]
    k, _ = design_kernel(case["omegas"], case["kernel_delays"])
    data = analyze_kernel(k, expected_omegas=case["omegas"])
    coeffs, _ = saddle_node_hopf_example(case["A"], tuple(case["tau"]), data)
    for key, want in case["coefficients"].items():
        got = getattr(coeffs, key)
        if abs(got - want) > 1e-9 * max(1.0, abs(want)):
            emit(f"golden {key}: got {got!r}, want {want!r}", False)
            return False
    spec_g = g["spectral"]
    checks = [("u0", data.u0, spec_g["u0"]),
              ("u1_re", data.psi0[1].real, spec_g["u1"][0]),
              ("u1_im", data.psi0[1].imag, spec_g["u1"][1])]
    for name, got, want in checks:
        if abs(got - want) > 1e-9 * max(1.0, abs(want)):
            emit(f"golden spectral {name}: got {got!r}, want {want!r}", False)
            return False
    emit("golden values", True)
    return ok


def _check_surjectivity(emit) -> bool:
    k, _ = design_kernel([1.0], [0.0, -0.9, -1.7], r=2.0)
    data = analyze_kernel(k, expected_omegas=[1.0])
    rng = np.random.default_rng(7)
    rep = rank_scan(data, 3, 0, sample_delays(rng, 2.0, 2, 30), PAIRED)
    frac = rep.fraction_surjective()
    good = frac >= 0.95
    emit(f"generic surjectivity p=1 ell<=3 (fraction {frac:.2f})", good)
    rep1 = rank_scan(data, 2, 0, sample_delays(rng, 2.0, 1, 10), PLAIN)
    deficient = rep1.structural_deficiency_degree() == 2
    emit("single-delay deficiency at degree 2", deficient)
    hrep = verify_hypothesis(data)
    emit("designed kernel hypothesis", hrep.passed)
    return good and deficient and hrep.passed


def run_selftest(level: str = "fast", stream: Callable[[str], None] = print
                 ) -> bool:
    if level not in ("fast", "full"):
        raise ValueError(f"unknown selftest level {level!r}")
    t0 = time.time()
    results: list[bool] = []

    def emit(name: str, ok: bool) -> None:
        results.append(ok)
        stream(f"[{'PASS' if ok else 'FAIL'}] {name}")

    if level == "fast":
        split_cases = [(1, 0, 2), (1, 0, 3), (1, 1, 2), (1, 1, 3)]
        fact_cases = [(1, 0, 2, 3), (1, 0, 3, 3)]
    else:
        split_cases = [(p, s, ell) for p in (1, 2) for s in (0, 1)
                       for ell in (2, 3, 4)]
        fact_cases = [(1, 0, 2, 10), (1, 1, 3, 10), (2, 0, 2, 5)]

    def omegas_of(p: int):
        return (1.0,) if p == 1 else (1.0, math.sqrt(2.0))

    _check_splitting(split_cases, omegas_of, emit)
    _check_averaging(emit)
    _check_factorization(fact_cases, emit)
    if level == "full":
        _check_surjectivity(emit)
    _check_golden(emit)
    ok = all(results)
    stream(f"selftest level={level}: {'PASS' if ok else 'FAIL'} "
           f"({sum(results)}/{len(results)} checks, {time.time() - t0:.1f}s)")
    return ok

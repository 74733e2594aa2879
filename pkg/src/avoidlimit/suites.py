"""Comparison runs and exact verification checks shared by the CLI and the tests."""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import dyson, permcore, sampler, wordpath
from .rng import SeededRng, run_replicas
from .stats import TestReport, ks_required_size, ks_two_sample
from .words import LayeredWords

MARGINAL_TIMES = (0.25, 0.5, 0.75)
# stream blocks keep permutation and bridge replicas independent under one seed
DYSON_STREAM = 1 << 40
BESSEL_STREAM = 1 << 41
SELF_STREAM = 1 << 42
MAX_KS_DISTANCE = 0.25


def _avoider_marginal(n: int, d: int, times: tuple[float, ...], rng: SeededRng) -> np.ndarray:
    sigma = sampler.sample_avoider(n, d, rng)
    return wordpath.build_p_sigma(sigma, d)(np.asarray(times))


def avoider_marginals(n, d, replicas, seed, times=MARGINAL_TIMES, workers=1) -> np.ndarray:
    """``P_sigma(t)`` for uniform samples; shape ``(replicas, len(times), d)``."""
    fn = functools.partial(_avoider_marginal, n, d, tuple(times))
    return np.stack(run_replicas(fn, replicas, seed, workers))


def _grid_for(times) -> int:
    """Smallest grid size putting every requested time on a grid point."""
    for G in range(2, 100_000):
        if all(abs(t * G - round(t * G)) < 1e-12 for t in times):
            return G
    raise ValueError(f"times {times} are not on any moderate uniform grid")


def dyson_marginals(d, replicas, seed, times=MARGINAL_TIMES, G=None, stream=DYSON_STREAM) -> np.ndarray:
    """``Lambda(Z(t))``; shape ``(replicas, len(times), d)``.

    Grid marginals of the bridge construction are exact, so the coarsest grid
    holding ``times`` suffices.
    """
    G = _grid_for(times) if G is None else G
    idx = [round(t * G) for t in times]
    if any(abs(i - t * G) > 1e-9 for i, t in zip(idx, times)):
        raise ValueError(f"times {times} do not lie on the grid of size {G}")
    Z = dyson.sample_hermitian_bridges(d, G, SeededRng(seed, stream), batch=replicas)
    return dyson.eig_hermitian(Z[:, idx])


def bessel_bridge_norms(replicas, seed, times=MARGINAL_TIMES, stream=BESSEL_STREAM) -> np.ndarray:
    """Norm of a three-dimensional standard bridge; shape ``(replicas, len(times))``."""
    G = _grid_for(times)
    B = dyson.brownian_bridges((replicas, 3), G, SeededRng(seed, stream))
    idx = [round(t * G) for t in times]
    return np.sqrt(np.sum(B[:, :, idx] ** 2, axis=1))


def marginal_reports(X: np.ndarray, Y: np.ndarray, times, alpha, coords=None, labels=("X", "Y")) -> list[TestReport]:
    d = X.shape[-1]
    coords = range(d) if coords is None else coords
    out = []
    for k, t in enumerate(times):
        for c in coords:
            out.append(
                ks_two_sample(X[:, k, c], Y[:, k, c], alpha, f"{labels[0]} vs {labels[1]} coord {c + 1} t={t:g}")
            )
    return out


def check_replicas(replicas: int, alpha: float) -> None:
    need = ks_required_size(alpha, MAX_KS_DISTANCE)
    if replicas < need:
        raise ValueError(
            f"{replicas} replicas give a KS threshold above {MAX_KS_DISTANCE}; "
            f"at alpha={alpha:g} use at least {need}"
        )


def compare(n, d, replicas, seed, alpha=1e-3, against="dyson", times=MARGINAL_TIMES, workers=1) -> list[TestReport]:
    """KS per (coordinate, time) marginal of ``P_sigma`` against the chosen reference.

    ``against`` is ``dyson`` (eigenvalue process), ``bessel`` (d=2 only: top
    curve times sqrt 2 against the 3d bridge norm) or ``self`` (two
    independent eigenvalue-process samples).
    """
    check_replicas(replicas, alpha)
    if against == "self":
        X = dyson_marginals(d, replicas, seed, times)
        Y = dyson_marginals(d, replicas, seed, times, stream=SELF_STREAM)
        return marginal_reports(X, Y, times, alpha, labels=("bridge", "bridge'"))
    P = avoider_marginals(n, d, replicas, seed, times, workers)
    if against == "dyson":
        Y = dyson_marginals(d, replicas, seed, times)
        return marginal_reports(P, Y, times, alpha, labels=("P_sigma", "eigen"))
    if against == "bessel":
        if d != 2:
            raise ValueError("the bridge-norm comparison only applies to d = 2")
        R = bessel_bridge_norms(replicas, seed, times)
        return [
            ks_two_sample(math.sqrt(2) * P[:, k, 0], R[:, k], alpha, f"sqrt2 top curve vs 3d bridge norm t={t:g}")
            for k, t in enumerate(times)
        ]
    raise ValueError(f"unknown reference {against!r}")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def check_catalan(n_max: int = 10) -> CheckResult:
    bad = [n for n in range(1, n_max + 1) if permcore.count_avoiders_brute(n, 2) != permcore.catalan(n)]
    return CheckResult("catalan", not bad, f"n <= {n_max}; mismatches at {bad}")


def check_shape_sums(n_max: int = 9, d_max: int = 4) -> CheckResult:
    bad = [
        (n, d)
        for n in range(1, n_max + 1)
        for d in range(1, d_max + 1)
        if sampler.avoider_count(n, d) != permcore.count_avoiders_brute(n, d)
    ]
    return CheckResult("tableau-square-sums", not bad, f"n <= {n_max}, d <= {d_max}; mismatches at {bad}")


def all_omega(n: int, d: int):
    """Every word pair of length ``n`` over ``[d]`` with equal letter counts."""
    words = list(itertools.product(range(1, d + 1), repeat=n))
    by_content: dict[tuple[int, ...], list] = {}
    for w in words:
        key = tuple(w.count(l) for l in range(1, d + 1))
        by_content.setdefault(key, []).append(w)
    for group in by_content.values():
        for a in group:
            for b in group:
                yield LayeredWords(a, b, d)


def properness_counterexamples(n: int, d: int) -> list[LayeredWords]:
    image = {
        (w.a, w.b) for w in (permcore.words_from_perm(s, d) for s in permcore.enumerate_avoiders(n, d))
    }
    return [w for w in all_omega(n, d) if permcore.is_proper(w) != ((w.a, w.b) in image)]


def check_properness(n_max: int = 6, d_max: int = 3) -> CheckResult:
    bad = {(n, d): len(properness_counterexamples(n, d)) for n in range(1, n_max + 1) for d in range(1, d_max + 1)}
    total = sum(bad.values())
    return CheckResult("proper-iff-minimal", total == 0, f"n <= {n_max}, d <= {d_max}; {total} counterexamples")


def scw_violations(n: int, d: int, C: float = 1.0) -> list[permcore.Permutation]:
    zero = (0,) * d
    return [
        s
        for s in permcore.enumerate_avoiders(n, d)
        if not wordpath.cone_class(permcore.words_from_perm(s, d), 0, n, zero, zero, "SCWplusplus", C)
    ]


def check_scw(n_max: int = 8, d: int = 3) -> CheckResult:
    bad = sum(len(scw_violations(n, d)) for n in range(1, n_max + 1))
    return CheckResult("SCW++ for avoiders", bad == 0, f"n <= {n_max}, d = {d}; {bad} violations")


def check_harmonic(points: int = 100, dims=(2, 3, 4), seed: int = 0) -> CheckResult:
    rng = SeededRng(seed, 7)
    bad = 0
    for d in dims:
        for _ in range(points):
            x = rng.gen.integers(-30, 31, size=d)
            x[-1] = -x[:-1].sum()
            bad += dyson.harmonic_defect(x.tolist()) != 0
    return CheckResult("U harmonic", bad == 0, f"{points} points per d in {tuple(dims)}; {bad} failures")


def householder_errors(d: int, rng: SeededRng, trials: int = 100) -> dict[str, float]:
    T = dyson.householder(d)
    x = rng.gen.standard_normal((trials, d))
    y = rng.gen.standard_normal((trials, d))
    z = x - x.mean(axis=1, keepdims=True)
    e_d = np.zeros(d)
    e_d[-1] = math.sqrt(d)
    w = T.apply(x)
    return {
        "unit": abs(T.u @ T.u - 1.0),
        "involution": float(np.max(np.abs(T.apply(T.apply(x)) - x))),
        "orthogonality": float(np.max(np.abs(np.sum(T.apply(x) * T.apply(y), axis=1) - np.sum(x * y, axis=1)))),
        "ones": float(np.max(np.abs(T.apply(np.ones(d)) - e_d))),
        "zero_sum_to_last": float(np.max(np.abs(T.apply(z)[:, -1]))),
        # H(x)_d = <x, H(e_d)> = sum(x) / sqrt(d), so it vanishes exactly on the plane
        "last_is_sum": float(np.max(np.abs(w[:, -1] - x.sum(axis=1) / math.sqrt(d)))),
    }


def check_householder(dims=range(2, 7), seed: int = 0, tol: float = 1e-12) -> CheckResult:
    rng = SeededRng(seed, 11)
    worst = max(max(householder_errors(d, rng).values()) for d in dims)
    return CheckResult("Householder identities", worst <= tol, f"max error {worst:.3g}")


def verify_all(quick: bool = False) -> list[CheckResult]:
    if quick:
        return [
            check_catalan(8),
            check_shape_sums(7, 4),
            check_properness(4, 3),
            check_scw(6),
            check_harmonic(),
            check_householder(),
        ]
    return [check_catalan(), check_shape_sums(), check_properness(), check_scw(), check_harmonic(), check_householder()]

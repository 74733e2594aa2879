"""Traceless Hermitian Brownian bridges, their ranked eigenvalues, and related exact objects."""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy import integrate

from .rng import SeededRng

JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100
HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class HermitianBridgePath:
    """``Z(t_k)`` for ``t_k = k / G``; ``matrices`` has shape ``(G + 1, d, d)``."""

    times: np.ndarray
    matrices: np.ndarray

    @property
    def d(self) -> int:
        return self.matrices.shape[-1]

    def check(self, herm_tol: float = 1e-12, trace_tol: float = 1e-10) -> None:
        Z = self.matrices
        asym = np.max(np.abs(Z - np.conj(np.swapaxes(Z, -1, -2))))
        if asym > herm_tol:
            raise AssertionError(f"Hermitian symmetry off by {asym:.3g}")
        tr = np.max(np.abs(np.trace(Z, axis1=-2, axis2=-1)))
        if tr > trace_tol:
            raise AssertionError(f"trace {tr:.3g} is not zero")
        if np.any(Z[0] != 0) or np.any(Z[-1] != 0):
            raise AssertionError("bridge is not pinned at 0 at both ends")

    def to_json(self) -> str:
        return json.dumps(
            {
                "d": self.d,
                "times": self.times.tolist(),
                "re": self.matrices.real.tolist(),
                "im": self.matrices.imag.tolist(),
            }
        )


@dataclass(frozen=True)
class EigenPath:
    times: np.ndarray
    values: np.ndarray  # (G + 1, d), non-increasing along the last axis

    def to_csv(self) -> str:
        d = self.values.shape[1]
        lines = ["t," + ",".join(f"lambda_{k}" for k in range(1, d + 1))]
        for t, row in zip(self.times, self.values):
            lines.append(",".join(f"{x:.17g}" for x in (t, *row)))
        return "\n".join(lines) + "\n"


def brownian_bridges(shape: tuple[int, ...], G: int, rng: SeededRng) -> np.ndarray:
    """Standard bridges on the grid ``k/G``; result has shape ``shape + (G + 1,)``.

    Built as ``W(t) - t W(1)`` so both endpoints are exactly zero.
    """
    if G < 2:
        raise ValueError(f"grid needs at least 2 intervals, got {G}")
    incr = rng.gen.standard_normal(shape + (G,)) * math.sqrt(1.0 / G)
    W = np.concatenate([np.zeros(shape + (1,)), np.cumsum(incr, axis=-1)], axis=-1)
    t = np.arange(G + 1) / G
    B = W - t * W[..., -1:]
    B[..., -1] = 0.0
    return B


def sample_hermitian_bridges(d: int, G: int, rng: SeededRng, batch: int = 1) -> np.ndarray:
    """``batch`` independent traceless bridges; shape ``(batch, G + 1, d, d)``.

    Diagonal entries are standard bridges minus their mean. Each off-diagonal
    entry is ``(B + iB') / sqrt(2)`` for independent standard bridges.
    """
    diag = brownian_bridges((batch, d), G, rng)
    diag = diag - diag.mean(axis=1, keepdims=True)
    iu, ju = np.triu_indices(d, 1)
    re = brownian_bridges((batch, len(iu)), G, rng)
    im = brownian_bridges((batch, len(iu)), G, rng)
    Z = np.zeros((batch, G + 1, d, d), dtype=complex)
    idx = np.arange(d)
    Z[:, :, idx, idx] = np.moveaxis(diag, 1, 2)
    off = np.moveaxis((re + 1j * im) / math.sqrt(2.0), 1, 2)
    Z[:, :, iu, ju] = off
    Z[:, :, ju, iu] = np.conj(off)
    Z[:, 0] = 0.0
    Z[:, -1] = 0.0
    return Z


def sample_hermitian_bridge(d: int, G: int, rng: SeededRng) -> HermitianBridgePath:
    Z = sample_hermitian_bridges(d, G, rng, batch=1)[0]
    return HermitianBridgePath(np.arange(G + 1) / G, Z)


def traceless_project(H: np.ndarray) -> np.ndarray:
    """``H - (Tr H / d) I`` on the last two axes."""
    H = np.asarray(H)
    d = H.shape[-1]
    tr = np.trace(H, axis1=-2, axis2=-1)
    return H - (tr / d)[..., None, None] * np.eye(d)


def eig_hermitian(M: np.ndarray, vectors: bool = False, tol: float = JACOBI_TOL):
    """Eigenvalues (non-increasing) of Hermitian matrices by cyclic complex Jacobi.

    Works on a single ``(d, d)`` matrix or a stack ``(..., d, d)``. Sweeps
    stop once the off-diagonal Frobenius norm is below ``tol`` times the norm
    of the matrix. With ``vectors=True`` the columns of the second result are
    matching unit eigenvectors.
    """
    A = np.array(M, dtype=complex)
    if A.shape[-1] != A.shape[-2]:
        raise ValueError(f"matrix is not square: shape {A.shape}")
    asym = np.max(np.abs(A - np.conj(np.swapaxes(A, -1, -2)))) if A.size else 0.0
    if asym > HERMITIAN_TOL:
        raise ValueError(f"matrix is not Hermitian (asymmetry {asym:.3g})")
    single = A.ndim == 2
    if single:
        A = A[None]
    A = A.reshape(-1, *A.shape[-2:])
    d = A.shape[-1]
    A = 0.5 * (A + np.conj(np.swapaxes(A, -1, -2)))
    V = np.broadcast_to(np.eye(d, dtype=complex), A.shape).copy()
    scale = np.sqrt(np.sum(np.abs(A) ** 2, axis=(1, 2)))
    scale[scale == 0] = 1.0
    off_mask = ~np.eye(d, dtype=bool)
    for _ in range(JACOBI_MAX_SWEEPS):
        off = np.sqrt(np.sum(np.abs(A[:, off_mask]) ** 2, axis=1))
        if np.all(off < tol * scale):
            break
        for p, q in combinations(range(d), 2):
            apq = A[:, p, q]
            r = np.abs(apq)
            active = r > 1e-300
            if not np.any(active):
                continue
            phase = np.where(active, apq / np.where(active, r, 1.0), 1.0)
            tau = (A[:, q, q].real - A[:, p, p].real) / (2.0 * np.where(active, r, 1.0))
            t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(1.0 + t**2)
            s = t * c
            # columns p, q: new_p = c a_p - s conj(phase) a_q, new_q = s phase a_p + c a_q
            sp = (s * phase)[:, None]
            cp = c[:, None]
            colp = A[:, :, p].copy()
            colq = A[:, :, q].copy()
            A[:, :, p] = cp * colp - np.conj(sp) * colq
            A[:, :, q] = sp * colp + cp * colq
            rowp = A[:, p, :].copy()
            rowq = A[:, q, :].copy()
            A[:, p, :] = cp * rowp - sp * rowq
            A[:, q, :] = np.conj(sp) * rowp + cp * rowq
            A[:, p, q] = 0.0
            A[:, q, p] = 0.0
            vp = V[:, :, p].copy()
            vq = V[:, :, q].copy()
            V[:, :, p] = cp * vp - np.conj(sp) * vq
            V[:, :, q] = sp * vp + cp * vq
    else:
        off = np.sqrt(np.sum(np.abs(A[:, off_mask]) ** 2, axis=1))
        if not np.all(off < tol * scale):
            raise RuntimeError(f"Jacobi iteration did not converge in {JACOBI_MAX_SWEEPS} sweeps")
    w = np.real(np.diagonal(A, axis1=1, axis2=2))
    order = np.argsort(-w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    V = np.take_along_axis(V, order[:, None, :], axis=2)
    shape = np.shape(M)[:-2]
    w = w[0] if single else w.reshape(*shape, d)
    if not vectors:
        return w
    V = V[0] if single else V.reshape(*shape, d, d)
    return w, V


def eigenvalue_process(Z: HermitianBridgePath) -> EigenPath:
    return EigenPath(Z.times, eig_hermitian(Z.matrices))


def d2_closed_form(B1: float, B2: float, B3: float) -> tuple[float, float]:
    r = math.sqrt(B1 * B1 + B2 * B2 + B3 * B3)
    return r / math.sqrt(2.0), -r / math.sqrt(2.0)


def d2_matrix(B1: float, B2: float, B3: float) -> np.ndarray:
    return np.array([[B1, B2 + 1j * B3], [B2 - 1j * B3, -B1]]) / math.sqrt(2.0)


@dataclass(frozen=True)
class ConeTransform:
    """Reflection ``x -> x - 2<x, u>u`` sending the all-ones direction to ``sqrt(d) e_d``."""

    d: int
    u: np.ndarray

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return x - 2.0 * (x @ self.u)[..., None] * self.u

    def matrix(self) -> np.ndarray:
        return np.eye(self.d) - 2.0 * np.outer(self.u, self.u)


def householder(d: int) -> ConeTransform:
    if d < 2:
        raise ValueError("the reflection needs d >= 2")
    denom = math.sqrt(2 * d - 2 * math.sqrt(d))
    u = np.full(d, 1.0 / denom)
    u[-1] = (1.0 - math.sqrt(d)) / denom
    return ConeTransform(d, u)


def vandermonde_u(x: Sequence) -> int | float:
    """``prod_{i<j} (x_i - x_j)``; exact for integer input."""
    vals = list(x)
    out = 1
    for i, j in combinations(range(len(vals)), 2):
        out *= vals[i] - vals[j]
    return out


def harmonic_defect(x: Sequence[int]) -> int:
    """``sum_{i,j} U(x + e_i - e_j) - d^2 U(x)``; zero means the mean-value property holds."""
    x = [int(v) for v in x]
    d = len(x)
    total = 0
    for i in range(d):
        for j in range(d):
            y = list(x)
            y[i] += 1
            y[j] -= 1
            total += vandermonde_u(y)
    return total - d * d * vandermonde_u(x)


def _unnormalized_density(lam: np.ndarray, s: float) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    v = np.ones(lam.shape[:-1])
    d = lam.shape[-1]
    for i, j in combinations(range(d), 2):
        v = v * (lam[..., i] - lam[..., j])
    return v**2 * np.exp(-np.sum(lam**2, axis=-1) / (2.0 * s))


def marginal_normalizer_exact(d: int, s: float) -> float:
    """Closed form of the integral over the ordered part of the zero-sum plane.

    Uses Mehta's integral; kept as an independent check on the numerical
    normalization.
    """
    k = d * (d - 1) // 2
    full = (2 * math.pi) ** ((d - 1) / 2) * math.prod(math.factorial(j) for j in range(1, d + 1))
    return full / math.factorial(d) * s ** (k + (d - 1) / 2)


@functools.lru_cache(maxsize=256)
def marginal_normalizer(d: int, t: float, mc_samples: int = 400_000) -> float:
    """Integral of the unnormalized marginal density over the ordered zero-sum region.

    Measured with the hyperplane's own surface measure. Quadrature for
    ``d <= 3``; for larger ``d`` a seeded Monte Carlo estimate that samples
    the plane with a Gaussian of the same scale.
    """
    s = t * (1.0 - t)
    if d == 2:
        # lam = (r, -r) / sqrt(2) has unit speed in r
        val, _ = integrate.quad(lambda r: _unnormalized_density(np.array([r, -r]) / math.sqrt(2), s), 0, np.inf, epsabs=0, epsrel=1e-10)
        return val
    if d == 3:
        # parametrize by (lam1, lam2); lam3 = -lam1 - lam2; area factor sqrt(3)
        def inner(l1):
            lo = -l1 / 2.0
            hi = l1
            f = lambda l2: _unnormalized_density(np.array([l1, l2, -l1 - l2]), s)
            # absolute floor well below the peak, which scales like s^3
            return integrate.quad(f, lo, hi, epsabs=1e-15 * s**3, epsrel=1e-10, limit=200)[0]

        val, _ = integrate.quad(inner, 0, np.inf, epsabs=0, epsrel=1e-10)
        return math.sqrt(3.0) * val
    rng = np.random.default_rng(0xD15C0 + d)
    # proposal variance matched to the target's second moment s (d^2 - 1) / (d - 1)
    var = s * (d + 1)
    z = rng.standard_normal((mc_samples, d)) * math.sqrt(var)
    z -= z.mean(axis=1, keepdims=True)
    # projecting removes one dimension: z is isotropic Gaussian on the plane
    gauss = (2 * math.pi * var) ** (-(d - 1) / 2) * np.exp(-np.sum(z**2, axis=1) / (2 * var))
    vals = _unnormalized_density(np.sort(z, axis=1)[:, ::-1], s) / gauss
    # the sorted point lands in the ordered region; every region point has d! preimages
    return float(vals.mean() / math.factorial(d))


def bridge_marginal_density(d: int, t: float, lam: Sequence[float]) -> float:
    """Density of the ranked eigenvalues at time ``t`` on the ordered zero-sum region.

    Proportional to ``U(lam)^2 exp(-|lam|^2 / (2 t (1 - t)))``, normalized
    against surface measure on the zero-sum plane.
    """
    if not 0.0 < t < 1.0:
        raise ValueError(f"time must lie in (0, 1), got {t}")
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (d,):
        raise ValueError(f"expected {d} coordinates, got shape {lam.shape}")
    if np.any(np.diff(lam) > 0):
        raise ValueError(f"coordinates are not in non-increasing order: {lam.tolist()}")
    if abs(lam.sum()) > 1e-9 * max(1.0, np.abs(lam).max()):
        raise ValueError("coordinates do not sum to zero")
    s = t * (1.0 - t)
    return float(_unnormalized_density(lam, s) / marginal_normalizer(d, float(t)))


def check_eigenvalues(values: np.ndarray, tol: float = 1e-10) -> None:
    if np.any(np.diff(values, axis=-1) > 0):
        raise AssertionError("eigenvalues not in non-increasing order")
    worst = float(np.max(np.abs(values.sum(axis=-1)))) if values.size else 0.0
    if worst > tol:
        raise AssertionError(f"eigenvalue sum {worst:.3g} is not zero")

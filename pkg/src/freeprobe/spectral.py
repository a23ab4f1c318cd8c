"""The operator T = sum_i u_i (x) (u_i^op)^* + u_i^* (x) u_i^op and its norm.

T is realised on Hilbert-Schmidt space as

    T(x) = sum_i u_i x u_i^* + u_i^* x u_i

for d x d matrices x, without forming the d^2 x d^2 matrix.  T is
self-adjoint and T(I) = 2N I, so at any finite d the full norm is 2N.
The informative part of the spectrum lives on the traceless matrices,
which T preserves; `freeness_gap` measures that part against the Kesten
threshold 2 sqrt(2N - 1).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.linalg import eigh_tridiagonal, null_space

from .errors import InvalidInput, ResourceLimitError
from .unitaries import UnitaryFamily, haar_sample

log = logging.getLogger(__name__)

__all__ = [
    "NormEstimate",
    "MomentEstimate",
    "apply",
    "dense_operator",
    "dense_norm",
    "operator_norm",
    "freeness_gap",
    "haar_sample",
    "kesten_threshold",
    "trace_moment",
    "trace_moment_estimate",
]

DENSE_LIMIT = 4096          # largest d^2 handled by dense eigensolves
STAGNATION_WINDOW = 10


def kesten_threshold(rank: int) -> float:
    return 2.0 * math.sqrt(2 * rank - 1)


def apply(family: UnitaryFamily, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x)
    d = family.dim
    if x.shape != (d, d):
        raise InvalidInput(f"expected a {d}x{d} matrix, got shape {x.shape}")
    out = np.zeros((d, d), dtype=np.complex128)
    for u in family.matrices:
        ua = u.conj().T
        out += u @ x @ ua
        out += ua @ x @ u
    return out


def dense_operator(family: UnitaryFamily) -> np.ndarray:
    """T as a d^2 x d^2 matrix acting on row-major vec(x).

    vec(A x B) = (A kron B^T) vec(x) for row-major vectorisation.
    """
    d = family.dim
    if d * d > DENSE_LIMIT:
        raise ResourceLimitError(f"dense operator for d={d} exceeds d^2 <= {DENSE_LIMIT}")
    out = np.zeros((d * d, d * d), dtype=np.complex128)
    for u in family.matrices:
        out += np.kron(u, u.conj())
        out += np.kron(u.conj().T, u.T)
    return out


def _traceless_basis(d: int) -> np.ndarray:
    ident = np.eye(d, dtype=np.complex128).reshape(1, -1)
    return null_space(ident)


def dense_spectrum(family: UnitaryFamily, subspace: str = "full") -> np.ndarray:
    t = dense_operator(family)
    if subspace == "traceless" and family.dim > 1:
        b = _traceless_basis(family.dim)
        t = b.conj().T @ t @ b
    elif subspace not in ("full", "traceless"):
        raise InvalidInput(f"unknown subspace {subspace!r}")
    return np.linalg.eigvalsh(t)


def dense_norm(family: UnitaryFamily, subspace: str = "full") -> float:
    return float(np.max(np.abs(dense_spectrum(family, subspace))))


@dataclass(frozen=True)
class NormEstimate:
    value: float
    iterations: int
    residual: float
    threshold: float
    gap: float
    converged: bool
    lambda_max: float
    lambda_min: float
    subspace: str = "full"

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "threshold": self.threshold,
            "gap": self.gap,
            "iterations": self.iterations,
            "residual": self.residual,
            "converged": self.converged,
            "lambda_max": self.lambda_max,
            "lambda_min": self.lambda_min,
            "subspace": self.subspace,
        }


class _LanczosResult(NamedTuple):
    lambda_min: float
    lambda_max: float
    iterations: int
    residual: float
    converged: bool


def lanczos_extremes(
    matvec: Callable[[np.ndarray], np.ndarray],
    dim: int,
    tol: float,
    max_iter: int,
    rng: np.random.Generator,
    project: Callable[[np.ndarray], np.ndarray] | None = None,
) -> _LanczosResult:
    """Both extreme eigenvalues of a Hermitian operator by Lanczos.

    Full reorthogonalisation.  Converged once the Ritz values at both ends
    have stopped moving (relative change < tol) for STAGNATION_WINDOW steps
    and their residuals |beta_j s_j| are below tol, or once the Krylov
    space becomes invariant.
    """
    proj = project or (lambda v: v)
    q = proj(rng.standard_normal(dim) + 1j * rng.standard_normal(dim))
    q /= np.linalg.norm(q)
    basis = [q]
    alphas: list[float] = []
    betas: list[float] = []
    prev = None
    stagnant = 0
    theta_min = theta_max = 0.0
    residual = math.inf
    converged = False
    steps = min(max_iter, dim)
    j = 0
    for j in range(1, steps + 1):
        w = proj(matvec(basis[-1]))
        alpha = float(np.vdot(basis[-1], w).real)
        w = w - alpha * basis[-1]
        if betas:
            w = w - betas[-1] * basis[-2]
        block = np.array(basis)
        for _ in range(2):
            w = w - block.T @ (block.conj() @ w)
        w = proj(w)
        beta = float(np.linalg.norm(w))
        alphas.append(alpha)

        if len(alphas) == 1:
            vals, vecs = np.array([alpha]), np.ones((1, 1))
        else:
            vals, vecs = eigh_tridiagonal(np.array(alphas), np.array(betas))
        theta_min, theta_max = float(vals[0]), float(vals[-1])
        residual = beta * max(abs(vecs[-1, 0]), abs(vecs[-1, -1]))

        if prev is not None:
            scale = max(abs(theta_min), abs(theta_max), 1e-300)
            moved = max(abs(theta_min - prev[0]), abs(theta_max - prev[1])) / scale
            stagnant = stagnant + 1 if moved < tol else 0
        prev = (theta_min, theta_max)

        if beta <= 1e-12 * max(abs(theta_max), abs(theta_min), 1.0):
            converged, residual = True, beta
            break
        if stagnant >= STAGNATION_WINDOW and residual <= tol:
            converged = True
            break
        betas.append(beta)
        basis.append(w / beta)
    return _LanczosResult(theta_min, theta_max, j, float(residual), converged)


def operator_norm(
    family: UnitaryFamily,
    tol: float = 1e-9,
    max_iter: int = 5000,
    seed: int = 0,
    subspace: str = "full",
) -> NormEstimate:
    """max |lambda| of T, by matrix-free Lanczos.

    ``subspace="traceless"`` restricts T to matrices orthogonal to the
    identity.  For d = 1 that space is zero and the full norm is reported.
    Each run is repeated from a second seed; the two must agree to 2*tol
    (both are within tol of an eigenvalue) for ``converged`` to hold.
    """
    if tol <= 0:
        raise InvalidInput(f"tol must be positive, got {tol}")
    d = family.dim
    if subspace not in ("full", "traceless"):
        raise InvalidInput(f"unknown subspace {subspace!r}")
    if d == 1:
        subspace = "full"
    threshold = kesten_threshold(family.rank)

    project = None
    if subspace == "traceless":
        e = np.eye(d, dtype=np.complex128).reshape(-1) / math.sqrt(d)

        def project(v):
            return v - e * np.vdot(e, v)

    def matvec(v):
        return apply(family, v.reshape(d, d)).reshape(-1)

    dim = d * d - (1 if subspace == "traceless" else 0)
    runs = [
        lanczos_extremes(matvec, d * d, tol, max_iter, np.random.default_rng([seed, k]), project)
        for k in (0, 1)
    ]
    # Krylov dimension is bounded by the subspace dimension
    runs = [r._replace(iterations=min(r.iterations, dim)) for r in runs]
    values = [max(r.lambda_max, -r.lambda_min) for r in runs]
    agree = abs(values[0] - values[1]) <= 2 * tol
    best = runs[int(np.argmax(values))]
    value = max(values)
    if not agree:
        log.warning("Lanczos restarts disagree: %r vs %r", values[0], values[1])
    return NormEstimate(
        value=value,
        iterations=sum(r.iterations for r in runs),
        residual=max(r.residual for r in runs),
        threshold=threshold,
        gap=value - threshold,
        converged=all(r.converged for r in runs) and agree,
        lambda_max=max(r.lambda_max for r in runs),
        lambda_min=min(r.lambda_min for r in runs),
        subspace=subspace,
    )


def freeness_gap(family: UnitaryFamily, tol: float = 1e-9, seed: int = 0) -> float:
    """Norm of T off the identity, minus 2 sqrt(2N - 1).

    Zero for free Haar unitaries.  At finite d it fluctuates around zero
    for Haar samples and shrinks as d grows.
    """
    return operator_norm(family, tol=tol, seed=seed, subspace="traceless").gap


class MomentEstimate(NamedTuple):
    value: float
    stderr: float
    method: str


def trace_moment_estimate(
    family: UnitaryFamily,
    n: int,
    method: str = "auto",
    samples: int = 64,
    seed: int = 0,
) -> MomentEstimate:
    """Normalised trace tr(T^(2n)) / d^2.

    This is phi(a^(2n)) for the trace character of the family.  Exact via
    a dense eigensolve when d^2 <= DENSE_LIMIT; otherwise a Hutchinson
    estimate with Rademacher probes, reporting its standard error.
    """
    if n < 0:
        raise InvalidInput(f"n must be >= 0, got {n}")
    if n == 0:
        return MomentEstimate(1.0, 0.0, "exact")
    d = family.dim
    if method == "auto":
        method = "dense" if d * d <= DENSE_LIMIT else "hutchinson"
    if method == "dense":
        ev = dense_spectrum(family)
        return MomentEstimate(float(np.mean(ev ** (2 * n))), 0.0, "dense")
    if method != "hutchinson":
        raise InvalidInput(f"unknown method {method!r}")
    rng = np.random.default_rng(seed)
    vals = []
    for _ in range(samples):
        z = rng.choice([-1.0, 1.0], size=(d, d)).astype(np.complex128)
        y = z
        for _ in range(n):
            y = apply(family, y)
        vals.append(float(np.vdot(y, y).real) / (d * d))
    vals = np.array(vals)
    return MomentEstimate(float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(samples)), "hutchinson")


def trace_moment(family: UnitaryFamily, n: int, method: str = "auto", samples: int = 64, seed: int = 0) -> float:
    return trace_moment_estimate(family, n, method, samples, seed).value

"""Direct evaluation of the harmonic and dual large sieve quadratic forms.

Both forms are ``|E a|^2 / |a|^2`` and ``|E^T b|^2 / |b|^2`` for the matrix
``E[(q, a), n] = e(a n / q)`` over Farey fractions a/q with q <= Q and
1 <= n <= N, so both are bounded by the top eigenvalue of its Gram matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .arith import euler_phi
from .residue_sieve import Amplifier, e_frac

MAX_DIM = 2000


@dataclass(frozen=True)
class FareyIndex:
    """Pairs ``(q, a)`` with q <= Q and a a unit mod q; ``(1, 1)`` stands for q = 1."""

    Q: int
    points: tuple[tuple[int, int], ...]

    @classmethod
    def build(cls, Q: int) -> "FareyIndex":
        if Q < 1:
            raise ValueError(f"Q must be >= 1, got {Q}")
        pts = tuple((q, a) for q in range(1, Q + 1) for a in range(1, q + 1) if math.gcd(a, q) == 1)
        return cls(Q, pts)

    def __len__(self) -> int:
        return len(self.points)

    def position(self) -> dict[tuple[int, int], int]:
        return {pt: i for i, pt in enumerate(self.points)}


def exponential_matrix(N: int, Q: int) -> np.ndarray:
    """``E[(q, a), n-1] = e(a n / q)`` with rows in ``FareyIndex.build(Q)`` order."""
    farey = FareyIndex.build(Q)
    q = np.array([pt[0] for pt in farey.points], dtype=np.int64)
    a = np.array([pt[1] for pt in farey.points], dtype=np.int64)
    n = np.arange(1, N + 1, dtype=np.int64)
    num = np.mod(np.outer(a, n), q[:, None])
    return np.exp(2j * np.pi * num / q[:, None])


def _nonzero(v: np.ndarray) -> float:
    norm2 = float(np.vdot(v, v).real)
    if norm2 == 0.0:
        raise ValueError("coefficient vector is identically zero")
    return norm2


def hls_ratio(a, Q: int) -> float:
    """Harmonic form over ``sum |a_n|^2``; ``a[0]`` is the coefficient of n = 1."""
    a = np.asarray(a, dtype=complex)
    norm2 = _nonzero(a)
    lhs = exponential_matrix(len(a), Q) @ a
    return float(np.vdot(lhs, lhs).real) / norm2


def dls_ratio(beta, N: int, Q: int | None = None) -> float:
    """Dual form over ``sum |beta(q, a)|^2``.

    ``beta`` is either an array in ``FareyIndex`` order (then Q is required)
    or a mapping ``(q, a) -> value``; missing Farey points count as zero.
    """
    if isinstance(beta, Mapping):
        if Q is None:
            Q = max(q for q, _ in beta)
        pos = FareyIndex.build(Q).position()
        vec = np.zeros(len(pos), dtype=complex)
        for key, value in beta.items():
            vec[pos[key]] = value
    else:
        if Q is None:
            raise ValueError("Q is required for an array of coefficients")
        vec = np.asarray(beta, dtype=complex)
    norm2 = _nonzero(vec)
    rhs = exponential_matrix(N, Q).T @ vec
    return float(np.vdot(rhs, rhs).real) / norm2


def amplifier_coefficients(family: Mapping[int, Amplifier]) -> dict[tuple[int, int], complex]:
    """Flatten a family of per-modulus amplifiers into Farey-indexed coefficients."""
    return {(q, a): b for q, amp in family.items() for a, b in amp.beta.items()}


def amplifier_values(family: Mapping[int, Amplifier], N: int) -> np.ndarray:
    """``A(n) = sum_q sum_a beta(q, a) e(a n / q)`` for n = 1..N."""
    n = np.arange(1, N + 1, dtype=np.int64)
    total = np.zeros(N, dtype=complex)
    for q, amp in family.items():
        for a, b in amp.beta.items():
            total += b * e_frac(a * n, q)
    return total


def top_eigenvalue(
    matvec: Callable[[np.ndarray], np.ndarray],
    dim: int,
    *,
    rtol: float = 1e-8,
    max_iter: int = 10_000,
    seed: int = 0,
) -> tuple[float, np.ndarray]:
    """Power iteration for a Hermitian positive semidefinite operator.

    Stops once the residual ``|G x - rho x|`` drops below ``rtol * rho``,
    which places an eigenvalue within ``rtol * rho`` of the returned
    Rayleigh quotient.  Returns ``(eigenvalue, unit eigenvector)``.
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    x /= np.linalg.norm(x)
    rho = 0.0
    for _ in range(max_iter):
        y = matvec(x)
        rho = float(np.vdot(x, y).real)
        if rho <= 0.0:
            return 0.0, x
        if np.linalg.norm(y - rho * x) <= rtol * rho:
            return rho, x
        x = y / np.linalg.norm(y)
    return rho, x


def gram_extreme(N: int, Q: int, *, rtol: float = 1e-8, max_iter: int = 10_000) -> float:
    """Largest eigenvalue of the Gram matrix of the exponentials ``e(a n / q)``.

    This is the optimal constant for both the harmonic and the dual form.
    """
    farey_size = sum(euler_phi(q) for q in range(1, Q + 1))
    if N > MAX_DIM or farey_size > MAX_DIM:
        raise ValueError(f"dimension too large for dense Gram matrix (N={N}, Q={Q}, max {MAX_DIM})")
    E = exponential_matrix(N, Q)
    # work in the smaller of the two equivalent Gram matrices
    G = E @ E.conj().T if E.shape[0] <= E.shape[1] else E.conj().T @ E
    value, _ = top_eigenvalue(lambda v: G @ v, G.shape[0], rtol=rtol, max_iter=max_iter)
    return value


@dataclass(frozen=True)
class DualCheckRow:
    N: int
    Q: int
    delta: int
    gram_extreme: float
    max_hls_ratio: float
    max_dls_ratio: float
    passed: bool


def dual_check(N: int, Q: int, trials: int, seed: int, atol: float = 1e-6) -> DualCheckRow:
    """Random complex vectors in both forms against the Gram extreme and ``N - 1 + Q^2``."""
    rng = np.random.default_rng([seed, N, Q])
    E = exponential_matrix(N, Q)
    gram = gram_extreme(N, Q)
    hls = dls = 0.0
    for _ in range(trials):
        a = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        b = rng.standard_normal(E.shape[0]) + 1j * rng.standard_normal(E.shape[0])
        u, v = E @ a, E.T @ b
        hls = max(hls, float(np.vdot(u, u).real / np.vdot(a, a).real))
        dls = max(dls, float(np.vdot(v, v).real / np.vdot(b, b).real))
    delta = N - 1 + Q * Q
    ok = gram <= delta + atol and hls <= gram + atol and dls <= gram + atol
    return DualCheckRow(N, Q, delta, gram, hls, dls, bool(ok))

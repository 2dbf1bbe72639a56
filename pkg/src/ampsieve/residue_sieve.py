"""The arithmetic large sieve proved by amplification.

Condition sets ``Omega_p`` modulo primes, their additive-character expansions,
the per-prime and CRT-glued amplifiers, and the three cardinality bounds
(full sieve ``Delta/H``, primes-only ``Delta/K`` and the unweighted
amplifier ``Delta*A/B^2``).  Every bound is an exact ``Fraction``; amplifier
coefficients are complex doubles checked against the exact detection values
and costs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping

import numpy as np

from .arith import factorize, mobius_and_radical, euler_phi, primes_up_to, squarefree_with_factors


def e_frac(num, den: int) -> np.ndarray:
    """``exp(2*pi*i*num/den)`` with ``num`` reduced modulo ``den`` in integers first."""
    r = np.mod(np.asarray(num, dtype=np.int64), den)
    return np.exp(2j * np.pi * r / den)


@dataclass(frozen=True)
class OmegaSystem:
    """Residue classes ``Omega_p`` to be removed, one set per prime p <= Q.

    Primes not mentioned get the empty set.  ``|Omega_p| = p`` is rejected:
    the sifted set would be empty and every weight below would be singular.
    """

    Q: int
    sets: Mapping[int, frozenset[int]] = field(default_factory=dict)

    def __post_init__(self):
        if self.Q < 1:
            raise ValueError(f"Q must be >= 1, got {self.Q}")
        primes = primes_up_to(self.Q)
        full: dict[int, frozenset[int]] = {}
        for p, omega in self.sets.items():
            p = int(p)
            if p not in primes:
                raise ValueError(f"{p} is not a prime <= Q={self.Q}")
            omega = frozenset(int(x) for x in omega)
            if any(x < 0 or x >= p for x in omega):
                raise ValueError(f"Omega_{p} has elements outside 0..{p - 1}")
            if len(omega) >= p:
                raise ValueError(f"Omega_{p} covers every class mod {p}")
            full[p] = omega
        for p in primes:
            full.setdefault(p, frozenset())
        object.__setattr__(self, "sets", dict(sorted(full.items())))

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(self.sets)

    def size(self, p: int) -> int:
        return len(self.sets[p])

    def density(self, p: int) -> Fraction:
        return Fraction(len(self.sets[p]), p)

    # presets -----------------------------------------------------------

    @classmethod
    def zero(cls, Q: int) -> "OmegaSystem":
        """``Omega_p = {0}``: the sifted set is the integers free of primes <= Q."""
        return cls(Q, {p: {0} for p in primes_up_to(Q)})

    @classmethod
    def squares(cls, Q: int) -> "OmegaSystem":
        """Quadratic residues including 0, odd p only (mod 2 they cover everything)."""
        return cls(Q, {p: {x * x % p for x in range(p)} for p in primes_up_to(Q) if p > 2})

    @classmethod
    def nonsquares(cls, Q: int) -> "OmegaSystem":
        """Quadratic non-residues; every perfect square survives this sieve."""
        sets = {}
        for p in primes_up_to(Q):
            residues = {x * x % p for x in range(p)}
            sets[p] = set(range(p)) - residues
        return cls(Q, sets)

    @classmethod
    def random(cls, Q: int, seed: int) -> "OmegaSystem":
        rng = np.random.default_rng(seed)
        sets = {}
        for p in primes_up_to(Q):
            k = int(rng.integers(0, p))
            sets[p] = set(int(x) for x in rng.choice(p, size=k, replace=False))
        return cls(Q, sets)

    @classmethod
    def from_preset(cls, name: str, Q: int, seed: int = 0) -> "OmegaSystem":
        """Build from ``zero``, ``squares``, ``nonsquares``, ``random`` or ``file:<path>``."""
        if name.startswith("file:"):
            return cls.load(name[len("file:"):])
        presets = {"zero": cls.zero, "squares": cls.squares, "nonsquares": cls.nonsquares}
        if name in presets:
            return presets[name](Q)
        if name == "random":
            return cls.random(Q, seed)
        raise ValueError(f"unknown Omega preset {name!r}")

    # serialisation -----------------------------------------------------

    def to_json(self) -> dict:
        return {"Q": self.Q, "sets": {str(p): sorted(s) for p, s in self.sets.items()}}

    @classmethod
    def from_json(cls, data: dict) -> "OmegaSystem":
        return cls(int(data["Q"]), {int(p): s for p, s in data["sets"].items()})

    @classmethod
    def load(cls, path) -> "OmegaSystem":
        return cls.from_json(json.loads(Path(path).read_text()))


# --- per-prime expansion -----------------------------------------------


def fourier_coeffs(p: int, omega_p) -> np.ndarray:
    """Coefficients ``alpha(p, a)``, a = 0..p-1, of the indicator of ``omega_p``.

    Normalised so that ``1_Omega(n) = sum_a alpha(p, a) e(a n / p)``, which
    needs the conjugate character ``e(-a x / p)`` inside the transform.
    ``alpha(p, 0) = |Omega_p| / p``.
    """
    xs = np.array(sorted(omega_p), dtype=np.int64)
    a = np.arange(p, dtype=np.int64)
    if xs.size == 0:
        return np.zeros(p, dtype=complex)
    return e_frac(-np.outer(a, xs), p).sum(axis=1) / p


@dataclass(frozen=True)
class PrimeAmplifier:
    p: int
    beta: dict[int, complex]
    c_p: Fraction
    cost: Fraction

    def detect(self, n: int) -> complex:
        """``sum_{a unit} beta(p, a) e(a n / p)``; equals ``c_p`` off Omega_p."""
        a = np.fromiter(self.beta, dtype=np.int64, count=len(self.beta))
        b = np.fromiter(self.beta.values(), dtype=complex, count=len(self.beta))
        return complex(np.sum(b * e_frac(a * n, self.p)))

    @property
    def float_cost(self) -> float:
        return float(sum(abs(b) ** 2 for b in self.beta.values()))


def prime_amplifier(p: int, omega_p) -> PrimeAmplifier:
    omega_p = frozenset(omega_p)
    if len(omega_p) >= p:
        raise ValueError(f"|Omega_{p}| = {len(omega_p)} leaves nothing to detect")
    alpha = fourier_coeffs(p, omega_p)
    c_p = Fraction(len(omega_p), p)
    beta = {a: complex(-alpha[a]) for a in range(1, p)}
    return PrimeAmplifier(p, beta, c_p, c_p * (1 - c_p))


@dataclass(frozen=True)
class Amplifier:
    q: int
    beta: dict[int, complex]
    detect_value: Fraction
    cost: Fraction

    def detect(self, n: int) -> complex:
        a = np.fromiter(self.beta, dtype=np.int64, count=len(self.beta))
        b = np.fromiter(self.beta.values(), dtype=complex, count=len(self.beta))
        return complex(np.sum(b * e_frac(a * n, self.q)))

    @property
    def float_cost(self) -> float:
        return float(sum(abs(b) ** 2 for b in self.beta.values()))


def crt_amplifier(q: int, per_prime: Mapping[int, PrimeAmplifier], weights: Mapping[int, Fraction] | None = None) -> Amplifier:
    """Glue prime amplifiers into one modulo squarefree ``q``.

    The unit ``a`` mod q is sent to ``(a * inv(q/p) mod p)_p``, the CRT
    isomorphism for which ``e(a n / q) = prod_p e(a_p n / p)``; with it the
    detection value and the cost are both multiplicative in q.
    """
    mu, _ = mobius_and_radical(q)
    if mu == 0:
        raise ValueError(f"q={q} is not squarefree")
    primes = sorted(factorize(q))
    xi = {p: Fraction(1) if weights is None else Fraction(weights[p]) for p in primes}
    if any(w < 0 for w in xi.values()):
        raise ValueError("weights must be nonnegative")
    twist = {p: pow(q // p, -1, p) for p in primes}
    scale = math.prod(float(xi[p]) for p in primes)
    beta = {}
    for a in range(1, q + 1):
        if math.gcd(a, q) != 1:
            continue
        value = complex(scale)
        for p in primes:
            value *= per_prime[p].beta[a * twist[p] % p]
        beta[a] = value
    detect = math.prod((xi[p] * per_prime[p].c_p for p in primes), start=Fraction(1))
    cost = math.prod((xi[p] ** 2 * per_prime[p].cost for p in primes), start=Fraction(1))
    return Amplifier(q, beta, detect, cost)


def amplifier_family(omega: OmegaSystem, weights: Mapping[int, Fraction] | None = None) -> dict[int, Amplifier]:
    """Amplifiers for every squarefree q <= Q, q = 1 included."""
    per_prime = {p: prime_amplifier(p, omega.sets[p]) for p in omega.primes}
    return {q: crt_amplifier(q, per_prime, weights) for q, _ in sorted(squarefree_with_factors(omega.Q, omega.primes))}


def ramanujan_sum(q: int, n: int) -> int:
    """``sum_{a mod q, (a,q)=1} e(a n / q) = mu(q/g) phi(q) / phi(q/g)``, g = gcd(q, n)."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    g = math.gcd(q, n)
    mu, _ = mobius_and_radical(q // g)
    return mu * euler_phi(q) // euler_phi(q // g)


def ramanujan_sum_direct(q: int, n: int) -> complex:
    a = np.array([a for a in range(1, q + 1) if math.gcd(a, q) == 1], dtype=np.int64)
    return complex(e_frac(a * n, q).sum())


# --- bounds -------------------------------------------------------------


@dataclass(frozen=True)
class SieveBoundReport:
    N: int
    Q: int
    Delta: Fraction
    H: Fraction
    K: Fraction
    A: Fraction
    B: Fraction
    bound_als: Fraction
    bound_rls: Fraction | None
    bound_weaker: Fraction
    sifted_count: int | None = None


def delta_default(N: int, Q: int) -> Fraction:
    return Fraction(Q * Q - 1 + N)


def _multiplicative_sum(omega: OmegaSystem, local) -> Fraction:
    """``sum over squarefree q <= Q of prod_{p | q} local(p)``."""
    values = {p: local(p) for p in omega.primes}
    total = Fraction(0)
    for _, fac in squarefree_with_factors(omega.Q, omega.primes):
        term = Fraction(1)
        for p in fac:
            term *= values[p]
        total += term
    return total


def weighted_sums(omega: OmegaSystem, weights: Mapping[int, Fraction]) -> tuple[Fraction, Fraction]:
    """``(A_1, B_1)`` for the amplifier rescaled by ``xi_q = prod_{p|q} xi_p``."""
    def cost(p):
        c = omega.density(p)
        return Fraction(weights[p]) ** 2 * c * (1 - c)

    A1 = _multiplicative_sum(omega, cost)
    B1 = _multiplicative_sum(omega, lambda p: Fraction(weights[p]) * omega.density(p))
    return A1, B1


def optimal_weights(omega: OmegaSystem) -> dict[int, Fraction]:
    """``xi_p = p / (p - |Omega_p|)``, the Cauchy-Schwarz equality case."""
    return {p: Fraction(p, p - omega.size(p)) for p in omega.primes}


def sieve_bounds(omega: OmegaSystem, N: int, delta: Fraction | None = None) -> SieveBoundReport:
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    Delta = delta_default(N, omega.Q) if delta is None else Fraction(delta)
    H = _multiplicative_sum(omega, lambda p: Fraction(omega.size(p), p - omega.size(p)))
    K = sum((omega.density(p) for p in omega.primes), start=Fraction(0))
    A, B = weighted_sums(omega, {p: 1 for p in omega.primes})
    return SieveBoundReport(
        N=N,
        Q=omega.Q,
        Delta=Delta,
        H=H,
        K=K,
        A=A,
        B=B,
        bound_als=Delta / H,
        bound_rls=Delta / K if K > 0 else None,
        bound_weaker=Delta * A / B**2,
    )


def sift_bruteforce(omega: OmegaSystem, N: int) -> list[int]:
    """The integers 1..N avoiding ``Omega_p`` modulo every p <= Q."""
    n = np.arange(1, N + 1, dtype=np.int64)
    keep = np.ones(N, dtype=bool)
    for p, omega_p in omega.sets.items():
        if not omega_p:
            continue
        table = np.zeros(p, dtype=bool)
        table[list(omega_p)] = True
        keep &= ~table[n % p]
    return [int(x) for x in n[keep]]


@dataclass(frozen=True)
class SieveVerification:
    report: SieveBoundReport
    count: int
    als_ok: bool
    weaker_ok: bool
    rls_ok: bool | None

    @property
    def passed(self) -> bool:
        return self.als_ok and self.weaker_ok and self.rls_ok is not False


def verify_sieve(omega: OmegaSystem, N: int, delta: Fraction | None = None) -> SieveVerification:
    """Count the sifted set by brute force and compare with all three bounds.

    The inequalities are theorems (for the default Delta), so a failure here
    means a bug.  ``weaker_ok`` also covers ``Delta/H <= Delta*A/B^2``.
    """
    bounds = sieve_bounds(omega, N, delta)
    count = len(sift_bruteforce(omega, N))
    report = SieveBoundReport(**{**bounds.__dict__, "sifted_count": count})
    return SieveVerification(
        report=report,
        count=count,
        als_ok=count <= report.bound_als,
        weaker_ok=report.bound_als <= report.bound_weaker,
        rls_ok=None if report.bound_rls is None else count <= report.bound_rls,
    )


@dataclass(frozen=True)
class SquaresRow:
    N: int
    Q: int
    count: int
    bound_als: Fraction
    bound_weaker: Fraction
    weaker_over_als: float
    log_quarter: float
    passed: bool


def squares_trend(Ns, preset: str = "nonsquares") -> tuple[list[SquaresRow], float]:
    """Sieve with Q = isqrt(N) for each N and compare the two bounds.

    Returns the rows and the constant C fitted (least squares in log scale)
    to ``bound_weaker / bound_als ~ C (log N)^(1/4)``.
    """
    rows = []
    for N in Ns:
        Q = math.isqrt(N)
        check = verify_sieve(OmegaSystem.from_preset(preset, Q), N)
        r = check.report
        rows.append(SquaresRow(
            N=N,
            Q=Q,
            count=check.count,
            bound_als=r.bound_als,
            bound_weaker=r.bound_weaker,
            weaker_over_als=float(r.bound_weaker / r.bound_als),
            log_quarter=math.log(N) ** 0.25,
            passed=check.passed,
        ))
    fitted = math.exp(sum(math.log(r.weaker_over_als / r.log_quarter) for r in rows) / len(rows)) if rows else math.nan
    return rows, fitted

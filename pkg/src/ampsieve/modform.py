"""Sieving weighted families of Hecke eigenvalue systems.

An :class:`Ensemble` is a finite weighted family ``f -> (lambda_f(p))_p``
standing in for primitive forms of level q with their harmonic weights.
Real data is ingested from CSV; :func:`synthetic_ensemble` draws
independent Sato-Tate eigenvalues, the product model in which the
Weyl-sum inequality holds with constant about 1.

Expectations, probabilities and the amplifier moment are weighted sums
over forms; the quantities the inequalities predict (``H``, ``A_1``,
``B_1``) are exact rationals.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from .arith import factorize, friable_up_to, primes_up_to, squarefree_with_factors
from .harmonic import top_eigenvalue
from .sato_tate import MinorantPoly, cheby_table

# ---------------------------------------------------------------------------
# ensembles


@dataclass(frozen=True)
class Ensemble:
    """Weighted eigenvalue systems; ``lambdas[f, i]`` is lambda_f(primes[i]).

    Every prime p <= prime_bound coprime with ``level_q`` must be present,
    and no other.  ``k`` is the weight of the forms when known (metadata).
    """

    label: str
    level_q: int
    prime_bound: int
    primes: tuple[int, ...]
    form_ids: tuple[str, ...]
    weights: np.ndarray
    lambdas: np.ndarray
    k: int | None = None

    def __post_init__(self):
        if self.level_q < 1:
            raise ValueError(f"level must be >= 1, got {self.level_q}")
        expected = tuple(p for p in primes_up_to(self.prime_bound) if self.level_q % p)
        if tuple(self.primes) != expected:
            missing = sorted(set(expected) - set(self.primes))
            extra = sorted(set(self.primes) - set(expected))
            raise ValueError(f"prime coverage mismatch: missing {missing}, unexpected {extra}")
        F = len(self.form_ids)
        if F < 1:
            raise ValueError("an ensemble needs at least one form")
        if self.weights.shape != (F,) or self.lambdas.shape != (F, len(self.primes)):
            raise ValueError("weights/lambdas shapes do not match forms and primes")
        if not np.all(np.isfinite(self.weights)) or np.any(self.weights <= 0):
            raise ValueError("weights must be finite and positive")
        if np.any(~np.isfinite(self.lambdas)) or np.any(np.abs(self.lambdas) > 2):
            raise ValueError("eigenvalue outside the Deligne range [-2, 2]")

    @property
    def num_forms(self) -> int:
        return len(self.form_ids)

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def local(self) -> dict[int, np.ndarray]:
        """``{p: lambda_f(p) over all forms}``; the argument handed to expectation integrands."""
        return {p: self.lambdas[:, i] for i, p in enumerate(self.primes)}

    def column(self, p: int) -> np.ndarray:
        return self.lambdas[:, self.primes.index(p)]


def sample_sato_tate(rng: np.random.Generator, shape) -> np.ndarray:
    """Sato-Tate samples by inverting ``F(t) = (2t - sin 2t) / (2 pi)`` in the angle."""
    u = rng.random(shape)
    lo = np.zeros_like(u)
    hi = np.full_like(u, np.pi)
    # 64 halvings of [0, pi] reach the double-precision floor
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        below = (2 * mid - np.sin(2 * mid)) / (2 * np.pi) < u
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 2.0 * np.cos(0.5 * (lo + hi))


def synthetic_ensemble(num_forms: int, Q_max: int, level_q: int = 1, seed: int = 0, label: str | None = None) -> Ensemble:
    """Independent Sato-Tate eigenvalues per (form, prime), uniform weights 1/num_forms.

    Draws are row-major from a single seeded generator, so form f depends
    only on ``(seed, f, number of primes)``.
    """
    if num_forms < 1:
        raise ValueError("num_forms must be >= 1")
    primes = tuple(p for p in primes_up_to(Q_max) if level_q % p)
    rng = np.random.default_rng(seed)
    lambdas = sample_sato_tate(rng, (num_forms, len(primes)))
    return Ensemble(
        label=label or f"synthetic(F={num_forms},Q={Q_max},q={level_q},seed={seed})",
        level_q=level_q,
        prime_bound=Q_max,
        primes=primes,
        form_ids=tuple(str(i) for i in range(num_forms)),
        weights=np.full(num_forms, 1.0 / num_forms),
        lambdas=lambdas,
    )


class EnsembleFormatError(ValueError):
    pass


CSV_HEADER = ["form_id", "weight", "p", "lambda"]


def load_ensemble(path, level_q: int = 1, prime_bound: int | None = None, k: int | None = None, label: str | None = None) -> Ensemble:
    """Read an eigenvalue CSV (``form_id,weight,p,lambda``, one row per form and prime).

    ``prime_bound`` defaults to the largest prime in the file; every form
    must then list every prime up to it that is coprime with ``level_q``.
    """
    path = Path(path)
    rows: dict[str, dict[int, float]] = {}
    weights: dict[str, float] = {}
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != CSV_HEADER:
            raise EnsembleFormatError(f"{path}: expected header {','.join(CSV_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise EnsembleFormatError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            try:
                fid, w, p, lam = row[0].strip(), float(row[1]), int(row[2]), float(row[3])
            except ValueError as exc:
                raise EnsembleFormatError(f"{path}:{lineno}: {exc}") from None
            if not abs(lam) <= 2:
                raise EnsembleFormatError(f"{path}:{lineno}: lambda={lam} outside [-2, 2]")
            if fid in weights and weights[fid] != w:
                raise EnsembleFormatError(f"{path}:{lineno}: weight of form {fid} changes")
            if p in rows.setdefault(fid, {}):
                raise EnsembleFormatError(f"{path}:{lineno}: duplicate prime {p} for form {fid}")
            weights[fid] = w
            rows[fid][p] = lam
    if not rows:
        raise EnsembleFormatError(f"{path}: no data rows")
    if prime_bound is None:
        prime_bound = max(p for r in rows.values() for p in r)
    primes = tuple(p for p in primes_up_to(prime_bound) if level_q % p)
    for fid, r in rows.items():
        missing = [p for p in primes if p not in r]
        if missing:
            raise EnsembleFormatError(f"{path}: form {fid} is missing primes {missing}")
    ids = tuple(rows)
    return Ensemble(
        label=label or path.stem,
        level_q=level_q,
        prime_bound=prime_bound,
        primes=primes,
        form_ids=ids,
        weights=np.array([weights[i] for i in ids]),
        lambdas=np.array([[rows[i][p] for p in primes] for i in ids], dtype=float).reshape(len(ids), len(primes)),
        k=k,
    )


def save_ensemble(ens: Ensemble, path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for f, fid in enumerate(ens.form_ids):
            for i, p in enumerate(ens.primes):
                writer.writerow([fid, repr(float(ens.weights[f])), p, repr(float(ens.lambdas[f, i]))])


def expect(ens: Ensemble, g: Callable[[Mapping[int, np.ndarray]], np.ndarray]) -> float:
    """``sum_f w_f g(f)``, with ``g`` vectorised over forms (see ``Ensemble.local``)."""
    values = np.broadcast_to(np.asarray(g(ens.local()), dtype=float), (ens.num_forms,))
    return float(ens.weights @ values)


# ---------------------------------------------------------------------------
# Weyl sums


@dataclass(frozen=True)
class WeylCoefficients:
    """Coefficients ``alpha(m)`` supported on Q-friable m <= N."""

    coeffs: Mapping[int, complex]
    N: int
    Q: int

    def validate(self, level_q: int) -> None:
        for m in self.coeffs:
            if m < 1 or m > self.N:
                raise ValueError(f"m={m} outside [1, N={self.N}]")
            for p in factorize(m):
                if p > self.Q or level_q % p == 0:
                    raise ValueError(f"m={m} is not in Psi_{level_q}({self.N}, {self.Q})")

    @property
    def norm2(self) -> float:
        return float(sum(abs(c) ** 2 for c in self.coeffs.values()))


def lambda_matrix(ens: Ensemble, ms) -> np.ndarray:
    """``Lambda_m(lambda_f)`` for every form (rows) and every m in ``ms`` (columns)."""
    facs = [factorize(m) for m in ms]
    top: dict[int, int] = {}
    for fac in facs:
        for p, e in fac.items():
            top[p] = max(top.get(p, 0), e)
    tables = {p: cheby_table(ens.column(p), e) for p, e in top.items()}
    out = np.ones((ens.num_forms, len(facs)))
    for j, fac in enumerate(facs):
        for p, e in fac.items():
            out[:, j] *= tables[p][e]
    return out


def weyl_sums(ens: Ensemble, alpha: WeylCoefficients) -> np.ndarray:
    """``sum_m alpha(m) Lambda_m(rho(f))`` for every form."""
    alpha.validate(ens.level_q)
    if alpha.Q > ens.prime_bound:
        raise ValueError(f"ensemble only covers primes <= {ens.prime_bound}")
    ms = sorted(alpha.coeffs)
    if not ms:
        return np.zeros(ens.num_forms, dtype=complex)
    vec = np.array([alpha.coeffs[m] for m in ms], dtype=complex)
    return lambda_matrix(ens, ms) @ vec


def weyl_ratio(ens: Ensemble, alpha: WeylCoefficients) -> float:
    """Measured constant ``E|sum alpha Lambda|^2 / ((1 + N/q) sum |alpha|^2)``."""
    norm2 = alpha.norm2
    if norm2 == 0:
        raise ValueError("alpha is identically zero")
    s = weyl_sums(ens, alpha)
    return float(ens.weights @ np.abs(s) ** 2) / ((1 + alpha.N / ens.level_q) * norm2)


def weyl_extreme(ens: Ensemble, N: int, Q: int) -> tuple[float, WeylCoefficients]:
    """Largest ``weyl_ratio`` over all alpha on ``Psi_q(N, Q)``, and a maximiser."""
    ms = list(friable_up_to(N, Q, ens.level_q))
    L = lambda_matrix(ens, ms)
    G = L.T @ (ens.weights[:, None] * L)
    value, vec = top_eigenvalue(lambda v: G @ v, len(ms))
    alpha = WeylCoefficients(dict(zip(ms, vec)), N, Q)
    return value / (1 + N / ens.level_q), alpha


# ---------------------------------------------------------------------------
# sieve bounds


def _check_common_degree(Ys: Mapping[int, MinorantPoly]) -> int:
    degrees = {Y.s for Y in Ys.values()}
    if len(degrees) > 1:
        raise ValueError(f"all minorants must share one degree, got {sorted(degrees)}")
    return degrees.pop() if degrees else 0


def _check_primes(ens: Ensemble, primes) -> None:
    for p in primes:
        if p not in ens.primes:
            raise ValueError(f"prime {p} not available in the ensemble (coprime to q, <= {ens.prime_bound})")


def _weighted_stats(w: np.ndarray, z: np.ndarray) -> tuple[float, float]:
    """Weighted mean of ``z`` and its standard error (effective sample size)."""
    total = w.sum()
    mean = float(w @ z) / total
    var = float(w @ (z - mean) ** 2) / total
    n_eff = total**2 / float(w @ w)
    return mean, math.sqrt(var / n_eff)


@dataclass(frozen=True)
class Cor1Report:
    lhs: float
    lhs_stderr: float
    sum_sigma2: Fraction
    normalizer: float
    ratio: float | None
    s: int
    N: int
    primes: tuple[int, ...]
    total_mass: float


def cor1_alpha(Ys: Mapping[int, MinorantPoly]) -> WeylCoefficients:
    """``alpha(p^j) = beta_{p,j}`` for 1 <= j <= s, supported on m <= Q^s."""
    s = _check_common_degree(Ys)
    Q = max(Ys, default=1)
    coeffs = {p**j: complex(Y.beta[j]) for p, Y in Ys.items() for j in range(1, s + 1)}
    return WeylCoefficients(coeffs, Q**s, Q)


def cor1_check(ens: Ensemble, Ys: Mapping[int, MinorantPoly]) -> Cor1Report:
    """Second moment of ``sum_p (Y_p(lambda_f(p)) - beta_{p,0})`` against its prediction."""
    _check_primes(ens, Ys)
    alpha = cor1_alpha(Ys)
    s = _check_common_degree(Ys)
    values = weyl_sums(ens, alpha).real
    _, stderr = _weighted_stats(ens.weights, values**2)
    lhs = float(ens.weights @ values**2)
    stderr *= ens.total_mass
    sum_sigma2 = sum((Y.sigma2 for Y in Ys.values()), start=Fraction(0))
    normalizer = (1 + alpha.N / ens.level_q) * float(sum_sigma2)
    return Cor1Report(
        lhs=lhs,
        lhs_stderr=stderr,
        sum_sigma2=sum_sigma2,
        normalizer=normalizer,
        ratio=lhs / normalizer if normalizer > 0 else None,
        s=s,
        N=alpha.N,
        primes=tuple(sorted(Ys)),
        total_mass=ens.total_mass,
    )


def _amplifier_moduli(primes, N: int) -> list[tuple[int, tuple[int, ...]]]:
    """Squarefree d <= N composed of ``primes`` (d = 1 included)."""
    return squarefree_with_factors(N, sorted(primes))


def cor2_weighted_sums(Ys: Mapping[int, MinorantPoly], N: int, xi: Mapping[int, Fraction]) -> tuple[Fraction, Fraction]:
    """``(A_1, B_1)`` for the amplifier with positive weights ``xi_p``."""
    A1 = B1 = Fraction(0)
    for _, fac in _amplifier_moduli(Ys, N):
        a = b = Fraction(1)
        for p in fac:
            x = Fraction(xi[p])
            a *= x * x * Ys[p].sigma2
            b *= x * Ys[p].delta
        A1 += a
        B1 += b
    return A1, B1


def optimal_xi(Ys: Mapping[int, MinorantPoly]) -> dict[int, Fraction]:
    """``xi_p = delta_p / sigma_p^2``, where Cauchy-Schwarz is an equality."""
    return {p: Y.delta / Y.sigma2 for p, Y in Ys.items()}


def cor2_amplifier_alpha(Ys: Mapping[int, MinorantPoly], N: int, xi: Mapping[int, Fraction]) -> WeylCoefficients:
    """The amplifier expanded in the ``Lambda_m`` basis.

    ``alpha(m) = xi_d prod_{p | d} (-beta_{p, v_p(m)})`` where d = rad(m) <= N
    and every exponent is between 1 and s, so m <= N^s.
    """
    s = _check_common_degree(Ys)
    coeffs: dict[int, complex] = {}
    for d, fac in _amplifier_moduli(Ys, N):
        partial = [(1, float(math.prod((Fraction(xi[p]) for p in fac), start=Fraction(1))))]
        for p in fac:
            partial = [(m * p**j, c * -float(Ys[p].beta[j])) for m, c in partial for j in range(1, s + 1)]
        for m, c in partial:
            coeffs[m] = coeffs.get(m, 0.0) + c
    Q = max(Ys, default=1)
    return WeylCoefficients(coeffs, max(N, 1) ** s, Q)


def amplifier_moment_values(ens: Ensemble, Ys: Mapping[int, MinorantPoly], N: int, xi: Mapping[int, Fraction]) -> np.ndarray:
    """``sum_d xi_d prod_{p | d} (beta_{p,0} - Y_p(lambda_f(p)))`` for every form."""
    osc = {p: Y.oscillation(ens.column(p)) for p, Y in Ys.items()}
    xi_f = {p: float(x) for p, x in xi.items()}
    total = np.zeros(ens.num_forms)
    # DFS over squarefree d <= N, carrying the running product
    ps = sorted(Ys)
    stack = [(0, 1, np.ones(ens.num_forms))]
    while stack:
        start, d, prod = stack.pop()
        total += prod
        for i in range(start, len(ps)):
            p = ps[i]
            if d * p > N:
                break
            stack.append((i + 1, d * p, prod * (xi_f[p] * osc[p])))
    return total


@dataclass(frozen=True)
class SieveExperimentReport:
    """Outcome of a modular-form sieve run.

    ``H`` is the friable sum over ``Psi_q(N, Q)``; ``H_squarefree`` is the
    sum over squarefree d <= N that the amplifier actually reaches, so
    ``A_1 = B_1 = H_squarefree`` at the optimal weights and the rigorous
    chain reads ``P * B_1^2 <= moment = const * (1 + N^s/q) * A_1``.
    """

    probability: float
    probability_normalized: float
    total_mass: float
    H: Fraction
    H_squarefree: Fraction
    bound: float
    bound_squarefree: float
    ratio: float
    A1: Fraction
    B1: Fraction
    amplified_moment: float
    measured_const: float
    chain_holds: bool
    metadata: dict = field(default_factory=dict)


def cor2_bound(ens: Ensemble, Ys: Mapping[int, MinorantPoly], N: int) -> SieveExperimentReport:
    """Empirical probability of ``Y_p(lambda_f(p)) <= beta_{p,0} - delta_p`` for all p, and its bound.

    ``Ys`` must cover exactly the primes <= Q coprime with the level, where
    Q is its largest key.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    s = _check_common_degree(Ys)
    for p, Y in Ys.items():
        if Y.delta <= 0 or Y.sigma2 <= 0:
            raise ValueError(f"degenerate minorant at p={p}: delta={Y.delta}, sigma^2={Y.sigma2}")
    Q = max(Ys, default=1)
    expected = [p for p in primes_up_to(Q) if ens.level_q % p]
    if sorted(Ys) != expected:
        raise ValueError(f"minorants must be given for exactly the primes {expected}")
    _check_primes(ens, Ys)

    event = np.ones(ens.num_forms, dtype=bool)
    for p, Y in Ys.items():
        event &= Y(ens.column(p)) <= float(Y.threshold)
    probability = float(ens.weights[event].sum())

    gamma = {p: Y.gamma for p, Y in Ys.items()}
    H = Fraction(0)
    for m in friable_up_to(N, Q, ens.level_q):
        term = Fraction(1)
        for p in factorize(m):
            term *= gamma[p]
        H += term
    H_sqf = Fraction(0)
    for _, fac in _amplifier_moduli(Ys, N):
        H_sqf += math.prod((gamma[p] for p in fac), start=Fraction(1))

    xi = optimal_xi(Ys)
    A1, B1 = cor2_weighted_sums(Ys, N, xi)
    amp = amplifier_moment_values(ens, Ys, N, xi)
    moment = float(ens.weights @ amp**2)
    normalizer = 1 + N**s / ens.level_q
    const = moment / (normalizer * float(A1))
    chain = probability * float(B1) ** 2 <= moment * (1 + 1e-12)
    bound = normalizer / float(H)
    return SieveExperimentReport(
        probability=probability,
        probability_normalized=probability / ens.total_mass,
        total_mass=ens.total_mass,
        H=H,
        H_squarefree=H_sqf,
        bound=bound,
        bound_squarefree=normalizer / float(H_sqf),
        ratio=probability / bound,
        A1=A1,
        B1=B1,
        amplified_moment=moment,
        measured_const=const,
        chain_holds=bool(chain),
        metadata={
            "label": ens.label,
            "level_q": ens.level_q,
            "num_forms": ens.num_forms,
            "N": N,
            "Q": Q,
            "s": s,
            "num_primes": len(Ys),
            "normalizer": normalizer,
            "k": ens.k,
            # with k = 2 the Fourier-coefficient large sieve loses a factor log N
            "log_factor_caveat": ens.k == 2,
        },
    )


def integer_root(n: int, s: int) -> int:
    """``floor(n ** (1/s))`` in exact integer arithmetic."""
    r = int(round(n ** (1.0 / s)))
    while r**s > n:
        r -= 1
    while (r + 1) ** s <= n:
        r += 1
    return r


@dataclass(frozen=True)
class SignChangeReport:
    level_q: int
    A: float
    Q: int
    N: int
    s: int
    sieved: bool
    note: str
    set_probability: float
    members: int
    sieve: SieveExperimentReport | None
    psi_gamma_sum: Fraction | None
    lower_bound_target: float | None
    epsilon: float
    h_meets_lower_bound: bool | None
    probability_within_bound: bool | None


def sign_change_experiment(
    ens: Ensemble,
    A: float,
    *,
    Y: MinorantPoly | None = None,
    epsilon: float = 0.1,
) -> SignChangeReport:
    """Measure the forms with ``lambda_f(p) <= 0`` for every p <= (log q)^A.

    Uses the same minorant at every prime (default: the degree-2 sign
    minorant), ``N = floor(q^(1/s))`` and natural logarithms.
    """
    q = ens.level_q
    if q < 3:
        raise ValueError("level must be >= 3 so that log q > 1")
    Y = Y or MinorantPoly.sign_default()
    s = Y.s
    Q = math.floor(math.log(q) ** A)
    N = integer_root(q, s)
    primes = [p for p in primes_up_to(max(Q, 1)) if q % p]
    if Q >= 2 and Q > ens.prime_bound:
        raise ValueError(f"ensemble covers primes <= {ens.prime_bound}, need {Q}")
    inside = np.ones(ens.num_forms, dtype=bool)
    for p in primes:
        inside &= ens.column(p) <= 0
    set_probability = float(ens.weights[inside].sum())
    if Q < 2 or not primes:
        return SignChangeReport(q, A, Q, N, s, False, "Q < 2: no primes to sieve by", set_probability,
                                int(inside.sum()), None, None, None, epsilon, None, None)

    report = cor2_bound(ens, {p: Y for p in primes}, N)
    gamma = Y.gamma
    psi_sum = Fraction(0)
    for m in friable_up_to(N, Q, q):
        psi_sum += gamma ** len(factorize(m))
    target = q ** ((1 - 1 / A) / s - epsilon)
    return SignChangeReport(
        level_q=q,
        A=A,
        Q=Q,
        N=N,
        s=s,
        sieved=True,
        note="",
        set_probability=set_probability,
        members=int(inside.sum()),
        sieve=report,
        psi_gamma_sum=psi_sum,
        lower_bound_target=target,
        epsilon=epsilon,
        h_meets_lower_bound=bool(float(report.H) >= target),
        probability_within_bound=bool(report.probability <= report.measured_const / float(report.H)),
    )

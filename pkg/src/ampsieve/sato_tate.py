"""Chebyshev polynomials X_m, Sato-Tate integration and minorant polynomials.

``X_m(2 cos t) = sin((m+1) t) / sin t`` is orthonormal for the Sato-Tate
measure ``(1/pi) sqrt(1 - x^2/4) dx`` on [-2, 2].  A minorant polynomial is
stored by its coefficients in this basis, so its mean is the constant
coefficient and its variance the sum of squares of the others.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .arith import factorize

DEFAULT_PANELS = 2048


@dataclass(frozen=True)
class ChebyPoly:
    """``X_m`` with exact monomial coefficients, constant term first."""

    m: int
    coeffs: tuple[Fraction, ...]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for c in reversed(self.coeffs):
            out = out * x + float(c)
        return out


@lru_cache(maxsize=None)
def chebyshev_poly(m: int) -> ChebyPoly:
    """Build ``X_m`` from ``X_{m+1} = x X_m - X_{m-1}`` in exact arithmetic."""
    if m < 0:
        raise ValueError(f"degree must be >= 0, got {m}")
    if m == 0:
        return ChebyPoly(0, (Fraction(1),))
    if m == 1:
        return ChebyPoly(1, (Fraction(0), Fraction(1)))
    prev, cur = chebyshev_poly(m - 2).coeffs, chebyshev_poly(m - 1).coeffs
    shifted = (Fraction(0),) + cur
    padded = prev + (Fraction(0),) * (len(shifted) - len(prev))
    return ChebyPoly(m, tuple(a - b for a, b in zip(shifted, padded)))


def _check_range(x: np.ndarray) -> None:
    if np.any(np.abs(x) > 2):
        raise ValueError("argument outside [-2, 2]")


def cheby_table(x, m_max: int) -> np.ndarray:
    """Stack ``[X_0(x), ..., X_{m_max}(x)]`` along a new leading axis."""
    x = np.asarray(x, dtype=float)
    _check_range(x)
    out = np.empty((m_max + 1,) + x.shape)
    out[0] = 1.0
    if m_max >= 1:
        out[1] = x
    for j in range(2, m_max + 1):
        out[j] = x * out[j - 1] - out[j - 2]
    return out


def cheby_eval(m: int, x):
    """``X_m(x)`` by the three-term recurrence; ``x`` may be an array."""
    if m < 0:
        raise ValueError(f"degree must be >= 0, got {m}")
    value = cheby_table(x, m)[m]
    return float(value) if np.ndim(value) == 0 else value


def _simpson_nodes(panels: int) -> tuple[np.ndarray, np.ndarray]:
    if panels % 2:
        raise ValueError("Simpson's rule needs an even number of panels")
    theta = np.linspace(0.0, np.pi, panels + 1)
    w = np.full(panels + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    w *= (np.pi / panels) / 3.0
    # t = 2 cos(theta) turns d(mu_ST) into (2/pi) sin^2(theta) d(theta)
    return 2.0 * np.cos(theta), w * (2.0 / np.pi) * np.sin(theta) ** 2


def st_integral(f: Callable, panels: int = DEFAULT_PANELS) -> float:
    """``int f d(mu_ST)`` by composite Simpson in the angle variable.

    ``f`` must accept a numpy array of points in [-2, 2].
    """
    t, w = _simpson_nodes(panels)
    values = np.broadcast_to(np.asarray(f(t), dtype=float), t.shape)
    return float(values @ w)


def nu_integral(f: Callable[[Mapping[int, np.ndarray]], np.ndarray], primes: Sequence[int], panels: int = 512) -> float:
    """Integrate against the product Sato-Tate measure over the given primes.

    ``f`` receives ``{p: coordinate array}`` on a tensor grid; keep the
    number of primes small (the grid has ``(panels+1)**len(primes)`` nodes).
    """
    if not primes:
        return float(f({}))
    t, w = _simpson_nodes(panels)
    grids = np.meshgrid(*([t] * len(primes)), indexing="ij")
    weights = np.ones(grids[0].shape)
    for g in np.meshgrid(*([w] * len(primes)), indexing="ij"):
        weights = weights * g
    values = np.asarray(f({p: g for p, g in zip(primes, grids)}), dtype=float)
    return float(np.sum(np.broadcast_to(values, weights.shape) * weights))


def lambda_big(m: int, t: Mapping[int, object]):
    """``prod_{p^k || m} X_k(t[p])``; ``t`` values may be arrays (one entry per form)."""
    result = 1.0
    for p, k in factorize(m).items():
        if p not in t:
            raise KeyError(f"no local value for prime {p} (needed by m={m})")
        result = result * cheby_eval(k, t[p])
    return result


def hecke_extend(lambda_p, j: int):
    """``lambda(p^j) = X_j(lambda(p))``, the Hecke relation at a single prime."""
    return cheby_eval(j, lambda_p)


# --- minorants ---------------------------------------------------------


@dataclass(frozen=True)
class MinorantPoly:
    """``Y = beta_0 + beta_1 X_1 + ... + beta_s X_s`` with detection gap ``delta``."""

    beta: tuple[Fraction, ...]
    delta: Fraction = field(default=Fraction(0))

    def __post_init__(self):
        object.__setattr__(self, "beta", tuple(Fraction(b) for b in self.beta))
        object.__setattr__(self, "delta", Fraction(self.delta))
        if not self.beta:
            raise ValueError("a minorant needs at least the constant coefficient")

    @property
    def s(self) -> int:
        return len(self.beta) - 1

    @property
    def beta0(self) -> Fraction:
        return self.beta[0]

    @property
    def sigma2(self) -> Fraction:
        return sum((b * b for b in self.beta[1:]), start=Fraction(0))

    @property
    def gamma(self) -> Fraction | None:
        """``delta^2 / sigma^2``, or None for a constant polynomial."""
        return None if self.sigma2 == 0 else self.delta**2 / self.sigma2

    @property
    def threshold(self) -> Fraction:
        """Values ``Y(x) <= beta_0 - delta`` define the condition set."""
        return self.beta0 - self.delta

    def monomial(self) -> tuple[Fraction, ...]:
        out = [Fraction(0)] * (self.s + 1)
        for j, b in enumerate(self.beta):
            for i, c in enumerate(chebyshev_poly(j).coeffs):
                out[i] += b * c
        return tuple(out)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        table = cheby_table(x, self.s)
        value = np.tensordot(np.array([float(b) for b in self.beta]), table, axes=1)
        return float(value) if value.ndim == 0 else value

    def oscillation(self, x):
        """``beta_0 - Y(x) = -sum_{i>=1} beta_i X_i(x)``; at least delta on the condition set."""
        return float(self.beta0) - self(x)

    @classmethod
    def sign_default(cls) -> "MinorantPoly":
        """``-1 + x/2 + x^2/4``, below sgn on [-2, 2] with mean -3/4 and gap 1/4."""
        return cls((Fraction(-3, 4), Fraction(1, 2), Fraction(1, 4)), Fraction(1, 4))

    def to_json(self) -> dict:
        return {"beta": [_frac_str(b) for b in self.beta], "delta": _frac_str(self.delta)}

    @classmethod
    def from_json(cls, data: dict) -> "MinorantPoly":
        return cls(tuple(Fraction(b) for b in data["beta"]), Fraction(data["delta"]))

    @classmethod
    def load(cls, path) -> "MinorantPoly":
        return cls.from_json(json.loads(Path(path).read_text()))


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class MinorantReport:
    minorizes: bool
    witness: float | None
    max_violation: float
    exact_check: bool | None
    critical_points: tuple[float, ...]
    nonpositive_detects: bool | None
    beta0: Fraction
    beta0_quadrature: float
    mean_above_floor: bool | None
    delta: Fraction
    sigma2: Fraction
    gamma: Fraction | None
    grid_points: int

    @property
    def passed(self) -> bool:
        return self.minorizes and self.exact_check is not False and self.mean_above_floor is not False


def _exact_max(mono: Sequence[Fraction], lo: int, hi: int):
    """Exact maximum of a polynomial of degree <= 3 over [lo, hi], and its critical points."""
    import sympy

    x = sympy.Symbol("x", real=True)
    poly = sum(sympy.Rational(c.numerator, c.denominator) * x**i for i, c in enumerate(mono))
    candidates = [sympy.Integer(lo), sympy.Integer(hi)]
    crit = []
    if sympy.degree(poly, x) >= 2:
        for r in sympy.real_roots(sympy.Poly(sympy.diff(poly, x), x)):
            if lo < r < hi:
                crit.append(r)
    values = [poly.subs(x, c) for c in candidates + crit]
    return sympy.Max(*values), [float(c) for c in crit]


def verify_minorant(Y: MinorantPoly, target: str | Callable = "sign", grid_points: int = 100_000) -> MinorantReport:
    """Check that ``Y`` lies below ``target`` on [-2, 2].

    With ``target="sign"`` the check is exact for degree <= 3 (maxima of Y
    over [-2, 0] and [0, 2] via its critical points, compared with -1 and 1)
    and also confirms ``Y <= -1`` on [-2, 0], the implication used to turn
    ``lambda <= 0`` into a condition ``Y(lambda) <= beta_0 - delta``.  Any
    other callable target gets the grid check only.
    """
    mono = Y.monomial()
    crit_float: list[float] = []
    exact = None
    detects = None
    if target == "sign":
        target_fn = np.sign
        if Y.s <= 3:
            max_neg, crit_neg = _exact_max(mono, -2, 0)
            max_pos, crit_pos = _exact_max(mono, 0, 2)
            crit_float = sorted(set(crit_neg + crit_pos))
            detects = bool(max_neg <= -1)
            exact = bool(detects and max_pos <= 1)
        else:
            dmono = np.polynomial.Polynomial([float(c) for c in mono]).deriv()
            crit_float = sorted(float(r.real) for r in dmono.roots() if abs(r.imag) < 1e-12 and -2 < r.real < 2)
    elif callable(target):
        target_fn = target
    else:
        raise ValueError(f"unknown target {target!r}")

    xs = np.concatenate([np.linspace(-2.0, 2.0, grid_points), [-2.0, 0.0, 2.0], crit_float])
    gap = np.asarray(target_fn(xs), dtype=float) - Y(xs)
    worst = int(np.argmin(gap))
    minorizes = bool(gap[worst] >= -1e-12)
    if target == "sign" and detects is None:
        detects = bool(np.all(Y(xs[xs <= 0]) <= -1 + 1e-12))

    quad = st_integral(Y)
    return MinorantReport(
        minorizes=minorizes,
        witness=None if minorizes else float(xs[worst]),
        max_violation=float(max(0.0, -gap[worst])),
        exact_check=exact,
        critical_points=tuple(crit_float),
        nonpositive_detects=detects,
        beta0=Y.beta0,
        beta0_quadrature=quad,
        mean_above_floor=bool(Y.beta0 > -1) if target == "sign" else None,
        delta=Y.delta,
        sigma2=Y.sigma2,
        gamma=Y.gamma,
        grid_points=grid_points,
    )


def minorant_graph(Y: MinorantPoly, points: int = 401) -> list[tuple[float, float, float]]:
    """Rows ``(x, Y(x), sgn(x))`` for plotting."""
    xs = np.linspace(-2.0, 2.0, points)
    return [(float(x), float(y), float(np.sign(x))) for x, y in zip(xs, Y(xs))]

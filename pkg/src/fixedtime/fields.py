"""Correction fields, drift terms and the observer-canonical transform.

All gains are stored signed: a stabilizing design carries negative entries,
so field outputs are added to the dynamics without extra minus signs.
The scalar primitive is the signed power ``|x|**a * sign(x)`` which reduces
to the pure sign function at ``a == 0`` with ``sign(0) == 0``, keeping the
origin an equilibrium of every field built here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

__all__ = [
    "signed_power",
    "SignedPowerTerm",
    "PowerSum",
    "DriftG",
    "CorrectionField",
    "LinearField",
    "HosmField",
    "CanonicalField",
    "build_canonical_transform",
    "FieldConstructionError",
]

_HURWITZ_MARGIN = -1e-9


class FieldConstructionError(ValueError):
    """A field's construction invariants were violated."""


def signed_power(x: float, a: float) -> float:
    """Odd power ``|x|**a * sign(x)``; pure sign for a == 0, sign(0) == 0."""
    if x > 0.0:
        return 1.0 if a == 0.0 else x**a
    if x < 0.0:
        return -1.0 if a == 0.0 else -((-x) ** a)
    return 0.0


@dataclass(frozen=True)
class SignedPowerTerm:
    """One term ``coefficient * |x|**exponent * sign(x)``."""

    coefficient: float
    exponent: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.exponent) and self.exponent >= 0.0):
            raise FieldConstructionError(f"exponent must be finite and >= 0, got {self.exponent!r}")
        if not math.isfinite(self.coefficient):
            raise FieldConstructionError("coefficient must be finite")


@dataclass(frozen=True)
class PowerSum:
    """Finite sum of signed-power terms; odd by construction."""

    terms: tuple[SignedPowerTerm, ...]

    @classmethod
    def of(cls, *pairs: tuple[float, float]) -> "PowerSum":
        return cls(tuple(SignedPowerTerm(c, e) for c, e in pairs))

    def __call__(self, x: float) -> float:
        return sum(t.coefficient * signed_power(x, t.exponent) for t in self.terms)


def _check_hurwitz(A: np.ndarray, what: str) -> None:
    reals = np.linalg.eigvals(A).real
    if reals.max() >= _HURWITZ_MARGIN:
        raise FieldConstructionError(
            f"{what} is not Hurwitz (max eigenvalue real part {reals.max():.3e})"
        )


def shift_matrix(n: int) -> np.ndarray:
    """Upper shift matrix: ones on the superdiagonal, zeros elsewhere."""
    return np.eye(n, k=1)


@dataclass(frozen=True)
class DriftG:
    """Terminal drift: component i is ``l_i * spow(x1, (n - i*m)/n)``.

    ``m = 0`` gives a linear output-injection drift, gated on the companion
    polynomial ``s^n - l_1 s^(n-1) - ... - l_n`` being Hurwitz. ``m = 1``
    gives the discontinuous sliding-mode drift whose gains come from
    published tables and are not gated here.
    """

    n: int
    m: int
    l: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise FieldConstructionError("order n must be >= 1")
        if self.m not in (0, 1):
            raise FieldConstructionError("m must be 0 or 1")
        if len(self.l) != self.n:
            raise FieldConstructionError(f"expected {self.n} gains, got {len(self.l)}")
        if self.m == 0:
            coeffs = np.concatenate(([1.0], -np.asarray(self.l, dtype=float)))
            if np.roots(coeffs).real.max() >= _HURWITZ_MARGIN:
                raise FieldConstructionError("companion polynomial of the m=0 drift is not Hurwitz")

    @property
    def exponents(self) -> tuple[float, ...]:
        return tuple((self.n - (i + 1) * self.m) / self.n for i in range(self.n))

    def eval(self, x1: float) -> np.ndarray:
        return np.array(
            [li * signed_power(x1, e) for li, e in zip(self.l, self.exponents)], dtype=float
        )


@dataclass(frozen=True)
class CorrectionField:
    """Base class: a map from the first state to an n-vector, plus the rate r."""

    n: int
    r: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise FieldConstructionError("order n must be >= 1")
        if not (math.isfinite(self.r) and self.r >= 0.0):
            raise FieldConstructionError(f"r must be finite and >= 0, got {self.r!r}")

    def eval(self, z1: float, tau: float = math.inf) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class LinearField(CorrectionField):
    """Output-injection field ``F(z1) = K * z1``; A0 + K C must be Hurwitz."""

    K: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        super().__post_init__()
        if len(self.K) != self.n:
            raise FieldConstructionError(f"expected {self.n} gains, got {len(self.K)}")
        A = shift_matrix(self.n)
        A[:, 0] += np.asarray(self.K, dtype=float)
        _check_hurwitz(A, "A0 + K C")

    @property
    def closed_loop(self) -> np.ndarray:
        A = shift_matrix(self.n)
        A[:, 0] += np.asarray(self.K, dtype=float)
        return A

    def eval(self, z1: float, tau: float = math.inf) -> np.ndarray:
        return np.asarray(self.K, dtype=float) * z1


@dataclass(frozen=True)
class HosmField(CorrectionField):
    """Sliding-mode field: component i is ``l_i * spow(z1, (n-i)/n)``."""

    l: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        super().__post_init__()
        if len(self.l) != self.n:
            raise FieldConstructionError(f"expected {self.n} gains, got {len(self.l)}")

    @property
    def exponents(self) -> tuple[float, ...]:
        return tuple((self.n - (i + 1)) / self.n for i in range(self.n))

    def eval(self, z1: float, tau: float = math.inf) -> np.ndarray:
        return np.array(
            [li * signed_power(z1, e) for li, e in zip(self.l, self.exponents)], dtype=float
        )


def build_canonical_transform(n: int, alpha: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Companion data for the chain-with-state-weights matrix.

    Returns ``(Gamma, a, Q)`` where ``Gamma`` has ones on the superdiagonal
    and ``0, -alpha, ..., -(n-1)*alpha`` on the diagonal, ``a`` holds the
    characteristic-polynomial coefficients of ``s^n + a_1 s^(n-1) + ... + a_n``
    obtained by convolving the linear factors, and ``Q`` is the similarity
    transform taking ``Gamma`` to observer-canonical form, computed as the
    inverse of ``V @ O`` with ``O`` the observability matrix of (Gamma, C)
    and ``V`` the unit lower-triangular Toeplitz matrix of the ``a_i``.
    """
    if n < 1:
        raise FieldConstructionError("order n must be >= 1")
    if not (math.isfinite(alpha) and alpha > 0.0):
        raise FieldConstructionError(f"alpha must be finite and > 0, got {alpha!r}")
    M = np.diag(np.arange(n, dtype=float))
    Gamma = shift_matrix(n) - alpha * M
    # char poly of diag(0, -a, ..., -(n-1)a): convolve (s + j*alpha) factors
    coeffs = np.array([1.0])
    for j in range(n):
        coeffs = np.convolve(coeffs, [1.0, j * alpha])
    a = coeffs[1:]
    C = np.zeros((1, n))
    C[0, 0] = 1.0
    obs_rows = [C[0]]
    for _ in range(n - 1):
        obs_rows.append(obs_rows[-1] @ Gamma)
    O = np.vstack(obs_rows)
    V = np.eye(n)
    for i in range(n):
        for j in range(i):
            V[i, j] = a[i - j - 1]
    VO = V @ O
    if not np.all(np.isfinite(VO)) or abs(np.linalg.det(VO)) < 1e-300:
        raise FieldConstructionError("V @ O is singular; cannot build the canonical transform")
    Q = np.linalg.inv(VO)
    return Gamma, a, Q


@dataclass(frozen=True)
class CanonicalField(CorrectionField):
    """Composite field ``F(x1) = Q @ (k_i * g_i(x1) + a_i * x1)_i``.

    ``g_i`` are signed-power sums. An optional early gain bank
    ``(early_k, early_g)`` is active while ``tau < switch_tau``; evaluation
    without a tau argument uses the late (design) bank. ``Q`` and ``a`` come
    from :func:`build_canonical_transform` at the field's ``alpha``.
    """

    k: tuple[float, ...] = ()
    g: tuple[PowerSum, ...] = ()
    alpha: float = 1.0
    early_k: tuple[float, ...] | None = None
    early_g: tuple[PowerSum, ...] | None = None
    switch_tau: float = math.inf
    # derived companion data
    Gamma: np.ndarray = dc_field(init=False, repr=False, compare=False, default=None)
    a: np.ndarray = dc_field(init=False, repr=False, compare=False, default=None)
    Q: np.ndarray = dc_field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self) -> None:
        super().__post_init__()
        if len(self.k) != self.n or len(self.g) != self.n:
            raise FieldConstructionError(f"expected {self.n} gains and {self.n} shape functions")
        if (self.early_k is None) != (self.early_g is None):
            raise FieldConstructionError("early_k and early_g must be given together")
        if self.early_k is not None and (
            len(self.early_k) != self.n or len(self.early_g) != self.n
        ):
            raise FieldConstructionError("early gain bank must match the order n")
        Gamma, a, Q = build_canonical_transform(self.n, self.alpha)
        object.__setattr__(self, "Gamma", Gamma)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "Q", Q)

    def _bank(self, tau: float) -> tuple[tuple[float, ...], tuple[PowerSum, ...]]:
        if self.early_k is not None and tau < self.switch_tau:
            return self.early_k, self.early_g
        return self.k, self.g

    def eval(self, z1: float, tau: float = math.inf) -> np.ndarray:
        k, g = self._bank(tau)
        inner = np.array([ki * gi(z1) + ai * z1 for ki, gi, ai in zip(k, g, self.a)], dtype=float)
        return self.Q @ inner

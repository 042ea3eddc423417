"""Small-divisor certification and resonance screening.

A frequency vector mu is of type (C, nu) when
``|exp(2*pi*i*<mu,k>) - 1| > C / |k|_1^nu`` for every nonzero integer
vector k.  `certify` scans the 1-norm ball exhaustively and reports the
best constant achieved up to the cutoff; that is finite-K *evidence*,
not a proof, and callers are expected to record (C_best, K_checked)
alongside any result that leans on it.

Divisors are evaluated as ``2*|sin(pi*frac(<mu,k>))|`` (chord length of
the unit circle), with the fractional part reduced exactly in rational
arithmetic for the near-resonant candidates so that tiny divisors are
not swamped by cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BudgetExceededError, CatalogLookupError, ValidationError

__all__ = [
    "DiophantineCertificate",
    "certify",
    "resonance_screen",
    "suggest_quadratic_irrational",
    "QUADRATIC_IRRATIONALS",
]

_DEFAULT_BUDGET = 60_000_000


@dataclass(frozen=True)
class DiophantineCertificate:
    """Finite-K evidence for the small-divisor condition.

    C_best is the minimum of ``divisor * |k|_1^nu`` over the scanned
    modes and worst_k the canonical representative attaining it (first
    nonzero entry positive; -k gives the same divisor).
    """

    mu: tuple[float, ...]
    nu: float
    K_checked: int
    C_best: float
    worst_k: tuple[int, ...]

    def lower_bound(self, k_abs1: float) -> float:
        """Certified divisor lower bound C_best / |k|^nu (|k| <= K only)."""
        return self.C_best / float(k_abs1) ** self.nu

    def to_record(self) -> dict:
        return {
            "mu": list(self.mu),
            "nu": self.nu,
            "K_checked": self.K_checked,
            "C_best": self.C_best,
            "worst_k": list(self.worst_k),
        }


def _canonical_half_lattice(m: int, K: int) -> np.ndarray:
    """All k with 0 < |k|_1 <= K and first nonzero component positive."""
    rng = np.arange(-K, K + 1)
    grids = np.meshgrid(*([rng] * m), indexing="ij")
    k = np.stack([g.reshape(-1) for g in grids], axis=1)
    abs1 = np.abs(k).sum(axis=1)
    keep = (abs1 > 0) & (abs1 <= K)
    k = k[keep]
    # first nonzero component positive
    lead = np.zeros(len(k))
    for j in range(m):
        col = k[:, j]
        lead = np.where(lead == 0, col, lead)
    return k[lead > 0]


def _exact_divisor(mu: tuple[float, ...], k: np.ndarray) -> float:
    """2|sin(pi <mu,k>)| with the fractional reduction done in rationals."""
    total = Fraction(0)
    for mi, ki in zip(mu, k):
        total += Fraction(float(mi)) * int(ki)
    frac = total - round(total)
    if frac == 0:
        return 0.0
    return 2.0 * abs(math.sin(math.pi * float(frac)))


def certify(mu, nu: float, K: int, work_budget: int = _DEFAULT_BUDGET) -> DiophantineCertificate:
    """Exhaustive small-divisor scan over 0 < |k|_1 <= K.

    Only half the lattice is visited (k and -k share their divisor).  A
    scan whose work estimate m*(2K+1)^m exceeds `work_budget` raises
    BudgetExceededError carrying the largest cutoff that would fit and,
    when at least K=1 fits, the completed certificate for it.
    """
    mu_t = tuple(float(v) for v in np.atleast_1d(np.asarray(mu, dtype=float)))
    m = len(mu_t)
    if K < 1:
        raise ValidationError("need K >= 1")
    if nu <= 0:
        raise ValidationError("need nu > 0")
    if m * (2 * K + 1) ** m > work_budget:
        K_fit = 0
        while m * (2 * (K_fit + 1) + 1) ** m <= work_budget:
            K_fit += 1
        partial = certify(mu_t, nu, K_fit, work_budget) if K_fit >= 1 else None
        raise BudgetExceededError(
            f"scan work {m * (2 * K + 1) ** m} exceeds budget {work_budget}; "
            f"largest affordable cutoff is K={K_fit}",
            completed_K=K_fit,
            partial=partial,
        )

    lattice = _canonical_half_lattice(m, K)
    abs1 = np.abs(lattice).sum(axis=1).astype(float)
    theta = lattice @ np.asarray(mu_t)
    frac = theta - np.round(theta)
    div = 2.0 * np.abs(np.sin(math.pi * frac))
    scaled = div * abs1**nu

    # refine the near-minimal candidates with exact argument reduction
    n_ref = min(len(scaled), 128)
    cand = np.argpartition(scaled, n_ref - 1)[:n_ref]
    best_val = math.inf
    best_k = None
    for idx in cand:
        k = lattice[idx]
        val = _exact_divisor(mu_t, k) * float(abs1[idx]) ** nu
        key = (val, tuple(int(v) for v in k))
        if best_k is None or key < (best_val, best_k):
            best_val, best_k = key
    return DiophantineCertificate(
        mu=mu_t,
        nu=float(nu),
        K_checked=int(K),
        C_best=float(best_val),
        worst_k=best_k,
    )


def resonance_screen(alpha, K: int, tol: float = 1e-9) -> list[tuple[int, ...]]:
    """Integer combinations of the base frequencies that sit near integers.

    Returns every canonical k with 0 < |k|_1 <= K and
    dist(<alpha, k>, Z) < tol, ordered by |k|_1 then lexicographically;
    an empty list certifies non-resonance up to the cutoff.
    """
    alpha_t = tuple(float(v) for v in np.atleast_1d(np.asarray(alpha, dtype=float)))
    if K < 1:
        raise ValidationError("need K >= 1")
    m = len(alpha_t)
    lattice = _canonical_half_lattice(m, K)
    theta = lattice @ np.asarray(alpha_t)
    dist = np.abs(theta - np.round(theta))
    hits = lattice[dist < tol]
    out = [tuple(int(v) for v in k) for k in hits]
    out.sort(key=lambda k: (sum(abs(v) for v in k), k))
    return out


QUADRATIC_IRRATIONALS: tuple[float, ...] = (
    (math.sqrt(5.0) - 1.0) / 2.0,  # golden mean fractional part
    math.sqrt(2.0) - 1.0,  # silver mean fractional part
    math.sqrt(3.0) - 1.0,
    (math.sqrt(13.0) - 3.0) / 2.0,
    math.sqrt(5.0) - 2.0,
    (math.sqrt(2.0)) / 2.0,
)


def suggest_quadratic_irrational(index: int) -> float:
    """Catalogued badly-approximable test frequency (correctly rounded)."""
    try:
        return QUADRATIC_IRRATIONALS[int(index)]
    except (IndexError, ValueError) as exc:
        raise CatalogLookupError(
            f"no catalogued quadratic irrational with index {index}"
        ) from exc

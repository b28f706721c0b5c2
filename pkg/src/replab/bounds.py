"""Closed-form bounds and approximations on the pruning probability of REP.

All functions are pure and work on Python floats.  The normal CDF is the
only numerical kernel; everything else is a direct formula on top of it.

Notation used in argument names:

``n``       pruning examples
``k``       safe nodes
``p``       probability of the positive class, p > 1/2
``c``       threshold multiplier: a safe node is "small" when it gets at most c*n/k examples
``lam``     deviation from the mean
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from replab.errors import DomainError

_SQRT2 = math.sqrt(2.0)
# slack for float round-off in the h-range check of Slud's inequality
_RANGE_EPS = 1e-12


@dataclass(frozen=True)
class BoundParams:
    n: int
    k: int
    p: float = 0.75
    c: float = 1.0
    lam: float = 0.0

    def __post_init__(self):
        if self.n < 1 or self.k < 1:
            raise DomainError(f"need n >= 1 and k >= 1, got n={self.n}, k={self.k}")
        if not 0.5 < self.p <= 1.0:
            raise DomainError(f"need 0.5 < p <= 1, got p={self.p}")
        if self.c <= 0:
            raise DomainError(f"need c > 0, got c={self.c}")
        if self.lam < 0:
            raise DomainError(f"need lambda >= 0, got lambda={self.lam}")


def normal_cdf(x: float) -> float:
    """Standard normal CDF.

    Written through ``erfc`` so the lower tail keeps full relative accuracy;
    ``0.5 * (1 + erf(x / sqrt 2))`` would cancel to 0 for x below about -8.
    """
    return 0.5 * math.erfc(-x / _SQRT2)


def _check_p(p: float) -> None:
    if not 0.5 < p <= 1.0:
        raise DomainError(f"need 0.5 < p <= 1, got p={p}")


def slud_lower_bound(m: int, q: float, h: float) -> float:
    """Lower bound on Pr{X >= h} for X ~ B(m, q), valid for q <= 1/2 and mq <= h <= m(1-q)."""
    if m < 1:
        raise DomainError(f"need m >= 1, got m={m}")
    if not 0.0 < q <= 0.5:
        raise DomainError(f"need 0 < q <= 1/2, got q={q}")
    if h < m * q - _RANGE_EPS:
        raise DomainError(f"need h >= m*q ({m * q}), got h={h}")
    if h > m * (1 - q) + _RANGE_EPS:
        raise DomainError(f"need h <= m*(1-q) ({m * (1 - q)}), got h={h}")
    return 1.0 - normal_cdf((h - m * q) / math.sqrt(m * q * (1 - q)))


def _majority_z(size: float, p: float, continuity: bool) -> float:
    # standardized distance of size/2 from the mean negative count size*(1-p)
    if p == 1.0:
        return math.inf
    shift = (p - 0.5) * size + (0.5 if continuity else 0.0)
    return shift / math.sqrt(size * p * (1 - p))


def negative_majority_bound(n_i: int, p: float, continuity: bool = False) -> float:
    """Lower bound on the chance that a node reached by ``n_i`` examples has a negative majority.

    With ``continuity=True`` the threshold is moved up by half an example,
    bounding Pr{X >= n_i/2 + 1/2} instead of Pr{X >= n_i/2}.
    """
    if n_i < 1:
        raise DomainError(f"need n_i >= 1, got n_i={n_i}")
    _check_p(p)
    return 1.0 - normal_cdf(_majority_z(n_i, p, continuity))


def eq2_pruning_upper_bound(n: int, k: int, p: float, continuity: bool = False) -> float:
    """Upper bound on the probability that REP collapses a tree with k safe nodes to one leaf.

    At least half of the safe nodes get at most r = 2n/k examples, and each
    of them must independently end up with a positive majority.
    """
    if k < 1 or n < k:
        raise DomainError(f"need n >= k >= 1, got n={n}, k={k}")
    _check_p(p)
    r = 2.0 * n / k
    return normal_cdf(_majority_z(r, p, continuity)) ** (k / 2.0)


def eq4_expected_small_nodes(n: int, k: int, c: float) -> float:
    """Normal approximation of E[#safe nodes receiving at most c*n/k examples] under uniform routing."""
    if k < 2:
        raise DomainError(f"need k >= 2, got k={k}")
    if n < 1:
        raise DomainError(f"need n >= 1, got n={n}")
    if c <= 0:
        raise DomainError(f"need c > 0, got c={c}")
    mean = n / k
    return k * normal_cdf((c - 1) * mean / math.sqrt(mean * (1 - 1 / k)))


def occupancy_expected_empty(m: int, h: int) -> tuple[float, float]:
    """Expected number of empty bins after m balls go into h bins: (exact, exponential approximation)."""
    if m < 0 or h < 1:
        raise DomainError(f"need m >= 0 and h >= 1, got m={m}, h={h}")
    exact = h * (1 - 1 / h) ** m
    return exact, h * math.exp(-m / h)


def occupancy_deviation_bound(h: int, mu: float, lam: float) -> float:
    """Tail bound Pr{|Z - mu| >= lam} for the empty-bin count Z."""
    if h < 1:
        raise DomainError(f"need h >= 1, got h={h}")
    if not 0 <= mu < h:
        raise DomainError(f"need 0 <= mu < h, got mu={mu}, h={h}")
    if lam < 0:
        raise DomainError(f"need lambda >= 0, got {lam}")
    return 2.0 * math.exp(-lam * lam * (h - 0.5) / (h * h - mu * mu))


class Eq5Value(NamedTuple):
    bound: float
    exponent_P: float
    vacuous: bool


def eq5_uniform_pruning_bound(n: int, k: int, p: float, c: float, continuity: bool = False) -> Eq5Value:
    """Pruning-probability bound under uniform routing of examples to safe nodes.

    The exponent is the expected number of safe nodes that get between one
    and c*n/k examples.  When that expectation is not positive the bound is
    reported as 1 and flagged vacuous.
    """
    _check_p(p)
    exponent = eq4_expected_small_nodes(n, k, c) - k * math.exp(-n / k)
    if exponent <= 0:
        return Eq5Value(1.0, exponent, True)
    r = c * n / k
    return Eq5Value(normal_cdf(_majority_z(r, p, continuity)) ** exponent, exponent, False)


def mcdiarmid_bound(n: int, lam: float) -> float:
    """Bounded-differences tail 2 exp(-2 lam^2 / n) for a 1-Lipschitz function of n independent draws."""
    if n < 1:
        raise DomainError(f"need n >= 1, got n={n}")
    if lam < 0:
        raise DomainError(f"need lambda >= 0, got {lam}")
    return 2.0 * math.exp(-2.0 * lam * lam / n)


def p_deviation_bound(n: int, k: int, ER: float, lam: float) -> float:
    """Union of the half-deviation tails of Q (McDiarmid) and R (occupancy) for P = Q - R."""
    if n < 1 or k < 1:
        raise DomainError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    if not 0 <= ER < k:
        raise DomainError(f"need 0 <= E[R] < k, got {ER}")
    if lam < 0:
        raise DomainError(f"need lambda >= 0, got {lam}")
    q_part = 2.0 * math.exp(-lam * lam / (2.0 * n))
    r_part = 2.0 * math.exp(-lam * lam * (k - 0.5) / (4.0 * (k * k - ER * ER)))
    return q_part + r_part

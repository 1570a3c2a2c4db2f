"""Negative tail of the first-order Gaussian position density.

For ``l > 0`` the density ``(1 + 2 l x / a**2) exp(-x**2 / a**2) / (sqrt(pi) a)``
is negative on ``x < x0 = -a**2 / (2 l)``. Its tail moments
``<x**n>_0 = int_{-inf}^{x0} x**n P dx`` reduce to upper incomplete gamma
functions at ``sigma = a**2 / (4 l**2)``; for large ``sigma`` they are
exponentially small, ``~ e**-sigma``.
"""

from __future__ import annotations

import math

from .errors import DomainError
from .position import GaussianPacket
from .special import incomplete_gamma
from .survival import SurvivalDistribution

SQRT_PI = math.sqrt(math.pi)


def _sigma(a: float, l: float) -> float:
    if not a > 0:
        raise DomainError("a must be positive")
    if not l > 0:
        raise DomainError("tail moments need a positive drift l")
    return a * a / (4.0 * l * l)


def tail_moment_exact(n: int, a: float, l: float) -> float:
    """``<x**n>_0`` in closed form through the upper incomplete gamma function."""
    s = _sigma(a, l)
    return ((-a) ** n / (2.0 * SQRT_PI)
            * (incomplete_gamma((n + 1) / 2.0, s) - incomplete_gamma((n + 2) / 2.0, s) / math.sqrt(s)))


def tail_moment_asymptotic(n: int, a: float, l: float) -> float:
    """Leading large-``sigma`` term ``(-1)**(n+1) a**n (a / 2l)**(n-3) e**-sigma / (4 sqrt(pi))``."""
    s = _sigma(a, l)
    return (-1) ** (n + 1) * a ** n * (a / (2.0 * l)) ** (n - 3) * math.exp(-s) / (4.0 * SQRT_PI)


def full_moment(n: int, a: float, l: float) -> float:
    """Moments of the whole first-order density: 1, ``l``, ``a**2 / 2``."""
    if n == 0:
        return 1.0
    if n == 1:
        return l
    if n == 2:
        return a * a / 2.0
    raise DomainError("only n = 0, 1, 2 are available")


def normalization_excess(a: float, l: float) -> float:
    """``Q - 1 = -<1>_0`` without the cancellation of forming ``Q`` first."""
    return -tail_moment_exact(0, a, l)


def normalization_excess_asymptotic(a: float, l: float) -> float:
    """Leading term ``(2 / sqrt(pi)) (l / a)**3 e**-sigma`` of ``Q - 1``."""
    return 2.0 / SQRT_PI * (l / a) ** 3 * math.exp(-_sigma(a, l))


def normalization_exact(a: float, l: float) -> float:
    """Mass ``Q`` of the positive region, ``1 - <1>_0``."""
    return 1.0 + normalization_excess(a, l)


def normalization_asymptotic(a: float, l: float) -> float:
    """``Q ~ 1 + (2 / sqrt(pi)) (l / a)**3 e**-sigma``."""
    return 1.0 + normalization_excess_asymptotic(a, l)


def renormalized_moment(n: int, a: float, l: float) -> float:
    """Moment of the clipped, renormalized density: ``(<x**n> - <x**n>_0) / Q``."""
    return (full_moment(n, a, l) - tail_moment_exact(n, a, l)) / normalization_exact(a, l)


def tail_moments(pk: GaussianPacket, dist: SurvivalDistribution, n: int) -> tuple[float, float]:
    """``(exact, asymptotic)`` tail moment for a packet and survival law.

    Raises `DomainError` outside the asymptotic regime ``sigma > 1``.
    """
    if n not in (0, 1, 2):
        raise DomainError("only n = 0, 1, 2 are available")
    l = abs(pk.drift(dist))
    if l == 0 or pk.sigma(dist) <= 1:
        raise DomainError("tail asymptotics need sigma = a**2 / (4 l**2) > 1")
    return tail_moment_exact(n, pk.a, l), tail_moment_asymptotic(n, pk.a, l)

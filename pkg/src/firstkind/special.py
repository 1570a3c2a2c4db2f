"""Upper incomplete gamma function ``Gamma(lam, sigma) = int_sigma^inf t**(lam-1) e**-t dt``."""

from __future__ import annotations

import math

from .errors import ConvergenceError, DomainError

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000


def _lower_series(lam: float, sigma: float) -> float:
    # gamma(lam, sigma) = sigma**lam e**-sigma sum_n sigma**n / (lam (lam+1) ... (lam+n))
    term = 1.0 / lam
    total = term
    ap = lam
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= sigma / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * math.exp(lam * math.log(sigma) - sigma)
    raise ConvergenceError(f"incomplete gamma series did not converge (lam={lam}, sigma={sigma})")


def _upper_continued_fraction(lam: float, sigma: float) -> float:
    # modified Lentz evaluation of the Legendre continued fraction
    b = sigma + 1.0 - lam
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - lam)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h * math.exp(lam * math.log(sigma) - sigma)
    raise ConvergenceError(f"incomplete gamma continued fraction did not converge (lam={lam}, sigma={sigma})")


def incomplete_gamma(lam: float, sigma: float) -> float:
    """Upper incomplete gamma function (not regularized).

    Series for ``sigma < lam + 1``, continued fraction otherwise; relative
    accuracy is close to machine precision in both regimes.
    """
    if not lam > 0:
        raise DomainError("lam must be positive")
    if sigma < 0:
        raise DomainError("sigma must be non-negative")
    if sigma == 0:
        return math.gamma(lam)
    if sigma < lam + 1.0:
        return math.gamma(lam) - _lower_series(lam, sigma)
    return _upper_continued_fraction(lam, sigma)


def incomplete_gamma_asymptotic(lam: float, sigma: float, terms: int = 3) -> float:
    """Large-``sigma`` expansion ``sigma**(lam-1) e**-sigma [1 + (lam-1)/sigma + ...]`` truncated to ``terms``."""
    total, term = 0.0, 1.0
    for k in range(terms):
        total += term
        term *= (lam - 1.0 - k) / sigma
    return sigma ** (lam - 1.0) * math.exp(-sigma) * total

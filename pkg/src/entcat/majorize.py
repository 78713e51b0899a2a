"""Ordered spectra, majorization and product spectra.

A spectrum is a plain 1-D float array sorted nonincreasingly; :func:`as_spectrum`
validates and normalizes input into that form.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .config import DEFAULT
from .errors import StateError

# products closer than this count as tied when ordering them
TIE_TOL = 1e-12


def as_spectrum(values: Sequence[float], tol=DEFAULT) -> np.ndarray:
    """Validate a probability vector and return it sorted nonincreasingly.

    Entries within ``tol.spectrum_entry`` of [0, 1] are clamped into range.
    """
    v = np.asarray(values, dtype=float).reshape(-1)
    if v.size == 0:
        raise StateError("empty spectrum")
    if not np.all(np.isfinite(v)):
        raise StateError("spectrum entries must be finite")
    if v.min() < -tol.spectrum_entry or v.max() > 1 + tol.spectrum_entry:
        raise StateError(f"spectrum entries outside [0, 1]: {v.tolist()}")
    v = np.clip(v, 0.0, 1.0)
    if abs(np.sum(v) - 1.0) > tol.spectrum_sum:
        raise StateError(f"spectrum sums to {np.sum(v)!r}, not 1")
    out = np.sort(v)[::-1]
    out.setflags(write=False)
    return out


def pad(*spectra: np.ndarray) -> List[np.ndarray]:
    """Zero-pad spectra to a common length."""
    n = max(len(s) for s in spectra)
    return [np.concatenate([s, np.zeros(n - len(s))]) for s in spectra]


def prefix_sums(values: Sequence[float]) -> np.ndarray:
    """Running sums with Neumaier compensation."""
    out = np.empty(len(values))
    total = comp = 0.0
    for i, x in enumerate(values):
        x = float(x)
        t = total + x
        if abs(total) >= abs(x):
            comp += (total - t) + x
        else:
            comp += (x - t) + total
        total = t
        out[i] = total + comp
    return out


@dataclass(frozen=True)
class MajorizationResult:
    """Outcome of ``alpha < beta``; truthy when the relation holds.

    ``k`` is the smallest (1-based) violating prefix length, if any.
    """

    holds: bool
    k: Optional[int]
    alpha_sum: Optional[float]
    beta_sum: Optional[float]
    prefix_alpha: List[float] = field(repr=False)
    prefix_beta: List[float] = field(repr=False)

    def __bool__(self):
        return self.holds

    def as_dict(self) -> dict:
        return {
            "holds": self.holds,
            "violating_k": self.k,
            "alpha_sum": self.alpha_sum,
            "beta_sum": self.beta_sum,
            "prefix_alpha": self.prefix_alpha,
            "prefix_beta": self.prefix_beta,
        }


def is_majorized(alpha, beta, tol: float = DEFAULT.majorization) -> MajorizationResult:
    """Test ``alpha < beta``: every prefix sum of alpha is at most beta's (+ tol).

    >>> bool(is_majorized([0.4, 0.4, 0.1, 0.1], [0.5, 0.25, 0.25]))
    False
    >>> is_majorized([0.4, 0.4, 0.1, 0.1], [0.5, 0.25, 0.25]).k
    2
    """
    a, b = pad(as_spectrum(alpha), as_spectrum(beta))
    pa, pb = prefix_sums(a), prefix_sums(b)
    for k in range(len(a) - 1):
        if pa[k] > pb[k] + tol:
            return MajorizationResult(False, k + 1, float(pa[k]), float(pb[k]),
                                      pa.tolist(), pb.tolist())
    return MajorizationResult(True, None, None, None, pa.tolist(), pb.tolist())


def product_spectrum(alpha, gamma) -> np.ndarray:
    """All products ``alpha_i * gamma_j`` sorted nonincreasingly."""
    a, g = as_spectrum(alpha), as_spectrum(gamma)
    return as_spectrum(np.outer(a, g).ravel())


def epsilon_order_radius(alpha, gamma) -> float:
    """Largest eps keeping every strict product order of ``alpha x gamma``.

    For a strict pair ``alpha_i gamma_j > alpha_k gamma_l`` any list ``beta``
    within eps of alpha entrywise satisfies
    ``beta_i gamma_j - beta_k gamma_l > gap - eps (gamma_j + gamma_l)``, so the
    minimum of ``gap / (gamma_j + gamma_l)`` over strict pairs is safe.
    Products closer than ``TIE_TOL`` are treated as ties and skipped.
    Returns ``inf`` when there is no strict pair.
    """
    a, g = as_spectrum(alpha), as_spectrum(gamma)
    prods = np.outer(a, g).ravel()
    gam = np.tile(g, len(a))
    gap = prods[:, None] - prods[None, :]
    denom = gam[:, None] + gam[None, :]
    strict = gap > TIE_TOL
    if not np.any(strict):
        return float("inf")
    return float(np.min(gap[strict] / denom[strict]))


def is_epsilon_list(beta, alpha, eps: float) -> bool:
    """True when ``max_i |beta_i - alpha_i| < eps`` after zero-padding."""
    b, a = pad(as_spectrum(beta), as_spectrum(alpha))
    return bool(np.max(np.abs(b - a)) < eps)


def is_majorized_batch(alpha: np.ndarray, beta: np.ndarray,
                       tol: float = DEFAULT.majorization) -> np.ndarray:
    """Row-wise majorization test for stacks of sorted, equal-length spectra."""
    pa = np.cumsum(alpha, axis=-1)[..., :-1]
    pb = np.cumsum(beta, axis=-1)[..., :-1]
    return np.all(pa <= pb + tol, axis=-1)


def product_spectrum_batch(alpha: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Row-wise sorted products of a stack of spectra with one fixed gamma."""
    prods = (alpha[..., :, None] * np.asarray(gamma)[None, :]).reshape(alpha.shape[0], -1)
    return -np.sort(-prods, axis=-1)

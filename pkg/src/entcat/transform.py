"""Pure-state LOCC decisions and the optimal conversion fidelity."""

import enum
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.optimize import minimize

from .config import DEFAULT
from .majorize import as_spectrum, is_majorized, pad, product_spectrum
from .qcore import PureState, schmidt_spectrum


class Decision(str, enum.Enum):
    POSSIBLE = "Possible"
    IMPOSSIBLE = "Impossible"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class Verdict:
    """A three-valued decision plus the data needed to re-check it."""

    decision: Decision
    certificate: dict = field(default_factory=dict)

    @property
    def possible(self) -> bool:
        return self.decision is Decision.POSSIBLE

    @property
    def impossible(self) -> bool:
        return self.decision is Decision.IMPOSSIBLE

    def as_dict(self) -> dict:
        return {"decision": self.decision.value, "certificate": self.certificate}


def spectrum_of(x: Union[PureState, np.ndarray, list]) -> np.ndarray:
    if isinstance(x, PureState):
        return as_spectrum(schmidt_spectrum(x))
    return as_spectrum(x)


def majorization_verdict(alpha, beta, tol: float = DEFAULT.majorization, **extra) -> Verdict:
    result = is_majorized(alpha, beta, tol)
    a, b = pad(as_spectrum(alpha), as_spectrum(beta))
    cert = {"criterion": "majorization", "alpha": a.tolist(), "beta": b.tolist(),
            "tol": tol, **result.as_dict(), **extra}
    return Verdict(Decision.POSSIBLE if result else Decision.IMPOSSIBLE, cert)


def locc_pure(psi, phi, tol: float = DEFAULT.majorization) -> Verdict:
    """Deterministic LOCC convertibility of pure states (Nielsen's criterion).

    ``psi`` and ``phi`` may be :class:`PureState` objects or spectra.
    """
    return majorization_verdict(spectrum_of(psi), spectrum_of(phi), tol)


def incommensurate(psi, phi, tol: float = DEFAULT.majorization) -> bool:
    return locc_pure(psi, phi, tol).impossible and locc_pure(phi, psi, tol).impossible


def overlap_objective(mu: np.ndarray, beta: np.ndarray) -> float:
    """``(sum_i sqrt(mu_i beta_i))**2`` for aligned Schmidt bases."""
    return float(np.sum(np.sqrt(np.clip(mu, 0, None) * beta)) ** 2)


def repair_feasible(mu, alpha) -> np.ndarray:
    """Map ``mu`` into ``{mu sorted, alpha < mu}``.

    Sorts, renormalizes, then mixes toward (1, 0, ..., 0), which majorizes
    everything, by the largest weight keeping each prefix constraint.
    Feasible points are returned unchanged.
    """
    a = as_spectrum(alpha)
    mu = np.clip(np.asarray(mu, dtype=float), 0.0, None)
    n = max(len(mu), len(a))
    mu, a = pad(mu, a)
    mu = np.sort(mu)[::-1] / np.sum(mu)
    pm, pa = np.cumsum(mu)[:-1], np.cumsum(a)[:-1]
    t = 1.0
    for k in range(n - 1):
        if pm[k] < pa[k]:
            t = min(t, (1.0 - pa[k]) / (1.0 - pm[k]))
    if t < 1.0:
        top = np.zeros(n)
        top[0] = 1.0
        mu = t * mu + (1 - t) * top
    return mu


@dataclass(frozen=True)
class ConversionOptimum:
    value: float
    mu: np.ndarray
    converged: bool
    starts: int


def maximize_conversion_overlap(alpha, beta, tol: float = DEFAULT.majorization) -> ConversionOptimum:
    """Maximize ``(sum sqrt(mu_i beta_i))**2`` over sorted ``mu`` with ``alpha < mu``.

    The square root of the objective is concave and the feasible set is a
    polytope, so every local optimum is global; restarts only guard against
    solver stalls. Each candidate is repaired to exact feasibility before it
    is scored, so the value never overshoots the true maximum.
    """
    a, b = pad(as_spectrum(alpha), as_spectrum(beta))
    n = len(a)
    if is_majorized(a, b, tol):
        return ConversionOptimum(1.0, b.copy(), True, 0)
    pa = np.cumsum(a)
    sb = np.sqrt(b)

    def neg(x):
        return -float(np.sum(sb * np.sqrt(np.clip(x, 0, None))))

    def neg_grad(x):
        return -sb / (2.0 * np.sqrt(np.clip(x, 1e-18, None)))

    cons = [{"type": "eq", "fun": lambda x: np.sum(x) - 1.0,
             "jac": lambda x: np.ones(n)}]
    if n > 1:
        diff = np.zeros((n - 1, n))
        diff[np.arange(n - 1), np.arange(n - 1)] = 1.0
        diff[np.arange(n - 1), np.arange(1, n)] = -1.0
        tri = np.tril(np.ones((n - 1, n)))
        cons.append({"type": "ineq", "fun": lambda x: diff @ x, "jac": lambda x: diff})
        cons.append({"type": "ineq", "fun": lambda x: tri @ x - pa[:-1], "jac": lambda x: tri})

    starts = [repair_feasible(b, a), a.copy(), repair_feasible((a + b) / 2, a)]
    best_val, best_mu, converged = overlap_objective(a, b), a.copy(), False
    for x0 in starts:
        res = minimize(neg, x0, jac=neg_grad, method="SLSQP", constraints=cons,
                       bounds=[(0.0, 1.0)] * n, options={"ftol": 1e-15, "maxiter": 500})
        mu = repair_feasible(res.x, a)
        val = overlap_objective(mu, b)
        converged = converged or bool(res.success)
        if val > best_val:
            best_val, best_mu = val, mu
    return ConversionOptimum(min(best_val, 1.0), best_mu, converged, len(starts))


def optimal_conversion_fidelity(alpha, beta, tol: float = DEFAULT.majorization) -> float:
    """Best overlap with a pure target of spectrum ``beta`` reachable from ``alpha``.

    Maximizes over deterministic pure-state conversions ``alpha -> mu`` with
    Schmidt bases aligned to the target. Equals 1 exactly when ``alpha < beta``.
    """
    return maximize_conversion_overlap(alpha, beta, tol).value


def recheck(verdict: Verdict, tol: float = None) -> bool:
    """Recompute a majorization-backed verdict from its own certificate."""
    cert = verdict.certificate
    if verdict.decision is Decision.UNKNOWN:
        return "budget" in cert or "reason" in cert
    tol = cert.get("tol", DEFAULT.majorization) if tol is None else tol
    if cert.get("criterion") == "catalytic_majorization":
        holds = bool(is_majorized(product_spectrum(cert["alpha"], cert["catalyst"]),
                                  product_spectrum(cert["beta"], cert["catalyst"]), tol))
    else:
        holds = bool(is_majorized(cert["alpha"], cert["beta"], tol))
    return holds == verdict.possible


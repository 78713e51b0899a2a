"""Catalysed conversions: fixed-catalyst decisions, catalyst search, and the
neighbourhoods where catalysis cannot help (pure states) or still can (mixed).
"""

import itertools
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .config import DEFAULT
from .errors import EntcatError
from .majorize import as_spectrum, epsilon_order_radius, is_majorized, pad, product_spectrum
from .transform import Decision, Verdict, majorization_verdict, spectrum_of


@dataclass(frozen=True)
class CatalystSearchConfig:
    max_dim: int = 2
    grid_steps: int = 40
    refine_iters: int = 40
    seed: int = 0  # grid search is deterministic; kept for report provenance

    def __post_init__(self):
        if self.max_dim < 2:
            raise ValueError("max_dim must be at least 2")
        if self.grid_steps < 10:
            raise ValueError("grid_steps must be at least 10")


def _catalytic_holds(alpha, beta, omega, tol) -> bool:
    return bool(is_majorized(product_spectrum(alpha, omega), product_spectrum(beta, omega), tol))


def elocc_with_catalyst(psi, phi, omega, tol: float = DEFAULT.majorization) -> Verdict:
    """Decide ``psi (x) omega -> phi (x) omega`` under LOCC.

    Arguments may be pure states or spectra. The certificate carries the
    joint prefix-sum table of both product spectra.
    """
    alpha, beta = pad(spectrum_of(psi), spectrum_of(phi))
    gamma = spectrum_of(omega)
    result = is_majorized(product_spectrum(alpha, gamma), product_spectrum(beta, gamma), tol)
    cert = {"criterion": "catalytic_majorization", "alpha": alpha.tolist(),
            "beta": beta.tolist(), "catalyst": gamma.tolist(), "tol": tol,
            **result.as_dict()}
    return Verdict(Decision.POSSIBLE if result else Decision.IMPOSSIBLE, cert)


def _top_sums(values: np.ndarray, c: float) -> np.ndarray:
    prods = np.sort(np.concatenate([c * values, (1 - c) * values]))[::-1]
    return np.cumsum(prods)


def qubit_catalyst_intervals(alpha, beta, tol: float = DEFAULT.majorization) -> List[Tuple[float, float]]:
    """Exact set of ``c in [1/2, 1)`` for which ``(c, 1-c)`` catalyses ``alpha -> beta``.

    Between consecutive points where two products swap order, every top-k
    sum is linear in c, so each constraint cuts a sub-interval that can be
    computed exactly from its values at the segment ends.
    """
    a, b = pad(as_spectrum(alpha), as_spectrum(beta))
    cuts = {0.5, 1.0}
    for vals in (a, b):
        for x, y in itertools.product(vals, vals):
            if x + y > 0:
                c = y / (x + y)
                if 0.5 < c < 1.0:
                    cuts.add(float(c))
    cuts = sorted(cuts)
    pieces = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        g_lo = _top_sums(a, lo) - _top_sums(b, lo)
        g_hi = _top_sums(a, hi) - _top_sums(b, hi)
        left, right = lo, hi
        for u, v in zip(g_lo[:-1], g_hi[:-1]):
            if u <= tol and v <= tol:
                continue
            if u > tol and v > tol:
                left, right = 1.0, 0.0
                break
            root = lo + (tol - u) * (hi - lo) / (v - u)
            if u > tol:
                left = max(left, root)
            else:
                right = min(right, root)
        if left <= right:
            pieces.append([left, right])
    merged = []
    for lo, hi in pieces:
        if merged and lo <= merged[-1][1] + 1e-15:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    # c = 1 is the trivial catalyst
    return [(lo, hi) for lo, hi in merged if lo < 1.0]


def _ordered_grid(k: int, steps: int):
    """Nonincreasing compositions of ``steps`` into k positive parts, lexicographic order."""
    def rec(remaining, parts, cap):
        if parts == 1:
            if 0 < remaining <= cap:
                yield (remaining,)
            return
        for first in range(min(cap, remaining - parts + 1), 0, -1):
            if first * parts < remaining:
                break
            for rest in rec(remaining - first, parts - 1, first):
                yield (first,) + rest
    points = [tuple(x / steps for x in comp) for comp in rec(steps, k, steps)]
    return sorted(points)


def _refine(alpha, beta, omega, iters, tol):
    """Bisect along each mass transfer e_i - e_last to the feasibility boundary."""
    omega = np.asarray(omega, dtype=float)
    k = len(omega)
    bounds = []
    for i in range(k - 1):
        direction = np.zeros(k)
        direction[i], direction[-1] = 1.0, -1.0
        extent = []
        for sign in (1.0, -1.0):
            lo, hi = 0.0, 1.0
            for _ in range(iters):
                mid = (lo + hi) / 2
                cand = omega + sign * mid * direction
                ok = (np.all(cand >= 0) and np.all(np.diff(cand) <= 1e-15)
                      and _catalytic_holds(alpha, beta, cand, tol))
                lo, hi = (mid, hi) if ok else (lo, mid)
            extent.append(lo)
        bounds.append({"coordinate": i, "raise": extent[0], "lower": extent[1]})
    return bounds


def catalyst_search(alpha, beta, cfg: CatalystSearchConfig = CatalystSearchConfig(),
                    tol: float = DEFAULT.majorization) -> Verdict:
    """Look for a catalyst of dimension 2..``cfg.max_dim``.

    Returns Possible with the catalyst spectrum, or Unknown once the budget
    is exhausted. Never returns Impossible: failing to find a catalyst on a
    grid proves nothing about larger or off-grid catalysts.
    """
    alpha, beta = pad(spectrum_of(alpha), spectrum_of(beta))
    if is_majorized(alpha, beta, tol):
        return majorization_verdict(alpha, beta, tol, catalyst=[1.0], search="trivial")
    checked = 0
    exact_intervals = None
    for k in range(2, cfg.max_dim + 1):
        found = None
        for point in _ordered_grid(k, cfg.grid_steps):
            checked += 1
            if _catalytic_holds(alpha, beta, point, tol):
                found = point
                break
        if k == 2:
            exact_intervals = qubit_catalyst_intervals(alpha, beta, tol)
            if found is None and exact_intervals:
                lo, hi = exact_intervals[0]
                found = ((lo + hi) / 2, 1 - (lo + hi) / 2)
        if found is not None:
            verdict = elocc_with_catalyst(alpha, beta, found, tol)
            verdict.certificate.update({
                "search": {"dim": k, "grid_steps": cfg.grid_steps,
                           "candidates_checked": checked,
                           "refinement": _refine(alpha, beta, found, cfg.refine_iters, tol)},
                "qubit_intervals": exact_intervals,
            })
            return verdict
    return Verdict(Decision.UNKNOWN, {
        "alpha": alpha.tolist(), "beta": beta.tolist(),
        "budget": {"max_dim": cfg.max_dim, "grid_steps": cfg.grid_steps,
                   "candidates_checked": checked},
        "qubit_intervals": exact_intervals,
    })


def catalysis_free_radius(alpha, gamma) -> float:
    """Overlap deficit below which no catalyst ``gamma`` can help.

    Returns ``delta = eps**2`` (capped at 1) where eps is the order-preserving
    radius of ``alpha x gamma``. Any pure ``phi`` with ``|<psi|phi>|^2 > 1 - delta``
    has trace distance below eps to psi, so its ordered marginal spectrum is
    an eps-list of alpha and every strict product order survives.
    """
    eps = epsilon_order_radius(alpha, gamma)
    return min(eps * eps, 1.0)


@dataclass(frozen=True)
class ClosePair:
    sigma: object
    rho: object
    omega: object
    lam: float
    fidelity: float
    trace: List[Tuple[float, float]] = field(repr=False)
    lemma1: Verdict = field(repr=False)
    catalysis: Verdict = field(repr=False)


LAMBDA_FLOOR = 1e-12


def close_mixed_catalysis_pair(delta: float, iters: int = 200, margin: float = 1e-8) -> ClosePair:
    """Mixed pair with fidelity above ``1 - delta`` that only ELOCC connects.

    Uses the worked rank-two example and bisects on the mixing weight for the
    largest weight whose fidelity still exceeds ``1 - delta + margin``.
    """
    from . import presets
    from .mixedcat import build_class, chi_of, lemma1_check
    from .qcore import uhlmann_fidelity

    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    psi, phi, eta = presets.source_state(), presets.target_state(), presets.product_state()
    trace = []

    def fid(lam):
        _, s, r = build_class(lam, psi, phi, eta)
        f = uhlmann_fidelity(s, r)
        trace.append((lam, f))
        return f

    target = 1.0 - delta + margin
    if fid(1.0) > target:
        lam = 1.0
    else:
        lo, hi = 0.0, 1.0
        for _ in range(iters):
            mid = (lo + hi) / 2
            if fid(mid) > target:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-15 * max(hi, 1e-300):
                break
        lam = lo
        if lam < LAMBDA_FLOOR:
            raise EntcatError(f"mixing weight {lam!r} fell below {LAMBDA_FLOOR}; delta too small")
    spec, sigma, rho = build_class(lam, psi, phi, eta)
    f = uhlmann_fidelity(sigma, rho)
    lemma = lemma1_check(spec)
    cat = elocc_with_catalyst(chi_of(psi, eta).normalized_spectrum, phi,
                              presets.CATALYST_SPECTRUM)
    if not (f > 1.0 - delta and lemma.impossible and cat.possible):
        raise EntcatError("constructed pair failed its own postconditions")
    return ClosePair(sigma, rho, presets.catalyst_state(), lam, f,
                     sorted(trace), lemma, cat)


@dataclass
class NeighbourhoodSample:
    delta: float
    samples: int
    locc_impossible: int  # samples with alpha not majorized by the sampled spectrum
    catalysis_flips: int  # of those, samples the catalyst would rescue
    min_overlap: float


def sample_catalysis_free_neighbourhood(psi, gamma, samples: int = 100_000, seed: int = 0,
                                        delta: float = None, batch: int = 20_000,
                                        tol: float = DEFAULT.majorization) -> NeighbourhoodSample:
    """Draw pure ``phi`` with ``|<psi|phi>|^2 > 1 - delta`` and count catalysis flips.

    ``phi = sqrt(1 - s) psi + sqrt(s) xi`` with ``s`` uniform in [0, delta) and
    ``xi`` a random unit vector orthogonal to psi. A flip is a sample where
    ``psi -> phi`` fails under LOCC but succeeds with catalyst ``gamma``.
    """
    from .majorize import is_majorized_batch, product_spectrum_batch
    from .qcore import schmidt_spectrum, schmidt_spectrum_batch

    gamma = as_spectrum(gamma)
    alpha = schmidt_spectrum(psi)
    if delta is None:
        delta = catalysis_free_radius(alpha, gamma)
    rng = np.random.default_rng(seed)
    v = psi.amplitudes
    dims = (psi.dim_a, psi.dim_b)
    alpha_prod = product_spectrum(alpha, gamma)
    impossible = flips = 0
    min_overlap = 1.0
    done = 0
    while done < samples:
        m = min(batch, samples - done)
        xi = rng.standard_normal((m, v.size)) + 1j * rng.standard_normal((m, v.size))
        xi -= np.outer(xi @ v.conj(), v)
        xi /= np.linalg.norm(xi, axis=1, keepdims=True)
        s = rng.uniform(0.0, delta, size=m)
        phase = np.exp(2j * np.pi * rng.uniform(size=m))
        phi = np.sqrt(1 - s)[:, None] * v[None, :] + (np.sqrt(s) * phase)[:, None] * xi
        phi /= np.linalg.norm(phi, axis=1, keepdims=True)
        overlap = np.abs(phi @ v.conj()) ** 2
        min_overlap = min(min_overlap, float(overlap.min()))
        beta = schmidt_spectrum_batch(phi.reshape(m, *dims))
        fails = ~is_majorized_batch(np.broadcast_to(alpha, beta.shape), beta, tol)
        rescued = is_majorized_batch(np.broadcast_to(alpha_prod, (m, alpha_prod.size)),
                                     product_spectrum_batch(beta, gamma), tol)
        impossible += int(fails.sum())
        flips += int((fails & rescued).sum())
        done += m
    return NeighbourhoodSample(delta, samples, impossible, flips, min_overlap)


def soundness_chain(psi, phi) -> dict:
    """Quantities linking overlap to marginal eigenvalue deviation for two pure states.

    The chain behind the catalysis-free radius is
    ``max_i |a_i - b_i| <= D(marginals) <= D(psi, phi) = sqrt(1 - |<psi|phi>|^2)``
    where a, b are the ordered marginal spectra and D the trace distance.
    """
    from .qcore import hermitian_eig, partial_trace_B, trace_distance, trace_distance_matrices

    amp = psi.overlap(phi)
    overlap = abs(amp) ** 2
    # norm of the part of phi orthogonal to psi; avoids cancellation in 1 - overlap
    orth = float(np.linalg.norm(phi.amplitudes - amp * psi.amplitudes))
    ra, rb = partial_trace_B(psi), partial_trace_B(phi)
    wa = hermitian_eig(ra)[0]
    wb = hermitian_eig(rb)[0]
    return {
        "overlap": overlap,
        "distance_from_overlap": orth,
        "trace_distance": trace_distance(psi, phi),
        "marginal_distance": trace_distance_matrices(ra, rb),
        "eigenvalue_deviation": float(np.max(np.abs(wa - wb))),
    }


def soundness_chain_holds(chain: dict, tol: float = 1e-9) -> bool:
    return (abs(chain["trace_distance"] - chain["distance_from_overlap"]) <= tol
            and chain["marginal_distance"] <= chain["trace_distance"] + tol
            and chain["eigenvalue_deviation"] <= chain["marginal_distance"] + tol)

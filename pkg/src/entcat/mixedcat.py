"""Rank-two mixtures of an entangled state with a product state.

Covers construction of the source/target pair, the LOCC necessary condition
based on the projected operator chi, the catalysed measurement protocol that
realizes the conversion with a catalyst, and fidelity bounds for raising the
weight of a target pure state.
"""

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .catalysis import elocc_with_catalyst
from .config import DEFAULT, Tolerances
from .errors import HypothesisError, ProtocolError
from .majorize import as_spectrum
from .qcore import (DensityMatrix, KrausPair, PureState, apply_separable_map, hermitian_eig,
                    partial_trace_B, schmidt_spectrum, trace_distance)
from .transform import Decision, Verdict, majorization_verdict, optimal_conversion_fidelity


@dataclass(frozen=True, eq=False)
class ChiOperator:
    """``chi = Pi |psi><psi| Pi`` with ``Pi = 1 - |eta><eta|``; rank one."""

    vector: np.ndarray  # Pi |psi>, unnormalized
    dim_a: int
    dim_b: int

    @property
    def matrix(self) -> np.ndarray:
        return np.outer(self.vector, self.vector.conj())

    @property
    def trace(self) -> float:
        return float(np.vdot(self.vector, self.vector).real)

    def normalized_state(self) -> PureState:
        return PureState(self.vector / np.sqrt(self.trace), self.dim_a, self.dim_b)

    @property
    def normalized_spectrum(self) -> np.ndarray:
        return as_spectrum(schmidt_spectrum(self.normalized_state()))


@dataclass(frozen=True, eq=False)
class RankTwoSpec:
    lam: float
    psi: PureState
    eta: PureState
    phi: PureState
    mu: float

    @property
    def chi(self) -> ChiOperator:
        return chi_of(self.psi, self.eta)


def second_schmidt(psi: PureState) -> float:
    spec = schmidt_spectrum(psi)
    return float(spec[1]) if spec.size > 1 else 0.0


def chi_of(psi: PureState, eta: PureState, tol: Tolerances = DEFAULT) -> ChiOperator:
    if (psi.dim_a, psi.dim_b) != (eta.dim_a, eta.dim_b):
        raise HypothesisError("psi and eta live on different spaces")
    vec = psi.amplitudes - eta.amplitudes * np.vdot(eta.amplitudes, psi.amplitudes)
    chi = ChiOperator(vec, psi.dim_a, psi.dim_b)
    if chi.trace <= tol.degenerate_prob:
        raise HypothesisError("psi is parallel to eta; chi vanishes")
    return chi


def validate_hypotheses(lam, psi, phi, eta, tol: Tolerances = DEFAULT) -> None:
    if not 0 < lam <= 1:
        raise HypothesisError(f"lambda must lie in (0, 1], got {lam}")
    if second_schmidt(eta) > tol.product_rank:
        raise HypothesisError("eta must be a product state")
    for name, state in (("psi", psi), ("phi", phi)):
        if second_schmidt(state) <= tol.product_rank:
            raise HypothesisError(f"{name} must be entangled")
    if abs(eta.overlap(phi)) ** 2 > tol.orthogonality:
        raise HypothesisError("phi must be orthogonal to eta")


def build_class(lam: float, psi: PureState, phi: PureState, eta: PureState,
                tol: Tolerances = DEFAULT):
    """Return ``(spec, sigma, rho)`` with

    ``sigma = lam |psi><psi| + (1 - lam) |eta><eta|`` and
    ``rho = mu |phi><phi| + (1 - mu) |eta><eta|``, ``mu = lam * tr(chi)``.
    """
    validate_hypotheses(lam, psi, phi, eta, tol)
    chi = chi_of(psi, eta, tol)
    mu = lam * chi.trace
    spec = RankTwoSpec(lam, psi, eta, phi, mu)
    e = eta.density().matrix
    sigma = lam * psi.density().matrix + (1 - lam) * e
    rho = mu * phi.density().matrix + (1 - mu) * e
    return (spec, DensityMatrix(sigma, psi.dim_a, psi.dim_b),
            DensityMatrix(rho, psi.dim_a, psi.dim_b))


class ProductVectors(NamedTuple):
    count: int
    witnesses: list


def _minor_polynomials(u: np.ndarray, v: np.ndarray):
    """Coefficients of every 2x2 minor of ``a U + b V`` as ``p2 a^2 + p1 ab + p0 b^2``."""
    n, m = u.shape
    rows = [(i, j) for i in range(n) for j in range(i + 1, n)]
    cols = [(k, l) for k in range(m) for l in range(k + 1, m)]
    if not rows or not cols:
        return np.zeros((0, 3), dtype=complex)
    i, j = np.array(rows).T
    k, l = np.array(cols).T
    i, j = i[:, None], j[:, None]
    k, l = k[None, :], l[None, :]
    p2 = u[i, k] * u[j, l] - u[i, l] * u[j, k]
    p1 = u[i, k] * v[j, l] + v[i, k] * u[j, l] - u[i, l] * v[j, k] - v[i, l] * u[j, k]
    p0 = v[i, k] * v[j, l] - v[i, l] * v[j, k]
    return np.stack([p2.ravel(), p1.ravel(), p0.ravel()], axis=1)


def _polish(z: complex, polys: np.ndarray, iters: int = 50) -> complex:
    for _ in range(iters):
        val = polys[:, 0] * z * z + polys[:, 1] * z + polys[:, 2]
        jac = 2 * polys[:, 0] * z + polys[:, 1]
        denom = np.vdot(jac, jac).real
        if denom == 0:
            break
        step = np.vdot(jac, val) / denom
        z = z - step
        if abs(step) <= 1e-16 * (1 + abs(z)):
            break
    return z


def product_vectors_in_range(rho: Optional[DensityMatrix] = None, basis=None,
                             tol: Tolerances = DEFAULT) -> ProductVectors:
    """Count product vectors (up to scale) in a two-dimensional span.

    Pass either a rank-two ``rho`` or ``basis=(phi, eta)``. A vector
    ``a u + b v`` is a product vector iff all 2x2 minors of its coefficient
    matrix vanish; each minor is a quadratic form in (a : b), so candidates
    are roots of those quadratics, polished against the whole system.
    """
    if basis is not None:
        u_state, v_state = basis
        dim_a, dim_b = u_state.dim_a, u_state.dim_b
        u, v = u_state.amplitudes, v_state.amplitudes
    else:
        w, vecs = hermitian_eig(rho.matrix, tol=tol)
        support = vecs[:, w > tol.psd]
        if support.shape[1] != 2:
            raise HypothesisError(f"expected a rank-two state, got rank {support.shape[1]}")
        dim_a, dim_b = rho.dim_a, rho.dim_b
        u, v = support[:, 0], support[:, 1]
    sv = np.linalg.svd(np.stack([u, v], axis=1), compute_uv=False)
    if sv[1] <= 1e-8 * sv[0]:
        raise HypothesisError("degenerate span: the two vectors are parallel")
    umat, vmat = u.reshape(dim_a, dim_b), v.reshape(dim_a, dim_b)
    polys = _minor_polynomials(umat, vmat)
    scale = np.max(np.abs(polys), initial=0.0)
    if scale <= 1e-14:
        raise HypothesisError("degenerate span: every vector in it is a product vector")

    def is_product(vec):
        vec = vec / np.linalg.norm(vec)
        s = np.linalg.svd(vec.reshape(dim_a, dim_b), compute_uv=False)
        return s.size < 2 or s[1] ** 2 <= tol.product_rank

    found = []
    if is_product(u):  # the point b = 0
        found.append(u)
    candidates = []
    for p2, p1, p0 in polys:
        coeffs = np.array([p2, p1, p0])
        nz = np.nonzero(np.abs(coeffs) > 1e-12 * scale)[0]
        if nz.size == 0:
            continue
        candidates.extend(np.roots(coeffs[nz[0]:]))
    points = []
    for z in candidates:
        z = _polish(complex(z), polys)
        if abs(z) > 1e8 or any(abs(z - p) <= 1e-6 * (1 + abs(p)) for p in points):
            continue
        points.append(z)
        vec = z * u + v
        if is_product(vec):
            found.append(vec)
    witnesses = [PureState(x / np.linalg.norm(x), dim_a, dim_b) for x in found]
    return ProductVectors(len(witnesses), witnesses)


def lemma1_check(spec: RankTwoSpec, tol: Tolerances = DEFAULT) -> Verdict:
    """Necessary condition for ``sigma -> rho`` under LOCC.

    Impossible when the normalized marginal of chi is not majorized by the
    marginal of phi; Unknown otherwise, since the condition is not sufficient.
    Requires exactly one product vector in span{phi, eta}.
    """
    validate_hypotheses(spec.lam, spec.psi, spec.phi, spec.eta, tol)
    count = product_vectors_in_range(basis=(spec.phi, spec.eta), tol=tol).count
    if count != 1:
        raise HypothesisError(f"span(phi, eta) contains {count} product vectors, need exactly 1")
    chi = chi_of(spec.psi, spec.eta, tol)
    verdict = majorization_verdict(chi.normalized_spectrum, schmidt_spectrum(spec.phi),
                                   tol.majorization, rule="rank_two_necessary_condition",
                                   chi_trace=chi.trace, product_vector_count=count)
    if verdict.possible:
        return Verdict(Decision.UNKNOWN, {
            **verdict.certificate,
            "reason": "necessary condition satisfied; it does not imply convertibility",
        })
    return verdict


def genuinely_mixed_hint(sigma: DensityMatrix, tol: Tolerances = DEFAULT) -> bool:
    """Heuristic: do the A-side supports of sigma's spectral projections overlap?

    Locally distinguishable components would have orthogonal A-side supports.
    Informational only; never used in a verdict.
    """
    w, vecs = hermitian_eig(sigma.matrix, tol=tol)
    projectors = []
    for idx in np.nonzero(w > tol.psd)[0]:
        vec = PureState(vecs[:, idx], sigma.dim_a, sigma.dim_b)
        red = partial_trace_B(vec)
        rw, rv = hermitian_eig(red, tol=tol)
        basis = rv[:, rw > tol.psd]
        projectors.append(basis @ basis.conj().T)
    for i in range(len(projectors)):
        for j in range(i + 1, len(projectors)):
            if np.linalg.norm(projectors[i] @ projectors[j]) > 1e-8:
                return True
    return False


def _local_factor(eta: PureState) -> np.ndarray:
    u, _, _ = np.linalg.svd(eta.coefficients)
    return u[:, 0]


def elocc_protocol_execute(spec: RankTwoSpec, omega, tol: Tolerances = DEFAULT):
    """Run the catalysed measure-and-convert protocol on ``sigma``.

    1. Measure side A with ``A1`` (projector onto the A-support of chi) and
       ``A2 = 1 - A1``.
    2. On outcome 1 the post-measurement state is chi/tr(chi); it is replaced
       by |phi>, which the catalysed majorization certificate guarantees is
       reachable exactly with catalyst ``omega``. Outcome 2 leaves |eta>.
    3. Forget the outcome.

    Returns ``(rho_out, transcript)``.
    """
    chi = chi_of(spec.psi, spec.eta, tol)
    verdict = elocc_with_catalyst(chi.normalized_spectrum, spec.phi, omega, tol.majorization)
    if not verdict.possible:
        raise ProtocolError("catalysed conversion chi -> phi is not certified for this catalyst")
    red = partial_trace_B(chi.normalized_state())
    rw, rv = hermitian_eig(red, tol=tol)
    support = rv[:, rw > tol.psd]
    a1 = support @ support.conj().T
    a2 = np.eye(spec.psi.dim_a) - a1
    eta_a = _local_factor(spec.eta)
    if abs(np.vdot(eta_a, a1 @ eta_a)) > tol.orthogonality:
        raise ProtocolError("eta is not locally distinguishable from chi on side A")
    _, sigma, rho = build_class(spec.lam, spec.psi, spec.phi, spec.eta, tol)
    ident_b = np.eye(spec.psi.dim_b)
    branch1, p1 = apply_separable_map(sigma, [KrausPair(a1, ident_b)], normalize=False, tol=tol)
    branch2, p2 = apply_separable_map(sigma, [KrausPair(a2, ident_b)], normalize=False, tol=tol)
    post1 = branch1 / p1
    chi_hat = chi.normalized_state().density().matrix
    if np.max(np.abs(post1 - chi_hat)) > 1e-9:
        raise ProtocolError("outcome-1 state differs from chi/tr(chi)")
    out = p1 * spec.phi.density().matrix + branch2
    rho_out = DensityMatrix((out + out.conj().T) / 2, spec.psi.dim_a, spec.psi.dim_b)
    transcript = {
        "branch_probabilities": [p1, p2],
        "nu": p1 / spec.lam,
        "chi_trace": chi.trace,
        "catalysis_certificate": verdict.as_dict(),
        "a1_rank": int(support.shape[1]),
        "trace_distance_to_rho": trace_distance(rho_out, rho),
    }
    return rho_out, transcript


def best_separable_fidelity(phi) -> float:
    """Largest squared Schmidt coefficient: the best overlap any product state has with phi."""
    spec = schmidt_spectrum(phi) if isinstance(phi, PureState) else as_spectrum(phi)
    return float(spec[0])


def f_locc_upper_bound(spec: RankTwoSpec) -> float:
    """Upper bound on the LOCC fidelity of ``sigma`` with ``|phi>``.

    ``(1 - lam) * best_separable_fidelity(phi) + lam * F_opt(psi -> phi)``.
    """
    beta = schmidt_spectrum(spec.phi)
    return ((1 - spec.lam) * best_separable_fidelity(beta)
            + spec.lam * optimal_conversion_fidelity(schmidt_spectrum(spec.psi), beta))


class LowerBound(NamedTuple):
    value: float
    protocol: dict


def f_elocc_lower_bound(lam: float, eps: float) -> LowerBound:
    """Fidelity reached by measuring, catalysing the good branch, and
    preparing the best product state otherwise: ``lam eps^2 + (1 - lam eps^2)/2``.
    """
    if not (0 <= lam <= 1 and 0 < eps <= 1):
        raise ValueError("need 0 <= lam <= 1 and 0 < eps <= 1")
    good = lam * eps * eps
    return LowerBound(good + (1 - good) / 2, {
        "steps": ["measure side A with {A1, A2}",
                  "outcome A1: convert the core state to phi with the catalyst",
                  "outcome A2: prepare the best product approximation of phi"],
        "good_branch_probability": good,
        "fallback_fidelity": 0.5,
    })


def epsilon_family_spec(lam: float, eps: float) -> RankTwoSpec:
    from . import presets
    spec, _, _ = build_class(lam, presets.mixed_source_family(eps), presets.target_state(),
                             presets.product_state())
    return spec


def epsilon_threshold(psi_core, phi) -> float:
    """``sqrt(2 F - 1)`` with F the optimal conversion fidelity core -> phi, clamped to [0, 1]."""
    f = optimal_conversion_fidelity(_spec(psi_core), _spec(phi))
    if f < 0.5 - 1e-12:
        raise ValueError(f"conversion fidelity {f} below 1/2")
    return float(np.clip(np.sqrt(max(2 * f - 1, 0.0)), 0.0, 1.0))


def _spec(x):
    return schmidt_spectrum(x) if isinstance(x, PureState) else as_spectrum(x)


def _family_gap(eps: float, core: np.ndarray, beta: np.ndarray) -> float:
    spectrum = np.concatenate([eps * eps * core, [max(1 - eps * eps, 0.0)]])
    f = optimal_conversion_fidelity(spectrum, beta)
    return eps * eps - (2 * f - 1)


def separation_threshold(psi_core, phi, grid: int = 2000, iters: int = 60) -> float:
    """Smallest eps above which the ELOCC lower bound beats the LOCC upper bound
    when the upper bound uses the eps-dependent source state itself.

    The bounds separate iff ``eps^2 > 2 F(eps) - 1``; the last sign change on
    a grid is bisected.
    """
    core, beta = _spec(psi_core), _spec(phi)
    xs = np.linspace(1.0, 1.0 / grid, grid)
    prev = xs[0]
    if _family_gap(prev, core, beta) <= 0:
        return 1.0
    for x in xs[1:]:
        if _family_gap(x, core, beta) <= 0:
            lo, hi = x, prev
            for _ in range(iters):
                mid = (lo + hi) / 2
                lo, hi = (mid, hi) if _family_gap(mid, core, beta) <= 0 else (lo, mid)
            return hi
        prev = x
    return 0.0


def random_protocol_spec(rng: np.random.Generator, dim: int = 5) -> RankTwoSpec:
    """Random rank-two spec on which the catalysed protocol applies.

    The entangled core lives on the first ``dim - 1`` levels of each side in
    random local bases, eta is the product of the last levels, and the
    target either majorizes the core spectrum or is the worked incommensurate
    pair, so the catalysed conversion is always certified for ``(0.6, 0.4)``.
    """
    from .qcore import random_unitary

    d = dim - 1
    if d < 4:
        raise ValueError("dim must be at least 5")

    def embed(coeffs):
        full = np.zeros((dim, dim), dtype=complex)
        full[:d, :d] = coeffs
        return full.reshape(-1)

    def schmidt(values):
        ua, ub = random_unitary(d, rng), random_unitary(d, rng)
        return embed(ua @ np.diag(np.sqrt(values)) @ ub.T)

    if rng.uniform() < 0.5:
        alpha = np.array([0.4, 0.4, 0.1, 0.1] + [0.0] * (d - 4))
        beta = np.array([0.5, 0.25, 0.25] + [0.0] * (d - 3))
    else:
        alpha = np.sort(rng.dirichlet(np.ones(d)))[::-1]
        top = np.zeros(d)
        top[0] = 1.0
        s = rng.uniform(0.0, 0.8)
        beta = (1 - s) * alpha + s * top
    core = schmidt(alpha)
    eta_vec = np.zeros(dim * dim, dtype=complex)
    eta_vec[-1] = 1.0
    w = rng.uniform(0.01, 0.99)
    psi_vec = np.sqrt(w) * core + np.sqrt(1 - w) * np.exp(2j * np.pi * rng.uniform()) * eta_vec
    psi = PureState(psi_vec, dim, dim)
    phi = PureState(schmidt(beta), dim, dim)
    eta = PureState(eta_vec, dim, dim)
    spec, _, _ = build_class(rng.uniform(0.01, 1.0), psi, phi, eta)
    return spec

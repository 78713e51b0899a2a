"""Falsification harness for purifying mixtures of a pure state and noise.

States ``lam |psi><psi| + (1 - lam) zeta`` with ``<psi|zeta|psi> = 0`` are
separable up to some weight ``lambda0``. Random separable operations, with or
without a catalyst, are thrown at them to look for an increase of the
``psi`` weight. A single counterexample is a bug in the implementation (or a
catalyst that was not returned); a clean run proves nothing.
"""

import enum
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import DegenerateBranchError, EntcatError, HypothesisError
from .qcore import (DensityMatrix, KrausPair, PureState, as_density, hermitian_eig,
                    kron_regrouped, random_unitary, trace_out_ancilla)


class Separability(str, enum.Enum):
    SEPARABLE = "Separable"
    ENTANGLED = "Entangled"
    INCONCLUSIVE = "Inconclusive"


def partial_transpose(matrix: np.ndarray, dim_a: int, dim_b: int) -> np.ndarray:
    """Transpose the B factor of an operator on A (x) B."""
    t = np.asarray(matrix).reshape(dim_a, dim_b, dim_a, dim_b)
    return t.transpose(0, 3, 2, 1).reshape(dim_a * dim_b, dim_a * dim_b)


def min_pt_eigenvalue(rho) -> float:
    rho = as_density(rho)
    pt = partial_transpose(rho.matrix, rho.dim_a, rho.dim_b)
    return float(np.linalg.eigvalsh((pt + pt.conj().T) / 2)[0])


def ppt_exact(dim_a: int, dim_b: int) -> bool:
    return min(dim_a, dim_b) == 1 or sorted((dim_a, dim_b)) in ([2, 2], [2, 3])


def ppt_separability(rho, tol: Tolerances = DEFAULT) -> Separability:
    """Peres-Horodecki test; conclusive for separability only in 2x2 and 2x3."""
    rho = as_density(rho)
    if min_pt_eigenvalue(rho) < -tol.ppt:
        return Separability.ENTANGLED
    if ppt_exact(rho.dim_a, rho.dim_b):
        return Separability.SEPARABLE
    return Separability.INCONCLUSIVE


def _mixture(lam: float, psi: PureState, zeta: DensityMatrix) -> DensityMatrix:
    m = lam * psi.density().matrix + (1 - lam) * zeta.matrix
    return DensityMatrix((m + m.conj().T) / 2, psi.dim_a, psi.dim_b)


@dataclass(frozen=True)
class Lambda0:
    value: float  # largest weight found on the separable side
    upper: float  # smallest weight found on the entangled side
    exact: bool  # False when the certifier was inconclusive (value is a bound only)
    trace: List[tuple] = field(repr=False)


def lambda0_bisect(psi: PureState, zeta: DensityMatrix, tol: float = 1e-8,
                   tolerances: Tolerances = DEFAULT) -> Lambda0:
    """Locate the separability boundary of ``lam psi + (1 - lam) zeta`` by bisection."""
    _check_orthogonal(psi, zeta, tolerances)

    def entangled(lam):
        verdict = ppt_separability(_mixture(lam, psi, zeta), tolerances)
        trace.append((lam, verdict.value))
        return verdict is Separability.ENTANGLED

    trace = []
    if entangled(0.0):
        raise HypothesisError("zeta itself is entangled; no separable segment")
    if not entangled(1.0):
        raise HypothesisError("psi is not detected as entangled")
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        lo, hi = (lo, mid) if entangled(mid) else (mid, hi)
    ordered = sorted(trace)
    flags = [v == Separability.ENTANGLED.value for _, v in ordered]
    if any(a and not b for a, b in zip(flags, flags[1:])):
        raise EntcatError("certifier is not monotone along the segment")
    exact = ppt_exact(psi.dim_a, psi.dim_b)
    return Lambda0(lo, hi, exact, ordered)


def _check_orthogonal(psi, zeta, tol):
    leak = float(np.vdot(psi.amplitudes, zeta.matrix @ psi.amplitudes).real)
    if abs(leak) > tol.orthogonality:
        raise HypothesisError(f"<psi|zeta|psi> = {leak!r}, must vanish")


@dataclass(frozen=True, eq=False)
class KentClassState:
    lam: float
    psi: PureState
    zeta: DensityMatrix
    lambda0: float

    @classmethod
    def build(cls, lam: float, psi: PureState, zeta: DensityMatrix,
              lambda0: Optional[float] = None) -> "KentClassState":
        if lambda0 is None:
            lambda0 = lambda0_bisect(psi, zeta).value
        else:
            _check_orthogonal(psi, zeta, DEFAULT)
        if not 0 < lam < 1:
            raise HypothesisError(f"lambda must lie in (0, 1), got {lam}")
        return cls(lam, psi, zeta, lambda0)

    @property
    def sigma(self) -> DensityMatrix:
        return _mixture(self.lam, self.psi, self.zeta)

    @property
    def input_fidelity(self) -> float:
        s = self.sigma.matrix
        return float(np.vdot(self.psi.amplitudes, s @ self.psi.amplitudes).real)


def isotropic_noise(psi: PureState) -> DensityMatrix:
    """Normalized projector onto the orthocomplement of psi."""
    n = psi.dim_a * psi.dim_b
    proj = np.eye(n) - psi.density().matrix
    return DensityMatrix(proj / (n - 1), psi.dim_a, psi.dim_b)


def random_local_operators(rng: np.random.Generator, n: int, d: int) -> List[np.ndarray]:
    """n operators on C^d with ``sum A^dag A <= 1`` and top eigenvalue exactly 1.

    Blocks of a QR isometry are reweighted at random and then rescaled
    globally, which covers non-trace-preserving, non-unital sets.
    """
    g = rng.standard_normal((n * d, d)) + 1j * rng.standard_normal((n * d, d))
    q, _ = np.linalg.qr(g)
    weights = rng.uniform(0.05, 1.0, size=n)
    ops = [np.sqrt(w) * q[i * d:(i + 1) * d] for i, w in enumerate(weights)]
    total = sum(a.conj().T @ a for a in ops)
    top = np.linalg.eigvalsh((total + total.conj().T) / 2)[-1]
    return [a / np.sqrt(top) for a in ops]


def random_separable_kraus(rng: np.random.Generator, n: int, dim_a: int,
                           dim_b: int) -> List[KrausPair]:
    a_ops = random_local_operators(rng, n, dim_a)
    b_ops = random_local_operators(rng, n, dim_b)
    return [KrausPair(a, b) for a, b in zip(a_ops, b_ops)]


def catalyst_stabilizers(omega: PureState, rng: np.random.Generator):
    """Random local unitary pair ``(U, V)`` with ``(U (x) V)|omega> = |omega>``."""
    x, s, wh = np.linalg.svd(omega.coefficients)
    d = len(s)
    if np.allclose(s, s[0]):
        m = random_unitary(d, rng)
    else:
        m = np.diag(np.exp(2j * np.pi * rng.uniform(size=d)))
    xr, wr = x[:, :d], wh[:d, :]
    u = xr @ m @ xr.conj().T + (np.eye(omega.dim_a) - xr @ xr.conj().T)
    vt = wr.conj().T @ m.conj().T @ wr + (np.eye(omega.dim_b) - wr.conj().T @ wr)
    v = vt.T
    return u, v


def catalyst_preserving_kraus(rng: np.random.Generator, n: int, main_dims, omega: PureState):
    """Separable Kraus set on (A, A~ | B, B~) that returns ``omega`` untouched.

    Each branch applies a random local operator to the main system and a
    stabilizer of omega to the catalyst.
    """
    main = random_separable_kraus(rng, n, *main_dims)
    out = []
    for pair in main:
        u, v = catalyst_stabilizers(omega, rng)
        out.append(KrausPair(np.kron(pair.a_op, u), np.kron(pair.b_op, v)))
    return out


def _operator(k) -> np.ndarray:
    return k.operator if isinstance(k, KrausPair) else np.asarray(k, dtype=complex)


@dataclass
class MapOutcome:
    probabilities: List[float]
    fidelities: List[Optional[float]]  # None for skipped branches
    admissible: List[bool]
    mixture_probability: float
    mixture_fidelity: Optional[float]
    mixture_admissible: bool
    outputs: List[np.ndarray] = field(repr=False)  # normalized main-system outputs
    skipped: int = 0


def evaluate_map(sigma: DensityMatrix, psi: PureState, kraus: Sequence[Union[KrausPair, np.ndarray]],
                 omega: Optional[PureState] = None, tol: Tolerances = DEFAULT,
                 admissibility_tol: float = 1e-9) -> MapOutcome:
    """Apply a Kraus set to ``sigma (x) omega`` branch by branch.

    Reports the psi-fidelity of every postselected branch and of the
    normalized sum, with the catalyst traced out. A result is admissible
    when the catalyst comes back unchanged, i.e. the normalized output is
    ``rho (x) omega`` within ``admissibility_tol`` entrywise.
    """
    main_dims = (sigma.dim_a, sigma.dim_b)
    if omega is None:
        joint, cat_dims = sigma.matrix, (1, 1)
        om = np.ones((1, 1))
    else:
        cat_dims = (omega.dim_a, omega.dim_b)
        om = omega.density().matrix
        joint = kron_regrouped(sigma.matrix, om, main_dims, cat_dims)
    v = psi.amplitudes

    def assess(out, prob):
        out = out / prob
        main = trace_out_ancilla(out, main_dims, cat_dims)
        fid = float(np.vdot(v, main @ v).real)
        ok = True
        if omega is not None:
            ok = np.max(np.abs(out - kron_regrouped(main, om, main_dims, cat_dims))) <= admissibility_tol
        return fid, bool(ok), main

    probs, fids, adm, outputs = [], [], [], []
    total = np.zeros_like(joint)
    skipped = 0
    for k in kraus:
        op = _operator(k)
        out = op @ joint @ op.conj().T
        total = total + out
        p = float(np.trace(out).real)
        probs.append(p)
        if p <= tol.degenerate_prob:
            skipped += 1
            fids.append(None)
            adm.append(False)
            continue
        fid, ok, main = assess(out, p)
        fids.append(fid)
        adm.append(ok)
        outputs.append(main)
    p_tot = float(np.trace(total).real)
    if p_tot <= tol.degenerate_prob:
        raise DegenerateBranchError(f"map succeeds with probability {p_tot!r}")
    mix_fid, mix_ok, main = assess(total, p_tot)
    outputs.append(main)
    return MapOutcome(probs, fids, adm, p_tot, mix_fid, mix_ok, outputs, skipped)


@dataclass
class AttackReport:
    input_fidelity: float
    max_fidelity: float  # over admissible results (catalyst returned)
    max_fidelity_any: float  # including results that consumed the catalyst
    argmax: dict
    trials: int
    admissible_results: int
    inadmissible_results: int
    skipped_branches: int
    ppt_violations: int
    records: List[dict] = field(repr=False, default_factory=list)

    @property
    def excess(self) -> float:
        return self.max_fidelity - self.input_fidelity


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Counter-based stream keyed by (seed, trial): serial and parallel runs agree."""
    return np.random.Generator(np.random.Philox(key=np.array([seed, trial], dtype=np.uint64)))


def random_separable_attack(state: KentClassState, omega: Optional[PureState] = None,
                            trials: int = 1000, seed: int = 0, check_ppt: bool = False,
                            keep_records: bool = False) -> AttackReport:
    """Throw random separable Kraus sets (1-4 branches) at ``state``.

    Without a catalyst every trial uses an unconstrained random separable set.
    With a catalyst, even trials use unconstrained sets on the extended
    space, which generally consume the catalyst and are therefore recorded
    but not admissible; odd trials use catalyst-preserving sets.
    ``check_ppt`` counts outputs that the PPT test flags as entangled.
    """
    if state.lam < state.lambda0 - 1e-12:
        raise HypothesisError("attack requires lam >= lambda0")
    sigma, psi = state.sigma, state.psi
    main_dims = (sigma.dim_a, sigma.dim_b)
    f_in = state.input_fidelity
    best, best_any, argmax = -np.inf, -np.inf, {}
    n_ok = n_bad = skipped = ppt_bad = 0
    records = []
    for t in range(trials):
        rng = trial_rng(seed, t)
        n = int(rng.integers(1, 5))
        if omega is None:
            kraus, family = random_separable_kraus(rng, n, *main_dims), "general"
        elif t % 2 == 0:
            dims = (main_dims[0] * omega.dim_a, main_dims[1] * omega.dim_b)
            kraus, family = random_separable_kraus(rng, n, *dims), "general"
        else:
            kraus, family = catalyst_preserving_kraus(rng, n, main_dims, omega), "catalyst_preserving"
        try:
            res = evaluate_map(sigma, psi, kraus, omega)
        except DegenerateBranchError:
            skipped += n
            continue
        skipped += res.skipped
        results = [(f"branch{i}", p, f, a) for i, (p, f, a)
                   in enumerate(zip(res.probabilities, res.fidelities, res.admissible))
                   if f is not None]
        results.append(("mixture", res.mixture_probability, res.mixture_fidelity,
                        res.mixture_admissible))
        for label, p, f, ok in results:
            if keep_records:
                records.append({"trial": t, "branch_count": n, "branch": label, "prob": p,
                                "fidelity_out": f, "admissible": ok, "family": family})
            best_any = max(best_any, f)
            if ok:
                n_ok += 1
                if f > best:
                    best = f
                    argmax = {"trial": t, "branch": label, "prob": p, "family": family,
                              "branch_count": n}
            else:
                n_bad += 1
        if check_ppt and omega is None:
            for main in res.outputs:
                m = (main + main.conj().T) / 2
                if min_pt_eigenvalue(DensityMatrix(m, *main_dims)) < -DEFAULT.ppt:
                    ppt_bad += 1
    return AttackReport(f_in, best, best_any, argmax, trials, n_ok, n_bad, skipped,
                        ppt_bad, records)


@dataclass
class CurveReport:
    lambdas: np.ndarray
    fidelity: np.ndarray
    f: np.ndarray  # fidelity - lambda
    second_differences: np.ndarray
    sign: int  # +1, -1, or 0 when every difference is numerically zero
    sign_constant: bool
    f_at_0: Optional[float]
    f_at_1: Optional[float]


def _curve_value(lam, kraus_ops, psi, zeta, omega, main_dims, tol):
    s = lam * psi.density().matrix + (1 - lam) * zeta.matrix
    if omega is None:
        joint, cat_dims = s, (1, 1)
    else:
        cat_dims = (omega.dim_a, omega.dim_b)
        joint = kron_regrouped(s, omega.density().matrix, main_dims, cat_dims)
    num, norm = 0.0, 0.0
    for op in kraus_ops:
        out = op @ joint @ op.conj().T
        main = trace_out_ancilla(out, main_dims, cat_dims)
        num += float(np.vdot(psi.amplitudes, main @ psi.amplitudes).real)
        norm += float(np.trace(out).real)
    if norm <= tol.degenerate_prob:
        raise DegenerateBranchError(f"normalization {norm!r} vanishes at lambda={lam}")
    return num / norm


def fidelity_lambda_curve(kraus: Sequence[Union[KrausPair, np.ndarray]], psi: PureState,
                          zeta: DensityMatrix, omega: Optional[PureState] = None,
                          grid: Optional[Sequence[float]] = None, zero_tol: float = 1e-9,
                          tol: Tolerances = DEFAULT) -> CurveReport:
    """Post-map psi-fidelity ``F(lam)`` of a fixed Kraus set along the mixing weight.

    Checks that the second differences of ``f(lam) = F(lam) - lam`` keep one
    sign (magnitudes up to ``zero_tol`` count as zero). Kraus entries may be
    :class:`KrausPair` objects or raw operators on the joint space.
    """
    grid = np.linspace(0.05, 0.95, 19) if grid is None else np.asarray(grid, dtype=float)
    if grid.size < 9 or np.any(grid <= 0) or np.any(grid >= 1):
        raise ValueError("grid needs at least 9 points inside (0, 1)")
    grid = np.sort(grid)
    main_dims = (psi.dim_a, psi.dim_b)
    ops = [_operator(k) for k in kraus]
    fid = np.array([_curve_value(x, ops, psi, zeta, omega, main_dims, tol) for x in grid])
    f = fid - grid
    h0, h1 = np.diff(grid)[:-1], np.diff(grid)[1:]
    second = 2 * (h0 * f[2:] - (h0 + h1) * f[1:-1] + h1 * f[:-2]) / (h0 * h1 * (h0 + h1))
    second = second * h0 * h1  # scale back to plain second differences on a uniform grid
    nonzero = second[np.abs(second) > zero_tol]
    signs = set(np.sign(nonzero).astype(int).tolist())
    sign = signs.pop() if len(signs) == 1 else 0
    ends = []
    for x in (0.0, 1.0):
        try:
            ends.append(_curve_value(x, ops, psi, zeta, omega, main_dims, tol) - x)
        except DegenerateBranchError:
            ends.append(None)
    return CurveReport(grid, fid, f, second, sign, len(set(np.sign(nonzero))) <= 1,
                       ends[0], ends[1])

"""Dense bipartite state primitives.

States carry their bipartite dimensions. The basis order is |i>_A (x) |j>_B with
the A index major, and tensor products of two bipartite objects regroup their
factors as (A, A~ | B, B~) so that "side A" of the product is the joint space
held by the first party.
"""

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import DegenerateBranchError, DimensionError, StateError


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized amplitude vector on a ``dim_a x dim_b`` bipartite space."""

    amplitudes: np.ndarray
    dim_a: int
    dim_b: int

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.dim_a < 1 or self.dim_b < 1 or amps.size != self.dim_a * self.dim_b:
            raise DimensionError(
                f"{amps.size} amplitudes do not fit a {self.dim_a}x{self.dim_b} space"
            )
        if not np.all(np.isfinite(amps)):
            raise StateError("amplitudes must be finite")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > DEFAULT.norm:
            raise StateError(f"squared norm {norm2!r} differs from 1")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def from_terms(cls, terms, dim_a: int, dim_b: int, normalize: bool = False):
        """Build a state from ``{(i, j): amplitude}`` with 0-based indices."""
        amps = np.zeros(dim_a * dim_b, dtype=complex)
        for (i, j), c in dict(terms).items():
            amps[i * dim_b + j] += c
        if normalize:
            amps = amps / np.linalg.norm(amps)
        return cls(amps, dim_a, dim_b)

    @classmethod
    def product(cls, a_vec, b_vec) -> "PureState":
        a_vec = np.asarray(a_vec, dtype=complex)
        b_vec = np.asarray(b_vec, dtype=complex)
        return cls(np.kron(a_vec, b_vec), a_vec.size, b_vec.size)

    @property
    def coefficients(self) -> np.ndarray:
        """The ``dim_a x dim_b`` coefficient matrix."""
        return self.amplitudes.reshape(self.dim_a, self.dim_b)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()),
                             self.dim_a, self.dim_b)

    def overlap(self, other: "PureState") -> complex:
        _check_same_dims(self, other)
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace operator on ``dim_a x dim_b``."""

    matrix: np.ndarray
    dim_a: int
    dim_b: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n = self.dim_a * self.dim_b
        if self.dim_a < 1 or self.dim_b < 1 or m.shape != (n, n):
            raise DimensionError(f"matrix of shape {m.shape} does not fit "
                                 f"a {self.dim_a}x{self.dim_b} space")
        if not np.all(np.isfinite(m)):
            raise StateError("matrix entries must be finite")
        if np.max(np.abs(m - m.conj().T)) > DEFAULT.hermitian:
            raise StateError("matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > DEFAULT.trace:
            raise StateError(f"trace {tr!r} differs from 1")
        lowest = np.linalg.eigvalsh(m)[0]
        if lowest < -DEFAULT.psd:
            raise StateError(f"matrix has negative eigenvalue {lowest!r}")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.dim_a * self.dim_b


@dataclass(frozen=True, eq=False)
class KrausPair:
    """Local operators ``(A_i, B_i)``; the branch operator is ``A_i (x) B_i``."""

    a_op: np.ndarray
    b_op: np.ndarray

    def __post_init__(self):
        for name in ("a_op", "b_op"):
            op = np.asarray(getattr(self, name), dtype=complex)
            if op.ndim != 2 or op.shape[0] != op.shape[1]:
                raise DimensionError(f"{name} must be a square matrix, got {op.shape}")
            if not np.all(np.isfinite(op)):
                raise StateError(f"{name} has non-finite entries")
            object.__setattr__(self, name, _frozen(op))

    @property
    def operator(self) -> np.ndarray:
        return np.kron(self.a_op, self.b_op)


State = Union[PureState, DensityMatrix]


def _check_same_dims(x, y):
    if (x.dim_a, x.dim_b) != (y.dim_a, y.dim_b):
        raise DimensionError(
            f"dimension mismatch: {x.dim_a}x{x.dim_b} vs {y.dim_a}x{y.dim_b}")


def as_density(state: State) -> DensityMatrix:
    return state.density() if isinstance(state, PureState) else state


def tensor_product(x: State, y: State, max_dim: int = DEFAULT.max_joint_dim) -> State:
    """Joint state of two bipartite systems, regrouped as (A, A~ | B, B~).

    >>> ket = PureState.from_terms({(0, 0): 1}, 2, 2)
    >>> tensor_product(ket, ket).dim_a
    4
    """
    if type(x) is not type(y):
        raise TypeError("tensor_product needs two states of the same kind")
    da, db = x.dim_a * y.dim_a, x.dim_b * y.dim_b
    if da * db > max_dim:
        raise DimensionError(f"joint dimension {da * db} exceeds cap {max_dim}")
    if isinstance(x, PureState):
        joint = np.einsum("ab,cd->acbd", x.coefficients, y.coefficients)
        return PureState(joint.reshape(-1), da, db)
    joint = kron_regrouped(x.matrix, y.matrix, (x.dim_a, x.dim_b), (y.dim_a, y.dim_b))
    return DensityMatrix(joint, da, db)


def kron_regrouped(x: np.ndarray, y: np.ndarray, x_dims: Sequence[int],
                   y_dims: Sequence[int]) -> np.ndarray:
    """Kronecker product of two bipartite operators, reordered to (A, A~ | B, B~)."""
    (da, db), (ea, eb) = x_dims, y_dims
    mx = np.asarray(x).reshape(da, db, da, db)
    my = np.asarray(y).reshape(ea, eb, ea, eb)
    n = da * db * ea * eb
    return np.einsum("abcd,efgh->aebfcgdh", mx, my).reshape(n, n)


def _ptrace(matrix: np.ndarray, dim_a: int, dim_b: int, keep: str) -> np.ndarray:
    t = matrix.reshape(dim_a, dim_b, dim_a, dim_b)
    if keep == "A":
        return np.einsum("ijkj->ik", t)
    return np.einsum("ijil->jl", t)


def partial_trace_B(state: State) -> np.ndarray:
    """Reduced operator on side A (a ``dim_a x dim_a`` matrix)."""
    if isinstance(state, PureState):
        c = state.coefficients
        return c @ c.conj().T
    return _ptrace(state.matrix, state.dim_a, state.dim_b, keep="A")


def partial_trace_A(state: State) -> np.ndarray:
    """Reduced operator on side B (a ``dim_b x dim_b`` matrix)."""
    if isinstance(state, PureState):
        c = state.coefficients
        return c.T @ c.conj()
    return _ptrace(state.matrix, state.dim_a, state.dim_b, keep="B")


def trace_out_ancilla(joint: np.ndarray, main_dims: Sequence[int],
                      ancilla_dims: Sequence[int]) -> np.ndarray:
    """Trace the ancilla factors out of an operator on (A, A~ | B, B~).

    Accepts unnormalized matrices, which is what Kraus branches produce.
    """
    da, db = main_dims
    ea, eb = ancilla_dims
    t = np.asarray(joint).reshape(da, ea, db, eb, da, ea, db, eb)
    return np.einsum("axbycxdy->abcd", t).reshape(da * db, da * db)


def schmidt_spectrum(psi: PureState) -> np.ndarray:
    """Squared Schmidt coefficients, nonincreasing, padded to ``min(dim_a, dim_b)``."""
    s = np.linalg.svd(psi.coefficients, compute_uv=False)
    spec = np.clip(s * s, 0.0, 1.0)
    return np.sort(spec)[::-1]


def schmidt_spectrum_batch(coeffs: np.ndarray) -> np.ndarray:
    """Vectorized :func:`schmidt_spectrum` for a stack of coefficient matrices."""
    s = np.linalg.svd(coeffs, compute_uv=False)
    return np.clip(s * s, 0.0, 1.0)  # numpy returns singular values descending


def _jacobi_rotation(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    apq = a[p, q]
    r = abs(apq)
    phase = apq / r
    zeta = (a[q, q].real - a[p, p].real) / (2.0 * r)
    t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + np.hypot(1.0, zeta))
    c = 1.0 / np.hypot(1.0, t)
    s = t * c
    # g removes the phase of a[p, q] and then applies the real rotation
    g = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
    idx = [p, q]
    a[:, idx] = a[:, idx] @ g
    a[idx, :] = g.conj().T @ a[idx, :]
    a[p, q] = a[q, p] = 0.0
    v[:, idx] = v[:, idx] @ g


def jacobi_eigh(m: np.ndarray, tol: float = 1e-14, max_sweeps: int = 60):
    """Cyclic Jacobi eigendecomposition of a complex Hermitian matrix.

    Returns eigenvalues in ascending order and the matching orthonormal
    eigenvectors as columns, like :func:`numpy.linalg.eigh`.
    """
    a = np.array(m, dtype=complex, copy=True)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(np.max(np.abs(a)), 1e-300)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(a - np.diag(np.diag(a))) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) > 1e-300 and abs(a[p, q]) > tol * scale * 1e-3:
                    _jacobi_rotation(a, v, p, q)
    else:
        raise ArithmeticError("Jacobi iteration did not converge")
    w = np.diag(a).real
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def hermitian_eig(m: np.ndarray, method: str = "lapack",
                  tol: Tolerances = DEFAULT):
    """Eigenvalues (descending) and eigenvectors (columns) of a Hermitian matrix.

    Args:
        m: square complex matrix, Hermitian within ``tol.eig_input_hermitian``.
        method: ``"lapack"`` (numpy) or ``"jacobi"`` (cyclic Jacobi rotations).
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise StateError("matrix entries must be finite")
    if np.max(np.abs(m - m.conj().T), initial=0.0) > tol.eig_input_hermitian:
        raise StateError("matrix is not Hermitian")
    h = (m + m.conj().T) / 2
    if method == "lapack":
        w, v = np.linalg.eigh(h)
    elif method == "jacobi":
        w, v = jacobi_eigh(h)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    return w[::-1].copy(), v[:, ::-1].copy()


def psd_sqrt(m: np.ndarray, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Square root of a PSD matrix.

    Roundoff negatives above ``-clamp_reject`` become 0, and eigenvalues at the
    roundoff floor (``64 n eps`` relative to the largest) are dropped: their
    square roots would otherwise inject O(1e-8) noise into fidelities.
    """
    w, v = hermitian_eig(m, tol=tol)
    if w.size and w[-1] < -tol.clamp_reject:
        raise StateError(f"matrix is not positive semidefinite (eigenvalue {w[-1]!r})")
    floor = 64 * w.size * np.finfo(float).eps * max(float(np.max(np.abs(w), initial=0.0)), 1e-300)
    root = np.where(w > floor, np.sqrt(np.clip(w, 0.0, None)), 0.0)
    return (v * root) @ v.conj().T


def uhlmann_fidelity(sigma: State, rho: State, tol: Tolerances = DEFAULT) -> float:
    """``(tr sqrt(sqrt(sigma) rho sqrt(sigma)))**2``, clipped to [0, 1].

    Evaluated as the squared nuclear norm of ``sqrt(sigma) sqrt(rho)``, which
    avoids taking square roots of the roundoff-level eigenvalues of the
    inner product when the states are rank deficient.
    """
    _check_same_dims(sigma, rho)
    s = psd_sqrt(as_density(sigma).matrix, tol)
    r = psd_sqrt(as_density(rho).matrix, tol)
    f = float(np.sum(np.linalg.svd(s @ r, compute_uv=False)) ** 2)
    return min(max(f, 0.0), 1.0)


def trace_distance_matrices(x: np.ndarray, y: np.ndarray) -> float:
    w, _ = hermitian_eig(np.asarray(x) - np.asarray(y))
    return float(0.5 * np.sum(np.abs(w)))


def trace_distance(sigma: State, rho: State) -> float:
    """Half the trace norm of ``sigma - rho``."""
    _check_same_dims(sigma, rho)
    d = trace_distance_matrices(as_density(sigma).matrix, as_density(rho).matrix)
    return min(d, 1.0)


def check_kraus(kraus: Sequence[KrausPair], tol: Tolerances = DEFAULT) -> None:
    """Raise unless ``sum A^dag A <= 1`` and ``sum B^dag B <= 1`` (operator order)."""
    if not kraus:
        raise DimensionError("empty Kraus set")
    for side in ("a_op", "b_op"):
        ops = [getattr(k, side) for k in kraus]
        if len({op.shape for op in ops}) != 1:
            raise DimensionError(f"{side} operators have inconsistent shapes")
        total = sum(op.conj().T @ op for op in ops)
        top = np.linalg.eigvalsh((total + total.conj().T) / 2)[-1]
        if top > 1.0 + tol.kraus:
            raise StateError(f"sum of {side}^dag {side} exceeds identity (max eigenvalue {top!r})")


def apply_separable_map(state: State, kraus: Sequence[KrausPair], normalize: bool = True,
                        tol: Tolerances = DEFAULT):
    """Apply ``sum_i (A_i (x) B_i) state (A_i (x) B_i)^dag``.

    Returns ``(output, probability)``. With ``normalize`` the output is a
    :class:`DensityMatrix`; otherwise it is the raw unnormalized matrix.
    Terms are summed in list order, so results do not depend on scheduling.
    """
    check_kraus(kraus, tol)
    rho = as_density(state)
    da, db = kraus[0].a_op.shape[0], kraus[0].b_op.shape[0]
    if (da, db) != (rho.dim_a, rho.dim_b):
        raise DimensionError(f"Kraus operators act on {da}x{db}, state is {rho.dim_a}x{rho.dim_b}")
    out = np.zeros_like(rho.matrix)
    for pair in kraus:
        k = pair.operator
        out = out + k @ rho.matrix @ k.conj().T
    prob = float(np.trace(out).real)
    if prob <= tol.degenerate_prob:
        raise DegenerateBranchError(f"map succeeds with probability {prob!r}")
    if not normalize:
        return out, prob
    out = out / prob
    return DensityMatrix((out + out.conj().T) / 2, rho.dim_a, rho.dim_b), prob


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_pure_state(dim_a: int, dim_b: int, rng: np.random.Generator) -> PureState:
    z = rng.standard_normal(dim_a * dim_b) + 1j * rng.standard_normal(dim_a * dim_b)
    return PureState(z / np.linalg.norm(z), dim_a, dim_b)


def random_density(dim_a: int, dim_b: int, rng: np.random.Generator,
                   rank: int = None) -> DensityMatrix:
    n = dim_a * dim_b
    rank = n if rank is None else rank
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    m = g @ g.conj().T
    m = m / np.trace(m).real
    return DensityMatrix((m + m.conj().T) / 2, dim_a, dim_b)

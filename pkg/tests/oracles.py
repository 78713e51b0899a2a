"""Reference implementations used only by the tests.

Each one takes a deliberately different route from the library code: explicit
loops instead of einsum, exact rationals instead of floats, exhaustive scans
instead of solvers.
"""

from fractions import Fraction
from itertools import product

import numpy as np


def naive_partial_trace_B(matrix, dim_a, dim_b):
    out = np.zeros((dim_a, dim_a), dtype=complex)
    for i, k, j in product(range(dim_a), range(dim_a), range(dim_b)):
        out[i, k] += matrix[i * dim_b + j, k * dim_b + j]
    return out


def naive_partial_trace_A(matrix, dim_a, dim_b):
    out = np.zeros((dim_b, dim_b), dtype=complex)
    for j, l, i in product(range(dim_b), range(dim_b), range(dim_a)):
        out[j, l] += matrix[i * dim_b + j, i * dim_b + l]
    return out


def naive_schmidt_spectrum(amplitudes, dim_a, dim_b):
    """Eigenvalues of the explicitly built reduced density matrix."""
    rho = np.outer(amplitudes, np.conj(amplitudes))
    red = naive_partial_trace_B(rho, dim_a, dim_b)
    w = np.linalg.eigvalsh((red + red.conj().T) / 2)
    return np.sort(np.clip(w, 0, None))[::-1]


def exact_majorized(alpha, beta):
    """Majorization over Fractions: no rounding, no tolerance."""
    a = sorted((Fraction(x) for x in alpha), reverse=True)
    b = sorted((Fraction(x) for x in beta), reverse=True)
    n = max(len(a), len(b))
    a += [Fraction(0)] * (n - len(a))
    b += [Fraction(0)] * (n - len(b))
    sa = sb = Fraction(0)
    for x, y in zip(a[:-1], b[:-1]):
        sa += x
        sb += y
        if sa > sb:
            return False
    return True


def random_dyadic_spectrum(rng, n, bits=8):
    """Probability vector whose entries are multiples of 2**-bits, exact in binary."""
    total = 2 ** bits
    cuts = np.sort(rng.integers(0, total + 1, size=n - 1))
    counts = np.diff(np.concatenate([[0], cuts, [total]]))
    return [Fraction(int(c), total) for c in counts]


def grid_conversion_fidelity(alpha, beta, step=0.01):
    """Plain exhaustive scan over sorted mu on a simplex grid (length <= 4)."""
    a = np.sort(np.asarray(alpha, float))[::-1]
    b = np.sort(np.asarray(beta, float))[::-1]
    n = max(np.count_nonzero(a), np.count_nonzero(b))
    a = np.concatenate([a, np.zeros(4)])[:n]
    b = np.concatenate([b, np.zeros(4)])[:n]
    steps = int(round(1 / step))
    pa = np.cumsum(a)
    best = 0.0
    for idx in product(range(steps + 1), repeat=n - 1):
        rest = steps - sum(idx)
        if rest < 0:
            continue
        mu = np.array(list(idx) + [rest]) / steps
        if np.any(np.diff(mu) > 1e-12) or np.any(np.cumsum(mu)[:-1] < pa[:-1] - 1e-12):
            continue
        best = max(best, float(np.sum(np.sqrt(mu * b)) ** 2))
    return best


def product_vector_scan(u, v, dim_a, dim_b, radius=4.0, points=161, threshold=1e-6):
    """Count product vectors in span{u, v} by scanning the second singular value.

    Scans ``z u + v`` on a grid in the disc ``|z| <= radius`` and ``u + w v`` on
    the same grid, keeps grid-local minima, polishes them with Nelder-Mead and
    counts distinct directions with a vanishing second singular value.
    """
    from scipy.optimize import minimize

    def s2(vec):
        s = np.linalg.svd(vec.reshape(dim_a, dim_b) / np.linalg.norm(vec), compute_uv=False)
        return s[1] if s.size > 1 else 0.0

    xs = np.linspace(-radius, radius, points)
    found = []
    for first, second in ((u, v), (v, u)):
        grid = np.array([[s2(complex(x, y) * first + second) for x in xs] for y in xs])
        for iy in range(1, points - 1):
            for ix in range(1, points - 1):
                window = grid[iy - 1:iy + 2, ix - 1:ix + 2]
                if grid[iy, ix] > window.min() or grid[iy, ix] > 0.2:
                    continue
                res = minimize(lambda p: s2(complex(*p) * first + second),
                               [xs[ix], xs[iy]], method="Nelder-Mead",
                               options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
                if res.fun < threshold:
                    vec = complex(*res.x) * first + second
                    vec = vec / np.linalg.norm(vec)
                    if all(abs(abs(np.vdot(vec, w)) - 1) > 1e-6 for w in found):
                        found.append(vec)
    return len(found)

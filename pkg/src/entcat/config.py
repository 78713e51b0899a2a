"""Numerical tolerances shared by every module.

Majorization verdicts flip on tolerance choices, so all thresholds live in one
frozen record that commands echo back in their reports.
"""

from dataclasses import asdict, dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    norm: float = 1e-10  # pure-state normalization
    hermitian: float = 1e-10  # density-matrix hermiticity, entrywise
    psd: float = 1e-10  # smallest admissible eigenvalue is -psd
    trace: float = 1e-10
    eig_input_hermitian: float = 1e-8  # hermitian_eig rejects beyond this
    clamp_reject: float = 1e-8  # eigenvalues below -clamp_reject are errors, above are clamped to 0
    kraus: float = 1e-8  # sum A^dag A <= 1 + kraus
    degenerate_prob: float = 1e-12
    majorization: float = 1e-10
    spectrum_entry: float = 1e-12
    spectrum_sum: float = 1e-9
    orthogonality: float = 1e-10
    product_rank: float = 1e-10  # second Schmidt coefficient of a product vector
    ppt: float = 1e-10
    max_joint_dim: int = 4096

    def with_overrides(self, **kwargs) -> "Tolerances":
        return replace(self, **kwargs)

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT = Tolerances()

"""Named states from the worked catalysis example.

Basis labels |1>..|5> map to indices 0..4; the catalyst lives on its own
two-level systems, so its labels |6>, |7> map to indices 0, 1.
"""

import numpy as np

from .qcore import PureState

DIM = 5


def _diag_state(weights, dim=DIM) -> PureState:
    return PureState.from_terms({(i, i): np.sqrt(w) for i, w in enumerate(weights) if w},
                                dim, dim)


def source_state() -> PureState:
    """sqrt(.38)|11> + sqrt(.38)|22> + sqrt(.095)|33> + sqrt(.095)|44> + sqrt(.05)|55>."""
    return _diag_state([0.38, 0.38, 0.095, 0.095, 0.05])


def target_state() -> PureState:
    """sqrt(.5)|11> + sqrt(.25)|22> + sqrt(.25)|33>."""
    return _diag_state([0.5, 0.25, 0.25])


def core_state() -> PureState:
    """Normalized projection of the source state away from |55>."""
    return _diag_state([0.4, 0.4, 0.1, 0.1])


def product_state() -> PureState:
    """|55>, the product component shared by both mixtures."""
    return PureState.from_terms({(4, 4): 1.0}, DIM, DIM)


def catalyst_state() -> PureState:
    """sqrt(.4)|66> + sqrt(.6)|77> on a separate pair of qubits."""
    return PureState.from_terms({(0, 0): np.sqrt(0.4), (1, 1): np.sqrt(0.6)}, 2, 2)


def mixed_source_family(eps: float) -> PureState:
    """eps * (core state) + sqrt(1 - eps^2) |55>, for 0 < eps <= 1."""
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    w = [0.4, 0.4, 0.1, 0.1]
    terms = {(i, i): eps * np.sqrt(x) for i, x in enumerate(w)}
    terms[(4, 4)] = np.sqrt(max(1.0 - eps * eps, 0.0))
    return PureState.from_terms(terms, DIM, DIM, normalize=True)


def bell_state(dim: int = 2) -> PureState:
    return PureState.from_terms({(i, i): 1 / np.sqrt(dim) for i in range(dim)}, dim, dim)


CATALYST_SPECTRUM = (0.6, 0.4)
EXAMPLE_LAMBDA = 0.5

# names accepted by the command line front end
PRESETS = {
    "psi-eq8a": source_state,
    "phi-eq8b": target_state,
    "phitilde-eq10": core_state,
    "omega-catalyst": catalyst_state,
    "eta-55": product_state,
    "bell": bell_state,
}


def lookup(name: str) -> PureState:
    """Resolve a preset name; ``psi-eq14(<eps>)`` selects the eps family."""
    if name.startswith("psi-eq14(") and name.endswith(")"):
        return mixed_source_family(float(name[len("psi-eq14("):-1]))
    try:
        return PRESETS[name]()
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from "
                       f"{sorted(PRESETS) + ['psi-eq14(<eps>)']}") from None

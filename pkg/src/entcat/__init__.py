"""Pure and mixed entanglement transformations, with and without catalysts."""

from .catalysis import (CatalystSearchConfig, catalysis_free_radius, catalyst_search,
                        close_mixed_catalysis_pair, elocc_with_catalyst,
                        qubit_catalyst_intervals)
from .config import DEFAULT, Tolerances
from .errors import (DegenerateBranchError, DimensionError, EntcatError, HypothesisError,
                     ProtocolError, StateError)
from .io import dumps_state, loads_state, read_state, write_state
from .majorize import epsilon_order_radius, is_majorized, product_spectrum
from .mixedcat import (build_class, elocc_protocol_execute, f_elocc_lower_bound,
                       f_locc_upper_bound, lemma1_check, product_vectors_in_range)
from .purify import (KentClassState, fidelity_lambda_curve, lambda0_bisect,
                     random_separable_attack)
from .qcore import (DensityMatrix, KrausPair, PureState, apply_separable_map, hermitian_eig,
                    partial_trace_A, partial_trace_B, schmidt_spectrum, tensor_product,
                    trace_distance, uhlmann_fidelity)
from .transform import Decision, Verdict, locc_pure, optimal_conversion_fidelity

__version__ = "0.1.0"

class EntcatError(ValueError):
    """Base class for all input and hypothesis errors raised by entcat."""


class DimensionError(EntcatError):
    pass


class StateError(EntcatError):
    """An array does not describe a valid pure state or density matrix."""


class DegenerateBranchError(EntcatError):
    """A Kraus branch (or a whole map) has vanishing success probability."""


class HypothesisError(EntcatError):
    """Inputs violate the assumptions of the rank-two mixed-state class."""


class ProtocolError(EntcatError):
    pass

class HppError(ValueError):
    """Base class for all hppcrypt errors."""


class FormatError(HppError):
    """Malformed serialized data: wrong block length, bad container header,
    unparseable image file."""


class ParameterError(HppError):
    """Structurally valid data combined with out-of-range or inconsistent
    parameters: wall outside the lattice, key too short, empty report."""
